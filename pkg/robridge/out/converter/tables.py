from typing import Dict, List, Mapping, Sequence

import numpy as np
from overrides import override

from robridge.out.converter.converter import BANNER, Converter


SUITE_HEADERS = {
    "nominal": "Nominal",
    "unseen_background": "Unseen Background",
    "unseen_light": "Unseen Light",
    "unseen_color": "Unseen Color",
    "unseen_camera": "Unseen Camera",
}


def _pct(x: float) -> str:
    return f"{100.0 * x:.1f}"


def _table(title: str, header: Sequence[str], rows: List[Sequence[str]]) -> str:
    lines = [f"## {title}", "", BANNER, ""]
    lines.append("| " + " | ".join(header) + " |")
    lines.append("|" + "|".join("---" for _ in header) + "|")
    lines.extend("| " + " | ".join(row) + " |" for row in rows)
    return "\n".join(lines) + "\n"


class SuccessTableConverter(Converter):
    @override
    def convert(self, *args, **kwargs) -> str:
        """
        tasks x suites 성공률 표. 마지막 열과 마지막 행이 Mean 이다.

        :param rates: Dict[task, Dict[suite, success rate]]
        :param suites: 열 순서
        :param unseen: 학습하지 않은 task 의 성공률. 있으면 같은 모양의 표를 하나 더 붙인다.
        """
        rates: Mapping[str, Mapping[str, float]] = kwargs["rates"]
        suites: Sequence[str] = kwargs["suites"]
        rows = []
        for task_id in rates:
            values = [rates[task_id][s] for s in suites]
            rows.append([task_id, *map(_pct, values), _pct(float(np.mean(values)))])
        column_means = [float(np.mean([rates[t][s] for t in rates])) for s in suites]
        rows.append(["Mean", *map(_pct, column_means), _pct(float(np.mean(column_means)))])
        header = ["Task", *(SUITE_HEADERS.get(s, s) for s in suites), "Mean"]
        text = _table(kwargs.get("title", "Success rate (%)"), header, rows)
        if kwargs.get("unseen"):
            text += "\n" + self.convert(rates=kwargs["unseen"], suites=suites, title="Unseen tasks success rate (%)")
        return text


class AvgLenConverter(Converter):
    @override
    def convert(self, *args, **kwargs) -> str:
        """
        :param stages: Dict[task, List[연속으로 끝낸 stage 수]] (episode 별)
        :param n_stages: stage 수
        """
        stages: Mapping[str, Sequence[int]] = kwargs["stages"]
        n_stages: int = kwargs["n_stages"]
        rows = []
        for task_id, counts in stages.items():
            counts = np.asarray(counts)
            at_least = [_pct(float(np.mean(counts >= k))) for k in range(1, n_stages + 1)]
            rows.append([task_id, *at_least, f"{float(np.mean(counts)):.2f}"])
        header = ["Task", *(str(k) for k in range(1, n_stages + 1)), "Avg. Len."]
        return _table(kwargs.get("title", "Long-horizon stages completed in a row (%)"), header, rows)


class WeightTraceConverter(Converter):
    @override
    def convert(self, *args, **kwargs) -> str:
        """
        :param history: IterationMetrics.as_dict() 의 list
        """
        history: Sequence[Mapping] = kwargs["history"]
        tasks = sorted(history[0]["weights"]) if history else []
        rows = []
        for m in history:
            rows.append(
                [
                    str(m["iteration"]),
                    _pct(m["success_rate"]),
                    *(f"{m['weights'][t]:.3f}" for t in tasks),
                    *(str(m["dataset_sizes"][t]) for t in tasks),
                ]
            )
        header = ["Iteration", "Success (%)", *(f"w {t}" for t in tasks), *(f"|D| {t}" for t in tasks)]
        return _table(kwargs.get("title", "Adaptive sampling trace"), header, rows)


class AblationConverter(Converter):
    @override
    def convert(self, *args, **kwargs) -> str:
        """
        :param rates: Dict[variant, Dict[suite, mean success rate over tasks]]
        """
        rates: Mapping[str, Mapping[str, float]] = kwargs["rates"]
        suites: Sequence[str] = kwargs["suites"]
        rows: List[List[str]] = []
        for variant, by_suite in rates.items():
            values = [by_suite[s] for s in suites]
            rows.append([variant, *map(_pct, values), _pct(float(np.mean(values)))])
        header = ["Method", *(SUITE_HEADERS.get(s, s) for s in suites), "Mean"]
        return _table(kwargs.get("title", "Ablation"), header, rows)


CONVERTERS: Dict[str, Converter] = {
    "success": SuccessTableConverter(),
    "avg_len": AvgLenConverter(),
    "weights": WeightTraceConverter(),
    "ablation": AblationConverter(),
}
