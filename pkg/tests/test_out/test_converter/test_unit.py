import json

import pytest

from robridge.out.converter.converter import BANNER
from robridge.out.converter.tables import (
    AblationConverter,
    AvgLenConverter,
    SuccessTableConverter,
    WeightTraceConverter,
)
from robridge.out.reporter import Reporter


@pytest.fixture
def rates():
    return {
        "pick-place": {"nominal": 1.0, "unseen_camera": 0.5},
        "press-button": {"nominal": 0.5, "unseen_camera": 0.0},
    }


def test_success_table(rates):
    # given
    converter = SuccessTableConverter()

    # when
    res = converter.convert(rates=rates, suites=["nominal", "unseen_camera"])
    # then
    lines = res.splitlines()
    assert BANNER in lines
    assert "| Task | Nominal | Unseen Camera | Mean |" in lines
    assert "| pick-place | 100.0 | 50.0 | 75.0 |" in lines
    assert "| press-button | 50.0 | 0.0 | 25.0 |" in lines
    assert lines[-1] == "| Mean | 75.0 | 25.0 | 50.0 |"


def test_success_table_with_unseen_tasks(rates):
    # when
    res = SuccessTableConverter().convert(
        rates=rates, suites=["nominal"], unseen={"bin-pick": {"nominal": 0.25}, "press-handle": {"nominal": 0.75}}
    )
    # then
    lines = res.splitlines()
    assert "## Success rate (%)" in lines
    assert "## Unseen tasks success rate (%)" in lines
    assert lines.index("## Unseen tasks success rate (%)") > lines.index("| pick-place | 100.0 | 100.0 |")
    assert "| bin-pick | 25.0 | 25.0 |" in lines
    assert lines[-1] == "| Mean | 50.0 | 50.0 |"


def test_avg_len_table():
    # given
    converter = AvgLenConverter()

    # when
    res = converter.convert(stages={"pick-insert": [4, 2, 0, 4]}, n_stages=4)
    # then
    assert "| Task | 1 | 2 | 3 | 4 | Avg. Len. |" in res.splitlines()
    assert res.splitlines()[-1] == "| pick-insert | 75.0 | 75.0 | 50.0 | 50.0 | 2.50 |"


def test_weight_trace_table():
    # given
    history = [
        {
            "iteration": 1,
            "success_rate": 0.5,
            "weights": {"b": 1.0, "a": 2.0},
            "dataset_sizes": {"a": 7, "b": 5},
        }
    ]

    # when
    res = WeightTraceConverter().convert(history=history)
    # then
    assert "| Iteration | Success (%) | w a | w b | |D| a | |D| b |" in res.splitlines()
    assert res.splitlines()[-1] == "| 1 | 50.0 | 2.000 | 1.000 | 7 | 5 |"


def test_ablation_table():
    # when
    res = AblationConverter().convert(
        rates={"full": {"nominal": 0.8, "unseen_light": 0.6}, "w/o DAgger": {"nominal": 0.5, "unseen_light": 0.3}},
        suites=["nominal", "unseen_light"],
    )
    # then
    assert "| full | 80.0 | 60.0 | 70.0 |" in res.splitlines()
    assert res.splitlines()[-1] == "| w/o DAgger | 50.0 | 30.0 | 40.0 |"


def test_reporter(rates, tmp_path):
    # given
    reporter = Reporter()

    # when
    markdown = reporter.send(
        target="markdown", kind="success", path=tmp_path / "a" / "success.md", data={"rates": rates, "suites": ["nominal"]}
    )
    dumped = reporter.send(target="json", path=tmp_path / "eval.json", data={"b": 1, "a": [0.5]})
    # then
    assert markdown and dumped
    assert (tmp_path / "a" / "success.md").read_text().startswith("## Success rate (%)")
    assert (tmp_path / "eval.json").read_text() == json.dumps({"a": [0.5], "b": 1}, sort_keys=True, indent=2) + "\n"
    with pytest.raises(NotImplementedError):
        reporter.send(target="csv", path=tmp_path / "x", data={})
