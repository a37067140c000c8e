import json
import logging
from pathlib import Path

from robridge.out.converter.tables import CONVERTERS


class Reporter:
    """
    Facade Pattern
    """

    def __init__(self, *args, **kwargs):
        self.logger = logging.getLogger("robridge.reporter")

    def send(self, target: str, **kwargs) -> bool:
        """
        :param target: markdown | json
        :param path: 쓸 파일
        :param kind: markdown 표 종류 (success, avg_len, weights, ablation)
        :param data: json 으로 쓸 객체, 또는 converter 인자
        """
        path = Path(kwargs["path"])
        path.parent.mkdir(parents=True, exist_ok=True)
        match target:
            case "markdown":
                text = CONVERTERS[kwargs["kind"]].convert(**kwargs["data"])
            case "json":
                text = json.dumps(kwargs["data"], sort_keys=True, indent=2) + "\n"
            case _:
                raise NotImplementedError

        try:
            path.write_text(text)
            res = True
        except OSError as e:
            self.logger.error(e)
            res = False

        if res:
            self.logger.info(f"send to {target} {path} success.")
        else:
            self.logger.error(f"send to {target} {path} failed")
        return res
