import logging
from abc import ABCMeta, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, List, Sequence, TypeVar

from robridge.settings import LOG_FILE_APPEND, LOG_FORMAT


T = TypeVar("T")
R = TypeVar("R")


class Runner(metaclass=ABCMeta):
    logger = logging.getLogger("robridge.runner")

    @classmethod
    @abstractmethod
    def run(cls, *args, **kwargs):
        pass

    @classmethod
    def _prepare(cls, *args, **kwargs) -> Path:
        """
        :param out: 출력 디렉토리
        :param command: log 파일 이름
        :param loglevel: DEBUG | INFO
        :return: 출력 디렉토리
        """
        out = Path(kwargs["out"])
        out.mkdir(parents=True, exist_ok=True)
        loglevel = kwargs.get("loglevel", "DEBUG")
        formatter = logging.Formatter(LOG_FORMAT)
        root = logging.getLogger("robridge")
        for handler in list(root.handlers):
            root.removeHandler(handler)
            handler.close()
        handlers = [
            logging.StreamHandler(),
            logging.FileHandler(out / f"{kwargs['command']}.log", mode="a" if LOG_FILE_APPEND else "w"),
        ]
        for handler in handlers:
            handler.setFormatter(formatter)
            root.addHandler(handler)
        root.setLevel(loglevel)
        cls.logger.info(f"Stage: {kwargs.get('stage')}, Log Level: {loglevel}, Out: {out}")
        return out

    @classmethod
    def _fan_out(cls, fn: Callable[[T], R], items: Sequence[T], jobs: int = 1) -> List[R]:
        """
        items 순서대로 결과를 돌려준다. jobs > 1 이면 thread pool 에서 돈다.
        """
        if jobs <= 1:
            return [fn(item) for item in items]
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
