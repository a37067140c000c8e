import os
from pathlib import Path
from typing import Optional

from robridge.exceptions import ConfigError
from robridge.items.config import ExperimentConfig
from robridge.out.model.enum.message_enum import MessageTypeEnum
from robridge.runners.ablate_runner import AblateRunner
from robridge.runners.collect_runner import CollectRunner
from robridge.runners.dagger_runner import DaggerRunner
from robridge.runners.eval_runner import EvalRunner
from robridge.runners.replay_runner import ReplayRunner


class Engine:
    __instance = None

    @classmethod
    def __get_instance(cls, *args, **kwargs) -> "Engine":
        return cls.__instance

    @classmethod
    def instance(cls, *args, **kwargs) -> "Engine":
        cls.__instance = cls(*args, **kwargs)
        cls.instance = cls.__get_instance
        return cls.__instance

    def __init__(self, command: str, stage: str, *args, **kwargs):
        self.__command = command
        self.__stage = stage
        self.__kwargs = kwargs

    def _out(self, config: Optional[ExperimentConfig]) -> Path:
        """
        --out > ROBRIDGE_OUT > config output_dir
        """
        if out := self.__kwargs.get("out"):
            return Path(out)
        if out := os.getenv("ROBRIDGE_OUT"):
            return Path(out)
        return Path(config.output_dir if config else "out")

    def run(self, *args, **kwargs) -> bool:
        if self.__stage in {"dev", "test"}:
            loglevel = "DEBUG"
        else:
            loglevel = "INFO"

        config = None
        if path := self.__kwargs.get("config"):
            config = ExperimentConfig.from_file(path)
        elif self.__command != "replay":
            raise ConfigError(f"{self.__command} needs --config")
        options = {
            "config": config,
            "out": self._out(config),
            "stage": self.__stage,
            "loglevel": loglevel,
            "seed_base": self.__kwargs.get("seed_base") or 0,
            "jobs": self.__kwargs.get("jobs") or 1,
        }

        match self.__command:
            case "collect":
                status = CollectRunner.run(**options)
                return status == MessageTypeEnum.SUCCESS
            case "dagger":
                DaggerRunner.run(**options)
                return True
            case "eval":
                EvalRunner.run(
                    suite=self.__kwargs.get("suite"),
                    checkpoint=self.__kwargs.get("checkpoint"),
                    log=self.__kwargs.get("episode_logs"),
                    **options,
                )
                return True
            case "replay":
                return ReplayRunner.run(log=self.__kwargs["log"], **options)
            case "ablate":
                AblateRunner.run(**options)
                return True
            case _:
                raise NotImplementedError
