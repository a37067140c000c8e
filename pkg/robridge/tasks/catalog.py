import json
import logging
import typing
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional

from marshmallow import EXCLUDE, Schema, ValidationError, fields, types, validate

from robridge.exceptions import ConfigError, SchemaVersionError, TaskNotFoundError
from robridge.items import PrimitiveActionVO
from robridge.items.schemas import PrimitiveActionSchema
from robridge.settings import SCHEMA_VERSION


logger = logging.getLogger("robridge.tasks")

CATALOG_DIR = Path(__file__).parent / "catalog"


@dataclass(kw_only=True, frozen=True)
class NamedCall:
    """
    catalog 의 이름 붙은 predicate / reward 호출
    """

    name: str = field()
    args: dict = field(default_factory=dict)


class NamedCallSchema(Schema):
    name = fields.Str(required=True)
    args = fields.Dict(keys=fields.Str(), load_default={})


@dataclass(kw_only=True)
class TaskSpec:
    id: str = field()
    split: str = field()  # train | unseen | long_horizon
    instruction_template: str = field()
    slots: Dict[str, str] = field()
    scene: dict = field()
    success: NamedCall = field()
    reward: NamedCall = field()
    oracle_plan: List[PrimitiveActionVO] = field()
    stages: List[NamedCall] = field(default_factory=list)

    def instruction(self) -> str:
        return self.instruction_template.format(**self.slots)

    class __TaskSpecSchema(Schema):
        schema_version = fields.Integer(required=True)
        id = fields.Str(required=True, validate=validate.Length(min=1))
        split = fields.Str(
            required=True, validate=validate.OneOf(["train", "unseen", "long_horizon"])
        )
        instruction_template = fields.Str(required=True)
        slots = fields.Dict(keys=fields.Str(), values=fields.Str(), required=True)
        scene = fields.Dict(required=True)
        success = fields.Nested(NamedCallSchema, required=True)
        reward = fields.Nested(NamedCallSchema, required=True)
        oracle_plan = fields.List(
            fields.Nested(PrimitiveActionSchema),
            required=True,
            validate=validate.Length(min=1),
        )
        stages = fields.List(
            fields.Nested(NamedCallSchema), load_default=[]
        )

        class Meta:
            unknown = EXCLUDE

        def load(
            self,
            data: (
                typing.Mapping[str, typing.Any]
                | typing.Iterable[typing.Mapping[str, typing.Any]]
            ),
            *,
            many: bool | None = None,
            partial: bool | types.StrSequenceOrSet | None = None,
            unknown: str | None = None,
        ):
            res = super().load(data, many=many, partial=partial, unknown=unknown)
            res.pop("schema_version")
            res["success"] = NamedCall(**res["success"])
            res["reward"] = NamedCall(**res["reward"])
            res["stages"] = [NamedCall(**s) for s in res["stages"]]
            res["oracle_plan"] = [PrimitiveActionVO(**a) for a in res["oracle_plan"]]
            return TaskSpec(**res)

    @classmethod
    def load(cls, data: typing.Mapping[str, typing.Any]) -> "TaskSpec":
        if data.get("schema_version") != SCHEMA_VERSION:
            raise SchemaVersionError(
                f"Unsupported task schema_version: {data.get('schema_version')!r}"
            )
        return cls.__TaskSpecSchema().load(data)


class Catalog:
    """
    불변 task catalog. 파일 하나가 task 하나이다.
    """

    def __init__(self, root: Path = CATALOG_DIR):
        self.__tasks: Dict[str, TaskSpec] = {}
        for path in sorted(Path(root).glob("*.json")):
            with open(path, "r") as fd:
                raw = json.load(fd)
            try:
                task = TaskSpec.load(raw)
            except ValidationError as e:
                raise ConfigError(f"{path.name}: {e.messages}") from e
            self.__tasks[task.id] = task
        logger.debug(f"Loaded {len(self.__tasks)} tasks from {root}")

    def get(self, task_id: str) -> TaskSpec:
        try:
            return self.__tasks[task_id]
        except KeyError:
            raise TaskNotFoundError(f"Unknown task id: {task_id!r}") from None

    def ids(self, split: Optional[str] = None) -> List[str]:
        return [t.id for t in self.__tasks.values() if split is None or t.split == split]

    def __contains__(self, task_id: str) -> bool:
        return task_id in self.__tasks


@lru_cache(maxsize=1)
def default_catalog() -> Catalog:
    return Catalog()
