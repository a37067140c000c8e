from abc import ABCMeta, abstractmethod
from dataclasses import asdict, dataclass, field
from typing import Optional, Tuple

from marshmallow import Schema

from robridge.items.schemas import (
    ArticulationSchema,
    EntitySchema,
    PrimitiveActionSchema,
)


class ItemVO(metaclass=ABCMeta):
    @staticmethod
    @abstractmethod
    def get_schema() -> Schema:
        pass

    def validate(self) -> dict:
        """
        :return: marshmallow error dict, 비어 있으면 유효하다
        """
        return self.get_schema().validate(asdict(self))


@dataclass(kw_only=True)
class ArticulationVO(ItemVO):
    joint: str = field()  # prismatic | revolute
    axis: Tuple[float, float, float] = field()
    range: Tuple[float, float] = field()
    coordinate: float = field()
    mode: str = field()  # grip | contact

    @property
    def lo(self) -> float:
        return self.range[0]

    @property
    def hi(self) -> float:
        return self.range[1]

    @staticmethod
    def get_schema() -> Schema:
        return ArticulationSchema()


@dataclass(kw_only=True)
class EntityVO(ItemVO):
    """
    pose 는 (x, y, z, yaw). z 는 바닥면 높이이다.
    dims: box 는 (sx, sy, sz), cylinder 는 (radius, height)
    """

    id: int = field()
    name: str = field()
    shape: str = field()
    dims: Tuple[float, ...] = field()
    color: Tuple[int, int, int] = field()
    pose: Tuple[float, float, float, float] = field()
    graspable: bool = field(default=False)
    solid: bool = field(default=True)
    on: Optional[str] = field(default=None)
    articulation: Optional[ArticulationVO] = field(default=None)

    @property
    def height(self) -> float:
        return self.dims[2] if self.shape == "box" else self.dims[1]

    @property
    def top(self) -> float:
        return self.pose[2] + self.height

    @staticmethod
    def get_schema() -> Schema:
        return EntitySchema()


@dataclass(kw_only=True, frozen=True)
class PrimitiveActionVO(ItemVO):
    type: str = field()
    obj: str = field()
    des: Optional[str] = field(default=None)

    def __str__(self) -> str:
        if self.des:
            return f"{self.type}({self.obj}, {self.des})"
        return f"{self.type}({self.obj})"

    @staticmethod
    def get_schema() -> Schema:
        return PrimitiveActionSchema()
