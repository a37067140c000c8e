import copy
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from robridge.exceptions import ActionError, SceneError
from robridge.items import EntityVO
from robridge.settings import (
    FIRST_RESOLUTION,
    FIRST_SCALE,
    GRASP_THRESHOLD,
    MIN_RESOLUTION,
    THIRD_RESOLUTION,
    THIRD_SCALE,
    WORKSPACE_MAX,
    WORKSPACE_MIN,
)


Vec3 = Tuple[float, float, float]
Pose = Tuple[float, float, float, float]


@dataclass(kw_only=True)
class GripperState:
    pose: Pose = field()
    aperture: float = field(default=1.0)
    holding: Optional[int] = field(default=None)
    hold_offset: Vec3 = field(default=(0.0, 0.0, 0.0))  # held pose - tip

    @property
    def tip(self) -> np.ndarray:
        return np.array(self.pose[:3], dtype=np.float64)

    @property
    def is_open(self) -> bool:
        return self.aperture >= GRASP_THRESHOLD


@dataclass(kw_only=True)
class Appearance:
    """
    Appearance only. Geometry never reads these values.
    """

    background: str = field(default="plain")
    light_gain: Vec3 = field(default=(1.0, 1.0, 1.0))


@dataclass(kw_only=True)
class WorldState:
    entities: List[EntityVO] = field()
    gripper: GripperState = field()
    workspace: Tuple[Vec3, Vec3] = field(default=(WORKSPACE_MIN, WORKSPACE_MAX))
    tick: int = field(default=0)
    rng_seed: int = field(default=0)
    appearance: Appearance = field(default_factory=Appearance)

    def entity(self, entity_id: int) -> EntityVO:
        for e in self.entities:
            if e.id == entity_id:
                return e
        raise SceneError(f"Unknown entity id: {entity_id}")

    def find(self, name: str) -> Optional[EntityVO]:
        name = name.lower().strip()
        for e in self.entities:
            if e.name == name:
                return e
        return None

    def symbol_table(self) -> Dict[str, Tuple[int, str]]:
        return {e.name: (e.id, e.shape) for e in self.entities}

    def held(self) -> Optional[EntityVO]:
        if self.gripper.holding is None:
            return None
        return self.entity(self.gripper.holding)

    def copy(self) -> "WorldState":
        return copy.deepcopy(self)

    def digest(self) -> str:
        payload = json.dumps(asdict(self), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()


@dataclass(frozen=True, kw_only=True)
class CameraConfig:
    view: str = field()  # third | first
    offset: Vec3 = field(default=(0.0, 0.0, 0.0))  # dx px, dy px, dtheta rad
    resolution: Tuple[int, int] = field()
    scale: float = field()

    def __post_init__(self):
        if self.view not in {"third", "first"}:
            raise SceneError(f"Unknown camera view: {self.view!r}")
        if min(self.resolution) < MIN_RESOLUTION:
            raise SceneError(f"Camera resolution too small: {self.resolution}")
        if not self.scale > 0:
            raise SceneError(f"Camera scale must be positive: {self.scale}")

    @classmethod
    def third(cls, offset: Vec3 = (0.0, 0.0, 0.0)) -> "CameraConfig":
        return cls(
            view="third", offset=offset, resolution=THIRD_RESOLUTION, scale=THIRD_SCALE
        )

    @classmethod
    def first(cls, offset: Vec3 = (0.0, 0.0, 0.0)) -> "CameraConfig":
        return cls(
            view="first", offset=offset, resolution=FIRST_RESOLUTION, scale=FIRST_SCALE
        )


@dataclass(kw_only=True)
class Frame:
    rgb3: np.ndarray = field()  # H x W x 3 uint8
    depth1: np.ndarray = field()  # h x w float64 meters
    instance3: np.ndarray = field()  # H x W int32
    instance1: np.ndarray = field()  # h x w int32
    gripper: GripperState = field()
    tick: int = field()
    # name -> (id, shape); not part of the digest
    symbols: Dict[str, Tuple[int, str]] = field(default_factory=dict)
    cams: Optional[Tuple[CameraConfig, CameraConfig]] = field(default=None)

    def digest(self) -> str:
        h = hashlib.sha256()
        for arr in (self.rgb3, self.depth1, self.instance3, self.instance1):
            h.update(np.ascontiguousarray(arr).tobytes())
        h.update(json.dumps(asdict(self.gripper), sort_keys=True).encode())
        h.update(str(self.tick).encode())
        return h.hexdigest()


@dataclass(frozen=True)
class Action4:
    dx: float = 0.0
    dy: float = 0.0
    dz: float = 0.0
    g: float = 0.0

    @classmethod
    def coerce(cls, action) -> "Action4":
        """
        :param action: Action4 | 길이 4 sequence
        :return: [-1, 1] 로 clamp 된 Action4
        """
        values = (
            (action.dx, action.dy, action.dz, action.g)
            if isinstance(action, Action4)
            else tuple(float(v) for v in action)
        )
        if len(values) != 4:
            raise ActionError(f"Action needs 4 components, got {len(values)}")
        if not all(math.isfinite(v) for v in values):
            raise ActionError(f"Non-finite action: {values}")
        return cls(*(min(1.0, max(-1.0, float(v))) for v in values))

    def as_array(self) -> np.ndarray:
        return np.array([self.dx, self.dy, self.dz, self.g], dtype=np.float64)
