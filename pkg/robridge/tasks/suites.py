import json
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Dict, NamedTuple, Optional, Tuple, Union

import numpy as np
from marshmallow import Schema, ValidationError, fields, validate

from robridge.exceptions import ConfigError, SchemaVersionError
from robridge.settings import (
    EXPERT_ARM_OFFSET,
    EXPERT_CAMERA_ROT,
    EXPERT_CAMERA_SHIFT,
    EXPERT_DIM_SCALE,
    SCHEMA_VERSION,
)
from robridge.tasks.catalog import Catalog, default_catalog
from robridge.world.scene import create_world
from robridge.world.state import CameraConfig, WorldState


logger = logging.getLogger("robridge.tasks")

SUITES_FILE = Path(__file__).parent / "suites.json"
SUITE_NAMES = (
    "nominal",
    "unseen_background",
    "unseen_light",
    "unseen_color",
    "unseen_camera",
)

Range = Tuple[float, float]


@dataclass(kw_only=True, frozen=True)
class RandomizationSuite:
    name: str = field()
    background_textures: Tuple[str, ...] = field(default=("plain",))
    light_gain: Tuple[Range, ...] = field(default=())
    color_jitter: Optional[Range] = field(default=None)
    camera_rotation_deg: Optional[Range] = field(default=None)
    camera_shift_px: Optional[Range] = field(default=None)


@dataclass(kw_only=True, frozen=True)
class ExpertRandomization:
    """
    expert 데이터 수집용 scene 섭동. 이미지 공간 corruption 은 없다.
    """

    dim_scale: float = field(default=EXPERT_DIM_SCALE)
    arm_offset: float = field(default=EXPERT_ARM_OFFSET)
    camera_rot_deg: float = field(default=math.degrees(EXPERT_CAMERA_ROT))
    camera_shift_px: float = field(default=EXPERT_CAMERA_SHIFT)


class Instance(NamedTuple):
    world: WorldState
    instruction: str
    cams: Tuple[CameraConfig, CameraConfig]


class _SuiteSchema(Schema):
    name = fields.Str(required=True, validate=validate.OneOf(SUITE_NAMES))
    background_textures = fields.List(fields.Str(), load_default=["plain"])
    light_gain = fields.List(
        fields.List(fields.Float(), validate=validate.Length(equal=2)), load_default=[]
    )
    color_jitter = fields.List(
        fields.Integer(), load_default=None, validate=validate.Length(equal=2)
    )
    camera_rotation_deg = fields.List(
        fields.Float(), load_default=None, validate=validate.Length(equal=2)
    )
    camera_shift_px = fields.List(
        fields.Float(), load_default=None, validate=validate.Length(equal=2)
    )


class _SuitesFileSchema(Schema):
    schema_version = fields.Integer(required=True)
    training = fields.Dict(required=True)
    suites = fields.List(fields.Nested(_SuiteSchema), required=True)


def _as_range(value) -> Optional[Range]:
    return None if value is None else (float(value[0]), float(value[1]))


@lru_cache(maxsize=1)
def load_suites(path: Path = SUITES_FILE) -> Dict[str, RandomizationSuite]:
    with open(path, "r") as fd:
        raw = json.load(fd)
    if raw.get("schema_version") != SCHEMA_VERSION:
        raise SchemaVersionError(
            f"Unsupported suites schema_version: {raw.get('schema_version')!r}"
        )
    try:
        data = _SuitesFileSchema().load(raw)
    except ValidationError as e:
        raise ConfigError(f"{path.name}: {e.messages}") from e
    suites = {}
    for s in data["suites"]:
        suites[s["name"]] = RandomizationSuite(
            name=s["name"],
            background_textures=tuple(s["background_textures"]),
            light_gain=tuple(_as_range(r) for r in s["light_gain"]),
            color_jitter=_as_range(s["color_jitter"]),
            camera_rotation_deg=_as_range(s["camera_rotation_deg"]),
            camera_shift_px=_as_range(s["camera_shift_px"]),
        )
    return suites


@lru_cache(maxsize=1)
def training_textures(path: Path = SUITES_FILE) -> Tuple[str, ...]:
    with open(path, "r") as fd:
        return tuple(json.load(fd)["training"]["background_textures"])


def get_suite(suite: Union[str, RandomizationSuite]) -> RandomizationSuite:
    if isinstance(suite, RandomizationSuite):
        return suite
    try:
        return load_suites()[suite]
    except KeyError:
        raise ConfigError(f"Unknown suite: {suite!r}") from None


def _signed(rng: np.random.Generator, lo: float, hi: float) -> float:
    magnitude = float(rng.uniform(lo, hi))
    return magnitude if rng.random() < 0.5 else -magnitude


def _apply_suite(
    world: WorldState, suite: RandomizationSuite, rng: np.random.Generator
) -> Tuple[float, float, float]:
    """
    appearance 와 third camera offset 만 바꾼다. 기하는 건드리지 않는다.
    """
    if suite.background_textures != ("plain",):
        world.appearance.background = str(rng.choice(list(suite.background_textures)))
    if suite.light_gain:
        gains = []
        for _ in range(3):
            lo, hi = suite.light_gain[int(rng.integers(len(suite.light_gain)))]
            gains.append(float(rng.uniform(lo, hi)))
        world.appearance.light_gain = tuple(gains)
    if suite.color_jitter is not None:
        lo, hi = suite.color_jitter
        for e in world.entities:
            e.color = tuple(int(v) for v in rng.integers(lo, hi + 1, size=3))
    offset = (0.0, 0.0, 0.0)
    if suite.camera_rotation_deg is not None:
        dtheta = math.radians(_signed(rng, *suite.camera_rotation_deg))
        dx = _signed(rng, *suite.camera_shift_px)
        dy = _signed(rng, *suite.camera_shift_px)
        offset = (dx, dy, dtheta)
    return offset


def instantiate(
    task_id: str,
    suite: Union[str, RandomizationSuite],
    seed: int,
    randomization: Optional[ExpertRandomization] = None,
    catalog: Optional[Catalog] = None,
) -> Instance:
    """
    (task, suite, seed) 로 초기 world, instruction, camera 쌍을 만든다.
    기하 난수, expert 섭동 난수, appearance 난수는 서로 독립이다.
    """
    task = (catalog or default_catalog()).get(task_id)
    suite = get_suite(suite)
    if randomization is None:
        world = create_world(task.scene, seed)
        offset = (0.0, 0.0, 0.0)
    else:
        world = create_world(
            task.scene,
            seed,
            dim_scale=randomization.dim_scale,
            arm_offset=randomization.arm_offset,
        )
        rng = np.random.default_rng([seed, 2])
        world.appearance.background = str(rng.choice(list(training_textures())))
        offset = (
            float(rng.uniform(-randomization.camera_shift_px, randomization.camera_shift_px)),
            float(rng.uniform(-randomization.camera_shift_px, randomization.camera_shift_px)),
            math.radians(
                float(rng.uniform(-randomization.camera_rot_deg, randomization.camera_rot_deg))
            ),
        )

    if suite.name != "nominal":
        appearance_rng = np.random.default_rng([seed, 3, SUITE_NAMES.index(suite.name)])
        suite_offset = _apply_suite(world, suite, appearance_rng)
        if suite.camera_rotation_deg is not None:
            offset = suite_offset
    cams = (CameraConfig.third(offset), CameraConfig.first())
    logger.debug(f"Instantiated {task_id} suite={suite.name} seed={seed} cam3={offset}")
    return Instance(world=world, instruction=task.instruction(), cams=cams)
