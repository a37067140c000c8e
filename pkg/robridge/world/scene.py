import logging
from typing import Dict, List, Optional

import numpy as np
from marshmallow import (
    EXCLUDE,
    Schema,
    ValidationError,
    fields,
    validate,
    validates_schema,
)

from robridge.exceptions import SceneError, SchemaVersionError
from robridge.items import ArticulationVO, EntityVO
from robridge.settings import (
    FIRST_ENTITY_ID,
    GRIPPER_START,
    INTERPENETRATION_TOL,
    SCHEMA_VERSION,
    WORKSPACE_MAX,
    WORKSPACE_MIN,
)
from robridge.world.geometry import aabb, footprint_overlap, vertical_overlap
from robridge.world.state import GripperState, WorldState


logger = logging.getLogger("robridge.world")

MAX_REDRAWS = 50

# 모든 팔레트 색은 최소 한 채널이 60 이하이거나 200 이상이다.
# unseen_color 의 mid-tone band [96, 160] 과 겹치지 않는다.
PALETTE: Dict[str, tuple] = {
    "red": (220, 30, 30),
    "green": (30, 200, 60),
    "blue": (30, 60, 220),
    "yellow": (235, 215, 30),
    "purple": (170, 40, 210),
    "orange": (240, 130, 20),
    "white": (245, 245, 245),
    "black": (30, 30, 30),
    "gray": (200, 200, 200),
    "brown": (140, 80, 30),
    "cyan": (30, 210, 210),
}


class CoordinateField(fields.Field):
    """
    고정 값 (number) 또는 [lo, hi] 샘플링 범위
    """

    def _deserialize(self, value, attr, data, **kwargs):
        if isinstance(value, bool):
            raise ValidationError("Coordinate must be a number or [lo, hi]")
        if isinstance(value, (int, float)):
            return float(value)
        if isinstance(value, (list, tuple)) and len(value) == 2:
            lo, hi = (float(v) for v in value)
            if lo > hi:
                raise ValidationError(f"Range lo > hi: {value!r}")
            return lo, hi
        raise ValidationError("Coordinate must be a number or [lo, hi]")


class PositionSchema(Schema):
    x = CoordinateField(load_default=None)
    y = CoordinateField(load_default=None)
    z = CoordinateField(load_default=0.0)
    relative_to = fields.Str(load_default=None)
    offset = fields.List(
        fields.Float(), load_default=None, validate=validate.Length(equal=3)
    )

    @validates_schema
    def validate_mode(self, data, **kwargs):
        if data.get("relative_to") is not None:
            if data.get("offset") is None:
                raise ValidationError("relative_to needs an offset", "offset")
        elif data.get("x") is None or data.get("y") is None:
            raise ValidationError("position needs x and y or relative_to", "x")


class ArticulationSpecSchema(Schema):
    joint = fields.Str(required=True, validate=validate.OneOf(["prismatic", "revolute"]))
    axis = fields.List(fields.Float(), required=True, validate=validate.Length(equal=3))
    range = fields.List(fields.Float(), required=True, validate=validate.Length(equal=2))
    mode = fields.Str(required=True, validate=validate.OneOf(["grip", "contact"]))
    initial = fields.Str(load_default="lo", validate=validate.OneOf(["lo", "hi"]))


class EntitySpecSchema(Schema):
    name = fields.Str(required=True, validate=validate.Length(min=1))
    shape = fields.Str(required=True, validate=validate.OneOf(["box", "cylinder"]))
    dims = fields.List(fields.Float(), required=True)
    color = fields.Str(required=True, validate=validate.OneOf(list(PALETTE)))
    position = fields.Nested(PositionSchema, required=True)
    yaw = CoordinateField(load_default=0.0)
    graspable = fields.Boolean(load_default=False)
    solid = fields.Boolean(load_default=True)
    on = fields.Str(load_default=None, allow_none=True)
    articulation = fields.Nested(
        ArticulationSpecSchema, load_default=None, allow_none=True
    )


class SceneSpecSchema(Schema):
    schema_version = fields.Integer(required=True)
    entities = fields.List(fields.Nested(EntitySpecSchema), required=True)

    class Meta:
        unknown = EXCLUDE

    @validates_schema
    def validate_names(self, data, **kwargs):
        names = [e["name"] for e in data["entities"]]
        if len(names) != len(set(names)):
            raise ValidationError(f"Duplicated entity names: {names}", "entities")


def load_scene_spec(scene_spec: dict) -> dict:
    version = scene_spec.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionError(f"Unsupported scene schema_version: {version!r}")
    try:
        return SceneSpecSchema().load(scene_spec)
    except ValidationError as e:
        raise SceneError(f"Malformed scene spec: {e.messages}") from e


def _draw(value, rng: np.random.Generator) -> float:
    if isinstance(value, tuple):
        return float(rng.uniform(value[0], value[1]))
    return float(value)


def _is_fixed(spec: dict) -> bool:
    position = spec["position"]
    values = [position["x"], position["y"], position["z"], spec["yaw"]]
    return not any(isinstance(v, tuple) for v in values)


def _inside_workspace(entity: EntityVO) -> bool:
    x0, y0, x1, y1 = aabb(entity)
    return (
        x0 >= WORKSPACE_MIN[0]
        and y0 >= WORKSPACE_MIN[1]
        and x1 <= WORKSPACE_MAX[0]
        and y1 <= WORKSPACE_MAX[1]
    )


def _collides(entity: EntityVO, placed: List[EntityVO]) -> Optional[EntityVO]:
    for other in placed:
        if entity.on == other.name or other.on == entity.name:
            continue
        if (
            footprint_overlap(entity, other) > INTERPENETRATION_TOL
            and vertical_overlap(entity, other) > INTERPENETRATION_TOL
        ):
            return other
    return None


def _articulate(spec: dict, pose: List[float]) -> Optional[ArticulationVO]:
    art = spec["articulation"]
    if art is None:
        return None
    lo, hi = art["range"]
    coordinate = lo if art["initial"] == "lo" else hi
    # position 은 coordinate = lo 일 때의 pose 이다
    if art["joint"] == "prismatic":
        for k in range(3):
            pose[k] += art["axis"][k] * (coordinate - lo)
    else:
        pose[3] += coordinate - lo
    return ArticulationVO(
        joint=art["joint"],
        axis=tuple(art["axis"]),
        range=(lo, hi),
        coordinate=coordinate,
        mode=art["mode"],
    )


def _place(
    idx: int,
    spec: dict,
    dims: tuple,
    placed: List[EntityVO],
    rng: np.random.Generator,
) -> EntityVO:
    by_name = {e.name: e for e in placed}
    position = spec["position"]
    attempts = 1 if _is_fixed(spec) else MAX_REDRAWS
    reason = ""
    for _ in range(attempts):
        if position["relative_to"] is not None:
            anchor = by_name.get(position["relative_to"])
            if anchor is None:
                raise SceneError(
                    f"{spec['name']}: relative_to unknown entity {position['relative_to']!r}"
                )
            dx, dy, dz = position["offset"]
            pose = [anchor.pose[0] + dx, anchor.pose[1] + dy, anchor.pose[2] + dz]
        else:
            pose = [_draw(position[k], rng) for k in ("x", "y", "z")]
        pose.append(_draw(spec["yaw"], rng))
        if spec["on"] is not None:
            support = by_name.get(spec["on"])
            if support is None:
                raise SceneError(f"{spec['name']}: on unknown entity {spec['on']!r}")
            pose[2] = support.top + pose[2]
        articulation = _articulate(spec, pose)
        entity = EntityVO(
            id=FIRST_ENTITY_ID + idx,
            name=spec["name"],
            shape=spec["shape"],
            dims=dims,
            color=PALETTE[spec["color"]],
            pose=tuple(pose),
            graspable=spec["graspable"],
            solid=spec["solid"],
            on=spec["on"],
            articulation=articulation,
        )
        if errors := entity.validate():
            raise SceneError(f"{spec['name']}: {errors}")
        if not _inside_workspace(entity):
            reason = "outside workspace"
            continue
        if other := _collides(entity, placed):
            reason = f"overlaps {other.name!r}"
            continue
        return entity
    raise SceneError(f"{spec['name']}: cannot be placed after {attempts} draws ({reason})")


def create_world(
    scene_spec: dict,
    seed: int,
    dim_scale: float = 0.0,
    arm_offset: float = 0.0,
) -> WorldState:
    """
    scene spec 과 seed 로 WorldState 를 만든다.
    배치 난수와 expert-stage 섭동 난수는 서로 다른 stream 을 쓴다.

    :param dim_scale: 관절이 없는 entity 의 치수를 ±dim_scale 비율로 섭동
    :param arm_offset: gripper 시작 위치 xy 를 ±arm_offset (m) 로 섭동
    """
    spec = load_scene_spec(scene_spec)
    geometry_rng = np.random.default_rng([seed, 0])
    perturb_rng = np.random.default_rng([seed, 1])

    placed: List[EntityVO] = []
    for idx, entity_spec in enumerate(spec["entities"]):
        dims = tuple(float(v) for v in entity_spec["dims"])
        if dim_scale > 0 and entity_spec["articulation"] is None:
            factor = float(perturb_rng.uniform(1.0 - dim_scale, 1.0 + dim_scale))
            dims = tuple(v * factor for v in dims)
        placed.append(_place(idx, entity_spec, dims, placed, geometry_rng))

    x, y, z, yaw = GRIPPER_START
    if arm_offset > 0:
        x += float(perturb_rng.uniform(-arm_offset, arm_offset))
        y += float(perturb_rng.uniform(-arm_offset, arm_offset))
    world = WorldState(
        entities=placed,
        gripper=GripperState(pose=(x, y, z, yaw)),
        rng_seed=seed,
    )
    logger.debug(
        f"Created world seed={seed} entities={[e.name for e in placed]} "
        f"gripper={world.gripper.pose}"
    )
    return world

