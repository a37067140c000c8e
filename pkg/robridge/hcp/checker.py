import logging
from dataclasses import dataclass, field
from enum import Enum, unique
from typing import Optional

import numpy as np

from robridge.experts.motion import approach_pose
from robridge.hcp.constraint import commanded_end
from robridge.items import EntityVO, PrimitiveActionVO
from robridge.settings import DIRECTIONAL_TYPES, PALM_SIZE, REACH_TOLERANCE
from robridge.tasks.predicates import placed_in
from robridge.world.geometry import horizontal_distance
from robridge.world.state import Frame, WorldState


logger = logging.getLogger("robridge.hcp")

PRESS_TOLERANCE = 0.002
DIRECTIONAL_TOLERANCE = 0.05  # range 비율


@unique
class Status(str, Enum):
    SUCCESS = "Success"
    WRONG = "Wrong"
    NORMAL = "Normal"


@dataclass(kw_only=True, frozen=True)
class CheckerNoise:
    false_rate: float = field(default=0.0)
    seed: int = field(default=0)


def holds(world: WorldState, name: str) -> bool:
    e = world.find(name)
    return e is not None and world.gripper.holding == e.id


def primitive_succeeded(action: PrimitiveActionVO, world: WorldState) -> bool:
    e = world.find(action.obj)
    if e is None:
        return False
    match action.type:
        case "reach":
            target = approach_pose(action, world)
            return float(np.linalg.norm(world.gripper.tip - target)) <= REACH_TOLERANCE
        case "grasp":
            return world.gripper.holding == e.id
        case "place":
            return world.find(action.des) is not None and placed_in(world, action.obj, action.des)
        case "press":
            art = e.articulation
            return art is not None and art.coordinate >= art.hi - PRESS_TOLERANCE
        case t if t in DIRECTIONAL_TYPES:
            art = e.articulation
            if art is None:
                return False
            end = art.lo if commanded_end(t) == "lo" else art.hi
            return abs(art.coordinate - end) <= DIRECTIONAL_TOLERANCE * (art.hi - art.lo)
        case _:
            raise NotImplementedError(action.type)


def _under_gripper(world: WorldState, e: EntityVO) -> bool:
    """
    palm 이 위에서 덮고 있으면 third view 에서 사라져도 놓친 것이 아니다.
    """
    x, y, z = world.gripper.tip
    return z >= e.pose[2] and horizontal_distance(e, x, y) <= PALM_SIZE / 2


def primitive_failed(
    action: PrimitiveActionVO,
    frame: Frame,
    world: WorldState,
    timeout: int,
    object_lost: Optional[bool] = None,
) -> Optional[str]:
    """
    :param object_lost: tracker 의 object 채널 lost 여부. 없으면 instance map 에서 본다.
    :return: Wrong 사유, 없으면 None
    """
    if world.tick > timeout:
        return "timeout"
    e = world.find(action.obj)
    if e is None:
        return "target missing"
    held = world.gripper.holding == e.id
    if action.type == "place" and not held:
        return "object dropped"
    if object_lost is None:
        object_lost = not np.any(frame.instance3 == e.id)
    if not held and object_lost and not _under_gripper(world, e):
        return "grounding lost"
    return None


def check_status(
    action: PrimitiveActionVO,
    frame: Frame,
    world: WorldState,
    timeout: int,
    noise: Optional[CheckerNoise] = None,
    object_lost: Optional[bool] = None,
    expected_held: Optional[str] = None,
) -> Status:
    """
    low-frequency 상태 판정.

    :param timeout: 이 tick 을 넘기면 Wrong
    :param expected_held: 이 primitive 동안 쥐고 있어야 하는 entity 이름
    """
    if expected_held is not None and not holds(world, expected_held):
        logger.debug(f"tick={world.tick} {action} Wrong: {expected_held!r} not held")
        status = Status.WRONG
    elif primitive_succeeded(action, world):
        status = Status.SUCCESS
    elif reason := primitive_failed(action, frame, world, timeout, object_lost):
        logger.debug(f"tick={world.tick} {action} Wrong: {reason}")
        status = Status.WRONG
    else:
        status = Status.NORMAL

    if noise is not None and noise.false_rate > 0:
        rng = np.random.default_rng([noise.seed, world.tick])
        if rng.random() < noise.false_rate:
            others = [s for s in Status if s != status]
            status = others[int(rng.integers(len(others)))]
    return status
