import math
from typing import Callable, Dict, Iterable

from robridge.tasks.catalog import NamedCall, TaskSpec
from robridge.world.geometry import contains_xy
from robridge.world.state import WorldState


PLACE_TOLERANCE = 0.005
REACH_RADIUS = 0.015
REACH_HEIGHT = 0.04
SHAPING_DISTANCE = 0.45  # xy 거리 정규화 (m)
MAX_SHAPED_REWARD = 0.99


def _entity(world: WorldState, name: str):
    entity = world.find(name)
    if entity is None:
        raise KeyError(f"{name!r} not in scene")
    return entity


def placed_in(world: WorldState, obj: str, des: str) -> bool:
    o, d = _entity(world, obj), _entity(world, des)
    if world.gripper.holding == o.id:
        return False
    return contains_xy(d, o.pose[0], o.pose[1]) and o.pose[2] <= d.top + PLACE_TOLERANCE


def articulation_at_least(world: WorldState, obj: str, value: float) -> bool:
    return _entity(world, obj).articulation.coordinate >= value


def articulation_at_most(world: WorldState, obj: str, value: float) -> bool:
    return _entity(world, obj).articulation.coordinate <= value


def reached(world: WorldState, obj: str) -> bool:
    e = _entity(world, obj)
    x, y, z, _ = world.gripper.pose
    return (
        math.hypot(x - e.pose[0], y - e.pose[1]) <= REACH_RADIUS
        and 0.0 <= z - e.top <= REACH_HEIGHT
    )


def holding(world: WorldState, obj: str) -> bool:
    return world.gripper.holding == _entity(world, obj).id


def all_of(world: WorldState, predicates: Iterable[dict]) -> bool:
    return all(evaluate(NamedCall(**p), world) for p in predicates)


PREDICATES: Dict[str, Callable[..., bool]] = {
    "placed_in": placed_in,
    "articulation_at_least": articulation_at_least,
    "articulation_at_most": articulation_at_most,
    "reached": reached,
    "holding": holding,
    "all_of": all_of,
}


def evaluate(call: NamedCall, world: WorldState) -> bool:
    try:
        predicate = PREDICATES[call.name]
    except KeyError:
        raise KeyError(f"Unknown predicate: {call.name!r}") from None
    return bool(predicate(world, **call.args))


def placement_distance(task: TaskSpec, world: WorldState, obj: str, des: str) -> float:
    o, d = _entity(world, obj), _entity(world, des)
    gap = math.hypot(o.pose[0] - d.pose[0], o.pose[1] - d.pose[1])
    return 1.0 - gap / SHAPING_DISTANCE


def articulation_progress(task: TaskSpec, world: WorldState, obj: str, start: float, goal: float) -> float:
    coordinate = _entity(world, obj).articulation.coordinate
    return (coordinate - start) / (goal - start)


def reach_distance(task: TaskSpec, world: WorldState, obj: str) -> float:
    e = _entity(world, obj)
    target = (e.pose[0], e.pose[1], e.top + REACH_HEIGHT / 2)
    return 1.0 - math.dist(world.gripper.pose[:3], target) / SHAPING_DISTANCE


def stage_fraction(task: TaskSpec, world: WorldState) -> float:
    """
    만족하는 가장 뒤 stage 까지를 완료로 본다.
    """
    done = 0
    for idx, stage in enumerate(task.stages):
        if evaluate(stage, world):
            done = idx + 1
    return done / len(task.stages)


REWARDS: Dict[str, Callable[..., float]] = {
    "placement_distance": placement_distance,
    "articulation_progress": articulation_progress,
    "reach_distance": reach_distance,
    "stage_fraction": stage_fraction,
}


def is_success(task: TaskSpec, world: WorldState) -> bool:
    return evaluate(task.success, world)


def reward(task: TaskSpec, world: WorldState) -> float:
    """
    :return: 성공이면 정확히 1.0, 아니면 [0, 0.99] 로 자른 shaped 값
    """
    if is_success(task, world):
        return 1.0
    shaped = REWARDS[task.reward.name](task, world, **task.reward.args)
    return min(max(shaped, 0.0), MAX_SHAPED_REWARD)


def stages_completed(task: TaskSpec, world: WorldState, pointer: int) -> int:
    """
    stage pointer 를 가능한 만큼 전진시킨다. 연속으로 만족된 stage 수를 돌려준다.
    """
    while pointer < len(task.stages) and evaluate(task.stages[pointer], world):
        pointer += 1
    return pointer
