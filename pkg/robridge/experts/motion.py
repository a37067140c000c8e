import logging
from typing import List

import numpy as np

from robridge.exceptions import ExpertError, MotionPlanningError
from robridge.items import PrimitiveActionVO
from robridge.settings import (
    APPROACH_HEIGHT,
    CLEARANCE,
    MAX_STEP,
    TRAVEL_HEIGHT,
)
from robridge.world.geometry import center3, contains_xy, half_extent_along, handle_point
from robridge.world.state import Action4, WorldState


logger = logging.getLogger("robridge.experts")

CHECK_RESOLUTION = 0.01
CONTACT_STANDOFF = 0.015
_COINCIDENT = 1e-9


def approach_pose(action: PrimitiveActionVO, world: WorldState) -> np.ndarray:
    """
    reach 가 도달해야 하는 tip 위치.
    잡고 있는 물체가 있으면 목적지 위로, grip fixture 는 손잡이로,
    수평 contact fixture 는 미는 면 뒤로, 나머지는 윗면 위로 간다.
    """
    e = world.find(action.obj)
    if e is None:
        raise ExpertError(f"{action}: target not in scene")
    held = world.held()
    if held is not None and held.id != e.id:
        ox, oy, oz = world.gripper.hold_offset
        return np.array([e.pose[0] - ox, e.pose[1] - oy, e.top - oz + APPROACH_HEIGHT])
    art = e.articulation
    if art is not None and art.mode == "grip":
        return handle_point(e)
    if art is not None and art.joint == "prismatic" and abs(art.axis[2]) < 0.5:
        axis = np.array(art.axis)
        return center3(e) - axis * (half_extent_along(e, axis) + CONTACT_STANDOFF)
    return np.array([e.pose[0], e.pose[1], e.top + APPROACH_HEIGHT])


def _collides(world: WorldState, point: np.ndarray) -> bool:
    held = world.held()
    for e in world.entities:
        if not e.solid or (held is not None and e.id == held.id):
            continue
        if contains_xy(e, point[0], point[1]) and point[2] < e.top - _COINCIDENT:
            return True
    return False


def _segment_clear(world: WorldState, a: np.ndarray, b: np.ndarray) -> bool:
    n = max(int(np.ceil(np.linalg.norm(b - a) / CHECK_RESOLUTION)), 1)
    return not any(_collides(world, a + (b - a) * t) for t in np.linspace(0.0, 1.0, n + 1)[1:])


def _travel_height(world: WorldState, a: np.ndarray, b: np.ndarray) -> float:
    held = world.held()
    hang = -world.gripper.hold_offset[2] if held is not None else 0.0
    height = max(TRAVEL_HEIGHT, b[2])
    n = max(int(np.ceil(np.linalg.norm(b[:2] - a[:2]) / CHECK_RESOLUTION)), 1)
    for t in np.linspace(0.0, 1.0, n + 1):
        x, y = a[:2] + (b[:2] - a[:2]) * t
        for e in world.entities:
            if not e.solid or (held is not None and e.id == held.id):
                continue
            if contains_xy(e, x, y):
                height = max(height, e.top + CLEARANCE + hang)
    return min(height, world.workspace[1][2])


def motion_plan_reach(world: WorldState, target) -> List[np.ndarray]:
    """
    lift -> travel plane 이동 -> descend 경로. 겹치는 waypoint 는 뺀다.
    """
    target = np.asarray(target, dtype=np.float64)
    lo, hi = np.array(world.workspace[0]), np.array(world.workspace[1])
    if np.any(target < lo - _COINCIDENT) or np.any(target > hi + _COINCIDENT):
        raise MotionPlanningError(f"Target outside workspace: {target}")
    tip = world.gripper.tip
    if np.linalg.norm(target - tip) <= _COINCIDENT:
        return [target]
    if np.linalg.norm(target[:2] - tip[:2]) <= _COINCIDENT and _segment_clear(world, tip, target):
        return [target]

    h0 = _travel_height(world, tip, target)
    candidates = [
        np.array([tip[0], tip[1], h0]),
        np.array([target[0], target[1], h0]),
        target,
    ]
    waypoints, current = [], tip
    for wp in candidates:
        if np.linalg.norm(wp - current) <= _COINCIDENT:
            continue
        if not _segment_clear(world, current, wp):
            raise MotionPlanningError(f"Blocked segment {current} -> {wp}")
        waypoints.append(wp)
        current = wp
    return waypoints or [target]


def move_toward(tip: np.ndarray, goal: np.ndarray, g: float) -> Action4:
    """
    goal 쪽으로 한 tick. 방향을 유지한 채 가장 큰 성분이 1 을 넘지 않게 줄인다.
    """
    v = (np.asarray(goal) - tip) / MAX_STEP
    m = float(np.max(np.abs(v))) if v.size else 0.0
    if m > 1.0:
        v = v / m
    return Action4.coerce((v[0], v[1], v[2], g))


class WaypointFollower:
    """
    reach primitive 를 motion plan 으로 실행한다.
    """

    REACHED = 1e-6

    def __init__(self, waypoints: List[np.ndarray]):
        self.waypoints = list(waypoints)

    @classmethod
    def plan(cls, action: PrimitiveActionVO, world: WorldState) -> "WaypointFollower":
        waypoints = motion_plan_reach(world, approach_pose(action, world))
        logger.debug(f"{action}: waypoints {[tuple(np.round(w, 3)) for w in waypoints]}")
        return cls(waypoints)

    def act(self, world: WorldState) -> Action4:
        tip = world.gripper.tip
        while len(self.waypoints) > 1 and np.linalg.norm(self.waypoints[0] - tip) <= self.REACHED:
            self.waypoints.pop(0)
        g = -1.0 if world.gripper.holding is not None else 1.0
        return move_toward(tip, self.waypoints[0], g)
