import logging
from typing import Optional

import numpy as np

from robridge.items import EntityVO
from robridge.settings import (
    APERTURE_RATE,
    CONTACT_DISTANCE,
    FINGER_RADIUS,
    GRASP_DISTANCE,
    GRASP_THRESHOLD,
    HANDLE_RADIUS,
    MAX_STEP,
)
from robridge.world.geometry import (
    center3,
    closest_footprint_point,
    contains_xy,
    distance_to_solid,
    footprint_overlap,
    half_extent_along,
    handle_point,
    horizontal_distance,
    revolute_tangent,
    vertical_overlap,
)
from robridge.world.state import Action4, WorldState


logger = logging.getLogger("robridge.world")

_EPS = 1e-9


def support_height(world: WorldState, x: float, y: float, exclude: Optional[int] = None) -> float:
    """
    (x, y) 아래에 있는 solid entity 의 가장 높은 top. 없으면 table (0).
    """
    height = world.workspace[0][2]
    for e in world.entities:
        if e.id == exclude or e.id == world.gripper.holding or not e.solid:
            continue
        if contains_xy(e, x, y):
            height = max(height, e.top)
    return height


def _move(entity: EntityVO, delta) -> None:
    x, y, z, yaw = entity.pose
    entity.pose = (x + float(delta[0]), y + float(delta[1]), z + float(delta[2]), yaw)


def _release(world: WorldState) -> None:
    held = world.held()
    world.gripper.holding = None
    world.gripper.hold_offset = (0.0, 0.0, 0.0)
    x, y, _, yaw = held.pose
    held.pose = (x, y, support_height(world, x, y, exclude=held.id), yaw)
    logger.debug(f"tick={world.tick} released {held.name!r}")


def _try_grasp(world: WorldState, tip: np.ndarray) -> None:
    best, best_distance = None, GRASP_DISTANCE
    for e in world.entities:
        if not e.graspable or e.articulation is not None:
            continue
        d = distance_to_solid(e, tip)
        if d <= best_distance:
            best, best_distance = e, d
    if best is None:
        return
    world.gripper.holding = best.id
    world.gripper.hold_offset = tuple(float(v) for v in np.array(best.pose[:3]) - tip)
    logger.debug(f"tick={world.tick} grasped {best.name!r}")


def _articulate_grip(world: WorldState, e: EntityVO, old_tip: np.ndarray, delta: np.ndarray) -> float:
    gripper = world.gripper
    if gripper.is_open or gripper.holding is not None:
        return 0.0
    if np.linalg.norm(old_tip - handle_point(e)) > HANDLE_RADIUS:
        return 0.0
    art = e.articulation
    if art.joint == "prismatic":
        return float(delta @ np.array(art.axis))
    tangent, radius = revolute_tangent(e, old_tip)
    if radius < _EPS:
        return 0.0
    return float(delta @ tangent) / radius


def _articulate_contact(e: EntityVO, old_tip: np.ndarray, new_tip: np.ndarray) -> float:
    art = e.articulation
    if art.joint != "prismatic":
        return 0.0
    axis = np.array(art.axis)
    half = half_extent_along(e, axis)
    c = center3(e)
    s_old = float((old_tip - c) @ axis)
    if s_old >= 0:
        # 반대편에서는 밀 수 없다
        return 0.0
    perp = (old_tip - c) - s_old * axis
    if distance_to_solid(e, c + perp) > CONTACT_DISTANCE:
        return 0.0
    s_new = float((new_tip - c) @ axis)
    advance = (s_new + half) - max(s_old + half, 0.0)
    return max(advance, 0.0)


def _update_articulations(world: WorldState, old_tip: np.ndarray, new_tip: np.ndarray) -> None:
    delta = new_tip - old_tip
    if not np.any(delta):
        return
    for e in world.entities:
        art = e.articulation
        if art is None:
            continue
        if art.mode == "grip":
            dc = _articulate_grip(world, e, old_tip, delta)
        else:
            dc = _articulate_contact(e, old_tip, new_tip)
        if dc == 0.0:
            continue
        coordinate = min(max(art.coordinate + dc, art.lo), art.hi)
        actual = coordinate - art.coordinate
        if actual == 0.0:
            continue
        art.coordinate = coordinate
        if art.joint == "prismatic":
            _move(e, np.array(art.axis) * actual)
        else:
            x, y, z, yaw = e.pose
            e.pose = (x, y, z, yaw + actual)


def _blocked(world: WorldState, moved: EntityVO) -> bool:
    for other in world.entities:
        if other.id == moved.id or not other.solid or other.id == world.gripper.holding:
            continue
        if moved.on == other.name or other.on == moved.name:
            continue
        if footprint_overlap(moved, other) > 0 and vertical_overlap(moved, other) > 0:
            return True
    return False


def _push_free(world: WorldState, old_tip: np.ndarray, new_tip: np.ndarray) -> None:
    delta_xy = new_tip[:2] - old_tip[:2]
    if not np.any(delta_xy):
        return
    for e in world.entities:
        if (
            not e.graspable
            or not e.solid
            or e.articulation is not None
            or e.id == world.gripper.holding
        ):
            continue
        if not e.pose[2] - _EPS <= new_tip[2] < e.top:
            continue
        distance = horizontal_distance(e, new_tip[0], new_tip[1])
        if distance >= FINGER_RADIUS:
            continue
        if distance > 0:
            px, py = closest_footprint_point(e, new_tip[0], new_tip[1])
            normal = np.array([px - new_tip[0], py - new_tip[1]]) / distance
            push = normal * (FINGER_RADIUS - distance)
        else:
            push = delta_xy
        before = e.pose
        _move(e, (push[0], push[1], 0.0))
        if _blocked(world, e):
            e.pose = before
        else:
            logger.debug(f"tick={world.tick} pushed {e.name!r} by {push}")


def _block_vertical(world: WorldState, old_tip: np.ndarray, new_tip: np.ndarray, tops_before: dict) -> np.ndarray:
    tip = new_tip.copy()
    gripper = world.gripper
    for e in world.entities:
        if not e.solid or e.id == gripper.holding:
            continue
        if not contains_xy(e, tip[0], tip[1]):
            continue
        if old_tip[2] >= tops_before[e.id] - _EPS and tip[2] < e.top:
            tip[2] = e.top
    held = world.held()
    if held is not None:
        offset = np.array(gripper.hold_offset)
        old_bottom = old_tip[2] + offset[2]
        new_center = tip[:2] + offset[:2]
        floor = world.workspace[0][2]
        for e in world.entities:
            if not e.solid or e.id == held.id:
                continue
            if contains_xy(e, new_center[0], new_center[1]) and old_bottom >= tops_before[e.id] - _EPS:
                floor = max(floor, e.top)
        if tip[2] + offset[2] < floor:
            tip[2] = floor - offset[2]
    return tip


def step(world: WorldState, action) -> WorldState:
    """
    한 tick 진행한 새 WorldState 를 돌려준다. 입력 world 는 바꾸지 않는다.

    순서: aperture/release -> grasp -> 이동 및 clamp -> articulation -> free push
    -> 수직 차단 -> held entity 추종 -> tick + 1
    """
    a = Action4.coerce(action)
    world = world.copy()
    gripper = world.gripper

    gripper.aperture = min(max(gripper.aperture + APERTURE_RATE * a.g, 0.0), 1.0)
    old_tip = gripper.tip
    if gripper.holding is not None and gripper.aperture >= GRASP_THRESHOLD:
        _release(world)
    if gripper.holding is None and a.g < 0 and gripper.aperture < GRASP_THRESHOLD:
        _try_grasp(world, old_tip)

    lo = np.array(world.workspace[0])
    hi = np.array(world.workspace[1])
    new_tip = np.clip(old_tip + MAX_STEP * np.array([a.dx, a.dy, a.dz]), lo, hi)

    tops_before = {e.id: e.top for e in world.entities}
    _update_articulations(world, old_tip, new_tip)
    _push_free(world, old_tip, new_tip)
    new_tip = _block_vertical(world, old_tip, new_tip, tops_before)

    gripper.pose = (float(new_tip[0]), float(new_tip[1]), float(new_tip[2]), gripper.pose[3])
    if (held := world.held()) is not None:
        offset = gripper.hold_offset
        held.pose = (
            gripper.pose[0] + offset[0],
            gripper.pose[1] + offset[1],
            gripper.pose[2] + offset[2],
            held.pose[3],
        )
    world.tick += 1
    return world