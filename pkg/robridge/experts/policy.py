import logging
import math
from abc import ABCMeta, abstractmethod
from typing import Dict, Type

import numpy as np
from overrides import override

from robridge.exceptions import ExpertError
from robridge.experts.motion import WaypointFollower, move_toward
from robridge.hcp.constraint import commanded_end
from robridge.items import EntityVO, PrimitiveActionVO
from robridge.settings import APPROACH_HEIGHT, DIRECTIONAL_TYPES, HANDLE_RADIUS, MAX_STEP
from robridge.world.geometry import center3, half_extent_along, handle_point
from robridge.world.simulator import support_height
from robridge.world.state import Action4, WorldState


class ExpertPolicy(metaclass=ABCMeta):
    """
    privileged state 를 보는 scripted expert. primitive 한 종류(또는 한 계열)를 담당한다.
    """

    logger = logging.getLogger("robridge.experts")

    ALIGN_TOLERANCE = 0.003
    GRASP_CLEARANCE = 0.004
    CONTACT_STANDOFF = 0.015
    SETTLE_TOLERANCE = 0.001

    @abstractmethod
    def act(self, action: PrimitiveActionVO, target: EntityVO, world: WorldState) -> Action4:
        pass


class ReachExpert(ExpertPolicy):
    @override
    def act(self, action: PrimitiveActionVO, target: EntityVO, world: WorldState) -> Action4:
        return WaypointFollower.plan(action, world).act(world)


class GraspExpert(ExpertPolicy):
    """
    물체 중심 위로 맞추고, 윗면 바로 위까지 내려가서 닫는다.
    """

    @override
    def act(self, action: PrimitiveActionVO, target: EntityVO, world: WorldState) -> Action4:
        gripper = world.gripper
        if gripper.holding == target.id:
            return Action4(g=-1.0)
        if gripper.holding is not None:
            raise ExpertError(f"{action}: gripper holds another entity")
        tip = gripper.tip
        x, y = target.pose[0], target.pose[1]
        if math.hypot(tip[0] - x, tip[1] - y) > self.ALIGN_TOLERANCE:
            hover = max(tip[2], target.top + APPROACH_HEIGHT)
            return move_toward(tip, np.array([x, y, hover]), 1.0)
        goal = np.array([x, y, target.top + self.GRASP_CLEARANCE])
        g = -1.0 if np.linalg.norm(goal - tip) <= self.ALIGN_TOLERANCE else 1.0
        return move_toward(tip, goal, g)


class PlaceExpert(ExpertPolicy):
    """
    잡은 물체를 목적지 위에 맞추고, 받침에 닿을 때까지 내린 뒤 연다.
    """

    @override
    def act(self, action: PrimitiveActionVO, target: EntityVO, world: WorldState) -> Action4:
        gripper = world.gripper
        if gripper.holding != target.id:
            return Action4(g=1.0)
        des = world.find(action.des)
        if des is None:
            raise ExpertError(f"{action}: destination not in scene")
        tip = gripper.tip
        ox, oy, _ = gripper.hold_offset
        gx, gy = des.pose[0] - ox, des.pose[1] - oy
        if math.hypot(tip[0] - gx, tip[1] - gy) > self.ALIGN_TOLERANCE:
            return move_toward(tip, np.array([gx, gy, tip[2]]), -1.0)
        bottom = target.pose[2]
        support = support_height(world, target.pose[0], target.pose[1], exclude=target.id)
        if bottom - support > self.SETTLE_TOLERANCE:
            return move_toward(tip, np.array([gx, gy, tip[2] - (bottom - support)]), -1.0)
        return Action4(g=1.0)


class ContactExpert(ExpertPolicy):
    """
    prismatic contact fixture 를 면 뒤에서 축 방향으로 민다. press 도 아래 방향 축을 가진 같은 경우다.
    """

    @override
    def act(self, action: PrimitiveActionVO, target: EntityVO, world: WorldState) -> Action4:
        art = target.articulation
        if art.joint != "prismatic" or commanded_end(action.type) != "hi":
            raise ExpertError(f"{action}: contact fixture can only be pushed toward its upper end")
        remaining = art.hi - art.coordinate
        if remaining <= 0.0:
            return Action4()

        tip = world.gripper.tip
        axis = np.array(art.axis, dtype=np.float64)
        half = half_extent_along(target, axis)
        c = center3(target)
        s = float((tip - c) @ axis)
        perp = (tip - c) - s * axis
        if np.linalg.norm(perp) > self.ALIGN_TOLERANCE:
            behind = min(s, -(half + self.CONTACT_STANDOFF))
            return move_toward(tip, c + axis * behind, 0.0)
        gap = max(-s - half, 0.0)
        advance = min(MAX_STEP, gap + remaining)
        return move_toward(tip, tip - perp + axis * advance, 0.0)


class GripExpert(ExpertPolicy):
    """
    손잡이를 잡고 commanded end 쪽으로 관절을 움직인다.
    """

    @staticmethod
    def _rotate(point: np.ndarray, pivot: np.ndarray, axis: np.ndarray, angle: float) -> np.ndarray:
        v = point - pivot
        c, s = math.cos(angle), math.sin(angle)
        rotated = v * c + np.cross(axis, v) * s + axis * float(axis @ v) * (1.0 - c)
        return pivot + rotated

    @override
    def act(self, action: PrimitiveActionVO, target: EntityVO, world: WorldState) -> Action4:
        gripper = world.gripper
        tip = gripper.tip
        handle = handle_point(target)
        distance = float(np.linalg.norm(handle - tip))
        engaged = not gripper.is_open and gripper.holding is None and distance <= HANDLE_RADIUS
        if not engaged:
            if distance <= self.ALIGN_TOLERANCE:
                return Action4(g=-1.0)
            return move_toward(tip, handle, 1.0)

        art = target.articulation
        end = art.lo if commanded_end(action.type) == "lo" else art.hi
        remaining = end - art.coordinate
        if remaining == 0.0:
            return Action4(g=-1.0)
        axis = np.array(art.axis, dtype=np.float64)
        if art.joint == "prismatic":
            goal = handle + axis * float(np.clip(remaining, -MAX_STEP, MAX_STEP))
        else:
            radius = float(np.linalg.norm((handle - center3(target))[:2])) or 1.0
            angle = float(np.clip(remaining, -MAX_STEP / radius, MAX_STEP / radius))
            goal = self._rotate(handle, center3(target), axis, angle)
        return move_toward(tip, goal, -1.0)


EXPERTS: Dict[str, Type[ExpertPolicy]] = {
    "reach": ReachExpert,
    "grasp": GraspExpert,
    "place": PlaceExpert,
    "press": ContactExpert,
}


def expert_for(action: PrimitiveActionVO, target: EntityVO) -> ExpertPolicy:
    if action.type in DIRECTIONAL_TYPES:
        art = target.articulation
        if art is None:
            raise ExpertError(f"{action}: target is not articulated")
        return ContactExpert() if art.mode == "contact" else GripExpert()
    if action.type == "press" and target.articulation is None:
        raise ExpertError(f"{action}: target is not articulated")
    return EXPERTS[action.type]()


def expert_action(action: PrimitiveActionVO, world: WorldState) -> Action4:
    """
    :param action: 현재 primitive
    :param world: privileged world state
    :return: 한 tick 의 expert action
    """
    target = world.find(action.obj)
    if target is None:
        raise ExpertError(f"{action}: target not in scene")
    return expert_for(action, target).act(action, target, world)
