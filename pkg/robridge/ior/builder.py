import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from robridge.exceptions import IORBuildError
from robridge.hcp.grounding import Grounding
from robridge.items import PrimitiveActionVO
from robridge.settings import GRIPPER_ID, PRIMITIVE_TYPES
from robridge.world.state import Frame, GripperState


logger = logging.getLogger("robridge.ior")

# channel 순서
GRIPPER, OBJECT, DESTINATION = 0, 1, 2


def one_hot(action_type: str) -> np.ndarray:
    onehot = np.zeros(len(PRIMITIVE_TYPES))
    onehot[PRIMITIVE_TYPES.index(action_type)] = 1.0
    return onehot


@dataclass(kw_only=True)
class IOR:
    """
    primitive 하나의 입력 표현. 이미지 channel 은 모두 기하에서만 나온다.
    """

    type: str = field()
    onehot: np.ndarray = field()
    masks3: Tuple[np.ndarray, np.ndarray, np.ndarray] = field()  # Mg, Mo, Md (third view)
    masks1: Tuple[np.ndarray, np.ndarray, np.ndarray] = field()  # first view gates
    ee_pose: Tuple[float, float, float, float] = field()
    direction: Optional[np.ndarray] = field(default=None)
    gripper_open: bool = field(default=True)
    has_des: bool = field(default=False)
    depth1: np.ndarray = field()

    @property
    def depths(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Dg, Do, Dd: mask 밖은 0 인 first view depth
        """
        return tuple(np.where(m, self.depth1, 0.0) for m in self.masks1)

    def refresh(self, gripper: GripperState) -> None:
        self.ee_pose = tuple(float(v) for v in gripper.pose)
        self.gripper_open = gripper.is_open


def build(
    action: PrimitiveActionVO,
    frame: Frame,
    grounding: Grounding,
    d: Optional[np.ndarray] = None,
) -> IOR:
    """
    :param action: 현재 primitive
    :param grounding: action 의 obj/des 를 frame 에 grounding 한 결과
    :param d: 방향성 primitive 의 단위 방향
    """
    obj_mask = np.asarray(grounding.obj_mask3, dtype=bool)
    if not obj_mask.any():
        raise IORBuildError(f"{action}: object mask is empty")
    empty3 = np.zeros_like(obj_mask)
    empty1 = np.zeros(frame.instance1.shape, dtype=bool)

    has_des = grounding.des_id is not None
    des_mask = np.asarray(grounding.des_mask3, dtype=bool) if has_des else empty3
    masks3 = (frame.instance3 == GRIPPER_ID, obj_mask, des_mask)
    masks1 = (
        frame.instance1 == GRIPPER_ID,
        frame.instance1 == grounding.obj_id,
        frame.instance1 == grounding.des_id if has_des else empty1,
    )

    direction = None
    if d is not None:
        direction = np.asarray(d, dtype=np.float64)
        direction = direction / np.linalg.norm(direction)

    ior = IOR(
        type=action.type,
        onehot=one_hot(action.type),
        masks3=masks3,
        masks1=masks1,
        ee_pose=(0.0, 0.0, 0.0, 0.0),
        direction=direction,
        has_des=has_des,
        depth1=frame.depth1,
    )
    ior.refresh(frame.gripper)
    logger.debug(
        f"tick={frame.tick} built IOR for {action}: "
        f"|Mo|={int(obj_mask.sum())} |Md|={int(des_mask.sum())}"
    )
    return ior
