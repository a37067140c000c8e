from typing import Optional

import numpy as np

from robridge.exceptions import ConstraintError
from robridge.items import PrimitiveActionVO
from robridge.settings import DIRECTIONAL_TYPES
from robridge.world.state import WorldState


def commanded_end(action_type: str) -> str:
    """
    :return: 방향성 primitive 가 coordinate 를 보내려는 끝 ("lo" | "hi")
    """
    return "lo" if action_type == "close" else "hi"


def direction_constraint(action: PrimitiveActionVO, world: WorldState) -> Optional[np.ndarray]:
    if action.type not in DIRECTIONAL_TYPES:
        return None
    entity = world.find(action.obj)
    if entity is None or entity.articulation is None:
        raise ConstraintError(f"{action} targets a non-articulated entity")
    axis = np.array(entity.articulation.axis, dtype=np.float64)
    d = axis / np.linalg.norm(axis)
    return -d if commanded_end(action.type) == "lo" else d
