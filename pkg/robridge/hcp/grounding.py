import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import ndimage

from robridge.exceptions import GroundingError
from robridge.items import PrimitiveActionVO
from robridge.world.state import Frame


logger = logging.getLogger("robridge.hcp")


@dataclass(kw_only=True, frozen=True)
class GroundingNoise:
    flip_p: float = field(default=0.0)  # 같은 shape 의 distractor 로 바꿀 확률
    dilate: int = field(default=0)  # px
    erode: int = field(default=0)  # px
    seed: int = field(default=0)


@dataclass(kw_only=True)
class Grounding:
    obj_id: int = field()
    des_id: Optional[int] = field(default=None)
    obj_mask3: np.ndarray = field()
    des_mask3: Optional[np.ndarray] = field(default=None)
    confidence: float = field(default=1.0)


def _lookup(frame: Frame, name: str) -> tuple:
    key = name.lower().strip()
    if key not in frame.symbols:
        raise GroundingError(f"No scene entity named {name!r}")
    return frame.symbols[key]


def _distort(mask: np.ndarray, noise: GroundingNoise) -> np.ndarray:
    if noise.dilate > 0:
        mask = ndimage.binary_dilation(mask, iterations=noise.dilate)
    if noise.erode > 0:
        mask = ndimage.binary_erosion(mask, iterations=noise.erode)
    return mask


def ground(
    action: PrimitiveActionVO, frame: Frame, noise: Optional[GroundingNoise] = None
) -> Grounding:
    """
    이름을 scene symbol table 로 풀고 third view instance map 에서 mask 를 읽는다.
    noise 가 있으면 distractor 로 바꾸거나 mask 를 팽창/침식한다.
    """
    noise = noise or GroundingNoise()
    obj_id, obj_shape = _lookup(frame, action.obj)
    des_id = _lookup(frame, action.des)[0] if action.des else None

    if noise.flip_p > 0:
        rng = np.random.default_rng([noise.seed, frame.tick, obj_id])
        if rng.random() < noise.flip_p:
            distractors = sorted(
                i for i, shape in frame.symbols.values()
                if shape == obj_shape and i not in (obj_id, des_id)
            )
            if distractors:
                flipped = int(distractors[int(rng.integers(len(distractors)))])
                logger.debug(f"Grounding of {action.obj!r} flipped {obj_id} -> {flipped}")
                obj_id = flipped

    obj_mask = _distort(frame.instance3 == obj_id, noise)
    des_mask = None if des_id is None else _distort(frame.instance3 == des_id, noise)
    confidence = 1.0 if obj_mask.any() else 0.0
    return Grounding(
        obj_id=obj_id,
        des_id=des_id,
        obj_mask3=obj_mask,
        des_mask3=des_mask,
        confidence=confidence,
    )
