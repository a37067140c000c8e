from dataclasses import replace
from typing import Optional

import numpy as np
from overrides import override
from scipy import ndimage

from robridge.augment import AugmentConfig, BaseAugment, Seed
from robridge.augment.depth import HOLE_RADIUS
from robridge.ior.tensor import MASK_CHANNELS


def _shift(mask: np.ndarray, di: int, dj: int) -> np.ndarray:
    h, w = mask.shape
    out = np.zeros_like(mask)
    src = mask[max(-di, 0): h - max(di, 0), max(-dj, 0): w - max(dj, 0)]
    out[max(di, 0): max(di, 0) + src.shape[0], max(dj, 0): max(dj, 0) + src.shape[1]] = src
    return out


def mask_jitter(mask: np.ndarray, cfg: AugmentConfig, seed: Optional[Seed] = None) -> np.ndarray:
    """
    dilate -> translate -> 가장자리 band 제거 -> (확률적으로) blob 추가 또는 component 삭제.
    출력은 항상 binary 이다.

    :param seed: 없으면 cfg.seed
    """
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    out = np.asarray(mask, dtype=bool)
    h, w = out.shape

    r = int(cfg.dilate_radius)
    if r > 0:
        out = ndimage.binary_dilation(out, structure=np.ones((2 * r + 1, 2 * r + 1), dtype=bool))

    if cfg.shift_max > 0:
        di, dj = (int(v) for v in rng.integers(-cfg.shift_max, cfg.shift_max + 1, size=2))
        out = _shift(out, di, dj)

    if cfg.crop_margin > 0:
        top, bottom, left, right = (int(v) for v in rng.integers(0, cfg.crop_margin + 1, size=4))
        out = out.copy()
        out[:top] = False
        out[h - bottom:] = False
        out[:, :left] = False
        out[:, w - right:] = False

    if cfg.segment_add_delete_p > 0 and rng.random() < cfg.segment_add_delete_p:
        labels, n = ndimage.label(out)
        if n > 0 and rng.random() < cfg.segment_delete_ratio:
            out = out & (labels != int(rng.integers(1, n + 1)))
        else:
            rows, cols = np.mgrid[0:h, 0:w]
            radius = rng.uniform(*HOLE_RADIUS)
            ci, cj = rng.uniform(0, h), rng.uniform(0, w)
            out = out | ((rows + 0.5 - ci) ** 2 + (cols + 0.5 - cj) ** 2 <= radius * radius)
    return out


class MaskJitterAugment(BaseAugment):
    @override
    def process(self, tensor, cfg: AugmentConfig, priority: int):
        out = tensor.copy()
        for ch in MASK_CHANNELS:
            if not out.grid[ch].any():
                continue
            rng = np.random.default_rng([cfg.seed, priority, ch])
            radius = int(rng.integers(0, cfg.dilate_radius + 1))
            jittered = mask_jitter(
                out.grid[ch] >= 0.5,
                replace(cfg, dilate_radius=radius),
                seed=rng.integers(2**63),
            )
            out.grid[ch] = jittered.astype(np.float32)
        return out
