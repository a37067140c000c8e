import numpy as np
from overrides import override
from scipy import ndimage

from robridge.augment import AugmentConfig, BaseAugment, Seed
from robridge.ior.tensor import DEPTH_CHANNELS


WARP_SMOOTHING = 2.0  # px
HOLE_RADIUS = (1, 3)  # px


def depth_warp(depth: np.ndarray, mag: float, seed: Seed) -> np.ndarray:
    """
    부드러운 Gaussian 변위장으로 depth 를 다시 샘플링한다. nearest lookup 이라 상수장은 그대로다.

    :param mag: 변위 표준편차 (px)
    """
    if mag == 0:
        return depth.copy()
    rng = np.random.default_rng(seed)
    h, w = depth.shape
    field = ndimage.gaussian_filter(rng.normal(size=(2, h, w)), sigma=(0, WARP_SMOOTHING, WARP_SMOOTHING))
    std = field.std()
    if std > 0:
        field *= mag / std
    rows, cols = np.mgrid[0:h, 0:w].astype(np.float64)
    coords = np.stack([rows + field[0], cols + field[1]])
    return ndimage.map_coordinates(depth, coords, order=0, mode="nearest")


def gaussian_blur(img: np.ndarray, sigma: float) -> np.ndarray:
    if sigma == 0:
        return img.copy()
    return ndimage.gaussian_filter(img.astype(np.float64), sigma=sigma, mode="reflect")


def random_holes(img: np.ndarray, rate: float, seed: Seed) -> np.ndarray:
    """
    원판 모양 구멍을 덮인 비율이 rate 에 닿을 때까지 뚫는다.
    """
    if rate <= 0:
        return img.copy()
    if rate >= 1:
        return np.zeros_like(img)
    rng = np.random.default_rng(seed)
    h, w = img.shape
    rows, cols = np.mgrid[0:h, 0:w]
    holes = np.zeros((h, w), dtype=bool)
    while holes.mean() < rate:
        r = rng.uniform(*HOLE_RADIUS)
        ci, cj = rng.uniform(0, h), rng.uniform(0, w)
        holes |= (rows + 0.5 - ci) ** 2 + (cols + 0.5 - cj) ** 2 <= r * r
    out = img.copy()
    out[holes] = 0
    return out


class _DepthAugment(BaseAugment):
    def _apply(self, channel: np.ndarray, cfg: AugmentConfig, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    @override
    def process(self, tensor, cfg: AugmentConfig, priority: int):
        out = tensor.copy()
        for ch in DEPTH_CHANNELS:
            rng = np.random.default_rng([cfg.seed, priority, ch])
            out.grid[ch] = np.clip(self._apply(out.grid[ch].astype(np.float64), cfg, rng), 0.0, 1.0)
        return out


class DepthWarpAugment(_DepthAugment):
    @override
    def _apply(self, channel: np.ndarray, cfg: AugmentConfig, rng: np.random.Generator) -> np.ndarray:
        return depth_warp(channel, cfg.warp_mag, rng.integers(2**63))


class GaussianBlurAugment(_DepthAugment):
    @override
    def _apply(self, channel: np.ndarray, cfg: AugmentConfig, rng: np.random.Generator) -> np.ndarray:
        return gaussian_blur(channel, float(rng.uniform(0.0, cfg.blur_sigma)))


class RandomHolesAugment(_DepthAugment):
    @override
    def _apply(self, channel: np.ndarray, cfg: AugmentConfig, rng: np.random.Generator) -> np.ndarray:
        return random_holes(channel, cfg.hole_rate, rng.integers(2**63))
