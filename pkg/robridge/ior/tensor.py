from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from robridge.exceptions import ShapeMismatchError
from robridge.ior.builder import IOR
from robridge.ior.tracker import centroid
from robridge.settings import (
    GRID_CHANNELS,
    HEATMAP_SIGMA,
    TENSOR_SIZE,
    VEC_SIZE,
    WORKSPACE_HEIGHT,
    WORKSPACE_MAX,
    WORKSPACE_MIN,
)
from robridge.world.state import Frame


GRID_SHAPE = (GRID_CHANNELS, TENSOR_SIZE, TENSOR_SIZE)
MASK_CHANNELS = (0, 1, 2)
DEPTH_CHANNELS = (3, 4, 5)
HEATMAP_CHANNEL = 6
_LE_F32 = np.dtype("<f4")


@dataclass(kw_only=True)
class IORTensor:
    grid: np.ndarray = field()  # (7, 32, 32) float32
    vec: np.ndarray = field()  # (17,) float32

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=np.float32)
        self.vec = np.asarray(self.vec, dtype=np.float32)
        if self.grid.shape != GRID_SHAPE or self.vec.shape != (VEC_SIZE,):
            raise ShapeMismatchError(
                f"IORTensor shapes {self.grid.shape}/{self.vec.shape}, "
                f"expected {GRID_SHAPE}/{(VEC_SIZE,)}"
            )

    @classmethod
    def nbytes(cls) -> int:
        return (int(np.prod(GRID_SHAPE)) + VEC_SIZE) * _LE_F32.itemsize

    def flat(self) -> np.ndarray:
        return self.grid.reshape(-1)

    def to_bytes(self) -> bytes:
        return self.grid.astype(_LE_F32).tobytes() + self.vec.astype(_LE_F32).tobytes()

    @classmethod
    def from_bytes(cls, raw: bytes) -> "IORTensor":
        if len(raw) != cls.nbytes():
            raise ShapeMismatchError(f"IORTensor needs {cls.nbytes()} bytes, got {len(raw)}")
        values = np.frombuffer(raw, dtype=_LE_F32).astype(np.float32)
        n = int(np.prod(GRID_SHAPE))
        return cls(grid=values[:n].reshape(GRID_SHAPE), vec=values[n:])

    def copy(self) -> "IORTensor":
        return IORTensor(grid=self.grid.copy(), vec=self.vec.copy())


def area_mean(image: np.ndarray, size: int = TENSOR_SIZE) -> np.ndarray:
    """
    H x W 이미지를 size x size 블록 평균으로 줄인다. H, W 는 size 이상이어야 한다.
    """
    h, w = image.shape
    rows = (np.arange(size) * h) // size
    cols = (np.arange(size) * w) // size
    sums = np.add.reduceat(np.add.reduceat(image.astype(np.float64), rows, axis=0), cols, axis=1)
    counts = np.outer(np.diff(np.append(rows, h)), np.diff(np.append(cols, w)))
    return sums / counts


def heatmap(mask: np.ndarray, size: int = TENSOR_SIZE, sigma: float = HEATMAP_SIGMA) -> np.ndarray:
    c = centroid(mask)
    if c is None:
        return np.zeros((size, size))
    h, w = mask.shape
    r0 = (c[0] + 0.5) * size / h - 0.5
    c0 = (c[1] + 0.5) * size / w - 0.5
    ii, jj = np.mgrid[0:size, 0:size]
    return np.exp(-((ii - r0) ** 2 + (jj - c0) ** 2) / (2 * sigma * sigma))


def _normalized_pose(ee_pose) -> np.ndarray:
    lo, hi = np.array(WORKSPACE_MIN), np.array(WORKSPACE_MAX)
    xyz = 2.0 * (np.array(ee_pose[:3]) - lo) / (hi - lo) - 1.0
    yaw = ee_pose[3] / np.pi
    return np.clip(np.append(xyz, yaw), -1.0, 1.0)


def to_tensor(ior: IOR, frame: Optional[Frame] = None) -> IORTensor:
    """
    IOR 를 고정 크기 정책 입력으로 바꾼다. mask 는 0.5 threshold, depth 는 workspace 높이로 정규화.
    frame 을 주면 ee pose 와 gripper 열림은 그 frame 의 proprioception 을 쓴다.
    """
    ee_pose, gripper_open = ior.ee_pose, ior.gripper_open
    if frame is not None:
        ee_pose, gripper_open = frame.gripper.pose, frame.gripper.is_open
    grid = np.zeros(GRID_SHAPE)
    for ch, mask in zip(MASK_CHANNELS, ior.masks3):
        grid[ch] = area_mean(mask) >= 0.5
    for ch, depth in zip(DEPTH_CHANNELS, ior.depths):
        grid[ch] = np.clip(area_mean(depth) / WORKSPACE_HEIGHT, 0.0, 1.0)
    grid[HEATMAP_CHANNEL] = heatmap(ior.masks3[0])

    direction = np.zeros(3) if ior.direction is None else ior.direction
    vec = np.concatenate(
        [
            ior.onehot,
            _normalized_pose(ee_pose),
            direction,
            [1.0 if gripper_open else -1.0],
        ]
    )
    return IORTensor(grid=grid, vec=vec)
