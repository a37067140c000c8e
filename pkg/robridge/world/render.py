import copy
import math
from functools import lru_cache
from typing import Tuple

import numpy as np

from robridge.settings import (
    BACKGROUND_ID,
    FINGER_GAP,
    FINGER_SIZE,
    GRIPPER_ID,
    PALM_HEIGHT,
    PALM_SIZE,
    WORKSPACE_MAX,
    WORKSPACE_MIN,
)
from robridge.world.geometry import footprint
from robridge.world.state import CameraConfig, Frame, GripperState, WorldState


GRIPPER_COLOR = (90, 90, 90)
TEXTURE_SEED = 1234


THIRD_CENTER = (
    (WORKSPACE_MIN[0] + WORKSPACE_MAX[0]) / 2,
    (WORKSPACE_MIN[1] + WORKSPACE_MAX[1]) / 2,
)


def pixel_to_world(cam: CameraConfig, row, col, cx: float, cy: float, yaw: float = 0.0):
    """
    orthographic camera 의 (row, col) 을 world (X, Y) 로 옮긴다. 배열도 받는다.
    행 i 는 +Y, 열 j 는 +X 방향이다.
    """
    h, w = cam.resolution
    dx, dy, dtheta = cam.offset
    u = col + 0.5 - w / 2 - dx
    v = row + 0.5 - h / 2 - dy
    theta = yaw + dtheta
    c, s = math.cos(theta), math.sin(theta)
    xr = c * u + s * v
    yr = -s * u + c * v
    return cx + xr * cam.scale, cy + yr * cam.scale


def pixel_grid(cam: CameraConfig, cx: float, cy: float, yaw: float = 0.0) -> Tuple[np.ndarray, np.ndarray]:
    h, w = cam.resolution
    jj, ii = np.meshgrid(np.arange(w, dtype=np.float64), np.arange(h, dtype=np.float64))
    return pixel_to_world(cam, ii, jj, cx, cy, yaw)


def world_to_pixel(cam: CameraConfig, x: float, y: float, cx: float, cy: float, yaw: float = 0.0) -> Tuple[float, float]:
    """
    pixel_to_world 의 역변환. (row, col) 을 실수로 돌려준다.
    """
    h, w = cam.resolution
    dx, dy, dtheta = cam.offset
    xr, yr = (x - cx) / cam.scale, (y - cy) / cam.scale
    theta = yaw + dtheta
    c, s = math.cos(theta), math.sin(theta)
    u = c * xr - s * yr
    v = s * xr + c * yr
    return v + h / 2 + dy - 0.5, u + w / 2 + dx - 0.5


@lru_cache(maxsize=16)
def _texture(name: str, h: int, w: int) -> np.ndarray:
    ii, jj = np.mgrid[0:h, 0:w]
    match name:
        case "plain":
            base = np.full((h, w, 3), 200.0)
        case "wood":
            grain = 0.5 + 0.5 * np.sin(ii / 3.0 + 0.4 * np.sin(jj / 11.0))
            base = np.stack([150 + 40 * grain, 110 + 30 * grain, 70 + 20 * grain], axis=-1)
        case "checker":
            cell = ((ii // 8 + jj // 8) % 2).astype(np.float64)
            base = np.stack([60 + 150 * cell] * 3, axis=-1)
        case "stripes":
            band = ((jj // 6) % 2).astype(np.float64)
            base = np.stack([40 + 180 * band, 120 + 40 * band, 200 - 120 * band], axis=-1)
        case "speckle":
            rng = np.random.default_rng(TEXTURE_SEED)
            base = rng.uniform(40, 230, size=(h, w, 3))
        case _:
            raise ValueError(f"Unknown background texture: {name!r}")
    base.setflags(write=False)
    return base


def _gripper_local(X: np.ndarray, Y: np.ndarray, pose) -> Tuple[np.ndarray, np.ndarray]:
    gx, gy, _, gyaw = pose
    c, s = math.cos(gyaw), math.sin(gyaw)
    return c * (X - gx) + s * (Y - gy), -s * (X - gx) + c * (Y - gy)


def palm_mask(cam3: CameraConfig, pose) -> np.ndarray:
    """
    third view 에서 gripper palm 이 덮는 pixel. 가림 여부는 보지 않는다.
    """
    lx, ly = _gripper_local(*pixel_grid(cam3, *THIRD_CENTER), pose)
    return (np.abs(lx) <= PALM_SIZE / 2) & (np.abs(ly) <= PALM_SIZE / 2)


def finger_mask(cam1: CameraConfig, gripper: GripperState) -> np.ndarray:
    """
    first view 에서 두 손가락이 덮는 pixel.
    """
    gx, gy, _, gyaw = gripper.pose
    lx, ly = _gripper_local(*pixel_grid(cam1, gx, gy, gyaw), gripper.pose)
    gap = FINGER_GAP[0] + FINGER_GAP[1] * gripper.aperture
    fw, fl = FINGER_SIZE
    mask = np.zeros(lx.shape, dtype=bool)
    for sign in (-1.0, 1.0):
        mask |= (np.abs(lx - sign * gap) <= fw / 2) & (np.abs(ly) <= fl / 2)
    return mask


def _render_third(world: WorldState, cam: CameraConfig):
    h, w = cam.resolution
    X, Y = pixel_grid(cam, *THIRD_CENTER)
    zbuf = np.full((h, w), -np.inf)
    instance = np.full((h, w), BACKGROUND_ID, dtype=np.int32)
    rgb = _texture(world.appearance.background, h, w).copy()
    for e in sorted(world.entities, key=lambda e: e.id):
        mask = footprint(e, X, Y) & (e.top > zbuf)
        zbuf[mask] = e.top
        instance[mask] = e.id
        rgb[mask] = e.color

    gz = world.gripper.pose[2]
    palm = palm_mask(cam, world.gripper.pose) & (gz + PALM_HEIGHT > zbuf)
    instance[palm] = GRIPPER_ID
    rgb[palm] = GRIPPER_COLOR

    rgb = np.clip(rgb * np.array(world.appearance.light_gain), 0, 255)
    return np.round(rgb).astype(np.uint8), instance


def _render_first(world: WorldState, cam: CameraConfig):
    h, w = cam.resolution
    gx, gy, gz, gyaw = world.gripper.pose
    X, Y = pixel_grid(cam, gx, gy, gyaw)
    depth = np.zeros((h, w), dtype=np.float64)
    instance = np.full((h, w), BACKGROUND_ID, dtype=np.int32)
    for e in sorted(world.entities, key=lambda e: e.id):
        mask = footprint(e, X, Y) & (e.top > depth)
        depth[mask] = e.top
        instance[mask] = e.id

    # 손가락은 항상 맨 위에 그리고 높이는 tip z 이다
    fingers = finger_mask(cam, world.gripper)
    depth[fingers] = gz
    instance[fingers] = GRIPPER_ID
    return depth, instance


def render(world: WorldState, cam3: CameraConfig, cam1: CameraConfig) -> Frame:
    """
    third view (top-down rgb + instance) 와 손목 중심 first view (height + instance)
    """
    rgb3, instance3 = _render_third(world, cam3)
    depth1, instance1 = _render_first(world, cam1)
    return Frame(
        rgb3=rgb3,
        depth1=depth1,
        instance3=instance3,
        instance1=instance1,
        gripper=copy.deepcopy(world.gripper),
        tick=world.tick,
        symbols=world.symbol_table(),
        cams=(cam3, cam1),
    )
