import math
from typing import Tuple

import numpy as np

from robridge.items import EntityVO


def local_xy(entity: EntityVO, x, y):
    """
    world (x, y) 를 entity frame 으로 옮긴다. numpy 배열도 받는다.
    """
    cx, cy, _, yaw = entity.pose
    c, s = math.cos(yaw), math.sin(yaw)
    dx, dy = x - cx, y - cy
    return c * dx + s * dy, -s * dx + c * dy


def footprint(entity: EntityVO, x, y):
    """
    :return: (x, y) 가 entity 의 바닥 투영 안에 있는지 (배열 가능)
    """
    lx, ly = local_xy(entity, x, y)
    if entity.shape == "box":
        sx, sy, _ = entity.dims
        return (np.abs(lx) <= sx / 2) & (np.abs(ly) <= sy / 2)
    radius = entity.dims[0]
    return lx * lx + ly * ly <= radius * radius


def contains_xy(entity: EntityVO, x: float, y: float) -> bool:
    return bool(footprint(entity, x, y))


def horizontal_distance(entity: EntityVO, x: float, y: float) -> float:
    lx, ly = local_xy(entity, x, y)
    if entity.shape == "box":
        sx, sy, _ = entity.dims
        return math.hypot(max(abs(lx) - sx / 2, 0.0), max(abs(ly) - sy / 2, 0.0))
    return max(math.hypot(lx, ly) - entity.dims[0], 0.0)


def closest_footprint_point(entity: EntityVO, x: float, y: float) -> Tuple[float, float]:
    lx, ly = local_xy(entity, x, y)
    if entity.shape == "box":
        sx, sy, _ = entity.dims
        px = min(max(lx, -sx / 2), sx / 2)
        py = min(max(ly, -sy / 2), sy / 2)
    else:
        r = math.hypot(lx, ly)
        radius = entity.dims[0]
        if r <= radius:
            px, py = lx, ly
        else:
            px, py = lx * radius / r, ly * radius / r
    cx, cy, _, yaw = entity.pose
    c, s = math.cos(yaw), math.sin(yaw)
    return cx + c * px - s * py, cy + s * px + c * py


def distance_to_solid(entity: EntityVO, point) -> float:
    px, py, pz = (float(v) for v in point)
    dh = horizontal_distance(entity, px, py)
    dz = max(entity.pose[2] - pz, pz - entity.top, 0.0)
    return math.hypot(dh, dz)


def center3(entity: EntityVO) -> np.ndarray:
    x, y, z, _ = entity.pose
    return np.array([x, y, z + entity.height / 2])


def half_extent_along(entity: EntityVO, axis) -> float:
    ax, ay, az = (float(v) for v in axis)
    if entity.shape == "box":
        sx, sy, sz = entity.dims
        yaw = entity.pose[3]
        c, s = math.cos(yaw), math.sin(yaw)
        lx, ly = c * ax + s * ay, -s * ax + c * ay
        return abs(lx) * sx / 2 + abs(ly) * sy / 2 + abs(az) * sz / 2
    radius, height = entity.dims
    return math.hypot(ax, ay) * radius + abs(az) * height / 2


def aabb(entity: EntityVO) -> Tuple[float, float, float, float]:
    """
    :return: (xmin, ymin, xmax, ymax) 바닥 투영의 axis-aligned bound
    """
    x, y, _, yaw = entity.pose
    if entity.shape == "box":
        sx, sy, _ = entity.dims
        c, s = abs(math.cos(yaw)), abs(math.sin(yaw))
        hx = c * sx / 2 + s * sy / 2
        hy = s * sx / 2 + c * sy / 2
    else:
        hx = hy = entity.dims[0]
    return x - hx, y - hy, x + hx, y + hy


def footprint_overlap(a: EntityVO, b: EntityVO) -> float:
    """
    :return: 두 바닥 투영의 겹침 깊이 (겹치지 않으면 0)
    """
    ax0, ay0, ax1, ay1 = aabb(a)
    bx0, by0, bx1, by1 = aabb(b)
    ox = min(ax1, bx1) - max(ax0, bx0)
    oy = min(ay1, by1) - max(ay0, by0)
    if ox <= 0 or oy <= 0:
        return 0.0
    if a.shape == "cylinder" and b.shape == "cylinder":
        gap = math.hypot(a.pose[0] - b.pose[0], a.pose[1] - b.pose[1])
        return max(a.dims[0] + b.dims[0] - gap, 0.0)
    return min(ox, oy)


def vertical_overlap(a: EntityVO, b: EntityVO) -> float:
    return min(a.top, b.top) - max(a.pose[2], b.pose[2])


def handle_point(entity: EntityVO) -> np.ndarray:
    """
    grip 모드 fixture 의 손잡이 위치. 손잡이는 solid 바깥 1 cm 에 있다.
    """
    art = entity.articulation
    c = center3(entity)
    if art.joint == "revolute":
        x, y, _, yaw = entity.pose
        reach = (entity.dims[0] / 2 if entity.shape == "box" else entity.dims[0]) + 0.01
        return np.array([x + reach * math.cos(yaw), y + reach * math.sin(yaw), c[2]])
    axis = np.array(art.axis, dtype=np.float64)
    return c + axis * (half_extent_along(entity, axis) + 0.01)


def revolute_tangent(entity: EntityVO, point) -> Tuple[np.ndarray, float]:
    """
    :return: (회전축 기준 +방향 접선 단위벡터, 반지름)
    """
    axis = np.array(entity.articulation.axis, dtype=np.float64)
    radial = np.asarray(point, dtype=np.float64) - center3(entity)
    radial -= axis * float(radial @ axis)
    radius = float(np.linalg.norm(radial))
    if radius < 1e-9:
        return np.zeros(3), 0.0
    tangent = np.cross(axis, radial / radius)
    return tangent, radius
