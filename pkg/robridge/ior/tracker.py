import logging
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np
from scipy import ndimage

from robridge.ior.builder import DESTINATION, IOR, OBJECT
from robridge.settings import BACKGROUND_ID, TRACK_RADIUS
from robridge.world.render import THIRD_CENTER, finger_mask, palm_mask, pixel_to_world, world_to_pixel
from robridge.world.state import CameraConfig, Frame


logger = logging.getLogger("robridge.ior")

Centroid = Optional[Tuple[float, float]]


def centroid(mask: np.ndarray) -> Centroid:
    rows, cols = np.nonzero(mask)
    if rows.size == 0:
        return None
    return float(rows.mean()), float(cols.mean())


def segments(
    instance: np.ndarray, self_mask: Optional[np.ndarray] = None
) -> List[Tuple[np.ndarray, Tuple[float, float]]]:
    """
    전경 (background 가 아닌 pixel) 의 연결 성분 목록. label 값은 보지 않으므로 맞닿은 entity 는 한 성분이 된다.

    :param self_mask: 전경에서 먼저 빼는 gripper 자신의 pixel
    """
    foreground = instance != BACKGROUND_ID
    if self_mask is not None:
        foreground &= ~self_mask
    labels, n = ndimage.label(foreground)
    result = []
    for k in range(1, n + 1):
        mask = labels == k
        result.append((mask, centroid(mask)))
    return result


def _distance(a: Tuple[float, float], b: Tuple[float, float]) -> float:
    return float(np.hypot(a[0] - b[0], a[1] - b[1]))


@dataclass(kw_only=True, frozen=True)
class TrackerState:
    """
    channel (g, o, d) 별 직전 centroid. lost 는 third view mask 가 비었다는 뜻이다.
    destination 이 없는 primitive 의 d 채널은 처음부터 lost 이다.
    """

    centroids3: Tuple[Centroid, Centroid, Centroid] = field()
    centroids1: Tuple[Centroid, Centroid, Centroid] = field()
    lost: Tuple[bool, bool, bool] = field()
    ee_pose: Tuple[float, float, float, float] = field()

    @classmethod
    def start(cls, ior: IOR) -> "TrackerState":
        centroids3 = tuple(centroid(m) for m in ior.masks3)
        lost = tuple(c is None for c in centroids3)
        return cls(
            centroids3=centroids3,
            centroids1=tuple(centroid(m) for m in ior.masks1),
            lost=lost,
            ee_pose=ior.ee_pose,
        )


def _cams(frame: Frame) -> Tuple[CameraConfig, CameraConfig]:
    return frame.cams or (CameraConfig.third(), CameraConfig.first())


def _ego_shift(cam1: CameraConfig, c: Centroid, old_ee, new_ee) -> Centroid:
    """
    손목 이동만큼 정지한 점의 first view 위치를 옮긴다.
    """
    if c is None:
        return None
    x, y = pixel_to_world(cam1, c[0], c[1], old_ee[0], old_ee[1], old_ee[3])
    return world_to_pixel(cam1, x, y, new_ee[0], new_ee[1], new_ee[3])


def _from_third(cam3: CameraConfig, cam1: CameraConfig, c: Centroid, ee) -> Centroid:
    if c is None:
        return None
    x, y = pixel_to_world(cam3, c[0], c[1], *THIRD_CENTER)
    return world_to_pixel(cam1, x, y, ee[0], ee[1], ee[3])


def _associate(candidates, predictions: List[List[Centroid]], active: List[bool]):
    """
    channel 순서대로 가장 가까운 미배정 segment 를 radius 안에서 고른다.
    """
    taken, chosen = set(), []
    for preds, on in zip(predictions, active):
        best, best_d = None, TRACK_RADIUS
        preds = [p for p in preds if p is not None]
        if on and preds:
            for idx, (_, c) in enumerate(candidates):
                if idx in taken:
                    continue
                d = min(_distance(c, p) for p in preds)
                if d <= best_d:
                    best, best_d = idx, d
        if best is not None:
            taken.add(best)
        chosen.append(best)
    return chosen


def track_update(tracker: TrackerState, ior: IOR, frame: Frame) -> Tuple[TrackerState, IOR]:
    """
    매 tick 마다 채널을 새 frame 의 전경 연결 성분에 다시 붙인다.
    gripper 채널은 자기 자세에서 투영한 pixel 을 쓰고, object / destination 채널은
    gripper pixel 을 뺀 전경에서 직전 centroid 에 가장 가까운 성분을 radius 안에서 고른다.
    놓친 채널은 lost 가 되고 0 이 된다.
    """
    cam3, cam1 = _cams(frame)
    new_ee = tuple(float(v) for v in frame.gripper.pose)
    empty3 = np.zeros(frame.instance3.shape, dtype=bool)
    empty1 = np.zeros(frame.instance1.shape, dtype=bool)
    active = [True, True, ior.has_des]
    tracked = (OBJECT, DESTINATION)

    self3 = palm_mask(cam3, new_ee) & (frame.instance3 != BACKGROUND_ID)
    segs3 = segments(frame.instance3, self3)
    live3 = [on and not lost for on, lost in zip(active, tracker.lost)]
    chosen3 = _associate(segs3, [[tracker.centroids3[ch]] for ch in tracked], [live3[ch] for ch in tracked])

    masks3, centroids3, lost = [self3], [centroid(self3)], [not self3.any()]
    for ch, idx in zip(tracked, chosen3):
        if idx is None:
            masks3.append(empty3)
            centroids3.append(None)
            lost.append(True)
            if live3[ch]:
                logger.debug(f"tick={frame.tick} channel {ch} lost")
        else:
            masks3.append(segs3[idx][0])
            centroids3.append(segs3[idx][1])
            lost.append(False)

    self1 = finger_mask(cam1, frame.gripper) & (frame.instance1 != BACKGROUND_ID)
    segs1 = segments(frame.instance1, self1)
    predictions1 = [
        [
            tracker.centroids1[ch],
            _ego_shift(cam1, tracker.centroids1[ch], tracker.ee_pose, new_ee),
            _from_third(cam3, cam1, centroids3[ch], new_ee),
        ]
        for ch in tracked
    ]
    chosen1 = _associate(segs1, predictions1, [active[ch] and not lost[ch] for ch in tracked])
    masks1 = [self1] + [empty1 if idx is None else segs1[idx][0] for idx in chosen1]
    centroids1 = [centroid(self1)] + [None if idx is None else segs1[idx][1] for idx in chosen1]

    updated = replace(ior, masks3=tuple(masks3), masks1=tuple(masks1), depth1=frame.depth1)
    updated.refresh(frame.gripper)
    state = TrackerState(
        centroids3=tuple(centroids3),
        centroids1=tuple(centroids1),
        lost=tuple(lost),
        ee_pose=new_ee,
    )
    return state, updated
