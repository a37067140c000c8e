from dataclasses import replace

import numpy as np
import pytest

from robridge.exceptions import IORBuildError, ShapeMismatchError
from robridge.hcp.grounding import ground
from robridge.ior.builder import DESTINATION, GRIPPER, OBJECT, build, one_hot
from robridge.ior.tensor import GRID_SHAPE, IORTensor, area_mean, heatmap, to_tensor
from robridge.ior.tracker import TrackerState, track_update
from robridge.items import PrimitiveActionVO
from robridge.settings import PRIMITIVE_TYPES, VEC_SIZE
from robridge.tasks.suites import instantiate
from robridge.world.render import render


PLACE = PrimitiveActionVO(type="place", obj="green block", des="blue pad")


@pytest.fixture
def frame():
    instance = instantiate("pick-place", "nominal", 0)
    return render(instance.world, *instance.cams)


@pytest.fixture
def ior(frame):
    return build(PLACE, frame, ground(PLACE, frame))


def test_build_masks(frame, ior):
    # given
    grounding = ground(PLACE, frame)
    # then
    assert ior.has_des
    assert np.array_equal(ior.masks3[OBJECT], grounding.obj_mask3)
    assert np.array_equal(ior.masks3[DESTINATION], grounding.des_mask3)
    assert ior.gripper_open
    assert ior.direction is None
    assert np.array_equal(ior.onehot, one_hot("place"))
    for depth, mask in zip(ior.depths, ior.masks1):
        assert np.all(depth[~mask] == 0.0)


def test_build_normalizes_direction(frame):
    # given
    reach = PrimitiveActionVO(type="reach", obj="green block")
    # when
    ior = build(reach, frame, ground(reach, frame), d=np.array([3.0, 0.0, 4.0]))
    # then
    assert np.allclose(ior.direction, [0.6, 0.0, 0.8])
    assert not ior.has_des
    assert not ior.masks3[DESTINATION].any()


def test_build_rejects_empty_object(frame):
    # given
    grounding = ground(PLACE, frame)
    grounding.obj_mask3 = np.zeros_like(grounding.obj_mask3)
    # then
    with pytest.raises(IORBuildError):
        build(PLACE, frame, grounding)


def test_area_mean():
    # given
    image = np.zeros((128, 128))
    image[:4, :4] = 1.0
    odd = np.full((100, 90), 0.25)
    # when
    small = area_mean(image)
    # then
    assert small.shape == (32, 32)
    assert small[0, 0] == 1.0
    assert small.sum() == 1.0
    assert np.allclose(area_mean(odd), 0.25)


def test_heatmap_peaks_at_centroid():
    # given
    mask = np.zeros((128, 128), dtype=bool)
    mask[40:44, 80:84] = True
    # when
    h = heatmap(mask)
    # then
    assert np.unravel_index(np.argmax(h), h.shape) == (10, 20)
    assert h.max() <= 1.0
    assert not heatmap(np.zeros((128, 128), dtype=bool)).any()


def test_to_tensor(ior):
    # when
    tensor = to_tensor(ior)
    # then
    assert tensor.grid.shape == GRID_SHAPE
    assert tensor.vec.shape == (VEC_SIZE,)
    assert tensor.grid.dtype == np.float32
    assert tensor.vec[PRIMITIVE_TYPES.index("place")] == 1.0
    assert tensor.vec[-1] == 1.0
    assert set(np.unique(tensor.grid[:3])) <= {0.0, 1.0}
    assert tensor.grid[OBJECT].any()
    assert np.all((tensor.grid[3:6] >= 0.0) & (tensor.grid[3:6] <= 1.0))
    assert np.all(np.abs(tensor.vec[len(PRIMITIVE_TYPES):len(PRIMITIVE_TYPES) + 4]) <= 1.0)


def test_to_tensor_reads_proprioception_from_frame(ior):
    # given
    instance = instantiate("pick-place", "nominal", 0)
    instance.world.gripper.pose = (0.2, 0.4, 0.12, 0.3)
    instance.world.gripper.aperture = 0.0
    moved = render(instance.world, *instance.cams)
    # when
    tensor = to_tensor(ior, moved)
    # then
    refreshed = replace(ior)
    refreshed.refresh(moved.gripper)
    assert np.array_equal(tensor.vec, to_tensor(refreshed).vec)
    assert np.array_equal(tensor.grid, to_tensor(ior).grid)
    assert tensor.vec[-1] == -1.0
    assert to_tensor(ior).vec[-1] == 1.0


def test_tensor_bytes(ior):
    # given
    tensor = to_tensor(ior)
    # when
    raw = tensor.to_bytes()
    # then
    assert len(raw) == IORTensor.nbytes()
    assert np.array_equal(IORTensor.from_bytes(raw).grid, tensor.grid)
    with pytest.raises(ShapeMismatchError):
        IORTensor.from_bytes(raw[:-4])
    with pytest.raises(ShapeMismatchError):
        IORTensor(grid=np.zeros((3, 32, 32)), vec=np.zeros(VEC_SIZE))


def test_tracker_keeps_static_masks(frame, ior):
    # given
    state = TrackerState.start(ior)
    # when
    state, updated = track_update(state, ior, frame)
    # then
    assert state.lost == (False, False, False)
    for before, after in zip(ior.masks3, updated.masks3):
        assert np.array_equal(before, after)


def test_tracker_loses_vanished_object(frame, ior):
    # given
    obj_id = ground(PLACE, frame).obj_id
    vanished = replace(
        frame,
        instance3=np.where(frame.instance3 == obj_id, 0, frame.instance3),
        instance1=np.where(frame.instance1 == obj_id, 0, frame.instance1),
    )
    state = TrackerState.start(ior)
    # when
    state, updated = track_update(state, ior, vanished)
    # then
    assert state.lost[OBJECT]
    assert not updated.masks3[OBJECT].any()
    assert not state.lost[DESTINATION]


def test_tracker_ignores_instance_labels(frame, ior):
    # given
    obj_id = ground(PLACE, frame).obj_id
    relabelled = replace(frame, instance3=np.where(frame.instance3 == obj_id, 99, frame.instance3))
    # when
    state, updated = track_update(TrackerState.start(ior), ior, relabelled)
    # then
    assert not state.lost[OBJECT]
    assert np.array_equal(updated.masks3[OBJECT], ior.masks3[OBJECT])


def test_tracker_loses_object_covered_by_palm():
    # given: palm 보다 작은 block 위로 gripper 를 옮긴다
    instance = instantiate("pick-place", "nominal", 0)
    world = instance.world.copy()
    block = world.find("green block")
    block.dims = (0.01, 0.01, 0.01)
    before = render(world, *instance.cams)
    ior = build(PLACE, before, ground(PLACE, before))
    state = TrackerState.start(ior)
    world.gripper.pose = (block.pose[0], block.pose[1], 0.06, 0.0)
    after = render(world, *instance.cams)
    # when
    state, updated = track_update(state, ior, after)
    # then
    assert not np.any(after.instance3 == block.id)
    assert state.lost[OBJECT]
    assert not updated.masks3[OBJECT].any()
    assert not state.lost[GRIPPER]
    assert not state.lost[DESTINATION]
