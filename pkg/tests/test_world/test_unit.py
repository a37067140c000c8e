import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robridge.exceptions import ActionError, SceneError, SchemaVersionError
from robridge.settings import GRIPPER_ID, MAX_STEP, WORKSPACE_MAX, WORKSPACE_MIN
from robridge.world.render import THIRD_CENTER, render, world_to_pixel
from robridge.world.scene import create_world
from robridge.world.simulator import step
from robridge.world.state import Action4, CameraConfig, GripperState


@pytest.fixture
def scene() -> dict:
    return {
        "schema_version": 1,
        "entities": [
            {
                "name": "red block",
                "shape": "box",
                "dims": [0.04, 0.04, 0.04],
                "color": "red",
                "position": {"x": 0.2, "y": 0.2},
                "graspable": True,
            },
            {
                "name": "blue pad",
                "shape": "box",
                "dims": [0.08, 0.08, 0.005],
                "color": "blue",
                "position": {"x": [0.4, 0.5], "y": [0.4, 0.5]},
                "solid": False,
            },
        ],
    }


def _at(world, x, y, z, aperture=1.0):
    world = world.copy()
    world.gripper = GripperState(pose=(x, y, z, 0.0), aperture=aperture)
    return world


def test_create_world_is_deterministic(scene):
    # when
    a = create_world(scene, seed=7)
    b = create_world(scene, seed=7)
    c = create_world(scene, seed=8)
    # then
    assert a.digest() == b.digest()
    assert a.find("blue pad").pose != c.find("blue pad").pose
    assert [e.id for e in a.entities] == [2, 3]


def test_create_world_rejects_bad_specs(scene):
    # given
    wrong_version = {**scene, "schema_version": 99}
    overlapping = {
        "schema_version": 1,
        "entities": [
            {"name": "a", "shape": "box", "dims": [0.04, 0.04, 0.04], "color": "red", "position": {"x": 0.2, "y": 0.2}},
            {"name": "b", "shape": "box", "dims": [0.04, 0.04, 0.04], "color": "red", "position": {"x": 0.21, "y": 0.2}},
        ],
    }
    outside = {
        "schema_version": 1,
        "entities": [
            {"name": "a", "shape": "box", "dims": [0.04, 0.04, 0.04], "color": "red", "position": {"x": 0.63, "y": 0.2}},
        ],
    }
    # then
    with pytest.raises(SchemaVersionError):
        create_world(wrong_version, seed=0)
    with pytest.raises(SceneError):
        create_world(overlapping, seed=0)
    with pytest.raises(SceneError):
        create_world(outside, seed=0)


def test_step_moves_by_max_step_and_keeps_input(scene):
    # given
    world = create_world(scene, seed=0)
    x, y, z, _ = world.gripper.pose
    # when
    moved = step(world, Action4(dx=1.0))
    # then
    assert moved.gripper.pose[:3] == pytest.approx((x + MAX_STEP, y, z))
    assert moved.tick == 1
    assert world.tick == 0
    assert world.gripper.pose[0] == x


def test_action_coerce():
    # then
    assert Action4.coerce((2.0, -3.0, 0.5, 0.0)) == Action4(1.0, -1.0, 0.5, 0.0)
    with pytest.raises(ActionError):
        Action4.coerce((0.0, float("nan"), 0.0, 0.0))
    with pytest.raises(ActionError):
        Action4.coerce((0.0, 0.0, 0.0))


def test_grasp_lift_and_release(scene):
    # given: tip 5 mm above the block top
    world = _at(create_world(scene, seed=0), 0.2, 0.2, 0.045)
    # when
    closed = step(world, Action4(g=-1.0))
    lifted = step(closed, Action4(dz=1.0, g=-1.0))
    opening = step(lifted, Action4(g=1.0))
    released = step(opening, Action4(g=1.0))
    # then
    block = closed.find("red block")
    assert closed.gripper.holding == block.id
    assert lifted.find("red block").pose[2] == pytest.approx(MAX_STEP)
    assert opening.gripper.holding == block.id
    assert released.gripper.holding is None
    assert released.find("red block").pose[2] == pytest.approx(0.0)


def test_tip_cannot_sink_through_a_solid_top(scene):
    # given
    world = _at(create_world(scene, seed=0), 0.2, 0.2, 0.06, aperture=0.0)
    # when
    for _ in range(4):
        world = step(world, Action4(dz=-1.0))
    # then
    assert world.gripper.pose[2] == pytest.approx(0.04)


@settings(max_examples=50, deadline=None)
@given(
    st.lists(
        st.tuples(*[st.floats(min_value=-5.0, max_value=5.0)] * 4),
        min_size=1,
        max_size=30,
    )
)
def test_gripper_stays_in_workspace(actions):
    # given
    world = create_world(
        {
            "schema_version": 1,
            "entities": [
                {"name": "cube", "shape": "box", "dims": [0.04, 0.04, 0.04], "color": "red",
                 "position": {"x": 0.2, "y": 0.2}, "graspable": True}
            ],
        },
        seed=0,
    )
    # when
    for action in actions:
        world = step(world, action)
    # then
    tip = np.array(world.gripper.pose[:3])
    assert np.all(tip >= np.array(WORKSPACE_MIN) - 1e-12)
    assert np.all(tip <= np.array(WORKSPACE_MAX) + 1e-12)
    assert 0.0 <= world.gripper.aperture <= 1.0


def test_render_shapes_and_ids(scene):
    # given
    world = create_world(scene, seed=0)
    # when
    frame = render(world, CameraConfig.third(), CameraConfig.first())
    # then
    assert frame.rgb3.shape == (128, 128, 3) and frame.rgb3.dtype == np.uint8
    assert frame.depth1.shape == (64, 64)
    assert {2, 3, GRIPPER_ID} <= set(np.unique(frame.instance3).tolist())
    assert frame.symbols["red block"] == (2, "box")


def test_appearance_never_touches_geometry_channels(scene):
    # given
    world = create_world(scene, seed=0)
    other = world.copy()
    other.appearance.background = "checker"
    other.appearance.light_gain = (0.6, 0.6, 0.6)
    cams = (CameraConfig.third(), CameraConfig.first())
    # when
    a, b = render(world, *cams), render(other, *cams)
    # then
    assert not np.array_equal(a.rgb3, b.rgb3)
    assert np.array_equal(a.instance3, b.instance3)
    assert np.array_equal(a.depth1, b.depth1)
    assert np.array_equal(a.instance1, b.instance1)


def test_camera_shift_translates_the_third_view(scene):
    # given
    world = create_world(scene, seed=0)
    shifted = CameraConfig.third((4.0, -3.0, 0.0))
    # when
    a = render(world, CameraConfig.third(), CameraConfig.first())
    b = render(world, shifted, CameraConfig.first())
    # then
    rows, cols = np.nonzero(a.instance3 == 2)
    assert np.all(b.instance3[rows - 3, cols + 4] == 2)
    r0, c0 = world_to_pixel(CameraConfig.third(), 0.2, 0.2, *THIRD_CENTER)
    r1, c1 = world_to_pixel(shifted, 0.2, 0.2, *THIRD_CENTER)
    assert (r1 - r0, c1 - c0) == pytest.approx((-3.0, 4.0))
