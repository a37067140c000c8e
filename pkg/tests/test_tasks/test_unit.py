import math

import pytest

from robridge.exceptions import ConfigError, TaskNotFoundError
from robridge.tasks.catalog import default_catalog
from robridge.tasks.predicates import is_success, reward, stages_completed
from robridge.tasks.suites import SUITE_NAMES, ExpertRandomization, get_suite, instantiate


@pytest.fixture
def catalog():
    return default_catalog()


def _put(world, obj: str, des: str):
    o, d = world.find(obj), world.find(des)
    o.pose = (d.pose[0], d.pose[1], d.top, o.pose[3])
    return world


def test_catalog_splits(catalog):
    # then
    assert len(catalog.ids()) == 14
    assert len(catalog.ids("train")) == 10
    assert sorted(catalog.ids("unseen")) == ["bin-pick", "plate-slide", "press-handle"]
    assert catalog.ids("long_horizon") == ["pick-insert"]
    assert "pick-place" in catalog


def test_catalog_unknown_task(catalog):
    # then
    with pytest.raises(TaskNotFoundError):
        catalog.get("juggle")


def test_instruction_from_template(catalog):
    # when
    instance = instantiate("pick-place", "nominal", 0, catalog=catalog)
    # then
    assert instance.instruction == "put the green block on the blue pad"
    assert catalog.get("pick-insert").instruction() == (
        "put the yellow cylinder in the round slot then put the blue cuboid in the square slot"
    )


def test_reward_is_one_only_on_success(catalog):
    # given
    task = catalog.get("pick-place")
    world = instantiate("pick-place", "nominal", 3, catalog=catalog).world
    # when
    before = reward(task, world)
    after = reward(task, _put(world.copy(), "green block", "blue pad"))
    # then
    assert 0.0 <= before <= 0.99
    assert not is_success(task, world)
    assert after == 1.0


def test_stage_pointer_only_advances_in_order(catalog):
    # given
    task = catalog.get("pick-insert")
    world = _put(instantiate("pick-insert", "nominal", 1, catalog=catalog).world, "yellow cylinder", "round slot")
    # then
    assert stages_completed(task, world, 0) == 0
    assert stages_completed(task, world, 1) == 2
    _put(world, "blue cuboid", "square slot")
    assert stages_completed(task, world, 3) == 4
    assert reward(task, world) == 1.0


def test_instantiate_is_deterministic(catalog):
    # when
    a = instantiate("push-block", "unseen_light", 11, catalog=catalog)
    b = instantiate("push-block", "unseen_light", 11, catalog=catalog)
    # then
    assert a.world.digest() == b.world.digest()
    assert a.cams == b.cams


@pytest.mark.parametrize("suite", SUITE_NAMES)
def test_suites_keep_geometry(catalog, suite):
    # when
    nominal = instantiate("pick-place", "nominal", 5, catalog=catalog).world
    shifted = instantiate("pick-place", suite, 5, catalog=catalog).world
    # then
    assert [e.pose for e in shifted.entities] == [e.pose for e in nominal.entities]
    assert [e.dims for e in shifted.entities] == [e.dims for e in nominal.entities]
    assert shifted.gripper.pose == nominal.gripper.pose


def test_unseen_camera_offset_range(catalog):
    for seed in range(5):
        # when
        dx, dy, dtheta = instantiate("reach-target", "unseen_camera", seed, catalog=catalog).cams[0].offset
        # then
        assert 12.0 <= abs(dx) <= 20.0
        assert 12.0 <= abs(dy) <= 20.0
        assert math.radians(12.0) <= abs(dtheta) <= math.radians(15.0)


def test_unseen_camera_is_outside_expert_randomization():
    # given
    suite = get_suite("unseen_camera")
    expert = ExpertRandomization()
    # then
    assert suite.camera_rotation_deg[0] > expert.camera_rot_deg
    assert suite.camera_shift_px[0] > expert.camera_shift_px


def test_appearance_suites(catalog):
    # when
    background = instantiate("pick-place", "unseen_background", 2, catalog=catalog).world.appearance
    light = instantiate("pick-place", "unseen_light", 2, catalog=catalog).world.appearance
    # then
    assert background.background in {"checker", "stripes", "speckle"}
    assert all(0.5 <= g <= 0.7 or 1.3 <= g <= 1.6 for g in light.light_gain)


def test_expert_randomization_perturbs_geometry(catalog):
    # when
    plain = instantiate("pick-place", "nominal", 4, catalog=catalog).world
    a = instantiate("pick-place", "nominal", 4, ExpertRandomization(), catalog=catalog)
    b = instantiate("pick-place", "nominal", 4, ExpertRandomization(), catalog=catalog)
    # then
    assert a.world.digest() == b.world.digest()
    assert a.cams == b.cams
    assert a.world.appearance.background in {"plain", "wood"}
    assert plain.digest() != a.world.digest()


def test_unknown_suite(catalog):
    # then
    with pytest.raises(ConfigError):
        instantiate("pick-place", "unseen_gravity", 0, catalog=catalog)
