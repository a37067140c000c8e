import sys

import numpy as np
import pytest

from robridge.exceptions import ConstraintError, GroundingError, PlanningError
from robridge.hcp.checker import CheckerNoise, Status, check_status
from robridge.hcp.constraint import direction_constraint
from robridge.hcp.grounding import GroundingNoise, ground
from robridge.hcp.planner import ExternalPlanner, TemplatePlanner, planner_from_env
from robridge.items import PrimitiveActionVO
from robridge.tasks.suites import instantiate
from robridge.world.render import render


FAKE_PLANNER = (
    "import json, sys; "
    "request = json.load(sys.stdin); "
    "name = request[\"objects\"][0]; "
    "print(json.dumps([{\"type\": \"reach\", \"obj\": name}, {\"type\": \"press\", \"obj\": name}]))"
)


def _frame(task_id: str, seed: int = 0):
    instance = instantiate(task_id, "nominal", seed)
    return instance.world, render(instance.world, *instance.cams)


def test_template_planner_pick_place():
    # when
    plan = TemplatePlanner().expand("Put the green block on the blue pad.")
    # then
    assert [str(a) for a in plan.actions] == [
        "reach(green block)",
        "grasp(green block)",
        "reach(blue pad)",
        "place(green block, blue pad)",
    ]
    assert plan.cursor == 0
    assert not plan.done


def test_template_planner_clauses():
    # when
    plan = TemplatePlanner().expand("press the red button and then slide the white plate")
    # then
    assert [a.type for a in plan.actions] == ["reach", "press", "reach", "push"]
    assert plan.clause_of == [0, 0, 1, 1]
    assert plan.clause_start(1) == 2


def test_template_planner_out_of_grammar():
    # then
    with pytest.raises(PlanningError):
        TemplatePlanner().expand("dance with the robot")


def test_external_planner_pipe():
    # given
    _, frame = _frame("press-button")
    planner = ExternalPlanner(f"pipe:{sys.executable} -c '{FAKE_PLANNER}'")
    # when
    plan = planner.plan("press the red button", frame)
    # then
    assert [str(a) for a in plan.actions] == ["reach(red button)", "press(red button)"]


def test_external_planner_rejects_bad_reply():
    # given
    _, frame = _frame("press-button")
    # then
    with pytest.raises(PlanningError):
        ExternalPlanner("pipe:echo '{\"plan\": 1}'").plan("press the red button", frame)
    with pytest.raises(PlanningError):
        ExternalPlanner("pipe:echo '[]'").plan("press the red button", frame)
    with pytest.raises(PlanningError):
        ExternalPlanner("http://localhost:1")


def test_planner_from_env(monkeypatch):
    # given
    monkeypatch.delenv("ROBRIDGE_PLANNER_ENDPOINT", raising=False)
    # then
    assert isinstance(planner_from_env(), TemplatePlanner)
    monkeypatch.setenv("ROBRIDGE_PLANNER_ENDPOINT", "tcp://localhost:9")
    monkeypatch.setenv("ROBRIDGE_PLANNER_TIMEOUT", "0.5")
    planner = planner_from_env()
    assert isinstance(planner, ExternalPlanner)
    assert planner.timeout == 0.5


def test_ground_reads_instance_map():
    # given
    world, frame = _frame("pick-place")
    action = PrimitiveActionVO(type="place", obj="green block", des="blue pad")
    # when
    grounding = ground(action, frame)
    # then
    assert grounding.obj_id == world.find("green block").id
    assert grounding.des_id == world.find("blue pad").id
    assert np.array_equal(grounding.obj_mask3, frame.instance3 == grounding.obj_id)
    assert grounding.confidence == 1.0


def test_ground_unknown_name():
    # given
    _, frame = _frame("pick-place")
    # then
    with pytest.raises(GroundingError):
        ground(PrimitiveActionVO(type="reach", obj="purple cone"), frame)


def test_ground_noise_changes_mask_size():
    # given
    _, frame = _frame("pick-place")
    action = PrimitiveActionVO(type="reach", obj="green block")
    # when
    exact = ground(action, frame).obj_mask3.sum()
    dilated = ground(action, frame, GroundingNoise(dilate=2)).obj_mask3.sum()
    eroded = ground(action, frame, GroundingNoise(erode=1)).obj_mask3.sum()
    # then
    assert eroded < exact < dilated


def test_direction_constraint():
    # given
    world, _ = _frame("open-drawer")
    # when
    opening = direction_constraint(PrimitiveActionVO(type="open", obj="brown drawer"), world)
    closing = direction_constraint(PrimitiveActionVO(type="close", obj="brown drawer"), world)
    # then
    assert np.allclose(opening, [-1.0, 0.0, 0.0])
    assert np.allclose(closing, [1.0, 0.0, 0.0])
    assert direction_constraint(PrimitiveActionVO(type="reach", obj="brown drawer"), world) is None


def test_direction_constraint_needs_articulation():
    # given
    world, _ = _frame("pick-place")
    # then
    with pytest.raises(ConstraintError):
        direction_constraint(PrimitiveActionVO(type="push", obj="green block"), world)


def test_check_status():
    # given
    world, frame = _frame("pick-place")
    reach = PrimitiveActionVO(type="reach", obj="green block")
    grasp = PrimitiveActionVO(type="grasp", obj="green block")
    holding = world.copy()
    holding.gripper.holding = world.find("green block").id
    late = world.copy()
    late.tick = 300
    # then
    assert check_status(reach, frame, world, timeout=200) == Status.NORMAL
    assert check_status(grasp, frame, holding, timeout=200) == Status.SUCCESS
    assert check_status(reach, frame, late, timeout=200) == Status.WRONG
    assert check_status(reach, frame, world, timeout=200, expected_held="green block") == Status.WRONG


def test_check_status_noise_always_flips():
    # given
    world, frame = _frame("pick-place")
    reach = PrimitiveActionVO(type="reach", obj="green block")
    # when
    status = check_status(reach, frame, world, timeout=200, noise=CheckerNoise(false_rate=1.0, seed=3))
    # then
    assert status != Status.NORMAL


def test_check_status_lost_object_under_palm_is_not_wrong():
    # given
    world, frame = _frame("pick-place")
    grasp = PrimitiveActionVO(type="grasp", obj="green block")
    block = world.find("green block")
    covered = world.copy()
    covered.gripper.pose = (block.pose[0], block.pose[1], block.top + 0.05, 0.0)
    # then
    assert check_status(grasp, frame, world, timeout=200, object_lost=True) == Status.WRONG
    assert check_status(grasp, frame, covered, timeout=200, object_lost=True) == Status.NORMAL
