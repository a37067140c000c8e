import pytest

from robridge.exceptions import ConfigError
from robridge.hcp.planner import TemplatePlanner
from robridge.items import PrimitiveActionVO
from robridge.loop.controller import LoopConfig, Outcome, expected_held, oracle_plan, run_episode, run_long_horizon
from robridge.loop.faults import FaultConfig, FaultInjector
from robridge.loop.policy import ExpertAsPolicy, ZeroPolicy
from robridge.tasks.catalog import default_catalog
from robridge.tasks.suites import instantiate
from robridge.world.state import Action4


def _episode(task_id: str, policy, config: LoopConfig = LoopConfig(), seed: int = 0):
    return run_episode(default_catalog().get(task_id), instantiate(task_id, "nominal", seed), policy, config)


def test_oracle_plan_clauses():
    # when
    plan = oracle_plan(default_catalog().get("pick-insert"))
    # then
    assert plan.clause_of == [0, 0, 0, 0, 1, 1, 1, 1]
    assert str(plan.actions[3]) == "place(yellow cylinder, round slot)"


def test_expected_held():
    # given
    plan = TemplatePlanner().expand("put the green block on the blue pad")
    # then
    assert expected_held(plan) is None
    plan.cursor = 2
    assert expected_held(plan) == "green block"
    plan.cursor = 3
    assert expected_held(plan) is None


def test_expert_press_button():
    # when
    result = _episode("press-button", ExpertAsPolicy())
    # then
    assert result.success
    assert result.outcome == Outcome.DONE
    assert result.reward == 1.0
    assert [r.status for r in result.primitive_log if r.status == "Success"] == ["Success", "Success"]
    assert result.final_digest


def test_expert_pick_place_records_steps():
    # when
    result = _episode("pick-place", ExpertAsPolicy(), LoopConfig(record=True), seed=3)
    # then
    assert result.success
    assert len(result.steps) == result.ticks
    assert result.visited
    assert all(v.primitive.type != "reach" for v in result.visited)


def test_zero_policy_fails():
    # when
    result = _episode("press-button", ZeroPolicy(), LoopConfig(primitive_timeout=50, retry_budget=1))
    # then
    assert not result.success
    assert result.outcome == Outcome.FAILED
    assert "retry budget" in result.reason
    assert result.regenerations == 1


def test_max_ticks():
    # when
    result = _episode("pick-place", ExpertAsPolicy(), LoopConfig(max_ticks=10))
    # then
    assert not result.success
    assert result.ticks == 10
    assert result.reason == "max ticks reached"


def test_persistent_block_grasp_exhausts_retries():
    # given
    config = LoopConfig(retry_budget=0, fault=FaultConfig(kind="block_grasp", persistent=True))
    # when
    result = _episode("pick-place", ExpertAsPolicy(), config)
    # then
    assert not result.success
    assert "retry budget" in result.reason


def test_transient_drop_recovers():
    # given
    config = LoopConfig(fault=FaultConfig(kind="drop", after_primitive=2))
    # when
    result = _episode("pick-place", ExpertAsPolicy(), config, seed=1)
    # then
    assert result.success
    assert result.regenerations >= 1
    assert result.replans >= 1


def test_long_horizon_zero_policy():
    # given
    task = default_catalog().get("pick-insert")
    # when
    n = run_long_horizon(task, instantiate("pick-insert", "nominal", 0), ZeroPolicy(), LoopConfig(retry_budget=0))
    # then
    assert n == 0


def test_long_horizon_expert():
    # given
    task = default_catalog().get("pick-insert")
    # when
    n = run_long_horizon(task, instantiate("pick-insert", "nominal", 2), ExpertAsPolicy())
    # then
    assert n == 4


def test_fault_injector():
    # given
    world = instantiate("pick-place", "nominal", 0).world
    grasp = PrimitiveActionVO(type="grasp", obj="green block")
    injector = FaultInjector(FaultConfig(kind="block_grasp", after_primitive=1))
    # then
    assert injector.apply(Action4(g=-1.0), grasp, 0, world).g == -1.0
    assert injector.apply(Action4(g=-1.0), grasp, 1, world).g == 1.0
    injector.on_regenerate()
    assert injector.apply(Action4(g=-1.0), grasp, 1, world).g == -1.0
    with pytest.raises(ConfigError):
        FaultConfig(kind="earthquake")
