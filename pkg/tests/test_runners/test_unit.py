import dataclasses
import json
from pathlib import Path

import pytest

from robridge.engine import Engine
from robridge.exceptions import ConfigError, StoreError
from robridge.items.config import ExperimentConfig
from robridge.loop.policy import ExpertAsPolicy, GEAPolicy, ZeroPolicy
from robridge.out.model.enum.message_enum import MessageTypeEnum
from robridge.runners.collect_runner import CollectRunner
from robridge.runners.dagger_runner import DaggerRunner
from robridge.runners.eval_runner import EvalRunner, load_policy, success_rates
from robridge.runners.replay_runner import ReplayRunner


CONFIG_DIR = Path(__file__).parents[2] / "configs"


@pytest.fixture(scope="module")
def config() -> ExperimentConfig:
    return ExperimentConfig.from_file(CONFIG_DIR / "smoke.json")


@pytest.fixture(scope="module")
def collected(config, tmp_path_factory) -> Path:
    out = tmp_path_factory.mktemp("smoke")
    status = CollectRunner.run(config=config, out=out, stage="test", loglevel="INFO")
    assert status == MessageTypeEnum.SUCCESS
    return out


def test_collect_writes_manifest(collected, config):
    # when
    manifest = json.loads((collected / "manifest.json").read_text())
    # then
    assert set(manifest["tasks"]) == set(config.tasks)
    for task_id in config.tasks:
        entry = manifest["tasks"][task_id]
        assert entry["written"] == 1
        assert len(entry["digests"]) == 1
        assert (collected / "demos" / task_id / "index.json").exists()
    assert (collected / "collect.log").exists()


def test_collect_is_reproducible(collected, config, tmp_path):
    # when
    CollectRunner.run(config=config, out=tmp_path, stage="test", loglevel="INFO")
    # then
    assert (tmp_path / "manifest.json").read_bytes() == (collected / "manifest.json").read_bytes()


def test_dagger_needs_stores(config, tmp_path):
    # then
    with pytest.raises(StoreError, match="run collect first"):
        DaggerRunner.run(config=config, out=tmp_path, stage="test", loglevel="INFO")


def test_dagger_writes_checkpoints(collected, config):
    # when
    history = DaggerRunner.run(config=config, out=collected, stage="test", loglevel="INFO")
    # then
    assert len(history) == 1
    assert (collected / "dagger" / "iter_001" / "state.json").exists()
    assert (collected / "dagger" / "iter_001" / "policy.bin").exists()
    assert (collected / "dagger" / "weights.md").exists()
    trace = json.loads((collected / "dagger" / "trace.json").read_text())
    assert all(w > 0 for w in trace[0]["weights"].values())
    assert isinstance(load_policy(collected / "dagger"), GEAPolicy)


def test_dagger_rerun_is_reproducible(collected, config):
    """
    relabel 은 dagger 디렉토리 안의 복사본에만 쌓이므로 다시 돌려도 같은 policy 가 나온다.
    """
    # given
    index = collected / "demos" / "press-button" / "index.json"
    before = index.read_bytes()
    # when
    DaggerRunner.run(config=config, out=collected, stage="test", loglevel="INFO")
    first = (collected / "dagger" / "policy.bin").read_bytes()
    DaggerRunner.run(config=config, out=collected, stage="test", loglevel="INFO")
    second = (collected / "dagger" / "policy.bin").read_bytes()
    # then
    assert first == second
    assert index.read_bytes() == before
    assert (collected / "dagger" / "stores" / "press-button" / "index.json").exists()


def test_load_policy_names():
    # then
    assert isinstance(load_policy("expert"), ExpertAsPolicy)
    assert isinstance(load_policy("zero"), ZeroPolicy)


def test_success_rates_zero_policy(config):
    # when
    rates = success_rates(ZeroPolicy(), ["press-button"], ["nominal"], [0], config.loop)
    # then
    assert rates == {"press-button": {"nominal": 0.0}}


def test_eval_and_replay(config, tmp_path):
    # when
    rates = EvalRunner.run(
        config=config, out=tmp_path, stage="test", loglevel="INFO", checkpoint="expert", suite="nominal", log=True
    )
    again = EvalRunner.run(config=config, out=tmp_path / "again", stage="test", loglevel="INFO", suite="nominal")
    log = tmp_path / "episodes" / "press-button_nominal_0.jsonl"
    matched = ReplayRunner.run(log=log, out=tmp_path / "replay", stage="test", loglevel="INFO")
    # then
    assert rates == again
    assert rates["press-button"]["nominal"] == 1.0
    assert (tmp_path / "success.md").read_text() == (tmp_path / "again" / "success.md").read_text()
    assert matched
    n_ticks = sum(1 for line in log.read_text().splitlines() if '"kind": "tick"' in line)
    assert len(list((tmp_path / "replay" / "frames").glob("*.png"))) == n_ticks
    assert "digest matches" in (tmp_path / "replay" / "timeline.txt").read_text()


def test_eval_reports_unseen_tasks(config, tmp_path):
    # given
    unseen = dataclasses.replace(config, tasks=["press-button"], seeds=[0], unseen_tasks=["press-handle"])
    # when
    rates = EvalRunner.run(
        config=unseen, out=tmp_path, stage="test", loglevel="INFO", checkpoint="zero", suite="nominal"
    )
    # then
    report = json.loads((tmp_path / "eval.json").read_text())
    assert rates == {"press-button": {"nominal": 0.0}}
    assert report["unseen"] == {"press-handle": {"nominal": 0.0}}
    success = (tmp_path / "success.md").read_text().splitlines()
    assert "## Unseen tasks success rate (%)" in success
    assert "| press-handle | 0.0 | 0.0 |" in success


def test_replay_empty_log(tmp_path):
    # given
    log = tmp_path / "empty.jsonl"
    log.write_text("")
    # then
    with pytest.raises(StoreError):
        ReplayRunner.run(log=log, out=tmp_path / "replay", stage="test", loglevel="INFO")


def test_engine_needs_config(tmp_path):
    # then
    with pytest.raises(ConfigError):
        Engine("eval", "test", out=str(tmp_path)).run()


def test_engine_output_precedence(config, monkeypatch, tmp_path):
    # given
    monkeypatch.setenv("ROBRIDGE_OUT", str(tmp_path / "env"))
    # then
    assert Engine("eval", "test", out=str(tmp_path / "flag"))._out(config) == tmp_path / "flag"
    assert Engine("eval", "test")._out(config) == tmp_path / "env"
    monkeypatch.delenv("ROBRIDGE_OUT")
    assert Engine("eval", "test")._out(config) == Path("out/smoke")
