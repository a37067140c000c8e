import json
from pathlib import Path

import pytest

from robridge.exceptions import ConfigError, SchemaVersionError, TaskNotFoundError
from robridge.items import EntityVO, PrimitiveActionVO
from robridge.items.config import ExperimentConfig


CONFIG_DIR = Path(__file__).parents[2] / "configs"


@pytest.fixture
def raw() -> dict:
    return json.loads((CONFIG_DIR / "smoke.json").read_text())


def test_load_shipped_configs():
    # when
    desk = ExperimentConfig.from_file(CONFIG_DIR / "desk.json")
    smoke = ExperimentConfig.from_file(CONFIG_DIR / "smoke.json")
    # then
    assert len(desk.tasks) == 10
    assert desk.long_horizon_tasks == ["pick-insert"]
    assert desk.unseen_tasks == ["bin-pick", "plate-slide", "press-handle"]
    assert smoke.unseen_tasks == []
    assert desk.loop.retry_budget == 2
    assert smoke.loop.max_ticks == 300
    assert smoke.augment.warp_mag == 1.0
    assert smoke.augment.blur_sigma == 1.5


def test_defaults_fill_sections():
    # when
    config = ExperimentConfig.load({"schema_version": 1, "tasks": ["pick-place"], "seeds": [0]})
    # then
    assert config.suites == ["nominal"]
    assert config.augment is None
    assert config.dagger["budget"] == 10
    assert config.collect["retries"] == 2
    assert config.output_dir == "out"


def test_dagger_config(raw):
    # given
    config = ExperimentConfig.load(raw)
    # when
    cfg = config.dagger_config(seed=100, jobs=2)
    plain = config.dagger_config(augment=False)
    # then
    assert cfg.seed == 100
    assert cfg.jobs == 2
    assert cfg.budget == 1
    assert cfg.loop.record
    assert cfg.loop.max_ticks == 300
    assert cfg.f.values == (3.0, 2.0, 1.0)
    assert cfg.augment == config.augment
    assert plain.augment is None


def test_shifted_seeds(raw):
    # then
    assert ExperimentConfig.load(raw).shifted_seeds(10) == [10, 11]


def test_rejects_bad_configs(raw, tmp_path):
    # then
    with pytest.raises(SchemaVersionError):
        ExperimentConfig.load({**raw, "schema_version": 3})
    with pytest.raises(TaskNotFoundError):
        ExperimentConfig.load({**raw, "tasks": ["juggle"]})
    with pytest.raises(TaskNotFoundError):
        ExperimentConfig.load({**raw, "unseen_tasks": ["juggle"]})
    with pytest.raises(ConfigError):
        ExperimentConfig.load({**raw, "seeds": []})
    with pytest.raises(ConfigError):
        ExperimentConfig.load({**raw, "suites": ["unseen_gravity"]})
    with pytest.raises(ConfigError):
        ExperimentConfig.load({**raw, "dagger": {"breakpoints": [0.5], "values": [1.0, 2.0]}})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_file(tmp_path / "missing.json")


def test_item_validation():
    # given
    action = PrimitiveActionVO(type="place", obj="green block", des="blue pad")
    bad = PrimitiveActionVO(type="juggle", obj="green block")
    entity = EntityVO(id=2, name="green block", shape="box", dims=(0.04, 0.04, 0.04), color=(0, 255, 0), pose=(0.1, 0.1, 0.0, 0.0))
    # then
    assert action.validate() == {}
    assert "type" in bad.validate()
    assert entity.top == pytest.approx(0.04)
