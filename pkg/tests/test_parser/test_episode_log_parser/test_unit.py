import json

import pytest

from robridge.exceptions import SchemaVersionError, StoreError
from robridge.loop.episode_log import EpisodeLog
from robridge.parser.episode_log_parser import EpisodeLogParser


@pytest.fixture
def log_path(tmp_path):
    path = tmp_path / "episode.jsonl"
    with EpisodeLog(path) as log:
        log.header("press-button", "nominal", 3, False, "press the red button")
        log.tick(0, 0, "reach(red button)", [0.5, 0.0, -1.0, 1.0])
        log.event(0, "replanned from clause 0, cursor=0")
        log.tick(1, 0, "reach(red button)", [0.5, 0.0, -1.0, 1.0], "Normal")
        log.final(2, False, 0.25, "ab" * 32, "max ticks reached")
    return path


def test_parse(log_path):
    # given
    parser = EpisodeLogParser()

    # when
    parsed = parser.parse(log_path)
    # then
    assert parsed.header["task_id"] == "press-button"
    assert parsed.header["seed"] == 3
    assert [t["tick"] for t in parsed.ticks] == [0, 1]
    assert parsed.ticks[1]["status"] == "Normal"
    assert parsed.events[0]["message"].startswith("replanned")
    assert parsed.final["reason"] == "max ticks reached"


def test_parse_empty_log(tmp_path):
    # given
    path = tmp_path / "empty.jsonl"
    path.write_text("")
    # then
    with pytest.raises(StoreError, match="empty"):
        EpisodeLogParser().parse(path)


def test_parse_rejects_other_schema_version(log_path):
    # given
    lines = log_path.read_text().splitlines()
    header = json.loads(lines[0])
    header["schema_version"] = 2
    log_path.write_text("\n".join([json.dumps(header), *lines[1:]]) + "\n")
    # then
    with pytest.raises(SchemaVersionError):
        EpisodeLogParser().parse(log_path)


def test_parse_rejects_broken_records(log_path):
    # given
    lines = log_path.read_text().splitlines()
    log_path.write_text("\n".join([*lines, '{"kind": "tick", "tick": 2}']) + "\n")
    # then
    with pytest.raises(StoreError):
        EpisodeLogParser().parse(log_path)
    log_path.write_text("\n".join([lines[1], lines[0]]) + "\n")
    with pytest.raises(StoreError, match="header"):
        EpisodeLogParser().parse(log_path)
