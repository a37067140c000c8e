import json

import pytest

from robridge.exceptions import SchemaVersionError, StoreError
from robridge.parser.manifest_parser import MANIFEST_FILE, ManifestParser


@pytest.fixture
def manifest():
    return {
        "schema_version": 1,
        "tasks": {
            "pick-place": {"requested": 5, "written": 5, "expert_failures": 1, "seeds": [0, 3, 6, 9, 12], "digests": []},
            "press-button": {"requested": 5, "written": 4, "expert_failures": 3, "seeds": [0, 3, 6, 9], "digests": []},
        },
    }


def test_parse(manifest, tmp_path):
    # given
    (tmp_path / MANIFEST_FILE).write_text(json.dumps(manifest))
    parser = ManifestParser()

    # when
    res = parser.parse(tmp_path)
    # then
    assert res["pick-place"].written == 5
    assert res["summary"].requested == 10
    assert res["summary"].written == 9
    assert res["summary"].expert_failures == 4


def test_parse_rejects_bad_manifest(manifest, tmp_path):
    # then
    with pytest.raises(StoreError):
        ManifestParser().parse(tmp_path)
    (tmp_path / MANIFEST_FILE).write_text(json.dumps({**manifest, "schema_version": 0}))
    with pytest.raises(SchemaVersionError):
        ManifestParser().parse(tmp_path)
