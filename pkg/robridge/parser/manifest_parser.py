import json
from pathlib import Path
from typing import Dict, Union

from robridge.exceptions import SchemaVersionError, StoreError
from robridge.out.model.collect_result import CollectResult
from robridge.settings import SCHEMA_VERSION


MANIFEST_FILE = "manifest.json"


class ManifestParser:
    def __init__(self, *args, **kwargs):
        pass

    def parse(self, root_dir: Union[str, Path] = ".") -> Dict[str, CollectResult]:
        """
        :return: task id 별 CollectResult 와 "summary"
        """
        path = Path(root_dir) / MANIFEST_FILE
        try:
            manifest = json.loads(path.read_text())
        except (OSError, ValueError) as e:
            raise StoreError(f"{path}: unreadable manifest") from e
        if manifest.get("schema_version") != SCHEMA_VERSION:
            raise SchemaVersionError(f"{path}: schema_version {manifest.get('schema_version')!r}")

        res = {task_id: CollectResult.load(entry) for task_id, entry in manifest["tasks"].items()}
        res["summary"] = self._summary(res)
        return res

    def _summary(self, res: Dict[str, CollectResult]) -> CollectResult:
        return CollectResult(
            requested=sum(v.requested for v in res.values()),
            written=sum(v.written for v in res.values()),
            expert_failures=sum(v.expert_failures for v in res.values()),
        )
