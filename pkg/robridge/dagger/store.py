import hashlib
import json
import logging
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Tuple, Union

from marshmallow import Schema, ValidationError, fields

from robridge.exceptions import SchemaVersionError, StoreError
from robridge.experts import rollout
from robridge.experts.rollout import Trajectory
from robridge.ior.tensor import IORTensor
from robridge.settings import SCHEMA_VERSION
from robridge.world.state import Action4


logger = logging.getLogger("robridge.dagger")

INDEX_FILE = "index.json"


class _EntrySchema(Schema):
    file = fields.Str(required=True)
    seed = fields.Integer(required=True)
    success = fields.Boolean(required=True)
    n_steps = fields.Integer(required=True)
    sha256 = fields.Str(required=True)


class _IndexSchema(Schema):
    schema_version = fields.Integer(required=True)
    task_id = fields.Str(required=True)
    entries = fields.List(fields.Nested(_EntrySchema), required=True)


class DemoStore:
    """
    task 하나의 append-only trajectory 집합. 디렉토리에 index.json 과 trajectory 파일들을 둔다.
    """

    def __init__(self, root: Union[str, Path], task_id: str):
        self.root = Path(root)
        self.task_id = task_id
        self.entries: List[dict] = []
        self._cache: Dict[str, Trajectory] = {}
        index = self.root / INDEX_FILE
        if index.exists():
            self._read_index(index)
        else:
            self.root.mkdir(parents=True, exist_ok=True)
            self._write_index()

    def _read_index(self, index: Path) -> None:
        try:
            raw = json.loads(index.read_text())
        except ValueError as e:
            raise StoreError(f"{index}: unreadable index") from e
        if isinstance(raw, dict) and raw.get("schema_version", SCHEMA_VERSION) != SCHEMA_VERSION:
            raise SchemaVersionError(f"{index}: schema_version {raw['schema_version']} != {SCHEMA_VERSION}")
        try:
            data = _IndexSchema().load(raw)
        except ValidationError as e:
            raise StoreError(f"{index}: {e.messages}") from e
        if data["task_id"] != self.task_id:
            raise StoreError(f"{index}: store belongs to {data['task_id']!r}, not {self.task_id!r}")
        self.entries = data["entries"]

    def _write_index(self) -> None:
        data = {"schema_version": SCHEMA_VERSION, "task_id": self.task_id, "entries": self.entries}
        (self.root / INDEX_FILE).write_text(json.dumps(data, sort_keys=True, indent=2))

    def __len__(self) -> int:
        return len(self.entries)

    def append(self, trajectory: Trajectory) -> str:
        """
        :return: 쓰여진 trajectory 의 sha256
        """
        if trajectory.task_id != self.task_id:
            raise StoreError(f"Trajectory of {trajectory.task_id!r} appended to store {self.task_id!r}")
        raw = rollout.dumps(trajectory)
        name = f"{len(self.entries):06d}.traj"
        (self.root / name).write_bytes(raw)
        digest = hashlib.sha256(raw).hexdigest()
        self.entries.append(
            {
                "file": name,
                "seed": trajectory.seed,
                "success": trajectory.success,
                "n_steps": len(trajectory.steps),
                "sha256": digest,
            }
        )
        self._write_index()
        return digest

    def _load(self, entry: dict) -> Trajectory:
        name = entry["file"]
        if name not in self._cache:
            path = self.root / name
            if not path.exists():
                raise StoreError(f"{path}: missing trajectory file")
            raw = path.read_bytes()
            if hashlib.sha256(raw).hexdigest() != entry["sha256"]:
                raise StoreError(f"{path}: content does not match index digest")
            self._cache[name] = rollout.loads(raw, str(path))
        return self._cache[name]

    def __iter__(self) -> Iterator[Trajectory]:
        for entry in self.entries:
            yield self._load(entry)

    def samples(self) -> List[Tuple[IORTensor, Action4]]:
        return [pair for trajectory in self for pair in trajectory.samples()]

    def digests(self) -> List[str]:
        return [entry["sha256"] for entry in self.entries]


def open_stores(root: Union[str, Path], task_ids: Iterable[str]) -> Dict[str, DemoStore]:
    root = Path(root)
    return {task_id: DemoStore(root / task_id, task_id) for task_id in task_ids}
