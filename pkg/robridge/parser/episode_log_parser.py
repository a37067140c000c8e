import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Union

from marshmallow import Schema, ValidationError, fields, validate

from robridge.exceptions import SchemaVersionError, StoreError
from robridge.settings import SCHEMA_VERSION


class _HeaderSchema(Schema):
    kind = fields.Str(required=True, validate=validate.Equal("header"))
    schema_version = fields.Integer(required=True)
    task_id = fields.Str(required=True)
    suite = fields.Str(required=True)
    seed = fields.Integer(required=True)
    expert_randomization = fields.Boolean(required=True)
    instruction = fields.Str(required=True)


class _TickSchema(Schema):
    kind = fields.Str(required=True)
    tick = fields.Integer(required=True)
    cursor = fields.Integer(required=True)
    primitive = fields.Str(required=True)
    status = fields.Str(allow_none=True, load_default=None)
    action = fields.List(fields.Float(), required=True, validate=validate.Length(equal=4))


class _FinalSchema(Schema):
    kind = fields.Str(required=True)
    ticks = fields.Integer(required=True)
    success = fields.Boolean(required=True)
    reward = fields.Float(required=True)
    frame_digest = fields.Str(required=True)
    reason = fields.Str(allow_none=True, load_default=None)


@dataclass(kw_only=True)
class ParsedEpisodeLog:
    header: dict = field()
    ticks: List[dict] = field(default_factory=list)
    events: List[dict] = field(default_factory=list)
    final: Optional[dict] = field(default=None)


class EpisodeLogParser:
    def __init__(self, *args, **kwargs):
        pass

    def parse(self, path: Union[str, Path]) -> ParsedEpisodeLog:
        path = Path(path)
        try:
            lines = [line for line in path.read_text().splitlines() if line.strip()]
        except OSError as e:
            raise StoreError(f"{path}: unreadable episode log") from e
        if not lines:
            raise StoreError(f"{path}: empty episode log")

        records = []
        for number, line in enumerate(lines, 1):
            try:
                records.append(json.loads(line))
            except ValueError as e:
                raise StoreError(f"{path}:{number}: not a JSON record") from e

        head = records[0]
        if head.get("kind") != "header":
            raise StoreError(f"{path}: first record is not a header")
        if head.get("schema_version") != SCHEMA_VERSION:
            raise SchemaVersionError(f"{path}: schema_version {head.get('schema_version')!r} != {SCHEMA_VERSION}")

        try:
            parsed = ParsedEpisodeLog(header=_HeaderSchema().load(head))
            for record in records[1:]:
                match record.get("kind"):
                    case "tick":
                        parsed.ticks.append(_TickSchema().load(record))
                    case "event":
                        parsed.events.append(record)
                    case "final":
                        parsed.final = _FinalSchema().load(record)
                    case other:
                        raise StoreError(f"{path}: unknown record kind {other!r}")
        except ValidationError as e:
            raise StoreError(f"{path}: {e.messages}") from e
        return parsed
