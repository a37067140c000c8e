import logging
import struct
from pathlib import Path
from typing import Union

import numpy as np

from robridge.exceptions import SchemaVersionError, ShapeMismatchError
from robridge.gea.network import ORDER, SHAPES, PolicyParams, fingerprint
from robridge.settings import SCHEMA_VERSION


logger = logging.getLogger("robridge.gea")

MAGIC = b"RBGP"
_HEADER = struct.Struct("<4sI32s")
_LE_F32 = np.dtype("<f4")


def dumps(params: PolicyParams) -> bytes:
    chunks = [_HEADER.pack(MAGIC, SCHEMA_VERSION, fingerprint())]
    chunks.extend(params[name].astype(_LE_F32).tobytes() for name in ORDER)
    return b"".join(chunks)


def loads(raw: bytes) -> PolicyParams:
    if len(raw) < _HEADER.size:
        raise ShapeMismatchError("Checkpoint is truncated")
    magic, version, arch = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ShapeMismatchError(f"Not a policy checkpoint (magic {magic!r})")
    if version != SCHEMA_VERSION:
        raise SchemaVersionError(f"Checkpoint schema_version {version} != {SCHEMA_VERSION}")
    if arch != fingerprint():
        raise ShapeMismatchError("Checkpoint architecture fingerprint does not match this network")
    expected = _HEADER.size + sum(int(np.prod(s)) for s in SHAPES.values()) * _LE_F32.itemsize
    if len(raw) != expected:
        raise ShapeMismatchError(f"Checkpoint has {len(raw)} bytes, expected {expected}")
    arrays, offset = {}, _HEADER.size
    for name in ORDER:
        n = int(np.prod(SHAPES[name]))
        arrays[name] = (
            np.frombuffer(raw, dtype=_LE_F32, count=n, offset=offset)
            .astype(np.float32)
            .reshape(SHAPES[name])
        )
        offset += n * _LE_F32.itemsize
    return PolicyParams(arrays=arrays)


def save(params: PolicyParams, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(dumps(params))
    logger.debug(f"Saved policy checkpoint to {path}")
    return path


def load(path: Union[str, Path]) -> PolicyParams:
    return loads(Path(path).read_bytes())
