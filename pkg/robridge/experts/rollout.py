import json
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from robridge.exceptions import SchemaVersionError, StoreError
from robridge.ior.tensor import IORTensor
from robridge.loop.controller import LoopConfig, Step, oracle_plan, run_episode
from robridge.loop.policy import ExpertAsPolicy
from robridge.settings import SCHEMA_VERSION
from robridge.tasks.catalog import Catalog, TaskSpec
from robridge.tasks.suites import ExpertRandomization, instantiate
from robridge.world.state import Action4


logger = logging.getLogger("robridge.experts")

_LENGTH = struct.Struct("<I")
_TAIL = struct.Struct("<5f32s")  # action(4) + reward + frame digest
_HEADER_KEYS = ("schema_version", "task_id", "seed", "success", "final_tick", "n_steps")


@dataclass(kw_only=True)
class Trajectory:
    task_id: str = field()
    seed: int = field()
    steps: List[Step] = field(default_factory=list)
    success: bool = field(default=False)
    final_tick: int = field(default=0)

    def __len__(self) -> int:
        return len(self.steps)

    def samples(self):
        return [(s.tensor, s.action) for s in self.steps]


def rollout_expert(
    task: TaskSpec,
    seed: int,
    randomization: Optional[ExpertRandomization] = ExpertRandomization(),
    config: LoopConfig = LoopConfig(record=True),
    catalog: Optional[Catalog] = None,
) -> Trajectory:
    """
    expert stage 섭동을 넣은 scene 에서 oracle plan 을 expert 로 실행하고 매 tick 의 (tensor, action) 을 기록한다.

    :param randomization: None 이면 섭동 없는 nominal scene
    :return: expert 가 실패해도 success=False 인 trajectory 를 돌려준다
    """
    instance = instantiate(task.id, "nominal", seed, randomization, catalog)
    result = run_episode(task, instance, ExpertAsPolicy(), config, plan=oracle_plan(task))
    if not result.success:
        logger.info(f"Expert rollout {task.id} seed={seed} failed: {result.reason}")
    return Trajectory(
        task_id=task.id,
        seed=seed,
        steps=result.steps,
        success=result.success,
        final_tick=result.ticks,
    )


def dumps(trajectory: Trajectory) -> bytes:
    header = {
        "schema_version": SCHEMA_VERSION,
        "task_id": trajectory.task_id,
        "seed": trajectory.seed,
        "success": trajectory.success,
        "final_tick": trajectory.final_tick,
        "n_steps": len(trajectory.steps),
    }
    chunks = [(json.dumps(header, sort_keys=True) + "\n").encode()]
    for s in trajectory.steps:
        body = s.tensor.to_bytes()
        digest = bytes.fromhex(s.frame_digest) if s.frame_digest else bytes(32)
        chunks.append(_LENGTH.pack(len(body)))
        chunks.append(body)
        chunks.append(_TAIL.pack(s.action.dx, s.action.dy, s.action.dz, s.action.g, s.reward, digest))
    return b"".join(chunks)


def loads(raw: bytes, name: str = "<bytes>") -> Trajectory:
    """
    :param name: 에러 메시지에 들어갈 파일 이름
    """
    end = raw.find(b"\n")
    if end < 0:
        raise StoreError(f"{name}: missing trajectory header")
    try:
        header = json.loads(raw[:end])
    except ValueError as e:
        raise StoreError(f"{name}: unreadable trajectory header") from e
    if not isinstance(header, dict) or any(k not in header for k in _HEADER_KEYS):
        raise StoreError(f"{name}: trajectory header must have {', '.join(_HEADER_KEYS)}")
    if header["schema_version"] != SCHEMA_VERSION:
        raise SchemaVersionError(f"{name}: schema_version {header['schema_version']} != {SCHEMA_VERSION}")

    steps, offset = [], end + 1
    for i in range(header["n_steps"]):
        if offset + _LENGTH.size > len(raw):
            raise StoreError(f"{name}: truncated at record {i}")
        (length,) = _LENGTH.unpack_from(raw, offset)
        offset += _LENGTH.size
        if length != IORTensor.nbytes() or offset + length + _TAIL.size > len(raw):
            raise StoreError(f"{name}: bad record {i} (length {length})")
        tensor = IORTensor.from_bytes(raw[offset: offset + length])
        offset += length
        dx, dy, dz, g, reward, digest = _TAIL.unpack_from(raw, offset)
        offset += _TAIL.size
        if not 0.0 <= reward <= 1.0 or not np.isfinite([dx, dy, dz, g]).all():
            raise StoreError(f"{name}: record {i} out of range")
        steps.append(
            Step(
                tensor=tensor,
                action=Action4(dx, dy, dz, g),
                reward=float(reward),
                frame_digest=digest.hex(),
            )
        )
    if offset != len(raw):
        raise StoreError(f"{name}: {len(raw) - offset} trailing bytes")
    return Trajectory(
        task_id=header["task_id"],
        seed=header["seed"],
        steps=steps,
        success=bool(header["success"]),
        final_tick=header["final_tick"],
    )


def save(trajectory: Trajectory, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(dumps(trajectory))
    return path


def load(path: Union[str, Path]) -> Trajectory:
    path = Path(path)
    return loads(path.read_bytes(), path.name)
