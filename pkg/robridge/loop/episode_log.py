import json
import logging
from pathlib import Path
from typing import Optional, Sequence, Union

from robridge.settings import SCHEMA_VERSION


logger = logging.getLogger("robridge.loop")


class EpisodeLog:
    """
    episode 한 개의 line-delimited JSON 기록. header, tick record 들, final record 순서이다.
    replay 는 header 로 같은 초기 world 를 만들고 tick 의 action 을 다시 적용한다.
    """

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fp = self.path.open("w", encoding="utf-8")
        self.records = 0

    def _write(self, record: dict) -> None:
        self._fp.write(json.dumps(record, sort_keys=True) + "\n")
        self.records += 1

    def header(self, task_id: str, suite: str, seed: int, expert_randomization: bool, instruction: str) -> None:
        self._write(
            {
                "kind": "header",
                "schema_version": SCHEMA_VERSION,
                "task_id": task_id,
                "suite": suite,
                "seed": seed,
                "expert_randomization": expert_randomization,
                "instruction": instruction,
            }
        )

    def tick(
        self,
        tick: int,
        cursor: int,
        primitive: str,
        action: Sequence[float],
        status: Optional[str] = None,
    ) -> None:
        self._write(
            {
                "kind": "tick",
                "tick": tick,
                "cursor": cursor,
                "primitive": primitive,
                "status": status,
                "action": [float(v) for v in action],
            }
        )

    def event(self, tick: int, message: str) -> None:
        self._write({"kind": "event", "tick": tick, "message": message})

    def final(self, ticks: int, success: bool, reward: float, frame_digest: str, reason: Optional[str]) -> None:
        self._write(
            {
                "kind": "final",
                "ticks": ticks,
                "success": success,
                "reward": reward,
                "frame_digest": frame_digest,
                "reason": reason,
            }
        )

    def close(self) -> None:
        if not self._fp.closed:
            self._fp.close()
            logger.debug(f"Wrote {self.records} records to {self.path}")

    def __enter__(self) -> "EpisodeLog":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
