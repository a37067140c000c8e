import json
import logging
import os
import re
import shlex
import socket
import subprocess
from abc import ABCMeta, abstractmethod
from dataclasses import dataclass, field
from typing import List, Optional

from marshmallow import ValidationError
from overrides import override

from robridge.exceptions import PlanningError
from robridge.items import PrimitiveActionVO
from robridge.items.schemas import PrimitiveActionSchema
from robridge.settings import PLANNER_TIMEOUT
from robridge.world.state import Frame


@dataclass(kw_only=True)
class Plan:
    actions: List[PrimitiveActionVO] = field()
    clause_of: List[int] = field()  # action 별 instruction clause index
    cursor: int = field(default=0)

    def __post_init__(self):
        if not self.actions:
            raise PlanningError("Plan must not be empty")
        if len(self.clause_of) != len(self.actions):
            raise PlanningError("clause_of must align with actions")

    @property
    def done(self) -> bool:
        return self.cursor >= len(self.actions)

    def current(self) -> PrimitiveActionVO:
        return self.actions[self.cursor]

    def clause_start(self, clause: int) -> int:
        return self.clause_of.index(clause)

    def __len__(self) -> int:
        return len(self.actions)


class Planner(metaclass=ABCMeta):
    logger = logging.getLogger("robridge.hcp")

    @abstractmethod
    def plan(self, instruction: str, frame: Frame) -> Plan:
        """
        :param instruction: 자연어 지시
        :param frame: 현재 관측
        :return: cursor 0 의 Plan
        """
        pass


def _reach_grasp_place(obj: str, des: str) -> List[PrimitiveActionVO]:
    return [
        PrimitiveActionVO(type="reach", obj=obj),
        PrimitiveActionVO(type="grasp", obj=obj),
        PrimitiveActionVO(type="reach", obj=des),
        PrimitiveActionVO(type="place", obj=obj, des=des),
    ]


class TemplatePlanner(Planner):
    """
    catalog instruction 문법을 primitive 열로 펼친다. "and" / "then" 으로 이어진 절은
    각각 계획해서 이어 붙인다.
    """

    CLAUSE_SPLIT = re.compile(r",?\s+(?:and\s+then|then|and)\s+")
    VERB_ALIAS = {"slide": "push"}
    GRAMMAR = [
        (
            re.compile(r"^(?:put|place|insert) the (?P<obj>.+?) (?:on|in|into|onto) the (?P<des>.+)$"),
            lambda m: _reach_grasp_place(m["obj"], m["des"]),
        ),
        (
            re.compile(r"^sweep the (?P<obj>.+?) into the (?P<des>.+)$"),
            lambda m: [
                PrimitiveActionVO(type="reach", obj=m["obj"]),
                PrimitiveActionVO(type="push", obj=m["obj"]),
            ],
        ),
        (
            re.compile(r"^pick up the (?P<obj>.+)$"),
            lambda m: [
                PrimitiveActionVO(type="reach", obj=m["obj"]),
                PrimitiveActionVO(type="grasp", obj=m["obj"]),
            ],
        ),
        (
            re.compile(r"^(?P<verb>press|open|close|push|pull|turn|slide) the (?P<obj>.+)$"),
            lambda m: [
                PrimitiveActionVO(type="reach", obj=m["obj"]),
                PrimitiveActionVO(
                    type=TemplatePlanner.VERB_ALIAS.get(m["verb"], m["verb"]), obj=m["obj"]
                ),
            ],
        ),
        (
            re.compile(r"^reach (?:for )?the (?P<obj>.+)$"),
            lambda m: [PrimitiveActionVO(type="reach", obj=m["obj"])],
        ),
    ]

    def _clause(self, clause: str) -> List[PrimitiveActionVO]:
        for pattern, expand in self.GRAMMAR:
            if match := pattern.match(clause):
                return expand(match)
        raise PlanningError(f"Instruction clause out of grammar: {clause!r}")

    def expand(self, instruction: str) -> Plan:
        """
        관측 없이 instruction 만으로 plan 을 만든다.
        """
        text = instruction.lower().strip().rstrip(".")
        actions, clause_of = [], []
        for idx, clause in enumerate(self.CLAUSE_SPLIT.split(text)):
            expanded = self._clause(clause.strip())
            actions.extend(expanded)
            clause_of.extend([idx] * len(expanded))
        self.logger.debug(f"Planned {instruction!r}: {[str(a) for a in actions]}")
        return Plan(actions=actions, clause_of=clause_of)

    @override
    def plan(self, instruction: str, frame: Frame) -> Plan:
        return self.expand(instruction)


class ExternalPlanner(Planner):
    """
    외부 planner 와 JSON 한 덩어리로 요청/응답한다.
    endpoint: tcp://host:port 또는 pipe:<command>
    """

    def __init__(self, endpoint: str, timeout: float = PLANNER_TIMEOUT):
        if not endpoint.startswith(("tcp://", "pipe:")):
            raise PlanningError(f"Unsupported planner endpoint: {endpoint!r}")
        self.endpoint = endpoint
        self.timeout = timeout

    def _request(self, payload: bytes) -> bytes:
        if self.endpoint.startswith("pipe:"):
            command = shlex.split(self.endpoint[len("pipe:"):])
            try:
                completed = subprocess.run(
                    command, input=payload, capture_output=True, timeout=self.timeout
                )
            except (OSError, subprocess.TimeoutExpired) as e:
                raise PlanningError(f"Planner pipe failed: {e}") from e
            if completed.returncode != 0:
                raise PlanningError(
                    f"Planner pipe exited with {completed.returncode}: {completed.stderr!r}"
                )
            return completed.stdout

        host, port = self.endpoint[len("tcp://"):].rsplit(":", 1)
        chunks = []
        try:
            with socket.create_connection((host, int(port)), timeout=self.timeout) as conn:
                conn.sendall(payload)
                conn.shutdown(socket.SHUT_WR)
                while chunk := conn.recv(65536):
                    chunks.append(chunk)
        except OSError as e:
            raise PlanningError(f"Planner endpoint {self.endpoint} failed: {e}") from e
        return b"".join(chunks)

    @override
    def plan(self, instruction: str, frame: Frame) -> Plan:
        request = {
            "instruction": instruction,
            "objects": sorted(frame.symbols),
            "image_digest": frame.digest(),
        }
        raw = self._request((json.dumps(request, sort_keys=True) + "\n").encode())
        try:
            records = json.loads(raw)
            if isinstance(records, list):
                records = [{"des": None, **r} for r in records]
            loaded = PrimitiveActionSchema(many=True).load(records)
        except (TypeError, ValueError, ValidationError) as e:
            self.logger.error(f"Rejected planner reply: {raw!r}")
            raise PlanningError(f"Invalid planner reply: {e}") from e
        if not loaded:
            self.logger.error(f"Rejected planner reply: {raw!r}")
            raise PlanningError("Planner replied with an empty plan")
        actions = [PrimitiveActionVO(**r) for r in loaded]
        return Plan(actions=actions, clause_of=[0] * len(actions))


def planner_from_env() -> Planner:
    endpoint: Optional[str] = os.getenv("ROBRIDGE_PLANNER_ENDPOINT")
    if not endpoint:
        return TemplatePlanner()
    timeout = float(os.getenv("ROBRIDGE_PLANNER_TIMEOUT", PLANNER_TIMEOUT))
    return ExternalPlanner(endpoint, timeout=timeout)
