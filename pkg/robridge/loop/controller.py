import logging
from dataclasses import dataclass, field
from enum import Enum, unique
from typing import List, Optional

from robridge.exceptions import (
    ConstraintError,
    ExpertError,
    GroundingError,
    IORBuildError,
    MotionPlanningError,
    PlanningError,
)
from robridge.experts.motion import WaypointFollower
from robridge.hcp.checker import CheckerNoise, Status, check_status, holds
from robridge.hcp.constraint import direction_constraint
from robridge.hcp.grounding import GroundingNoise, ground
from robridge.hcp.planner import Plan, Planner, TemplatePlanner
from robridge.ior.builder import IOR, OBJECT, build
from robridge.ior.tensor import IORTensor, to_tensor
from robridge.ior.tracker import TrackerState, track_update
from robridge.items import PrimitiveActionVO
from robridge.loop.episode_log import EpisodeLog
from robridge.loop.faults import FaultConfig, FaultInjector
from robridge.loop.policy import Policy
from robridge.settings import MAX_TICKS, PRIMITIVE_TIMEOUT, RETRY_BUDGET, STATUS_PERIOD
from robridge.tasks.catalog import TaskSpec
from robridge.tasks.predicates import is_success, reward, stages_completed
from robridge.tasks.suites import Instance
from robridge.world.render import render
from robridge.world.simulator import step
from robridge.world.state import Action4, Frame, WorldState


logger = logging.getLogger("robridge.loop")

_REGENERATION_ERRORS = (GroundingError, ConstraintError, IORBuildError, MotionPlanningError)


@dataclass(kw_only=True, frozen=True)
class LoopConfig:
    status_period: int = field(default=STATUS_PERIOD)
    retry_budget: int = field(default=RETRY_BUDGET)
    max_ticks: int = field(default=MAX_TICKS)
    primitive_timeout: int = field(default=PRIMITIVE_TIMEOUT)
    record: bool = field(default=False)
    grounding_noise: Optional[GroundingNoise] = field(default=None)
    checker_noise: Optional[CheckerNoise] = field(default=None)
    fault: Optional[FaultConfig] = field(default=None)


@unique
class Outcome(str, Enum):
    RUNNING = "running"
    DONE = "done"
    FAILED = "failed"


@dataclass(kw_only=True, frozen=True)
class PrimitiveRecord:
    index: int = field()
    primitive: str = field()
    status: str = field()
    tick: int = field()


@dataclass(kw_only=True)
class Step:
    tensor: IORTensor = field()
    action: Action4 = field()
    reward: float = field()
    frame_digest: str = field()


@dataclass(kw_only=True)
class Visited:
    world: WorldState = field()
    primitive: PrimitiveActionVO = field()
    tensor: IORTensor = field()


@dataclass(kw_only=True)
class EpisodeResult:
    task_id: str = field()
    success: bool = field()
    reward: float = field()
    ticks: int = field()
    outcome: Outcome = field()
    reason: Optional[str] = field(default=None)
    primitive_log: List[PrimitiveRecord] = field(default_factory=list)
    stages_completed: int = field(default=0)
    regenerations: int = field(default=0)
    replans: int = field(default=0)
    steps: List[Step] = field(default_factory=list)
    visited: List[Visited] = field(default_factory=list)
    final_digest: str = field(default="")


@dataclass(kw_only=True)
class LoopState:
    plan: Plan = field()
    tracker: Optional[TrackerState] = field(default=None)
    ior: Optional[IOR] = field(default=None)
    follower: Optional[WaypointFollower] = field(default=None)
    retries_used: int = field(default=0)
    primitive_start: int = field(default=0)
    built_tick: int = field(default=-1)
    outcome: Outcome = field(default=Outcome.RUNNING)


class _EpisodeFailed(Exception):
    pass


def oracle_plan(task: TaskSpec) -> Plan:
    """
    catalog 의 oracle primitive 열. clause index 는 instruction 을 계획한 결과와 같다.
    """
    actions = list(task.oracle_plan)
    try:
        clauses = TemplatePlanner().expand(task.instruction()).clause_of
    except PlanningError:
        clauses = []
    if len(clauses) != len(actions):
        clauses = [0] * len(actions)
    return Plan(actions=actions, clause_of=clauses)


def expected_held(plan: Plan) -> Optional[str]:
    """
    reach 다음이 그 목적지로의 place 이면, reach 동안 그 물체를 쥐고 있어야 한다.
    """
    current = plan.current()
    if current.type != "reach" or plan.cursor + 1 >= len(plan):
        return None
    following = plan.actions[plan.cursor + 1]
    if following.type == "place" and following.des == current.obj:
        return following.obj
    return None


class ClosedLoopController:
    """
    high frequency (매 tick track, act, step) 와 low frequency (K tick 마다 status check) 를
    한 스레드에서 돈다.
    """

    def __init__(
        self,
        task: TaskSpec,
        instance: Instance,
        policy: Policy,
        config: LoopConfig = LoopConfig(),
        planner: Optional[Planner] = None,
        log: Optional[EpisodeLog] = None,
    ):
        self.task = task
        self.instance = instance
        self.policy = policy
        self.config = config
        self.planner = planner or TemplatePlanner()
        self.log = log
        self.fault = FaultInjector(config.fault) if config.fault else None
        self.world = instance.world.copy()
        self.frame: Optional[Frame] = None
        self.result = EpisodeResult(
            task_id=task.id, success=False, reward=0.0, ticks=0, outcome=Outcome.RUNNING
        )

    def _render(self) -> Frame:
        return render(self.world, *self.instance.cams)

    def _event(self, message: str) -> None:
        logger.debug(f"[{self.task.id}] tick={self.world.tick} {message}")
        if self.log is not None:
            self.log.event(self.world.tick, message)

    def _retry(self, state: LoopState, why: str) -> None:
        state.retries_used += 1
        if state.retries_used > self.config.retry_budget:
            raise _EpisodeFailed(f"retry budget exhausted ({why})")

    def _replan(self, state: LoopState) -> None:
        clause = state.plan.clause_of[min(state.plan.cursor, len(state.plan) - 1)]
        try:
            plan = self.planner.plan(self.instance.instruction, self.frame)
        except PlanningError as e:
            raise _EpisodeFailed(f"planning failed: {e}") from e
        plan.cursor = plan.clause_start(clause) if clause in plan.clause_of else 0
        state.plan = plan
        self.result.replans += 1
        self._event(f"replanned from clause {clause}, cursor={plan.cursor}")

    def _prepare(self, state: LoopState) -> None:
        """
        현재 primitive 의 IOR 을 현재 frame 에서 새로 만든다. 실패하면 retry 를 쓰고 다시 계획한다.
        """
        while True:
            primitive = state.plan.current()
            try:
                grounding = ground(primitive, self.frame, self.config.grounding_noise)
                d = direction_constraint(primitive, self.world)
                state.ior = build(primitive, self.frame, grounding, d)
                state.tracker = TrackerState.start(state.ior)
                state.follower = (
                    WaypointFollower.plan(primitive, self.world) if primitive.type == "reach" else None
                )
                state.primitive_start = self.world.tick
                state.built_tick = self.world.tick
                return
            except _REGENERATION_ERRORS as e:
                self._event(f"regeneration of {primitive} failed: {e}")
                self._retry(state, str(e))
                self._replan(state)

    def _precondition_lost(self, state: LoopState) -> bool:
        primitive = state.plan.current()
        held = expected_held(state.plan)
        if held is not None and not holds(self.world, held):
            return True
        return primitive.type == "place" and not holds(self.world, primitive.obj)

    def _on_status(self, state: LoopState, status: Status) -> None:
        primitive = state.plan.current()
        self.result.primitive_log.append(
            PrimitiveRecord(
                index=state.plan.cursor, primitive=str(primitive), status=status.value, tick=self.world.tick
            )
        )
        match status:
            case Status.SUCCESS:
                state.plan.cursor += 1
                state.retries_used = 0
                if state.plan.done:
                    state.outcome = Outcome.DONE
                    return
                self._prepare(state)
            case Status.WRONG:
                self._retry(state, f"{primitive} judged Wrong")
                self.result.regenerations += 1
                if self.fault is not None:
                    self.fault.on_regenerate()
                if self._precondition_lost(state):
                    self._event(f"precondition of {primitive} lost")
                    self._replan(state)
                self._prepare(state)

    def _tick(self, state: LoopState) -> None:
        cfg = self.config
        if state.built_tick != self.world.tick:
            state.tracker, state.ior = track_update(state.tracker, state.ior, self.frame)

        status = None
        if self.world.tick > 0 and self.world.tick % cfg.status_period == 0:
            status = check_status(
                state.plan.current(),
                self.frame,
                self.world,
                state.primitive_start + cfg.primitive_timeout,
                noise=cfg.checker_noise,
                object_lost=state.tracker.lost[OBJECT],
                expected_held=expected_held(state.plan),
            )
            self._on_status(state, status)
            if state.outcome is not Outcome.RUNNING:
                return

        primitive = state.plan.current()
        tensor = to_tensor(state.ior, self.frame)
        if primitive.type == "reach":
            action = state.follower.act(self.world)
        else:
            action = Action4.coerce(self.policy.act(primitive, self.world, tensor))
            if cfg.record:
                self.result.visited.append(
                    Visited(world=self.world.copy(), primitive=primitive, tensor=tensor)
                )

        executed = action
        if self.fault is not None:
            executed = self.fault.apply(action, primitive, state.plan.cursor, self.world)
        if self.log is not None:
            self.log.tick(
                self.world.tick,
                state.plan.cursor,
                str(primitive),
                executed.as_array(),
                None if status is None else status.value,
            )

        digest = self.frame.digest() if cfg.record else ""
        self.world = step(self.world, executed)
        if cfg.record:
            self.result.steps.append(
                Step(tensor=tensor, action=action, reward=reward(self.task, self.world), frame_digest=digest)
            )
        if self.task.stages:
            self.result.stages_completed = stages_completed(
                self.task, self.world, self.result.stages_completed
            )
        self.frame = self._render()

    def run(self, plan: Optional[Plan] = None) -> EpisodeResult:
        self.frame = self._render()
        state: Optional[LoopState] = None
        try:
            if plan is None:
                try:
                    plan = self.planner.plan(self.instance.instruction, self.frame)
                except PlanningError as e:
                    raise _EpisodeFailed(f"planning failed: {e}") from e
            state = LoopState(plan=plan)
            self._prepare(state)
            while state.outcome is Outcome.RUNNING:
                if self.world.tick >= self.config.max_ticks:
                    raise _EpisodeFailed("max ticks reached")
                self._tick(state)
        except _EpisodeFailed as e:
            self.result.outcome = Outcome.FAILED
            self.result.reason = str(e)
        except ExpertError as e:
            self.result.outcome = Outcome.FAILED
            self.result.reason = f"expert failed: {e}"
        else:
            self.result.outcome = state.outcome

        self.result.ticks = self.world.tick
        self.result.success = is_success(self.task, self.world)
        self.result.reward = reward(self.task, self.world)
        self.result.final_digest = self.frame.digest()
        if self.log is not None:
            self.log.final(
                self.result.ticks,
                self.result.success,
                self.result.reward,
                self.result.final_digest,
                self.result.reason,
            )
        logger.debug(
            f"[{self.task.id}] {self.result.outcome.value} success={self.result.success} "
            f"ticks={self.result.ticks} reason={self.result.reason}"
        )
        return self.result


def run_episode(
    task: TaskSpec,
    instance: Instance,
    policy: Policy,
    config: LoopConfig = LoopConfig(),
    planner: Optional[Planner] = None,
    plan: Optional[Plan] = None,
    log: Optional[EpisodeLog] = None,
) -> EpisodeResult:
    """
    :param plan: 주어지면 planner 대신 이 plan 으로 시작한다 (expert rollout 의 oracle plan)
    """
    return ClosedLoopController(task, instance, policy, config, planner, log).run(plan)


def run_long_horizon(
    task: TaskSpec,
    instance: Instance,
    policy: Policy,
    config: LoopConfig = LoopConfig(),
    planner: Optional[Planner] = None,
) -> int:
    """
    :return: 연속으로 만족된 stage 수
    """
    return run_episode(task, instance, policy, config, planner).stages_completed
