import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from robridge.augment import AugmentConfig
from robridge.dagger.piecewise import PiecewiseF, mean_f, sample_tasks
from robridge.dagger.store import DemoStore, open_stores
from robridge.exceptions import ConfigError, ExpertError, SchemaVersionError, StoreError
from robridge.experts.policy import expert_action
from robridge.experts.rollout import Trajectory, rollout_expert
from robridge.gea import checkpoint
from robridge.gea.network import PolicyParams
from robridge.gea.trainer import Sample, train
from robridge.loop.controller import EpisodeResult, LoopConfig, Step, run_episode
from robridge.loop.policy import GEAPolicy
from robridge.settings import (
    DAGGER_BUDGET,
    DAGGER_SEED_RETRIES,
    DAGGER_SUCCESS_TARGET,
    GEA_BATCH,
    GEA_LR,
    SCHEMA_VERSION,
)
from robridge.tasks.catalog import Catalog, default_catalog
from robridge.tasks.predicates import reward
from robridge.tasks.suites import ExpertRandomization, instantiate


logger = logging.getLogger("robridge.dagger")

STATE_FILE = "state.json"
POLICY_FILE = "policy.bin"

Collector = Callable[[str, int], Trajectory]
Trainer = Callable[[PolicyParams, Sequence[Sample], int], PolicyParams]
Evaluator = Callable[[str, PolicyParams, int], EpisodeResult]
Relabeler = Callable[[str, int, EpisodeResult], Trajectory]
Sampler = Callable[[Dict[str, float], int, int], List[str]]


@dataclass(kw_only=True, frozen=True)
class DaggerConfig:
    demos_per_task: int = field(default=5)
    n_eval: int = field(default=6)
    budget: int = field(default=DAGGER_BUDGET)
    success_target: float = field(default=DAGGER_SUCCESS_TARGET)
    seed_retries: int = field(default=DAGGER_SEED_RETRIES)
    epochs: int = field(default=5)
    lr: float = field(default=GEA_LR)
    batch_size: int = field(default=GEA_BATCH)
    seed: int = field(default=0)
    suite: str = field(default="nominal")
    jobs: int = field(default=1)
    augment: Optional[AugmentConfig] = field(default=None)
    randomization: Optional[ExpertRandomization] = field(default=ExpertRandomization())
    loop: LoopConfig = field(default=LoopConfig(record=True))
    f: PiecewiseF = field(default=PiecewiseF())

    def __post_init__(self):
        if self.demos_per_task < 1:
            raise ConfigError("demos_per_task must be >= 1")
        if self.n_eval < 1 or self.budget < 0 or self.jobs < 1:
            raise ConfigError("n_eval and jobs must be >= 1, budget >= 0")


@dataclass(kw_only=True)
class DaggerState:
    weights: Dict[str, float] = field()
    stores: Dict[str, DemoStore] = field()
    iteration: int = field(default=0)
    f: PiecewiseF = field(default=PiecewiseF())
    n_eval: int = field(default=6)

    def dataset_sizes(self) -> Dict[str, int]:
        return {task_id: len(store) for task_id, store in sorted(self.stores.items())}

    def samples(self) -> List[Sample]:
        return [pair for task_id in sorted(self.stores) for pair in self.stores[task_id].samples()]

    def save(self, directory: Union[str, Path], params: PolicyParams) -> Path:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        data = {
            "schema_version": SCHEMA_VERSION,
            "iteration": self.iteration,
            "weights": {k: self.weights[k] for k in sorted(self.weights)},
            "f": self.f.as_dict(),
            "n_eval": self.n_eval,
            "dataset_sizes": self.dataset_sizes(),
            "stores": {k: str(s.root) for k, s in sorted(self.stores.items())},
        }
        (directory / STATE_FILE).write_text(json.dumps(data, sort_keys=True, indent=2))
        checkpoint.save(params, directory / POLICY_FILE)
        return directory

    @classmethod
    def load(cls, directory: Union[str, Path]) -> Tuple["DaggerState", PolicyParams]:
        directory = Path(directory)
        path = directory / STATE_FILE
        try:
            data = json.loads(path.read_text())
        except (OSError, ValueError) as e:
            raise StoreError(f"{path}: unreadable dagger state") from e
        if data.get("schema_version") != SCHEMA_VERSION:
            raise SchemaVersionError(f"{path}: schema_version {data.get('schema_version')} != {SCHEMA_VERSION}")
        stores = {k: DemoStore(root, k) for k, root in data["stores"].items()}
        for task_id, size in data["dataset_sizes"].items():
            if len(stores[task_id]) < size:
                raise StoreError(f"{stores[task_id].root}: store shrank below {size} trajectories")
        state = cls(
            weights=data["weights"],
            stores=stores,
            iteration=data["iteration"],
            f=PiecewiseF.load(data["f"]),
            n_eval=data["n_eval"],
        )
        return state, checkpoint.load(directory / POLICY_FILE)


@dataclass(kw_only=True)
class IterationMetrics:
    iteration: int = field()
    sampled: List[str] = field()
    rewards: Dict[str, List[float]] = field()
    weights: Dict[str, float] = field()
    dataset_sizes: Dict[str, int] = field()
    success_rate: float = field()
    relabeled: int = field(default=0)
    relabel_failures: int = field(default=0)

    def as_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "sampled": self.sampled,
            "rewards": self.rewards,
            "weights": self.weights,
            "dataset_sizes": self.dataset_sizes,
            "success_rate": self.success_rate,
            "relabeled": self.relabeled,
            "relabel_failures": self.relabel_failures,
        }


def derived_seed(*entropy: int) -> int:
    return int(np.random.SeedSequence(list(entropy)).generate_state(1)[0])


class AdaptiveDagger:
    """
    task 별 weight 로 평가 task 를 뽑고, 실패한 episode 를 expert 로 relabel 해서 dataset 에 더하는 offline DAgger.
    collector, trainer, evaluator, relabeler, sampler 는 주입할 수 있다.
    """

    def __init__(
        self,
        config: DaggerConfig = DaggerConfig(),
        catalog: Optional[Catalog] = None,
        collector: Optional[Collector] = None,
        trainer: Optional[Trainer] = None,
        evaluator: Optional[Evaluator] = None,
        relabeler: Optional[Relabeler] = None,
        sampler: Optional[Sampler] = None,
    ):
        self.config = config
        self.catalog = catalog or default_catalog()
        self.collector = collector or self._collect
        self.trainer = trainer or self._train
        self.evaluator = evaluator or self._evaluate
        self.relabeler = relabeler or self._relabel
        self.sampler = sampler or sample_tasks

    def _collect(self, task_id: str, seed: int) -> Trajectory:
        return rollout_expert(self.catalog.get(task_id), seed, self.config.randomization, catalog=self.catalog)

    def _train(self, params: PolicyParams, dataset: Sequence[Sample], seed: int) -> PolicyParams:
        cfg = self.config
        params, _ = train(
            params, dataset, cfg.epochs, lr=cfg.lr, seed=seed, batch_size=cfg.batch_size, augment=cfg.augment
        )
        return params

    def _evaluate(self, task_id: str, params: PolicyParams, seed: int) -> EpisodeResult:
        task = self.catalog.get(task_id)
        instance = instantiate(task_id, self.config.suite, seed, catalog=self.catalog)
        return run_episode(task, instance, GEAPolicy(params), self.config.loop)

    def _relabel(self, task_id: str, seed: int, result: EpisodeResult) -> Trajectory:
        """
        실패한 episode 가 방문한 state 마다 expert action 을 붙인다.
        """
        if not result.visited:
            raise ExpertError("Failed episode visited no policy-driven state")
        task = self.catalog.get(task_id)
        steps = [
            Step(
                tensor=v.tensor,
                action=expert_action(v.primitive, v.world),
                reward=reward(task, v.world),
                frame_digest="",
            )
            for v in result.visited
        ]
        return Trajectory(task_id=task_id, seed=seed, steps=steps, success=False, final_tick=result.ticks)

    def init(self, tasks: Sequence[str], store_root: Union[str, Path], seed_base: int = 0) -> DaggerState:
        """
        task 마다 같은 수의 성공한 expert trajectory 로 dataset 을 채운다. weight 는 모두 1.
        """
        cfg = self.config
        for task_id in tasks:
            self.catalog.get(task_id)
        stores = open_stores(store_root, tasks)
        for task_id in tasks:
            store = stores[task_id]
            seed = seed_base
            while len(store) < cfg.demos_per_task:
                for _ in range(cfg.seed_retries + 1):
                    trajectory = self.collector(task_id, seed)
                    seed += 1
                    if trajectory.success:
                        store.append(trajectory)
                        break
                else:
                    raise ExpertError(
                        f"Expert failed {cfg.seed_retries + 1} times in a row on {task_id} (last seed {seed - 1})"
                    )
            logger.info(f"Seeded {task_id} with {len(store)} expert trajectories")
        return DaggerState(
            weights={task_id: 1.0 for task_id in tasks},
            stores=stores,
            f=cfg.f,
            n_eval=cfg.n_eval,
        )

    def iterate(self, state: DaggerState, params: PolicyParams) -> Tuple[DaggerState, PolicyParams, IterationMetrics]:
        cfg = self.config
        t = state.iteration

        # (a) train on the union of all datasets
        params = self.trainer(params, state.samples(), derived_seed(cfg.seed, t, 0))

        # (b) sample tasks, (c) evaluate
        sampled = self.sampler(state.weights, state.n_eval, derived_seed(cfg.seed, t, 1))
        seeds = [derived_seed(cfg.seed, t, 2, j) for j in range(len(sampled))]
        if cfg.jobs > 1:
            with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
                results = list(pool.map(lambda args: self.evaluator(args[0], params, args[1]), zip(sampled, seeds)))
        else:
            results = [self.evaluator(task_id, params, s) for task_id, s in zip(sampled, seeds)]

        # (d) new weights from the tested tasks
        rewards: Dict[str, List[float]] = {}
        for task_id, result in zip(sampled, results):
            rewards.setdefault(task_id, []).append(result.reward)
        updated = {task_id: mean_f(state.f, values) for task_id, values in rewards.items()}

        # (e) relabel failures
        relabeled, failures = 0, 0
        for task_id, s, result in zip(sampled, seeds, results):
            if result.success:
                continue
            try:
                trajectory = self.relabeler(task_id, s, result)
            except ExpertError as e:
                failures += 1
                logger.warning(f"Relabel of {task_id} seed={s} skipped: {e}")
                continue
            state.stores[task_id].append(trajectory)
            relabeled += 1

        # (f) untested tasks keep their weight
        state.weights = {**state.weights, **updated}
        state.iteration = t + 1

        metrics = IterationMetrics(
            iteration=state.iteration,
            sampled=sampled,
            rewards={k: rewards[k] for k in sorted(rewards)},
            weights={k: state.weights[k] for k in sorted(state.weights)},
            dataset_sizes=state.dataset_sizes(),
            success_rate=float(np.mean([r.success for r in results])),
            relabeled=relabeled,
            relabel_failures=failures,
        )
        if failures:
            logger.warning(f"iteration={state.iteration}: {failures} relabel(s) skipped")
        logger.info(
            f"iteration={state.iteration} success={metrics.success_rate:.3f} "
            f"relabeled={relabeled} weights={metrics.weights}"
        )
        return state, params, metrics

    def run(
        self,
        state: DaggerState,
        params: PolicyParams,
        on_iteration: Optional[Callable[[DaggerState, PolicyParams, IterationMetrics], None]] = None,
    ) -> Tuple[DaggerState, PolicyParams, List[IterationMetrics]]:
        """
        budget 만큼 돌거나 한 iteration 의 성공률이 목표에 닿으면 멈춘다.
        """
        history = []
        while state.iteration < self.config.budget:
            state, params, metrics = self.iterate(state, params)
            history.append(metrics)
            if on_iteration is not None:
                on_iteration(state, params, metrics)
            if metrics.success_rate >= self.config.success_target:
                logger.info(f"Converged at iteration {state.iteration}")
                break
        return state, params, history
