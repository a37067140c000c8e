from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from overrides import override

from robridge.dagger.trainer import POLICY_FILE
from robridge.gea import checkpoint
from robridge.hcp.planner import Planner, planner_from_env
from robridge.items.config import ExperimentConfig
from robridge.loop.controller import LoopConfig, run_episode
from robridge.loop.episode_log import EpisodeLog
from robridge.loop.policy import ExpertAsPolicy, GEAPolicy, Policy, ZeroPolicy
from robridge.out.reporter import Reporter
from robridge.runners.runner import Runner
from robridge.tasks.catalog import default_catalog
from robridge.tasks.suites import instantiate


def load_policy(spec: Union[str, Path]) -> Policy:
    """
    :param spec: "expert" | "zero" | policy checkpoint 파일 | dagger checkpoint 디렉토리
    """
    match str(spec):
        case "expert":
            return ExpertAsPolicy()
        case "zero":
            return ZeroPolicy()
    path = Path(spec)
    if path.is_dir():
        path = path / POLICY_FILE
    return GEAPolicy(checkpoint.load(path))


def success_rates(
    policy: Policy,
    tasks: Sequence[str],
    suites: Sequence[str],
    seeds: Sequence[int],
    loop: LoopConfig = LoopConfig(),
    planner: Optional[Planner] = None,
    jobs: int = 1,
    log_dir: Optional[Path] = None,
) -> Dict[str, Dict[str, float]]:
    """
    :return: Dict[task, Dict[suite, seed 평균 성공률]]
    """
    catalog = default_catalog()

    def episode(item: Tuple[str, str, int]) -> bool:
        task_id, suite, seed = item
        instance = instantiate(task_id, suite, seed, catalog=catalog)
        if log_dir is None:
            return run_episode(catalog.get(task_id), instance, policy, loop, planner).success
        with EpisodeLog(log_dir / f"{task_id}_{suite}_{seed}.jsonl") as log:
            log.header(task_id, suite, seed, False, instance.instruction)
            return run_episode(catalog.get(task_id), instance, policy, loop, planner, log=log).success

    items = [(t, s, seed) for t in tasks for s in suites for seed in seeds]
    outcomes = Runner._fan_out(episode, items, jobs)
    rates: Dict[str, Dict[str, List[bool]]] = {t: {s: [] for s in suites} for t in tasks}
    for (t, s, _), success in zip(items, outcomes):
        rates[t][s].append(success)
    return {t: {s: float(np.mean(rates[t][s])) for s in suites} for t in tasks}


def stage_counts(
    policy: Policy,
    tasks: Sequence[str],
    seeds: Sequence[int],
    loop: LoopConfig = LoopConfig(),
    planner: Optional[Planner] = None,
    jobs: int = 1,
) -> Dict[str, List[int]]:
    catalog = default_catalog()

    def episode(item: Tuple[str, int]) -> int:
        task_id, seed = item
        instance = instantiate(task_id, "nominal", seed, catalog=catalog)
        return run_episode(catalog.get(task_id), instance, policy, loop, planner).stages_completed

    items = [(t, seed) for t in tasks for seed in seeds]
    counts = Runner._fan_out(episode, items, jobs)
    res: Dict[str, List[int]] = {t: [] for t in tasks}
    for (t, _), n in zip(items, counts):
        res[t].append(n)
    return res


class EvalRunner(Runner):
    @classmethod
    @override
    def run(cls, *args, **kwargs) -> Dict[str, Dict[str, float]]:
        out = cls._prepare(command="eval", **kwargs)
        config: ExperimentConfig = kwargs["config"]
        seeds = config.shifted_seeds(kwargs.get("seed_base", 0))
        suites = [kwargs["suite"]] if kwargs.get("suite") else config.suites
        jobs = kwargs.get("jobs", 1)
        policy = load_policy(kwargs.get("checkpoint") or "expert")
        planner = planner_from_env()
        log_dir = out / "episodes" if kwargs.get("log") else None
        cls.logger.info(f"Evaluating {policy.name} on {len(config.tasks)} tasks x {suites} x {len(seeds)} seeds")

        rates = success_rates(policy, config.tasks, suites, seeds, config.loop, planner, jobs, log_dir)
        report = {"policy": policy.name, "seeds": seeds, "rates": rates}
        if config.unseen_tasks:
            cls.logger.info(f"Evaluating {policy.name} on unseen tasks {config.unseen_tasks}")
            unseen = success_rates(policy, config.unseen_tasks, suites, seeds, config.loop, planner, jobs, log_dir)
            report["unseen"] = unseen
        reporter = Reporter()
        reporter.send(
            target="markdown",
            kind="success",
            path=out / "success.md",
            data={"rates": rates, "suites": suites, "unseen": report.get("unseen")},
        )

        if config.long_horizon_tasks:
            catalog = default_catalog()
            counts = stage_counts(policy, config.long_horizon_tasks, seeds, config.loop, planner, jobs)
            n_stages = max(len(catalog.get(t).stages) for t in config.long_horizon_tasks)
            reporter.send(
                target="markdown",
                kind="avg_len",
                path=out / "avg_len.md",
                data={"stages": counts, "n_stages": n_stages},
            )
            report["stages"] = counts

        reporter.send(target="json", path=out / "eval.json", data=report)
        return rates
