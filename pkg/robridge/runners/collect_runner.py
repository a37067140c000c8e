import shutil
from typing import Tuple

from overrides import override

from robridge.analyzer.analyzer import Analyzer
from robridge.dagger.store import DemoStore
from robridge.experts.rollout import Trajectory, rollout_expert
from robridge.items.config import ExperimentConfig
from robridge.out.model.enum.message_enum import MessageTypeEnum
from robridge.out.reporter import Reporter
from robridge.parser.manifest_parser import MANIFEST_FILE, ManifestParser
from robridge.runners.runner import Runner
from robridge.settings import SCHEMA_VERSION
from robridge.tasks.catalog import default_catalog


DEMO_DIR = "demos"


class CollectRunner(Runner):
    @classmethod
    @override
    def run(cls, *args, **kwargs) -> MessageTypeEnum:
        """
        task 마다 demos_per_task 개의 성공한 expert trajectory 를 모은다.
        demo k 의 n 번째 시도는 seed_base + k * (retries + 1) + n 을 쓴다.
        """
        out = cls._prepare(command="collect", **kwargs)
        config: ExperimentConfig = kwargs["config"]
        seed_base: int = kwargs.get("seed_base", 0)
        catalog = default_catalog()
        demos = config.collect["demos_per_task"]
        retries = config.collect["retries"]
        randomization = config.expert_randomization()

        def collect_one(item: Tuple[str, int]) -> Tuple[Trajectory, int]:
            task_id, k = item
            task = catalog.get(task_id)
            failures = 0
            for attempt in range(retries + 1):
                seed = seed_base + k * (retries + 1) + attempt
                trajectory = rollout_expert(task, seed, randomization, catalog=catalog)
                if trajectory.success:
                    break
                failures += 1
            return trajectory, failures

        items = [(task_id, k) for task_id in config.tasks for k in range(demos)]
        results = cls._fan_out(collect_one, items, kwargs.get("jobs", 1))

        manifest = {"schema_version": SCHEMA_VERSION, "tasks": {}}
        for task_id in config.tasks:
            root = out / DEMO_DIR / task_id
            if root.exists():
                cls.logger.info(f"Replacing previous demo store {root}")
                shutil.rmtree(root)
            store = DemoStore(root, task_id)
            entry = {"requested": demos, "written": 0, "expert_failures": 0, "seeds": [], "digests": []}
            for (item_task, _), (trajectory, failures) in zip(items, results):
                if item_task != task_id:
                    continue
                entry["expert_failures"] += failures
                if trajectory.success:
                    entry["digests"].append(store.append(trajectory))
                    entry["seeds"].append(trajectory.seed)
                    entry["written"] += 1
            manifest["tasks"][task_id] = entry
            cls.logger.info(
                f"{task_id}: {entry['written']}/{demos} trajectories, {entry['expert_failures']} expert failures"
            )

        Reporter().send(target="json", path=out / MANIFEST_FILE, data=manifest)
        data = ManifestParser().parse(out)
        status = Analyzer().analyze(data, max_failure_rate=config.collect["max_failure_rate"])
        cls.logger.info(f"Collect {status.value}: {data['summary']}")
        return status
