import shutil
from typing import List

from overrides import override

from robridge.dagger.store import INDEX_FILE, DemoStore
from robridge.dagger.trainer import AdaptiveDagger, DaggerState, IterationMetrics
from robridge.exceptions import StoreError
from robridge.gea import checkpoint
from robridge.gea.network import PolicyParams
from robridge.items.config import ExperimentConfig
from robridge.out.reporter import Reporter
from robridge.runners.collect_runner import DEMO_DIR
from robridge.runners.runner import Runner


DAGGER_DIR = "dagger"
STORE_DIR = "stores"


class DaggerRunner(Runner):
    @classmethod
    @override
    def run(cls, *args, **kwargs) -> List[IterationMetrics]:
        """
        collect 가 만든 store 에서 시작해 iteration 마다 checkpoint 디렉토리를 남긴다.
        """
        out = cls._prepare(command="dagger", **kwargs)
        config: ExperimentConfig = kwargs["config"]
        cfg = config.dagger_config(seed=kwargs.get("seed_base", 0), jobs=kwargs.get("jobs", 1))

        for task_id in config.tasks:
            source = out / DEMO_DIR / task_id
            if not (source / INDEX_FILE).exists():
                raise StoreError(f"{source / INDEX_FILE}: missing demo store, run collect first")

        # relabel 은 run 마다 새로 복사한 store 에만 쌓인다
        run_dir = out / DAGGER_DIR
        if run_dir.exists():
            cls.logger.info(f"Replacing previous dagger run {run_dir}")
            shutil.rmtree(run_dir)
        stores = {}
        for task_id in config.tasks:
            root = run_dir / STORE_DIR / task_id
            shutil.copytree(out / DEMO_DIR / task_id, root)
            stores[task_id] = DemoStore(root, task_id)
            list(stores[task_id])  # every trajectory file must parse
        state = DaggerState(weights={t: 1.0 for t in config.tasks}, stores=stores, f=cfg.f, n_eval=cfg.n_eval)
        params = PolicyParams.init(cfg.seed)

        def save(state: DaggerState, params: PolicyParams, metrics: IterationMetrics) -> None:
            state.save(run_dir / f"iter_{metrics.iteration:03d}", params)

        state, params, history = AdaptiveDagger(cfg).run(state, params, on_iteration=save)
        checkpoint.save(params, run_dir / "policy.bin")

        trace = [m.as_dict() for m in history]
        reporter = Reporter()
        reporter.send(target="json", path=run_dir / "trace.json", data=trace)
        if trace:
            reporter.send(target="markdown", kind="weights", path=run_dir / "weights.md", data={"history": trace})
        return history
