import shutil
from dataclasses import replace
from typing import Dict, Tuple

import numpy as np
from overrides import override

from robridge.dagger.trainer import AdaptiveDagger, DaggerConfig
from robridge.gea import checkpoint
from robridge.gea.network import PolicyParams
from robridge.items.config import ExperimentConfig
from robridge.loop.policy import GEAPolicy
from robridge.out.reporter import Reporter
from robridge.runners.eval_runner import success_rates
from robridge.runners.runner import Runner


FULL = "full"
NO_DAGGER = "w/o DAgger"
NO_RANDOMIZATION = "w/o domain randomization"


class AblateRunner(Runner):
    @classmethod
    def _dagger(cls, cfg: DaggerConfig, tasks, root, seed_base: int) -> Tuple[PolicyParams, int]:
        dagger = AdaptiveDagger(cfg)
        state = dagger.init(tasks, root / "demos", seed_base)
        state, params, _ = dagger.run(state, PolicyParams.init(cfg.seed))
        return params, sum(state.dataset_sizes().values())

    @classmethod
    def _behavior_cloning(cls, cfg: DaggerConfig, tasks, root, seed_base: int, total: int) -> PolicyParams:
        """
        dagger 와 같은 trajectory 수를 expert demo 만으로 채우고 한 번 학습한다.
        """
        per_task = max(1, int(np.ceil(total / len(tasks))))
        bc = replace(cfg, demos_per_task=per_task, epochs=cfg.epochs * max(1, cfg.budget))
        dagger = AdaptiveDagger(bc)
        state = dagger.init(tasks, root / "demos", seed_base)
        return dagger.trainer(PolicyParams.init(bc.seed), state.samples(), bc.seed)

    @classmethod
    @override
    def run(cls, *args, **kwargs) -> Dict[str, Dict[str, float]]:
        out = cls._prepare(command="ablate", **kwargs)
        config: ExperimentConfig = kwargs["config"]
        seed_base = kwargs.get("seed_base", 0)
        jobs = kwargs.get("jobs", 1)
        suites = config.ablation["suites"]
        seeds = config.shifted_seeds(seed_base)
        cfg = config.dagger_config(seed=seed_base, jobs=jobs)
        if (out / "ablate").exists():
            cls.logger.info(f"Replacing previous ablation runs under {out / 'ablate'}")
            shutil.rmtree(out / "ablate")

        full, total = cls._dagger(cfg, config.tasks, out / "ablate" / "full", seed_base)
        cls.logger.info(f"Full variant trained on {total} trajectories")
        bc = cls._behavior_cloning(cfg, config.tasks, out / "ablate" / "bc", seed_base, total)
        plain, _ = cls._dagger(
            replace(cfg, augment=None, randomization=None), config.tasks, out / "ablate" / "plain", seed_base
        )

        rates = {}
        for name, params in ((FULL, full), (NO_DAGGER, bc), (NO_RANDOMIZATION, plain)):
            checkpoint.save(params, out / "ablate" / f"{name.replace(' ', '_').replace('/', '')}.bin")
            by_task = success_rates(GEAPolicy(params), config.tasks, suites, seeds, config.loop, jobs=jobs)
            rates[name] = {s: float(np.mean([by_task[t][s] for t in config.tasks])) for s in suites}
            cls.logger.info(f"{name}: {rates[name]}")

        reporter = Reporter()
        reporter.send(target="markdown", kind="ablation", path=out / "ablation.md", data={"rates": rates, "suites": suites})
        reporter.send(target="json", path=out / "ablation.json", data={"seeds": seeds, "rates": rates})
        return rates
