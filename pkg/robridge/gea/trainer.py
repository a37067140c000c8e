import logging
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from robridge.augment import AugmentConfig
from robridge.augment.suite import apply_suite
from robridge.exceptions import TrainingError
from robridge.gea.network import ORDER, PolicyParams, loss_and_grad
from robridge.ior.tensor import IORTensor
from robridge.settings import GEA_BATCH, GEA_BETAS, GEA_EPS, GEA_LR
from robridge.world.state import Action4


logger = logging.getLogger("robridge.gea")

Sample = Tuple[IORTensor, Action4]


@dataclass(kw_only=True)
class TrainMetrics:
    epoch_losses: List[float] = field(default_factory=list)
    steps: int = field(default=0)

    @property
    def final_loss(self) -> float:
        return self.epoch_losses[-1] if self.epoch_losses else float("nan")


class Adam:
    """
    parameter 별 1차/2차 moment 를 쓰는 적응 step. 상태는 학습 중에만 살아 있다.
    """

    def __init__(self, params: PolicyParams, lr: float, betas=GEA_BETAS, eps: float = GEA_EPS):
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.t = 0
        self.m = {name: np.zeros_like(a) for name, a in params}
        self.v = {name: np.zeros_like(a) for name, a in params}

    def step(self, params: PolicyParams, grads: PolicyParams) -> None:
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for name in ORDER:
            g = grads[name]
            self.m[name] = self.beta1 * self.m[name] + (1.0 - self.beta1) * g
            self.v[name] = self.beta2 * self.v[name] + (1.0 - self.beta2) * g * g
            update = self.lr * (self.m[name] / c1) / (np.sqrt(self.v[name] / c2) + self.eps)
            params.arrays[name] = (params[name] - update).astype(params[name].dtype)


def sample_seed(seed: int, epoch: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, epoch, index]).generate_state(1)[0])


def train(
    params: PolicyParams,
    dataset: Sequence[Sample],
    epochs: int,
    lr: float = GEA_LR,
    seed: int = 0,
    batch_size: int = GEA_BATCH,
    augment: Optional[AugmentConfig] = None,
) -> Tuple[PolicyParams, TrainMetrics]:
    """
    :param dataset: (IORTensor, expert action) 쌍
    :param augment: 있으면 minibatch 원소마다 GEA stage corruption 을 적용
    :return: 학습된 params 복사본, epoch 별 loss
    """
    if not dataset:
        raise TrainingError("Dataset is empty")
    params = params.astype(np.float32)
    optimizer = Adam(params, lr)
    rng = np.random.default_rng(seed)
    metrics = TrainMetrics()

    for epoch in range(epochs):
        order = rng.permutation(len(dataset))
        total, count = 0.0, 0
        for start in range(0, len(order), batch_size):
            idx = order[start: start + batch_size]
            inputs = [dataset[i][0] for i in idx]
            if augment is not None:
                inputs = [
                    apply_suite(x, replace(augment, seed=sample_seed(seed, epoch, int(i))))
                    for x, i in zip(inputs, idx)
                ]
            batch = [(x, dataset[i][1]) for x, i in zip(inputs, idx)]
            loss, grads = loss_and_grad(params, batch)
            if not np.isfinite(loss) or not grads.is_finite():
                raise TrainingError(
                    f"Non-finite loss at epoch {epoch} batch {start // batch_size}: loss={loss}, "
                    f"max|param|={max(float(np.abs(a).max()) for _, a in params)}"
                )
            optimizer.step(params, grads)
            metrics.steps += 1
            total += loss * len(idx)
            count += len(idx)
        metrics.epoch_losses.append(total / count)
        logger.debug(f"epoch={epoch} loss={metrics.epoch_losses[-1]:.6f}")

    logger.info(f"Trained {epochs} epochs on {len(dataset)} samples, final loss {metrics.final_loss:.6f}")
    return params, metrics
