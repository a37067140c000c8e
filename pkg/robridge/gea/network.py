import hashlib
from dataclasses import dataclass, field
from typing import Dict, Iterator, Sequence, Tuple

import numpy as np

from robridge.exceptions import ShapeMismatchError, TrainingError
from robridge.ior.tensor import IORTensor
from robridge.settings import GEA_LAYERS
from robridge.world.state import Action4

Batch = Sequence[Tuple[IORTensor, Action4]]


def _shapes() -> Dict[str, Tuple[int, ...]]:
    g_in, g_h1, g_h2 = GEA_LAYERS["grid"]
    v_in, v_h = GEA_LAYERS["vec"]
    h_in, h_h, h_out = GEA_LAYERS["head"]
    if h_in != g_h2 + v_h:
        raise ShapeMismatchError(f"Head input {h_in} != {g_h2} + {v_h}")
    return {
        "W1": (g_in, g_h1),
        "b1": (g_h1,),
        "W2": (g_h1, g_h2),
        "b2": (g_h2,),
        "V1": (v_in, v_h),
        "c1": (v_h,),
        "H1": (h_in, h_h),
        "d1": (h_h,),
        "H2": (h_h, h_out),
        "d2": (h_out,),
    }


SHAPES = _shapes()
ORDER = tuple(SHAPES)


def fingerprint() -> bytes:
    """
    architecture 를 구별하는 32 byte. checkpoint 에 같이 저장한다.
    """
    text = ";".join(f"{name}:{'x'.join(map(str, shape))}" for name, shape in SHAPES.items())
    return hashlib.sha256(text.encode()).digest()


@dataclass(kw_only=True)
class PolicyParams:
    arrays: Dict[str, np.ndarray] = field()

    def __post_init__(self):
        if set(self.arrays) != set(ORDER):
            raise ShapeMismatchError(f"Parameter names {sorted(self.arrays)} != {sorted(ORDER)}")
        for name in ORDER:
            if self.arrays[name].shape != SHAPES[name]:
                raise ShapeMismatchError(
                    f"{name}: shape {self.arrays[name].shape}, expected {SHAPES[name]}"
                )

    def __getitem__(self, name: str) -> np.ndarray:
        return self.arrays[name]

    def __iter__(self) -> Iterator[Tuple[str, np.ndarray]]:
        return ((name, self.arrays[name]) for name in ORDER)

    @classmethod
    def zeros(cls, dtype=np.float32) -> "PolicyParams":
        return cls(arrays={name: np.zeros(shape, dtype=dtype) for name, shape in SHAPES.items()})

    @classmethod
    def init(cls, seed: int, dtype=np.float32) -> "PolicyParams":
        """
        uniform(+-1/sqrt(fan_in)). bias 도 같은 범위이다.
        """
        rng = np.random.default_rng(seed)
        arrays = {}
        for name, shape in SHAPES.items():
            fan_in = shape[0] if len(shape) == 2 else SHAPES[_weight_of(name)][0]
            bound = 1.0 / np.sqrt(fan_in)
            arrays[name] = rng.uniform(-bound, bound, size=shape).astype(dtype)
        return cls(arrays=arrays)

    def astype(self, dtype) -> "PolicyParams":
        return PolicyParams(arrays={n: a.astype(dtype) for n, a in self.arrays.items()})

    def copy(self) -> "PolicyParams":
        return PolicyParams(arrays={n: a.copy() for n, a in self.arrays.items()})

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(a)) for a in self.arrays.values())


_BIAS_OF = {"b1": "W1", "b2": "W2", "c1": "V1", "d1": "H1", "d2": "H2"}


def _weight_of(name: str) -> str:
    return _BIAS_OF.get(name, name)


def stack(batch: Sequence[IORTensor], dtype=np.float32) -> Tuple[np.ndarray, np.ndarray]:
    if not batch:
        raise TrainingError("Empty batch")
    grids = np.stack([t.flat() for t in batch]).astype(dtype)
    vecs = np.stack([t.vec for t in batch]).astype(dtype)
    if grids.shape[1] != SHAPES["W1"][0] or vecs.shape[1] != SHAPES["V1"][0]:
        raise ShapeMismatchError(f"Input shapes {grids.shape}/{vecs.shape} do not match the network")
    return grids, vecs


def _forward(params: PolicyParams, grids: np.ndarray, vecs: np.ndarray) -> Dict[str, np.ndarray]:
    h1 = np.tanh(grids @ params["W1"] + params["b1"])
    h2 = np.tanh(h1 @ params["W2"] + params["b2"])
    v = np.tanh(vecs @ params["V1"] + params["c1"])
    z = np.concatenate([h2, v], axis=1)
    h3 = np.tanh(z @ params["H1"] + params["d1"])
    out = np.tanh(h3 @ params["H2"] + params["d2"])
    return {"h1": h1, "h2": h2, "v": v, "z": z, "h3": h3, "out": out}


def forward_batch(params: PolicyParams, batch: Sequence[IORTensor]) -> np.ndarray:
    dtype = params["W1"].dtype
    grids, vecs = stack(batch, dtype)
    return _forward(params, grids, vecs)["out"]


def forward(params: PolicyParams, x: IORTensor) -> Action4:
    out = forward_batch(params, [x])[0]
    return Action4.coerce(tuple(float(v) for v in out))


def loss_and_grad(params: PolicyParams, batch: Batch) -> Tuple[float, PolicyParams]:
    """
    loss = mean_b ||out_b - t_b||^2 / 4 와 그 해석적 gradient.

    :param batch: (IOR tensor, expert action) 쌍
    """
    dtype = params["W1"].dtype
    grids, vecs = stack([x for x, _ in batch], dtype)
    t = np.array([Action4.coerce(a).as_array() for _, a in batch], dtype=dtype)
    n = grids.shape[0]

    acts = _forward(params, grids, vecs)
    err = acts["out"] - t
    loss = float(np.sum(err * err) / (4 * n))

    d_out = (2.0 / (4 * n)) * err * (1.0 - acts["out"] ** 2)
    grads = {"H2": acts["h3"].T @ d_out, "d2": d_out.sum(axis=0)}
    d_h3 = (d_out @ params["H2"].T) * (1.0 - acts["h3"] ** 2)
    grads["H1"] = acts["z"].T @ d_h3
    grads["d1"] = d_h3.sum(axis=0)
    d_z = d_h3 @ params["H1"].T
    width = acts["h2"].shape[1]
    d_h2 = d_z[:, :width] * (1.0 - acts["h2"] ** 2)
    d_v = d_z[:, width:] * (1.0 - acts["v"] ** 2)
    grads["V1"] = vecs.T @ d_v
    grads["c1"] = d_v.sum(axis=0)
    grads["W2"] = acts["h1"].T @ d_h2
    grads["b2"] = d_h2.sum(axis=0)
    d_h1 = (d_h2 @ params["W2"].T) * (1.0 - acts["h1"] ** 2)
    grads["W1"] = grids.T @ d_h1
    grads["b1"] = d_h1.sum(axis=0)
    return loss, PolicyParams(arrays={k: v.astype(dtype) for k, v in grads.items()})


def gradient_check(
    params: PolicyParams,
    sample: Tuple[IORTensor, Action4],
    n_coords: int = 20,
    h: float = 1e-5,
    seed: int = 0,
) -> float:
    """
    무작위 좌표 n_coords 개에서 해석적 gradient 와 중심 차분을 f64 로 비교한다.

    :return: 최대 상대 오차
    """
    p = params.astype(np.float64)
    _, grads = loss_and_grad(p, [sample])
    rng = np.random.default_rng(seed)
    sizes = np.array([p[name].size for name in ORDER])
    worst = 0.0
    for _ in range(n_coords):
        k = int(rng.choice(len(ORDER), p=sizes / sizes.sum()))
        name = ORDER[k]
        idx = np.unravel_index(int(rng.integers(p[name].size)), p[name].shape)
        original = p[name][idx]
        p[name][idx] = original + h
        plus, _ = loss_and_grad(p, [sample])
        p[name][idx] = original - h
        minus, _ = loss_and_grad(p, [sample])
        p[name][idx] = original
        numeric = (plus - minus) / (2 * h)
        analytic = float(grads[name][idx])
        denominator = max(abs(analytic), abs(numeric), 1e-6)
        worst = max(worst, abs(analytic - numeric) / denominator)
    return worst
