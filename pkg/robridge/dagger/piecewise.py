from bisect import bisect_left
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Tuple

import numpy as np
from marshmallow import Schema, ValidationError, fields, post_load, validates_schema

from robridge.exceptions import ConfigError
from robridge.settings import DAGGER_BREAKPOINTS, DAGGER_VALUES


@dataclass(kw_only=True, frozen=True)
class PiecewiseF:
    """
    reward -> sampling weight. 구간은 오른쪽이 닫혀 있다: (-, t0], (t0, t1], ..., (tn, 1].
    """

    breakpoints: Tuple[float, ...] = field(default=DAGGER_BREAKPOINTS)
    values: Tuple[float, ...] = field(default=DAGGER_VALUES)

    def __post_init__(self):
        errors = self.__PiecewiseFSchema().validate(self.as_dict())
        if errors:
            raise ConfigError(f"Invalid piecewise f: {errors}")

    def as_dict(self) -> dict:
        return {"breakpoints": list(self.breakpoints), "values": list(self.values)}

    class __PiecewiseFSchema(Schema):
        breakpoints = fields.List(fields.Float(), required=True)
        values = fields.List(fields.Float(), required=True)

        @validates_schema
        def validate_shape(self, data, **kwargs):
            b, v = data["breakpoints"], data["values"]
            if len(v) != len(b) + 1:
                raise ValidationError("values must have one more entry than breakpoints")
            if any(not 0.0 <= t <= 1.0 for t in b) or any(x >= y for x, y in zip(b, b[1:])):
                raise ValidationError("breakpoints must be strictly ascending in [0, 1]")
            if any(x <= 0 for x in v) or any(x < y for x, y in zip(v, v[1:])):
                raise ValidationError("values must be positive and non-increasing")

        @post_load
        def make(self, data, **kwargs):
            return PiecewiseF(breakpoints=tuple(data["breakpoints"]), values=tuple(data["values"]))

    @classmethod
    def load(cls, data: Mapping) -> "PiecewiseF":
        try:
            return cls.__PiecewiseFSchema().load(data)
        except ValidationError as e:
            raise ConfigError(f"Invalid piecewise f: {e.messages}") from e


def f_value(f: PiecewiseF, reward: float) -> float:
    if not 0.0 <= reward <= 1.0:
        raise ValueError(f"reward must be in [0, 1], got {reward}")
    return f.values[bisect_left(f.breakpoints, reward)]


def sample_tasks(weights: Mapping[str, float], n: int, seed: int) -> list:
    """
    weight 비례 복원 추출.

    :param weights: task id -> 양수 weight. 순서는 id 정렬로 고정한다.
    :return: 길이 n 인 task id list
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    ids = sorted(weights)
    w = np.array([weights[i] for i in ids], dtype=np.float64)
    if (w <= 0).any() or not np.isfinite(w).all():
        raise ValueError(f"weights must be positive: {dict(weights)}")
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(ids), size=n, replace=True, p=w / w.sum())
    return [ids[i] for i in picks]


def mean_f(f: PiecewiseF, rewards: Sequence[float]) -> float:
    return float(np.mean([f_value(f, r) for r in rewards]))
