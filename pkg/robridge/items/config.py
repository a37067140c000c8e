import json
import typing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

from marshmallow import (
    EXCLUDE,
    Schema,
    ValidationError,
    fields,
    types,
    validate,
    validates_schema,
)

from robridge.augment import AugmentConfig
from robridge.dagger.piecewise import PiecewiseF
from robridge.dagger.trainer import DaggerConfig
from robridge.exceptions import ConfigError, SchemaVersionError
from robridge.loop.controller import LoopConfig
from robridge.settings import (
    DAGGER_BREAKPOINTS,
    DAGGER_BUDGET,
    DAGGER_SUCCESS_TARGET,
    DAGGER_VALUES,
    GEA_BATCH,
    GEA_LR,
    MAX_TICKS,
    PRIMITIVE_TIMEOUT,
    RETRY_BUDGET,
    SCHEMA_VERSION,
    STATUS_PERIOD,
)
from robridge.tasks.catalog import Catalog, default_catalog
from robridge.tasks.suites import SUITE_NAMES, ExpertRandomization


class _AugmentSchema(Schema):
    warp_mag = fields.Float(validate=validate.Range(min=0))
    blur_sigma = fields.Float(validate=validate.Range(min=0))
    hole_rate = fields.Float(validate=validate.Range(min=0, max=1))
    dilate_radius = fields.Integer(validate=validate.Range(min=0))
    shift_max = fields.Integer(validate=validate.Range(min=0))
    crop_margin = fields.Integer(validate=validate.Range(min=0))
    segment_add_delete_p = fields.Float(validate=validate.Range(min=0, max=1))
    segment_delete_ratio = fields.Float(validate=validate.Range(min=0, max=1))


class _GeaSchema(Schema):
    epochs = fields.Integer(load_default=5, validate=validate.Range(min=1))
    lr = fields.Float(load_default=GEA_LR, validate=validate.Range(min=0))
    batch_size = fields.Integer(load_default=GEA_BATCH, validate=validate.Range(min=1))
    seed = fields.Integer(load_default=0)


class _DaggerSchema(Schema):
    demos_per_task = fields.Integer(load_default=5, validate=validate.Range(min=1))
    n_eval = fields.Integer(load_default=6, validate=validate.Range(min=1))
    budget = fields.Integer(load_default=DAGGER_BUDGET, validate=validate.Range(min=0))
    success_target = fields.Float(load_default=DAGGER_SUCCESS_TARGET, validate=validate.Range(min=0, max=1))
    breakpoints = fields.List(fields.Float(), load_default=list(DAGGER_BREAKPOINTS))
    values = fields.List(fields.Float(), load_default=list(DAGGER_VALUES))


class _LoopSchema(Schema):
    status_period = fields.Integer(load_default=STATUS_PERIOD, validate=validate.Range(min=1))
    retry_budget = fields.Integer(load_default=RETRY_BUDGET, validate=validate.Range(min=0))
    max_ticks = fields.Integer(load_default=MAX_TICKS, validate=validate.Range(min=1))
    primitive_timeout = fields.Integer(load_default=PRIMITIVE_TIMEOUT, validate=validate.Range(min=1))


class _CollectSchema(Schema):
    demos_per_task = fields.Integer(load_default=5, validate=validate.Range(min=1))
    expert_randomization = fields.Boolean(load_default=True)
    retries = fields.Integer(load_default=2, validate=validate.Range(min=0))
    max_failure_rate = fields.Float(load_default=0.05, validate=validate.Range(min=0, max=1))


class _AblationSchema(Schema):
    suites = fields.List(fields.Str(validate=validate.OneOf(SUITE_NAMES)), load_default=list(SUITE_NAMES))


@dataclass(kw_only=True)
class ExperimentConfig:
    tasks: List[str] = field()
    suites: List[str] = field(default_factory=lambda: ["nominal"])
    seeds: List[int] = field()
    augment: Optional[AugmentConfig] = field(default=None)
    gea: Dict[str, typing.Any] = field(default_factory=dict)
    dagger: Dict[str, typing.Any] = field(default_factory=dict)
    loop: LoopConfig = field(default_factory=LoopConfig)
    collect: Dict[str, typing.Any] = field(default_factory=dict)
    output_dir: str = field(default="out")
    long_horizon_tasks: List[str] = field(default_factory=list)
    unseen_tasks: List[str] = field(default_factory=list)
    ablation: Dict[str, typing.Any] = field(default_factory=dict)

    def shifted_seeds(self, seed_base: int) -> List[int]:
        return [seed_base + s for s in self.seeds]

    def expert_randomization(self) -> Optional[ExpertRandomization]:
        return ExpertRandomization() if self.collect.get("expert_randomization", True) else None

    def dagger_config(self, seed: int = 0, jobs: int = 1, augment: bool = True) -> DaggerConfig:
        d, g = self.dagger, self.gea
        return DaggerConfig(
            demos_per_task=d["demos_per_task"],
            n_eval=d["n_eval"],
            budget=d["budget"],
            success_target=d["success_target"],
            epochs=g["epochs"],
            lr=g["lr"],
            batch_size=g["batch_size"],
            seed=g["seed"] + seed,
            jobs=jobs,
            augment=self.augment if augment else None,
            randomization=self.expert_randomization(),
            loop=LoopConfig(
                status_period=self.loop.status_period,
                retry_budget=self.loop.retry_budget,
                max_ticks=self.loop.max_ticks,
                primitive_timeout=self.loop.primitive_timeout,
                record=True,
            ),
            f=PiecewiseF(breakpoints=tuple(d["breakpoints"]), values=tuple(d["values"])),
        )

    class __ExperimentConfigSchema(Schema):
        schema_version = fields.Integer(required=True)
        tasks = fields.List(fields.Str(), required=True, validate=validate.Length(min=1))
        suites = fields.List(
            fields.Str(validate=validate.OneOf(SUITE_NAMES)),
            load_default=["nominal"],
            validate=validate.Length(min=1),
        )
        seeds = fields.List(fields.Integer(), required=True, validate=validate.Length(min=1))
        augment = fields.Nested(_AugmentSchema, allow_none=True, load_default=None)
        gea = fields.Nested(_GeaSchema, load_default=lambda: _GeaSchema().load({}))
        dagger = fields.Nested(_DaggerSchema, load_default=lambda: _DaggerSchema().load({}))
        loop = fields.Nested(_LoopSchema, load_default=lambda: _LoopSchema().load({}))
        collect = fields.Nested(_CollectSchema, load_default=lambda: _CollectSchema().load({}))
        output_dir = fields.Str(load_default="out")
        long_horizon_tasks = fields.List(fields.Str(), load_default=[])
        unseen_tasks = fields.List(fields.Str(), load_default=[])
        ablation = fields.Nested(_AblationSchema, load_default=lambda: _AblationSchema().load({}))

        class Meta:
            unknown = EXCLUDE

        @validates_schema
        def validate_dagger_f(self, data, **kwargs):
            dagger = data.get("dagger") or {}
            try:
                PiecewiseF.load({"breakpoints": dagger["breakpoints"], "values": dagger["values"]})
            except KeyError:
                return
            except ConfigError as e:
                raise ValidationError(str(e), field_name="dagger")

        def load(
            self,
            data: (
                typing.Mapping[str, typing.Any]
                | typing.Iterable[typing.Mapping[str, typing.Any]]
            ),
            *,
            many: bool | None = None,
            partial: bool | types.StrSequenceOrSet | None = None,
            unknown: str | None = None,
        ):
            res = super().load(data, many=many, partial=partial, unknown=unknown)
            res.pop("schema_version")
            if res["augment"] is not None:
                res["augment"] = AugmentConfig(**res["augment"])
            res["loop"] = LoopConfig(**res["loop"])
            return ExperimentConfig(**res)

    @classmethod
    def load(cls, data: typing.Mapping[str, typing.Any], catalog: Optional[Catalog] = None) -> "ExperimentConfig":
        if data.get("schema_version") != SCHEMA_VERSION:
            raise SchemaVersionError(f"Unsupported config schema_version: {data.get('schema_version')!r}")
        try:
            config = cls.__ExperimentConfigSchema().load(data)
        except ValidationError as e:
            raise ConfigError(f"Invalid experiment config: {e.messages}") from e
        catalog = catalog or default_catalog()
        for task_id in config.tasks + config.long_horizon_tasks + config.unseen_tasks:
            catalog.get(task_id)
        return config

    @classmethod
    def from_file(cls, path: Union[str, Path], catalog: Optional[Catalog] = None) -> "ExperimentConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except (OSError, ValueError) as e:
            raise ConfigError(f"Cannot read config {path}: {e}") from e
        return cls.load(data, catalog)
