from abc import ABCMeta, abstractmethod
from dataclasses import dataclass, field
from typing import Sequence, Union

from robridge.exceptions import AugmentError
from robridge.settings import AUGMENT_DEFAULTS


Seed = Union[int, Sequence[int]]


@dataclass(kw_only=True, frozen=True)
class AugmentConfig:
    stage: str = field(default="gea")  # expert | gea
    warp_mag: float = field(default=AUGMENT_DEFAULTS["warp_mag"])
    blur_sigma: float = field(default=AUGMENT_DEFAULTS["blur_sigma"])
    hole_rate: float = field(default=AUGMENT_DEFAULTS["hole_rate"])
    dilate_radius: int = field(default=AUGMENT_DEFAULTS["dilate_radius"])
    shift_max: int = field(default=AUGMENT_DEFAULTS["shift_max"])
    crop_margin: int = field(default=AUGMENT_DEFAULTS["crop_margin"])
    segment_add_delete_p: float = field(default=AUGMENT_DEFAULTS["segment_add_delete_p"])
    segment_delete_ratio: float = field(default=AUGMENT_DEFAULTS["segment_delete_ratio"])
    seed: int = field(default=0)

    def __post_init__(self):
        if self.stage not in {"expert", "gea"}:
            raise AugmentError(f"Unknown augmentation stage: {self.stage!r}")
        magnitudes = (
            self.warp_mag,
            self.blur_sigma,
            self.hole_rate,
            self.dilate_radius,
            self.shift_max,
            self.crop_margin,
            self.segment_add_delete_p,
            self.segment_delete_ratio,
        )
        if any(m < 0 for m in magnitudes):
            raise AugmentError(f"Augmentation magnitudes must be >= 0: {self}")
        if self.hole_rate > 1 or self.segment_add_delete_p > 1 or self.segment_delete_ratio > 1:
            raise AugmentError(f"Augmentation probabilities must be <= 1: {self}")
        if self.stage == "expert" and any(magnitudes[:-1]):
            raise AugmentError("Expert stage randomizes the scene, not the image")

    @classmethod
    def expert(cls) -> "AugmentConfig":
        return cls(
            stage="expert",
            warp_mag=0.0,
            blur_sigma=0.0,
            hole_rate=0.0,
            dilate_radius=0,
            shift_max=0,
            crop_margin=0,
            segment_add_delete_p=0.0,
        )

    @classmethod
    def zero(cls, seed: int = 0) -> "AugmentConfig":
        return cls(
            warp_mag=0.0,
            blur_sigma=0.0,
            hole_rate=0.0,
            dilate_radius=0,
            shift_max=0,
            crop_margin=0,
            segment_add_delete_p=0.0,
            seed=seed,
        )


class BaseAugment(metaclass=ABCMeta):
    @abstractmethod
    def process(self, tensor, cfg: AugmentConfig, priority: int):
        """
        :param tensor: IORTensor to be corrupted (새 객체를 돌려준다)
        :param cfg: GEA stage config
        :param priority: pipeline 순서. channel 별 난수 stream 을 가른다.
        :return: Processed IORTensor
        """
        pass
