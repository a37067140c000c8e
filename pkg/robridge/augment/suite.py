import importlib
import logging
from functools import lru_cache
from typing import Dict, List, Tuple

from robridge.augment import AugmentConfig, BaseAugment
from robridge.exceptions import AugmentError
from robridge.ior.tensor import IORTensor
from robridge.settings import AUGMENT_PIPELINES


logger = logging.getLogger("robridge.augment")


def load_object(path: str):
    module_name, _, name = path.rpartition(".")
    try:
        return getattr(importlib.import_module(module_name), name)
    except (ImportError, AttributeError) as e:
        raise AugmentError(f"Cannot load augmentation stage {path!r}") from e


@lru_cache(maxsize=4)
def _pipeline(table: Tuple[Tuple[str, int], ...]) -> List[Tuple[int, BaseAugment]]:
    stages = []
    for path, priority in sorted(table, key=lambda item: item[1]):
        cls = load_object(path)
        if not issubclass(cls, BaseAugment):
            raise AugmentError(f"{path} is not an augmentation stage")
        stages.append((priority, cls()))
    return stages


def apply_suite(
    tensor: IORTensor, cfg: AugmentConfig, pipelines: Dict[str, int] = AUGMENT_PIPELINES
) -> IORTensor:
    """
    GEA stage corruption. depth 채널은 warp -> blur -> holes, mask 채널은 jitter. vec 은 그대로 둔다.
    """
    if cfg.stage != "gea":
        raise AugmentError("Expert stage randomization is applied to the scene, not to tensors")
    out = tensor
    for priority, stage in _pipeline(tuple(pipelines.items())):
        out = stage.process(out, cfg, priority)
    return out
