import logging
from dataclasses import dataclass, field, replace

from robridge.exceptions import ConfigError
from robridge.items import PrimitiveActionVO
from robridge.world.simulator import support_height
from robridge.world.state import Action4, WorldState


logger = logging.getLogger("robridge.loop")

LIFT_HEIGHT = 0.02  # drop 은 이만큼 들어올린 뒤에만 일어난다


@dataclass(kw_only=True, frozen=True)
class FaultConfig:
    kind: str = field()  # drop | block_grasp
    after_primitive: int = field(default=0)
    persistent: bool = field(default=False)

    def __post_init__(self):
        if self.kind not in {"drop", "block_grasp"}:
            raise ConfigError(f"Unknown fault kind: {self.kind!r}")
        if self.after_primitive < 0:
            raise ConfigError("after_primitive must be >= 0")


class FaultInjector:
    """
    실행 직전의 action 을 망가뜨린다. transient fault 는 한 번 일어난 뒤 regeneration 에서 꺼진다.
    """

    def __init__(self, config: FaultConfig):
        self.config = config
        self.active = True
        self.triggered = False

    def apply(self, action: Action4, primitive: PrimitiveActionVO, cursor: int, world: WorldState) -> Action4:
        if not self.active or cursor < self.config.after_primitive:
            return action
        match self.config.kind:
            case "block_grasp":
                if primitive.type != "grasp":
                    return action
            case "drop":
                held = world.held()
                if held is None:
                    if self.triggered and not self.config.persistent:
                        self.active = False
                    return action
                x, y, z, _ = held.pose
                if z - support_height(world, x, y, exclude=held.id) < LIFT_HEIGHT:
                    return action
        if not self.triggered:
            logger.debug(f"tick={world.tick} fault {self.config.kind} fired during {primitive}")
        self.triggered = True
        return replace(action, g=1.0)

    def on_regenerate(self) -> None:
        if self.triggered and not self.config.persistent:
            self.active = False
