from abc import ABCMeta, abstractmethod

from overrides import override

from robridge.experts.policy import expert_action
from robridge.gea.network import PolicyParams, forward
from robridge.ior.tensor import IORTensor
from robridge.items import PrimitiveActionVO
from robridge.world.state import Action4, WorldState


class Policy(metaclass=ABCMeta):
    name = "policy"

    @abstractmethod
    def act(self, primitive: PrimitiveActionVO, world: WorldState, tensor: IORTensor) -> Action4:
        """
        :param primitive: 현재 primitive
        :param world: privileged state. 학습된 정책은 보지 않는다.
        :param tensor: 현재 tick 의 IOR tensor
        """
        pass


class GEAPolicy(Policy):
    name = "gea"

    def __init__(self, params: PolicyParams):
        self.params = params

    @override
    def act(self, primitive: PrimitiveActionVO, world: WorldState, tensor: IORTensor) -> Action4:
        return forward(self.params, tensor)


class ExpertAsPolicy(Policy):
    name = "expert"

    @override
    def act(self, primitive: PrimitiveActionVO, world: WorldState, tensor: IORTensor) -> Action4:
        return expert_action(primitive, world)


class ZeroPolicy(Policy):
    name = "zero"

    @override
    def act(self, primitive: PrimitiveActionVO, world: WorldState, tensor: IORTensor) -> Action4:
        return Action4()
