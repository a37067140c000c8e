class RobridgeError(Exception):
    """
    모든 도메인 에러의 부모. CLI 는 이 계열을 exit code 3 으로 처리한다.
    """


class ConfigError(RobridgeError):
    pass


class SchemaVersionError(ConfigError):
    pass


class TaskNotFoundError(ConfigError):
    pass


class SceneError(RobridgeError):
    pass


class ActionError(RobridgeError):
    pass


class PlanningError(RobridgeError):
    pass


class GroundingError(RobridgeError):
    pass


class ConstraintError(RobridgeError):
    pass


class IORBuildError(RobridgeError):
    pass


class MotionPlanningError(RobridgeError):
    pass


class ExpertError(RobridgeError):
    pass


class ShapeMismatchError(RobridgeError):
    pass


class TrainingError(RobridgeError):
    pass


class StoreError(RobridgeError):
    pass


class AugmentError(RobridgeError):
    pass
