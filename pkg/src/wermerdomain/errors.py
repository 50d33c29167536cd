"""Exception hierarchy shared by all modules."""


class WermerError(Exception):
    """Base class for every error raised by this package."""


class PoleHit(WermerError):
    """A square-root factor was evaluated exactly at its branch point."""


class LevelTooLarge(WermerError):
    pass


class DivergentTail(WermerError):
    pass


class InvalidSchedule(WermerError, ValueError):
    pass


class InvalidProfile(WermerError, ValueError):
    pass


class EmptySet(WermerError, ValueError):
    pass


class OutsideDomainOfDefinition(WermerError):
    """The rescaled potential needs ``phi < 0``."""


class StencilHitsSingularity(WermerError):
    pass


class TooCloseToVariety(WermerError):
    pass


class ClearanceViolation(WermerError):
    pass


class StepCollapse(WermerError):
    pass


class MultiplePolesEnclosed(WermerError):
    pass


class TailTooLarge(WermerError):
    pass


class CenterOutside(WermerError):
    pass


class ConfigError(WermerError, ValueError):
    """Invalid run configuration; ``field`` names the offending key."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
