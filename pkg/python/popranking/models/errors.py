class PopRankingError(Exception):
    pass


class ParameterError(PopRankingError, ValueError):
    pass


class TieError(ParameterError):
    """Raised when a tied website majority reaches code without a tie rule."""


class RegimeError(ParameterError):
    """Raised when an operation is called outside the regime it is valid in."""


class ConfigError(PopRankingError):
    pass


class ChoiceError(PopRankingError):
    """All ranking-weighted values are zero, the choice is undefined."""


class RootFindingError(PopRankingError):
    pass


class ConvergenceError(PopRankingError):
    residual: float
    steps: int

    def __init__(self, message: str, residual: float, steps: int):
        super().__init__(f"{message} (residual={residual:.3e}, steps={steps})")
        self.residual = residual
        self.steps = steps
