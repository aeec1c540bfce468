"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class BBMKPError(Exception):
    """Base class for every error raised by this package."""


class InvalidGrid(BBMKPError, ValueError):
    pass


class NonFiniteField(BBMKPError, ValueError):
    pass


class NonZeroXMean(BBMKPError, ValueError):
    """The antiderivative in x is undefined because a slice has non-zero x-mean."""

    def __init__(self, y_index: int | None, mean: float, tol: float | None = None):
        self.y_index = y_index
        self.mean = float(mean)
        self.tol = tol
        where = "field" if y_index is None else f"y-index {y_index}"
        msg = f"non-zero x-mean {self.mean:.3e} at {where}"
        if tol is not None:
            msg += f" (tolerance {tol:.3e})"
        super().__init__(msg)


class IndexOutOfRange(BBMKPError, IndexError):
    pass


class GridMismatch(BBMKPError, ValueError):
    pass


class BlowUp(BBMKPError, ArithmeticError):
    """Raised when an integrator produces non-finite or absurdly large states."""

    def __init__(self, step: int, t: float, magnitude: float):
        self.step = step
        self.t = t
        self.magnitude = magnitude
        super().__init__(f"state magnitude {magnitude:.3e} at step {step} (t = {t:.6g})")


class StepTooLarge(BBMKPError, ValueError):
    def __init__(self, dt: float, max_symbol: float, limit: float):
        self.dt = dt
        self.max_symbol = max_symbol
        self.limit = limit
        super().__init__(
            f"dt * max|symbol| = {dt * max_symbol:.4g} exceeds {limit} "
            f"(dt = {dt:.4g}, max|symbol| = {max_symbol:.4g})"
        )


class TimeMisalignment(BBMKPError, ValueError):
    pass


class NegativeInput(BBMKPError, ValueError):
    pass


class EmptyInput(BBMKPError, ValueError):
    pass


class UnresolvedProfile(BBMKPError, ValueError):
    pass


class ScenarioError(BBMKPError):
    """Base class for scenario loading problems (exit code 2 in the CLI)."""


class ParseError(ScenarioError, ValueError):
    pass


class ValidationError(ScenarioError, ValueError):
    def __init__(self, path: str, message: str):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}" if path else message)
