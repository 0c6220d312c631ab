"""Exception types shared across the package."""

from __future__ import annotations


class GenseriesError(Exception):
    """Base class for all package-specific errors."""


class SpecParseError(GenseriesError):
    """Malformed system spec file. Carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class FactorizationError(GenseriesError):
    """Pole factorization of the linear operator fails its consistency check."""


class TermBudgetError(GenseriesError):
    """Expansion exceeded the term budget. Names the order reached."""

    def __init__(self, order: int, count: int, budget: int):
        self.order = order
        self.count = count
        self.budget = budget
        super().__init__(
            f"term budget exceeded at order {order}: {count} raw terms > budget {budget}"
        )


class DegenerateSpectrumError(GenseriesError):
    """Two distinct pole combinations coincide within numeric tolerance.

    Cannot distinguish a true higher-order pole from a near-collision in
    floating point; rerun with exact pole arithmetic.
    """


class UnsupportedFormError(GenseriesError):
    """Term is outside the domain of the requested transform."""


class QuadratureDepthError(GenseriesError):
    """Nested quadrature depth above the supported limit."""


class BlowUpError(GenseriesError):
    """Numerical trajectory left the configured bound."""

    def __init__(self, time: float, bound: float, detail: str | None = None):
        self.time = time
        self.bound = bound
        super().__init__(
            detail or f"trajectory exceeded |y| = {bound:g} at t = {time:.6g}"
        )
