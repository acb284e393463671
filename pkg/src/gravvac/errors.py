"""Shared exception types, mapped to CLI exit codes in :mod:`gravvac.cli`."""


class ConvergenceError(RuntimeError):
    """An iterative or quadrature result failed its convergence check."""


class InvariantViolation(RuntimeError):
    """A numerical invariant (trace, Hermiticity, positivity, leakage) broke."""


class IllConditionedKernel(RuntimeError):
    """Singular values straddle the rank tolerance; kernel dimension ambiguous."""


class DegenerateDataError(ValueError):
    """Fit requested on data with no usable variation (e.g. all zeros)."""
