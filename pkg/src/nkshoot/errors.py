"""Typed errors shared across the package.

Numerical failure modes are surfaced as distinct exception types so that
shooting and continuation drivers can tell a genuine domain exit (state left
the cone of valid SU(2)-structures) from integrator trouble (step collapse)
or a falsified reproduction (no bracket found).
"""


class NkError(Exception):
    """Base class for all package errors."""


class RhsDomainError(NkError):
    """A right-hand side was evaluated outside its valid domain."""


class NonPositiveMuSq(RhsDomainError):
    """inner(u, u) <= 0: the orbit size mu is undefined, state left the valid cone."""


class StepSizeUnderflow(NkError):
    """Adaptive step size fell below the floor; trajectory hit a stiff/singular region."""


class NoEventFound(NkError):
    """Integration was asked to stop at an event that never occurred."""


class ComplexSpectrum(NkError):
    """Eigendecomposition produced complex pairs where a real spectrum was required."""


class ValidationFailed(NkError):
    """A launch certificate did not meet its contraction requirement."""


class NoSignChange(NkError):
    """A bracketing scan found no sign change; carries the sampled values."""

    def __init__(self, message, samples=None):
        super().__init__(message)
        self.samples = list(samples) if samples is not None else []


class NuOutOfRange(NkError):
    """An eigenvalue nu fell outside the admissible band (0, 12)."""
