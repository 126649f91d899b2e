"""Frame algebra of the cohomogeneity-one structure.

State is the triple (lambda, u, v) with u, v vectors in R^{1,2}; the inner
product has signature (-,+,+) with index 0 timelike. The derived frame
(mu, w, x, y) is reconstructed algebraically at every evaluation:

    mu = |u|,   x = u/mu,   y = v/(lambda*mu),
    w  = cross-type column built from (u, v) so that (w, x, y) is a
         Lorentz-orthonormal triple (w timelike) whenever the conserved
         quadruple vanishes.

mu is never carried as a state variable; recomputing it from u keeps the
constraint u2 = -lambda*mu structurally consistent. lambda evolves through
the frame relation dlambda = 3*y2 - 2*lambda^2*x1/mu, which is exactly the
evolution that preserves u2 + lambda*mu = 0 along the flow.

All operations are pure functions of their inputs; no shared mutable state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NonPositiveMuSq, RhsDomainError


@dataclass(frozen=True)
class MinkowskiVec3:
    """A point of R^{1,2}; component 0 is timelike."""

    a0: float
    a1: float
    a2: float

    def as_tuple(self) -> tuple:
        return (self.a0, self.a1, self.a2)

    def __add__(self, other: "MinkowskiVec3") -> "MinkowskiVec3":
        return MinkowskiVec3(self.a0 + other.a0, self.a1 + other.a1, self.a2 + other.a2)

    def __sub__(self, other: "MinkowskiVec3") -> "MinkowskiVec3":
        return MinkowskiVec3(self.a0 - other.a0, self.a1 - other.a1, self.a2 - other.a2)

    def scale(self, c: float) -> "MinkowskiVec3":
        return MinkowskiVec3(c * self.a0, c * self.a1, c * self.a2)


def minkowski_inner(a: MinkowskiVec3, b: MinkowskiVec3) -> float:
    """Signature (-,+,+) inner product."""
    return -a.a0 * b.a0 + a.a1 * b.a1 + a.a2 * b.a2


@dataclass(frozen=True)
class BackgroundState:
    """One point of a background trajectory: arc-length time t and (lambda, u, v)."""

    t: float
    lam: float
    u: MinkowskiVec3
    v: MinkowskiVec3

    def as_vector(self) -> tuple:
        return (self.lam, self.u.a0, self.u.a1, self.u.a2, self.v.a0, self.v.a1, self.v.a2)

    @staticmethod
    def from_vector(t: float, y) -> "BackgroundState":
        return BackgroundState(
            t=t,
            lam=y[0],
            u=MinkowskiVec3(y[1], y[2], y[3]),
            v=MinkowskiVec3(y[4], y[5], y[6]),
        )


@dataclass(frozen=True)
class BackgroundDerivative:
    """Time derivative of a BackgroundState."""

    dlam: float
    du: MinkowskiVec3
    dv: MinkowskiVec3

    def as_vector(self) -> tuple:
        return (self.dlam, self.du.a0, self.du.a1, self.du.a2, self.dv.a0, self.dv.a1, self.dv.a2)


@dataclass(frozen=True)
class DerivedFrame:
    mu: float
    w: MinkowskiVec3
    x: MinkowskiVec3
    y: MinkowskiVec3


@dataclass(frozen=True)
class ConservedQuadruple:
    """Algebraic constraints conserved by the background flow; all four vanish
    on valid trajectories up to integrator drift."""

    i1: float
    i2: float
    i3: float
    i4: float

    def as_tuple(self) -> tuple:
        return (self.i1, self.i2, self.i3, self.i4)

    @property
    def max_abs(self) -> float:
        return max(abs(self.i1), abs(self.i2), abs(self.i3), abs(self.i4))


# ---------------------------------------------------------------------------
# Raw kernels on 7-tuples (lam, u0, u1, u2, v0, v1, v2): the hot path for
# integration. The dataclass API below wraps these.


def _musq_raw(y) -> float:
    return -y[1] * y[1] + y[2] * y[2] + y[3] * y[3]


def _frame_raw(y):
    """(mu, w0, w1, w2, x0, x1, x2, y0, y1, y2) from a raw state."""
    lam, u0, u1, u2, v0, v1, v2 = y
    musq = -u0 * u0 + u1 * u1 + u2 * u2
    if musq <= 0.0:
        raise NonPositiveMuSq(f"inner(u,u)={musq:.6e} <= 0")
    if lam <= 0.0:
        raise RhsDomainError(f"lambda={lam:.6e} <= 0")
    mu = math.sqrt(musq)
    inv = 1.0 / (lam * musq)
    w0 = (u1 * v2 - v1 * u2) * inv
    w1 = (u0 * v2 - u2 * v0) * inv
    w2 = (u1 * v0 - v1 * u0) * inv
    inv_mu = 1.0 / mu
    inv_lm = 1.0 / (lam * mu)
    return (
        mu,
        w0,
        w1,
        w2,
        u0 * inv_mu,
        u1 * inv_mu,
        u2 * inv_mu,
        v0 * inv_lm,
        v1 * inv_lm,
        v2 * inv_lm,
    )


def nk_rhs_raw(t, y):
    """Right-hand side of the background system on raw 7-tuples."""
    lam, u0, u1, u2, v0, v1, v2 = y
    musq = -u0 * u0 + u1 * u1 + u2 * u2
    if musq <= 0.0:
        raise NonPositiveMuSq(f"inner(u,u)={musq:.6e} <= 0 at t={t:.6g}")
    if lam <= 0.0:
        raise RhsDomainError(f"lambda={lam:.6e} <= 0 at t={t:.6g}")
    mu = math.sqrt(musq)
    inv_lam = 1.0 / lam
    # dlambda = 3*y2 - 2*lambda^2*x1/mu ( = 3*v2/(lam*mu) - 2*lam^2*u1/mu^2 )
    dlam = 3.0 * v2 / (lam * mu) - 2.0 * lam * lam * u1 / musq
    return (
        dlam,
        -3.0 * v0 * inv_lam,
        (2.0 * lam * lam - 3.0 * v1) * inv_lam,
        -3.0 * v2 * inv_lam,
        4.0 * lam * u0,
        4.0 * lam * u1,
        4.0 * lam * u2 - 3.0 * u2 * inv_lam,
    )


def volume_slope_raw(t, y) -> float:
    """d/dt of the orbit volume density lambda*mu^2 (zero = mean-curvature-zero orbit)."""
    lam, u0, u1, u2, v0, v1, v2 = y
    musq = -u0 * u0 + u1 * u1 + u2 * u2
    if musq <= 0.0:
        raise NonPositiveMuSq(f"inner(u,u)={musq:.6e} <= 0 at t={t:.6g}")
    mu = math.sqrt(musq)
    return 3.0 * mu * v2 / lam + 2.0 * lam * lam * u1


def conserved_raw(y) -> tuple:
    lam, u0, u1, u2, v0, v1, v2 = y
    musq = -u0 * u0 + u1 * u1 + u2 * u2
    vsq = -v0 * v0 + v1 * v1 + v2 * v2
    uv = -u0 * v0 + u1 * v1 + u2 * v2
    lam2 = lam * lam
    return (uv, lam2 * musq - u2 * u2, lam2 * musq - vsq, v1 - musq)


# ---------------------------------------------------------------------------
# Public dataclass-level API


def derived_frame(s: BackgroundState) -> DerivedFrame:
    """Reconstruct (mu, w, x, y) from the state; w is the first column of the
    SO(1,3) frame matrix, x = u/mu, y = v/(lambda*mu)."""
    f = _frame_raw(s.as_vector())
    return DerivedFrame(
        mu=f[0],
        w=MinkowskiVec3(f[1], f[2], f[3]),
        x=MinkowskiVec3(f[4], f[5], f[6]),
        y=MinkowskiVec3(f[7], f[8], f[9]),
    )


def conserved(s: BackgroundState) -> ConservedQuadruple:
    i1, i2, i3, i4 = conserved_raw(s.as_vector())
    return ConservedQuadruple(i1, i2, i3, i4)


def nk_rhs(s: BackgroundState) -> BackgroundDerivative:
    d = nk_rhs_raw(s.t, s.as_vector())
    return BackgroundDerivative(
        dlam=d[0],
        du=MinkowskiVec3(d[1], d[2], d[3]),
        dv=MinkowskiVec3(d[4], d[5], d[6]),
    )


def volume_slope(s: BackgroundState) -> float:
    return volume_slope_raw(s.t, s.as_vector())


def w_frame_rhs(s: BackgroundState) -> MinkowskiVec3:
    """Evolution of the frame column w predicted by the structure equations:

        dw0 = -2*(lam*x0/mu)*w1 - 3*(y0/lam)*w2
        dw1 = -2*(lam*x1/mu)*w1 - 3*(mu/lam^2)*w2
        dw2 =  2*(lam^2/mu)*w1  - 3*(y2/lam)*w2
    """
    fr = derived_frame(s)
    lam, mu = s.lam, fr.mu
    w1, w2 = fr.w.a1, fr.w.a2
    return MinkowskiVec3(
        -2.0 * lam * fr.x.a0 / mu * w1 - 3.0 * fr.y.a0 / lam * w2,
        -2.0 * lam * fr.x.a1 / mu * w1 - 3.0 * mu / (lam * lam) * w2,
        2.0 * lam * lam / mu * w1 - 3.0 * fr.y.a2 / lam * w2,
    )


def w_ode_residual(s: BackgroundState, dw_numeric: MinkowskiVec3) -> float:
    """Max-norm gap between a finite-difference derivative of the algebraic w
    and the w-evolution predicted by the structure equations. Cross-checks
    that the algebraic frame and the ODE-evolved frame agree along solutions."""
    pred = w_frame_rhs(s)
    return max(
        abs(dw_numeric.a0 - pred.a0),
        abs(dw_numeric.a1 - pred.a1),
        abs(dw_numeric.a2 - pred.a2),
    )


def printed_lambda_constraint_residual(s: BackgroundState) -> float:
    """Residual of the redundant lambda-e­quation in its printed form,

        lam*|u|^2 * d(lam^2)/dt - d(u2^2)/dt + lam^4*u1 .

    Diagnostic only: the printed form is inconsistent with the closed-form
    solutions (nonzero residual), so it is never used for evolution; the
    verification suite records its size along oracle curves.
    """
    d = nk_rhs(s)
    musq = minkowski_inner(s.u, s.u)
    dlam2 = 2.0 * s.lam * d.dlam
    du2sq = 2.0 * s.u.a2 * d.du.a2
    return s.lam * musq * dlam2 - du2sq + s.lam**4 * s.u.a1


def domain_flags(s: BackgroundState) -> dict:
    """Validity indicators for the open domain of the background system."""
    musq = minkowski_inner(s.u, s.u)
    orient = s.u.a1 * s.v.a2 - s.u.a2 * s.v.a1
    return {
        "lambda_positive": s.lam > 0.0,
        "musq_positive": musq > 0.0,
        "u2_negative": s.u.a2 < 0.0,
        "orientation_positive": orient > 0.0,
    }
