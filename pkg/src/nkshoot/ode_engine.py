"""Adaptive ODE integration with dense output, event location, and the
singular-launch protocol for systems with a regular singular point at t=0.

The integrator is an embedded Dormand-Prince 5(4) pair with a
proportional-integral step controller and the standard quartic continuous
extension. States are plain tuples of floats: the systems integrated here
have 2..11 components and pure-Python arithmetic beats array overhead by a
wide margin at these sizes.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    ComplexSpectrum,
    NoEventFound,
    RhsDomainError,
    StepSizeUnderflow,
    ValidationFailed,
)

# Dormand-Prince 5(4) tableau.
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
# Difference between the 5th-order propagating weights and the embedded
# 4th-order weights; contracted with the stages it gives the local error.
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)
# Quartic interpolant weights: column j of row i multiplies stage i, power theta^(j+1).
_P = (
    (1.0, -8048581381.0 / 2820520608.0, 8663915743.0 / 2820520608.0, -12715105075.0 / 11282082432.0),
    (0.0, 0.0, 0.0, 0.0),
    (0.0, 131558114200.0 / 32700410799.0, -68118460800.0 / 10900136933.0, 87487479700.0 / 32700410799.0),
    (0.0, -1754552775.0 / 470086768.0, 14199869525.0 / 1410260304.0, -10690763975.0 / 1880347072.0),
    (0.0, 127303824393.0 / 49829197408.0, -318862633887.0 / 49829197408.0, 701980252875.0 / 199316789632.0),
    (0.0, -282668133.0 / 205662961.0, 2019193451.0 / 616988883.0, -1453857185.0 / 822651844.0),
    (0.0, 40617522.0 / 29380423.0, -110615467.0 / 29380423.0, 69997945.0 / 29380423.0),
)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
# PI controller exponents for a 4th-order error estimate (Gustafsson-style).
_PI_ALPHA = 0.175
_PI_BETA = 0.04

STEP_FLOOR_REL = 1e-13
EVENT_LOCATE_REL = 1e-12


@dataclass(frozen=True)
class Event:
    label: str
    t: float
    y: tuple


@dataclass(frozen=True)
class _StepInterp:
    """Dense-output data for one accepted step: y(t0 + theta*h) for theta in [0,1]."""

    t0: float
    h: float
    y0: tuple
    q: tuple  # q[i] = (c1, c2, c3, c4): coefficients of theta..theta^4 for component i

    def eval(self, t: float) -> tuple:
        theta = (t - self.t0) / self.h
        t1 = theta
        t2 = t1 * theta
        t3 = t2 * theta
        t4 = t3 * theta
        h = self.h
        return tuple(
            y0i + h * (c[0] * t1 + c[1] * t2 + c[2] * t3 + c[3] * t4)
            for y0i, c in zip(self.y0, self.q)
        )


class Trajectory:
    """Dense-output record of one adaptive integration.

    `ts`/`ys` hold the accepted nodes (strictly increasing). `eval(t)` uses
    the per-step quartic interpolants; node times are snapped to the stored
    node states so interpolation reproduces them exactly. Immutable after
    construction; safe to share between threads.
    """

    def __init__(self, ts, ys, interps, events, meta):
        self.ts: list[float] = ts
        self.ys: list[tuple] = ys
        self._interps: list[_StepInterp] = interps
        self.events: list[Event] = events
        self.meta: dict = meta

    @property
    def t0(self) -> float:
        return self.ts[0]

    @property
    def t_end(self) -> float:
        return self.ts[-1]

    @property
    def y_end(self) -> tuple:
        return self.ys[-1]

    def __len__(self) -> int:
        return len(self.ts)

    def eval(self, t: float) -> tuple:
        if not self.ts[0] <= t <= self.ts[-1]:
            raise ValueError(f"t={t!r} outside trajectory range [{self.ts[0]!r}, {self.ts[-1]!r}]")
        i = bisect_right(self.ts, t) - 1
        if i >= 0 and self.ts[i] == t:
            return self.ys[i]
        if i >= len(self._interps):
            i = len(self._interps) - 1
        return self._interps[i].eval(t)

    def eval_many(self, ts: Sequence[float]) -> list[tuple]:
        return [self.eval(t) for t in ts]

    def locate_event(self, label: str, g: Callable[[float, tuple], float]) -> float | None:
        """Re-run bisection for event `g` on the stored dense output.

        Returns the first located root (or None). Used by the idempotence
        checks; a fresh call must agree with the recorded event time.
        """
        tol_t = EVENT_LOCATE_REL * (self.ts[-1] - self.ts[0])
        g_prev = g(self.ts[0], self.ys[0])
        for i in range(1, len(self.ts)):
            g_new = g(self.ts[i], self.ys[i])
            if g_new == 0.0:
                return self.ts[i]
            if g_prev * g_new < 0.0:
                interp = self._interps[i - 1]
                return _bisect_event(g, interp, self.ts[i - 1], self.ts[i], tol_t)
            g_prev = g_new
        return None


def _bisect_event(g, interp, t_lo, t_hi, tol_t) -> float:
    g_lo = g(t_lo, interp.eval(t_lo))
    while t_hi - t_lo > tol_t:
        t_mid = 0.5 * (t_lo + t_hi)
        if t_mid == t_lo or t_mid == t_hi:
            break
        g_mid = g(t_mid, interp.eval(t_mid))
        if g_mid == 0.0:
            return t_mid
        if g_lo * g_mid < 0.0:
            t_hi = t_mid
        else:
            t_lo, g_lo = t_mid, g_mid
    return 0.5 * (t_lo + t_hi)


def _error_norm(err, y_old, y_new, tol) -> float:
    acc = 0.0
    for e, a, b in zip(err, y_old, y_new):
        sc = tol + tol * max(abs(a), abs(b))
        r = e / sc
        acc += r * r
    return math.sqrt(acc / len(err))


def _initial_step(rhs, t0, y0, f0, t1, tol) -> float:
    # Hairer-Norsett-Wanner starting step heuristic (order 5).
    sc = [tol + tol * abs(v) for v in y0]
    d0 = math.sqrt(sum((v / s) ** 2 for v, s in zip(y0, sc)) / len(y0))
    d1 = math.sqrt(sum((f / s) ** 2 for f, s in zip(f0, sc)) / len(y0))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, t1 - t0)
    y1 = [y + h0 * f for y, f in zip(y0, f0)]
    f1 = rhs(t0 + h0, tuple(y1))
    d2 = math.sqrt(sum(((g - f) / s) ** 2 for g, f, s in zip(f1, f0, sc)) / len(y0)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100.0 * h0, h1, t1 - t0)


def integrate(
    rhs: Callable[[float, tuple], tuple],
    y0: Sequence[float],
    t0: float,
    t1: float,
    tol: float = 1e-10,
    events: Sequence[tuple[str, Callable[[float, tuple], float]]] = (),
    stop_event: str | None = None,
    max_step: float | None = None,
    halt_on_domain_error: bool = False,
    halt_on_underflow: bool = False,
) -> Trajectory:
    """Integrate y' = rhs(t, y) from t0 to t1 with adaptive RK5(4).

    Local error per step is held to `tol` in a mixed absolute/relative norm.
    Event functions are evaluated on accepted steps only; each sign change is
    located by bisection on the dense interpolant to within
    ``1e-12 * (t1 - t0)``. If `stop_event` names one of the events, the
    trajectory is truncated at its first occurrence (NoEventFound if it never
    fires). Typed RhsDomainError from `rhs` propagates unless
    `halt_on_domain_error` is set, in which case the trajectory collected so
    far is returned with ``meta["terminated"] = "domain_error"``.
    """
    if not t0 < t1:
        raise ValueError(f"need t0 < t1, got [{t0}, {t1}]")
    y = tuple(float(v) for v in y0)
    f = rhs(t0, y)
    if not all(math.isfinite(v) for v in f):
        raise RhsDomainError(f"rhs not finite at t0={t0}")

    span = t1 - t0
    h_floor = STEP_FLOOR_REL * span
    tol_t_event = EVENT_LOCATE_REL * span
    h = _initial_step(rhs, t0, y, f, t1, tol)
    if max_step is not None:
        h = min(h, max_step)

    ts = [t0]
    ys = [y]
    interps: list[_StepInterp] = []
    found: list[Event] = []
    g_prev = [g(t0, y) for _, g in events]

    t = t0
    k1 = f
    err_prev = 1.0
    n_accepted = 0
    n_rejected = 0
    n_rhs = 2  # initial f + probe in _initial_step
    terminated = "t1"

    while t < t1:
        h = min(h, t1 - t)
        if h < h_floor:
            if halt_on_underflow:
                terminated = "step_underflow"
                break
            raise StepSizeUnderflow(
                f"step size {h:.3e} below floor {h_floor:.3e} at t={t:.6g}"
            )
        try:
            y2 = tuple(yi + h * (_A21 * a) for yi, a in zip(y, k1))
            k2 = rhs(t + _C2 * h, y2)
            y3 = tuple(yi + h * (_A31 * a + _A32 * b) for yi, a, b in zip(y, k1, k2))
            k3 = rhs(t + _C3 * h, y3)
            y4 = tuple(
                yi + h * (_A41 * a + _A42 * b + _A43 * c) for yi, a, b, c in zip(y, k1, k2, k3)
            )
            k4 = rhs(t + _C4 * h, y4)
            y5 = tuple(
                yi + h * (_A51 * a + _A52 * b + _A53 * c + _A54 * d)
                for yi, a, b, c, d in zip(y, k1, k2, k3, k4)
            )
            k5 = rhs(t + _C5 * h, y5)
            y6 = tuple(
                yi + h * (_A61 * a + _A62 * b + _A63 * c + _A64 * d + _A65 * e)
                for yi, a, b, c, d, e in zip(y, k1, k2, k3, k4, k5)
            )
            k6 = rhs(t + h, y6)
            y_new = tuple(
                yi + h * (_B1 * a + _B3 * c + _B4 * d + _B5 * e + _B6 * g)
                for yi, a, c, d, e, g in zip(y, k1, k3, k4, k5, k6)
            )
            k7 = rhs(t + h, y_new)
        except RhsDomainError:
            if halt_on_domain_error:
                terminated = "domain_error"
                break
            raise
        n_rhs += 6

        err = tuple(
            h * (_E1 * a + _E3 * c + _E4 * d + _E5 * e + _E6 * g + _E7 * s)
            for a, c, d, e, g, s in zip(k1, k3, k4, k5, k6, k7)
        )
        err_norm = _error_norm(err, y, y_new, tol)
        if not math.isfinite(err_norm):
            n_rejected += 1
            h *= _MIN_FACTOR
            continue

        if err_norm > 1.0:
            n_rejected += 1
            factor = max(_MIN_FACTOR, _SAFETY * err_norm ** -_PI_ALPHA)
            h *= min(1.0, factor)
            continue

        # Accepted: build dense-output coefficients from the stages.
        ks = (k1, k2, k3, k4, k5, k6, k7)
        q = tuple(
            tuple(sum(ks[i][m] * _P[i][j] for i in range(7)) for j in range(4))
            for m in range(len(y))
        )
        interp = _StepInterp(t0=t, h=h, y0=y, q=q)
        t_new = t + h

        interps.append(interp)
        ts.append(t_new)
        ys.append(y_new)
        n_accepted += 1

        stop_now = False
        if events:
            for idx, (label, g) in enumerate(events):
                g_new = g(t_new, y_new)
                gp = g_prev[idx]
                crossed = (gp is not None) and (
                    g_new == 0.0 or (gp != 0.0 and gp * g_new < 0.0)
                )
                if crossed:
                    if g_new == 0.0:
                        t_e = t_new
                    else:
                        t_e = _bisect_event(g, interp, t, t_new, tol_t_event)
                    y_e = interp.eval(t_e) if t_e != t_new else y_new
                    found.append(Event(label=label, t=t_e, y=y_e))
                    if stop_event is not None and label == stop_event:
                        ts[-1] = t_e
                        ys[-1] = y_e
                        stop_now = True
                        break
                g_prev[idx] = g_new
        if stop_now:
            terminated = "event"
            break

        t = t_new
        y = y_new
        k1 = k7  # FSAL
        if err_norm == 0.0:
            factor = _MAX_FACTOR
        else:
            factor = _SAFETY * err_norm ** -_PI_ALPHA * err_prev ** _PI_BETA
            factor = min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
        err_prev = max(err_norm, 1e-10)
        h *= factor
        if max_step is not None:
            h = min(h, max_step)

    if stop_event is not None and terminated != "event":
        raise NoEventFound(
            f"event {stop_event!r} did not occur in [{t0}, {ts[-1]}] (terminated: {terminated})"
        )

    meta = {
        "tol": tol,
        "n_accepted": n_accepted,
        "n_rejected": n_rejected,
        "n_rhs": n_rhs,
        "terminated": terminated,
    }
    return Trajectory(ts, ys, interps, found, meta)


# ---------------------------------------------------------------------------
# Frozen-coefficient spectrum of the singular term


@dataclass(frozen=True)
class SingularSpectrum:
    """Real eigen-structure of the 1/t coefficient matrix of a singular IVP."""

    dim: int
    eigenvalues: tuple
    kernel_vector: tuple | None
    negative_count: int


def frozen_singular_spectrum(a_minus1, kernel_tol: float = 1e-10) -> SingularSpectrum:
    """Eigendecomposition of the frozen singular matrix.

    The matrices arising here have real spectra; complex pairs raise
    ComplexSpectrum. When 0 is an eigenvalue the kernel vector is returned
    normalized so that its first nonzero entry is positive, with residual
    |A @ v| <= kernel_tol * |v|.
    """
    a = np.asarray(a_minus1, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    k = a.shape[0]
    scale = max(1.0, float(np.abs(a).max()))
    vals, vecs = np.linalg.eig(a)
    if np.abs(vals.imag).max() > 1e-9 * scale:
        raise ComplexSpectrum(f"complex eigenvalues: {vals}")
    order = np.argsort(vals.real)
    vals = vals.real[order]
    vecs = vecs.real[:, order]

    kernel = None
    zero_idx = [i for i, v in enumerate(vals) if abs(v) <= 1e-9 * scale]
    if zero_idx:
        v = vecs[:, zero_idx[0]]
        # Polish with one least-squares projection onto the numerical kernel.
        _, _, vt = np.linalg.svd(a)
        v = vt[-1]
        nz = np.nonzero(np.abs(v) > 1e-12)[0]
        if nz.size and v[nz[0]] < 0:
            v = -v
        res = float(np.linalg.norm(a @ v))
        if res > kernel_tol * float(np.linalg.norm(v)):
            raise ValueError(f"kernel residual {res:.3e} exceeds tolerance")
        kernel = tuple(float(x) for x in v)

    negative = int(sum(1 for v in vals if v < -1e-9 * scale))
    return SingularSpectrum(
        dim=k,
        eigenvalues=tuple(float(v) for v in vals),
        kernel_vector=kernel,
        negative_count=negative,
    )


# ---------------------------------------------------------------------------
# Singular launch: truncated power series evaluated at small eps > 0

# A component series is a sequence of (power, coefficient) pairs; a launch
# series is one component series per state-vector slot.
ComponentSeries = Sequence[tuple[int, float]]


def eval_series(series: Sequence[ComponentSeries], t: float) -> tuple:
    out = []
    for comp in series:
        acc = 0.0
        for p, c in comp:
            acc += c * t**p
        out.append(acc)
    return tuple(out)


@dataclass(frozen=True)
class LaunchCertificate:
    """Record of a two-launch validation run.

    A launch at eps and a second launch at eps/2 are integrated to a common
    checkpoint. `disc_at_eps` is the per-component gap between the series
    value at eps and the eps/2 launch integrated up to eps; `disc_at_checkpoint`
    is the gap between the two trajectories at the checkpoint. A healthy
    series launch has its gap dominated by constraint-compatible truncation
    error, which the flow damps: the checkpoint gap must be at least
    `factor_required` times smaller (components below `floor` are considered
    converged and pass unconditionally).
    """

    eps: float
    t_checkpoint: float
    disc_at_eps: tuple
    disc_at_checkpoint: tuple
    factor_required: float
    floor: tuple
    passed: bool
    failing_components: tuple = field(default_factory=tuple)

    @property
    def disc_at_eps_max(self) -> float:
        return max(self.disc_at_eps)

    @property
    def disc_at_checkpoint_max(self) -> float:
        return max(self.disc_at_checkpoint)


def singular_launch(
    series: Sequence[ComponentSeries],
    eps: float,
    validate: bool = False,
    rhs: Callable[[float, tuple], tuple] | None = None,
    t_checkpoint: float = 0.2,
    cert_tol: float = 1e-12,
    factor_required: float = 3.0,
):
    """Evaluate a truncated singular-point series at t=eps.

    With `validate` set (requires `rhs`), also integrate launches at eps and
    eps/2 to `t_checkpoint` and return ``(state, LaunchCertificate)``;
    raises ValidationFailed when the certificate fails, which indicates wrong
    series coefficients or an eps too large for the truncation order.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    y_eps = eval_series(series, eps)
    if not validate:
        return y_eps

    if rhs is None:
        raise ValueError("validate=True requires the rhs of the regular system")
    if t_checkpoint <= eps:
        raise ValueError("checkpoint must lie beyond eps")
    y_half = eval_series(series, eps / 2.0)
    traj_full = integrate(rhs, y_eps, eps, t_checkpoint, tol=cert_tol)
    traj_half = integrate(rhs, y_half, eps / 2.0, t_checkpoint, tol=cert_tol)

    at_eps = traj_half.eval(eps)
    d0 = tuple(abs(a - b) for a, b in zip(y_eps, at_eps))
    d1 = tuple(abs(a - b) for a, b in zip(traj_full.y_end, traj_half.y_end))

    # Truncation error of a healthy series is compatible with the conserved
    # structure, so the flow damps it: every component's checkpoint gap must
    # sit a factor below the worst launch-level gap. Components at the
    # integration noise floor pass unconditionally.
    d0_max = max(d0)
    floor = tuple(2e3 * cert_tol * max(1.0, abs(v)) for v in traj_full.y_end)
    failing = tuple(
        i
        for i, b in enumerate(d1)
        if b > floor[i] and b * factor_required > d0_max
    )
    cert = LaunchCertificate(
        eps=eps,
        t_checkpoint=t_checkpoint,
        disc_at_eps=d0,
        disc_at_checkpoint=d1,
        factor_required=factor_required,
        floor=floor,
        passed=not failing,
        failing_components=failing,
    )
    if failing:
        detail = ", ".join(
            f"[{i}] {d0[i]:.3e} -> {d1[i]:.3e}" for i in failing
        )
        raise ValidationFailed(
            f"launch discrepancy did not contract by {factor_required}x "
            f"from t={eps} to t={t_checkpoint}: {detail}"
        )
    return y_eps, cert
