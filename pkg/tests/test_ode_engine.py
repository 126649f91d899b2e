import math

import numpy as np
import pytest

from nkshoot.errors import (
    ComplexSpectrum,
    NoEventFound,
    RhsDomainError,
    StepSizeUnderflow,
    ValidationFailed,
)
from nkshoot.mink_core import nk_rhs_raw, volume_slope_raw
from nkshoot.nk_background import HalfFamily, launch_series
from nkshoot.ode_engine import (
    eval_series,
    frozen_singular_spectrum,
    integrate,
    singular_launch,
)
from nkshoot.oracles import homogeneous_s3s3_state

from frozen_values import HOMOGENEOUS_T_STAR


def _exp_rhs(t, y):
    return (y[0],)


def test_exponential_endpoint():
    traj = integrate(_exp_rhs, (1.0,), 0.0, 1.0, tol=1e-10)
    assert abs(traj.y_end[0] - math.e) <= 1e-9


def test_harmonic_oscillator_event():
    traj = integrate(
        lambda t, y: (y[1], -y[0]),
        (1.0, 0.0),
        0.0,
        3.0,
        tol=1e-10,
        events=[("zero", lambda t, y: y[0])],
        stop_event="zero",
    )
    assert abs(traj.t_end - math.pi / 2.0) <= 1e-9


def test_volume_slope_event_on_homogeneous_launch():
    y0 = eval_series(launch_series(HalfFamily("b", 1.0)), 1e-2)
    traj = integrate(
        nk_rhs_raw, y0, 1e-2, 4.0, tol=1e-10,
        events=[("max_volume", volume_slope_raw)],
        stop_event="max_volume",
    )
    assert abs(traj.t_end - HOMOGENEOUS_T_STAR) <= 1e-6


def test_integrator_order():
    def endpoint_error(tol):
        return abs(integrate(_exp_rhs, (1.0,), 0.0, 1.0, tol=tol).y_end[0] - math.e)

    # Error scales like tol^(4/5): dividing tol by 32 must gain at least 16x.
    assert endpoint_error(1e-7) / endpoint_error(1e-7 / 32.0) >= 16.0


def test_local_error_is_mixed_absolute_relative():
    # Large-amplitude exponential: pure absolute control would stall.
    traj = integrate(_exp_rhs, (1e6,), 0.0, 1.0, tol=1e-10)
    assert abs(traj.y_end[0] - 1e6 * math.e) / (1e6 * math.e) <= 1e-9


def test_dense_output_reproduces_nodes_exactly():
    traj = integrate(lambda t, y: (math.cos(t),), (0.0,), 0.0, 2.0, tol=1e-10)
    for t, y in zip(traj.ts, traj.ys):
        assert traj.eval(t) == y


def test_dense_output_accuracy_between_nodes():
    traj = integrate(lambda t, y: (math.cos(t),), (0.0,), 0.0, 2.0, tol=1e-10)
    for t in (0.1234, 0.77777, 1.5, 1.99):
        assert abs(traj.eval(t)[0] - math.sin(t)) <= 1e-9


def test_event_location_idempotent():
    g = lambda t, y: y[0]
    traj = integrate(
        lambda t, y: (y[1], -y[0]), (1.0, 0.0), 0.0, 7.0, tol=1e-10, events=[("zero", g)]
    )
    assert len(traj.events) == 2  # pi/2 and 3 pi/2
    for ev in traj.events:
        t_again = None
        # first located root matches the stored first event
        if ev is traj.events[0]:
            t_again = traj.locate_event("zero", g)
            assert abs(t_again - ev.t) <= 1e-14
        assert abs(g(ev.t, ev.y)) <= 1e-10


def test_event_time_inside_bracketing_step():
    traj = integrate(
        lambda t, y: (y[1], -y[0]), (1.0, 0.0), 0.0, 2.0, tol=1e-8,
        events=[("zero", lambda t, y: y[0])],
    )
    (ev,) = traj.events
    import bisect
    i = bisect.bisect_right(traj.ts, ev.t) - 1
    assert traj.ts[i] <= ev.t <= traj.ts[min(i + 1, len(traj.ts) - 1)]


def test_no_event_found():
    with pytest.raises(NoEventFound):
        integrate(
            _exp_rhs, (1.0,), 0.0, 1.0, tol=1e-8,
            events=[("never", lambda t, y: 1.0 + y[0])],
            stop_event="never",
        )


def test_step_size_underflow_at_blowup():
    with pytest.raises(StepSizeUnderflow):
        integrate(lambda t, y: (y[0] * y[0],), (1.0,), 0.0, 2.0, tol=1e-10)


def test_rhs_domain_error_propagates():
    def rhs(t, y):
        if y[0] > 2.0:
            raise RhsDomainError("left the domain")
        return (y[0],)

    with pytest.raises(RhsDomainError):
        integrate(rhs, (1.0,), 0.0, 2.0, tol=1e-8)
    traj = integrate(rhs, (1.0,), 0.0, 2.0, tol=1e-8, halt_on_domain_error=True)
    assert traj.meta["terminated"] == "domain_error"
    assert traj.t_end < 2.0


# ---------------------------------------------------------------------------
# Frozen singular spectrum


def _matrix_s2(a, lam):
    r3 = math.sqrt(3.0)
    return [
        [-1.0, 0.0, -3.0 * r3 * a, 0.0],
        [-lam / 2.0, -3.0, 0.0, 0.0],
        [-r3 / (3.0 * a), 0.0, -3.0, 0.0],
        [0.0, -2.0 * r3 / (9.0 * a), 0.0, -6.0],
    ]


def _matrix_s3(b, lam):
    return [
        [-2.0, lam / (4.0 * b), 0.0, 0.0],
        [0.0, -1.0, 0.0, 4.0 * b * b],
        [-1.0 / (2.0 * b), 0.0, -5.0, 0.0],
        [0.0, 1.0 / (2.0 * b * b), 0.0, -2.0],
    ]


@pytest.mark.parametrize("lam", [1.0, 5.0, 8.0])
@pytest.mark.parametrize("p", [0.5, 1.0, 2.0])
def test_singular_spectrum_s2(lam, p):
    spec = frozen_singular_spectrum(_matrix_s2(p, lam))
    assert np.allclose(spec.eigenvalues, (-6.0, -4.0, -3.0, 0.0), atol=1e-9)
    assert spec.negative_count == 3
    r3 = math.sqrt(3.0)
    expected = np.array([6.0, -lam, -2.0 * r3 / (3.0 * p), r3 * lam / (27.0 * p)])
    got = np.array(spec.kernel_vector)
    got = got * (expected[0] / got[0])
    assert np.allclose(got, expected, rtol=1e-9, atol=1e-12)
    residual = np.linalg.norm(np.array(_matrix_s2(p, lam)) @ np.array(spec.kernel_vector))
    assert residual <= 1e-10 * np.linalg.norm(spec.kernel_vector)


@pytest.mark.parametrize("lam", [1.0, 5.0, 8.0])
@pytest.mark.parametrize("p", [0.5, 1.0, 2.0])
def test_singular_spectrum_s3(lam, p):
    spec = frozen_singular_spectrum(_matrix_s3(p, lam))
    assert np.allclose(spec.eigenvalues, (-5.0, -3.0, -2.0, 0.0), atol=1e-9)
    assert spec.negative_count == 3
    expected = np.array([lam, 8.0 * p, -lam / (10.0 * p), 2.0 / p])
    got = np.array(spec.kernel_vector)
    got = got * (expected[0] / got[0])
    assert np.allclose(got, expected, rtol=1e-9, atol=1e-12)


def test_singular_spectrum_identity_has_no_kernel():
    spec = frozen_singular_spectrum(np.eye(4))
    assert spec.kernel_vector is None
    assert spec.eigenvalues == (1.0, 1.0, 1.0, 1.0)
    assert spec.negative_count == 0


def test_singular_spectrum_rejects_complex():
    with pytest.raises(ComplexSpectrum):
        frozen_singular_spectrum([[0.0, -1.0], [1.0, 0.0]])


# ---------------------------------------------------------------------------
# Singular launch


def test_launch_matches_homogeneous_closed_form():
    series = launch_series(HalfFamily("b", 1.0))
    y = singular_launch(series, 1e-2)
    exact = homogeneous_s3s3_state(1e-2).as_vector()
    assert max(abs(a - b) for a, b in zip(y, exact)) <= 1e-5


def test_launch_constant_series_exact():
    series = [[(0, 0.7)]]
    assert singular_launch(series, 1e-3) == (0.7,)


def test_launch_validation_passes_for_healthy_series():
    series = launch_series(HalfFamily("b", 0.7))
    y, cert = singular_launch(series, 1e-2, validate=True, rhs=nk_rhs_raw)
    assert cert.passed
    assert y == eval_series(series, 1e-2)


def test_launch_validation_rejects_corrupted_coefficient():
    series = [list(comp) for comp in launch_series(HalfFamily("b", 1.0))]
    # +1 on the t^4 coefficient of the v1 component
    series[5] = [(p, c + (1.0 if p == 4 else 0.0)) for p, c in series[5]]
    with pytest.raises(ValidationFailed):
        singular_launch(series, 5e-2, validate=True, rhs=nk_rhs_raw)
