import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nkshoot.errors import NonPositiveMuSq
from nkshoot.mink_core import (
    BackgroundState,
    MinkowskiVec3,
    conserved,
    derived_frame,
    domain_flags,
    minkowski_inner,
    nk_rhs,
    printed_lambda_constraint_residual,
    volume_slope,
    w_frame_rhs,
    w_ode_residual,
)
from nkshoot.nk_background import HalfFamily, taylor_psi_b, taylor_state, w_series_smallt
from nkshoot.oracles import HOMOGENEOUS_S3S3, SINE_CONE, homogeneous_s3s3_state, sine_cone_state

from frozen_values import HOMOGENEOUS_T_STAR

R3 = math.sqrt(3.0)


def test_inner_product_signature():
    e0 = MinkowskiVec3(1.0, 0.0, 0.0)
    e1 = MinkowskiVec3(0.0, 1.0, 0.0)
    e2 = MinkowskiVec3(0.0, 0.0, 1.0)
    assert minkowski_inner(e0, e0) == -1.0
    assert minkowski_inner(e1, e1) == 1.0
    assert minkowski_inner(e2, e2) == 1.0
    assert minkowski_inner(e0, e1) == 0.0


finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(finite, finite, finite, finite, finite, finite, finite)
def test_inner_product_symmetric_bilinear(a0, a1, a2, b0, b1, b2, c):
    a = MinkowskiVec3(a0, a1, a2)
    b = MinkowskiVec3(b0, b1, b2)
    assert minkowski_inner(a, b) == minkowski_inner(b, a)
    lhs = minkowski_inner(a.scale(c), b)
    rhs = c * minkowski_inner(a, b)
    assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(rhs))


def test_timelike_normalization_of_leading_frame_column():
    # Leading small-t behavior of the frame column w for the S^3 family:
    # the 1/t^2 and order-one parts of <w, w> cancel to exactly -1.
    b = 0.8
    for t in (1e-3, 2e-3):
        w0 = b / (3.0 * t) - (16.0 * b**2 - 29.0) / (15.0 * b) * t
        w1 = t
        w2 = -b / (3.0 * t) + (32.0 * b**2 - 13.0) / (30.0 * b) * t
        w = MinkowskiVec3(w0, w1, w2)
        gap = minkowski_inner(w, w) + 1.0
        assert abs(gap) <= 5.0 * t**2


def test_derived_frame_homogeneous_at_maximal_orbit():
    s = homogeneous_s3s3_state(HOMOGENEOUS_T_STAR)
    fr = derived_frame(s)
    assert fr.mu == pytest.approx(2.0 * R3 / 3.0, abs=1e-12)
    assert fr.w.a0 == pytest.approx(2.0 * R3 / 3.0, abs=1e-12)
    assert fr.w.a1 == pytest.approx(R3 / 3.0, abs=1e-12)
    assert fr.w.a2 == pytest.approx(0.0, abs=1e-12)


def test_derived_frame_sine_cone_w_constant():
    for t in (0.3, 0.9, 1.5, 2.4):
        fr = derived_frame(sine_cone_state(t))
        assert fr.w.a0 == pytest.approx(1.0, abs=1e-12)
        assert abs(fr.w.a1) <= 1e-12 and abs(fr.w.a2) <= 1e-12


def test_derived_frame_taylor_launch_w1_linear():
    for t in (5e-3, 1e-2):
        s = taylor_state(HalfFamily("b", 0.6), t, which="launch")
        fr = derived_frame(s)
        assert abs(fr.w.a1 / t - 1.0) <= 5.0 * t**2


def test_derived_frame_orthonormality_on_oracles():
    for curve in (SINE_CONE, HOMOGENEOUS_S3S3):
        for t in curve.grid(60):
            s = curve.evaluator(t)
            fr = derived_frame(s)
            assert abs(minkowski_inner(fr.w, fr.w) + 1.0) <= 1e-8
            assert abs(minkowski_inner(fr.w, fr.x)) <= 1e-8
            assert abs(minkowski_inner(fr.w, fr.y)) <= 1e-8
            assert abs(fr.x.a2 + s.lam) <= 1e-8


def test_derived_frame_rejects_spacelike_u():
    s = BackgroundState(0.5, 1.0, MinkowskiVec3(2.0, 0.1, -0.1), MinkowskiVec3(0.0, 1.0, 0.0))
    with pytest.raises(NonPositiveMuSq):
        derived_frame(s)


def test_conserved_vanish_on_oracles():
    for curve in (SINE_CONE, HOMOGENEOUS_S3S3):
        for t in curve.grid(60):
            assert conserved(curve.evaluator(t)).max_abs <= 1e-10


def test_conserved_perturbed_state():
    s = BackgroundState(0.0, 1.0, MinkowskiVec3(0.0, 0.0, -1.0), MinkowskiVec3(0.0, 2.0, 0.0))
    q = conserved(s)
    assert q.i4 == pytest.approx(1.0)  # v1 - |u|^2 = 2 - 1
    assert q.i1 == 0.0


def test_rhs_sine_cone_lambda_slope():
    d = nk_rhs(sine_cone_state(math.pi / 4.0))
    assert d.dlam == pytest.approx(math.sqrt(2.0) / 2.0, abs=1e-12)
    # dlambda = cos t along the whole curve
    for t in (0.4, 1.0, 2.0):
        assert nk_rhs(sine_cone_state(t)).dlam == pytest.approx(math.cos(t), abs=1e-12)


def test_rhs_homogeneous_lambda_constant():
    for t in (0.2, 0.7, HOMOGENEOUS_T_STAR):
        assert abs(nk_rhs(homogeneous_s3s3_state(t)).dlam) <= 1e-12


def test_rhs_taylor_curve_lambda_slope():
    b = 0.6
    for t in (5e-3, 1e-2):
        d = nk_rhs(taylor_psi_b(b, t))
        expected = -1.8 * (b * b - 1.0) / b * t
        assert abs(d.dlam - expected) <= 20.0 * t**3


def test_rhs_preserves_conserved_to_first_order():
    # Directional derivative of each conserved quantity along the flow,
    # by finite differences on oracle states.
    h = 1e-6
    for curve in (SINE_CONE, HOMOGENEOUS_S3S3):
        for t in curve.grid(20):
            s = curve.evaluator(t)
            d = nk_rhs(s).as_vector()
            y = s.as_vector()
            plus = BackgroundState.from_vector(t, [a + h * b for a, b in zip(y, d)])
            minus = BackgroundState.from_vector(t, [a - h * b for a, b in zip(y, d)])
            for qp, qm in zip(conserved(plus).as_tuple(), conserved(minus).as_tuple()):
                assert abs(qp - qm) / (2.0 * h) <= 1e-6


def test_volume_slope_homogeneous():
    assert abs(volume_slope(homogeneous_s3s3_state(HOMOGENEOUS_T_STAR))) <= 1e-12
    quarter = math.pi * R3 / 12.0
    assert volume_slope(homogeneous_s3s3_state(quarter)) == pytest.approx(4.0 * R3 / 3.0, abs=1e-12)


def test_volume_slope_sine_cone():
    assert abs(volume_slope(sine_cone_state(math.pi / 2.0))) <= 1e-12
    assert volume_slope(sine_cone_state(1.0)) > 0.0
    assert volume_slope(sine_cone_state(2.0)) < 0.0


def _fd_w(evaluator, t, h=1e-4):
    wm = derived_frame(evaluator(t - h)).w
    wp = derived_frame(evaluator(t + h)).w
    return MinkowskiVec3(
        (wp.a0 - wm.a0) / (2.0 * h), (wp.a1 - wm.a1) / (2.0 * h), (wp.a2 - wm.a2) / (2.0 * h)
    )


def test_w_evolution_matches_algebraic_frame_homogeneous():
    for t in (0.3, 0.6, 0.85):
        dw = _fd_w(homogeneous_s3s3_state, t)
        assert w_ode_residual(homogeneous_s3s3_state(t), dw) <= 1e-6


def test_w_evolution_sine_cone_trivial():
    for t in (0.5, 1.2):
        dw = _fd_w(sine_cone_state, t)
        s = sine_cone_state(t)
        assert w_ode_residual(s, dw) <= 1e-6
        pred = w_frame_rhs(s)
        assert max(abs(pred.a0), abs(pred.a1), abs(pred.a2)) <= 1e-12


def test_w_evolution_on_integrated_half():
    from nkshoot.nk_background import integrate_half

    # tol 1e-12 keeps dense-output noise well below the finite-difference
    # signal at h=1e-4
    traj = integrate_half(HalfFamily("b", 1.0), tol=1e-12, validate=False).trajectory
    for t in (0.3, 0.5, 0.8):
        evaluator = lambda tt: BackgroundState.from_vector(tt, traj.eval(tt))
        dw = _fd_w(evaluator, t, 1e-4)
        assert w_ode_residual(evaluator(t), dw) <= 1e-6


def test_quoted_lambda_equation_is_inconsistent():
    # The redundant quoted lambda-equation fails on the exact curves
    # (recorded diagnostic; evolution never uses it).
    worst = max(
        abs(printed_lambda_constraint_residual(homogeneous_s3s3_state(t))) for t in (0.3, 0.6, 0.9)
    )
    assert worst > 1e-3


def test_domain_flags_on_valid_state():
    flags = domain_flags(homogeneous_s3s3_state(0.5))
    assert all(flags.values())
