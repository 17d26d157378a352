from __future__ import annotations

import math
from fractions import Fraction as Fr

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import lambertw as scipy_lambertw

from dsegrowth.ode import (
    QED_2LOOP,
    QED_4LOOP,
    DomainError,
    NoBracket,
    NoSignChange,
    OdeSpec,
    SingularPoint,
    asymptotic_series,
    emit_field,
    field_svg,
    integrate,
    integrate_system,
    lambert_family,
    lambert_family_derivative,
    lambertw,
    nullcline,
    qed_p_root,
    relation_residual,
    rhs_single,
    rhs_system,
    separatrix_search,
    zero_slope_crossings,
)
from dsegrowth.recursions import second_recursion_single


def toy(s, m=1.0, P=(0.0, 1.0)):
    return OdeSpec(s=s, m=m, P=list(P))


def test_rhs_single_examples():
    assert rhs_single(0.75, 0.5, toy(2)) == 0
    for x in (0.1, 0.4, 0.9):
        assert rhs_single(x, x, toy(1)) == pytest.approx(1.0)
    assert rhs_single(0.5, 1e-8, toy(2)) < -1e6
    with pytest.raises(SingularPoint):
        rhs_single(0.5, 0.0, toy(2))
    with pytest.raises(SingularPoint):
        rhs_single(0.0, 0.3, toy(2))


def test_rhs_system_examples():
    zero = OdeSpec(mode="system2", P_pair=([0.0], [0.0]))
    # along gamma_+ = 0 the first component has no source
    assert rhs_system(0.3, 0.0, 0.2, zero)[0] == 0
    phi4 = OdeSpec(mode="system2")
    x, g = 0.3, 0.2
    dp, dm = rhs_system(x, g, g, phi4)
    beta = x * (g + 2 * g)
    assert dp == pytest.approx((g - x - g * g) / beta)
    assert dm == pytest.approx((g - x * x + g * g) / beta)
    swapped = OdeSpec(mode="system2", s_pair=(2, -1), P_pair=([0.0, 0.0, 1.0], [0.0, 1.0]))
    sp, sm = rhs_system(x, g, g, swapped)
    assert sm == pytest.approx((g - x - g * g) / (x * (2 * g + g)))
    assert sp == pytest.approx((g - x * x + g * g) / (x * (2 * g + g)))
    with pytest.raises(SingularPoint):
        rhs_system(0.3, 0.2, -0.1, phi4)


def test_spec_validation():
    with pytest.raises(ValueError):
        OdeSpec(s=0)
    with pytest.raises(ValueError):
        OdeSpec(mode="triple")


def test_s1_exact_solution():
    tr = integrate(toy(1), 0.1, 0.1, 1.0)
    assert tr.termination == "reached-right-edge"
    assert abs(tr.g[-1] - 1.0) < 1e-6
    assert np.max(np.abs(tr.g - tr.x)) < 1e-6
    assert np.all(np.diff(tr.x) > 0)


def test_below_nullcline_dies():
    spec = toy(2)
    x0 = 0.5
    g0 = 0.5 * nullcline(spec, x0)
    tr = integrate(spec, x0, g0, 1.0)
    assert tr.termination == "died"
    assert tr.x[-1] < 1.0
    assert tr.g[-1] < 1e-6


def test_other_terminations():
    spec = toy(2)
    assert integrate(spec, 0.1, 0.5, 1.0, window=(0.0, 0.6)).termination == "left-window"
    assert integrate(spec, 0.1, 0.11, 1.0, tau_max=1e-3).termination == "step-underflow"
    assert integrate(spec, 0.1, 0.0, 1.0).termination == "died"
    with pytest.raises(ValueError):
        integrate(spec, 0.0, 0.1, 1.0)


@pytest.mark.parametrize("spec,start", [
    (toy(1), (0.1, 0.3)), (toy(2), (0.05, 0.2)), (toy(2), (0.5, 0.1)), (toy(3), (0.1, 0.4)),
    (toy(-2), (0.1, 0.2)), (OdeSpec(m=2, s=1, P=list(QED_4LOOP)), (0.1, 0.05)),
])
def test_relation_residual_along_trajectories(spec, start):
    tr = integrate(spec, start[0], start[1], 1.0)
    assert tr.max_residual < 1e-6


def test_relation_residual_definition():
    spec = toy(2)
    x, g = 0.3, 0.4
    assert relation_residual(x, g, rhs_single(x, g, spec), spec) == pytest.approx(0.0, abs=1e-15)


def test_lambertw_matches_scipy():
    assert lambertw(-1 / math.e) == -1.0
    for z in (-0.3, -1e-3, 0.0, 1e-5, 0.5, 1.0, 3.0, 100.0, 1e8):
        assert lambertw(z) == pytest.approx(float(scipy_lambertw(z).real), rel=1e-13, abs=1e-15)
    with pytest.raises(DomainError):
        lambertw(-1.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=-1 / math.e, max_value=1e6, allow_nan=False))
def test_lambertw_inverse(z):
    w = lambertw(z)
    assert w * math.exp(w) == pytest.approx(z, rel=1e-12, abs=1e-13)


@pytest.mark.parametrize("C", [1.0, 0.5, -0.2])
def test_lambert_family_solves_s1(C):
    spec = toy(1)
    for x in np.linspace(0.05, 1.0, 20):
        g = lambert_family(x, C)
        if abs(x * g) < 1e-12:
            continue
        assert abs(lambert_family_derivative(x, C) - rhs_single(x, g, spec)) < 1e-8


def test_nullcline_examples():
    assert nullcline(toy(2), 0.75) == pytest.approx(0.5)
    assert nullcline(toy(2), 0.0) == 0
    # s < 0: -g^2 + g - x = 0 has the double root 1/2 at x = 1/4
    assert nullcline(toy(-2), 0.25) == pytest.approx(0.5)
    assert rhs_single(0.25, 0.5, toy(-2)) == pytest.approx(0.0)
    with pytest.raises(DomainError):
        nullcline(toy(-2), 0.3)
    assert nullcline(toy(-2), 0.2, "upper") > nullcline(toy(-2), 0.2)


def test_nullcline_sign_flip():
    spec = toy(2)
    for x in np.linspace(0.02, 1.0, 50):
        y = nullcline(spec, float(x))
        assert rhs_single(float(x), y * 0.99, spec) < 0 < rhs_single(float(x), y * 1.01, spec)


def test_asymptotic_series_matches_recursion():
    c = asymptotic_series(toy(2), 6)
    assert c == list(second_recursion_single([1], 2, 6).coeffs)
    assert c[1:6] == [1, 1, 4, 27, 248]
    assert asymptotic_series(toy(1), 4) == [0, 1, 0, 0, 0]
    with pytest.raises(ValueError):
        asymptotic_series(OdeSpec(P=[1.0, 1.0]), 3)


def test_asymptotic_series_with_m():
    c = asymptotic_series(OdeSpec(m=2, s=1, P=list(QED_2LOOP)), 3)
    assert c[1] == Fr(1, 6)
    # m c_2 = p_2 + (|s| - 1) c_1^2
    assert c[2] == Fr(1, 8)


def test_separatrix_s2_seed():
    spec = toy(2)
    x0 = 0.01
    g0 = separatrix_search(spec, x0, 0.5)
    series = x0 + x0**2 + 4 * x0**3 + 27 * x0**4
    assert abs(g0 - series) < 10 * x0**5 * 248
    # the alternating-sign variant is not the asymptotic expansion of this equation
    alternating = x0 - x0**2 + 4 * x0**3 - 27 * x0**4
    assert abs(g0 - alternating) > 10 * x0**5 * 248


def test_separatrix_s1_is_exact_solution():
    assert abs(separatrix_search(toy(1), 0.01, 0.5) - 0.01) < 1e-8


def test_separatrix_no_bracket():
    spec = toy(2)
    below = nullcline(spec, 0.01)
    with pytest.raises(NoBracket):
        separatrix_search(spec, 0.01, 0.5, bracket=(0.1 * below, 0.5 * below))


def test_qed_roots():
    assert abs(qed_p_root(QED_4LOOP) - 0.992) < 1e-3
    with pytest.raises(NoSignChange):
        qed_p_root(QED_2LOOP, 0, 10)
    with pytest.raises(NoSignChange):
        qed_p_root([0, 1])


def test_field_zero_slope_on_nullcline():
    spec = OdeSpec(s=2, xrange=(0.0, 1.0), yrange=(0.0, 1.0))
    data = emit_field(spec, (30, 30))
    cells = zero_slope_crossings(data)
    assert cells
    dy = 1 / 29
    for x, lo, hi in cells:
        y = nullcline(spec, x)
        assert lo - dy <= y <= hi + dy


def test_field_masks_singular_row():
    data = emit_field(toy(2), (10, 10), (0.05, 1.0), (0.0, 1.0))
    assert data.mask[0, :].all()
    assert not data.mask[1:, :].any()
    assert np.allclose(data.dx[1:] ** 2 + data.dy[1:] ** 2, 1.0)
    assert "nan nan" in data.to_dat()
    with pytest.raises(ValueError):
        emit_field(toy(2), (1, 5))


def test_negative_s_field_renders():
    spec = OdeSpec(s=-2, xrange=(0.0, 1.0), yrange=(-1.0, 1.0))
    data = emit_field(spec, (20, 20))
    svg = field_svg(data, spec, [integrate(spec, 0.1, 0.2, 1.0, window=(-1.0, 1.0))])
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    assert svg == field_svg(data, spec, [integrate(spec, 0.1, 0.2, 1.0, window=(-1.0, 1.0))])


def test_system_integration_terminations():
    spec = OdeSpec(mode="system2")
    xs, ys, term = integrate_system(spec, 0.05, (0.05, 0.0025), 0.5)
    assert term == "died"
    assert abs(ys[-1][0] + 2 * ys[-1][1]) < 1e-6
    xs, ys, term = integrate_system(spec, 0.05, (0.2, 0.3), 0.5)
    assert term == "reached-right-edge" and xs[-1] == pytest.approx(0.5)
    assert np.all(np.diff(xs) > 0)
