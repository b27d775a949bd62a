import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from magcap import capacity as cp
from magcap import dynamics as dy
from magcap.errors import CertificationError, WeakField
from magcap.verify import naive_capacity


@pytest.mark.parametrize("k,s,r,exact", [
    (0.0, 1.0, 1.0, math.pi),
    (-1.0, 1.0, 0.6, 0.4 * math.pi),
    (1.0, 1.0, 1.0, 2 * math.pi * (math.sqrt(2) - 1)),
    (0.0, -2.0, 1.0, math.pi / 2),
])
def test_capacity_values(k, s, r, exact):
    res = cp.capacity_value(k, s, r)
    assert res.value == pytest.approx(exact, rel=1e-14)
    assert res.stable_branch
    assert set(res.to_dict()) == {"value", "kappa", "s", "r", "stable_branch"}


@given(st.floats(-5, 5), st.floats(0.05, 4), st.floats(0.05, 3))
def test_stable_formula_matches_extended_precision(k, s, r):
    if not cp.strong_field_check(k, s, r):
        with pytest.raises(WeakField):
            cp.capacity_value(k, s, r)
        return
    exact = float(naive_capacity(k, s, r))
    assert cp.capacity_value(k, s, r).value == pytest.approx(exact, rel=1e-14)


@given(st.floats(-1, 1), st.floats(0.2, 3), st.floats(0.1, 1.0), st.floats(0.1, 1.0))
def test_monotonicity(k, s, r1, r2):
    if k < 0:
        r1, r2 = r1 * s, r2 * s  # stay in the strong-field region
    lo, hi = sorted((r1, r2))
    if hi - lo < 1e-6:
        return
    assert cp.capacity_value(k, s, lo).value < cp.capacity_value(k, s, hi).value
    assert cp.capacity_value(k, s, hi).value > cp.capacity_value(k, s + 0.5, hi).value


def test_sign_of_s_is_irrelevant():
    assert cp.capacity_value(1.0, -1.0, 1.0).value == cp.capacity_value(1.0, 1.0, 1.0).value


def test_capacity_equals_h_at_boundary_energy():
    for k, s, r in ((1.0, 1.0, 1.0), (-1.0, 2.0, 1.5), (0.3, 0.5, 2.0)):
        h = float(dy.h_of_energy(dy.MagneticSystem(k, s), r * r / 2))
        assert cp.capacity_value(k, s, r).value == pytest.approx(h, rel=1e-15)


def test_weak_field_and_invalid_radius():
    with pytest.raises(WeakField, match="s\\^2"):
        cp.capacity_value(-1.0, 1.0, 1.0)
    with pytest.raises(WeakField):
        cp.capacity_value(1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        cp.capacity_value(1.0, 1.0, 0.0)
    assert cp.strong_field_check(-1.0, 1.0, 0.999)
    assert not cp.strong_field_check(-1.0, 1.0, 1.0)


# -- profile --------------------------------------------------------------------

def test_profile_shape():
    f = cp.build_profile(3.0, 0.2, 0.1, 0.2)
    x = np.linspace(0, 3.0, 3001)
    fp = f.derivative(x)
    assert np.all(fp >= 0) and np.all(fp <= 0.8 + 1e-15)
    assert np.all(fp[x <= 0.1] == 0) and np.all(fp[x >= 2.9] == 0)
    assert np.allclose(fp[(x > 0.3) & (x < 2.7)], 0.8)
    # closed-form f integrates f'
    from scipy.integrate import cumulative_trapezoid
    num = cumulative_trapezoid(fp, x, initial=0)
    assert np.allclose(f(x), num, atol=1e-6)
    assert float(f(3.0)) == pytest.approx(f.max_value, rel=1e-14)
    assert float(f(0.0)) == 0


def test_profile_derivative_is_continuous():
    f = cp.build_profile(2.0, 0.3, 0.2, 0.1)
    for knot in f._knots:
        assert abs(float(f.derivative(knot + 1e-9)) - float(f.derivative(knot - 1e-9))) < 1e-6


def test_profile_validation():
    with pytest.raises(ValueError):
        cp.build_profile(1.0, 0.0, 0.1, 0.1)
    with pytest.raises(ValueError):
        cp.build_profile(1.0, 0.5, 0.3, 0.3)
    with pytest.raises(ValueError):
        cp.build_profile(1.0, 0.5, -0.1, 0.1)


def test_certification_gap_formula():
    f = cp.build_profile(2.5, 0.1, 0.05, 0.07)
    assert cp.certification_gap(2.5, 0.1, 0.05, 0.07) == pytest.approx(2.5 - f.max_value, rel=1e-14)


def test_certificate_flat_case():
    cert = cp.capacity_certificate(0.0, 1.0, 1.0, 0.2, 0.1, 0.1, n_levels=4)
    assert cert.value == pytest.approx(math.pi)
    assert cert.min_period_measured >= 1.25 - 1e-9
    assert cert.certified_lower_bound == pytest.approx(0.8 * (math.pi - 0.3), rel=1e-14)
    assert cert.gap == pytest.approx(cert.value - cert.certified_lower_bound)
    d = cert.to_dict()
    for key in ("delta", "eta", "ramp_w", "certified_lower_bound", "min_period_measured",
                "levels_checked"):
        assert key in d


def test_admissibility_catches_wrong_maximum():
    sys = dy.MagneticSystem(1.0, 1.0)
    with pytest.raises(ValueError):
        cp.verify_admissibility(sys, 1.0, cp.build_profile(2.0, 0.2, 0.1, 0.1))


def test_admissibility_catches_wrong_periods(monkeypatch):
    import magcap.capacity as mod

    real = mod.first_return

    def slow(*a, **kw):
        rep = real(*a, **kw)
        return type(rep)(rep.period * 1.01, rep.closure_error, rep.converged, rep.candidates_checked)

    monkeypatch.setattr(mod, "first_return", slow)
    with pytest.raises(CertificationError):
        cp.capacity_certificate(0.0, 1.0, 1.0, 0.2, 0.1, 0.1, n_levels=4)
