import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from magcap import dynamics as dy
from magcap import geometry as geo
from magcap._rk import DormandPrince
from magcap.errors import IntegrationError, WeakField

systems = st.tuples(st.sampled_from([-1.0, -0.3, 0.0, 0.5, 1.0]),
                    st.sampled_from([-2.0, -0.5, 0.5, 1.0, 3.0]))


@st.composite
def states(draw, kappa=None):
    k = kappa if kappa is not None else 0.0
    lim = 1.0 if k >= 0 else 1.0 / math.sqrt(-k)
    r = draw(st.floats(0, 0.9)) * lim
    a = draw(st.floats(0, 2 * math.pi))
    u, w = draw(st.floats(-2, 2)), draw(st.floats(-2, 2))
    return dy.PhaseState(r * math.cos(a), r * math.sin(a), u, w)


# -- forms ----------------------------------------------------------------------

@settings(max_examples=100)
@given(systems, st.data())
def test_defining_equation(ks, data):
    k, s = ks
    sys = dy.MagneticSystem(k, s)
    x = data.draw(states(k))
    X = dy.lorentz_rhs(sys, x)
    dE = dy.energy_gradient(sys, x)
    W = dy.twisted_form_matrix(sys, x)
    assert np.allclose(X @ W + dE, 0, atol=1e-12 * max(1, np.abs(dE).max()))
    assert np.allclose(X, dy.hamiltonian_vector_field(sys, x), atol=1e-12)


@given(systems, st.data())
def test_twisted_form_is_antisymmetric_and_nondegenerate(ks, data):
    k, s = ks
    sys = dy.MagneticSystem(k, s)
    W = dy.twisted_form_matrix(sys, data.draw(states(k)))
    assert np.allclose(W, -W.T, atol=0)
    # Pfaffian of omega is -rho^4 for every s
    assert abs(np.linalg.det(W)) > 0


def test_energy_gradient_matches_finite_differences():
    sys = dy.MagneticSystem(-0.7, 1.3)
    x = dy.PhaseState(0.4, -0.9, 0.8, 1.1)
    y = x.as_array()
    h = 1e-6
    fd = [(dy.kinetic_energy(sys, y + h * e) - dy.kinetic_energy(sys, y - h * e)) / (2 * h)
          for e in np.eye(4)]
    assert np.allclose(fd, dy.energy_gradient(sys, x), atol=1e-9)


def test_lorentz_force_turns_left_for_positive_s():
    sys = dy.MagneticSystem(0.0, 1.0)
    X = dy.lorentz_rhs(sys, dy.PhaseState(0, 0, 1, 0))
    assert X[3] > 0 and X[2] == 0


def test_energy_is_kinetic():
    sys = dy.MagneticSystem(1.0, 1.0)
    assert dy.kinetic_energy(sys, dy.PhaseState(2, 0, 1, 1)) == pytest.approx(0.25)


# -- reparametrization ----------------------------------------------------------

@given(systems, st.floats(0, 3))
def test_h_and_inverse(ks, E):
    k, s = ks
    sys = dy.MagneticSystem(k, s)
    if not sys.strong(E):
        with pytest.raises(WeakField):
            dy.h_of_energy(sys, E)
        return
    H = float(dy.h_of_energy(sys, E))
    assert float(dy.energy_of_h(sys, H)) == pytest.approx(E, rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("k,s,E", [(1.0, 1.0, 0.5), (0.0, 2.0, 1.0), (-1.0, 1.0, 0.3)])
def test_h_derivative_is_period(k, s, E):
    sys = dy.MagneticSystem(k, s)
    e = 1e-6
    dh = (float(dy.h_of_energy(sys, E + e)) - float(dy.h_of_energy(sys, E - e))) / (2 * e)
    assert dh == pytest.approx(float(dy.period_of_energy(sys, E)), rel=1e-8)


def test_h_closed_forms():
    # flat: h = 2 pi E / |s|
    assert float(dy.h_of_energy(dy.MagneticSystem(0.0, -2.0), 1.5)) == pytest.approx(1.5 * math.pi)
    sys = dy.MagneticSystem(1.0, 1.0)
    assert float(dy.h_of_energy(sys, 0.5)) == pytest.approx(2 * math.pi * (math.sqrt(2) - 1))


def test_weak_field_messages():
    with pytest.raises(WeakField, match="s\\^2"):
        dy.period_of_energy(dy.MagneticSystem(-1.0, 1.0), 0.5)
    with pytest.raises(WeakField):
        dy.h_of_energy(dy.MagneticSystem(1.0, 0.0), 0.1)


# -- integrator -----------------------------------------------------------------

def test_dormand_prince_harmonic_oscillator():
    y0 = np.array([[1.0, 0.0], [0.0, 2.0]])  # two oscillators in one batch
    stepper = DormandPrince(lambda y: np.stack([y[1], -y[0]]), y0, 0.0, 10.0, 1e-12)
    segs = list(stepper.segments())
    t = np.linspace(segs[3].t0, segs[3].t1, 5)
    exact = np.stack([np.cos(t), -np.sin(t)])
    assert np.allclose(segs[3](t)[:, 0, :], exact, atol=1e-11)
    final = segs[-1](10.0)
    assert np.allclose(final[:, 0], [math.cos(10), -math.sin(10)], atol=1e-10)
    assert np.allclose(final[:, 1], [2 * math.sin(10), 2 * math.cos(10)], atol=1e-10)
    assert stepper.stats.rejected_steps < stepper.stats.steps


def test_dormand_prince_rejects_bad_tolerance():
    with pytest.raises(ValueError):
        DormandPrince(lambda y: y, np.ones(1), 0.0, 1.0, 1e-2)
    with pytest.raises(ValueError):
        DormandPrince(lambda y: y, np.ones(1), 0.0, 1.0, 1e-15)


@pytest.mark.parametrize("s", [1.0, -2.0])
def test_flat_flow_matches_exact_circle(s):
    sys = dy.MagneticSystem(0.0, s)
    z0, v0 = 0.3 - 0.2j, 0.8 + 0.5j
    st0 = dy.PhaseState(z0.real, z0.imag, v0.real, v0.imag)
    ts = np.linspace(0, 7.0, 15)
    traj = dy.integrate(sys, st0, dy.KINETIC, 7.0, 1e-12, t_eval=ts)
    v = v0 * np.exp(1j * s * ts)
    z = z0 + v0 * (np.exp(1j * s * ts) - 1) / (1j * s)
    assert np.allclose(traj.states[:, 0] + 1j * traj.states[:, 1], z, atol=1e-9)
    assert np.allclose(traj.states[:, 2] + 1j * traj.states[:, 3], v, atol=1e-9)


@pytest.mark.parametrize("k", [-1.0, 0.0, 1.0])
def test_zero_field_flow_is_geodesic(k):
    sys = dy.MagneticSystem(k, 0.0)
    p, w = geo.ChartPoint(0.2, 0.3), geo.TangentVec(0.6, -0.4)
    end = dy.integrate(sys, dy.PhaseState(p.x, p.y, w.a, w.b), dy.KINETIC, 1.0, 1e-12).final
    q = geo.exp_map(k, p, w)
    assert abs(complex(end.x, end.y) - q.z) < 1e-9


def test_energy_conserved_and_stats():
    sys = dy.MagneticSystem(1.0, 0.5)
    st0 = dy.PhaseState(0.1, 0.0, 0.0, 1.5)
    traj = dy.integrate(sys, st0, dy.KINETIC, 30.0, 1e-10)
    assert traj.stats.max_energy_drift < 1e-8
    assert traj.stats.steps > 0
    assert np.allclose(traj.energies(sys), dy.kinetic_energy(sys, st0), rtol=1e-8)


def test_sphere_orbit_crosses_charts_consistently():
    sys = dy.MagneticSystem(1.0, 0.3)
    # fast orbit, nearly a great circle, passes the far hemisphere
    st0 = dy.PhaseState(0.0, 0.0, 2.0, 0.0)
    T = float(dy.period_of_energy(sys, 2.0))
    traj = dy.integrate(sys, st0, dy.KINETIC, T, 1e-11, n_samples=301)
    assert traj.stats.chart_swaps >= 2
    assert set(traj.charts) == {0, 1}
    main = traj.in_chart(sys, geo.Chart.MAIN)
    assert np.allclose(main[-1], st0.as_array(), atol=1e-8)
    assert traj.stats.max_energy_drift < 1e-8


def test_leaving_hyperbolic_disc_raises():
    sys = dy.MagneticSystem(-1.0, 0.5)
    with pytest.raises(IntegrationError) as exc:
        dy.integrate(sys, dy.PhaseState(0, 0, 2.0, 0), dy.KINETIC, 100.0)
    assert exc.value.t > 0


def test_integrate_argument_checks():
    sys = dy.MagneticSystem(0.0, 1.0)
    st0 = dy.PhaseState(0, 0, 1, 0)
    with pytest.raises(ValueError):
        dy.integrate(sys, st0, dy.KINETIC, -1.0)
    with pytest.raises(ValueError):
        dy.integrate(sys, st0, dy.KINETIC, 1.0, t_eval=[0.5, 0.2])
    with pytest.raises(WeakField):
        dy.integrate(dy.MagneticSystem(0.0, 0.0), st0, dy.CIRCLE_ACTION, 1.0)


def test_zero_velocity_is_fixed_point():
    sys = dy.MagneticSystem(1.0, 1.0)
    traj = dy.integrate(sys, dy.PhaseState(0.4, 0.1, 0.0, 0.0), dy.KINETIC, 5.0, n_samples=7)
    assert np.all(traj.states == traj.states[0])


# -- circle action --------------------------------------------------------------

@settings(max_examples=15, deadline=None)
@given(systems, st.floats(0.05, 1.0), st.floats(0, 2 * math.pi))
def test_circle_action_has_period_one(ks, E, ang):
    k, s = ks
    sys = dy.MagneticSystem(k, s)
    if not sys.strong(E):
        return
    v = math.sqrt(2 * E)
    st0 = dy.PhaseState(0.0, 0.0, v * math.cos(ang), v * math.sin(ang))
    back = dy.circle_action_flow(sys, st0, 1.0)
    assert dy.phase_distance(sys, st0, back) < 1e-7


def test_circle_action_field_is_scaled_kinetic_field():
    sys = dy.MagneticSystem(-0.5, 1.0)
    x = dy.PhaseState(0.3, 0.1, 0.5, -0.2)
    T = float(dy.period_of_energy(sys, dy.kinetic_energy(sys, x)))
    assert np.allclose(dy.hamiltonian_vector_field(sys, x, dy.CIRCLE_ACTION),
                       T * dy.lorentz_rhs(sys, x), atol=1e-12)
    rhs = dy.flow_rhs(sys, dy.CIRCLE_ACTION)
    assert np.allclose(rhs(x.as_array()), T * dy.lorentz_rhs(sys, x), atol=1e-14)
