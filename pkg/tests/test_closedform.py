import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from laserspin import (
    IntegratorSpec,
    PhysicalConfig,
    circular_params,
    circular_propagator,
    complete_k,
    evolve_unitary,
    linear_propagator,
    monodromy,
    period,
    quantum_phase,
    unitary_trajectory,
)
from laserspin.elliptic import DomainError
from laserspin.model import CIRCULAR_EPSILON
from laserspin.propagator import su2_exp

EYE = np.eye(2)
C = CIRCULAR_EPSILON


def unitary_defect(u):
    return np.linalg.norm(u.conj().T @ u - EYE)


def circ(eta=0.5, kappa=1.0, beta_z=0.0, omega=1.0):
    return PhysicalConfig(eta, C, omega=omega, beta_z=beta_z, kappa=kappa)


def test_params_substitution():
    sol = circular_params(circ())
    assert sol.delta == pytest.approx(-1.75, abs=1e-15)
    assert sol.rabi == pytest.approx(0.5 * 1.0 * math.sqrt(1 + 3.0625), rel=1e-15)
    assert math.tan(sol.beta) == pytest.approx(sol.delta, rel=1e-15)


def test_params_small_eta_limit():
    sol = circular_params(circ(eta=1e-8))
    assert sol.rabi == pytest.approx(sol.omega_prime, rel=1e-6)


def test_params_reject_free_field():
    with pytest.raises(DomainError):
        circular_params(circ(eta=0.0))


def test_params_force_circular_with_warning():
    with pytest.warns(UserWarning, match="circular"):
        sol = circular_params(PhysicalConfig(0.5, 0.2))
    assert sol.config.is_circular


def test_propagator_identity_at_zero():
    np.testing.assert_allclose(circular_propagator(circ(), 0.0), EYE, atol=1e-16)


def test_propagator_zero_delta_is_sigma3_rotation():
    # Delta = -1/(kappa eta) + eta^2 gamma_z vanishes for kappa = 1/(eta^3 gamma_z)
    cfg = circ(eta=0.5, kappa=8.0)
    sol = circular_params(cfg)
    assert sol.delta == 0.0 and sol.beta == 0.0
    for t in (0.4, 3.0):
        want = su2_exp(np.array([0.0, 0.0, 0.5 * (sol.omega_prime + sol.rabi) * t]))
        np.testing.assert_allclose(circular_propagator(cfg, t), want, atol=1e-15)
    mono = monodromy(cfg)
    np.testing.assert_allclose(mono.matrix, mono.diagonal, atol=1e-16)


def test_one_drive_period_gives_minus_monodromy():
    cfg = circ(eta=0.35, kappa=1.2, beta_z=0.1)
    T = 2 * math.pi / cfg.derived.omega_prime
    mono = monodromy(cfg)
    got = circular_propagator(cfg, T)
    assert np.linalg.norm(got - np.exp(1j * math.pi) * mono.matrix) <= 1e-12


def test_floquet_relation_random_times():
    cfg = circ(eta=0.45, kappa=0.7, beta_z=-0.2, omega=1.3)
    T = 2 * math.pi / cfg.derived.omega_prime
    mono = monodromy(cfg)
    rng = np.random.default_rng(3)
    for t in rng.uniform(0, 10 * T, 20):
        lhs = circular_propagator(cfg, t + T)
        rhs = np.exp(1j * math.pi) * circular_propagator(cfg, t) @ mono.matrix
        assert np.linalg.norm(lhs - rhs) <= 1e-12


def test_printed_sign_is_the_inverse():
    mono = monodromy(circ(eta=0.3))
    np.testing.assert_allclose(mono.printed, mono.matrix.conj().T, atol=1e-15)
    np.testing.assert_allclose(mono.printed @ mono.matrix, EYE, atol=1e-15)


def test_monodromy_structure():
    mono = monodromy(circ(eta=0.3, kappa=1.1))
    assert mono.phase > math.pi  # exercises the wrap
    v = mono.conjugator
    np.testing.assert_allclose(mono.matrix, v @ mono.diagonal @ v.conj().T, atol=1e-12)
    # eigenphases are reported wrapped to (-pi, pi]; compare on the circle
    got = np.exp(1j * mono.eigenphases)
    want = np.exp(1j * np.array([-mono.phase, mono.phase]))
    assert min(np.abs(got - want).max(), np.abs(got - want[::-1]).max()) <= 1e-12


def test_free_field_limit():
    cfg = circ(eta=1e-8)
    mono = monodromy(cfg)
    assert abs(mono.phase - math.pi) <= 1e-6
    np.testing.assert_allclose(mono.diagonal, -EYE, atol=1e-6)
    assert np.linalg.norm(np.exp(1j * math.pi) * mono.matrix - EYE) <= 1e-4


def test_quantum_phase_values():
    assert quantum_phase(circ(eta=0.0)) == math.pi
    assert quantum_phase(circ()) == pytest.approx(
        math.pi * 0.5 * math.sqrt(1 + 1.75**2), rel=1e-15
    )


def test_quantum_phase_continuous_at_zero():
    values = [quantum_phase(circ(eta=e)) for e in (1e-4, 1e-6, 1e-8)]
    diffs = [abs(v - math.pi) for v in values]
    assert diffs[0] > diffs[1] > diffs[2] and diffs[2] < 1e-12


def test_quantum_phase_table_consistent_with_eigenphases():
    etas = np.linspace(0.05, 0.7, 14)
    phases = []
    for eta in etas:
        cfg = circ(eta=eta)
        p = quantum_phase(cfg)
        assert math.isfinite(p)
        mono = monodromy(cfg)
        eig = np.linalg.eigvals(mono.matrix)
        want = np.exp(1j * np.array([p, -p]))
        assert min(np.abs(eig - want).max(), np.abs(eig - want[::-1]).max()) <= 1e-12
        phases.append(p)
    # table only: with kappa = gamma_z = 1 the phase first rises above pi,
    # peaks near eta = 0.35 and falls below pi by eta = 0.55
    assert max(phases) > math.pi > phases[-1]


def test_random_closed_forms_unitary():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(1000):
        cfg = PhysicalConfig(
            rng.uniform(0.01, 0.7), C, omega=rng.uniform(0.5, 2),
            beta_z=rng.uniform(-0.5, 0.5), kappa=rng.uniform(0.2, 3.0),
        )
        t = rng.uniform(0, 50)
        worst = max(
            worst,
            unitary_defect(circular_propagator(cfg, t)),
            unitary_defect(monodromy(cfg).matrix),
            unitary_defect(linear_propagator(cfg.replace(epsilon=0.0), t)),
        )
    assert worst <= 1e-12


def test_linear_propagator_endpoints():
    cfg = PhysicalConfig(0.4, 0.0, beta_z=0.2)
    np.testing.assert_array_equal(linear_propagator(cfg, 0.0), EYE)
    T = 4 * complete_k(cfg.derived.mu2) / cfg.derived.omega_prime
    assert np.linalg.norm(linear_propagator(cfg, T) - EYE) <= 1e-14


@pytest.mark.parametrize("eps", [0.0, 1.0])
@pytest.mark.parametrize("eta", [0.1, 0.3, 0.5])
def test_linear_propagator_matches_numerics(eta, eps):
    cfg = PhysicalConfig(eta, eps, beta_z=0.25)
    t = np.linspace(0, 10 * cfg.drive_period, 101)
    num = unitary_trajectory(cfg, t, IntegratorSpec("magnus4", 512))
    ref = linear_propagator(cfg, t)
    assert np.linalg.norm(num - ref, axis=(1, 2)).max() <= 1e-9


def test_linear_propagator_rejects_elliptic():
    with pytest.raises(DomainError):
        linear_propagator(PhysicalConfig(0.3, 0.5), 1.0)


def test_period_circular_is_unmodified():
    for eta in (0.0, 0.2, 0.6):
        cfg = PhysicalConfig(eta, C, beta_z=0.2)
        assert period(cfg).exact == 2 * math.pi / cfg.derived.omega_prime


def test_period_free_field():
    cfg = PhysicalConfig(0.0, 0.3, omega=2.0)
    est = period(cfg)
    assert est.exact == est.expansion2 == math.pi


def test_period_expansion_residual_is_quartic():
    etas = [0.1, 0.2, 0.4]
    resid = []
    for eta in etas:
        est = period(PhysicalConfig(eta, 0.0))
        resid.append(est.exact - est.expansion2)
    slope = np.polyfit(np.log(etas), np.log(resid), 1)[0]
    assert slope == pytest.approx(4.0, abs=0.15)
    # leading coefficient of the K series: 2 pi * 9/64 eta^4
    assert resid[0] / 0.1**4 == pytest.approx(2 * math.pi * 9 / 64, rel=2e-2)


def test_period_gamma_power_variants():
    cfg = PhysicalConfig(0.3, 0.0, beta_z=0.2)
    g = cfg.derived.gamma_z
    base = 2 * math.pi / cfg.derived.omega_prime
    assert period(cfg, 1).expansion2 == pytest.approx(base * (1 + 0.25 * g * 0.09))
    assert period(cfg, 2).expansion2 == pytest.approx(base * (1 + 0.25 * g**2 * 0.09))
    with pytest.raises(ValueError):
        period(cfg, 3)


@given(st.floats(0.0, 1.0), st.floats(0.0, 0.7))
def test_period_finite_positive_everywhere(eps, eta):
    est = period(PhysicalConfig(eta, eps))
    assert math.isfinite(est.exact) and est.exact > 0
