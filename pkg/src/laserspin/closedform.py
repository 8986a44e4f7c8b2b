"""Closed-form propagators, monodromy and period.

Circular polarization (eps = 1/sqrt 2) has the Euler-form propagator

    U(0, t) = exp(-i w' t s3/2) V exp(-i R t s3/2) V^dagger,
    V = exp(-i beta s1/2),  tan(beta) = Delta = -1/(kappa eta) + eta^2 gamma_z,
    R = eta kappa w' sqrt(1 + Delta^2),

implemented as written.  Whether it solves the Schroedinger equation built
from the printed Larmor vector is checked separately in
:func:`laserspin.analysis.reconcile_conventions`.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .elliptic import DomainError, complete_k, sncndn
from .model import CIRCULAR_EPSILON, IDENTITY, Convention, PhysicalConfig
from .propagator import su2_exp


def _sigma_exp(axis: int, angle) -> np.ndarray:
    """exp(-i angle sigma_axis / 2) (batched over ``angle``)."""
    angle = np.asarray(angle, dtype=float)
    vec = np.zeros(angle.shape + (3,))
    vec[..., axis] = 0.5 * angle
    return su2_exp(vec)


def _as_circular(config: PhysicalConfig) -> PhysicalConfig:
    if config.is_circular:
        return config
    warnings.warn(
        f"epsilon={config.epsilon} is not circular; using epsilon=1/sqrt(2)",
        stacklevel=3,
    )
    return config.replace(epsilon=CIRCULAR_EPSILON)


def _reduced_rabi(config: PhysicalConfig) -> float:
    """eta kappa sqrt(1 + Delta^2) without forming Delta (finite at eta -> 0)."""
    ek = config.eta * config.kappa
    ek_delta = -1.0 + config.kappa * config.eta**3 * config.derived.gamma_z
    return math.copysign(math.hypot(ek, ek_delta), config.kappa)


@dataclass(frozen=True)
class CircularSolution:
    delta: float
    beta: float
    rabi: float
    config: PhysicalConfig

    @property
    def omega_prime(self) -> float:
        return self.config.derived.omega_prime


def circular_params(config: PhysicalConfig) -> CircularSolution:
    config = _as_circular(config)
    if config.eta == 0.0:
        raise DomainError("Delta diverges at eta = 0; use quantum_phase for the limit")
    delta = -1.0 / (config.kappa * config.eta) + config.eta**2 * config.derived.gamma_z
    rabi = _reduced_rabi(config) * config.derived.omega_prime
    return CircularSolution(delta=delta, beta=math.atan(delta), rabi=rabi, config=config)


def euler_propagator(omega_prime: float, beta: float, rabi: float, t) -> np.ndarray:
    """The four-factor Euler product for explicit (w', beta, R)."""
    t = np.asarray(t, dtype=float)
    v = _sigma_exp(0, beta)
    v_dag = v.conj().T
    return _sigma_exp(2, omega_prime * t) @ v @ _sigma_exp(2, rabi * t) @ v_dag


def circular_propagator(config: PhysicalConfig, t) -> np.ndarray:
    sol = circular_params(config)
    return euler_propagator(sol.omega_prime, sol.beta, sol.rabi, t)


@dataclass(frozen=True)
class Monodromy:
    """One-period monodromy of the circular Euler-form propagator.

    ``matrix`` satisfies U(t + 2 pi/w') = e^{i pi} U(t) matrix exactly, which
    forces M_D = exp(-i phase s3).  ``printed`` keeps the opposite-sign
    exponent exp(+i phase s3) as typeset; it equals ``matrix`` conjugate
    transposed.
    """

    matrix: np.ndarray
    diagonal: np.ndarray
    phase: float
    conjugator: np.ndarray
    printed: np.ndarray

    @property
    def phase_mod_2pi(self) -> float:
        return self.phase % (2.0 * math.pi)

    @property
    def eigenphases(self) -> np.ndarray:
        """Eigenphases of ``matrix`` in ascending order."""
        return np.sort(np.angle(np.linalg.eigvals(self.matrix)))


def monodromy(config: PhysicalConfig) -> Monodromy:
    sol = circular_params(config)
    phase = math.pi * _reduced_rabi(sol.config)
    v = _sigma_exp(0, sol.beta)
    diag = _sigma_exp(2, 2.0 * phase)
    return Monodromy(
        matrix=v @ diag @ v.conj().T,
        diagonal=diag,
        phase=phase,
        conjugator=v,
        printed=v @ diag.conj().T @ v.conj().T,
    )


def quantum_phase(config: PhysicalConfig) -> float:
    """pi eta kappa sqrt(1 + Delta^2), unwrapped; tends to pi (sign kappa)
    as eta -> 0 and takes that value at eta = 0."""
    return math.pi * _reduced_rabi(_as_circular(config))


def linear_propagator(config: PhysicalConfig, t) -> np.ndarray:
    """Exact propagator for eps in {0, 1}, where H(t) stays on one axis.

    eps = 0: H = -(kappa/2) Omega_1 s1 and int_0^u sn dn = 1 - cn(u), so
    U = exp(+i (kappa eta/2)(1 - cn) s1).  eps = 1: the s2 analogue with
    int_0^u cn dn = sn(u).
    """
    d = config.derived
    t = np.asarray(t, dtype=float)
    sn, cn, _ = sncndn(d.omega_prime * t, d.mu2)
    half = 0.5 * config.kappa * config.eta
    vec = np.zeros(t.shape + (3,))
    if config.epsilon == 0.0:
        vec[..., 0] = -half * (1.0 - cn)
    elif config.epsilon == 1.0:
        vec[..., 1] = -half * sn
    else:
        raise DomainError(f"linear_propagator needs epsilon in {{0, 1}}, got {config.epsilon}")
    return su2_exp(vec)


def rotating_frame_propagator(
    config: PhysicalConfig, t, convention: Convention = IDENTITY
) -> np.ndarray:
    """Exact solution of i dU/dt = (h . s) U for circular polarization.

    Here h is the generator of :func:`laserspin.model.generator_vector` under
    ``convention``.  The transverse field rotates at w', so in the co-rotating
    frame the generator is constant: U = R(t) exp(-i (H0 + sw' s3/2) t) with
    R(t) = exp(+i s w' t s3/2) and s = sign(Omega_1) sign(Omega_2).
    """
    if not config.is_circular:
        raise DomainError("rotating_frame_propagator needs circular polarization")
    d = config.derived
    t = np.asarray(t, dtype=float)
    q = -0.5 * config.kappa * convention.rabi_factor * convention.generator_sign
    amp = config.eta * d.omega_prime * config.epsilon
    freq = d.omega_prime if config.omega3_uses_omega_prime else config.omega
    omega3 = -(config.eta**2) * config.epsilon * d.epsilon_prime * freq
    s = convention.sign_omega1 * convention.sign_omega2
    frame = _sigma_exp(2, -s * d.omega_prime * t)
    gen = np.array([0.0, q * convention.sign_omega2 * amp, q * omega3 + 0.5 * s * d.omega_prime])
    body = su2_exp(t[..., None] * gen)
    return frame @ body


@dataclass(frozen=True)
class PeriodEstimate:
    exact: float
    expansion2: float


def period(config: PhysicalConfig, gamma_power: int = 1) -> PeriodEstimate:
    """Exact period 4K(mu^2)/w' and its second-order small-eta expansion.

    The expansion coefficient is (1/4)(1 - 2 eps^2) gamma_z^p eta^2; p = 1
    matches the modulus mu^2 = (1 - 2 eps^2) eta^2 gamma_z, p = 2 is the
    printed variant.
    """
    if gamma_power not in (1, 2):
        raise ValueError("gamma_power must be 1 or 2")
    d = config.derived
    exact = 4.0 * complete_k(d.mu2) / d.omega_prime
    tilt = 0.0 if config.is_circular else 1.0 - 2.0 * config.epsilon**2
    coeff = 0.25 * tilt * d.gamma_z**gamma_power
    expansion = (2.0 * math.pi / d.omega_prime) * (1.0 + coeff * config.eta**2)
    return PeriodEstimate(exact=exact, expansion2=expansion)
