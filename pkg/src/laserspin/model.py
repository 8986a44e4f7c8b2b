"""Physical parameters, the Larmor vector and the spin Hamiltonian.

Units: hbar = 1, the coupling ``kappa`` is a dimensionless input and time is
in units of 1/omega when ``omega = 1``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .elliptic import DomainError, complete_k, sncndn

ETA_WARN = 0.7
CIRCULAR_EPSILON = 1.0 / math.sqrt(2.0)

PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)


class ConfigError(ValueError):
    """Invalid physical configuration."""


@dataclass(frozen=True)
class Convention:
    """Sign and scale bookkeeping applied on top of the printed Larmor vector.

    ``generator_sign`` flips the sign of the Schroedinger generator,
    ``rabi_factor`` rescales the whole coupling.
    """

    sign_omega1: int = 1
    sign_omega2: int = 1
    generator_sign: int = 1
    rabi_factor: float = 1.0

    @property
    def id(self) -> str:
        s = lambda v: "+" if v > 0 else "-"
        return (
            f"o1{s(self.sign_omega1)}o2{s(self.sign_omega2)}"
            f"g{s(self.generator_sign)}r{self.rabi_factor:g}"
        )

    @classmethod
    def from_id(cls, text: str) -> "Convention":
        try:
            sign = {"+": 1, "-": -1}
            return cls(
                sign[text[2]], sign[text[5]], sign[text[7]], float(text[9:])
            )
        except (IndexError, KeyError, ValueError):
            raise ValueError(f"malformed convention id {text!r}") from None


IDENTITY = Convention()


@dataclass(frozen=True)
class DerivedQuantities:
    gamma_z: float
    omega_prime: float
    epsilon_prime: float
    mu2: float


@dataclass(frozen=True)
class PhysicalConfig:
    eta: float
    epsilon: float
    omega: float = 1.0
    beta_z: float = 0.0
    kappa: float = 1.0
    # Sensitivity toggle: evaluate Omega_3 with omega' instead of omega.
    omega3_uses_omega_prime: bool = False
    derived: DerivedQuantities = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("eta", "epsilon", "omega", "beta_z", "kappa"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{name} must be a real number, got {value!r}")
            if not math.isfinite(value):
                raise ConfigError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.eta < 0.0:
            raise ConfigError(f"eta must be >= 0, got {self.eta}")
        if self.eta >= 1.0:
            raise ConfigError(
                f"eta={self.eta} outside the semi-relativistic regime (eta < 1)"
            )
        if self.eta > ETA_WARN:
            warnings.warn(
                f"eta={self.eta} > {ETA_WARN}: small-eta expansions lose accuracy",
                stacklevel=3,
            )
        if not 0.0 <= self.epsilon <= 1.0:
            raise ConfigError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if self.omega <= 0.0:
            raise ConfigError(f"omega must be > 0, got {self.omega}")
        if not -1.0 < self.beta_z < 1.0:
            raise ConfigError(f"beta_z must lie in (-1, 1), got {self.beta_z}")
        if self.kappa == 0.0:
            raise ConfigError("kappa must be nonzero")

        gamma_z = 1.0 / (1.0 - self.beta_z)
        # Polarizations within 1e-12 of circular are snapped so mu^2 == 0 exactly.
        tilt = 0.0 if self.is_circular else 1.0 - 2.0 * self.epsilon**2
        mu2 = tilt * self.eta**2 * gamma_z
        if abs(mu2) >= 1.0:
            raise ConfigError(f"elliptic parameter mu^2={mu2} outside (-1, 1)")
        object.__setattr__(
            self,
            "derived",
            DerivedQuantities(
                gamma_z=gamma_z,
                omega_prime=self.omega / gamma_z,
                epsilon_prime=math.sqrt(1.0 - self.epsilon**2),
                mu2=mu2,
            ),
        )

    def replace(self, **changes) -> "PhysicalConfig":
        params = {
            "eta": self.eta,
            "epsilon": self.epsilon,
            "omega": self.omega,
            "beta_z": self.beta_z,
            "kappa": self.kappa,
            "omega3_uses_omega_prime": self.omega3_uses_omega_prime,
        }
        params.update(changes)
        return PhysicalConfig(**params)

    @property
    def is_circular(self) -> bool:
        return math.isclose(self.epsilon, CIRCULAR_EPSILON, rel_tol=0, abs_tol=1e-12)

    @property
    def drive_period(self) -> float:
        """Period 4K(mu^2)/omega' of the Larmor vector."""
        return 4.0 * complete_k(self.derived.mu2) / self.derived.omega_prime


@dataclass(frozen=True)
class LarmorVector:
    omega1: float
    omega2: float
    omega3: float
    t: float

    def as_array(self) -> np.ndarray:
        return np.array([self.omega1, self.omega2, self.omega3])


def derive(config: PhysicalConfig) -> DerivedQuantities:
    return config.derived


def larmor_components(config: PhysicalConfig, t) -> np.ndarray:
    """Larmor vector at the times ``t``; shape ``t.shape + (3,)``."""
    d = config.derived
    t = np.asarray(t, dtype=float)
    sn, cn, dn = sncndn(d.omega_prime * t, d.mu2)
    amp = config.eta * d.omega_prime
    out = np.empty(t.shape + (3,))
    out[..., 0] = amp * d.epsilon_prime * sn * dn
    out[..., 1] = amp * config.epsilon * cn * dn
    freq = d.omega_prime if config.omega3_uses_omega_prime else config.omega
    out[..., 2] = -(config.eta**2) * config.epsilon * d.epsilon_prime * freq
    return out


def larmor(config: PhysicalConfig, t: float) -> LarmorVector:
    t = float(t)
    if not math.isfinite(t):
        raise DomainError(f"non-finite time {t!r}")
    o1, o2, o3 = larmor_components(config, t)
    return LarmorVector(float(o1), float(o2), float(o3), t)


def generator_vector(config: PhysicalConfig, t, convention: Convention = IDENTITY):
    """Pauli coefficients ``h`` of the generator, ``i dU/dt = (h . sigma) U``.

    With the identity convention ``h = -(kappa/2) Omega``.
    """
    omega = larmor_components(config, t)
    scale = -0.5 * config.kappa * convention.rabi_factor * convention.generator_sign
    omega[..., 0] *= convention.sign_omega1
    omega[..., 1] *= convention.sign_omega2
    return scale * omega


def pauli_matrix(vec) -> np.ndarray:
    """``vec . sigma`` for a 3-vector (or a stack of them)."""
    vec = np.asarray(vec, dtype=float)
    return np.tensordot(vec, PAULI, axes=([-1], [0]))


def hamiltonian(config: PhysicalConfig, t: float) -> np.ndarray:
    """H(t) = -(kappa/2) Omega(t) . sigma, hbar = 1."""
    v = larmor(config, t).as_array()
    return pauli_matrix(-0.5 * config.kappa * v)
