"""Numerical time-ordered propagation of the spin equation.

Both schemes are exponential integrators: each step is a product of exact
SU(2) exponentials, so unitarity does not drift with the number of steps.

* ``midpoint``: exponential midpoint rule, order 2.
* ``magnus4``: two-exponential commutator-free Magnus scheme on the
  Gauss-Legendre nodes, order 4.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import IDENTITY, Convention, PhysicalConfig, generator_vector

_METHOD_ALIASES = {
    "midpoint": "midpoint",
    "midpoint-exponential": "midpoint",
    "magnus4": "magnus4",
    "commutator-free-magnus-4": "magnus4",
}
METHOD_ORDER = {"midpoint": 2, "magnus4": 4}

_SQRT3 = math.sqrt(3.0)
_C1 = 0.5 - _SQRT3 / 6.0
_C2 = 0.5 + _SQRT3 / 6.0
_A1 = (3.0 - 2.0 * _SQRT3) / 12.0
_A2 = (3.0 + 2.0 * _SQRT3) / 12.0

MAX_STEP_PHASE = math.pi / 8.0


class StepSizeError(ValueError):
    """Step too coarse to resolve the drive (step * omega' > pi/8)."""


class PropagationError(ArithmeticError):
    """Non-finite values appeared during integration."""


@dataclass(frozen=True)
class IntegratorSpec:
    method: str = "magnus4"
    steps_per_period: int = 256
    step: float | None = None
    target_error: float | None = None

    def __post_init__(self):
        try:
            object.__setattr__(self, "method", _METHOD_ALIASES[self.method])
        except KeyError:
            raise ValueError(
                f"unknown method {self.method!r}; expected one of {sorted(_METHOD_ALIASES)}"
            ) from None
        if self.step is not None and not self.step > 0:
            raise StepSizeError(f"step must be > 0, got {self.step}")
        if self.steps_per_period < 1:
            raise StepSizeError("steps_per_period must be >= 1")
        if self.target_error is not None and not self.target_error > 0:
            raise ValueError("target_error must be > 0")

    @property
    def order(self) -> int:
        return METHOD_ORDER[self.method]

    def step_size(self, config: PhysicalConfig) -> float:
        if self.target_error is not None:
            h = _step_for_target(config, self)
        elif self.step is not None:
            h = self.step
        else:
            h = config.drive_period / self.steps_per_period
        if h * config.derived.omega_prime > MAX_STEP_PHASE * (1 + 1e-12):
            raise StepSizeError(
                f"step {h:.4g} under-resolves the drive: step*omega' must be <= pi/8"
            )
        return h


def _step_for_target(config: PhysicalConfig, spec: IntegratorSpec) -> float:
    """Smallest power-of-two refinement whose one-period propagator is
    self-converged to ``spec.target_error``."""
    period = config.drive_period
    n = 32
    previous = evolve_unitary(config, 0.0, period, IntegratorSpec(spec.method, n))
    while n < 2**16:
        n *= 2
        current = evolve_unitary(config, 0.0, period, IntegratorSpec(spec.method, n))
        if np.linalg.norm(current - previous) < spec.target_error:
            return period / n
        previous = current
    return period / n


def su2_exp(vec) -> np.ndarray:
    """exp(-i vec . sigma) = cos|v| I - i sin|v| (v/|v|) . sigma, batched."""
    vec = np.asarray(vec, dtype=float)
    theta = np.linalg.norm(vec, axis=-1)
    c = np.cos(theta)
    s = np.sinc(theta / math.pi)  # sin(theta)/theta
    x, y, z = (vec[..., k] * s for k in range(3))
    out = np.empty(vec.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = c - 1j * z
    out[..., 0, 1] = -1j * x - y
    out[..., 1, 0] = -1j * x + y
    out[..., 1, 1] = c + 1j * z
    return out


def _step_matrices(config, starts, h, method, convention):
    """One-step propagators for steps beginning at ``starts`` with sizes ``h``."""
    h = np.broadcast_to(np.asarray(h, dtype=float), starts.shape)
    hv = h[:, None]
    if method == "midpoint":
        gen = generator_vector(config, starts + 0.5 * h, convention)
        return su2_exp(hv * gen)
    g1 = generator_vector(config, starts + _C1 * h, convention)
    g2 = generator_vector(config, starts + _C2 * h, convention)
    first = su2_exp(hv * (_A2 * g1 + _A1 * g2))
    second = su2_exp(hv * (_A1 * g1 + _A2 * g2))
    return second @ first


def unitary_trajectory(
    config: PhysicalConfig,
    t_grid,
    spec: IntegratorSpec | None = None,
    convention: Convention = IDENTITY,
) -> np.ndarray:
    """Propagators U(t_grid[0] -> t_k) for every grid time, shape (n, 2, 2).

    Each interval is split into equal steps no longer than the nominal step;
    the product is accumulated once along the grid.
    """
    spec = spec or IntegratorSpec()
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0:
        raise ValueError("t_grid must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(t_grid)):
        raise ValueError("t_grid must be finite")
    h_nom = spec.step_size(config)
    gaps = np.diff(t_grid)
    counts = np.maximum(1, np.ceil(np.abs(gaps) / h_nom - 1e-9).astype(int))
    counts[gaps == 0] = 0
    h = np.repeat(gaps / np.maximum(counts, 1), counts)
    seg_start = np.repeat(t_grid[:-1], counts)
    local = np.concatenate([np.arange(c) for c in counts]) if counts.size else np.empty(0)
    starts = seg_start + local * h
    steps = _step_matrices(config, starts, h, spec.method, convention)

    out = np.empty((t_grid.size, 2, 2), dtype=complex)
    u = np.eye(2, dtype=complex)
    out[0] = u
    k = 0
    for j, c in enumerate(counts, start=1):
        for _ in range(c):
            u = steps[k] @ u
            k += 1
        out[j] = u
    if not np.all(np.isfinite(out)):
        raise PropagationError("non-finite propagator entries")
    return out


def evolve_unitary(
    config: PhysicalConfig,
    t0: float,
    t1: float,
    spec: IntegratorSpec | None = None,
    convention: Convention = IDENTITY,
) -> np.ndarray:
    """U(t0 -> t1).  ``t1 < t0`` integrates backwards with the same
    (symmetric) scheme, giving the inverse of the forward propagator."""
    return unitary_trajectory(config, [t0, t1], spec, convention)[-1]


@dataclass(frozen=True)
class SpinState:
    up: complex
    down: complex

    def __post_init__(self):
        up, down = complex(self.up), complex(self.down)
        norm = abs(up) ** 2 + abs(down) ** 2
        if not abs(norm - 1.0) <= 1e-9:
            raise ValueError(f"spin state not normalized: |up|^2+|down|^2 = {norm}")
        object.__setattr__(self, "up", up)
        object.__setattr__(self, "down", down)

    @classmethod
    def from_vector(cls, vec) -> "SpinState":
        vec = np.asarray(vec, dtype=complex)
        return cls(vec[0], vec[1])

    @classmethod
    def normalized(cls, up, down) -> "SpinState":
        n = math.hypot(abs(up), abs(down))
        return cls(up / n, down / n)

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.up, self.down], dtype=complex)


def bloch(state: SpinState) -> np.ndarray:
    """(<sigma_1>, <sigma_2>, <sigma_3>) of a pure state."""
    a, b = state.up, state.down
    ab = a.conjugate() * b
    return np.array([2 * ab.real, 2 * ab.imag, abs(a) ** 2 - abs(b) ** 2])


def evolve_state(
    state: SpinState,
    config: PhysicalConfig,
    t0: float,
    t1: float,
    spec: IntegratorSpec | None = None,
    convention: Convention = IDENTITY,
) -> SpinState:
    u = evolve_unitary(config, t0, t1, spec, convention)
    return SpinState.from_vector(u @ state.vector)


@dataclass(frozen=True)
class TrajectoryPoint:
    t: float
    state: SpinState
    bloch: np.ndarray


def sample_trajectory(
    state0: SpinState,
    config: PhysicalConfig,
    t_grid,
    spec: IntegratorSpec | None = None,
    convention: Convention = IDENTITY,
) -> list[TrajectoryPoint]:
    """Spin state and Bloch vector on a strictly increasing time grid.

    ``state0`` is the state at ``t_grid[0]``.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    us = unitary_trajectory(config, t_grid, spec, convention)
    vecs = us @ state0.vector
    points = []
    for t, v in zip(t_grid, vecs):
        s = SpinState.from_vector(v)
        points.append(TrajectoryPoint(float(t), s, bloch(s)))
    return points
