"""Period measurement, parameter sweeps and convention reconciliation."""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from . import closedform
from .elliptic import DomainError
from .model import (
    CIRCULAR_EPSILON,
    IDENTITY,
    PAULI,
    ConfigError,
    Convention,
    PhysicalConfig,
    generator_vector,
    pauli_matrix,
)
from .propagator import IntegratorSpec, evolve_unitary, unitary_trajectory

RECURRENCE_THRESHOLD = 1e-6


class RecurrenceNotFound(ArithmeticError):
    """No return to the identity (or to the initial ray) was found."""


@dataclass(frozen=True)
class Recurrence:
    period: float
    distance: float
    kind: str  # "operator" | "fidelity" | "trivial"


def _generator(config, t):
    return pauli_matrix(generator_vector(config, t))


def _rotation_vector(u):
    # U = cos(th) I - i sin(th) n.sigma  ->  sin(th) n = (i/2) tr(sigma_k U)
    return np.array([-0.5 * np.trace(PAULI[k] @ u).imag for k in range(3)])


def _rotation_velocity(g, u):
    # time derivative of _rotation_vector under dU/dt = -i G U
    return np.array([0.5 * np.trace(PAULI[k] @ g @ u).real for k in range(3)])


def _operator_slope(config, t, u):
    # d/dt ||U - I||_F^2 = -2 Im tr(G U)
    return -2.0 * np.trace(_generator(config, t) @ u).imag


def _ray_slope(config, t, u, v):
    # d/dt |<v|U v>|^2 = 2 Re(conj(a) a'),  a' = <v| -i G U |v>
    uv = u @ v
    a = np.vdot(v, uv)
    da = np.vdot(v, -1j * (_generator(config, t) @ uv))
    return 2.0 * (a.conjugate() * da).real


def _root(fn, lo, hi, f_lo, f_hi):
    if f_hi == 0.0:
        return hi
    if f_lo == 0.0:
        return lo
    return brentq(fn, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)


def _search(config, spec, times, us, slope, distance, threshold, flat_axis=False):
    """First refined local minimum of ``distance`` below ``threshold``.

    Minima are bracketed by sign changes of ``slope`` (the derivative of the
    squared distance) on the integration grid.  With ``flat_axis`` the
    bracket is refined on the stationary point of the rotation vector
    projected on its direction at the bracket start when that projection
    turns around inside the bracket.  This is the case when the generator
    itself vanishes at the return, where the squared distance is quartic and
    its derivative is lost in rounding.
    """
    dist = np.array([distance(u) for u in us])
    slopes = np.array([slope(t, u) for t, u in zip(times, us)])
    left_home = np.nonzero(dist > 100.0 * threshold)[0]
    if left_home.size == 0:
        return None
    for k in range(max(int(left_home[0]), 1) + 1, len(times)):
        if not (slopes[k - 1] < 0.0 <= slopes[k]):
            continue
        t_lo, t_hi, u_lo = times[k - 1], times[k], us[k - 1]

        def at(t):
            return evolve_unitary(config, t_lo, t, spec) @ u_lo

        t_star = None
        if flat_axis:
            # widened bracket: the grid may land on the minimum itself, where
            # the rotation axis is pure rounding noise
            a, b = max(k - 2, 0), min(k + 1, len(times) - 1)
            w0 = _rotation_vector(us[a])
            axis = w0 / np.linalg.norm(w0)

            def turn(t):
                u = evolve_unitary(config, times[a], t, spec) @ us[a]
                return _rotation_velocity(_generator(config, t), u) @ axis

            f_lo, f_hi = turn(times[a]), turn(times[b])
            if f_lo * f_hi <= 0.0:
                t_star = _root(turn, times[a], times[b], f_lo, f_hi)
        if t_star is None:
            fn = lambda t: slope(t, at(t))
            t_star = _root(fn, t_lo, t_hi, slopes[k - 1], slopes[k])
        d = distance(at(t_star))
        if d < threshold:
            return Recurrence(period=float(t_star), distance=float(d), kind="")
    return None


def find_recurrence(
    config: PhysicalConfig,
    spec: IntegratorSpec | None = None,
    *,
    max_periods: float = 10.0,
    threshold: float = RECURRENCE_THRESHOLD,
) -> Recurrence | None:
    """Locate the first return of the numerical evolution.

    Linear polarizations (eps in {0, 1}) and general eps are tested at the
    operator level, ||U(0 -> t) - I||_F.  Circular polarization, and general
    eps without an operator return, fall back to the initial ray: the state is
    an eigenvector of the numerical one-drive-period propagator and the
    distance is sqrt(1 - |<chi(0)|chi(t)>|^2).
    """
    spec = spec or IntegratorSpec()
    nominal = config.drive_period
    if config.eta == 0.0:
        return Recurrence(period=nominal, distance=0.0, kind="trivial")
    h = spec.step_size(config)
    n = int(math.ceil(max_periods * nominal / h))
    times = np.arange(n + 1) * (max_periods * nominal / n)
    us = unitary_trajectory(config, times, spec)

    eye = np.eye(2)
    if not config.is_circular:
        found = _search(
            config, spec, times, us,
            slope=lambda t, u: _operator_slope(config, t, u),
            distance=lambda u: np.linalg.norm(u - eye),
            threshold=threshold,
            flat_axis=True,
        )
        if found is not None:
            return Recurrence(found.period, found.distance, "operator")
        if config.epsilon in (0.0, 1.0):
            return None

    monodromy = evolve_unitary(config, 0.0, nominal, spec)
    _, vecs = np.linalg.eig(monodromy)
    v = vecs[:, 0] / np.linalg.norm(vecs[:, 0])

    def ray_distance(u):
        return math.sqrt(max(0.0, 1.0 - abs(np.vdot(v, u @ v)) ** 2))

    found = _search(
        config, spec, times, us,
        slope=lambda t, u: -_ray_slope(config, t, u, v),
        distance=ray_distance,
        threshold=threshold,
    )
    if found is None:
        return None
    return Recurrence(found.period, found.distance, "fidelity")


def measure_period(
    config: PhysicalConfig,
    spec: IntegratorSpec | None = None,
    *,
    max_periods: float = 10.0,
    threshold: float = RECURRENCE_THRESHOLD,
) -> float:
    """Measured recurrence time; see :func:`find_recurrence`."""
    rec = find_recurrence(config, spec, max_periods=max_periods, threshold=threshold)
    if rec is None:
        raise RecurrenceNotFound(
            f"no recurrence within {max_periods} nominal periods "
            f"(eta={config.eta}, epsilon={config.epsilon})"
        )
    return rec.period


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope of log y against log x."""
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


# --------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SweepSpec:
    eta: tuple[float, ...]
    epsilon: tuple[float, ...] = (0.0,)
    beta_z: tuple[float, ...] = (0.0,)
    kappa: float = 1.0
    omega: float = 1.0
    integrator: IntegratorSpec = field(default_factory=IntegratorSpec)
    gamma_power: int = 1
    outputs: tuple[str, ...] = ("period", "phase", "deviation")

    def __post_init__(self):
        for name in ("eta", "epsilon", "beta_z"):
            values = tuple(float(v) for v in getattr(self, name))
            if not values:
                raise ConfigError(f"sweep grid {name!r} is empty")
            object.__setattr__(self, name, values)
        unknown = set(self.outputs) - {"period", "phase", "deviation"}
        if unknown:
            raise ConfigError(f"unknown sweep outputs {sorted(unknown)}")
        self.configs()  # validates every grid point

    def configs(self) -> list[PhysicalConfig]:
        """Grid points in eta-major, then epsilon, then beta_z order."""
        return [
            PhysicalConfig(eta=e, epsilon=p, omega=self.omega, beta_z=b, kappa=self.kappa)
            for e, p, b in itertools.product(self.eta, self.epsilon, self.beta_z)
        ]


@dataclass(frozen=True)
class SweepRecord:
    eta: float
    epsilon: float
    beta_z: float
    period_exact: float
    period_expansion: float
    period_measured: float | None
    rel_dev: float | None
    recurrence_kind: str | None
    quantum_phase: float | None
    phase_minus_pi: float | None
    closedform_deviation: float | None
    convention_id: str
    error: str | None = None

    def as_dict(self) -> dict:
        return asdict(self)


def closedform_deviation(
    config: PhysicalConfig, spec: IntegratorSpec | None = None, samples: int = 64
) -> float | None:
    """max ||U_closed - U_numeric||_F over one drive period, or None when no
    closed form exists for this polarization."""
    if config.eta == 0.0:
        reference = lambda t: np.broadcast_to(np.eye(2, dtype=complex), t.shape + (2, 2))
    elif config.is_circular:
        reference = lambda t: closedform.circular_propagator(config, t)
    elif config.epsilon in (0.0, 1.0):
        reference = lambda t: closedform.linear_propagator(config, t)
    else:
        return None
    times = config.drive_period * np.arange(samples + 1) / samples
    numeric = unitary_trajectory(config, times, spec)
    return float(np.linalg.norm(numeric - reference(times), axis=(1, 2)).max())


def sweep_point(config: PhysicalConfig, spec: SweepSpec) -> SweepRecord:
    est = closedform.period(config, spec.gamma_power)
    measured = rel_dev = kind = phase = phase_dev = deviation = None
    errors = []
    if "period" in spec.outputs:
        try:
            rec = find_recurrence(config, spec.integrator)
        except (DomainError, ValueError, ArithmeticError) as exc:
            rec = None
            errors.append(f"period: {exc}")
        if rec is None:
            if not errors:
                errors.append("period: no recurrence within 10 nominal periods")
        else:
            measured, kind = rec.period, rec.kind
            rel_dev = abs(measured - est.exact) / est.exact
    if "phase" in spec.outputs and config.is_circular:
        phase = closedform.quantum_phase(config)
        phase_dev = phase - math.pi
    if "deviation" in spec.outputs:
        try:
            deviation = closedform_deviation(config, spec.integrator)
        except (DomainError, ValueError, ArithmeticError) as exc:
            errors.append(f"deviation: {exc}")
    return SweepRecord(
        eta=config.eta,
        epsilon=config.epsilon,
        beta_z=config.beta_z,
        period_exact=est.exact,
        period_expansion=est.expansion2,
        period_measured=measured,
        rel_dev=rel_dev,
        recurrence_kind=kind,
        quantum_phase=phase,
        phase_minus_pi=phase_dev,
        closedform_deviation=deviation,
        convention_id=IDENTITY.id,
        error="; ".join(errors) or None,
    )


def _sweep_job(args):
    return sweep_point(*args)


def frequency_shift_curve(spec: SweepSpec, jobs: int = 1) -> list[SweepRecord]:
    """One record per grid point, in grid order whatever ``jobs`` is."""
    tasks = [(cfg, spec) for cfg in spec.configs()]
    if jobs <= 1 or len(tasks) <= 1:
        return [sweep_point(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_sweep_job, tasks))


@dataclass(frozen=True)
class PhaseRecord:
    eta: float
    beta_z: float
    phase: float
    phase_minus_pi: float
    eigenphase_deviation: float | None


def _eigenphase_deviation(config: PhysicalConfig, phase: float) -> float:
    eig = np.linalg.eigvals(closedform.monodromy(config).matrix)
    target = np.exp(1j * np.array([phase, -phase]))
    return float(min(np.abs(eig - target).max(), np.abs(eig - target[::-1]).max()))


def phase_curve(spec: SweepSpec) -> list[PhaseRecord]:
    """Quantum phase against eta at circular polarization.

    The epsilon grid of ``spec`` is ignored.
    """
    out = []
    for eta, bz in itertools.product(spec.eta, spec.beta_z):
        cfg = PhysicalConfig(eta, CIRCULAR_EPSILON, spec.omega, bz, spec.kappa)
        phase = closedform.quantum_phase(cfg)
        dev = _eigenphase_deviation(cfg, phase) if eta > 0.0 else None
        out.append(PhaseRecord(eta, bz, phase, phase - math.pi, dev))
    return out


# --------------------------------------------------------------------------
# convention reconciliation


def convention_space() -> list[Convention]:
    """All 24 candidates; identity first, deterministic order."""
    return [
        Convention(s1, s2, g, f)
        for s1, s2, g, f in itertools.product((1, -1), (1, -1), (1, -1), (1.0, 0.5, 2.0))
    ]


@dataclass(frozen=True)
class ConventionResult:
    convention_id: str
    deviation: float


@dataclass(frozen=True)
class ConventionReport:
    ranked: tuple[ConventionResult, ...]
    best_id: str
    best_deviation: float
    verdict: str  # "matched" | "unmatched"
    degenerate: bool
    tolerance: float
    samples: int

    def as_dict(self) -> dict:
        return {
            "best_id": self.best_id,
            "best_deviation": self.best_deviation,
            "verdict": self.verdict,
            "degenerate": self.degenerate,
            "tolerance": self.tolerance,
            "samples": self.samples,
            "ranked": [asdict(r) for r in self.ranked],
        }


RECONCILE_SPEC = IntegratorSpec("magnus4", 512)


def reconcile_conventions(
    config: PhysicalConfig,
    spec: IntegratorSpec | None = None,
    *,
    reference: Callable[[np.ndarray], np.ndarray] | None = None,
    samples: int = 64,
    tolerance: float = 1e-9,
) -> ConventionReport:
    """Compare the closed circular form with numerical propagation under
    every convention in :func:`convention_space`.

    ``reference`` maps an array of times to stacked 2x2 propagators and
    defaults to :func:`closedform.circular_propagator` (the identity at
    eta = 0, where the closed form is undefined).
    """
    if not config.is_circular:
        raise DomainError("reconcile_conventions needs circular polarization")
    spec = spec or RECONCILE_SPEC
    if reference is None:
        if config.eta == 0.0:
            reference = lambda t: np.broadcast_to(
                np.eye(2, dtype=complex), t.shape + (2, 2)
            )
        else:
            reference = lambda t: closedform.circular_propagator(config, t)
    period = 2.0 * math.pi / config.derived.omega_prime
    times = period * np.arange(samples + 1) / samples
    target = reference(times[1:])

    results = []
    for conv in convention_space():
        numeric = unitary_trajectory(config, times, spec, conv)[1:]
        dev = float(np.linalg.norm(numeric - target, axis=(1, 2)).max())
        results.append(ConventionResult(conv.id, dev))
    order = sorted(range(len(results)), key=lambda i: (results[i].deviation, i))
    ranked = tuple(results[i] for i in order)
    devs = [r.deviation for r in results]
    best = ranked[0]
    return ConventionReport(
        ranked=ranked,
        best_id=best.convention_id,
        best_deviation=best.deviation,
        verdict="matched" if best.deviation <= tolerance else "unmatched",
        degenerate=(max(devs) - min(devs)) <= tolerance,
        tolerance=tolerance,
        samples=samples,
    )
