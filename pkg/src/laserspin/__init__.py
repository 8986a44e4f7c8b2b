"""Spin-1/2 precession of a charged particle in a strong monochromatic
plane-wave laser, semi-relativistic regime (eta^2 < 1)."""

from .closedform import (
    CircularSolution,
    Monodromy,
    PeriodEstimate,
    circular_params,
    circular_propagator,
    linear_propagator,
    monodromy,
    period,
    quantum_phase,
    rotating_frame_propagator,
)
from .elliptic import DomainError, EllipticParameter, JacobiTriple, complete_k, jacobi, sncndn
from .model import (
    CIRCULAR_EPSILON,
    ConfigError,
    Convention,
    DerivedQuantities,
    LarmorVector,
    PhysicalConfig,
    derive,
    hamiltonian,
    larmor,
)
from .propagator import (
    IntegratorSpec,
    SpinState,
    StepSizeError,
    bloch,
    evolve_state,
    evolve_unitary,
    sample_trajectory,
    unitary_trajectory,
)

__version__ = "0.1.0"
