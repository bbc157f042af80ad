"""Exact Heisenberg dynamics for one-dimensional quadratic Hamiltonians.

H = a·P² + b·X² + c·(XP + PX)/2 + d·P + e·X

The operator equations of motion are linear, so X(t), P(t) follow from the
classical flow generator

    G = [[c, 2a], [-2b, -c]],   f = (d, -e)

through z(t) = exp(G t)·z(0) + ∫₀ᵗ exp(G s) ds·f. Because tr G = 0 we have
G² = -D·I with D = 4ab - c², which gives the closed-form exponential with a
trigonometric (D > 0), hyperbolic (D < 0) or series (|D| small) branch.
"""
import enum
import logging
import math
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from schwinger_kernels.errors import DegenerateMapError, InvalidArgumentError

logger = logging.getLogger(__name__)

# Width of the band around D = 0 handled by the series branch
DISCRIMINANT_BAND = 1e-12
# Endpoint inversion is refused below this off-diagonal magnitude
DEGENERACY_THRESHOLD = 1e-12


class Representation(str, enum.Enum):
    MOMENTUM = "momentum"
    POSITION = "position"

    @classmethod
    def parse(cls, value) -> "Representation":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise InvalidArgumentError(f"Unknown representation '{value}', expected 'momentum' or 'position'.")

    def phase_slope(self, center_conjugate: float, hbar: float) -> float:
        """Wave number θ of exp(iθq) that centres a state at the conjugate value.

        X acts as iħ∂/∂p in momentum space, so a position centre x₀ carries
        exp(−i·x₀·p/ħ); a momentum centre p₀ in position space carries exp(+i·p₀·x/ħ).
        """
        if self is Representation.MOMENTUM:
            return -center_conjugate / hbar
        return center_conjugate / hbar


@dataclass(frozen=True)
class QuadraticHamiltonian:
    kinetic: float
    potential: float = 0.0
    cross: float = 0.0
    linear_p: float = 0.0
    linear_x: float = 0.0
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("kinetic", "potential", "cross", "linear_p", "linear_x", "hbar"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise InvalidArgumentError(f"Hamiltonian coefficient '{name}' must be a finite real, got {value!r}.")
        if self.kinetic <= 0:
            raise InvalidArgumentError("kinetic coefficient must be strictly positive.")
        if self.hbar <= 0:
            raise InvalidArgumentError("hbar must be strictly positive.")

    @classmethod
    def oscillator(cls, mass: float, omega: float, hbar: float = 1.0) -> "QuadraticHamiltonian":
        if mass <= 0:
            raise InvalidArgumentError("mass must be strictly positive.")
        return cls(kinetic=1.0 / (2.0 * mass), potential=mass * omega ** 2 / 2.0, hbar=hbar)

    @classmethod
    def free(cls, mass: float, hbar: float = 1.0) -> "QuadraticHamiltonian":
        return cls.oscillator(mass, 0.0, hbar)

    @property
    def discriminant(self) -> float:
        return 4.0 * self.kinetic * self.potential - self.cross ** 2

    @property
    def has_drift(self) -> bool:
        return self.linear_p != 0.0 or self.linear_x != 0.0

    def generator(self) -> np.ndarray:
        return np.array([[self.cross, 2.0 * self.kinetic],
                         [-2.0 * self.potential, -self.cross]])

    def quadratic_form(self) -> np.ndarray:
        """Symmetric matrix A with H_quadratic = (X, P)·A·(X, P)ᵀ."""
        return np.array([[self.potential, self.cross / 2.0],
                         [self.cross / 2.0, self.kinetic]])

    def first_caustic(self) -> float:
        """First time at which the transfer-matrix off-diagonals vanish (inf if never)."""
        if self.discriminant > DISCRIMINANT_BAND:
            return math.pi / math.sqrt(self.discriminant)
        return math.inf

    def classical_energy(self, x, p):
        return (self.kinetic * p ** 2 + self.potential * x ** 2 + self.cross * x * p
                + self.linear_p * p + self.linear_x * x)

    def to_record(self) -> Dict[str, float]:
        return {
            "kinetic": self.kinetic,
            "potential": self.potential,
            "cross": self.cross,
            "linear_p": self.linear_p,
            "linear_x": self.linear_x,
            "hbar": self.hbar,
        }


@dataclass(frozen=True)
class TransferMatrix:
    m11: float
    m12: float
    m21: float
    m22: float
    drift_x: float
    drift_p: float
    time: float

    @property
    def determinant(self) -> float:
        return self.m11 * self.m22 - self.m12 * self.m21

    def as_array(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m21, self.m22]])

    def apply(self, x0, p0) -> Tuple[float, float]:
        """Classical image of the phase-space point (x0, p0)."""
        return (self.m11 * x0 + self.m12 * p0 + self.drift_x,
                self.m21 * x0 + self.m22 * p0 + self.drift_p)


@dataclass(frozen=True)
class EndpointInversion:
    """Complementary operator R at both endpoints as R = u·Q(t) + v·Q(0) + w.

    For the momentum representation Q = P and R = X; for the position
    representation Q = X and R = P.
    """
    rep: Representation
    at_end: Tuple[float, float, float]
    at_start: Tuple[float, float, float]
    time: float


def _flow_coefficients(discriminant: float, t: float) -> Tuple[float, float, float]:
    """Return (C0, C1, C2) with exp(Gt) = C0·I + C1·G and ∫₀ᵗ exp(Gs) ds = C1·I + C2·G."""
    if discriminant > DISCRIMINANT_BAND:
        omega = math.sqrt(discriminant)
        half = math.sin(omega * t / 2.0) / omega
        return math.cos(omega * t), math.sin(omega * t) / omega, 2.0 * half * half
    if discriminant < -DISCRIMINANT_BAND:
        kappa = math.sqrt(-discriminant)
        half = math.sinh(kappa * t / 2.0) / kappa
        return math.cosh(kappa * t), math.sinh(kappa * t) / kappa, 2.0 * half * half
    z = discriminant * t * t
    return 1.0 - z / 2.0, t * (1.0 - z / 6.0), t * t * (0.5 - z / 24.0)


def solve_heisenberg(h: QuadraticHamiltonian, t: float) -> TransferMatrix:
    """Closed-form solution of the Heisenberg equations after elapsed time t."""
    if not isinstance(t, (int, float)) or not math.isfinite(t):
        raise InvalidArgumentError(f"time must be finite, got {t!r}.")
    if t < 0:
        raise InvalidArgumentError(f"time must be non-negative, got {t!r}.")

    c0, c1, c2 = _flow_coefficients(h.discriminant, float(t))
    generator = h.generator()
    flow = c0 * np.eye(2) + c1 * generator
    force = np.array([h.linear_p, -h.linear_x])
    drift = (c1 * np.eye(2) + c2 * generator) @ force

    return TransferMatrix(
        m11=float(flow[0, 0]), m12=float(flow[0, 1]),
        m21=float(flow[1, 0]), m22=float(flow[1, 1]),
        drift_x=float(drift[0]), drift_p=float(drift[1]),
        time=float(t),
    )


def endpoint_commutator(tm: TransferMatrix, h: QuadraticHamiltonian, rep: Representation) -> complex:
    """Scalar commutator [Q(0), Q(t)] for the endpoint operator Q of the representation."""
    rep = Representation.parse(rep)
    if rep is Representation.MOMENTUM:
        return -1j * h.hbar * tm.m21
    return 1j * h.hbar * tm.m12


def inversion_entry(tm: TransferMatrix, rep: Representation) -> float:
    """Signed off-diagonal entry the endpoint inversion divides by.

    -m21 for momentum, m12 for position; both start out positive for a
    confining Hamiltonian and vanish at caustics.
    """
    rep = Representation.parse(rep)
    return -tm.m21 if rep is Representation.MOMENTUM else tm.m12


def invert_endpoints(tm: TransferMatrix, rep: Representation) -> EndpointInversion:
    rep = Representation.parse(rep)
    if rep is Representation.MOMENTUM:
        entry = tm.m21
        if abs(entry) < DEGENERACY_THRESHOLD:
            raise DegenerateMapError(
                f"m21 = {entry:.3e} at t = {tm.time}: X cannot be written in endpoint momenta, "
                "the momentum kernel is a delta distribution.", entry)
        at_start = (1.0 / entry, -tm.m22 / entry, -tm.drift_p / entry)
        at_end = (tm.m11 / entry, -1.0 / entry, tm.drift_x - tm.m11 * tm.drift_p / entry)
    else:
        entry = tm.m12
        if abs(entry) < DEGENERACY_THRESHOLD:
            raise DegenerateMapError(
                f"m12 = {entry:.3e} at t = {tm.time}: P cannot be written in endpoint positions "
                "(caustic).", entry)
        at_start = (1.0 / entry, -tm.m11 / entry, -tm.drift_x / entry)
        at_end = (tm.m22 / entry, -1.0 / entry, tm.drift_p - tm.m22 * tm.drift_x / entry)

    logger.debug(f"Endpoint inversion ({rep.value}, t={tm.time}): end={at_end} start={at_start}")
    return EndpointInversion(rep=rep, at_end=at_end, at_start=at_start, time=tm.time)


def conserved_energy_check(tm: TransferMatrix, h: QuadraticHamiltonian) -> float:
    """Max-norm of Mᵀ·A·M − A; zero when the quadratic energy form is conserved."""
    form = h.quadratic_form()
    flow = tm.as_array()
    return float(np.max(np.abs(flow.T @ form @ flow - form)))
