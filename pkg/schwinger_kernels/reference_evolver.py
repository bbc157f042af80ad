"""Grid oracle: split-step spectral evolution and kernel quadrature.

States live on a periodic grid q_j = q_min + j·dq, j = 0 … n−1, in either
representation. The spectral variable conjugate to q is K = −iħ∂/∂q: the
momentum in position space, and −X in momentum space (X acts as iħ∂/∂p). In
those terms every quadratic Hamiltonian reads

    H = u·K² + v·q² + c·(qK + Kq)/2 + w·K + z·q

with (u, v, c, w, z) = (a, b, c, d, e) in position space and
(b, a, −c, −e, d) in momentum space, so one integrator serves both.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from schwinger_kernels.closed_forms import ReferenceKernel
from schwinger_kernels.errors import (
    GridTooSmallError,
    InvalidArgumentError,
    RepresentationMismatchError,
    ResolutionError,
    SchwingerError,
    StepCountError,
)
from schwinger_kernels.kernel_builder import GaussianKernel, evaluate_kernel, probe_gaussian
from schwinger_kernels.phase_dynamics import QuadraticHamiltonian, Representation
from schwinger_kernels.records import complex_array_pairs, parse_complex_array

logger = logging.getLogger(__name__)

MIN_POINTS = 2 ** 8
MAX_POINTS = 2 ** 16
BOUNDARY_TOLERANCE = 1e-12
NORM_TOLERANCE = 1e-10
DEFAULT_TIME_STEP = 1e-3
POTENTIAL_GUARD = 0.1
KINETIC_GUARD = 0.5
# Amplitude (relative to the peak) that counts as occupied when guarding steps
SUPPORT_THRESHOLD = 1e-12
# Inputs below this relative amplitude are dropped from kernel quadrature
QUADRATURE_CUTOFF = 1e-15
ALIASING_GUARD = math.pi / 4.0
ROW_BLOCK = 512


@dataclass(frozen=True)
class GridSpec:
    q_min: float = -20.0
    q_max: float = 20.0
    n: int = 4096

    def __post_init__(self):
        if not (math.isfinite(self.q_min) and math.isfinite(self.q_max)) or self.q_max <= self.q_min:
            raise InvalidArgumentError(f"Grid bounds must satisfy q_min < q_max, got [{self.q_min}, {self.q_max}).")
        _check_points(self.n)

    @property
    def dq(self) -> float:
        return (self.q_max - self.q_min) / self.n


def _check_points(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or n < MIN_POINTS or n > MAX_POINTS or n & (n - 1):
        raise InvalidArgumentError(f"Grid size must be a power of two between {MIN_POINTS} and {MAX_POINTS}, got {n!r}.")


@dataclass(frozen=True, eq=False)
class WaveFunctionGrid:
    samples: np.ndarray
    x_min: float
    dx: float
    rep: Representation = Representation.POSITION
    hbar: float = 1.0
    _coordinates: np.ndarray = field(default=None, init=False, repr=False)

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=complex)
        if samples.ndim != 1:
            raise InvalidArgumentError("Samples must be one-dimensional.")
        _check_points(samples.size)
        if not self.dx > 0:
            raise InvalidArgumentError("Grid spacing must be positive.")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "rep", Representation.parse(self.rep))
        object.__setattr__(self, "_coordinates", self.x_min + self.dx * np.arange(samples.size))

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def coordinates(self) -> np.ndarray:
        return self._coordinates

    def with_samples(self, samples: np.ndarray) -> "WaveFunctionGrid":
        return WaveFunctionGrid(samples=samples, x_min=self.x_min, dx=self.dx, rep=self.rep, hbar=self.hbar)

    def norm(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2) * self.dx)

    def expectation(self) -> float:
        return float(np.sum(self.coordinates * np.abs(self.samples) ** 2) * self.dx / self.norm())

    def overlap(self, other: "WaveFunctionGrid") -> complex:
        self._check_compatible(other)
        return complex(np.sum(np.conj(self.samples) * other.samples) * self.dx)

    def fidelity(self, other: "WaveFunctionGrid") -> float:
        return abs(self.overlap(other))

    def l2_distance(self, other: "WaveFunctionGrid") -> float:
        self._check_compatible(other)
        return float(np.sqrt(np.sum(np.abs(self.samples - other.samples) ** 2) * self.dx))

    def support(self, threshold: float = SUPPORT_THRESHOLD) -> np.ndarray:
        magnitude = np.abs(self.samples)
        return magnitude > threshold * magnitude.max()

    def _check_compatible(self, other: "WaveFunctionGrid") -> None:
        if other.rep is not self.rep:
            raise RepresentationMismatchError("States are in different representations.")
        if other.n != self.n or not math.isclose(other.dx, self.dx) or not math.isclose(other.x_min, self.x_min):
            raise InvalidArgumentError("States live on different grids.")

    def to_record(self) -> Dict[str, Any]:
        return {
            "x_min": self.x_min,
            "dx": self.dx,
            "n": self.n,
            "rep": self.rep.value,
            "hbar": self.hbar,
            "samples": complex_array_pairs(self.samples),
        }

    @classmethod
    def from_record(cls, record: Dict[str, Any]) -> "WaveFunctionGrid":
        try:
            samples = parse_complex_array(record["samples"])
            if int(record["n"]) != samples.size:
                raise InvalidArgumentError("State record: 'n' does not match the number of samples.")
            return cls(samples=samples, x_min=float(record["x_min"]), dx=float(record["dx"]),
                       rep=record["rep"], hbar=float(record.get("hbar", 1.0)))
        except SchwingerError:
            raise
        except KeyError as error:
            raise InvalidArgumentError(f"State record is missing {error}.")
        except (TypeError, ValueError) as error:
            raise InvalidArgumentError(f"Malformed state record: {error}")


def gaussian_packet(center_q: float, center_momentum: float, width: float, grid_spec: GridSpec,
                    rep: Representation = Representation.POSITION, hbar: float = 1.0) -> WaveFunctionGrid:
    """ψ(q) ∝ exp(−(q − q₀)²/(2w²) + iθq), normalized on the grid.

    center_momentum is the centre of the conjugate variable: momentum for a
    position-space packet, position for a momentum-space packet.
    """
    if not width > 0:
        raise InvalidArgumentError("width must be positive.")
    rep = Representation.parse(rep)
    theta = rep.phase_slope(center_momentum, hbar)
    coordinates = grid_spec.q_min + grid_spec.dq * np.arange(grid_spec.n)

    nearest = min(abs(grid_spec.q_min - center_q), abs(grid_spec.q_max - center_q))
    boundary = (math.pi * width ** 2) ** -0.25 * math.exp(-nearest ** 2 / (2.0 * width ** 2))
    if boundary > BOUNDARY_TOLERANCE:
        needed = width * math.sqrt(2.0 * math.log((math.pi * width ** 2) ** -0.25 / BOUNDARY_TOLERANCE))
        raise GridTooSmallError(
            f"Packet amplitude at the grid boundary is {boundary:.2e} (> {BOUNDARY_TOLERANCE}); "
            f"the grid must extend at least {needed:.3g} from the centre {center_q}.")

    samples = np.exp(-(coordinates - center_q) ** 2 / (2.0 * width ** 2) + 1j * theta * coordinates)
    state = WaveFunctionGrid(samples=samples, x_min=grid_spec.q_min, dx=grid_spec.dq, rep=rep, hbar=hbar)
    return state.with_samples(samples / math.sqrt(state.norm()))


def _dft(samples: np.ndarray, q_min: float, dq: float, out_min: float, sign: int, hbar: float) -> np.ndarray:
    """out_j = dq/√(2πħ)·Σ_k s_k·exp(sign·i·y_j·q_k/ħ) on the reciprocal grid y_j = out_min + j·dy."""
    n = samples.size
    dy = 2.0 * math.pi * hbar / (n * dq)
    index = np.arange(n)
    twisted = samples * np.exp(sign * 1j * index * dq * out_min / hbar)
    summed = np.fft.fft(twisted) if sign < 0 else n * np.fft.ifft(twisted)
    phase = np.exp(sign * 1j * (out_min + index * dy) * q_min / hbar)
    return dq / math.sqrt(2.0 * math.pi * hbar) * phase * summed


def transform(psi: WaveFunctionGrid, target_min: Optional[float] = None) -> WaveFunctionGrid:
    """Switch representation: φ(p) = (2πħ)^(−1/2)∫exp(−ipx/ħ)ψ(x)dx and its inverse.

    The reciprocal grid has spacing 2πħ/(n·dq) and is centred on zero unless
    target_min is given.
    """
    dy = 2.0 * math.pi * psi.hbar / (psi.n * psi.dx)
    out_min = -dy * psi.n / 2.0 if target_min is None else target_min
    if psi.rep is Representation.POSITION:
        samples = _dft(psi.samples, psi.x_min, psi.dx, out_min, -1, psi.hbar)
        target = Representation.MOMENTUM
    else:
        samples = _dft(psi.samples, psi.x_min, psi.dx, out_min, +1, psi.hbar)
        target = Representation.POSITION
    return WaveFunctionGrid(samples=samples, x_min=out_min, dx=dy, rep=target, hbar=psi.hbar)


def split_coefficients(h: QuadraticHamiltonian, rep: Representation) -> Tuple[float, float, float, float, float]:
    """(u, v, c, w, z) of H = u·K² + v·q² + c·(qK + Kq)/2 + w·K + z·q for the grid variable q."""
    if Representation.parse(rep) is Representation.POSITION:
        return h.kinetic, h.potential, h.cross, h.linear_p, h.linear_x
    return h.potential, h.kinetic, -h.cross, -h.linear_x, h.linear_p


@dataclass(frozen=True, eq=False)
class SplitStepPropagator:
    """Strang splitting exp(−iV·dt/2ħ)·exp(−iT·dt/ħ)·exp(−iV·dt/2ħ).

    A non-zero cross term is removed first with the gauge factor
    exp(iλq²/2ħ), λ = c/(2u), which turns u·(K + λq)² into u·K².
    """
    potential: np.ndarray
    kinetic: np.ndarray
    gauge: np.ndarray
    hbar: float

    @classmethod
    def for_state(cls, psi: WaveFunctionGrid, h: QuadraticHamiltonian) -> "SplitStepPropagator":
        if psi.hbar != h.hbar:
            raise InvalidArgumentError("State and Hamiltonian use different hbar.")
        u, v, cross, w, z = split_coefficients(h, psi.rep)
        if cross != 0 and u == 0:
            raise InvalidArgumentError("Cross term without a spectral quadratic term cannot be split.")
        gauge_rate = cross / (2.0 * u) if cross != 0 else 0.0
        q = psi.coordinates
        k = h.hbar * 2.0 * math.pi * np.fft.fftfreq(psi.n, d=psi.dx)
        return cls(
            potential=(v - u * gauge_rate ** 2) * q ** 2 + (z - w * gauge_rate) * q,
            kinetic=u * k ** 2 + w * k,
            gauge=np.exp(1j * gauge_rate * q ** 2 / (2.0 * h.hbar)),
            hbar=h.hbar,
        )

    def minimum_steps(self, psi: WaveFunctionGrid, t: float) -> int:
        """Fewest steps that keep both phase increments under their guards on the occupied support."""
        gauged = psi.samples * self.gauge
        spectrum = np.abs(np.fft.fft(gauged))
        occupied_q = np.abs(gauged) > SUPPORT_THRESHOLD * np.abs(gauged).max()
        occupied_k = spectrum > SUPPORT_THRESHOLD * spectrum.max()
        max_potential = float(np.max(np.abs(self.potential[occupied_q])))
        max_kinetic = float(np.max(np.abs(self.kinetic[occupied_k])))
        needed = t / self.hbar * max(max_potential / POTENTIAL_GUARD, max_kinetic / KINETIC_GUARD)
        return max(1, math.floor(needed) + 1)

    def run(self, samples: np.ndarray, dt: float, steps: int) -> np.ndarray:
        half = np.exp(-0.5j * dt / self.hbar * self.potential)
        kinetic = np.exp(-1j * dt / self.hbar * self.kinetic)
        psi = samples * self.gauge
        for _ in range(steps):
            psi = half * psi
            psi = np.fft.ifft(kinetic * np.fft.fft(psi))
            psi = half * psi
        return psi * np.conj(self.gauge)


def evolve(psi: WaveFunctionGrid, h: QuadraticHamiltonian, t: float, steps: Optional[int] = None) -> WaveFunctionGrid:
    """Second-order split-step evolution of a grid state over time t."""
    if not isinstance(t, (int, float)) or not math.isfinite(t) or t < 0:
        raise InvalidArgumentError(f"time must be finite and non-negative, got {t!r}.")
    if steps is None:
        steps = max(1, math.ceil(t / DEFAULT_TIME_STEP))
    propagator = SplitStepPropagator.for_state(psi, h)
    minimum = propagator.minimum_steps(psi, t)
    if steps < 1 or steps < minimum:
        raise StepCountError(
            f"{steps} steps violate the phase-increment guards over t = {t}; use at least {minimum}.", minimum)
    if t == 0:
        return psi.with_samples(psi.samples.copy())

    result = psi.with_samples(propagator.run(psi.samples, t / steps, steps))
    drift = abs(result.norm() - psi.norm())
    if drift > NORM_TOLERANCE:
        logger.warning(f"Norm drifted by {drift:.2e} during evolution")
    logger.debug(f"Evolved {psi.rep.value} state over t={t} in {steps} steps")
    return result


def _shift(samples: np.ndarray, dq: float, shift: float) -> np.ndarray:
    """Spectral interpolation of f(q − shift) on a periodic grid."""
    if shift == 0:
        return samples
    k = 2.0 * math.pi * np.fft.fftfreq(samples.size, d=dq)
    return np.fft.ifft(np.fft.fft(samples) * np.exp(-1j * k * shift))


def _check_resolution(probe: GaussianKernel, psi: WaveFunctionGrid, sources: np.ndarray, targets: np.ndarray) -> None:
    """dq·max|∂phase/∂q| over the occupied inputs and outputs must stay below π/4.

    Aliased rows carry spurious amplitude, so checking the occupied outputs
    after the sum still catches them.
    """
    if sources.size == 0 or targets.size == 0:
        return
    q_end = np.array([targets.min(), targets.min(), targets.max(), targets.max()])
    q_start = np.array([sources.min(), sources.max(), sources.min(), sources.max()])
    slope = (2.0 * probe.a_00 * q_start + probe.a_t0 * q_end + probe.b_0).real / probe.hbar
    worst = psi.dx * float(np.max(np.abs(slope)))
    if worst >= ALIASING_GUARD:
        raise ResolutionError(
            f"Kernel phase advances {worst:.3f} rad per grid step (limit {ALIASING_GUARD:.3f}); refine the grid.")


def apply_kernel(kernel: Union[GaussianKernel, ReferenceKernel], psi: WaveFunctionGrid,
                 t: Optional[float] = None) -> WaveFunctionGrid:
    """φ(q′) = ∫K(q′, q)·ψ(q) dq by trapezoidal quadrature; no renormalization.

    Reference kernels need the time t; pipeline kernels carry their own.
    """
    if kernel.rep is not psi.rep:
        raise RepresentationMismatchError(
            f"Kernel is in {kernel.rep.value} representation, state is in {psi.rep.value}.")
    q = psi.coordinates

    if isinstance(kernel, GaussianKernel):
        if kernel.degenerate:
            phase = kernel.delta_phase
            source = q - phase.shift
            return psi.with_samples(_shift(psi.samples, psi.dx, phase.shift) * phase(source))
        evaluator = lambda q_end, q_start: evaluate_kernel(kernel, q_end, q_start)
        probe = kernel
    else:
        if t is None:
            raise InvalidArgumentError("Reference kernels need an explicit time.")
        if kernel.degenerate:
            return psi.with_samples(psi.samples * kernel.phase(t, q))
        evaluator = lambda q_end, q_start: kernel(t, q_end, q_start)
        probe = probe_gaussian(kernel, t, kernel.rep, kernel.hbar)

    magnitude = np.abs(psi.samples)
    occupied = magnitude > QUADRATURE_CUTOFF * magnitude.max()
    sources = q[occupied]
    weights = psi.samples[occupied] * psi.dx
    out = np.empty(psi.n, dtype=complex)
    for start in range(0, psi.n, ROW_BLOCK):
        rows = q[start:start + ROW_BLOCK]
        out[start:start + ROW_BLOCK] = evaluator(rows[:, None], sources[None, :]) @ weights

    result = psi.with_samples(out)
    if np.any(out):
        _check_resolution(probe, psi, sources, q[result.support()])
    return result
