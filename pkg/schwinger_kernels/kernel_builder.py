"""Gaussian propagators from the ordered Hamiltonian.

A kernel is stored as

    K(q′, q) = exp(log_norm + (i/ħ)·(a_tt·q′² + a_00·q² + a_t0·q′q + b_t·q′ + b_0·q + s))

with q′ the endpoint at time t and q the endpoint at time 0.

The exponent obeys d/dt(...) = −H_c(q′, q, t) for the classical part of the
ordered Hamiltonian; its primitive is pinned by the endpoint derivative
conditions ⟨q′,t|R(t)|q,0⟩ and ⟨q′,t|R(0)|q,0⟩. The ordering remnant fixes the
time dependence of the prefactor, and the delta limit at t → 0⁺ fixes its
constant:

    N(t) = (2πiħ·σ(t))^(−1/2),   σ = −m21 (momentum) or m12 (position)

For the oscillator this is 1/√(2πiħmω·sin ωt) in momentum space.
"""
import cmath
import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional

import numpy as np
from scipy import integrate

from schwinger_kernels.errors import (
    BranchError,
    CausticError,
    DegenerateKernelError,
    DegenerateMapError,
    InvalidArgumentError,
    RepresentationMismatchError,
)
from schwinger_kernels.operator_ordering import EndpointBilinear, express_hamiltonian
from schwinger_kernels.phase_dynamics import (
    QuadraticHamiltonian,
    Representation,
    endpoint_commutator,
    inversion_entry,
    invert_endpoints,
    solve_heisenberg,
)
from schwinger_kernels.records import complex_pair, parse_complex

logger = logging.getLogger(__name__)

QUADRATURE_RTOL = 1e-12
QUADRATURE_ATOL = 1e-14
# Relative margin below the first caustic inside which kernels are refused
CAUSTIC_MARGIN = 1e-12

COEFFICIENTS = ("a_tt", "a_00", "a_t0", "b_t", "b_0", "s", "log_norm")


@dataclass(frozen=True)
class ExponentForm:
    """Coefficients of the phase (i/ħ)·(…) before normalization."""
    rep: Representation
    time: float
    hbar: float
    a_tt: complex
    a_00: complex
    a_t0: complex
    b_t: complex
    b_0: complex
    s: complex
    entry: float


@dataclass(frozen=True)
class DeltaPhase:
    """Conserved-momentum kernel δ(p′ − p − shift)·exp(−(i/ħ)(quadratic·p² + linear·p + constant))."""
    shift: float
    quadratic: float
    linear: float
    constant: float
    hbar: float

    def __call__(self, p):
        return np.exp(-1j / self.hbar * (self.quadratic * p ** 2 + self.linear * p + self.constant))

    def describe(self) -> str:
        return (f"delta(p' - p - ({self.shift!r})) * exp(-(i/hbar) * ({self.quadratic!r}*p^2 "
                f"+ {self.linear!r}*p + {self.constant!r}))")

    def to_record(self) -> Dict[str, float]:
        return {"shift": self.shift, "quadratic": self.quadratic, "linear": self.linear,
                "constant": self.constant}


@dataclass(frozen=True)
class GaussianKernel:
    rep: Representation
    time: float
    hbar: float
    a_tt: complex = 0j
    a_00: complex = 0j
    a_t0: complex = 0j
    b_t: complex = 0j
    b_0: complex = 0j
    s: complex = 0j
    log_norm: complex = 0j
    degenerate: bool = False
    delta_phase: Optional[DeltaPhase] = None

    def exponent(self, q_end, q_start):
        return (1j / self.hbar) * (self.a_tt * q_end ** 2 + self.a_00 * q_start ** 2
                                   + self.a_t0 * q_end * q_start + self.b_t * q_end
                                   + self.b_0 * q_start + self.s)

    def to_record(self) -> Dict[str, Any]:
        return {
            "rep": self.rep.value,
            "time": self.time,
            "hbar": self.hbar,
            "degenerate": self.degenerate,
            "coefficients": {name: complex_pair(getattr(self, name)) for name in COEFFICIENTS},
            "delta_phase": self.delta_phase.to_record() if self.delta_phase else None,
        }

    @classmethod
    def from_record(cls, record: Dict[str, Any]) -> "GaussianKernel":
        try:
            hbar = float(record["hbar"])
            coefficients = {name: parse_complex(record["coefficients"][name]) for name in COEFFICIENTS}
            phase = record.get("delta_phase")
            return cls(
                rep=Representation.parse(record["rep"]),
                time=float(record["time"]),
                hbar=hbar,
                degenerate=bool(record.get("degenerate", False)),
                delta_phase=DeltaPhase(hbar=hbar, **{k: float(v) for k, v in phase.items()}) if phase else None,
                **coefficients,
            )
        except InvalidArgumentError:
            raise
        except (KeyError, TypeError, ValueError, AttributeError) as error:
            raise InvalidArgumentError(f"Malformed kernel record: missing or invalid {error}")


def _check_time(h: QuadraticHamiltonian, t: float) -> None:
    if not isinstance(t, (int, float)) or not math.isfinite(t):
        raise InvalidArgumentError(f"time must be finite, got {t!r}.")
    if t <= 0:
        raise InvalidArgumentError("time must be positive.")
    caustic = h.first_caustic()
    if t >= caustic * (1.0 - CAUSTIC_MARGIN):
        raise CausticError(
            f"t = {t} reaches the first caustic at t = {caustic} (Ωt = π); "
            "Gaussian kernels are only built before it.")


def _primitives(tm, rep: Representation) -> Dict[str, float]:
    """Antiderivatives of the ordered coefficients, pinned by the endpoint derivative conditions."""
    if rep is Representation.MOMENTUM:
        m21 = tm.m21
        return {
            "a_tt": -tm.m11 / (2.0 * m21),
            "a_00": -tm.m22 / (2.0 * m21),
            "a_t0": 1.0 / m21,
            "b_t": -(tm.drift_x - tm.m11 * tm.drift_p / m21),
            "b_0": -tm.drift_p / m21,
        }
    m12 = tm.m12
    return {
        "a_tt": tm.m22 / (2.0 * m12),
        "a_00": tm.m11 / (2.0 * m12),
        "a_t0": -1.0 / m12,
        "b_t": tm.drift_p - tm.m22 * tm.drift_x / m12,
        "b_0": tm.drift_x / m12,
    }


def _quad(func: Callable[[float], float], lower: float, upper: float) -> float:
    value, error = integrate.quad(func, lower, upper, epsrel=QUADRATURE_RTOL, epsabs=QUADRATURE_ATOL, limit=200)
    logger.debug(f"quad [{lower}, {upper}] = {value} (error estimate {error:.2e})")
    return value


def integrate_exponent(bilinear: EndpointBilinear, t: float, method: str = "closed",
                       anchor: Optional[float] = None) -> ExponentForm:
    """−∫ H_c dτ with the endpoint variables held fixed.

    method="closed" uses the trig-rational primitives; method="quadrature"
    integrates every ordered coefficient adaptively from an anchor time
    (default t/2) where the primitive is taken. The c-number term s is always
    integrated from 0⁺, where its integrand stays finite.
    """
    h = bilinear.hamiltonian
    rep = bilinear.rep
    _check_time(h, t)
    tm = solve_heisenberg(h, t)
    entry = inversion_entry(tm, rep)
    values = _primitives(tm, rep)

    if method == "quadrature":
        anchor = t / 2.0 if anchor is None else anchor
        if not 0 < anchor <= t:
            raise InvalidArgumentError(f"anchor must lie in (0, t], got {anchor!r}.")
        start = _primitives(solve_heisenberg(h, anchor), rep)
        fields = {"a_tt": bilinear.c_tt, "a_00": bilinear.c_00, "a_t0": bilinear.c_t0,
                  "b_t": bilinear.c_t, "b_0": bilinear.c_0}
        values = {name: start[name] - _quad(lambda tau, f=coefficient: f(tau).real, anchor, t)
                  for name, coefficient in fields.items()}
    elif method != "closed":
        raise InvalidArgumentError(f"Unknown integration method '{method}'.")

    scalar = 0.0
    if h.has_drift:
        scalar = -_quad(lambda tau: bilinear.classical_scalar(tau).real, 0.0, t)

    logger.debug(f"Exponent ({rep.value}, t={t}, {method}): {values}, s={scalar}")
    return ExponentForm(rep=rep, time=float(t), hbar=h.hbar, s=complex(scalar), entry=entry,
                        **{name: complex(value) for name, value in values.items()})


def normalization_rate(bilinear: EndpointBilinear, t: float) -> complex:
    """d(log N)/dt = −(i/ħ)·(ordering remnant) required by the Schrödinger equation."""
    return -1j / bilinear.hamiltonian.hbar * bilinear.c_ordering(t)


def _delta_limit_normalization(hbar: float, entry: float) -> complex:
    return -0.5 * cmath.log(2j * math.pi * hbar * entry)


def determine_normalization(exponent: ExponentForm, h: QuadraticHamiltonian, t: float,
                            bilinear: Optional[EndpointBilinear] = None, anchor: Optional[float] = None) -> complex:
    """log N(t) for the prefactor, independent of both endpoints.

    Integrating d(log N)/dt = −(i/ħ)·remnant gives N ∝ σ(t)^(−1/2); matching
    the complex Fresnel integral of the short-time kernel to δ(q′ − q) fixes
    the constant to (2πiħ)^(−1/2). Principal branch throughout.

    Without a bilinear the integrated form is used directly. With one, the
    rate is integrated adaptively from the anchor (default t/2), where the
    delta-limit value is taken.
    """
    entry = exponent.entry
    # σ(τ) ≈ 2u·τ for small τ, u the weight of the complementary operator squared
    initial_slope = h.potential if exponent.rep is Representation.MOMENTUM else h.kinetic
    if entry == 0 or initial_slope == 0:
        raise DegenerateKernelError("Normalization requested for a degenerate exponent.")
    if math.copysign(1.0, entry) != math.copysign(1.0, initial_slope):
        raise BranchError(
            f"normalization factor changed sign on (0, {t}]: sigma = {entry:.6g}; "
            "the kernel would need a Maslov phase.")
    if bilinear is None:
        return _delta_limit_normalization(h.hbar, entry)

    anchor = t / 2.0 if anchor is None else anchor
    if not 0 < anchor <= t:
        raise InvalidArgumentError(f"anchor must lie in (0, t], got {anchor!r}.")
    start = _delta_limit_normalization(h.hbar, inversion_entry(solve_heisenberg(h, anchor), exponent.rep))
    # the rate is real before the first caustic
    flow = _quad(lambda tau: normalization_rate(bilinear, tau).real, anchor, t)
    logger.debug(f"log N from the ordering remnant: {start} + {flow} (anchor {anchor})")
    return start + flow


def _degenerate_kernel(h: QuadraticHamiltonian, t: float, tm) -> GaussianKernel:
    if abs(h.cross) > 1e-12:
        raise DegenerateMapError(
            "momentum is not conserved up to a shift when the cross term is non-zero; "
            "the distributional kernel is not supported.", tm.m21)
    a, d, e = h.kinetic, h.linear_p, h.linear_x
    phase = DeltaPhase(
        shift=-e * t,
        quadratic=a * t,
        linear=d * t - a * e * t ** 2,
        constant=a * e ** 2 * t ** 3 / 3.0 - d * e * t ** 2 / 2.0,
        hbar=h.hbar,
    )
    logger.warning(f"Kernel at t={t} is degenerate: {phase.describe()}")
    return GaussianKernel(rep=Representation.MOMENTUM, time=float(t), hbar=h.hbar,
                          degenerate=True, delta_phase=phase)


def build_kernel(h: QuadraticHamiltonian, t: float, rep: Representation, method: str = "closed") -> GaussianKernel:
    """Full pipeline: flow, ordering, exponent, normalization.

    method="quadrature" integrates the ordered coefficients and the ordering
    remnant numerically instead of using the closed primitives.
    """
    rep = Representation.parse(rep)
    _check_time(h, t)
    tm = solve_heisenberg(h, t)
    try:
        inversion = invert_endpoints(tm, rep)
    except DegenerateMapError:
        if rep is Representation.MOMENTUM:
            return _degenerate_kernel(h, t, tm)
        raise

    commutator = endpoint_commutator(tm, h, rep)
    bilinear = express_hamiltonian(h, inversion, commutator, t)
    exponent = integrate_exponent(bilinear, t, method)
    log_norm = determine_normalization(exponent, h, t, bilinear if method == "quadrature" else None)

    kernel = GaussianKernel(
        rep=rep, time=float(t), hbar=h.hbar,
        a_tt=exponent.a_tt, a_00=exponent.a_00, a_t0=exponent.a_t0,
        b_t=exponent.b_t, b_0=exponent.b_0, s=exponent.s,
        log_norm=log_norm,
    )
    logger.info(f"Built {rep.value} kernel at t={t}")
    return kernel


def evaluate_kernel(k: GaussianKernel, q_end, q_start):
    """K(q′, q); accepts scalars or broadcastable arrays."""
    if k.degenerate:
        raise DegenerateKernelError(
            "Degenerate kernels are distributions; use kernel.delta_phase instead of pointwise values.")
    value = np.exp(k.log_norm + k.exponent(np.asarray(q_end), np.asarray(q_start)))
    return complex(value) if np.ndim(value) == 0 else value


def compose_kernels(later: GaussianKernel, earlier: GaussianKernel) -> GaussianKernel:
    """∫ K_later(q″, q′)·K_earlier(q′, q) dq′ by the complex Gaussian identity.

    ∫ exp(α·x² + β·x) dx = √(π/−α)·exp(−β²/(4α)), principal branch.
    """
    if later.rep is not earlier.rep:
        raise RepresentationMismatchError("Kernels in different representations cannot be composed.")
    if later.degenerate or earlier.degenerate:
        raise DegenerateKernelError("Gaussian composition needs two non-degenerate kernels.")
    if later.hbar != earlier.hbar:
        raise InvalidArgumentError("Kernels with different hbar cannot be composed.")

    hbar = later.hbar
    width = later.a_00 + earlier.a_tt
    if abs(width) < 1e-14:
        raise DegenerateKernelError("Intermediate integral is not Gaussian (vanishing quadratic part).")
    link = later.b_0 + earlier.b_t
    alpha = 1j * width / hbar
    return GaussianKernel(
        rep=later.rep,
        time=later.time + earlier.time,
        hbar=hbar,
        a_tt=later.a_tt - later.a_t0 ** 2 / (4.0 * width),
        a_00=earlier.a_00 - earlier.a_t0 ** 2 / (4.0 * width),
        a_t0=-later.a_t0 * earlier.a_t0 / (2.0 * width),
        b_t=later.b_t - later.a_t0 * link / (2.0 * width),
        b_0=earlier.b_0 - earlier.a_t0 * link / (2.0 * width),
        s=later.s + earlier.s - link ** 2 / (4.0 * width),
        log_norm=later.log_norm + earlier.log_norm + 0.5 * cmath.log(math.pi / -alpha),
    )


def coefficient_residual(left: GaussianKernel, right: GaussianKernel) -> float:
    """Largest absolute difference over all exponent coefficients and log_norm."""
    return max(abs(getattr(left, name) - getattr(right, name)) for name in COEFFICIENTS)


def gaussian_action(k: GaussianKernel, q_end, center_q: float, center_conjugate: float, width: float):
    """∫ K(q′, q)·ψ(q) dq in closed form for the packet

        ψ(q) = (πw²)^(−1/4)·exp(−(q − q₀)²/(2w²) + iθq)
    """
    theta = k.rep.phase_slope(center_conjugate, k.hbar)
    q_end = np.asarray(q_end, dtype=float)

    def packet(q):
        return (math.pi * width ** 2) ** -0.25 * np.exp(-(q - center_q) ** 2 / (2.0 * width ** 2) + 1j * theta * q)

    if k.degenerate:
        source = q_end - k.delta_phase.shift
        return packet(source) * k.delta_phase(source)

    alpha = 1j * k.a_00 / k.hbar - 1.0 / (2.0 * width ** 2)
    beta = 1j * (k.a_t0 * q_end + k.b_0) / k.hbar + center_q / width ** 2 + 1j * theta
    gamma = (k.log_norm + 1j / k.hbar * (k.a_tt * q_end ** 2 + k.b_t * q_end + k.s)
             - center_q ** 2 / (2.0 * width ** 2) - 0.25 * math.log(math.pi * width ** 2))
    return np.exp(gamma + 0.5 * np.log(math.pi / -alpha) - beta ** 2 / (4.0 * alpha))


def probe_gaussian(evaluator: Callable[[float, Any, Any], complex], t: float, rep: Representation,
                   hbar: float, step: float = 1e-3) -> GaussianKernel:
    """Recover Gaussian coefficients from any kernel evaluator (t, q′, q) → K.

    Central second differences of log K are exact for a quadratic exponent, so
    the fit is limited only by round-off as long as every sampled phase
    difference stays below π.
    """
    rep = Representation.parse(rep)

    def k(u, v):
        return complex(evaluator(t, u, v))

    origin = k(0.0, 0.0)
    if origin == 0:
        raise DegenerateKernelError("Kernel vanishes at the origin; cannot probe its exponent.")
    u_plus, u_minus = k(step, 0.0), k(-step, 0.0)
    v_plus, v_minus = k(0.0, step), k(0.0, -step)
    both = k(step, step)

    to_coefficient = -1j * hbar
    return GaussianKernel(
        rep=rep, time=float(t), hbar=hbar,
        a_tt=to_coefficient * cmath.log(u_plus * u_minus / origin ** 2) / (2.0 * step ** 2),
        a_00=to_coefficient * cmath.log(v_plus * v_minus / origin ** 2) / (2.0 * step ** 2),
        a_t0=to_coefficient * cmath.log(both * origin / (u_plus * v_plus)) / step ** 2,
        b_t=to_coefficient * cmath.log(u_plus / u_minus) / (2.0 * step),
        b_0=to_coefficient * cmath.log(v_plus / v_minus) / (2.0 * step),
        log_norm=cmath.log(origin),
    )


def describe_exponent(k: GaussianKernel) -> str:
    """Readable form of the kernel, grouped like i[(q′² + q²)·A − 2q′q·B]/ħ when symmetric."""
    if k.degenerate:
        return f"K(p', p) = {k.delta_phase.describe()}"
    norm = cmath.exp(k.log_norm)
    prefix = f"K(q', q) = ({norm.real:.12g}{norm.imag:+.12g}j)"
    if abs(k.a_tt - k.a_00) < 1e-12 and k.b_t == 0 and k.b_0 == 0 and k.s == 0:
        return (f"{prefix} * exp(i[(q'^2 + q^2)*{k.a_tt.real:.12g} - 2q'q*{-k.a_t0.real / 2.0:.12g}]"
                f" / {k.hbar!r})")
    return (f"{prefix} * exp((i/{k.hbar!r})[{k.a_tt.real:.12g} q'^2 + {k.a_00.real:.12g} q^2 "
            f"+ {k.a_t0.real:.12g} q'q + {k.b_t.real:.12g} q' + {k.b_0.real:.12g} q + {k.s.real:.12g}])")
