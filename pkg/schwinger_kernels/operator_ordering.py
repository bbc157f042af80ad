"""Normal ordering of the Hamiltonian in endpoint operators.

The Hamiltonian is rewritten in the endpoint operators Q(t), Q(0) of the chosen
representation by substituting the endpoint inversion for the complementary
operator R(t). Products are expanded over the fixed basis

    Q(t)², Q(t)Q(0), Q(0)Q(t), Q(0)², Q(t), Q(0), 1

and every Q(0)Q(t) is rewritten as Q(t)Q(0) + [Q(0), Q(t)], so that matrix
elements ⟨q′,t| · |q,0⟩ turn operators into the numbers q′ and q.

Derivation used for both representations (Q endpoint operator, R its
complement, R(t) = α·Q(t) + β·Q(0) + γ, κ = [Q(0), Q(t)]):

    H = u·R² + v·Q² + c·(QR + RQ)/2 + w·R + z·Q

    c_tt = v + u·α² + c·α          c_t = z + 2u·α·γ + c·γ + w·α
    c_t0 = 2u·α·β + c·β            c_0 = 2u·β·γ + w·β
    c_00 = u·β²                     scalar = u·γ² + w·γ + (u·α·β + c·β/2)·κ

Momentum: Q = P, R = X, (u, v, w, z) = (b, a, e, d).
Position: Q = X, R = P, (u, v, w, z) = (a, b, d, e).

For the oscillator in momentum space this gives c_tt = c_00 = csc²(ωt)/(2m),
c_t0 = −csc(ωt)·cot(ωt)/m and the ordering remnant −(iħω/2)·cot(ωt), which
drives the 1/√sin(ωt) prefactor.
"""
import functools
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Tuple

from schwinger_kernels.phase_dynamics import (
    EndpointInversion,
    QuadraticHamiltonian,
    Representation,
    endpoint_commutator,
    invert_endpoints,
    solve_heisenberg,
)

logger = logging.getLogger(__name__)

LinearForm = Tuple[complex, complex, complex]

MONOMIALS = ("tt", "t0", "0t", "00", "t", "0", "1")
ORDERED_MONOMIALS = ("tt", "t0", "00", "t", "0", "1")

_PRODUCT_KEYS = {
    (0, 0): "tt", (0, 1): "t0", (1, 0): "0t", (1, 1): "00",
    (0, 2): "t", (2, 0): "t", (1, 2): "0", (2, 1): "0", (2, 2): "1",
}

_MONOMIAL_TEXT = {
    "tt": "Q(t)Q(t)", "t0": "Q(t)Q(0)", "0t": "Q(0)Q(t)", "00": "Q(0)Q(0)",
    "t": "Q(t)", "0": "Q(0)", "1": "1",
}


@dataclass(frozen=True)
class OrderingRule:
    """Q(0)Q(t) → Q(t)Q(0) + commutator."""
    commutator: complex

    def apply(self, terms: Dict[str, complex]) -> complex:
        """Rewrite wrong-ordered terms in place; return the scalar that was added."""
        wrong = terms.pop("0t", 0.0)
        if wrong == 0:
            return 0.0
        terms["t0"] = terms.get("t0", 0.0) + wrong
        remnant = wrong * self.commutator
        terms["1"] = terms.get("1", 0.0) + remnant
        return remnant


def normal_order_product(commutator: complex) -> OrderingRule:
    return OrderingRule(commutator=complex(commutator))


def multiply(left: LinearForm, right: LinearForm, scale: complex = 1.0) -> Dict[str, complex]:
    """Operator product left·right over the monomial basis, order preserved."""
    terms: Dict[str, complex] = {}
    for i, lc in enumerate(left):
        for j, rc in enumerate(right):
            if lc == 0 or rc == 0:
                continue
            key = _PRODUCT_KEYS[(i, j)]
            terms[key] = terms.get(key, 0.0) + scale * lc * rc
    return terms


def _accumulate(total: Dict[str, complex], terms: Dict[str, complex]) -> None:
    for key, value in terms.items():
        total[key] = total.get(key, 0.0) + value


def representation_coefficients(h: QuadraticHamiltonian, rep: Representation) -> Tuple[float, float, float, float]:
    """(u, v, w, z): weights of R², Q², R and Q for the representation's endpoint operator Q."""
    if Representation.parse(rep) is Representation.MOMENTUM:
        return h.potential, h.kinetic, h.linear_x, h.linear_p
    return h.kinetic, h.potential, h.linear_p, h.linear_x


def expand_ordered(h: QuadraticHamiltonian, inv: EndpointInversion, comm: complex) -> Tuple[Dict[str, complex], complex]:
    """Expand H(t) in endpoint operators and normal-order it.

    Returns the ordered terms and the part of the scalar that came from
    commutators.
    """
    u, v, w, z = representation_coefficients(h, inv.rep)
    q_end: LinearForm = (1.0, 0.0, 0.0)
    r_end: LinearForm = tuple(inv.at_end)

    terms: Dict[str, complex] = {}
    _accumulate(terms, multiply(r_end, r_end, u))
    _accumulate(terms, multiply(q_end, q_end, v))
    _accumulate(terms, multiply(q_end, r_end, h.cross / 2.0))
    _accumulate(terms, multiply(r_end, q_end, h.cross / 2.0))
    _accumulate(terms, {"t": w * r_end[0], "0": w * r_end[1], "1": w * r_end[2]})
    _accumulate(terms, {"t": z})

    remnant = normal_order_product(comm).apply(terms)
    return {key: complex(terms.get(key, 0.0)) for key in ORDERED_MONOMIALS}, complex(remnant)


@dataclass(frozen=True)
class EndpointBilinear:
    """Normal-ordered Hamiltonian with coefficients as functions of elapsed time."""
    rep: Representation
    hamiltonian: QuadraticHamiltonian
    time: float
    c_tt: Callable[[float], complex]
    c_t0: Callable[[float], complex]
    c_00: Callable[[float], complex]
    c_t: Callable[[float], complex]
    c_0: Callable[[float], complex]
    c_scalar: Callable[[float], complex]
    c_ordering: Callable[[float], complex]
    classical: bool = False
    _terms: Callable[[float], Dict[str, complex]] = field(default=None, repr=False, compare=False)

    def terms(self, tau: float) -> Dict[str, complex]:
        return dict(self._terms(tau))

    def classical_scalar(self, tau: float) -> complex:
        return self.c_scalar(tau) - self.c_ordering(tau)

    def evaluate(self, tau: float, q_end, q_start, include_ordering: bool = True):
        """Value of the ordered expression with Q(t) → q_end and Q(0) → q_start."""
        terms = self._terms(tau)
        value = (terms["tt"] * q_end ** 2 + terms["t0"] * q_end * q_start + terms["00"] * q_start ** 2
                 + terms["t"] * q_end + terms["0"] * q_start + terms["1"])
        if not include_ordering:
            value = value - self.c_ordering(tau)
        return value

    def serialize(self, tau: float) -> List[str]:
        """Human-readable monomials with their coefficients at time tau, Q(t) always leftmost."""
        terms = self._terms(tau)
        return [f"({terms[key].real:+.17g}{terms[key].imag:+.17g}j)·{_MONOMIAL_TEXT[key]}"
                for key in ORDERED_MONOMIALS if terms[key] != 0]


def express_hamiltonian(h: QuadraticHamiltonian, inv: EndpointInversion, comm: complex, t: float,
                        classical: bool = False) -> EndpointBilinear:
    """Ordered endpoint form of H, valid for every τ before the first caustic.

    At τ = t the supplied inversion and commutator are used; other times are
    recomputed from the flow. With classical=True every commutator is zero.
    """
    rep = inv.rep

    @functools.lru_cache(maxsize=256)
    def _terms_at(tau: float) -> Tuple[Dict[str, complex], complex]:
        if tau == t:
            inversion, commutator = inv, comm
        else:
            tm = solve_heisenberg(h, tau)
            inversion = invert_endpoints(tm, rep)
            commutator = endpoint_commutator(tm, h, rep)
        if classical:
            commutator = 0.0
        return expand_ordered(h, inversion, commutator)

    def _pick(key: str) -> Callable[[float], complex]:
        return lambda tau: _terms_at(float(tau))[0][key]

    bilinear = EndpointBilinear(
        rep=rep,
        hamiltonian=h,
        time=float(t),
        c_tt=_pick("tt"),
        c_t0=_pick("t0"),
        c_00=_pick("00"),
        c_t=_pick("t"),
        c_0=_pick("0"),
        c_scalar=_pick("1"),
        c_ordering=lambda tau: _terms_at(float(tau))[1],
        classical=classical,
        _terms=lambda tau: _terms_at(float(tau))[0],
    )
    logger.debug(f"Ordered Hamiltonian ({rep.value}, t={t}): {bilinear.serialize(t)}")
    return bilinear
