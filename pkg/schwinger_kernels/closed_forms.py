"""Hand-coded reference kernels used to cross-check the pipeline.

Nothing here calls the pipeline: every evaluator is typed in from its final
formula so that agreement with build_kernel is an independent check.
"""
import logging
from dataclasses import dataclass
from typing import Any, Callable, Optional, Tuple

import numpy as np

from schwinger_kernels.errors import DegenerateKernelError, InvalidArgumentError
from schwinger_kernels.phase_dynamics import Representation

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReferenceKernel:
    name: str
    rep: Representation
    hbar: float
    evaluator: Callable[[float, Any, Any], Any]
    validity: Tuple[float, float]
    phase: Optional[Callable[[float, Any], Any]] = None

    @property
    def degenerate(self) -> bool:
        return self.phase is not None

    def contains(self, t: float) -> bool:
        lower, upper = self.validity
        return lower < t < upper

    def __call__(self, t: float, q_end, q_start):
        if not self.contains(t):
            lower, upper = self.validity
            raise InvalidArgumentError(f"{self.name}: t = {t} outside the validity interval ({lower}, {upper}).")
        return self.evaluator(t, q_end, q_start)


def _positive(**values: float) -> None:
    for name, value in values.items():
        if not value > 0:
            raise InvalidArgumentError(f"{name} must be strictly positive, got {value!r}.")


def ho_momentum_kernel(m: float, omega: float, hbar: float) -> ReferenceKernel:
    _positive(m=m, omega=omega, hbar=hbar)
    validity = (0.0, np.pi / omega)

    def evaluator(t, p_end, p_start):
        sin, cos = np.sin(omega * t), np.cos(omega * t)
        norm = 1.0 / np.sqrt(2j * np.pi * hbar * m * omega * sin)
        return norm * np.exp(1j * ((p_end ** 2 + p_start ** 2) * cos - 2.0 * p_end * p_start)
                             / (2.0 * m * omega * hbar * sin))

    return ReferenceKernel(name="ho_momentum", rep=Representation.MOMENTUM, hbar=hbar,
                           evaluator=evaluator, validity=validity)


def ho_position_kernel(m: float, omega: float, hbar: float) -> ReferenceKernel:
    _positive(m=m, omega=omega, hbar=hbar)
    validity = (0.0, np.pi / omega)

    def evaluator(t, x_end, x_start):
        sin, cos = np.sin(omega * t), np.cos(omega * t)
        norm = np.sqrt(m * omega / (2j * np.pi * hbar * sin))
        return norm * np.exp(1j * m * omega * ((x_end ** 2 + x_start ** 2) * cos - 2.0 * x_end * x_start)
                             / (2.0 * hbar * sin))

    return ReferenceKernel(name="ho_position", rep=Representation.POSITION, hbar=hbar,
                           evaluator=evaluator, validity=validity)


def free_particle_kernels(m: float, hbar: float) -> Tuple[ReferenceKernel, ReferenceKernel]:
    """(position kernel, momentum delta kernel) of the free particle."""
    _positive(m=m, hbar=hbar)
    validity = (0.0, np.inf)

    def position(t, x_end, x_start):
        return np.sqrt(m / (2j * np.pi * hbar * t)) * np.exp(1j * m * (x_end - x_start) ** 2 / (2.0 * hbar * t))

    def momentum(t, p_end, p_start):
        raise DegenerateKernelError("The free momentum kernel is δ(p′ − p)·phase; use its phase instead.")

    def phase(t, p):
        return np.exp(-1j * p ** 2 * t / (2.0 * m * hbar))

    return (
        ReferenceKernel(name="free_position", rep=Representation.POSITION, hbar=hbar,
                        evaluator=position, validity=validity),
        ReferenceKernel(name="free_momentum", rep=Representation.MOMENTUM, hbar=hbar,
                        evaluator=momentum, validity=(-np.inf, np.inf), phase=phase),
    )
