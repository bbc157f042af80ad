import math
import unittest

import numpy as np

from schwinger_kernels.operator_ordering import (
    ORDERED_MONOMIALS,
    express_hamiltonian,
    multiply,
    normal_order_product,
)
from schwinger_kernels.phase_dynamics import (
    QuadraticHamiltonian,
    Representation,
    endpoint_commutator,
    invert_endpoints,
    solve_heisenberg,
)
from schwinger_kernels.verification import random_hamiltonian


def ordered(h, t, rep, classical=False):
    tm = solve_heisenberg(h, t)
    return express_hamiltonian(h, invert_endpoints(tm, rep), endpoint_commutator(tm, h, rep), t,
                               classical=classical)


class TestOrderingRule(unittest.TestCase):

    def test_wrong_order_is_moved_with_its_commutator(self):
        terms = {"0t": 2.0, "t0": 1.0}
        remnant = normal_order_product(0.5j).apply(terms)
        self.assertEqual(terms, {"t0": 3.0, "1": 1j})
        self.assertEqual(remnant, 1j)

    def test_ordered_terms_are_untouched(self):
        terms = {"tt": 1.0, "t0": 2.0}
        self.assertEqual(normal_order_product(1j).apply(terms), 0.0)
        self.assertEqual(terms, {"tt": 1.0, "t0": 2.0})

    def test_product_keeps_operator_order(self):
        terms = multiply((0.0, 1.0, 0.0), (1.0, 0.0, 0.0))
        self.assertEqual(terms, {"0t": 1.0})


class TestOscillatorMomentumForm(unittest.TestCase):

    def setUp(self):
        self.h = QuadraticHamiltonian.oscillator(1.0, 1.0)

    def test_coefficients_follow_trigonometric_form(self):
        for t in (0.3, math.pi / 4.0, 1.2):
            bilinear = ordered(self.h, t, Representation.MOMENTUM)
            csc, cot = 1.0 / math.sin(t), 1.0 / math.tan(t)
            self.assertAlmostEqual(bilinear.c_tt(t).real, csc ** 2 / 2.0, places=12)
            self.assertAlmostEqual(bilinear.c_00(t).real, csc ** 2 / 2.0, places=12)
            self.assertAlmostEqual(bilinear.c_t0(t).real, -csc * cot, places=12)
            self.assertAlmostEqual(bilinear.c_ordering(t), -0.5j * cot, places=12)

    def test_ordering_remnant_vanishes_at_quarter_period(self):
        bilinear = ordered(self.h, math.pi / 2.0, Representation.MOMENTUM)
        self.assertAlmostEqual(abs(bilinear.c_ordering(math.pi / 2.0)), 0.0, places=12)

    def test_ordering_remnant_has_a_simple_pole_at_zero(self):
        h = QuadraticHamiltonian.oscillator(1.0, 2.0)
        for t in (1e-4, 1e-5, 1e-6):
            bilinear = ordered(h, t, Representation.MOMENTUM)
            scaled = t * bilinear.c_ordering(t)
            self.assertLess(abs(scaled - (-0.5j)) / 0.5, 1e-6, t)

    def test_other_times_are_recomputed(self):
        bilinear = ordered(self.h, 0.9, Representation.MOMENTUM)
        self.assertAlmostEqual(bilinear.c_tt(0.5).real, 0.5 / math.sin(0.5) ** 2, places=12)

    def test_serialization_keeps_the_later_operator_left(self):
        text = ordered(self.h, 0.7, Representation.MOMENTUM).serialize(0.7)
        self.assertTrue(any("Q(t)Q(0)" in line for line in text))
        self.assertFalse(any("Q(0)Q(t)" in line for line in text))


class TestClassicalLimit(unittest.TestCase):

    def test_free_particle_position_form(self):
        m, t = 2.0, 0.8
        bilinear = ordered(QuadraticHamiltonian.free(m), t, Representation.POSITION, classical=True)
        x_end, x_start = 1.3, -0.4
        expected = m * (x_end - x_start) ** 2 / (2.0 * t ** 2)
        self.assertAlmostEqual(bilinear.evaluate(t, x_end, x_start).real, expected, places=12)

    def test_matches_energy_of_the_classical_path(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            h = random_hamiltonian(rng)
            for t in rng.uniform(0.05, 0.9, size=10) * h.first_caustic():
                t = float(t)
                tm = solve_heisenberg(h, t)
                p_start, p_end = (float(v) for v in rng.uniform(-2.0, 2.0, size=2))
                x_start = (p_end - tm.m22 * p_start - tm.drift_p) / tm.m21
                energy = h.classical_energy(x_start, p_start)
                value = ordered(h, t, Representation.MOMENTUM, classical=True).evaluate(t, p_end, p_start)
                self.assertLess(abs(value - energy), 1e-10 * max(1.0, abs(energy)))

    def test_classical_form_drops_only_the_remnant(self):
        h = QuadraticHamiltonian(kinetic=0.6, potential=0.9, cross=0.2, linear_p=0.1, linear_x=-0.3)
        quantum = ordered(h, 0.7, Representation.POSITION)
        classical = ordered(h, 0.7, Representation.POSITION, classical=True)
        for key in ORDERED_MONOMIALS[:-1]:
            self.assertAlmostEqual(quantum.terms(0.7)[key], classical.terms(0.7)[key], places=14)
        self.assertAlmostEqual(quantum.classical_scalar(0.7), classical.c_scalar(0.7), places=14)
        self.assertAlmostEqual(quantum.evaluate(0.5, 1.0, 2.0, include_ordering=False),
                               classical.evaluate(0.5, 1.0, 2.0), places=12)


if __name__ == '__main__':
    unittest.main()
