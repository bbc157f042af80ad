import cmath
import math
import unittest

import numpy as np
from scipy.integrate import trapezoid

from schwinger_kernels.closed_forms import free_particle_kernels, ho_momentum_kernel
from schwinger_kernels.errors import (
    CausticError,
    DegenerateKernelError,
    InvalidArgumentError,
    RepresentationMismatchError,
)
from schwinger_kernels.kernel_builder import (
    GaussianKernel,
    build_kernel,
    coefficient_residual,
    compose_kernels,
    describe_exponent,
    determine_normalization,
    evaluate_kernel,
    gaussian_action,
    integrate_exponent,
    normalization_rate,
    probe_gaussian,
)
from schwinger_kernels.operator_ordering import express_hamiltonian
from schwinger_kernels.phase_dynamics import (
    QuadraticHamiltonian,
    Representation,
    endpoint_commutator,
    invert_endpoints,
    solve_heisenberg,
)

MOMENTUM = Representation.MOMENTUM
POSITION = Representation.POSITION


class TestOscillatorMomentumKernel(unittest.TestCase):

    def setUp(self):
        self.h = QuadraticHamiltonian.oscillator(1.0, 1.0)

    def test_exponent_matches_trigonometric_form(self):
        for t in (0.3, math.pi / 4.0, 1.2):
            k = build_kernel(self.h, t, MOMENTUM)
            self.assertLess(abs(k.a_tt - math.cos(t) / (2.0 * math.sin(t))), 1e-12)
            self.assertLess(abs(k.a_00 - math.cos(t) / (2.0 * math.sin(t))), 1e-12)
            self.assertLess(abs(k.a_t0 + 1.0 / math.sin(t)), 1e-12)
            for name in ("b_t", "b_0", "s"):
                self.assertEqual(getattr(k, name), 0)

    def test_normalization_modulus(self):
        m, omega, hbar, t = 2.0, 1.5, 0.7, 0.9
        k = build_kernel(QuadraticHamiltonian.oscillator(m, omega, hbar=hbar), t, MOMENTUM)
        expected = 1.0 / (2.0 * math.pi * hbar * m * omega * math.sin(omega * t))
        self.assertAlmostEqual(abs(cmath.exp(k.log_norm)) ** 2, expected, places=12)

    def test_quarter_period_values(self):
        k = build_kernel(self.h, math.pi / 2.0, MOMENTUM)
        norm = 1.0 / cmath.sqrt(2j * math.pi)
        self.assertLess(abs(evaluate_kernel(k, 0.0, 0.0) - norm), 1e-12)
        self.assertLess(abs(evaluate_kernel(k, 2.0, 3.0) - norm * cmath.exp(-6j)), 1e-12)

    def test_matches_hand_coded_kernel(self):
        reference = ho_momentum_kernel(1.0, 1.0, 1.0)
        k = build_kernel(self.h, 0.7, MOMENTUM)
        p = np.linspace(-3.0, 3.0, 13)
        np.testing.assert_allclose(evaluate_kernel(k, p[:, None], p[None, :]), reference(0.7, p[:, None], p[None, :]),
                                   rtol=1e-12, atol=1e-14)

    def test_array_and_scalar_evaluation(self):
        k = build_kernel(self.h, 0.5, MOMENTUM)
        self.assertIsInstance(evaluate_kernel(k, 1.0, 0.5), complex)
        self.assertEqual(evaluate_kernel(k, np.zeros(4), np.ones(4)).shape, (4,))

    def test_pretty_form(self):
        text = describe_exponent(build_kernel(self.h, math.pi / 4.0, MOMENTUM))
        self.assertIn("exp(i[(q'^2 + q^2)*0.5", text)
        self.assertIn("2q'q*0.707106781187", text)


class TestComposition(unittest.TestCase):

    def test_oscillator_semigroup(self):
        h = QuadraticHamiltonian.oscillator(1.0, 1.0)
        for t1, t2 in ((math.pi / 8.0, math.pi / 8.0), (math.pi / 6.0, math.pi / 12.0), (0.1, 0.3)):
            composed = compose_kernels(build_kernel(h, t2, MOMENTUM), build_kernel(h, t1, MOMENTUM))
            self.assertAlmostEqual(composed.time, t1 + t2)
            self.assertLess(coefficient_residual(composed, build_kernel(h, t1 + t2, MOMENTUM)), 1e-10)

    def test_driven_semigroup_in_position_space(self):
        h = QuadraticHamiltonian(kinetic=0.5, potential=0.5, cross=0.3, linear_p=0.2, linear_x=-0.4)
        composed = compose_kernels(build_kernel(h, 0.4, POSITION), build_kernel(h, 0.6, POSITION))
        self.assertLess(coefficient_residual(composed, build_kernel(h, 1.0, POSITION)), 1e-8)

    def test_rejects_mixed_representations(self):
        h = QuadraticHamiltonian.oscillator(1.0, 1.0)
        with self.assertRaises(RepresentationMismatchError):
            compose_kernels(build_kernel(h, 0.2, POSITION), build_kernel(h, 0.2, MOMENTUM))


class TestDriftedKernels(unittest.TestCase):

    def test_linear_potential_action(self):
        e, t = 0.8, 1.7
        k = build_kernel(QuadraticHamiltonian(kinetic=0.5, potential=0.0, linear_x=e), t, POSITION)
        self.assertAlmostEqual(k.a_tt.real, 1.0 / (2.0 * t), places=12)
        self.assertAlmostEqual(k.b_t.real, -e * t / 2.0, places=12)
        self.assertAlmostEqual(k.b_0.real, -e * t / 2.0, places=12)
        self.assertAlmostEqual(k.s.real, -e ** 2 * t ** 3 / 24.0, places=10)

    def test_quadrature_agrees_with_closed_primitives(self):
        h = QuadraticHamiltonian(kinetic=0.7, potential=0.4, cross=0.2, linear_p=0.3, linear_x=-0.5)
        t = 0.9
        for rep in (MOMENTUM, POSITION):
            tm = solve_heisenberg(h, t)
            bilinear = express_hamiltonian(h, invert_endpoints(tm, rep), endpoint_commutator(tm, h, rep), t)
            closed = integrate_exponent(bilinear, t)
            numeric = integrate_exponent(bilinear, t, method="quadrature")
            for name in ("a_tt", "a_00", "a_t0", "b_t", "b_0", "s"):
                self.assertLess(abs(getattr(closed, name) - getattr(numeric, name)), 1e-8, name)

    def test_normalization_from_the_ordering_remnant(self):
        h = QuadraticHamiltonian(kinetic=0.7, potential=0.4, cross=0.2, linear_p=0.3, linear_x=-0.5)
        t = 0.9
        for rep in (MOMENTUM, POSITION):
            tm = solve_heisenberg(h, t)
            bilinear = express_hamiltonian(h, invert_endpoints(tm, rep), endpoint_commutator(tm, h, rep), t)
            exponent = integrate_exponent(bilinear, t)
            closed = determine_normalization(exponent, h, t)
            for anchor in (0.05, t / 2.0, t):
                flowed = determine_normalization(exponent, h, t, bilinear, anchor=anchor)
                self.assertLess(abs(flowed - closed), 1e-9, (rep, anchor))

    def test_normalization_rate_is_the_log_derivative_of_the_prefactor(self):
        h = QuadraticHamiltonian(kinetic=0.7, potential=0.4, cross=0.2, linear_p=0.3, linear_x=-0.5)
        t, dt = 0.6, 1e-5
        tm = solve_heisenberg(h, t)
        bilinear = express_hamiltonian(h, invert_endpoints(tm, MOMENTUM), endpoint_commutator(tm, h, MOMENTUM), t)
        later, earlier = build_kernel(h, t + dt, MOMENTUM), build_kernel(h, t - dt, MOMENTUM)
        slope = (later.log_norm - earlier.log_norm) / (2.0 * dt)
        self.assertLess(abs(normalization_rate(bilinear, t) - slope), 1e-8)

    def test_quadrature_pipeline_matches_closed_pipeline(self):
        h = QuadraticHamiltonian(kinetic=0.7, potential=0.4, cross=0.2, linear_p=0.3, linear_x=-0.5)
        for rep in (MOMENTUM, POSITION):
            closed = build_kernel(h, 1.1, rep)
            numeric = build_kernel(h, 1.1, rep, method="quadrature")
            self.assertLess(coefficient_residual(closed, numeric), 1e-8, rep)

    def test_normalization_anchor_must_lie_in_the_interval(self):
        h = QuadraticHamiltonian.oscillator(1.0, 1.0)
        tm = solve_heisenberg(h, 0.5)
        bilinear = express_hamiltonian(h, invert_endpoints(tm, MOMENTUM), endpoint_commutator(tm, h, MOMENTUM), 0.5)
        exponent = integrate_exponent(bilinear, 0.5)
        with self.assertRaises(InvalidArgumentError):
            determine_normalization(exponent, h, 0.5, bilinear, anchor=0.8)

    def test_unknown_integration_method(self):
        h = QuadraticHamiltonian.oscillator(1.0, 1.0)
        tm = solve_heisenberg(h, 0.5)
        bilinear = express_hamiltonian(h, invert_endpoints(tm, MOMENTUM), endpoint_commutator(tm, h, MOMENTUM), 0.5)
        with self.assertRaises(InvalidArgumentError):
            integrate_exponent(bilinear, 0.5, method="simpson")


class TestDegenerateKernels(unittest.TestCase):

    def test_free_particle_momentum_kernel_is_a_delta(self):
        k = build_kernel(QuadraticHamiltonian.free(1.0), 2.0, MOMENTUM)
        self.assertTrue(k.degenerate)
        self.assertEqual(k.delta_phase.shift, 0.0)
        _, reference = free_particle_kernels(1.0, 1.0)
        p = np.linspace(-2.0, 2.0, 9)
        np.testing.assert_allclose(k.delta_phase(p), reference.phase(2.0, p), atol=1e-14)
        with self.assertRaises(DegenerateKernelError):
            evaluate_kernel(k, 0.0, 0.0)

    def test_linear_potential_shifts_momentum(self):
        k = build_kernel(QuadraticHamiltonian(kinetic=0.5, potential=0.0, linear_x=0.5), 2.0, MOMENTUM)
        self.assertTrue(k.degenerate)
        self.assertAlmostEqual(k.delta_phase.shift, -1.0)
        self.assertIn("delta(p' - p", describe_exponent(k))

    def test_free_particle_position_kernel(self):
        k = build_kernel(QuadraticHamiltonian.free(2.0), 0.6, POSITION)
        reference, _ = free_particle_kernels(2.0, 1.0)
        x = np.linspace(-1.0, 1.0, 5)
        np.testing.assert_allclose(evaluate_kernel(k, x[:, None], x[None, :]), reference(0.6, x[:, None], x[None, :]),
                                   rtol=1e-12)


class TestTimeDomain(unittest.TestCase):

    def setUp(self):
        self.h = QuadraticHamiltonian.oscillator(1.0, 1.0)

    def test_caustic_is_refused(self):
        for t in (math.pi, 4.0):
            with self.assertRaises(CausticError):
                build_kernel(self.h, t, MOMENTUM)

    def test_non_positive_or_non_finite_time(self):
        for t in (0.0, -0.5, float("nan"), float("inf")):
            with self.assertRaises(InvalidArgumentError):
                build_kernel(self.h, t, POSITION)


class TestRecordsAndProbes(unittest.TestCase):

    def test_record_restores_the_kernel(self):
        h = QuadraticHamiltonian(kinetic=0.6, potential=0.9, cross=0.2, linear_p=0.1, linear_x=-0.3)
        k = build_kernel(h, 0.8, POSITION)
        self.assertEqual(GaussianKernel.from_record(k.to_record()), k)

    def test_malformed_record(self):
        record = build_kernel(QuadraticHamiltonian.oscillator(1.0, 1.0), 0.5, MOMENTUM).to_record()
        del record["coefficients"]["a_t0"]
        with self.assertRaises(InvalidArgumentError):
            GaussianKernel.from_record(record)

    def test_probe_recovers_the_coefficients(self):
        h = QuadraticHamiltonian(kinetic=0.5, potential=0.5, cross=0.3, linear_p=0.2, linear_x=-0.4)
        k = build_kernel(h, 0.7, POSITION)
        pipeline = lambda t, q_end, q_start: evaluate_kernel(build_kernel(h, t, POSITION), q_end, q_start)
        probed = probe_gaussian(pipeline, 0.7, POSITION, h.hbar)
        for name in ("a_tt", "a_00", "a_t0", "b_t", "b_0"):
            self.assertLess(abs(getattr(probed, name) - getattr(k, name)), 1e-6, name)
        self.assertLess(abs(cmath.exp(probed.log_norm) - evaluate_kernel(k, 0.0, 0.0)), 1e-12)


class TestGaussianAction(unittest.TestCase):

    def test_matches_direct_quadrature(self):
        h = QuadraticHamiltonian.oscillator(1.0, 1.0)
        k = build_kernel(h, 0.7, MOMENTUM)
        q = np.linspace(-10.0, 10.0, 20001)
        center, conjugate, width = 0.5, 0.3, 1.0
        packet = ((math.pi * width ** 2) ** -0.25
                  * np.exp(-(q - center) ** 2 / (2.0 * width ** 2) + 1j * MOMENTUM.phase_slope(conjugate, 1.0) * q))
        for q_end in (-1.0, 0.0, 0.8):
            direct = trapezoid(evaluate_kernel(k, q_end, q) * packet, q)
            self.assertLess(abs(gaussian_action(k, q_end, center, conjugate, width) - direct), 1e-8)


if __name__ == '__main__':
    unittest.main()
