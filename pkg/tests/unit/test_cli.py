import io
import json
import math
import tempfile
import unittest
from pathlib import Path

from schwinger_kernels.cli import EXIT_DEGENERATE, EXIT_FAILED_CHECKS, EXIT_INVALID, EXIT_OK, main


def run(*argv):
    stream = io.StringIO()
    code = main(list(argv), stream)
    return code, stream.getvalue()


class TestDerive(unittest.TestCase):

    def test_unit_oscillator_at_an_eighth_period(self):
        code, text = run("derive", "--m", "1", "--omega", "1", "--t", "0.785398", "--rep", "momentum")
        self.assertEqual(code, EXIT_OK)
        record = json.loads(text)
        self.assertEqual(record["rep"], "momentum")
        self.assertFalse(record["degenerate"])
        a_t0 = record["coefficients"]["a_t0"]
        self.assertAlmostEqual(a_t0[0], -1.414214, places=6)
        self.assertEqual(a_t0[1], 0.0)

    def test_several_times(self):
        code, text = run("derive", "--t", "0.3", "0.6")
        self.assertEqual(code, EXIT_OK)
        self.assertEqual([kernel["time"] for kernel in json.loads(text)["kernels"]], [0.3, 0.6])

    def test_pretty_output(self):
        code, text = run("derive", "--t", "0.5", "--pretty")
        self.assertEqual(code, EXIT_OK)
        self.assertIn("exp(i[(q'^2 + q^2)*", text)

    def test_zero_time_is_invalid(self):
        self.assertEqual(run("derive", "--t", "0")[0], EXIT_INVALID)

    def test_free_particle_momentum_kernel_is_degenerate(self):
        code, text = run("derive", "--omega", "0", "--t", "1.0", "--rep", "momentum")
        self.assertEqual(code, EXIT_DEGENERATE)
        self.assertEqual(text, "")

    def test_caustic(self):
        self.assertEqual(run("derive", "--t", "3.2", "--rep", "position")[0], EXIT_DEGENERATE)


class TestVerifyAndEvolve(unittest.TestCase):

    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.root = Path(self.directory.name)

    def tearDown(self):
        self.directory.cleanup()

    def test_corrupted_kernel_file_fails_verification(self):
        kernel_path = self.root / "kernel.json"
        self.assertEqual(run("derive", "--t", "0.7", "--output", str(kernel_path))[0], EXIT_OK)
        record = json.loads(kernel_path.read_text())
        record["coefficients"]["a_t0"][0] += 1e-3
        kernel_path.write_text(json.dumps(record))

        report_path = self.root / "report.json"
        code, _ = run("verify", "--t", "0.7", "--kernel-file", str(kernel_path), "--no-timing",
                      "--workers", "1", "--output", str(report_path))
        self.assertEqual(code, EXIT_FAILED_CHECKS)
        report = json.loads(report_path.read_text())
        self.assertFalse(report["overall"])
        self.assertEqual(report["entries"][0]["check_name"], "kernel_file_match")
        self.assertEqual(report["entries"][0]["status"], "failed")

    def test_missing_kernel_file(self):
        self.assertEqual(run("verify", "--kernel-file", str(self.root / "nope.json"))[0], EXIT_INVALID)

    def test_non_numeric_kernel_field_is_invalid_input(self):
        kernel_path = self.root / "kernel.json"
        self.assertEqual(run("derive", "--t", "0.7", "--output", str(kernel_path))[0], EXIT_OK)
        record = json.loads(kernel_path.read_text())
        record["time"] = "abc"
        kernel_path.write_text(json.dumps(record))
        self.assertEqual(run("verify", "--kernel-file", str(kernel_path))[0], EXIT_INVALID)

    def test_non_numeric_state_field_is_invalid_input(self):
        state_path = self.root / "state.json"
        state_path.write_text(json.dumps({"samples": [[1.0, 0.0], [0.0, 0.0]], "n": 2, "x_min": "left",
                                          "dx": 0.1, "rep": "position"}))
        self.assertEqual(run("evolve", "--t", "0.5", "--state-file", str(state_path))[0], EXIT_INVALID)

    def test_unit_oscillator_defaults_verify(self):
        code, text = run("verify", "--no-timing")
        self.assertEqual(code, EXIT_OK)
        self.assertTrue(json.loads(text)["overall"])

    def test_free_particle_verifies_with_skipped_entries(self):
        code, text = run("verify", "--omega", "0", "--no-timing")
        self.assertEqual(code, EXIT_OK)
        statuses = {entry["status"] for entry in json.loads(text)["entries"]}
        self.assertIn("skipped", statuses)
        self.assertNotIn("failed", statuses)

    def test_reports_without_timing_are_byte_identical(self):
        first = run("verify", "--t", "0.3", "--no-timing", "--workers", "3")
        second = run("verify", "--t", "0.3", "--no-timing", "--workers", "1")
        self.assertEqual(first, second)

    def test_verify_at_a_caustic_fails(self):
        self.assertEqual(run("verify", "--t", str(math.pi), "--no-timing")[0], EXIT_FAILED_CHECKS)

    def test_too_few_steps(self):
        self.assertEqual(run("evolve", "--t", "0.7", "--steps", "0")[0], EXIT_INVALID)

    def test_evolve_needs_exactly_one_time(self):
        self.assertEqual(run("evolve", "--t", "0.3", "0.7")[0], EXIT_INVALID)

    def test_engines_agree(self):
        results = {}
        for engine in ("oracle", "kernel"):
            code, text = run("evolve", "--t", "0.7", "--engine", engine, "--center-q", "1.0",
                             "--center-conjugate", "-0.5")
            self.assertEqual(code, EXIT_OK)
            results[engine] = json.loads(text)
        self.assertEqual(results["kernel"]["engine"], "kernel")
        for record in results.values():
            self.assertAlmostEqual(record["norm"], 1.0, places=8)
        self.assertAlmostEqual(results["oracle"]["expectation"], results["kernel"]["expectation"], places=5)

    def test_state_file_as_initial_state(self):
        state_path = self.root / "state.json"
        code, _ = run("evolve", "--t", "0.5", "--n", "1024", "--x-min", "-10", "--x-max", "10",
                      "--output", str(state_path))
        self.assertEqual(code, EXIT_OK)
        state = json.loads(state_path.read_text())["state"]
        state_path.write_text(json.dumps(state))
        code, text = run("evolve", "--t", "0.5", "--state-file", str(state_path))
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(json.loads(text)["state"]["n"], 1024)


if __name__ == '__main__':
    unittest.main()
