import numpy as np
from django.test import SimpleTestCase, tag

from hedgehogs.compacta import AdmissibleDomain, GridSpec, siegel_compact
from hedgehogs.exceptions import CompactTooSmall, NotReduced, OrbitExited, PreconditionError
from hedgehogs.germs import make_germ
from hedgehogs.normal_form import reduce_to_order
from hedgehogs.orbits import (circle_points, first_exit, iterate_until_exit, majorant_exit_time,
                              nonlinearity_constant, reduced_order, shadowing_error, shadowing_errors,
                              verify_lemma34, verify_lemma35, verify_prop33)
from hedgehogs.rotation import RotationNumber
from hedgehogs.series import GermMap, TruncatedGerm

GOLDEN = RotationNumber.golden(24)


def tangent_germ(N, order=20):
    """z + z^N"""
    return make_germ('reduced', 1, order, N)


def probe_sequence(d=1, start=0.19, ratio=0.9, count=60, factor=10.0):
    zn = start * ratio ** np.arange(count) + 0j
    return zn, factor * np.abs(zn) ** (d + 1)


class ExitTimeTests(SimpleTestCase):

    def test_envelope_holds_before_exit(self):
        f = tangent_germ(3)
        records = [iterate_until_exit(f, z, 2 * abs(z), 5000) for z in circle_points(0.05, 16)]
        # z + z^3 pulls orbits in along the imaginary axis
        self.assertTrue(records[4].survived)
        self.assertFalse(records[0].survived)
        for record in records:
            self.assertTrue(all(abs(w) <= 0.1 for w in record.points[:record.exit_index]))

    def test_start_outside_exit_disk(self):
        with self.assertRaises(PreconditionError):
            iterate_until_exit(tangent_germ(3), 0.3, 0.2, 10)

    def test_linear_germ_never_exits(self):
        f = make_germ('rotation', GOLDEN.multiplier(53), 10)
        self.assertIsNone(first_exit(f, circle_points(0.1, 8), 2000))

    def test_majorant_is_a_lower_bound(self):
        f = tangent_germ(3)
        C1 = nonlinearity_constant(f, 3, 0.2)
        self.assertAlmostEqual(C1, 1.05, places=6)
        for r in (0.1, 0.05, 0.02):
            self.assertGreaterEqual(first_exit(f, circle_points(r, 16), 10 ** 6), majorant_exit_time(C1, 3, r))

    def test_reduced_order(self):
        self.assertEqual(reduced_order(tangent_germ(5)), 5)
        self.assertEqual(reduced_order(make_germ('rotation', 1j, 12)), 13)


class Lemma34Tests(SimpleTestCase):

    def test_cubic_exit_time_slope(self):
        report = verify_lemma34(tangent_germ(3), 3, np.geomspace(0.1, 0.01, 6))
        self.assertTrue(report.passed)
        self.assertFalse(report.degenerate)
        self.assertAlmostEqual(report.fitted_slope, -2.0, delta=0.3)
        self.assertTrue(report.ceilings_hold)
        self.assertGreater(report.measured_constants['C'], 0)

    def test_quintic_exit_time_slope(self):
        report = verify_lemma34(tangent_germ(5), 5, np.geomspace(0.1, 0.04, 6))
        self.assertTrue(report.passed)
        self.assertAlmostEqual(report.fitted_slope, -4.0, delta=0.3)

    @tag('slow')
    def test_sextic_exit_time_slope(self):
        report = verify_lemma34(tangent_germ(6), 6, np.geomspace(0.1, 0.05, 6))
        self.assertTrue(report.passed)
        self.assertAlmostEqual(report.fitted_slope, -5.0, delta=0.3)

    def test_golden_germ_is_degenerate(self):
        f = make_germ('reduced', GOLDEN.multiplier(53), 20, 5)
        report = verify_lemma34(f, 5, np.geomspace(0.1, 0.05, 6), k_max=5000)
        self.assertTrue(report.degenerate)
        self.assertIsNone(report.fitted_slope)
        self.assertTrue(report.passed)
        self.assertTrue(report.notes)

    def test_needs_six_radii(self):
        with self.assertRaises(PreconditionError):
            verify_lemma34(tangent_germ(3), 3, [0.1, 0.05])

    def test_germ_must_be_reduced(self):
        with self.assertRaises(NotReduced) as cm:
            verify_lemma34(tangent_germ(3), 5, np.geomspace(0.1, 0.01, 6))
        self.assertEqual(cm.exception.index, 3)


class ShadowingTests(SimpleTestCase):

    def test_rotation_errors_stay_at_rounding_level(self):
        f = make_germ('rotation', GOLDEN.multiplier(53), 20)
        errors = shadowing_errors(f, GOLDEN, 0.05 + 0.01j, [1, 10, 100, 1000])
        self.assertTrue(np.all(errors < 1e-12))
        self.assertEqual(shadowing_error(f, GOLDEN, 0.05, 0), 0.0)

    def test_orbit_exit_is_reported(self):
        with self.assertRaises(OrbitExited):
            shadowing_errors(tangent_germ(2), RotationNumber.from_rational(1, 2), 0.1, [1000])

    def test_rotation_report_is_degenerate_and_passes(self):
        f = make_germ('rotation', GOLDEN.multiplier(53), 20)
        report = verify_lemma35(f, GOLDEN, 21, [0.02, 0.04], [10, 20, 50, 100])
        self.assertTrue(report.passed)
        self.assertTrue(report.degenerate)

    def test_linear_growth_for_half_turn(self):
        half = RotationNumber.from_rational(1, 2)
        f = TruncatedGerm.from_coefficients([-1, 0, 0, 0, 1], order=20)
        report = verify_lemma35(f, half, 5, [0.02, 0.03], [10, 20, 30, 50, 70, 100])
        self.assertTrue(report.passed)
        self.assertTrue(report.sharp)
        self.assertAlmostEqual(report.fitted_slope, 1.0, delta=0.2)
        self.assertLessEqual(report.measured_constants['C2_measured'], report.measured_constants['C2'])

    def test_golden_errors_stay_bounded(self):
        f = make_germ('reduced', GOLDEN.multiplier(53), 20, 5)
        report = verify_lemma35(f, GOLDEN, 5, [0.02, 0.03], [10, 20, 30, 50, 70, 100])
        self.assertTrue(report.ceilings_hold)
        self.assertTrue(report.passed)


class Prop33Tests(SimpleTestCase):

    def setUp(self):
        self.rotation = make_germ('rotation', GOLDEN.multiplier(53), 20)
        grid = GridSpec.for_radius(0.2, 128, max_iter=50)
        self.disk = siegel_compact(self.rotation, AdmissibleDomain(0.2, 0.3), grid)

    def test_rotation_probes_all_hit(self):
        zn, bn = probe_sequence()
        report = verify_prop33(self.rotation, GOLDEN, self.disk, 1, zn, bn)
        self.assertTrue(report.passed)
        self.assertTrue(report.hypothesis_ok)
        self.assertGreaterEqual(len(report.probes), 5)
        self.assertTrue(all(p.q <= 10 ** 5 for p in report.probes))
        self.assertAlmostEqual(report.epsilon, 0.9)

    def test_fast_decaying_balls_break_the_hypothesis(self):
        zn, _ = probe_sequence()
        report = verify_prop33(self.rotation, GOLDEN, self.disk, 1, zn, np.abs(zn) ** 4)
        self.assertFalse(report.hypothesis_ok)
        self.assertFalse(report.passed)

    def test_needs_reduced_germ(self):
        zn, bn = probe_sequence()
        with self.assertRaises(PreconditionError):
            verify_prop33(make_germ('quad', GOLDEN.multiplier(53), 20), GOLDEN, self.disk, 1, zn, bn)

    def test_nothing_probed_past_k0_does_not_pass(self):
        zn, bn = probe_sequence()
        report = verify_prop33(self.rotation, GOLDEN, self.disk, 1, zn, bn, max_q=1)
        self.assertTrue(report.hypothesis_ok)
        self.assertTrue(all(p.k <= report.k0 for p in report.probes))
        self.assertFalse(report.passed)
        self.assertTrue(any('beyond k0' in note for note in report.notes))

    def test_compact_must_reach_the_circle(self):
        zn, bn = probe_sequence(start=0.5)
        with self.assertRaises(CompactTooSmall):
            verify_prop33(self.rotation, GOLDEN, self.disk, 1, zn, bn)

    @tag('slow')
    def test_golden_quadratic_pipeline(self):
        d = 1
        f = make_germ('quad', GOLDEN.multiplier(53), 20)
        reduced = reduce_to_order(f, 2 * d + 5).reduced
        grid = GridSpec.for_radius(0.1, 512, max_iter=10_000)
        K = siegel_compact(reduced, AdmissibleDomain(0.1, 0.15), grid)
        zn, bn = probe_sequence(d=d, start=0.09)
        report = verify_prop33(reduced, GOLDEN, K, d, zn, bn, k0=1)
        self.assertTrue(report.passed)
        self.assertGreaterEqual(len(report.probes), 5)


class ExtendedPrecisionTests(SimpleTestCase):

    def test_germ_map_evaluates_arrays(self):
        f = make_germ('quad', GOLDEN.multiplier(128), 20, precision_bits=128)
        z = circle_points(0.1, 8)
        F = GermMap(f)
        values = F(z)
        self.assertEqual(values.shape, (8,))
        np.testing.assert_allclose(values.astype(complex), GermMap(f.to_precision(53))(z), atol=1e-15)
        np.testing.assert_allclose(F.remainder(z).astype(complex), z ** 2, atol=1e-15)

    def test_lemma34_with_128_bit_germ(self):
        f = make_germ('reduced', 1, 20, 3, precision_bits=128)
        report = verify_lemma34(f, 3, np.geomspace(0.1, 0.01, 6))
        self.assertTrue(report.passed)
        self.assertAlmostEqual(report.fitted_slope, -2.0, delta=0.3)
        self.assertAlmostEqual(report.measured_constants['C1'], 1.05, places=6)

    def test_lemma35_with_128_bit_rotation(self):
        f = make_germ('rotation', GOLDEN.multiplier(128), 20, precision_bits=128)
        report = verify_lemma35(f, GOLDEN, 21, [0.02, 0.04], [10, 20, 50, 100])
        self.assertTrue(report.ceilings_hold)
        self.assertTrue(report.passed)
        self.assertEqual(report.measured_constants['C1'], 0.0)
