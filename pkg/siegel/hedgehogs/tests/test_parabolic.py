import math

import numpy as np
from django.test import SimpleTestCase

from hedgehogs.compacta import AdmissibleDomain, GridSpec, hausdorff_cells
from hedgehogs.exceptions import OutsideSector, PreconditionError
from hedgehogs.germs import make_germ
from hedgehogs.parabolic import (TrackedDomain, abel_residual, axis_angles, axis_densities, fatou_coordinate,
                                 fatou_flower, petal_axes, self_intersects, track_backward, verify_lemma32)
from hedgehogs.series import TruncatedGerm

MOBIUS = make_germ('mobius')
QUADRATIC = make_germ('parabolic')
CUBIC = make_germ('parabolic-cubic')


class PetalTests(SimpleTestCase):

    def test_axis_angles(self):
        self.assertEqual(axis_angles(1, 1, 'attracting'), [math.pi])
        self.assertEqual(axis_angles(1, 1, 'repelling'), [0.0])
        np.testing.assert_allclose(axis_angles(1, 2, 'attracting'), [math.pi / 2, 3 * math.pi / 2])

    def test_chart_of_quadratic(self):
        chart = petal_axes(QUADRATIC)
        self.assertEqual(chart.d, 1)
        self.assertEqual(chart.chi0_scale, -1)
        self.assertEqual(chart.radius, 0.5)
        self.assertAlmostEqual(chart.half_angle, math.pi / 2)

    def test_chart_of_cubic(self):
        chart = petal_axes(CUBIC, 'repelling')
        self.assertEqual(chart.d, 2)
        self.assertAlmostEqual(chart.half_angle, math.pi / 4)
        np.testing.assert_allclose(chart.axis_angles, [0, math.pi], atol=1e-12)

    def test_identity_has_no_petals(self):
        with self.assertRaises(PreconditionError):
            petal_axes(TruncatedGerm.from_coefficients([1], order=10))

    def test_unknown_model(self):
        with self.assertRaises(ValueError):
            petal_axes(QUADRATIC, model='exact')


class FatouCoordinateTests(SimpleTestCase):

    def test_mobius_coordinate_is_minus_one_over_z(self):
        z = np.array([-0.05, -0.05 + 0.02j, -0.03 - 0.04j])
        for direction, points in (('attracting', z), ('repelling', -z)):
            chart = petal_axes(MOBIUS, direction)
            np.testing.assert_allclose(fatou_coordinate(MOBIUS, chart, points), -1 / points, atol=1e-9)

    def test_abel_equation_for_quadratic(self):
        rng = np.random.default_rng(7)
        z = -rng.uniform(0.02, 0.2, 100) * np.exp(1j * rng.uniform(-np.pi / 4, np.pi / 4, 100))
        chart = petal_axes(QUADRATIC)
        self.assertTrue(np.all(abel_residual(QUADRATIC, chart, z) <= 1e-6))
        leading = petal_axes(QUADRATIC, model='leading')
        self.assertGreater(abel_residual(QUADRATIC, leading, -0.05), 1e-5)

    def test_repelling_abel_equation(self):
        chart = petal_axes(QUADRATIC, 'repelling')
        self.assertLessEqual(abel_residual(QUADRATIC, chart, 0.05 + 0.01j), 1e-6)

    def test_cubic_abel_equation(self):
        chart = petal_axes(CUBIC)
        self.assertIn(-2, chart.coefficients)
        self.assertLessEqual(abel_residual(CUBIC, chart, 0.08j), 1e-6)

    def test_point_outside_sector(self):
        chart = petal_axes(QUADRATIC)
        with self.assertRaises(OutsideSector):
            fatou_coordinate(QUADRATIC, chart, 0.05)


class PolygonTests(SimpleTestCase):

    def setUp(self):
        self.square = TrackedDomain(np.array([0, 1, 1 + 1j, 1j]), 0.5 + 0.5j, 0)

    def test_square_geometry(self):
        self.assertAlmostEqual(self.square.diameter, math.sqrt(2))
        self.assertAlmostEqual(self.square.boundary_distance(), 0.5)
        self.assertAlmostEqual(self.square.boundary_distance(0.9 + 0.5j), 0.1)
        self.assertTrue(self.square.contains(0.5 + 0.5j))
        self.assertFalse(self.square.contains(1.5 + 0.5j))

    def test_self_intersection(self):
        self.assertFalse(self_intersects(self.square.vertices))
        self.assertTrue(self_intersects(np.array([0, 1 + 1j, 1, 1j])))


class TrackingTests(SimpleTestCase):

    def test_mobius_domains_shrink_towards_zero(self):
        domains = track_backward(MOBIUS, 0.2, 0.02, 100)
        self.assertEqual(len(domains), 101)
        self.assertAlmostEqual(domains[100].basepoint, 0.2 / (1 + 100 * 0.2), places=10)
        self.assertLess(domains[100].diameter, domains[0].diameter)
        self.assertTrue(all(D.contains(D.basepoint) for D in domains))

    def test_disk_outside_repelling_sector(self):
        with self.assertRaises(OutsideSector):
            track_backward(QUADRATIC, -0.2, 0.02, 10)
        with self.assertRaises(OutsideSector):
            track_backward(QUADRATIC, 0.2, 0.3, 10)

    def test_lemma32_for_mobius(self):
        report = verify_lemma32(MOBIUS, 0.2, 0.02, range(50, 501, 50))
        self.assertTrue(report.passed)
        self.assertAlmostEqual(report.fitted_slope, 2.0, delta=0.2)
        self.assertEqual(report.expected_slope, 2.0)

    def test_lemma32_for_quadratic(self):
        report = verify_lemma32(QUADRATIC, 0.2, 0.02, range(50, 501, 50))
        self.assertTrue(report.passed)
        self.assertAlmostEqual(report.fitted_slope, 2.0, delta=0.2)

    def test_lemma32_for_cubic(self):
        report = verify_lemma32(CUBIC, 0.2, 0.02, range(50, 501, 50))
        self.assertTrue(report.passed)
        self.assertAlmostEqual(report.fitted_slope, 3.0, delta=0.2)

    def test_lemma32_for_generic_germ(self):
        T = TruncatedGerm.from_coefficients([1, 1, 0.3], order=20)
        report = verify_lemma32(T, 0.2, 0.02, range(50, 501, 50))
        self.assertTrue(report.passed)
        self.assertAlmostEqual(report.fitted_slope, 2.0, delta=0.2)
        self.assertGreater(report.measured_constants['ratio_min'], 0)

    def test_precomputed_domains_are_reused(self):
        domains = track_backward(MOBIUS, 0.2, 0.02, 200)
        report = verify_lemma32(MOBIUS, 0.2, 0.02, [50, 100, 150, 200], domains=domains)
        self.assertEqual([s.k for s in report.samples], [50, 100, 150, 200])
        self.assertAlmostEqual(report.samples[0].error, domains[50].boundary_distance())


class FlowerTests(SimpleTestCase):

    def test_quadratic_flower_avoids_the_axis(self):
        grid = GridSpec.for_radius(0.2, 128, max_iter=200)
        flower = fatou_flower(QUADRATIC, AdmissibleDomain(0.2, 0.3), grid)
        densities = axis_densities(flower, petal_axes(QUADRATIC))
        self.assertGreater(densities['bisector'], densities['attracting'])
        self.assertGreater(densities['bisector'], densities['repelling'])

    def test_odd_germ_gives_symmetric_flower(self):
        T = TruncatedGerm.from_coefficients([1, 0, -1], order=20)
        grid = GridSpec.for_radius(0.2, 128, max_iter=200)
        flower = fatou_flower(T, AdmissibleDomain(0.2, 0.3), grid)
        self.assertLessEqual(hausdorff_cells(flower.mask, flower.mask[::-1, ::-1]), 1)
