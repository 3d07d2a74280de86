import json

from django.test import SimpleTestCase
from mpmath import mp, mpc

from hedgehogs.germs import make_germ
from hedgehogs.orbits import Sample, VerificationReport
from hedgehogs.rotation import RotationNumber
from hedgehogs.serializers import (ComplexField, ExperimentConfigSerializer, GermSerializer,
                                   RotationNumberSerializer, SampleSerializer, VerificationReportSerializer)
from hedgehogs.series import TruncatedGerm, coefficient_distance

BASE_CONFIG = {
    'order': 20,
    'precision_bits': 53,
    'tol': 1e-9,
    'threads': 1,
    'max_iter': 100,
    'extent_factor': 1.25,
    'refine_depth': 1000,
}


class GermSerializerTests(SimpleTestCase):

    def test_double_germ_document(self):
        f = TruncatedGerm.from_coefficients([0.5j, 1, -0.25], 'sample', order=4)
        data = GermSerializer(f).data
        self.assertEqual(data['order'], 4)
        self.assertEqual(data['coeffs'][0], [0.0, 0.5])
        self.assertEqual(data['coeffs'][3], [0.0, 0.0])
        self.assertEqual(data['tag'], 'sample')

        serializer = GermSerializer(data=json.loads(json.dumps(data)))
        self.assertTrue(serializer.is_valid(), serializer.errors)
        self.assertEqual(coefficient_distance(serializer.save(), f), 0)

    def test_extended_precision_keeps_digits(self):
        lam = RotationNumber.golden(24, precision_bits=200).multiplier(200)
        f = make_germ('quad', lam, 6, precision_bits=200)
        data = GermSerializer(f).data
        self.assertIsInstance(data['coeffs'][0][0], str)

        serializer = GermSerializer(data=data)
        self.assertTrue(serializer.is_valid(), serializer.errors)
        g = serializer.save()
        self.assertEqual(g.precision_bits, 200)
        with mp.workprec(200):
            self.assertLess(abs(mpc(g.multiplier) - lam), mp.mpf(2) ** -190)

    def test_coefficient_count_must_match_order(self):
        serializer = GermSerializer(data={'order': 3, 'coeffs': [[1, 0], [1, 0]]})
        self.assertFalse(serializer.is_valid())
        self.assertIn('coeffs', serializer.errors)

    def test_zero_multiplier_rejected(self):
        serializer = GermSerializer(data={'order': 2, 'coeffs': [[0, 0], [1, 0]]})
        self.assertFalse(serializer.is_valid())

    def test_non_numeric_coefficient(self):
        serializer = GermSerializer(data={'order': 2, 'coeffs': [['one', 0], [1, 0]]})
        self.assertFalse(serializer.is_valid())


class RotationNumberSerializerTests(SimpleTestCase):

    def test_document(self):
        data = RotationNumberSerializer(RotationNumber((0, 2, 3), precision_bits=64)).data
        self.assertEqual(data['pq'], [0, 2, 3])
        self.assertEqual(data['convergents'], [[0, 1], [1, 2], [3, 7]])
        self.assertTrue(data['value'].startswith('0.4'))

    def test_create(self):
        serializer = RotationNumberSerializer(data={'pq': [0, 1, 1, 1, 1]})
        self.assertTrue(serializer.is_valid(), serializer.errors)
        self.assertEqual(serializer.save().q(4), 5)

    def test_rejects_bad_quotients(self):
        self.assertFalse(RotationNumberSerializer(data={'pq': [0, 2, 0]}).is_valid())
        self.assertFalse(RotationNumberSerializer(data={'pq': [1, 2]}).is_valid())


class ReportSerializerTests(SimpleTestCase):

    def test_sample_row_uses_report_names(self):
        data = SampleSerializer(Sample(r=0.1, M=42, error=1e-3, ceiling=2e-3, ok=False)).data
        self.assertEqual(data['error_k'], 1e-3)
        self.assertIs(data['pass'], False)
        self.assertIsNone(data['k'])

    def test_verification_report(self):
        report = VerificationReport('lemma34', [Sample(r=0.1, M=10)], -2.0, -2.0, 0.3, {'C': 1.5}, True)
        data = VerificationReportSerializer(report).data
        self.assertIs(data['pass'], True)
        self.assertEqual(data['measured_constants'], {'C': 1.5})
        self.assertEqual(len(data['samples']), 1)
        self.assertIsNone(data['sharp'])

    def test_complex_field(self):
        field = ComplexField()
        self.assertEqual(field.to_representation(1 - 2j), [1.0, -2.0])
        self.assertEqual(field.to_internal_value([0.5, 0.25]), 0.5 + 0.25j)


class ExperimentConfigTests(SimpleTestCase):

    def validate(self, **overrides):
        serializer = ExperimentConfigSerializer(data={**BASE_CONFIG, **overrides})
        return serializer.is_valid(), serializer

    def test_defaults(self):
        ok, serializer = self.validate()
        self.assertTrue(ok, serializer.errors)
        self.assertEqual(serializer.validated_data['golden_depth'], 24)
        self.assertEqual(serializer.validated_data['backward'], 'series')
        self.assertEqual(serializer.validated_data['max_q'], 10 ** 5)

    def test_one_alpha_only(self):
        ok, _ = self.validate(alpha_cf='0,2,2', alpha_rational='1/3')
        self.assertFalse(ok)

    def test_one_germ_source_only(self):
        ok, _ = self.validate(germ='quad', coeffs='1,0;1,0')
        self.assertFalse(ok)

    def test_margin_above_radius(self):
        ok, serializer = self.validate(radius=0.2, margin=0.1)
        self.assertFalse(ok)
        self.assertIn('margin', serializer.errors)

    def test_unknown_family(self):
        ok, serializer = self.validate(germ='henon')
        self.assertFalse(ok)
        self.assertIn('germ', serializer.errors)

    def test_resolution_floor(self):
        ok, serializer = self.validate(resolution=16)
        self.assertFalse(ok)
        self.assertIn('resolution', serializer.errors)

    def test_N_bounded_by_order(self):
        ok, serializer = self.validate(N=30)
        self.assertFalse(ok)
        self.assertIn('N', serializer.errors)

    def test_exponent_within_order(self):
        ok, serializer = self.validate(germ='reduced', exponent=30)
        self.assertFalse(ok)
        self.assertIn('exponent', serializer.errors)
