import json
import math
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase
from PIL import Image


class CommandTestCase(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)

    def call(self, *args):
        out = StringIO()
        call_command(*args, stdout=out, stderr=StringIO())
        return out.getvalue()

    def exit_code(self, *args):
        with self.assertRaises(CommandError) as cm:
            self.call(*args)
        return cm.exception.returncode

    def read_json(self, name):
        return json.loads((self.dir / name).read_text())


class RenderCommandTests(CommandTestCase):

    def render(self, *extra):
        return self.call('render', '--germ', 'rotation', '--radius', '0.2', '--res', '128', '--max-iter', '50',
                         '--out', str(self.dir / 'k.ppm'), *extra)

    def test_rotation_renders_a_disk(self):
        output = self.render()
        self.assertIn('K(U) for rotation', output)
        sidecar = self.read_json('k.json')
        self.assertEqual(sidecar['resolution'], 128)
        self.assertEqual(sidecar['mask'], 'k.ppm')
        self.assertIsNone(sidecar['heatmap'])
        self.assertTrue(sidecar['contact'])
        self.assertAlmostEqual(sidecar['area'], math.pi * 0.04, delta=0.01)
        self.assertEqual(sidecar['germ']['tag'], 'rotation')
        self.assertEqual(sidecar['config']['radius'], 0.2)

        with Image.open(self.dir / 'k.ppm') as image:
            self.assertEqual(image.size, (128, 128))
            pixels = np.asarray(image.convert('L'))
        self.assertEqual(pixels[64, 64], 255)
        self.assertEqual(pixels[0, 0], 0)

    def test_heatmap(self):
        self.render('--heatmap')
        self.assertEqual(self.read_json('k.json')['heatmap'], 'k.heat.ppm')
        with Image.open(self.dir / 'k.heat.ppm') as image:
            self.assertEqual(image.mode, 'RGB')

    def test_out_is_required(self):
        with self.assertRaises(CommandError):
            self.call('render', '--germ', 'rotation')

    def test_flags_override_config_file(self):
        config = self.dir / 'experiment.json'
        config.write_text(json.dumps({'radius': 0.1, 'resolution': 64, 'max_iter': 20}))
        self.render('--config', str(config), '--radius', '0.15')
        sidecar = self.read_json('k.json')
        self.assertEqual(sidecar['radius'], 0.15)
        self.assertEqual(sidecar['max_iter'], 50)
        self.assertEqual(sidecar['config']['order'], 20)

    def test_config_file_fills_missing_flags(self):
        config = self.dir / 'experiment.json'
        config.write_text(json.dumps({'resolution': 64}))
        self.call('render', '--germ', 'rotation', '--config', str(config), '--max-iter', '20',
                  '--out', str(self.dir / 'k.ppm'))
        self.assertEqual(self.read_json('k.json')['resolution'], 64)

    def test_invalid_config_exits_2(self):
        config = self.dir / 'experiment.json'
        config.write_text(json.dumps({'radius': 0.2, 'margin': 0.1}))
        self.assertEqual(self.exit_code('render', '--config', str(config), '--out', str(self.dir / 'k.ppm')), 2)
        self.assertEqual(self.exit_code('render', '--config', str(self.dir / 'missing.json'),
                                        '--out', str(self.dir / 'k.ppm')), 2)

    def test_bad_coefficients_exit_2(self):
        self.assertEqual(self.exit_code('render', '--coeffs', '1,2,3', '--out', str(self.dir / 'k.ppm')), 2)


class VerifyCommandTests(CommandTestCase):

    def test_lemma34_for_cubic(self):
        output = self.call('verify', '34', '--coeffs', '1;0;1', '--N', '3', '--out', str(self.dir / 'l34.json'))
        self.assertIn('verification 34 passed', output)
        report = self.read_json('l34.json')
        self.assertTrue(report['pass'])
        self.assertEqual(len(report['samples']), 6)
        self.assertEqual(report['config']['N'], 3)
        header = (self.dir / 'l34.csv').read_text().splitlines()[0]
        self.assertEqual(header, 'r,M,error_k,ceilings,pass')

    def test_failed_verification_exits_1_after_writing(self):
        code = self.exit_code('verify', '34', '--coeffs', '1;0;1', '--N', '3', '--slope-tolerance', '0',
                              '--out', str(self.dir / 'l34.json'))
        self.assertEqual(code, 1)
        self.assertFalse(self.read_json('l34.json')['pass'])

    def test_lemma35_for_rotation(self):
        self.call('verify', '35', '--germ', 'rotation', '--out', str(self.dir / 'l35.json'))
        report = self.read_json('l35.json')
        self.assertTrue(report['pass'])
        self.assertTrue(report['degenerate'])

    def test_lemma32_writes_domains(self):
        self.call('verify', '32', '--n-range', '50:200:4', '--out', str(self.dir / 'l32.json'))
        self.assertTrue(self.read_json('l32.json')['pass'])
        domains = self.read_json('l32_domains.json')['domains']
        self.assertEqual([d['n'] for d in domains], [0, 50, 100, 150, 200])
        self.assertEqual(domains[0]['basepoint'], [0.2, 0.0])

    def test_prop33_without_compact_exits_3(self):
        self.assertEqual(self.exit_code('verify', 'prop33', '--out', str(self.dir / 'p.json')), 3)

    def test_prop33_on_rendered_disk(self):
        self.call('render', '--germ', 'rotation', '--radius', '0.2', '--res', '128', '--max-iter', '50',
                  '--out', str(self.dir / 'k.ppm'))
        output = self.call('verify', 'prop33', '--compact', str(self.dir / 'k.json'), '--out', str(self.dir / 'p.json'))
        self.assertIn('verification prop33 passed', output)
        report = self.read_json('p.json')
        self.assertTrue(report['pass'])
        self.assertTrue(all(p['q'] <= 10 ** 5 for p in report['probes']))

    def test_germ_that_is_not_reduced_exits_3(self):
        self.assertEqual(self.exit_code('verify', '34', '--coeffs', '1;0;1', '--N', '5',
                                        '--out', str(self.dir / 'l34.json')), 3)

    def test_unknown_lemma(self):
        with self.assertRaises(CommandError):
            self.call('verify', '99')


class NormalFormCommandTests(CommandTestCase):

    def test_golden_quadratic_to_order_twelve(self):
        output = self.call('normal_form', '--germ', 'quad', '--N', '12', '--order', '12',
                           '--out', str(self.dir / 'nf.json'))
        self.assertIn('order 12', output)
        report = self.read_json('nf.json')
        self.assertTrue(report['verified'])
        self.assertEqual(report['order_achieved'], 12)
        self.assertEqual(len(report['phi']['coeffs']), 12)

    def test_family_exponent_is_separate_from_reduction_order(self):
        self.call('normal_form', '--germ', 'reduced', '--exponent', '4', '--N', '8',
                  '--out', str(self.dir / 'nf.json'))
        report = self.read_json('nf.json')
        self.assertTrue(report['verified'])
        self.assertEqual(report['order_achieved'], 8)
        self.assertGreater(abs(complex(*report['phi']['coeffs'][3])), 0.4)
        self.assertTrue(all(abs(complex(*c)) < 1e-9 for c in report['reduced']['coeffs'][1:7]))

    def test_resonant_multiplier_exits_3(self):
        self.assertEqual(self.exit_code('normal_form', '--germ', 'quad', '--alpha-rational', '1/3',
                                        '--N', '6', '--out', str(self.dir / 'nf.json')), 3)

    def test_two_alphas_exit_2(self):
        self.assertEqual(self.exit_code('normal_form', '--alpha-rational', '1/3', '--alpha-cf', '0,2,2',
                                        '--out', str(self.dir / 'nf.json')), 2)


class CommutatorCommandTests(CommandTestCase):

    def test_germ_commutes_with_its_square(self):
        output = self.call('commutator', '--f', 'quad', '--g', 'quad-squared', '--out', str(self.dir / 'c.json'))
        self.assertIn('commute to order 20', output)
        report = self.read_json('c.json')
        self.assertTrue(report['commute'])
        self.assertIsNone(report['obstruction_degree'])

    def test_reduced_family_commutes_with_itself(self):
        output = self.call('commutator', '--f', 'reduced', '--g', 'reduced', '--exponent', '3',
                           '--out', str(self.dir / 'c.json'))
        self.assertIn('commute to order', output)

    def test_parabolic_obstruction(self):
        output = self.call('commutator', '--f', 'quad', '--g', 'parabolic', '--out', str(self.dir / 'c.json'))
        self.assertIn('obstruction', output)
        self.assertFalse(self.read_json('c.json')['commute'])
