from pathlib import Path

from ...normal_form import FORMAL_BITS, formal_commutation_check
from ...serializers import CommutationReportSerializer
from ..base import ExperimentCommand


class Command(ExperimentCommand):
    help = ('Formal commutator f o g o f^-1 o g^-1 of two germs: "commute to order N" or the first '
            'obstruction. Example: commutator --f quad --g parabolic')

    def add_experiment_arguments(self, parser):
        parser.add_argument('--f', help='first germ family (default quad)')
        parser.add_argument('--g', help='second germ family (default quad-squared)')
        parser.add_argument('--exponent', type=int, help='exponent of the reduced family lambda z + z^e')
        self.add_alpha_arguments(parser)
        parser.add_argument('--out', help='report path (default commutator.json)')

    def run(self, config, options):
        bits = max(config['precision_bits'], FORMAL_BITS)
        f = self.builder.germ('f', default='quad', bits=bits)
        g = self.builder.germ('g', default='quad-squared', bits=bits)
        report = formal_commutation_check(f, g, config['tol'])

        out = Path(config.get('out') or 'commutator.json')
        self.writer.write_json(out, CommutationReportSerializer(report).data)
        self.stdout.write(f'[{f.tag}, {g.tag}]: {report.verdict}; report {out}')
