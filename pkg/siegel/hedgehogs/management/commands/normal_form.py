from pathlib import Path

from ...normal_form import linearize, reduce_to_order
from ...serializers import NormalFormSerializer
from ..base import ExperimentCommand


class Command(ExperimentCommand):
    help = ('Conjugate a germ to lambda z + O(z^N) by a polynomial phi and write phi, the reduced germ and '
            'the small divisors as JSON. Example: normal_form --germ quad --N 12')

    def add_experiment_arguments(self, parser):
        self.add_germ_arguments(parser)
        parser.add_argument('--linearize', action='store_true', default=None,
                            help='reduce through the full truncation order')
        parser.add_argument('--out', help='report path (default normal_form.json)')

    def run(self, config, options):
        germ = self.builder.germ()
        if config['linearize']:
            result = linearize(germ, config['tol'])
        else:
            result = reduce_to_order(germ, config.get('N') or germ.order, config['tol'])

        out = Path(config.get('out') or 'normal_form.json')
        self.writer.write_json(out, NormalFormSerializer(result).data)
        smallest = min(result.small_divisors) if result.small_divisors else float('nan')
        self.stdout.write(f'order {result.order_achieved}: residual {result.residual:.3e} (tol {result.tol:g}), '
                          f'smallest divisor {smallest:.3e}; report {out}')
        self.fail_unless(result.verified, f'reduced coefficients exceed tol {result.tol:g}; see {out}')
