from ...compacta import escape_field, component_of_zero
from ...normal_form import reduce_to_order
from ...services import CompactRenderer
from ..base import ExperimentCommand


class Command(ExperimentCommand):
    help = ('Render the Siegel compact K(U) of a germ: PPM mask, optional iteration heatmap and a JSON sidecar. '
            'Example: render --germ quad --alpha-cf 0,1,1,1,1,1,1,1 --radius 0.2 --res 512 --out k.ppm')

    def add_experiment_arguments(self, parser):
        self.add_germ_arguments(parser)
        parser.add_argument('--out', required=True, help='mask PPM path; the sidecar is written next to it')
        parser.add_argument('--radius', type=float, help='radius of the admissible disk U')
        parser.add_argument('--margin', type=float, help='radius on which the germ is trusted (default 1.5 r)')
        parser.add_argument('--res', dest='resolution', type=int, help='grid resolution (pixels per side)')
        parser.add_argument('--max-iter', dest='max_iter', type=int, help='orbit length in each direction')
        parser.add_argument('--extent-factor', dest='extent_factor', type=float,
                            help='grid half-width as a multiple of the radius')
        parser.add_argument('--backward', choices=['series', 'newton'], help='evaluation of inverse steps')
        parser.add_argument('--reduce', type=int, help='render phi^-1 o f o phi = lambda z + O(z^N) instead of f')
        parser.add_argument('--heatmap', action='store_true', default=None,
                            help='also write an iteration-count heatmap (P6)')

    def run(self, config, options):
        germ = self.builder.germ()
        if config.get('reduce'):
            result = reduce_to_order(germ, config['reduce'], config['tol'])
            germ = result.reduced
            self.stdout.write(f'reduced to order {result.order_achieved} (residual {result.residual:.2e})')

        escape = escape_field(germ, self.builder.domain(), self.builder.grid(), config['backward'],
                              config['threads'])
        compact = component_of_zero(escape)
        sidecar = CompactRenderer(compact, escape).write(config['out'], germ, config, config['heatmap'])

        self.stdout.write(self.style.SUCCESS(
            f'K(U) for {germ.tag or "germ"}: area {compact.area:.6g}, interior {compact.interior_area:.6g}, '
            f'contact {compact.contact}; sidecar {sidecar}'))
