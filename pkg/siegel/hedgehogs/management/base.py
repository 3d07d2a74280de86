"""
Shared plumbing of the experiment commands: common flags, config merging,
logging levels and the mapping of library errors onto exit codes.
"""

import json
import logging

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
from rest_framework.exceptions import ValidationError

from ..exceptions import HedgehogError, PreconditionError
from ..serializers import ExperimentConfigSerializer
from ..services import ExperimentBuilder, ReportWriter

VERBOSITY_LEVELS = {0: logging.ERROR, 1: logging.WARNING, 2: logging.INFO, 3: logging.DEBUG}

# settings.HEDGEHOGS key -> experiment config key
SETTINGS_KEYS = {
    'THREADS': 'threads',
    'ORDER': 'order',
    'COEFF_TOL': 'tol',
    'PRECISION_BITS': 'precision_bits',
    'MAX_ITER': 'max_iter',
    'EXTENT_FACTOR': 'extent_factor',
    'REFINE_DEPTH': 'refine_depth',
    'RADIUS': 'radius',
    'RESOLUTION': 'resolution',
}

RANGE_HELP = "ranges: 'a:b:count' (geometric for reals, linear for integers), 'x,y,z' or a single value"

EXIT_PRECONDITION = 3
EXIT_USAGE = 2
EXIT_FAILURE = 1


class ExperimentCommand(BaseCommand):
    """
    Base class of render, verify, normal_form and commutator.

    Subclasses implement run(config, options) with the validated, merged
    experiment config (flags > --config file > settings.HEDGEHOGS).
    """

    def add_arguments(self, parser):
        parser.add_argument('--config', help='JSON file of experiment settings; flags override it')
        parser.add_argument('--order', type=int, help='truncation order of every germ')
        parser.add_argument('--precision-bits', dest='precision_bits', type=int,
                            help='coefficient precision: 53 for doubles, more for mpmath')
        parser.add_argument('--tol', type=float, help='coefficient tolerance')
        parser.add_argument('--threads', type=int, help='grid worker threads')
        self.add_experiment_arguments(parser)

    def add_experiment_arguments(self, parser):
        pass

    def add_germ_arguments(self, parser):
        parser.add_argument('--germ', help='germ family: rotation, quad, quad-squared, cubic, reduced, parabolic, '
                                           'parabolic-cubic, mobius')
        parser.add_argument('--coeffs', help="explicit coefficients 're,im;re,im;...' starting at a_1")
        parser.add_argument('--germ-file', dest='germ_file', help='germ JSON document')
        parser.add_argument('--N', type=int, help='reduction order N: f = lambda z + O(z^N)')
        parser.add_argument('--exponent', type=int,
                            help='exponent of the reduced family lambda z + z^e (defaults to --N)')
        self.add_alpha_arguments(parser)

    def add_alpha_arguments(self, parser):
        parser.add_argument('--alpha-cf', dest='alpha_cf', help="partial quotients '0,1,1,1,...'")
        parser.add_argument('--alpha-liouville', dest='alpha_liouville',
                            help="Liouville builder options 'depth=4,growth=exp,seed=1/2,cap=2000'")
        parser.add_argument('--alpha-rational', dest='alpha_rational', help="rational rotation number 'p/q'")
        parser.add_argument('--golden-depth', dest='golden_depth', type=int,
                            help='depth of the default golden-mean rotation number')

    def configure_logging(self, verbosity: int):
        logging.getLogger('hedgehogs').setLevel(VERBOSITY_LEVELS.get(verbosity, logging.DEBUG))

    def effective_config(self, options) -> dict:
        merged = {key: settings.HEDGEHOGS[name] for name, key in SETTINGS_KEYS.items() if name in settings.HEDGEHOGS}
        if options.get('config'):
            try:
                with open(options['config']) as handle:
                    from_file = json.load(handle)
            except (OSError, json.JSONDecodeError) as e:
                raise ValidationError({'config': f'cannot read {options["config"]}: {e}'})
            if not isinstance(from_file, dict):
                raise ValidationError({'config': 'config file must hold a JSON object'})
            merged.update(from_file)
        fields = ExperimentConfigSerializer().fields
        merged.update({key: value for key, value in options.items() if key in fields and value is not None})

        serializer = ExperimentConfigSerializer(data=merged)
        serializer.is_valid(raise_exception=True)
        return dict(serializer.validated_data)

    def handle(self, *args, **options):
        self.configure_logging(options['verbosity'])
        try:
            config = self.effective_config(options)
            self.builder = ExperimentBuilder(config)
            self.writer = ReportWriter(config)
            return self.run(config, options)
        except ValidationError as e:
            raise CommandError(f'invalid configuration: {e.detail}', returncode=EXIT_USAGE)
        except ValueError as e:
            raise CommandError(f'invalid argument: {e}', returncode=EXIT_USAGE)
        except PreconditionError as e:
            raise CommandError(f'precondition failed ({e.clause}): {e}', returncode=EXIT_PRECONDITION)
        except HedgehogError as e:
            raise CommandError(str(e), returncode=EXIT_FAILURE)
        except OSError as e:
            raise CommandError(f'file error: {e}', returncode=EXIT_FAILURE)

    def run(self, config: dict, options: dict):
        raise NotImplementedError

    def fail_unless(self, passed: bool, message: str):
        """Exit 1 after a completed run whose report does not pass"""
        if not passed:
            raise CommandError(message, returncode=EXIT_FAILURE)
