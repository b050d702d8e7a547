"""Shared plumbing for the laboratory management commands."""
import logging
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from snakelab.exceptions import InternalConsistencyError, SnakelabError, VerificationError

from .config import ExperimentConfig

logger = logging.getLogger(__name__)

VERIFICATION_FAILURE = 1
USAGE_ERROR = 2


def add_config_arguments(parser):
    parser.add_argument('--config', help="Experiment config file ([graph] [chunk] [snake] [run])")
    graph = parser.add_argument_group('graph')
    graph.add_argument('--family', help="cycle, hypercube, torus, torus2, random_cayley or cayley")
    graph.add_argument('--n', type=int)
    graph.add_argument('--dim', type=int)
    graph.add_argument('--group', help="Group spec, e.g. power(cyclic(2),6) or symmetric(4)")
    graph.add_argument('--generators', help="Comma separated generator ids")
    graph.add_argument('--random-s', dest='random_s', type=int,
                       help="Sequence length for random_cayley")
    graph.add_argument('--graph-file', dest='graph_file')
    chunk = parser.add_argument_group('chunk')
    chunk.add_argument('--method', help="uniform_ball, subproduct(g,...), lazy_walk, uniform_all, point_mass")
    chunk.add_argument('--s', type=int, help="Chunk length (defaults to the diameter)")
    snake = parser.add_argument_group('snake')
    snake.add_argument('--ell', type=int)
    snake.add_argument('--c-ell', dest='c_ell', type=float)
    snake.add_argument('--eps', type=float)
    snake.add_argument('--consist-threshold', dest='consist_threshold', type=float)
    snake.add_argument('--good-prob-threshold', dest='good_prob_threshold', type=float)
    snake.add_argument('--x0', type=int)
    run = parser.add_argument_group('run')
    run.add_argument('--trials', type=int)
    run.add_argument('--seed', type=int)
    run.add_argument('--out')
    run.add_argument('--budget', type=int, help="Oracle query budget for sweeps")


class LabCommand(BaseCommand):
    """Base for commands driven by an ExperimentConfig.

    Subclasses implement ``run(config, **options)``. Laboratory errors become
    ``CommandError`` with exit status 1 for failed checks and 2 otherwise.
    """
    requires_system_checks = []

    def add_arguments(self, parser):
        add_config_arguments(parser)
        self.add_lab_arguments(parser)

    def add_lab_arguments(self, parser):
        pass

    def handle(self, *args, **options):
        try:
            config = ExperimentConfig.from_options(options)
            run_options = {k: v for k, v in options.items() if k != 'config'}
            self.run(config, **run_options)
        except (VerificationError, InternalConsistencyError) as exc:
            logger.warning("%s failed: %s", self.__module__.rsplit('.', 1)[-1], exc)
            raise CommandError(str(exc), returncode=VERIFICATION_FAILURE) from exc
        except SnakelabError as exc:
            raise CommandError(str(exc), returncode=USAGE_ERROR) from exc

    def run(self, config, **options):
        raise NotImplementedError

    def line(self, text=''):
        self.stdout.write(text)

    def output_dir(self, config):
        """The ``--out`` directory, created on demand; None when unset."""
        if not config.out:
            return None
        path = Path(config.out)
        path.mkdir(parents=True, exist_ok=True)
        return path
