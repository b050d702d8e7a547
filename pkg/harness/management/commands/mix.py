from groups.services import build_group
from harness.base import LabCommand
from harness.suite import chain_bound_trials
from mixing.formats import write_distribution
from mixing.services import er_generator_experiment
from snakelab.exceptions import ArgumentError, VerificationError


class Command(LabCommand):
    help = "Chunk distributions, Erdos-Renyi generator experiments and total variation chain checks"

    def add_lab_arguments(self, parser):
        parser.add_argument('action', nargs='?', default='chunk', choices=('chunk', 'er', 'chain'))
        parser.add_argument('--delta', type=float, default=0.25)
        parser.add_argument('--shape', help="Joint shape for chain checks, e.g. 2,4")

    def run(self, config, **options):
        getattr(self, f"run_{options['action']}")(config, **options)

    def run_chunk(self, config, **options):
        graph = config.build_graph()
        chunk = config.build_chunk(graph)
        self.line(f"D_{chunk.radius} method={chunk.method} delta={chunk.delta:.10g} "
                  f"support={chunk.support.size}")
        if config.out:
            write_distribution(chunk.dist, config.out, chunk.delta)
            self.line(f"wrote {config.out}")

    def run_er(self, config, delta, **options):
        if not config.group or config.s is None:
            raise ArgumentError("mix er needs --group and --s")
        group = build_group(config.group)
        result = er_generator_experiment(group, config.s, delta, config.trials or 200, config.run_seed)
        self.line(f"group={group.spec} |G|={group.order} s={config.s} delta={delta}")
        self.line(f"delta-uniform: {result.passes}/{result.trials} = {result.fraction:.6g} "
                  f"(std err {result.std_err:.3g})")
        self.line(f"lambda={result.lam:.6g} predicted floor {result.floor_label}")
        if result.predicted_floor is not None and \
                result.fraction < result.predicted_floor - 3 * result.std_err:
            raise VerificationError("delta-uniform fraction below the predicted floor")

    def run_chain(self, config, shape=None, **options):
        if shape:
            try:
                shape = tuple(int(part) for part in shape.split(','))
            except ValueError as exc:
                raise ArgumentError(f"Bad shape {shape!r}") from exc
        counts = chain_bound_trials(config.streams()['run'], config.trials or 1000, shape)
        self.line(' '.join(f"{status}={count}" for status, count in counts.items()))
        if counts['violated']:
            raise VerificationError(f"{counts['violated']} exhaustive chain bound violations")
