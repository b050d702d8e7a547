from harness.base import LabCommand
from snakes.properties import (
    build_p_table, chunk_mixing_check, goodness_rate, sparse_implies_hitting_check, sparseness_rate,
)
from snakes.services import sample_snake
from snakelab.exceptions import ArgumentError, VerificationError

SUITES = ('goodness', 'sparseness', 'hitting', 'mixing')


class Command(LabCommand):
    help = "Property suites on sampled snakes: goodness, sparseness, hitting and chunk mixing"

    def add_lab_arguments(self, parser):
        parser.add_argument('suite', nargs='?', default='all', choices=SUITES + ('all',))
        parser.add_argument('--snakes', type=int, default=20, help="Snakes sampled per suite")

    def run(self, config, suite, snakes, **options):
        graph = config.build_graph()
        chunk = config.build_chunk(graph)
        params = config.build_params(graph, chunk)
        self.line(f"N={graph.vertex_count} s={params.s} ell={params.ell} L={params.L} "
                  f"delta={chunk.delta:.6g}")
        rng = config.streams()['run']
        failures = []
        for name in (SUITES if suite == 'all' else (suite,)):
            child = rng.spawn(1)[0]
            failures += getattr(self, f"verify_{name}")(config, graph, chunk, params, snakes, child)
        if failures:
            raise VerificationError('; '.join(failures))

    @staticmethod
    def _eps(config):
        if config.eps is None:
            raise ArgumentError("This suite needs --eps")
        return config.eps

    def verify_goodness(self, config, graph, chunk, params, snakes, rng):
        rate = goodness_rate(graph, chunk, params, snakes, trials=config.trials, rng=rng,
                             x0=config.x0, eps=self._eps(config))
        self.line(f"goodness: {rate.good}/{rate.total} good, mean consistency "
                  f"{rate.mean_consistency:.6g}")
        if not rate.floors_applicable:
            self.line("goodness floors: not applicable (2(L-s)^2/N > 1e-4)")
            return []
        self.line(f"goodness floors: {rate.consistency_floor:.6g} / {rate.markov_floor:.6g}")
        if rate.fraction < rate.markov_floor - 3 * rate.std_err:
            return ["good fraction below its floor"]
        return []

    def verify_sparseness(self, config, graph, chunk, params, snakes, rng):
        rate = sparseness_rate(graph, chunk, params, self._eps(config), snakes, rng, x0=config.x0)
        floor = "not applicable" if rate.floor is None else f"{rate.floor:.6g}"
        self.line(f"sparseness: {rate.estimate.value:.6g} of snakes 2eps-sparse (floor {floor})")
        if rate.floor is not None and rate.estimate.value < rate.floor - 3 * rate.estimate.std_err:
            return ["sparse fraction below its floor"]
        return []

    def verify_hitting(self, config, graph, chunk, params, snakes, rng):
        eps = self._eps(config)
        table = build_p_table(graph, chunk)
        counts = {'holds': 0, 'violated': 0, 'precondition not satisfied': 0}
        realized = 0
        for child in rng.spawn(snakes):
            snake = sample_snake(graph, chunk, config.x0, params, child)
            report = sparse_implies_hitting_check(graph, chunk, snake, params, eps, table=table,
                                                  mode='monte_carlo', trials=config.trials, rng=child)
            counts[report.status] += 1
            realized += not report.realized_holds
        self.line("hitting: " + ', '.join(f"{k}={v}" for k, v in counts.items())
                  + f", realized bound failures={realized}")
        failures = []
        if counts['violated']:
            failures.append(f"{counts['violated']} sparse snakes hit above 2 eps")
        if realized:
            failures.append(f"{realized} snakes exceed the realized hitting bound")
        return failures

    def verify_mixing(self, config, graph, chunk, params, snakes, rng):
        failures = []
        for t in range(params.s, params.L + 1):
            check = chunk_mixing_check(graph, chunk, params, t, trials=config.trials, rng=rng)
            self.line(f"mixing t={t}: tv {check.max_tv:.6g} vs delta {check.delta:.6g} ({check.mode})")
            if not check.within_delta:
                failures.append(f"x_{t} is further than delta from uniform")
        return failures
