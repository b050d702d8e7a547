"""Query-count sweeps over graph families.

Each (size, trial) pair gets its own generator spawned from
``SeedSequence(seed)``, so a sweep is reproducible from its arguments alone.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd
from django.conf import settings

from graphs.families import build_family, random_cayley_lambda
from groups.services import build_group
from mixing.services import build_chunk_distribution
from snakelab.exceptions import ArgumentError
from snakes.services import SnakeParams, sample_snake

from .services import aldous_solver, lower_bound_formula, make_instance, steepest_descent, upper_bound_formula

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ['family', 'param', 'N', 'd', 'degree', 'solver', 'seed', 'trial', 'queries',
                 'answer_correct']

SOLVERS = ('aldous', 'descent')

SWEEP_FAMILIES = ('hypercube', 'torus', 'torus2', 'cycle', 'random_cayley')


def parse_sizes(text):
    """``a:b:step`` (inclusive) or a comma list."""
    if ':' in text:
        parts = [int(p) for p in text.split(':')]
        if len(parts) not in (2, 3):
            raise ArgumentError(f"Size range must be a:b or a:b:step, got {text!r}")
        start, stop = parts[0], parts[1]
        step = parts[2] if len(parts) == 3 else 1
        if step < 1 or stop < start:
            raise ArgumentError(f"Empty size range {text!r}")
        return list(range(start, stop + 1, step))
    return [int(p) for p in text.split(',') if p.strip()]


def sweep_graph(family, n, dim=2, group_template=None, rng=None):
    """Build the family member for size parameter ``n``.

    random_cayley uses ``group_template`` with ``{n}`` substituted (default
    Z_2^n) and draws s = ceil(2 log2 N) + 2 elements.
    """
    if family == 'random_cayley':
        template = group_template or "power(cyclic(2),{n})"
        group = build_group(template.format(n=n))
        s = math.ceil(2 * math.log2(group.order)) + 2
        graph = build_family('random_cayley', group=str(group.spec), s=s, rng=rng)
        logger.info("random Cayley %s with s=%d (lambda %.2f)", group.spec, s,
                    random_cayley_lambda(graph.vertex_count, s))
        return graph
    return build_family(family, n=n, dim=dim)


def solve_instance(solver, graph, oracle, rng):
    if solver == 'aldous':
        return aldous_solver(graph, oracle, rng)
    if solver == 'descent':
        return steepest_descent(graph, oracle, int(rng.integers(graph.vertex_count)))
    raise ArgumentError(f"Unknown solver {solver!r}; choose from {', '.join(SOLVERS)}")


@dataclass
class SweepResult:
    """Per-trial rows, per-size summary and whether the query budget cut the sweep short."""
    table: pd.DataFrame
    summary: pd.DataFrame
    complete: bool


def summarize(table):
    keys = ['family', 'param', 'N', 'd', 'degree', 'solver']
    summary = (table.groupby(keys, sort=False)['queries']
               .agg(queries_median='median', queries_mean='mean', queries_max='max',
                    trials='count')
               .reset_index())
    lower = [lower_bound_formula(n, d) for n, d in zip(summary['N'], summary['d'])]
    upper = [upper_bound_formula(n, deg) for n, deg in zip(summary['N'], summary['degree'])]
    summary['lower_bound_rls'] = [b.rls for b in lower]
    summary['lower_bound_qls'] = [b.qls for b in lower]
    summary['upper_bound_rls'] = [b.rls for b in upper]
    summary['upper_bound_qls'] = [b.qls for b in upper]
    return summary


def query_complexity_experiment(family, sizes, solver='aldous', trials=1, seed=None, dim=2,
                                chunk_method='uniform_all', ell=None, c_ell=None,
                                group_template=None, query_budget=None):
    """Run ``solver`` on fresh snake instances for every size of a family.

    Instances use s = diameter with ``chunk_method`` (uniform_all by default)
    and ell from ``SnakeParams.from_formula`` unless ``ell`` is given.

    Returns:
        SweepResult: Rows in ``SWEEP_COLUMNS`` order and the per-size summary
    """
    if family not in SWEEP_FAMILIES:
        raise ArgumentError(f"Unknown sweep family {family!r}; choose from {', '.join(SWEEP_FAMILIES)}")
    if solver not in SOLVERS:
        raise ArgumentError(f"Unknown solver {solver!r}; choose from {', '.join(SOLVERS)}")
    if trials < 1:
        raise ArgumentError("trials must be >= 1")
    seed = settings.DEFAULT_SEED if seed is None else seed
    query_budget = settings.SWEEP_QUERY_BUDGET if query_budget is None else query_budget
    rows, spent, complete = [], 0, True
    size_seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    for n, size_seed in zip(sizes, size_seeds):
        graph_seed, *trial_seeds = size_seed.spawn(trials + 1)
        graph = sweep_graph(family, n, dim=dim, group_template=group_template,
                            rng=np.random.default_rng(graph_seed))
        d = graph.diameter
        chunk = build_chunk_distribution(graph, d, chunk_method)
        if ell is None:
            params = SnakeParams.from_formula(graph.vertex_count, d, c_ell=c_ell, delta=chunk.delta)
        else:
            params = SnakeParams(s=d, ell=ell, delta=chunk.delta)
        for trial, trial_seed in enumerate(trial_seeds):
            if spent >= query_budget:
                complete = False
                break
            rng = np.random.default_rng(trial_seed)
            snake = sample_snake(graph, chunk, graph.base_vertex, params, rng)
            oracle = make_instance(graph, snake)
            result = solve_instance(solver, graph, oracle, rng)
            spent += result.queries
            rows.append((family, n, graph.vertex_count, d, graph.degree, solver, seed, trial,
                         result.queries, result.vertex == snake.endpoint))
        if not complete:
            logger.warning("sweep stopped at %s n=%s after %d queries (budget %d)",
                           family, n, spent, query_budget)
            break
    table = pd.DataFrame(rows, columns=SWEEP_COLUMNS)
    return SweepResult(table=table, summary=summarize(table), complete=complete)


def loglog_slope(summary, x='N', y='queries_median'):
    """Least-squares slope of log y against log x."""
    if len(summary) < 2:
        raise ArgumentError("A slope needs at least two sizes")
    return float(np.polyfit(np.log(summary[x].to_numpy(float)),
                            np.log(summary[y].to_numpy(float)), 1)[0])
