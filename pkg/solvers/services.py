"""Query-counting oracles, local-search solvers and the bound formulas.

Oracles charge one query per distinct vertex when memoization is on, which
is the default; a repeated ask returns the cached answer for free.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from django.conf import settings

from snakelab.exceptions import ArgumentError, SizeLimitError
from snakes.services import f_value, f_values

logger = logging.getLogger(__name__)


class CountingOracle:
    """Black-box access to a vertex function with a query counter.

    Attributes:
        value_fn (callable): vertex -> value (an int, or an ordered pair)
        query_count (int): Charged queries
        query_log (list): Charged vertices in order
        memoize (bool): Whether repeated asks are free
    """

    def __init__(self, value_fn, memoize=True, metadata=None):
        self.value_fn = value_fn
        self.memoize = memoize
        self.query_count = 0
        self.query_log = []
        self.metadata = metadata or {}
        self._cache = {}

    def __call__(self, v):
        v = int(v)
        if self.memoize and v in self._cache:
            return self._cache[v]
        value = self.value_fn(v)
        self.query_count += 1
        self.query_log.append(v)
        if self.memoize:
            self._cache[v] = value
        return value

    def was_queried(self, v):
        return int(v) in self._cache

    @property
    def policy(self):
        return 'memoized' if self.memoize else 'every-ask'


def make_instance(graph, snake, memoize=True):
    """Oracle over f_X; the whole function is materialized when affordable."""
    if graph.vertex_count <= settings.ENUMERATION_BUDGET:
        values = f_values(graph, snake)

        def value_fn(v):
            return int(values[v])
    else:
        def value_fn(v):
            return f_value(graph, snake, v)
    return CountingOracle(value_fn, memoize=memoize, metadata={'endpoint': snake.endpoint})


def make_decision_instance(graph, snake, bit, memoize=True):
    """Oracle over g_{X,b}: (f_X(v), -1) off x_L and (0, b) at x_L.

    The snake itself is never queryable; only the value pairs are revealed.
    """
    if bit not in (0, 1):
        raise ArgumentError(f"Decision bit must be 0 or 1, got {bit!r}")
    inner = make_instance(graph, snake).value_fn
    endpoint = snake.endpoint

    def value_fn(v):
        if v == endpoint:
            return (0, bit)
        return (inner(v), -1)
    return CountingOracle(value_fn, memoize=memoize, metadata={'endpoint': endpoint})


@dataclass
class SolveResult:
    """Returned vertex, charged queries and the descent path.

    Attributes:
        vertex (int): Claimed local minimum
        queries (int): Oracle queries charged in total
        trace (list): Vertices visited by steepest descent
        samples (int): Random samples drawn before descending
    """
    vertex: int
    queries: int
    trace: list = field(default_factory=list)
    samples: int = 0


def steepest_descent(graph, oracle, start):
    """Move to the strictly smallest neighbour (ties by id) until none is smaller."""
    current = int(start)
    value = oracle(current)
    trace = [current]
    while True:
        best, best_value = None, value
        # neighbours come sorted, so ties keep the smallest id
        for w in graph.neighbors(current).tolist():
            candidate = oracle(w)
            if candidate < best_value:
                best, best_value = w, candidate
        if best is None:
            break
        current, value = best, best_value
        trace.append(current)
    logger.debug("descent from %d reached %d in %d moves", start, current, len(trace) - 1)
    return SolveResult(vertex=current, queries=oracle.query_count, trace=trace)


def default_sample_size(graph):
    return math.ceil(math.sqrt(graph.vertex_count * graph.degree))


def aldous_solver(graph, oracle, rng, samples=None):
    """Query ``samples`` uniform vertices, then descend from the best one.

    Samples are drawn without replacement and capped at N; the default is
    ceil(sqrt(N * degree)).
    """
    samples = default_sample_size(graph) if samples is None else samples
    if samples < 1:
        raise ArgumentError(f"Sample count must be >= 1, got {samples}")
    samples = min(samples, graph.vertex_count)
    drawn = rng.choice(graph.vertex_count, size=samples, replace=False)
    best = min(drawn.tolist(), key=lambda v: (oracle(v), v))
    result = steepest_descent(graph, oracle, best)
    result.samples = samples
    return result


def _values_array(graph, value_fn):
    if graph.vertex_count > settings.ENUMERATION_BUDGET:
        raise SizeLimitError("Exhaustive scan exceeds the enumeration budget",
                             size=graph.vertex_count, cap=settings.ENUMERATION_BUDGET)
    if isinstance(value_fn, np.ndarray):
        return value_fn
    return np.array([value_fn(v) for v in range(graph.vertex_count)])


def verify_local_min(graph, value_fn, v):
    """f(v) <= f(w) for every neighbour w, read from the raw function."""
    value = value_fn[v] if isinstance(value_fn, np.ndarray) else value_fn(v)
    for w in graph.neighbors(int(v)).tolist():
        other = value_fn[w] if isinstance(value_fn, np.ndarray) else value_fn(w)
        if other < value:
            return False
    return True


def enumerate_local_minima(graph, value_fn):
    """Every local minimum of a scalar vertex function by exhaustive scan."""
    values = _values_array(graph, value_fn)
    return np.flatnonzero(values[graph.adjacency].min(axis=1) >= values).tolist()


@dataclass(frozen=True)
class BoundValues:
    """Randomized and quantum bound expressions (constants dropped, log base 2)."""
    rls: float
    qls: float


def lower_bound_formula(vertex_count, d):
    """sqrt(N) / (d log N) and N^(1/4) / sqrt(d log N)."""
    if vertex_count < 2 or d < 1:
        raise ArgumentError(f"Need N >= 2 and d >= 1, got N={vertex_count}, d={d}")
    scale = d * math.log2(vertex_count)
    return BoundValues(rls=math.sqrt(vertex_count) / scale,
                       qls=vertex_count ** 0.25 / math.sqrt(scale))


def upper_bound_formula(vertex_count, degree):
    """sqrt(N * degree) for random sampling and N^(1/3) degree^(1/6) for the quantum walk."""
    return BoundValues(rls=math.sqrt(vertex_count * degree),
                       qls=vertex_count ** (1 / 3) * degree ** (1 / 6))
