"""Snake properties: consistency, sparseness, hitting, chunk mixing and goodness.

Every probability over flicks averages uniformly over the flick points
``j = s*k`` for ``k = 1 .. ell``; the flicked tail is chunks ``k .. ell``
redrawn from D_s starting at ``x_{sk}``.

Exact computations enumerate or run dynamic programs while the configured
budgets allow it and otherwise fall back to Monte Carlo with a standard error.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from django.conf import settings

from snakelab.exceptions import ArgumentError, SizeLimitError

from .services import (
    check_chunk, build_tail, flick, is_consistent_pair, last_visit_index, sample_snake,
)

logger = logging.getLogger(__name__)

_Z95 = 1.959963984540054


def wilson_interval(successes, total, z=_Z95):
    """Wilson score interval for a binomial proportion."""
    if total <= 0:
        return 0.0, 1.0
    p = successes / total
    denom = 1 + z * z / total
    centre = (p + z * z / (2 * total)) / denom
    half = z * math.sqrt(p * (1 - p) / total + z * z / (4 * total * total)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass
class Estimate:
    """A probability with its uncertainty.

    Attributes:
        value (float): Exact value or Monte Carlo mean
        std_err (float): 0 for exact values
        exact (bool): Whether ``value`` came from exhaustive enumeration
        trials (int): Monte Carlo sample size (0 when exact)
        interval (tuple): Wilson 95% interval (degenerate when exact)
    """
    value: float
    std_err: float = 0.0
    exact: bool = True
    trials: int = 0
    interval: tuple = None

    def __post_init__(self):
        if self.interval is None:
            self.interval = (self.value, self.value)

    @classmethod
    def from_counts(cls, successes, trials):
        p = successes / trials
        return cls(value=p, std_err=math.sqrt(p * (1 - p) / trials), exact=False,
                   trials=trials, interval=wilson_interval(successes, trials))


# -- P table and sparseness -------------------------------------------------------

@dataclass
class PTable:
    """P(x) = Pr_{g ~ D_s}[x in S(g)] for every vertex x."""
    values: np.ndarray
    s: int

    def __getitem__(self, x):
        return float(self.values[x])


def build_p_table(graph, chunk):
    """Sum D_s weights over the seeds whose fixed path covers each vertex."""
    s = chunk.radius
    support = chunk.support
    rows = np.sort(graph.path_table(s)[support], axis=1)
    if rows.size and rows.min() < 0:
        raise ArgumentError(f"Chunk support leaves B({s})")
    fresh = np.ones_like(rows, dtype=bool)
    fresh[:, 1:] = rows[:, 1:] != rows[:, :-1]
    weights = np.broadcast_to(chunk.weights[support][:, None], rows.shape)
    values = np.zeros(graph.vertex_count)
    np.add.at(values, rows[fresh], weights[fresh])
    values.setflags(write=False)
    return PTable(values=values, s=s)


def compute_P(graph, chunk, x, table=None):
    table = build_p_table(graph, chunk) if table is None else table
    return table[int(x)]


def sparse_scores(graph, snake, table, via='sigma'):
    """score(v) = sum over k = 1..ell of P(sigma^{-1}_{x_{sk}}(v)).

    ``via='sigma'`` inverts each automorphism as a permutation; ``via='group'``
    uses x^{-1}·v on Cayley graphs.
    """
    scores = np.zeros(graph.vertex_count)
    ids = np.arange(graph.vertex_count)
    for k in range(1, snake.ell + 1):
        x = snake.chunk_start(k)
        if via == 'group':
            if not graph.is_cayley:
                raise ArgumentError("The group form of sparseness needs a Cayley graph")
            inverse = graph.group.multiply_arrays(graph.group.invert(x), ids)
        elif via == 'sigma':
            inverse = np.argsort(graph.automorphism_array(x))
        else:
            raise ArgumentError(f"Unknown sparseness code path {via!r}")
        scores += table.values[inverse]
    return scores


@dataclass
class SparsenessResult:
    sparse: bool
    max_score: float
    argmax: int
    threshold: float
    scores: np.ndarray = field(repr=False, default=None)


def is_sparse(graph, chunk, snake, eps, table=None):
    """Whether max_v score(v) <= eps * ell."""
    table = build_p_table(graph, chunk) if table is None else table
    scores = sparse_scores(graph, snake, table)
    argmax = int(np.argmax(scores))
    threshold = eps * snake.ell
    return SparsenessResult(sparse=bool(scores[argmax] <= threshold + 1e-12),
                            max_score=float(scores[argmax]), argmax=argmax,
                            threshold=threshold, scores=scores)


# -- hitting ----------------------------------------------------------------------

@dataclass
class HittingResult:
    """Per-vertex probability that a flicked tail visits v.

    Attributes:
        per_vertex (np.ndarray): Pr_{j,Y}[v in Y_{j+1->L} | Y_{0->j} = X_{0->j}]
        mode (str): ``exact``, ``enumerate`` or ``monte_carlo``
        std_err (float): Standard error at the maximizing vertex (Monte Carlo only)
        caveat (str): Set when the maximum is over noisy estimates
    """
    per_vertex: np.ndarray
    mode: str
    std_err: float = 0.0
    caveat: str = None

    @property
    def argmax(self):
        return int(np.argmax(self.per_vertex))

    @property
    def max_value(self):
        return float(self.per_vertex.max())


def _seed_arrays(chunk):
    support = chunk.support
    probs = chunk.weights[support]
    return support, probs / probs.sum()


def hitting_dp_cost(graph, chunk, ell):
    n = graph.vertex_count
    return n * n * chunk.support.size * ell * (ell + 1) // 2


def _hitting_dp(graph, chunk, snake):
    """State [w, v] = Pr[current endpoint w and v not yet visited], chunk by chunk."""
    n, s = graph.vertex_count, snake.s
    support, probs = _seed_arrays(chunk)
    table = graph.path_table(s)
    endpoints = [graph.translates_of(int(g)) for g in support]
    starts_of_rows = np.repeat(np.arange(n), s)
    covered = [np.column_stack([graph.translates_of(int(v)) for v in table[g]]).ravel()
               for g in support]
    total = np.zeros(n)
    for k in range(1, snake.ell + 1):
        state = np.zeros((n, n))
        state[snake.chunk_start(k)] = 1.0
        for _ in range(snake.ell + 1 - k):
            nxt = np.zeros((n, n))
            live = np.flatnonzero(state.any(axis=1))
            for p, ends, cover in zip(probs, endpoints, covered):
                contrib = p * state
                contrib[starts_of_rows, cover] = 0.0
                np.add.at(nxt, ends[live], contrib[live])
            state = nxt
        total += 1.0 - state.sum(axis=0)
    return total / snake.ell


def tail_outcomes(graph, chunk, snake, k):
    """Yield (probability, tail vertices) for every redraw of chunks k..ell."""
    support, probs = _seed_arrays(chunk)
    start = snake.chunk_start(k)
    for idx in itertools.product(range(support.size), repeat=snake.ell + 1 - k):
        idx = list(idx)
        yield float(np.prod(probs[idx])), build_tail(graph, start, support[idx], snake.s)


def tail_outcome_count(chunk, ell):
    m = chunk.support.size
    return sum(m ** (ell + 1 - k) for k in range(1, ell + 1))


def _hitting_enumerate(graph, chunk, snake):
    total = np.zeros(graph.vertex_count)
    for k in range(1, snake.ell + 1):
        for prob, tail in tail_outcomes(graph, chunk, snake, k):
            total[np.unique(tail)] += prob
    return total / snake.ell


def _hitting_monte_carlo(graph, chunk, snake, params, trials, rng):
    counts = np.zeros(graph.vertex_count)
    for _ in range(trials):
        j, flicked = flick(graph, chunk, snake, params, rng)
        counts[np.unique(flicked.array[j + 1:])] += 1
    return counts / trials


def hitting_probability(graph, chunk, snake, params, mode='exact', trials=None, rng=None):
    """Per-vertex hitting probabilities of the flicked tail.

    Args:
        mode (str): ``exact`` (chunk-endpoint DP), ``enumerate`` (all tail seed
            tuples) or ``monte_carlo`` (the DP whenever its budget allows,
            otherwise ``trials`` flicks)

    Raises:
        SizeLimitError: When the requested exact mode exceeds its budget
    """
    check_chunk(graph, chunk, params)
    dp_cost = hitting_dp_cost(graph, chunk, snake.ell)
    if mode == 'exact':
        if dp_cost > settings.HITTING_DP_BUDGET:
            raise SizeLimitError("Exact hitting DP exceeds its budget",
                                 size=dp_cost, cap=settings.HITTING_DP_BUDGET)
        return HittingResult(per_vertex=_hitting_dp(graph, chunk, snake), mode='exact')
    if mode == 'enumerate':
        count = tail_outcome_count(chunk, snake.ell)
        if count > settings.ENUMERATION_BUDGET:
            raise SizeLimitError("Tail enumeration exceeds the enumeration budget",
                                 size=count, cap=settings.ENUMERATION_BUDGET)
        return HittingResult(per_vertex=_hitting_enumerate(graph, chunk, snake), mode='enumerate')
    if mode != 'monte_carlo':
        raise ArgumentError(f"Unknown hitting mode {mode!r}")
    if dp_cost <= settings.HITTING_DP_BUDGET:
        return HittingResult(per_vertex=_hitting_dp(graph, chunk, snake), mode='exact')
    logger.info("hitting DP cost %d over budget; using %s flicks", dp_cost, trials)
    if rng is None:
        raise ArgumentError("Monte Carlo hitting needs an rng")
    trials = trials or settings.DEFAULT_TRIALS
    per_vertex = _hitting_monte_carlo(graph, chunk, snake, params, trials, rng)
    top = float(per_vertex.max())
    return HittingResult(per_vertex=per_vertex, mode='monte_carlo',
                         std_err=math.sqrt(top * (1 - top) / trials),
                         caveat="maximum over per-vertex Monte Carlo estimates is biased upward")


def collision_term(delta, vertex_count):
    """Pointwise bound delta + 1/N on Pr[y_t = v] once a chunk has mixed."""
    return delta + 1 / vertex_count


@dataclass
class SparseHittingReport:
    """Both sides of "eps-sparse implies 2 eps-hitting" for one snake.

    Attributes:
        status (str): ``holds``, ``violated`` or ``precondition not satisfied``
        realized_bound (float): max_v score(v)/ell + (L - s)(delta + 1/N)
        realized_holds (bool): Whether every vertex obeys its realized bound
    """
    eps: float
    sparse: bool
    max_score: float
    precondition_met: bool
    hitting_max: float = None
    bound: float = None
    realized_bound: float = None
    realized_holds: bool = None
    std_err: float = 0.0
    status: str = 'precondition not satisfied'


def sparse_implies_hitting_check(graph, chunk, snake, params, eps, table=None,
                                 mode='exact', trials=None, rng=None):
    n = graph.vertex_count
    sparseness = is_sparse(graph, chunk, snake, eps, table)
    precondition = sparseness.sparse and eps >= 2 * (params.L - params.s) / n
    report = SparseHittingReport(eps=eps, sparse=sparseness.sparse,
                                 max_score=sparseness.max_score, precondition_met=precondition)
    hitting = hitting_probability(graph, chunk, snake, params, mode=mode, trials=trials, rng=rng)
    margin = (params.L - params.s) * collision_term(chunk.delta, n)
    per_vertex_bound = sparseness.scores / snake.ell + margin
    report.hitting_max = hitting.max_value
    report.std_err = hitting.std_err
    report.realized_bound = float(per_vertex_bound.max())
    slack = settings.PROBABILITY_TOLERANCE + 3 * hitting.std_err
    report.realized_holds = bool(np.all(hitting.per_vertex <= per_vertex_bound + slack))
    if not precondition:
        return report
    report.bound = 2 * eps
    report.status = 'holds' if report.hitting_max <= report.bound + slack else 'violated'
    if report.status == 'violated':
        logger.warning("sparse snake hits with %.6g > 2 eps = %.6g (realized delta %.3g, 1/N %.3g)",
                       report.hitting_max, report.bound, chunk.delta, 1 / n)
    return report


# -- chunk mixing -------------------------------------------------------------------

@dataclass
class MixingCheck:
    """Worst tv to uniform of x_t over start vertices, against D_s's delta."""
    t: int
    max_tv: float
    delta: float
    mode: str
    std_err: float = 0.0

    @property
    def within_delta(self):
        return self.max_tv <= self.delta + settings.PROBABILITY_TOLERANCE + 3 * self.std_err


def _push(laws, graph, targets, probs):
    """One chunk step for every row: mass at w moves to sigma_w(target) with the target's probability."""
    nxt = np.zeros_like(laws)
    for target, p in zip(targets, probs):
        ends = graph.translates_of(int(target))
        np.add.at(nxt.T, ends, p * laws.T)
    return nxt


def chunk_mixing_check(graph, chunk, params, t, trials=None, rng=None):
    """Max over starts x of tv(law of x_t given x_0 = x, uniform), for s <= t <= L.

    Cayley graphs are left-invariant, so the base vertex stands for every start;
    vertex-transitive graphs check all starts.
    """
    check_chunk(graph, chunk, params)
    s = params.s
    if not s <= t <= params.L:
        raise ArgumentError(f"t must lie in [{s}, {params.L}], got {t}")
    n = graph.vertex_count
    q, r = divmod(t, s)
    support, probs = _seed_arrays(chunk)
    starts = [graph.base_vertex] if graph.is_cayley else list(range(n))
    cost = len(starts) * n * support.size * (q + 1)
    if cost <= settings.MIXING_BUDGET:
        laws = np.zeros((len(starts), n))
        laws[np.arange(len(starts)), starts] = 1.0
        for _ in range(q):
            laws = _push(laws, graph, support, probs)
        if r:
            laws = _push(laws, graph, graph.path_table(s)[support, r - 1], probs)
        tv = 0.5 * np.abs(laws - 1 / n).sum(axis=1)
        return MixingCheck(t=t, max_tv=float(tv.max()), delta=chunk.delta, mode='exact')
    if rng is None:
        raise ArgumentError("Monte Carlo mixing needs an rng")
    trials = trials or settings.DEFAULT_TRIALS
    logger.info("mixing cost %d over budget; sampling %d positions", cost, trials)
    counts = np.zeros(n)
    for _ in range(trials):
        snake = sample_snake(graph, chunk, graph.base_vertex, params, rng)
        counts[snake.vertices[t]] += 1
    freq = counts / trials
    std_err = 0.5 * math.sqrt(float((freq * (1 - freq)).sum()) / trials)
    return MixingCheck(t=t, max_tv=0.5 * float(np.abs(freq - 1 / n).sum()),
                       delta=chunk.delta, mode='monte_carlo', std_err=std_err)


# -- consistency and goodness ------------------------------------------------------

def _consistent_and_apart(last_x, endpoint, vertices, size):
    return vertices[-1] != endpoint and is_consistent_pair(last_x, last_visit_index(vertices, size))


def consistency_probability(graph, chunk, snake, params, trials=None, rng=None, mode='auto'):
    """Pr_{j,Y}[X, Y consistent and x_L != y_L | Y_{0->j} = X_{0->j}].

    ``mode='auto'`` enumerates every tail seed tuple when there are at most
    ``EXACT_CONSISTENCY_BUDGET`` of them, otherwise it flicks ``trials`` times.
    """
    check_chunk(graph, chunk, params)
    n = graph.vertex_count
    last_x = snake.last_index(n)
    count = tail_outcome_count(chunk, snake.ell)
    if mode == 'exact' or (mode == 'auto' and count <= settings.EXACT_CONSISTENCY_BUDGET):
        if count > settings.ENUMERATION_BUDGET:
            raise SizeLimitError("Tail enumeration exceeds the enumeration budget",
                                 size=count, cap=settings.ENUMERATION_BUDGET)
        total = 0.0
        for k in range(1, snake.ell + 1):
            head = snake.array[:snake.s * k + 1]
            for prob, tail in tail_outcomes(graph, chunk, snake, k):
                if _consistent_and_apart(last_x, snake.endpoint, np.concatenate([head, tail]), n):
                    total += prob
        return Estimate(value=min(1.0, total / snake.ell))
    if rng is None:
        raise ArgumentError("Monte Carlo consistency needs an rng")
    trials = trials or settings.DEFAULT_TRIALS
    successes = 0
    for _ in range(trials):
        _, flicked = flick(graph, chunk, snake, params, rng)
        successes += _consistent_and_apart(last_x, snake.endpoint, flicked.array, n)
    return Estimate.from_counts(successes, trials)


@dataclass
class GoodnessResult:
    consistency: Estimate
    hitting: HittingResult
    eps: float
    is_good: bool

    @property
    def consist_prob(self):
        return self.consistency.value

    @property
    def hitting_max(self):
        return self.hitting.max_value


def classify_goodness(graph, chunk, snake, params, eps=None, trials=None, rng=None):
    """eps-good: consistency at least the threshold and hitting at most eps."""
    eps = params.eps if eps is None else eps
    if eps is None:
        raise ArgumentError("Goodness needs an epsilon")
    consistency = consistency_probability(graph, chunk, snake, params, trials=trials, rng=rng)
    hitting = hitting_probability(graph, chunk, snake, params, mode='monte_carlo',
                                  trials=trials, rng=rng)
    good = consistency.value >= params.consist_threshold and hitting.max_value <= eps
    return GoodnessResult(consistency=consistency, hitting=hitting, eps=eps, is_good=good)


def consistency_regime(params, vertex_count):
    """2(L - s)^2 / N, the disagreement bound behind the finite goodness floors."""
    return 2 * (params.L - params.s) ** 2 / vertex_count


@dataclass
class GoodnessRate:
    """Fraction of sampled snakes that are eps-good.

    Attributes:
        consistency_floor (float): 0.9999 - 2/N, None when not applicable
        markov_floor (float): 0.999 - 20/N, None when not applicable
    """
    good: int
    total: int
    mean_consistency: float
    consistency_floor: float = None
    markov_floor: float = None

    @property
    def fraction(self):
        return self.good / self.total

    @property
    def std_err(self):
        p = self.fraction
        return math.sqrt(p * (1 - p) / self.total)

    @property
    def floors_applicable(self):
        return self.consistency_floor is not None


def goodness_rate(graph, chunk, params, snake_trials, trials=None, rng=None, x0=None, eps=None):
    """Fraction of eps-good snakes among independently sampled ones.

    Args:
        snake_trials (int): Number of snakes to sample and classify
        trials (int): Flicks per snake for the Monte Carlo estimates
        rng (Generator): Source of per-snake streams, seeded from
            ``DEFAULT_SEED`` when omitted
        x0 (int): Starting vertex, the base vertex when omitted
        eps (float): Hitting threshold, ``params.eps`` when omitted

    Returns:
        GoodnessRate: The count of good snakes, the mean consistency and the
            finite floors when 2(L - s)^2/N is small enough for them to apply
    """
    if snake_trials < 1:
        raise ArgumentError("snake_trials must be >= 1")
    rng = np.random.default_rng(settings.DEFAULT_SEED) if rng is None else rng

    n = graph.vertex_count
    good, consistency_sum = 0, 0.0
    for child in rng.spawn(snake_trials):
        snake = sample_snake(graph, chunk, x0, params, child)
        result = classify_goodness(graph, chunk, snake, params, eps=eps, trials=trials, rng=child)
        good += result.is_good
        consistency_sum += result.consist_prob
    rate = GoodnessRate(good=good, total=snake_trials, mean_consistency=consistency_sum / snake_trials)
    if consistency_regime(params, n) <= 1e-4:
        rate.consistency_floor = 0.9999 - 2 / n
        rate.markov_floor = 0.999 - 20 / n
    return rate


@dataclass
class DisagreementRate:
    """Pr over X, j and Y that the flicked pair is inconsistent.

    Attributes:
        bound (float): 2(L - s)^2 (delta N + 1) / N with the realized delta
        simplification_valid (bool): Whether delta <= 1/N, so delta + 1/N <= 2/N
    """
    estimate: Estimate
    bound: float
    simplification_valid: bool

    @property
    def within_bound(self):
        return self.estimate.value <= self.bound + 3 * self.estimate.std_err


def disagreement_rate(graph, chunk, params, pairs, rng, x0=None):
    n = graph.vertex_count
    failures = 0
    for child in rng.spawn(pairs):
        snake = sample_snake(graph, chunk, x0, params, child)
        _, flicked = flick(graph, chunk, snake, params, child)
        failures += not is_consistent_pair(snake.last_index(n), flicked.last_index(n))
    bound = 2 * (params.L - params.s) ** 2 * (chunk.delta * n + 1) / n
    return DisagreementRate(estimate=Estimate.from_counts(failures, pairs), bound=bound,
                            simplification_valid=chunk.delta <= 1 / n)


# -- sparseness tails -------------------------------------------------------------

@dataclass
class TailResult:
    """Empirical Pr[sum of P(u_i) > 2 ell eps] for independent uniform u_i.

    Attributes:
        ceiling (float): 2^(-ell eps), None when s/N > eps^2/6
    """
    estimate: Estimate
    precondition: bool
    ceiling: float = None

    @property
    def within_ceiling(self):
        if self.ceiling is None:
            return None
        return self.estimate.value <= self.ceiling + 3 * self.estimate.std_err


_TAIL_BATCH = 10 ** 4


def sparse_tail_experiment(graph, table, ell, eps, trials, rng):
    n = graph.vertex_count
    exceed, remaining = 0, trials
    while remaining:
        batch = min(remaining, _TAIL_BATCH)
        sums = table.values[rng.integers(n, size=(batch, ell))].sum(axis=1)
        exceed += int(np.count_nonzero(sums > 2 * ell * eps))
        remaining -= batch
    precondition = table.s / n <= eps * eps / 6
    return TailResult(estimate=Estimate.from_counts(exceed, trials), precondition=precondition,
                      ceiling=2.0 ** (-ell * eps) if precondition else None)


@dataclass
class SparsenessRate:
    """Fraction of sampled snakes that are 2 eps-sparse.

    Attributes:
        floor (float): 1 - N 2^(-ell eps) - N ell delta, None when s/N > eps^2/6
    """
    estimate: Estimate
    floor: float = None


def sparseness_rate(graph, chunk, params, eps, snake_trials, rng, table=None, x0=None):
    table = build_p_table(graph, chunk) if table is None else table
    n = graph.vertex_count
    sparse = 0
    for child in rng.spawn(snake_trials):
        snake = sample_snake(graph, chunk, x0, params, child)
        sparse += is_sparse(graph, chunk, snake, 2 * eps, table).sparse
    rate = SparsenessRate(estimate=Estimate.from_counts(sparse, snake_trials))
    if params.s / n <= eps * eps / 6:
        rate.floor = 1 - n * 2.0 ** (-params.ell * eps) - n * params.ell * chunk.delta
    return rate
