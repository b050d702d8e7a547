"""Chunked snakes: parameters, sampling, tail flicks and the instance function f_X.

A snake of ``ell + 1`` chunks of length ``s`` has ``L = (ell + 1) * s`` steps.
Chunk k occupies positions ``s*k + 1 .. s*k + s`` and equals
``sigma_{x_{sk}}(S(seed_k))``, so its endpoint is ``x_{s(k+1)} = sigma_{x_{sk}}(seed_k)``.
"""
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from django.conf import settings

from snakelab.exceptions import ArgumentError, SizeLimitError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SnakeParams:
    """Snake shape and the thresholds of goodness.

    Attributes:
        s (int): Chunk length
        ell (int): Number of tail chunks (flick points s, 2s, ..., ell*s)
        delta (float): Realized delta of the chunk distribution
        eps (float): Target epsilon for hitting and sparseness
        c_ell (float): Constant in ell = sqrt(N) / (c_ell * s)
        consist_threshold (float): Consistency needed for goodness
        good_prob_threshold (float): Good-snake fraction the lower bound assumes
    """
    s: int
    ell: int
    delta: float = 0.0
    eps: float = None
    c_ell: float = None
    consist_threshold: float = None
    good_prob_threshold: float = None

    def __post_init__(self):
        if self.s < 1:
            raise ArgumentError(f"Chunk length s must be >= 1, got {self.s}")
        if self.ell < 1:
            raise ArgumentError(f"Chunk count ell must be >= 1, got {self.ell}")
        defaults = {
            'c_ell': settings.DEFAULT_C_ELL,
            'consist_threshold': settings.CONSIST_THRESHOLD,
            'good_prob_threshold': settings.GOOD_PROB_THRESHOLD,
        }
        for name, value in defaults.items():
            if getattr(self, name) is None:
                object.__setattr__(self, name, value)

    @property
    def L(self):
        return (self.ell + 1) * self.s

    @property
    def flick_points(self):
        return tuple(self.s * k for k in range(1, self.ell + 1))

    @classmethod
    def from_formula(cls, vertex_count, s, c_ell=None, **kwargs):
        """ell = max(1, floor(sqrt(N) / (c_ell * s)))."""
        c_ell = settings.DEFAULT_C_ELL if c_ell is None else c_ell
        ell = max(1, math.floor(math.sqrt(vertex_count) / (c_ell * s)))
        return cls(s=s, ell=ell, c_ell=c_ell, **kwargs)

    def with_chunk(self, chunk):
        """Copy carrying the realized delta of ``chunk``."""
        return SnakeParams(s=self.s, ell=self.ell, delta=chunk.delta, eps=self.eps,
                           c_ell=self.c_ell, consist_threshold=self.consist_threshold,
                           good_prob_threshold=self.good_prob_threshold)


@dataclass(frozen=True)
class FlickDistribution:
    """Uniform law on the flick points {s, 2s, ..., ell*s}."""
    s: int
    ell: int

    @property
    def support(self):
        return tuple(self.s * k for k in range(1, self.ell + 1))

    @property
    def weights(self):
        return tuple(1 / self.ell for _ in range(self.ell))

    def sample(self, rng):
        return self.s * int(rng.integers(1, self.ell + 1))


@dataclass(frozen=True)
class Snake:
    """A snake (x_0, ..., x_L) with the chunk seeds it was built from."""
    vertices: tuple
    seeds: tuple
    s: int

    @property
    def L(self):
        return len(self.vertices) - 1

    @property
    def start(self):
        return self.vertices[0]

    @property
    def endpoint(self):
        return self.vertices[-1]

    @property
    def ell(self):
        return len(self.seeds) - 1

    def head(self, j):
        """X_{0->j}."""
        return self.vertices[:j + 1]

    def chunk_start(self, k):
        return self.vertices[self.s * k]

    @cached_property
    def array(self):
        values = np.asarray(self.vertices, dtype=np.int64)
        values.setflags(write=False)
        return values

    @cached_property
    def vertex_set(self):
        return frozenset(self.vertices)

    def last_index(self, size):
        """Array over ``size`` vertices of the last position visited, -1 if never."""
        return last_visit_index(self.array, size)


def last_visit_index(vertices, size):
    last = np.full(size, -1, dtype=np.int64)
    np.maximum.at(last, vertices, np.arange(len(vertices)))
    return last


def check_chunk(graph, chunk, params):
    if chunk.radius != params.s:
        raise ArgumentError(f"Chunk radius {chunk.radius} does not match s = {params.s}")
    if not graph.is_cayley and (chunk.method.kind != 'uniform_all' or params.s != graph.diameter):
        raise ArgumentError(
            "Vertex-transitive graphs need s = diameter and the uniform_all chunk distribution")


def seed_sampler(chunk):
    support = chunk.support
    probs = chunk.weights[support]
    probs = probs / probs.sum()

    def draw(rng, size):
        return rng.choice(support, size=size, p=probs)
    return draw


def build_tail(graph, start, seeds, s):
    """Vertices after ``start`` produced by translating S(seed) chunk by chunk."""
    table = graph.path_table(s)
    pieces, current = [], int(start)
    for seed in seeds:
        row = table[int(seed)]
        if row[0] < 0:
            raise ArgumentError(f"Seed {seed} lies outside B({s})")
        piece = graph.translate_sequence(current, row)
        pieces.append(piece)
        current = int(piece[-1])
    if not pieces:
        return np.empty(0, dtype=np.int64)
    return np.concatenate(pieces)


def assemble_snake(graph, x0, seeds, s):
    tail = build_tail(graph, x0, seeds, s)
    return Snake(vertices=(int(x0),) + tuple(int(v) for v in tail),
                 seeds=tuple(int(g) for g in seeds), s=s)


def sample_snake(graph, chunk, x0, params, rng):
    """Draw ell + 1 independent seeds from D_s and assemble the snake from x_0."""
    check_chunk(graph, chunk, params)
    x0 = graph.base_vertex if x0 is None else x0
    seeds = seed_sampler(chunk)(rng, params.ell + 1)
    return assemble_snake(graph, x0, seeds, params.s)


def flick(graph, chunk, snake, params, rng):
    """Resample the tail after a uniform flick point j.

    Returns:
        tuple: (j, Y) with Y_{0->j} = X_{0->j}
    """
    check_chunk(graph, chunk, params)
    k = int(rng.integers(1, params.ell + 1))
    return flick_at(graph, chunk, snake, k, rng)


def flick_at(graph, chunk, snake, k, rng):
    j = snake.s * k
    tail_seeds = seed_sampler(chunk)(rng, len(snake.seeds) - k)
    tail = build_tail(graph, snake.vertices[j], tail_seeds, snake.s)
    flicked = Snake(vertices=snake.vertices[:j + 1] + tuple(int(v) for v in tail),
                    seeds=snake.seeds[:k] + tuple(int(g) for g in tail_seeds), s=snake.s)
    return j, flicked


def f_value(graph, snake, v):
    """f_X(v) = L - (last index of v) on the snake, L + distance(x_0, v) off it."""
    for i in range(snake.L, -1, -1):
        if snake.vertices[i] == v:
            return snake.L - i
    return snake.L + graph.distance(snake.start, v)


def f_values(graph, snake):
    """f_X materialized over every vertex."""
    if graph.vertex_count > settings.ENUMERATION_BUDGET:
        raise SizeLimitError("f_X materialization exceeds the enumeration budget",
                             size=graph.vertex_count, cap=settings.ENUMERATION_BUDGET)
    last = snake.last_index(graph.vertex_count)
    off = snake.L + graph.all_distances(snake.start)
    return np.where(last >= 0, snake.L - last, off)


def set_indicator(snake, v):
    return int(v in snake.vertex_set)


@dataclass
class DisagreementReport:
    """Shared vertices where f_X and f_Y differ.

    Attributes:
        vertices (list): Sorted disagreement vertices
        equivalence_holds (bool): When consistent, whether f_X(v) != f_Y(v)
            exactly where set_X(v) != set_Y(v); None when inconsistent
    """
    vertices: list = field(default_factory=list)
    equivalence_holds: bool = None

    @property
    def consistent(self):
        return not self.vertices


def find_disagreements(graph, first, second):
    if first.L != second.L:
        raise ArgumentError(f"Snakes have different lengths {first.L} and {second.L}")
    if first.start != second.start:
        raise ArgumentError("Snakes must share x_0")
    n = graph.vertex_count
    last_x, last_y = first.last_index(n), second.last_index(n)
    shared = (last_x >= 0) & (last_y >= 0)
    report = DisagreementReport(vertices=np.flatnonzero(shared & (last_x != last_y)).tolist())
    if report.consistent and n <= settings.ENUMERATION_BUDGET:
        differs = f_values(graph, first) != f_values(graph, second)
        membership = (last_x >= 0) != (last_y >= 0)
        report.equivalence_holds = bool(np.array_equal(differs, membership))
        if not report.equivalence_holds:
            logger.warning("consistent snakes whose f and set disagreements differ")
    return report


def is_consistent_pair(last_x, last_y):
    shared = (last_x >= 0) & (last_y >= 0)
    return bool(np.all(last_x[shared] == last_y[shared]))
