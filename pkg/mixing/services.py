"""Exact vertex distributions, total variation, chunk distributions D_s,
Erdos-Renyi random subproducts and the total-variation chain bound.

Probabilities are doubles; "exact" means within ``PROBABILITY_TOLERANCE``
of accumulated rounding.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from django.conf import settings

from snakelab.exceptions import ArgumentError, SizeLimitError, UnsupportedMethodError

logger = logging.getLogger(__name__)

CHUNK_METHODS = ('uniform_ball', 'subproduct', 'lazy_walk', 'uniform_all', 'point_mass')

# Exhaustive event maximisation is used up to this shape.
_EXHAUSTIVE_COORDINATES = 3
_EXHAUSTIVE_OUTCOMES = 8


class VertexDistribution:
    """A probability vector indexed by vertex id.

    Attributes:
        weights (np.ndarray): Nonnegative weights summing to one
    """

    def __init__(self, weights, validate=True):
        weights = np.array(weights, dtype=np.float64)
        if validate:
            if weights.ndim != 1 or weights.size == 0:
                raise ArgumentError("Distribution weights must be a nonempty vector")
            if np.any(weights < 0):
                raise ArgumentError("Distribution weights must be nonnegative")
            total = weights.sum()
            if abs(total - 1.0) > settings.PROBABILITY_TOLERANCE:
                raise ArgumentError(f"Distribution weights sum to {total!r}, not 1")
        self.weights = weights
        self.weights.setflags(write=False)

    def __len__(self):
        return self.weights.size

    def __getitem__(self, v):
        return float(self.weights[v])

    @classmethod
    def uniform(cls, n, support=None):
        weights = np.zeros(n)
        if support is None:
            weights[:] = 1.0 / n
        else:
            weights[np.asarray(support)] = 1.0 / len(support)
        return cls(weights)

    @classmethod
    def point_mass(cls, n, v):
        weights = np.zeros(n)
        weights[v] = 1.0
        return cls(weights)

    @property
    def support(self):
        return np.flatnonzero(self.weights > 0)

    def tv_to_uniform(self):
        return tv_distance(self, VertexDistribution.uniform(len(self)))


def tv_distance(first, second):
    """Half the L1 distance between two distributions on the same index space."""
    p = first.weights if isinstance(first, VertexDistribution) else np.asarray(first, dtype=np.float64)
    q = second.weights if isinstance(second, VertexDistribution) else np.asarray(second, dtype=np.float64)
    if p.shape != q.shape:
        raise ArgumentError(f"Cannot compare distributions of shapes {p.shape} and {q.shape}")
    return 0.5 * float(np.abs(p - q).sum())


def subproduct_distribution(group, generators):
    """Exact law of g_1^{a_1}...g_s^{a_s} for independent fair bits a_i."""
    generators = [int(g) for g in generators]
    if not generators:
        raise ArgumentError("Subproduct distribution needs at least one generator")
    weights = np.zeros(group.order)
    weights[group.identity] = 1.0
    for g in generators:
        shifted = np.empty_like(weights)
        shifted[group.right_translation(g)] = weights
        weights = 0.5 * weights + 0.5 * shifted
    return VertexDistribution(weights)


def is_delta_uniform(dist, delta):
    """Pointwise test (1-delta)/N <= D(g) <= (1+delta)/N for every g."""
    if delta < 0:
        raise ArgumentError(f"delta must be >= 0, got {delta}")
    n = len(dist)
    slack = 1e-12
    w = dist.weights
    return bool(np.all(w >= (1 - delta) / n - slack) and np.all(w <= (1 + delta) / n + slack))


@dataclass
class ERExperimentResult:
    """Outcome of er_generator_experiment.

    Attributes:
        passes (int): Trials whose random sequence was delta-uniform
        trials (int): Number of trials
        lam (float): s - 2 log2|G| - 2 log2(1/delta)
        predicted_floor (float): 1 - 2^-lam, or None when lam <= 0 (vacuous)
    """
    passes: int
    trials: int
    lam: float
    predicted_floor: float = None

    @property
    def fraction(self):
        return self.passes / self.trials

    @property
    def std_err(self):
        p = self.fraction
        return math.sqrt(p * (1 - p) / self.trials)

    @property
    def floor_label(self):
        if self.predicted_floor is None:
            return "vacuous (<= 0)"
        return f"{self.predicted_floor:.6g}"


def er_lambda(order, s, delta):
    if delta <= 0:
        return -math.inf
    return s - 2 * math.log2(order) - 2 * math.log2(1 / delta)


def er_generator_experiment(group, s, delta, trials, seed):
    """Fraction of random s-sequences whose subproducts are delta-uniform.

    Each trial draws its sequence from its own child stream of
    ``SeedSequence(seed)``, so results depend only on (seed, trials).
    """
    if trials < 1:
        raise ArgumentError("trials must be >= 1")
    lam = er_lambda(group.order, s, delta)
    passes = 0
    for child in np.random.SeedSequence(seed).spawn(trials):
        rng = np.random.default_rng(child)
        sequence = rng.integers(group.order, size=s)
        if is_delta_uniform(subproduct_distribution(group, sequence), delta):
            passes += 1
    floor = 1 - 2.0 ** (-lam) if lam > 0 else None
    return ERExperimentResult(passes=passes, trials=trials, lam=lam, predicted_floor=floor)


@dataclass(frozen=True)
class ChunkMethod:
    """How D_s is built: kind plus generator sequence for ``subproduct``."""
    kind: str
    generators: tuple = ()

    def __str__(self):
        if self.kind == 'subproduct':
            return 'subproduct(' + ','.join(str(g) for g in self.generators) + ')'
        return self.kind

    @classmethod
    def parse(cls, text):
        text = text.replace(' ', '')
        if text.startswith('subproduct(') and text.endswith(')'):
            body = text[len('subproduct('):-1]
            return cls('subproduct', tuple(int(g) for g in body.split(',') if g))
        if text not in CHUNK_METHODS:
            raise ArgumentError(f"Unknown chunk method {text!r}; choose from {', '.join(CHUNK_METHODS)}")
        return cls(text)


@dataclass
class ChunkDistribution:
    """D_s: a distribution on B(s) around v_0 with its realized delta.

    Attributes:
        dist (VertexDistribution): Weights over all vertices, zero outside B(s)
        radius (int): s
        method (ChunkMethod): Construction used
        delta (float): Exact tv distance to uniform over all vertices
    """
    dist: VertexDistribution
    radius: int
    method: ChunkMethod
    delta: float = field(default=None)

    def __post_init__(self):
        if self.delta is None:
            self.delta = self.dist.tv_to_uniform()

    @property
    def weights(self):
        return self.dist.weights

    @property
    def support(self):
        return self.dist.support

    def recompute_delta(self):
        return self.dist.tv_to_uniform()


def lazy_walk_distribution(graph, steps, start=None):
    """Exact law after ``steps`` steps of the walk that holds or moves with probability 1/2 each."""
    start = graph.base_vertex if start is None else start
    weights = np.zeros(graph.vertex_count)
    weights[start] = 1.0
    for _ in range(steps):
        weights = 0.5 * weights + 0.5 * weights[graph.adjacency].sum(axis=1) / graph.degree
    return VertexDistribution(weights)


def build_chunk_distribution(graph, s, method):
    """Build D_s on B(s) by one of the supported constructions.

    Args:
        graph (VertexTransitiveGraph): The graph
        s (int): Chunk length (ball radius)
        method (ChunkMethod | str): uniform_ball, subproduct(gens), lazy_walk,
            uniform_all (needs s = diameter) or point_mass

    Returns:
        ChunkDistribution: With delta computed exactly
    """
    if isinstance(method, str):
        method = ChunkMethod.parse(method)
    if s < 0:
        raise ArgumentError(f"Chunk radius must be >= 0, got {s}")
    n = graph.vertex_count
    if method.kind == 'uniform_ball':
        dist = VertexDistribution.uniform(n, graph.ball(graph.base_vertex, s))
    elif method.kind == 'uniform_all':
        if s != graph.diameter:
            raise ArgumentError(f"uniform_all needs s = diameter = {graph.diameter}, got {s}")
        dist = VertexDistribution.uniform(n)
    elif method.kind == 'lazy_walk':
        dist = lazy_walk_distribution(graph, s)
    elif method.kind == 'point_mass':
        dist = VertexDistribution.point_mass(n, graph.base_vertex)
    elif method.kind == 'subproduct':
        if not graph.is_cayley:
            raise UnsupportedMethodError("subproduct chunk distributions need a Cayley graph")
        generators = method.generators or graph.generator_sequence or graph.generators
        if len(generators) != s:
            raise ArgumentError(f"subproduct needs exactly s = {s} generators, got {len(generators)}")
        dist = subproduct_distribution(graph.group, generators)
        outside = np.setdiff1d(dist.support, graph.ball(graph.base_vertex, s))
        if outside.size:
            raise ArgumentError(
                f"subproduct support leaves B({s}) at {outside[:5].tolist()}; "
                "generators must be graph generators")
        method = ChunkMethod('subproduct', tuple(int(g) for g in generators))
    else:
        raise ArgumentError(f"Unknown chunk method {method.kind!r}")
    chunk = ChunkDistribution(dist=dist, radius=s, method=method)
    logger.debug("D_%d via %s: delta=%.6g support=%d", s, method, chunk.delta, dist.support.size)
    return chunk


# -- total variation chain bound ------------------------------------------------

@dataclass
class ChainBoundResult:
    """Both sides of the chain bound on total variation.

    Attributes:
        lhs (float): tv distance between the joints
        rhs (float): tv of first marginals plus the sum of Delta_i
        deltas (list): Delta_i for i >= 2
        exhaustive (bool): Whether Delta_i maximised over all event tuples
        status (str): ``holds``, ``violated`` or ``inconclusive`` (partial rhs exceeded)
    """
    lhs: float
    rhs: float
    deltas: list
    exhaustive: bool
    status: str

    @property
    def holds(self):
        return self.status == 'holds'

    @property
    def label(self):
        return "exhaustive maximization" if self.exhaustive else "partial maximization"


def _nonempty_subsets(k):
    """0/1 indicator matrix of the 2^k - 1 nonempty subsets of range(k)."""
    masks = np.arange(1, 2 ** k)
    return ((masks[:, None] >> np.arange(k)) & 1).astype(np.float64)


def _conditional_tv(numer_x, numer_y):
    """Row-wise tv between conditionals; rows with zero mass on either side are ignored."""
    mass_x = numer_x.sum(axis=-1, keepdims=True)
    mass_y = numer_y.sum(axis=-1, keepdims=True)
    valid = (mass_x[..., 0] > 0) & (mass_y[..., 0] > 0)
    if not np.any(valid):
        return 0.0
    with np.errstate(invalid='ignore', divide='ignore'):
        tv = 0.5 * np.abs(numer_x / mass_x - numer_y / mass_y).sum(axis=-1)
    return float(tv[valid].max())


def _delta_exhaustive(px, py, i):
    """Delta_i maximised over all nonempty event tuples A_1..A_{i-1}."""
    shape = px.shape
    mx = px.sum(axis=tuple(range(i + 1, len(shape))))
    my = py.sum(axis=tuple(range(i + 1, len(shape))))
    for axis in range(i):
        subsets = _nonempty_subsets(shape[axis])
        mx = np.tensordot(subsets, mx, axes=([1], [axis]))
        my = np.tensordot(subsets, my, axes=([1], [axis]))
        # tensordot puts the subset axis first; rotate it back into position
        mx = np.moveaxis(mx, 0, axis)
        my = np.moveaxis(my, 0, axis)
    return _conditional_tv(mx.reshape(-1, shape[i]), my.reshape(-1, shape[i]))


def _delta_singletons(px, py, i):
    """Delta_i maximised over exact histories X_1 = a_1, ..., X_{i-1} = a_{i-1}."""
    shape = px.shape
    mx = px.sum(axis=tuple(range(i + 1, len(shape)))).reshape(-1, shape[i])
    my = py.sum(axis=tuple(range(i + 1, len(shape)))).reshape(-1, shape[i])
    return _conditional_tv(mx, my)


def tv_chain_bound_check(joint_x, joint_y):
    """Compare tv of two joints with the chain bound tv(X_1,Y_1) + sum Delta_i.

    Shapes with at most three coordinates of at most eight outcomes maximise
    Delta_i over every event tuple; larger shapes use exact histories only and
    report a partial right-hand side.
    """
    px = np.asarray(joint_x, dtype=np.float64)
    py = np.asarray(joint_y, dtype=np.float64)
    if px.shape != py.shape:
        raise ArgumentError(f"Joint shapes differ: {px.shape} vs {py.shape}")
    if px.size > settings.TV_CHAIN_OUTCOME_CAP:
        raise SizeLimitError(f"Joint has {px.size} outcomes", size=px.size,
                             cap=settings.TV_CHAIN_OUTCOME_CAP)
    n = px.ndim
    lhs = tv_distance(px.ravel(), py.ravel())
    first = tv_distance(px.sum(axis=tuple(range(1, n))), py.sum(axis=tuple(range(1, n))))
    exhaustive = n <= _EXHAUSTIVE_COORDINATES and max(px.shape) <= _EXHAUSTIVE_OUTCOMES
    delta_fn = _delta_exhaustive if exhaustive else _delta_singletons
    deltas = [delta_fn(px, py, i) for i in range(1, n)]
    rhs = first + sum(deltas)
    if lhs <= rhs + settings.PROBABILITY_TOLERANCE:
        status = 'holds'
    else:
        status = 'violated' if exhaustive else 'inconclusive'
    if status != 'holds':
        logger.warning("tv chain bound %s: lhs=%.12g rhs=%.12g (%s)", status, lhs, rhs,
                       "exhaustive" if exhaustive else "partial")
    return ChainBoundResult(lhs=lhs, rhs=rhs, deltas=deltas, exhaustive=exhaustive, status=status)


def random_joint_pair(rng, shape):
    """Two independent Dirichlet(1) joints of the given shape."""
    size = int(np.prod(shape))
    return (rng.dirichlet(np.ones(size)).reshape(shape),
            rng.dirichlet(np.ones(size)).reshape(shape))


def product_joint(marginals):
    """Joint of independent coordinates with the given marginals."""
    joint = np.asarray(marginals[0], dtype=np.float64)
    for marginal in marginals[1:]:
        joint = np.multiply.outer(joint, np.asarray(marginal, dtype=np.float64))
    return joint


def pushforward(dist, mapping, size):
    """Law of mapping(V) for V ~ dist, over ``size`` outcomes."""
    weights = np.zeros(size)
    np.add.at(weights, np.asarray(mapping), dist.weights)
    return VertexDistribution(weights, validate=False)


def enumerate_subproducts(group, generators):
    """Brute-force subproduct law by listing all 2^s bit vectors (small s only)."""
    weights = np.zeros(group.order)
    share = 1.0 / 2 ** len(generators)
    for bits in itertools.product((0, 1), repeat=len(generators)):
        element = group.identity
        for bit, g in zip(bits, generators):
            if bit:
                element = group.multiply(element, g)
        weights[element] += share
    return VertexDistribution(weights)
