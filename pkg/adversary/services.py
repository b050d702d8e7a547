"""Exact adversary quantities on fully enumerated snake ensembles.

An ensemble lists every snake reachable from ``x_0`` with its probability.
The flick kernel of flick point k is ``K_k[X, Y] = Pr_Z(Z = Y | Z_{0->sk} = X_{0->sk})``,
with heads compared as vertex sequences, and ``w(X, Y) = p(X) * mean_k K_k[X, Y]``.
"""
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from django.conf import settings

from snakelab.exceptions import ArgumentError, InternalConsistencyError, SizeLimitError
from snakes.services import Snake, check_chunk, last_visit_index

logger = logging.getLogger(__name__)


@dataclass
class SnakeEnsemble:
    """Every snake of D_{x_0,L} with its probability.

    Attributes:
        graph (VertexTransitiveGraph): Host graph
        params (SnakeParams): Shape shared by all snakes
        vertices (np.ndarray): ``M x (L + 1)`` distinct vertex sequences
        seeds (np.ndarray): ``M x (ell + 1)`` seed tuple of each sequence
        probs (np.ndarray): p(X), positive and summing to 1
        merges (int): Seed tuples folded into an already listed sequence
    """
    graph: object
    params: object
    vertices: np.ndarray
    seeds: np.ndarray
    probs: np.ndarray
    merges: int = 0

    def __post_init__(self):
        if self.probs.min() <= 0:
            raise ArgumentError("Ensemble probabilities must be positive")
        if abs(self.probs.sum() - 1.0) > settings.PROBABILITY_TOLERANCE:
            raise ArgumentError(f"Ensemble probabilities sum to {self.probs.sum()!r}, not 1")

    def __len__(self):
        return len(self.probs)

    def snake(self, i):
        return Snake(vertices=tuple(self.vertices[i].tolist()), seeds=tuple(self.seeds[i].tolist()),
                     s=self.params.s)

    @cached_property
    def last_index(self):
        """``M x N`` last visit positions, -1 for unvisited vertices."""
        n = self.graph.vertex_count
        return np.stack([last_visit_index(row, n) for row in self.vertices])

    @cached_property
    def membership(self):
        return (self.last_index >= 0).astype(float)

    @cached_property
    def kernels(self):
        return flick_kernels(self)

    @cached_property
    def apart(self):
        """Boolean matrix: consistent and with different endpoints."""
        return consistent_apart_matrix(self)


def _chunk_covers(graph, chunk, s):
    """Per seed, ``N x s`` matrix whose row w is sigma_w(S(seed))."""
    table = graph.path_table(s)
    covers = []
    for g in chunk.support.tolist():
        if table[g, 0] < 0:
            raise ArgumentError(f"Seed {g} lies outside B({s})")
        covers.append(np.column_stack([graph.translates_of(int(v)) for v in table[g]]))
    return covers


def enumerate_snake_support(graph, chunk, x0, params):
    """Expand every seed tuple of D_s^{ell + 1} into its snake.

    Raises:
        SizeLimitError: When the number of seed tuples exceeds the enumeration budget
    """
    check_chunk(graph, chunk, params)
    x0 = graph.base_vertex if x0 is None else int(x0)
    support = chunk.support
    probs = chunk.weights[support]
    count = support.size ** (params.ell + 1)
    if count > settings.ENUMERATION_BUDGET:
        raise SizeLimitError("Snake support exceeds the enumeration budget",
                             size=count, cap=settings.ENUMERATION_BUDGET)
    covers = _chunk_covers(graph, chunk, params.s)
    paths = np.array([[x0]], dtype=np.int64)
    mass = np.ones(1)
    choice = np.empty((1, 0), dtype=np.int64)
    for _ in range(params.ell + 1):
        ends = paths[:, -1]
        paths = np.concatenate(
            [np.hstack([paths, cover[ends]]) for cover in covers])
        mass = np.concatenate([mass * p for p in probs])
        choice = np.concatenate(
            [np.hstack([choice, np.full((len(ends), 1), i)]) for i in range(support.size)])
    unique, first, inverse = np.unique(paths, axis=0, return_index=True, return_inverse=True)
    merged = np.bincount(inverse.reshape(-1), weights=mass, minlength=len(unique))
    merges = len(paths) - len(unique)
    if merges:
        logger.warning("%d seed tuples produced an already listed snake", merges)
    logger.info("enumerated %d snakes from %d seed tuples", len(unique), count)
    return SnakeEnsemble(graph=graph, params=params, vertices=unique,
                         seeds=support[choice[first]], probs=merged / merged.sum(), merges=merges)


def flick_kernels(ensemble):
    """List over k = 1..ell of ``K_k[X, Y] = [same head to sk] p(Y) / mass_k(X)``."""
    if len(ensemble) > settings.ADVERSARY_MATRIX_CAP:
        raise SizeLimitError("Ensemble too large for the adversary matrices",
                             size=len(ensemble), cap=settings.ADVERSARY_MATRIX_CAP)
    p = ensemble.probs
    kernels = []
    for k in range(1, ensemble.params.ell + 1):
        heads = ensemble.vertices[:, :ensemble.params.s * k + 1]
        _, inverse = np.unique(heads, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        mass = np.bincount(inverse, weights=p)[inverse]
        same = inverse[:, None] == inverse[None, :]
        kernels.append(np.where(same, p[None, :] / mass[:, None], 0.0))
    return kernels


def w_matrix(ensemble):
    """w(X, Y) = p(X) * E_j[Pr_Z(Z = Y | Z_{0->j} = X_{0->j})].

    Raises:
        SizeLimitError: When the ensemble is too large for a dense matrix
        InternalConsistencyError: When the result is not symmetric
    """
    w = ensemble.probs[:, None] * np.mean(ensemble.kernels, axis=0)
    asymmetry = float(np.abs(w - w.T).max())
    if asymmetry > settings.SYMMETRY_TOLERANCE:
        raise InternalConsistencyError(f"w is not symmetric (max asymmetry {asymmetry:.3g})")
    return w


def consistent_apart_matrix(ensemble):
    last = ensemble.last_index
    endpoints = ensemble.vertices[:, -1]
    rows = []
    for x in range(len(ensemble)):
        agree = (last == last[x]) | (last < 0) | (last[x] < 0)
        rows.append(agree.all(axis=1) & (endpoints != endpoints[x]))
    return np.array(rows)


@dataclass
class EnsembleGoodness:
    """Exact per-snake consistency and hitting maxima over an ensemble.

    Attributes:
        consistency (np.ndarray): Pr_{j,Y}[consistent and x_L != y_L]
        hitting (np.ndarray): ``M x N`` Pr_{j,Y}[v in Y_{j+1->L}]
        eps (float): Hitting threshold used for goodness
        good (np.ndarray): Boolean eps-goodness per snake
    """
    consistency: np.ndarray
    hitting: np.ndarray
    eps: float
    good: np.ndarray

    @property
    def hitting_max(self):
        return self.hitting.max(axis=1)

    def good_fraction(self, probs):
        return float(probs[self.good].sum())


def ensemble_goodness(ensemble, eps=None):
    """Classify every snake; ``eps`` defaults to the largest hitting maximum."""
    s = ensemble.params.s
    last = ensemble.last_index
    kernels = ensemble.kernels
    apart = ensemble.apart
    consistency = np.mean([(kernel * apart).sum(axis=1) for kernel in kernels], axis=0)
    hitting = np.mean([kernel @ (last > s * k).astype(float)
                       for k, kernel in enumerate(kernels, start=1)], axis=0)
    if eps is None:
        eps = float(hitting.max())
    good = (consistency >= ensemble.params.consist_threshold) & (hitting.max(axis=1) <= eps + 1e-12)
    return EnsembleGoodness(consistency=consistency, hitting=hitting, eps=eps, good=good)


def relation_R(ensemble, w=None, good=None):
    """R(A_X, B_Y) = w(X, Y) on consistent pairs with different endpoints.

    Args:
        good (np.ndarray): Optional boolean filter; rows and columns of
            snakes outside it are zeroed
    """
    w = w_matrix(ensemble) if w is None else w
    relation = np.where(ensemble.apart, w, 0.0)
    if good is not None:
        relation[~good, :] = 0.0
        relation[:, ~good] = 0.0
    return relation


@dataclass
class AdversaryScores:
    """Row and column totals of R and the minimized query ratios.

    Attributes:
        M_A (np.ndarray): Sum over Y of R(A_X, B_Y)
        M_B (np.ndarray): Sum over X of R(A_X, B_Y)
        M_A_v (np.ndarray): ``M x N`` totals restricted to Y with set_X(v) != set_Y(v)
        M_B_v (np.ndarray): ``M x N`` totals restricted to X with set_X(v) != set_Y(v)
        m_max (float): Minimized max of the two ratios, None when R is empty
        m_geom (float): Minimized geometric mean of the two ratios
        argmin (tuple): (X, Y, v) attaining m_max
    """
    M_A: np.ndarray
    M_B: np.ndarray
    M_A_v: np.ndarray
    M_B_v: np.ndarray
    m_max: float = None
    m_geom: float = None
    argmin: tuple = None

    @property
    def defined(self):
        return self.m_max is not None

    def min_v_ratio(self):
        """Per X, the smallest M(A_X) / M(A_X, v) over v with M(A_X, v) > 0."""
        with np.errstate(divide='ignore', invalid='ignore'):
            ratios = np.where(self.M_A_v > 0, self.M_A[:, None] / self.M_A_v, np.inf)
        out = ratios.min(axis=1)
        return np.where(np.isinf(out), np.nan, out)


def _distinguishing_totals(relation, member):
    totals = relation.sum(axis=1)
    crossed = relation @ member
    return totals, member * totals[:, None] + crossed - 2 * member * crossed


def adversary_scores(ensemble, relation):
    member = ensemble.membership
    M_A, M_A_v = _distinguishing_totals(relation, member)
    M_B, M_B_v = _distinguishing_totals(relation.T, member)
    scores = AdversaryScores(M_A=M_A, M_B=M_B, M_A_v=M_A_v, M_B_v=M_B_v)
    tol = settings.SYMMETRY_TOLERANCE
    if (M_A_v > M_A[:, None] + tol).any() or (M_B_v > M_B[:, None] + tol).any():
        raise InternalConsistencyError("A restricted total exceeds its full total")
    with np.errstate(divide='ignore', invalid='ignore'):
        ratio_a = M_A[:, None] / M_A_v
        ratio_b = M_B[:, None] / M_B_v
        best_max, best_geom = _minimize_ratios(relation, member, ratio_a, ratio_b, scores)
    if math.isfinite(best_max):
        scores.m_max, scores.m_geom = best_max, best_geom
    else:
        logger.warning("empty relation; adversary scores are undefined")
    return scores


def _minimize_ratios(relation, member, ratio_a, ratio_b, scores):
    best_max, best_geom = math.inf, math.inf
    for x in np.flatnonzero(relation.sum(axis=1) > 0).tolist():
        ys = np.flatnonzero(relation[x] > 0)
        differs = member[x][None, :] != member[ys]
        a = np.broadcast_to(ratio_a[x], differs.shape)
        b = ratio_b[ys]
        high = np.where(differs, np.maximum(a, b), np.inf)
        geom = np.where(differs, np.sqrt(a * b), np.inf)
        i, v = np.unravel_index(np.argmin(high), high.shape)
        if high[i, v] < best_max:
            best_max, scores.argmin = float(high[i, v]), (x, int(ys[i]), int(v))
        best_geom = min(best_geom, float(geom.min()))
    return best_max, best_geom


def lemma8_subset(p, relation, r):
    """Nonempty U with sum_{j in U} R(i, j) >= r p(i) / 2 for every i in U.

    Violators are pruned until none remain, then the inequality is checked again.

    Raises:
        ArgumentError: When sum p > 1 or the total of R is below r
        InternalConsistencyError: When pruning removes everything
    """
    p = np.asarray(p, dtype=float)
    relation = np.asarray(relation, dtype=float)
    tol = settings.PROBABILITY_TOLERANCE
    if p.sum() > 1 + tol:
        raise ArgumentError(f"Weights sum to {p.sum():.6g} > 1")
    if relation.sum() < r - tol:
        raise ArgumentError(f"Relation mass {relation.sum():.6g} below r = {r}")
    keep = np.ones(len(p), dtype=bool)
    while keep.any():
        rows = relation[:, keep].sum(axis=1)
        violators = keep & (rows < r * p / 2)
        if not violators.any():
            break
        keep &= ~violators
    subset = np.flatnonzero(keep).tolist()
    if not subset:
        raise InternalConsistencyError(
            f"Pruning emptied the set although the relation mass is {relation.sum():.6g} >= {r}")
    rows = relation[np.ix_(subset, subset)].sum(axis=1)
    if (rows < r * p[subset] / 2 - tol).any():
        raise InternalConsistencyError("Pruned subset fails its row-sum check")
    return subset


@dataclass
class AdversaryReport:
    """Observed adversary quantities next to the 0.3/eps targets.

    ``status`` is ``confirmed``, ``not confirmed`` or ``not applicable``;
    ``failed_clause`` names the first unmet hypothesis in the last case.
    """
    eps: float
    good_fraction: float
    relation_mass: float
    status: str = 'not applicable'
    failed_clause: str = None
    subset: list = field(default_factory=list)
    scores: AdversaryScores = None
    min_retained_ratio: float = None
    target_rls: float = None
    target_qls: float = None

    @property
    def m_max(self):
        return self.scores.m_max if self.scores else None

    @property
    def m_geom(self):
        return self.scores.m_geom if self.scores else None

    def lines(self):
        out = [f"status: {self.status}"]
        if self.failed_clause:
            out.append(f"failed clause: {self.failed_clause}")
        out += [f"eps: {self.eps:.6g}", f"good fraction: {self.good_fraction:.6g}",
                f"relation mass: {self.relation_mass:.6g}"]
        if self.scores is not None:
            out += [f"subset size: {len(self.subset)}",
                    f"min M(A_X)/p(X) on subset: {self.min_retained_ratio:.6g}",
                    f"m_max: {self.m_max:.6g} (target {self.target_rls:.6g})",
                    f"m_geom: {self.m_geom:.6g} (target {self.target_qls:.6g})"]
        return out


def theorem2_report(ensemble, eps=None):
    """Bundle the adversary computation on the eps-good part of an ensemble.

    ``eps`` defaults to the exact hitting maximum over the ensemble.
    """
    goodness = ensemble_goodness(ensemble, eps)
    p = ensemble.probs
    relation = relation_R(ensemble, good=goodness.good)
    report = AdversaryReport(eps=goodness.eps, good_fraction=goodness.good_fraction(p),
                             relation_mass=float(relation.sum()))
    r = settings.RELATION_MASS_FLOOR
    if report.eps <= 0:
        report.failed_clause = "eps must be positive"
    elif report.good_fraction < ensemble.params.good_prob_threshold:
        report.failed_clause = (f"good fraction {report.good_fraction:.4g} < "
                                f"{ensemble.params.good_prob_threshold}")
    elif report.relation_mass < r:
        report.failed_clause = f"relation mass {report.relation_mass:.4g} < {r}"
    if report.failed_clause:
        logger.info("adversary report not applicable: %s", report.failed_clause)
        return report
    report.subset = lemma8_subset(p, relation, r)
    restricted = np.zeros_like(relation)
    keep = np.ix_(report.subset, report.subset)
    restricted[keep] = relation[keep]
    report.scores = adversary_scores(ensemble, restricted)
    report.min_retained_ratio = float((report.scores.M_A[report.subset] / p[report.subset]).min())
    report.target_rls = (r / 2) / report.eps
    report.target_qls = math.sqrt(report.target_rls)
    confirmed = (report.m_max is not None and report.m_max >= report.target_rls
                 and report.m_geom >= report.target_qls)
    report.status = 'confirmed' if confirmed else 'not confirmed'
    return report

