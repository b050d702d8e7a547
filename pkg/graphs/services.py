"""Cayley graphs and explicit vertex-transitive graphs.

Adjacency is stored as an ``N x degree`` array with each row sorted by vertex
id (vertex-transitive graphs are regular). Shortest paths from the base vertex
follow BFS parents with the smallest-id tie-break, so every extended shortest
path S(v) is reproducible across runs.
"""
import logging
import threading
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from django.conf import settings

from snakelab.exceptions import (
    ArgumentError, DisconnectedGraphError, GraphValidationError, SizeLimitError,
)

logger = logging.getLogger(__name__)

# Graphs up to this size get an exhaustive automorphism check even when the
# Cayley structure already implies it.
EXHAUSTIVE_VERIFY_CAP = 4096

_DISTANCE_CACHE_SIZE = 64


@dataclass(frozen=True)
class ExtendedPath:
    """S(target): a shortest path from the base vertex padded with its target.

    The base vertex itself is omitted, so ``vertices[i]`` is g_{i+1}.
    """
    target: int
    length: int
    vertices: tuple


@dataclass
class AutomorphismCheck:
    vertex: int
    is_permutation: bool
    preserves_edges: bool
    maps_base: bool
    offending_edge: tuple = None

    @property
    def passed(self):
        return self.is_permutation and self.preserves_edges and self.maps_base


@dataclass
class TransitivityReport:
    """Outcome of verify_vertex_transitive.

    Attributes:
        checks (list): One AutomorphismCheck per vertex x (empty when implied)
        mode (str): ``exhaustive`` or ``implied`` (large Cayley graphs)
    """
    checks: list = field(default_factory=list)
    mode: str = 'exhaustive'

    @property
    def passed(self):
        return all(check.passed for check in self.checks)

    @property
    def failures(self):
        return [check for check in self.checks if not check.passed]


class VertexTransitiveGraph:
    """A connected regular graph with a distinguished automorphism family.

    Attributes:
        adjacency (np.ndarray): ``N x degree`` sorted neighbour ids
        base_vertex (int): v_0 (the identity for Cayley graphs)
        kind (str): ``cayley`` or ``explicit``
        group (FiniteGroup): The group of a Cayley graph, else None
        generators (tuple): Gamma for a Cayley graph, else empty
    """

    def __init__(self, adjacency, base_vertex=0, kind='explicit', group=None,
                 generators=(), automorphisms=None):
        self.adjacency = adjacency
        self.vertex_count = adjacency.shape[0]
        self.degree = adjacency.shape[1]
        self.base_vertex = int(base_vertex)
        self.kind = kind
        self.group = group
        self.generators = tuple(int(g) for g in generators)
        self._automorphisms = automorphisms
        self._verified = kind == 'cayley'
        self._lock = threading.Lock()
        self._distances = {}
        self._path_tables = {}
        # for random Cayley graphs: the drawn generator sequence, repeats included
        self.generator_sequence = ()
        self.family = None

    def __repr__(self):
        return f"<VertexTransitiveGraph {self.kind} N={self.vertex_count} degree={self.degree}>"

    @property
    def is_cayley(self):
        return self.kind == 'cayley'

    def label(self, v):
        if self.group is not None:
            return self.group.label(v)
        return str(int(v))

    def _check_vertex(self, v):
        if not isinstance(v, (int, np.integer)) or not 0 <= v < self.vertex_count:
            raise ArgumentError(f"Vertex {v!r} outside [0, {self.vertex_count})")
        return int(v)

    def neighbors(self, v):
        return self.adjacency[self._check_vertex(v)]

    def has_edge(self, u, v):
        row = self.adjacency[u]
        i = np.searchsorted(row, v)
        return i < row.size and row[i] == v

    def edges(self):
        """Undirected edge list (u < v) as an ``E x 2`` array."""
        u = np.repeat(np.arange(self.vertex_count), self.degree)
        v = self.adjacency.ravel()
        keep = u < v
        return np.column_stack([u[keep], v[keep]])

    # -- distances ----------------------------------------------------------

    def _bfs(self, source):
        dist = np.full(self.vertex_count, -1, dtype=np.int64)
        dist[source] = 0
        frontier = np.array([source])
        level = 0
        while frontier.size:
            level += 1
            reached = np.unique(self.adjacency[frontier].ravel())
            reached = reached[dist[reached] < 0]
            dist[reached] = level
            frontier = reached
        return dist

    def all_distances(self, source):
        """Exact BFS distances from ``source``; unreachable vertices get -1."""
        source = self._check_vertex(source)
        with self._lock:
            cached = self._distances.get(source)
        if cached is not None:
            return cached
        dist = self._bfs(source)
        dist.setflags(write=False)
        with self._lock:
            if len(self._distances) >= _DISTANCE_CACHE_SIZE:
                self._distances.pop(next(iter(self._distances)))
            self._distances[source] = dist
        return dist

    def distance(self, u, v):
        return int(self.all_distances(u)[self._check_vertex(v)])

    @property
    def is_connected(self):
        return bool(np.all(self.all_distances(self.base_vertex) >= 0))

    @cached_property
    def diameter(self):
        """Maximum eccentricity; the eccentricity of v_0 on verified graphs."""
        dist = self.all_distances(self.base_vertex)
        if np.any(dist < 0):
            raise DisconnectedGraphError("Graph is disconnected; diameter undefined")
        if self._verified:
            return int(dist.max())
        logger.info("diameter of unverified graph N=%d via all-pairs BFS", self.vertex_count)
        return int(max(self._bfs(v).max() for v in range(self.vertex_count)))

    def ball(self, center, s):
        """Sorted ids of {v : distance(center, v) <= s}."""
        if s < 0:
            raise ArgumentError(f"Ball radius must be >= 0, got {s}")
        dist = self.all_distances(center)
        return np.flatnonzero((dist >= 0) & (dist <= s))

    # -- fixed shortest paths ----------------------------------------------

    @cached_property
    def bfs_parents(self):
        """Smallest-id BFS parent of every vertex (the base is its own parent)."""
        dist = self.all_distances(self.base_vertex)
        candidates = dist[self.adjacency] == (dist[:, None] - 1)
        parent = self.adjacency[np.arange(self.vertex_count), np.argmax(candidates, axis=1)]
        parent[self.base_vertex] = self.base_vertex
        parent.setflags(write=False)
        return parent

    def path_table(self, length):
        """``N x length`` array whose row v is S(v); rows beyond reach are -1."""
        if length < 0:
            raise ArgumentError(f"Path length must be >= 0, got {length}")
        if self.vertex_count > settings.GRAPH_VERTEX_CAP:
            raise SizeLimitError(
                f"Path tables limited to {settings.GRAPH_VERTEX_CAP} vertices",
                size=self.vertex_count, cap=settings.GRAPH_VERTEX_CAP)
        with self._lock:
            cached = self._path_tables.get(length)
        if cached is not None:
            return cached
        dist = self.all_distances(self.base_vertex)
        parent = self.bfs_parents
        table = np.empty((self.vertex_count, length), dtype=np.int64)
        current = np.arange(self.vertex_count)
        depth = dist.copy()
        for i in range(length, 0, -1):
            up = depth > i
            current[up] = parent[current[up]]
            depth[up] -= 1
            table[:, i - 1] = current
        table[dist > length] = -1
        table.setflags(write=False)
        with self._lock:
            self._path_tables[length] = table
        return table

    def extended_shortest_path(self, target, length):
        """Return S(target) padded to ``length``.

        Raises:
            ArgumentError: If ``length`` is shorter than distance(v_0, target)
        """
        target = self._check_vertex(target)
        reach = self.distance(self.base_vertex, target)
        if length < reach:
            raise ArgumentError(
                f"Length {length} shorter than distance {reach} from v_0 to {target}")
        row = self.path_table(length)[target]
        return ExtendedPath(target=target, length=length, vertices=tuple(int(v) for v in row))

    # -- automorphisms --------------------------------------------------------

    def automorphism_array(self, x):
        """Array whose entry v is sigma_x(v)."""
        x = self._check_vertex(x)
        if self.is_cayley:
            return self.group.left_translation(x)
        return self._automorphisms[x]

    def inverse_automorphism_array(self, x):
        """Array whose entry v is sigma_x^{-1}(v)."""
        x = self._check_vertex(x)
        if self.is_cayley:
            return self.group.left_translation(self.group.invert(x))
        return np.argsort(self._automorphisms[x])

    def automorphism_apply(self, x, v):
        """sigma_x(v): left multiplication x·v for Cayley graphs."""
        x, v = self._check_vertex(x), self._check_vertex(v)
        if self.is_cayley:
            return int(self.group.multiply(x, v))
        return int(self._automorphisms[x, v])

    def translates_of(self, a):
        """Array whose entry w is sigma_w(a) (w·a on Cayley graphs)."""
        a = self._check_vertex(a)
        if self.is_cayley:
            return self.group.right_translation(a)
        return self._automorphisms[:, a].copy()

    def translate_sequence(self, x, sequence):
        """sigma_x applied entrywise to a vertex sequence."""
        sequence = np.asarray(sequence, dtype=np.int64)
        if self.is_cayley:
            return self.group.multiply_arrays(x, sequence)
        return self._automorphisms[x][sequence]

    def verify_vertex_transitive(self):
        """Check, for every x, that sigma_x is an edge-preserving permutation sending v_0 to x."""
        if self.is_cayley and self.vertex_count > EXHAUSTIVE_VERIFY_CAP:
            return TransitivityReport(mode='implied')
        report = TransitivityReport()
        n = self.vertex_count
        for x in range(n):
            sigma = np.asarray(self.automorphism_array(x))
            is_permutation = sigma.shape == (n,) and bool(
                np.all((sigma >= 0) & (sigma < n)) and np.all(np.bincount(sigma, minlength=n) == 1))
            if not is_permutation:
                report.checks.append(AutomorphismCheck(x, False, False, False))
                continue
            maps_base = int(sigma[self.base_vertex]) == x
            mapped = np.sort(sigma[self.adjacency], axis=1)
            bad_rows = np.flatnonzero(np.any(mapped != self.adjacency[sigma], axis=1))
            offending = None
            if bad_rows.size:
                u = int(bad_rows[0])
                for w in self.adjacency[u]:
                    if not self.has_edge(sigma[u], sigma[w]):
                        offending = (u, int(w))
                        break
            report.checks.append(AutomorphismCheck(
                x, True, not bad_rows.size, maps_base, offending))
        return report


def _check_regular_undirected(adjacency_lists):
    degrees = {len(set(row)) for row in adjacency_lists}
    if len(degrees) != 1:
        raise GraphValidationError(f"Graph is not regular (degrees {sorted(degrees)})")
    n = len(adjacency_lists)
    adjacency = np.array([sorted(set(int(w) for w in row)) for row in adjacency_lists], dtype=np.int64)
    if adjacency.size and (adjacency.min() < 0 or adjacency.max() >= n):
        raise GraphValidationError("Neighbour id out of range")
    for v in range(n):
        for w in adjacency[v]:
            if v not in adjacency[w]:
                raise GraphValidationError(
                    f"Edge ({v},{int(w)}) has no reverse edge", vertex=v, edge=(v, int(w)))
    return adjacency


def build_cayley(group, generators):
    """Build C(G, Gamma) with edges g -- g·gamma for gamma in Gamma and Gamma^{-1}.

    Args:
        group (FiniteGroup): The vertex set
        generators (iterable): Gamma as element ids

    Returns:
        VertexTransitiveGraph: Connected Cayley graph with v_0 the identity

    Raises:
        ArgumentError: Empty Gamma or identity in Gamma
        DisconnectedGraphError: Gamma does not generate the group
    """
    generators = sorted({int(g) for g in generators})
    if not generators:
        raise ArgumentError("Cayley graph needs a nonempty generator set")
    if group.identity in generators:
        raise ArgumentError("The identity may not be a generator")
    if group.order > settings.GRAPH_VERTEX_CAP:
        raise SizeLimitError(f"Group order {group.order} exceeds the graph cap",
                             size=group.order, cap=settings.GRAPH_VERTEX_CAP)
    connection = sorted(set(generators) | {int(group.invert(g)) for g in generators})
    adjacency = np.sort(np.column_stack([group.right_translation(g) for g in connection]), axis=1)
    graph = VertexTransitiveGraph(adjacency.astype(np.int64), base_vertex=group.identity,
                                  kind='cayley', group=group, generators=generators)
    if not graph.is_connected:
        reached = int(np.count_nonzero(graph.all_distances(graph.base_vertex) >= 0))
        raise DisconnectedGraphError(
            f"Generators {generators} reach {reached} of {group.order} elements of {group.spec}")
    logger.debug("built Cayley graph on %s with %d generators", group.spec, len(generators))
    return graph


def build_explicit_vt(adjacency, base_vertex, automorphisms):
    """Build a vertex-transitive graph from adjacency lists and sigma_x permutations.

    Raises:
        GraphValidationError: Irregular or directed adjacency, or a sigma_x that
            is not an automorphism sending v_0 to x (names the x and edge)
    """
    adjacency = _check_regular_undirected(adjacency)
    n = adjacency.shape[0]
    if not 0 <= base_vertex < n:
        raise ArgumentError(f"Base vertex {base_vertex} outside 0..{n - 1}")
    sigma = np.asarray(automorphisms, dtype=np.int64)
    if sigma.shape != (n, n):
        raise GraphValidationError(f"Need {n} permutations of length {n}, got shape {sigma.shape}")
    graph = VertexTransitiveGraph(adjacency, base_vertex=base_vertex, kind='explicit',
                                  automorphisms=sigma)
    if not graph.is_connected:
        raise DisconnectedGraphError("Explicit graph is disconnected")
    report = graph.verify_vertex_transitive()
    if not report.passed:
        bad = report.failures[0]
        if not bad.is_permutation:
            reason = "is not a permutation"
        elif not bad.maps_base:
            reason = f"sends v_0 to {int(sigma[bad.vertex, base_vertex])}"
        else:
            reason = f"maps edge {bad.offending_edge} to a non-edge"
        raise GraphValidationError(f"sigma_{bad.vertex} {reason}",
                                   vertex=bad.vertex, edge=bad.offending_edge)
    graph._verified = True
    return graph
