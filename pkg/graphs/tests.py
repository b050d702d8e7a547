import itertools

import numpy as np
from django.test import TestCase

from graphs.families import cycle, hypercube, random_cayley, torus
from graphs.formats import dump_graph, load_graph
from graphs.services import build_cayley, build_explicit_vt
from groups.services import build_group
from snakelab.exceptions import (
    ArgumentError, DisconnectedGraphError, GraphValidationError,
)


def cycle_lists(n):
    return [[(v - 1) % n, (v + 1) % n] for v in range(n)]


def rotations(n):
    return [[(v + x) % n for v in range(n)] for x in range(n)]


class BuildCayleyTests(TestCase):
    """Test suite for Cayley graph construction."""

    def test_cycle(self):
        """Test that Cayley(Z_6, {1}) is C_6."""
        graph = build_cayley(build_group("cyclic(6)"), [1])
        self.assertEqual(graph.vertex_count, 6)
        self.assertEqual(graph.degree, 2)
        self.assertEqual(graph.neighbors(0).tolist(), [1, 5])

    def test_hypercube(self):
        """Test that Cayley(Z_2^3, basis) is Q_3."""
        graph = hypercube(3)
        self.assertEqual((graph.vertex_count, graph.degree), (8, 3))

    def test_torus(self):
        """Test that Cayley(Z_5^2, basis) is the 5x5 torus."""
        graph = torus(5, 2)
        self.assertEqual((graph.vertex_count, graph.degree), (25, 4))

    def test_undirected_and_regular(self):
        """Test that adjacency is symmetric on a nonabelian Cayley graph."""
        group = build_group("symmetric(4)")
        graph = build_cayley(group, [group.element((1, 0, 2, 3)), group.element((1, 2, 3, 0))])
        for u, v in graph.edges().tolist():
            self.assertTrue(graph.has_edge(v, u))
        self.assertTrue(all(len(set(row)) == graph.degree for row in graph.adjacency.tolist()))

    def test_non_generating_set_raises(self):
        """Test that a set that does not generate is a disconnected-graph error."""
        with self.assertRaises(DisconnectedGraphError):
            build_cayley(build_group("cyclic(6)"), [2])

    def test_identity_generator_rejected(self):
        """Test that the identity is refused as a generator."""
        with self.assertRaises(ArgumentError):
            build_cayley(build_group("cyclic(6)"), [0, 1])

    def test_empty_generators_rejected(self):
        """Test that an empty generator set is refused."""
        with self.assertRaises(ArgumentError):
            build_cayley(build_group("cyclic(6)"), [])

    def test_random_cayley_keeps_sequence(self):
        """Test that random Cayley graphs remember the drawn sequence."""
        graph = random_cayley("power(cyclic(2),4)", 8, np.random.default_rng(3))
        self.assertEqual(len(graph.generator_sequence), 8)
        self.assertTrue(graph.is_connected)


class ExplicitGraphTests(TestCase):
    """Test suite for explicit vertex-transitive graphs."""

    def test_cycle_rotations_accepted(self):
        """Test that C_6 with rotations passes validation."""
        graph = build_explicit_vt(cycle_lists(6), 0, rotations(6))
        self.assertTrue(graph.verify_vertex_transitive().passed)
        self.assertEqual(graph.diameter, 3)

    def test_cube_xor_translations_accepted(self):
        """Test that Q_3 with XOR translations passes validation."""
        adjacency = [[v ^ 1, v ^ 2, v ^ 4] for v in range(8)]
        sigma = [[v ^ x for v in range(8)] for x in range(8)]
        graph = build_explicit_vt(adjacency, 0, sigma)
        self.assertEqual(graph.automorphism_apply(5, 0), 5)

    def test_non_edge_image_rejected(self):
        """Test that a sigma sending an edge to a non-edge names x and the edge."""
        sigma = rotations(6)
        sigma[2] = [2, 4, 3, 5, 0, 1]
        with self.assertRaises(GraphValidationError) as ctx:
            build_explicit_vt(cycle_lists(6), 0, sigma)
        self.assertEqual(ctx.exception.vertex, 2)
        self.assertEqual(ctx.exception.edge, (0, 1))

    def test_identity_sigma_fails_report(self):
        """Test that sigma_1 = identity fails because sigma_1(v_0) != 1."""
        graph = cycle(6)
        graph_explicit = build_explicit_vt(cycle_lists(6), 0, rotations(6))
        graph_explicit._automorphisms = graph_explicit._automorphisms.copy()
        graph_explicit._automorphisms[1] = np.arange(6)
        report = graph_explicit.verify_vertex_transitive()
        self.assertFalse(report.passed)
        self.assertEqual([c.vertex for c in report.failures], [1])
        self.assertFalse(report.failures[0].maps_base)
        self.assertTrue(graph.verify_vertex_transitive().passed)

    def test_irregular_rejected(self):
        """Test that an irregular adjacency cannot be vertex-transitive."""
        with self.assertRaises(GraphValidationError):
            build_explicit_vt([[1], [0, 2], [1]], 0, rotations(3))

    def test_base_vertex_out_of_range(self):
        """Test that a base vertex outside the vertex set is an argument error."""
        for base in (6, -1):
            with self.assertRaises(ArgumentError):
                build_explicit_vt(cycle_lists(6), base, rotations(6))


class DistanceTests(TestCase):
    """Test suite for distances, diameter and balls."""

    def setUp(self):
        """Set up the small preset graphs."""
        self.c6 = cycle(6)
        self.q3 = hypercube(3)
        self.t5 = torus(5, 2)

    def test_distance_examples(self):
        """Test the documented distances."""
        self.assertEqual(self.c6.distance(0, 3), 3)
        self.assertEqual(self.q3.distance(0, 7), 3)
        for v in range(8):
            self.assertEqual(self.q3.distance(v, v), 0)

    def test_diameter_examples(self):
        """Test diameters of C_6, Q_3 and the 5x5 torus."""
        self.assertEqual(self.c6.diameter, 3)
        self.assertEqual(self.q3.diameter, 3)
        self.assertEqual(self.t5.diameter, 4)

    def test_diameter_matches_all_pairs(self):
        """Test that the v_0 eccentricity equals the all-pairs maximum for N <= 64."""
        for graph in (self.c6, self.q3, self.t5, hypercube(6), torus(4, 3)):
            brute = max(graph.all_distances(v).max() for v in range(graph.vertex_count))
            self.assertEqual(graph.diameter, brute)

    def test_ball_examples(self):
        """Test the documented balls."""
        self.assertEqual(self.q3.ball(0, 0).tolist(), [0])
        self.assertEqual(self.q3.ball(0, 1).tolist(), [0, 1, 2, 4])
        self.assertEqual(self.c6.ball(0, 3).tolist(), list(range(6)))

    def test_ball_growth(self):
        """Test that balls are nondecreasing and the diameter ball is everything."""
        for graph in (self.c6, self.q3, self.t5):
            sizes = [graph.ball(graph.base_vertex, s).size for s in range(graph.diameter + 1)]
            self.assertEqual(sizes, sorted(sizes))
            self.assertEqual(sizes[-1], graph.vertex_count)

    def test_negative_radius_rejected(self):
        """Test that a negative radius is an argument error."""
        with self.assertRaises(ArgumentError):
            self.c6.ball(0, -1)

    def test_left_invariance(self):
        """Test distance(x·u, x·v) = distance(u, v) on 10^3 samples."""
        group = build_group("symmetric(4)")
        graph = build_cayley(group, [group.element((1, 0, 2, 3)), group.element((1, 2, 3, 0))])
        rng = np.random.default_rng(5)
        for x, u, v in rng.integers(graph.vertex_count, size=(1000, 3)).tolist():
            self.assertEqual(
                graph.distance(group.multiply(x, u), group.multiply(x, v)), graph.distance(u, v))


class PathTests(TestCase):
    """Test suite for the fixed extended shortest paths."""

    def test_cycle_path(self):
        """Test S(2) of length 3 on C_6."""
        self.assertEqual(cycle(6).extended_shortest_path(2, 3).vertices, (1, 2, 2))

    def test_base_path_is_constant(self):
        """Test that S(v_0) repeats v_0."""
        graph = torus(4, 2)
        self.assertEqual(graph.extended_shortest_path(0, 5).vertices, (0,) * 5)

    def test_hypercube_tie_break(self):
        """Test S(110) on Q_3 under the smallest-id tie-break."""
        graph = hypercube(3)
        target = graph.group.element([1, 1, 0])
        path = graph.extended_shortest_path(target, 3)
        self.assertEqual([graph.label(v) for v in path.vertices], ['100', '110', '110'])

    def test_short_length_rejected(self):
        """Test that a length below the distance is an argument error."""
        with self.assertRaises(ArgumentError):
            cycle(6).extended_shortest_path(3, 2)

    def test_paths_are_shortest_and_padded(self):
        """Test the prefix and padding invariants for every target of a torus."""
        graph = torus(5, 2)
        d = graph.diameter
        for target in range(graph.vertex_count):
            path = graph.extended_shortest_path(target, d).vertices
            r = graph.distance(0, target)
            walk = (0,) + path[:r]
            for a, b in zip(walk, walk[1:]):
                self.assertTrue(graph.has_edge(a, b))
            self.assertTrue(all(v == target for v in path[max(r - 1, 0):]) or r == 0)

    def test_paths_deterministic(self):
        """Test that rebuilding the graph reproduces the same path table."""
        first = hypercube(4).path_table(3)
        second = hypercube(4).path_table(3)
        np.testing.assert_array_equal(first, second)


class AutomorphismTests(TestCase):
    """Test suite for the automorphism family."""

    def test_sigma_sends_base_to_x(self):
        """Test sigma_x(v_0) = x on several graphs."""
        for graph in (cycle(7), hypercube(3), torus(3, 2)):
            for x in range(graph.vertex_count):
                self.assertEqual(graph.automorphism_apply(x, graph.base_vertex), x)

    def test_cyclic_translation(self):
        """Test sigma_2(3) = 5 on Cayley Z_6."""
        self.assertEqual(cycle(6).automorphism_apply(2, 3), 5)

    def test_edges_preserved_exhaustively(self):
        """Test that every sigma_x maps every edge of C_6 to an edge."""
        graph = cycle(6)
        for x, (u, v) in itertools.product(range(6), graph.edges().tolist()):
            self.assertTrue(graph.has_edge(graph.automorphism_apply(x, u), graph.automorphism_apply(x, v)))

    def test_inverse_array(self):
        """Test that the inverse automorphism undoes sigma_x."""
        graph = torus(4, 2)
        for x in range(graph.vertex_count):
            forward = graph.automorphism_array(x)
            np.testing.assert_array_equal(graph.inverse_automorphism_array(x)[forward],
                                          np.arange(graph.vertex_count))


class GraphFormatTests(TestCase):
    """Test suite for the vt-graph text format."""

    def test_cayley_dump_header(self):
        """Test the header and Cayley line of Q_3."""
        text = dump_graph(hypercube(3))
        lines = text.splitlines()
        self.assertEqual(lines[0], "vt-graph v1 N=8 d=3 base=0")
        self.assertEqual(lines[1], "cayley group=power(cyclic(2),3) gens=1,2,4")
        self.assertEqual(lines[2], "0: 1 2 4")

    def test_round_trip_is_bit_exact(self):
        """Test that loading and dumping reproduces the text exactly."""
        for graph in (cycle(6), torus(4, 2), build_explicit_vt(cycle_lists(5), 0, rotations(5))):
            text = dump_graph(graph)
            self.assertEqual(dump_graph(load_graph(text)), text)

    def test_bad_header_rejected(self):
        """Test that a malformed header is an argument error."""
        with self.assertRaises(ArgumentError):
            load_graph("graph N=3\n")
