import numpy as np
from django.test import TestCase

from graphs.families import cycle, hypercube, torus
from graphs.services import build_cayley, build_explicit_vt
from groups.services import build_group
from mixing.formats import dump_distribution, load_distribution
from mixing.services import (
    VertexDistribution, build_chunk_distribution, enumerate_subproducts,
    er_generator_experiment, is_delta_uniform, lazy_walk_distribution, product_joint,
    pushforward, random_joint_pair, subproduct_distribution, tv_chain_bound_check,
    tv_distance,
)
from snakelab.exceptions import ArgumentError, DisconnectedGraphError, UnsupportedMethodError


class TotalVariationTests(TestCase):
    """Test suite for tv_distance."""

    def setUp(self):
        """Set up a seeded generator."""
        self.rng = np.random.default_rng(11)

    def test_examples(self):
        """Test the documented tv values."""
        uniform = VertexDistribution.uniform(4)
        self.assertEqual(tv_distance(uniform, uniform), 0)
        self.assertEqual(tv_distance(VertexDistribution.point_mass(4, 0),
                                     VertexDistribution.point_mass(4, 1)), 1)
        self.assertAlmostEqual(tv_distance(uniform, VertexDistribution([0.5, 0.5, 0, 0])), 0.5)

    def test_mismatched_dimension_rejected(self):
        """Test that distributions of different sizes cannot be compared."""
        with self.assertRaises(ArgumentError):
            tv_distance(VertexDistribution.uniform(3), VertexDistribution.uniform(4))

    def test_bad_weights_rejected(self):
        """Test that negative or unnormalised weights are refused."""
        with self.assertRaises(ArgumentError):
            VertexDistribution([0.5, 0.6])
        with self.assertRaises(ArgumentError):
            VertexDistribution([1.5, -0.5])

    def test_metric_properties(self):
        """Test symmetry and the triangle inequality on 10^3 random triples."""
        for _ in range(1000):
            p, q, r = (VertexDistribution(self.rng.dirichlet(np.ones(6))) for _ in range(3))
            self.assertEqual(tv_distance(p, q), tv_distance(q, p))
            self.assertLessEqual(tv_distance(p, r), tv_distance(p, q) + tv_distance(q, r) + 1e-9)

    def test_data_processing(self):
        """Test that a deterministic map never increases tv distance."""
        for _ in range(1000):
            p = VertexDistribution(self.rng.dirichlet(np.ones(8)))
            q = VertexDistribution(self.rng.dirichlet(np.ones(8)))
            mapping = self.rng.integers(4, size=8)
            self.assertLessEqual(tv_distance(pushforward(p, mapping, 4), pushforward(q, mapping, 4)),
                                 tv_distance(p, q) + 1e-12)


class SubproductTests(TestCase):
    """Test suite for subproduct distributions and delta-uniformity."""

    def test_examples(self):
        """Test the documented subproduct laws."""
        z2 = build_group("cyclic(2)")
        np.testing.assert_allclose(subproduct_distribution(z2, [1]).weights, [0.5, 0.5])
        z22 = build_group("power(cyclic(2),2)")
        np.testing.assert_allclose(subproduct_distribution(z22, [1, 2]).weights, [0.25] * 4)
        z4 = build_group("cyclic(4)")
        np.testing.assert_allclose(subproduct_distribution(z4, [1, 1]).weights, [0.25, 0.5, 0.25, 0])

    def test_matches_enumeration_on_nonabelian_group(self):
        """Test the convolution against listing all 2^s subproducts in S_4."""
        group = build_group("symmetric(4)")
        rng = np.random.default_rng(2)
        for _ in range(20):
            gens = rng.integers(group.order, size=6).tolist()
            np.testing.assert_allclose(subproduct_distribution(group, gens).weights,
                                       enumerate_subproducts(group, gens).weights, atol=1e-12)

    def test_empty_sequence_rejected(self):
        """Test that s = 0 is an argument error."""
        with self.assertRaises(ArgumentError):
            subproduct_distribution(build_group("cyclic(3)"), [])

    def test_delta_uniform_examples(self):
        """Test is_delta_uniform on the documented cases."""
        z4 = build_group("cyclic(4)")
        self.assertTrue(is_delta_uniform(VertexDistribution.uniform(4), 0))
        self.assertFalse(is_delta_uniform(subproduct_distribution(z4, [1, 1]), 0.5))
        self.assertFalse(is_delta_uniform(VertexDistribution.point_mass(4, 0), 0.5))

    def test_support_inside_ball(self):
        """Test that subproducts of s generators stay inside B(s)."""
        group = build_group("power(cyclic(4),2)")
        rng = np.random.default_rng(4)
        for s in range(1, 13):
            graph = None
            while graph is None:
                gens = rng.integers(1, group.order, size=s).tolist()
                try:
                    graph = build_cayley(group, gens)
                except DisconnectedGraphError:
                    graph = None
            support = subproduct_distribution(group, gens).support
            self.assertTrue(np.isin(support, graph.ball(0, s)).all())


class ERExperimentTests(TestCase):
    """Test suite for the Erdos-Renyi generator experiment."""

    def test_vacuous_floor(self):
        """Test that lambda <= 0 reports a vacuous floor."""
        result = er_generator_experiment(build_group("cyclic(8)"), 3, 0.25, 10, 1)
        self.assertLessEqual(result.lam, 0)
        self.assertIsNone(result.predicted_floor)
        self.assertEqual(result.floor_label, "vacuous (<= 0)")

    def test_z2_single_generator(self):
        """Test that Z_2 with s = 1 and delta = 0 passes exactly when g_1 = 1."""
        result = er_generator_experiment(build_group("cyclic(2)"), 1, 0.0, 400, 9)
        self.assertAlmostEqual(result.fraction, 0.5, delta=4 * 0.025)

    def test_z2_power_six(self):
        """Test Z_2^6, delta = 1/4, s = 19: floor 7/8 and fraction above it within 3 std errs."""
        result = er_generator_experiment(build_group("power(cyclic(2),6)"), 19, 0.25, 200, 7)
        self.assertAlmostEqual(result.lam, 3.0)
        self.assertAlmostEqual(result.predicted_floor, 0.875)
        self.assertGreaterEqual(result.fraction, 0.875 - 3 * result.std_err)

    def test_reproducible(self):
        """Test that the same seed gives the same pass count."""
        group = build_group("power(cyclic(2),3)")
        first = er_generator_experiment(group, 8, 0.5, 50, 3)
        second = er_generator_experiment(group, 8, 0.5, 50, 3)
        self.assertEqual(first.passes, second.passes)


class ChunkDistributionTests(TestCase):
    """Test suite for build_chunk_distribution."""

    def test_uniform_all_has_zero_delta(self):
        """Test that uniform_all is exactly uniform."""
        graph = torus(4, 2)
        self.assertEqual(build_chunk_distribution(graph, graph.diameter, 'uniform_all').delta, 0)

    def test_uniform_all_needs_diameter(self):
        """Test that uniform_all with s below the diameter is refused."""
        with self.assertRaises(ArgumentError):
            build_chunk_distribution(torus(4, 2), 2, 'uniform_all')

    def test_cycle_full_ball(self):
        """Test C_6 with s = 3: B(3) = V so delta = 0."""
        chunk = build_chunk_distribution(cycle(6), 3, 'uniform_ball')
        self.assertAlmostEqual(chunk.delta, 0)
        self.assertEqual(chunk.support.size, 6)

    def test_hypercube_ball_delta(self):
        """Test Q_3 with s = 2: uniform on 7 vertices, delta = 1/8."""
        chunk = build_chunk_distribution(hypercube(3), 2, 'uniform_ball')
        self.assertEqual(chunk.support.size, 7)
        self.assertAlmostEqual(chunk.delta, 1 / 8)
        self.assertAlmostEqual(chunk.recompute_delta(), chunk.delta)

    def test_radius_beyond_diameter_allowed(self):
        """Test that uniform_ball with s > diameter gives the whole vertex set."""
        chunk = build_chunk_distribution(cycle(6), 5, 'uniform_ball')
        self.assertEqual(chunk.support.size, 6)

    def test_subproduct_on_hypercube(self):
        """Test that the basis subproduct of Q_3 is exactly uniform."""
        chunk = build_chunk_distribution(hypercube(3), 3, 'subproduct(1,2,4)')
        self.assertAlmostEqual(chunk.delta, 0)
        self.assertEqual(str(chunk.method), 'subproduct(1,2,4)')

    def test_subproduct_defaults_to_generators(self):
        """Test that a bare subproduct method uses the graph generators."""
        chunk = build_chunk_distribution(hypercube(3), 3, 'subproduct')
        self.assertEqual(chunk.method.generators, (1, 2, 4))

    def test_subproduct_needs_cayley(self):
        """Test that subproduct on an explicit graph is unsupported."""
        n = 6
        graph = build_explicit_vt([[(v - 1) % n, (v + 1) % n] for v in range(n)], 0,
                                  [[(v + x) % n for v in range(n)] for x in range(n)])
        with self.assertRaises(UnsupportedMethodError):
            build_chunk_distribution(graph, 2, 'subproduct(1,1)')

    def test_point_mass(self):
        """Test the stationary chunk distribution."""
        chunk = build_chunk_distribution(cycle(8), 2, 'point_mass')
        self.assertEqual(chunk.support.tolist(), [0])
        self.assertAlmostEqual(chunk.delta, 7 / 8)

    def test_lazy_walk_support_and_monotone_delta(self):
        """Test that lazy walk deltas do not increase with s and stay inside B(s)."""
        for graph in (cycle(9), hypercube(4), torus(5, 2)):
            deltas = []
            for s in range(0, 8):
                chunk = build_chunk_distribution(graph, s, 'lazy_walk')
                self.assertTrue(np.isin(chunk.support, graph.ball(0, s)).all())
                deltas.append(chunk.delta)
            for before, after in zip(deltas, deltas[1:]):
                self.assertLessEqual(after, before + 1e-9)

    def test_lazy_walk_one_step(self):
        """Test one lazy step on C_6: 1/2 at the start, 1/4 on each neighbour."""
        np.testing.assert_allclose(lazy_walk_distribution(cycle(6), 1).weights,
                                   [0.5, 0.25, 0, 0, 0, 0.25])

    def test_unknown_method_rejected(self):
        """Test that an unknown method name is an argument error."""
        with self.assertRaises(ArgumentError):
            build_chunk_distribution(cycle(6), 2, 'spectral')


class ChainBoundTests(TestCase):
    """Test suite for the total-variation chain bound."""

    def test_equal_joints(self):
        """Test that identical joints give lhs = 0."""
        joint = np.full((2, 3), 1 / 6)
        result = tv_chain_bound_check(joint, joint)
        self.assertEqual(result.lhs, 0)
        self.assertTrue(result.holds)

    def test_product_measures(self):
        """Test that for independent coordinates lhs <= sum of per-coordinate tv."""
        rng = np.random.default_rng(8)
        for _ in range(200):
            xs = [rng.dirichlet(np.ones(4)) for _ in range(3)]
            ys = [rng.dirichlet(np.ones(4)) for _ in range(3)]
            result = tv_chain_bound_check(product_joint(xs), product_joint(ys))
            self.assertTrue(result.holds)
            self.assertLessEqual(result.lhs, sum(tv_distance(x, y) for x, y in zip(xs, ys)) + 1e-9)

    def test_random_pairs_always_hold(self):
        """Test 10^4 random two-coordinate joints with four outcomes each."""
        rng = np.random.default_rng(10)
        for _ in range(10000):
            x, y = random_joint_pair(rng, (4, 4))
            result = tv_chain_bound_check(x, y)
            self.assertTrue(result.exhaustive)
            self.assertEqual(result.status, 'holds')

    def test_large_shapes_use_partial_maximization(self):
        """Test that four coordinates fall back to singleton histories."""
        x, y = random_joint_pair(np.random.default_rng(1), (2, 2, 2, 2))
        result = tv_chain_bound_check(x, y)
        self.assertFalse(result.exhaustive)
        self.assertEqual(result.label, "partial maximization")
        self.assertEqual(len(result.deltas), 3)

    def test_shape_mismatch_rejected(self):
        """Test that joints of different shapes are refused."""
        with self.assertRaises(ArgumentError):
            tv_chain_bound_check(np.full((2, 2), 0.25), np.full((4,), 0.25))


class DistributionFormatTests(TestCase):
    """Test suite for the distribution CSV."""

    def test_dump_and_load(self):
        """Test the rows, trailer and reload of a ball distribution."""
        chunk = build_chunk_distribution(hypercube(3), 2, 'uniform_ball')
        text = dump_distribution(chunk.dist, chunk.delta)
        lines = text.splitlines()
        self.assertEqual(lines[0], 'vertex,weight')
        self.assertEqual(len(lines), 1 + 7 + 1)
        self.assertTrue(lines[-1].startswith('# sum='))
        dist, delta = load_distribution(text, 8)
        np.testing.assert_allclose(dist.weights, chunk.weights)
        self.assertAlmostEqual(delta, 1 / 8)

    def test_missing_trailer_rejected(self):
        """Test that a CSV without the trailer is refused."""
        with self.assertRaises(ArgumentError):
            load_distribution("vertex,weight\n0,1.0\n", 2)
