import numpy as np
from django.test import TestCase

from graphs.families import cycle, hypercube, torus
from graphs.services import build_explicit_vt
from mixing.services import build_chunk_distribution
from snakelab.exceptions import ArgumentError
from snakes.formats import dump_snake, load_snake
from snakes.properties import (
    build_p_table, chunk_mixing_check, classify_goodness, compute_P, consistency_probability,
    disagreement_rate, goodness_rate, hitting_probability, is_sparse, sparse_implies_hitting_check,
    sparse_scores, sparse_tail_experiment, sparseness_rate, wilson_interval,
)
from snakes.services import (
    FlickDistribution, Snake, SnakeParams, f_value, f_values, find_disagreements, flick,
    sample_snake, set_indicator,
)


def explicit_cycle(n):
    return build_explicit_vt([[(v - 1) % n, (v + 1) % n] for v in range(n)], 0,
                             [[(v + x) % n for v in range(n)] for x in range(n)])


class SnakeParamsTests(TestCase):
    """Test suite for SnakeParams."""

    def test_length(self):
        """Test L = (ell + 1) s."""
        params = SnakeParams(s=3, ell=4)
        self.assertEqual(params.L, 15)
        self.assertEqual(params.flick_points, (3, 6, 9, 12))

    def test_formula(self):
        """Test ell = max(1, floor(sqrt(N) / (c_ell s)))."""
        self.assertEqual(SnakeParams.from_formula(10 ** 6, 5).ell, 1)
        self.assertEqual(SnakeParams.from_formula(16, 2).ell, 1)
        self.assertEqual(SnakeParams.from_formula(1600, 2, c_ell=1).ell, 20)

    def test_defaults_from_settings(self):
        """Test that thresholds default to 0.9 and c_ell to 200."""
        params = SnakeParams(s=1, ell=1)
        self.assertEqual((params.c_ell, params.consist_threshold, params.good_prob_threshold),
                         (200, 0.9, 0.9))

    def test_invalid_rejected(self):
        """Test that ell = 0 is an argument error."""
        with self.assertRaises(ArgumentError):
            SnakeParams(s=2, ell=0)

    def test_flick_distribution(self):
        """Test that flick points exclude 0 and L and are uniform."""
        flicks = FlickDistribution(s=2, ell=3)
        self.assertEqual(flicks.support, (2, 4, 6))
        self.assertEqual(flicks.weights, (1 / 3,) * 3)


class SampleSnakeTests(TestCase):
    """Test suite for snake sampling and flicks."""

    def setUp(self):
        """Set up a seeded generator."""
        self.rng = np.random.default_rng(21)

    def test_two_chunks_on_cycle(self):
        """Test ell = 1, s = 3 on C_6 gives L = 6 with two seeds."""
        graph = cycle(6)
        params = SnakeParams(s=3, ell=1)
        snake = sample_snake(graph, build_chunk_distribution(graph, 3, 'uniform_ball'), 0, params,
                             self.rng)
        self.assertEqual(snake.L, 6)
        self.assertEqual(len(snake.seeds), 2)

    def test_stationary_snake(self):
        """Test that point-mass seeds keep the snake at x_0."""
        graph = torus(4, 2)
        params = SnakeParams(s=2, ell=3)
        snake = sample_snake(graph, build_chunk_distribution(graph, 2, 'point_mass'), 5, params,
                             self.rng)
        self.assertEqual(set(snake.vertices), {5})
        self.assertEqual(sum(set_indicator(snake, v) for v in range(16)), 1)

    def test_invariants_on_presets(self):
        """Test adjacency and Cayley endpoint relations on sampled snakes."""
        for graph, s in ((cycle(8), 2), (hypercube(4), 2), (torus(5, 2), 3)):
            params = SnakeParams(s=s, ell=3)
            chunk = build_chunk_distribution(graph, s, 'uniform_ball')
            for _ in range(300):
                x0 = int(self.rng.integers(graph.vertex_count))
                snake = sample_snake(graph, chunk, x0, params, self.rng)
                for a, b in zip(snake.vertices, snake.vertices[1:]):
                    self.assertTrue(a == b or graph.has_edge(a, b))
                for k, seed in enumerate(snake.seeds):
                    self.assertEqual(snake.vertices[s * (k + 1)],
                                     graph.group.multiply(snake.vertices[s * k], seed))

    def test_vertex_transitive_mode(self):
        """Test explicit graphs with s = diameter and uniform_all."""
        graph = explicit_cycle(6)
        params = SnakeParams(s=3, ell=2)
        chunk = build_chunk_distribution(graph, 3, 'uniform_all')
        snake = sample_snake(graph, chunk, 0, params, self.rng)
        for k, seed in enumerate(snake.seeds):
            self.assertEqual(snake.vertices[3 * (k + 1)],
                             graph.automorphism_apply(snake.vertices[3 * k], seed))

    def test_mixed_mode_rejected(self):
        """Test that s below the diameter on an explicit graph is refused."""
        graph = explicit_cycle(6)
        with self.assertRaises(ArgumentError):
            sample_snake(graph, build_chunk_distribution(graph, 2, 'uniform_ball'), 0,
                         SnakeParams(s=2, ell=1), self.rng)

    def test_radius_mismatch_rejected(self):
        """Test that D_s radius must equal s."""
        graph = cycle(8)
        with self.assertRaises(ArgumentError):
            sample_snake(graph, build_chunk_distribution(graph, 2, 'uniform_ball'), 0,
                         SnakeParams(s=3, ell=1), self.rng)

    def test_flick_keeps_head(self):
        """Test exact prefix equality over 10^3 flicks."""
        graph = torus(5, 2)
        params = SnakeParams(s=2, ell=3)
        chunk = build_chunk_distribution(graph, 2, 'uniform_ball')
        for _ in range(1000):
            snake = sample_snake(graph, chunk, 0, params, self.rng)
            j, flicked = flick(graph, chunk, snake, params, self.rng)
            self.assertIn(j, params.flick_points)
            self.assertEqual(flicked.head(j), snake.head(j))
            self.assertEqual(flicked.L, snake.L)

    def test_single_tail_chunk_flick(self):
        """Test that ell = 1 always flicks at j = s."""
        graph = cycle(8)
        params = SnakeParams(s=2, ell=1)
        chunk = build_chunk_distribution(graph, 2, 'uniform_ball')
        snake = sample_snake(graph, chunk, 0, params, self.rng)
        for _ in range(20):
            j, flicked = flick(graph, chunk, snake, params, self.rng)
            self.assertEqual(j, 2)
            self.assertEqual(flicked.seeds[0], snake.seeds[0])


class InstanceFunctionTests(TestCase):
    """Test suite for f_X, set_X and disagreements."""

    def setUp(self):
        """Set up C_6 and two short snakes."""
        self.graph = cycle(6)
        self.straight = Snake(vertices=(0, 1, 2), seeds=(1, 1), s=1)
        self.back = Snake(vertices=(0, 1, 0), seeds=(1, 5), s=1)

    def test_values_on_cycle(self):
        """Test f on C_6 for X = (0, 1, 2)."""
        expected = {2: 0, 1: 1, 0: 2, 5: 3, 4: 4, 3: 5}
        for v, value in expected.items():
            self.assertEqual(f_value(self.graph, self.straight, v), value)
        self.assertEqual(f_values(self.graph, self.straight).tolist(), [2, 1, 0, 5, 4, 3])

    def test_revisit_uses_last_index(self):
        """Test that the max-index rule resolves the repeated vertex."""
        self.assertEqual(f_value(self.graph, self.back, 0), 0)
        self.assertEqual(f_value(self.graph, self.back, 1), 1)

    def test_set_indicator(self):
        """Test membership of on- and off-snake vertices."""
        self.assertEqual(set_indicator(self.straight, 0), 1)
        self.assertEqual(set_indicator(self.straight, 4), 0)

    def test_disagreements(self):
        """Test that only vertex 0 disagrees between the two snakes."""
        report = find_disagreements(self.graph, self.straight, self.back)
        self.assertEqual(report.vertices, [0])
        self.assertFalse(report.consistent)
        self.assertTrue(find_disagreements(self.graph, self.straight, self.straight).consistent)

    def test_consistent_equivalence(self):
        """Test that consistent snakes differ in f exactly where membership differs."""
        graph = torus(6, 2)
        params = SnakeParams(s=2, ell=3)
        chunk = build_chunk_distribution(graph, 2, 'uniform_ball')
        rng = np.random.default_rng(3)
        checked = 0
        for _ in range(300):
            snake = sample_snake(graph, chunk, 0, params, rng)
            _, flicked = flick(graph, chunk, snake, params, rng)
            report = find_disagreements(graph, snake, flicked)
            if report.consistent:
                self.assertTrue(report.equivalence_holds)
                checked += 1
        self.assertGreater(checked, 0)

    def test_length_mismatch_rejected(self):
        """Test that snakes of different length cannot be compared."""
        with self.assertRaises(ArgumentError):
            find_disagreements(self.graph, self.straight, Snake((0, 1), (1, 0), 1))

    def test_unique_local_minimum(self):
        """Test that f_X has its only local minimum at x_L on hypercubes and tori."""
        rng = np.random.default_rng(17)
        for graph, s in ((hypercube(3), 2), (hypercube(6), 3), (torus(4, 2), 2), (torus(12, 2), 4)):
            params = SnakeParams(s=s, ell=3)
            chunk = build_chunk_distribution(graph, s, 'uniform_ball')
            for _ in range(200):
                snake = sample_snake(graph, chunk, 0, params, rng)
                values = f_values(graph, snake)
                minima = np.flatnonzero(values[graph.adjacency].min(axis=1) >= values)
                self.assertEqual(minima.tolist(), [snake.endpoint])


class SparsenessTests(TestCase):
    """Test suite for the P table and sparseness."""

    def setUp(self):
        """Set up C_6 with s = 2 and the uniform ball."""
        self.graph = cycle(6)
        self.chunk = build_chunk_distribution(self.graph, 2, 'uniform_ball')

    def test_p_examples(self):
        """Test P(v_0) = D_s(v_0) and P(1) = 2/5 on C_6."""
        self.assertAlmostEqual(compute_P(self.graph, self.chunk, 0), 1 / 5)
        self.assertAlmostEqual(compute_P(self.graph, self.chunk, 1), 2 / 5)
        self.assertLessEqual(build_p_table(self.graph, self.chunk).values.sum(), 2 + 1e-12)

    def test_eps_one_always_sparse(self):
        """Test that every snake is 1-sparse."""
        params = SnakeParams(s=2, ell=3)
        rng = np.random.default_rng(1)
        for _ in range(50):
            snake = sample_snake(self.graph, self.chunk, 0, params, rng)
            self.assertTrue(is_sparse(self.graph, self.chunk, snake, 1.0).sparse)

    def test_stationary_score(self):
        """Test that the stationary snake scores ell at x_0."""
        chunk = build_chunk_distribution(self.graph, 2, 'point_mass')
        snake = sample_snake(self.graph, chunk, 0, SnakeParams(s=2, ell=4), np.random.default_rng(0))
        result = is_sparse(self.graph, chunk, snake, 0.99)
        self.assertEqual(result.max_score, 4)
        self.assertFalse(result.sparse)
        self.assertTrue(is_sparse(self.graph, chunk, snake, 1.0).sparse)

    def test_code_paths_agree(self):
        """Test that sigma-inverse and group-inverse scores are identical."""
        group_graph = hypercube(4)
        chunk = build_chunk_distribution(group_graph, 2, 'uniform_ball')
        table = build_p_table(group_graph, chunk)
        rng = np.random.default_rng(4)
        for _ in range(50):
            snake = sample_snake(group_graph, chunk, 0, SnakeParams(s=2, ell=3), rng)
            np.testing.assert_array_equal(sparse_scores(group_graph, snake, table, via='sigma'),
                                          sparse_scores(group_graph, snake, table, via='group'))

    def test_matches_path_enumeration(self):
        """Test sparseness scores against direct counting over translated paths on C_8."""
        graph = cycle(8)
        chunk = build_chunk_distribution(graph, 2, 'uniform_ball')
        table = graph.path_table(2)
        rng = np.random.default_rng(6)
        for _ in range(30):
            snake = sample_snake(graph, chunk, 0, SnakeParams(s=2, ell=2), rng)
            brute = np.zeros(8)
            for k in (1, 2):
                x = snake.chunk_start(k)
                for g in chunk.support:
                    covered = set(graph.translate_sequence(x, table[g]).tolist())
                    for v in covered:
                        brute[v] += chunk.weights[g]
            result = is_sparse(graph, chunk, snake, 0.5)
            np.testing.assert_allclose(result.scores, brute, atol=1e-12)
            self.assertEqual(result.sparse, brute.max() <= 0.5 * 2 + 1e-12)


class HittingTests(TestCase):
    """Test suite for hitting probabilities and the sparse-to-hitting check."""

    def setUp(self):
        """Set up the C_8 miniature with s = 2 and ell = 2."""
        self.graph = cycle(8)
        self.params = SnakeParams(s=2, ell=2)
        self.chunk = build_chunk_distribution(self.graph, 2, 'uniform_ball')
        self.rng = np.random.default_rng(12)

    def test_dp_matches_enumeration(self):
        """Test the exact DP against exhaustive tail enumeration."""
        for _ in range(20):
            snake = sample_snake(self.graph, self.chunk, 0, self.params, self.rng)
            exact = hitting_probability(self.graph, self.chunk, snake, self.params, mode='exact')
            brute = hitting_probability(self.graph, self.chunk, snake, self.params, mode='enumerate')
            np.testing.assert_allclose(exact.per_vertex, brute.per_vertex, atol=1e-9)

    def test_dp_matches_enumeration_on_hypercube(self):
        """Test DP and enumeration on Q_4 with s = 2, ell = 2."""
        graph = hypercube(4)
        chunk = build_chunk_distribution(graph, 2, 'uniform_ball')
        snake = sample_snake(graph, chunk, 0, self.params, self.rng)
        np.testing.assert_allclose(
            hitting_probability(graph, chunk, snake, self.params, mode='exact').per_vertex,
            hitting_probability(graph, chunk, snake, self.params, mode='enumerate').per_vertex,
            atol=1e-9)

    def test_certain_and_impossible_hits(self):
        """Test probability 1 for the stationary vertex and 0 out of reach."""
        chunk = build_chunk_distribution(self.graph, 2, 'point_mass')
        snake = sample_snake(self.graph, chunk, 3, self.params, self.rng)
        result = hitting_probability(self.graph, chunk, snake, self.params)
        self.assertEqual(result.per_vertex[3], 1.0)
        self.assertEqual(result.per_vertex[7], 0.0)

    def test_monte_carlo_uses_dp_within_budget(self):
        """Test that monte_carlo mode returns the exact DP when affordable."""
        snake = sample_snake(self.graph, self.chunk, 0, self.params, self.rng)
        result = hitting_probability(self.graph, self.chunk, snake, self.params, mode='monte_carlo',
                                     trials=10, rng=self.rng)
        self.assertEqual(result.mode, 'exact')
        self.assertIsNone(result.caveat)

    def test_sparse_implies_hitting(self):
        """Test that every sparse miniature snake with eps >= 2(L - s)/N is 2 eps-hitting."""
        for graph in (self.graph, hypercube(4)):
            chunk = build_chunk_distribution(graph, 2, 'uniform_ball')
            table = build_p_table(graph, chunk)
            eps = 2 * (self.params.L - self.params.s) / graph.vertex_count
            for _ in range(30):
                snake = sample_snake(graph, chunk, 0, self.params, self.rng)
                report = sparse_implies_hitting_check(graph, chunk, snake, self.params, eps, table)
                self.assertTrue(report.realized_holds)
                if report.precondition_met:
                    self.assertEqual(report.status, 'holds')

    def test_precondition_not_satisfied(self):
        """Test that eps below 2(L - s)/N is reported, not asserted."""
        snake = sample_snake(self.graph, self.chunk, 0, self.params, self.rng)
        report = sparse_implies_hitting_check(self.graph, self.chunk, snake, self.params, 0.1)
        self.assertFalse(report.precondition_met)
        self.assertEqual(report.status, 'precondition not satisfied')
        self.assertIsNone(report.bound)


class MixingCheckTests(TestCase):
    """Test suite for chunk_mixing_check."""

    def test_first_chunk_equals_delta(self):
        """Test that t = s on a Cayley graph reproduces D_s's delta."""
        graph = hypercube(3)
        chunk = build_chunk_distribution(graph, 2, 'uniform_ball')
        result = chunk_mixing_check(graph, chunk, SnakeParams(s=2, ell=2), 2)
        self.assertAlmostEqual(result.max_tv, chunk.delta, places=12)

    def test_all_positions_within_delta(self):
        """Test every t in [s, L] on Q_3 and C_8 with s = 2."""
        for graph in (hypercube(3), cycle(8)):
            chunk = build_chunk_distribution(graph, 2, 'uniform_ball')
            params = SnakeParams(s=2, ell=3)
            for t in range(params.s, params.L + 1):
                self.assertTrue(chunk_mixing_check(graph, chunk, params, t).within_delta)

    def test_uniform_all_is_mixed(self):
        """Test tv = 0 for uniform_all in vertex-transitive mode."""
        graph = explicit_cycle(6)
        chunk = build_chunk_distribution(graph, 3, 'uniform_all')
        params = SnakeParams(s=3, ell=2)
        for t in range(3, params.L + 1):
            self.assertAlmostEqual(chunk_mixing_check(graph, chunk, params, t).max_tv, 0, places=12)

    def test_t_outside_range_rejected(self):
        """Test that t < s is an argument error."""
        graph = cycle(8)
        with self.assertRaises(ArgumentError):
            chunk_mixing_check(graph, build_chunk_distribution(graph, 2, 'uniform_ball'),
                               SnakeParams(s=2, ell=1), 1)


class ConsistencyAndGoodnessTests(TestCase):
    """Test suite for consistency, goodness and the rate experiments."""

    def setUp(self):
        """Set up the C_8 miniature."""
        self.graph = cycle(8)
        self.params = SnakeParams(s=2, ell=2, eps=0.5)
        self.chunk = build_chunk_distribution(self.graph, 2, 'uniform_ball')
        self.rng = np.random.default_rng(31)

    def test_stationary_is_never_consistent_apart(self):
        """Test that point-mass seeds give consistency probability 0."""
        chunk = build_chunk_distribution(self.graph, 2, 'point_mass')
        snake = sample_snake(self.graph, chunk, 0, self.params, self.rng)
        self.assertEqual(consistency_probability(self.graph, chunk, snake, self.params).value, 0)
        self.assertFalse(classify_goodness(self.graph, chunk, snake, self.params).is_good)

    def test_exact_matches_monte_carlo(self):
        """Test the exhaustive consistency value against 4000 flicks."""
        snake = sample_snake(self.graph, self.chunk, 0, self.params, self.rng)
        exact = consistency_probability(self.graph, self.chunk, snake, self.params)
        self.assertTrue(exact.exact)
        sampled = consistency_probability(self.graph, self.chunk, snake, self.params, trials=4000,
                                          rng=self.rng, mode='monte_carlo')
        self.assertFalse(sampled.exact)
        self.assertLessEqual(abs(exact.value - sampled.value), 4 * sampled.std_err + 1e-9)
        self.assertTrue(0 <= exact.value <= 1)

    def test_good_with_eps_one(self):
        """Test that eps = 1 with a zero consistency threshold is always good."""
        params = SnakeParams(s=2, ell=2, eps=1.0, consist_threshold=0.0)
        snake = sample_snake(self.graph, self.chunk, 0, params, self.rng)
        self.assertTrue(classify_goodness(self.graph, self.chunk, snake, params).is_good)

    def test_goodness_rate_bounds(self):
        """Test that the good fraction is a probability and floors do not apply here."""
        rate = goodness_rate(self.graph, self.chunk, self.params, 10, rng=self.rng)
        self.assertTrue(0 <= rate.fraction <= 1)
        self.assertFalse(rate.floors_applicable)

    def test_goodness_rate_default_stream(self):
        """Test that an omitted generator falls back to the default seed reproducibly."""
        first = goodness_rate(self.graph, self.chunk, self.params, 4, trials=50)
        second = goodness_rate(self.graph, self.chunk, self.params, 4, trials=50)
        self.assertEqual(first.total, 4)
        self.assertEqual((first.good, first.mean_consistency), (second.good, second.mean_consistency))

    def test_disagreement_rate_within_bound(self):
        """Test the disagreement frequency against 2(L - s)^2 (delta N + 1)/N."""
        graph = torus(20, 2)
        params = SnakeParams(s=2, ell=4)
        chunk = build_chunk_distribution(graph, 2, 'uniform_ball')
        result = disagreement_rate(graph, chunk, params, 500, self.rng)
        self.assertTrue(result.within_bound)
        self.assertFalse(result.simplification_valid)

    def test_wilson_interval(self):
        """Test that the Wilson interval brackets the proportion."""
        low, high = wilson_interval(1, 2)
        self.assertTrue(0 < low < 0.5 < high < 1)


class SparseTailTests(TestCase):
    """Test suite for the independent-endpoint sparseness tail."""

    def test_eps_at_least_one(self):
        """Test that the tail is empty when eps >= 1."""
        graph = torus(5, 2)
        table = build_p_table(graph, build_chunk_distribution(graph, 4, 'uniform_all'))
        result = sparse_tail_experiment(graph, table, 5, 1.0, 1000, np.random.default_rng(0))
        self.assertEqual(result.estimate.value, 0)

    def test_precondition_false(self):
        """Test that s/N > eps^2/6 leaves the ceiling unset."""
        graph = torus(5, 2)
        table = build_p_table(graph, build_chunk_distribution(graph, 4, 'uniform_all'))
        result = sparse_tail_experiment(graph, table, 5, 0.1, 100, np.random.default_rng(0))
        self.assertFalse(result.precondition)
        self.assertIsNone(result.ceiling)

    def test_chernoff_ceiling_on_torus(self):
        """Test the tail frequency on Z_30^2 against 2^(-ell eps)."""
        graph = torus(30, 2)
        table = build_p_table(graph, build_chunk_distribution(graph, 30, 'uniform_all'))
        result = sparse_tail_experiment(graph, table, 8, 0.5, 20000, np.random.default_rng(5))
        self.assertTrue(result.precondition)
        self.assertAlmostEqual(result.ceiling, 2 ** -4)
        self.assertTrue(result.within_ceiling)

    def test_sparseness_rate(self):
        """Test the sparse fraction and its floor on Z_30^2."""
        graph = torus(30, 2)
        chunk = build_chunk_distribution(graph, 30, 'uniform_all')
        rate = sparseness_rate(graph, chunk, SnakeParams(s=30, ell=8), 0.5, 20,
                               np.random.default_rng(2))
        self.assertTrue(0 <= rate.estimate.value <= 1)
        self.assertIsNotNone(rate.floor)


class SnakeFormatTests(TestCase):
    """Test suite for the snake text format."""

    def test_dump_and_load(self):
        """Test the header and a reload of a sampled snake."""
        graph = torus(5, 2)
        chunk = build_chunk_distribution(graph, 2, 'uniform_ball')
        snake = sample_snake(graph, chunk, 0, SnakeParams(s=2, ell=2), np.random.default_rng(1))
        text = dump_snake(snake)
        self.assertTrue(text.startswith("snake v1 L=6 s=2\n"))
        self.assertEqual(load_snake(text, graph), snake)

    def test_non_edge_rejected(self):
        """Test that a jump between non-adjacent vertices is refused."""
        with self.assertRaises(ArgumentError):
            load_snake("snake v1 L=1 s=1\n0 3\n", cycle(6))
