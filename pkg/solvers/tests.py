import math

import numpy as np
from django.test import TestCase, override_settings

from graphs.families import cycle, hypercube, torus
from mixing.services import build_chunk_distribution
from snakelab.exceptions import ArgumentError
from snakes.services import Snake, SnakeParams, f_values, sample_snake
from solvers.experiments import (
    SWEEP_COLUMNS, loglog_slope, parse_sizes, query_complexity_experiment,
)
from solvers.services import (
    CountingOracle, aldous_solver, enumerate_local_minima, lower_bound_formula,
    make_decision_instance, make_instance, steepest_descent, upper_bound_formula,
    verify_local_min,
)


class OracleTests(TestCase):
    """Test suite for the counting oracles."""

    def setUp(self):
        """Set up C_6 and the snake (0, 1, 2)."""
        self.graph = cycle(6)
        self.snake = Snake(vertices=(0, 1, 2), seeds=(1, 1), s=1)

    def test_counts(self):
        """Test the counter before and after asking x_L, and a memoized repeat."""
        oracle = make_instance(self.graph, self.snake)
        self.assertEqual(oracle.query_count, 0)
        self.assertEqual(oracle(2), 0)
        self.assertEqual(oracle.query_count, 1)
        oracle(2)
        self.assertEqual(oracle.query_count, 1)
        self.assertEqual(oracle.query_log, [2])
        self.assertEqual(oracle.policy, 'memoized')

    def test_unmemoized_counts_every_ask(self):
        """Test that memoize=False charges repeats."""
        oracle = CountingOracle(lambda v: v, memoize=False)
        oracle(1)
        oracle(1)
        self.assertEqual(oracle.query_count, 2)

    def test_decision_instance(self):
        """Test g_{X,b} values off and at x_L."""
        oracle = make_decision_instance(self.graph, self.snake, 1)
        self.assertEqual(oracle(0), (2, -1))
        self.assertEqual(oracle(2), (0, 1))
        self.assertEqual(make_decision_instance(self.graph, self.snake, 0)(2), (0, 0))

    def test_bad_bit_rejected(self):
        """Test that the decision bit must be 0 or 1."""
        with self.assertRaises(ArgumentError):
            make_decision_instance(self.graph, self.snake, 2)


class DescentTests(TestCase):
    """Test suite for steepest descent and the sampling solver."""

    def setUp(self):
        """Set up C_6 and the snake (0, 1, 2)."""
        self.graph = cycle(6)
        self.snake = Snake(vertices=(0, 1, 2), seeds=(1, 1), s=1)

    def test_start_at_minimum(self):
        """Test that starting at x_L costs 1 + degree queries."""
        result = steepest_descent(self.graph, make_instance(self.graph, self.snake), 2)
        self.assertEqual(result.vertex, 2)
        self.assertEqual(result.queries, 1 + self.graph.degree)

    def test_cycle_trace(self):
        """Test the path 4, 5, 0, 1, 2 on C_6."""
        result = steepest_descent(self.graph, make_instance(self.graph, self.snake), 4)
        self.assertEqual(result.trace, [4, 5, 0, 1, 2])
        self.assertEqual(result.vertex, 2)

    def test_memoized_count_on_cycles(self):
        """Test 1 + degree + moves * (degree - 1) queries on C_n."""
        rng = np.random.default_rng(2)
        for n in (7, 10, 15):
            graph = cycle(n)
            chunk = build_chunk_distribution(graph, 2, 'uniform_ball')
            for _ in range(20):
                snake = sample_snake(graph, chunk, 0, SnakeParams(s=2, ell=3), rng)
                start = int(rng.integers(n))
                result = steepest_descent(graph, make_instance(graph, snake), start)
                moves = len(result.trace) - 1
                self.assertEqual(result.queries, 1 + 2 + moves * 1)

    def test_decision_instance_descends_to_endpoint(self):
        """Test that descent on g_{X,b} ends at x_L."""
        oracle = make_decision_instance(self.graph, self.snake, 1)
        self.assertEqual(steepest_descent(self.graph, oracle, 4).vertex, 2)

    def test_aldous_full_sample(self):
        """Test that sampling every vertex finds the global minimum."""
        oracle = make_instance(self.graph, self.snake)
        result = aldous_solver(self.graph, oracle, np.random.default_rng(0), samples=6)
        self.assertEqual(result.vertex, 2)
        self.assertEqual(result.queries, 6)

    def test_aldous_single_sample(self):
        """Test that one sample degenerates to descent from a random start."""
        oracle = make_instance(self.graph, self.snake)
        result = aldous_solver(self.graph, oracle, np.random.default_rng(0), samples=1)
        self.assertEqual(result.samples, 1)
        self.assertEqual(result.vertex, 2)

    def test_aldous_on_torus(self):
        """Test the default sample size and sanity bounds on Z_20^2."""
        graph = torus(20, 2)
        chunk = build_chunk_distribution(graph, graph.diameter, 'uniform_all')
        params = SnakeParams(s=graph.diameter, ell=3)
        rng = np.random.default_rng(9)
        for _ in range(20):
            snake = sample_snake(graph, chunk, 0, params, rng)
            result = aldous_solver(graph, make_instance(graph, snake), rng)
            self.assertEqual(result.samples, 40)
            self.assertEqual(result.vertex, snake.endpoint)
            self.assertTrue(1 <= result.queries <= graph.vertex_count)

    def test_solver_answers_are_local_minima(self):
        """Test every solver output against the raw function."""
        graph = hypercube(6)
        chunk = build_chunk_distribution(graph, 3, 'uniform_ball')
        rng = np.random.default_rng(5)
        for _ in range(200):
            snake = sample_snake(graph, chunk, 0, SnakeParams(s=3, ell=4), rng)
            values = f_values(graph, snake)
            for result in (aldous_solver(graph, make_instance(graph, snake), rng),
                           steepest_descent(graph, make_instance(graph, snake), int(rng.integers(64)))):
                self.assertTrue(verify_local_min(graph, values, result.vertex))
                self.assertEqual(result.vertex, snake.endpoint)


class LocalMinimaTests(TestCase):
    """Test suite for local minimum checks."""

    def test_examples(self):
        """Test verify_local_min on a minimum and a non-minimum."""
        graph = cycle(6)
        values = np.array([0, 1, 2, 3, 2, 1])
        self.assertTrue(verify_local_min(graph, values, 0))
        self.assertFalse(verify_local_min(graph, values, 2))

    def test_f_has_unique_minimum(self):
        """Test that f_X has exactly {x_L} as local minima."""
        graph = cycle(6)
        snake = Snake(vertices=(0, 1, 2), seeds=(1, 1), s=1)
        self.assertEqual(enumerate_local_minima(graph, f_values(graph, snake)), [2])

    def test_constant_function(self):
        """Test that every vertex of a constant function is a local minimum."""
        self.assertEqual(enumerate_local_minima(cycle(6), lambda v: 7), list(range(6)))

    def test_random_injective(self):
        """Test the scan against a direct re-check on random injective functions."""
        graph = cycle(6)
        rng = np.random.default_rng(1)
        for _ in range(50):
            values = rng.permutation(6)
            minima = enumerate_local_minima(graph, values)
            self.assertTrue(minima)
            self.assertEqual(minima, [v for v in range(6) if verify_local_min(graph, values, v)])

    @override_settings(ENUMERATION_BUDGET=4)
    def test_budget(self):
        """Test that scans beyond the enumeration budget are refused."""
        from snakelab.exceptions import SizeLimitError
        with self.assertRaises(SizeLimitError):
            enumerate_local_minima(cycle(6), lambda v: v)


class BoundFormulaTests(TestCase):
    """Test suite for the bound expressions."""

    def test_examples(self):
        """Test rls at N = 2^10, d = 10 and at N = 4, d = 1."""
        self.assertAlmostEqual(lower_bound_formula(2 ** 10, 10).rls, 0.32)
        self.assertAlmostEqual(lower_bound_formula(4, 1).rls, 1.0)

    def test_hypercube_ratio_constant(self):
        """Test rls(2^n, n) / (2^(n/2) / n^2) is constant for n = 4..20."""
        ratios = [lower_bound_formula(2 ** n, n).rls / (2 ** (n / 2) / n ** 2) for n in range(4, 21)]
        for ratio in ratios:
            self.assertAlmostEqual(ratio / ratios[0], 1.0, places=9)

    def test_invalid_rejected(self):
        """Test that N < 2 is an argument error."""
        with self.assertRaises(ArgumentError):
            lower_bound_formula(1, 1)

    def test_upper_bounds(self):
        """Test the sampling and quantum upper bound expressions."""
        bounds = upper_bound_formula(400, 4)
        self.assertAlmostEqual(bounds.rls, 40.0)
        self.assertAlmostEqual(bounds.qls, 400 ** (1 / 3) * 4 ** (1 / 6))


class SweepTests(TestCase):
    """Test suite for query_complexity_experiment."""

    def test_single_row(self):
        """Test one size and one trial give one row in schema order."""
        result = query_complexity_experiment('cycle', [9], trials=1, seed=1)
        self.assertEqual(list(result.table.columns), SWEEP_COLUMNS)
        self.assertEqual(len(result.table), 1)
        self.assertTrue(result.complete)

    def test_rows_and_ceiling(self):
        """Test row counts and the memoized query ceiling over a torus grid."""
        result = query_complexity_experiment('torus2', parse_sizes('4:8:2'), solver='descent',
                                             trials=5, seed=3)
        self.assertEqual(len(result.table), 15)
        self.assertEqual(len(result.summary), 3)
        ceiling = result.table['N'] * (1 + result.table['degree'])
        self.assertTrue((result.table['queries'] <= ceiling).all())
        self.assertTrue(result.table['answer_correct'].all())

    def test_reproducible(self):
        """Test that the same seed reproduces every query count."""
        first = query_complexity_experiment('hypercube', [3, 4], trials=4, seed=11)
        second = query_complexity_experiment('hypercube', [3, 4], trials=4, seed=11)
        self.assertTrue(first.table.equals(second.table))

    def test_budget_gives_partial_table(self):
        """Test that a tiny query budget stops the sweep early."""
        result = query_complexity_experiment('cycle', [10, 20, 30], trials=3, seed=1, query_budget=5)
        self.assertFalse(result.complete)
        self.assertLess(len(result.table), 9)

    def test_random_cayley_family(self):
        """Test a random Cayley sweep on Z_2^n."""
        result = query_complexity_experiment('random_cayley', [4], trials=2, seed=2)
        self.assertEqual(result.table['N'].tolist(), [16, 16])

    def test_unknown_solver_rejected(self):
        """Test that an unknown solver is an argument error."""
        with self.assertRaises(ArgumentError):
            query_complexity_experiment('cycle', [5], solver='quantum')

    def test_parse_sizes(self):
        """Test the range and list forms."""
        self.assertEqual(parse_sizes('10:40:5'), [10, 15, 20, 25, 30, 35, 40])
        self.assertEqual(parse_sizes('3,5'), [3, 5])

    def test_loglog_slope(self):
        """Test the slope of an exact square-root law."""
        import pandas as pd
        summary = pd.DataFrame({'N': [100, 400, 1600], 'queries_median': [10, 20, 40]})
        self.assertAlmostEqual(loglog_slope(summary), 0.5)
        self.assertTrue(math.isclose(loglog_slope(summary), 0.5))
