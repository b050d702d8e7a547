from types import SimpleNamespace

import numpy as np
from django.test import TestCase, override_settings

from adversary.formats import PAIR_COLUMNS, dump_pair_scores, dump_snake_scores
from adversary.services import (
    adversary_scores, ensemble_goodness, enumerate_snake_support, lemma8_subset, relation_R,
    theorem2_report, w_matrix,
)
from graphs.families import cycle, hypercube
from mixing.services import build_chunk_distribution
from snakelab.exceptions import ArgumentError, SizeLimitError
from snakes.properties import consistency_probability, hitting_probability
from snakes.services import SnakeParams


class EnsembleTests(TestCase):
    """Test suite for enumerate_snake_support."""

    def test_point_mass(self):
        """Test that a point-mass chunk law gives one stationary snake."""
        graph = cycle(8)
        chunk = build_chunk_distribution(graph, 2, 'point_mass')
        ensemble = enumerate_snake_support(graph, chunk, 0, SnakeParams(s=2, ell=1))
        self.assertEqual(len(ensemble), 1)
        self.assertEqual(ensemble.vertices[0].tolist(), [0, 0, 0, 0, 0])
        self.assertAlmostEqual(ensemble.probs[0], 1.0)

    def test_cycle_miniature(self):
        """Test 25 distinct snakes on C_8 with s = 2 and ell = 1."""
        graph = cycle(8)
        chunk = build_chunk_distribution(graph, 2, 'uniform_ball')
        ensemble = enumerate_snake_support(graph, chunk, 0, SnakeParams(s=2, ell=1))
        self.assertEqual(len(ensemble), 25)
        self.assertEqual(ensemble.merges, 0)
        self.assertAlmostEqual(ensemble.probs.sum(), 1.0)
        self.assertEqual(len({tuple(row) for row in ensemble.vertices.tolist()}), 25)

    def test_snakes_rebuild_from_seeds(self):
        """Test that each listed seed tuple reproduces its vertex sequence."""
        from snakes.services import assemble_snake
        graph = cycle(8)
        chunk = build_chunk_distribution(graph, 2, 'uniform_ball')
        ensemble = enumerate_snake_support(graph, chunk, 0, SnakeParams(s=2, ell=1))
        for i in range(len(ensemble)):
            rebuilt = assemble_snake(graph, 0, ensemble.seeds[i], 2)
            self.assertEqual(rebuilt.vertices, ensemble.snake(i).vertices)

    @override_settings(ENUMERATION_BUDGET=10)
    def test_budget(self):
        """Test that too many seed tuples are refused with the computed size."""
        graph = cycle(8)
        chunk = build_chunk_distribution(graph, 2, 'uniform_ball')
        with self.assertRaises(SizeLimitError) as ctx:
            enumerate_snake_support(graph, chunk, 0, SnakeParams(s=2, ell=1))
        self.assertEqual(ctx.exception.size, 25)


class WeightMatrixTests(TestCase):
    """Test suite for w, R and exact goodness on miniature ensembles."""

    def setUp(self):
        """Set up Q_6 with a radius-2 ball chunk law and ell = 1."""
        self.graph = hypercube(6)
        self.chunk = build_chunk_distribution(self.graph, 2, 'uniform_ball')
        self.params = SnakeParams(s=2, ell=1, consist_threshold=0.0, good_prob_threshold=0.5)
        self.ensemble = enumerate_snake_support(self.graph, self.chunk, 0, self.params)

    def test_symmetric(self):
        """Test that w is symmetric and sums to 1."""
        w = w_matrix(self.ensemble)
        self.assertLess(np.abs(w - w.T).max(), 1e-12)
        self.assertAlmostEqual(w.sum(), 1.0)

    def test_single_snake_weight(self):
        """Test w(X, X) = 1 for a single-snake ensemble."""
        chunk = build_chunk_distribution(self.graph, 2, 'point_mass')
        ensemble = enumerate_snake_support(self.graph, chunk, 0, self.params)
        self.assertAlmostEqual(w_matrix(ensemble)[0, 0], 1.0)

    def test_different_heads_have_zero_weight(self):
        """Test that snakes with different first chunks get w = 0."""
        w = w_matrix(self.ensemble)
        heads = self.ensemble.vertices[:, 2]
        self.assertTrue((w[heads[:, None] != heads[None, :]] == 0).all())

    def test_relation_excludes_equal_endpoints(self):
        """Test that R vanishes on the diagonal and on inconsistent pairs."""
        relation = relation_R(self.ensemble)
        self.assertTrue((np.diag(relation) == 0).all())
        self.assertTrue((relation[~self.ensemble.apart] == 0).all())

    def test_relation_rows_match_consistency(self):
        """Test sum_Y R(X, Y) = p(X) times the consistency of X."""
        goodness = ensemble_goodness(self.ensemble)
        relation = relation_R(self.ensemble)
        np.testing.assert_allclose(relation.sum(axis=1),
                                   self.ensemble.probs * goodness.consistency, atol=1e-12)

    def test_goodness_matches_snake_module(self):
        """Test exact consistency and hitting against the per-snake computations."""
        goodness = ensemble_goodness(self.ensemble)
        for i in (0, 17, 200, len(self.ensemble) - 1):
            snake = self.ensemble.snake(i)
            consistency = consistency_probability(self.graph, self.chunk, snake, self.params,
                                                  mode='exact')
            hitting = hitting_probability(self.graph, self.chunk, snake, self.params, mode='exact')
            self.assertAlmostEqual(goodness.consistency[i], consistency.value, places=12)
            np.testing.assert_allclose(goodness.hitting[i], hitting.per_vertex, atol=1e-12)

    def test_good_filter(self):
        """Test that filtering zeroes rows and columns of snakes that are not good."""
        good = np.zeros(len(self.ensemble), dtype=bool)
        good[:10] = True
        relation = relation_R(self.ensemble, good=good)
        self.assertEqual(relation[10:].sum(), 0.0)
        self.assertEqual(relation[:, 10:].sum(), 0.0)


class ScoreTests(TestCase):
    """Test suite for adversary_scores."""

    def test_hand_example(self):
        """Test totals and ratios on two snakes differing at two vertices."""
        ensemble = SimpleNamespace(membership=np.array([[1.0, 1.0, 0.0], [1.0, 0.0, 1.0]]))
        relation = np.array([[0.0, 0.5], [0.5, 0.0]])
        scores = adversary_scores(ensemble, relation)
        np.testing.assert_allclose(scores.M_A, [0.5, 0.5])
        np.testing.assert_allclose(scores.M_A_v[0], [0.0, 0.5, 0.5])
        self.assertAlmostEqual(scores.m_max, 1.0)
        self.assertAlmostEqual(scores.m_geom, 1.0)
        self.assertEqual(scores.argmin[:2], (0, 1))

    def test_empty_relation_undefined(self):
        """Test that an all-zero R leaves the scores undefined."""
        ensemble = SimpleNamespace(membership=np.ones((2, 3)))
        scores = adversary_scores(ensemble, np.zeros((2, 2)))
        self.assertFalse(scores.defined)
        self.assertIsNone(scores.m_max)

    def test_geometric_mean_below_max(self):
        """Test m_geom <= m_max and M(A, v) <= M(A) on Q_6."""
        graph = hypercube(6)
        chunk = build_chunk_distribution(graph, 2, 'uniform_ball')
        ensemble = enumerate_snake_support(graph, chunk, 0, SnakeParams(s=2, ell=1))
        scores = adversary_scores(ensemble, relation_R(ensemble))
        self.assertTrue(scores.defined)
        self.assertLessEqual(scores.m_geom, scores.m_max + 1e-12)
        self.assertTrue((scores.M_A_v <= scores.M_A[:, None] + 1e-12).all())
        self.assertTrue((scores.M_B_v <= scores.M_B[:, None] + 1e-12).all())


class SubsetTests(TestCase):
    """Test suite for lemma8_subset."""

    def test_uniform_keeps_everything(self):
        """Test that uniform weights and a flat relation keep every index."""
        self.assertEqual(lemma8_subset([0.25] * 4, np.full((4, 4), 1 / 16), 1.0), [0, 1, 2, 3])

    def test_heavy_pair(self):
        """Test that one heavy pair survives pruning."""
        relation = np.zeros((4, 4))
        relation[0, 1] = relation[1, 0] = 0.5
        self.assertEqual(lemma8_subset([0.25] * 4, relation, 1.0), [0, 1])

    def test_single_item(self):
        """Test m = 1."""
        self.assertEqual(lemma8_subset([1.0], np.array([[0.5]]), 0.5), [0])

    def test_hypotheses_checked(self):
        """Test that a relation lighter than r is an argument error."""
        with self.assertRaises(ArgumentError):
            lemma8_subset([0.5, 0.5], np.zeros((2, 2)), 0.1)

    def test_random_relations(self):
        """Test the row-sum guarantee on random symmetric relations."""
        rng = np.random.default_rng(4)
        for _ in range(50):
            m = int(rng.integers(1, 12))
            p = rng.dirichlet(np.ones(m))
            relation = rng.random((m, m))
            relation = (relation + relation.T) / 2
            r = float(relation.sum())
            subset = lemma8_subset(p, relation, r)
            rows = relation[np.ix_(subset, subset)].sum(axis=1)
            self.assertTrue((rows >= r * p[subset] / 2 - 1e-12).all())


class ReportTests(TestCase):
    """Test suite for theorem2_report."""

    def test_not_applicable_on_cycle(self):
        """Test that C_8 snakes are never 0.9-consistent, so the report names the clause."""
        graph = cycle(8)
        chunk = build_chunk_distribution(graph, 2, 'uniform_ball')
        ensemble = enumerate_snake_support(graph, chunk, 0, SnakeParams(s=2, ell=1))
        report = theorem2_report(ensemble)
        self.assertEqual(report.status, 'not applicable')
        self.assertIn('good fraction', report.failed_clause)
        self.assertIsNone(report.m_max)

    @override_settings(RELATION_MASS_FLOOR=0.02)
    def test_applicable_report(self):
        """Test the subset guarantee and score ordering when the hypotheses hold."""
        graph = hypercube(6)
        chunk = build_chunk_distribution(graph, 2, 'uniform_ball')
        params = SnakeParams(s=2, ell=1, consist_threshold=0.0, good_prob_threshold=0.5)
        report = theorem2_report(enumerate_snake_support(graph, chunk, 0, params))
        self.assertIn(report.status, ('confirmed', 'not confirmed'))
        self.assertTrue(report.subset)
        self.assertGreaterEqual(report.min_retained_ratio, 0.01 - 1e-12)
        self.assertLessEqual(report.m_geom, report.m_max + 1e-12)
        self.assertAlmostEqual(report.target_qls ** 2, report.target_rls)
        self.assertTrue(any(line.startswith('m_max') for line in report.lines()))


class ScoreFormatTests(TestCase):
    """Test suite for the adversary CSV dumps."""

    def setUp(self):
        """Set up the C_8 miniature ensemble."""
        graph = cycle(8)
        chunk = build_chunk_distribution(graph, 2, 'uniform_ball')
        self.ensemble = enumerate_snake_support(graph, chunk, 0, SnakeParams(s=2, ell=1))

    def test_pair_dump(self):
        """Test the header and one row per positive weight."""
        w = w_matrix(self.ensemble)
        lines = dump_pair_scores(w, relation_R(self.ensemble, w=w)).splitlines()
        self.assertEqual(lines[0], ','.join(PAIR_COLUMNS))
        self.assertEqual(len(lines) - 1, int((w > 0).sum()))

    def test_snake_dump(self):
        """Test one row per snake."""
        scores = adversary_scores(self.ensemble, relation_R(self.ensemble))
        lines = dump_snake_scores(scores).splitlines()
        self.assertEqual(lines[0], 'X_index,M_A,min_v_ratio')
        self.assertEqual(len(lines), 26)
