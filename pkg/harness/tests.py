import contextlib
import io
import tempfile
from pathlib import Path
from types import SimpleNamespace
from unittest.mock import patch

import numpy as np
import pandas as pd
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase

from harness.cli import cli_main
from harness.config import ExperimentConfig
from harness.emit import emit_plot_series, plot_data_text
from harness.suite import (
    SCALES, CheckResult, SuiteReport, check_adversary, check_sparse_hitting, run_suite,
)
from snakelab.exceptions import ArgumentError


def run(name, *args, **options):
    out = io.StringIO()
    call_command(name, *args, stdout=out, **options)
    return out.getvalue()


class ExperimentConfigTests(TestCase):
    """Test suite for ExperimentConfig."""

    def test_parse(self):
        """Test that sections map onto typed fields."""
        config = ExperimentConfig.from_text(
            "[graph]\nfamily = cycle\nn = 8\n[chunk]\ns = 2\n[snake]\neps = 0.5\n[run]\nseed = 3\n")
        self.assertEqual(config.family, 'cycle')
        self.assertEqual(config.n, 8)
        self.assertEqual(config.s, 2)
        self.assertEqual(config.eps, 0.5)
        self.assertEqual(config.run_seed, 3)

    def test_round_trip(self):
        """Test that a written config reads back equal."""
        config = ExperimentConfig(family='cayley', group='symmetric(3)', generators=(1, 2), ell=3)
        self.assertEqual(ExperimentConfig.from_text(config.to_text()), config)

    def test_unknown_key(self):
        """Test that keys outside their section are rejected."""
        with self.assertRaises(ArgumentError):
            ExperimentConfig.from_text("[run]\nfamily = cycle\n")

    def test_bad_value(self):
        """Test that untyped values are rejected."""
        with self.assertRaises(ArgumentError):
            ExperimentConfig.from_text("[graph]\nn = eight\n")

    def test_flags_override_file(self):
        """Test that explicit options win over file values and None leaves them."""
        config = ExperimentConfig(family='cycle', n=8).merged(n=10, family=None, generators='1,2')
        self.assertEqual((config.family, config.n, config.generators), ('cycle', 10, (1, 2)))

    def test_streams_reproducible(self):
        """Test that the named streams depend only on the seed."""
        first = ExperimentConfig(seed=5).streams()['snake'].integers(10 ** 9, size=4)
        second = ExperimentConfig(seed=5).streams()['snake'].integers(10 ** 9, size=4)
        self.assertEqual(first.tolist(), second.tolist())

    def test_params(self):
        """Test params from an explicit ell and from the formula."""
        config = ExperimentConfig(family='cycle', n=16, s=2, ell=3)
        graph = config.build_graph()
        chunk = config.build_chunk(graph)
        self.assertEqual(config.build_params(graph, chunk).L, 8)
        formula = ExperimentConfig(family='cycle', n=16, s=2, c_ell=0.5)
        self.assertEqual(formula.build_params(graph, chunk).ell, 4)


class EmitTests(TestCase):
    """Test suite for plot data emission."""

    def setUp(self):
        """Set up a small summary table."""
        self.table = pd.DataFrame({'N': [16, 64], 'queries_median': [5.0, 11.5],
                                   'lower_bound_rls': [0.5, 0.67], 'family': ['t', 't']})

    def test_one_row(self):
        """Test that one row gives one data line."""
        text = plot_data_text(self.table.head(1), ['N', 'queries_median'])
        self.assertEqual(text.splitlines()[0], '# N queries_median')
        self.assertEqual(len(text.splitlines()), 2)

    def test_columns_aligned(self):
        """Test that every data line has the selected number of fields."""
        lines = plot_data_text(self.table, ['N', 'queries_median', 'lower_bound_rls']).splitlines()[1:]
        self.assertEqual([len(line.split()) for line in lines], [3, 3])

    def test_usage_errors(self):
        """Test empty, unknown and non-numeric selections."""
        for columns in ([], ['nope'], ['family']):
            with self.assertRaises(ArgumentError):
                plot_data_text(self.table, columns)

    def test_series_files(self):
        """Test one file per requested series."""
        with tempfile.TemporaryDirectory() as tmp:
            paths = emit_plot_series(self.table, 'N', ['queries_median', 'lower_bound_rls'], tmp, 'sweep')
            self.assertEqual([p.name for p in paths],
                             ['sweep_queries_median.dat', 'sweep_lower_bound_rls.dat'])


class CommandTests(TestCase):
    """Test suite for the management commands."""

    def test_graph_file(self):
        """Test that graph writes Q_3 with N = 8 and d = 3."""
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'q3.graph'
            output = run('graph', family='hypercube', n=3, out=str(path))
            self.assertIn('validation: passed', output)
            self.assertEqual(path.read_text().splitlines()[0], 'vt-graph v1 N=8 d=3 base=0')

    def test_mix_chunk(self):
        """Test that mix reports the realized delta."""
        self.assertIn('delta=', run('mix', 'chunk', family='cycle', n=8, s=2))

    def test_mix_er_needs_group(self):
        """Test that a missing group is a usage error."""
        with self.assertRaises(CommandError) as ctx:
            run('mix', 'er', family='cycle', n=8)
        self.assertEqual(ctx.exception.returncode, 2)

    def test_mix_chain(self):
        """Test chain checks on random joints."""
        self.assertIn('violated=0', run('mix', 'chain', trials=40, seed=1))

    def test_snake_sample_and_inspect(self):
        """Test that a written snake inspects back with its endpoint as the only minimum."""
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'x.snake'
            run('snake', 'sample', family='cycle', n=12, s=2, ell=2, out=str(path))
            output = run('snake', 'inspect', family='cycle', n=12, s=2, ell=2, snake_file=str(path))
            endpoint = output.splitlines()[0].split('endpoint=')[1]
            self.assertIn(f"local minima of f_X: [{endpoint}]", output)

    def test_verify_mixing(self):
        """Test the mixing suite on C_8."""
        output = run('verify', 'mixing', family='cycle', n=8, s=2, ell=2)
        self.assertIn('mixing t=6', output)

    def test_verify_needs_eps(self):
        """Test that goodness without an epsilon is a usage error."""
        with self.assertRaises(CommandError) as ctx:
            run('verify', 'goodness', family='cycle', n=8, s=2, ell=1)
        self.assertEqual(ctx.exception.returncode, 2)

    def test_solve(self):
        """Test that solve writes one row per trial."""
        with tempfile.TemporaryDirectory() as tmp:
            output = run('solve', family='torus2', n=6, trials=3, out=tmp)
            self.assertIn('median queries', output)
            self.assertEqual(len(pd.read_csv(Path(tmp) / 'solve.csv')), 3)

    def test_adversary(self):
        """Test the miniature pipeline and its CSV dumps."""
        with tempfile.TemporaryDirectory() as tmp:
            output = run('adversary', family='cycle', n=8, s=2, ell=1, out=tmp)
            self.assertIn('ensemble: 25 snakes', output)
            self.assertIn('status: not applicable', output)
            header = (Path(tmp) / 'pairs.csv').read_text().splitlines()[0]
            self.assertEqual(header, 'X_index,Y_index,w,R')
            self.assertEqual(len(pd.read_csv(Path(tmp) / 'snakes.csv')), 25)

    def test_sweep(self):
        """Test rows, plot data and the written config of a sweep."""
        with tempfile.TemporaryDirectory() as tmp:
            run('sweep', family='cycle', sizes='8,12', trials=2, seed=1, out=tmp)
            self.assertEqual(len(pd.read_csv(Path(tmp) / 'sweep.csv')), 4)
            self.assertTrue((Path(tmp) / 'summary.dat').read_text().startswith(
                '# N queries_median lower_bound_rls upper_bound_rls'))
            self.assertEqual(ExperimentConfig.read(Path(tmp) / 'config.ini').family, 'cycle')

    def test_sweep_bad_plot_column(self):
        """Test that an unknown plot column is a usage error."""
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(CommandError) as ctx:
                run('sweep', family='cycle', sizes='8', out=tmp, plot_columns='N,nope')
        self.assertEqual(ctx.exception.returncode, 2)

    def test_selftest_subset(self):
        """Test that named checks run and pass."""
        output = run('selftest', only='w_symmetry,bound_formula', seed=7)
        self.assertIn('PASS w_symmetry', output)
        self.assertIn('2/2 checks passed', output)

    def test_selftest_failure_exit_status(self):
        """Test that a failed check maps to exit status 1."""
        failing = SuiteReport(seed=7, scale='quick', results=[CheckResult('x', False, 'no')])
        with patch('harness.management.commands.selftest.run_suite', return_value=failing):
            with self.assertRaises(CommandError) as ctx:
                run('selftest')
        self.assertEqual(ctx.exception.returncode, 1)


class SuiteTests(TestCase):
    """Test suite for the property suite."""

    def test_deterministic(self):
        """Test byte-identical reports for the same seed."""
        first = run_suite(7, only=['w_symmetry', 'tv_chain', 'sparse_tail']).text()
        second = run_suite(7, only=['w_symmetry', 'tv_chain', 'sparse_tail']).text()
        self.assertEqual(first, second)

    def test_unknown_check(self):
        """Test that unknown check names are rejected."""
        with self.assertRaises(ArgumentError):
            run_suite(7, only=['nope'])

    def test_adversary_check(self):
        """Test that the adversary check passes and names every grid point."""
        report = run_suite(7, only=['adversary'])
        self.assertTrue(report.passed, report.text())
        detail = report.results[0].detail
        for family, n, s, ell in SCALES['quick']['adversary_grid']:
            self.assertIn(f"{family}({n}) s={s} ell={ell}", detail)

    def test_adversary_check_fails_on_weak_scores(self):
        """Test that the adversary check fails when retained totals fall short."""
        def weak_scores(ensemble, relation):
            return SimpleNamespace(M_A=np.zeros(len(ensemble)), m_max=0.0, m_geom=0.0)

        with patch('harness.suite.adversary_scores', side_effect=weak_scores), \
                patch('adversary.services.adversary_scores', side_effect=weak_scores):
            result = check_adversary(np.random.default_rng(7), SCALES['quick'])
        self.assertFalse(result.passed, result.detail)

    def test_sparse_hitting_reports_tightest_eps(self):
        """Test that each snake is held to its own eps and the detail reports it."""
        result = check_sparse_hitting(np.random.default_rng(7), SCALES['quick'])
        self.assertTrue(result.passed, result.detail)
        self.assertIn('eps* median', result.detail)
        self.assertIn('0 over 2 eps*', result.detail)

    def test_full_scale_covers_every_torus(self):
        """Test that the full scale checks every torus side from 4 to 32."""
        self.assertEqual(list(SCALES['full']['tori']), list(range(4, 33)))


class CliTests(SimpleTestCase):
    """Test suite for cli_main exit codes."""

    def call(self, argv):
        with contextlib.redirect_stdout(io.StringIO()), contextlib.redirect_stderr(io.StringIO()):
            return cli_main(argv)

    def test_success(self):
        """Test exit 0 on a valid graph command."""
        self.assertEqual(self.call(['graph', '--family', 'hypercube', '--n', '3']), 0)

    def test_unknown_subcommand(self):
        """Test that an unknown subcommand prints usage and exits 2."""
        self.assertEqual(self.call(['frobnicate']), 2)
        self.assertEqual(self.call([]), 2)

    def test_unknown_flag(self):
        """Test that an unknown flag is a usage error."""
        self.assertEqual(self.call(['graph', '--colour', 'red']), 2)

    def test_argument_error(self):
        """Test that an unknown family exits 2."""
        self.assertEqual(self.call(['graph', '--family', 'petersen', '--n', '3']), 2)

    def test_verification_failure(self):
        """Test exit 1 when the suite fails."""
        failing = SuiteReport(seed=7, scale='quick', results=[CheckResult('x', False, 'no')])
        with patch('harness.management.commands.selftest.run_suite', return_value=failing):
            self.assertEqual(self.call(['selftest']), 1)
