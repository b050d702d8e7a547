from harness.base import LabCommand
from harness.emit import csv_text, emit_plot_data, emit_plot_series, write_csv
from snakelab.exceptions import ArgumentError
from solvers.experiments import SOLVERS, SWEEP_COLUMNS, loglog_slope, parse_sizes, query_complexity_experiment

DEFAULT_PLOT_COLUMNS = 'N,queries_median,lower_bound_rls,upper_bound_rls'


class Command(LabCommand):
    help = "Query counts of a solver across the sizes of a graph family"

    def add_lab_arguments(self, parser):
        parser.add_argument('--sizes', required=True, help="a:b:step or a comma list")
        parser.add_argument('--solver', default='aldous', choices=SOLVERS)
        parser.add_argument('--plot-columns', dest='plot_columns', default=DEFAULT_PLOT_COLUMNS)

    def run(self, config, sizes, solver, plot_columns, **options):
        try:
            size_list = parse_sizes(sizes)
        except ValueError as exc:
            raise ArgumentError(f"Bad size list {sizes!r}") from exc
        result = query_complexity_experiment(
            config.family, size_list, solver=solver, trials=config.trials or 1, seed=config.run_seed,
            dim=config.dim, chunk_method=config.method, ell=config.ell, c_ell=config.c_ell,
            group_template=config.group, query_budget=config.budget)
        self.stdout.write(csv_text(result.summary), ending='')
        if len(result.summary) >= 2:
            self.line(f"log-log slope of median queries: {loglog_slope(result.summary):.4f}")
        if not result.complete:
            self.line(f"stopped early at the query budget after {len(result.table)} rows")
        columns = [c for c in plot_columns.split(',') if c]
        out = self.output_dir(config)
        if out:
            write_csv(result.table, out / 'sweep.csv', SWEEP_COLUMNS)
            write_csv(result.summary, out / 'summary.csv')
            emit_plot_data(result.summary, columns, out / 'summary.dat')
            emit_plot_series(result.summary, columns[0], columns[1:], out, 'summary')
            config.write(out / 'config.ini')
