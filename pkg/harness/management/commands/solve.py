import pandas as pd

from harness.base import LabCommand
from harness.emit import write_csv
from snakes.services import sample_snake
from snakelab.exceptions import VerificationError
from solvers.experiments import SOLVERS, solve_instance
from solvers.services import make_instance, upper_bound_formula

SOLVE_COLUMNS = ['trial', 'start', 'endpoint', 'answer', 'queries', 'answer_correct']


class Command(LabCommand):
    help = "Run a local search solver on fresh snake instances of the configured graph"

    def add_lab_arguments(self, parser):
        parser.add_argument('--solver', default='aldous', choices=SOLVERS)

    def run(self, config, solver, **options):
        graph = config.build_graph()
        chunk = config.build_chunk(graph)
        params = config.build_params(graph, chunk)
        streams = config.streams()
        rows = []
        for trial, child in enumerate(streams['run'].spawn(config.trials or 10)):
            snake = sample_snake(graph, chunk, config.x0, params, child)
            result = solve_instance(solver, graph, make_instance(graph, snake), child)
            rows.append((trial, snake.start, snake.endpoint, result.vertex, result.queries,
                         result.vertex == snake.endpoint))
        table = pd.DataFrame(rows, columns=SOLVE_COLUMNS)
        bound = upper_bound_formula(graph.vertex_count, graph.degree)
        self.line(f"{solver} on N={graph.vertex_count}: median queries {table['queries'].median():g}, "
                  f"max {table['queries'].max()}, sqrt(N degree)={bound.rls:.6g}")
        out = self.output_dir(config)
        if out:
            write_csv(table, out / 'solve.csv', SOLVE_COLUMNS)
            config.write(out / 'config.ini')
        wrong = int((~table['answer_correct']).sum())
        if wrong:
            raise VerificationError(f"{wrong} answers are not the snake endpoint")
