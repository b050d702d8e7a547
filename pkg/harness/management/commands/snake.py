from harness.base import LabCommand
from snakes.formats import read_snake, write_snake
from snakes.properties import is_sparse
from snakes.services import f_values, sample_snake
from snakelab.exceptions import ArgumentError, VerificationError
from solvers.services import enumerate_local_minima


class Command(LabCommand):
    help = "Sample a snake (written to --out) or inspect a saved one"

    def add_lab_arguments(self, parser):
        parser.add_argument('action', nargs='?', default='sample', choices=('sample', 'inspect'))
        parser.add_argument('--snake-file', dest='snake_file')

    def run(self, config, action, snake_file=None, **options):
        graph = config.build_graph()
        chunk = config.build_chunk(graph)
        params = config.build_params(graph, chunk)
        if action == 'sample':
            snake = sample_snake(graph, chunk, config.x0, params, config.streams()['snake'])
        else:
            if not snake_file:
                raise ArgumentError("snake inspect needs --snake-file")
            snake = read_snake(snake_file, graph)
        self.line(f"L={snake.L} s={snake.s} ell={snake.ell} start={snake.start} endpoint={snake.endpoint}")
        self.line("vertices: " + ' '.join(str(v) for v in snake.vertices))
        if action == 'inspect':
            minima = enumerate_local_minima(graph, f_values(graph, snake))
            self.line(f"local minima of f_X: {minima}")
            if snake.s == chunk.radius and snake.ell >= 1:
                eps = config.eps or 1.0
                sparseness = is_sparse(graph, chunk, snake, eps)
                self.line(f"max sparseness score {sparseness.max_score:.6g} "
                          f"(threshold {sparseness.threshold:.6g} at eps={eps})")
            if minima != [snake.endpoint]:
                raise VerificationError(f"f_X has local minima {minima}, expected [{snake.endpoint}]")
        if config.out and action == 'sample':
            write_snake(snake, config.out)
            self.line(f"wrote {config.out}")
