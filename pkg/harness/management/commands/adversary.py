from adversary.formats import PAIR_COLUMNS, SNAKE_COLUMNS, pair_frame, snake_frame
from adversary.services import adversary_scores, enumerate_snake_support, relation_R, theorem2_report, w_matrix
from harness.base import LabCommand
from harness.emit import write_csv


class Command(LabCommand):
    help = "Exact adversary quantities on the fully enumerated snake ensemble of a miniature graph"

    def run(self, config, **options):
        graph = config.build_graph()
        chunk = config.build_chunk(graph)
        params = config.build_params(graph, chunk)
        ensemble = enumerate_snake_support(graph, chunk, config.x0, params)
        self.line(f"ensemble: {len(ensemble)} snakes, {ensemble.merges} merged seed tuples")
        report = theorem2_report(ensemble, config.eps)
        for text in report.lines():
            self.line(text)
        out = self.output_dir(config)
        if out:
            w = w_matrix(ensemble)
            relation = relation_R(ensemble, w=w)
            scores = report.scores or adversary_scores(ensemble, relation)
            write_csv(pair_frame(w, relation), out / 'pairs.csv', PAIR_COLUMNS)
            write_csv(snake_frame(scores), out / 'snakes.csv', SNAKE_COLUMNS)
            (out / 'report.txt').write_text('\n'.join(report.lines()) + '\n', encoding='utf-8')
            config.write(out / 'config.ini')
