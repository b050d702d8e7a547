from graphs.formats import write_graph
from harness.base import LabCommand
from snakelab.exceptions import VerificationError


class Command(LabCommand):
    help = "Build a graph family member, validate its automorphisms and optionally write it to --out"

    def run(self, config, **options):
        graph = config.build_graph()
        report = graph.verify_vertex_transitive()
        self.line(f"N={graph.vertex_count} d={graph.diameter} degree={graph.degree} kind={graph.kind}")
        self.line(f"validation: {'passed' if report.passed else 'failed'} ({report.mode})")
        if config.out:
            write_graph(graph, config.out)
            self.line(f"wrote {config.out}")
        if not report.passed:
            first = report.failures[0]
            raise VerificationError(
                f"{len(report.failures)} automorphisms fail, first sigma_{first.vertex}")
