from harness.base import LabCommand
from harness.suite import run_suite
from snakelab.exceptions import VerificationError


class Command(LabCommand):
    help = "Run the deterministic property suite"

    def add_lab_arguments(self, parser):
        parser.add_argument('--full', action='store_true', help="Acceptance sizes instead of the quick grid")
        parser.add_argument('--only', help="Comma separated check names")

    def run(self, config, full=False, only=None, **options):
        names = [name for name in (only or '').split(',') if name]
        report = run_suite(config.run_seed, full=full, only=names or None)
        for text in report.lines():
            self.line(text)
        out = self.output_dir(config)
        if out:
            (out / 'selftest.txt').write_text(report.text(), encoding='utf-8')
            config.write(out / 'config.ini')
        if not report.passed:
            raise VerificationError(f"failed checks: {', '.join(report.failures)}")
