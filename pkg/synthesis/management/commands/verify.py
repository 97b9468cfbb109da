from django.core.management.base import BaseCommand, CommandError

from synthesis.cli import build_problem, read_config, read_solution, solution_path
from synthesis.runner import REPORT_FILE, SOLVED_UNVERIFIED, EXIT_CODES, dump_json, verify_solution


class Command(BaseCommand):
    help = "Re-run the sampled invariance and inclusion checks on a stored solution"

    def add_arguments(self, parser):
        parser.add_argument('--config', required=True, help='Run config the solution was produced from.')
        parser.add_argument('--solution', help='Solution file; defaults to solution.json in the run output directory.')
        parser.add_argument('--output-dir', help='Run output directory to read the solution from.')
        parser.add_argument('--seed', type=int, help='Seed of the verification sampler.')
        parser.add_argument('--dirs', type=int, help='Number of sampled directions per condition.')
        parser.add_argument('--tol', type=float, help='Violation tolerance.')
        parser.add_argument('--report', help='Write the report JSON here instead of next to the solution.')

    def handle(self, *args, **options):
        config = read_config(options['config'], options['output_dir'])
        path = solution_path(config, options['solution'])
        solution = read_solution(path)
        if not solution.models or solution.gamma is None:
            raise CommandError(f'{solution.label}: no solved sets to verify (status {solution.status})',
                               returncode=solution.exit_code or 2)

        problem = build_problem(config)
        report = verify_solution(problem.system, solution.models, solution.objective.as_tuple(solution.gamma),
                                 seed=options['seed'], directions=options['dirs'], tol=options['tol'])
        report_path = dump_json(report.as_dict(), options['report'] or path.parent / REPORT_FILE)
        self.stdout.write(f'wrote {report_path}')

        for result in report.results:
            line = (f'{result.condition:<12} {result.subject:<40} samples={result.samples:<6} '
                    f'max_violation={result.max_violation:.3g}')
            self.stdout.write(self.style.SUCCESS(line) if result.passed else self.style.ERROR(line))
        if not report.passed:
            raise CommandError(f'{solution.label}: {len(report.failures())} condition(s) failed',
                               returncode=EXIT_CODES[SOLVED_UNVERIFIED])
        self.stdout.write(self.style.SUCCESS(f'{solution.label}: verified, gamma={solution.gamma:.6f}'))
