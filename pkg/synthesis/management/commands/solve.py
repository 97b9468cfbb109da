from django.core.management.base import BaseCommand

from synthesis.cli import add_run_arguments, read_config, run_config, solver_overrides, status_error


class Command(BaseCommand):
    help = "Synthesize the invariant sets described by a run config and write solution, report and plots"

    def add_arguments(self, parser):
        parser.add_argument('--config', required=True, help='Run config (JSON).')
        parser.add_argument('--no-plots', action='store_true', help='Skip the CSV/SVG plot files.')
        add_run_arguments(parser)

    def handle(self, *args, **options):
        config = read_config(options['config'], options['output_dir'], solver_overrides(options['solver_opt']))
        solution, paths = run_config(config, seed=options['seed'], directions=options['dirs'],
                                     plots=not options['no_plots'])

        for path in paths:
            self.stdout.write(f'wrote {path}')
        error = status_error(solution)
        if error is not None:
            self.stdout.write(self.style.WARNING(str(error)))
            raise error
        self.stdout.write(self.style.SUCCESS(
            f'{solution.label}: {solution.template["kind"]} gamma={solution.gamma:.6f} verified'
        ))
