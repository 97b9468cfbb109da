from django.core.management.base import BaseCommand, CommandError

from synthesis.cli import build_problem, output_dir_for, read_config, read_solution, solution_path, write_plots
from synthesis.serializers import PLOT_FORMATS


class Command(BaseCommand):
    help = "Write primal and polar boundary curves (CSV and/or SVG) for a stored solution"

    def add_arguments(self, parser):
        parser.add_argument('--config', required=True, help='Run config the solution was produced from.')
        parser.add_argument('--solution', help='Solution file; defaults to solution.json in the run output directory.')
        parser.add_argument('--output-dir', help='Directory for the plot files.')
        parser.add_argument('--dirs', type=int, help='Number of plot directions.')
        parser.add_argument('--format', choices=PLOT_FORMATS, help='csv, svg or both.')

    def handle(self, *args, **options):
        config = read_config(options['config'], options['output_dir'])
        solution = read_solution(solution_path(config, options['solution']))
        problem = build_problem(config)

        paths = write_plots(solution, problem, config, output_dir_for(config), options['dirs'], options['format'])
        if not paths:
            raise CommandError(f'{solution.label}: nothing to plot (status {solution.status})',
                               returncode=solution.exit_code or 2)
        for path in paths:
            self.stdout.write(self.style.SUCCESS(f'wrote {path}'))
