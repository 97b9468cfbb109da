from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import django
from django.core.management.base import BaseCommand, CommandError

from synthesis.cli import reproduce_run, solver_overrides
from synthesis.conf import synthesis_setting
from synthesis.config import bundled_configs
from synthesis.runner import SynthesisSolution, record_run

HEADER = f'{"run":<16} {"template":<10} {"gamma":>9} {"target":>8} {"delta":>9} {"bound":>8}  status'

TARGET_TOL = 5e-3
BOUND_TOL = 1e-3


def _row_matches(path, only):
    label = path.stem[len('run_'):] if path.stem.startswith('run_') else path.stem
    return any(label == name or label.startswith(name + '-') for name in only)


def _on_target(solution, expected):
    return solution.gamma is not None and expected is not None and abs(solution.gamma - expected) <= TARGET_TOL


def _above_bound(solution, bound):
    return solution.gamma is not None and bound is not None and solution.gamma > bound + BOUND_TOL


class Command(BaseCommand):
    help = "Run the bundled double integrator configurations and print the gamma table"

    def add_arguments(self, parser):
        parser.add_argument('--config', action='append', default=[],
                            help='Run these configs instead of the bundled ones (may be repeated).')
        parser.add_argument('--only', action='append', default=[],
                            help='Keep runs whose label is this name or starts with "name-" (may be repeated).')
        parser.add_argument('--jobs', type=int, help='Runs solved in parallel; 1 solves them in this process.')
        parser.add_argument('--no-plots', action='store_true', help='Skip the CSV/SVG plot files.')
        parser.add_argument('--output-dir', help='Each run writes under OUTPUT_DIR/<label>.')
        parser.add_argument('--seed', type=int, help='Seed of the verification sampler.')
        parser.add_argument('--dirs', type=int, help='Number of sampled directions per verified condition.')
        parser.add_argument('--solver-opt', action='append', default=[], metavar='KEY=VALUE',
                            help='Solver option applied to every run.')

    def handle(self, *args, **options):
        paths = [Path(path) for path in options['config']] or bundled_configs()
        if options['only']:
            paths = [path for path in paths if _row_matches(path, options['only'])]
        if not paths:
            raise CommandError('no run configs selected', returncode=2)

        solver = solver_overrides(options['solver_opt'])
        jobs = options['jobs'] or synthesis_setting('REPRODUCE_JOBS')
        arguments = [(str(path), options['output_dir'], solver, options['seed'], options['dirs'],
                      not options['no_plots']) for path in paths]

        if jobs <= 1 or len(paths) == 1:
            rows = [reproduce_run(*args) for args in arguments]
        else:
            with ProcessPoolExecutor(max_workers=min(jobs, len(paths)), initializer=django.setup) as executor:
                rows = list(executor.map(reproduce_run, *zip(*arguments)))

        self.stdout.write(HEADER)
        failures, on_target, above_bound, recorded = [], 0, [], 0
        for row in rows:
            if 'error' in row:
                failures.append((row['label'], row['returncode']))
                self.stdout.write(self.style.ERROR(f'{row["label"]:<16} {row["error"]}'))
                continue
            solution = replace(SynthesisSolution.from_dict(row['solution']), seconds=row['seconds'])
            if record_run(solution) is not None:
                recorded += 1
            self.stdout.write(self._format(solution, row['expected_gamma'], row.get('bound')))
            on_target += _on_target(solution, row['expected_gamma'])
            if _above_bound(solution, row.get('bound')):
                above_bound.append(solution.label)
            if solution.exit_code:
                failures.append((solution.label, solution.exit_code))

        targets = sum(1 for row in rows if row.get('expected_gamma') is not None)
        self.stdout.write(f'{on_target} of {targets} runs within {TARGET_TOL:g} of the target gamma')
        if above_bound:
            self.stdout.write(self.style.WARNING(
                f'gamma above the reference bound for: {", ".join(above_bound)}; check the reference set'))
        solved = sum(1 for row in rows if 'error' not in row)
        if synthesis_setting('RECORD_RUNS') and recorded < solved:
            self.stdout.write(self.style.WARNING(
                f'{recorded} of {solved} runs written to the run ledger; run "python manage.py migrate" first'))

        if failures:
            names = ', '.join(label for label, _ in failures)
            raise CommandError(f'{len(failures)} of {len(rows)} runs not verified: {names}',
                               returncode=max(code for _, code in failures))
        self.stdout.write(self.style.SUCCESS(f'{len(rows)} runs verified'))

    def _format(self, solution, expected, bound):
        gamma = '-' if solution.gamma is None else f'{solution.gamma:.4f}'
        target = '-' if expected is None else f'{expected:.3f}'
        delta = '-' if solution.gamma is None or expected is None else f'{solution.gamma - expected:+.4f}'
        limit = '-' if bound is None else f'{bound:.4f}'
        line = (f'{solution.label:<16} {solution.template["kind"]:<10} {gamma:>9} {target:>8} {delta:>9} '
                f'{limit:>8}  {solution.status}')
        return self.style.SUCCESS(line) if solution.verified else self.style.WARNING(line)
