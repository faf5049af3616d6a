from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from irsnoma.exceptions import SimulationError
from irsnoma.experiments import load_config, record_run, run


class Command(BaseCommand):
    help = 'Run an outage experiment from a key = value config file and write its CSV'

    def add_arguments(self, parser):
        parser.add_argument('config', help='Path to the experiment config')
        parser.add_argument('--seed', type=int, help='Override the config seed')
        parser.add_argument('--trials', type=int, help='Override the config trial count')
        parser.add_argument('--out', help='Override the output CSV path')
        parser.add_argument('--no-record', action='store_true', help='Do not store the run in the database')

    def handle(self, *args, **options):
        try:
            config = load_config(options['config'], seed=options['seed'], trials=options['trials'], out=options['out'])
            summary = run(config, workers=settings.SIM_WORKERS)
        except SimulationError as e:
            raise CommandError(f'{e.code}: {e}', returncode=2)
        except OSError as e:
            raise CommandError(f'io-error: {e}', returncode=3)

        for note in summary.notes:
            self.stdout.write(self.style.WARNING(note))
        for scheme, n, fit in summary.fits:
            self.stdout.write(f'{scheme} U{n}: diversity slope {fit.slope:.3f} over {fit.points_used} points')
        if not options['no_record']:
            experiment_run = record_run(summary)
            self.stdout.write(f'Recorded run {experiment_run.pk}')
        self.stdout.write(self.style.SUCCESS(f'Wrote {summary.rows_written} rows to {summary.output_path}'))
