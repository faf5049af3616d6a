from django.core.management.base import BaseCommand, CommandError

from irsnoma.export import build_workbook
from irsnoma.models import ExperimentRun


class Command(BaseCommand):
    help = 'Export recorded runs to an .xlsx workbook'

    def add_arguments(self, parser):
        parser.add_argument('--out', default='runs.xlsx')
        parser.add_argument('--kind', help='Only runs of this experiment kind')

    def handle(self, *args, **options):
        runs = ExperimentRun.objects.prefetch_related('results')
        if options['kind']:
            runs = runs.filter(kind=options['kind'])
        if not runs.exists():
            self.stdout.write('No runs to export')
            return
        try:
            build_workbook(runs).save(options['out'])
        except OSError as e:
            raise CommandError(f'io-error: {e}', returncode=3)
        self.stdout.write(self.style.SUCCESS(f'Exported {runs.count()} runs to {options["out"]}'))
