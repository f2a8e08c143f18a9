from django.core.management.base import CommandError

from runs.cli import EXIT_CONFIG, PipelineCommand
from runs.models import record_sweep
from runs.sweep import sweep, write_sweep_tables, write_sweep_xlsx


class Command(PipelineCommand):
    help = 'Sweeps one configuration setting over a list of values with seeded trials'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--param', required=True, help='Setting to sweep, e.g. tx_power_dbm')
        parser.add_argument('--values', nargs='*', default=[], help='Values to try')
        parser.add_argument('--trials', type=int, default=1, help='Seeded trials per value')
        parser.add_argument('--workers', type=int, help='Parallel trials (default: ISAR_WORKERS)')
        parser.add_argument('--xlsx', action='store_true', help='Also write sweep.xlsx')
        parser.add_argument('--record', action='store_true', help='Store the sweep in the database')

    def handle(self, *args, **options):
        cfg = self.load_config(options)
        out_dir = self.output_dir(options, cfg, prefix=f"sweep-{options['param']}")
        values = [v for chunk in options['values'] for v in chunk.split(',') if v.strip()]

        with self.failures():
            try:
                result = sweep(param=options['param'], values=values, trials=options['trials'],
                               cfg=cfg, workers=options.get('workers'))
            except ValueError as exc:
                raise CommandError(str(exc), returncode=EXIT_CONFIG) from exc

        paths = write_sweep_tables(result, out_dir)
        if options['xlsx']:
            paths['workbook'] = write_sweep_xlsx(result, out_dir)

        self.stdout.write(result.summary.to_string(index=False))
        for name, path in paths.items():
            self.stdout.write(f'  {name}: {path}')
        if options['record']:
            record = record_sweep(result, cfg.as_dict(), out_dir)
            self.stdout.write(f'Stored as sweep #{record.id}')
        self.stdout.write(self.style.SUCCESS(f'✓ Sweep of {result.param} written to {out_dir}'))
