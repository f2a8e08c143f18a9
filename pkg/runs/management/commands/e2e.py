from runs.cli import PipelineCommand
from runs.models import RunRecord
from runs.pipeline import run_e2e


class Command(PipelineCommand):
    help = 'Runs simulate, estimate and image in one pass and scores the result against the truth'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--workers', type=int, help='Threads for synthesis and FFTs (default: ISAR_WORKERS)')
        parser.add_argument('--no-report', action='store_true', help='Skip report.pdf')
        parser.add_argument('--record', action='store_true', help='Store the run in the database')
        parser.add_argument('--label', default='', help='Label for the stored run')

    def handle(self, *args, **options):
        cfg = self.load_config(options)
        out_dir = self.output_dir(options, cfg)

        with self.failures():
            manifest, outcome = run_e2e(cfg=cfg, out_dir=out_dir, workers=options.get('workers'),
                                        report=not options['no_report'])

        for name, value in manifest.to_payload()['metrics'].items():
            self.stdout.write(f'  {name}: {value}')

        if options['record']:
            record = RunRecord.from_manifest(manifest, out_dir, label=options['label'],
                                             n_hat_p=outcome.summary.n_hat_p)
            self.stdout.write(f'Stored as run #{record.id}')
        self.stdout.write(self.style.SUCCESS(f'✓ Run written to {out_dir}'))
