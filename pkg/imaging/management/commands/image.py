from pathlib import Path

from estimation.results import EstimateSummary
from imaging.export import write_image_artifacts
from runs.cli import PipelineCommand
from runs.pipeline import image_from_summary, stage


class Command(PipelineCommand):
    help = 'Forms the range profile and ISAR image from estimates.json'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--estimates', help='Estimates file (default: estimates.json in --out)')
        parser.add_argument('--workers', type=int, help='FFT threads (default: ISAR_WORKERS)')

    def handle(self, *args, **options):
        cfg = self.load_config(options)
        out_dir = self.output_dir(options, cfg)
        source = Path(options['estimates']) if options.get('estimates') else out_dir / 'estimates.json'

        with self.failures():
            with stage('read_estimates'):
                summary = EstimateSummary.load(source)
            products = image_from_summary(summary, cfg, workers=options.get('workers'))
            with stage('export'):
                write_image_artifacts(out_dir, products.image, products.profile)

        image = products.image
        self.stdout.write(f'{image.n_r} x {image.n_cr} image, '
                          f'delta_r={image.delta_r:.4f} m, delta_cr={image.delta_cr:.4f} m')
        self.stdout.write(self.style.SUCCESS(f'✓ Image artifacts written to {out_dir}'))
