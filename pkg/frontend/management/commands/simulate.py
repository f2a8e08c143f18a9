from runs.cli import PipelineCommand
from runs.pipeline import simulate_scene, write_scene_artifacts


class Command(PipelineCommand):
    help = 'Synthesizes the received frames of one CPI and writes them with the truth table'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--workers', type=int, help='Frame synthesis threads (default: ISAR_WORKERS)')

    def handle(self, *args, **options):
        cfg = self.load_config(options)
        out_dir = self.output_dir(options, cfg)
        with self.failures():
            scene = simulate_scene(cfg, workers=options.get('workers'))
            paths = write_scene_artifacts(scene, out_dir)

        self.stdout.write(f'{scene.truth.num_scatterers} scatterers, {len(scene.frames)} frames')
        for name, path in paths.items():
            self.stdout.write(f'  {name}: {path}')
        self.stdout.write(self.style.SUCCESS(f'✓ Simulation written to {out_dir}'))
