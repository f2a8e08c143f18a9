from pathlib import Path

from runs.cli import PipelineCommand
from runs.pipeline import estimate_frames, stage, write_estimates
from frontend.framefile import read_frames


class Command(PipelineCommand):
    help = 'Estimates delays, coefficients, Doppler and speed from a frame file'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--frames', help='Frame file (default: frames.bin or frames.csv in --out)')

    def handle(self, *args, **options):
        cfg = self.load_config(options)
        out_dir = self.output_dir(options, cfg)
        frames_path = Path(options['frames']) if options.get('frames') else out_dir / f'frames.{cfg.frame_format}'

        with self.failures():
            with stage('read_frames'):
                frames = read_frames(frames_path, cfg.sigma_nc2)
            result = estimate_frames(frames, cfg)
            path = write_estimates(result.summary(), out_dir)

        self.stdout.write(f'Detected {len(result.delays)} scatterers, '
                          f'Doppler slope {result.doppler.delta_med:.4f} Hz/frame')
        self.stdout.write(self.style.SUCCESS(f'✓ Speed {result.velocity.v_hat:.3f} m/s, estimates written to {path}'))
