"""
Flags and exit codes shared by the pipeline management commands.

Exit codes: 2 configuration error, 3 stage failure, 4 no target detected.
"""
from contextlib import contextmanager
from pathlib import Path

from django.conf import settings
from django.core.exceptions import ImproperlyConfigured
from django.core.management.base import BaseCommand, CommandError

from estimation.delays import NoTargetDetected
from runs.pipeline import StageError
from scene.config import FRAME_FORMATS, load_config

EXIT_CONFIG = 2
EXIT_STAGE = 3
EXIT_NO_TARGET = 4


class PipelineCommand(BaseCommand):
    """Base for commands that load a run configuration."""

    def add_arguments(self, parser):
        parser.add_argument('--config', help='Run configuration file (key = value); defaults when omitted')
        parser.add_argument('--seed', type=int, help='Override the configured seed')
        parser.add_argument('--out', help='Output directory (default: ISAR_OUTPUT_ROOT/run-<seed>)')
        parser.add_argument('--noiseless', action='store_true', help='Drop noise and clutter')
        parser.add_argument('--format', dest='frame_format', choices=FRAME_FORMATS,
                            help='Frame file format')

    def load_config(self, options, **overrides):
        with self.failures():
            return load_config(
                options.get('config'),
                seed=options.get('seed'),
                noiseless=True if options.get('noiseless') else None,
                frame_format=options.get('frame_format'),
                **overrides
            )

    def output_dir(self, options, cfg, prefix='run'):
        if options.get('out'):
            return Path(options['out'])
        return Path(settings.ISAR_OUTPUT_ROOT) / f'{prefix}-{cfg.seed}'

    @contextmanager
    def failures(self):
        try:
            yield
        except ImproperlyConfigured as exc:
            raise CommandError(f'Configuration error: {exc}', returncode=EXIT_CONFIG) from exc
        except StageError as exc:
            code = EXIT_NO_TARGET if isinstance(exc.cause, NoTargetDetected) else EXIT_STAGE
            raise CommandError(str(exc), returncode=code) from exc
