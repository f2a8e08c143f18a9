"""
End-to-end orchestration: scene, frames, estimation, image, scoring and the
artifacts of a run directory.

Every stage runs inside ``stage(name)`` so a failure surfaces as
StageError naming the stage; configuration problems pass through as
ImproperlyConfigured.
"""
import logging
import math
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
from django.conf import settings
from django.core.exceptions import ImproperlyConfigured

from estimation.results import estimate_all
from frontend.array import backscatter_truth, design_beamformers
from frontend.framefile import write_frames
from frontend.synthesis import synthesize_frames
from imaging.export import write_image_artifacts
from imaging.formation import cross_range_signal, form_image, range_profile, rotational_velocity
from runs.artifacts import write_bytes, write_csv, write_json, write_text
from runs.reports import build_run_report
from runs.scoring import score
from scene.config import load_config
from scene.kinematics import draw_betas, truth_table
from scene.vehicle import default_vehicle
from waveform.golay import training_field

logger = logging.getLogger(__name__)


class StageError(Exception):
    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"{stage}: {cause}")


@contextmanager
def stage(name):
    try:
        yield
    except (StageError, ImproperlyConfigured):
        raise
    except Exception as exc:
        logger.error("Stage %s failed: %s", name, exc)
        raise StageError(name, exc) from exc


@dataclass(frozen=True)
class SimulatedScene:
    cfg: object
    scatterers: list
    truth: object
    backscatter: object
    frames: list


@dataclass(frozen=True)
class ImageProducts:
    profile: object
    omega: float
    image: object


@dataclass(frozen=True)
class RunOutcome:
    cfg: object
    scene: SimulatedScene
    estimation: object
    summary: object
    products: ImageProducts
    metrics: dict


@dataclass
class RunManifest:
    config: dict
    seed: int
    paths: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)

    def to_payload(self):
        return {
            'config': self.config,
            'seed': self.seed,
            'paths': self.paths,
            'metrics': {name: _json_number(value) for name, value in self.metrics.items()},
        }


def _json_number(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _workers(workers):
    return settings.ISAR_WORKERS if workers is None else max(1, int(workers))


def simulate_scene(cfg, workers=None):
    """Vehicle, truth table, beams and all M received frames."""
    with stage('simulate'):
        scatterers = default_vehicle(cfg)
        truth = truth_table(cfg, scatterers, draw_betas(cfg.seed, len(scatterers)))
        backscatter = backscatter_truth(cfg, truth, design_beamformers(cfg, truth))
        frames = synthesize_frames(cfg, truth, backscatter, workers=_workers(workers),
                                   preamble=training_field())
    return SimulatedScene(cfg=cfg, scatterers=scatterers, truth=truth,
                          backscatter=backscatter, frames=frames)


def estimate_frames(frames, cfg):
    with stage('estimate'):
        return estimate_all(frames, cfg, preamble=training_field())


def image_from_summary(summary, cfg, workers=None):
    """Range profile at m = 0 and the flipped ISAR image formed with the estimated speed."""
    with stage('image'):
        profile = range_profile(summary.delays, summary.h_hat, cfg)
        omega = rotational_velocity(summary.v_hat, cfg)
        CR = cross_range_signal(summary.doppler_corrected, omega, cfg)
        image = form_image(profile, summary.delays, CR, cfg, omega=omega, workers=_workers(workers))
    return ImageProducts(profile=profile, omega=omega, image=image.flip())


def run_pipeline(cfg, workers=None):
    """Everything in memory, nothing written."""
    scene = simulate_scene(cfg, workers)
    estimation = estimate_frames(scene.frames, cfg)
    summary = estimation.summary()
    products = image_from_summary(summary, cfg, workers)
    with stage('score'):
        metrics = score(scene.truth, summary, products.image, cfg, omega=products.omega)
    return RunOutcome(cfg=cfg, scene=scene, estimation=estimation, summary=summary,
                      products=products, metrics=metrics)


def truth_frame(truth):
    return pd.DataFrame({
        'p': np.arange(truth.num_scatterers),
        'ell0': truth.ell[:, 0],
        'nu0_hz': truth.nu[:, 0],
        'nu_last_hz': truth.nu[:, -1],
        'r0_m': truth.r[:, 0],
    })


def write_scene_artifacts(scene, out_dir):
    """run.cfg, truth.csv and the frame file (unless write_frames is off)."""
    out_dir = Path(out_dir)
    cfg = scene.cfg
    paths = {
        'config': write_text(out_dir / 'run.cfg', cfg.to_text()),
        'truth': write_csv(out_dir / 'truth.csv', truth_frame(scene.truth)),
    }
    if cfg.write_frames:
        with stage('write_frames'):
            paths['frames'] = write_frames(out_dir, scene.frames, cfg.training_len, cfg.frame_format)
    return paths


def write_estimates(summary, out_dir):
    return write_text(Path(out_dir) / 'estimates.json', summary.to_json())


def write_run_artifacts(outcome, out_dir, report=True):
    """Write a finished run and return its manifest; paths are relative to ``out_dir``."""
    out_dir = Path(out_dir)
    paths = write_scene_artifacts(outcome.scene, out_dir)
    paths['estimates'] = write_estimates(outcome.summary, out_dir)
    with stage('export'):
        paths.update(write_image_artifacts(out_dir, outcome.products.image, outcome.products.profile))

    cfg = outcome.cfg
    manifest = RunManifest(config=cfg.as_dict(), seed=cfg.seed, metrics=dict(outcome.metrics))
    if report:
        # the report lists the manifest, so it is named before it is written
        paths['report'] = out_dir / 'report.pdf'
    paths['manifest'] = out_dir / 'manifest.json'
    manifest.paths = {name: Path(path).name for name, path in paths.items()}

    if report:
        with stage('report'):
            write_bytes(out_dir / 'report.pdf', build_run_report(manifest.to_payload(), outcome.products.image))
    write_json(out_dir / 'manifest.json', manifest.to_payload())
    logger.info("Run written to %s", out_dir)
    return manifest


def run_e2e(config_path=None, out_dir=None, cfg=None, workers=None, report=True, **overrides):
    """
    Load the configuration (``cfg`` wins over ``config_path``), run every
    stage and write the run directory. Returns (manifest, outcome).
    """
    if cfg is None:
        cfg = load_config(config_path, **overrides)
    elif overrides:
        cfg = cfg.with_overrides(**overrides)
    out_dir = Path(out_dir) if out_dir else Path(settings.ISAR_OUTPUT_ROOT) / f'run-{cfg.seed}'
    logger.info("Starting e2e run (seed %d, M=%d) into %s", cfg.seed, cfg.num_frames, out_dir)
    outcome = run_pipeline(cfg, workers)
    manifest = write_run_artifacts(outcome, out_dir, report=report)
    return manifest, outcome
