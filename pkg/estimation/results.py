"""
The estimation chain from received frames to speed, and its JSON form.
"""
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from estimation.delays import detect_for_config
from estimation.doppler import doppler_difference_and_propagate, doppler_raw_matrix
from estimation.lse import CoeffEstimate, LeastSquaresSolver, build_symbol_matrix, frame_coefficients
from estimation.velocity import estimate_velocity
from waveform.golay import training_field

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EstimateSummary:
    """What the imaging stage needs, and what estimates.json holds."""
    delays: np.ndarray
    h_hat: np.ndarray
    doppler_corrected: np.ndarray
    delta_med: float
    v_hat: float

    @property
    def n_hat_p(self):
        return len(self.delays)

    def to_json(self):
        payload = {
            'delays': [int(v) for v in self.delays],
            'h_hat': [[float(v.real), float(v.imag)] for v in self.h_hat],
            'doppler_corrected': [[float(v) for v in row] for row in self.doppler_corrected],
            'delta_med': float(self.delta_med),
            'V_hat': float(self.v_hat),
            'N_hat_p': int(self.n_hat_p),
        }
        return json.dumps(payload, indent=2) + '\n'

    @classmethod
    def from_json(cls, text):
        payload = json.loads(text)
        h_hat = np.array([complex(re, im) for re, im in payload['h_hat']], dtype=np.complex128)
        return cls(
            delays=np.array(payload['delays'], dtype=np.int64),
            h_hat=h_hat,
            doppler_corrected=np.array(payload['doppler_corrected'], dtype=float).reshape(len(h_hat), -1),
            delta_med=float(payload['delta_med']),
            v_hat=float(payload['V_hat']),
        )

    @classmethod
    def load(cls, path):
        return cls.from_json(Path(path).read_text(encoding='utf-8'))


@dataclass(frozen=True)
class EstimationResult:
    delays: object
    coeffs: CoeffEstimate
    H: np.ndarray
    doppler: object
    velocity: object

    def summary(self):
        return EstimateSummary(delays=self.delays.ells, h_hat=self.coeffs.h_hat,
                               doppler_corrected=self.doppler.corrected,
                               delta_med=self.doppler.delta_med, v_hat=self.velocity.v_hat)


def estimate_all(frames, cfg, preamble=None):
    """Delays on frame 0, per-frame least squares, Doppler chain and speed."""
    if preamble is None:
        preamble = training_field()
    K = len(preamble)
    delays = detect_for_config(frames[0], preamble.s512, cfg)
    S = build_symbol_matrix(delays, preamble, K)
    solver = LeastSquaresSolver(S, delays.ells)
    H = frame_coefficients(solver, frames, delays, K)
    raw = doppler_raw_matrix(H, delays, cfg)
    doppler = doppler_difference_and_propagate(raw, cfg.i_gap, cfg, delays)
    velocity = estimate_velocity(doppler, cfg)
    logger.info("Estimated %d scatterers, speed %.3f m/s (sigma_nc=%.3e)",
                len(delays), velocity.v_hat, math.sqrt(cfg.sigma_nc2))
    return EstimationResult(delays=delays, coeffs=CoeffEstimate(h_hat=H[:, 0]), H=H,
                            doppler=doppler, velocity=velocity)
