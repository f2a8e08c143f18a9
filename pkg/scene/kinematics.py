"""
Vehicle motion and per-frame ground truth.

Arrays in SceneTruth are indexed [p, m]: scatterer first, frame second.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from scene.vehicle import offsets_array, rcs_array

logger = logging.getLogger(__name__)

# Stream tags for SeedSequence entropy, kept apart from per-frame noise streams.
BETA_STREAM = 0
FRAME_STREAM = 1


@dataclass(frozen=True)
class KinematicState:
    position: np.ndarray   # (P, 3) metres
    r: np.ndarray          # range
    v_radial: np.ndarray   # closing speed, positive when approaching
    phi: np.ndarray        # azimuth
    theta: np.ndarray      # elevation


@dataclass(frozen=True)
class SceneTruth:
    r: np.ndarray
    tau: np.ndarray
    ell: np.ndarray
    tau_f: np.ndarray
    nu: np.ndarray
    phi: np.ndarray
    theta: np.ndarray
    G: np.ndarray
    beta: np.ndarray
    frame_period_s: float
    symbol_period_s: float

    @property
    def num_scatterers(self):
        return self.r.shape[0]

    @property
    def num_frames(self):
        return self.r.shape[1]

    def absolute_delay(self, m):
        """Round-trip delay of frame m measured from the start of the CPI."""
        return m * self.frame_period_s + self.tau[:, m]

    def delay_set(self, m=0):
        return sorted(set(int(v) for v in self.ell[:, m]))


def frame_time(cfg, m):
    return m * cfg.frame_period_s


def kinematics(cfg, scatterers, m):
    """Positions, ranges, closing speeds and arrival angles at frame m."""
    if not 0 <= m < cfg.num_frames:
        raise ValueError(f"frame {m} is outside 0..{cfg.num_frames - 1}")
    t = frame_time(cfg, m)
    velocity = np.array([cfg.speed_mps, 0.0, 0.0])
    q = np.array([cfg.x0_m, cfg.y0_m, cfg.z0_m]) + offsets_array(scatterers) + velocity * t
    r = np.linalg.norm(q, axis=1)
    v_radial = -(q @ velocity) / r
    phi = np.arctan2(q[:, 0], q[:, 1])
    theta = np.arcsin(q[:, 2] / r)
    return KinematicState(position=q, r=r, v_radial=v_radial, phi=phi, theta=theta)


def large_scale_gain(cfg, r, rcs_m2):
    """Radar range equation: rcs * lambda^2 / ((4 pi)^3 r^(2 * path_loss_exp))."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("range must be positive")
    return rcs_m2 * cfg.wavelength_m ** 2 / ((4 * np.pi) ** 3 * r ** (2 * cfg.path_loss_exp))


def draw_betas(seed, count):
    """CN(0, 1) small-scale gains, one per scatterer, fixed for the CPI."""
    rng = np.random.default_rng([seed, BETA_STREAM])
    draws = rng.standard_normal((2, count))
    return (draws[0] + 1j * draws[1]) / np.sqrt(2.0)


def truth_table(cfg, scatterers, beta_draws):
    """Fill every SceneTruth field for all scatterers and frames."""
    beta = np.asarray(beta_draws, dtype=np.complex128)
    if beta.shape != (len(scatterers),):
        raise ValueError(f"need one beta per scatterer ({len(scatterers)}), got {beta.shape}")

    M = cfg.num_frames
    states = [kinematics(cfg, scatterers, m) for m in range(M)]
    r = np.stack([s.r for s in states], axis=1)
    if np.any(r <= 0):
        raise ValueError("a scatterer sits on the array (r = 0)")

    tau = 2.0 * r / SPEED_OF_LIGHT
    ell = np.floor(tau * cfg.bandwidth_hz).astype(np.int64)
    tau_f = tau - ell * cfg.symbol_period_s
    nu = 2.0 * np.stack([s.v_radial for s in states], axis=1) / cfg.wavelength_m
    phi = np.stack([s.phi for s in states], axis=1)
    theta = np.stack([s.theta for s in states], axis=1)
    G = large_scale_gain(cfg, r, rcs_array(scatterers)[:, None])

    logger.info("Truth table: %d scatterers x %d frames, sampled delays %d..%d",
                r.shape[0], M, ell.min(), ell.max())
    return SceneTruth(r=r, tau=tau, ell=ell, tau_f=tau_f, nu=nu, phi=phi, theta=theta,
                      G=G, beta=beta, frame_period_s=cfg.frame_period_s,
                      symbol_period_s=cfg.symbol_period_s)
