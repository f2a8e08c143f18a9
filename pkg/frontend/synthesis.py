"""
Received-frame synthesis on the Nyquist-sampled discrete model:

    y[m, k] = A * sum_p h_p exp(j 2 pi nu_p^m (k + m N_f) T_s) s[k - ell_p^m] + z[m, k]

with A the per-sample transmit amplitude and z circular Gaussian noise plus
clutter of variance sigma_nc2. Sample indices k are absolute within the frame
and run from the smallest to K - 1 plus the largest sampled delay of the CPI.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from scene.kinematics import FRAME_STREAM
from waveform.golay import training_field

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FrameSamples:
    m: int
    k0: int
    y: np.ndarray
    sigma_nc2: float

    def __len__(self):
        return len(self.y)

    @property
    def k_end(self):
        """Last absolute sample index held by the frame."""
        return self.k0 + len(self.y) - 1

    def segment(self, start, stop):
        """Samples for absolute indices start..stop inclusive."""
        if start < self.k0 or stop > self.k_end:
            raise ValueError(
                f"frame {self.m} holds samples {self.k0}..{self.k_end}, asked for {start}..{stop}")
        return self.y[start - self.k0:stop - self.k0 + 1]


def frame_rng(seed, m):
    """Independent PCG64 substream for the noise of frame m."""
    return np.random.default_rng([seed, FRAME_STREAM, m])


def synthesize_frame(cfg, truth, backscatter, m, rng, preamble=None):
    if preamble is None:
        preamble = training_field()
    s = preamble.samples
    K = len(s)
    ells = truth.ell[:, m]
    # one window for the whole CPI, so every frame holds the frame-0 delay span
    k = np.arange(truth.ell.min(), K + truth.ell.max(), dtype=np.int64)
    y = np.zeros(len(k), dtype=np.complex128)

    amplitude = cfg.sample_amplitude
    t = (k + m * cfg.frame_len) * cfg.symbol_period_s
    for p, ell in enumerate(ells):
        idx = k - ell
        valid = (idx >= 0) & (idx < K)
        phase = 2 * np.pi * truth.nu[p, m] * t[valid]
        y[valid] += amplitude * backscatter.h[p] * np.exp(1j * phase) * s[idx[valid]]

    sigma_nc2 = cfg.sigma_nc2
    if sigma_nc2 > 0:
        noise = rng.standard_normal((2, len(k)))
        y += np.sqrt(sigma_nc2 / 2) * (noise[0] + 1j * noise[1])

    return FrameSamples(m=m, k0=int(k[0]), y=y, sigma_nc2=sigma_nc2)


def synthesize_frames(cfg, truth, backscatter, seed=None, workers=1, preamble=None):
    """All M frames; each frame draws from its own (seed, m) substream, so order is irrelevant."""
    seed = cfg.seed if seed is None else seed
    if preamble is None:
        preamble = training_field()

    def build(m):
        return synthesize_frame(cfg, truth, backscatter, m, frame_rng(seed, m), preamble)

    M = truth.num_frames
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            frames = list(pool.map(build, range(M)))
    else:
        frames = [build(m) for m in range(M)]
    logger.info("Synthesized %d frames (%d samples each, sigma_nc2=%.3e W)",
                M, len(frames[0]), cfg.sigma_nc2)
    return frames
