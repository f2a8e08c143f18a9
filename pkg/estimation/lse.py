import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import qr, solve_triangular

logger = logging.getLogger(__name__)

RANK_TOLERANCE = 1e-10


class RankDeficientSymbolMatrix(ValueError):
    """Two delay columns of the symbol matrix are linearly dependent."""

    def __init__(self, pair):
        self.pair = pair
        super().__init__(f"symbol matrix is rank deficient: delays {pair[0]} and {pair[1]} collide")


@dataclass(frozen=True)
class CoeffEstimate:
    """Least-squares backscatter estimate; carries the transmit amplitude."""
    h_hat: np.ndarray


def build_symbol_matrix(delays, preamble, K=None):
    """
    (K + ell_last - ell_first) x N_p matrix whose column b is the preamble
    shifted down by ell_b - ell_first rows, zero elsewhere.
    """
    s = np.asarray(preamble.samples if hasattr(preamble, 'samples') else preamble)
    K = len(s) if K is None else K
    ells = np.asarray(delays.ells if hasattr(delays, 'ells') else delays, dtype=np.int64)
    if np.any(np.diff(ells) <= 0):
        raise ValueError("delays must be strictly increasing")
    rows = K + int(ells[-1] - ells[0])
    S = np.zeros((rows, len(ells)), dtype=np.int8)
    for col, ell in enumerate(ells):
        shift = int(ell - ells[0])
        S[shift:shift + K, col] = s[:K]
    return S


def _colliding_pair(S, ells):
    columns = S.astype(float)
    norms = np.linalg.norm(columns, axis=0)
    cosine = np.abs(columns.T @ columns) / np.outer(norms, norms)
    np.fill_diagonal(cosine, 0.0)
    a, b = np.unravel_index(np.argmax(cosine), cosine.shape)
    a, b = sorted((int(a), int(b)))
    return int(ells[a]), int(ells[b])


class LeastSquaresSolver:
    """One economic QR of S shared by every frame's solve."""

    def __init__(self, S, ells=None):
        self.S = np.asarray(S, dtype=float)
        self.ells = np.arange(self.S.shape[1]) if ells is None else np.asarray(ells)
        self.Q, self.R = qr(self.S, mode='economic')
        diagonal = np.abs(np.diag(self.R))
        if diagonal.size and diagonal.min() <= RANK_TOLERANCE * diagonal.max():
            raise RankDeficientSymbolMatrix(_colliding_pair(self.S, self.ells))

    def solve(self, y):
        """Minimise ||y - S h|| for one vector or for the columns of a matrix."""
        y = np.asarray(y, dtype=np.complex128)
        if y.shape[0] != self.S.shape[0]:
            raise ValueError(f"expected {self.S.shape[0]} samples, got {y.shape[0]}")
        return solve_triangular(self.R, self.Q.T @ y)


def lse_coeffs(S, y_m, delays=None):
    """
    h_hat for one frame. ``y_m`` is a FrameSamples (cut to the rows of S
    starting at ``delays.first`` when delays are given) or a plain array.
    """
    ells = None
    if hasattr(y_m, 'y'):
        if delays is not None:
            samples = y_m.segment(delays.first, delays.first + S.shape[0] - 1)
            ells = delays.ells
        else:
            samples = y_m.y
    else:
        samples = y_m
    return CoeffEstimate(h_hat=LeastSquaresSolver(S, ells).solve(samples))


def frame_coefficients(solver, frames, delays, K):
    """N_p x M matrix of per-frame estimates, one column per frame."""
    start, stop = delays.first, K - 1 + delays.last
    Y = np.stack([frame.segment(start, stop) for frame in frames], axis=1)
    H = solver.solve(Y)
    logger.info("Solved %d frames for %d coefficients each", H.shape[1], H.shape[0])
    return H
