"""
Golay complementary pairs and the single-carrier training field built from them.

All sequences are small signed integer arrays (int8). Sample indices are
0-based everywhere: the exploited 512-sample segment starts at offset 2048.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.signal import correlate

logger = logging.getLogger(__name__)

# Delay and weight vectors that yield the 128-sample pair of the SC PHY preamble.
DOT11AD_DELAYS = (1, 8, 2, 4, 16, 32, 64)
DOT11AD_WEIGHTS = (-1, -1, -1, -1, +1, -1, -1)

BLOCK_LEN = 128
STF_REPEATS = 16
STF_LEN = (STF_REPEATS + 1) * BLOCK_LEN
CEF_LEN = 9 * BLOCK_LEN
TRAINING_LEN = STF_LEN + CEF_LEN
S512_OFFSET = 2048
S512_LEN = 512

# Channel-estimation field as (sign, sequence) blocks.
CEF_LAYOUT = (
    (-1, 'b'), (-1, 'a'), (+1, 'b'),
    (-1, 'a'), (-1, 'b'), (+1, 'a'),
    (-1, 'b'), (-1, 'a'), (-1, 'b'),
)


class GolayParameterError(ValueError):
    """Raised for delay/weight vectors that cannot produce a Golay pair."""


@dataclass(frozen=True)
class GolayPair:
    a: np.ndarray
    b: np.ndarray

    @property
    def n(self):
        return len(self.a)

    def autocorrelation_sum(self):
        """Aperiodic R_a[k] + R_b[k] for lags k = -(N-1) .. N-1, in integers."""
        a = self.a.astype(np.int64)
        b = self.b.astype(np.int64)
        return np.correlate(a, a, mode='full') + np.correlate(b, b, mode='full')

    def is_complementary(self):
        total = self.autocorrelation_sum()
        centre = self.n - 1
        sidelobes = np.delete(total, centre)
        return total[centre] == 2 * self.n and not np.any(sidelobes)


@dataclass(frozen=True)
class Preamble:
    samples: np.ndarray
    stf_len: int = STF_LEN
    cef_len: int = CEF_LEN
    s512_offset: int = S512_OFFSET

    def __len__(self):
        return len(self.samples)

    @property
    def s512(self):
        return self.samples[self.s512_offset:self.s512_offset + S512_LEN]


def _is_power_of_two(value):
    return isinstance(value, (int, np.integer)) and value >= 1 and (value & (value - 1)) == 0


def generate_golay_pair(n, delays, weights, reverse=False):
    """
    Build a Golay pair of length n with the delay/weight recursion

        a_k[t] = w_k a_{k-1}[t] + b_{k-1}[t - d_k]
        b_k[t] = w_k a_{k-1}[t] - b_{k-1}[t - d_k]

    starting from unit impulses. ``reverse`` time-reverses both outputs,
    which is how the 802.11ad vectors are meant to be read.
    """
    if not _is_power_of_two(n) or n < 2:
        raise GolayParameterError(f"length must be a power of two >= 2, got {n}")
    stages = int(np.log2(n))
    delays = [int(d) for d in delays]
    weights = [int(w) for w in weights]
    if len(delays) != stages or len(weights) != stages:
        raise GolayParameterError(
            f"length {n} needs {stages} delays and weights, got {len(delays)} and {len(weights)}")
    if len(set(delays)) != len(delays):
        raise GolayParameterError(f"duplicate delays in {delays}")
    for d in delays:
        if not _is_power_of_two(d) or d >= n:
            raise GolayParameterError(f"delay {d} is not a power of two below {n}")
    for w in weights:
        if w not in (-1, 1):
            raise GolayParameterError(f"weight {w} is not +1 or -1")

    a = np.zeros(n, dtype=np.int64)
    b = np.zeros(n, dtype=np.int64)
    a[0] = b[0] = 1
    for d, w in zip(delays, weights):
        shifted = np.zeros(n, dtype=np.int64)
        shifted[d:] = b[:n - d]
        a, b = w * a + shifted, w * a - shifted

    if reverse:
        a, b = a[::-1], b[::-1]

    pair = GolayPair(a=a.astype(np.int8), b=b.astype(np.int8))
    if not pair.is_complementary():
        raise GolayParameterError(f"delays {delays} and weights {weights} do not give a complementary pair")
    return pair


def dot11ad_pair():
    """The Ga128/Gb128 pair of the SC PHY preamble."""
    return generate_golay_pair(BLOCK_LEN, DOT11AD_DELAYS, DOT11AD_WEIGHTS, reverse=True)


def assemble_preamble(pair):
    """STF (16 x a, then -a) followed by the channel-estimation field."""
    if pair.n != BLOCK_LEN:
        raise GolayParameterError(f"the training field needs a {BLOCK_LEN}-sample pair, got {pair.n}")
    blocks = [pair.a] * STF_REPEATS + [-pair.a]
    blocks += [sign * (pair.a if name == 'a' else pair.b) for sign, name in CEF_LAYOUT]
    samples = np.concatenate(blocks).astype(np.int8)
    samples.setflags(write=False)
    logger.debug("Assembled training field of %d samples", len(samples))
    return Preamble(samples=samples)


def xcorr_s512(s512, y, lags):
    """
    R[l] = sum_k s512[k] * conj(y[l + k]) for every l in ``lags``.

    ``lags`` index into ``y`` directly; callers that work in absolute
    sample time translate before calling.
    """
    y = np.asarray(y)
    lags = np.atleast_1d(np.asarray(lags, dtype=np.int64))
    span = len(s512)
    if lags.size == 0:
        return np.zeros(0, dtype=np.complex128)
    lo, hi = int(lags.min()), int(lags.max())
    if lo < 0 or hi + span > len(y):
        raise ValueError(
            f"lags {lo}..{hi} need samples 0..{hi + span - 1}, only {len(y)} available")
    segment = y[lo:hi + span].astype(np.complex128)
    # correlate() conjugates its second argument; s512 is real, so conjugate the result instead
    full = np.conj(correlate(segment, s512.astype(np.float64), mode='valid', method='direct'))
    return full[lags - lo]


@lru_cache(maxsize=1)
def training_field():
    """The default SC PHY training field, built once per process."""
    return assemble_preamble(dot11ad_pair())
