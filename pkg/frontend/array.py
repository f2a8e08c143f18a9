"""
Uniform planar arrays, matched beamformers and the backscatter coefficients
that collapse the two-way MIMO channel to one complex gain per scatterer.
"""
import logging
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Beamformers:
    f_tx: np.ndarray
    f_rx: np.ndarray
    tx_shape: tuple
    rx_shape: tuple


@dataclass(frozen=True)
class BackscatterTruth:
    """h_p per scatterer; the transmit amplitude is applied at synthesis, not here."""
    h: np.ndarray
    array_gain: np.ndarray


def spatial_frequencies(phi, theta, d_x, d_y, wavelength):
    theta = np.asarray(theta, dtype=float)
    if np.any(np.abs(theta) >= np.pi / 2):
        raise ValueError("elevation must lie strictly inside (-pi/2, pi/2)")
    omega_x = 2 * np.pi * d_x * np.cos(theta) * np.sin(phi) / wavelength
    omega_y = 2 * np.pi * d_y * np.sin(theta) / wavelength
    return omega_x, omega_y


def steering_vector(omega_x, omega_y, nx, ny):
    """exp(j(nx*omega_x + ny*omega_y)) laid out as kron(x ramp, y ramp), index nx*Ny + ny."""
    if nx < 1 or ny < 1:
        raise ValueError("array dimensions must be at least 1")
    x_ramp = np.exp(1j * omega_x * np.arange(nx))
    y_ramp = np.exp(1j * omega_y * np.arange(ny))
    return np.kron(x_ramp, y_ramp)


def _half_wavelength_vector(cfg, phi, theta, shape):
    half = cfg.wavelength_m / 2
    omega_x, omega_y = spatial_frequencies(phi, theta, half, half, cfg.wavelength_m)
    return steering_vector(omega_x, omega_y, *shape)


def design_beamformers(cfg, truth):
    """Unit-norm matched beams on the vehicle reference point at t = 0, held for the CPI."""
    if truth.num_scatterers == 0:
        raise ValueError("cannot point beams at an empty scene")
    phi0 = np.arctan2(cfg.x0_m, cfg.y0_m)
    theta0 = np.arcsin(cfg.z0_m / cfg.reference_range_m)
    tx_shape = (cfg.nx_tx, cfg.ny_tx)
    rx_shape = (cfg.nx_rx, cfg.ny_rx)
    a_tx = _half_wavelength_vector(cfg, phi0, theta0, tx_shape)
    a_rx = _half_wavelength_vector(cfg, phi0, theta0, rx_shape)
    f_tx = a_tx / np.sqrt(a_tx.size)
    f_rx = np.conj(a_rx) / np.sqrt(a_rx.size)
    return Beamformers(f_tx=f_tx, f_rx=f_rx, tx_shape=tx_shape, rx_shape=rx_shape)


def array_term(cfg, beamformers, phi, theta):
    """f_RX^H conj(a_RX) a_TX^H f_TX for each (phi, theta) pair."""
    terms = []
    for az, el in zip(np.atleast_1d(phi), np.atleast_1d(theta)):
        a_tx = _half_wavelength_vector(cfg, az, el, beamformers.tx_shape)
        a_rx = _half_wavelength_vector(cfg, az, el, beamformers.rx_shape)
        rx = np.vdot(beamformers.f_rx, np.conj(a_rx))
        tx = np.vdot(a_tx, beamformers.f_tx)
        terms.append(rx * tx)
    return np.array(terms, dtype=np.complex128)


def backscatter_truth(cfg, truth, beamformers):
    """h_p = sqrt(G_p) beta_p times the array term, with frame-0 angles and gains."""
    gain = array_term(cfg, beamformers, truth.phi[:, 0], truth.theta[:, 0])
    h = np.sqrt(truth.G[:, 0]) * truth.beta * gain
    logger.debug("Array gain magnitude %.3f..%.3f", np.abs(gain).min(), np.abs(gain).max())
    return BackscatterTruth(h=h, array_gain=gain)
