import math
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from scene.config import SimConfig
from scene.kinematics import draw_betas, truth_table
from scene.vehicle import Scatterer, default_vehicle
from waveform.golay import training_field

from .array import (
    BackscatterTruth, array_term, backscatter_truth, design_beamformers, spatial_frequencies,
    steering_vector,
)
from .framefile import FrameFileError, read_frames, read_frames_bin, write_frames
from .synthesis import frame_rng, synthesize_frame, synthesize_frames


def single_scatterer_truth(cfg, offset=(0.0, 0.0, 0.0), beta=1.0):
    return truth_table(cfg, [Scatterer(offset=offset, rcs_m2=1.0)], np.array([beta], dtype=complex))


class SteeringTests(SimpleTestCase):
    def test_broadside_has_zero_spatial_frequency(self):
        omega_x, omega_y = spatial_frequencies(0.0, 0.0, 0.5, 0.5, 1.0)
        self.assertEqual((float(omega_x), float(omega_y)), (0.0, 0.0))

    def test_endfire_half_wavelength(self):
        omega_x, _ = spatial_frequencies(math.pi / 2, 0.0, 0.5, 0.5, 1.0)
        self.assertAlmostEqual(float(omega_x), math.pi)

    def test_oblique_angle(self):
        phi, theta = math.radians(30), math.radians(-20)
        omega_x, omega_y = spatial_frequencies(phi, theta, 0.5, 0.5, 1.0)
        self.assertAlmostEqual(float(omega_x), math.pi * math.cos(theta) * 0.5)
        self.assertAlmostEqual(float(omega_y), math.pi * math.sin(theta))

    def test_single_element(self):
        np.testing.assert_allclose(steering_vector(1.3, -0.4, 1, 1), [1.0])

    def test_zero_frequency_is_all_ones(self):
        np.testing.assert_allclose(steering_vector(0.0, 0.0, 8, 8), np.ones(64))

    def test_kronecker_ordering(self):
        vector = steering_vector(math.pi, math.pi / 2, 2, 2)
        np.testing.assert_allclose(vector, [1, 1j, -1, -1j], atol=1e-12)


class BeamformerTests(SimpleTestCase):
    def setUp(self):
        self.cfg = SimConfig(frames=10)
        self.truth = single_scatterer_truth(self.cfg)
        self.beams = design_beamformers(self.cfg, self.truth)

    def test_beams_have_unit_norm(self):
        self.assertAlmostEqual(np.linalg.norm(self.beams.f_tx), 1.0)
        self.assertAlmostEqual(np.linalg.norm(self.beams.f_rx), 1.0)

    def test_full_gain_on_the_reference_point(self):
        gain = array_term(self.cfg, self.beams, self.truth.phi[:, 0], self.truth.theta[:, 0])
        self.assertAlmostEqual(abs(gain[0]), 64.0, places=9)

    def test_off_boresight_gain_is_lower(self):
        phi = self.truth.phi[0, 0] + math.radians(5)
        gain = array_term(self.cfg, self.beams, [phi], [self.truth.theta[0, 0]])
        self.assertLess(abs(gain[0]), 64.0)
        self.assertGreater(abs(gain[0]), 0.0)

    def test_single_antenna_arrays(self):
        cfg = SimConfig(frames=10, nx_tx=1, ny_tx=1, nx_rx=1, ny_rx=1)
        truth = single_scatterer_truth(cfg, offset=(1.0, 0.5, 0.2), beta=0.3 - 0.4j)
        beams = design_beamformers(cfg, truth)
        np.testing.assert_allclose(beams.f_tx, [1.0])
        backscatter = backscatter_truth(cfg, truth, beams)
        np.testing.assert_allclose(backscatter.array_gain, [1.0])
        np.testing.assert_allclose(backscatter.h, np.sqrt(truth.G[:, 0]) * truth.beta)

    def test_zero_beta_gives_zero_coefficient(self):
        truth = single_scatterer_truth(self.cfg, beta=0.0)
        backscatter = backscatter_truth(self.cfg, truth, design_beamformers(self.cfg, truth))
        self.assertEqual(backscatter.h[0], 0)

    def test_default_scene_coefficients(self):
        cfg = SimConfig(frames=10)
        scatterers = default_vehicle(cfg)
        truth = truth_table(cfg, scatterers, draw_betas(cfg.seed, len(scatterers)))
        backscatter = backscatter_truth(cfg, truth, design_beamformers(cfg, truth))
        np.testing.assert_allclose(np.abs(backscatter.h),
                                   np.sqrt(truth.G[:, 0]) * np.abs(truth.beta) * np.abs(backscatter.array_gain))
        self.assertTrue(np.all(np.abs(backscatter.array_gain) <= 64.0 + 1e-9))


class SynthesisTests(SimpleTestCase):
    def setUp(self):
        self.preamble = training_field()
        self.s = self.preamble.samples.astype(float)
        self.K = len(self.s)

    def test_noiseless_static_scatterer(self):
        cfg = SimConfig(frames=10, noiseless=True)
        truth = single_scatterer_truth(cfg)
        self.assertAlmostEqual(truth.nu[0, 0], 0.0)
        backscatter = BackscatterTruth(h=np.array([0.7 - 0.2j]), array_gain=np.ones(1))
        frame = synthesize_frame(cfg, truth, backscatter, 0, frame_rng(cfg.seed, 0), self.preamble)
        ell = truth.ell[0, 0]
        self.assertEqual(frame.k0, truth.ell.min())
        self.assertEqual(len(frame), self.K + truth.ell.max() - truth.ell.min())
        expected = cfg.sample_amplitude * (0.7 - 0.2j) * self.s
        np.testing.assert_allclose(frame.segment(ell, ell + self.K - 1), expected, rtol=1e-12)

    def test_doppler_rotates_phase_per_sample(self):
        cfg = SimConfig(frames=10, noiseless=True)
        truth = single_scatterer_truth(cfg, offset=(2.5, 0.0, 0.0))
        nu = truth.nu[0, 0]
        self.assertNotEqual(nu, 0.0)
        backscatter = BackscatterTruth(h=np.array([1.0 + 0j]), array_gain=np.ones(1))
        frame = synthesize_frame(cfg, truth, backscatter, 0, frame_rng(cfg.seed, 0), self.preamble)
        ell = truth.ell[0, 0]
        y = frame.segment(ell, ell + 63)
        np.testing.assert_allclose(np.abs(y), cfg.sample_amplitude)
        step = (y[1:] / y[:-1]) * (self.s[:63] / self.s[1:64])
        np.testing.assert_allclose(np.angle(step), 2 * np.pi * nu * cfg.symbol_period_s, atol=1e-9)

    def test_noise_only_variance(self):
        cfg = SimConfig(frames=40)
        truth = single_scatterer_truth(cfg)
        silent = BackscatterTruth(h=np.zeros(1, dtype=complex), array_gain=np.ones(1))
        frames = synthesize_frames(cfg, truth, silent, preamble=self.preamble)
        samples = np.concatenate([f.y for f in frames])
        self.assertGreater(samples.size, 100_000)
        self.assertAlmostEqual(np.mean(np.abs(samples) ** 2) / cfg.sigma_nc2, 1.0, delta=0.05)

    def test_frames_are_reproducible_and_order_free(self):
        cfg = SimConfig(frames=12)
        scatterers = default_vehicle(cfg)
        truth = truth_table(cfg, scatterers, draw_betas(cfg.seed, len(scatterers)))
        backscatter = backscatter_truth(cfg, truth, design_beamformers(cfg, truth))
        serial = synthesize_frames(cfg, truth, backscatter, workers=1, preamble=self.preamble)
        threaded = synthesize_frames(cfg, truth, backscatter, workers=4, preamble=self.preamble)
        for a, b in zip(serial, threaded):
            self.assertEqual(a.k0, b.k0)
            np.testing.assert_array_equal(a.y, b.y)
        other = synthesize_frames(cfg, truth, backscatter, seed=cfg.seed + 1, preamble=self.preamble)
        self.assertFalse(np.array_equal(serial[3].y, other[3].y))

    def test_segment_bounds(self):
        cfg = SimConfig(frames=10, noiseless=True)
        truth = single_scatterer_truth(cfg)
        backscatter = BackscatterTruth(h=np.ones(1, dtype=complex), array_gain=np.ones(1))
        frame = synthesize_frame(cfg, truth, backscatter, 0, frame_rng(cfg.seed, 0), self.preamble)
        with self.assertRaises(ValueError):
            frame.segment(frame.k0 - 1, frame.k0 + 10)
        with self.assertRaises(ValueError):
            frame.segment(frame.k0, frame.k_end + 1)


class FrameFileTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)
        cfg = SimConfig(frames=8)
        scatterers = default_vehicle(cfg)
        truth = truth_table(cfg, scatterers, draw_betas(cfg.seed, len(scatterers)))
        backscatter = backscatter_truth(cfg, truth, design_beamformers(cfg, truth))
        self.cfg = cfg
        self.frames = synthesize_frames(cfg, truth, backscatter)

    def test_binary_round_trip(self):
        path = write_frames(self.dir, self.frames, self.cfg.training_len, 'bin')
        self.assertEqual(path.name, 'frames.bin')
        loaded, training_len = read_frames_bin(path)
        self.assertEqual(training_len, 3328)
        self.assertEqual(len(loaded), len(self.frames))
        for original, copy in zip(self.frames, loaded):
            self.assertEqual(copy.m, original.m)
            self.assertEqual(copy.k0, original.k0)
            self.assertEqual(copy.sigma_nc2, original.sigma_nc2)
            np.testing.assert_array_equal(copy.y, original.y)

    def test_csv_round_trip(self):
        path = write_frames(self.dir, self.frames, self.cfg.training_len, 'csv')
        self.assertEqual(path.name, 'frames.csv')
        loaded = read_frames(path, self.cfg.sigma_nc2)
        self.assertEqual([f.k0 for f in loaded], [f.k0 for f in self.frames])
        for original, copy in zip(self.frames, loaded):
            np.testing.assert_allclose(copy.y, original.y, rtol=1e-12)

    def test_rejects_foreign_files(self):
        path = self.dir / 'frames.bin'
        path.write_bytes(b'NOPE' + bytes(40))
        with self.assertRaises(FrameFileError):
            read_frames(path)
        path.write_bytes(b'GI')
        with self.assertRaises(FrameFileError):
            read_frames(path)
        with self.assertRaises(FrameFileError):
            read_frames(self.dir / 'absent.bin')
