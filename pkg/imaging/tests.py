import json
import math
import tempfile
from pathlib import Path

import numpy as np
import pandas as pd
from django.test import SimpleTestCase
from scipy.constants import c as SPEED_OF_LIGHT

from scene.config import SimConfig
from scene.kinematics import draw_betas, truth_table
from scene.vehicle import default_vehicle

from .export import PGM_MAX, axes_payload, pgm_bytes, to_gray16, write_image_artifacts
from .formation import (
    ImagingError, IsarImage, cross_range_bins, cross_range_resolution, cross_range_signal,
    form_image, range_profile, rotational_velocity,
)


def tone_doppler(b, omega, cfg):
    """Doppler that lands exactly on cross-range bin ``b``."""
    delta_cr = cross_range_resolution(omega, cfg.num_frames, cfg)
    return b * 2 * cfg.carrier_hz * omega * delta_cr / SPEED_OF_LIGHT


class RangeProfileTests(SimpleTestCase):
    def setUp(self):
        self.cfg = SimConfig()

    def test_single_scatterer_sits_mid_window(self):
        profile = range_profile([248], [0.5 - 0.5j], self.cfg)
        self.assertEqual(profile.n_r, 176)
        self.assertEqual(profile.origin_ell, 248 - 88)
        self.assertEqual(np.count_nonzero(profile.bins), 1)
        self.assertEqual(profile.bins[88], 0.5 - 0.5j)
        self.assertAlmostEqual(profile.delta_r, 0.0852, delta=0.0001)

    def test_empty_profile(self):
        profile = range_profile([], [], self.cfg)
        self.assertEqual(profile.n_r, 176)
        self.assertFalse(np.any(profile.bins))

    def test_shared_bin_adds_coefficients(self):
        profile = range_profile([250, 250], [1.0, 2.0j], self.cfg)
        self.assertEqual(profile.bins[profile.rows()[0]], 1.0 + 2.0j)

    def test_rejects_bad_inputs(self):
        with self.assertRaises(ImagingError):
            range_profile([100, 400], [1.0, 1.0], self.cfg)
        with self.assertRaises(ImagingError):
            range_profile([250, 251], [1.0], self.cfg)

    def test_default_scene_bins_follow_the_true_ranges(self):
        cfg = SimConfig(frames=10)
        scatterers = default_vehicle(cfg)
        truth = truth_table(cfg, scatterers, draw_betas(cfg.seed, len(scatterers)))
        profile = range_profile(truth.ell[:, 0], np.ones(22), cfg)
        axis = profile.range_axis()
        self.assertEqual(np.count_nonzero(profile.bins), 22)
        for row, r in zip(profile.rows(), truth.r[:, 0]):
            self.assertLess(abs(axis[row] - r), profile.delta_r)


class CrossRangeTests(SimpleTestCase):
    def setUp(self):
        self.cfg = SimConfig(frames=64)
        self.omega = rotational_velocity(40.0, self.cfg)

    def test_rotational_velocity(self):
        self.assertAlmostEqual(self.omega, 40 / math.sqrt(449))
        self.assertAlmostEqual(self.omega, 1.888, places=3)
        self.assertEqual(rotational_velocity(0.0, self.cfg), 0.0)
        offset = self.cfg.with_overrides(x0_m=3.0)
        self.assertAlmostEqual(rotational_velocity(40.0, offset),
                               40 * math.cos(math.atan(3 / 20)) / offset.reference_range_m)

    def test_resolution_is_the_plane_size_over_frames(self):
        self.assertAlmostEqual(cross_range_resolution(self.omega, 64, self.cfg), 20.0 / 64)
        self.assertAlmostEqual(cross_range_resolution(0.3, 1291, self.cfg) * 1291, 20.0)

    def test_zero_doppler_gives_ones(self):
        CR = cross_range_signal(np.zeros((2, 64)), self.omega, self.cfg)
        np.testing.assert_allclose(CR, np.ones((2, 64)))

    def test_tone_lands_on_its_bin(self):
        nu = tone_doppler(7.0, self.omega, self.cfg)
        self.assertAlmostEqual(float(cross_range_bins(nu, self.omega, 64, self.cfg)), 7.0)
        CR = cross_range_signal(np.full((1, 64), nu), self.omega, self.cfg)
        spectrum = np.abs(np.fft.fft(CR[0]))
        self.assertEqual(int(np.argmax(spectrum)), 7)
        self.assertAlmostEqual(spectrum[7], 64.0)

    def test_reference_and_per_frame_modes(self):
        corrected = np.tile(np.linspace(100.0, 90.0, 64), (1, 1))
        reference = cross_range_signal(corrected, self.omega, self.cfg, mode='reference', reference_frame=10)
        per_frame = cross_range_signal(corrected, self.omega, self.cfg, mode='per_frame')
        b = cross_range_bins(corrected[0, 10], self.omega, 64, self.cfg)
        np.testing.assert_allclose(reference[0], np.exp(2j * np.pi * b * np.arange(64) / 64))
        self.assertFalse(np.allclose(reference, per_frame))
        with self.assertRaises(ImagingError):
            cross_range_signal(corrected, self.omega, self.cfg, mode='sideways')

    def test_rejects_nonpositive_omega(self):
        with self.assertRaises(ImagingError):
            cross_range_signal(np.zeros((1, 64)), 0.0, self.cfg)


class FormImageTests(SimpleTestCase):
    def setUp(self):
        self.cfg = SimConfig(frames=64)
        self.omega = rotational_velocity(40.0, self.cfg)

    def image_of(self, ells, h, doppler):
        profile = range_profile(ells, h, self.cfg)
        CR = cross_range_signal(np.asarray(doppler, dtype=float), self.omega, self.cfg)
        return profile, CR, form_image(profile, ells, CR, self.cfg, omega=self.omega)

    def test_static_scatterer_is_one_bright_pixel(self):
        profile, _, image = self.image_of([250], [0.3 + 0.4j], np.zeros((1, 64)))
        row = profile.rows()[0]
        self.assertEqual(image.grid.shape, (176, 64))
        self.assertAlmostEqual(image.grid[row, 32], 64 * 0.5)
        self.assertAlmostEqual(image.grid.sum(), 64 * 0.5)
        self.assertAlmostEqual(image.delta_cr * image.n_cr, 20.0)

    def test_tone_shifts_the_column(self):
        nu = tone_doppler(7.0, self.omega, self.cfg)
        profile, _, image = self.image_of([250], [1.0], np.full((1, 64), nu))
        self.assertEqual(int(np.argmax(image.grid[profile.rows()[0]])), 32 + 7)

    def test_distinct_bins_give_distinct_peaks(self):
        doppler = np.array([np.full(64, tone_doppler(b, self.omega, self.cfg)) for b in (-3.0, -2.0)])
        profile, _, image = self.image_of([250, 250], [1.0, 1.0], doppler)
        row = image.grid[profile.rows()[0]]
        self.assertEqual(sorted(np.argsort(row)[-2:].tolist()), [29, 30])

    def test_empty_profile_gives_an_empty_image(self):
        profile = range_profile([], [], self.cfg)
        image = form_image(profile, [], np.zeros((0, 64)), self.cfg, omega=self.omega)
        self.assertEqual(image.grid.shape, (176, 64))
        self.assertFalse(np.any(image.grid))

    def test_rows_keep_their_energy(self):
        rng = np.random.default_rng(3)
        ells = [240, 244, 251]
        h = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        doppler = rng.uniform(-2000, 2000, size=(3, 64))
        profile, CR, image = self.image_of(ells, h, doppler)
        for p, row in enumerate(profile.rows()):
            signal = h[p] * CR[p]
            self.assertAlmostEqual(np.sum(image.grid[row] ** 2) / (64 * np.sum(np.abs(signal) ** 2)), 1.0)

    def test_scatterer_order_does_not_matter(self):
        rng = np.random.default_rng(4)
        ells = np.array([240, 244, 251, 255])
        h = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        doppler = rng.uniform(-1500, 1500, size=(4, 64))
        _, _, image = self.image_of(ells, h, doppler)
        order = np.array([2, 0, 3, 1])
        _, _, permuted = self.image_of(ells[order], h[order], doppler[order])
        np.testing.assert_allclose(permuted.grid, image.grid, atol=1e-12)

    def test_flip_is_an_involution(self):
        _, _, image = self.image_of([250], [1.0], np.full((1, 64), 300.0))
        flipped = image.flip()
        self.assertTrue(flipped.flipped)
        np.testing.assert_array_equal(flipped.grid, image.grid[:, ::-1])
        twice = flipped.flip()
        self.assertFalse(twice.flipped)
        np.testing.assert_array_equal(twice.grid, image.grid)

    def test_rejects_misaligned_inputs(self):
        profile = range_profile([250, 252], [1.0, 1.0], self.cfg)
        with self.assertRaises(ImagingError):
            form_image(profile, [250, 252], np.ones((3, 64)), self.cfg, omega=self.omega)
        with self.assertRaises(ImagingError):
            form_image(profile, [250, 253], np.ones((2, 64)), self.cfg, omega=self.omega)


class ExportTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)
        grid = np.zeros((4, 6))
        grid[1, 2] = 2.0
        grid[3, 5] = 1.0
        self.image = IsarImage(grid=grid, delta_r=0.0852, delta_cr=0.5, flipped=True)

    def test_gray_levels(self):
        levels = to_gray16(self.image.grid)
        self.assertEqual(levels[1, 2], PGM_MAX)
        self.assertEqual(levels[3, 5], 32768)
        self.assertFalse(np.any(to_gray16(np.zeros((2, 2)))))

    def test_pgm_layout(self):
        data = pgm_bytes(self.image.grid)
        header = b'P5\n6 4\n65535\n'
        self.assertTrue(data.startswith(header))
        self.assertEqual(len(data), len(header) + 2 * 24)
        offset = len(header) + 2 * (1 * 6 + 2)
        self.assertEqual(data[offset:offset + 2], b'\xff\xff')

    def test_axes(self):
        self.assertEqual(axes_payload(self.image),
                         {'delta_r': 0.0852, 'delta_cr': 0.5, 'n_r': 4, 'n_cr': 6, 'flipped': True})

    def test_artifacts(self):
        profile = range_profile([250], [1.0], SimConfig(frames=6, x_size_m=0.4))
        paths = write_image_artifacts(self.dir, self.image, profile)
        self.assertEqual(sorted(p.name for p in paths.values()),
                         ['axes.json', 'image.csv', 'image.pgm', 'image_flipped.pgm', 'range_profile.csv'])
        # image.pgm is the unflipped view
        self.assertEqual((self.dir / 'image.pgm').read_bytes(), pgm_bytes(self.image.grid[:, ::-1]))
        self.assertEqual((self.dir / 'image_flipped.pgm').read_bytes(), pgm_bytes(self.image.grid))
        magnitudes = pd.read_csv(self.dir / 'image.csv', header=None).to_numpy()
        np.testing.assert_allclose(magnitudes, self.image.grid)
        axes = json.loads((self.dir / 'axes.json').read_text(encoding='utf-8'))
        self.assertTrue(axes['flipped'])
        table = pd.read_csv(self.dir / 'range_profile.csv')
        self.assertEqual(list(table.columns), ['range_m', 're', 'im', 'magnitude'])
        self.assertEqual(len(table), 4)
