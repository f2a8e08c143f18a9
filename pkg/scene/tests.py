import math
import tempfile
from pathlib import Path

import numpy as np
from django.core.exceptions import ImproperlyConfigured
from django.test import SimpleTestCase
from scipy.constants import c as SPEED_OF_LIGHT

from .config import SimConfig, cast_value, load_config
from .kinematics import draw_betas, kinematics, large_scale_gain, truth_table
from .vehicle import Scatterer, default_vehicle, load_vehicle, offsets_array, rcs_array


class ConfigTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)

    def write(self, text, name='run.cfg'):
        path = self.dir / name
        path.write_text(text, encoding='utf-8')
        return path

    def test_defaults_give_derived_quantities(self):
        cfg = SimConfig().validate()
        self.assertEqual(cfg.num_frames, 1291)
        self.assertAlmostEqual(cfg.range_resolution_m, 0.0852, delta=0.0001)
        self.assertAlmostEqual(cfg.symbol_period_s * cfg.bandwidth_hz, 1.0)
        self.assertAlmostEqual(cfg.reference_range_m, math.sqrt(449))
        self.assertEqual(cfg.range_bins, 176)
        self.assertEqual(cfg.reference_frame, 1290)
        self.assertAlmostEqual(cfg.total_rcs_m2, 100.0)

    def test_noise_floor(self):
        cfg = SimConfig()
        self.assertAlmostEqual(cfg.sigma_nc2 / 6.62e-11, 1.0, places=2)
        self.assertEqual(cfg.with_overrides(noiseless=True).sigma_nc2, 0.0)

    def test_empty_file_reproduces_defaults(self):
        self.assertEqual(load_config(self.write('# nothing set\n')), SimConfig())
        self.assertEqual(load_config(None), SimConfig())

    def test_text_round_trip_is_a_fixed_point(self):
        cfg = SimConfig(seed=77, tx_power_dbm=20.5, noiseless=True, wrap_strategy='pairwise',
                        vehicle_file='', frames=40)
        text = cfg.to_text()
        parsed = load_config(self.write(text))
        self.assertEqual(parsed, cfg)
        self.assertEqual(parsed.to_text(), text)

    def test_overrides_win_over_the_file(self):
        cfg = load_config(self.write('seed = 5\ni_gap = 3\n'), seed='9')
        self.assertEqual(cfg.seed, 9)
        self.assertEqual(cfg.i_gap, 3)

    def test_unknown_key_is_rejected(self):
        with self.assertRaises(ImproperlyConfigured):
            load_config(self.write('sead = 5\n'))

    def test_bad_value_is_rejected(self):
        with self.assertRaises(ImproperlyConfigured):
            load_config(self.write('i_gap = six\n'))
        with self.assertRaises(ImproperlyConfigured):
            cast_value('noiseless', 'maybe')

    def test_missing_file_is_rejected(self):
        with self.assertRaises(ImproperlyConfigured):
            load_config(self.dir / 'absent.cfg')

    def test_frames_must_exceed_the_gap(self):
        with self.assertRaisesMessage(ImproperlyConfigured, 'M must exceed i_gap'):
            load_config(frames=6, i_gap=6)

    def test_choice_settings_are_checked(self):
        with self.assertRaises(ImproperlyConfigured):
            load_config(wrap_strategy='guess')
        with self.assertRaises(ImproperlyConfigured):
            load_config(cross_range_frame=5000)


class VehicleTests(SimpleTestCase):
    def test_default_vehicle(self):
        scatterers = default_vehicle(SimConfig())
        offsets = offsets_array(scatterers)
        self.assertEqual(len(scatterers), 22)
        self.assertAlmostEqual(rcs_array(scatterers).sum(), 100.0)
        self.assertAlmostEqual(offsets[:, 0].max() - offsets[:, 0].min(), 5.0)

    def test_shares_are_normalised(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'two.csv'
            path.write_text('x_m,y_m,z_m,rcs_share\n0,0,0,1\n1,0,0,3\n', encoding='utf-8')
            scatterers = load_vehicle(path, 8.0)
        self.assertEqual([s.rcs_m2 for s in scatterers], [2.0, 6.0])

    def test_bad_vehicle_files(self):
        with tempfile.TemporaryDirectory() as tmp:
            missing_column = Path(tmp) / 'bad.csv'
            missing_column.write_text('x_m,y_m,rcs_share\n0,0,1\n', encoding='utf-8')
            with self.assertRaises(ImproperlyConfigured):
                load_vehicle(missing_column, 1.0)
            with self.assertRaises(ImproperlyConfigured):
                load_vehicle(Path(tmp) / 'absent.csv', 1.0)


class KinematicsTests(SimpleTestCase):
    def setUp(self):
        self.cfg = SimConfig()
        self.reference = [Scatterer(offset=(0.0, 0.0, 0.0), rcs_m2=1.0)]

    def test_reference_point_at_first_frame(self):
        state = kinematics(self.cfg, self.reference, 0)
        self.assertAlmostEqual(state.r[0], math.sqrt(449))
        self.assertAlmostEqual(state.v_radial[0], 0.0)

    def test_displacement_over_the_cpi(self):
        first = kinematics(self.cfg, self.reference, 0)
        last = kinematics(self.cfg, self.reference, self.cfg.num_frames - 1)
        shift = last.position[0] - first.position[0]
        self.assertAlmostEqual(shift[0], 0.4, delta=0.002)
        self.assertAlmostEqual(shift[1], 0.0)

    def test_receding_scatterer_has_negative_doppler(self):
        state = kinematics(self.cfg, [Scatterer(offset=(2.5, 0.0, 0.0), rcs_m2=1.0)], 0)
        self.assertLess(state.v_radial[0], 0)

    def test_frame_out_of_range(self):
        with self.assertRaises(ValueError):
            kinematics(self.cfg, self.reference, self.cfg.num_frames)


class TruthTableTests(SimpleTestCase):
    def test_sampled_delay_of_the_reference_point(self):
        cfg = SimConfig(frames=20)
        truth = truth_table(cfg, [Scatterer((0.0, 0.0, 0.0), 1.0)], np.ones(1))
        self.assertAlmostEqual(truth.tau[0, 0], 141.3e-9, delta=0.1e-9)
        self.assertEqual(truth.ell[0, 0], 248)
        self.assertTrue(np.all(truth.tau_f >= 0))
        self.assertTrue(np.all(truth.tau_f < cfg.symbol_period_s))
        np.testing.assert_allclose(truth.tau, 2 * truth.r / SPEED_OF_LIGHT)

    def test_head_on_doppler(self):
        cfg = SimConfig(frames=10, x0_m=-100.0, y0_m=0.0, z0_m=0.0)
        truth = truth_table(cfg, [Scatterer((0.0, 0.0, 0.0), 1.0)], np.ones(1))
        self.assertAlmostEqual(truth.nu[0, 0], 16011.1, delta=0.5)

    def test_scatterers_a_resolution_cell_apart_get_distinct_delays(self):
        cfg = SimConfig(frames=10)
        direction = np.array([0.0, 20.0, -7.0]) / math.sqrt(449)
        scatterers = [Scatterer((0.0, 0.0, 0.0), 1.0), Scatterer(tuple(0.086 * direction), 1.0)]
        truth = truth_table(cfg, scatterers, np.ones(2))
        self.assertNotEqual(truth.ell[0, 0], truth.ell[1, 0])
        self.assertEqual(len(truth.delay_set(0)), 2)

    def test_default_scene_shape(self):
        cfg = SimConfig(frames=30)
        scatterers = default_vehicle(cfg)
        truth = truth_table(cfg, scatterers, draw_betas(cfg.seed, len(scatterers)))
        self.assertEqual(truth.r.shape, (22, 30))
        self.assertEqual(truth.num_frames, 30)

    def test_beta_count_must_match(self):
        with self.assertRaises(ValueError):
            truth_table(SimConfig(frames=10), [Scatterer((0.0, 0.0, 0.0), 1.0)], np.ones(2))

    def test_betas_are_seeded(self):
        np.testing.assert_array_equal(draw_betas(3, 22), draw_betas(3, 22))
        self.assertFalse(np.allclose(draw_betas(3, 22), draw_betas(4, 22)))
        self.assertAlmostEqual(np.mean(np.abs(draw_betas(11, 20000)) ** 2), 1.0, delta=0.05)


class DefaultCpiTruthTests(SimpleTestCase):
    """The whole default CPI: 22 scatterers over 1291 frames."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.cfg = SimConfig()
        scatterers = default_vehicle(cls.cfg)
        cls.truth = truth_table(cls.cfg, scatterers, draw_betas(cls.cfg.seed, len(scatterers)))

    def test_doppler_steps_are_monotone_and_nearly_constant(self):
        steps = np.diff(self.truth.nu, axis=1)
        for p, row in enumerate(steps):
            self.assertTrue(np.all(row < 0) or np.all(row > 0), f'scatterer {p}')
        spread = (steps.max(axis=1) - steps.min(axis=1)) / np.abs(steps.mean(axis=1))
        self.assertLess(spread.max(), 0.01)

    def test_delay_decomposes_into_frame_sample_and_fraction(self):
        truth, cfg = self.truth, self.cfg
        m = np.arange(truth.num_frames)
        rebuilt = m * cfg.frame_period_s + truth.ell * cfg.symbol_period_s + truth.tau_f
        absolute = np.stack([truth.absolute_delay(k) for k in m], axis=1)
        self.assertTrue(np.all(np.abs(rebuilt - absolute) <= np.spacing(absolute)))

    def test_sampled_delays_hold_for_the_whole_cpi(self):
        ell = self.truth.ell
        np.testing.assert_array_equal(ell, np.repeat(ell[:, :1], ell.shape[1], axis=1))
        self.assertEqual(len(self.truth.delay_set(0)), 22)
        self.assertEqual(self.truth.delay_set(self.cfg.num_frames - 1), self.truth.delay_set(0))


class LargeScaleGainTests(SimpleTestCase):
    def setUp(self):
        self.cfg = SimConfig()

    def test_inverse_fourth_power(self):
        near = large_scale_gain(self.cfg, 10.0, 1.0)
        far = large_scale_gain(self.cfg, 20.0, 1.0)
        self.assertAlmostEqual(near / far, 16.0)

    def test_linear_in_rcs(self):
        self.assertAlmostEqual(large_scale_gain(self.cfg, 15.0, 2.0) / large_scale_gain(self.cfg, 15.0, 1.0), 2.0)

    def test_reference_value(self):
        r = math.sqrt(449)
        rcs = 100.0 / 22
        expected = rcs * self.cfg.wavelength_m ** 2 / ((4 * math.pi) ** 3 * r ** 4)
        gain = large_scale_gain(self.cfg, r, rcs)
        self.assertAlmostEqual(gain / expected, 1.0)
        self.assertAlmostEqual(gain / 2.8366e-13, 1.0, delta=0.001)

    def test_rejects_nonpositive_range(self):
        with self.assertRaises(ValueError):
            large_scale_gain(self.cfg, 0.0, 1.0)
