import math
from types import SimpleNamespace

import numpy as np
from django.test import SimpleTestCase

from frontend.array import BackscatterTruth, backscatter_truth, design_beamformers
from frontend.synthesis import frame_rng, synthesize_frame, synthesize_frames
from scene.config import SimConfig
from scene.kinematics import draw_betas, truth_table
from scene.vehicle import default_vehicle
from waveform.golay import training_field

from .delays import (
    DelaySet, NoTargetDetected, SearchWindowError, correlate_frame, detect_delays, detect_for_config,
    detection_threshold, full_lag_range,
)
from .doppler import (
    doppler_difference_and_propagate, doppler_raw, doppler_raw_matrix, lower_median,
    midpoint_denominators, tracked_wrap_counts, wrap_correct,
)
from .lse import (
    LeastSquaresSolver, RankDeficientSymbolMatrix, build_symbol_matrix, frame_coefficients,
    lse_coeffs,
)
from .results import EstimateSummary, estimate_all
from .velocity import GeometryViolation, estimate_velocity, speed_radicand, truth_speed


def default_scene(cfg):
    scatterers = default_vehicle(cfg)
    truth = truth_table(cfg, scatterers, draw_betas(cfg.seed, len(scatterers)))
    return truth, backscatter_truth(cfg, truth, design_beamformers(cfg, truth))


def static_truth(ells, num_frames=1, nu=0.0):
    """Scatterers held at fixed sampled delays with a constant Doppler."""
    ells = np.asarray(ells, dtype=np.int64)
    return SimpleNamespace(ell=np.repeat(ells[:, None], num_frames, axis=1),
                           nu=np.full((len(ells), num_frames), float(nu)),
                           num_frames=num_frames)


def delay_set(ells):
    ells = np.asarray(ells, dtype=np.int64)
    return DelaySet(ells=ells, ell_max_idx=0, peaks=np.ones(len(ells)), threshold=0.0)


def wrapped(theta):
    """Principal value in (-pi, pi]."""
    value = np.angle(np.exp(1j * np.asarray(theta, dtype=float)))
    return np.where(value == -np.pi, np.pi, value)


class DetectionTests(SimpleTestCase):
    def setUp(self):
        self.preamble = training_field()

    def test_noiseless_single_scatterer(self):
        cfg = SimConfig(frames=10, noiseless=True)
        truth = static_truth([248])
        backscatter = BackscatterTruth(h=np.array([0.4 + 0.3j]), array_gain=np.ones(1))
        frame = synthesize_frame(cfg, truth, backscatter, 0, frame_rng(cfg.seed, 0), self.preamble)
        delays = detect_for_config(frame, self.preamble.s512, cfg)
        self.assertEqual(delays.ells.tolist(), [248])
        self.assertEqual(delays.ell_max, 248)

    def test_two_scatterers_ten_samples_apart(self):
        cfg = SimConfig(frames=10, noiseless=True)
        truth = static_truth([300, 310])
        backscatter = BackscatterTruth(h=np.array([1.0, 0.5j]), array_gain=np.ones(2))
        frame = synthesize_frame(cfg, truth, backscatter, 0, frame_rng(cfg.seed, 0), self.preamble)
        delays = detect_delays(frame, self.preamble.s512, 0.0, 40)
        self.assertEqual(delays.ells.tolist(), [300, 310])
        self.assertEqual(delays.ell_max, 300)
        self.assertAlmostEqual(delays.peaks[1] / delays.peaks[0], 0.5)

    def test_noise_only_frame_has_no_target(self):
        cfg = SimConfig(frames=10)
        truth = static_truth([248])
        silent = BackscatterTruth(h=np.zeros(1, dtype=complex), array_gain=np.ones(1))
        frame = synthesize_frame(cfg, truth, silent, 0, frame_rng(cfg.seed, 0), self.preamble)
        with self.assertRaises(NoTargetDetected):
            detect_for_config(frame, self.preamble.s512, cfg)

    def test_search_window_must_fit_the_frame(self):
        cfg = SimConfig(frames=10, noiseless=True)
        truth = static_truth([248])
        backscatter = BackscatterTruth(h=np.ones(1, dtype=complex), array_gain=np.ones(1))
        frame = synthesize_frame(cfg, truth, backscatter, 0, frame_rng(cfg.seed, 0), self.preamble)
        with self.assertRaises(SearchWindowError):
            detect_delays(frame, self.preamble.s512, 0.0, 5000)

    def test_threshold_rules(self):
        cfg = SimConfig()
        self.assertEqual(detection_threshold(cfg, 2.0), 1024.0)
        calibrated = cfg.with_overrides(threshold_rule='calibrated', false_alarm_kappa=5.0)
        self.assertAlmostEqual(detection_threshold(calibrated, 2.0), 10.0 * math.sqrt(512))

    def test_noiseless_default_scene_recovers_every_delay(self):
        cfg = SimConfig(frames=10, noiseless=True)
        truth, backscatter = default_scene(cfg)
        frame = synthesize_frame(cfg, truth, backscatter, 0, frame_rng(cfg.seed, 0), self.preamble)
        delays = detect_for_config(frame, self.preamble.s512, cfg)
        self.assertEqual(delays.ells.tolist(), truth.delay_set(0))

    def test_noisy_default_scene_finds_most_delays(self):
        for seed in (2020, 7, 11):
            cfg = SimConfig(frames=10, seed=seed)
            truth, backscatter = default_scene(cfg)
            frame = synthesize_frame(cfg, truth, backscatter, 0, frame_rng(seed, 0), self.preamble)
            found = set(detect_for_config(frame, self.preamble.s512, cfg).ells.tolist())
            expected = set(truth.delay_set(0))
            hits = len(found & expected)
            f1 = 2 * hits / (len(found) + len(expected))
            self.assertGreaterEqual(f1, 0.85, f'seed {seed}')

    def test_single_noisy_scatterer_matches_the_exhaustive_argmax(self):
        cfg = SimConfig(frames=10)
        rng = np.random.default_rng(64)
        for seed in range(20):
            ell = int(rng.integers(260, 400))
            # about 20 dB per sample over the default noise floor
            h = 1e-4 * np.exp(2j * np.pi * rng.uniform())
            backscatter = BackscatterTruth(h=np.array([h]), array_gain=np.ones(1))
            frame = synthesize_frame(cfg, static_truth([ell]), backscatter, 0, frame_rng(seed, 0),
                                     self.preamble)
            lags = full_lag_range(frame, self.preamble.s512)
            best = int(lags[np.argmax(np.abs(correlate_frame(frame, self.preamble.s512, lags)))])
            delays = detect_for_config(frame, self.preamble.s512, cfg)
            self.assertEqual(delays.ells.tolist(), [best], f'seed {seed}')
            self.assertEqual(best, ell, f'seed {seed}')


class SymbolMatrixTests(SimpleTestCase):
    def setUp(self):
        self.preamble = training_field()
        self.s = self.preamble.samples

    def test_single_delay_is_the_preamble(self):
        S = build_symbol_matrix(delay_set([250]), self.preamble)
        self.assertEqual(S.shape, (3328, 1))
        np.testing.assert_array_equal(S[:, 0], self.s)

    def test_columns_are_shifted_copies(self):
        S = build_symbol_matrix(delay_set([250, 253, 260]), self.preamble)
        self.assertEqual(S.shape, (3328 + 10, 3))
        np.testing.assert_array_equal(S[3:3 + 3328, 1], self.s)
        np.testing.assert_array_equal(S[:3, 1], 0)
        np.testing.assert_array_equal(S[10:, 2], self.s)

    def test_gram_diagonal_is_the_training_length(self):
        S = build_symbol_matrix(delay_set([240, 241, 250]), self.preamble).astype(float)
        np.testing.assert_allclose(np.diag(S.T @ S), 3328)

    def test_delays_must_increase(self):
        with self.assertRaises(ValueError):
            build_symbol_matrix(delay_set([250, 250]), self.preamble)


class LeastSquaresTests(SimpleTestCase):
    def setUp(self):
        self.preamble = training_field()

    def test_static_noiseless_frame_is_recovered_exactly(self):
        cfg = SimConfig(frames=10, noiseless=True)
        ells = [300, 305, 330]
        h = np.array([0.3 - 0.1j, -0.7j, 1.2 + 0.4j])
        truth = static_truth(ells)
        backscatter = BackscatterTruth(h=h, array_gain=np.ones(3))
        frame = synthesize_frame(cfg, truth, backscatter, 0, frame_rng(cfg.seed, 0), self.preamble)
        delays = delay_set(ells)
        S = build_symbol_matrix(delays, self.preamble)
        estimate = lse_coeffs(S, frame, delays)
        np.testing.assert_allclose(estimate.h_hat, cfg.sample_amplitude * h, rtol=1e-10)

    def test_random_instances(self):
        rng = np.random.default_rng(5)
        for _ in range(5):
            ells = np.sort(rng.choice(np.arange(200, 260), size=6, replace=False))
            S = build_symbol_matrix(delay_set(ells), self.preamble)
            h = rng.standard_normal(6) + 1j * rng.standard_normal(6)
            np.testing.assert_allclose(lse_coeffs(S, S @ h).h_hat, h, rtol=1e-10, atol=1e-12)

    def test_default_scene_with_zero_doppler(self):
        cfg = SimConfig(frames=10, noiseless=True)
        truth, backscatter = default_scene(cfg)
        static = static_truth(truth.ell[:, 0])
        frame = synthesize_frame(cfg, static, backscatter, 0, frame_rng(cfg.seed, 0), self.preamble)
        delays = detect_for_config(frame, self.preamble.s512, cfg)
        S = build_symbol_matrix(delays, self.preamble)
        h_hat = lse_coeffs(S, frame, delays).h_hat
        order = np.argsort(truth.ell[:, 0])
        expected = cfg.sample_amplitude * backscatter.h[order]
        np.testing.assert_allclose(h_hat, expected, rtol=1e-9)

    def test_doppler_drift_stays_small_on_the_first_frame(self):
        cfg = SimConfig(frames=10, noiseless=True)
        truth, backscatter = default_scene(cfg)
        frame = synthesize_frame(cfg, truth, backscatter, 0, frame_rng(cfg.seed, 0), self.preamble)
        delays = detect_for_config(frame, self.preamble.s512, cfg)
        S = build_symbol_matrix(delays, self.preamble)
        h_hat = lse_coeffs(S, frame, delays).h_hat
        expected = cfg.sample_amplitude * backscatter.h[np.argsort(truth.ell[:, 0])]
        relative = np.abs(h_hat - expected) / np.abs(expected)
        self.assertLess(relative.max(), 0.05)

    def test_noisy_residual_is_orthogonal_to_the_columns(self):
        cfg = SimConfig(frames=10)
        truth, backscatter = default_scene(cfg)
        frame = synthesize_frame(cfg, truth, backscatter, 0, frame_rng(cfg.seed, 0), self.preamble)
        delays = delay_set(truth.delay_set(0))
        S = build_symbol_matrix(delays, self.preamble)
        y = frame.segment(delays.first, delays.first + S.shape[0] - 1)
        h_hat = lse_coeffs(S, frame, delays).h_hat
        residual = S.T.astype(float) @ (y - S @ h_hat)
        self.assertLess(np.linalg.norm(residual), 1e-8 * np.linalg.norm(y))

    def test_scaling_both_frames_scales_the_estimate_not_the_doppler(self):
        cfg = SimConfig(frames=10)
        truth, backscatter = default_scene(cfg)
        frames = synthesize_frames(cfg, truth, backscatter, preamble=self.preamble)
        delays = delay_set(truth.delay_set(0))
        solver = LeastSquaresSolver(build_symbol_matrix(delays, self.preamble), delays.ells)
        alpha = 0.7 - 1.3j
        start, stop = delays.first, 3327 + delays.last
        h0, h5 = (solver.solve(frames[m].segment(start, stop)) for m in (0, 5))
        g0, g5 = (solver.solve(alpha * frames[m].segment(start, stop)) for m in (0, 5))
        np.testing.assert_allclose(g0, alpha * h0, rtol=1e-10)
        np.testing.assert_allclose(g5, alpha * h5, rtol=1e-10)
        np.testing.assert_allclose(doppler_raw(g5, g0, 5, delays, cfg), doppler_raw(h5, h0, 5, delays, cfg),
                                   rtol=1e-9, atol=1e-6)

    def test_dependent_columns_are_named(self):
        s = self.preamble.samples.astype(float)
        with self.assertRaises(RankDeficientSymbolMatrix) as ctx:
            LeastSquaresSolver(np.column_stack([s, s]), ells=[10, 11])
        self.assertEqual(ctx.exception.pair, (10, 11))

    def test_sample_count_must_match(self):
        S = build_symbol_matrix(delay_set([250]), self.preamble)
        with self.assertRaises(ValueError):
            LeastSquaresSolver(S).solve(np.zeros(100))

    def test_frame_coefficients_are_constant_without_doppler(self):
        cfg = SimConfig(frames=5, noiseless=True)
        truth = static_truth([300, 320], num_frames=5)
        backscatter = BackscatterTruth(h=np.array([1.0, 0.5 - 0.5j]), array_gain=np.ones(2))
        frames = synthesize_frames(cfg, truth, backscatter, preamble=self.preamble)
        delays = delay_set([300, 320])
        solver = LeastSquaresSolver(build_symbol_matrix(delays, self.preamble), delays.ells)
        H = frame_coefficients(solver, frames, delays, 3328)
        self.assertEqual(H.shape, (2, 5))
        np.testing.assert_allclose(H, np.repeat(H[:, :1], 5, axis=1), rtol=1e-10)


class RawDopplerTests(SimpleTestCase):
    def setUp(self):
        self.cfg = SimConfig(frames=10)
        self.delays = delay_set([300])

    def test_denominators(self):
        D = midpoint_denominators(self.delays, 10, self.cfg)
        midpoint = (300 + 300 + 3327) / 2
        self.assertAlmostEqual(D[0], 1 / (2 * np.pi * midpoint * self.cfg.symbol_period_s))
        self.assertTrue(np.all(D > 0))
        self.assertTrue(np.all(np.diff(D) < 0))

    def test_equal_coefficients_give_zero(self):
        h = np.array([0.3 + 0.4j])
        np.testing.assert_array_equal(doppler_raw(h, h, 3, self.delays, self.cfg), [0.0])

    def test_opposite_coefficients_sit_on_the_positive_branch(self):
        h = np.array([0.3 + 0.4j])
        D_3 = midpoint_denominators(self.delays, 4, self.cfg)[3]
        np.testing.assert_allclose(doppler_raw(-h, h, 3, self.delays, self.cfg), [np.pi * D_3])

    def test_zero_reference_is_flagged(self):
        nu = doppler_raw(np.array([1.0, 1.0j]), np.array([0.0, 1.0]), 2, delay_set([300, 310]), self.cfg)
        self.assertTrue(np.isnan(nu[0]))
        self.assertTrue(np.isfinite(nu[1]))

    def test_phase_ratio_of_synthesized_frames(self):
        cfg = SimConfig(frames=10, noiseless=True)
        nu = 700.0
        truth = static_truth([300], num_frames=10, nu=nu)
        backscatter = BackscatterTruth(h=np.array([0.8 - 0.2j]), array_gain=np.ones(1))
        preamble = training_field()
        frames = synthesize_frames(cfg, truth, backscatter, preamble=preamble)
        solver = LeastSquaresSolver(build_symbol_matrix(self.delays, preamble), self.delays.ells)
        H = frame_coefficients(solver, frames, self.delays, 3328)
        raw = doppler_raw_matrix(H, self.delays, cfg)
        D = midpoint_denominators(self.delays, 10, cfg)
        phase = 2 * np.pi * nu * np.arange(10) * cfg.frame_len * cfg.symbol_period_s
        np.testing.assert_allclose(raw[0], phase * D, rtol=1e-8, atol=1e-9)
        # the midpoint model underestimates by mid / (mid + m N_f) at most
        self.assertAlmostEqual(raw[0, 9] / nu, 1.0, delta=0.02)


class WrapCorrectionTests(SimpleTestCase):
    def setUp(self):
        cfg = SimConfig()
        D = midpoint_denominators(delay_set([300]), cfg.num_frames, cfg)
        self.m, self.i = cfg.num_frames - 1, 6
        self.D_m, self.D_prev = D[self.m], D[self.m - self.i]

    def measure(self, nu):
        nu = np.atleast_1d(np.asarray(nu, dtype=float))
        return wrapped(nu / self.D_m) * self.D_m, wrapped(nu / self.D_prev) * self.D_prev

    def test_no_wrap_leaves_values_unchanged(self):
        nu = np.array([3.0, -5.0, 0.0])
        raw_m, raw_prev = self.measure(nu)
        corrected_m, corrected_prev, M_bar, _ = wrap_correct(raw_m, raw_prev, self.m, self.i,
                                                             self.D_m, self.D_prev)
        np.testing.assert_array_equal(M_bar, 0)
        np.testing.assert_allclose(corrected_m, nu)
        np.testing.assert_allclose(corrected_prev, nu)

    def test_three_injected_wraps(self):
        nu = (2 * np.pi * 3 + 0.3) * self.D_m
        raw_m, raw_prev = self.measure(nu)
        corrected_m, corrected_prev, M_bar, _ = wrap_correct(raw_m, raw_prev, self.m, self.i,
                                                             self.D_m, self.D_prev)
        self.assertEqual(M_bar[0], 3)
        self.assertAlmostEqual(corrected_m[0], nu, delta=2 * np.pi * self.D_m * 0.5)
        self.assertAlmostEqual(corrected_prev[0], nu, delta=2 * np.pi * self.D_prev * 0.5)

    def test_negative_branch(self):
        nu = -(2 * np.pi * 4 + 0.2) * self.D_m
        raw_m, raw_prev = self.measure(nu)
        corrected_m, _, M_bar, _ = wrap_correct(raw_m, raw_prev, self.m, self.i, self.D_m, self.D_prev)
        self.assertEqual(M_bar[0], -4)
        self.assertAlmostEqual(corrected_m[0], nu, places=6)

    def test_corrected_values_need_no_further_correction(self):
        nu = (2 * np.pi * 7 + 0.5) * self.D_m
        raw_m, raw_prev = self.measure(nu)
        corrected_m, corrected_prev, _, _ = wrap_correct(raw_m, raw_prev, self.m, self.i,
                                                         self.D_m, self.D_prev)
        _, _, again, _ = wrap_correct(corrected_m, corrected_prev, self.m, self.i,
                                      self.D_m, self.D_prev)
        np.testing.assert_array_equal(again, 0)

    def test_agrees_with_brute_force_search(self):
        rng = np.random.default_rng(2020)
        candidates = np.arange(-50, 51)
        agreed = checked = 0
        for _ in range(1000):
            theta_m = 2 * np.pi * (rng.integers(-50, 51) + rng.uniform(-0.5, 0.5))
            nu = theta_m * self.D_m
            theta_prev = nu / self.D_prev
            phi_m, phi_prev = float(wrapped(theta_m)), float(wrapped(theta_prev))
            _, _, M_bar, c = wrap_correct(np.array([phi_m * self.D_m]), np.array([phi_prev * self.D_prev]),
                                          self.m, self.i, self.D_m, self.D_prev)
            estimate = np.sign(phi_m or 1.0) * c[0] / (2 * np.pi * (self.D_prev - self.D_m))
            boundary = (np.sign(phi_m) != np.sign(phi_prev)
                        or round(theta_m / (2 * np.pi)) != round(theta_prev / (2 * np.pi))
                        or abs(estimate - round(estimate)) >= 0.4)
            if boundary:
                continue
            mismatch = np.abs((phi_m + 2 * np.pi * candidates) * self.D_m
                              - (phi_prev + 2 * np.pi * candidates) * self.D_prev)
            oracle = candidates[np.argmin(mismatch)]
            checked += 1
            agreed += int(M_bar[0] == oracle)
        self.assertGreater(checked, 500)
        self.assertGreaterEqual(agreed / checked, 0.99)

    def test_gap_must_be_positive(self):
        with self.assertRaises(ValueError):
            wrap_correct(np.zeros(1), np.zeros(1), 5, 0, self.D_m, self.D_prev)


class PropagationTests(SimpleTestCase):
    def raw_from(self, nu, cfg, delays):
        D = midpoint_denominators(delays, nu.shape[1], cfg)
        raw = wrapped(nu / D[None, :]) * D[None, :]
        raw[:, 0] = 0.0
        return raw

    def test_linear_history_without_wraps(self):
        cfg = SimConfig(frames=20)
        delays = delay_set([300, 310])
        nu = np.tile(100.0 + 2.0 * np.arange(20), (2, 1))
        doppler = doppler_difference_and_propagate(self.raw_from(nu, cfg, delays), 6, cfg, delays)
        self.assertAlmostEqual(doppler.delta_med, 2.0, places=6)
        self.assertEqual(doppler.anchor_m, 19)
        np.testing.assert_allclose(doppler.corrected, nu, atol=1e-6)

    def test_constant_doppler_with_wraps(self):
        cfg = SimConfig(frames=200)
        delays = delay_set([300])
        nu = np.full((1, 200), 2100.0)
        for strategy in ('tracked', 'pairwise'):
            with self.subTest(strategy=strategy):
                doppler = doppler_difference_and_propagate(self.raw_from(nu, cfg, delays), 6, cfg,
                                                           delays, strategy=strategy)
                self.assertGreater(doppler.wrap.M_bar[0], 0)
                self.assertAlmostEqual(doppler.delta_med, 0.0, places=6)
                np.testing.assert_allclose(doppler.corrected, nu, rtol=1e-9)

    def test_tracked_counts_follow_a_drifting_history(self):
        cfg = SimConfig(frames=200)
        delays = delay_set([300, 310])
        m = np.arange(200)
        nu = np.vstack([5000.0 - 3.0 * m, -4000.0 + 4.0 * m])
        D = midpoint_denominators(delays, 200, cfg)
        theta = nu / D[None, :]
        raw = wrapped(theta) * D[None, :]
        counts = tracked_wrap_counts(raw, D)
        np.testing.assert_array_equal(counts, np.rint((theta - wrapped(theta)) / (2 * np.pi)))
        self.assertGreater(counts[0, -1], 5)
        self.assertLess(counts[1, -1], -3)
        np.testing.assert_allclose(raw + 2 * np.pi * counts * D[None, :], nu, rtol=1e-9)

    def test_corrected_matrix_is_affine_in_the_frame_index(self):
        cfg = SimConfig(frames=40)
        delays = delay_set([300, 310, 320])
        nu = np.vstack([900.0 - 2.5 * np.arange(40), -400.0 - 2.0 * np.arange(40),
                        30.0 - 3.0 * np.arange(40)])
        doppler = doppler_difference_and_propagate(self.raw_from(nu, cfg, delays), 6, cfg, delays)
        corrected = doppler.corrected
        scale = np.abs(corrected).max()
        for u, v in ((39, 0), (17, 5), (3, 33)):
            np.testing.assert_allclose(corrected[:, u] - corrected[:, v], (u - v) * doppler.delta_med,
                                       rtol=0, atol=1e-12 * scale)

    def test_gap_must_be_smaller_than_the_frame_count(self):
        cfg = SimConfig(frames=20)
        with self.assertRaises(ValueError):
            doppler_difference_and_propagate(np.zeros((1, 5)), 5, cfg, delay_set([300]))

    def test_unknown_strategy(self):
        cfg = SimConfig(frames=20)
        with self.assertRaises(ValueError):
            doppler_difference_and_propagate(np.zeros((1, 20)), 6, cfg, delay_set([300]), strategy='guess')

    def test_lower_median(self):
        self.assertEqual(lower_median([3.0, 1.0, 2.0, 4.0]), 2.0)
        self.assertEqual(lower_median([5.0, np.nan, 1.0]), 1.0)
        with self.assertRaises(ValueError):
            lower_median([np.nan])


class VelocityTests(SimpleTestCase):
    def setUp(self):
        self.cfg = SimConfig()

    def test_equal_ends_give_zero_speed(self):
        doppler = SimpleNamespace(corrected=np.full((3, 10), 500.0))
        self.assertEqual(estimate_velocity(doppler, self.cfg).v_hat, 0.0)

    def test_rising_doppler_violates_the_geometry(self):
        doppler = SimpleNamespace(corrected=np.tile(np.linspace(0.0, 50.0, 10), (2, 1)))
        with self.assertRaises(GeometryViolation) as ctx:
            estimate_velocity(doppler, self.cfg)
        self.assertEqual(ctx.exception.scatterers, (0, 1))

    def test_known_speed_is_recovered(self):
        cfg = self.cfg
        drop = 2 * cfg.observation_s * 40.0 ** 2 / (cfg.wavelength_m * cfg.reference_range_m)
        corrected = np.array([[1000.0, 1000.0 - drop], [-200.0, -200.0 - drop], [0.0, 30.0]])
        estimate = estimate_velocity(SimpleNamespace(corrected=corrected), cfg)
        self.assertAlmostEqual(estimate.v_hat, 40.0, places=6)
        self.assertEqual(estimate.excluded, (2,))
        self.assertTrue(np.isnan(estimate.per_scatterer[2]))
        self.assertAlmostEqual(speed_radicand(1000.0, 1000.0 - drop, cfg), 1600.0)

    def test_small_angle_model_error_on_the_default_scene(self):
        cfg = SimConfig()
        truth, _ = default_scene(cfg)
        self.assertAlmostEqual(truth_speed(truth, cfg) / cfg.speed_mps, 1.0, delta=0.05)


class EstimationChainTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.cfg = SimConfig(frames=60, noiseless=True)
        cls.truth, cls.backscatter = default_scene(cls.cfg)
        cls.frames = synthesize_frames(cls.cfg, cls.truth, cls.backscatter)
        cls.result = estimate_all(cls.frames, cls.cfg)

    def test_shapes(self):
        result = self.result
        self.assertEqual(result.delays.ells.tolist(), self.truth.delay_set(0))
        self.assertEqual(result.H.shape, (22, 60))
        self.assertEqual(result.doppler.corrected.shape, (22, 60))
        np.testing.assert_array_equal(result.coeffs.h_hat, result.H[:, 0])

    def test_anchor_doppler_tracks_the_truth(self):
        order = np.argsort(self.truth.ell[:, 0])
        truth_nu = self.truth.nu[order, -1]
        error = np.abs(self.result.doppler.corrected[:, -1] - truth_nu)
        self.assertLess(error.max(), 0.05 * np.abs(truth_nu).max())

    def test_summary_json(self):
        summary = self.result.summary()
        copy = EstimateSummary.from_json(summary.to_json())
        self.assertEqual(copy.n_hat_p, 22)
        np.testing.assert_array_equal(copy.delays, summary.delays)
        np.testing.assert_array_equal(copy.h_hat, summary.h_hat)
        np.testing.assert_array_equal(copy.doppler_corrected, summary.doppler_corrected)
        self.assertEqual(copy.v_hat, summary.v_hat)
