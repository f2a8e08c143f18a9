import io
import json
import math
import tempfile
from pathlib import Path
from types import SimpleNamespace

import numpy as np
import openpyxl
from django.contrib.auth.models import User
from django.core.exceptions import ImproperlyConfigured
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase, tag
from django.urls import reverse

from estimation.delays import NoTargetDetected
from estimation.results import EstimateSummary
from frontend.array import backscatter_truth, design_beamformers
from scene.config import SimConfig
from scene.kinematics import draw_betas, truth_table
from scene.vehicle import default_vehicle

from .cli import EXIT_CONFIG, EXIT_NO_TARGET
from .models import RunRecord, SweepRecord, record_sweep
from .pipeline import (
    RunManifest, StageError, image_from_summary, run_e2e, run_pipeline, stage, truth_frame,
)
from .reports import build_run_report
from .scoring import (
    METRIC_NAMES, delay_set_f1, doppler_rmse, failed_metrics, image_peaks, score,
)
from .sweep import SEED_MASK, splitmix64, sweep, sweep_workbook_bytes, trial_seed, write_sweep_tables


def truth_estimates(cfg):
    """Truth, and an estimate summary that reports the truth exactly."""
    scatterers = default_vehicle(cfg)
    truth = truth_table(cfg, scatterers, draw_betas(cfg.seed, len(scatterers)))
    backscatter = backscatter_truth(cfg, truth, design_beamformers(cfg, truth))
    order = np.argsort(truth.ell[:, 0])
    summary = EstimateSummary(delays=truth.ell[order, 0], h_hat=cfg.sample_amplitude * backscatter.h[order],
                              doppler_corrected=truth.nu[order], delta_med=0.0, v_hat=cfg.speed_mps)
    return truth, summary


class TempDirMixin:
    def make_dir(self):
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        return Path(tmp.name)


class ScoringTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.cfg = SimConfig(frames=64)
        cls.truth, cls.summary = truth_estimates(cls.cfg)

    def test_truth_scores_perfectly(self):
        products = image_from_summary(self.summary, self.cfg, workers=1)
        metrics = score(self.truth, self.summary, products.image, self.cfg, omega=products.omega)
        self.assertEqual(tuple(metrics), METRIC_NAMES)
        self.assertEqual(metrics['delay_set_f1'], 1.0)
        self.assertAlmostEqual(metrics['doppler_rmse_hz'], 0.0)
        self.assertEqual(metrics['v_err_pct'], 0.0)
        self.assertEqual(metrics['image_peak_match_count'], 22)

    def test_one_missed_scatterer(self):
        partial = SimpleNamespace(delays=self.summary.delays[1:],
                                  doppler_corrected=self.summary.doppler_corrected[1:], v_hat=38.0)
        metrics = score(self.truth, partial, None, self.cfg)
        self.assertAlmostEqual(metrics['delay_set_f1'], 2 * (21 / 22) / (1 + 21 / 22))
        self.assertAlmostEqual(metrics['delay_set_f1'], 0.977, places=3)
        self.assertAlmostEqual(metrics['v_err_pct'], 5.0)
        self.assertEqual(metrics['image_peak_match_count'], 0)

    def test_f1_edges(self):
        self.assertEqual(delay_set_f1([], [1, 2]), 0.0)
        self.assertEqual(delay_set_f1([5], [1, 2]), 0.0)
        self.assertAlmostEqual(delay_set_f1([1, 3], [1, 2]), 0.5)

    def test_rmse_without_matching_delays(self):
        self.assertTrue(math.isnan(doppler_rmse([1], np.zeros((1, 64)), self.truth)))

    def test_rmse_of_a_constant_offset(self):
        shifted = self.summary.doppler_corrected + 3.0
        self.assertAlmostEqual(doppler_rmse(self.summary.delays, shifted, self.truth), 3.0)

    def test_image_peaks(self):
        grid = np.zeros((2, 9))
        grid[0, [2, 6]] = [1.0, 0.6]
        grid[0, 4] = 0.2
        self.assertEqual(image_peaks(grid), {(0, 2), (0, 6)})

    def test_failed_metrics(self):
        metrics = failed_metrics()
        self.assertEqual(tuple(metrics), METRIC_NAMES)
        self.assertEqual(metrics['v_err_pct'], 100.0)
        self.assertTrue(math.isnan(metrics['doppler_rmse_hz']))


class StageTests(SimpleTestCase):
    def test_failures_name_their_stage(self):
        with self.assertRaises(StageError) as ctx:
            with stage('estimate'):
                raise NoTargetDetected('nothing above threshold')
        self.assertEqual(ctx.exception.stage, 'estimate')
        self.assertIsInstance(ctx.exception.cause, NoTargetDetected)
        self.assertEqual(str(ctx.exception), 'estimate: nothing above threshold')

    def test_configuration_errors_pass_through(self):
        with self.assertRaises(ImproperlyConfigured):
            with stage('simulate'):
                raise ImproperlyConfigured('bad')

    def test_inner_stage_wins(self):
        with self.assertRaises(StageError) as ctx:
            with stage('outer'):
                with stage('inner'):
                    raise ValueError('x')
        self.assertEqual(ctx.exception.stage, 'inner')

    def test_manifest_payload_drops_nan(self):
        manifest = RunManifest(config={'seed': 1}, seed=1, metrics=failed_metrics())
        payload = manifest.to_payload()
        self.assertIsNone(payload['metrics']['doppler_rmse_hz'])
        json.dumps(payload, allow_nan=False)

    def test_truth_table_export(self):
        truth, _ = truth_estimates(SimConfig(frames=10))
        table = truth_frame(truth)
        self.assertEqual(list(table.columns), ['p', 'ell0', 'nu0_hz', 'nu_last_hz', 'r0_m'])
        self.assertEqual(len(table), 22)


class ReportTests(SimpleTestCase):
    def test_report_is_a_stable_pdf(self):
        manifest = {'config': SimConfig().as_dict(), 'seed': 2020,
                    'paths': {'manifest': 'manifest.json'}, 'metrics': failed_metrics()}
        manifest['metrics']['doppler_rmse_hz'] = None
        first = build_run_report(manifest)
        self.assertTrue(first.startswith(b'%PDF'))
        self.assertEqual(first, build_run_report(manifest))


class SweepSeedTests(SimpleTestCase):
    def test_splitmix_reference_value(self):
        self.assertEqual(splitmix64(0), 0xE220A8397B1DCDAF)

    def test_trial_seeds(self):
        self.assertEqual(trial_seed(0, 0), 0xE220A8397B1DCDAF & SEED_MASK)
        seeds = {trial_seed(2020, n) for n in range(100)}
        self.assertEqual(len(seeds), 100)
        self.assertTrue(all(0 <= s <= SEED_MASK for s in seeds))
        self.assertEqual(trial_seed(2020, 5), trial_seed(2020, 5))


class SweepTests(TempDirMixin, SimpleTestCase):
    def test_rejects_unknown_and_reserved_settings(self):
        with self.assertRaises(ImproperlyConfigured):
            sweep(param='warp_factor', values=[1], cfg=SimConfig(frames=20))
        with self.assertRaises(ImproperlyConfigured):
            sweep(param='seed', values=[1], cfg=SimConfig(frames=20))

    def test_rejects_empty_values_and_trials(self):
        with self.assertRaises(ValueError):
            sweep(param='i_gap', values=[], cfg=SimConfig(frames=20))
        with self.assertRaises(ValueError):
            sweep(param='i_gap', values=[6], trials=0, cfg=SimConfig(frames=20))

    def test_tables(self):
        cfg = SimConfig(frames=30, noiseless=True)
        result = sweep(param='i_gap', values=['3', '6'], trials=2, cfg=cfg, workers=2)
        self.assertEqual(result.values, [3, 6])
        trials = result.trials
        self.assertEqual(len(trials), 4)
        self.assertEqual(trials['index'].tolist(), [0, 1, 2, 3])
        self.assertEqual(trials['value'].tolist(), [3, 3, 6, 6])
        self.assertEqual(trials['seed'].tolist(), [trial_seed(cfg.seed, n) for n in range(4)])
        self.assertEqual(set(trials['param']), {'i_gap'})
        self.assertEqual(result.summary['value'].tolist(), [3, 6])
        self.assertEqual(result.summary['trials'].tolist(), [2, 2])
        self.assertEqual(result.summary['delay_set_f1'].tolist(), [1.0, 1.0])

        out = self.make_dir()
        paths = write_sweep_tables(result, out)
        self.assertEqual(paths['trials'].name, 'sweep.csv')
        self.assertTrue(paths['summary'].exists())
        workbook = openpyxl.load_workbook(io.BytesIO(sweep_workbook_bytes(result)))
        self.assertEqual(workbook.sheetnames, ['Summary', 'Trials'])
        self.assertEqual(workbook['Summary']['A1'].value, 'SWEEP OF i_gap')
        self.assertEqual(workbook['Trials'].max_row, 5)

    def test_failed_trials_are_recorded(self):
        cfg = SimConfig(frames=20, tx_power_dbm=-200.0)
        result = sweep(param='i_gap', values=[6], trials=2, cfg=cfg, workers=1)
        self.assertEqual(result.trials['status'].tolist(), ['estimate: NoTargetDetected'] * 2)
        self.assertEqual(result.summary['failures'].tolist(), [2])
        self.assertEqual(result.summary['v_err_pct'].tolist(), [100.0])


class EndToEndTests(TempDirMixin, SimpleTestCase):
    def test_identical_runs_write_identical_artifacts(self):
        cfg = SimConfig(frames=40, seed=99, tx_power_dbm=50.0)
        first, second = self.make_dir(), self.make_dir()
        manifest, outcome = run_e2e(cfg=cfg, out_dir=first, workers=1)
        run_e2e(cfg=cfg, out_dir=second, workers=3)

        names = sorted(p.name for p in first.iterdir())
        self.assertEqual(names, sorted(p.name for p in second.iterdir()))
        for name in names:
            self.assertEqual((first / name).read_bytes(), (second / name).read_bytes(), name)

        self.assertEqual(set(manifest.paths.values()), set(names))
        self.assertIn('frames.bin', names)
        self.assertEqual(outcome.products.image.grid.shape, (176, 40))
        self.assertTrue(outcome.products.image.flipped)
        payload = json.loads((first / 'manifest.json').read_text(encoding='utf-8'))
        self.assertEqual(payload['seed'], 99)
        self.assertEqual(tuple(payload['metrics']), METRIC_NAMES)
        self.assertEqual(payload['config']['frames'], 40)

    def test_noiseless_run_finds_every_delay(self):
        outcome = run_pipeline(SimConfig(frames=30, noiseless=True), workers=2)
        self.assertEqual(outcome.metrics['delay_set_f1'], 1.0)
        self.assertEqual(outcome.summary.n_hat_p, 22)

    def test_frames_must_exceed_the_gap(self):
        with self.assertRaisesMessage(ImproperlyConfigured, 'M must exceed i_gap'):
            run_e2e(out_dir=self.make_dir(), frames=6, i_gap=6)

    def test_silent_scene_fails_in_estimation(self):
        with self.assertRaises(StageError) as ctx:
            run_pipeline(SimConfig(frames=20, tx_power_dbm=-200.0), workers=1)
        self.assertEqual(ctx.exception.stage, 'estimate')
        self.assertIsInstance(ctx.exception.cause, NoTargetDetected)


class CommandTests(TempDirMixin, TestCase):
    def config_file(self, text):
        path = self.make_dir() / 'run.cfg'
        path.write_text(text, encoding='utf-8')
        return str(path)

    def test_stage_commands_chain_through_one_directory(self):
        out = self.make_dir()
        config = self.config_file('frames = 20\nnoiseless = true\n')
        for name in ('simulate', 'estimate', 'image'):
            call_command(name, config=config, out=str(out), stdout=io.StringIO())
        for artifact in ('run.cfg', 'truth.csv', 'frames.bin', 'estimates.json', 'image.pgm',
                         'image_flipped.pgm', 'image.csv', 'axes.json', 'range_profile.csv'):
            self.assertTrue((out / artifact).exists(), artifact)
        summary = EstimateSummary.load(out / 'estimates.json')
        self.assertEqual(summary.n_hat_p, 22)

    def test_csv_frames(self):
        out = self.make_dir()
        config = self.config_file('frames = 12\nnoiseless = true\n')
        call_command('simulate', config=config, out=str(out), frame_format='csv', stdout=io.StringIO())
        call_command('estimate', config=config, out=str(out), frame_format='csv', stdout=io.StringIO())
        self.assertTrue((out / 'frames.csv').exists())
        self.assertTrue((out / 'estimates.json').exists())

    def test_e2e_records_the_run(self):
        out = self.make_dir()
        config = self.config_file('frames = 30\nwrite_frames = false\n')
        call_command('e2e', config=config, out=str(out), noiseless=True, record=True, label='smoke',
                     stdout=io.StringIO())
        self.assertTrue((out / 'manifest.json').exists())
        self.assertTrue((out / 'report.pdf').exists())
        self.assertFalse((out / 'frames.bin').exists())
        run = RunRecord.objects.get()
        self.assertEqual(run.label, 'smoke')
        self.assertEqual(run.n_hat_p, 22)
        self.assertEqual(run.delay_set_f1, 1.0)

    def test_configuration_error_exit_code(self):
        config = self.config_file('frames = 6\ni_gap = 6\n')
        with self.assertRaises(CommandError) as ctx:
            call_command('e2e', config=config, out=str(self.make_dir()), stdout=io.StringIO())
        self.assertEqual(ctx.exception.returncode, EXIT_CONFIG)

    def test_no_target_exit_code(self):
        config = self.config_file('frames = 20\ntx_power_dbm = -200\n')
        with self.assertRaises(CommandError) as ctx:
            call_command('e2e', config=config, out=str(self.make_dir()), stdout=io.StringIO())
        self.assertEqual(ctx.exception.returncode, EXIT_NO_TARGET)

    def test_missing_frame_file_is_a_stage_failure(self):
        with self.assertRaises(CommandError) as ctx:
            call_command('estimate', out=str(self.make_dir()), stdout=io.StringIO())
        self.assertEqual(ctx.exception.returncode, 3)
        self.assertIn('read_frames', str(ctx.exception))

    def test_sweep_command(self):
        out = self.make_dir()
        config = self.config_file('frames = 20\nnoiseless = true\n')
        call_command('sweep', config=config, out=str(out), param='i_gap', values=['3,6'],
                     xlsx=True, record=True, stdout=io.StringIO())
        for artifact in ('sweep.csv', 'sweep_summary.csv', 'sweep.xlsx'):
            self.assertTrue((out / artifact).exists(), artifact)
        record = SweepRecord.objects.get()
        self.assertEqual(record.values, ['3', '6'])
        self.assertEqual(record.trials.count(), 2)

    def test_sweep_command_errors(self):
        with self.assertRaises(CommandError) as ctx:
            call_command('sweep', param='warp_factor', values=['1'], out=str(self.make_dir()),
                         stdout=io.StringIO())
        self.assertEqual(ctx.exception.returncode, EXIT_CONFIG)
        with self.assertRaises(CommandError) as ctx:
            call_command('sweep', param='i_gap', out=str(self.make_dir()), stdout=io.StringIO())
        self.assertEqual(ctx.exception.returncode, EXIT_CONFIG)


class RecordTests(TestCase):
    def test_sweep_records_store_nan_as_null(self):
        result = sweep(param='i_gap', values=[6], trials=1, cfg=SimConfig(frames=20, tx_power_dbm=-200.0))
        record = record_sweep(result, {'frames': 20})
        trial = record.trials.get()
        self.assertEqual(trial.status, 'estimate: NoTargetDetected')
        self.assertIsNone(trial.doppler_rmse_hz)
        self.assertEqual(record.trials_per_value, 1)

    def test_run_from_manifest(self):
        manifest = RunManifest(config={'seed': 3}, seed=3, metrics=failed_metrics())
        run = RunRecord.from_manifest(manifest, '/tmp/run-3', label='empty')
        self.assertIsNone(run.doppler_rmse_hz)
        self.assertEqual(run.metrics()['v_err_pct'], 100.0)


class ViewTests(TestCase):
    def setUp(self):
        self.user = User.objects.create_user(username='analyst', password='secret')
        self.run = RunRecord.objects.create(
            label='baseline', seed=2020, output_dir='/nonexistent/run-2020', config={'seed': 2020},
            n_hat_p=22, delay_set_f1=1.0, doppler_rmse_hz=0.5, v_hat_mps=39.5, v_err_pct=1.25,
            image_peak_match_count=21,
        )
        self.client.force_login(self.user)

    def test_login_is_required(self):
        self.client.logout()
        response = self.client.get(reverse('runs:run_list'))
        self.assertEqual(response.status_code, 302)

    def test_run_list(self):
        response = self.client.get(reverse('runs:run_list'))
        runs = response.json()['runs']
        self.assertEqual(len(runs), 1)
        self.assertEqual(runs[0]['metrics']['v_err_pct'], 1.25)
        filtered = self.client.get(reverse('runs:run_list'), {'status': 'failed'})
        self.assertEqual(filtered.json()['runs'], [])

    def test_run_detail_rebuilds_a_missing_manifest(self):
        response = self.client.get(reverse('runs:run_detail', args=[self.run.id]))
        payload = response.json()
        self.assertEqual(payload['manifest']['seed'], 2020)
        self.assertEqual(payload['manifest']['metrics']['image_peak_match_count'], 21)
        self.assertEqual(self.client.get(reverse('runs:run_detail', args=[999])).status_code, 404)

    def test_exports(self):
        response = self.client.get(reverse('runs:export_runs_csv'))
        self.assertEqual(response['Content-Type'], 'text/csv')
        lines = response.content.decode().splitlines()
        self.assertTrue(lines[0].startswith('Run,Label,Seed,Status,Scatterers,delay_set_f1'))
        self.assertEqual(len(lines), 2)
        report = self.client.get(reverse('runs:run_report_pdf', args=[self.run.id]))
        self.assertTrue(report.content.startswith(b'%PDF'))

    def test_sweep_export(self):
        sweep_record = SweepRecord.objects.create(param='i_gap', values=['6'], base_seed=1)
        sweep_record.trials.create(index=0, value='6', trial=0, seed=5, v_err_pct=2.0)
        response = self.client.get(reverse('runs:export_sweep_csv', args=[sweep_record.id]))
        lines = response.content.decode().splitlines()
        self.assertEqual(len(lines), 2)
        self.assertTrue(lines[1].startswith('i_gap,6,0,5,ok'))

    def test_only_get_is_allowed(self):
        response = self.client.post(reverse('runs:run_list'))
        self.assertEqual(response.status_code, 405)


@tag('slow')
class DefaultScenarioTests(SimpleTestCase):
    """Full-length CPI of the default scene, shared by the assertions below."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.cfg = SimConfig(noiseless=True)
        cls.outcome = run_pipeline(cls.cfg, workers=4)

    def test_every_delay_is_found(self):
        self.assertEqual(self.outcome.metrics['delay_set_f1'], 1.0)

    def test_doppler_accuracy(self):
        truth = self.outcome.scene.truth
        order = np.argsort(truth.ell[:, 0])
        corrected = self.outcome.summary.doppler_corrected
        scale = np.abs(truth.nu).max()
        last = np.abs(corrected[:, -1] - truth.nu[order, -1])
        first = np.abs(corrected[:, 0] - truth.nu[order, 0])
        self.assertLess(last.max(), 0.01 * scale)
        self.assertLess(first.max(), 0.02 * scale)

    def test_speed(self):
        self.assertLess(self.outcome.metrics['v_err_pct'], 5.0)

    def test_image_peaks_follow_the_scatterers(self):
        self.assertGreaterEqual(self.outcome.metrics['image_peak_match_count'], 20)
        self.assertEqual(self.outcome.products.image.grid.shape, (176, 1291))

    def test_pairwise_wraps_lose_the_speed(self):
        outcome = run_pipeline(self.cfg.with_overrides(wrap_strategy='pairwise'), workers=4)
        self.assertGreater(outcome.metrics['v_err_pct'], 50.0)
        self.assertLess(outcome.metrics['image_peak_match_count'], 20)


@tag('slow')
class NoisyScenarioTests(SimpleTestCase):
    def test_default_link_budget(self):
        outcome = run_pipeline(SimConfig(), workers=4)
        self.assertGreaterEqual(outcome.metrics['delay_set_f1'], 0.85)
        self.assertLess(outcome.metrics['v_err_pct'], 10.0)

    def test_speed_error_falls_with_transmit_power(self):
        result = sweep(param='tx_power_dbm', values=[10.0, 20.0, 30.0], trials=20,
                       cfg=SimConfig(frames=400, write_frames=False), workers=4)
        errors = result.summary['v_err_pct'].tolist()
        self.assertGreaterEqual(errors[0], errors[1])
        self.assertGreaterEqual(errors[1], errors[2])


@tag('slow')
class SeededScenarioTests(SimpleTestCase):
    """Twenty noisy default runs, seeded like sweep trials, with the calibrated threshold."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.cfg = SimConfig(write_frames=False)
        result = sweep(param='threshold_rule', values=['calibrated'], trials=20, cfg=cls.cfg, workers=4)
        cls.trials = result.trials

    def test_trials_use_the_sweep_seeds(self):
        expected = [trial_seed(self.cfg.seed, n) for n in range(20)]
        self.assertEqual(self.trials['seed'].tolist(), expected)
        self.assertEqual((self.trials['status'] == 'ok').sum(), 20)

    def test_delay_set_is_recovered_on_most_seeds(self):
        self.assertGreaterEqual((self.trials['delay_set_f1'] == 1.0).sum(), 18)

    def test_median_speed(self):
        median = float(np.median(self.trials['v_hat_mps']))
        self.assertLess(abs(median - 40.0) / 40.0, 0.10)

    def test_image_peaks_on_most_seeds(self):
        self.assertGreaterEqual((self.trials['image_peak_match_count'] >= 20).sum(), 18)
