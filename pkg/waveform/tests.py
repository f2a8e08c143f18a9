import io

import numpy as np
from django.core.management import call_command
from django.test import SimpleTestCase

from .golay import (
    S512_OFFSET, GolayParameterError, TRAINING_LEN, assemble_preamble, dot11ad_pair,
    generate_golay_pair, training_field, xcorr_s512,
)


class GolayPairTests(SimpleTestCase):
    def test_length_two_base_pair(self):
        pair = generate_golay_pair(2, [1], [+1])
        np.testing.assert_array_equal(pair.a, [1, 1])
        np.testing.assert_array_equal(pair.b, [1, -1])
        total = pair.autocorrelation_sum()
        self.assertEqual(total[1], 4)
        self.assertEqual(total[2], 0)

    def test_dot11ad_pair_is_complementary_at_every_lag(self):
        pair = dot11ad_pair()
        total = pair.autocorrelation_sum()
        self.assertEqual(len(total), 255)
        expected = np.zeros(255, dtype=np.int64)
        expected[127] = 256
        np.testing.assert_array_equal(total, expected)
        self.assertTrue(set(np.unique(pair.a)) <= {-1, 1})
        self.assertTrue(set(np.unique(pair.b)) <= {-1, 1})

    def test_every_length_four_pair_has_zero_sidelobes(self):
        for delays in ([1, 2], [2, 1]):
            for w1 in (-1, 1):
                for w2 in (-1, 1):
                    pair = generate_golay_pair(4, delays, [w1, w2])
                    total = pair.autocorrelation_sum()
                    self.assertEqual(total[3], 8)
                    self.assertFalse(np.any(np.delete(total, 3)))

    def test_generation_is_deterministic(self):
        first, second = dot11ad_pair(), dot11ad_pair()
        np.testing.assert_array_equal(first.a, second.a)
        np.testing.assert_array_equal(first.b, second.b)

    def test_rejects_bad_parameters(self):
        with self.assertRaises(GolayParameterError):
            generate_golay_pair(6, [1, 2], [1, 1])
        with self.assertRaises(GolayParameterError):
            generate_golay_pair(4, [1, 1], [1, 1])
        with self.assertRaises(GolayParameterError):
            generate_golay_pair(4, [1, 4], [1, 1])
        with self.assertRaises(GolayParameterError):
            generate_golay_pair(4, [1, 2], [1, 0])


class PreambleTests(SimpleTestCase):
    def setUp(self):
        self.pair = dot11ad_pair()
        self.preamble = assemble_preamble(self.pair)

    def test_layout(self):
        a, b = self.pair.a, self.pair.b
        samples = self.preamble.samples
        self.assertEqual(len(self.preamble), TRAINING_LEN)
        self.assertEqual(len(self.preamble), 3328)
        np.testing.assert_array_equal(samples[:128], a)
        np.testing.assert_array_equal(samples[2048:2176], -a)
        np.testing.assert_array_equal(self.preamble.s512, np.concatenate([-a, -b, -a, b]))

    def test_samples_are_read_only(self):
        with self.assertRaises(ValueError):
            self.preamble.samples[0] = 0

    def test_rejects_short_pair(self):
        with self.assertRaises(GolayParameterError):
            assemble_preamble(generate_golay_pair(64, [1, 8, 2, 4, 16, 32], [-1, -1, -1, -1, 1, -1]))


class CorrelationTests(SimpleTestCase):
    def setUp(self):
        self.preamble = training_field()
        self.s512 = self.preamble.s512

    def test_self_inner_product(self):
        R = xcorr_s512(self.s512, self.s512.astype(complex), [0])
        self.assertAlmostEqual(R[0], 512)

    def test_conjugates_the_received_samples(self):
        y = 1j * self.s512.astype(complex)
        R = xcorr_s512(self.s512, y, [0])
        self.assertAlmostEqual(R[0], -512j)

    def test_conjugate_linearity(self):
        rng = np.random.default_rng(7)
        y1 = rng.standard_normal(700) + 1j * rng.standard_normal(700)
        y2 = rng.standard_normal(700) + 1j * rng.standard_normal(700)
        alpha, beta = 0.3 - 1.2j, -2.0 + 0.5j
        lags = np.arange(0, 189)
        combined = xcorr_s512(self.s512, alpha * y1 + beta * y2, lags)
        expected = (np.conj(alpha) * xcorr_s512(self.s512, y1, lags)
                    + np.conj(beta) * xcorr_s512(self.s512, y2, lags))
        np.testing.assert_allclose(combined, expected, atol=1e-9)

    def test_zero_sidelobe_window(self):
        y = self.preamble.samples.astype(complex)
        lags = np.arange(S512_OFFSET - 64, S512_OFFSET + 129)
        R = np.abs(xcorr_s512(self.s512, y, lags))
        peak = R[64]
        self.assertAlmostEqual(peak, 512)
        self.assertLess(np.max(np.delete(R, 64)) / peak, 1e-12)

    def test_rejects_lags_beyond_the_samples(self):
        with self.assertRaises(ValueError):
            xcorr_s512(self.s512, np.zeros(600, dtype=complex), [0, 100])
        with self.assertRaises(ValueError):
            xcorr_s512(self.s512, np.zeros(600, dtype=complex), [-1])


class DumpPreambleCommandTests(SimpleTestCase):
    def test_writes_one_column_csv(self):
        out = io.StringIO()
        call_command('dump_preamble', stdout=out)
        lines = out.getvalue().splitlines()
        self.assertEqual(lines[0], 'sample')
        self.assertEqual(len(lines), 3329)
        self.assertTrue(set(lines[1:]) <= {'1', '-1'})
