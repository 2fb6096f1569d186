import math

import numpy as np
import pytest

from conftest import as_img, make_phantom, make_step, rand_image
from despeckle import (
    MetricReport,
    ParameterError,
    SsimParams,
    add_gaussian_noise,
    epi,
    evaluate,
    gaussian_blur,
    psnr,
    ssim,
)


class TestPsnr:
    def test_identical_images_give_infinity(self):
        img = as_img(rand_image(50, 16, 16))
        assert psnr(img, img) == math.inf

    def test_known_mse(self):
        ref = as_img(np.zeros((10, 10)))
        test = as_img(np.ones((10, 10)))  # MSE exactly 1
        assert math.isclose(psnr(ref, test), 20.0 * math.log10(255.0), rel_tol=1e-12)

    def test_peak_parameter(self):
        ref = as_img(np.zeros((4, 4)))
        test = as_img(np.full((4, 4), 0.5))
        assert math.isclose(psnr(ref, test, peak=1.0), 10.0 * math.log10(1.0 / 0.25), rel_tol=1e-12)

    def test_symmetry(self):
        a = as_img(rand_image(51, 12, 12))
        b = as_img(rand_image(52, 12, 12))
        assert psnr(a, b) == psnr(b, a)

    def test_monotone_in_error(self):
        ref = as_img(np.full((8, 8), 100.0))
        near = as_img(np.full((8, 8), 101.0))
        far = as_img(np.full((8, 8), 110.0))
        assert psnr(ref, near) > psnr(ref, far)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ParameterError):
            psnr(as_img(np.zeros((4, 4))), as_img(np.zeros((4, 5))))

    def test_peak_validation(self):
        img = as_img(np.zeros((4, 4)))
        with pytest.raises(ParameterError):
            psnr(img, img, peak=0.0)


class TestSsim:
    def test_identical_images_give_exactly_one(self):
        img = as_img(rand_image(53, 20, 20))
        assert ssim(img, img) == 1.0

    def test_constant_pair_closed_form(self):
        # zero variance leaves only the luminance term
        x, y = 100.0, 120.0
        c1 = (0.01 * 255.0) ** 2
        want = (2.0 * x * y + c1) / (x * x + y * y + c1)
        got = ssim(as_img(np.full((16, 16), x)), as_img(np.full((16, 16), y)))
        assert math.isclose(got, want, rel_tol=1e-9)

    def test_symmetry(self):
        a = as_img(rand_image(54, 16, 16))
        b = as_img(rand_image(55, 16, 16))
        assert math.isclose(ssim(a, b), ssim(b, a), rel_tol=1e-12)

    def test_bounded(self):
        a = as_img(rand_image(56, 16, 16))
        b = as_img(255.0 - rand_image(56, 16, 16))
        val = ssim(a, b)
        assert -1.0 <= val <= 1.0

    def test_noise_lowers_score(self):
        clean = as_img(make_phantom(side=64))
        mild = add_gaussian_noise(clean, sigma=5.0, seed=60)
        harsh = add_gaussian_noise(clean, sigma=40.0, seed=60)
        assert ssim(clean, mild) > ssim(clean, harsh)
        assert ssim(clean, mild) < 1.0

    def test_window_must_fit(self):
        # default window is 11x11, so a 10-row image cannot be scored
        tiny = as_img(np.zeros((10, 12)))
        with pytest.raises(ParameterError):
            ssim(tiny, tiny)

    def test_window_side_derivation(self):
        assert SsimParams().window_side == 11
        assert SsimParams(window_sigma=1.0).window_side == 7

    def test_params_validation(self):
        with pytest.raises(ParameterError):
            SsimParams(window_sigma=0.0)
        with pytest.raises(ParameterError):
            SsimParams(k1=-0.01)
        with pytest.raises(ParameterError):
            SsimParams(dynamic_range=0.0)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ParameterError):
            ssim(as_img(np.zeros((16, 16))), as_img(np.zeros((16, 17))))


class TestEpi:
    def test_identical_images_score_one(self):
        img = as_img(make_phantom(side=32))
        assert math.isclose(epi(img, img), 1.0, abs_tol=1e-12)

    def test_invariant_to_brightness_offset(self):
        arr = make_phantom(side=32)
        assert math.isclose(
            epi(as_img(arr), as_img(arr + 17.0)), 1.0, abs_tol=1e-12
        )

    def test_constant_image_scores_zero(self):
        flat = as_img(np.full((16, 16), 50.0))
        assert epi(flat, flat) == 0.0

    def test_blur_lowers_edge_preservation(self):
        step = as_img(make_step())
        blurred = gaussian_blur(step, 2.0)
        val = epi(step, blurred)
        assert 0.0 < val < 1.0

    def test_more_blur_scores_lower(self):
        step = as_img(make_step())
        mild = gaussian_blur(step, 0.8)
        strong = gaussian_blur(step, 2.5)
        assert epi(step, mild) > epi(step, strong)

    def test_needs_interior(self):
        with pytest.raises(ParameterError):
            epi(as_img(np.zeros((2, 5))), as_img(np.zeros((2, 5))))


class TestReportAndEvaluate:
    def test_evaluate_bundles_all_three(self):
        ref = as_img(make_phantom(side=64))
        noisy = add_gaussian_noise(ref, sigma=10.0, seed=61)
        report = evaluate(ref, noisy)
        assert report.psnr_db == psnr(ref, noisy)
        assert report.ssim == ssim(ref, noisy)
        assert report.epi == epi(ref, noisy)

    def test_csv_row_formatting(self):
        row = MetricReport(psnr_db=28.1234567, ssim=0.912345649, epi=0.5).csv_row(
            "phantom", "robust-nlm"
        )
        assert row == "phantom,robust-nlm,28.123457,0.912346,0.500000"

    def test_csv_row_infinite_psnr(self):
        row = MetricReport(psnr_db=math.inf, ssim=1.0, epi=1.0).csv_row("x", "nlm")
        assert row == "x,nlm,inf,1.000000,1.000000"

    def test_report_validation(self):
        with pytest.raises(ParameterError):
            MetricReport(psnr_db=math.nan, ssim=0.5, epi=0.5)
        with pytest.raises(ParameterError):
            MetricReport(psnr_db=30.0, ssim=1.5, epi=0.0)
        with pytest.raises(ParameterError):
            MetricReport(psnr_db=30.0, ssim=0.5, epi=-2.0)
