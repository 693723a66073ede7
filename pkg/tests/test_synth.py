"""Synthetic corpus generator tests."""

import numpy as np
import pytest

from specdetect import synth
from specdetect.spectrum import azimuthal_integral, fft2, normalize_ai, power_spectrum
from specdetect.synth import SynthConfig, build_corpus, gen_fake, gen_real


def mean_profile(img):
    return normalize_ai(azimuthal_integral(power_spectrum(fft2(img)), mean=True))


def sum_profile(img):
    return normalize_ai(azimuthal_integral(power_spectrum(fft2(img))))


class TestConfig:
    def test_rejects_odd_or_tiny_sizes(self):
        with pytest.raises(ValueError):
            SynthConfig(size=15)
        with pytest.raises(ValueError):
            SynthConfig(size=8)

    def test_rejects_bad_mode_and_counts(self):
        with pytest.raises(ValueError):
            SynthConfig(fake_mode="upscale")
        with pytest.raises(ValueError):
            SynthConfig(n_real=0)


class TestGenReal:
    def test_deterministic_in_seed_and_index(self):
        cfg = SynthConfig(size=32, seed=9)
        assert (gen_real(cfg, 3) == gen_real(cfg, 3)).all()
        assert not (gen_real(cfg, 3) == gen_real(cfg, 4)).all()

    def test_range_and_shape(self):
        cfg = SynthConfig(size=32, seed=1)
        img = gen_real(cfg, 0)
        assert img.shape == (32, 32)
        assert img.min() >= 0.0 and img.max() <= 255.0

    def test_inverse_transform_is_real(self):
        rng = np.random.default_rng([4, 0])
        field = synth._spectral_field(32, 2.0, rng)
        assert np.abs(field.imag).max() < 1e-9 * max(np.abs(field.real).max(), 1e-30)

    def test_flat_profile_for_exponent_zero(self):
        cfg = SynthConfig(size=32, seed=2, spectral_exponent=0.0)
        profs = np.vstack([mean_profile(gen_real(cfg, i))[1:] for i in range(100)])
        per_bin_mean = profs.mean(axis=0)
        per_bin_std = profs.std(axis=0)
        grand = per_bin_mean.mean()
        assert (np.abs(per_bin_mean - grand) <= 3.0 * per_bin_std + 1e-9).all()

    def test_log_log_slope_matches_exponent(self):
        cfg = SynthConfig(size=64, seed=3, spectral_exponent=2.0)
        slopes = []
        for i in range(20):
            prof = mean_profile(gen_real(cfg, i))
            bins = np.arange(4, 17)
            coef = np.polyfit(np.log(bins), np.log(prof[bins]), 1)
            slopes.append(coef[0])
        assert abs(np.mean(slopes) + 2.0) < 0.3


class TestGenFake:
    def test_upconv_constant_stays_constant(self):
        out = gen_fake(np.full((32, 32), 80.0), "upconv")
        assert np.abs(out - 80.0).max() < 1e-12

    def test_transconv_constant_is_exact_checkerboard(self):
        # the zero-insertion carrier survives the leaky smoothing: output is
        # the exact three-level pattern with mean c/4
        c = 90.0
        out = gen_fake(np.full((32, 32), c), "transconv")
        assert np.allclose(np.unique(np.round(out, 9)),
                           np.round(np.array([c / 9, 2 * c / 9, 4 * c / 9]), 9))
        assert abs(out.mean() - c / 4) < 1e-9

    def test_transconv_raises_high_band(self):
        cfg = SynthConfig(size=64, seed=4)
        real = gen_real(cfg, 0)
        top = slice(24, 32)
        assert sum_profile(gen_fake(real, "transconv"))[top].mean() > \
            sum_profile(real)[top].mean()

    def test_upconv_starves_high_band(self):
        cfg = SynthConfig(size=64, seed=4)
        real = gen_real(cfg, 1)
        top = slice(24, 32)
        assert sum_profile(gen_fake(real, "upconv"))[top].mean() < \
            sum_profile(real)[top].mean()

    def test_direction_consistent_for_every_pair(self):
        cfg = SynthConfig(size=32, seed=5)
        top = slice(12, 16)
        for i in range(20):
            real = gen_real(cfg, i)
            base = sum_profile(real)[top].mean()
            assert sum_profile(gen_fake(real, "transconv"))[top].mean() > base
            assert sum_profile(gen_fake(real, "upconv"))[top].mean() < base

    def test_odd_size_rejected(self):
        with pytest.raises(ValueError):
            gen_fake(np.zeros((15, 15)), "transconv")

    def test_output_size_matches_input(self):
        img = gen_real(SynthConfig(size=32, seed=6), 0)
        assert gen_fake(img, "upconv").shape == img.shape


class TestBuildCorpus:
    def test_counts_and_balanced_labels(self, tmp_path):
        cfg = SynthConfig(n_real=10, n_fake=10, size=16, seed=7)
        manifest = build_corpus(cfg, tmp_path)
        lines = manifest.read_text().strip().splitlines()
        assert lines[0] == "id,path,label,group"
        assert len(lines) == 21
        labels = [line.split(",")[2] for line in lines[1:]]
        assert labels.count("0") == 10 and labels.count("1") == 10
        assert len(list((tmp_path / "real").iterdir())) == 10
        assert len(list((tmp_path / "fake").iterdir())) == 10

    def test_rerun_bitwise_identical(self, tmp_path):
        cfg = SynthConfig(n_real=3, n_fake=3, size=16, seed=8)
        build_corpus(cfg, tmp_path / "a")
        build_corpus(cfg, tmp_path / "b")
        for rel in sorted(p.relative_to(tmp_path / "a")
                          for p in (tmp_path / "a").rglob("*") if p.is_file()):
            assert (tmp_path / "a" / rel).read_bytes() == \
                (tmp_path / "b" / rel).read_bytes(), rel

    def test_fakes_derive_from_unused_reals(self, tmp_path):
        from specdetect.ingest import decode_image
        cfg = SynthConfig(n_real=2, n_fake=2, size=16, seed=9)
        build_corpus(cfg, tmp_path)
        fake0 = decode_image(tmp_path / "fake" / "fake_0000.pgm")
        source = gen_real(cfg, cfg.n_real + 0)
        expected = np.clip(np.rint(gen_fake(source, cfg.fake_mode)), 0, 255)
        assert (fake0 == expected).all()
