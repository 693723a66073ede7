"""Deterministic synthetic corpora: power-law "real" images and their
"fake" counterparts produced by the two factor-2 up-convolution routes.

Real images are drawn by shaping a random-phase spectrum to a radial
power law and inverse transforming; fakes decimate a real image by two
and blow it back up either by zero insertion (transconv route, leaves
spectral replicas) or bilinear interpolation (upconv route, starves the
high band), followed by a fixed 3x3 binomial smoothing in both cases.
Everything is a pure function of (seed, index).
"""

import csv
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import ingest, resample
from .spectrum import _as_image

# Stand-in for a learned post-upsampling filter; sums to 1.  The taps are
# deliberately leaky at Nyquist: a binomial (1,2,1) kernel has an exact
# zero there and wipes out the very replicas the fakes must retain.
SMOOTH_KERNEL = np.outer([1.0, 4.0, 1.0], [1.0, 4.0, 1.0]) / 36.0

FAKE_MODES = ("transconv", "upconv")

__all__ = ["SynthConfig", "SMOOTH_KERNEL", "FAKE_MODES", "gen_real", "gen_fake", "build_corpus"]


@dataclass
class SynthConfig:
    n_real: int = 10
    n_fake: int = 10
    size: int = 64
    spectral_exponent: float = 2.0
    fake_mode: str = "transconv"
    seed: int = 0

    def __post_init__(self):
        if self.size < 16 or self.size % 2 != 0:
            raise ValueError("size must be even and at least 16")
        if self.n_real < 1 or self.n_fake < 1:
            raise ValueError("counts must be at least 1")
        if self.fake_mode not in FAKE_MODES:
            raise ValueError(f"fake_mode must be one of {FAKE_MODES}")


def _spectral_field(size: int, exponent: float, rng) -> np.ndarray:
    """Inverse transform of a random-phase spectrum with |F| = r^(-exponent/2).

    Phases come from the transform of white noise, so conjugate symmetry
    is inherited and the result is real up to rounding.
    """
    noise_spec = np.fft.fft2(rng.standard_normal((size, size)))
    mag = np.abs(noise_spec)
    unit = np.where(mag > 0, noise_spec / np.where(mag > 0, mag, 1.0), 1.0)
    freq = np.fft.fftfreq(size) * size
    radius = np.hypot(freq[:, None], freq[None, :])
    amp = np.zeros_like(radius)
    nonzero = radius > 0
    amp[nonzero] = radius[nonzero] ** (-exponent / 2.0)
    return np.fft.ifft2(unit * amp)


GRAY_MEAN = 127.5
GRAY_STD = 40.0


def gen_real(cfg: SynthConfig, index: int) -> np.ndarray:
    """Power-law image number `index`, mapped into [0, 255].

    The field is standardized and placed at mean 127.5 with a fixed
    contrast, then clipped.  A per-image min/max stretch would jitter the
    DC-normalized profile scale from image to image; the fixed affine
    keeps class geometry clean.
    """
    rng = np.random.default_rng([cfg.seed, index])
    field = _spectral_field(cfg.size, cfg.spectral_exponent, rng).real
    scale = field.std()
    if scale < 1e-12:
        return np.full((cfg.size, cfg.size), GRAY_MEAN)
    return np.clip(GRAY_MEAN + field * (GRAY_STD / scale), 0.0, 255.0)


def gen_fake(real: np.ndarray, mode: str) -> np.ndarray:
    """Decimate by two, upsample back with the chosen route, then smooth.

    transconv keeps only even-coordinate samples with zeros between them
    before the 3x3 smoothing; upconv fills the gaps bilinearly.  The
    smoothing wraps periodically so the spectral signature is free of
    boundary leakage.  Output size equals input size; the input must
    have even sides.
    """
    x = _as_image(real)
    if x.shape[0] % 2 or x.shape[1] % 2:
        raise ValueError(f"image sides must be even, got shape {x.shape}")
    low = x[::2, ::2]
    if mode == "transconv":
        up = resample.zero_insert_2d(low)
    elif mode == "upconv":
        up = resample.interp_upsample_2d(low, mode="bilinear")
    else:
        raise ValueError(f"fake mode must be one of {FAKE_MODES}")
    return resample.conv2d(up, SMOOTH_KERNEL, padding="periodic")


def build_corpus(cfg: SynthConfig, out_dir) -> Path:
    """Write a labeled image corpus and its manifest; returns the manifest path.

    Layout: out_dir/real/real_NNNN.pgm and out_dir/fake/fake_NNNN.pgm plus
    manifest.csv with columns id,path,label,group (paths relative to the
    manifest).  Fake sources are drawn from indices the real set never
    uses, so the two classes share no underlying image.
    """
    out = Path(out_dir)
    rows = []
    try:
        (out / "real").mkdir(parents=True, exist_ok=True)
        (out / "fake").mkdir(parents=True, exist_ok=True)
        for i in range(cfg.n_real):
            rel = f"real/real_{i:04d}.pgm"
            ingest.write_pgm(out / rel, gen_real(cfg, i))
            rows.append((f"real_{i:04d}", rel, 0, ""))
        for j in range(cfg.n_fake):
            source = gen_real(cfg, cfg.n_real + j)
            rel = f"fake/fake_{j:04d}.pgm"
            ingest.write_pgm(out / rel, gen_fake(source, cfg.fake_mode))
            rows.append((f"fake_{j:04d}", rel, 1, ""))
        manifest = out / "manifest.csv"
        tmp = manifest.with_suffix(".csv.tmp")
        with open(tmp, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["id", "path", "label", "group"])
            writer.writerows(rows)
        os.replace(tmp, manifest)
    except OSError as exc:
        raise OSError(f"cannot write corpus under {out}: {exc}") from exc
    return manifest
