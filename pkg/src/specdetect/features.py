"""Image to fixed-length spectral feature pipeline.

grayscale -> center square crop -> FFT -> power spectrum -> azimuthal
profile -> DC normalization -> linear resampling to a fixed bin count.
The result is invariant to global intensity scaling and has the same
length for every input resolution, which is what lets one classifier
serve mixed-size material.
"""

from dataclasses import dataclass

import numpy as np

from . import spectrum

GRAY_WEIGHTS = (0.299, 0.587, 0.114)  # BT.601 luma
DEFAULT_FEATURE_LEN = 300

__all__ = [
    "GRAY_WEIGHTS",
    "DEFAULT_FEATURE_LEN",
    "FeatureVector",
    "to_grayscale",
    "center_crop_square",
    "resample_profile",
    "extract_feature",
]


@dataclass
class FeatureVector:
    values: np.ndarray
    source_id: str = ""
    label: int | None = None
    group: str | None = None


def to_grayscale(raster) -> np.ndarray:
    """BT.601 luma for RGB rasters; grayscale input passes through.

    Accepts an HxW array, an HxWx3 array, or a sequence of three equally
    shaped channel planes in R, G, B order.
    """
    if isinstance(raster, (list, tuple)):
        if len(raster) != 3:
            raise ValueError(f"expected 3 channel planes, got {len(raster)}")
        chans = [np.asarray(c, dtype=float) for c in raster]
        if chans[0].shape != chans[1].shape or chans[0].shape != chans[2].shape:
            raise ValueError("channel shape mismatch")
        r, g, b = chans
    else:
        arr = np.asarray(raster, dtype=float)
        if arr.ndim == 2:
            return arr
        if arr.ndim == 3 and arr.shape[2] == 3:
            r, g, b = arr[..., 0], arr[..., 1], arr[..., 2]
        else:
            raise ValueError(f"expected HxW or HxWx3 raster, got shape {arr.shape}")
    return GRAY_WEIGHTS[0] * r + GRAY_WEIGHTS[1] * g + GRAY_WEIGHTS[2] * b


def center_crop_square(img) -> np.ndarray:
    """Crop to the largest centered square; offsets round toward the top left."""
    x = np.asarray(img, dtype=float)
    if x.ndim != 2:
        raise ValueError(f"expected 2D image, got shape {x.shape}")
    side = min(x.shape)
    r0 = (x.shape[0] - side) // 2
    c0 = (x.shape[1] - side) // 2
    return x[r0:r0 + side, c0:c0 + side]


def resample_profile(profile, target_len: int) -> np.ndarray:
    """Linearly re-grid a profile onto target_len points spanning [0, L-1].

    Endpoints are preserved; resampling to the original length is the
    identity.
    """
    p = np.asarray(profile, dtype=float)
    if p.ndim != 1 or p.size < 2:
        raise ValueError("profile must be 1D with at least 2 bins")
    if target_len < 2:
        raise ValueError("target_len must be at least 2")
    return np.interp(np.linspace(0.0, p.size - 1.0, target_len), np.arange(p.size), p)


def extract_feature(raster, target_len: int = DEFAULT_FEATURE_LEN, source_id: str = "",
                    label: int | None = None, group: str | None = None) -> FeatureVector:
    """Run the full pipeline on a decoded raster.

    Deterministic; raises DegenerateSpectrumError for all-zero input.  The
    cropped square must be at least 4 pixels on a side so the raw profile
    has two bins to resample.
    """
    gray = to_grayscale(raster)
    square = center_crop_square(gray)
    prof = spectrum.azimuthal_integral(spectrum.power_spectrum(spectrum.fft2(square)))
    values = resample_profile(spectrum.normalize_ai(prof), target_len)
    return FeatureVector(values=values, source_id=source_id, label=label, group=group)
