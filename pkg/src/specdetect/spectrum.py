"""2D discrete Fourier analysis and 1D azimuthal power profiles.

The central reduction: an image's power spectrum is folded down to one
real value per radial frequency by summing over rings around the DC bin.
Profiles are plain 1D float arrays with the DC bin at index 0; for a
square side-M image the raw profile has M // 2 bins.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DegenerateSpectrumError",
    "ProfileStats",
    "dft2",
    "fft2",
    "power_spectrum",
    "radial_bin_grid",
    "azimuthal_integral",
    "normalize_ai",
    "ai_stats",
]


class DegenerateSpectrumError(ValueError):
    """Profile cannot be normalized: the DC bin carries no power."""


@dataclass
class ProfileStats:
    """Per-bin sample mean and population variance over a set of profiles."""

    mean: np.ndarray
    variance: np.ndarray
    count: int


def _as_image(a, name="image"):
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2D, got shape {arr.shape}")
    if arr.shape[0] < 2 or arr.shape[1] < 2:
        raise ValueError(f"{name} must be at least 2x2, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def dft2(img: np.ndarray) -> np.ndarray:
    """Direct evaluation of the unnormalized 2D DFT.

    Sums the defining double series through precomputed exponential
    factors; no fast-transform machinery is involved, so this is the
    independent reference for :func:`fft2`.  Cost is quadratic in pixel
    count: intended for oracles and tiny inputs only.
    """
    x = _as_image(img)
    m, n = x.shape
    row = np.exp(-2j * np.pi * np.outer(np.arange(m), np.arange(m)) / m)
    col = np.exp(-2j * np.pi * np.outer(np.arange(n), np.arange(n)) / n)
    return row @ x @ col.T


def fft2(img: np.ndarray) -> np.ndarray:
    """Fast 2D DFT for arbitrary shapes (mixed radix, Bluestein for primes)."""
    return np.fft.fft2(_as_image(img))


def power_spectrum(spec: np.ndarray) -> np.ndarray:
    """Squared coefficient magnitudes with DC shifted to (rows//2, cols//2)."""
    s = np.asarray(spec)
    if s.ndim != 2:
        raise ValueError(f"spectrum must be 2D, got shape {s.shape}")
    return np.abs(np.fft.fftshift(s)) ** 2


_BIN_CACHE: dict[int, np.ndarray] = {}


def radial_bin_grid(side: int) -> np.ndarray:
    """Rounded Euclidean distance of every pixel from the DC-centered origin.

    Center is (side//2, side//2), matching the shift in power_spectrum.
    Cached per side; the grid is read-only shared state.
    """
    grid = _BIN_CACHE.get(side)
    if grid is None:
        ax = np.arange(side, dtype=float) - side // 2
        grid = np.rint(np.hypot(ax[:, None], ax[None, :])).astype(np.int64)
        grid.setflags(write=False)
        _BIN_CACHE[side] = grid
    return grid


def azimuthal_integral(power: np.ndarray, mean: bool = False) -> np.ndarray:
    """Collapse a DC-centered power matrix onto rounded radial bins.

    Bin k sums all entries whose distance from the center rounds to k (a
    discrete radial integral); ``mean=True`` divides each bin by its ring
    population instead.  Output length is side//2; larger rounded radii
    occur only toward the corners and are dropped.
    """
    p = np.asarray(power, dtype=float)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise ValueError(f"power matrix must be square, got shape {p.shape}")
    side = p.shape[0]
    nbins = side // 2
    idx = radial_bin_grid(side)
    keep = idx < nbins
    sums = np.bincount(idx[keep], weights=p[keep], minlength=nbins)
    if not mean:
        return sums
    counts = np.bincount(idx[keep], minlength=nbins)
    return sums / counts


def normalize_ai(ai: np.ndarray) -> np.ndarray:
    """Scale a profile by its DC bin so values[0] == 1 exactly."""
    a = np.asarray(ai, dtype=float)
    if a.ndim != 1 or a.size == 0:
        raise ValueError("profile must be a non-empty 1D array")
    if a[0] <= 0:
        raise DegenerateSpectrumError(
            "cannot normalize profile: DC power is zero (all-zero image?)"
        )
    return a / a[0]


def ai_stats(profiles) -> ProfileStats:
    """Componentwise mean and population variance of equal-length profiles."""
    rows = [np.asarray(p, dtype=float) for p in profiles]
    if not rows:
        raise ValueError("need at least one profile")
    length = rows[0].size
    if any(r.ndim != 1 or r.size != length for r in rows):
        raise ValueError("profiles must be 1D and of equal length")
    arr = np.vstack(rows)
    return ProfileStats(arr.mean(axis=0), arr.var(axis=0), len(rows))
