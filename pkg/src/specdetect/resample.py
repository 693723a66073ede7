"""Factor-2 upsampling primitives and same-size 2D convolution.

Both upsamplers keep the input samples at even output coordinates
(out[2j] = in[j]) and fill the following gap: zero insertion writes 0
there, linear interpolation writes the midpoint of the two neighboring
samples.  Leading with the gap instead would only multiply spectra by a
linear phase factor, so power profiles are unaffected by this choice.
"""

import numpy as np

from .spectrum import _as_image

__all__ = [
    "zero_insert_1d",
    "linear_upsample_1d",
    "zero_insert_2d",
    "interp_upsample_2d",
    "conv2d",
]


def _as_signal(a):
    x = np.asarray(a, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ValueError(f"signal must be 1D with at least 2 samples, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("signal contains non-finite values")
    return x


def zero_insert_1d(signal, factor: int = 2) -> np.ndarray:
    """Interleave a zero after every sample (the transposed-convolution grid fill)."""
    if factor != 2:
        raise ValueError("only factor-2 upsampling is supported")
    x = _as_signal(signal)
    out = np.zeros(2 * x.size)
    out[::2] = x
    return out


def linear_upsample_1d(signal, factor: int = 2, boundary: str = "periodic") -> np.ndarray:
    """Interleave midpoint averages: out[2j+1] = (s[j] + s[j+1]) / 2.

    The periodic boundary wraps the last gap back to s[0]; replicate
    repeats the final sample.
    """
    if factor != 2:
        raise ValueError("only factor-2 upsampling is supported")
    x = _as_signal(signal)
    if boundary == "periodic":
        nxt = np.roll(x, -1)
    elif boundary == "replicate":
        nxt = np.concatenate([x[1:], x[-1:]])
    else:
        raise ValueError(f"unknown boundary {boundary!r}")
    out = np.empty(2 * x.size)
    out[::2] = x
    out[1::2] = 0.5 * (x + nxt)
    return out


def zero_insert_2d(img) -> np.ndarray:
    """Zero insertion along both axes; originals land at even coordinates."""
    x = _as_image(img)
    out = np.zeros((2 * x.shape[0], 2 * x.shape[1]))
    out[::2, ::2] = x
    return out


def _linear_up_rows(x):
    # replicate boundary along axis 0
    nxt = np.vstack([x[1:], x[-1:]])
    out = np.empty((2 * x.shape[0], x.shape[1]))
    out[::2] = x
    out[1::2] = 0.5 * (x + nxt)
    return out


def interp_upsample_2d(img, mode: str = "bilinear") -> np.ndarray:
    """Double both axes by pixel duplication (nearest) or separable midpoints (bilinear)."""
    x = _as_image(img)
    if mode == "nearest":
        return np.repeat(np.repeat(x, 2, axis=0), 2, axis=1)
    if mode == "bilinear":
        return _linear_up_rows(_linear_up_rows(x).T).T
    raise ValueError(f"unknown mode {mode!r}")


def conv2d(img, kernel, padding: str = "zero") -> np.ndarray:
    """Same-size sliding-window filtering (cross-correlation, no kernel flip).

    Padding modes: zero, replicate, or periodic (circular wrap, the
    boundary rule under which the spectral identities are exact).
    """
    x = _as_image(img)
    k = np.asarray(kernel, dtype=float)
    if k.ndim != 2 or k.shape[0] != k.shape[1] or k.shape[0] % 2 == 0:
        raise ValueError(f"kernel must be square with odd size, got shape {k.shape}")
    if not np.all(np.isfinite(k)):
        raise ValueError("kernel contains non-finite weights")
    if k.shape[0] > x.shape[0] or k.shape[1] > x.shape[1]:
        raise ValueError("kernel larger than image")
    r = k.shape[0] // 2
    if padding == "zero":
        pad = np.pad(x, r, mode="constant")
    elif padding == "replicate":
        pad = np.pad(x, r, mode="edge")
    elif padding == "periodic":
        pad = np.pad(x, r, mode="wrap")
    else:
        raise ValueError(f"unknown padding {padding!r}")
    h, w = x.shape
    out = np.zeros_like(x)
    for di in range(k.shape[0]):
        for dj in range(k.shape[1]):
            out += k[di, dj] * pad[di:di + h, dj:dj + w]
    return out
