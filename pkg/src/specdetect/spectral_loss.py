"""Differentiable spectral penalty against a reference radial profile.

The penalty is the binary cross entropy between an image's normalized
azimuthal power profile and a fixed reference profile averaged from real
material, skipping the DC bin (both profiles are exactly 1 there, where
the cross entropy is undefined).  Everything runs at the image's native
profile length M//2; no resampling sits on the differentiable path.

The gradient with respect to pixels is exact: the cross entropy and the
DC normalization are differentiated by hand, the per-bin weights are
spread back over their rings, and the remaining linear DFT layer turns
that weighted conjugate spectrum back into pixel space with one forward
transform.  Where a profile value is clamped, the subgradient 0 is used.
"""

import csv
import os
from dataclasses import dataclass

import numpy as np

from . import spectrum

CLAMP_LO = 1e-8
CLAMP_HI = 1.0 - 1e-7

__all__ = [
    "CLAMP_LO", "CLAMP_HI",
    "ReferenceProfile", "LossBreakdown",
    "mean_real_profile", "clamped_profile",
    "spectral_bce", "spectral_loss_value_and_grad",
    "finite_difference_residual", "combine_loss",
    "save_reference", "load_reference",
]


@dataclass
class ReferenceProfile:
    values: np.ndarray
    n_source: int


@dataclass
class LossBreakdown:
    generator_loss: float
    spectral_loss: float
    lam: float
    final: float


def _profile_values(p) -> np.ndarray:
    if isinstance(p, ReferenceProfile):
        return np.asarray(p.values, dtype=float)
    return np.asarray(p, dtype=float)


def mean_real_profile(real_profiles) -> ReferenceProfile:
    """Componentwise mean of normalized profiles, clamped into [1e-8, 1].

    Accepts plain arrays or FeatureVector-like objects with a ``values``
    attribute; all inputs must share one length.
    """
    rows = [np.asarray(getattr(p, "values", p), dtype=float) for p in real_profiles]
    if not rows:
        raise ValueError("need at least one profile")
    length = rows[0].size
    if any(r.ndim != 1 or r.size != length for r in rows):
        raise ValueError("profiles must be 1D and of equal length")
    mean = np.vstack(rows).mean(axis=0)
    return ReferenceProfile(values=np.clip(mean, CLAMP_LO, 1.0), n_source=len(rows))


def clamped_profile(img) -> np.ndarray:
    """Native-length normalized profile with the loss-path clamp applied."""
    x = spectrum._as_image(img)
    if x.shape[0] != x.shape[1]:
        raise ValueError(f"image must be square, got shape {x.shape}")
    ai = spectrum.azimuthal_integral(spectrum.power_spectrum(spectrum.fft2(x)))
    return np.clip(spectrum.normalize_ai(ai), CLAMP_LO, CLAMP_HI)


def spectral_bce(ai_out, ref) -> float:
    """Binary cross entropy over bins 1..L-1, averaged with divisor L-1.

    Both arguments must already be clamped strictly inside (0, 1) away
    from the endpoints (DC bin excepted; it never enters the sum).
    """
    out = _profile_values(ai_out)
    rv = _profile_values(ref)
    if out.shape != rv.shape:
        raise ValueError(f"profile length mismatch: {out.size} vs {rv.size}")
    if out.size < 2:
        raise ValueError("profiles need at least 2 bins")
    o, r = out[1:], rv[1:]
    terms = r * np.log(o) + (1.0 - r) * np.log(1.0 - o)
    return float(-terms.sum() / (out.size - 1))


def spectral_loss_value_and_grad(img, ref: ReferenceProfile):
    """Penalty value and its exact pixel gradient.

    The reference must have the image's native profile length (side//2).
    Returns (loss, grad) with grad shaped like the image.  The image's
    profile is clamped into [CLAMP_LO, CLAMP_HI] before the cross entropy;
    clamped bins contribute zero gradient.
    """
    x = spectrum._as_image(img)
    side = x.shape[0]
    if x.shape[0] != x.shape[1]:
        raise ValueError(f"image must be square, got shape {x.shape}")
    refv = _profile_values(ref)
    nbins = side // 2
    if refv.size != nbins:
        raise ValueError(
            f"reference length {refv.size} does not match native profile length {nbins}"
        )

    fcoef = np.fft.fft2(x)
    power = spectrum.power_spectrum(fcoef)
    ai = spectrum.azimuthal_integral(power)
    if ai[0] <= 0:
        raise spectrum.DegenerateSpectrumError("DC power is zero, cannot normalize")
    norm = ai / ai[0]
    clamped = np.clip(norm, CLAMP_LO, CLAMP_HI)
    loss = spectral_bce(clamped, refv)

    # d loss / d clamped profile; DC bin never enters the sum
    dldc = np.zeros(nbins)
    dldc[1:] = -(refv[1:] / clamped[1:] - (1.0 - refv[1:]) / (1.0 - clamped[1:])) / (nbins - 1)
    active = (norm > CLAMP_LO) & (norm < CLAMP_HI)
    dlda = np.where(active, dldc, 0.0)

    # quotient rule through the DC normalization a_k = AI_k / AI_0
    gbin = np.zeros(nbins)
    gbin[1:] = dlda[1:] / ai[0]
    gbin[0] = -float(dlda[1:] @ ai[1:]) / ai[0] ** 2

    # spread bin weights over their rings, then undo the DC-centering shift
    idx = spectrum.radial_bin_grid(side)
    weights = np.zeros((side, side))
    inside = idx < nbins
    weights[inside] = gbin[idx[inside]]
    weights = np.fft.ifftshift(weights)

    # d|F|^2/dx chains into one forward transform of the weighted conjugate
    grad = 2.0 * np.fft.fft2(weights * np.conj(fcoef)).real
    return loss, grad


def _active_bins(img) -> np.ndarray:
    """Bins whose normalized value sits strictly inside the clamp interval."""
    x = np.asarray(img, dtype=float)
    ai = spectrum.azimuthal_integral(spectrum.power_spectrum(np.fft.fft2(x)))
    norm = ai / ai[0]
    return (norm > CLAMP_LO) & (norm < CLAMP_HI)


def finite_difference_residual(img, ref: ReferenceProfile, h: float = 1e-5) -> float:
    """Worst relative gap between the analytic gradient and central differences.

    Pixels whose +-h perturbation flips any clamp decision are skipped;
    the analytic subgradient is not comparable across that boundary.
    """
    x = np.array(img, dtype=float)
    _, grad = spectral_loss_value_and_grad(x, ref)
    base = _active_bins(x)
    worst = 0.0
    for i, j in np.ndindex(x.shape):
        xp = x.copy()
        xp[i, j] += h
        xm = x.copy()
        xm[i, j] -= h
        if not (np.array_equal(_active_bins(xp), base)
                and np.array_equal(_active_bins(xm), base)):
            continue
        numeric = (spectral_loss_value_and_grad(xp, ref)[0]
                   - spectral_loss_value_and_grad(xm, ref)[0]) / (2.0 * h)
        denom = max(abs(numeric), abs(grad[i, j]), 1e-12)
        worst = max(worst, abs(numeric - grad[i, j]) / denom)
    return worst


def combine_loss(generator_loss: float, spectral: float, lam: float) -> LossBreakdown:
    """Total objective: generator term plus lam times the spectral penalty."""
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    return LossBreakdown(
        generator_loss=float(generator_loss),
        spectral_loss=float(spectral),
        lam=float(lam),
        final=float(generator_loss) + float(lam) * float(spectral),
    )


def save_reference(ref: ReferenceProfile, path) -> None:
    """Persist a reference profile as a single CSV data row."""
    path = os.fspath(path)
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n_source"] + [f"v{i}" for i in range(ref.values.size)])
        writer.writerow([ref.n_source] + [format(v, ".17g") for v in ref.values])
    os.replace(tmp, path)


def load_reference(path) -> ReferenceProfile:
    """Read a reference profile written by save_reference; exact round trip."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        row = next(reader, None)
        if header is None or row is None or header[:1] != ["n_source"] or \
                len(row) != len(header):
            raise ValueError(f"{path}: malformed reference profile file")
        return ReferenceProfile(values=np.array(row[1:], dtype=float),
                                n_source=int(row[0]))
