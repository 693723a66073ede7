"""What the two factor-2 up-convolution routes do to the spectrum.

Zero insertion (the transposed-convolution grid fill) copies the whole
baseband into the high frequencies; bilinear interpolation multiplies
the spectrum by a raised cosine and starves the high band instead.  A
3x3 smoothing cannot undo either.  The directional fingerprints below
are what the detector keys on.
"""

from pathlib import Path

from specdetect import synth
from specdetect.resample import conv2d, interp_upsample_2d, zero_insert_2d
from specdetect.spectrum import azimuthal_integral, fft2, normalize_ai, power_spectrum
from specdetect.svgplot import line_chart

OUT = Path("demo_output")
OUT.mkdir(exist_ok=True)


def profile(img):
    return normalize_ai(azimuthal_integral(power_spectrum(fft2(img))))


cfg = synth.SynthConfig(size=64, seed=5)
img = synth.gen_real(cfg, 0)
low = img[::2, ::2]

variants = {
    "original": img,
    "transconv": zero_insert_2d(low),
    "transconv_smoothed": conv2d(zero_insert_2d(low), synth.SMOOTH_KERNEL, "periodic"),
    "upconv": interp_upsample_2d(low, "bilinear"),
    "upconv_smoothed": conv2d(interp_upsample_2d(low, "bilinear"),
                              synth.SMOOTH_KERNEL, "periodic"),
}

top = slice(24, 32)
base = profile(img)[top].mean()
print("mean normalized power over the top-quartile bins (24..31):")
for name, variant in variants.items():
    value = profile(variant)[top].mean()
    marker = "" if name == "original" else (" above" if value > base else " below")
    print(f"  {name:20s} {value:10.3e}{marker}")

series = [{"name": name, "mean": profile(variant)}
          for name, variant in variants.items()]
svg = line_chart(series, title="radial profiles by upsampling route",
                 x_label="radial bin", y_label="normalized power")
(OUT / "upsampling_artifacts.svg").write_text(svg)
print(f"wrote {OUT / 'upsampling_artifacts.svg'}")
