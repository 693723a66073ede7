"""Spectral image forensics toolkit.

Radial (azimuthal) power profiles of images, analysis of the spectral
damage done by factor-2 up-convolution routes, classical detectors for
generatively upsampled material, and a differentiable spectral penalty
with exact pixel gradients.
"""

from .spectrum import (
    DegenerateSpectrumError, ProfileStats,
    dft2, fft2, power_spectrum, azimuthal_integral, normalize_ai, ai_stats,
)
from .resample import (
    zero_insert_1d, linear_upsample_1d, zero_insert_2d, interp_upsample_2d, conv2d,
)
from .features import FeatureVector, to_grayscale, center_crop_square, \
    resample_profile, extract_feature
from .classify import (
    SvmConfig, SvmModel, LogRegConfig, LogRegModel, KMeansConfig, KMeansModel,
    EvalReport, DegenerateClusterError,
    train_svm, train_logreg, fit_kmeans, predict, evaluate, majority_vote,
    save_model, load_model,
)
from .spectral_loss import (
    ReferenceProfile, LossBreakdown,
    mean_real_profile, spectral_bce, spectral_loss_value_and_grad, combine_loss,
)
from .synth import SynthConfig, gen_real, gen_fake, build_corpus
from .ingest import (
    DecodeError, SampleRecord, FeatureCache,
    scan_dataset, decode_image, write_pgm, split, cache_write, cache_read,
)

__version__ = "0.1.0"
