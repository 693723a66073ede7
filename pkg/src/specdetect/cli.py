"""Command line front end for the whole workflow.

Batch commands only: synthesize a corpus, extract features, train and
evaluate detectors, cluster, dump profile statistics with SVG plots,
analyze upsampling routes, and check the spectral penalty gradient.
Warnings and resolved configs go to standard error; machine-readable
data goes to files or standard output.  Exit codes: 0 success, 1
runtime failure, 2 usage error.
"""

import argparse
import csv
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import classify, features, ingest, resample, spectral_loss, spectrum, svgplot, synth

DEFAULT_SEED = 42
THREADS_ENV = "SPECDETECT_THREADS"


def _warn(msg):
    print(f"warning: {msg}", file=sys.stderr)


def _print_config(args):
    skip = {"func"}
    shown = " ".join(f"{k}={v}" for k, v in sorted(vars(args).items()) if k not in skip)
    print(f"config: {shown}", file=sys.stderr)


def _default_threads():
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            _warn(f"ignoring non-integer {THREADS_ENV}={env!r}")
    return os.cpu_count() or 1


# --- subcommands --------------------------------------------------------------

def cmd_synth(args) -> int:
    cfg = synth.SynthConfig(n_real=args.n_real, n_fake=args.n_fake, size=args.size,
                            spectral_exponent=args.exponent, fake_mode=args.mode,
                            seed=args.seed)
    manifest = synth.build_corpus(cfg, args.out)
    print(f"wrote {cfg.n_real + cfg.n_fake} images, manifest at {manifest}", file=sys.stderr)
    return 0


def cmd_extract(args) -> int:
    records = ingest.scan_dataset(args.data, args.layout)
    threads = args.threads or _default_threads()

    def one(record):
        try:
            raster = ingest.decode_image(record.path)
            return features.extract_feature(raster, target_len=args.target_len,
                                            source_id=record.id, label=record.label,
                                            group=record.group)
        except Exception as exc:
            return exc

    rows = []
    failures = 0
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for record, result in zip(records, pool.map(one, records)):
            if isinstance(result, Exception):
                failures += 1
                _warn(f"skipping {record.id}: {result}")
            else:
                rows.append(result)
    ingest.cache_write(rows, args.out)
    print(f"extracted {len(rows)}/{len(records)} features to {args.out}", file=sys.stderr)
    if records and not rows:
        print("error: no file could be processed", file=sys.stderr)
        return 1
    return 0


def _split_cache(args):
    cache = ingest.cache_read(args.cache)
    if not cache.rows:
        raise ValueError(f"feature cache {args.cache} is empty")
    return cache, ingest.split(cache.rows, test_fraction=args.test_fraction,
                               seed=args.seed, group_aware=args.group_aware)


def _labeled_xy(rows, what):
    X, y, groups = ingest.feature_matrix(rows)
    if y is None:
        raise ValueError(f"{what} requires fully labeled records")
    return X, y, groups


def cmd_train(args) -> int:
    _, parts = _split_cache(args)
    X, y, _ = _labeled_xy(parts.train, "training")
    if args.model == "svm":
        model = classify.train_svm(X, y, classify.SvmConfig(seed=args.seed))
    else:
        model = classify.train_logreg(X, y, classify.LogRegConfig(seed=args.seed))
    classify.save_model(model, args.out)
    train_acc = classify.evaluate(model, X, y).accuracy
    print(f"trained {args.model} on {len(parts.train)} samples "
          f"(train accuracy {train_acc:.6g}), wrote {args.out}", file=sys.stderr)
    return 0


def _report_lines(report, groups=None, y=None, preds=None, vote=False):
    lines = [
        f"accuracy {report.accuracy:.6g}",
        f"n {report.n}",
        f"confusion_true0 {report.confusion[0, 0]} {report.confusion[0, 1]}",
        f"confusion_true1 {report.confusion[1, 0]} {report.confusion[1, 1]}",
    ]
    if report.best_mapping_accuracy is not None:
        lines.append(f"best_mapping_accuracy {report.best_mapping_accuracy:.6g}")
    if vote:
        keys = [g if g is not None else f"__solo_{i}" for i, g in enumerate(groups)]
        true_vote = classify.vote_by_group(keys, list(y))
        pred_vote = classify.vote_by_group(keys, list(preds))
        hits = sum(1 for g in true_vote if true_vote[g] == pred_vote[g])
        lines.append(f"group_accuracy {hits / len(true_vote):.6g}")
        lines.append(f"n_groups {len(true_vote)}")
    return lines


def _emit_report(lines, out_path):
    print("\n".join(lines))
    if out_path:
        with open(out_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["metric", "value"])
            for line in lines:
                key, _, value = line.partition(" ")
                writer.writerow([key, value])


def cmd_eval(args) -> int:
    model = classify.load_model(args.model_file)
    cache, parts = _split_cache(args)
    feature_len = (model.centroids.shape[1] if isinstance(model, classify.KMeansModel)
                   else model.weights.size)
    if feature_len != cache.target_len:
        raise ValueError(f"cache/model mismatch: feature_len {cache.target_len} vs {feature_len}")
    X, y, groups = _labeled_xy(parts.test, "evaluation")
    report = classify.evaluate(model, X, y)
    preds = [classify.predict(model, x)[0] for x in X]
    _emit_report(_report_lines(report, groups, y, preds, vote=args.vote_by_group), args.out)
    return 0


def cmd_cluster(args) -> int:
    cache, parts = _split_cache(args)
    X_train, _, _ = ingest.feature_matrix(parts.train)
    model = classify.fit_kmeans(X_train, classify.KMeansConfig(seed=args.seed))
    X, y, groups = ingest.feature_matrix(parts.test)
    if y is None:
        print("fitted 2-means; test records lack labels, skipping accuracy", file=sys.stderr)
        return 0
    report = classify.evaluate(model, X, y)
    preds = [classify.predict(model, x)[0] for x in X]
    _emit_report(_report_lines(report, groups, y, preds, vote=args.vote_by_group), args.out)
    return 0


def cmd_stats(args) -> int:
    cache = ingest.cache_read(args.cache)
    names = {0: "real", 1: "fake"}
    per_class = {}
    for label, name in names.items():
        rows = [r for r in cache.rows if r.label == label]
        if not rows:
            _warn(f"class {name!r} has no samples, curve omitted")
            continue
        per_class[name] = spectrum.ai_stats([r.values for r in rows])
    header = ["bin"]
    for name in per_class:
        header += [f"mean_{name}", f"variance_{name}"]
    with open(args.out_csv, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(cache.target_len):
            row = [i]
            for stats in per_class.values():
                row += [format(stats.mean[i], ".17g"), format(stats.variance[i], ".17g")]
            writer.writerow(row)
    if per_class:
        colors = {"real": "#1f77b4", "fake": "#d62728"}
        series = []
        for name, stats in per_class.items():
            std = np.sqrt(stats.variance)
            series.append({"name": name, "mean": stats.mean, "color": colors[name],
                           "band": (stats.mean - std, stats.mean + std)})
        svg = svgplot.line_chart(series, title="radial power profile by class",
                                 x_label="bin", y_label="normalized power")
        Path(args.out_svg).write_text(svg, encoding="utf-8")
    else:
        _warn("no labeled samples at all, SVG omitted")
    return 0


def _normalized_profile(img):
    power = spectrum.power_spectrum(spectrum.fft2(img))
    return spectrum.normalize_ai(spectrum.azimuthal_integral(power))


def cmd_upsample_analyze(args) -> int:
    if args.image:
        gray = features.center_crop_square(features.to_grayscale(ingest.decode_image(args.image)))
        side = gray.shape[0] - (gray.shape[0] % 2)
        if side != gray.shape[0]:
            _warn("odd image side, trimming one row and column")
        if side < 4:
            raise ValueError("image too small to analyze (need side >= 4)")
        img = gray[:side, :side]
    else:
        cfg = synth.SynthConfig(size=args.size, spectral_exponent=args.exponent,
                                seed=args.seed)
        img = synth.gen_real(cfg, 0)
    low = img[::2, ::2]
    raw_tc = resample.zero_insert_2d(low)
    raw_uc = resample.interp_upsample_2d(low, mode="bilinear")

    def smooth(v):
        return resample.conv2d(v, synth.SMOOTH_KERNEL, padding="periodic")
    variants = [
        ("original", img),
        ("transconv", raw_tc),
        ("transconv_smoothed", smooth(raw_tc)),
        ("upconv", raw_uc),
        ("upconv_smoothed", smooth(raw_uc)),
    ]
    profiles = [(name, _normalized_profile(v)) for name, v in variants]
    length = profiles[0][1].size
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["name"] + [f"v{i}" for i in range(length)])
        for name, prof in profiles:
            writer.writerow([name] + [format(v, ".17g") for v in prof])
    return 0


def cmd_loss_check(args) -> int:
    cache = ingest.cache_read(args.real_cache)
    rows = [r for r in cache.rows if r.label == 0] or cache.rows
    if not rows:
        raise ValueError(f"reference cache {args.real_cache} is empty")
    base = np.vstack([r.values for r in rows]).mean(axis=0)
    if args.save_reference:
        full = spectral_loss.ReferenceProfile(
            values=np.clip(base, spectral_loss.CLAMP_LO, 1.0), n_source=len(rows))
        spectral_loss.save_reference(full, args.save_reference)

    if args.image:
        gray = features.center_crop_square(features.to_grayscale(ingest.decode_image(args.image)))
        images = [(Path(args.image).name, gray)]
    else:
        rng = np.random.default_rng(args.seed)
        images = [(f"random_{i}", rng.uniform(0.1, 1.0, (args.size, args.size)))
                  for i in range(args.count)]

    worst = 0.0
    for name, img in images:
        nbins = img.shape[0] // 2
        native = features.resample_profile(base, nbins)
        ref = spectral_loss.ReferenceProfile(
            values=np.clip(native, spectral_loss.CLAMP_LO, 1.0), n_source=len(rows))
        loss, grad = spectral_loss.spectral_loss_value_and_grad(img, ref)
        residual = spectral_loss.finite_difference_residual(img, ref)
        worst = max(worst, residual)
        line = (f"image {name} loss {loss:.12g} grad_norm {np.linalg.norm(grad):.6g} "
                f"residual {residual:.6g}")
        if args.lam is not None:
            line += f" final {spectral_loss.combine_loss(0.0, loss, args.lam).final:.12g}"
        print(line)
    print(f"max_rel_residual {worst:.6g}")
    return 0


# --- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specdetect",
        description="spectral forensics: radial power profiles, upsampling artifacts, "
                    "fake detection, spectral penalty checks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic labeled corpus")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--n-real", type=int, default=10)
    p.add_argument("--n-fake", type=int, default=10)
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--mode", choices=synth.FAKE_MODES, default="transconv")
    p.add_argument("--exponent", type=float, default=2.0)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("extract", help="extract spectral features into a CSV cache")
    p.add_argument("--data", required=True, help="dataset root or manifest")
    p.add_argument("--layout", choices=("labeled-dirs", "manifest"), default="manifest")
    p.add_argument("--out", required=True, help="cache CSV path")
    p.add_argument("--target-len", type=int, default=features.DEFAULT_FEATURE_LEN)
    p.add_argument("--threads", type=int, default=None,
                   help=f"worker threads (default: {THREADS_ENV} or logical cores)")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", help="train a supervised detector on the 80%% split")
    p.add_argument("--cache", required=True)
    p.add_argument("--model", choices=("svm", "logreg"), default="svm")
    p.add_argument("--out", required=True, help="model file path")
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--group-aware", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a trained model on the held-out split")
    p.add_argument("--cache", required=True)
    p.add_argument("--model-file", required=True)
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--group-aware", action="store_true")
    p.add_argument("--vote-by-group", action="store_true")
    p.add_argument("--out", default=None, help="optional CSV report")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("cluster", help="unsupervised 2-means detection")
    p.add_argument("--cache", required=True)
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--group-aware", action="store_true")
    p.add_argument("--vote-by-group", action="store_true")
    p.add_argument("--out", default=None, help="optional CSV report")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("stats", help="per-class profile mean/variance, CSV + SVG")
    p.add_argument("--cache", required=True)
    p.add_argument("--out-csv", required=True)
    p.add_argument("--out-svg", required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("upsample-analyze",
                       help="radial profiles before/after each upsampling route")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--image", default=None, help="analyze this image file")
    src.add_argument("--size", type=int, default=64, help="or synthesize this size")
    p.add_argument("--exponent", type=float, default=2.0)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", required=True, help="profile CSV path")
    p.set_defaults(func=cmd_upsample_analyze)

    p = sub.add_parser("loss-check",
                       help="spectral penalty value and gradient self-check")
    p.add_argument("--real-cache", required=True, help="feature cache of real samples")
    p.add_argument("--image", default=None, help="check on this image")
    p.add_argument("--size", type=int, default=8, help="random image size")
    p.add_argument("--count", type=int, default=3, help="number of random images")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="also print the combined objective with this weight")
    p.add_argument("--save-reference", default=None,
                   help="write the cache-length reference profile as CSV")
    p.set_defaults(func=cmd_loss_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _print_config(args)
    try:
        return args.func(args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
