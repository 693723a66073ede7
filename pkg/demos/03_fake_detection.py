"""End-to-end detection run on a synthetic corpus.

Builds a labeled corpus (power-law reals, transposed-convolution fakes),
extracts the fixed-length spectral features, and trains all three
detectors on the 80% split.  Supervised and unsupervised accuracy on
the held-out 20% are printed.
"""

import tempfile
import time

from specdetect import classify, features, ingest, synth

t0 = time.perf_counter()
with tempfile.TemporaryDirectory() as workdir:
    cfg = synth.SynthConfig(n_real=150, n_fake=150, size=64,
                            fake_mode="transconv", seed=42)
    synth.build_corpus(cfg, workdir)
    records = ingest.scan_dataset(workdir, "manifest")
    rows = [features.extract_feature(ingest.decode_image(r.path), 300,
                                     r.id, r.label, r.group) for r in records]
print(f"corpus + features: {len(rows)} samples in {time.perf_counter() - t0:.1f}s")

parts = ingest.split(rows, test_fraction=0.2, seed=42)
X_train, y_train, _ = ingest.feature_matrix(parts.train)
X_test, y_test, _ = ingest.feature_matrix(parts.test)
print(f"split: {len(parts.train)} train / {len(parts.test)} test")

svm = classify.train_svm(X_train, y_train, classify.SvmConfig(seed=42))
print(f"linear svm            test accuracy {classify.evaluate(svm, X_test, y_test).accuracy:.3f}")

logreg = classify.train_logreg(X_train, y_train, classify.LogRegConfig(seed=42))
print(f"logistic regression   test accuracy {classify.evaluate(logreg, X_test, y_test).accuracy:.3f}")

kmeans = classify.fit_kmeans(X_train, classify.KMeansConfig(seed=42))
report = classify.evaluate(kmeans, X_test, y_test)
print(f"2-means (unsupervised) best-mapping accuracy {report.best_mapping_accuracy:.3f}")

# tiny training sets still work: the fingerprint is that strong
small = ingest.split(rows, test_fraction=0.9, seed=7)
Xs, ys, _ = ingest.feature_matrix(small.train)
Xr, yr, _ = ingest.feature_matrix(small.test)
svm_small = classify.train_svm(Xs, ys, classify.SvmConfig(seed=42))
print(f"svm on only {len(ys)} samples: accuracy "
      f"{classify.evaluate(svm_small, Xr, yr).accuracy:.3f} on {len(yr)} held out")
