"""Dataset scanning, image decoding, deterministic splits, and the
feature-cache CSV layer.

Netpbm grayscale and color images (P2/P3/P5/P6) decode natively; other
formats fall back to Pillow when that package happens to be installed.
Pixel values always come back as floats scaled to [0, 255].
"""

import csv
import os
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .features import FeatureVector

__all__ = [
    "DecodeError",
    "SampleRecord",
    "FeatureCache",
    "Split",
    "scan_dataset",
    "decode_image",
    "write_pgm",
    "split",
    "cache_write",
    "cache_read",
    "feature_matrix",
]


class DecodeError(ValueError):
    """An image file could not be decoded."""


@dataclass
class SampleRecord:
    id: str
    path: str
    label: int | None
    group: str | None = None


@dataclass
class FeatureCache:
    target_len: int
    rows: list


class Split(NamedTuple):
    train: list
    test: list


# --- scanning ----------------------------------------------------------------

def _parse_label(text: str, where: str) -> int | None:
    if text == "":
        return None
    if text in ("0", "1"):
        return int(text)
    raise ValueError(f"{where}: label must be 0, 1 or empty, got {text!r}")


def scan_dataset(root, layout: str = "labeled-dirs") -> list[SampleRecord]:
    """List sample records under a dataset root, sorted by id.

    labeled-dirs: files below root/real get label 0 and files below
    root/fake get label 1.  manifest: root (or root/manifest.csv) is a CSV
    with columns id,path,label,group; paths are taken relative to the
    manifest's directory.
    """
    rootp = Path(root)
    if layout == "labeled-dirs":
        if not rootp.is_dir():
            raise ValueError(f"dataset root {rootp} is not a directory")
        records = []
        for label, sub in ((0, "real"), (1, "fake")):
            base = rootp / sub
            if not base.is_dir():
                continue
            for p in sorted(base.rglob("*")):
                if p.is_file() and not p.name.startswith("."):
                    rid = p.relative_to(rootp).as_posix()
                    records.append(SampleRecord(id=rid, path=str(p), label=label))
        records.sort(key=lambda r: r.id)
        return records
    if layout == "manifest":
        mpath = rootp if rootp.is_file() else rootp / "manifest.csv"
        if not mpath.is_file():
            raise ValueError(f"manifest not found at {mpath}")
        records = []
        seen = set()
        with open(mpath, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            for lineno, row in enumerate(reader, start=1):
                if lineno == 1:
                    if row != ["id", "path", "label", "group"]:
                        raise ValueError(
                            f"{mpath} line 1: expected header id,path,label,group"
                        )
                    continue
                if len(row) != 4:
                    raise ValueError(f"{mpath} line {lineno}: expected 4 fields, got {len(row)}")
                rid, rel, label_text, group = row
                if rid in seen:
                    raise ValueError(f"{mpath} line {lineno}: duplicate id {rid!r}")
                seen.add(rid)
                label = _parse_label(label_text, f"{mpath} line {lineno}")
                records.append(SampleRecord(
                    id=rid, path=str(mpath.parent / rel), label=label,
                    group=group or None,
                ))
        records.sort(key=lambda r: r.id)
        return records
    raise ValueError(f"unknown layout {layout!r}")


# --- netpbm ------------------------------------------------------------------

_WS = b" \t\r\n"


def _pnm_header(data: bytes, path, n_tokens: int):
    """Return (tokens, offset) where offset points just past the header."""
    tokens = []
    i = 0
    while len(tokens) < n_tokens:
        if i >= len(data):
            raise DecodeError(f"{path}: truncated header")
        c = data[i:i + 1]
        if c in _WS:
            i += 1
        elif c == b"#":
            while i < len(data) and data[i:i + 1] != b"\n":
                i += 1
        else:
            j = i
            while j < len(data) and data[j:j + 1] not in _WS and data[j:j + 1] != b"#":
                j += 1
            tokens.append(data[i:j])
            i = j
    if i < len(data) and data[i:i + 1] in _WS:
        i += 1  # single whitespace byte separates the header from binary raster
    return tokens, i


def _pnm_ints(tokens, path):
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise DecodeError(f"{path}: malformed header token") from None


def decode_image(path) -> np.ndarray:
    """Decode an image file to float pixels in [0, 255].

    Returns an (H, W) array for grayscale and (H, W, 3) for color.  P2,
    P3, P5 and P6 netpbm files are handled natively, including 2-byte
    samples; anything else is attempted through Pillow when available.
    """
    p = Path(path)
    data = p.read_bytes()
    magic = data[:2]
    if magic in (b"P2", b"P3", b"P5", b"P6"):
        channels = 3 if magic in (b"P3", b"P6") else 1
        header, offset = _pnm_header(data, p, 4)
        width, height, maxval = _pnm_ints(header[1:], p)
        if width < 1 or height < 1 or not 1 <= maxval <= 65535:
            raise DecodeError(f"{p}: invalid dimensions or maxval")
        count = width * height * channels
        if magic in (b"P2", b"P3"):
            text = data[offset:].split()
            if len(text) < count:
                raise DecodeError(f"{p}: truncated raster")
            arr = np.array(_pnm_ints(text[:count], p), dtype=float)
        else:
            wide = maxval > 255
            need = count * (2 if wide else 1)
            raster = data[offset:offset + need]
            if len(raster) < need:
                raise DecodeError(f"{p}: truncated raster")
            arr = np.frombuffer(raster, dtype=">u2" if wide else np.uint8).astype(float)
        arr = arr * (255.0 / maxval)
        shape = (height, width) if channels == 1 else (height, width, 3)
        return arr.reshape(shape)
    try:
        from PIL import Image
    except ImportError:
        raise DecodeError(f"{p}: unsupported image format") from None
    try:
        with Image.open(p) as im:
            mode = "L" if im.mode in ("1", "L", "I", "I;16", "F") else "RGB"
            arr = np.asarray(im.convert(mode), dtype=float)
    except Exception as exc:
        raise DecodeError(f"{p}: {exc}") from None
    return arr


def write_pgm(path, img) -> None:
    """Write a binary 8-bit PGM; values are clipped and rounded to 0..255."""
    arr = np.clip(np.rint(np.asarray(img, dtype=float)), 0, 255).astype(np.uint8)
    if arr.ndim != 2:
        raise ValueError(f"expected 2D image, got shape {arr.shape}")
    header = f"P5\n{arr.shape[1]} {arr.shape[0]}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(arr.tobytes())


# --- splitting ---------------------------------------------------------------

def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def split(records, test_fraction: float = 0.2, seed: int = 0,
          group_aware: bool = False) -> Split:
    """Seeded shuffle-and-split, stratified by label.

    With group_aware=True, records sharing a group id always land on the
    same side (records without a group act as singletons).  For any
    stratum with at least two units and a fraction strictly inside (0, 1),
    both sides receive at least one unit.
    """
    records = list(records)
    if not records:
        raise ValueError("cannot split an empty record list")
    if not 0.0 <= test_fraction <= 1.0:
        raise ValueError("test_fraction must lie in [0, 1]")
    rng = np.random.default_rng(seed)

    # units: either single records or whole groups; works for any row type
    # that carries .label and .group (SampleRecord, FeatureVector)
    units: dict[str, list] = {}
    order = []
    for i, r in enumerate(records):
        key = f"g:{r.group}" if (group_aware and r.group is not None) else f"r:{i}"
        if key not in units:
            units[key] = []
            order.append(key)
        units[key].append(r)

    def unit_label(members):
        labels = [m.label for m in members if m.label is not None]
        if not labels:
            return None
        ones = sum(1 for v in labels if v == 1)
        return 1 if 2 * ones > len(labels) else (0 if 2 * ones < len(labels) else labels[0])

    strata: dict[object, list[str]] = {}
    for key in order:
        strata.setdefault(unit_label(units[key]), []).append(key)

    train, test = [], []
    for label in sorted(strata, key=lambda v: (v is None, v)):
        keys = strata[label]
        perm = rng.permutation(len(keys))
        n_records = sum(len(units[k]) for k in keys)
        target = _round_half_up(test_fraction * n_records)
        if 0.0 < test_fraction < 1.0 and len(keys) >= 2:
            target = max(target, 1)
        taken = 0
        trained_units = 0
        for pos, ki in enumerate(perm):
            members = units[keys[ki]]
            # never drain a stratum entirely into the test side
            last_and_train_empty = (
                trained_units == 0 and pos == len(keys) - 1
                and len(keys) >= 2 and test_fraction < 1.0
            )
            if taken < target and not last_and_train_empty:
                test.extend(members)
                taken += len(members)
            else:
                train.extend(members)
                trained_units += 1
    return Split(train=train, test=test)


# --- feature cache -----------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def cache_write(features, path) -> None:
    """Write feature rows as CSV with header id,label,group,v0..; atomic."""
    rows = list(features)
    if rows:
        length = rows[0].values.size
        if any(r.values.size != length for r in rows):
            raise ValueError("feature rows have inconsistent lengths")
        ids = [r.source_id for r in rows]
        if len(set(ids)) != len(ids):
            raise ValueError("feature ids are not unique")
    else:
        length = 0
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "label", "group"] + [f"v{i}" for i in range(length)])
        for r in rows:
            label = "" if r.label is None else str(r.label)
            group = "" if r.group is None else r.group
            writer.writerow([r.source_id, label, group] + [_fmt(v) for v in r.values])
    os.replace(tmp, path)


def cache_read(path) -> FeatureCache:
    """Read a feature cache; round-trips doubles written by cache_write exactly."""
    path = Path(path)
    rows = []
    seen = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty cache file")
        length = len(header) - 3
        if length < 0 or header[:3] != ["id", "label", "group"] or \
                header[3:] != [f"v{i}" for i in range(length)]:
            raise ValueError(f"{path} line 1: malformed cache header")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 3 + length:
                raise ValueError(
                    f"{path} line {lineno}: expected {3 + length} fields, got {len(row)}"
                )
            rid, label_text, group = row[0], row[1], row[2]
            if rid in seen:
                raise ValueError(f"{path} line {lineno}: duplicate id {rid!r}")
            seen.add(rid)
            label = _parse_label(label_text, f"{path} line {lineno}")
            try:
                values = np.array(row[3:], dtype=float)
            except ValueError:
                raise ValueError(f"{path} line {lineno}: malformed feature value") from None
            rows.append(FeatureVector(values=values, source_id=rid, label=label,
                                      group=group or None))
    return FeatureCache(target_len=length, rows=rows)


def feature_matrix(rows):
    """Stack cached rows into (X, labels, groups); labels is None if any row is unlabeled."""
    if not rows:
        raise ValueError("no feature rows")
    X = np.vstack([r.values for r in rows])
    labels = None
    if all(r.label is not None for r in rows):
        labels = np.array([r.label for r in rows], dtype=int)
    groups = [r.group for r in rows]
    return X, labels, groups
