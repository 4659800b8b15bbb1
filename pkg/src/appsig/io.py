"""Dataset CSV files, manifest sidecars and centroid files.

CSV layout: header ``appliance_id,signature_id,rate_hz,s0,s1,...`` then one
signature per row. Rows may be ragged. Floats are written with 17 significant
digits so a write/read round trip is exact.

A generated dataset ``foo.csv`` gets a JSON sidecar ``foo.manifest.json``
holding the seed, configuration and centroids; centroid files use the same
``kind``/``centroids`` keys so they can be fed back to the generators.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

from .core import Dataset, DatasetError, ParseError, Signature
from .generate import MANIFEST_VERSION, centroids_from_dicts

HEADER_PREFIX = ["appliance_id", "signature_id", "rate_hz"]


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def manifest_path(csv_path) -> Path:
    p = Path(csv_path)
    return p.with_name(p.stem + ".manifest.json")


def write_dataset_csv(ds: Dataset, path, write_manifest: bool = True) -> Path:
    path = Path(path)
    width = max((len(s) for s in ds), default=0)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(HEADER_PREFIX + [f"s{i}" for i in range(width)])
            for s in ds:
                w.writerow([s.appliance_id, s.signature_id, _fmt(s.rate_hz)] + [_fmt(v) for v in s.samples])
        if write_manifest:
            manifest = ds.manifest if isinstance(ds.manifest, dict) else {
                "format_version": MANIFEST_VERSION, "kind": "external"}
            write_json(manifest, manifest_path(path))
    except OSError as e:
        raise OSError(f"{path}: {e.strerror or e}") from e
    return path


def load_dataset_csv(path) -> Dataset:
    """Read a dataset CSV; the manifest is ``"external"``."""
    path = Path(path)
    sigs = []
    seen = {}
    try:
        fh = path.open(newline="")
    except OSError as e:
        raise OSError(f"{path}: {e.strerror or e}") from e
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:3]] != HEADER_PREFIX:
            raise ParseError(f"{path}: header must start with {','.join(HEADER_PREFIX)}", 1)
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < 4:
                raise ParseError(f"{path}: expected ids, rate and at least one sample", line)
            try:
                app, sig = int(row[0]), int(row[1])
                rate = float(row[2])
                samples = [float(v) for v in row[3:]]
            except ValueError as e:
                raise ParseError(f"{path}: {e}", line) from None
            if not all(math.isfinite(v) for v in samples) or not (math.isfinite(rate) and rate > 0):
                raise ParseError(f"{path}: non-finite sample or invalid rate", line)
            if (app, sig) in seen:
                raise DatasetError(f"{path}: line {line}: duplicate (appliance_id, signature_id) "
                                   f"({app}, {sig}), first seen on line {seen[(app, sig)]}")
            seen[(app, sig)] = line
            sigs.append(Signature(app, sig, samples, rate))
    return Dataset(tuple(sigs), "external")


def write_json(obj, path) -> Path:
    path = Path(path)
    try:
        path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    except OSError as e:
        raise OSError(f"{path}: {e.strerror or e}") from e
    return path


def read_json(path) -> dict:
    path = Path(path)
    try:
        return json.loads(path.read_text())
    except OSError as e:
        raise OSError(f"{path}: {e.strerror or e}") from e
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: {e.msg}", e.lineno) from None


def write_centroids(kind: str, centroids, path) -> Path:
    return write_json({
        "format_version": MANIFEST_VERSION,
        "kind": kind,
        "centroids": [c.to_dict() for c in centroids],
    }, path)


def load_centroids(path, kind: str | None = None) -> tuple[str, list]:
    """Read a centroid file or a dataset manifest; returns ``(kind, centroids)``."""
    doc = read_json(path)
    file_kind = doc.get("kind")
    if file_kind not in ("hf", "lf"):
        raise ParseError(f"{path}: kind must be 'hf' or 'lf', got {file_kind!r}")
    if kind is not None and kind != file_kind:
        raise DatasetError(f"{path}: holds {file_kind} centroids, {kind} requested")
    try:
        return file_kind, centroids_from_dicts(file_kind, doc["centroids"])
    except (KeyError, TypeError) as e:
        raise ParseError(f"{path}: malformed centroid entry ({e})") from None
