"""Dataset-level generation: fan out over (appliance, signature) tasks.

Each task draws from its own stream, so sequential and parallel schedules give
identical datasets.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Mapping, Sequence

from .core import (
    CENTROID_DOMAIN,
    Dataset,
    GenConfig,
    HfCentroid,
    LfCentroid,
    Signature,
    derive_stream,
)
from .hf import sample_hf_centroids, synth_hf_signature
from .lf import sample_lf_centroids, synth_lf_signature

MANIFEST_VERSION = 1


def _task(kind: str, centroid, cfg: GenConfig, k: int, j: int) -> Signature:
    stream = derive_stream(cfg.master_seed, k, j)
    if kind == "hf":
        return synth_hf_signature(centroid, cfg, stream, k, j)
    return synth_lf_signature(centroid, cfg, stream, k, j)


def _chunk(args: Sequence[tuple]) -> list[Signature]:
    return [_task(*a) for a in args]


def _generate(kind: str, centroids: Sequence, cfg: GenConfig, workers: int | None,
              order: Sequence[tuple[int, int]] | None) -> Dataset:
    S = cfg.signatures_per_appliance
    keys = [(k, j) for k in range(len(centroids)) for j in range(S)]
    schedule = list(order) if order is not None else keys
    tasks = [(kind, centroids[k], cfg, k, j) for k, j in schedule]
    if workers and workers > 1 and len(tasks) > 1:
        size = max(1, len(tasks) // (4 * workers))
        chunks = [tasks[i:i + size] for i in range(0, len(tasks), size)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            done = [s for part in pool.map(_chunk, chunks) for s in part]
    else:
        done = _chunk(tasks)
    by_key = {(s.appliance_id, s.signature_id): s for s in done}
    return Dataset(tuple(by_key[key] for key in keys), build_manifest(kind, cfg, centroids))


def generate_hf_dataset(centroids: Sequence[HfCentroid], cfg: GenConfig, workers: int | None = None,
                        order: Sequence[tuple[int, int]] | None = None) -> Dataset:
    """Generate ``cfg.signatures_per_appliance`` waveforms per centroid.

    ``order`` permutes the execution schedule (used to check order
    independence); output is always sorted by (appliance, signature).
    """
    return _generate("hf", list(centroids), cfg, workers, order)


def generate_lf_dataset(centroids: Sequence[LfCentroid], cfg: GenConfig, workers: int | None = None,
                        order: Sequence[tuple[int, int]] | None = None) -> Dataset:
    return _generate("lf", list(centroids), cfg, workers, order)


def sample_centroids(kind: str, K: int, seed: int, ranges: Mapping | None = None,
                     lam: float | None = None, **kwargs) -> list:
    stream = derive_stream(seed, 0, 0, domain=CENTROID_DOMAIN)
    if kind == "hf":
        return sample_hf_centroids(K, ranges, stream=stream, **({"lam": lam} if lam else {}))
    if kind == "lf":
        return sample_lf_centroids(K, ranges, stream=stream, **({"lambda_n": lam} if lam else {}), **kwargs)
    raise ValueError(f"unknown generator kind {kind!r}")


def build_manifest(kind: str, cfg: GenConfig, centroids: Sequence) -> dict:
    return {
        "format_version": MANIFEST_VERSION,
        "kind": kind,
        "seed": cfg.master_seed,
        "config": cfg.to_dict(),
        "centroids": [c.to_dict() for c in centroids],
    }


def centroids_from_dicts(kind: str, rows: Sequence[Mapping]) -> list:
    if kind == "hf":
        return [HfCentroid(**row) for row in rows]
    if kind == "lf":
        return [LfCentroid(**{**row, "basis_mask": tuple(row.get("basis_mask", (True, False)))}) for row in rows]
    raise ValueError(f"unknown generator kind {kind!r}")


def regenerate(manifest: Mapping, workers: int | None = None) -> Dataset:
    """Rebuild a generated dataset from its manifest alone."""
    kind = manifest["kind"]
    cfg = GenConfig.from_dict(manifest["config"])
    centroids = centroids_from_dicts(kind, manifest["centroids"])
    return _generate(kind, centroids, cfg, workers, None)
