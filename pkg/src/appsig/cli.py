"""Command-line front end.

    appsig gen-hf --seed 1 --appliances 4 --signatures-per-appliance 10 --out hf.csv
    appsig gen-lf --centroids lf_centroids.json --out lf.csv
    appsig sample-centroids --kind lf --appliances 24 --out lf_centroids.json
    appsig validate --real real.csv --synth hf.csv --out report.json
    appsig match --real real.csv --synth hf.csv --out match.csv
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .core import GenConfig
from .generate import generate_hf_dataset, generate_lf_dataset, sample_centroids
from .io import (
    load_centroids,
    load_dataset_csv,
    write_centroids,
    write_dataset_csv,
    write_json,
)
from .validation import (
    common_length,
    match_appliances,
    projection_table,
    similarity_matrix,
    standardize_lengths,
    validate,
)

log = logging.getLogger("appsig")

MODES = ("gen-hf", "gen-lf", "sample-centroids", "validate", "match")


@dataclass
class RunConfig:
    mode: str
    gen: GenConfig = field(default_factory=GenConfig)
    appliances: int = 4
    kind: str = "hf"
    lam: float | None = None
    p2_prob: float = 0.8
    p3_prob: float = 0.3
    centroids: Path | None = None
    out: Path | None = None
    real: Path | None = None
    synth: Path | None = None
    components: int = 6
    bins: int = 100
    length: int | None = None
    normalize: bool = True
    reference: str | None = None
    projections: Path | None = None
    workers: int | None = None

    def check(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.out is None:
            raise ValueError(f"{self.mode} requires --out")
        if self.mode in ("validate", "match") and (self.real is None or self.synth is None):
            raise ValueError(f"{self.mode} requires --real and --synth")
        if self.mode in ("gen-hf", "gen-lf", "sample-centroids") and self.appliances < 0:
            raise ValueError("--appliances must be >= 0")


def _centroids(cfg: RunConfig, kind: str) -> list:
    if cfg.centroids is not None:
        return load_centroids(cfg.centroids, kind)[1]
    extra = {"p2_prob": cfg.p2_prob, "p3_prob": cfg.p3_prob} if kind == "lf" else {}
    return sample_centroids(kind, cfg.appliances, cfg.gen.master_seed, lam=cfg.lam, **extra)


def run(cfg: RunConfig) -> int:
    """Execute one mode; raises on failure, returns 0 once every artifact is written."""
    cfg.check()
    if cfg.mode in ("gen-hf", "gen-lf"):
        kind = cfg.mode[-2:]
        cents = _centroids(cfg, kind)
        gen = generate_hf_dataset if kind == "hf" else generate_lf_dataset
        ds = gen(cents, cfg.gen, workers=cfg.workers)
        write_dataset_csv(ds, cfg.out)
        log.info("wrote %d signatures to %s", len(ds), cfg.out)
    elif cfg.mode == "sample-centroids":
        extra = {"p2_prob": cfg.p2_prob, "p3_prob": cfg.p3_prob} if cfg.kind == "lf" else {}
        cents = sample_centroids(cfg.kind, cfg.appliances, cfg.gen.master_seed, lam=cfg.lam, **extra)
        write_centroids(cfg.kind, cents, cfg.out)
        log.info("wrote %d %s centroids to %s", len(cents), cfg.kind, cfg.out)
    elif cfg.mode == "validate":
        real, synth = load_dataset_csv(cfg.real), load_dataset_csv(cfg.synth)
        report = validate(real, synth, cfg.components, cfg.bins, cfg.length, cfg.normalize, cfg.reference)
        write_json(report.to_dict(), cfg.out)
        if cfg.projections is not None:
            rows = projection_table(real, synth, 2, cfg.length, cfg.normalize)
            with Path(cfg.projections).open("w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["source", "appliance_id", "signature_id", "pc1", "pc2"])
                w.writerows(rows)
        print(report.table(), end="")
    else:
        real, synth = load_dataset_csv(cfg.real), load_dataset_csv(cfg.synth)
        L = common_length(real, cfg.length)
        synth, real = standardize_lengths(synth, L), standardize_lengths(real, L)
        matches = match_appliances(synth, real)
        sim = similarity_matrix(synth, real)
        with Path(cfg.out).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["synth_appliance_id", "real_appliance_id", "similarity"]
                       + [f"real_{b}" for b in real.appliance_ids])
            for (a, b, s), row in zip(matches, sim):
                w.writerow([a, b, format(s, ".17g")] + [format(v, ".17g") for v in row])
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="appsig", description="Physics-informed appliance signature generator")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="mode", required=True)

    def gen_args(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--appliances", type=int, default=4, metavar="K")
        p.add_argument("--signatures-per-appliance", type=int, default=10)
        p.add_argument("--var-d", type=float, default=0.1)
        p.add_argument("--lambda", dest="lam", type=float, default=None,
                       help="Poisson mean for harmonic/cycle count when sampling centroids")
        p.add_argument("--centroids", type=Path, help="centroid file or dataset manifest")
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("gen-hf", help="generate high-rate waveform signatures")
    gen_args(p)
    p.add_argument("--cycles", type=int, default=10, metavar="p")
    p.add_argument("--samples-per-cycle", type=int, default=500, metavar="N")
    p.add_argument("--mains-hz", type=float, default=60.0)
    p.add_argument("--correlated-amplitude", action="store_true")

    p = sub.add_parser("gen-lf", help="generate low-rate RMS signatures")
    gen_args(p)
    p.add_argument("--p-b", type=float, default=0.5)
    p.add_argument("--rate-hz", type=float, default=1.0)
    p.add_argument("--p2-prob", type=float, default=0.8)
    p.add_argument("--p3-prob", type=float, default=0.3)

    p = sub.add_parser("sample-centroids", help="write a centroid file")
    p.add_argument("--kind", choices=("hf", "lf"), default="hf")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--appliances", type=int, default=4, metavar="K")
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--p2-prob", type=float, default=0.8)
    p.add_argument("--p3-prob", type=float, default=0.3)
    p.add_argument("--out", type=Path, required=True)

    for name, help_ in (("validate", "PCA + KL comparison of real and synthetic data"),
                        ("match", "match synthetic appliances to real ones by cosine similarity")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--real", type=Path, required=True)
        p.add_argument("--synth", type=Path, required=True)
        p.add_argument("--out", type=Path, required=True)
        p.add_argument("--length", type=int, default=None,
                       help="common signature length (default: longest real signature)")
        if name == "validate":
            p.add_argument("--components", type=int, default=6, metavar="k")
            p.add_argument("--bins", type=int, default=100)
            p.add_argument("--no-normalize", dest="normalize", action="store_false")
            p.add_argument("--reference", choices=("hf", "lf"), default=None,
                           help="attach the published mean KL for this sampling regime")
            p.add_argument("--projections", type=Path, default=None,
                           help="also write a plot-ready CSV of the first two components")
    return ap


def config_from_args(args: argparse.Namespace) -> RunConfig:
    a = vars(args)
    gen = GenConfig(
        master_seed=a.get("seed", 0),
        var_d=a.get("var_d", 0.1),
        samples_per_cycle=a.get("samples_per_cycle", 500),
        cycles_per_signature=a.get("cycles", 10),
        sample_rate_lf=a.get("rate_hz", 1.0),
        p_b=a.get("p_b", 0.5),
        signatures_per_appliance=a.get("signatures_per_appliance", 10),
        mains_hz=a.get("mains_hz", 60.0),
        correlated_amplitude=a.get("correlated_amplitude", False),
    )
    known = set(RunConfig.__dataclass_fields__) - {"gen", "mode"}
    return RunConfig(mode=args.mode, gen=gen, **{k: v for k, v in a.items() if k in known})


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        return run(cfg)
    except Exception as e:  # single-line diagnostic, nonzero exit
        msg = str(e).splitlines()[0] if str(e) else type(e).__name__
        print(f"appsig {args.mode}: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
