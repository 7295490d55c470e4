"""Noisy-simulator mitigation study: unmitigated, ZNE, TREX and ZNE+TREX over seeds.

    python scripts/run_mitigation.py --seeds 50 --out runs/mitigation

Wraps the ``mitigation-beh2-3o`` preset; ``--seeds`` overrides the seed count.
"""
import argparse
import csv
import statistics
from pathlib import Path

from vqe_forge.cli import execute, load_preset
from vqe_forge.config import parse_config


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=None)
    ap.add_argument("--out", default="runs/mitigation")
    args = ap.parse_args()
    raw = load_preset("mitigation-beh2-3o")
    if args.seeds:
        raw["mitigation"]["n_seeds"] = args.seeds
    out = Path(args.out)
    execute(parse_config(raw), Path.cwd(), out)
    rows = list(csv.DictReader((out / "mitigation.csv").open()))
    by_seed = {}
    for r in rows:
        by_seed.setdefault(r["seed"], {})[r["method"]] = float(r["abs_error"])
    for m in ("none", "zne", "trex", "zne+trex"):
        errs = [v[m] for v in by_seed.values()]
        wins = sum(v[m] < v["none"] for v in by_seed.values())
        print(f"{m:9s} median |error| {statistics.median(errs):.4e}  beats none on {wins}/{len(errs)} seeds")


if __name__ == "__main__":
    main()
