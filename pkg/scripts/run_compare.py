"""Run the method comparison on bundled BeH2 and write a merged convergence table.

    python scripts/run_compare.py --out runs/compare-all

Produces the per-method artifacts of ``vqe-forge run --preset compare-all`` plus
``convergence.csv`` (method, iteration, abs_error) for plotting energy error against
optimizer iterations.
"""
import argparse
import csv
import json
from pathlib import Path

from vqe_forge.cli import main as cli_main
from vqe_forge.experiments import manifest


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/compare-all")
    args = ap.parse_args()
    out = Path(args.out)
    code = cli_main(["run", "--preset", "compare-all", "--out", str(out)])
    if code:
        raise SystemExit(code)
    exact = manifest()["beh2"]["exact_energy"]
    with (out / "convergence.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method", "iteration", "abs_error"])
        for rec_path in sorted(out.glob("*/record.json")):
            rec = json.loads(rec_path.read_text())
            for row in rec["rows"]:
                w.writerow([rec_path.parent.name, row["iteration"], f"{abs(row['energy'] - exact):.6e}"])
    print(f"wrote {out / 'convergence.csv'}")


if __name__ == "__main__":
    main()
