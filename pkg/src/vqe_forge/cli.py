"""``vqe-forge`` command line: run, validate and list presets."""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import statistics
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, load_config, parse_config
from .experiments import (DATA, SUMMARY_COLUMNS, Problem, adapted_circuit, bundled_problem,
                          compare_methods, fcidump_problem, run_forging, run_method, summary_row)
from .fermion import ActiveSpaceError, ActiveSpaceSpec, FCIDumpError, MappingError
from .forging import ForgingError
from .noise import (CalibrationError, UnrecoverableObservableError, mitigation_csv,
                    mitigation_experiment)
from .pauli import PauliFormatError, read_pauli_sum
from .vqe import NumericalError, _json_default, exact_ground

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3
OUT_ENV = "VQE_FORGE_OUT"

log = logging.getLogger("vqe_forge")


def preset_names() -> list[str]:
    return sorted(p.name[:-5] for p in (DATA / "presets").iterdir() if p.name.endswith(".json"))


def load_preset(name: str) -> dict:
    if name not in preset_names():
        raise ConfigError("/", f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return json.loads((DATA / "presets" / f"{name}.json").read_text())


def _resolve(path: str, base: Path) -> Path:
    p = Path(path)
    return p if p.is_absolute() else base / p


def build_problem(cfg: RunConfig, base: Path) -> Problem:
    ham = cfg.hamiltonian
    if "bundled" in ham:
        try:
            return bundled_problem(ham["bundled"])
        except KeyError as exc:
            raise ConfigError("/hamiltonian/bundled", exc.args[0]) from None
    if "fcidump" in ham:
        active = ActiveSpaceSpec.from_dict(ham["active_space"]) if "active_space" in ham else None
        return fcidump_problem(_resolve(ham["fcidump"], base), active, ham.get("mapping", "parity"))
    h = read_pauli_sum(_resolve(ham["pauli"], base))
    sysinfo = ham.get("system")
    if sysinfo:
        prob = Problem(Path(ham["pauli"]).stem, h, sysinfo["n_spatial"], sysinfo["n_up"],
                       sysinfo["n_down"], sysinfo.get("mapping", "parity"))
        if prob.qubit_mapping.n_qubits != h.n_qubits:
            raise ConfigError("/hamiltonian/system", "orbital count does not match the qubit count")
        return prob
    if cfg.method not in ("diag",) and not (cfg.method == "vqe" and cfg.ansatz == "none"):
        raise ConfigError("/hamiltonian/system", f"method {cfg.method!r} needs orbital and electron "
                          "counts alongside a Pauli file")
    return Problem(Path(ham["pauli"]).stem, h)


def output_dir(cfg: RunConfig, override: str | None) -> Path:
    if override:
        return Path(override)
    if cfg.output.get("dir"):
        return Path(cfg.output["dir"])
    root = Path(os.environ.get(OUT_ENV, "runs"))
    return root / (cfg.name or cfg.method)


def _write_record(out: Path, rec, cfg: RunConfig) -> None:
    out.mkdir(parents=True, exist_ok=True)
    d = rec.to_dict()
    d["run_config"] = cfg.to_dict()
    (out / "record.json").write_text(json.dumps(d, indent=2, default=_json_default) + "\n")
    (out / "trace.csv").write_text(rec.trace_csv(timing=cfg.output.get("timing", False)))


def _summary_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, SUMMARY_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({**r, "wall_ms": f"{r['wall_ms']:.1f}"})
    return buf.getvalue()


def execute(cfg: RunConfig, base: Path, out: Path) -> dict:
    """Run a validated config, writing artifacts under ``out``; returns a short summary."""
    method = cfg.method
    if method == "forge":
        f = cfg.forging
        source = cfg.hamiltonian.get("bundled")
        if source is None:
            active = cfg.hamiltonian.get("active_space")
            source = (_resolve(cfg.hamiltonian["fcidump"], base),
                      ActiveSpaceSpec.from_dict(active) if active else None)
        rec = run_forging(source, cfg.optimizer, f.get("k"), f.get("layers", 2),
                          f.get("bitstrings"), f.get("schmidt_coeffs"), f.get("full_space"),
                          cfg.seed, f.get("fd_step", 1e-5))
        _write_record(out, rec, cfg)
        return {"method": method, "final_energy": rec.final_energy,
                "reference_energy": rec.reference_energy, "iterations": rec.iterations}

    problem = build_problem(cfg, base)
    if method == "compare":
        methods = cfg.compare.get("methods", ["vqe", "double-adapt", "tetris"])
        records, rows = compare_methods(problem, methods, cfg.optimizer,
                                        {m: cfg.adapt_config(m) for m in methods}, cfg.seed)
        for m, rec in records.items():
            _write_record(out / m, rec, cfg)
        (out / "summary.csv").write_text(_summary_csv(rows))
        return {"method": method, "rows": rows}

    if method in ("mitigation", "zne-experiment", "trex-experiment"):
        circuit, params, adapt_rec = adapted_circuit(problem, cfg.adapt_config(), cfg.seed)
        rows = mitigation_experiment(circuit, params, problem.h, cfg.noise, cfg.zne,
                                     cfg.mitigation_seeds(), reference=problem.reference().amplitudes,
                                     methods=cfg.mitigation_methods(),
                                     calib_shots=cfg.trex.get("calib_shots"))
        out.mkdir(parents=True, exist_ok=True)
        (out / "mitigation.csv").write_text(mitigation_csv(rows))
        medians = {m: statistics.median(r["abs_error"] for r in rows if r["method"] == m)
                   for m in cfg.mitigation_methods()}
        summary = {"method": method, "exact": rows[0]["exact"], "median_abs_error": medians,
                   "circuit": {"operators": adapt_rec.extra["selection"]["operators"],
                               "cnot_cost": adapt_rec.cnot_cost, "parameters": adapt_rec.parameters},
                   "run_config": cfg.to_dict()}
        (out / "record.json").write_text(json.dumps(summary, indent=2, default=_json_default) + "\n")
        return {"method": method, "median_abs_error": medians}

    rec = run_method(problem, method, cfg.optimizer, cfg.adapt_config(), cfg.seed, cfg.ansatz)
    if rec.reference_energy is None:
        rec.reference_energy = problem.reference_energy
    _write_record(out, rec, cfg)
    return {"method": method, "final_energy": rec.final_energy,
            "reference_energy": rec.reference_energy, "iterations": rec.iterations,
            "cnots": rec.cnot_cost, "depth": rec.cnot_depth}


def _cli_path(path: str) -> str:
    """Absolute path for a file flag; bare names fall back to the bundled data directory."""
    p = Path(path)
    if not p.exists() and not p.is_absolute() and (DATA / path).is_file():
        return str(DATA / path)
    return str(p.resolve())


def _raw_from_args(args) -> tuple[dict, Path]:
    if args.config and args.preset:
        raise ConfigError("/", "give either a config file or --preset, not both")
    base = Path.cwd()
    if args.preset:
        raw = load_preset(args.preset)
    elif args.config:
        try:
            raw = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise ConfigError("/", f"cannot read {args.config}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError("/", f"invalid JSON at line {exc.lineno} column {exc.colno}") from None
        base = Path(args.config).resolve().parent
    else:
        raw = {}
    sources = {k: getattr(args, k, None) for k in ("pauli", "fcidump", "bundled")}
    sources = {k: v if k == "bundled" else _cli_path(v) for k, v in sources.items() if v}
    if sources:
        raw["hamiltonian"] = sources
    if getattr(args, "method", None):
        raw["method"] = args.method
    if getattr(args, "seed", None) is not None:
        raw["seed"] = args.seed
    return raw, base


def _print_table(summary: dict) -> None:
    if "rows" in summary:
        print(_summary_csv(summary["rows"]), end="")
    else:
        print(json.dumps(summary, indent=2, default=_json_default))


def cmd_run(args) -> int:
    raw, base = _raw_from_args(args)
    cfg = parse_config(raw)
    for w in cfg.warnings:
        log.warning(w)
    out = output_dir(cfg, args.out)
    summary = execute(cfg, base, out)
    _print_table(summary)
    print(f"artifacts: {out}", file=sys.stderr)
    return EXIT_OK


def cmd_validate(args) -> int:
    raw, _ = _raw_from_args(args)
    cfg = parse_config(raw)
    for w in cfg.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print("OK")
    print(json.dumps(cfg.to_dict(), indent=2, default=_json_default))
    return EXIT_OK


def cmd_presets(args) -> int:
    if args.name:
        print(json.dumps(load_preset(args.name), indent=2))
        return EXIT_OK
    for name in preset_names():
        print(f"{name:20s} {load_preset(name).get('description', '')}")
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vqe-forge", description="VQE, ADAPT, mitigation and forging runs")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn in (("run", cmd_run), ("validate", cmd_validate)):
        s = sub.add_parser(name)
        s.add_argument("config", nargs="?", help="JSON run config")
        s.add_argument("--preset", help="bundled preset name")
        s.add_argument("--method", help="override the config method")
        s.add_argument("--pauli", help="Hamiltonian as a Pauli text file")
        s.add_argument("--fcidump", help="Hamiltonian as an FCIDUMP file")
        s.add_argument("--bundled", help="bundled Hamiltonian name")
        s.add_argument("--seed", type=int)
        if name == "run":
            s.add_argument("--out", help=f"output directory (default ${OUT_ENV}/<name>)")
        s.set_defaults(fn=fn)
    s = sub.add_parser("presets", help="list presets or print one")
    s.add_argument("name", nargs="?")
    s.set_defaults(fn=cmd_presets)
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.fn(args)
    except (ConfigError, FCIDumpError, PauliFormatError, ForgingError, ActiveSpaceError,
            MappingError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"config error: file not found: {exc.filename}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, UnrecoverableObservableError, CalibrationError,
            np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
