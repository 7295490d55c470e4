"""Problem loading and the composite experiments behind the CLI presets."""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .adapt import (AdaptConfig, run_adapt, run_double_threshold_adapt, run_tetris_adapt,
                    selected_ops)
from .ansatz import build_circuit, cnot_cost, cnot_depth, excitation_blocks, generate_pool, givens_network
from .fermion import (ActiveSpaceSpec, QubitMapping, apply_active_space, build_fermion_hamiltonian,
                      jordan_wigner, read_fcidump)
from .forging import ForgedAnsatz, default_bitstrings, run_forged_vqe
from .pauli import PauliSum, read_pauli_sum
from .sim import ParamCircuit, energy, prepare_basis
from .vqe import OptimizerConfig, RunRecord, exact_ground, run_vqe

DATA = resources.files("vqe_forge") / "data"


def data_path(name: str) -> Path:
    return Path(str(DATA / name))


def manifest() -> dict:
    return json.loads(data_path("hamiltonians.json").read_text())


@dataclass
class Problem:
    name: str
    h: PauliSum
    n_spatial: int | None = None
    n_up: int | None = None
    n_down: int | None = None
    mapping: str | None = None
    reference_energy: float | None = None
    meta: dict = field(default_factory=dict)

    @property
    def has_fermions(self) -> bool:
        return self.n_spatial is not None

    @property
    def qubit_mapping(self) -> QubitMapping:
        return QubitMapping(self.mapping, 2 * self.n_spatial, self.n_up, self.n_down)

    def reference(self):
        if not self.has_fermions:
            return prepare_basis(self.h.n_qubits, "0" * self.h.n_qubits)
        return prepare_basis(self.h.n_qubits, self.qubit_mapping.hf_bitstring())

    def pool(self):
        if not self.has_fermions:
            raise ValueError("an excitation pool needs orbital and electron counts")
        return generate_pool(self.n_spatial, self.n_up, self.n_down, self.qubit_mapping)


def bundled_problem(name: str) -> Problem:
    man = manifest()
    if name not in man:
        raise KeyError(f"unknown bundled Hamiltonian {name!r}; available: {sorted(man)}")
    m = man[name]
    h = read_pauli_sum(data_path(m["pauli"]))
    return Problem(name, h, len(m["active_space"]["active"]), m["n_up"], m["n_down"], m["mapping"],
                   m["exact_energy"], m)


def fcidump_problem(path, active: ActiveSpaceSpec | None, mapping: str = "parity") -> Problem:
    ints = read_fcidump(path)
    if active is not None:
        ints = apply_active_space(ints, active)
    fh = build_fermion_hamiltonian(ints)
    qm = QubitMapping(mapping, fh.n_spin_orbitals, ints.n_up, ints.n_down)
    return Problem(Path(path).stem, qm.map_hamiltonian(fh), ints.n_spatial, ints.n_up, ints.n_down,
                   mapping)


def run_method(problem: Problem, method: str, opt: OptimizerConfig, adapt: AdaptConfig,
               seed: int = 0, ansatz: str = "uccsd") -> RunRecord:
    if method == "diag":
        t0 = time.perf_counter()
        e, _ = exact_ground(problem.h)
        rec = RunRecord("diag", {}, seed, rows=[{"iteration": 0, "energy": e, "grad_norm": 0.0,
                                                 "elapsed_ms": (time.perf_counter() - t0) * 1e3}],
                        final_energy=e, wall_ms=(time.perf_counter() - t0) * 1e3)
        rec.reference_energy = e
        return rec
    ref = problem.reference()
    if method == "vqe":
        if ansatz == "none":
            circuit, pool = ParamCircuit(problem.h.n_qubits), []
        else:
            pool = problem.pool()
            circuit = build_circuit(pool, problem.h.n_qubits)
        rec = run_vqe(problem.h, circuit, ref, opt, seed)
        rec.cnot_cost = cnot_cost(pool)
        rec.cnot_depth = cnot_depth(excitation_blocks(pool))
        rec.extra["selection"] = {"n_singles": sum(o.kind == "single" for o in pool),
                                  "n_doubles": sum(o.kind == "double" for o in pool),
                                  "operators": [o.name for o in pool]}
        return rec
    runner = {"adapt": run_adapt, "double-adapt": run_double_threshold_adapt,
              "tetris": run_tetris_adapt}.get(method)
    if runner is None:
        raise ValueError(f"unknown method {method!r}")
    return runner(problem.h, problem.pool(), ref, adapt, seed)


SUMMARY_COLUMNS = ["method", "final_energy", "exact_energy", "abs_error", "cnots", "depth",
                   "iterations", "wall_ms"]


def summary_row(rec: RunRecord, exact: float) -> dict:
    return {"method": rec.method, "final_energy": rec.final_energy, "exact_energy": exact,
            "abs_error": abs(rec.final_energy - exact), "cnots": rec.cnot_cost,
            "depth": rec.cnot_depth, "iterations": rec.iterations, "wall_ms": rec.wall_ms}


def compare_methods(problem: Problem, methods, opt: OptimizerConfig, adapt_cfgs: dict,
                    seed: int = 0) -> tuple[dict, list[dict]]:
    """Run each method; returns records keyed by method and summary rows sorted by method name."""
    exact = exact_ground(problem.h)[0]
    records = {}
    for m in methods:
        rec = run_method(problem, m, opt, adapt_cfgs[m], seed)
        rec.reference_energy = exact
        records[m] = rec
    rows = [summary_row(records[m], exact) for m in sorted(records)]
    return records, rows


def adapted_circuit(problem: Problem, adapt: AdaptConfig, seed: int = 0):
    """Double-threshold ADAPT circuit and optimized parameters for a problem."""
    pool = problem.pool()
    rec = run_double_threshold_adapt(problem.h, pool, problem.reference(), adapt, seed)
    ops = selected_ops(rec, pool)
    return build_circuit(ops, problem.h.n_qubits), np.array(rec.parameters), rec


def forging_problem(source) -> tuple[PauliSum, int, int]:
    """Full (un-reduced) JW Hamiltonian of an active space, with ``(n_spatial, n_per_spin)``.

    ``source`` is a bundled name or a ``(fcidump_path, ActiveSpaceSpec | None)`` pair.
    """
    if isinstance(source, str):
        m = manifest()[source]
        source = (data_path(m["fcidump"]), ActiveSpaceSpec.from_dict(m["active_space"]))
    path, active = source
    ints = read_fcidump(path)
    if active is not None:
        ints = apply_active_space(ints, active)
    if ints.n_up != ints.n_down:
        raise ValueError("forging with a shared bitstring list needs equal spin populations")
    return jordan_wigner(build_fermion_hamiltonian(ints)), ints.n_spatial, ints.n_up


def make_forged_ansatz(n_spatial: int, n_per_spin: int, k: int | None = None, layers: int = 2,
                       bitstrings=None, schmidt_coeffs=None) -> ForgedAnsatz:
    bs = list(bitstrings) if bitstrings else default_bitstrings(n_spatial, n_per_spin, k)
    if schmidt_coeffs is None:
        lam = np.full(len(bs), 0.1)
        lam[0] = 1.0
    else:
        lam = np.asarray(schmidt_coeffs, float)
    return ForgedAnsatz(n_spatial, bs, lam, givens_network(n_spatial, layers, "u"),
                        givens_network(n_spatial, layers, "v"), n_per_spin=n_per_spin)


def run_forging(source, opt: OptimizerConfig, k: int | None = None, layers: int = 2,
                bitstrings=None, schmidt_coeffs=None, full_space: str | None = None,
                seed: int = 0, fd_step: float = 1e-5) -> RunRecord:
    h, n, ps = forging_problem(source)
    ansatz = make_forged_ansatz(n, ps, k, layers, bitstrings, schmidt_coeffs)
    rec = run_forged_vqe(h, ansatz, opt, seed, fd_step)
    rec.extra["subsystem_exact_energy"] = exact_ground(h)[0]
    if isinstance(source, str):
        rec.extra["subsystem"] = source
    if full_space is not None:
        rec.reference_energy = manifest()[full_space]["exact_energy"]
        rec.extra["full_space"] = full_space
    return rec
