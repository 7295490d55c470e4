"""Gradient-screened ansatz growth: canonical ADAPT, double-threshold and TETRIS."""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .ansatz import ExcitationOp, PoolSelection, build_circuit, cnot_cost, cnot_depth, excitation_blocks
from .pauli import PauliSum, commutator_expectation_from
from .sim import apply_circuit_array, energy_and_gradient
from .vqe import OptimizerConfig, RunRecord, optimize


@dataclass
class AdaptConfig:
    eps_double: float = 1e-3
    eps_single: float = 1e-3
    eps_adapt: float = 1e-3
    max_operators: int = 200
    allow_repeats: bool = True
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)

    def __post_init__(self):
        if isinstance(self.optimizer, dict):
            self.optimizer = OptimizerConfig(**self.optimizer)
        for name in ("eps_double", "eps_single", "eps_adapt"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_operators <= 0:
            raise ValueError("max_operators must be positive")


def pool_gradients(h: PauliSum, state, pool: list[ExcitationOp]) -> np.ndarray:
    """``dE/dtheta`` at ``theta = 0`` for appending each pool operator to ``state``."""
    psi = getattr(state, "amplitudes", state)
    h_psi = h.apply(psi)
    return np.array([commutator_expectation_from(h_psi, op.generator, psi) for op in pool])


def _state(h, ops, params, reference):
    return apply_circuit_array(build_circuit(ops, h.n_qubits), params, reference)


def _optimize_ops(h, ops, reference, opt, x0, rows, t0):
    circuit = build_circuit(ops, h.n_qubits)
    offset = rows[-1]["iteration"] + 1 if rows else 0
    x, _, converged = optimize(lambda p: energy_and_gradient(circuit, p, h, reference),
                               x0, opt, offset=offset, rows=rows, t0=t0)
    return x, converged


def _finish(rec: RunRecord, ops, x, t0) -> RunRecord:
    rec.parameters = list(map(float, x))
    rec.final_energy = rec.rows[-1]["energy"]
    n_singles = sum(op.kind == "single" for op in ops)
    rec.cnot_cost = cnot_cost((n_singles, len(ops) - n_singles))
    rec.cnot_depth = cnot_depth(excitation_blocks(ops))
    rec.extra["selection"] = {"n_singles": n_singles, "n_doubles": len(ops) - n_singles,
                              "operators": [op.name for op in ops]}
    rec.wall_ms = (time.perf_counter() - t0) * 1e3
    return rec


def _reference_row(h, reference, t0):
    from .pauli import expectation
    return {"iteration": 0, "energy": expectation(h, reference), "grad_norm": 0.0,
            "elapsed_ms": (time.perf_counter() - t0) * 1e3}


def _screen(grads, eps):
    """Indices with ``|g| > eps`` ordered by descending ``|g|``, ties to the lower index."""
    keep = [k for k in range(len(grads)) if abs(grads[k]) > eps]
    return sorted(keep, key=lambda k: (-abs(grads[k]), k))


def run_double_threshold_adapt(h: PauliSum, pool, reference, cfg: AdaptConfig | None = None,
                               seed: int = 0) -> RunRecord:
    """Screen doubles at the reference, optimize them, screen singles there, then run VQE on both."""
    cfg = cfg or AdaptConfig()
    t0 = time.perf_counter()
    psi0 = getattr(reference, "amplitudes", reference)
    doubles = [op for op in pool if op.kind == "double"]
    singles = [op for op in pool if op.kind == "single"]
    rec = RunRecord("double-adapt", {"adapt": asdict(cfg)}, seed)

    g_d = pool_gradients(h, psi0, doubles)
    sel_d = [doubles[k] for k in _screen(g_d, cfg.eps_double)]
    rec.extra["double_gradients"] = {op.name: float(g) for op, g in zip(doubles, g_d)}
    if not sel_d:
        rec.rows.append(_reference_row(h, psi0, t0))
        rec.extra["flags"] = ["reference already stationary"]
        return _finish(rec, [], np.zeros(0), t0)

    x_d, _ = _optimize_ops(h, sel_d, psi0, cfg.optimizer, np.zeros(len(sel_d)), rec.rows, t0)
    stage2_end = rec.rows[-1]["iteration"]
    psi_d = _state(h, sel_d, x_d, psi0)
    g_s = pool_gradients(h, psi_d, singles)
    sel_s = [singles[k] for k in _screen(g_s, cfg.eps_single)]
    rec.extra["single_gradients"] = {op.name: float(g) for op, g in zip(singles, g_s)}

    ops = sel_d + sel_s
    # stage 3 is a fresh VQE from the reference (zero parameters)
    x, converged = _optimize_ops(h, ops, psi0, cfg.optimizer, np.zeros(len(ops)), rec.rows, t0)
    rec.extra["stages"] = {"doubles_end_iteration": stage2_end,
                           "final_vqe_iterations": rec.rows[-1]["iteration"] - stage2_end - 1,
                           "selected_doubles": [op.name for op in sel_d],
                           "selected_singles": [op.name for op in sel_s]}
    rec.extra["converged"] = converged
    return _finish(rec, ops, x, t0)


def _grow(h, pool, reference, cfg, seed, method, pick):
    t0 = time.perf_counter()
    psi0 = getattr(reference, "amplitudes", reference)
    rec = RunRecord(method, {"adapt": asdict(cfg)}, seed)
    ops: list[ExcitationOp] = []
    x = np.zeros(0)
    history = []
    flags = []
    psi = psi0
    rec.rows.append(_reference_row(h, psi0, t0))
    while True:
        if cfg.allow_repeats:
            avail = list(range(len(pool)))
        else:
            avail = [k for k in range(len(pool)) if pool[k] not in ops]
        grads = pool_gradients(h, psi, [pool[k] for k in avail])
        gmax = float(np.max(np.abs(grads))) if grads.size else 0.0
        if gmax < cfg.eps_adapt:
            break
        if len(ops) >= cfg.max_operators:
            flags.append("max_operators reached")
            break
        chosen = pick(avail, grads, pool, cfg)[: cfg.max_operators - len(ops)]
        history.append({"round": len(history) + 1, "operators": [int(k) for k in chosen],
                        "gradients": [float(grads[avail.index(k)]) for k in chosen]})
        ops += [pool[k] for k in chosen]
        x, _ = _optimize_ops(h, ops, psi0, cfg.optimizer,
                             np.concatenate([x, np.zeros(len(chosen))]), rec.rows, t0)
        history[-1]["energy"] = rec.rows[-1]["energy"]
        psi = _state(h, ops, x, psi0)
    rec.extra["history"] = history
    rec.extra["flags"] = flags
    return _finish(rec, ops, x, t0)


def _pick_argmax(avail, grads, pool, cfg):
    k = int(np.argmax(np.abs(grads)))  # first maximum = lowest pool index
    return [avail[k]]


def _pick_tetris(avail, grads, pool, cfg):
    order = sorted(range(len(avail)), key=lambda i: (-abs(grads[i]), avail[i]))
    used: set = set()
    layer = []
    for i in order:
        if abs(grads[i]) < cfg.eps_adapt:
            break
        op = pool[avail[i]]
        if op.support & used:
            continue
        layer.append(avail[i])
        used |= op.support
    return layer


def run_adapt(h: PauliSum, pool, reference, cfg: AdaptConfig | None = None, seed: int = 0) -> RunRecord:
    """One operator per round, chosen by largest |gradient|."""
    return _grow(h, pool, reference, cfg or AdaptConfig(), seed, "adapt", _pick_argmax)


def run_tetris_adapt(h: PauliSum, pool, reference, cfg: AdaptConfig | None = None,
                     seed: int = 0) -> RunRecord:
    """Like :func:`run_adapt` but each round adds a layer of support-disjoint operators."""
    return _grow(h, pool, reference, cfg or AdaptConfig(), seed, "tetris", _pick_tetris)


def selected_ops(record: RunRecord, pool) -> list[ExcitationOp]:
    """Rebuild the operator sequence of an adaptive run from its record."""
    by_name = {op.name: op for op in pool}
    return [by_name[name] for name in record.extra["selection"]["operators"]]
