"""Vanilla VQE with ADAM, run records and the exact-diagonalization reference."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .pauli import DimensionError, NonHermitianError, PauliSum
from .sim import ParamCircuit, StateVector, energy_and_gradient

log = logging.getLogger(__name__)

MAX_DIAG_QUBITS = 14
DENSE_DIAG_QUBITS = 11


class NumericalError(RuntimeError):
    pass


@dataclass
class OptimizerConfig:
    method: str = "adam"
    learning_rate: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    max_iterations: int = 2000
    tol: float = 1e-8
    patience: int = 5

    def __post_init__(self):
        if self.method.lower() != "adam":
            raise ValueError(f"unsupported optimizer {self.method!r}; only ADAM is implemented")
        for name in ("learning_rate", "beta1", "beta2"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name}={v} must lie in (0, 1)")
        if self.max_iterations <= 0:
            raise ValueError("max_iterations must be positive")
        if self.patience <= 0 or self.tol < 0 or self.epsilon <= 0:
            raise ValueError("patience and epsilon must be positive, tol non-negative")


class Adam:
    """Bias-corrected ADAM on a flat parameter vector."""

    def __init__(self, cfg: OptimizerConfig, size: int):
        self.cfg = cfg
        self.m = np.zeros(size)
        self.v = np.zeros(size)
        self.t = 0

    def step(self, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
        c = self.cfg
        self.t += 1
        self.m = c.beta1 * self.m + (1 - c.beta1) * grad
        self.v = c.beta2 * self.v + (1 - c.beta2) * grad * grad
        m_hat = self.m / (1 - c.beta1 ** self.t)
        v_hat = self.v / (1 - c.beta2 ** self.t)
        return params - c.learning_rate * m_hat / (np.sqrt(v_hat) + c.epsilon)


@dataclass
class RunRecord:
    method: str
    config: dict
    seed: int
    rows: list = field(default_factory=list)
    final_energy: float = math.nan
    parameters: list = field(default_factory=list)
    cnot_cost: Optional[int] = None
    cnot_depth: Optional[int] = None
    wall_ms: float = 0.0
    reference_energy: Optional[float] = None
    extra: dict = field(default_factory=dict)

    @property
    def iterations(self) -> int:
        return len(self.rows) - 1 if self.rows else 0

    @property
    def energies(self) -> np.ndarray:
        return np.array([r["energy"] for r in self.rows])

    def iterations_to(self, target: float, tol: float) -> Optional[int]:
        """First recorded iteration whose energy is within ``tol`` of ``target``."""
        for r in self.rows:
            if abs(r["energy"] - target) < tol:
                return r["iteration"]
        return None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, default=_json_default)

    def trace_csv(self, timing: bool = False) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iter", "energy", "grad_norm", "elapsed_ms"])
        for r in self.rows:
            w.writerow([r["iteration"], repr(r["energy"]), repr(r["grad_norm"]),
                        f"{r['elapsed_ms']:.3f}" if timing else ""])
        return buf.getvalue()


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def exact_ground(h: PauliSum) -> tuple[float, StateVector]:
    """Lowest eigenpair; dense up to 11 qubits, sparse Lanczos above."""
    if h.n_qubits > MAX_DIAG_QUBITS:
        raise DimensionError(f"{h.n_qubits} qubits exceeds the diagonalization limit {MAX_DIAG_QUBITS}")
    if not h.is_hermitian():
        raise NonHermitianError("exact_ground needs a Hermitian operator")
    if h.n_qubits <= DENSE_DIAG_QUBITS:
        mat = h.to_matrix()
        if not np.iscomplexobj(mat) or np.abs(mat.imag).max(initial=0.0) == 0.0:
            mat = mat.real
        vals, vecs = scipy.linalg.eigh(mat, subset_by_index=[0, 0])
        e, v = float(vals[0]), vecs[:, 0].astype(complex)
    else:
        vals, vecs = scipy.sparse.linalg.eigsh(h.to_sparse(), k=1, which="SA", tol=1e-12)
        e, v = float(vals[0]), vecs[:, 0]
    v = v / np.linalg.norm(v)
    resid = np.linalg.norm(h.apply(v) - e * v)
    if resid > 1e-8:
        raise NumericalError(f"eigenvector residual {resid:.2e} exceeds 1e-8")
    return e, StateVector(h.n_qubits, v)


def optimize(objective: Callable, x0: np.ndarray, opt: OptimizerConfig,
             project: Callable | None = None, offset: int = 0, rows: list | None = None,
             t0: float | None = None):
    """ADAM loop on ``objective(x) -> (energy, gradient)`` with plateau stopping.

    Row ``k`` holds the energy at the parameters before step ``k``; the loop
    stops after ``patience`` consecutive ``|dE| < tol`` or at the iteration cap.
    Returns ``(x, rows, converged)``.
    """
    rows = [] if rows is None else rows
    t0 = time.perf_counter() if t0 is None else t0
    x = np.array(x0, dtype=float)
    adam = Adam(opt, x.size)
    quiet = 0
    prev = None
    converged = False
    for it in range(opt.max_iterations + 1):
        e, g = objective(x)
        if not np.isfinite(e) or not np.all(np.isfinite(g)):
            raise NumericalError(f"non-finite energy or gradient at iteration {offset + it}")
        rows.append({"iteration": offset + it, "energy": float(e),
                     "grad_norm": float(np.max(np.abs(g))) if g.size else 0.0,
                     "elapsed_ms": (time.perf_counter() - t0) * 1e3})
        if prev is not None and abs(e - prev) < opt.tol:
            quiet += 1
            if quiet >= opt.patience:
                converged = True
                break
        else:
            quiet = 0
        prev = e
        if it == opt.max_iterations or x.size == 0:
            converged = converged or x.size == 0
            break
        x = adam.step(x, g)
        if project is not None:
            x = project(x)
    return x, rows, converged


def run_vqe(h: PauliSum, ansatz: ParamCircuit, reference, opt: OptimizerConfig | None = None,
            seed: int = 0, initial_params=None, method: str = "vqe") -> RunRecord:
    opt = opt or OptimizerConfig()
    if h.n_qubits != ansatz.n_qubits:
        raise DimensionError("Hamiltonian and ansatz qubit counts differ")
    t0 = time.perf_counter()
    x0 = np.zeros(ansatz.n_params) if initial_params is None else np.asarray(initial_params, float)
    x, rows, converged = optimize(
        lambda p: energy_and_gradient(ansatz, p, h, reference), x0, opt, t0=t0)
    rec = RunRecord(method=method, config={"optimizer": asdict(opt)}, seed=seed, rows=rows,
                    final_energy=rows[-1]["energy"], parameters=x.tolist(),
                    wall_ms=(time.perf_counter() - t0) * 1e3)
    rec.extra["converged"] = converged
    return rec
