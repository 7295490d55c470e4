"""Entanglement forging: a 2N-qubit Schmidt-form state evaluated with N-qubit simulations.

The forged state is ``sum_n lambda_n (U|b_n>) (x) (V|b_n>)`` where the first
factor lives on qubits ``0..N-1`` (spin up) and the second on ``N..2N-1``.
"""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from itertools import combinations

import numpy as np

from .pauli import DimensionError, PauliSum, PauliTerm
from .sim import ParamCircuit, apply_circuit_array, bitstring_to_index
from .vqe import OptimizerConfig, RunRecord, optimize


class ForgingError(ValueError):
    pass


@dataclass
class TensorSplitHamiltonian:
    n_half: int
    terms: list  # (coeff, P_up, P_down)

    def reassemble(self) -> PauliSum:
        n = self.n_half
        return PauliSum(
            ((c, PauliTerm(2 * n, pu.x | (pd.x << n), pu.z | (pd.z << n))) for c, pu, pd in self.terms),
            2 * n,
        )


def split_hamiltonian(h: PauliSum) -> TensorSplitHamiltonian:
    if h.n_qubits % 2:
        raise ForgingError(f"cannot split {h.n_qubits} qubits into equal halves")
    n = h.n_qubits // 2
    low = (1 << n) - 1
    terms = [(c.real, PauliTerm(n, t.x & low, t.z & low), PauliTerm(n, t.x >> n, t.z >> n))
             for c, t in h.terms]
    return TensorSplitHamiltonian(n, terms)


@dataclass
class ForgedAnsatz:
    n_half: int
    bitstrings: list
    schmidt_coeffs: np.ndarray
    u_circuit: ParamCircuit
    v_circuit: ParamCircuit
    theta_u: np.ndarray = None
    theta_v: np.ndarray = None
    n_per_spin: int | None = None

    def __post_init__(self):
        self.schmidt_coeffs = np.asarray(self.schmidt_coeffs, dtype=float)
        if self.theta_u is None:
            self.theta_u = np.zeros(self.u_circuit.n_params)
        if self.theta_v is None:
            self.theta_v = np.zeros(self.v_circuit.n_params)
        self.theta_u = np.asarray(self.theta_u, dtype=float)
        self.theta_v = np.asarray(self.theta_v, dtype=float)
        self.validate()

    def validate(self) -> None:
        if not self.bitstrings:
            raise ForgingError("at least one bitstring is required")
        if len(set(self.bitstrings)) != len(self.bitstrings):
            raise ForgingError("bitstrings must be distinct")
        for b in self.bitstrings:
            if len(b) != self.n_half:
                raise ForgingError(
                    f"length rule: bitstring {b!r} has {len(b)} bits but there are "
                    f"{self.n_half} spatial orbitals")
            if self.n_per_spin is not None and b.count("1") != self.n_per_spin:
                raise ForgingError(
                    f"popcount rule: bitstring {b!r} has {b.count('1')} ones but each spin "
                    f"holds {self.n_per_spin} electrons")
        if self.schmidt_coeffs.shape != (len(self.bitstrings),):
            raise ForgingError("one Schmidt coefficient per bitstring is required")
        if not np.linalg.norm(self.schmidt_coeffs) > 0:
            raise ForgingError("Schmidt coefficients are all zero")
        for c in (self.u_circuit, self.v_circuit):
            if c.n_qubits != self.n_half:
                raise ForgingError("half circuits must act on n_half qubits")
        if self.theta_u.size != self.u_circuit.n_params or self.theta_v.size != self.v_circuit.n_params:
            raise ForgingError("half-circuit parameter vectors have the wrong length")

    @property
    def K(self) -> int:
        return len(self.bitstrings)

    @property
    def normalized_coeffs(self) -> np.ndarray:
        return self.schmidt_coeffs / np.linalg.norm(self.schmidt_coeffs)

    def flat(self) -> np.ndarray:
        return np.concatenate([self.schmidt_coeffs, self.theta_u, self.theta_v])

    def with_flat(self, x) -> "ForgedAnsatz":
        k, nu = self.K, self.u_circuit.n_params
        return ForgedAnsatz(self.n_half, self.bitstrings, x[:k], self.u_circuit, self.v_circuit,
                            x[k:k + nu], x[k + nu:], self.n_per_spin)

    def to_dict(self) -> dict:
        return {"n_half": self.n_half, "bitstrings": list(self.bitstrings),
                "schmidt_coeffs": self.schmidt_coeffs.tolist(), "theta_u": self.theta_u.tolist(),
                "theta_v": self.theta_v.tolist(), "n_per_spin": self.n_per_spin}


def _forging_states(ansatz: ForgedAnsatz):
    """Basis and superposition inputs with their recombination weights, in (n, m, p) order."""
    lam = ansatz.normalized_coeffs
    dim = 1 << ansatz.n_half
    idx = [bitstring_to_index(b) for b in ansatz.bitstrings]
    states, weights = [], []
    for n, i in enumerate(idx):
        v = np.zeros(dim, dtype=complex)
        v[i] = 1.0
        states.append(v)
        weights.append(lam[n] ** 2)
    for n, m in combinations(range(ansatz.K), 2):
        for p in range(4):
            v = np.zeros(dim, dtype=complex)
            v[idx[n]] = 1 / np.sqrt(2)
            v[idx[m]] = 1j ** p / np.sqrt(2)
            states.append(v)
            weights.append(lam[n] * lam[m] * (-1) ** p)
    return np.array(states), np.array(weights)


def _half_expectations(psi: np.ndarray, paulis: list) -> np.ndarray:
    """``out[t, s] = <psi_s| P_t |psi_s>`` for a batch of half states."""
    from .sim import apply_pauli

    return np.array([np.einsum("si,si->s", psi.conj(), apply_pauli(p, psi)).real for p in paulis])


def forged_expectation(ansatz: ForgedAnsatz, h_split: TensorSplitHamiltonian) -> float:
    if h_split.n_half != ansatz.n_half:
        raise DimensionError("Hamiltonian halves and ansatz halves differ in size")
    states, weights = _forging_states(ansatz)
    up = apply_circuit_array(ansatz.u_circuit, ansatz.theta_u, states)
    dn = apply_circuit_array(ansatz.v_circuit, ansatz.theta_v, states)
    ups = sorted({pu for _, pu, _ in h_split.terms})
    dns = sorted({pd for _, _, pd in h_split.terms})
    eu = _half_expectations(up, ups)
    ed = _half_expectations(dn, dns)
    iu = {p: k for k, p in enumerate(ups)}
    idn = {p: k for k, p in enumerate(dns)}
    total = 0.0
    for c, pu, pd in h_split.terms:
        total += c * float(np.dot(weights, eu[iu[pu]] * ed[idn[pd]]))
    return total


def forged_statevector(ansatz: ForgedAnsatz) -> np.ndarray:
    """The explicit 2N-qubit state (up half on the low qubits)."""
    lam = ansatz.normalized_coeffs
    dim = 1 << ansatz.n_half
    psi = np.zeros(dim * dim, dtype=complex)
    for n, b in enumerate(ansatz.bitstrings):
        e = np.zeros(dim, dtype=complex)
        e[bitstring_to_index(b)] = 1.0
        u = apply_circuit_array(ansatz.u_circuit, ansatz.theta_u, e)
        v = apply_circuit_array(ansatz.v_circuit, ansatz.theta_v, e)
        psi += lam[n] * np.kron(v, u)
    return psi


def default_bitstrings(n_spatial: int, n_per_spin: int, k: int | None = None) -> list[str]:
    """Valid bitstrings ordered by occupied orbital indices (lowest first), truncated to ``k``."""
    out = []
    for occ in combinations(range(n_spatial), n_per_spin):
        out.append("".join("1" if i in occ else "0" for i in range(n_spatial)))
    return out if k is None else out[:k]


def run_forged_vqe(h: PauliSum, ansatz: ForgedAnsatz, opt: OptimizerConfig | None = None,
                   seed: int = 0, fd_step: float = 1e-5) -> RunRecord:
    """ADAM on the forged energy with central finite-difference gradients."""
    opt = opt or OptimizerConfig()
    split = split_hamiltonian(h)
    t0 = time.perf_counter()
    k = ansatz.K

    def energy_of(x):
        return forged_expectation(ansatz.with_flat(x), split)

    def objective(x):
        e = energy_of(x)
        g = np.zeros_like(x)
        for i in range(x.size):
            d = np.zeros_like(x)
            d[i] = fd_step
            g[i] = (energy_of(x + d) - energy_of(x - d)) / (2 * fd_step)
        return e, g

    def project(x):
        x = x.copy()
        x[:k] /= np.linalg.norm(x[:k])
        return x

    x0 = project(ansatz.flat())
    x, rows, converged = optimize(objective, x0, opt, project=project, t0=t0)
    final = ansatz.with_flat(x)
    rec = RunRecord("forge", {"optimizer": asdict(opt), "ansatz": ansatz.to_dict()}, seed,
                    rows=rows, final_energy=rows[-1]["energy"], parameters=x.tolist(),
                    wall_ms=(time.perf_counter() - t0) * 1e3)
    rec.extra["converged"] = converged
    rec.extra["final_ansatz"] = final.to_dict()
    return rec
