"""Dense statevector simulation of parameterized Pauli-rotation circuits.

Index convention: qubit 0 is the least significant bit of the amplitude
index, matching the Pauli mask convention in :mod:`vqe_forge.pauli`.
Simulation functions accept arrays with leading batch axes, which the noisy
trajectory code uses to propagate many trajectories at once.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from .pauli import DimensionError, PauliSum, PauliTerm, expectation

MAX_QUBITS = 22
NORM_TOL = 1e-10


class CircuitError(ValueError):
    pass


@dataclass
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (1 << self.n_qubits,):
            raise DimensionError(f"expected {1 << self.n_qubits} amplitudes")
        norm = np.linalg.norm(self.amplitudes)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {norm} differs from 1")

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def prepare_basis(n_qubits: int, bitstring: str) -> StateVector:
    """Basis state; ``bitstring[q]`` is the value of qubit ``q``."""
    if len(bitstring) != n_qubits:
        raise DimensionError(f"bitstring of length {len(bitstring)} for {n_qubits} qubits")
    if n_qubits > MAX_QUBITS:
        raise DimensionError(f"{n_qubits} qubits exceeds the dense ceiling of {MAX_QUBITS}")
    index = bitstring_to_index(bitstring)
    amps = np.zeros(1 << n_qubits, dtype=complex)
    amps[index] = 1.0
    return StateVector(n_qubits, amps)


def bitstring_to_index(bits: str) -> int:
    if any(b not in "01" for b in bits):
        raise ValueError(f"bitstring {bits!r} must contain only 0/1")
    return sum(1 << q for q, b in enumerate(bits) if b == "1")


def index_to_bitstring(index: int, n_qubits: int) -> str:
    return "".join("1" if (index >> q) & 1 else "0" for q in range(n_qubits))


# Gates ---------------------------------------------------------------------

@dataclass(frozen=True)
class XGate:
    qubit: int

    def qubits(self) -> tuple[int, ...]:
        return (self.qubit,)


@dataclass(frozen=True)
class CNOT:
    control: int
    target: int

    def qubits(self) -> tuple[int, ...]:
        return (self.control, self.target)


@dataclass(frozen=True)
class PauliRotation:
    """``exp(-i * coefficient * theta[param] / 2 * P)``."""

    pauli: PauliTerm
    param: int
    coefficient: float = 1.0

    def qubits(self) -> tuple[int, ...]:
        return tuple(self.pauli.qubits())


Gate = Union[XGate, CNOT, PauliRotation]


@dataclass
class ParamCircuit:
    n_qubits: int
    gates: list = field(default_factory=list)
    param_names: list = field(default_factory=list)

    def __post_init__(self):
        self.validate()

    @property
    def n_params(self) -> int:
        return len(self.param_names)

    def validate(self) -> None:
        used = set()
        for g in self.gates:
            for q in g.qubits():
                if not 0 <= q < self.n_qubits:
                    raise CircuitError(f"gate {g} touches qubit {q} outside 0..{self.n_qubits - 1}")
            if isinstance(g, CNOT) and g.control == g.target:
                raise CircuitError("CNOT control equals target")
            if isinstance(g, PauliRotation):
                if g.pauli.n_qubits != self.n_qubits:
                    raise CircuitError("rotation Pauli has the wrong qubit count")
                if not 0 <= g.param < self.n_params:
                    raise CircuitError(f"rotation references unknown parameter {g.param}")
                used.add(g.param)
        missing = set(range(self.n_params)) - used
        if missing:
            raise CircuitError(f"parameters {sorted(missing)} are not used by any gate")

    def inverse(self) -> "ParamCircuit":
        inv = []
        for g in reversed(self.gates):
            if isinstance(g, PauliRotation):
                inv.append(PauliRotation(g.pauli, g.param, -g.coefficient))
            else:
                inv.append(g)
        return ParamCircuit(self.n_qubits, inv, list(self.param_names))

    def extend(self, other: "ParamCircuit") -> "ParamCircuit":
        """Append ``other``; its parameters are renumbered after ours."""
        if other.n_qubits != self.n_qubits:
            raise DimensionError("circuits act on different qubit counts")
        off = self.n_params
        gates = list(self.gates)
        for g in other.gates:
            if isinstance(g, PauliRotation):
                g = PauliRotation(g.pauli, g.param + off, g.coefficient)
            gates.append(g)
        return ParamCircuit(self.n_qubits, gates, self.param_names + other.param_names)


@lru_cache(maxsize=65536)
def _pauli_action(n: int, x: int, z: int) -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(1 << n, dtype=np.int64)
    src = idx ^ x
    sign = 1 - 2 * (np.bitwise_count(src & z) & 1).astype(float)
    phase = (1, 1j, -1, -1j)[bin(x & z).count("1") % 4]
    return src, phase * sign


@lru_cache(maxsize=4096)
def _perm_x(n: int, q: int) -> np.ndarray:
    return np.arange(1 << n, dtype=np.int64) ^ (1 << q)


@lru_cache(maxsize=4096)
def _perm_cnot(n: int, c: int, t: int) -> np.ndarray:
    idx = np.arange(1 << n, dtype=np.int64)
    return idx ^ (((idx >> c) & 1) << t)


def apply_pauli(term: PauliTerm, psi: np.ndarray) -> np.ndarray:
    src, ph = _pauli_action(term.n_qubits, term.x, term.z)
    return ph * psi[..., src]


def _rotate(g: PauliRotation, angle: float, psi: np.ndarray) -> np.ndarray:
    # exp(-i a P) psi = cos(a) psi - i sin(a) P psi
    if angle == 0.0:
        return psi
    src, ph = _pauli_action(g.pauli.n_qubits, g.pauli.x, g.pauli.z)
    return np.cos(angle) * psi - 1j * np.sin(angle) * (ph * psi[..., src])


def apply_gate(g: Gate, n: int, psi: np.ndarray, params: np.ndarray, sign: float = 1.0) -> np.ndarray:
    if isinstance(g, PauliRotation):
        return _rotate(g, sign * 0.5 * g.coefficient * params[g.param], psi)
    if isinstance(g, XGate):
        return psi[..., _perm_x(n, g.qubit)]
    if isinstance(g, CNOT):
        return psi[..., _perm_cnot(n, g.control, g.target)]
    raise CircuitError(f"unsupported gate {g!r}")


def _check_params(circuit: ParamCircuit, params) -> np.ndarray:
    params = np.asarray(params, dtype=float).reshape(-1)
    if params.size != circuit.n_params:
        raise CircuitError(f"expected {circuit.n_params} parameters, got {params.size}")
    return params


def _amps(state, n: int) -> np.ndarray:
    psi = getattr(state, "amplitudes", state)
    psi = np.asarray(psi, dtype=complex)
    if psi.shape[-1] != 1 << n:
        raise DimensionError(f"state has {psi.shape[-1]} amplitudes, circuit needs {1 << n}")
    return psi


def apply_circuit_array(circuit: ParamCircuit, params, psi: np.ndarray) -> np.ndarray:
    params = _check_params(circuit, params)
    psi = _amps(psi, circuit.n_qubits)
    for g in circuit.gates:
        psi = apply_gate(g, circuit.n_qubits, psi, params)
    return psi


def apply_circuit(circuit: ParamCircuit, params, state: StateVector) -> StateVector:
    psi = apply_circuit_array(circuit, params, state)
    return StateVector(circuit.n_qubits, psi)


def energy(circuit: ParamCircuit, params, observable: PauliSum, reference) -> float:
    if observable.n_qubits != circuit.n_qubits:
        raise DimensionError("observable and circuit qubit counts differ")
    return expectation(observable, apply_circuit_array(circuit, params, reference))


def energy_and_gradient(circuit: ParamCircuit, params, observable: PauliSum, reference):
    """Energy and exact gradient by one forward and one reverse (adjoint) sweep."""
    params = _check_params(circuit, params)
    if observable.n_qubits != circuit.n_qubits:
        raise DimensionError("observable and circuit qubit counts differ")
    n = circuit.n_qubits
    psi = apply_circuit_array(circuit, params, reference)
    lam = observable.apply(psi)
    e = float(np.vdot(psi, lam).real)
    grad = np.zeros(circuit.n_params)
    for g in reversed(circuit.gates):
        if isinstance(g, PauliRotation):
            # d/dtheta exp(-i c theta P/2) = -i c/2 P exp(...)  ->  dE = c Im<lam|P|psi>
            grad[g.param] += g.coefficient * np.vdot(lam, apply_pauli(g.pauli, psi)).imag
        psi = apply_gate(g, n, psi, params, sign=-1.0)
        lam = apply_gate(g, n, lam, params, sign=-1.0)
    return e, grad


def energy_gradient(circuit: ParamCircuit, params, observable: PauliSum, reference) -> np.ndarray:
    return energy_and_gradient(circuit, params, observable, reference)[1]


def circuit_unitary(circuit: ParamCircuit, params) -> np.ndarray:
    """Dense unitary built column by column (testing aid)."""
    dim = 1 << circuit.n_qubits
    return apply_circuit_array(circuit, params, np.eye(dim, dtype=complex)).T


@dataclass
class Counts:
    counts: dict
    shots: int

    def __post_init__(self):
        if sum(self.counts.values()) != self.shots:
            raise ValueError("counts do not sum to shots")

    def __getitem__(self, key: str) -> int:
        return self.counts.get(key, 0)

    def probability(self, key: str) -> float:
        return self.counts.get(key, 0) / self.shots


def sample(state, shots: int, seed) -> Counts:
    if shots <= 0:
        raise ValueError("shots must be positive")
    psi = getattr(state, "amplitudes", state)
    n = int(np.log2(psi.size))
    probs = np.abs(psi) ** 2
    probs = probs / probs.sum()
    rng = np.random.default_rng(seed)
    hits = rng.multinomial(shots, probs)
    return Counts({index_to_bitstring(int(i), n): int(hits[i]) for i in np.flatnonzero(hits)}, shots)
