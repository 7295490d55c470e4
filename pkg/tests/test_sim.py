import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from conftest import random_state
from vqe_forge.pauli import DimensionError, PauliSum, PauliTerm, pauli_from_label
from vqe_forge.sim import (CNOT, CircuitError, ParamCircuit, PauliRotation, StateVector, XGate,
                           apply_circuit, apply_circuit_array, circuit_unitary, energy,
                           energy_and_gradient, energy_gradient, prepare_basis, sample)

PLUS = np.array([1, 1], complex) / np.sqrt(2)


def random_circuit(n, n_gates, n_params, rng, rotations_only=False):
    gates = []
    for k in range(n_params):
        gates.append(random_rotation(n, k, rng))
    for _ in range(n_gates - n_params):
        kind = 0 if rotations_only else rng.integers(3)
        if kind == 0:
            gates.append(random_rotation(n, int(rng.integers(n_params)), rng))
        elif kind == 1:
            gates.append(XGate(int(rng.integers(n))))
        elif n > 1:
            c, t = rng.choice(n, size=2, replace=False)
            gates.append(CNOT(int(c), int(t)))
    order = rng.permutation(len(gates))
    return ParamCircuit(n, [gates[i] for i in order], [f"t{k}" for k in range(n_params)])


def random_rotation(n, k, rng):
    x, z = int(rng.integers(1 << n)), int(rng.integers(1 << n))
    if x == z == 0:
        z = 1
    return PauliRotation(PauliTerm(n, x, z), k, float(rng.normal()))


def dense_gate(g, n, params):
    dim = 1 << n
    if isinstance(g, PauliRotation):
        return scipy.linalg.expm(-0.5j * g.coefficient * params[g.param] * g.pauli.to_matrix())
    idx = np.arange(dim)
    if isinstance(g, XGate):
        dst = idx ^ (1 << g.qubit)
    else:
        dst = idx ^ (((idx >> g.control) & 1) << g.target)
    m = np.zeros((dim, dim))
    m[dst, idx] = 1
    return m


def dense_unitary(c, params):
    u = np.eye(1 << c.n_qubits, dtype=complex)
    for g in c.gates:
        u = dense_gate(g, c.n_qubits, params) @ u
    return u


def random_hamiltonian(n, n_terms, rng):
    return PauliSum.from_labels([("".join(rng.choice(list("IXYZ"), size=n)), rng.normal())
                                 for _ in range(n_terms)])


# --- states ------------------------------------------------------------------------

def test_prepare_basis_examples():
    s = prepare_basis(2, "10")
    assert s.amplitudes[1] == 1 and np.linalg.norm(s.amplitudes) == 1
    assert np.array_equal(prepare_basis(1, "0").amplitudes, [1, 0])
    with pytest.raises(DimensionError):
        prepare_basis(2, "1")


def test_statevector_norm_checked():
    with pytest.raises(ValueError):
        StateVector(1, np.array([1, 1], complex))


# --- circuits --------------------------------------------------------------------------

def test_circuit_validation():
    z = pauli_from_label("Z")
    with pytest.raises(CircuitError):
        ParamCircuit(1, [XGate(1)])
    with pytest.raises(CircuitError):
        ParamCircuit(2, [CNOT(0, 0)])
    with pytest.raises(CircuitError, match="not used"):
        ParamCircuit(1, [PauliRotation(z, 0)], ["a", "b"])
    with pytest.raises(CircuitError, match="unknown parameter"):
        ParamCircuit(1, [PauliRotation(z, 1)], ["a"])
    c = ParamCircuit(1, [PauliRotation(z, 0)], ["a"])
    with pytest.raises(CircuitError, match="expected 1 parameters"):
        apply_circuit_array(c, [0.1, 0.2], PLUS)


def test_empty_circuit_is_identity(rng):
    psi = random_state(3, rng)
    assert np.array_equal(apply_circuit_array(ParamCircuit(3), [], psi), psi)


def test_rz_pi_maps_plus_to_minus():
    c = ParamCircuit(1, [PauliRotation(pauli_from_label("Z"), 0)], ["t"])
    out = apply_circuit_array(c, [np.pi], PLUS)
    minus = np.array([1, -1]) / np.sqrt(2)
    assert np.isclose(abs(np.vdot(minus, out)), 1.0)


@given(st.integers(0, 100_000), st.integers(1, 4))
@settings(max_examples=40)
def test_apply_matches_dense_unitary(seed, n):
    rng = np.random.default_rng(seed)
    c = random_circuit(n, 5, 2, rng)
    params = rng.normal(size=2)
    psi = random_state(n, rng)
    u = dense_unitary(c, params)
    assert np.allclose(apply_circuit_array(c, params, psi), u @ psi, atol=1e-12)
    assert np.allclose(circuit_unitary(c, params), u, atol=1e-12)


@given(st.integers(0, 100_000), st.integers(6, 10))
@settings(max_examples=15)
def test_norm_preserved_and_inverse_restores(seed, n):
    rng = np.random.default_rng(seed)
    c = random_circuit(n, 12, 4, rng)
    params = rng.normal(size=4)
    psi = random_state(n, rng)
    cur = psi
    for g in c.gates:
        cur = apply_circuit_array(ParamCircuit(n, [g], []) if not isinstance(g, PauliRotation)
                                  else ParamCircuit(n, [PauliRotation(g.pauli, 0, g.coefficient)], ["t"]),
                                  [] if not isinstance(g, PauliRotation) else [params[g.param]], cur)
        assert abs(np.linalg.norm(cur) - 1) < 1e-10
    out = apply_circuit(c, params, StateVector(n, psi))
    back = apply_circuit_array(c.inverse(), params, out.amplitudes)
    assert np.allclose(back, psi, atol=1e-10)


def test_extend_renumbers_parameters(rng):
    a = random_circuit(2, 3, 1, rng, rotations_only=True)
    b = random_circuit(2, 3, 2, rng, rotations_only=True)
    ab = a.extend(b)
    p = rng.normal(size=3)
    psi = random_state(2, rng)
    ref = apply_circuit_array(b, p[1:], apply_circuit_array(a, p[:1], psi))
    assert np.allclose(apply_circuit_array(ab, p, psi), ref)


# --- energies and gradients -------------------------------------------------------------

def test_energy_of_reference_and_constant(rng):
    h = random_hamiltonian(3, 8, rng)
    ref = prepare_basis(3, "110")
    c = random_circuit(3, 4, 2, rng, rotations_only=True)
    m = h.to_matrix()
    assert np.isclose(energy(c, [0, 0], h, ref), m[3, 3].real)
    const = PauliSum.from_labels([("III", 2.5)])
    assert np.isclose(energy(c, rng.normal(size=2), const, ref), 2.5)


def test_energy_matches_sampling():
    rng = np.random.default_rng(3)
    c = random_circuit(3, 6, 3, rng, rotations_only=True)
    params = rng.normal(size=3)
    h = PauliSum.from_labels([("ZII", 0.7), ("IZZ", -0.4), ("ZZZ", 0.2)])
    psi = apply_circuit_array(c, params, prepare_basis(3, "000"))
    counts = sample(psi, 100_000, seed=11)
    est, var = 0.0, 0.0
    for bits, k in counts.counts.items():
        zs = [1 - 2 * int(b) for b in bits]
        v = 0.7 * zs[0] - 0.4 * zs[1] * zs[2] + 0.2 * zs[0] * zs[1] * zs[2]
        est += v * k
        var += v * v * k
    est /= counts.shots
    sigma = np.sqrt((var / counts.shots - est ** 2) / counts.shots)
    assert abs(est - energy(c, params, h, prepare_basis(3, "000"))) < 5 * sigma


def test_rz_gradient_on_plus():
    # exp(-i theta Z / 2)|+> has <X> = cos(theta), <Y> = sin(theta)
    c = ParamCircuit(1, [PauliRotation(pauli_from_label("Z"), 0)], ["t"])
    gx = energy_gradient(c, [0.0], PauliSum.from_labels([("X", 1.0)]), PLUS)
    gy = energy_gradient(c, [0.0], PauliSum.from_labels([("Y", 1.0)]), PLUS)
    assert abs(gx[0]) < 1e-15
    assert np.isclose(gy[0], 1.0)


def test_zero_coefficient_rotation(rng):
    h = random_hamiltonian(2, 5, rng)
    c = random_circuit(2, 4, 1, rng, rotations_only=True)
    extra = ParamCircuit(2, c.gates + [PauliRotation(pauli_from_label("XY"), 1, 0.0)], ["a", "b"])
    ref = prepare_basis(2, "00")
    p = [0.4, 1.3]
    assert energy_gradient(extra, p, h, ref)[1] == 0.0
    assert np.isclose(energy(extra, p, h, ref), energy(c, p[:1], h, ref), atol=1e-14)


@given(st.integers(0, 100_000), st.integers(1, 8))
@settings(max_examples=100)
def test_adjoint_gradient_matches_finite_difference(seed, n):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, 5))
    c = random_circuit(n, k + int(rng.integers(0, 6)), k, rng)
    h = random_hamiltonian(n, 6, rng)
    psi = random_state(n, rng)
    p = rng.normal(size=k)
    e, g = energy_and_gradient(c, p, h, psi)
    assert np.isclose(e, energy(c, p, h, psi))
    for i in range(k):
        d = np.zeros(k)
        d[i] = 1e-5
        fd = (energy(c, p + d, h, psi) - energy(c, p - d, h, psi)) / 2e-5
        assert abs(g[i] - fd) < 1e-6


def test_dimension_mismatch():
    c = ParamCircuit(2)
    with pytest.raises(DimensionError):
        energy(c, [], PauliSum.from_labels([("Z", 1.0)]), prepare_basis(2, "00"))
    with pytest.raises(DimensionError):
        apply_circuit_array(c, [], PLUS)


# --- sampling -------------------------------------------------------------------------------

def test_sample_examples():
    assert sample(prepare_basis(1, "0"), 100, seed=0).counts == {"0": 100}
    counts = sample(PLUS, 100_000, seed=1)
    sigma = np.sqrt(0.25 / 100_000)
    assert abs(counts.probability("0") - 0.5) < 5 * sigma
    assert sample(PLUS, 1000, seed=5) == sample(PLUS, 1000, seed=5)
    with pytest.raises(ValueError):
        sample(PLUS, 0, seed=0)


@given(st.integers(0, 1000), st.integers(1, 5000))
@settings(max_examples=25)
def test_counts_sum_to_shots(seed, shots):
    rng = np.random.default_rng(seed)
    c = sample(random_state(3, rng), shots, seed)
    assert sum(c.counts.values()) == shots == c.shots
    assert all(len(k) == 3 for k in c.counts)


def test_bit_order_consistent_with_pauli_masks():
    # qubit 0 = least significant index bit = first label/bitstring character
    psi = prepare_basis(3, "100")
    assert energy(ParamCircuit(3), [], PauliSum.from_labels([("ZII", 1.0)]), psi) == -1.0
    assert energy(ParamCircuit(3), [], PauliSum.from_labels([("IIZ", 1.0)]), psi) == 1.0
    assert sample(psi, 10, 0).counts == {"100": 10}
