import itertools

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, strategies as st

from conftest import random_state
from vqe_forge.pauli import (DimensionError, NonHermitianError, PauliFormatError, PauliSum,
                             PauliTerm, commutator_expectation, commutes, dumps_pauli_sum,
                             expectation, loads_pauli_sum, pauli_from_label, pauli_mul)

labels = lambda n: st.text(alphabet="IXYZ", min_size=n, max_size=n)


def all_terms(n):
    return [pauli_from_label("".join(p)) for p in itertools.product("IXYZ", repeat=n)]


def kron_matrix(s):
    """Oracle: sum of per-term Kronecker products."""
    return sum(c * t.to_matrix() for c, t in s.terms)


def random_sum(n, n_terms, rng, hermitian=True):
    items = []
    for _ in range(n_terms):
        lab = "".join(rng.choice(list("IXYZ"), size=n))
        c = rng.normal() if hermitian else rng.normal() + 1j * rng.normal()
        items.append((lab, c))
    return PauliSum.from_labels(items)


# --- labels -----------------------------------------------------------------

def test_label_examples():
    t = pauli_from_label("IZ")
    assert (t.x, t.z) == (0, 0b10)
    t = pauli_from_label("Y")
    assert (t.x, t.z) == (1, 1)


def test_bad_letter_names_position():
    with pytest.raises(PauliFormatError, match="position 0"):
        pauli_from_label("Q")
    with pytest.raises(PauliFormatError, match="position 2"):
        pauli_from_label("XIqZ")
    with pytest.raises(PauliFormatError):
        pauli_from_label("")


def test_masks_bounded():
    with pytest.raises(DimensionError):
        PauliTerm(2, 0b100, 0)
    assert PauliTerm.identity(3).is_identity()


@given(labels(5))
def test_label_roundtrip(lab):
    assert pauli_from_label(lab).label == lab


@given(labels(3))
def test_matrix_little_endian(lab):
    # qubit 0 acts on the least significant index bit
    t = pauli_from_label(lab)
    single = {"I": np.eye(2), "X": np.array([[0, 1], [1, 0]]),
              "Y": np.array([[0, -1j], [1j, 0]]), "Z": np.diag([1, -1])}
    m = np.kron(np.kron(single[lab[2]], single[lab[1]]), single[lab[0]])
    assert np.allclose(t.to_matrix(), m)


# --- multiplication -----------------------------------------------------------

def test_mul_examples():
    assert pauli_mul(pauli_from_label("X"), pauli_from_label("Y")) == (1j, pauli_from_label("Z"))
    assert pauli_mul(pauli_from_label("Z"), pauli_from_label("Z")) == (1, pauli_from_label("I"))
    ph, t = pauli_mul(pauli_from_label("XX"), pauli_from_label("ZZ"))
    assert (ph, t.label) == (-1, "YY")
    a, b = pauli_from_label("XX").to_matrix(), pauli_from_label("ZZ").to_matrix()
    assert np.allclose(a @ b, ph * t.to_matrix())


def test_mul_dimension_error():
    with pytest.raises(DimensionError):
        pauli_mul(pauli_from_label("X"), pauli_from_label("XX"))
    with pytest.raises(DimensionError):
        commutes(pauli_from_label("X"), pauli_from_label("XX"))


def test_mul_matches_dense_exhaustive():
    terms = all_terms(2)
    for a, b in itertools.product(terms, repeat=2):
        ph, c = pauli_mul(a, b)
        assert np.allclose(a.to_matrix() @ b.to_matrix(), ph * c.to_matrix())


def test_mul_self_inverse_and_associative_exhaustive():
    terms = all_terms(3)
    for p in terms:
        assert pauli_mul(p, p) == (1, PauliTerm.identity(3))
    rng = np.random.default_rng(0)
    for _ in range(2000):
        a, b, c = (terms[i] for i in rng.integers(len(terms), size=3))
        p1, ab = pauli_mul(a, b)
        p2, ab_c = pauli_mul(ab, c)
        q1, bc = pauli_mul(b, c)
        q2, a_bc = pauli_mul(a, bc)
        assert ab_c == a_bc and np.isclose(p1 * p2, q1 * q2)


def test_commutes_examples():
    assert commutes(pauli_from_label("XX"), pauli_from_label("ZZ"))
    assert not commutes(pauli_from_label("X"), pauli_from_label("Z"))
    for p in all_terms(2):
        assert commutes(p, PauliTerm.identity(2))


def test_commutes_matches_dense_exhaustive():
    for a, b in itertools.product(all_terms(2), repeat=2):
        A, B = a.to_matrix(), b.to_matrix()
        assert commutes(a, b) == (np.linalg.norm(A @ B - B @ A) < 1e-12)


# --- sums -----------------------------------------------------------------------

def test_normalization_merges_and_drops():
    s = PauliSum.from_labels([("XZ", 0.5), ("XZ", 0.25), ("ZZ", 1e-14), ("IY", 1.0), ("IY", -1.0)])
    assert len(s) == 1
    c, t = s.terms[0]
    assert t.label == "XZ" and c == 0.75


def test_sum_requires_equal_width():
    with pytest.raises(DimensionError):
        PauliSum.from_labels([("X", 1.0), ("XX", 1.0)])


@given(st.integers(0, 10_000))
def test_product_matches_dense(seed):
    rng = np.random.default_rng(seed)
    a = random_sum(3, 4, rng, hermitian=False)
    b = random_sum(3, 4, rng, hermitian=False)
    A, B = kron_matrix(a), kron_matrix(b)
    assert np.allclose(kron_matrix(a @ b), A @ B)
    assert np.allclose(kron_matrix(a + b), A + B)
    assert np.allclose(kron_matrix(a.adjoint()), A.conj().T)


@given(st.integers(0, 10_000))
def test_apply_matches_dense(seed):
    rng = np.random.default_rng(seed)
    h = random_sum(4, 10, rng, hermitian=False)
    psi = random_state(4, rng)
    assert np.allclose(h.apply(psi), kron_matrix(h) @ psi, atol=1e-12)
    assert np.allclose(h.to_matrix(), kron_matrix(h))
    assert np.allclose(h.to_sparse().toarray(), kron_matrix(h))


# --- expectation ------------------------------------------------------------------

def test_expectation_examples():
    assert expectation(PauliSum.from_labels([("Z", 1.0)]), np.array([1, 0], complex)) == 1.0
    plus = np.array([1, 1], complex) / np.sqrt(2)
    assert np.isclose(expectation(PauliSum.from_labels([("X", 1.0)]), plus), 1.0)


def test_expectation_dense_oracle(rng):
    h = random_sum(4, 20, rng)
    psi = random_state(4, rng)
    ref = np.vdot(psi, kron_matrix(h) @ psi).real
    assert abs(expectation(h, psi) - ref) < 1e-12


def test_expectation_rejects_bad_input():
    with pytest.raises(NonHermitianError):
        expectation(PauliSum.from_labels([("X", 1j)]), np.array([1, 0], complex))
    with pytest.raises(DimensionError):
        expectation(PauliSum.from_labels([("X", 1.0)]), np.ones(4, complex) / 2)


@given(st.integers(0, 10_000), st.integers(4, 6))
def test_expectation_real_and_order_invariant(seed, n):
    rng = np.random.default_rng(seed)
    items = [("".join(rng.choice(list("IXYZ"), size=n)), rng.normal()) for _ in range(12)]
    psi = random_state(n, rng)
    e = expectation(PauliSum.from_labels(items), psi)
    shuffled = [items[i] for i in rng.permutation(len(items))]
    # split every coefficient into two duplicate terms
    split = [(lab, c / 3) for lab, c in items] + [(lab, 2 * c / 3) for lab, c in shuffled]
    assert abs(expectation(PauliSum.from_labels(shuffled), psi) - e) < 1e-12
    assert abs(expectation(PauliSum.from_labels(split), psi) - e) < 1e-12
    m = PauliSum.from_labels(items).to_matrix()
    assert abs(np.vdot(psi, m @ psi).imag) < 1e-10


# --- commutators --------------------------------------------------------------------

def test_commutator_two_by_two_oracle():
    h = PauliSum.from_labels([("Z", 1.0)])
    a = PauliSum.from_labels([("Y", 1j)])
    ket0 = np.array([1, 0], complex)
    H, A = h.to_matrix(), a.to_matrix()
    ref = np.vdot(ket0, (H @ A - A @ H) @ ket0)
    assert np.isclose(commutator_expectation(h, a, ket0), ref.real)
    # [Z, iY] = 2X, so |+> gives 2
    plus = np.array([1, 1], complex) / np.sqrt(2)
    assert np.isclose(commutator_expectation(h, a, plus), 2.0)


def test_commutator_vanishes_for_commuting():
    h = PauliSum.from_labels([("Z", 1.0)])
    plus = np.array([1, 1], complex) / np.sqrt(2)
    assert commutator_expectation(h, h.scale(1j), plus) == 0.0


@given(st.integers(0, 10_000))
def test_commutator_matches_finite_difference(seed):
    rng = np.random.default_rng(seed)
    h = random_sum(3, 8, rng)
    a = random_sum(3, 4, rng).scale(1j)
    psi = random_state(3, rng)
    H, A = h.to_matrix(), a.to_matrix()

    def e(t):
        phi = scipy.linalg.expm(t * A) @ psi
        return np.vdot(phi, H @ phi).real

    fd = (e(1e-5) - e(-1e-5)) / 2e-5
    assert abs(commutator_expectation(h, a, psi) - fd) < 1e-6


# --- text format ------------------------------------------------------------------------

@given(st.integers(0, 10_000))
def test_text_roundtrip_bit_exact(seed):
    rng = np.random.default_rng(seed)
    s = random_sum(4, 15, rng, hermitian=bool(seed % 2))
    back = loads_pauli_sum(dumps_pauli_sum(s, ["generated"]))
    assert back.terms == s.terms


def test_text_format_parsing():
    s = loads_pauli_sum("# comment\nXZ 0.5\n\nYY -1.0 0.25  # trailing\n")
    assert dict((t.label, c) for c, t in s.terms) == {"XZ": 0.5, "YY": -1 + 0.25j}
    with pytest.raises(PauliFormatError, match="line 2"):
        loads_pauli_sum("XZ 1.0\nXZZ 1.0\n")
    with pytest.raises(PauliFormatError, match="line 1"):
        loads_pauli_sum("XQ 1.0\n")
    with pytest.raises(PauliFormatError):
        loads_pauli_sum("XZ one\n")
