"""Pauli-string algebra in symplectic (x, z) form and matrix-free observables.

A Pauli term over ``n`` qubits is stored as two integer bitmasks.  Qubit ``q``
carries the letter I/X/Z/Y for ``(x_q, z_q) = (0,0)/(1,0)/(0,1)/(1,1)``.  Labels
are written with qubit 0 leftmost; statevector indices use qubit 0 as the
least significant bit.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

DROP_TOL = 1e-12
IMAG_TOL = 1e-10

_PHASES = (1, 1j, -1, -1j)
_LETTERS = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}


class PauliFormatError(ValueError):
    pass


class DimensionError(ValueError):
    pass


class NonHermitianError(ValueError):
    pass


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True, order=True)
class PauliTerm:
    n_qubits: int
    x: int = 0
    z: int = 0

    def __post_init__(self):
        if self.n_qubits < 0:
            raise DimensionError("negative qubit count")
        limit = 1 << self.n_qubits
        if self.x >= limit or self.z >= limit or self.x < 0 or self.z < 0:
            raise DimensionError(f"mask exceeds {self.n_qubits} qubits")

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliTerm":
        return cls(n_qubits, 0, 0)

    @property
    def label(self) -> str:
        return "".join(
            _LETTERS[((self.x >> q) & 1, (self.z >> q) & 1)] for q in range(self.n_qubits)
        )

    @property
    def support(self) -> int:
        return self.x | self.z

    @property
    def weight(self) -> int:
        return _popcount(self.x | self.z)

    def qubits(self) -> list[int]:
        s = self.support
        return [q for q in range(self.n_qubits) if (s >> q) & 1]

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def __str__(self) -> str:
        return self.label

    def to_matrix(self) -> np.ndarray:
        """Dense matrix in the little-endian index convention (tests only)."""
        single = {
            "I": np.eye(2, dtype=complex),
            "X": np.array([[0, 1], [1, 0]], dtype=complex),
            "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
            "Z": np.array([[1, 0], [0, -1]], dtype=complex),
        }
        mat = np.ones((1, 1), dtype=complex)
        # qubit 0 is the least significant bit, so it sits rightmost in the kron
        for letter in self.label:
            mat = np.kron(single[letter], mat)
        return mat


def pauli_from_label(label: str) -> PauliTerm:
    if not label:
        raise PauliFormatError("empty Pauli label")
    x = z = 0
    for q, ch in enumerate(label):
        if ch == "X":
            x |= 1 << q
        elif ch == "Z":
            z |= 1 << q
        elif ch == "Y":
            x |= 1 << q
            z |= 1 << q
        elif ch != "I":
            raise PauliFormatError(f"invalid Pauli letter {ch!r} at position {q}")
    return PauliTerm(len(label), x, z)


def _check_dims(a: PauliTerm, b: PauliTerm) -> None:
    if a.n_qubits != b.n_qubits:
        raise DimensionError(f"qubit counts differ: {a.n_qubits} vs {b.n_qubits}")


def pauli_mul(a: PauliTerm, b: PauliTerm) -> tuple[complex, PauliTerm]:
    """Return ``(phase, P)`` with ``a @ b == phase * P``."""
    _check_dims(a, b)
    x, z = a.x ^ b.x, a.z ^ b.z
    # P = i^{|x&z|} X^x Z^z and Z^z1 X^x2 = (-1)^{|z1&x2|} X^x2 Z^z1
    k = _popcount(a.x & a.z) + _popcount(b.x & b.z) + 2 * _popcount(a.z & b.x) - _popcount(x & z)
    return _PHASES[k % 4], PauliTerm(a.n_qubits, x, z)


def commutes(a: PauliTerm, b: PauliTerm) -> bool:
    _check_dims(a, b)
    return (_popcount(a.x & b.z) + _popcount(a.z & b.x)) % 2 == 0


class PauliSum:
    """Weighted sum of Pauli terms on a fixed number of qubits.

    Construction normalizes: duplicate terms are merged, coefficients below
    ``DROP_TOL`` are dropped and terms are sorted by ``(x, z)``.
    """

    def __init__(self, terms: Iterable[tuple[complex, PauliTerm]], n_qubits: int):
        acc: dict[tuple[int, int], complex] = {}
        for coeff, term in terms:
            if term.n_qubits != n_qubits:
                raise DimensionError(f"term on {term.n_qubits} qubits in a {n_qubits}-qubit sum")
            key = (term.x, term.z)
            acc[key] = acc.get(key, 0.0) + complex(coeff)
        self.n_qubits = n_qubits
        self.terms: tuple[tuple[complex, PauliTerm], ...] = tuple(
            (c, PauliTerm(n_qubits, x, z))
            for (x, z), c in sorted(acc.items())
            if abs(c) >= DROP_TOL
        )

    @classmethod
    def from_labels(cls, items: Iterable[tuple[str, complex]]) -> "PauliSum":
        items = list(items)
        if not items:
            raise PauliFormatError("cannot infer qubit count from an empty list")
        terms = [(c, pauli_from_label(lbl)) for lbl, c in items]
        return cls(terms, terms[0][1].n_qubits)

    @classmethod
    def from_arrays(cls, coeffs, xs, zs, n_qubits: int) -> "PauliSum":
        return cls(
            ((c, PauliTerm(n_qubits, int(x), int(z))) for c, x, z in zip(coeffs, xs, zs)),
            n_qubits,
        )

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[tuple[complex, PauliTerm]]:
        return iter(self.terms)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PauliSum)
            and self.n_qubits == other.n_qubits
            and self.terms == other.terms
        )

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if self.n_qubits != other.n_qubits:
            raise DimensionError("qubit counts differ")
        return PauliSum(self.terms + other.terms, self.n_qubits)

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + other.scale(-1.0)

    def scale(self, factor: complex) -> "PauliSum":
        return PauliSum(((factor * c, t) for c, t in self.terms), self.n_qubits)

    def __matmul__(self, other: "PauliSum") -> "PauliSum":
        if self.n_qubits != other.n_qubits:
            raise DimensionError("qubit counts differ")
        out = []
        for ca, ta in self.terms:
            for cb, tb in other.terms:
                ph, t = pauli_mul(ta, tb)
                out.append((ca * cb * ph, t))
        return PauliSum(out, self.n_qubits)

    def adjoint(self) -> "PauliSum":
        return PauliSum(((np.conj(c), t) for c, t in self.terms), self.n_qubits)

    def is_hermitian(self, tol: float = IMAG_TOL) -> bool:
        return all(abs(c.imag) <= tol for c, _ in self.terms)

    def is_anti_hermitian(self, tol: float = IMAG_TOL) -> bool:
        return all(abs(c.real) <= tol for c, _ in self.terms)

    def constant(self) -> float:
        for c, t in self.terms:
            if t.is_identity():
                return c.real
        return 0.0

    def trace_normalized(self) -> float:
        """``Tr(H) / 2^n``, the expectation in the maximally mixed state."""
        return self.constant()

    @cached_property
    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        coeffs = np.array([c for c, _ in self.terms], dtype=complex)
        xs = np.array([t.x for _, t in self.terms], dtype=np.int64)
        zs = np.array([t.z for _, t in self.terms], dtype=np.int64)
        return coeffs, xs, zs

    @cached_property
    def _compiled(self) -> list[tuple[np.ndarray, np.ndarray]]:
        # group by x mask: (P psi)[j] = i^{|x&z|} (-1)^{|z & (j^x)|} psi[j^x]
        idx = np.arange(1 << self.n_qubits, dtype=np.int64)
        groups: dict[int, np.ndarray] = {}
        for c, t in self.terms:
            src = idx ^ t.x
            sign = 1 - 2 * (np.bitwise_count(src & t.z) & 1).astype(np.int64)
            diag = c * _PHASES[_popcount(t.x & t.z) % 4] * sign
            if t.x in groups:
                groups[t.x] = groups[t.x] + diag
            else:
                groups[t.x] = diag.astype(complex)
        return [(idx ^ x, d) for x, d in sorted(groups.items())]

    def apply(self, psi: np.ndarray) -> np.ndarray:
        """Return ``H @ psi`` matrix-free; ``psi`` may carry leading batch axes."""
        if psi.shape[-1] != 1 << self.n_qubits:
            raise DimensionError(
                f"state of length {psi.shape[-1]} for a {self.n_qubits}-qubit operator"
            )
        out = np.zeros(psi.shape, dtype=complex)
        for src, diag in self._compiled:
            out += diag * psi[..., src]
        return out

    def to_matrix(self) -> np.ndarray:
        dim = 1 << self.n_qubits
        mat = np.zeros((dim, dim), dtype=complex)
        rows = np.arange(dim)
        for src, diag in self._compiled:
            mat[rows, src] += diag
        return mat

    def to_sparse(self):
        import scipy.sparse as sp

        dim = 1 << self.n_qubits
        rows, cols, vals = [], [], []
        for src, diag in self._compiled:
            rows.append(np.arange(dim))
            cols.append(src)
            vals.append(diag)
        if not rows:
            return sp.csr_matrix((dim, dim), dtype=complex)
        return sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
        )

    def __repr__(self) -> str:
        return f"PauliSum(n_qubits={self.n_qubits}, terms={len(self.terms)})"


def _as_amplitudes(state) -> np.ndarray:
    return getattr(state, "amplitudes", state)


def expectation(observable: PauliSum, state) -> float:
    """Exact ``<psi|H|psi>`` for a Hermitian PauliSum."""
    if not observable.is_hermitian():
        raise NonHermitianError("observable has complex coefficients")
    psi = _as_amplitudes(state)
    if psi.shape[-1] != 1 << observable.n_qubits:
        raise DimensionError("state and observable dimensions differ")
    val = np.vdot(psi, observable.apply(psi))
    if abs(val.imag) > IMAG_TOL:
        raise NonHermitianError(f"imaginary residual {val.imag:.3e} in expectation")
    return float(val.real)


def commutator_expectation(h: PauliSum, a: PauliSum, state) -> float:
    """``<psi|[H, A]|psi>`` for Hermitian ``h`` and anti-Hermitian ``a``.

    This is the derivative at ``theta = 0`` of ``<psi|exp(-theta A) H exp(theta A)|psi>``.
    """
    psi = _as_amplitudes(state)
    if h.n_qubits != a.n_qubits or psi.shape[-1] != 1 << h.n_qubits:
        raise DimensionError("operator and state dimensions differ")
    return commutator_expectation_from(h.apply(psi), a, psi)


def commutator_expectation_from(h_psi: np.ndarray, a: PauliSum, psi: np.ndarray) -> float:
    # <[H,A]> = <psi|HA|psi> - <psi|AH|psi> = 2 Re <H psi|A psi> when A^dagger = -A
    return float(2.0 * np.vdot(h_psi, a.apply(psi)).real)


def _format_float(v: float) -> str:
    return repr(float(v))


def dumps_pauli_sum(ps: PauliSum, header: Sequence[str] = ()) -> str:
    lines = [f"# {h}" for h in header]
    for c, t in ps.terms:
        if c.imag == 0.0:
            lines.append(f"{t.label} {_format_float(c.real)}")
        else:
            lines.append(f"{t.label} {_format_float(c.real)} {_format_float(c.imag)}")
    return "\n".join(lines) + "\n"


def loads_pauli_sum(text: str) -> PauliSum:
    items = []
    width = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise PauliFormatError(f"line {lineno}: expected '<label> <real> [<imag>]'")
        label = parts[0]
        if width is None:
            width = len(label)
        elif len(label) != width:
            raise PauliFormatError(f"line {lineno}: label length {len(label)} != {width}")
        try:
            re = float(parts[1])
            im = float(parts[2]) if len(parts) == 3 else 0.0
        except ValueError as exc:
            raise PauliFormatError(f"line {lineno}: {exc}") from None
        try:
            term = pauli_from_label(label)
        except PauliFormatError as exc:
            raise PauliFormatError(f"line {lineno}: {exc}") from None
        items.append((complex(re, im), term))
    if not items:
        raise PauliFormatError("no terms found")
    return PauliSum(items, width)


def read_pauli_sum(path) -> PauliSum:
    with open(path, encoding="utf-8") as fh:
        return loads_pauli_sum(fh.read())


def write_pauli_sum(ps: PauliSum, path, header: Sequence[str] = ()) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_pauli_sum(ps, header))
