"""Molecular integrals, active-space reduction and fermion-to-qubit mappings.

Spin orbitals use blocked ordering: spatial orbital ``m`` maps to mode ``m``
(spin up) and ``m + N`` (spin down).  Jordan-Wigner uses
``a_j = (X_j + i Y_j)/2 Z_0 ... Z_{j-1}``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .pauli import PauliSum, PauliTerm

SYM_TOL = 1e-10


class FCIDumpError(ValueError):
    pass


class ActiveSpaceError(ValueError):
    pass


class MappingError(ValueError):
    pass


@dataclass
class MolecularIntegrals:
    """Spatial-orbital integrals; ``h2[i, j, k, l]`` is the chemists' ``(ij|kl)``."""

    n_spatial: int
    n_electrons: int
    core_energy: float
    h1: np.ndarray
    h2: np.ndarray
    ms2: int = 0

    def __post_init__(self):
        self.h1 = np.asarray(self.h1, dtype=float)
        self.h2 = np.asarray(self.h2, dtype=float)
        n = self.n_spatial
        if self.h1.shape != (n, n) or self.h2.shape != (n, n, n, n):
            raise ValueError(f"integral shapes do not match n_spatial={n}")

    @property
    def n_up(self) -> int:
        return (self.n_electrons + self.ms2) // 2

    @property
    def n_down(self) -> int:
        return (self.n_electrons - self.ms2) // 2

    def check_symmetry(self, tol: float = SYM_TOL) -> None:
        if not np.allclose(self.h1, self.h1.T, atol=tol, rtol=0):
            raise ValueError("h1 is not symmetric")
        g = self.h2
        for perm in [(1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1)]:
            if not np.allclose(g, g.transpose(perm), atol=tol, rtol=0):
                raise ValueError(f"h2 lacks permutation symmetry {perm}")

    def hartree_fock_energy(self) -> float:
        """Closed/open-shell determinant energy filling the lowest orbitals per spin."""
        up = range(self.n_up)
        dn = range(self.n_down)
        h1, g = self.h1, self.h2
        e = self.core_energy + sum(h1[i, i] for i in up) + sum(h1[i, i] for i in dn)
        for occ in (up, dn):
            for i in occ:
                for j in occ:
                    e += 0.5 * (g[i, i, j, j] - g[i, j, j, i])
        for i in up:
            for j in dn:
                e += g[i, i, j, j]
        return float(e)


# FCIDUMP -------------------------------------------------------------------

_HEADER_RE = re.compile(r"&FCI(.*?)(?:&END|/)", re.IGNORECASE | re.DOTALL)


def _header_int(header: str, key: str, default=None) -> int:
    m = re.search(rf"\b{key}\s*=\s*(-?\d+)", header, re.IGNORECASE)
    if m is None:
        if default is None:
            raise FCIDumpError(f"header missing {key}")
        return default
    return int(m.group(1))


def parse_fcidump(text: str) -> MolecularIntegrals:
    """Parse Molpro FCIDUMP text (1-based indices, chemists' two-body notation).

    Orbital-energy lines ``e i 0 0 0`` are ignored.
    """
    m = _HEADER_RE.search(text)
    if m is None or not text.lstrip().upper().startswith("&FCI"):
        raise FCIDumpError("malformed header: expected '&FCI ... /' or '&FCI ... &END'")
    header = m.group(1)
    norb = _header_int(header, "NORB")
    nelec = _header_int(header, "NELEC")
    ms2 = _header_int(header, "MS2", 0)
    if norb <= 0 or nelec < 0:
        raise FCIDumpError("NORB must be positive and NELEC non-negative")

    tokens = text[m.end():].replace("D", "E").replace("d", "e").split()
    if len(tokens) % 5:
        raise FCIDumpError("integral section is not a multiple of 5 fields")

    h1 = np.zeros((norb, norb))
    h2 = np.zeros((norb, norb, norb, norb))
    seen1 = np.zeros((norb, norb), dtype=bool)
    seen2 = np.zeros(h2.shape, dtype=bool)
    core = 0.0
    core_seen = False

    def put(arr, seen, idx, v, line):
        if seen[idx] and abs(arr[idx] - v) > SYM_TOL:
            raise FCIDumpError(f"entry {line}: conflicts with an earlier value {arr[idx]!r}")
        arr[idx] = v
        seen[idx] = True

    for pos in range(0, len(tokens), 5):
        try:
            v = float(tokens[pos])
            i, j, k, l = (int(t) for t in tokens[pos + 1:pos + 5])
        except ValueError:
            raise FCIDumpError(f"unparsable integral line {' '.join(tokens[pos:pos + 5])!r}") from None
        line = pos // 5 + 1
        for idx in (i, j, k, l):
            if idx < 0 or idx > norb:
                raise FCIDumpError(f"entry {line}: index {idx} out of range 0..{norb}")
        if i == j == k == l == 0:
            if core_seen and abs(core - v) > SYM_TOL:
                raise FCIDumpError(f"entry {line}: conflicting core energy")
            core, core_seen = v, True
        elif k == 0 and l == 0 and i > 0 and j > 0:
            a, b = i - 1, j - 1
            put(h1, seen1, (a, b), v, line)
            put(h1, seen1, (b, a), v, line)
        elif j == 0 and k == 0 and l == 0:
            continue
        elif min(i, j, k, l) > 0:
            a, b, c, d = i - 1, j - 1, k - 1, l - 1
            for idx in {(a, b, c, d), (b, a, c, d), (a, b, d, c), (b, a, d, c),
                        (c, d, a, b), (d, c, a, b), (c, d, b, a), (d, c, b, a)}:
                put(h2, seen2, idx, v, line)
        else:
            raise FCIDumpError(f"entry {line}: unsupported index pattern {i} {j} {k} {l}")
    return MolecularIntegrals(norb, nelec, core, h1, h2, ms2)


def dumps_fcidump(ints: MolecularIntegrals, tol: float = 0.0) -> str:
    n = ints.n_spatial
    out = [f"&FCI NORB={n},NELEC={ints.n_electrons},MS2={ints.ms2},",
           "  ORBSYM=" + ",".join(["1"] * n) + ",", "  ISYM=1,", "&END"]
    for i in range(n):
        for j in range(i + 1):
            for k in range(n):
                for l in range(k + 1):
                    if (i * (i + 1) // 2 + j) < (k * (k + 1) // 2 + l):
                        continue
                    v = ints.h2[i, j, k, l]
                    if abs(v) > tol and v != 0.0:
                        out.append(f"{float(v)!r} {i + 1} {j + 1} {k + 1} {l + 1}")
    for i in range(n):
        for j in range(i + 1):
            v = ints.h1[i, j]
            if abs(v) > tol and v != 0.0:
                out.append(f"{float(v)!r} {i + 1} {j + 1} 0 0")
    out.append(f"{float(ints.core_energy)!r} 0 0 0 0")
    return "\n".join(out) + "\n"


def read_fcidump(path) -> MolecularIntegrals:
    with open(path, encoding="utf-8") as fh:
        return parse_fcidump(fh.read())


def write_fcidump(ints: MolecularIntegrals, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_fcidump(ints))


# Active space ----------------------------------------------------------------

@dataclass(frozen=True)
class ActiveSpaceSpec:
    frozen_occupied: tuple[int, ...]
    active: tuple[int, ...]
    n_active_electrons: int

    @classmethod
    def from_dict(cls, d: dict) -> "ActiveSpaceSpec":
        return cls(tuple(d.get("frozen_occupied", ())), tuple(d["active"]),
                   int(d["n_active_electrons"]))

    def to_dict(self) -> dict:
        return {"frozen_occupied": list(self.frozen_occupied), "active": list(self.active),
                "n_active_electrons": self.n_active_electrons}

    def validate(self, ints: MolecularIntegrals) -> None:
        fr, ac = set(self.frozen_occupied), set(self.active)
        if fr & ac:
            raise ActiveSpaceError(f"orbitals {sorted(fr & ac)} are both frozen and active")
        if len(fr) != len(self.frozen_occupied) or len(ac) != len(self.active):
            raise ActiveSpaceError("duplicate orbital index in active-space spec")
        for o in fr | ac:
            if not 0 <= o < ints.n_spatial:
                raise ActiveSpaceError(f"orbital {o} outside 0..{ints.n_spatial - 1}")
        m = ints.n_electrons - 2 * len(fr)
        if m < 0:
            raise ActiveSpaceError("freezing more electrons than the molecule has")
        if m != self.n_active_electrons:
            raise ActiveSpaceError(
                f"n_active_electrons={self.n_active_electrons} but M - 2*frozen = {m}")
        if m > 2 * len(ac):
            raise ActiveSpaceError("active electrons exceed active spin orbitals")


def apply_active_space(ints: MolecularIntegrals, spec: ActiveSpaceSpec) -> MolecularIntegrals:
    spec.validate(ints)
    fr = list(spec.frozen_occupied)
    ac = list(spec.active)
    h1, g = ints.h1, ints.h2
    e_frozen = 0.0
    for i in fr:
        e_frozen += 2.0 * h1[i, i]
        for j in fr:
            e_frozen += 2.0 * g[i, i, j, j] - g[i, j, j, i]
    h_eff = h1.copy()
    for i in fr:
        h_eff += 2.0 * g[:, :, i, i] - g[:, i, i, :]
    idx = np.ix_(ac, ac)
    return MolecularIntegrals(
        n_spatial=len(ac),
        n_electrons=spec.n_active_electrons,
        core_energy=float(ints.core_energy + e_frozen),
        h1=h_eff[idx],
        h2=g[np.ix_(ac, ac, ac, ac)],
        ms2=ints.ms2,
    )


# Second quantization -------------------------------------------------------

@dataclass
class FermionHamiltonian:
    """``H = constant + sum one_body[p,q] a+_p a_q + 1/2 sum two_body[m,n,o,p] a+_m a+_n a_o a_p``.

    ``two_body`` is antisymmetrized in (m, n) and in (o, p).
    """

    n_spin_orbitals: int
    constant: float
    one_body: np.ndarray
    two_body: np.ndarray

    def fermion_terms(self):
        """Yield ``(coeff, ((mode, dagger), ...))`` tuples, constant first."""
        yield self.constant, ()
        for p, q in zip(*np.nonzero(self.one_body)):
            yield self.one_body[p, q], ((p, 1), (q, 0))
        for m, n, o, p in zip(*np.nonzero(self.two_body)):
            yield 0.5 * self.two_body[m, n, o, p], ((m, 1), (n, 1), (o, 0), (p, 0))


def build_fermion_hamiltonian(ints: MolecularIntegrals) -> FermionHamiltonian:
    n = ints.n_spatial
    ns = 2 * n
    one = np.zeros((ns, ns))
    one[:n, :n] = ints.h1
    one[n:, n:] = ints.h1
    # physicists' h[m,n,o,p] = (m p | n o) with spin(m)=spin(p), spin(n)=spin(o)
    phys = ints.h2.transpose(0, 2, 3, 1)
    two = np.zeros((ns, ns, ns, ns))
    for s1 in (0, n):
        for s2 in (0, n):
            two[s1:s1 + n, s2:s2 + n, s2:s2 + n, s1:s1 + n] = phys
    two = 0.5 * (two - two.transpose(1, 0, 2, 3))
    return FermionHamiltonian(ns, float(ints.core_energy), one, two)


# Qubit mappings ------------------------------------------------------------

def _jw_ladder(modes: np.ndarray, dagger: int):
    """JW images of a ladder operator for each mode: two Pauli terms each."""
    modes = modes.astype(np.int64)
    bit = np.left_shift(np.int64(1), modes)
    zchain = bit - 1
    coeffs = np.stack([np.full(modes.shape, 0.5 + 0j),
                       np.full(modes.shape, (-0.5j if dagger else 0.5j))], axis=-1)
    xs = np.stack([bit, bit], axis=-1)
    zs = np.stack([zchain, zchain | bit], axis=-1)
    return coeffs, xs, zs


def _product(a, b):
    """Row-wise outer product of Pauli-term arrays of shape (M, ta) and (M, tb)."""
    ca, xa, za = (v[:, :, None] for v in a)
    cb, xb, zb = (v[:, None, :] for v in b)
    x, z = xa ^ xb, za ^ zb
    k = (np.bitwise_count(xa & za).astype(np.int64) + np.bitwise_count(xb & zb)
         + 2 * np.bitwise_count(za & xb) - np.bitwise_count(x & z)) % 4
    phase = np.array([1, 1j, -1, -1j])[k]
    m = ca.shape[0]
    return (ca * cb * phase).reshape(m, -1), x.reshape(m, -1), z.reshape(m, -1)


def _accumulate(coeffs, xs, zs, n_qubits: int, hermitian: bool | None) -> PauliSum:
    coeffs, xs, zs = coeffs.ravel(), xs.ravel(), zs.ravel()
    if coeffs.size == 0:
        return PauliSum([], n_qubits)
    # sort + segment sum keeps the reduction order fixed
    order = np.lexsort((zs, xs))
    xs, zs, coeffs = xs[order], zs[order], coeffs[order]
    new = np.ones(xs.size, dtype=bool)
    new[1:] = (xs[1:] != xs[:-1]) | (zs[1:] != zs[:-1])
    starts = np.flatnonzero(new)
    summed = np.add.reduceat(coeffs, starts)
    if hermitian is True:
        if np.any(np.abs(summed.imag) > 1e-10):
            raise MappingError("mapped operator is not Hermitian")
        summed = summed.real.astype(complex)
    elif hermitian is False:
        if np.any(np.abs(summed.real) > 1e-10):
            raise MappingError("mapped operator is not anti-Hermitian")
        summed = 1j * summed.imag
    return PauliSum.from_arrays(summed, xs[starts], zs[starts], n_qubits)


def jordan_wigner_terms(terms, n_modes: int):
    """Raw (coeffs, xs, zs) JW images of ``(coeff, ((mode, dagger), ...))`` terms."""
    by_pattern: dict[tuple[int, ...], list] = {}
    for coeff, ops in terms:
        pattern = tuple(d for _, d in ops)
        by_pattern.setdefault(pattern, []).append((coeff, [m for m, _ in ops]))
    cs, xs, zs = [], [], []
    for pattern, items in sorted(by_pattern.items()):
        coeff = np.array([c for c, _ in items], dtype=complex)
        if not pattern:
            cs.append(coeff)
            xs.append(np.zeros(len(items), dtype=np.int64))
            zs.append(np.zeros(len(items), dtype=np.int64))
            continue
        modes = np.array([m for _, m in items], dtype=np.int64)
        if modes.max() >= n_modes or modes.min() < 0:
            raise MappingError("mode index out of range")
        acc = (coeff[:, None], np.zeros((len(items), 1), np.int64), np.zeros((len(items), 1), np.int64))
        for pos, dag in enumerate(pattern):
            acc = _product(acc, _jw_ladder(modes[:, pos], dag))
        cs.append(acc[0].ravel())
        xs.append(acc[1].ravel())
        zs.append(acc[2].ravel())
    return np.concatenate(cs), np.concatenate(xs), np.concatenate(zs)


def jordan_wigner(h: FermionHamiltonian) -> PauliSum:
    n = h.n_spin_orbitals
    c, x, z = jordan_wigner_terms(h.fermion_terms(), n)
    return _accumulate(c, x, z, n, hermitian=True)


def _prefix_xor(v: np.ndarray, n: int) -> np.ndarray:
    v = v.copy()
    shift = 1
    while shift < n:
        v ^= v << shift
        shift *= 2
    return v & ((1 << n) - 1)


def _remove_bits(v: np.ndarray, positions: Sequence[int]) -> np.ndarray:
    for pos in sorted(positions, reverse=True):
        low = v & ((1 << pos) - 1)
        v = low | ((v >> (pos + 1)) << pos)
    return v


def _parity_reduce(coeffs, xs, zs, n: int, n_up: int, n_down: int):
    """Map JW (x, z) masks to the parity encoding and taper the two spin-parity qubits."""
    xp = _prefix_xor(xs, n)
    zp = zs ^ (zs >> 1)
    k = (np.bitwise_count(xs & zs).astype(np.int64) - np.bitwise_count(xp & zp)) % 4
    coeffs = coeffs * np.array([1, 1j, -1, -1j])[k]
    r_up, r_tot = n // 2 - 1, n - 1
    taper = (1 << r_up) | (1 << r_tot)
    if np.any((xp & taper) != 0):
        raise MappingError("operator does not conserve spin-resolved particle parity")
    eig = {r_up: (-1) ** n_up, r_tot: (-1) ** (n_up + n_down)}
    for r, s in eig.items():
        coeffs = np.where((zp >> r) & 1, coeffs * s, coeffs)
    zp = zp & ~taper
    return coeffs, _remove_bits(xp, [r_up, r_tot]), _remove_bits(zp, [r_up, r_tot])


def _check_counts(n: int, n_up: int, n_down: int) -> None:
    if n % 2:
        raise MappingError("blocked spin ordering needs an even number of spin orbitals")
    if n_up < 0 or n_down < 0 or n_up > n // 2 or n_down > n // 2:
        raise MappingError(f"({n_up}, {n_down}) electrons do not fit {n} spin orbitals")


def parity_map_reduced(h: FermionHamiltonian, n_up: int, n_down: int) -> PauliSum:
    n = h.n_spin_orbitals
    _check_counts(n, n_up, n_down)
    c, x, z = jordan_wigner_terms(h.fermion_terms(), n)
    c, x, z = _parity_reduce(c, x, z, n, n_up, n_down)
    return _accumulate(c, x, z, n - 2, hermitian=True)


@dataclass(frozen=True)
class QubitMapping:
    """A fermion-to-qubit encoding fixed to a mode count and particle sector."""

    name: str
    n_modes: int
    n_up: int
    n_down: int

    def __post_init__(self):
        if self.name not in ("jw", "parity"):
            raise MappingError(f"unknown mapping {self.name!r}; use 'jw' or 'parity'")
        _check_counts(self.n_modes, self.n_up, self.n_down)

    @property
    def n_qubits(self) -> int:
        return self.n_modes - 2 if self.name == "parity" else self.n_modes

    def map_terms(self, terms, hermitian: bool | None = None) -> PauliSum:
        c, x, z = jordan_wigner_terms(terms, self.n_modes)
        if self.name == "parity":
            c, x, z = _parity_reduce(c, x, z, self.n_modes, self.n_up, self.n_down)
        return _accumulate(c, x, z, self.n_qubits, hermitian)

    def map_hamiltonian(self, h: FermionHamiltonian) -> PauliSum:
        return self.map_terms(h.fermion_terms(), hermitian=True)

    def hf_bitstring(self) -> str:
        return hartree_fock_bitstring(self.n_modes, self.n_up, self.n_down, self.name)


def hartree_fock_bitstring(n_spin_orbitals: int, n_up: int, n_down: int,
                           mapping: str = "jw") -> str:
    """Reference bitstring; character ``q`` is qubit ``q``."""
    _check_counts(n_spin_orbitals, n_up, n_down)
    half = n_spin_orbitals // 2
    occ = [1 if i < n_up else 0 for i in range(half)] + [1 if i < n_down else 0 for i in range(half)]
    if mapping == "jw":
        return "".join(map(str, occ))
    if mapping != "parity":
        raise MappingError(f"unknown mapping {mapping!r}")
    par = list(np.bitwise_xor.accumulate(occ))
    del par[n_spin_orbitals - 1]
    del par[half - 1]
    return "".join(str(int(b)) for b in par)
