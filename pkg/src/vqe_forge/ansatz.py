"""UCCSD excitation pool, circuit compilation and the CNOT cost model."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .fermion import QubitMapping, _accumulate, jordan_wigner_terms
from .pauli import PauliSum, commutes
from .sim import ParamCircuit, PauliRotation

CNOTS_DOUBLE = 13
CNOTS_SINGLE = 2


class PoolError(ValueError):
    pass


@dataclass(frozen=True)
class ExcitationOp:
    kind: str                      # "single" | "double"
    occupied: tuple[int, ...]
    virtual: tuple[int, ...]
    generator: PauliSum = field(compare=False, repr=False)
    name: str = ""

    @property
    def support(self) -> frozenset:
        """Spin-orbital modes touched; used as the block's qubits in the cost model."""
        return frozenset(self.occupied + self.virtual)

    @property
    def cnot_cost(self) -> int:
        return CNOTS_DOUBLE if self.kind == "double" else CNOTS_SINGLE

    def to_dict(self) -> dict:
        return {"name": self.name, "kind": self.kind,
                "occupied": list(map(int, self.occupied)), "virtual": list(map(int, self.virtual))}


def excitation_fermion_terms(occupied, virtual):
    """``T - T^dagger`` with ``T = a+_a (a+_b) (a_j) a_i`` as ladder-term tuples."""
    if len(occupied) == 1:
        (i,), (a,) = occupied, virtual
        return [(1.0, ((a, 1), (i, 0))), (-1.0, ((i, 1), (a, 0)))]
    i, j = occupied
    a, b = virtual
    return [(1.0, ((a, 1), (b, 1), (j, 0), (i, 0))),
            (-1.0, ((i, 1), (j, 1), (b, 0), (a, 0)))]


def make_excitation(occupied, virtual, mapping: QubitMapping) -> ExcitationOp:
    occupied, virtual = tuple(occupied), tuple(virtual)
    half = mapping.n_modes // 2
    spin = lambda m: m // half
    if sorted(map(spin, occupied)) != sorted(map(spin, virtual)):
        raise PoolError(f"excitation {occupied}->{virtual} does not conserve spin")
    if set(occupied) & set(virtual):
        raise PoolError("occupied and virtual indices overlap")
    gen = mapping.map_terms(excitation_fermion_terms(occupied, virtual), hermitian=False)
    kind = "single" if len(occupied) == 1 else "double"
    name = ("s" if kind == "single" else "d") + "_" + "_".join(map(str, occupied + virtual))
    return ExcitationOp(kind, occupied, virtual, gen, name)


def generate_pool(n_spatial_active: int, n_up: int, n_down: int, mapping="jw") -> list[ExcitationOp]:
    """All spin-conserving singles then doubles, each block in lexicographic index order."""
    n = n_spatial_active
    if n_up > n or n_down > n or n_up < 0 or n_down < 0:
        raise PoolError(f"({n_up}, {n_down}) electrons do not fit {n} spatial orbitals")
    if isinstance(mapping, str):
        mapping = QubitMapping(mapping, 2 * n, n_up, n_down)
    occ_up, vir_up = list(range(n_up)), list(range(n_up, n))
    occ_dn, vir_dn = list(range(n, n + n_down)), list(range(n + n_down, 2 * n))

    singles = [((i,), (a,)) for occ, vir in ((occ_up, vir_up), (occ_dn, vir_dn))
               for i in occ for a in vir]
    doubles = []
    for occ, vir in ((occ_up, vir_up), (occ_dn, vir_dn)):
        doubles += [(ij, ab) for ij in combinations(occ, 2) for ab in combinations(vir, 2)]
    doubles += [((i, j), (a, b)) for i in occ_up for j in occ_dn for a in vir_up for b in vir_dn]
    singles.sort()
    doubles.sort()
    return [make_excitation(o, v, mapping) for o, v in singles + doubles]


def compile_excitation(op: ExcitationOp, param: int = 0) -> list[PauliRotation]:
    """``exp(theta * G)`` as commuting Pauli rotations sharing one parameter.

    For ``G = sum_k i c_k P_k`` each factor is ``exp(i theta c_k P_k)``, i.e. a
    rotation with coefficient ``-2 c_k``.
    """
    terms = [(c, t) for c, t in op.generator if not t.is_identity()]
    for (ca, ta), (cb, tb) in combinations(terms, 2):
        if not commutes(ta, tb):
            raise PoolError(f"generator of {op.name} has non-commuting terms {ta} and {tb}")
    if any(abs(c.real) > 1e-10 for c, _ in terms):
        raise PoolError(f"generator of {op.name} is not anti-Hermitian")
    return [PauliRotation(t, param, -2.0 * c.imag) for c, t in terms]


def build_circuit(ops, n_qubits: int) -> ParamCircuit:
    gates = []
    for k, op in enumerate(ops):
        gates += compile_excitation(op, k)
    names, seen = [], {}
    for op in ops:
        seen[op.name] = seen.get(op.name, 0) + 1
        names.append(op.name if seen[op.name] == 1 else f"{op.name}#{seen[op.name]}")
    return ParamCircuit(n_qubits, gates, names)


@dataclass
class PoolSelection:
    chosen: list = field(default_factory=list)

    def __post_init__(self):
        names = [op.name for op in self.chosen]
        if len(set(names)) != len(names):
            raise PoolError("selection contains duplicate operators")

    @property
    def counts(self) -> tuple[int, int]:
        singles = sum(op.kind == "single" for op in self.chosen)
        return singles, len(self.chosen) - singles

    def to_dict(self) -> dict:
        s, d = self.counts
        return {"n_singles": s, "n_doubles": d, "operators": [op.to_dict() for op in self.chosen]}


def cnot_cost(selection) -> int:
    """``13 * doubles + 2 * singles``; accepts a PoolSelection or ``(n_singles, n_doubles)``."""
    if isinstance(selection, PoolSelection):
        n_singles, n_doubles = selection.counts
    elif isinstance(selection, list) and (not selection or isinstance(selection[0], ExcitationOp)):
        return cnot_cost(PoolSelection(selection))
    else:
        n_singles, n_doubles = selection
    return CNOTS_DOUBLE * n_doubles + CNOTS_SINGLE * n_singles


def excitation_blocks(ops) -> list[tuple[frozenset, int]]:
    return [(op.support, op.cnot_cost) for op in ops]


def cnot_depth(blocks) -> int:
    """Two-qubit depth of ASAP-scheduled blocks ``(support, ladder_depth)``."""
    finish: dict = {}
    depth = 0
    for support, d in blocks:
        start = max((finish.get(q, 0) for q in support), default=0)
        for q in support:
            finish[q] = start + d
        depth = max(depth, start + d)
    return depth


def givens_network(n_modes: int, layers: int, prefix: str = "g") -> ParamCircuit:
    """Brick-wall of particle-conserving nearest-neighbour rotations under JW."""
    gates, names = [], []
    for layer in range(layers):
        for k in range(layer % 2, n_modes - 1, 2):
            terms = [(1.0, ((k + 1, 1), (k, 0))), (-1.0, ((k, 1), (k + 1, 0)))]
            gen = _accumulate(*jordan_wigner_terms(terms, n_modes), n_modes, hermitian=False)
            op = ExcitationOp("single", (k,), (k + 1,), gen, f"{prefix}{layer}_{k}")
            gates += compile_excitation(op, len(names))
            names.append(op.name)
    if n_modes > 1 and layers > 0 and not names:
        raise PoolError("empty Givens network")
    return ParamCircuit(n_modes, gates, names)
