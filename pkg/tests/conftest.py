"""Shared oracles: occupation-basis fermion operators and random integral generators."""
import itertools

import numpy as np
import pytest
from hypothesis import settings

from vqe_forge.fermion import MolecularIntegrals

settings.register_profile("default", max_examples=50, deadline=None)
settings.load_profile("default")


def fock_annihilators(n_modes):
    """Dense a_j built by walking occupation-number basis states; bit j of the index is mode j."""
    dim = 1 << n_modes
    ops = []
    for j in range(n_modes):
        a = np.zeros((dim, dim))
        for s in range(dim):
            if s >> j & 1:
                sign = (-1) ** bin(s & ((1 << j) - 1)).count("1")
                a[s ^ (1 << j), s] = sign
        ops.append(a)
    return ops


def fock_matrix(fh):
    """Dense H from a FermionHamiltonian through explicit ladder-operator products."""
    n = fh.n_spin_orbitals
    a = fock_annihilators(n)
    ad = [m.T for m in a]
    h = fh.constant * np.eye(1 << n, dtype=complex)
    for p, q in zip(*np.nonzero(fh.one_body)):
        h += fh.one_body[p, q] * ad[p] @ a[q]
    for m, nn, o, p in zip(*np.nonzero(fh.two_body)):
        h += 0.5 * fh.two_body[m, nn, o, p] * ad[m] @ ad[nn] @ a[o] @ a[p]
    return h


def random_integrals(n_spatial, n_electrons, seed, scale=0.3):
    """Random real integrals with the 8-fold permutation symmetry."""
    rng = np.random.default_rng(seed)
    h1 = rng.normal(size=(n_spatial, n_spatial))
    h1 = 0.5 * (h1 + h1.T)
    h2 = np.zeros((n_spatial,) * 4)
    for i, j, k, l in itertools.product(range(n_spatial), repeat=4):
        if h2[i, j, k, l] != 0:
            continue
        v = scale * rng.normal()
        for p, q, r, s in ((i, j, k, l), (j, i, k, l), (i, j, l, k), (j, i, l, k),
                           (k, l, i, j), (l, k, i, j), (k, l, j, i), (l, k, j, i)):
            h2[p, q, r, s] = v
    return MolecularIntegrals(n_spatial, n_electrons, rng.normal(), h1, h2)


def sector_mask(n_modes, n_up=None, n_down=None, parity=None):
    """Boolean mask over basis states; ``parity=(pu, pt)`` selects by parities instead of counts."""
    half = n_modes // 2
    idx = np.arange(1 << n_modes)
    up = np.array([bin(i & ((1 << half) - 1)).count("1") for i in idx])
    dn = np.array([bin(i >> half).count("1") for i in idx])
    if parity is not None:
        return (up % 2 == parity[0]) & ((up + dn) % 2 == parity[1])
    return (up == n_up) & (dn == n_down)


def random_state(n, rng):
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# acceptance verdicts, printed once at the end of the session
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
