"""Regenerate the bundled FCIDUMP / Pauli-sum files and their manifest.

Requires pyscf (generation time only; nothing under src/ imports it).

    python scripts/generate_hamiltonians.py
"""
import json
from pathlib import Path

import numpy as np
from pyscf import ao2mo, gto, mcscf, scf

from vqe_forge.fermion import (ActiveSpaceSpec, MolecularIntegrals, QubitMapping, apply_active_space,
                               build_fermion_hamiltonian, read_fcidump, write_fcidump)
from vqe_forge.pauli import read_pauli_sum, write_pauli_sum
from vqe_forge.vqe import exact_ground

DATA = Path(__file__).resolve().parents[1] / "src" / "vqe_forge" / "data"

MOLECULES = {
    "h2": "H 0 0 0; H 0 0 0.735",
    "lih": "Li 0 0 0; H 0 0 1.595",
    "beh2": "Be 0 0 0; H 0 0 1.3; H 0 0 -1.3",
}

# name -> (molecule, frozen, active, n_active_electrons, write pauli file)
INSTANCES = {
    "h2": ("h2", (), (0, 1), 2, True),
    "lih": ("lih", (0,), (1, 2, 3, 4, 5), 2, True),
    "beh2": ("beh2", (0,), (1, 2, 3, 4, 5, 6), 4, True),
    "beh2_2o": ("beh2", (0, 1), (2, 6), 2, True),
    "beh2_3o": ("beh2", (0, 1), (2, 5, 6), 2, True),
    "beh2_4o": ("beh2", (0,), (1, 2, 5, 6), 4, True),
}


def mo_integrals(atom):
    mol = gto.M(atom=atom, basis="sto-3g", unit="Angstrom", verbose=0)
    mf = scf.RHF(mol).run(conv_tol=1e-12)
    c = mf.mo_coeff
    n = c.shape[1]
    h1 = c.T @ mf.get_hcore() @ c
    h1 = 0.5 * (h1 + h1.T)
    h2 = ao2mo.restore(1, ao2mo.full(mol, c), n)
    ints = MolecularIntegrals(n, mol.nelectron, float(mol.energy_nuc()), h1, h2)
    return mol, mf, ints


def main():
    DATA.mkdir(parents=True, exist_ok=True)
    manifest = {}
    scf_cache = {}
    for name, atom in MOLECULES.items():
        mol, mf, ints = mo_integrals(atom)
        write_fcidump(ints, DATA / f"{name}.fcidump")
        scf_cache[name] = (mol, mf)
    for name, (molname, frozen, active, m, write) in INSTANCES.items():
        mol, mf = scf_cache[molname]
        ints = read_fcidump(DATA / f"{molname}.fcidump")
        spec = ActiveSpaceSpec(frozen, active, m)
        red = apply_active_space(ints, spec)
        fh = build_fermion_hamiltonian(red)
        mapping = QubitMapping("parity", fh.n_spin_orbitals, red.n_up, red.n_down)
        h = mapping.map_hamiltonian(fh)
        entry = {
            "molecule": molname,
            "geometry_angstrom": MOLECULES[molname],
            "basis": "sto-3g",
            "fcidump": f"{molname}.fcidump",
            "active_space": spec.to_dict(),
            "mapping": "parity",
            "n_up": red.n_up,
            "n_down": red.n_down,
            "n_qubits": h.n_qubits,
            "n_terms": len(h),
            "hf_energy": red.hartree_fock_energy(),
        }
        if write:
            path = DATA / f"{name}.pauli"
            write_pauli_sum(h, path, header=[
                f"{molname} sto-3g, geometry: {MOLECULES[molname]} (Angstrom)",
                f"active space {spec.to_dict()}, parity mapping with two-qubit reduction",
            ])
            h = read_pauli_sum(path)
            entry["pauli"] = path.name
        e, _ = exact_ground(h)
        # pyscf CASCI in the same orbitals as an independent cross-check
        mc = mcscf.CASCI(mf, len(active), m)
        mo = mc.sort_mo([i + 1 for i in active])
        e_cas = mc.kernel(mo)[0]
        entry["exact_energy"] = e
        entry["pyscf_casci_energy"] = float(e_cas)
        print(f"{name:8s} qubits={h.n_qubits:2d} terms={len(h):4d} exact={e:.10f} casci={e_cas:.10f}")
        if abs(e - e_cas) > 1e-8:
            raise SystemExit(f"{name}: qubit ground energy disagrees with CASCI")
        manifest[name] = entry
    (DATA / "hamiltonians.json").write_text(json.dumps(manifest, indent=2) + "\n")


if __name__ == "__main__":
    main()
