"""Statevector VQE laboratory: Pauli algebra, fermion mappings, UCCSD/ADAPT engines,
noise mitigation and entanglement forging."""
from .adapt import (AdaptConfig, pool_gradients, run_adapt, run_double_threshold_adapt,
                    run_tetris_adapt, selected_ops)
from .ansatz import (ExcitationOp, PoolSelection, build_circuit, cnot_cost, cnot_depth,
                     compile_excitation, generate_pool, givens_network)
from .fermion import (ActiveSpaceSpec, FermionHamiltonian, MolecularIntegrals, QubitMapping,
                      apply_active_space, build_fermion_hamiltonian, hartree_fock_bitstring,
                      jordan_wigner, parse_fcidump, read_fcidump)
from .forging import ForgedAnsatz, forged_expectation, run_forged_vqe, split_hamiltonian
from .noise import NoiseModel, ZNEConfig, trex_calibrate, trex_energy, zne_energy, zne_extrapolate
from .pauli import PauliSum, PauliTerm, expectation, pauli_from_label, read_pauli_sum
from .sim import ParamCircuit, PauliRotation, StateVector, apply_circuit, energy, energy_and_gradient
from .vqe import OptimizerConfig, RunRecord, exact_ground, run_vqe

__version__ = "0.1.0"
