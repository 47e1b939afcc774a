//! Molecular integrals, the reduced two-body Hamiltonian, its Cholesky
//! factorization, exact diagonalization and short-time propagation.

mod cholesky;
mod fcidump;
mod fci;
mod integrals;
mod propagate;
mod reduced;

pub use cholesky::{pivoted_cholesky, CholeskyFactorization};
pub use fci::{fci_eigenpairs, fci_ground_state, SectorMatrix, MAX_SECTOR_DIM};
pub use fcidump::{parse_fcidump, write_fcidump};
pub use integrals::{eri_images, IntegralSet};
pub use propagate::{
    evolve_auxiliary, evolve_cholesky_factors, evolve_exact, evolve_trotter, PropagationMethod,
};
pub use reduced::{build_reduced_hamiltonian, ReducedHamiltonian, CHOLESKY_THRESHOLD};

