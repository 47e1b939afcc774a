//! Statevector simulation of the contracted quantum eigensolver for
//! fermion-encoded and qubit-particle ansätze.

pub mod acse;
pub mod cli;
pub mod error;
pub mod fock;
pub mod hamiltonian;
pub mod rdm;
pub mod resources;
pub mod scalar;

pub use error::{CqeError, Result};

pub type State = fock::FockState<f64>;
pub type Tensor = fock::TwoBodyTensor<f64>;
pub type Hamiltonian = hamiltonian::ReducedHamiltonian<f64>;
pub type Integrals = hamiltonian::IntegralSet<f64>;
pub type Residual = acse::ResidualMatrix<f64>;
pub type Config = acse::CqeConfig<f64>;
pub type Trace = acse::ConvergenceTrace<f64>;
pub type Rdm = rdm::Rdm2<f64>;
