//! Gate-count estimates under a declared cost model and tomography
//! measurement grouping.
//!
//! The cost model compiles `exp(iθP)` for a Pauli string `P` of weight `w`
//! with a CNOT ladder of `2(w - 1)` gates and expands every generator into
//! Pauli strings exactly, so Jordan-Wigner parity strings raise the weight of
//! fermionic generators while qubit-particle generators never exceed weight 4.

mod grouping;
mod pauli;

use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::acse::{Ansatz, AnsatzLayer};
use crate::error::Result;
use crate::fock::Encoding;
use crate::hamiltonian::{build_reduced_hamiltonian, ReducedHamiltonian};
use crate::scalar::Real;

pub use grouping::{measurement_groups, projected_strings, target_strings, GroupingReport, MeasurementGraph, MeasurementTarget, MAX_GROUPING_QUBITS};
pub use pauli::{double_excitation, expand_ladder_product, generator_strings, PauliString, PauliSum};

/// CNOT cost of Pauli-string exponentials.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostModel;

impl CostModel {
    pub fn cnot_per_pauli_string(&self, weight: u32) -> u64 {
        if weight >= 2 {
            2 * (weight as u64 - 1)
        } else {
            0
        }
    }

    pub fn sum_cost(&self, sum: &PauliSum) -> u64 {
        sum.keys().map(|s| self.cnot_per_pauli_string(s.weight())).sum()
    }

    /// Cost of `exp(θΓ - θ*Γ†)` for `Γ = a†_i a†_j a_l a_k`.
    pub fn generator_cost(
        &self,
        idx: (usize, usize, usize, usize),
        theta: Complex64,
        n_qubits: usize,
        encoding: Encoding,
    ) -> u64 {
        self.sum_cost(&generator_strings(idx, theta, n_qubits, encoding))
    }

    pub fn layer_cost<T: Real>(&self, layer: &AnsatzLayer<T>) -> u64 {
        let t = &layer.tensor;
        let pairs = t.pair_index();
        t.generator_pairs()
            .map(|(a, b)| {
                let (i, j) = pairs.pair(a);
                let (k, l) = pairs.pair(b);
                let v = t.at(a, b);
                let theta = Complex64::new(v.re.as_f64(), v.im.as_f64());
                self.generator_cost((i, j, k, l), theta, t.n_spin(), t.encoding())
            })
            .sum()
    }
}

/// Total CNOT estimate of the compiled ansatz.
pub fn count_cnots<T: Real>(ansatz: &Ansatz<T>, model: &CostModel) -> u64 {
    ansatz.layers.iter().map(|l| model.layer_cost(l)).sum()
}

/// Residual-evaluation cost estimates for one Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxCostReport {
    pub n_qubits: usize,
    pub one_body_terms: usize,
    pub two_body_terms: usize,
    /// CNOTs for one first-order Trotter step of `e^{-iδĤ}`.
    pub trotter_cnot_bound: u64,
    pub cholesky_order: usize,
    /// Mean CNOTs per two-body Cholesky factor.
    pub mean_cnots_per_factor: f64,
}

impl AuxCostReport {
    pub fn header() -> &'static str {
        "qubits  1-body  2-body  trotter_cnot  chol_order  cnot_per_factor"
    }

    pub fn row(&self) -> String {
        format!(
            "{:>6}  {:>6}  {:>6}  {:>12}  {:>10}  {:>15.1}",
            self.n_qubits,
            self.one_body_terms,
            self.two_body_terms,
            self.trotter_cnot_bound,
            self.cholesky_order,
            self.mean_cnots_per_factor
        )
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", Self::header());
        let _ = writeln!(out, "{}", self.row());
        out
    }
}

/// Trotter and Cholesky cost estimates for evaluating the auxiliary-state
/// residual.
///
/// One-body terms `h_pq (a†_p a_q + h.c.)` and the two-body part built from
/// the electron repulsion integrals alone are costed as separate Trotter
/// factors. A two-body Cholesky factor `½(Σ L_pq E_pq)²` is costed as an
/// orbital rotation diagonalizing `L` (a nearest-neighbour Givens network per
/// spin, applied and undone, 4 CNOTs per rotation) plus one `ZZ` rotation per
/// pair of spin orbitals with nonzero eigenvalue.
pub fn auxiliary_cost_report<T: Real>(ham: &ReducedHamiltonian<T>, model: &CostModel) -> Result<AuxCostReport> {
    let n = ham.n_qubits();
    let mut report = AuxCostReport {
        n_qubits: n,
        one_body_terms: 0,
        two_body_terms: 0,
        trotter_cnot_bound: 0,
        cholesky_order: 0,
        mean_cnots_per_factor: 0.0,
    };
    let two_body: ReducedHamiltonian<T> = match ham.integrals() {
        Some(ints) => {
            let r = ints.n_spatial;
            for p in 0..n {
                for q in (p..n).filter(|q| q % 2 == p % 2) {
                    if ints.h(p / 2, q / 2) == T::zero() {
                        continue;
                    }
                    report.one_body_terms += 1;
                    if p != q {
                        let mut s = expand_ladder_product(&[(true, p), (false, q)], n, Encoding::Fermion);
                        for (k, v) in expand_ladder_product(&[(true, q), (false, p)], n, Encoding::Fermion) {
                            *s.entry(k).or_insert(Complex64::new(0.0, 0.0)) += v;
                        }
                        s.retain(|_, v| v.norm() > 1e-12);
                        report.trotter_cnot_bound += model.sum_cost(&s);
                    }
                }
            }
            let mut eri_only = ints.clone();
            eri_only.h1 = vec![T::zero(); r * r];
            let chol = ham.cholesky()?;
            report.cholesky_order = chol.order();
            let givens = 2 * 2 * (r * r.saturating_sub(1) / 2) as u64 * 4;
            let mut total = 0u64;
            for l in &chol.vectors {
                let m = DMatrix::from_fn(r, r, |i, j| l[i * r + j].as_f64());
                let rank = SymmetricEigen::new(m)
                    .eigenvalues
                    .iter()
                    .filter(|v| v.abs() > 1e-10)
                    .count();
                let so = 2 * rank as u64;
                total += givens + model.cnot_per_pauli_string(2) * so * so.saturating_sub(1) / 2;
            }
            if chol.order() > 0 {
                report.mean_cnots_per_factor = total as f64 / chol.order() as f64;
            }
            build_reduced_hamiltonian(&eri_only)?
        }
        None => ham.clone(),
    };
    let pairs = two_body.k2.pair_index();
    for (a, b, k) in two_body.trotter_terms() {
        let (i, j) = pairs.pair(a);
        let (kk, l) = pairs.pair(b);
        // strings of K Γ + K* Γ† are those of the generator with θ = iK
        let theta = Complex64::new(-k.im.as_f64(), k.re.as_f64());
        report.two_body_terms += 1;
        report.trotter_cnot_bound += model.generator_cost((i, j, kk, l), theta, n, Encoding::Fermion);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn string_costs() {
        let m = CostModel;
        assert_eq!(m.cnot_per_pauli_string(0), 0);
        assert_eq!(m.cnot_per_pauli_string(1), 0);
        assert_eq!(m.cnot_per_pauli_string(4), 6);
    }

    #[test]
    fn qubit_generator_cost_is_local() {
        let m = CostModel;
        let one = Complex64::new(1.0, 0.0);
        let near = m.generator_cost((2, 3, 0, 1), one, 12, Encoding::QubitParticle);
        let far = m.generator_cost((10, 11, 0, 1), one, 12, Encoding::QubitParticle);
        assert_eq!(near, 48);
        assert_eq!(near, far);
        let spread = (2, 10, 0, 4);
        assert!(
            m.generator_cost(spread, one, 12, Encoding::Fermion)
                > m.generator_cost(spread, one, 12, Encoding::QubitParticle)
        );
    }
}
