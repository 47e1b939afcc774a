use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{arg_err, CqeError, Result};
use crate::fock::{apply_two_body_exponential, Encoding, FockState};
use crate::hamiltonian::ReducedHamiltonian;
use crate::rdm::{compute_rdm2, Rdm2};
use crate::resources::{count_cnots, CostModel};
use crate::scalar::Real;

use super::ansatz::{merge_p_depth, Ansatz, AnsatzLayer};
use super::lbfgs::{quasi_newton_correct, CurvaturePair, SecondOrder};
use super::residual::{residual, sparsify, ResidualMatrix, ResidualMethod};
use super::step::{choose_epsilon, EpsilonStrategy, TrustRegion};

/// Energy decrease below which an iteration counts as stalled.
pub const STALL_DECREASE: f64 = 1e-12;
/// Consecutive stalled iterations that end a run.
pub const STALL_LIMIT: usize = 5;

/// Solver settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CqeConfig<T> {
    pub encoding: Encoding,
    pub sparse_c: T,
    pub p_depth: usize,
    pub delta: T,
    pub residual_method: ResidualMethod,
    pub epsilon_strategy: EpsilonStrategy<T>,
    pub second_order: SecondOrder,
    pub tol_residual_norm: T,
    pub max_iterations: usize,
}

impl<T: Real> Default for CqeConfig<T> {
    fn default() -> Self {
        CqeConfig {
            encoding: Encoding::Fermion,
            sparse_c: T::zero(),
            p_depth: 0,
            delta: T::lit(0.01),
            residual_method: ResidualMethod::ExactCommutator,
            epsilon_strategy: EpsilonStrategy::QuadraticTrustRegion,
            second_order: SecondOrder::None,
            tol_residual_norm: T::lit(0.01),
            max_iterations: 200,
        }
    }
}

impl<T: Real> CqeConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.sparse_c >= T::zero() && self.sparse_c <= T::one()) {
            return arg_err(format!("sparse_c must lie in [0, 1], got {}", self.sparse_c));
        }
        if !(self.delta > T::zero()) || !self.delta.is_finite() {
            return arg_err(format!("delta must be positive, got {}", self.delta));
        }
        if !(self.tol_residual_norm > T::zero()) || !self.tol_residual_norm.is_finite() {
            return arg_err(format!("tol must be positive, got {}", self.tol_residual_norm));
        }
        if let EpsilonStrategy::Fixed(e) = self.epsilon_strategy {
            if !e.is_finite() {
                return arg_err("epsilon fixed step must be finite");
            }
        }
        if let SecondOrder::Lbfgs(m) = self.second_order {
            if !(2..=3).contains(&m) {
                return arg_err(format!("second_order memory must be 2 or 3, got {m}"));
            }
        }
        Ok(())
    }
}

/// Why the iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Converged,
    MaxIterations,
    Stagnated,
}

impl RunStatus {
    pub fn label(self) -> &'static str {
        match self {
            RunStatus::Converged => "converged",
            RunStatus::MaxIterations => "max_iterations",
            RunStatus::Stagnated => "stagnated",
        }
    }
}

/// One line of the convergence trace. Residual norms are measured at the
/// start of the iteration, the energy and ansatz sizes after its step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub energy: f64,
    #[serde(rename = "residual_norm_A")]
    pub residual_norm_a: f64,
    #[serde(rename = "residual_norm_B")]
    pub residual_norm_b: f64,
    pub layers: usize,
    pub nnz: usize,
    pub cnot_estimate: u64,
    pub epsilon: f64,
    /// `|E(ψ) - E(²D)|` between the statevector and 2-RDM energies.
    pub energy_identity_gap: f64,
}

/// Result of [`run_cqe`].
#[derive(Debug, Clone)]
pub struct ConvergenceTrace<T: Real> {
    pub records: Vec<IterationRecord>,
    pub status: RunStatus,
    pub reference_energy: T,
    pub final_energy: T,
    pub ansatz: Ansatz<T>,
    pub final_state: FockState<T>,
    pub rdm2: Rdm2<T>,
}

/// Machine-readable run summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub status: RunStatus,
    pub iterations: usize,
    pub reference_energy: f64,
    pub final_energy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fci_energy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_e: Option<f64>,
    pub layers: usize,
    pub nnz: usize,
    pub cnot_estimate: u64,
}

impl<T: Real> ConvergenceTrace<T> {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    /// One JSON object per line.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }

    pub fn summary(&self, fci_energy: Option<f64>) -> RunSummary {
        let final_energy = self.final_energy.as_f64();
        RunSummary {
            status: self.status,
            iterations: self.iterations(),
            reference_energy: self.reference_energy.as_f64(),
            final_energy,
            fci_energy,
            delta_e: fci_energy.map(|e| final_energy - e),
            layers: self.ansatz.layers.len(),
            nnz: self.ansatz.generator_count(),
            cnot_estimate: count_cnots(&self.ansatz, &CostModel),
        }
    }
}

fn trial_energy<T: Real>(
    ham: &ReducedHamiltonian<T>,
    state: &FockState<T>,
    ansatz: &Ansatz<T>,
    direction: &ResidualMatrix<T>,
    p: usize,
    iteration: usize,
    epsilon: T,
) -> Result<T> {
    if p == 0 {
        let layer = AnsatzLayer {
            tensor: direction.tensor.clone(),
            epsilon,
            iteration_born: iteration,
        };
        Ok(ham.energy(&apply_two_body_exponential(state, &layer)?))
    } else {
        let trial = merge_p_depth(ansatz, direction, p, epsilon, iteration).ansatz;
        Ok(ham.energy(&trial.prepare()?))
    }
}

/// Runs the contracted quantum eigensolver from `reference`.
///
/// Each iteration evaluates the residual `A` of the current state, optionally
/// corrects it to `B` with limited-memory BFGS, prunes it with `SPARSE[c]`,
/// picks `ε` and folds `ε·D` into the ansatz, where `D = -conj(B)` is the
/// descent direction in generator coordinates. The run stops when the
/// Frobenius norm of `B` (of `A` without correction) drops below the
/// tolerance, after `max_iterations`, or after [`STALL_LIMIT`] iterations
/// that lower the energy by less than [`STALL_DECREASE`].
pub fn run_cqe<T: Real>(
    ham: &ReducedHamiltonian<T>,
    reference: &FockState<T>,
    config: &CqeConfig<T>,
) -> Result<ConvergenceTrace<T>> {
    config.validate()?;
    if reference.n_qubits() != ham.n_qubits() {
        return arg_err(format!(
            "reference on {} qubits, Hamiltonian on {}",
            reference.n_qubits(),
            ham.n_qubits()
        ));
    }
    if reference.particle_number() != ham.n_electrons || reference.sz_twice() != ham.sz_twice {
        return Err(CqeError::Contract(format!(
            "reference in sector (N={}, 2Sz={}), Hamiltonian built for (N={}, 2Sz={})",
            reference.particle_number(),
            reference.sz_twice(),
            ham.n_electrons,
            ham.sz_twice
        )));
    }
    let reference = reference.normalized()?;
    let model = CostModel;
    let memory = config.second_order.memory();
    let e_ref = ham.energy(&reference);

    let mut ansatz = Ansatz::new(reference.clone(), config.encoding);
    let mut state = reference.clone();
    let mut energy = e_ref;
    let mut trust = TrustRegion::default();
    let mut history: Vec<CurvaturePair<T>> = Vec::new();
    // step and gradient of the previous iteration when it may form a pair
    let mut pending = None;
    let mut records = Vec::new();
    let mut stalled = 0;
    let mut status = RunStatus::MaxIterations;

    for iter in 1..=config.max_iterations {
        let a = residual(&state, ham, config.encoding, config.residual_method, config.delta)?;
        let gradient = a.tensor.conj();
        if let Some((s, g_old)) = pending.take() {
            if let Some(pair) = CurvaturePair::new(s, gradient.sub(&g_old)) {
                history.push(pair);
                if history.len() > memory {
                    history.remove(0);
                }
            }
        }
        let b = if memory > 0 { quasi_newton_correct(&history, &a) } else { a.clone() };
        let conv_norm = if memory > 0 { b.norm_2 } else { a.norm_2 };

        let mut epsilon = T::zero();
        let converged = conv_norm < config.tol_residual_norm;
        if !converged {
            let pruned = sparsify(&b, config.sparse_c)?;
            let direction = ResidualMatrix::new(pruned.tensor.conj().scaled(-T::one()));
            let choice = choose_epsilon(config.epsilon_strategy, direction.norm_inf, &mut trust, energy, |eps| {
                trial_energy(ham, &state, &ansatz, &direction, config.p_depth, iter, eps)
            })?;
            epsilon = choice.epsilon;
            if epsilon != T::zero() {
                let outcome = merge_p_depth(&ansatz, &direction, config.p_depth, epsilon, iter);
                let fresh_only = outcome.merged == 0 && outcome.appended;
                ansatz = outcome.ansatz;
                state = if config.p_depth == 0 {
                    apply_two_body_exponential(&state, ansatz.layers.last().expect("layer appended"))?
                } else {
                    ansatz.prepare()?
                };
                if memory > 0 && fresh_only {
                    pending = Some((direction.tensor.scaled(epsilon), gradient));
                }
            }
            let new_energy = ham.energy(&state);
            if energy - new_energy < T::lit(STALL_DECREASE) {
                stalled += 1;
            } else {
                stalled = 0;
            }
            energy = new_energy;
        }

        let rdm = compute_rdm2(&state)?;
        records.push(IterationRecord {
            iter,
            energy: energy.as_f64(),
            residual_norm_a: a.norm_2.as_f64(),
            residual_norm_b: b.norm_2.as_f64(),
            layers: ansatz.layers.len(),
            nnz: ansatz.generator_count(),
            cnot_estimate: count_cnots(&ansatz, &model),
            epsilon: epsilon.as_f64(),
            energy_identity_gap: (rdm.energy(ham) - energy).abs().as_f64(),
        });
        if converged {
            status = RunStatus::Converged;
            break;
        }
        if stalled >= STALL_LIMIT {
            status = RunStatus::Stagnated;
            break;
        }
    }

    let rdm2 = compute_rdm2(&state)?;
    Ok(ConvergenceTrace {
        records,
        status,
        reference_energy: e_ref,
        final_energy: energy,
        ansatz,
        final_state: state,
        rdm2,
    })
}
