//! The contracted quantum eigensolver: residuals, pruning, p-depth merging,
//! step selection, limited-memory BFGS and the iteration driver.

mod ansatz;
mod cqe;
mod lbfgs;
mod residual;
mod step;

pub use ansatz::{merge_p_depth, Ansatz, AnsatzLayer, MergeOutcome};
pub use cqe::{
    run_cqe, ConvergenceTrace, CqeConfig, IterationRecord, RunStatus, RunSummary, STALL_DECREASE, STALL_LIMIT,
};
pub use lbfgs::{lbfgs_two_loop, quasi_newton_correct, CurvaturePair, SecondOrder};
pub use residual::{
    residual, residual_auxiliary, residual_exact, residual_parity_split, sparsify, ResidualMatrix, ResidualMethod,
    MIN_DELTA,
};
pub use step::{choose_epsilon, EpsilonStrategy, StepChoice, TrustRegion, DESCENT_SLACK};
