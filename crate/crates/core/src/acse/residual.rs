use serde::{Deserialize, Serialize};

use crate::error::{arg_err, CqeError, Result};
use crate::fock::{transition_tensor, transition_tensor_split, Encoding, FockState, TwoBodyTensor};
use crate::hamiltonian::{evolve_auxiliary, PropagationMethod, ReducedHamiltonian};
use crate::scalar::{creal, Real};

/// Smallest propagation time accepted by the auxiliary-state residual.
pub const MIN_DELTA: f64 = 1e-8;

/// Anti-Hermitian two-body tensor with cached norms.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualMatrix<T: Real> {
    pub tensor: TwoBodyTensor<T>,
    pub norm_inf: T,
    pub norm_2: T,
}

impl<T: Real> ResidualMatrix<T> {
    pub fn new(tensor: TwoBodyTensor<T>) -> Self {
        ResidualMatrix {
            norm_inf: tensor.norm_inf(),
            norm_2: tensor.norm_fro(),
            tensor,
        }
    }

    pub fn zeros(n_spin: usize, encoding: Encoding) -> Self {
        Self::new(TwoBodyTensor::zeros(n_spin, encoding))
    }

    pub fn encoding(&self) -> Encoding {
        self.tensor.encoding()
    }

    pub fn nnz(&self) -> usize {
        self.tensor.nnz()
    }

    /// Projects onto the anti-Hermitian part, `(T - T†) / 2`.
    pub(crate) fn anti_hermitian_part(tensor: TwoBodyTensor<T>) -> Self {
        let p = tensor.n_pairs();
        let half = T::lit(0.5);
        let mut out = tensor.clone();
        for a in 0..p {
            for b in a..p {
                let v = (tensor.at(a, b) - tensor.at(b, a).conj()) * half;
                *out.at_mut(a, b) = v;
                *out.at_mut(b, a) = -v.conj();
            }
        }
        Self::new(out)
    }
}

/// Which residual estimator drives the iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResidualMethod {
    /// `⟨ψ|[Ĥ, Γ]|ψ⟩` evaluated exactly on the statevector.
    #[serde(rename = "exact")]
    ExactCommutator,
    /// Auxiliary state from a first-order Trotter step.
    AuxTrotter,
    /// Auxiliary states from the Cholesky factors of `Ĥ`.
    AuxCholesky,
}

impl std::str::FromStr for ResidualMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "exact" => Ok(ResidualMethod::ExactCommutator),
            "aux-trotter" => Ok(ResidualMethod::AuxTrotter),
            "aux-cholesky" => Ok(ResidualMethod::AuxCholesky),
            other => Err(format!(
                "unknown residual method '{other}' (expected exact|aux-trotter|aux-cholesky)"
            )),
        }
    }
}

fn check_dims<T: Real>(state: &FockState<T>, ham: &ReducedHamiltonian<T>) -> Result<()> {
    if state.n_qubits() != ham.n_qubits() {
        return arg_err(format!(
            "state on {} qubits, Hamiltonian on {}",
            state.n_qubits(),
            ham.n_qubits()
        ));
    }
    Ok(())
}

/// `A^{ij;kl} = ⟨ψ|[Ĥ, Γ^{ij}_{lk}]|ψ⟩` with `Γ` in the requested encoding.
pub fn residual_exact<T: Real>(
    state: &FockState<T>,
    ham: &ReducedHamiltonian<T>,
    encoding: Encoding,
) -> Result<ResidualMatrix<T>> {
    check_dims(state, ham)?;
    let support = state.sector().basis();
    let psi = state.amplitudes();
    let hpsi = ham.apply_two_body(psi, support);
    let n = state.n_qubits();
    let left = transition_tensor(&hpsi, psi, support, n, encoding);
    let right = transition_tensor(psi, &hpsi, support, n, encoding);
    Ok(ResidualMatrix::anti_hermitian_part(left.sub(&right)))
}

/// Commutator expectation split by the Jordan-Wigner sign of each
/// contribution: returns `(P⁺, P⁻)` with `A_F = P⁺ + P⁻` and `A_Q = P⁺ - P⁻`.
pub fn residual_parity_split<T: Real>(
    state: &FockState<T>,
    ham: &ReducedHamiltonian<T>,
) -> Result<(TwoBodyTensor<T>, TwoBodyTensor<T>)> {
    check_dims(state, ham)?;
    let support = state.sector().basis();
    let psi = state.amplitudes();
    let hpsi = ham.apply_two_body(psi, support);
    let n = state.n_qubits();
    let (e1, o1) = transition_tensor_split(&hpsi, psi, support, n);
    let (e2, o2) = transition_tensor_split(psi, &hpsi, support, n);
    let plus = e1.sub(&e2);
    // odd contributions enter the fermionic residual with sign -1
    let minus = o2.sub(&o1);
    Ok((plus, minus))
}

fn imaginary_part<T: Real>(t: &TwoBodyTensor<T>) -> TwoBodyTensor<T> {
    let mut out = t.clone();
    out.data_mut().iter_mut().for_each(|v| *v = creal(v.im));
    out
}

fn aux_sum<T: Real>(
    state: &FockState<T>,
    ham: &ReducedHamiltonian<T>,
    delta: T,
    encoding: Encoding,
    method: PropagationMethod,
) -> Result<TwoBodyTensor<T>> {
    let n = state.n_qubits();
    let mut acc = TwoBodyTensor::zeros(n, encoding);
    for lambda in evolve_auxiliary(state, ham, delta, method)? {
        let amps = lambda.amplitudes();
        let m = transition_tensor(amps, amps, lambda.sector().basis(), n, encoding);
        acc.axpy(T::one(), &imaginary_part(&m));
    }
    Ok(acc)
}

/// Residual estimated from auxiliary states `|Λ⟩ = e^{-iδĤ}|ψ⟩` as
/// `δ⁻¹ Im⟨Λ|Γ|Λ⟩`, summed over factors for [`PropagationMethod::CholeskyFactored`].
///
/// When `Im⟨ψ|Γ|ψ⟩` does not vanish the centered difference between `±δ`
/// auxiliary states is used instead. The estimate is the real part of the
/// exact residual, with error `O(δ²)`.
pub fn residual_auxiliary<T: Real>(
    state: &FockState<T>,
    ham: &ReducedHamiltonian<T>,
    delta: T,
    encoding: Encoding,
    method: PropagationMethod,
) -> Result<ResidualMatrix<T>> {
    check_dims(state, ham)?;
    if !(delta > T::zero()) {
        return arg_err(format!("auxiliary step delta must be positive, got {delta}"));
    }
    if delta < T::lit(MIN_DELTA) {
        return Err(CqeError::IllConditioned(format!(
            "delta {delta:e} below {MIN_DELTA:e} amplifies roundoff"
        )));
    }
    let n = state.n_qubits();
    let amps = state.amplitudes();
    let base = transition_tensor(amps, amps, state.sector().basis(), n, encoding);
    let complex = base.data().iter().any(|v| v.im.abs() > T::lit(1e-12));
    let tensor = if complex {
        let plus = aux_sum(state, ham, delta, encoding, method)?;
        let minus = aux_sum(state, ham, -delta, encoding, method)?;
        plus.sub(&minus).scaled(T::one() / (T::lit(2.0) * delta))
    } else {
        aux_sum(state, ham, delta, encoding, method)?.scaled(T::one() / delta)
    };
    Ok(ResidualMatrix::anti_hermitian_part(tensor))
}

/// Dispatches on [`ResidualMethod`].
pub fn residual<T: Real>(
    state: &FockState<T>,
    ham: &ReducedHamiltonian<T>,
    encoding: Encoding,
    method: ResidualMethod,
    delta: T,
) -> Result<ResidualMatrix<T>> {
    match method {
        ResidualMethod::ExactCommutator => residual_exact(state, ham, encoding),
        ResidualMethod::AuxTrotter => {
            residual_auxiliary(state, ham, delta, encoding, PropagationMethod::TrotterFirstOrder)
        }
        ResidualMethod::AuxCholesky => {
            residual_auxiliary(state, ham, delta, encoding, PropagationMethod::CholeskyFactored)
        }
    }
}

/// `SPARSE[c]`: keeps elements with `|A| ≥ c·‖A‖_∞`.
pub fn sparsify<T: Real>(residual: &ResidualMatrix<T>, c: T) -> Result<ResidualMatrix<T>> {
    if !(c >= T::zero() && c <= T::one()) {
        return arg_err(format!("sparse_c must lie in [0, 1], got {c}"));
    }
    if c == T::zero() {
        return Ok(residual.clone());
    }
    let threshold = c * residual.norm_inf;
    let mut t = residual.tensor.clone();
    for v in t.data_mut() {
        if v.norm() < threshold {
            *v = creal(T::zero());
        }
    }
    Ok(ResidualMatrix::new(t))
}
