use serde::{Deserialize, Serialize};

use crate::fock::TwoBodyTensor;
use crate::scalar::Real;

use super::residual::ResidualMatrix;

/// Optional second-order correction of the residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SecondOrder {
    None,
    /// Limited-memory BFGS keeping this many curvature pairs.
    Lbfgs(usize),
}

impl SecondOrder {
    pub fn memory(self) -> usize {
        match self {
            SecondOrder::None => 0,
            SecondOrder::Lbfgs(m) => m,
        }
    }
}

impl std::str::FromStr for SecondOrder {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "none" => Ok(SecondOrder::None),
            "lbfgs:2" => Ok(SecondOrder::Lbfgs(2)),
            "lbfgs:3" => Ok(SecondOrder::Lbfgs(3)),
            other => Err(format!("unknown second-order option '{other}' (expected none|lbfgs:2|lbfgs:3)")),
        }
    }
}

/// Curvature pair `(s, y)`: a step and the resulting gradient change.
#[derive(Debug, Clone)]
pub struct CurvaturePair<T: Real> {
    pub s: TwoBodyTensor<T>,
    pub y: TwoBodyTensor<T>,
}

impl<T: Real> CurvaturePair<T> {
    /// `None` when `s·y ≤ 0`, which would break positive definiteness.
    pub fn new(s: TwoBodyTensor<T>, y: TwoBodyTensor<T>) -> Option<Self> {
        if s.real_dot(&y) > T::zero() {
            Some(CurvaturePair { s, y })
        } else {
            None
        }
    }
}

/// Two-loop recursion: returns `H·g` for the inverse-Hessian estimate `H`
/// built from `history` (oldest first), with initial scaling
/// `γ = s·y / y·y` from the newest pair.
pub fn lbfgs_two_loop<T: Real>(history: &[CurvaturePair<T>], g: &TwoBodyTensor<T>) -> TwoBodyTensor<T> {
    let mut q = g.clone();
    let usable: Vec<&CurvaturePair<T>> = history
        .iter()
        .filter(|p| p.s.real_dot(&p.y) > T::zero())
        .collect();
    let mut alphas = Vec::with_capacity(usable.len());
    for p in usable.iter().rev() {
        let rho = T::one() / p.y.real_dot(&p.s);
        let alpha = rho * p.s.real_dot(&q);
        q.axpy(-alpha, &p.y);
        alphas.push((alpha, rho));
    }
    if let Some(last) = usable.last() {
        let gamma = last.s.real_dot(&last.y) / last.y.real_dot(&last.y);
        q = q.scaled(gamma);
    }
    for (p, (alpha, rho)) in usable.iter().zip(alphas.into_iter().rev()) {
        let beta = rho * p.y.real_dot(&q);
        q.axpy(alpha - beta, &p.s);
    }
    q
}

/// Corrected residual `B = A + C`.
///
/// The energy gradient in the generator coordinates is `conj(A)`, so
/// `B = conj(H·conj(A))`. An empty history returns `A` unchanged.
pub fn quasi_newton_correct<T: Real>(
    history: &[CurvaturePair<T>],
    gradient: &ResidualMatrix<T>,
) -> ResidualMatrix<T> {
    if history.is_empty() {
        return gradient.clone();
    }
    let g = gradient.tensor.conj();
    ResidualMatrix::new(lbfgs_two_loop(history, &g).conj())
}
