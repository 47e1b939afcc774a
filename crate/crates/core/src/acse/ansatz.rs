use crate::error::Result;
use crate::fock::{apply_two_body_exponential, Encoding, FockState, TwoBodyTensor};
use crate::scalar::Real;

use super::residual::ResidualMatrix;

/// One factor `e^{ε Â}` of the product ansatz.
///
/// The tensor is stored unscaled; contributions merged in later iterations
/// are rescaled by `ε_new / ε`.
#[derive(Debug, Clone)]
pub struct AnsatzLayer<T: Real> {
    pub tensor: TwoBodyTensor<T>,
    pub epsilon: T,
    pub iteration_born: usize,
}

impl<T: Real> AnsatzLayer<T> {
    pub fn encoding(&self) -> Encoding {
        self.tensor.encoding()
    }

    /// Nonzero generators `(a, b)`, `a <= b`.
    pub fn generator_count(&self) -> usize {
        self.tensor.generator_count()
    }

    fn holds(&self, a: usize, b: usize) -> bool {
        let nz = |v: crate::scalar::Cplx<T>| v.re != T::zero() || v.im != T::zero();
        nz(self.tensor.at(a, b)) || nz(self.tensor.at(b, a))
    }
}

/// `… e^{ε_2 Â_2} e^{ε_1 Â_1} |Ψ₀⟩`.
#[derive(Debug, Clone)]
pub struct Ansatz<T: Real> {
    pub layers: Vec<AnsatzLayer<T>>,
    pub reference: FockState<T>,
    pub encoding: Encoding,
}

impl<T: Real> Ansatz<T> {
    pub fn new(reference: FockState<T>, encoding: Encoding) -> Self {
        Ansatz {
            layers: Vec::new(),
            reference,
            encoding,
        }
    }

    /// Applies every layer to the reference, oldest first.
    pub fn prepare(&self) -> Result<FockState<T>> {
        let mut state = self.reference.clone();
        for layer in &self.layers {
            state = apply_two_body_exponential(&state, layer)?;
        }
        Ok(state)
    }

    pub fn generator_count(&self) -> usize {
        self.layers.iter().map(|l| l.generator_count()).sum()
    }
}

/// Outcome of folding one step into the ansatz.
#[derive(Debug, Clone)]
pub struct MergeOutcome<T: Real> {
    pub ansatz: Ansatz<T>,
    /// `true` when a fresh layer was appended.
    pub appended: bool,
    /// Number of generators folded into existing layers.
    pub merged: usize,
}

/// Adds `ε · direction` to the ansatz.
///
/// Each generator `{a, b}` of `direction` goes into the most recent layer born
/// in one of the previous `p` iterations (`iteration_born ≥ iteration - p`)
/// that already holds it; the rest form one fresh layer born at `iteration`.
/// With `p = 0` every step becomes a new layer.
pub fn merge_p_depth<T: Real>(
    ansatz: &Ansatz<T>,
    direction: &ResidualMatrix<T>,
    p: usize,
    epsilon: T,
    iteration: usize,
) -> MergeOutcome<T> {
    let mut out = ansatz.clone();
    if epsilon == T::zero() || direction.nnz() == 0 {
        return MergeOutcome {
            ansatz: out,
            appended: false,
            merged: 0,
        };
    }
    let dir = &direction.tensor;
    let mut fresh = TwoBodyTensor::zeros(dir.n_spin(), dir.encoding());
    let mut fresh_used = false;
    let mut merged = 0;
    let gens: Vec<(usize, usize)> = dir.generator_pairs().collect();
    let floor = iteration.saturating_sub(p);
    for (a, b) in gens {
        let target = if p == 0 {
            None
        } else {
            out.layers
                .iter()
                .rposition(|l| l.iteration_born >= floor && l.iteration_born < iteration && l.holds(a, b))
        };
        match target {
            Some(idx) => {
                let layer = &mut out.layers[idx];
                let scale = epsilon / layer.epsilon;
                *layer.tensor.at_mut(a, b) += dir.at(a, b) * scale;
                if a != b {
                    *layer.tensor.at_mut(b, a) += dir.at(b, a) * scale;
                }
                merged += 1;
            }
            None => {
                *fresh.at_mut(a, b) = dir.at(a, b);
                if a != b {
                    *fresh.at_mut(b, a) = dir.at(b, a);
                }
                fresh_used = true;
            }
        }
    }
    if fresh_used {
        out.layers.push(AnsatzLayer {
            tensor: fresh,
            epsilon,
            iteration_born: iteration,
        });
    }
    MergeOutcome {
        ansatz: out,
        appended: fresh_used,
        merged,
    }
}
