use crate::acse::AnsatzLayer;
use crate::error::{CqeError, Result};
use crate::scalar::{Cplx, Real};

use super::{excite, Encoding, FockState, PairIndex, TwoBodyTensor};

/// One exponential factor `exp(θ Γ - θ* Γ†)` with `Γ = a†_i a†_j a_l a_k`,
/// where `(i, j) = pair(create)` and `(k, l) = pair(annihilate)`. When the two
/// pairs coincide the factor is the diagonal phase `exp(θ n_i n_j)`.
#[derive(Debug, Clone, Copy)]
pub struct GeneratorTerm<T: Real> {
    pub create: usize,
    pub annihilate: usize,
    pub theta: Cplx<T>,
}

/// Applies one generator in place, exactly, on each of its two-dimensional
/// invariant subspaces `{|x⟩, Γ|x⟩}`.
pub fn rotate_pair<T: Real>(
    amplitudes: &mut [Cplx<T>],
    support: &[usize],
    pairs: &PairIndex,
    term: GeneratorTerm<T>,
    encoding: Encoding,
) {
    let (i, j) = pairs.pair(term.create);
    let (k, l) = pairs.pair(term.annihilate);
    let theta = term.theta;
    if term.create == term.annihilate {
        let mask = (1usize << i) | (1usize << j);
        let phase = theta.exp();
        for &x in support {
            if x & mask == mask {
                amplitudes[x] *= phase;
            }
        }
        return;
    }
    let phi = theta.norm();
    if phi == T::zero() {
        return;
    }
    let c = phi.cos();
    let sinc = phi.sin() / phi;
    let fwd = theta * sinc;
    let back = theta.conj() * sinc;
    for &x in support {
        if let Some((y, s)) = excite(x, i, j, k, l, encoding) {
            let ax = amplitudes[x];
            let ay = amplitudes[y];
            let s = T::lit(s as f64);
            amplitudes[x] = ax * c - back * ay * s;
            amplitudes[y] = ay * c + fwd * ax * s;
        }
    }
}

/// `exp(ε Σ_{ijkl} T^{ij;kl} Γ^{ij}_{lk}) |state⟩` as a first-order product of
/// exact single-generator exponentials, in ascending canonical pair order.
///
/// The full index sum equals four times the canonical one, so each generator
/// angle is `θ = 4 ε T^{ij;kl}`.
pub fn apply_tensor_exponential<T: Real>(
    state: &FockState<T>,
    tensor: &TwoBodyTensor<T>,
    epsilon: T,
) -> Result<FockState<T>> {
    if tensor.n_spin() != state.n_qubits() {
        return Err(CqeError::Argument(format!(
            "tensor over {} spin orbitals applied to {} qubits",
            tensor.n_spin(),
            state.n_qubits()
        )));
    }
    let violation = tensor.max_anti_hermitian_violation();
    if violation > T::lit(1e-10) {
        return Err(CqeError::Contract(format!(
            "exponent tensor is not anti-Hermitian (violation {violation:e})"
        )));
    }
    let pairs = tensor.pair_index();
    let four_eps = T::lit(4.0) * epsilon;
    let mut amps = state.amplitudes().to_vec();
    let support = state.sector().basis();
    for (a, b) in tensor.generator_pairs() {
        if !tensor.conserves_spin(a, b) {
            return Err(CqeError::Contract(format!(
                "generator {:?} -> {:?} changes S_z",
                pairs.pair(b),
                pairs.pair(a)
            )));
        }
        let term = GeneratorTerm {
            create: a,
            annihilate: b,
            theta: tensor.at(a, b) * four_eps,
        };
        rotate_pair(&mut amps, support, pairs, term, tensor.encoding());
    }
    Ok(FockState::from_parts(state.sector().clone(), amps))
}

/// Exact inverse of [`apply_tensor_exponential`]: the generators in reverse
/// order with negated angles.
pub fn apply_tensor_exponential_adjoint<T: Real>(
    state: &FockState<T>,
    tensor: &TwoBodyTensor<T>,
    epsilon: T,
) -> Result<FockState<T>> {
    let pairs = tensor.pair_index();
    let four_eps = T::lit(-4.0) * epsilon;
    let mut amps = state.amplitudes().to_vec();
    let gens: Vec<_> = tensor.generator_pairs().collect();
    for &(a, b) in gens.iter().rev() {
        let term = GeneratorTerm {
            create: a,
            annihilate: b,
            theta: tensor.at(a, b) * four_eps,
        };
        rotate_pair(&mut amps, state.sector().basis(), pairs, term, tensor.encoding());
    }
    Ok(FockState::from_parts(state.sector().clone(), amps))
}

/// `e^{ε Â}|state⟩` for one ansatz layer.
pub fn apply_two_body_exponential<T: Real>(
    state: &FockState<T>,
    layer: &AnsatzLayer<T>,
) -> Result<FockState<T>> {
    apply_tensor_exponential(state, &layer.tensor, layer.epsilon)
}
