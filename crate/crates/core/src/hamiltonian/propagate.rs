use serde::{Deserialize, Serialize};

use crate::error::{CqeError, Result};
use crate::fock::{rotate_pair, FockState, GeneratorTerm};
use crate::scalar::{Cplx, Real};

use super::reduced::{apply_spin_summed_one_body, ReducedHamiltonian};

/// How `e^{-iδĤ}` is realized for auxiliary states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PropagationMethod {
    /// Scaled Taylor series applied to the vector.
    Exact,
    /// One product of exact term exponentials in descending `|K|` order.
    TrotterFirstOrder,
    /// One auxiliary state per Cholesky factor of `Ĥ`.
    CholeskyFactored,
}

fn vnorm<T: Real>(v: &[Cplx<T>], support: &[usize]) -> T {
    support.iter().map(|&x| v[x].norm_sqr()).sum::<T>().sqrt()
}

/// `e^{-i t Ô}|v⟩` by a Taylor series over `ceil(|t|·bound / 0.5)` substeps,
/// where `bound ≥ ‖Ô‖`.
pub(crate) fn taylor_propagate<T, F>(
    mut v: Vec<Cplx<T>>,
    support: &[usize],
    t: T,
    bound: T,
    apply: F,
) -> Vec<Cplx<T>>
where
    T: Real,
    F: Fn(&[Cplx<T>]) -> Vec<Cplx<T>>,
{
    if t == T::zero() {
        return v;
    }
    let steps = (t.abs() * bound / T::lit(0.5)).ceil().as_f64().max(1.0) as usize;
    let h = t / T::lit(steps as f64);
    let minus_ih = Cplx::new(T::zero(), -h);
    let tiny = T::lit(1e-17);
    for _ in 0..steps {
        let mut term = v.clone();
        let mut acc = v;
        for k in 1..=80 {
            let mut next = apply(&term);
            let f = minus_ih / T::lit(k as f64);
            for &x in support {
                next[x] *= f;
                acc[x] += next[x];
            }
            term = next;
            if vnorm(&term, support) <= tiny * vnorm(&acc, support) {
                break;
            }
        }
        v = acc;
    }
    v
}

fn phase<T: Real>(amps: &mut [Cplx<T>], support: &[usize], angle: T) {
    let p = Cplx::new(angle.cos(), -angle.sin());
    for &x in support {
        amps[x] *= p;
    }
}

/// `e^{-iδĤ}|ψ⟩` to near machine precision.
pub fn evolve_exact<T: Real>(state: &FockState<T>, ham: &ReducedHamiltonian<T>, delta: T) -> FockState<T> {
    let support = state.sector().basis();
    let mut out = taylor_propagate(
        state.amplitudes().to_vec(),
        support,
        delta,
        ham.two_body_bound(),
        |v| ham.apply_two_body(v, support),
    );
    phase(&mut out, support, delta * ham.core_energy);
    FockState::from_parts(state.sector().clone(), out)
}

/// First-order Trotter product `∏ e^{-iδ(4K Γ + h.c.)}` in the Hamiltonian's
/// canonical term order, times the core-energy phase.
pub fn evolve_trotter<T: Real>(state: &FockState<T>, ham: &ReducedHamiltonian<T>, delta: T) -> FockState<T> {
    let support = state.sector().basis();
    let pairs = ham.k2.pair_index();
    let mut amps = state.amplitudes().to_vec();
    let scale = Cplx::new(T::zero(), T::lit(-4.0) * delta);
    for (a, b, k) in ham.trotter_terms() {
        let term = GeneratorTerm {
            create: a,
            annihilate: b,
            theta: k * scale,
        };
        rotate_pair(&mut amps, support, pairs, term, crate::fock::Encoding::Fermion);
    }
    phase(&mut amps, support, delta * ham.core_energy);
    FockState::from_parts(state.sector().clone(), amps)
}

/// Per-factor auxiliary states `e^{-iδF_p}|ψ⟩` for the factorization
/// `Ĥ - E_core = Σ_pq h'_pq E_pq + Σ_P ½ (Σ_pq L^P_pq E_pq)²` with
/// `h'_pq = h_pq - ½ Σ_r (pr|rq)`. The one-body factor comes first.
pub fn evolve_cholesky_factors<T: Real>(
    state: &FockState<T>,
    ham: &ReducedHamiltonian<T>,
    delta: T,
) -> Result<Vec<FockState<T>>> {
    let ints = ham.integrals().ok_or_else(|| {
        CqeError::Unsupported("Cholesky factorization needs the source integrals".into())
    })?;
    let chol = ham.cholesky()?;
    let r = ints.n_spatial;
    let support = state.sector().basis();
    let half = T::lit(0.5);
    let mut one_body = ints.h1.clone();
    for p in 0..r {
        for q in 0..r {
            let x: T = (0..r).map(|s| ints.g(p, s, s, q)).sum();
            one_body[p * r + q] -= half * x;
        }
    }
    let l1 = |m: &[T]| T::lit(2.0) * m.iter().map(|v| v.abs()).sum::<T>();
    let mut out = Vec::with_capacity(chol.order() + 1);
    let v = taylor_propagate(state.amplitudes().to_vec(), support, delta, l1(&one_body), |v| {
        apply_spin_summed_one_body(&one_body, r, v, support)
    });
    out.push(FockState::from_parts(state.sector().clone(), v));
    for l in &chol.vectors {
        let b = l1(l);
        let v = taylor_propagate(state.amplitudes().to_vec(), support, delta, half * b * b, |v| {
            let w = apply_spin_summed_one_body(l, r, v, support);
            let mut w2 = apply_spin_summed_one_body(l, r, &w, support);
            for &x in support {
                w2[x] *= half;
            }
            w2
        });
        out.push(FockState::from_parts(state.sector().clone(), v));
    }
    Ok(out)
}

/// Auxiliary state(s) `e^{-iδĤ}|ψ⟩`: one state for `Exact` and
/// `TrotterFirstOrder`, one per factor for `CholeskyFactored`.
pub fn evolve_auxiliary<T: Real>(
    state: &FockState<T>,
    ham: &ReducedHamiltonian<T>,
    delta: T,
    method: PropagationMethod,
) -> Result<Vec<FockState<T>>> {
    if ham.n_qubits() != state.n_qubits() {
        return Err(CqeError::Argument(format!(
            "Hamiltonian on {} qubits, state on {}",
            ham.n_qubits(),
            state.n_qubits()
        )));
    }
    match method {
        PropagationMethod::Exact => Ok(vec![evolve_exact(state, ham, delta)]),
        PropagationMethod::TrotterFirstOrder => Ok(vec![evolve_trotter(state, ham, delta)]),
        PropagationMethod::CholeskyFactored => evolve_cholesky_factors(state, ham, delta),
    }
}
