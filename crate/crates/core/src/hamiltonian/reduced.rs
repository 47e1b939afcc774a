use std::sync::{Arc, OnceLock};

use crate::error::{arg_err, CqeError, Result};
use crate::fock::{excite, jw_sign, spin_of, Encoding, FockState, TwoBodyTensor};
use crate::scalar::{czero, creal, Cplx, Real};

use super::cholesky::{pivoted_cholesky, CholeskyFactorization};
use super::integrals::IntegralSet;

/// Threshold used for the Hamiltonian's cached integral factorization.
pub const CHOLESKY_THRESHOLD: f64 = 1e-6;

/// `Ĥ = E_core + Σ_{pqst} K^{pq;st} a†_p a†_q a_t a_s` over spin orbitals.
///
/// `k2` holds the antisymmetrized coefficients with the one-body integrals
/// folded in as `h_ps δ_qt / (N-1)`, so the canonical sum carries a factor 4:
/// `Ĥ = E_core + 4 Σ_{p<q, s<t} K^{pq;st} a†_p a†_q a_t a_s`.
#[derive(Debug, Clone)]
pub struct ReducedHamiltonian<T: Real> {
    pub k2: TwoBodyTensor<T>,
    pub core_energy: T,
    pub n_electrons: usize,
    pub sz_twice: i32,
    integrals: Option<Arc<IntegralSet<T>>>,
    /// For each annihilation pair `b`, the creation pairs `a` with
    /// `4 K^{a;b} ≠ 0`.
    by_annihilation: Vec<Vec<(usize, Cplx<T>)>>,
    cholesky: OnceLock<CholeskyFactorization<T>>,
}

/// Folds one- and two-electron integrals into the reduced Hamiltonian.
pub fn build_reduced_hamiltonian<T: Real>(ints: &IntegralSet<T>) -> Result<ReducedHamiltonian<T>> {
    ints.validate()?;
    let n = ints.n_electrons;
    if n < 2 {
        return Err(CqeError::Unsupported(format!(
            "{n} electrons: the one-body term cannot be folded into a two-body operator"
        )));
    }
    let fold = T::one() / T::lit((n - 1) as f64);
    let half = T::lit(0.5);
    let quarter = T::lit(0.25);
    let ns = 2 * ints.n_spatial;
    let same = |a: usize, b: usize| a % 2 == b % 2;
    let k = |p: usize, q: usize, s: usize, t: usize| -> T {
        let mut v = T::zero();
        if same(p, s) && same(q, t) {
            v += half * ints.g(p / 2, s / 2, q / 2, t / 2);
        }
        if same(p, s) && q == t {
            v += ints.h(p / 2, s / 2) * fold;
        }
        v
    };
    let mut k2 = TwoBodyTensor::zeros(ns, Encoding::Fermion);
    let pairs = k2.pair_index().clone();
    for (a, &(p, q)) in pairs.pairs().iter().enumerate() {
        for (b, &(s, t)) in pairs.pairs().iter().enumerate() {
            if spin_of(p) + spin_of(q) != spin_of(s) + spin_of(t) {
                continue;
            }
            let v = quarter * (k(p, q, s, t) - k(q, p, s, t) - k(p, q, t, s) + k(q, p, t, s));
            *k2.at_mut(a, b) = creal(v);
        }
    }
    let mut ham = ReducedHamiltonian::from_tensor(k2, ints.core_energy, n, ints.ms2)?;
    ham.integrals = Some(Arc::new(ints.clone()));
    Ok(ham)
}

impl<T: Real> ReducedHamiltonian<T> {
    /// Wraps an explicit Hermitian `k2` tensor.
    pub fn from_tensor(
        k2: TwoBodyTensor<T>,
        core_energy: T,
        n_electrons: usize,
        sz_twice: i32,
    ) -> Result<Self> {
        if k2.encoding() != Encoding::Fermion {
            return arg_err("reduced Hamiltonian must use fermionic encoding");
        }
        let violation = k2.max_hermitian_violation();
        if violation > T::lit(1e-12) {
            return Err(CqeError::Contract(format!(
                "reduced Hamiltonian not Hermitian (violation {violation:e})"
            )));
        }
        let p = k2.n_pairs();
        let four = T::lit(4.0);
        let mut by_annihilation = vec![Vec::new(); p];
        for (b, list) in by_annihilation.iter_mut().enumerate() {
            for a in 0..p {
                let v = k2.at(a, b);
                if (v.re != T::zero() || v.im != T::zero()) && k2.conserves_spin(a, b) {
                    list.push((a, v * four));
                }
            }
        }
        Ok(ReducedHamiltonian {
            k2,
            core_energy,
            n_electrons,
            sz_twice,
            integrals: None,
            by_annihilation,
            cholesky: OnceLock::new(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.k2.n_spin()
    }

    pub fn n_spatial(&self) -> usize {
        self.k2.n_spin() / 2
    }

    /// Source integrals, when built from an [`IntegralSet`].
    pub fn integrals(&self) -> Option<&IntegralSet<T>> {
        self.integrals.as_deref()
    }

    /// Pivoted Cholesky factorization of the source integrals at the default
    /// threshold, computed on first use.
    pub fn cholesky(&self) -> Result<&CholeskyFactorization<T>> {
        if let Some(c) = self.cholesky.get() {
            return Ok(c);
        }
        let ints = self.integrals().ok_or_else(|| {
            CqeError::Unsupported("Cholesky factors need the source integrals".into())
        })?;
        let chol = pivoted_cholesky(&ints.eri, ints.n_spatial, T::lit(CHOLESKY_THRESHOLD))?;
        Ok(self.cholesky.get_or_init(|| chol))
    }

    /// `Σ 4|K|` over stored elements plus `|E_core|`: an upper bound on `‖Ĥ‖`.
    pub fn norm_bound(&self) -> T {
        self.core_energy.abs() + self.two_body_bound()
    }

    pub(crate) fn two_body_bound(&self) -> T {
        T::lit(4.0) * self.k2.data().iter().map(|v| v.norm()).sum::<T>()
    }

    /// `(Ĥ - E_core)|v⟩`, visiting only basis states in `support`.
    pub fn apply_two_body(&self, amplitudes: &[Cplx<T>], support: &[usize]) -> Vec<Cplx<T>> {
        let mut out = vec![czero(); amplitudes.len()];
        let pairs = self.k2.pair_index();
        let n = self.n_qubits();
        for &x in support {
            let ax = amplitudes[x];
            if ax.re == T::zero() && ax.im == T::zero() {
                continue;
            }
            for k in 0..n {
                if x & (1 << k) == 0 {
                    continue;
                }
                for l in k + 1..n {
                    if x & (1 << l) == 0 {
                        continue;
                    }
                    for &(a, c) in &self.by_annihilation[pairs.index(k, l)] {
                        let (i, j) = pairs.pair(a);
                        if let Some((y, s)) = excite(x, i, j, k, l, Encoding::Fermion) {
                            let v = c * ax;
                            if s > 0 {
                                out[y] += v;
                            } else {
                                out[y] -= v;
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// `Ĥ|v⟩` including the core energy.
    pub fn apply_on(&self, amplitudes: &[Cplx<T>], support: &[usize]) -> Vec<Cplx<T>> {
        let mut out = self.apply_two_body(amplitudes, support);
        for &x in support {
            out[x] += amplitudes[x] * self.core_energy;
        }
        out
    }

    pub fn apply(&self, state: &FockState<T>) -> Vec<Cplx<T>> {
        self.apply_on(state.amplitudes(), state.sector().basis())
    }

    /// `⟨ψ|Ĥ|ψ⟩ / ⟨ψ|ψ⟩`.
    pub fn energy(&self, state: &FockState<T>) -> T {
        let h = self.apply_two_body(state.amplitudes(), state.sector().basis());
        let num: T = state
            .sector()
            .basis()
            .iter()
            .map(|&x| (state.amplitude(x).conj() * h[x]).re)
            .sum();
        let den = state.norm().powi(2);
        self.core_energy + num / den
    }

    /// Calls `f(y, value)` for every nonzero `⟨y|Ĥ - E_core|x⟩`.
    pub(crate) fn for_each_column_entry<F: FnMut(usize, Cplx<T>)>(&self, x: usize, mut f: F) {
        let pairs = self.k2.pair_index();
        let n = self.n_qubits();
        for k in 0..n {
            if x & (1 << k) == 0 {
                continue;
            }
            for l in k + 1..n {
                if x & (1 << l) == 0 {
                    continue;
                }
                for &(a, c) in &self.by_annihilation[pairs.index(k, l)] {
                    let (i, j) = pairs.pair(a);
                    if let Some((y, s)) = excite(x, i, j, k, l, Encoding::Fermion) {
                        f(y, if s > 0 { c } else { -c });
                    }
                }
            }
        }
    }

    /// Generators of the Trotter product: unordered canonical pairs `a <= b`
    /// with nonzero `K`, sorted by descending `|K^{a;b}|` then by index.
    pub fn trotter_terms(&self) -> Vec<(usize, usize, Cplx<T>)> {
        let mut terms: Vec<(usize, usize, Cplx<T>)> = self
            .k2
            .generator_pairs()
            .filter(|&(a, b)| self.k2.conserves_spin(a, b))
            .map(|(a, b)| (a, b, self.k2.at(a, b)))
            .collect();
        terms.sort_by(|x, y| {
            y.2.norm()
                .partial_cmp(&x.2.norm())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then((x.0, x.1).cmp(&(y.0, y.1)))
        });
        terms
    }
}

/// `Σ_{pq} M_pq Σ_σ a†_{pσ} a_{qσ} |v⟩` for a real spatial matrix `M`
/// (row-major `r × r`).
pub(crate) fn apply_spin_summed_one_body<T: Real>(
    m: &[T],
    n_spatial: usize,
    amplitudes: &[Cplx<T>],
    support: &[usize],
) -> Vec<Cplx<T>> {
    let r = n_spatial;
    let mut out = vec![czero(); amplitudes.len()];
    for &x in support {
        let ax = amplitudes[x];
        if ax.re == T::zero() && ax.im == T::zero() {
            continue;
        }
        for sigma in 0..2 {
            for q in 0..r {
                let qs = 2 * q + sigma;
                if x & (1 << qs) == 0 {
                    continue;
                }
                let s1 = jw_sign(x, qs);
                let x1 = x ^ (1 << qs);
                for p in 0..r {
                    let v = m[p * r + q];
                    if v == T::zero() {
                        continue;
                    }
                    let ps = 2 * p + sigma;
                    if x1 & (1 << ps) != 0 {
                        continue;
                    }
                    let s = s1 * jw_sign(x1, ps);
                    out[x1 | (1 << ps)] += ax * (v * T::lit(s as f64));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_integrals_give_zero_tensor() {
        let mut ints = IntegralSet::<f64>::zeros(2, 2, 0);
        ints.core_energy = 0.25;
        let ham = build_reduced_hamiltonian(&ints).unwrap();
        assert_eq!(ham.k2.nnz(), 0);
        let s = FockState::hartree_fock(2, 1, 1).unwrap();
        assert_eq!(ham.energy(&s), 0.25);
    }

    #[test]
    fn single_electron_is_unsupported() {
        let ints = IntegralSet::<f64>::zeros(2, 1, 1);
        assert!(matches!(
            build_reduced_hamiltonian(&ints),
            Err(CqeError::Unsupported(_))
        ));
    }

    #[test]
    fn one_body_operator_counts_particles() {
        let r = 3;
        let mut id = vec![0.0; r * r];
        for p in 0..r {
            id[p * r + p] = 1.0;
        }
        let s = FockState::<f64>::hartree_fock(r, 2, 1).unwrap();
        let out = apply_spin_summed_one_body(&id, r, s.amplitudes(), s.sector().basis());
        let hf = 0b000111;
        assert_eq!(out[hf].re, 3.0);
    }
}
