use std::sync::Arc;

use crate::error::{arg_err, Result};
use crate::scalar::{czero, Cplx, Real};

use super::{excite, jw_sign, spin_of, Encoding, FockState, PairIndex, Sector, TwoBodyTensor};

/// Normal-ordered product `a†_{c0} a†_{c1} ⋯ a_{a0} a_{a1} ⋯`, applied right
/// to left.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Excitation {
    pub creators: Vec<usize>,
    pub annihilators: Vec<usize>,
}

impl Excitation {
    pub fn new(creators: Vec<usize>, annihilators: Vec<usize>) -> Self {
        Excitation {
            creators,
            annihilators,
        }
    }

    /// `a†_i a†_j a_l a_k`.
    pub fn double(i: usize, j: usize, k: usize, l: usize) -> Self {
        Excitation::new(vec![i, j], vec![l, k])
    }

    /// `n_p = a†_p a_p`.
    pub fn number(p: usize) -> Self {
        Excitation::new(vec![p], vec![p])
    }

    /// Hermitian conjugate.
    pub fn adjoint(&self) -> Self {
        Excitation::new(
            self.annihilators.iter().rev().copied().collect(),
            self.creators.iter().rev().copied().collect(),
        )
    }

    fn max_index(&self) -> Option<usize> {
        self.creators.iter().chain(&self.annihilators).copied().max()
    }

    /// Image of basis state `x` and its sign, or `None` if it vanishes.
    pub fn act(&self, x: usize, encoding: Encoding) -> Option<(usize, i32)> {
        let mut x = x;
        let mut sign = 1;
        for &p in self.annihilators.iter().rev() {
            if x & (1 << p) == 0 {
                return None;
            }
            if encoding == Encoding::Fermion {
                sign *= jw_sign(x, p);
            }
            x ^= 1 << p;
        }
        for &p in self.creators.iter().rev() {
            if x & (1 << p) != 0 {
                return None;
            }
            if encoding == Encoding::Fermion {
                sign *= jw_sign(x, p);
            }
            x |= 1 << p;
        }
        Some((x, sign))
    }
}

/// Weighted sum of excitation strings sharing one encoding.
#[derive(Debug, Clone)]
pub struct Operator<T: Real> {
    pub n_qubits: usize,
    pub encoding: Encoding,
    pub terms: Vec<(Cplx<T>, Excitation)>,
}

impl<T: Real> Operator<T> {
    pub fn new(n_qubits: usize, encoding: Encoding) -> Self {
        Operator {
            n_qubits,
            encoding,
            terms: Vec::new(),
        }
    }

    pub fn push(&mut self, coeff: Cplx<T>, term: Excitation) -> Result<()> {
        if let Some(m) = term.max_index() {
            if m >= self.n_qubits {
                return arg_err(format!("orbital {m} out of range for {} qubits", self.n_qubits));
            }
        }
        self.terms.push((coeff, term));
        Ok(())
    }

    /// Total number operator `Σ_p n_p`.
    pub fn number(n_qubits: usize) -> Self {
        let mut op = Operator::new(n_qubits, Encoding::Fermion);
        for p in 0..n_qubits {
            op.terms.push((Cplx::new(T::one(), T::zero()), Excitation::number(p)));
        }
        op
    }

    /// Applies the operator to an amplitude vector, visiting only `support`.
    pub fn apply_on(&self, amplitudes: &[Cplx<T>], support: &[usize]) -> Vec<Cplx<T>> {
        let mut out = vec![czero(); amplitudes.len()];
        for &x in support {
            let ax = amplitudes[x];
            if ax.re == T::zero() && ax.im == T::zero() {
                continue;
            }
            for (c, term) in &self.terms {
                if let Some((y, s)) = term.act(x, self.encoding) {
                    out[y] += c * ax * T::lit(s as f64);
                }
            }
        }
        out
    }

    pub fn apply(&self, state: &FockState<T>) -> Vec<Cplx<T>> {
        self.apply_on(state.amplitudes(), state.sector().basis())
    }
}

/// `⟨state|O|state⟩`.
pub fn expectation<T: Real>(state: &FockState<T>, op: &Operator<T>) -> Result<Cplx<T>> {
    if op.n_qubits != state.n_qubits() {
        return arg_err(format!(
            "operator on {} qubits applied to a {}-qubit state",
            op.n_qubits,
            state.n_qubits()
        ));
    }
    let image = op.apply(state);
    Ok(state
        .amplitudes()
        .iter()
        .zip(&image)
        .fold(czero(), |acc, (a, b)| acc + a.conj() * b))
}

/// Applies `a†_i a†_j a_l a_k` (fermion) or `σ†_i σ†_j σ_l σ_k` (qubit
/// particle) and returns the unnormalized image.
pub fn apply_excitation<T: Real>(
    state: &FockState<T>,
    i: usize,
    j: usize,
    k: usize,
    l: usize,
    encoding: Encoding,
) -> Result<FockState<T>> {
    let n = state.n_qubits();
    if i >= n || j >= n || k >= n || l >= n {
        return arg_err(format!("index ({i},{j};{k},{l}) out of range for {n} qubits"));
    }
    if i == j || k == l {
        return arg_err(format!("repeated index in excitation ({i},{j};{k},{l})"));
    }
    let sz = state.sz_twice() + spin_of(i) + spin_of(j) - spin_of(k) - spin_of(l);
    let sector = if sz == state.sz_twice() {
        state.sector().clone()
    } else {
        Arc::new(Sector::new(n, state.particle_number(), sz)?)
    };
    let mut out = vec![czero(); 1 << n];
    for &x in state.sector().basis() {
        if let Some((y, s)) = excite(x, i, j, k, l, encoding) {
            out[y] = state.amplitude(x) * T::lit(s as f64);
        }
    }
    Ok(FockState::from_parts(sector, out))
}

fn occupied(x: usize, n: usize) -> Vec<usize> {
    (0..n).filter(|&p| x & (1 << p) != 0).collect()
}

fn empty(x: usize, n: usize) -> Vec<usize> {
    (0..n).filter(|&p| x & (1 << p) == 0).collect()
}

/// Calls `f(a, b, y, sign)` for every canonical `(a = pair(i,j), b = pair(k,l))`
/// with `a†_i a†_j a_l a_k |x⟩ = sign |y⟩ ≠ 0`.
fn for_each_double<F>(pairs: &PairIndex, x: usize, encoding: Encoding, mut f: F)
where
    F: FnMut(usize, usize, usize, i32),
{
    let n = pairs.n();
    let occ = occupied(x, n);
    for (ki, &k) in occ.iter().enumerate() {
        for &l in &occ[ki + 1..] {
            let xr = x ^ (1 << k) ^ (1 << l);
            let holes = empty(xr, n);
            let b = pairs.index(k, l);
            for (ii, &i) in holes.iter().enumerate() {
                for &j in &holes[ii + 1..] {
                    if let Some((y, s)) = excite(x, i, j, k, l, encoding) {
                        f(pairs.index(i, j), b, y, s);
                    }
                }
            }
        }
    }
}

/// Transition tensor `M^{ij;kl} = ⟨bra|a†_i a†_j a_l a_k|ket⟩` over canonical
/// pairs, summing only over basis states in `ket_support`.
pub fn transition_tensor<T: Real>(
    bra: &[Cplx<T>],
    ket: &[Cplx<T>],
    ket_support: &[usize],
    n_qubits: usize,
    encoding: Encoding,
) -> TwoBodyTensor<T> {
    let mut out = TwoBodyTensor::zeros(n_qubits, encoding);
    let pairs = out.pair_index().clone();
    let p = pairs.len();
    let data = out.data_mut();
    for &x in ket_support {
        let kx = ket[x];
        if kx.re == T::zero() && kx.im == T::zero() {
            continue;
        }
        for_each_double(&pairs, x, encoding, |a, b, y, s| {
            let v = bra[y].conj() * kx;
            if s > 0 {
                data[a * p + b] += v;
            } else {
                data[a * p + b] -= v;
            }
        });
    }
    out
}

/// Splits the qubit-particle transition tensor by Jordan-Wigner parity:
/// returns `(even, odd)` where `even` sums contributions whose fermionic sign
/// is `+1` and `odd` those whose sign is `-1` (both unsigned).
///
/// The fermionic tensor is `even - odd`; the qubit-particle tensor is
/// `even + odd`.
pub fn transition_tensor_split<T: Real>(
    bra: &[Cplx<T>],
    ket: &[Cplx<T>],
    ket_support: &[usize],
    n_qubits: usize,
) -> (TwoBodyTensor<T>, TwoBodyTensor<T>) {
    let mut even = TwoBodyTensor::zeros(n_qubits, Encoding::QubitParticle);
    let mut odd = TwoBodyTensor::zeros(n_qubits, Encoding::QubitParticle);
    let pairs = even.pair_index().clone();
    let p = pairs.len();
    for &x in ket_support {
        let kx = ket[x];
        let occ = occupied(x, n_qubits);
        for (ki, &k) in occ.iter().enumerate() {
            for &l in &occ[ki + 1..] {
                let xr = x ^ (1 << k) ^ (1 << l);
                // parity string crossed by the annihilations, then the creations
                let base = jw_sign(x, k) * jw_sign(x ^ (1 << k), l);
                let holes = empty(xr, n_qubits);
                for (ii, &i) in holes.iter().enumerate() {
                    for &j in &holes[ii + 1..] {
                        let s = base * jw_sign(xr, j) * jw_sign(xr | (1 << j), i);
                        let y = xr | (1 << i) | (1 << j);
                        let v = bra[y].conj() * kx;
                        let idx = pairs.index(i, j) * p + pairs.index(k, l);
                        if s > 0 {
                            even.data_mut()[idx] += v;
                        } else {
                            odd.data_mut()[idx] += v;
                        }
                    }
                }
            }
        }
    }
    (even, odd)
}
