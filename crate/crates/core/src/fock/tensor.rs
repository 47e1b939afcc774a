use crate::error::{arg_err, Result};
use crate::scalar::{czero, Cplx, Real};

use super::{spin_of, Encoding};

/// Bijection between ordered pairs `i < j` of spin orbitals and `0..len()`,
/// in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairIndex {
    n: usize,
    pairs: Vec<(usize, usize)>,
}

impl PairIndex {
    pub fn new(n: usize) -> Self {
        let pairs = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        PairIndex { n, pairs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Index of the pair `(i, j)` with `i < j`.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n);
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }

    #[inline]
    pub fn pair(&self, idx: usize) -> (usize, usize) {
        self.pairs[idx]
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// `2·S_z` carried by the pair.
    pub fn pair_spin(&self, idx: usize) -> i32 {
        let (i, j) = self.pairs[idx];
        spin_of(i) + spin_of(j)
    }
}

/// Two-body coefficient tensor `T^{ij;kl}` stored over canonical index pairs
/// `i < j`, `k < l` as a dense `P × P` matrix (`P = n(n-1)/2`).
///
/// The element `(i,j;k,l)` multiplies the operator `a†_i a†_j a_l a_k`
/// (or `σ†_i σ†_j σ_l σ_k`). Values at non-canonical positions follow from
/// antisymmetry for fermions and symmetry for qubit particles, so the full
/// sum over all index orderings equals four times the canonical sum.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoBodyTensor<T: Real> {
    pairs: PairIndex,
    encoding: Encoding,
    data: Vec<Cplx<T>>,
}

impl<T: Real> TwoBodyTensor<T> {
    pub fn zeros(n_spin: usize, encoding: Encoding) -> Self {
        let pairs = PairIndex::new(n_spin);
        let p = pairs.len();
        TwoBodyTensor {
            pairs,
            encoding,
            data: vec![czero(); p * p],
        }
    }

    pub fn n_spin(&self) -> usize {
        self.pairs.n
    }

    pub fn n_pairs(&self) -> usize {
        self.pairs.len()
    }

    pub fn pair_index(&self) -> &PairIndex {
        &self.pairs
    }

    pub fn encoding(&self) -> Encoding {
        self.encoding
    }

    pub fn with_encoding(mut self, encoding: Encoding) -> Self {
        self.encoding = encoding;
        self
    }

    /// Raw canonical storage, row-major over `(pair(i,j), pair(k,l))`.
    pub fn data(&self) -> &[Cplx<T>] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Cplx<T>] {
        &mut self.data
    }

    #[inline]
    pub fn at(&self, a: usize, b: usize) -> Cplx<T> {
        self.data[a * self.pairs.len() + b]
    }

    #[inline]
    pub fn at_mut(&mut self, a: usize, b: usize) -> &mut Cplx<T> {
        let p = self.pairs.len();
        &mut self.data[a * p + b]
    }

    fn canonical(&self, i: usize, j: usize) -> Option<(usize, i32)> {
        if i == j {
            return None;
        }
        let sign = match self.encoding {
            Encoding::Fermion if i > j => -1,
            _ => 1,
        };
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        Some((self.pairs.index(lo, hi), sign))
    }

    /// Full-tensor element `T^{ij;kl}` for any index order.
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> Cplx<T> {
        match (self.canonical(i, j), self.canonical(k, l)) {
            (Some((a, s1)), Some((b, s2))) => self.at(a, b) * T::lit((s1 * s2) as f64),
            _ => czero(),
        }
    }

    /// Sets the canonical element implied by `(i,j;k,l)`, applying the
    /// encoding's index-exchange sign.
    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, value: Cplx<T>) -> Result<()> {
        let n = self.n_spin();
        if i >= n || j >= n || k >= n || l >= n {
            return arg_err(format!("index ({i},{j};{k},{l}) out of range for {n} orbitals"));
        }
        match (self.canonical(i, j), self.canonical(k, l)) {
            (Some((a, s1)), Some((b, s2))) => {
                *self.at_mut(a, b) = value * T::lit((s1 * s2) as f64);
                Ok(())
            }
            _ => arg_err(format!("repeated index in pair ({i},{j};{k},{l})")),
        }
    }

    pub fn max_anti_hermitian_violation(&self) -> T {
        let p = self.pairs.len();
        let mut worst = T::zero();
        for a in 0..p {
            for b in a..p {
                worst = worst.max((self.at(a, b) + self.at(b, a).conj()).norm());
            }
        }
        worst
    }

    pub fn max_hermitian_violation(&self) -> T {
        let p = self.pairs.len();
        let mut worst = T::zero();
        for a in 0..p {
            for b in a..p {
                worst = worst.max((self.at(a, b) - self.at(b, a).conj()).norm());
            }
        }
        worst
    }

    pub fn is_anti_hermitian(&self, tol: T) -> bool {
        self.max_anti_hermitian_violation() <= tol
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.max_hermitian_violation() <= tol
    }

    /// Largest element modulus over stored elements.
    pub fn norm_inf(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.norm()))
    }

    /// Frobenius norm over stored elements.
    pub fn norm_fro(&self) -> T {
        self.data.iter().map(|v| v.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().filter(|v| v.re != T::zero() || v.im != T::zero()).count()
    }

    /// Number of distinct exponential generators: unordered pairs `{a, b}`
    /// with a nonzero element on either side (the diagonal counts once).
    pub fn generator_count(&self) -> usize {
        self.generator_pairs().count()
    }

    /// Unordered canonical pairs `(a, b)` with `a <= b` whose element is nonzero,
    /// in ascending order.
    pub fn generator_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let p = self.pairs.len();
        (0..p).flat_map(move |a| (a..p).map(move |b| (a, b))).filter(move |&(a, b)| {
            let z = |v: Cplx<T>| v.re == T::zero() && v.im == T::zero();
            !(z(self.at(a, b)) && z(self.at(b, a)))
        })
    }

    pub fn scaled(&self, s: T) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v = v.scale(s));
        out
    }

    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v = v.conj());
        out
    }

    /// `self += s · other`.
    pub fn axpy(&mut self, s: T, other: &Self) {
        debug_assert_eq!(self.data.len(), other.data.len());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b.scale(s);
        }
    }

    /// `self - other`.
    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(-T::one(), other);
        out
    }

    /// Real inner product `Re Σ conj(self)·other` over stored elements.
    pub fn real_dot(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }

    /// Largest element-wise deviation from `other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (a, b)| m.max((a - b).norm()))
    }

    /// `true` when `(a, b)` conserves `S_z`.
    pub fn conserves_spin(&self, a: usize, b: usize) -> bool {
        self.pairs.pair_spin(a) == self.pairs.pair_spin(b)
    }

    /// Iterates `(i, j, k, l, value)` over nonzero canonical elements.
    pub fn iter_nonzero(&self) -> impl Iterator<Item = (usize, usize, usize, usize, Cplx<T>)> + '_ {
        let p = self.pairs.len();
        self.data.iter().enumerate().filter_map(move |(idx, v)| {
            if v.re == T::zero() && v.im == T::zero() {
                return None;
            }
            let (i, j) = self.pairs.pair(idx / p);
            let (k, l) = self.pairs.pair(idx % p);
            Some((i, j, k, l, *v))
        })
    }
}
