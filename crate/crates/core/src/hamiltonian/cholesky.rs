use crate::error::{arg_err, CqeError, Result};
use crate::scalar::Real;

/// Diagonal residual below which the integral matrix is declared indefinite.
const PSD_TOLERANCE: f64 = -1e-10;

/// Low-rank factorization `(ij|kl) ≈ Σ_P L^P_ij L^P_kl` of a two-electron
/// tensor viewed as an `r² × r²` matrix over composite indices `(ij)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactorization<T: Real> {
    pub n_spatial: usize,
    /// Each vector is a row-major `r × r` matrix.
    pub vectors: Vec<Vec<T>>,
    pub threshold: T,
    /// Composite indices chosen as pivots, in order.
    pub pivots: Vec<usize>,
}

impl<T: Real> CholeskyFactorization<T> {
    pub fn order(&self) -> usize {
        self.vectors.len()
    }

    pub fn reconstruct(&self, i: usize, j: usize, k: usize, l: usize) -> T {
        let r = self.n_spatial;
        self.vectors
            .iter()
            .map(|v| v[i * r + j] * v[k * r + l])
            .sum()
    }

    /// Largest element-wise deviation from `eri`.
    pub fn max_reconstruction_error(&self, eri: &[T]) -> T {
        let m = self.n_spatial * self.n_spatial;
        let mut worst = T::zero();
        for a in 0..m {
            for b in 0..m {
                let approx: T = self.vectors.iter().map(|v| v[a] * v[b]).sum();
                worst = worst.max((approx - eri[a * m + b]).abs());
            }
        }
        worst
    }
}

/// Greedy pivoted Cholesky: repeatedly pivots on the largest remaining
/// diagonal element and stops once it falls below `threshold`.
pub fn pivoted_cholesky<T: Real>(
    eri: &[T],
    n_spatial: usize,
    threshold: T,
) -> Result<CholeskyFactorization<T>> {
    let m = n_spatial * n_spatial;
    if eri.len() != m * m {
        return arg_err(format!(
            "eri of length {} for {n_spatial} orbitals",
            eri.len()
        ));
    }
    if !(threshold > T::zero()) {
        return arg_err("Cholesky threshold must be positive");
    }
    let mut diag: Vec<T> = (0..m).map(|a| eri[a * m + a]).collect();
    let mut vectors: Vec<Vec<T>> = Vec::new();
    let mut pivots = Vec::new();
    while vectors.len() < m {
        if let Some(&bad) = diag.iter().find(|&&d| d < T::lit(PSD_TOLERANCE)) {
            return Err(CqeError::NotPsd(bad.as_f64()));
        }
        let (piv, dmax) = diag
            .iter()
            .copied()
            .enumerate()
            .fold((0, T::neg_infinity()), |best, (a, d)| if d > best.1 { (a, d) } else { best });
        if dmax < threshold {
            break;
        }
        let root = dmax.sqrt();
        let mut v: Vec<T> = (0..m).map(|a| eri[a * m + piv]).collect();
        for prev in &vectors {
            let w = prev[piv];
            for (x, p) in v.iter_mut().zip(prev) {
                *x -= *p * w;
            }
        }
        for x in v.iter_mut() {
            *x /= root;
        }
        for (d, x) in diag.iter_mut().zip(&v) {
            *d -= *x * *x;
        }
        diag[piv] = T::zero();
        vectors.push(v);
        pivots.push(piv);
    }
    Ok(CholeskyFactorization {
        n_spatial,
        vectors,
        threshold,
        pivots,
    })
}
