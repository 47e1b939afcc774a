use crate::error::{arg_err, Result};
use crate::scalar::Real;

/// Molecular integrals over `r` spatial orbitals in chemist notation.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralSet<T: Real> {
    pub n_spatial: usize,
    pub n_electrons: usize,
    pub ms2: i32,
    pub core_energy: T,
    /// Row-major `r × r`.
    pub h1: Vec<T>,
    /// Row-major `r⁴`, element `(ij|kl)` at `((i·r + j)·r + k)·r + l`.
    pub eri: Vec<T>,
    /// Parsed but unused point-group labels.
    pub orbsym: Vec<usize>,
}

impl<T: Real> IntegralSet<T> {
    pub fn zeros(n_spatial: usize, n_electrons: usize, ms2: i32) -> Self {
        IntegralSet {
            n_spatial,
            n_electrons,
            ms2,
            core_energy: T::zero(),
            h1: vec![T::zero(); n_spatial * n_spatial],
            eri: vec![T::zero(); n_spatial.pow(4)],
            orbsym: Vec::new(),
        }
    }

    #[inline]
    pub fn h(&self, p: usize, q: usize) -> T {
        self.h1[p * self.n_spatial + q]
    }

    #[inline]
    pub fn g(&self, i: usize, j: usize, k: usize, l: usize) -> T {
        let r = self.n_spatial;
        self.eri[((i * r + j) * r + k) * r + l]
    }

    pub fn set_h(&mut self, p: usize, q: usize, v: T) {
        let r = self.n_spatial;
        self.h1[p * r + q] = v;
        self.h1[q * r + p] = v;
    }

    /// Sets `(ij|kl)` and its seven permutation images.
    pub fn set_g(&mut self, i: usize, j: usize, k: usize, l: usize, v: T) {
        for (a, b, c, d) in eri_images(i, j, k, l) {
            let r = self.n_spatial;
            self.eri[((a * r + b) * r + c) * r + d] = v;
        }
    }

    pub fn n_alpha(&self) -> usize {
        ((self.n_electrons as i32 + self.ms2) / 2) as usize
    }

    pub fn n_beta(&self) -> usize {
        ((self.n_electrons as i32 - self.ms2) / 2) as usize
    }

    /// Checks the symmetry invariants of `h1` and `eri`.
    pub fn validate(&self) -> Result<()> {
        let r = self.n_spatial;
        let tol = T::lit(1e-12);
        if (self.n_electrons as i32 + self.ms2) % 2 != 0 || self.ms2.unsigned_abs() as usize > self.n_electrons {
            return arg_err(format!(
                "NELEC={} incompatible with MS2={}",
                self.n_electrons, self.ms2
            ));
        }
        if self.n_alpha() > r || self.n_beta() > r {
            return arg_err("more electrons of one spin than orbitals");
        }
        for p in 0..r {
            for q in 0..r {
                if (self.h(p, q) - self.h(q, p)).abs() > tol {
                    return arg_err(format!("h1 not symmetric at ({p},{q})"));
                }
            }
        }
        for i in 0..r {
            for j in 0..r {
                for k in 0..r {
                    for l in 0..r {
                        let v = self.g(i, j, k, l);
                        for (a, b, c, d) in eri_images(i, j, k, l) {
                            if (self.g(a, b, c, d) - v).abs() > tol {
                                return arg_err(format!(
                                    "eri lacks permutation symmetry at ({i}{j}|{k}{l})"
                                ));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Integrals in the relabeled basis where new orbital `p` is old `perm[p]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let r = self.n_spatial;
        let mut out = Self::zeros(r, self.n_electrons, self.ms2);
        out.core_energy = self.core_energy;
        for p in 0..r {
            for q in 0..r {
                out.h1[p * r + q] = self.h(perm[p], perm[q]);
            }
        }
        for i in 0..r {
            for j in 0..r {
                for k in 0..r {
                    for l in 0..r {
                        out.eri[((i * r + j) * r + k) * r + l] =
                            self.g(perm[i], perm[j], perm[k], perm[l]);
                    }
                }
            }
        }
        out
    }
}

/// The eight index permutations that leave a real `(ij|kl)` invariant.
pub fn eri_images(
    i: usize,
    j: usize,
    k: usize,
    l: usize,
) -> [(usize, usize, usize, usize); 8] {
    [
        (i, j, k, l),
        (j, i, k, l),
        (i, j, l, k),
        (j, i, l, k),
        (k, l, i, j),
        (l, k, i, j),
        (k, l, j, i),
        (l, k, j, i),
    ]
}
