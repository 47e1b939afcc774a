use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{CqeError, Result};
use crate::fock::{FockState, Sector};
use crate::scalar::{creal, Real};

use super::reduced::ReducedHamiltonian;

/// Largest sector the FCI oracle will diagonalize.
pub const MAX_SECTOR_DIM: usize = 100_000;
const DENSE_LIMIT: usize = 1500;
const RESIDUAL_TOL: f64 = 1e-9;

/// Real symmetric sector Hamiltonian in compressed sparse column form.
#[derive(Debug, Clone)]
pub struct SectorMatrix {
    pub sector: Arc<Sector>,
    col_ptr: Vec<usize>,
    rows: Vec<usize>,
    values: Vec<f64>,
    diag: Vec<f64>,
}

impl SectorMatrix {
    pub fn build<T: Real>(ham: &ReducedHamiltonian<T>, sector: Arc<Sector>) -> Result<Self> {
        if sector.dim() > MAX_SECTOR_DIM {
            return Err(CqeError::Capability(format!(
                "sector dimension {} exceeds {MAX_SECTOR_DIM}",
                sector.dim()
            )));
        }
        let mut position = vec![usize::MAX; 1 << sector.n_qubits()];
        for (c, &x) in sector.basis().iter().enumerate() {
            position[x] = c;
        }
        let core = ham.core_energy.as_f64();
        let dim = sector.dim();
        let mut col_ptr = Vec::with_capacity(dim + 1);
        let mut rows = Vec::new();
        let mut values = Vec::new();
        let mut diag = vec![core; dim];
        let mut column: Vec<(usize, f64)> = Vec::new();
        let mut complex = false;
        col_ptr.push(0);
        for (c, &x) in sector.basis().iter().enumerate() {
            column.clear();
            column.push((c, core));
            ham.for_each_column_entry(x, |y, v| {
                if v.im.as_f64().abs() > 1e-14 {
                    complex = true;
                }
                column.push((position[y], v.re.as_f64()));
            });
            column.sort_by_key(|e| e.0);
            let mut last = usize::MAX;
            for &(row, v) in &column {
                if row == last {
                    *values.last_mut().unwrap() += v;
                } else {
                    rows.push(row);
                    values.push(v);
                    last = row;
                }
                if row == c {
                    diag[c] = *values.last().unwrap();
                }
            }
            col_ptr.push(rows.len());
        }
        if complex {
            return Err(CqeError::Unsupported(
                "exact diagonalization requires a real Hamiltonian".into(),
            ));
        }
        Ok(SectorMatrix {
            sector,
            col_ptr,
            rows,
            values,
            diag,
        })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// `y = H x` (the matrix is symmetric, so columns serve as rows).
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (c, yc) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for e in self.col_ptr[c]..self.col_ptr[c + 1] {
                acc += self.values[e] * x[self.rows[e]];
            }
            *yc = acc;
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for c in 0..n {
            for e in self.col_ptr[c]..self.col_ptr[c + 1] {
                m[(self.rows[e], c)] = self.values[e];
            }
        }
        m
    }

    fn residual(&self, e: f64, v: &[f64]) -> f64 {
        let mut hv = vec![0.0; v.len()];
        self.matvec(v, &mut hv);
        hv.iter()
            .zip(v)
            .map(|(a, b)| (a - e * b).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(s: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

/// Lowest `k` eigenpairs by dense diagonalization.
fn dense_lowest(m: &SectorMatrix, k: usize) -> Vec<(f64, Vec<f64>)> {
    let eig = SymmetricEigen::new(m.to_dense());
    let mut order: Vec<usize> = (0..m.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    order
        .into_iter()
        .take(k)
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors.column(i).iter().copied().collect()))
        .collect()
}

/// Lowest `k` eigenpairs by Davidson iteration with a diagonal preconditioner.
fn davidson_lowest(m: &SectorMatrix, k: usize) -> Result<Vec<(f64, Vec<f64>)>> {
    let n = m.dim();
    let block = (k + 2).min(n);
    let max_space = (4 * block + 20).min(n);
    let diag = m.diagonal();

    let mut guesses: Vec<usize> = (0..n).collect();
    guesses.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]));
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut images: Vec<Vec<f64>> = Vec::new();
    let push = |v: Vec<f64>, basis: &mut Vec<Vec<f64>>, images: &mut Vec<Vec<f64>>| -> bool {
        let mut v = v;
        let n0 = dot(&v, &v).sqrt();
        if n0 == 0.0 {
            return false;
        }
        v.iter_mut().for_each(|x| *x /= n0);
        for _ in 0..2 {
            for b in basis.iter() {
                let c = dot(b, &v);
                axpy(-c, b, &mut v);
            }
        }
        let nv = dot(&v, &v).sqrt();
        if nv < 1e-6 {
            return false;
        }
        v.iter_mut().for_each(|x| *x /= nv);
        let mut hv = vec![0.0; n];
        m.matvec(&v, &mut hv);
        basis.push(v);
        images.push(hv);
        true
    };
    for &g in guesses.iter().take(block) {
        let mut v = vec![0.0; n];
        v[g] = 1.0;
        // small deterministic admixture breaks exact symmetry traps
        for (x, vx) in v.iter_mut().enumerate() {
            *vx += 1e-3 / (1.0 + ((x * 7919 + g) % 101) as f64);
        }
        push(v, &mut basis, &mut images);
    }

    for _ in 0..1000 {
        let d = basis.len();
        let mut g = DMatrix::zeros(d, d);
        for a in 0..d {
            for b in a..d {
                let v = dot(&basis[a], &images[b]);
                g[(a, b)] = v;
                g[(b, a)] = v;
            }
        }
        let eig = SymmetricEigen::new(g);
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

        let mut ritz = Vec::new();
        let mut corrections = Vec::new();
        for &col in order.iter().take(block) {
            let theta = eig.eigenvalues[col];
            let y = eig.eigenvectors.column(col);
            let mut x = vec![0.0; n];
            let mut hx = vec![0.0; n];
            for a in 0..d {
                axpy(y[a], &basis[a], &mut x);
                axpy(y[a], &images[a], &mut hx);
            }
            let r: Vec<f64> = hx.iter().zip(&x).map(|(h, v)| h - theta * v).collect();
            let rn = dot(&r, &r).sqrt();
            if ritz.len() < k && rn > 1e-11 {
                let t: Vec<f64> = r
                    .iter()
                    .zip(diag)
                    .map(|(ri, di)| {
                        let den = theta - di;
                        ri / if den.abs() < 1e-8 { 1e-8f64.copysign(den) } else { den }
                    })
                    .collect();
                corrections.push(t);
            }
            ritz.push((theta, x, rn));
        }
        if corrections.is_empty() {
            return Ok(ritz.into_iter().take(k).map(|(e, v, _)| (e, v)).collect());
        }
        if basis.len() + corrections.len() > max_space {
            basis.clear();
            images.clear();
            for (_, x, _) in &ritz {
                push(x.clone(), &mut basis, &mut images);
            }
        }
        let mut added = false;
        for t in corrections {
            added |= push(t, &mut basis, &mut images);
        }
        if !added {
            // stalled: restart from the Ritz vectors plus fresh residual directions
            let tol_hit = ritz.iter().take(k).all(|r| r.2 < 1e-10);
            if tol_hit {
                return Ok(ritz.into_iter().take(k).map(|(e, v, _)| (e, v)).collect());
            }
            return Err(CqeError::Eigensolver("Davidson subspace collapsed".into()));
        }
    }
    Err(CqeError::Eigensolver("Davidson did not converge".into()))
}

/// Lowest `k` eigenpairs of `Ĥ` in the `(N, 2S_z)` sector, ascending.
pub fn fci_eigenpairs<T: Real>(
    ham: &ReducedHamiltonian<T>,
    n: usize,
    sz_twice: i32,
    k: usize,
) -> Result<Vec<(T, FockState<T>)>> {
    let sector = Arc::new(Sector::new(ham.n_qubits(), n, sz_twice)?);
    if sector.dim() == 0 {
        return Err(CqeError::Argument(format!(
            "empty sector N={n}, 2Sz={sz_twice}"
        )));
    }
    let m = SectorMatrix::build(ham, sector.clone())?;
    let k = k.min(m.dim());
    let pairs = if m.dim() <= DENSE_LIMIT {
        dense_lowest(&m, k)
    } else {
        davidson_lowest(&m, k)?
    };
    let mut out = Vec::with_capacity(k);
    for (e, mut v) in pairs {
        let norm = dot(&v, &v).sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        // fix the sign so the largest component is positive
        let pivot = v
            .iter()
            .copied()
            .fold(0.0f64, |best, x| if x.abs() > best.abs() + 1e-12 { x } else { best });
        if pivot < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        let res = m.residual(e, &v);
        if res > RESIDUAL_TOL {
            return Err(CqeError::Eigensolver(format!(
                "eigenpair residual {res:e} exceeds {RESIDUAL_TOL:e}"
            )));
        }
        let mut amps = vec![creal(T::zero()); 1 << ham.n_qubits()];
        for (c, &x) in sector.basis().iter().enumerate() {
            amps[x] = creal(T::lit(v[c]));
        }
        out.push((T::lit(e), FockState::in_sector(sector.clone(), amps)?));
    }
    Ok(out)
}

/// Lowest eigenpair of `Ĥ` in the `(N, 2S_z)` sector.
pub fn fci_ground_state<T: Real>(
    ham: &ReducedHamiltonian<T>,
    n: usize,
    sz_twice: i32,
) -> Result<(T, FockState<T>)> {
    fci_eigenpairs(ham, n, sz_twice, 1).map(|mut v| v.remove(0))
}
