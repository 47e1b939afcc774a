//! Two-fermion reduced density matrix `²D^{pq;st} = ⟨ψ|a†_p a†_q a_t a_s|ψ⟩`.

use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;

use crate::error::{arg_err, CqeError, Result};
use crate::fock::{sz_twice_of, transition_tensor, Encoding, FockState, PairIndex, TwoBodyTensor};
use crate::hamiltonian::{IntegralSet, ReducedHamiltonian};
use crate::scalar::{czero, Cplx, Real};

/// Fermionic 2-RDM over canonical pairs `p < q`, `s < t`.
#[derive(Debug, Clone)]
pub struct Rdm2<T: Real> {
    pub tensor: TwoBodyTensor<T>,
    pub n_particles: usize,
    /// `Σ_{pq} ²D^{pq;pq}`, equal to `N(N-1)`.
    pub trace: T,
}

/// Invariant diagnostics; see [`Rdm2::check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdmCheck {
    pub hermiticity: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
}

impl RdmCheck {
    pub fn is_psd(&self) -> bool {
        self.min_eigenvalue >= -1e-9
    }

    pub fn passes(&self) -> bool {
        self.hermiticity <= 1e-10 && self.trace_error <= 1e-9 && self.is_psd()
    }
}

/// 2-RDM of a normalized fixed-`N` state (always fermionic).
pub fn compute_rdm2<T: Real>(state: &FockState<T>) -> Result<Rdm2<T>> {
    if !state.is_normalized() {
        return Err(CqeError::Contract(format!(
            "2-RDM needs a normalized state (norm {})",
            state.norm()
        )));
    }
    let amps = state.amplitudes();
    let n = state.n_qubits();
    let tensor = transition_tensor(amps, amps, state.sector().basis(), n, Encoding::Fermion);
    Ok(Rdm2::from_tensor(tensor, state.particle_number()))
}

/// 2-RDM of a raw amplitude vector, rejecting states that mix particle
/// numbers or spin projections.
pub fn compute_rdm2_from_amplitudes<T: Real>(n_qubits: usize, amplitudes: &[Cplx<T>]) -> Result<Rdm2<T>> {
    if amplitudes.len() != 1usize << n_qubits {
        return arg_err(format!("{} amplitudes for {n_qubits} qubits", amplitudes.len()));
    }
    let tol = T::lit(1e-12);
    let mut sector: Option<(usize, i32)> = None;
    for (x, a) in amplitudes.iter().enumerate() {
        if a.norm() <= tol {
            continue;
        }
        let key = (x.count_ones() as usize, sz_twice_of(x, n_qubits));
        match sector {
            None => sector = Some(key),
            Some(s) if s != key => {
                return Err(CqeError::Contract(format!(
                    "state mixes sectors (N, 2Sz) = {s:?} and {key:?}"
                )))
            }
            _ => {}
        }
    }
    let (n, sz) = sector.ok_or_else(|| CqeError::Contract("zero state".into()))?;
    let state = FockState::from_amplitudes(n_qubits, amplitudes.to_vec(), n, sz)?;
    compute_rdm2(&state)
}

impl<T: Real> Rdm2<T> {
    pub fn from_tensor(tensor: TwoBodyTensor<T>, n_particles: usize) -> Self {
        let p = tensor.n_pairs();
        let trace = T::lit(2.0) * (0..p).map(|a| tensor.at(a, a).re).sum::<T>();
        Rdm2 {
            tensor,
            n_particles,
            trace,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.tensor.n_spin()
    }

    /// `²D^{pq;st}` for any index order.
    pub fn element(&self, p: usize, q: usize, s: usize, t: usize) -> Cplx<T> {
        self.tensor.get(p, q, s, t)
    }

    /// `¹D^p_s = Σ_q ²D^{pq;sq} / (N-1)`, row-major over spin orbitals.
    pub fn one_rdm(&self) -> Vec<Cplx<T>> {
        let n = self.n_qubits();
        let denom = T::lit(self.n_particles.saturating_sub(1).max(1) as f64);
        let mut out = vec![czero(); n * n];
        for p in 0..n {
            for s in 0..n {
                let mut acc = czero();
                for q in 0..n {
                    acc += self.element(p, q, s, q);
                }
                out[p * n + s] = acc / denom;
            }
        }
        out
    }

    /// `E_core + Σ_{pqst} K^{pq;st} ²D^{pq;st}`.
    pub fn energy(&self, ham: &ReducedHamiltonian<T>) -> T {
        let k = ham.k2.data();
        let d = self.tensor.data();
        let s: T = k.iter().zip(d).map(|(a, b)| (a * b).re).sum();
        ham.core_energy + T::lit(4.0) * s
    }

    /// Energy from the integrals directly:
    /// `E_core + Σ h_ps ¹D^p_s + ½ Σ (ps|qt) ²D^{pq;st}` over spin orbitals.
    pub fn energy_from_integrals(&self, ints: &IntegralSet<T>) -> T {
        let n = self.n_qubits();
        let d1 = self.one_rdm();
        let mut e = ints.core_energy;
        for p in 0..n {
            for s in (p % 2..n).step_by(2) {
                e += ints.h(p / 2, s / 2) * d1[p * n + s].re;
            }
        }
        let half = T::lit(0.5);
        for p in 0..n {
            for q in 0..n {
                if p == q {
                    continue;
                }
                for s in (p % 2..n).step_by(2) {
                    for t in (q % 2..n).step_by(2) {
                        if s == t {
                            continue;
                        }
                        let g = ints.g(p / 2, s / 2, q / 2, t / 2);
                        if g != T::zero() {
                            e += half * g * self.element(p, q, s, t).re;
                        }
                    }
                }
            }
        }
        e
    }

    /// Smallest eigenvalue of `²D` as a matrix over canonical pairs.
    pub fn min_eigenvalue(&self) -> f64 {
        let p = self.tensor.n_pairs();
        let m = DMatrix::from_fn(p, p, |a, b| {
            let v = self.tensor.at(a, b);
            let w = self.tensor.at(b, a).conj();
            // Hermitian part, so the solver sees an exactly Hermitian input
            Complex::new((v.re + w.re).as_f64() * 0.5, (v.im + w.im).as_f64() * 0.5)
        });
        SymmetricEigen::new(m)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Hermiticity, trace and positivity diagnostics (reported, not enforced).
    pub fn check(&self) -> RdmCheck {
        let n = self.n_particles as f64;
        RdmCheck {
            hermiticity: self.tensor.max_hermitian_violation().as_f64(),
            trace_error: (self.trace.as_f64() - n * (n - 1.0)).abs(),
            min_eigenvalue: self.min_eigenvalue(),
        }
    }

    /// Sparse text form: `RDM2 n_qubits N trace`, then one `i j k l re im`
    /// line per nonzero canonical element with `(i,j) <= (k,l)`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "RDM2 {} {} {:.17e}",
            self.n_qubits(),
            self.n_particles,
            self.trace.as_f64()
        );
        let p = self.tensor.n_pairs();
        let pairs = self.tensor.pair_index();
        for a in 0..p {
            for b in a..p {
                let v = self.tensor.at(a, b);
                if v.norm() == T::zero() {
                    continue;
                }
                let (i, j) = pairs.pair(a);
                let (k, l) = pairs.pair(b);
                let _ = writeln!(
                    out,
                    "{i} {j} {k} {l} {:.17e} {:.17e}",
                    v.re.as_f64(),
                    v.im.as_f64()
                );
            }
        }
        out
    }

    /// Parses [`Rdm2::to_text`] output, restoring Hermitian images.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let perr = |line: usize, m: &str| CqeError::Parse {
            line,
            message: m.to_string(),
        };
        let (_, head) = lines.next().ok_or_else(|| perr(1, "empty input"))?;
        let f: Vec<&str> = head.split_whitespace().collect();
        if f.len() != 4 || f[0] != "RDM2" {
            return Err(perr(1, "expected 'RDM2 n_qubits N trace'"));
        }
        let nq: usize = f[1].parse().map_err(|_| perr(1, "bad n_qubits"))?;
        let np: usize = f[2].parse().map_err(|_| perr(1, "bad particle number"))?;
        let mut tensor = TwoBodyTensor::zeros(nq, Encoding::Fermion);
        let pairs = PairIndex::new(nq);
        for (idx, line) in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.is_empty() {
                continue;
            }
            let ln = idx + 1;
            if f.len() != 6 {
                return Err(perr(ln, "expected 'i j k l re im'"));
            }
            let ix: Vec<usize> = f[..4]
                .iter()
                .map(|s| s.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| perr(ln, "bad index"))?;
            let re: f64 = f[4].parse().map_err(|_| perr(ln, "bad real part"))?;
            let im: f64 = f[5].parse().map_err(|_| perr(ln, "bad imaginary part"))?;
            if !(ix[0] < ix[1] && ix[2] < ix[3] && ix[3] < nq) {
                return Err(perr(ln, "non-canonical index"));
            }
            let a = pairs.index(ix[0], ix[1]);
            let b = pairs.index(ix[2], ix[3]);
            let v = Complex::new(T::lit(re), T::lit(im));
            *tensor.at_mut(a, b) = v;
            *tensor.at_mut(b, a) = v.conj();
        }
        Ok(Rdm2::from_tensor(tensor, np))
    }
}

/// Number of independent 2-RDM elements: canonical quadruples `i<j`, `k<l`,
/// `(i,j) <= (k,l)` whose pairs carry equal `S_z`.
pub fn count_rdm2_elements(n_qubits: usize, n: usize, sz_twice: i32) -> Result<usize> {
    if n > n_qubits {
        return arg_err(format!("{n} particles in {n_qubits} spin orbitals"));
    }
    if (n as i32 + sz_twice) % 2 != 0 || sz_twice.unsigned_abs() as usize > n {
        return arg_err(format!("2Sz={sz_twice} incompatible with N={n}"));
    }
    let pairs = PairIndex::new(n_qubits);
    let mut by_spin = [0usize; 3];
    for a in 0..pairs.len() {
        by_spin[(pairs.pair_spin(a) + 2) as usize / 2] += 1;
    }
    Ok(by_spin.iter().map(|&m| m * (m + 1) / 2).sum())
}
