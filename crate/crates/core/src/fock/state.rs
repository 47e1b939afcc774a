use std::sync::Arc;

use crate::error::{arg_err, CqeError, Result};
use crate::scalar::{czero, Cplx, Real};

use super::sz_twice_of;

/// Largest register the dense simulator accepts.
pub const MAX_QUBITS: usize = 20;

/// Fixed particle-number / spin-projection sector with its basis states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sector {
    n_qubits: usize,
    particles: usize,
    sz_twice: i32,
    basis: Vec<usize>,
}

impl Sector {
    pub fn new(n_qubits: usize, particles: usize, sz_twice: i32) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(CqeError::Capability(format!(
                "{n_qubits} qubits exceeds the dense limit of {MAX_QUBITS}"
            )));
        }
        if particles > n_qubits {
            return arg_err(format!("{particles} particles in {n_qubits} spin orbitals"));
        }
        let basis = (0..1usize << n_qubits)
            .filter(|&x| {
                x.count_ones() as usize == particles && sz_twice_of(x, n_qubits) == sz_twice
            })
            .collect();
        Ok(Sector {
            n_qubits,
            particles,
            sz_twice,
            basis,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn sz_twice(&self) -> i32 {
        self.sz_twice
    }

    /// Basis states of the sector in ascending order.
    pub fn basis(&self) -> &[usize] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn contains(&self, x: usize) -> bool {
        x < (1usize << self.n_qubits)
            && x.count_ones() as usize == self.particles
            && sz_twice_of(x, self.n_qubits) == self.sz_twice
    }
}

/// Amplitude vector over all `2^n_qubits` occupation-number basis states whose
/// support lies in a single `(N, S_z)` sector.
///
/// States are values: every operation returns a new state.
#[derive(Debug, Clone)]
pub struct FockState<T: Real> {
    amplitudes: Vec<Cplx<T>>,
    sector: Arc<Sector>,
}

impl<T: Real> FockState<T> {
    /// Builds a state from a full amplitude vector, checking that every
    /// amplitude outside the sector vanishes.
    pub fn from_amplitudes(
        n_qubits: usize,
        amplitudes: Vec<Cplx<T>>,
        particles: usize,
        sz_twice: i32,
    ) -> Result<Self> {
        let sector = Arc::new(Sector::new(n_qubits, particles, sz_twice)?);
        Self::in_sector(sector, amplitudes)
    }

    pub fn in_sector(sector: Arc<Sector>, amplitudes: Vec<Cplx<T>>) -> Result<Self> {
        if amplitudes.len() != 1usize << sector.n_qubits {
            return arg_err(format!(
                "amplitude vector of length {} for {} qubits",
                amplitudes.len(),
                sector.n_qubits
            ));
        }
        let tol = T::lit(1e-12);
        if let Some(x) = amplitudes
            .iter()
            .enumerate()
            .find(|(x, a)| a.norm() > tol && !sector.contains(*x))
            .map(|(x, _)| x)
        {
            return Err(CqeError::Contract(format!(
                "amplitude on basis state {x:#b} outside sector (N={}, 2Sz={})",
                sector.particles, sector.sz_twice
            )));
        }
        Ok(FockState { amplitudes, sector })
    }

    /// Internal constructor for images that are in the sector by construction.
    pub(crate) fn from_parts(sector: Arc<Sector>, amplitudes: Vec<Cplx<T>>) -> Self {
        debug_assert_eq!(amplitudes.len(), 1usize << sector.n_qubits);
        FockState { amplitudes, sector }
    }

    /// Occupation-number basis state with the listed spin orbitals occupied.
    pub fn basis_state(n_qubits: usize, occupied: &[usize]) -> Result<Self> {
        let mut x = 0usize;
        for &p in occupied {
            if p >= n_qubits {
                return arg_err(format!("orbital {p} out of range for {n_qubits} qubits"));
            }
            if x & (1 << p) != 0 {
                return arg_err(format!("orbital {p} listed twice"));
            }
            x |= 1 << p;
        }
        Self::from_index(n_qubits, x)
    }

    pub fn from_index(n_qubits: usize, x: usize) -> Result<Self> {
        let sector = Arc::new(Sector::new(
            n_qubits,
            x.count_ones() as usize,
            sz_twice_of(x, n_qubits),
        )?);
        if x >= 1usize << n_qubits {
            return arg_err(format!("basis index {x} out of range"));
        }
        let mut amplitudes = vec![czero(); 1 << n_qubits];
        amplitudes[x] = Cplx::new(T::one(), T::zero());
        Ok(FockState { amplitudes, sector })
    }

    /// Aufbau determinant: the lowest `n_alpha` alpha and `n_beta` beta
    /// spatial orbitals occupied.
    pub fn hartree_fock(n_spatial: usize, n_alpha: usize, n_beta: usize) -> Result<Self> {
        if n_alpha > n_spatial || n_beta > n_spatial {
            return arg_err("more electrons of one spin than spatial orbitals");
        }
        let occ: Vec<usize> = (0..n_alpha)
            .map(|p| 2 * p)
            .chain((0..n_beta).map(|p| 2 * p + 1))
            .collect();
        Self::basis_state(2 * n_spatial, &occ)
    }

    pub fn n_qubits(&self) -> usize {
        self.sector.n_qubits
    }

    pub fn particle_number(&self) -> usize {
        self.sector.particles
    }

    pub fn sz_twice(&self) -> i32 {
        self.sector.sz_twice
    }

    pub fn sector(&self) -> &Arc<Sector> {
        &self.sector
    }

    pub fn amplitudes(&self) -> &[Cplx<T>] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Cplx<T>> {
        self.amplitudes
    }

    pub fn amplitude(&self, x: usize) -> Cplx<T> {
        self.amplitudes[x]
    }

    pub fn norm(&self) -> T {
        self.sector
            .basis
            .iter()
            .map(|&x| self.amplitudes[x].norm_sqr())
            .sum::<T>()
            .sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - T::one()).abs() < T::norm_tolerance()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n <= T::zero() {
            return Err(CqeError::Contract("cannot normalize the zero vector".into()));
        }
        let inv = T::one() / n;
        Ok(FockState {
            amplitudes: self.amplitudes.iter().map(|a| a.scale(inv)).collect(),
            sector: self.sector.clone(),
        })
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Cplx<T> {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .fold(czero(), |acc, (a, b)| acc + a.conj() * b)
    }

    /// Euclidean distance between amplitude vectors.
    pub fn distance(&self, other: &Self) -> T {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<T>()
            .sqrt()
    }

    /// Largest modulus of `⟨self|other⟩` deviation from a pure phase, i.e.
    /// `1 - |⟨self|other⟩|`.
    pub fn infidelity(&self, other: &Self) -> T {
        T::one() - self.inner(other).norm()
    }

    /// `true` when every amplitude has negligible imaginary part after removing
    /// the global phase.
    pub fn is_real_up_to_phase(&self, tol: T) -> bool {
        let pivot = self
            .amplitudes
            .iter()
            .copied()
            .max_by(|a, b| a.norm_sqr().partial_cmp(&b.norm_sqr()).unwrap())
            .unwrap_or_else(czero);
        if pivot.norm() == T::zero() {
            return true;
        }
        let phase = pivot.conj().unscale(pivot.norm());
        self.amplitudes.iter().all(|a| (a * phase).im.abs() <= tol)
    }
}
