#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use cqesim::fock::{Encoding, FockState, Sector};
use cqesim::hamiltonian::{build_reduced_hamiltonian, parse_fcidump, IntegralSet, ReducedHamiltonian};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fcidump_path(name: &str) -> PathBuf {
    fixtures_dir().join(name).join("FCIDUMP")
}

pub struct Fixture {
    pub name: String,
    pub ints: IntegralSet<f64>,
    pub ham: ReducedHamiltonian<f64>,
    pub hf: FockState<f64>,
    pub hf_energy: f64,
    pub fci_energy: Option<f64>,
}

/// Integrals only, for systems too large for a statevector.
pub fn integrals(name: &str) -> IntegralSet<f64> {
    let text = std::fs::read_to_string(fcidump_path(name)).expect("fixture FCIDUMP");
    parse_fcidump(&text).expect("parse fixture")
}

pub fn fixture(name: &str) -> Fixture {
    let ints = integrals(name);
    let js: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(fixtures_dir().join(name).join("reference.json")).expect("reference.json"),
    )
    .expect("reference json");
    let ham = build_reduced_hamiltonian(&ints).expect("reduced hamiltonian");
    let hf = FockState::hartree_fock(ints.n_spatial, ints.n_alpha(), ints.n_beta()).expect("hf");
    Fixture {
        name: name.to_string(),
        hf_energy: js["hf_energy"].as_f64().expect("hf_energy"),
        fci_energy: js["fci_energy"].as_f64(),
        ints,
        ham,
        hf,
    }
}

/// Random normalized state in the `(N, 2Sz)` sector.
pub fn random_state(rng: &mut StdRng, n_qubits: usize, n: usize, sz_twice: i32, complex: bool) -> FockState<f64> {
    let sector = Sector::new(n_qubits, n, sz_twice).unwrap();
    let mut amps = vec![c(0.0, 0.0); 1 << n_qubits];
    for &x in sector.basis() {
        let im = if complex { rng.gen_range(-1.0..1.0) } else { 0.0 };
        amps[x] = c(rng.gen_range(-1.0..1.0), im);
    }
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    FockState::from_amplitudes(n_qubits, amps, n, sz_twice).unwrap()
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Signed partial permutation: column `x` maps to `(row, value)`.
#[derive(Clone)]
pub struct SparseOp {
    pub map: Vec<Option<(usize, Complex64)>>,
}

impl SparseOp {
    fn from_dense(m: &DMatrix<Complex64>) -> Self {
        let map = (0..m.ncols())
            .map(|col| {
                let hits: Vec<usize> = (0..m.nrows()).filter(|&r| m[(r, col)].norm() > 0.0).collect();
                assert!(hits.len() <= 1, "ladder products are partial permutations");
                hits.first().map(|&r| (r, m[(r, col)]))
            })
            .collect();
        SparseOp { map }
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![c(0.0, 0.0); v.len()];
        for (x, e) in self.map.iter().enumerate() {
            if let Some((y, s)) = e {
                out[*y] += s * v[x];
            }
        }
        out
    }
}

/// Ladder operators built as explicit Kronecker products of 2×2 matrices.
/// Qubit `p` is bit `p` of the basis index; fermionic operators carry `Z` on
/// every lower qubit.
pub struct DenseOracle {
    pub n: usize,
    pub encoding: Encoding,
    pub create: Vec<SparseOp>,
    pub annihilate: Vec<SparseOp>,
}

fn two(a: [[f64; 2]; 2]) -> DMatrix<Complex64> {
    DMatrix::from_fn(2, 2, |r, col| c(a[r][col], 0.0))
}

impl DenseOracle {
    pub fn new(n: usize, encoding: Encoding) -> Self {
        let id = two([[1.0, 0.0], [0.0, 1.0]]);
        let z = two([[1.0, 0.0], [0.0, -1.0]]);
        let raise = two([[0.0, 0.0], [1.0, 0.0]]);
        let lower = two([[0.0, 1.0], [0.0, 0.0]]);
        let ladder = |p: usize, local: &DMatrix<Complex64>| {
            // kron(M_{n-1}, …, M_0)
            let mut m = DMatrix::from_element(1, 1, c(1.0, 0.0));
            for q in (0..n).rev() {
                let f = if q == p {
                    local
                } else if q < p && encoding == Encoding::Fermion {
                    &z
                } else {
                    &id
                };
                m = m.kronecker(f);
            }
            SparseOp::from_dense(&m)
        };
        DenseOracle {
            n,
            encoding,
            create: (0..n).map(|p| ladder(p, &raise)).collect(),
            annihilate: (0..n).map(|p| ladder(p, &lower)).collect(),
        }
    }

    /// Applies the word right to left: `ops[0] ops[1] … |v⟩`.
    pub fn word(&self, ops: &[(bool, usize)], v: &[Complex64]) -> Vec<Complex64> {
        let mut out = v.to_vec();
        for &(dag, p) in ops.iter().rev() {
            out = if dag { &self.create[p] } else { &self.annihilate[p] }.apply(&out);
        }
        out
    }

    /// `a†_i a†_j a_l a_k |v⟩`.
    pub fn double(&self, i: usize, j: usize, k: usize, l: usize, v: &[Complex64]) -> Vec<Complex64> {
        self.word(&[(true, i), (true, j), (false, l), (false, k)], v)
    }

    /// `Ĥ|v⟩` straight from the integrals in second quantization.
    pub fn hamiltonian(&self, ints: &IntegralSet<f64>, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut out: Vec<Complex64> = v.iter().map(|a| a * ints.core_energy).collect();
        let add = |out: &mut Vec<Complex64>, w: Vec<Complex64>, s: f64| {
            for (o, x) in out.iter_mut().zip(w) {
                *o += x * s;
            }
        };
        for p in 0..n {
            for q in 0..n {
                if p % 2 != q % 2 {
                    continue;
                }
                let h = ints.h(p / 2, q / 2);
                if h != 0.0 {
                    add(&mut out, self.word(&[(true, p), (false, q)], v), h);
                }
            }
        }
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        if p % 2 != q % 2 || r % 2 != s % 2 {
                            continue;
                        }
                        let g = ints.g(p / 2, q / 2, r / 2, s / 2);
                        if g != 0.0 {
                            let w = self.word(&[(true, p), (true, r), (false, s), (false, q)], v);
                            add(&mut out, w, 0.5 * g);
                        }
                    }
                }
            }
        }
        out
    }
}

pub fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Canonical quadruples `(i<j, k<l)` for `n` spin orbitals.
pub fn canonical_quadruples(n: usize) -> Vec<(usize, usize, usize, usize)> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut out = Vec::new();
    for &(i, j) in &pairs {
        for &(k, l) in &pairs {
            out.push((i, j, k, l));
        }
    }
    out
}
