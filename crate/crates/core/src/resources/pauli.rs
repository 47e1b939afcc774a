use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::fock::Encoding;

/// Pauli string in symplectic form: qubit `q` carries `X` when only bit `q`
/// of `x` is set, `Z` when only bit `q` of `z` is set and `Y` when both are.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    pub x: u64,
    pub z: u64,
}

impl PauliString {
    pub const IDENTITY: PauliString = PauliString { x: 0, z: 0 };

    pub fn support(self) -> u64 {
        self.x | self.z
    }

    pub fn weight(self) -> u32 {
        self.support().count_ones()
    }

    /// Qubit-wise commutation: on every shared qubit both act with the same
    /// single-qubit Pauli.
    #[inline]
    pub fn qubit_wise_commutes(self, other: PauliString) -> bool {
        ((self.x ^ other.x) | (self.z ^ other.z)) & self.support() & other.support() == 0
    }

    /// Full commutation (even number of anticommuting positions).
    pub fn commutes(self, other: PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0
    }

    pub fn label(self, n_qubits: usize) -> String {
        (0..n_qubits)
            .map(|q| match ((self.x >> q) & 1, (self.z >> q) & 1) {
                (0, 0) => 'I',
                (1, 0) => 'X',
                (0, 1) => 'Z',
                _ => 'Y',
            })
            .collect()
    }
}

/// Pauli-basis expansion with complex coefficients.
pub type PauliSum = BTreeMap<PauliString, Complex64>;

type Mat2 = [[Complex64; 2]; 2];

const fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

// occupation basis: index 0 empty, index 1 occupied; m[row][col]
const IDENT: Mat2 = [[c(1.0), c(0.0)], [c(0.0), c(1.0)]];
const RAISE: Mat2 = [[c(0.0), c(0.0)], [c(1.0), c(0.0)]];
const LOWER: Mat2 = [[c(0.0), c(1.0)], [c(0.0), c(0.0)]];
const PARITY: Mat2 = [[c(1.0), c(0.0)], [c(0.0), c(-1.0)]];

fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut m = [[c(0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    m
}

/// `M = a I + b X + c Y + d Z`, returned as `[(x, z, coeff)]`.
fn decompose(m: &Mat2) -> [(u64, u64, Complex64); 4] {
    let i = Complex64::new(0.0, 1.0);
    [
        (0, 0, (m[0][0] + m[1][1]) * 0.5),
        (1, 0, (m[0][1] + m[1][0]) * 0.5),
        (1, 1, (m[0][1] - m[1][0]) * i * 0.5),
        (0, 1, (m[0][0] - m[1][1]) * 0.5),
    ]
}

/// Pauli expansion of a product of ladder operators written left to right,
/// `(creation?, orbital)`. Fermionic operators carry Jordan-Wigner `Z` strings
/// on lower qubits.
pub fn expand_ladder_product(factors: &[(bool, usize)], n_qubits: usize, encoding: Encoding) -> PauliSum {
    let mut per_qubit: Vec<Mat2> = vec![IDENT; n_qubits];
    for &(create, p) in factors {
        if encoding == Encoding::Fermion {
            for m in per_qubit.iter_mut().take(p) {
                *m = mul(m, &PARITY);
            }
        }
        per_qubit[p] = mul(&per_qubit[p], if create { &RAISE } else { &LOWER });
    }
    let mut terms: Vec<(PauliString, Complex64)> = vec![(PauliString::IDENTITY, c(1.0))];
    for (q, m) in per_qubit.iter().enumerate() {
        let parts: Vec<(u64, u64, Complex64)> = decompose(m)
            .into_iter()
            .filter(|p| p.2.norm() > 1e-15)
            .collect();
        if parts.is_empty() {
            return PauliSum::new();
        }
        let mut next = Vec::with_capacity(terms.len() * parts.len());
        for (s, v) in &terms {
            for &(x, z, w) in &parts {
                next.push((
                    PauliString {
                        x: s.x | (x << q),
                        z: s.z | (z << q),
                    },
                    v * w,
                ));
            }
        }
        terms = next;
    }
    let mut out = PauliSum::new();
    for (s, v) in terms {
        *out.entry(s).or_insert(c(0.0)) += v;
    }
    out
}

/// `a†_i a†_j a_l a_k` as a left-to-right factor list.
pub fn double_excitation(i: usize, j: usize, k: usize, l: usize) -> [(bool, usize); 4] {
    [(true, i), (true, j), (false, l), (false, k)]
}

/// `θ Γ - θ* Γ†` for `Γ = a†_i a†_j a_l a_k`; for the diagonal `(i,j) = (k,l)`
/// only `θ Γ`.
pub fn generator_strings(
    (i, j, k, l): (usize, usize, usize, usize),
    theta: Complex64,
    n_qubits: usize,
    encoding: Encoding,
) -> PauliSum {
    let fwd = expand_ladder_product(&double_excitation(i, j, k, l), n_qubits, encoding);
    let mut out = PauliSum::new();
    for (s, v) in fwd {
        *out.entry(s).or_insert(c(0.0)) += v * theta;
    }
    if (i, j) != (k, l) {
        let back = expand_ladder_product(&double_excitation(k, l, i, j), n_qubits, encoding);
        for (s, v) in back {
            *out.entry(s).or_insert(c(0.0)) -= v * theta.conj();
        }
    }
    out.retain(|_, v| v.norm() > 1e-12);
    out
}
