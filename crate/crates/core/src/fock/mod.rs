//! Dense statevector representation of fermionic (Jordan-Wigner encoded)
//! and qubit-particle (hard-core boson) states and operators.
//!
//! Spin orbitals are interleaved: spin orbital `2p` is the alpha spin of
//! spatial orbital `p` and `2p + 1` its beta spin. Qubit `q` holds the
//! occupation of spin orbital `q`, stored as bit `q` of the basis index.
//!
//! The Jordan-Wigner convention is `a†_p = (∏_{q<p} Z_q) σ†_p`, so applying
//! `a_p` or `a†_p` to a basis state picks up `(-1)^(occupied orbitals below p)`.

mod exp;
mod ops;
mod state;
mod tensor;

pub use exp::{apply_tensor_exponential, apply_tensor_exponential_adjoint, apply_two_body_exponential, rotate_pair, GeneratorTerm};
pub use ops::{
    apply_excitation, expectation, transition_tensor, transition_tensor_split, Excitation,
    Operator,
};
pub use state::{FockState, Sector, MAX_QUBITS};
pub use tensor::{PairIndex, TwoBodyTensor};

use serde::{Deserialize, Serialize};

/// Statistics carried by the two-body excitation operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    /// Jordan-Wigner encoded fermion operators `a†_i a†_j a_l a_k`.
    Fermion,
    /// Qubit-particle operators `σ†_i σ†_j σ_l σ_k` (no parity strings).
    #[serde(rename = "qubit")]
    QubitParticle,
}

impl Encoding {
    pub fn label(self) -> &'static str {
        match self {
            Encoding::Fermion => "fermion",
            Encoding::QubitParticle => "qubit",
        }
    }
}

impl std::str::FromStr for Encoding {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fermion" => Ok(Encoding::Fermion),
            "qubit" => Ok(Encoding::QubitParticle),
            other => Err(format!("unknown encoding '{other}' (expected fermion|qubit)")),
        }
    }
}

/// `2·s_z` contribution of spin orbital `p`: +1 for alpha, -1 for beta.
#[inline]
pub fn spin_of(p: usize) -> i32 {
    if p % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Mask of all alpha spin orbitals among the first `n_qubits`.
#[inline]
pub fn alpha_mask(n_qubits: usize) -> u64 {
    let all = if n_qubits >= 64 { u64::MAX } else { (1u64 << n_qubits) - 1 };
    all & 0x5555_5555_5555_5555
}

/// `2·S_z` of a basis state.
#[inline]
pub fn sz_twice_of(x: usize, n_qubits: usize) -> i32 {
    let x = x as u64;
    let a = alpha_mask(n_qubits);
    (x & a).count_ones() as i32 - (x & !a).count_ones() as i32
}

/// Jordan-Wigner parity sign for acting on orbital `p` of basis state `x`.
#[inline]
pub(crate) fn jw_sign(x: usize, p: usize) -> i32 {
    if (x & ((1usize << p) - 1)).count_ones() % 2 == 1 {
        -1
    } else {
        1
    }
}

/// Applies `a†_i a†_j a_l a_k` (or its qubit-particle analogue) to basis state
/// `x`. Returns the image basis state and its sign, or `None` when the image
/// vanishes. Requires `i != j` and `k != l`.
#[inline]
pub(crate) fn excite(
    x: usize,
    i: usize,
    j: usize,
    k: usize,
    l: usize,
    encoding: Encoding,
) -> Option<(usize, i32)> {
    let (bi, bj, bk, bl) = (1usize << i, 1usize << j, 1usize << k, 1usize << l);
    if x & bk == 0 || x & bl == 0 {
        return None;
    }
    let fermion = encoding == Encoding::Fermion;
    let mut sign = 1;
    if fermion {
        sign *= jw_sign(x, k);
    }
    let x1 = x ^ bk;
    if fermion {
        sign *= jw_sign(x1, l);
    }
    let x2 = x1 ^ bl;
    if x2 & bj != 0 {
        return None;
    }
    if fermion {
        sign *= jw_sign(x2, j);
    }
    let x3 = x2 | bj;
    if x3 & bi != 0 {
        return None;
    }
    if fermion {
        sign *= jw_sign(x3, i);
    }
    Some((x3 | bi, sign))
}
