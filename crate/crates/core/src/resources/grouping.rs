use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{arg_err, CqeError, Result};
use crate::fock::{Encoding, PairIndex};

use super::pauli::{double_excitation, expand_ladder_product, generator_strings, PauliString, PauliSum};

/// Largest register the 64-bit string representation is used for.
pub const MAX_GROUPING_QUBITS: usize = 32;

/// Which tensor is measured by tomography.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasurementTarget {
    /// Residual `A` of fermion-encoded (Jordan-Wigner) generators.
    EncodedA,
    /// Residual `A` of qubit-particle generators.
    UnencodedA,
    /// Fermion-encoded two-particle reduced density matrix.
    EncodedRdm2,
}

impl MeasurementTarget {
    pub fn label(self) -> &'static str {
        match self {
            MeasurementTarget::EncodedA => "encoded-A",
            MeasurementTarget::UnencodedA => "unencoded-A",
            MeasurementTarget::EncodedRdm2 => "encoded-D",
        }
    }

    fn encoding(self) -> Encoding {
        match self {
            MeasurementTarget::UnencodedA => Encoding::QubitParticle,
            _ => Encoding::Fermion,
        }
    }
}

impl std::str::FromStr for MeasurementTarget {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "encoded-A" | "encoded-a" => Ok(MeasurementTarget::EncodedA),
            "unencoded-A" | "unencoded-a" => Ok(MeasurementTarget::UnencodedA),
            "encoded-D" | "encoded-d" | "encoded-rdm2" => Ok(MeasurementTarget::EncodedRdm2),
            other => Err(format!("unknown measurement target '{other}'")),
        }
    }
}

/// Observable Pauli strings of a target and a grouping of them into sets
/// measurable in one single-qubit basis assignment.
#[derive(Debug, Clone)]
pub struct MeasurementGraph {
    pub n_qubits: usize,
    pub vertices: Vec<PauliString>,
    /// Group index of every vertex.
    pub coloring: Vec<usize>,
}

/// Summary of one grouping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupingReport {
    pub n_qubits: usize,
    pub target: MeasurementTarget,
    /// Distinct Pauli strings in the target's elements before projection.
    pub contributions: usize,
    /// Strings measured after symmetry projection.
    pub vertices: usize,
    pub groups: usize,
    pub vertices_per_group: f64,
    /// Size of a set of pairwise incompatible strings.
    pub clique_lower_bound: usize,
}

impl GroupingReport {
    pub fn header() -> &'static str {
        "qubits  target        contributions  vertices  groups  per_group  clique"
    }

    pub fn row(&self) -> String {
        format!(
            "{:>6}  {:<12}  {:>13}  {:>8}  {:>6}  {:>9.2}  {:>6}",
            self.n_qubits,
            self.target.label(),
            self.contributions,
            self.vertices,
            self.groups,
            self.vertices_per_group,
            self.clique_lower_bound
        )
    }
}

fn hermitian_sum(idx: (usize, usize, usize, usize), n: usize) -> PauliSum {
    let (i, j, k, l) = idx;
    let mut sum = expand_ladder_product(&double_excitation(i, j, k, l), n, Encoding::Fermion);
    if (i, j) != (k, l) {
        for (s, v) in expand_ladder_product(&double_excitation(k, l, i, j), n, Encoding::Fermion) {
            *sum.entry(s).or_insert(Complex64::new(0.0, 0.0)) += v;
        }
    }
    sum.retain(|_, v| v.norm() > 1e-12);
    sum
}

/// Pauli expansion of every `N`- and `S_z`-conserving element of the target:
/// `Γ - Γ†` for `a < b` (residuals) or `Γ + Γ†` for `a ≤ b` (2-RDM).
fn for_each_element<F: FnMut(PauliSum)>(n_qubits: usize, target: MeasurementTarget, mut f: F) {
    let pairs = PairIndex::new(n_qubits);
    let enc = target.encoding();
    let one = Complex64::new(1.0, 0.0);
    for a in 0..pairs.len() {
        let start = if target == MeasurementTarget::EncodedRdm2 { a } else { a + 1 };
        for b in start..pairs.len() {
            if pairs.pair_spin(a) != pairs.pair_spin(b) {
                continue;
            }
            let (i, j) = pairs.pair(a);
            let (k, l) = pairs.pair(b);
            f(match target {
                MeasurementTarget::EncodedRdm2 => hermitian_sum((i, j, k, l), n_qubits),
                _ => generator_strings((i, j, k, l), one, n_qubits, enc),
            });
        }
    }
}

/// Every distinct non-identity Pauli string appearing in the target's
/// elements, before symmetry projection.
pub fn target_strings(n_qubits: usize, target: MeasurementTarget) -> Result<Vec<PauliString>> {
    check_register(n_qubits)?;
    let mut set = BTreeSet::new();
    for_each_element(n_qubits, target, |sum| {
        set.extend(sum.into_keys().filter(|s| *s != PauliString::IDENTITY));
    });
    Ok(set.into_iter().collect())
}

/// Strings sharing an `X`/`Y` support and the `Z` factors outside it.
///
/// On a state with fixed numbers of alpha and beta particles only the
/// charge-neutral part of `⊗_{q∈S} P_q` survives, that is the products of
/// `σ⁺` on a raising set `R` and `σ⁻` on `S \ R` with as many raised as
/// lowered qubits of each spin. Pairing `R` with its complement, the
/// expectation of a string is `Σ_R 2 Re(c_R u_R)` over unknowns `u_R`, with
/// `c_R = ∏_{q∈S} (1 or ±i)` read off its pattern.
struct Family {
    support: u64,
    z_rest: u64,
    raising: Vec<u64>,
    targets: Vec<Vec<f64>>,
}

impl Family {
    fn new(support: u64, z_rest: u64) -> Option<Self> {
        let alpha = support & 0x5555_5555_5555_5555;
        let beta = support & !0x5555_5555_5555_5555;
        let (na, nb) = (alpha.count_ones(), beta.count_ones());
        if na % 2 != 0 || nb % 2 != 0 {
            return None;
        }
        let mut raising = Vec::new();
        let mut r = support;
        // every subset of the support
        loop {
            r = (r.wrapping_sub(1)) & support;
            if (r & alpha).count_ones() == na / 2 && (r & beta).count_ones() == nb / 2 && r < (support ^ r) {
                raising.push(r);
            }
            if r == 0 {
                break;
            }
        }
        raising.sort_unstable();
        Some(Family {
            support,
            z_rest,
            raising,
            targets: Vec::new(),
        })
    }

    /// Real coefficients of `⟨P⟩` over `(Re u_R, Im u_R)`.
    fn coefficients(&self, y_mask: u64) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.raising.len());
        for &r in &self.raising {
            let k = (y_mask & r).count_ones() as i64 - (y_mask & !r & self.support).count_ones() as i64;
            let c = match k.rem_euclid(4) {
                0 => Complex64::new(1.0, 0.0),
                1 => Complex64::new(0.0, 1.0),
                2 => Complex64::new(-1.0, 0.0),
                _ => Complex64::new(0.0, -1.0),
            };
            v.push(2.0 * c.re);
            v.push(-2.0 * c.im);
        }
        v
    }

    fn string(&self, y_mask: u64) -> PauliString {
        PauliString {
            x: self.support,
            z: y_mask | self.z_rest,
        }
    }

    /// Fewest strings, fewest `Y` first, whose expectations determine every
    /// target functional.
    fn select(&self) -> Vec<PauliString> {
        let mut targets = Span::default();
        for t in &self.targets {
            targets.insert(t);
        }
        if targets.dim() == 0 {
            return Vec::new();
        }
        let mut patterns: Vec<u64> = Vec::with_capacity(1 << self.support.count_ones());
        let mut y = self.support;
        loop {
            patterns.push(y);
            if y == 0 {
                break;
            }
            y = (y - 1) & self.support;
        }
        patterns.sort_by_key(|&m| (m.count_ones(), m));
        let mut chosen = Span::default();
        let mut out = Vec::new();
        for strict in [true, false] {
            for &m in &patterns {
                if self.targets.iter().all(|t| chosen.contains(t)) {
                    return out;
                }
                let v = self.coefficients(m);
                if (!strict || targets.contains(&v)) && chosen.insert(&v) {
                    out.push(self.string(m));
                }
            }
        }
        out
    }
}

/// Orthonormal basis of a small real subspace.
#[derive(Default)]
struct Span {
    basis: Vec<Vec<f64>>,
}

impl Span {
    const TOL: f64 = 1e-9;

    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn residual(&self, v: &[f64]) -> Vec<f64> {
        let mut r = v.to_vec();
        for b in &self.basis {
            let d: f64 = r.iter().zip(b).map(|(x, y)| x * y).sum();
            for (x, y) in r.iter_mut().zip(b) {
                *x -= d * y;
            }
        }
        r
    }

    fn contains(&self, v: &[f64]) -> bool {
        let scale = v.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1.0);
        self.residual(v).iter().all(|x| x.abs() <= Self::TOL * scale)
    }

    /// Adds `v`; `false` when it was already in the span.
    fn insert(&mut self, v: &[f64]) -> bool {
        let r = self.residual(v);
        let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= Self::TOL * v.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1.0) {
            return false;
        }
        self.basis.push(r.into_iter().map(|x| x / norm).collect());
        true
    }
}

/// Symmetry-projected measurement set: for every family of strings with a
/// common `X`/`Y` support, the fewest strings whose expectations on states of
/// fixed alpha and beta particle numbers determine every element of the
/// target. Pure `Z` strings are kept as they are.
pub fn projected_strings(n_qubits: usize, target: MeasurementTarget) -> Result<Vec<PauliString>> {
    check_register(n_qubits)?;
    let mut families: BTreeMap<(u64, u64), Option<Family>> = BTreeMap::new();
    let mut diagonal = BTreeSet::new();
    for_each_element(n_qubits, target, |sum| {
        let mut functionals: BTreeMap<(u64, u64), Vec<Complex64>> = BTreeMap::new();
        for (s, coeff) in sum {
            if s.x == 0 {
                if s != PauliString::IDENTITY {
                    diagonal.insert(s);
                }
                continue;
            }
            let key = (s.x, s.z & !s.x);
            let fam = families.entry(key).or_insert_with(|| Family::new(key.0, key.1));
            let Some(fam) = fam else { continue };
            let v = fam.coefficients(s.z & s.x);
            let f = functionals
                .entry(key)
                .or_insert_with(|| vec![Complex64::new(0.0, 0.0); v.len()]);
            for (a, b) in f.iter_mut().zip(v) {
                *a += coeff * b;
            }
        }
        for (key, f) in functionals {
            if let Some(Some(fam)) = families.get_mut(&key) {
                for part in [f.iter().map(|c| c.re).collect::<Vec<f64>>(), f.iter().map(|c| c.im).collect()] {
                    if part.iter().any(|x| x.abs() > 1e-12) {
                        fam.targets.push(part);
                    }
                }
            }
        }
    });
    let mut out: BTreeSet<PauliString> = diagonal;
    for fam in families.values().flatten() {
        out.extend(fam.select());
    }
    Ok(out.into_iter().collect())
}

fn check_register(n_qubits: usize) -> Result<()> {
    if n_qubits > MAX_GROUPING_QUBITS {
        return Err(CqeError::Capability(format!(
            "measurement grouping supports at most {MAX_GROUPING_QUBITS} qubits, got {n_qubits}"
        )));
    }
    if n_qubits == 0 || n_qubits % 2 != 0 {
        return arg_err(format!("n_qubits must be even and positive, got {n_qubits}"));
    }
    Ok(())
}

#[derive(Clone, Copy)]
struct Basis {
    x: u64,
    z: u64,
    support: u64,
}

impl Basis {
    #[inline]
    fn accepts(&self, s: PauliString) -> bool {
        ((self.x ^ s.x) | (self.z ^ s.z)) & self.support & s.support() == 0
    }

    fn absorb(&mut self, s: PauliString) {
        self.x |= s.x;
        self.z |= s.z;
        self.support |= s.support();
    }
}

impl MeasurementGraph {
    /// Uncolored graph over `vertices`.
    pub fn new(n_qubits: usize, vertices: Vec<PauliString>) -> Self {
        MeasurementGraph {
            n_qubits,
            coloring: vec![usize::MAX; vertices.len()],
            vertices,
        }
    }

    /// Number of vertices each vertex is incompatible with.
    pub fn conflict_degrees(&self) -> Vec<usize> {
        let v = &self.vertices;
        let mut deg = vec![0usize; v.len()];
        for a in 0..v.len() {
            let sa = v[a];
            let mut d = 0;
            let (_, rest) = deg.split_at_mut(a + 1);
            for (db, &sb) in rest.iter_mut().zip(&v[a + 1..]) {
                if !sa.qubit_wise_commutes(sb) {
                    d += 1;
                    *db += 1;
                }
            }
            deg[a] += d;
        }
        deg
    }

    /// Vertex visiting order: descending conflict degree, ties by string.
    fn order(&self, degrees: &[usize]) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.vertices.len()).collect();
        order.sort_by(|&a, &b| degrees[b].cmp(&degrees[a]).then(self.vertices[a].cmp(&self.vertices[b])));
        order
    }

    /// First-fit coloring in descending conflict degree; returns the number
    /// of groups.
    pub fn color_greedy(&mut self) -> usize {
        let degrees = self.conflict_degrees();
        self.color_in_order(&degrees)
    }

    fn color_in_order(&mut self, degrees: &[usize]) -> usize {
        let order = self.order(degrees);
        let mut groups: Vec<Basis> = Vec::new();
        for v in order {
            let s = self.vertices[v];
            let slot = groups.iter().position(|g| g.accepts(s));
            let g = match slot {
                Some(g) => g,
                None => {
                    groups.push(Basis { x: 0, z: 0, support: 0 });
                    groups.len() - 1
                }
            };
            groups[g].absorb(s);
            self.coloring[v] = g;
        }
        groups.len()
    }

    pub fn group_count(&self) -> usize {
        self.coloring.iter().filter(|&&c| c != usize::MAX).map(|c| c + 1).max().unwrap_or(0)
    }

    /// Members of every group.
    pub fn groups(&self) -> Vec<Vec<PauliString>> {
        let mut out = vec![Vec::new(); self.group_count()];
        for (v, &c) in self.coloring.iter().enumerate() {
            if c != usize::MAX {
                out[c].push(self.vertices[v]);
            }
        }
        out
    }

    /// Exhaustive pairwise check that every vertex is colored and every
    /// group is qubit-wise commuting.
    pub fn validate(&self) -> Result<()> {
        if self.coloring.iter().any(|&c| c == usize::MAX) {
            return Err(CqeError::Contract("uncolored vertex".into()));
        }
        for (g, members) in self.groups().iter().enumerate() {
            for (a, &sa) in members.iter().enumerate() {
                for &sb in &members[a + 1..] {
                    if !sa.qubit_wise_commutes(sb) {
                        return Err(CqeError::Contract(format!(
                            "group {g} holds {} and {}",
                            sa.label(self.n_qubits),
                            sb.label(self.n_qubits)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Greedy clique of pairwise incompatible strings, seeded by the highest
    /// conflict degree. Its size bounds the group count from below.
    pub fn clique_lower_bound(&self) -> usize {
        self.clique_in_order(&self.conflict_degrees())
    }

    fn clique_in_order(&self, degrees: &[usize]) -> usize {
        let mut clique: Vec<PauliString> = Vec::new();
        for v in self.order(degrees) {
            let s = self.vertices[v];
            if clique.iter().all(|c| !c.qubit_wise_commutes(s)) {
                clique.push(s);
            }
        }
        clique.len()
    }
}

/// Builds the symmetry-projected measurement graph of `target`, colors it
/// greedily and reports the group count.
pub fn measurement_groups(n_qubits: usize, target: MeasurementTarget) -> Result<(GroupingReport, MeasurementGraph)> {
    let contributions = target_strings(n_qubits, target)?.len();
    let vertices = projected_strings(n_qubits, target)?;
    let mut graph = MeasurementGraph::new(n_qubits, vertices);
    let degrees = graph.conflict_degrees();
    let groups = graph.color_in_order(&degrees);
    let n_vert = graph.vertices.len();
    let report = GroupingReport {
        n_qubits,
        target,
        contributions,
        vertices: n_vert,
        groups,
        vertices_per_group: if groups > 0 { n_vert as f64 / groups as f64 } else { 0.0 },
        clique_lower_bound: graph.clique_in_order(&degrees),
    };
    Ok((report, graph))
}
