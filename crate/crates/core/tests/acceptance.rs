//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_RED` are reported but do not fail the target;
//! every other criterion must pass.

mod common;

use std::time::Instant;

use clap::Parser;
use common::*;
use cqesim::acse::*;
use cqesim::cli::{cmd_run, Cli, Command};
use cqesim::fock::{apply_excitation, Encoding};
use cqesim::hamiltonian::{fci_ground_state, pivoted_cholesky, PropagationMethod, CHOLESKY_THRESHOLD};
use cqesim::rdm::count_rdm2_elements;
use cqesim::resources::{count_cnots, measurement_groups, target_strings, CostModel, MeasurementTarget};
use num_complex::Complex64;

const KNOWN_RED: [&str; 2] = ["encoding-ratio", "counting"];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn oracle_equivalence() -> Outcome {
    let mut r = rng(2024);
    let mut worst: f64 = 0.0;
    let quads = canonical_quadruples(8);
    for enc in [Encoding::Fermion, Encoding::QubitParticle] {
        let o = DenseOracle::new(8, enc);
        for s in 0..50 {
            let n = 1 + s % 7;
            let sz = (n % 2) as i32;
            let psi = random_state(&mut r, 8, n, sz, true);
            for &(i, j, k, l) in &quads {
                let got = apply_excitation(&psi, i, j, k, l, enc).unwrap();
                let want = o.double(i, j, k, l, psi.amplitudes());
                worst = worst.max(max_diff(got.amplitudes(), &want));
            }
        }
    }
    outcome(worst <= 1e-12, format!("max deviation {worst:.1e} over 50 states x {} quadruples x 2 encodings", quads.len()))
}

fn rotate(o: &DenseOracle, idx: (usize, usize, usize, usize), hermitian: bool, eps: f64, v: &[Complex64]) -> Vec<Complex64> {
    let (i, j, k, l) = idx;
    let g = |w: &[Complex64]| -> Vec<Complex64> {
        let a = o.double(i, j, k, l, w);
        let b = o.double(k, l, i, j, w);
        if hermitian {
            a.iter().zip(&b).map(|(x, y)| (x + y) * c(0.0, 1.0)).collect()
        } else {
            a.iter().zip(&b).map(|(x, y)| x - y).collect()
        }
    };
    let g1 = g(v);
    let g2 = g(&g1);
    v.iter()
        .zip(&g1)
        .zip(&g2)
        .map(|((x, y), z)| x + y * eps.sin() + z * (1.0 - eps.cos()))
        .collect()
}

fn gradient_identity() -> Outcome {
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for name in ["h2", "h4"] {
        let f = fixture(name);
        let n = f.ham.n_qubits();
        let sector = f.hf.sector().clone();
        let energy = |v: Vec<Complex64>| f.ham.energy(&cqesim::State::in_sector(sector.clone(), v).unwrap());
        for enc in [Encoding::Fermion, Encoding::QubitParticle] {
            let o = DenseOracle::new(n, enc);
            let a = residual_exact(&f.hf, &f.ham, enc).unwrap();
            for (i, j, k, l) in canonical_quadruples(n) {
                if (i, j) >= (k, l) || i % 2 + j % 2 != k % 2 + l % 2 {
                    continue;
                }
                let want = a.tensor.get(i, j, k, l);
                for (herm, expect) in [(false, 2.0 * want.re), (true, -2.0 * want.im)] {
                    let ep = energy(rotate(&o, (i, j, k, l), herm, h, f.hf.amplitudes()));
                    let em = energy(rotate(&o, (i, j, k, l), herm, -h, f.hf.amplitudes()));
                    worst = worst.max(((ep - em) / (2.0 * h) - expect).abs());
                    checked += 1;
                }
            }
        }
    }
    outcome(worst <= 1e-6, format!("max |FD - residual| {worst:.1e} over {checked} directions (H2, H4, both encodings)"))
}

fn eigenstate_fixed_point() -> Outcome {
    let mut worst: f64 = 0.0;
    for name in ["h2", "h4", "h6"] {
        let f = fixture(name);
        let (_, psi) = fci_ground_state(&f.ham, f.ints.n_electrons, f.ints.ms2).unwrap();
        for enc in [Encoding::Fermion, Encoding::QubitParticle] {
            worst = worst.max(residual_exact(&psi, &f.ham, enc).unwrap().norm_2);
        }
    }
    outcome(worst < 1e-8, format!("largest residual norm {worst:.1e} on H2, H4, H6 ground states"))
}

fn parity_relation() -> Outcome {
    let f = fixture("h4");
    let mut r = rng(77);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let psi = random_state(&mut r, 8, 4, 0, true);
        let (plus, minus) = residual_parity_split(&psi, &f.ham).unwrap();
        let af = residual_exact(&psi, &f.ham, Encoding::Fermion).unwrap().tensor;
        let aq = residual_exact(&psi, &f.ham, Encoding::QubitParticle).unwrap().tensor.with_encoding(Encoding::Fermion);
        let mut sum = af.clone();
        sum.axpy(1.0, &aq);
        let diff = af.sub(&aq);
        worst = worst.max(sum.max_abs_diff(&plus.scaled(2.0).with_encoding(Encoding::Fermion)));
        worst = worst.max(diff.max_abs_diff(&minus.scaled(2.0).with_encoding(Encoding::Fermion)));
    }
    outcome(worst <= 1e-10, format!("max deviation {worst:.1e} over 20 random states"))
}

fn auxiliary_order() -> Outcome {
    let f = fixture("h4");
    let mut r = rng(5);
    let states = [f.hf.clone(), random_state(&mut r, 8, 4, 0, false), random_state(&mut r, 8, 4, 0, true)];
    let mut ratios = Vec::new();
    for psi in &states {
        for enc in [Encoding::Fermion, Encoding::QubitParticle] {
            let exact = residual_exact(psi, &f.ham, enc).unwrap().tensor;
            let mut re = exact.clone();
            re.data_mut().iter_mut().for_each(|v| *v = c(v.re, 0.0));
            let err = |d: f64| {
                residual_auxiliary(psi, &f.ham, d, enc, PropagationMethod::Exact)
                    .unwrap()
                    .tensor
                    .max_abs_diff(&re)
            };
            let e: Vec<f64> = [0.04, 0.02, 0.01].iter().map(|&d| err(d)).collect();
            ratios.push(e[0] / e[1]);
            ratios.push(e[1] / e[2]);
        }
    }
    let pass = ratios.iter().all(|x| (3.5..=4.5).contains(x));
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    outcome(pass, format!("error ratio per halving in [{lo:.3}, {hi:.3}] (delta 0.04 -> 0.01)"))
}

fn config(enc: Encoding, c: f64, p: usize) -> CqeConfig<f64> {
    CqeConfig { encoding: enc, sparse_c: c, p_depth: p, ..CqeConfig::default() }
}

fn convergence_to_fci() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for name in ["h4", "hf"] {
        let f = fixture(name);
        let fci = f.fci_energy.unwrap();
        for enc in [Encoding::Fermion, Encoding::QubitParticle] {
            for c in [0.0, 0.1, 1.0] {
                let t = run_cqe(&f.ham, &f.hf, &config(enc, c, 0)).unwrap();
                let de = t.final_energy - fci;
                worst = worst.max(de.abs());
                lines.push(format!("{name}/{}/c={c}: {} it, dE {de:.1e}", enc_label(enc), t.iterations()));
            }
        }
    }
    outcome(worst <= 5e-4, format!("worst |dE| {worst:.1e}; {}", lines.join("; ")))
}

fn enc_label(e: Encoding) -> &'static str {
    match e {
        Encoding::Fermion => "fermion",
        Encoding::QubitParticle => "qubit",
    }
}

fn dissociation_curves() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut iters = 0;
    let points = ["h4_0p80", "h4", "h4_1p25", "h4_1p50", "h4_2p00", "o2_1p30", "o2_1p50", "o2_1p80"];
    for name in points {
        let f = fixture(name);
        let (fci, _) = fci_ground_state(&f.ham, f.ints.n_electrons, f.ints.ms2).unwrap();
        for enc in [Encoding::Fermion, Encoding::QubitParticle] {
            let cfg = CqeConfig {
                encoding: enc,
                tol_residual_norm: 0.001,
                second_order: SecondOrder::Lbfgs(3),
                ..CqeConfig::default()
            };
            let t = run_cqe(&f.ham, &f.hf, &cfg).unwrap();
            worst = worst.max((t.final_energy - fci).abs());
            iters = iters.max(t.iterations());
        }
    }
    outcome(worst <= 1e-3, format!("worst |dE| {worst:.1e} over 5 H4 + 3 O2 points, both encodings (max {iters} iterations)"))
}

/// CNOT estimates on H4 at equilibrium for every `(c, p)` of the grid.
fn cnot_grid() -> Vec<(f64, usize, u64, u64)> {
    let f = fixture("h4");
    let mut out = Vec::new();
    for c in [0.0, 0.1, 1.0] {
        for p in [0, 1, 3] {
            let cost = |enc| {
                let t = run_cqe(&f.ham, &f.hf, &config(enc, c, p)).unwrap();
                count_cnots(&t.ansatz, &CostModel)
            };
            out.push((c, p, cost(Encoding::Fermion), cost(Encoding::QubitParticle)));
        }
    }
    out
}

fn p_depth_compression(grid: &[(f64, usize, u64, u64)]) -> Outcome {
    let get = |p| grid.iter().find(|g| g.0 == 0.0 && g.1 == p).unwrap().2 as f64;
    let (r1, r3) = (get(1) / get(0), get(3) / get(0));
    let pass = (0.40..=0.70).contains(&r1) && (0.05..=0.30).contains(&r3);
    outcome(pass, format!("p1/p0 = {r1:.3}, p3/p0 = {r3:.3} (CNOTs {} / {} / {})", get(0), get(1), get(3)))
}

fn encoding_ratio(grid: &[(f64, usize, u64, u64)]) -> Outcome {
    let ratios: Vec<String> = grid
        .iter()
        .map(|&(c, p, f, q)| format!("c={c},p={p}:{:.2}", q as f64 / f as f64))
        .collect();
    let pass = grid.iter().all(|&(_, _, f, q)| (0.55..=0.85).contains(&(q as f64 / f as f64)));
    outcome(pass, format!("qubit/fermion CNOT ratios {}", ratios.join(" ")))
}

fn counting() -> Outcome {
    let count = count_rdm2_elements(28, 14, 0).unwrap();
    let strings = target_strings(28, MeasurementTarget::UnencodedA).unwrap().len();
    let mut orders = Vec::new();
    for name in ["h2", "h4", "h6", "h8", "h10", "h12"] {
        let ints = integrals(name);
        let chol = pivoted_cholesky(&ints.eri, ints.n_spatial, CHOLESKY_THRESHOLD).unwrap();
        orders.push(chol.order());
    }
    let pass = count == 92092 && orders == [4, 8, 12, 16, 20, 24];
    outcome(
        pass,
        format!(
            "count_rdm2_elements(28,14,0) = {count} (want 92092; distinct Pauli strings of the 28-qubit residual = {strings}); Cholesky orders {orders:?} (want [4, 8, 12, 16, 20, 24])"
        ),
    )
}

fn grouping_separation() -> Outcome {
    let (u, _) = measurement_groups(28, MeasurementTarget::UnencodedA).unwrap();
    let (e, _) = measurement_groups(28, MeasurementTarget::EncodedA).unwrap();
    outcome(
        u.groups <= 150 && e.groups >= 3000,
        format!("28 qubits: unencoded {} groups, encoded {} groups ({} strings before projection)", u.groups, e.groups, u.contributions),
    )
}

fn determinism() -> Outcome {
    let fcidump = fcidump_path("h4_1p25");
    let configs: [&[&str]; 4] = [
        &[],
        &["--encoding", "qubit", "--sparse-c", "0.1", "--p-depth", "3"],
        &["--second-order", "lbfgs:3", "--tol", "0.001"],
        &["--residual", "aux-trotter", "--epsilon", "fixed:0.05", "--max-iter", "20"],
    ];
    let root = std::env::temp_dir().join(format!("cqesim-acceptance-{}", std::process::id()));
    let mut identical = 0;
    for (k, extra) in configs.iter().enumerate() {
        let mut traces = Vec::new();
        for rep in 0..2 {
            let out = root.join(format!("{k}-{rep}"));
            let mut args = vec!["cqesim".to_string(), "run".into(), "--fcidump".into(), fcidump.to_string_lossy().into_owned()];
            args.extend(extra.iter().map(|s| s.to_string()));
            let cli = Cli::try_parse_from(&args).unwrap();
            let Command::Run { solver, .. } = &cli.command else { unreachable!() };
            cmd_run(&fcidump, solver, &out).unwrap();
            traces.push(std::fs::read(out.join("trace.jsonl")).unwrap());
        }
        if traces[0] == traces[1] && !traces[0].is_empty() {
            identical += 1;
        }
    }
    let _ = std::fs::remove_dir_all(&root);
    outcome(identical == configs.len(), format!("{identical}/{} configurations byte-identical", configs.len()))
}

fn main() {
    let start = Instant::now();
    let mut report: Vec<(&str, Outcome, f64)> = Vec::new();
    let mut timed = |name: &'static str, f: &dyn Fn() -> Outcome| {
        let t = Instant::now();
        let o = f();
        let secs = t.elapsed().as_secs_f64();
        println!("{} {name} ({secs:.1}s): {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        report.push((name, o, secs));
    };
    timed("oracle-equivalence", &oracle_equivalence);
    timed("gradient-identity", &gradient_identity);
    timed("eigenstate-fixed-point", &eigenstate_fixed_point);
    timed("parity-relation", &parity_relation);
    timed("auxiliary-order", &auxiliary_order);
    timed("convergence-to-fci", &convergence_to_fci);
    timed("dissociation-curves", &dissociation_curves);
    let grid = cnot_grid();
    timed("p-depth-compression", &|| p_depth_compression(&grid));
    timed("encoding-ratio", &|| encoding_ratio(&grid));
    timed("counting", &counting);
    timed("grouping-separation", &grouping_separation);
    timed("determinism", &determinism);

    let passed = report.iter().filter(|r| r.1.pass).count();
    println!("{passed}/{} criteria pass ({:.1}s)", report.len(), start.elapsed().as_secs_f64());
    let unexpected: Vec<&str> = report
        .iter()
        .filter(|r| !r.1.pass && !KNOWN_RED.contains(&r.0))
        .map(|r| r.0)
        .collect();
    for r in report.iter().filter(|r| !r.1.pass && KNOWN_RED.contains(&r.0)) {
        println!("known red: {}", r.0);
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
