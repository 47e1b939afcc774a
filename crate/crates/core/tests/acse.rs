mod common;

use common::*;
use cqesim::acse::*;
use cqesim::error::CqeError;
use cqesim::fock::{Encoding, PairIndex, TwoBodyTensor};
use cqesim::hamiltonian::{fci_ground_state, PropagationMethod};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;

const ENCODINGS: [Encoding; 2] = [Encoding::Fermion, Encoding::QubitParticle];

fn energy_oracle(fermions: &DenseOracle, f: &Fixture, v: &[Complex64]) -> f64 {
    dot(v, &fermions.hamiltonian(&f.ints, v)).re / dot(v, v).re
}

/// `e^{εG}|v⟩` for `G = Γ - Γ†` (`hermitian = false`) or `G = i(Γ + Γ†)`,
/// using `G³ = -G` on the span of one off-diagonal generator.
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

#[test]
fn residual_is_the_energy_gradient() {
    // dE/dε along Γ - Γ† is 2 Re A, along i(Γ + Γ†) it is -2 Im A
    let f = fixture("h2");
    let mut r = rng(17);
    let h = 1e-4;
    let fermions = DenseOracle::new(4, Encoding::Fermion);
    for enc in ENCODINGS {
        let o = DenseOracle::new(4, enc);
        let psi = random_state(&mut r, 4, 2, 0, true);
        let a = residual_exact(&psi, &f.ham, enc).unwrap();
        for idx in [(0, 1, 2, 3), (0, 3, 1, 2), (0, 1, 1, 2), (1, 3, 0, 2)] {
            let (i, j, k, l) = idx;
            if (i % 2 + j % 2) != (k % 2 + l % 2) {
                continue;
            }
            let want = a.tensor.get(i, j, k, l);
            for (herm, expect) in [(false, 2.0 * want.re), (true, -2.0 * want.im)] {
                let ep = energy_oracle(&fermions, &f, &rotate(&o, idx, herm, h, psi.amplitudes()));
                let em = energy_oracle(&fermions, &f, &rotate(&o, idx, herm, -h, psi.amplitudes()));
                let fd = (ep - em) / (2.0 * h);
                assert!((fd - expect).abs() < 1e-7, "{enc:?} {idx:?} herm={herm}: {fd} vs {expect}");
            }
        }
    }
}

#[test]
fn residual_vanishes_on_eigenstates() {
    for name in ["h4", "o2_1p30"] {
        let f = fixture(name);
        let (_, psi) = fci_ground_state(&f.ham, f.ints.n_electrons, f.ints.ms2).unwrap();
        for enc in ENCODINGS {
            let a = residual_exact(&psi, &f.ham, enc).unwrap();
            assert!(a.norm_2 < 1e-8, "{name} {enc:?}: {}", a.norm_2);
        }
    }
}

#[test]
fn residual_is_anti_hermitian_and_spin_conserving() {
    let f = fixture("h4");
    let mut r = rng(1);
    let psi = random_state(&mut r, 8, 4, 0, true);
    for enc in ENCODINGS {
        let a = residual_exact(&psi, &f.ham, enc).unwrap();
        assert!(a.tensor.is_anti_hermitian(1e-12));
        for (i, j, k, l, _) in a.tensor.iter_nonzero() {
            assert_eq!(i % 2 + j % 2, k % 2 + l % 2);
        }
    }
}

#[test]
fn auxiliary_residual_is_second_order_in_delta() {
    let f = fixture("h4");
    let mut r = rng(23);
    for complex in [false, true] {
        let psi = random_state(&mut r, 8, 4, 0, complex);
        for enc in ENCODINGS {
            let exact = residual_exact(&psi, &f.ham, enc).unwrap();
            let mut re = exact.tensor.clone();
            re.data_mut().iter_mut().for_each(|v| *v = c(v.re, 0.0));
            let err = |d: f64| {
                residual_auxiliary(&psi, &f.ham, d, enc, PropagationMethod::Exact)
                    .unwrap()
                    .tensor
                    .max_abs_diff(&re)
            };
            let (e1, e2) = (err(0.02), err(0.01));
            assert!(e1 < 1e-2, "{e1}");
            let ratio = e1 / e2;
            assert!((3.6..4.4).contains(&ratio), "complex={complex} {enc:?}: ratio {ratio}");
        }
    }
}

#[test]
fn approximate_propagators_track_the_exact_residual() {
    let f = fixture("h4");
    let psi = f.hf.clone();
    let exact = residual_exact(&psi, &f.ham, Encoding::Fermion).unwrap();
    for method in [ResidualMethod::AuxTrotter, ResidualMethod::AuxCholesky] {
        let a = residual(&psi, &f.ham, Encoding::Fermion, method, 0.001).unwrap();
        let rel = a.tensor.max_abs_diff(&exact.tensor) / exact.norm_inf;
        assert!(rel < 0.05, "{method:?}: {rel}");
    }
}

#[test]
fn auxiliary_delta_is_validated() {
    let f = fixture("h2");
    let r = |d| residual_auxiliary(&f.hf, &f.ham, d, Encoding::Fermion, PropagationMethod::Exact);
    assert!(matches!(r(0.0), Err(CqeError::Argument(_))));
    assert!(matches!(r(-0.1), Err(CqeError::Argument(_))));
    assert!(matches!(r(1e-9), Err(CqeError::IllConditioned(_))));
    assert!(r(MIN_DELTA).is_ok());
}

fn toy_residual() -> ResidualMatrix<f64> {
    let mut t = TwoBodyTensor::zeros(4, Encoding::Fermion);
    let vals = [(0, 1, 2, 3, 1.0), (0, 2, 1, 3, 0.5), (0, 1, 0, 3, 0.09), (1, 2, 0, 3, 0.3)];
    for (i, j, k, l, v) in vals {
        t.set(i, j, k, l, c(v, 0.0)).unwrap();
        t.set(k, l, i, j, c(-v, 0.0)).unwrap();
    }
    ResidualMatrix::new(t)
}

#[test]
fn sparsify_examples() {
    let a = toy_residual();
    assert_eq!(a.nnz(), 8);
    assert_eq!(sparsify(&a, 0.0).unwrap(), a);
    assert_eq!(sparsify(&a, 0.1).unwrap().nnz(), 6);
    assert_eq!(sparsify(&a, 0.4).unwrap().nnz(), 4);
    let top = sparsify(&a, 1.0).unwrap();
    assert_eq!(top.nnz(), 2);
    assert_eq!(top.tensor.get(0, 1, 2, 3), c(1.0, 0.0));
    assert!(sparsify(&a, 1.5).is_err());
    assert!(sparsify(&a, -0.1).is_err());
    assert!(sparsify(&a, f64::NAN).is_err());
}

#[test]
fn merge_with_zero_depth_always_appends() {
    let f = fixture("h2");
    let a = toy_residual();
    let mut ansatz = Ansatz::new(f.hf.clone(), Encoding::Fermion);
    for it in 1..=3 {
        let out = merge_p_depth(&ansatz, &a, 0, 0.1, it);
        assert!(out.appended);
        assert_eq!(out.merged, 0);
        ansatz = out.ansatz;
    }
    assert_eq!(ansatz.layers.len(), 3);
    assert_eq!(ansatz.generator_count(), 12);
    let none = merge_p_depth(&ansatz, &a, 0, 0.0, 4);
    assert!(!none.appended);
    assert_eq!(none.ansatz.layers.len(), 3);
}

#[test]
fn merge_folds_into_recent_layers() {
    let f = fixture("h2");
    let a = toy_residual();
    let ansatz = Ansatz::new(f.hf.clone(), Encoding::Fermion);
    let first = merge_p_depth(&ansatz, &a, 1, 0.2, 1).ansatz;
    // same generators one iteration later go into layer 1, rescaled
    let second = merge_p_depth(&first, &a, 1, 0.1, 2);
    assert!(!second.appended);
    assert_eq!(second.merged, 4);
    let layer = &second.ansatz.layers[0];
    assert_eq!(second.ansatz.layers.len(), 1);
    // ε·T grows from 0.2·a to 0.3·a
    let v = layer.tensor.get(0, 1, 2, 3) * layer.epsilon;
    assert!((v - c(0.3, 0.0)).norm() < 1e-14);
    // two iterations later the window has moved on
    let third = merge_p_depth(&second.ansatz, &a, 1, 0.1, 4);
    assert!(third.appended);
    assert_eq!(third.merged, 0);
    // a new generator next to known ones: split between merge and a fresh layer
    let mut extra = a.tensor.clone();
    extra.set(0, 2, 0, 2, c(0.0, 0.2)).unwrap();
    let mixed = merge_p_depth(&first, &ResidualMatrix::new(extra), 3, 0.1, 2);
    assert!(mixed.appended);
    assert_eq!(mixed.merged, 4);
    assert_eq!(mixed.ansatz.layers[1].generator_count(), 1);
}

#[test]
fn merged_ansatz_prepares_the_same_state_when_generators_commute() {
    // a single generator merged twice equals one rotation by the summed angle
    let f = fixture("h2");
    let mut t = TwoBodyTensor::zeros(4, Encoding::Fermion);
    t.set(0, 1, 2, 3, c(0.5, 0.0)).unwrap();
    t.set(2, 3, 0, 1, c(-0.5, 0.0)).unwrap();
    let d = ResidualMatrix::new(t);
    let a0 = Ansatz::new(f.hf.clone(), Encoding::Fermion);
    let a1 = merge_p_depth(&a0, &d, 2, 0.3, 1).ansatz;
    let a2 = merge_p_depth(&a1, &d, 2, 0.2, 2).ansatz;
    let a_once = merge_p_depth(&a0, &d, 0, 0.5, 1).ansatz;
    assert!(a2.prepare().unwrap().distance(&a_once.prepare().unwrap()) < 1e-14);
}

fn tensor_from(v: &DVector<f64>, slots: &[(usize, usize)]) -> TwoBodyTensor<f64> {
    let mut t = TwoBodyTensor::zeros(5, Encoding::Fermion);
    for (x, &(a, b)) in v.iter().zip(slots) {
        *t.at_mut(a, b) = c(*x, 0.0);
    }
    t
}

fn vector_from(t: &TwoBodyTensor<f64>, slots: &[(usize, usize)]) -> DVector<f64> {
    DVector::from_iterator(slots.len(), slots.iter().map(|&(a, b)| t.at(a, b).re))
}

#[test]
fn lbfgs_recovers_the_newton_step_on_a_quadratic() {
    // f(x) = ½ xᵀQx - bᵀx over 10 parameters. BFGS with exact line search
    // terminates in at most 10 steps at Q⁻¹b; the full-memory two-loop
    // recursion must reproduce it.
    let n = 10;
    let slots: Vec<(usize, usize)> = (0..n).map(|k| (k, (3 * k + 1) % 10)).collect();
    let mut r = rng(99);
    use rand::Rng;
    let m = DMatrix::from_fn(n, n, |_, _| r.gen_range(-1.0..1.0));
    let q = &m * m.transpose() + DMatrix::identity(n, n) * 0.5;
    let b = DVector::from_fn(n, |_, _| r.gen_range(-1.0..1.0));
    let x_star = q.clone().lu().solve(&b).unwrap();

    let mut x = DVector::zeros(n);
    let mut g = &q * &x - &b;
    let mut history: Vec<CurvaturePair<f64>> = Vec::new();
    for _ in 0..n {
        if g.norm() < 1e-12 {
            break;
        }
        let hg = vector_from(&lbfgs_two_loop(&history, &tensor_from(&g, &slots)), &slots);
        let d = -hg;
        let alpha = -g.dot(&d) / d.dot(&(&q * &d));
        let s = &d * alpha;
        x += &s;
        let g_new = &q * &x - &b;
        let y = &g_new - &g;
        history.push(CurvaturePair::new(tensor_from(&s, &slots), tensor_from(&y, &slots)).unwrap());
        g = g_new;
    }
    assert!((&x - &x_star).amax() < 1e-8, "{}", (&x - &x_star).amax());
    // with a full history H·g is the Newton step
    let probe = DVector::from_fn(n, |i, _| (i as f64 + 1.0).sin());
    let newton = q.clone().lu().solve(&probe).unwrap();
    let hg = vector_from(&lbfgs_two_loop(&history, &tensor_from(&probe, &slots)), &slots);
    assert!((hg - newton).amax() < 1e-8);
}

#[test]
fn lbfgs_satisfies_the_secant_condition() {
    let mut r = rng(5);
    use rand::Rng;
    let slots: Vec<(usize, usize)> = (0..10).map(|k| (k, k)).collect();
    let mut history = Vec::new();
    while history.len() < 3 {
        let s = DVector::from_fn(10, |_, _| r.gen_range(-1.0..1.0));
        let y = DVector::from_fn(10, |_, _| r.gen_range(-1.0..1.0));
        if let Some(p) = CurvaturePair::new(tensor_from(&s, &slots), tensor_from(&y, &slots)) {
            history.push(p);
        }
    }
    let last = history.last().unwrap();
    let hy = lbfgs_two_loop(&history, &last.y);
    assert!(hy.max_abs_diff(&last.s) < 1e-12);
    // a pair with negative curvature is refused
    let s = tensor_from(&DVector::from_element(10, 1.0), &slots);
    assert!(CurvaturePair::new(s.clone(), s.scaled(-1.0)).is_none());
}

#[test]
fn empty_history_leaves_the_residual_unchanged() {
    let a = toy_residual();
    assert_eq!(quasi_newton_correct(&[], &a), a);
}

fn cfg() -> CqeConfig<f64> {
    CqeConfig::default()
}

#[test]
fn fci_reference_converges_immediately() {
    let f = fixture("h4");
    let (e, psi) = fci_ground_state(&f.ham, 4, 0).unwrap();
    let trace = run_cqe(&f.ham, &psi, &cfg()).unwrap();
    assert_eq!(trace.status, RunStatus::Converged);
    assert_eq!(trace.iterations(), 1);
    assert_eq!(trace.records[0].layers, 0);
    assert_eq!(trace.records[0].epsilon, 0.0);
    assert!((trace.final_energy - e).abs() < 1e-10);
}

#[test]
fn zero_iterations_return_the_reference() {
    let f = fixture("h4");
    let trace = run_cqe(&f.ham, &f.hf, &CqeConfig { max_iterations: 0, ..cfg() }).unwrap();
    assert_eq!(trace.iterations(), 0);
    assert_eq!(trace.status, RunStatus::MaxIterations);
    assert_eq!(trace.final_energy, trace.reference_energy);
    assert!((trace.final_energy - f.hf_energy).abs() < 1e-8);
    assert!(trace.to_jsonl().is_empty());
}

#[test]
fn every_iteration_descends() {
    let f = fixture("h4");
    let fci = f.fci_energy.unwrap();
    let configs = [
        cfg(),
        CqeConfig { encoding: Encoding::QubitParticle, sparse_c: 0.1, ..cfg() },
        CqeConfig { p_depth: 2, sparse_c: 0.1, ..cfg() },
        CqeConfig { second_order: SecondOrder::Lbfgs(3), ..cfg() },
        CqeConfig { residual_method: ResidualMethod::AuxTrotter, ..cfg() },
        CqeConfig { epsilon_strategy: EpsilonStrategy::Fixed(0.1), max_iterations: 30, ..cfg() },
    ];
    for config in configs {
        let trace = run_cqe(&f.ham, &f.hf, &config).unwrap();
        let mut prev = trace.reference_energy;
        for rec in &trace.records {
            if !matches!(config.epsilon_strategy, EpsilonStrategy::Fixed(_)) {
                assert!(rec.energy <= prev + DESCENT_SLACK, "{config:?} iter {}", rec.iter);
            }
            assert!(rec.energy >= fci - 1e-10);
            assert!(rec.energy_identity_gap < 1e-9);
            prev = rec.energy;
        }
        let last = trace.records.last().unwrap();
        assert_eq!(last.energy, trace.final_energy);
        assert_eq!(last.layers, trace.ansatz.layers.len());
        // the stored ansatz reproduces the final state
        assert!(trace.ansatz.prepare().unwrap().distance(&trace.final_state) < 1e-10);
    }
}

#[test]
fn runs_are_deterministic() {
    let f = fixture("h4_1p50");
    let config = CqeConfig { sparse_c: 0.1, p_depth: 1, second_order: SecondOrder::Lbfgs(2), ..cfg() };
    let a = run_cqe(&f.ham, &f.hf, &config).unwrap();
    let b = run_cqe(&f.ham, &f.hf, &config).unwrap();
    assert_eq!(a.records, b.records);
    assert_eq!(a.to_jsonl(), b.to_jsonl());
}

#[test]
fn zero_step_stagnates() {
    let f = fixture("h4");
    let config = CqeConfig { epsilon_strategy: EpsilonStrategy::Fixed(0.0), ..cfg() };
    let trace = run_cqe(&f.ham, &f.hf, &config).unwrap();
    assert_eq!(trace.status, RunStatus::Stagnated);
    assert_eq!(trace.iterations(), STALL_LIMIT);
}

#[test]
fn reference_outside_the_sector_is_a_contract_error() {
    let f = fixture("h4");
    let wrong = cqesim::State::hartree_fock(4, 2, 1).unwrap();
    assert!(matches!(run_cqe(&f.ham, &wrong, &cfg()), Err(CqeError::Contract(_))));
    let small = cqesim::State::hartree_fock(2, 1, 1).unwrap();
    assert!(matches!(run_cqe(&f.ham, &small, &cfg()), Err(CqeError::Argument(_))));
    let bad = CqeConfig { sparse_c: 1.5, ..cfg() };
    match run_cqe(&f.ham, &f.hf, &bad) {
        Err(CqeError::Argument(m)) => assert!(m.contains("sparse_c")),
        other => panic!("{other:?}"),
    }
    assert!(CqeConfig { second_order: SecondOrder::Lbfgs(5), ..cfg() }.validate().is_err());
}

#[test]
fn single_precision_solver_runs() {
    let f = fixture("h2");
    let ints: cqesim::hamiltonian::IntegralSet<f32> =
        cqesim::hamiltonian::parse_fcidump(&std::fs::read_to_string(fcidump_path("h2")).unwrap()).unwrap();
    let ham = cqesim::hamiltonian::build_reduced_hamiltonian(&ints).unwrap();
    let hf = cqesim::fock::FockState::<f32>::hartree_fock(2, 1, 1).unwrap();
    let config = CqeConfig::<f32> { tol_residual_norm: 1e-3, ..CqeConfig::default() };
    let trace = run_cqe(&ham, &hf, &config).unwrap();
    assert!((trace.final_energy as f64 - f.fci_energy.unwrap()).abs() < 1e-4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn parity_split_recovers_both_encodings(seed in 0u64..10_000) {
        let f = fixture("o2_1p30");
        let mut r = rng(seed);
        let psi = random_state(&mut r, 8, 6, 2, true);
        let (plus, minus) = residual_parity_split(&psi, &f.ham).unwrap();
        let af = residual_exact(&psi, &f.ham, Encoding::Fermion).unwrap();
        let aq = residual_exact(&psi, &f.ham, Encoding::QubitParticle).unwrap();
        let mut sum = plus.clone();
        sum.axpy(1.0, &minus);
        let diff = plus.sub(&minus);
        prop_assert!(af.tensor.max_abs_diff(&sum.with_encoding(Encoding::Fermion)) < 1e-12);
        prop_assert!(aq.tensor.max_abs_diff(&diff.with_encoding(Encoding::QubitParticle)) < 1e-12);
    }

    #[test]
    fn sparsify_is_monotone(vals in prop::collection::vec(-1.0f64..1.0, 1..30), c1 in 0.0f64..1.0, c2 in 0.0f64..1.0) {
        let pairs = PairIndex::new(6);
        let mut t = TwoBodyTensor::zeros(6, Encoding::Fermion);
        for (k, v) in vals.iter().enumerate() {
            let a = k % pairs.len();
            let b = (7 * k + 3) % pairs.len();
            *t.at_mut(a, b) = c(*v, 0.0);
        }
        let a = ResidualMatrix::new(t);
        let (lo, hi) = if c1 <= c2 { (c1, c2) } else { (c2, c1) };
        let s_lo = sparsify(&a, lo).unwrap();
        let s_hi = sparsify(&a, hi).unwrap();
        prop_assert!(s_hi.nnz() <= s_lo.nnz());
        prop_assert!(s_lo.nnz() <= a.nnz());
        // survivors keep their values and the largest element always survives
        for (i, j, k, l, v) in s_hi.tensor.iter_nonzero() {
            prop_assert_eq!(v, a.tensor.get(i, j, k, l));
            prop_assert!(v.norm() >= hi * a.norm_inf);
        }
        if a.norm_inf > 0.0 {
            prop_assert!((s_hi.norm_inf - a.norm_inf).abs() == 0.0);
        }
    }
}
