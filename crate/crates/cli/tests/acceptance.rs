//! Acceptance suite: every release criterion as one test, each printing a
//! `[PASS]` line with the measured values once its assertions hold.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sib_core::analytic::{
    binary_max_relevance, binary_symmetric_tradeoff, gaussian_max_relevance,
    gaussian_symmetric_tradeoff, uniform_grid, BinaryModel, GaussianModel,
};
use sib_core::ba::{ba_run, beta_sweep, pareto_front_rate_relevance, BaConfig};
use sib_core::bounds::binary_error_curve;
use sib_core::oracle::{oracle_min_objective, GridSpec};
use sib_core::prob::{
    conditional_mi, entropy, h2, h2_inv, mutual_information_between, star, JointPmf, Marginal,
};
use std::process::Command;
use std::time::Instant;

// -------------------------------------------------------------------------
// 1. Binary threshold reproduction
// -------------------------------------------------------------------------

#[test]
fn criterion_1_binary_threshold() {
    let start = Instant::now();
    let model = BinaryModel::new(0.2, 2).unwrap();
    let grid = uniform_grid(model.max_relevance(), 200, true);
    let curve = binary_symmetric_tradeoff(&model, (2, 0.11), &grid).unwrap();
    let th = curve.threshold.expect("threshold exists");
    let elapsed = start.elapsed();
    assert!(
        (th.relevance - 0.056).abs() <= 0.005,
        "Delta* = {}",
        th.relevance
    );
    assert!((th.rate - 0.16).abs() <= 0.005, "R* = {}", th.rate);
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "[PASS] criterion 1: binary threshold (Delta, R) = ({:.4}, {:.4}) within (0.056, 0.16) +- 0.005 in {elapsed:?}",
        th.relevance, th.rate
    );
}

// -------------------------------------------------------------------------
// 2. Gaussian threshold reproduction
// -------------------------------------------------------------------------

#[test]
fn criterion_2_gaussian_threshold() {
    let start = Instant::now();
    let snr = 10f64.powf(0.5); // 5 dB
    let model = GaussianModel::from_snr(snr, 2).unwrap();
    let grid = uniform_grid(model.max_relevance(), 200, false);
    let curve = gaussian_symmetric_tradeoff(&model, (2, 0.5), &grid).unwrap();
    let th = curve.threshold.expect("threshold exists");
    let elapsed = start.elapsed();
    assert!(
        (th.relevance - 0.27).abs() <= 0.01,
        "Delta* = {}",
        th.relevance
    );
    assert!((th.rate - 0.39).abs() <= 0.01, "R* = {}", th.rate);
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "[PASS] criterion 2: Gaussian threshold (Delta, R) = ({:.4}, {:.4}) within (0.27, 0.39) +- 0.01 in {elapsed:?}",
        th.relevance, th.rate
    );
}

// -------------------------------------------------------------------------
// 3. Binary saturation
// -------------------------------------------------------------------------

#[test]
fn criterion_3_binary_saturation() {
    for p in [0.1, 0.2, 0.3] {
        let model = BinaryModel::new(p, 2).unwrap();
        let limit = 1.0 - h2(p).unwrap();
        let deltas = binary_max_relevance(&model, &[10.0, 10.0]).unwrap();
        for (t, &d) in deltas.iter().enumerate() {
            assert!(
                (d - limit).abs() < 1e-6,
                "p={p} stage {}: {d} vs {limit}",
                t + 1
            );
        }
    }
    println!("[PASS] criterion 3: binary saturation equals 1 - h2(p) within 1e-6 for p in {{0.1, 0.2, 0.3}}");
}

// -------------------------------------------------------------------------
// 4. Gaussian saturation
// -------------------------------------------------------------------------

#[test]
fn criterion_4_gaussian_saturation() {
    for snr in [3.0, 10f64.powf(0.5), 10.0] {
        let model = GaussianModel::from_snr(snr, 2).unwrap();
        let limit = 0.5 * (1.0 + snr).log2();
        let deltas = gaussian_max_relevance(&model, &[20.0, 20.0]).unwrap();
        assert!(
            (deltas[1] - limit).abs() < 1e-6,
            "snr={snr}: {} vs {limit}",
            deltas[1]
        );
    }
    println!(
        "[PASS] criterion 4: Gaussian saturation equals (1/2) log2(1 + snr) within 1e-6 at rate sum 40"
    );
}

// -------------------------------------------------------------------------
// 5. Solver sweep against the closed-form binary boundary
// -------------------------------------------------------------------------

#[test]
fn criterion_5_solver_vs_closed_form() {
    let start = Instant::now();
    let source = JointPmf::binary_symmetric(0.1).unwrap();
    let model = BinaryModel::new(0.1, 2).unwrap();
    let template = {
        let mut c = BaConfig::new(vec![1.0, 1.0], vec![2, 2]).unwrap();
        c.seed = 7;
        c.restarts = 8;
        c
    };
    // Ten multiplier vectors spanning trivial through saturated solutions.
    let grid: Vec<Vec<f64>> = (0..10)
        .map(|i| {
            let b = 0.5 * 1.26f64.powi(i);
            vec![b, 2.0 * b]
        })
        .collect();
    let results = beta_sweep(&source, &grid, &template);

    let mut pairs = Vec::new();
    for (i, result) in results.iter().enumerate() {
        let r = result.as_ref().unwrap_or_else(|e| panic!("entry {i}: {e}"));
        let point = &r.region_point;
        // Per-stage relevances against the boundary at the achieved rates.
        let boundary = binary_max_relevance(&model, &point.rates).unwrap();
        for t in 0..2 {
            assert!(
                (point.relevances[t] - boundary[t]).abs() <= 0.02,
                "entry {i} stage {}: {} vs boundary {}",
                t + 1,
                point.relevances[t],
                boundary[t]
            );
        }
        pairs.push((point.cumulative_rate(2), point.relevances[1]));
    }
    // The Pareto-filtered (sum rate, final relevance) points are monotone.
    let front = pareto_front_rate_relevance(&pairs);
    assert!(!front.is_empty());
    for w in front.windows(2) {
        assert!(w[1].0 >= w[0].0 && w[1].1 >= w[0].1);
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!(
        "[PASS] criterion 5: 10-point sweep stays within 0.02 bits of the binary boundary ({} Pareto points) in {elapsed:?}",
        front.len()
    );
}

// -------------------------------------------------------------------------
// 6. Solver against the brute-force oracle
// -------------------------------------------------------------------------

/// Random source with a diagonal boost so the optimum is nontrivial.
fn correlated_source(seed: u64, nx: usize, ny: usize) -> JointPmf {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probs = vec![0.0; nx * ny];
    for x in 0..nx {
        for y in 0..ny {
            let boost = if x % ny == y { 1.5 } else { 0.1 };
            probs[x * ny + y] = 0.2 * rng.random::<f64>() + boost;
        }
    }
    let s: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= s);
    JointPmf::new(nx, ny, probs).unwrap()
}

#[test]
fn criterion_6_solver_vs_oracle() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for seed in [1u64, 2, 3] {
        for (nx, source_seed) in [(2usize, seed), (3usize, seed + 10)] {
            let source = correlated_source(source_seed, nx, 2);
            for betas in [vec![4.0], vec![3.0, 6.0]] {
                let stages = betas.len();
                let u_sizes = vec![2usize; stages];
                let spec = GridSpec::with_default_resolution(u_sizes.clone()).unwrap();
                let (oracle_obj, _) = oracle_min_objective(&source, &betas, &spec).unwrap();
                let mut config = BaConfig::new(betas.clone(), u_sizes).unwrap();
                config.seed = 7;
                config.restarts = 8;
                let result = ba_run(&source, &config).unwrap();
                let gap = (result.objective - oracle_obj).abs();
                worst = worst.max(gap);
                assert!(
                    gap <= 1e-2,
                    "seed {seed} {nx}x2 T={stages}: ba {} vs oracle {oracle_obj}",
                    result.objective
                );
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?}");
    println!(
        "[PASS] criterion 6: solver within 1e-2 of the oracle on 12 instances (worst gap {worst:.2e}) in {elapsed:?}"
    );
}

// -------------------------------------------------------------------------
// 7. Classification bound anchors and shape
// -------------------------------------------------------------------------

#[test]
fn criterion_7_classification_bound() {
    let grid: Vec<f64> = (0..50).map(|i| i as f64 * 0.05).collect();
    let p_list = [0.1, 0.2, 0.3];
    let mut all = Vec::new();
    for &p in &p_list {
        let curves = binary_error_curve(p, 3, &grid).unwrap();
        // Zero rate: exactly 1/2 at every stage.
        for curve in &curves {
            assert_eq!(curve.samples[0], (0.0, 0.5), "p={p} stage {}", curve.stage);
        }
        // Nonincreasing in rate, stage ordering.
        for curve in &curves {
            for w in curve.samples.windows(2) {
                assert!(w[1].1 <= w[0].1 + 1e-12);
            }
        }
        for t in 0..curves.len() - 1 {
            for (a, b) in curves[t].samples.iter().zip(&curves[t + 1].samples) {
                assert!(b.1 <= a.1 + 1e-12, "p={p} stage ordering");
            }
        }
        all.push(curves);
    }
    // Increasing in p at every (rate, stage).
    for pi in 0..p_list.len() - 1 {
        for (ca, cb) in all[pi].iter().zip(&all[pi + 1]) {
            for (a, b) in ca.samples.iter().zip(&cb.samples) {
                assert!(b.1 >= a.1 - 1e-12, "bound must grow with p");
            }
        }
    }
    // Asymptote for p = 0.1.
    let asymptote = 1.0 - (-h2(0.1).unwrap()).exp2();
    let saturated = binary_error_curve(0.1, 3, &[40.0]).unwrap();
    for curve in &saturated {
        assert!(
            (curve.samples[0].1 - asymptote).abs() < 1e-6,
            "stage {}: {} vs {asymptote}",
            curve.stage,
            curve.samples[0].1
        );
    }
    println!(
        "[PASS] criterion 7: classification bound anchors hold (R=0 gives 0.5, p=0.1 asymptote {asymptote:.6}, monotone in rate, stage, p)"
    );
}

// -------------------------------------------------------------------------
// 8. Randomized invariant suites
// -------------------------------------------------------------------------

#[test]
fn criterion_8_invariant_suites() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);

    // Mrs. Gerber inequality on 1,000 random binary cascade test channels.
    for _ in 0..1000 {
        let p = 0.5 * rng.random::<f64>();
        let a = rng.random::<f64>();
        let b = rng.random::<f64>();
        let source = JointPmf::binary_symmetric(p).unwrap();
        let q = [[1.0 - a, a], [b, 1.0 - b]];
        let mut probs = vec![0.0; 8];
        for x in 0..2 {
            for y in 0..2 {
                for u in 0..2 {
                    probs[x * 4 + y * 2 + u] = source.prob(x, y) * q[y][u];
                }
            }
        }
        let joint = Marginal::new(vec![2, 2, 2], probs).unwrap();
        let h_u = entropy(&joint.marginalize_keep(&[2]));
        let h_x_given_u = entropy(&joint.marginalize_keep(&[0, 2])) - h_u;
        let h_y_given_u = entropy(&joint.marginalize_keep(&[1, 2])) - h_u;
        let rhs = h2(star(h2_inv(h_y_given_u.clamp(0.0, 1.0)).unwrap(), p).unwrap()).unwrap();
        assert!(h_x_given_u >= rhs - 1e-9, "p={p} a={a} b={b}");
    }

    // Chain rule on 1,000 random small joints.
    for _ in 0..1000 {
        let shape = vec![2, 2, 3];
        let mut probs: Vec<f64> = (0..12).map(|_| 1e-3 + rng.random::<f64>()).collect();
        let sum: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|v| *v /= sum);
        let m = Marginal::new(shape, probs).unwrap();
        let i_a_bc = mutual_information_between(&m, 1);
        let i_a_c = mutual_information_between(&m.marginalize_keep(&[0, 2]), 1);
        let i_a_b_given_c = conditional_mi(&m);
        assert!((i_a_bc - (i_a_c + i_a_b_given_c)).abs() < 1e-9);
    }

    // h2 / h2_inv round trip on 1,000 samples.
    for _ in 0..1000 {
        let v = rng.random::<f64>();
        assert!((h2(h2_inv(v).unwrap()).unwrap() - v).abs() < 1e-9);
    }

    // Parametrization round trips on 200 samples (binary and Gaussian).
    for _ in 0..200 {
        let p = 0.49 * rng.random::<f64>();
        let mut alphas: Vec<f64> = (0..3).map(|_| 0.5 * rng.random::<f64>()).collect();
        alphas.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let model = BinaryModel::new(p, 3).unwrap();
        let mut rates = Vec::new();
        let mut prev = 0.0;
        for &a in &alphas {
            let cum = 1.0 - h2(a).unwrap();
            rates.push((cum - prev).max(0.0));
            prev = cum;
        }
        let deltas = binary_max_relevance(&model, &rates).unwrap();
        for (d, &a) in deltas.iter().zip(&alphas) {
            let expect = 1.0 - h2(star(a, p).unwrap()).unwrap();
            assert!((d - expect).abs() < 1e-9, "alpha round trip at p={p}");
        }

        let snr = 0.2 + 10.0 * rng.random::<f64>();
        let gmodel = GaussianModel::from_snr(snr, 3).unwrap();
        let grates: Vec<f64> = (0..3).map(|_| 0.05 + rng.random::<f64>()).collect();
        let gammas = sib_core::analytic::gamma_from_rates(&gmodel, &grates).unwrap();
        let gdeltas = gaussian_max_relevance(&gmodel, &grates).unwrap();
        let mut cum = 0.0;
        for ((&g, &d), &r) in gammas.values().iter().zip(&gdeltas).zip(&grates) {
            cum += r;
            let rate_back = 0.5 * ((g + gmodel.sigma_x2()) / (g - gmodel.sigma_w2())).log2();
            let delta_back = 0.5 * (1.0 + gmodel.sigma_x2() / g).log2();
            assert!((rate_back - cum).abs() < 1e-9, "gamma rate round trip");
            assert!((delta_back - d).abs() < 1e-9, "gamma relevance round trip");
        }
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!(
        "[PASS] criterion 8: invariant suites (1000 Gerber, 1000 chain-rule, 1000 round-trip, 200 parametrization) in {elapsed:?}"
    );
}

// -------------------------------------------------------------------------
// 9. CLI determinism
// -------------------------------------------------------------------------

fn run_cli(args: &[&str], out: &std::path::Path) -> Vec<u8> {
    let status = Command::new(env!("CARGO_BIN_EXE_sib"))
        .args(args)
        .args(["--out", out.to_str().unwrap()])
        .status()
        .expect("binary runs");
    assert!(status.success(), "command failed: {args:?}");
    std::fs::read(out).expect("output written")
}

#[test]
fn criterion_9_cli_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let source = dir.path().join("source.txt");
    std::fs::write(
        &source,
        "x_alphabet: 0 1\ny_alphabet: 0 1\njoint:\n0.45 0.05\n0.05 0.45\n",
    )
    .unwrap();
    let grid = dir.path().join("grid.txt");
    std::fs::write(&grid, "1.0,2.0\n4.0,8.0\n").unwrap();
    let source = source.to_str().unwrap().to_string();
    let grid = grid.to_str().unwrap().to_string();

    let commands: Vec<Vec<&str>> = vec![
        vec![
            "tradeoff", "--model", "binary", "--p", "0.2", "--fix", "2=0.11", "--grid", "100",
        ],
        vec![
            "tradeoff", "--model", "gaussian", "--snr-db", "5", "--fix", "2=0.5", "--grid", "100",
        ],
        vec![
            "ba", "--source", &source, "--betas", "4,8", "--seed", "7", "--restarts", "4",
        ],
        vec![
            "ba-sweep", "--source", &source, "--beta-grid", &grid, "--seed", "7", "--restarts",
            "2",
        ],
        vec![
            "classify-bound", "--p-list", "0.1,0.2,0.3", "--stages", "3", "--rate-grid", "0:2:25",
        ],
    ];
    for (i, args) in commands.iter().enumerate() {
        let first = run_cli(args, &dir.path().join(format!("a{i}.csv")));
        let second = run_cli(args, &dir.path().join(format!("b{i}.csv")));
        assert_eq!(first, second, "command {args:?} not byte-identical");
        assert!(!first.is_empty());
    }

    // The stdout-only command as well.
    let region = |_: usize| {
        Command::new(env!("CARGO_BIN_EXE_sib"))
            .args(["region-binary", "--p", "0.2", "--rates", "0.16,0.16"])
            .output()
            .expect("binary runs")
            .stdout
    };
    assert_eq!(region(0), region(1));
    println!("[PASS] criterion 9: all six commands byte-identical across repeated runs");
}
