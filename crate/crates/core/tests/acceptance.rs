//! Acceptance suite. Each test prints one `PASS`/`FAIL` line and then
//! asserts, so `cargo test --test acceptance -- --nocapture` gives a summary.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use gbtmark::attacks::AttackKind;
use gbtmark::bench::{bench_dir, BenchConfig, BenchReport, Strength};
use gbtmark::codec::{embed, extract, sequential_assignment, WatermarkBits};
use gbtmark::imaging::{read_image, Plane, RasterImage};
use gbtmark::metrics::{ber, nc, psnr, ssim};
use gbtmark::optimizer::{fitness_value, woa_run, OptimizeConfig, WoaConfig};
use gbtmark::transforms::{
    build_graph, dwt2_haar, gbt2_forward, gbt2_inverse, idwt2_haar, svd, svd_reconstruct,
    GraphKind, GraphPolicy,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DESK_SEED: u64 = 2024;

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

fn hosts() -> Vec<(String, RasterImage)> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(data_dir().join("hosts"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            (name, read_image(p).unwrap())
        })
        .collect()
}

fn verdict(id: u32, name: &str, pass: bool, detail: String) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("acceptance {id} [{tag}] {name}: {detail}");
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn random_block(rng: &mut ChaCha8Rng, n: usize) -> Plane {
    Plane::from_fn(n, n, |_, _| rng.random_range(0.0..255.0))
}

fn rel(err: f64, scale: f64) -> f64 {
    err / scale.max(1e-300)
}

#[test]
fn c1_lossless_round_trip() {
    let start = Instant::now();
    let policy = GraphPolicy::default_uniform();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut runs = 0;
    let mut worst = 0.0f64;
    for (_, host) in hosts() {
        for _ in 0..10 {
            let wm = WatermarkBits::random(20, 20, &mut rng);
            let (marked, key) = embed(&host, &wm, &sequential_assignment(400, 10.0), &policy).unwrap();
            let got = extract(&marked, &key, &policy).unwrap();
            worst = worst.max(ber(&wm, &got).unwrap());
            runs += 1;
        }
    }
    let elapsed = start.elapsed();
    verdict(
        1,
        "lossless round trip",
        runs == 50 && worst == 0.0 && elapsed < Duration::from_secs(10),
        format!("{runs} embeddings, max BER {worst}, {:.2} s", elapsed.as_secs_f64()),
    );
}

fn desk_report() -> &'static (BenchReport, Duration) {
    static REPORT: OnceLock<(BenchReport, Duration)> = OnceLock::new();
    REPORT.get_or_init(|| {
        let wm = WatermarkBits::from_image(&read_image(data_dir().join("watermarks/horse20.png")).unwrap());
        let mut cfg = BenchConfig::new(
            Strength::Optimized(OptimizeConfig { population: 20, max_iter: 50, ..Default::default() }),
            DESK_SEED,
        );
        // both the report columns and the objective's attacks
        cfg.attacks.push(AttackKind::AverageFilter.default_spec(DESK_SEED));
        let start = Instant::now();
        let report = bench_dir(&data_dir().join("hosts"), &wm, &cfg, None).unwrap();
        let elapsed = start.elapsed();
        print!("{}", report.to_table());
        (report, elapsed)
    })
}

#[test]
fn c2_imperceptibility_target() {
    let (report, elapsed) = desk_report();
    let min = report.rows.iter().map(|r| r.psnr).fold(f64::INFINITY, f64::min);
    let below = report.rows.iter().filter(|r| r.psnr < 45.0).count();
    let pass = report.failures.is_empty()
        && report.rows.len() == 5
        && min >= 45.0
        && *elapsed < Duration::from_secs(30 * 60);
    verdict(
        2,
        "imperceptibility target",
        pass,
        format!(
            "min PSNR {min:.6} dB, {below} of {} hosts below 45 dB, {:.1} s",
            report.rows.len(),
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn c3_robustness_envelope() {
    let (report, _) = desk_report();
    let avg = report.average.as_ref().expect("no successful hosts");
    let suite: Vec<&str> = AttackKind::FITNESS_SUITE.iter().map(|k| k.name()).collect();
    let per_attack: Vec<(String, f64)> = report
        .columns
        .iter()
        .cloned()
        .zip(avg.ber.iter().copied())
        .filter(|(c, _)| suite.contains(&c.as_str()))
        .collect();
    assert_eq!(per_attack.len(), suite.len());
    let worst = per_attack.iter().cloned().fold((String::new(), 0.0), |a, b| if b.1 > a.1 { b } else { a });
    let overall = per_attack.iter().map(|p| p.1).sum::<f64>() / per_attack.len() as f64;
    let pass = report.failures.is_empty() && worst.1 <= 0.15 && overall <= 0.10;
    let clean = report.rows.iter().map(|r| r.ber[0]).fold(0.0, f64::max);
    verdict(
        3,
        "robustness envelope",
        pass,
        format!(
            "worst per-attack BER {:.4} ({}), average {overall:.4}, worst no-attack BER {clean:.4}",
            worst.1, worst.0
        ),
    );
}

#[test]
fn c4_fitness_coherence() {
    let cases = [
        (44.0, 0.9, 45.0, 10.0, 10.1),
        (45.0, 1.0, 45.0, 10.0, 0.0),
        (47.5, 0.75, 45.0, 10.0, 25.25),
        (30.0, 0.5, 45.0, 1.0, 15.5),
    ];
    let mut worst = 0.0f64;
    for (p, n, t, w, want) in cases {
        worst = worst.max((fitness_value(p, n, t, w) - want).abs());
    }

    let mut failures = 0;
    let mut runner = proptest::test_runner::TestRunner::new(ProptestConfig { cases: 2000, failure_persistence: None, ..ProptestConfig::default() });
    let strategy = (
        prop_oneof![Just(45.0), 20.0f64..80.0],
        proptest::collection::vec(prop_oneof![Just(1.0), 0.0f64..1.0], 1..8),
    );
    let result = runner.run(&strategy, |(psnr, ncs)| {
        let mean = ncs.iter().sum::<f64>() / ncs.len() as f64;
        let f = fitness_value(psnr, mean, 45.0, 10.0);
        let ideal = psnr == 45.0 && ncs.iter().all(|&x| x == 1.0);
        prop_assert_eq!(f == 0.0, ideal);
        prop_assert!(f >= 0.0);
        Ok(())
    });
    if result.is_err() {
        failures += 1;
    }
    verdict(
        4,
        "fitness coherence",
        worst <= 1e-12 && failures == 0,
        format!("max substitution error {worst:e}, zero-iff-ideal property {}", if failures == 0 { "held" } else { "violated" }),
    );
}

fn dct2_column(n: usize, k: usize) -> Vec<f64> {
    let scale = if k == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
    (0..n)
        .map(|i| scale * (PI * (i as f64 + 0.5) * k as f64 / n as f64).cos())
        .collect()
}

#[test]
fn c5_transform_suite() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g8 = build_graph(8, GraphKind::PathUniform, None).unwrap();
    let g4 = build_graph(4, GraphKind::PathUniform, None).unwrap();
    let (mut dwt_pr, mut dwt_energy, mut gbt_energy, mut gbt_inv, mut svd_rec) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let block = random_block(&mut rng, 8);
        let norm = block.frobenius_norm();
        let energy = block.sum_of_squares();
        let bands = dwt2_haar(&block).unwrap();
        dwt_pr = dwt_pr.max(rel(idwt2_haar(&bands).unwrap().max_abs_diff(&block), norm));
        dwt_energy = dwt_energy.max(rel((bands.sum_of_squares() - energy).abs(), energy));

        let c = gbt2_forward(&block, &g8).unwrap();
        gbt_energy = gbt_energy.max(rel((c.sum_of_squares() - energy).abs(), energy));
        gbt_inv = gbt_inv.max(rel(gbt2_inverse(&c, &g8).unwrap().max_abs_diff(&block), norm));

        let ll_c = gbt2_forward(&bands.ll, &g4).unwrap();
        for m in [&block, &ll_c] {
            let t = svd(m).unwrap();
            svd_rec = svd_rec.max(rel(svd_reconstruct(&t).unwrap().max_abs_diff(m), m.frobenius_norm()));
        }
    }

    let mut dct = 0.0f64;
    for g in [&g4, &g8] {
        let n = g.size();
        for k in 0..n {
            let want = dct2_column(n, k);
            let got = g.basis.column(k);
            let plus = got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let minus = got.iter().zip(&want).map(|(a, b)| (a + b).abs()).fold(0.0, f64::max);
            dct = dct.max(plus.min(minus));
        }
    }
    let mut eig = 0.0f64;
    for n in [2, 4, 8, 16] {
        let g = build_graph(n, GraphKind::PathUniform, None).unwrap();
        for (k, &lambda) in g.eigenvalues.iter().enumerate() {
            eig = eig.max((lambda - (2.0 - 2.0 * (k as f64 * PI / n as f64).cos())).abs());
        }
    }
    let elapsed = start.elapsed();
    let worst = [dwt_pr, dwt_energy, gbt_energy, gbt_inv, svd_rec, dct, eig].into_iter().fold(0.0, f64::max);
    verdict(
        5,
        "transform property suite",
        worst <= 1e-9 && elapsed < Duration::from_secs(10),
        format!(
            "dwt pr {dwt_pr:.1e}, dwt energy {dwt_energy:.1e}, gbt energy {gbt_energy:.1e}, gbt inverse {gbt_inv:.1e}, svd {svd_rec:.1e}, dct {dct:.1e}, eigenvalues {eig:.1e}, {:.2} s",
            elapsed.as_secs_f64()
        ),
    );
}

/// Largest singular value by power iteration on `MᵀM`.
fn spectral_norm(m: &Plane) -> f64 {
    let mtm = m.transpose().matmul(m).unwrap();
    let n = mtm.width();
    let mut v = vec![1.0; n];
    let mut lambda = 0.0;
    for _ in 0..10_000 {
        let w: Vec<f64> = (0..n).map(|r| (0..n).map(|c| mtm.get(r, c) * v[c]).sum()).collect();
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        v = w.iter().map(|x| x / norm).collect();
        if (norm - lambda).abs() <= 1e-15 * norm {
            lambda = norm;
            break;
        }
        lambda = norm;
    }
    lambda.sqrt()
}

#[test]
fn c6_spectral_perturbation() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let graph = build_graph(4, GraphKind::PathUniform, None).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let block = random_block(&mut rng, 8);
        let alpha = rng.random_range(0.5..50.0);
        let ll = dwt2_haar(&block).unwrap().ll;
        let mut t = svd(&gbt2_forward(&ll, &graph).unwrap()).unwrap();
        t.s[0] += alpha;
        let ll2 = gbt2_inverse(&svd_reconstruct(&t).unwrap(), &graph).unwrap();
        let change = spectral_norm(&ll2.sub(&ll).unwrap());
        worst = worst.max((change - alpha).abs());
    }
    verdict(
        6,
        "spectral perturbation",
        worst <= 1e-9,
        format!("max |‖ΔLL‖₂ − α| = {worst:.2e} over 100 blocks"),
    );
}

#[test]
fn c7_woa_sanity() {
    let start = Instant::now();
    let sphere = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
    let mut converged = 0;
    let mut monotone = 0;
    let mut worst = 0.0f64;
    for seed in 0..20 {
        let cfg = WoaConfig {
            population: 30,
            max_iter: 500,
            bounds: vec![(-10.0, 10.0); 10],
            spiral_constant: 1.0,
            seed,
        };
        let out = woa_run(&sphere, &cfg, None).unwrap();
        worst = worst.max(out.best_fitness);
        if out.best_fitness < 1e-3 {
            converged += 1;
        }
        if out.history.windows(2).all(|w| w[1].best_fitness <= w[0].best_fitness) {
            monotone += 1;
        }
    }
    let elapsed = start.elapsed();
    verdict(
        7,
        "whale optimizer sanity",
        converged >= 19 && monotone == 20 && elapsed < Duration::from_secs(30),
        format!(
            "{converged}/20 below 1e-3 (worst {worst:.2e}), {monotone}/20 non-increasing, {:.2} s",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn c8_metric_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut exact = 0;
    for _ in 0..1000 {
        let (w, h) = (rng.random_range(1..=32), rng.random_range(1..=32));
        let a = WatermarkBits::random(w, h, &mut rng);
        let b = WatermarkBits::random(w, h, &mut rng);
        if nc(&a, &b).unwrap() + ber(&a, &b).unwrap() == 1.0 {
            exact += 1;
        }
    }
    let data: Vec<u8> = (0..64 * 64 * 3).map(|_| rng.random_range(0..255)).collect();
    let x = RasterImage::new(64, 64, 3, data.clone()).unwrap();
    let y = RasterImage::new(64, 64, 3, data.iter().map(|v| v + 1).collect()).unwrap();
    let p = psnr(&x, &y).unwrap();
    let s = ssim(&x, &x).unwrap();
    verdict(
        8,
        "metric identities",
        exact == 1000 && (p - 48.1308).abs() <= 1e-3 && s == 1.0,
        format!("nc+ber exact {exact}/1000, psnr(+1) {p:.4} dB, ssim(x,x) {s}"),
    );
}

#[test]
fn c9_bench_determinism() {
    let wm = WatermarkBits::from_image(&read_image(data_dir().join("watermarks/horse20.png")).unwrap());
    let cfg = BenchConfig::new(
        Strength::Optimized(OptimizeConfig { population: 4, max_iter: 3, ..Default::default() }),
        99,
    );
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| bench_dir(&data_dir().join("hosts"), &wm, &cfg, None).unwrap().to_json().unwrap())
    };
    let many = std::thread::available_parallelism().map_or(4, |n| n.get().max(4));
    let a = run(many);
    let b = run(many);
    let c = run(1);
    verdict(
        9,
        "bench determinism",
        a == b && a == c,
        format!(
            "repeat run {}, 1 vs {many} threads {} ({} bytes)",
            if a == b { "identical" } else { "differs" },
            if a == c { "identical" } else { "differs" },
            a.len()
        ),
    );
}
