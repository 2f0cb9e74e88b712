//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use manifold_quant::prelude::*;
use manifold_quant::tracker::report_to_csv;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn euclid(pc: &PointCloud) -> DistanceMatrix {
    pairwise_distances(pc, Metric::Euclidean)
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut mismatches = Vec::new();
    for case in 0..100u64 {
        let n = rng.random_range(2..=12usize);
        let dim = rng.random_range(2..=3usize);
        let rows = common::random_rows(n, dim, 1000 + case);
        let f = build_rips(
            &euclid(&PointCloud::from_rows(&rows).unwrap()),
            3,
            EpsMax::Auto,
        )
        .unwrap();
        let got: Vec<Vec<(f64, f64)>> = compute_persistence(&f)
            .unwrap()
            .iter()
            .map(|d| d.sorted_points())
            .collect();
        if got != common::oracle_diagrams(&rows, 3, None) {
            mismatches.push(case);
        }
    }
    let elapsed = start.elapsed();
    outcome(
        mismatches.is_empty() && elapsed < Duration::from_secs(60),
        format!("100 clouds, mismatches {mismatches:?}, {elapsed:.2?}"),
    )
}

fn square_h1() -> Outcome {
    let pc = PointCloud::from_rows(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
    let d = compute_persistence(&build_rips(&euclid(&pc), 2, EpsMax::Auto).unwrap()).unwrap();
    let h1 = d[1].sorted_points();
    let h0 = d[0].sorted_points();
    let h1_ok =
        h1.len() == 1 && (h1[0].0 - 1.0).abs() <= 1e-12 && (h1[0].1 - 2f64.sqrt()).abs() <= 1e-12;
    let h0_ok = h0.len() == 4
        && h0[..3]
            .iter()
            .all(|&(b, e)| b.abs() <= 1e-12 && (e - 1.0).abs() <= 1e-12)
        && h0[3].0.abs() <= 1e-12
        && h0[3].1 == f64::INFINITY;
    outcome(h1_ok && h0_ok, format!("H0 {h0:?} H1 {h1:?}"))
}

fn union_find_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut bad = Vec::new();
    for case in 0..50u64 {
        let n = rng.random_range(2..=50usize);
        let dim = rng.random_range(1..=4usize);
        let pc = PointCloud::from_rows(&common::random_rows(n, dim, 5000 + case)).unwrap();
        let dm = euclid(&pc);
        let eps = dm.max_entry() * rng.random_range(0.2..=1.0);
        let f = build_rips(&dm, 1, EpsMax::Value(eps)).unwrap();
        if compute_h0_unionfind(&dm, eps).sorted_points()
            != compute_persistence(&f).unwrap()[0].sorted_points()
        {
            bad.push(case);
        }
    }
    outcome(bad.is_empty(), format!("50 clouds, mismatches {bad:?}"))
}

fn trivial_diagram_distance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let k = rng.random_range(0..=40usize);
        let points: Vec<(f64, f64)> = (0..k)
            .map(|_| {
                let b = rng.random_range(0.0..5.0);
                (b, b + rng.random_range(1e-3..3.0))
            })
            .collect();
        let d = PersistenceDiagram::from_points(1, &points).unwrap();
        let empty = PersistenceDiagram::empty(1);
        for p in [1.0, 2.0] {
            let matched = wasserstein(&d, &empty, p, InfinitePolicy::Excluded).unwrap();
            let closed = wasserstein_to_trivial(&d, p, InfinitePolicy::Excluded).unwrap();
            worst = worst.max((matched - closed).abs());
            if p == 1.0 {
                let half: f64 = points.iter().map(|&(b, e)| e - b).sum::<f64>() / 2.0;
                worst = worst.max((closed - half).abs());
            }
        }
    }
    outcome(worst <= 1e-9, format!("max deviation {worst:e}"))
}

fn ratio(l: &[f64], k: usize) -> f64 {
    let next = l.get(k).copied().unwrap_or(0.0);
    l.get(k - 1).copied().unwrap_or(0.0) / next
}

fn betti_dominance() -> Outcome {
    let circle = generate(&ShapeSpec::new(ShapeKind::Circle, 200, 7).with_noise(0.01)).unwrap();
    let f = build_rips(&euclid(&circle), 2, EpsMax::Auto).unwrap();
    let l1 = compute_persistence(&f).unwrap()[1].lifespans_desc();
    let circle_ratio = ratio(&l1, 1);

    let sphere_cap = 1.0;
    let sphere = generate(&ShapeSpec::new(ShapeKind::Sphere, 300, 0)).unwrap();
    let f = build_rips(&euclid(&sphere), 3, EpsMax::Value(sphere_cap)).unwrap();
    let d = compute_persistence(&f).unwrap()[2].clone();
    let l2 = lifespans(&d, sphere_cap);
    let sphere_ratio = ratio(&l2, 1);

    let torus_cap = 1.2;
    let start = Instant::now();
    let torus = generate(&ShapeSpec::new(ShapeKind::Torus, 400, 0)).unwrap();
    let f = build_rips(&euclid(&torus), 2, EpsMax::Value(torus_cap)).unwrap();
    let d = compute_persistence(&f).unwrap()[1].clone();
    let torus_time = start.elapsed();
    let lt = lifespans(&d, torus_cap);
    let torus_ratio = ratio(&lt, 2);

    let pass = circle_ratio >= 5.0
        && sphere_ratio >= 3.0
        && torus_ratio >= 3.0
        && torus_time <= Duration::from_secs(600);
    outcome(
        pass,
        format!(
            "circle H1 {circle_ratio:.2}x, sphere H2 {sphere_ratio:.2}x, \
             torus H1 2nd/3rd {torus_ratio:.2}x ({:.3} vs {:.3}, {torus_time:.2?})",
            lt.get(1).copied().unwrap_or(0.0),
            lt.get(2).copied().unwrap_or(0.0),
        ),
    )
}

/// Lifespans with essential classes capped at the filtration threshold.
fn lifespans(d: &PersistenceDiagram, cap: f64) -> Vec<f64> {
    let mut l: Vec<f64> = InfinitePolicy::Capped(cap)
        .apply(d)
        .unwrap()
        .into_iter()
        .map(|(b, e)| e - b)
        .collect();
    l.sort_by(|a, b| b.total_cmp(a));
    l
}

fn id_bands() -> Outcome {
    let mle = |pc: &PointCloud| estimate_id_2nn(pc, 0.1, TwoNnMethod::Mle).unwrap().value;
    let mut failures = Vec::new();
    let mut ranges = Vec::new();
    let cases: [(&str, ShapeKind, usize, (f64, f64)); 3] = [
        ("cube2", ShapeKind::UniformCube(2), 2000, (1.8, 2.2)),
        ("cube5", ShapeKind::UniformCube(5), 5000, (4.5, 5.5)),
        ("swiss-roll", ShapeKind::SwissRoll, 2000, (1.7, 2.3)),
    ];
    for (name, kind, n, (lo, hi)) in cases {
        let values: Vec<f64> = (0..5)
            .map(|seed| mle(&generate(&ShapeSpec::new(kind, n, seed)).unwrap()))
            .collect();
        record(name, &values, lo, hi, &mut failures, &mut ranges);
    }
    let boxes: Vec<f64> = (0..5)
        .map(|seed| {
            let pc = generate(&ShapeSpec::new(ShapeKind::UniformCube(2), 10_000, seed)).unwrap();
            estimate_id_boxcount(&pc, 5, 0.5).unwrap().value
        })
        .collect();
    record("box-count", &boxes, 1.7, 2.2, &mut failures, &mut ranges);
    outcome(
        failures.is_empty(),
        format!("{} failing {failures:?}", ranges.join(", ")),
    )
}

fn record(
    name: &str,
    values: &[f64],
    lo: f64,
    hi: f64,
    failures: &mut Vec<String>,
    ranges: &mut Vec<String>,
) {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    ranges.push(format!("{name} [{min:.3}, {max:.3}]"));
    if min < lo || max > hi {
        failures.push(name.to_string());
    }
}

fn entropy_closed_forms() -> Outcome {
    let e = |points: &[(f64, f64)]| {
        persistence_entropy(
            &PersistenceDiagram::from_points(1, points).unwrap(),
            InfinitePolicy::Excluded,
        )
        .unwrap()
    };
    let a = e(&[(0.0, 1.0)]);
    let b = e(&[(0.0, 1.0), (2.0, 3.0)]);
    let c = e(&[(0.0, 1.0), (0.0, 3.0)]);
    let c_expected = -(0.25f64 * 0.25f64.ln() + 0.75 * 0.75f64.ln());
    let pass = a.abs() <= 1e-12
        && (b - std::f64::consts::LN_2).abs() <= 1e-12
        && (c - c_expected).abs() <= 1e-12;
    outcome(pass, format!("{a} {b} {c}"))
}

fn tracker_determinism() -> Outcome {
    let pc = generate(&ShapeSpec::new(ShapeKind::Torus, 120, 2)).unwrap();
    let cfg = AnalysisConfig {
        subsample: Some(100),
        seed: 9,
        ..AnalysisConfig::default()
    };
    let run = || track_clouds(&[("self".into(), pc.clone())], ("reference", &pc), &cfg).unwrap();
    let (first, second) = (run(), run());
    let g = &first.snapshots[0].gaps;
    let zero = g.id_2nn == 0.0
        && g.entropy
            .iter()
            .chain(&g.wasserstein_to_trivial)
            .chain(&g.bottleneck_to_trivial)
            .all(|&x| x == 0.0);
    let (a, b) = (report_to_csv(&first), report_to_csv(&second));
    outcome(
        zero && a == b,
        format!("zero gaps {zero}, identical csv {}", a == b),
    )
}

fn synthetic_convergence() -> Outcome {
    let n = 100;
    let target = generate(&ShapeSpec::new(ShapeKind::Circle, n, 21)).unwrap();
    let start = generate(&ShapeSpec::new(ShapeKind::GaussianBlob(2), n, 22)).unwrap();
    let snapshots: Vec<(String, PointCloud)> = (0..10)
        .map(|k| {
            let t = (k + 1) as f64 / 10.0;
            let flat = start
                .as_flat()
                .iter()
                .zip(target.as_flat())
                .map(|(a, b)| (1.0 - t) * a + t * b)
                .collect();
            (format!("step_{k}"), PointCloud::from_flat(flat, 2).unwrap())
        })
        .collect();
    let report = track_clouds(&snapshots, ("circle", &target), &AnalysisConfig::default()).unwrap();
    let first = report.snapshots[0].gaps.wasserstein_to_trivial[1];
    let last = report.snapshots[9].gaps.wasserstein_to_trivial[1];
    outcome(
        last < first,
        format!("first-step gap {first:.4}, final-step gap {last:.4}"),
    )
}

fn cifar_cats() -> Option<Outcome> {
    let path = std::env::var_os("MFQ_CIFAR_CATS")?;
    let result = load_pointcloud_auto(&path)
        .and_then(|pc| subsample(&pc, 2000.min(pc.len()), 0))
        .and_then(|pc| estimate_id_2nn(&pc, 0.1, TwoNnMethod::Mle));
    Some(match result {
        Ok(est) => outcome(
            (18.0..=28.0).contains(&est.value),
            format!("2NN-MLE {:.3}", est.value),
        ),
        Err(e) => outcome(false, e.to_string()),
    })
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("oracle equivalence", oracle_equivalence),
        ("square H1", square_h1),
        ("union-find agreement", union_find_agreement),
        ("trivial-diagram distance", trivial_diagram_distance),
        ("betti dominance", betti_dominance),
        ("intrinsic-dimension bands", id_bands),
        ("entropy closed forms", entropy_closed_forms),
        ("tracker determinism", tracker_determinism),
        ("synthetic convergence", synthetic_convergence),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {:>2} {status} {name}: {} [{:.2?}]",
            i + 1,
            o.detail,
            start.elapsed()
        );
        failed += usize::from(!o.pass);
    }
    match cifar_cats() {
        Some(o) => println!(
            "criterion 10 {} cifar cats (optional, non-gating): {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        ),
        None => println!(
            "criterion 10 SKIP cifar cats (optional): set MFQ_CIFAR_CATS to a packed cloud"
        ),
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
