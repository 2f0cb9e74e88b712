use manifold_quant::intrinsic_dim::IdDiagnostics;
use manifold_quant::prelude::*;
use proptest::prelude::*;

fn mle(pc: &PointCloud) -> f64 {
    estimate_id_2nn(pc, 0.1, TwoNnMethod::Mle).unwrap().value
}

fn rotate_translate(pc: &PointCloud, angle: f64, shift: [f64; 3]) -> PointCloud {
    let (s, c) = angle.sin_cos();
    let rows: Vec<[f64; 3]> = pc
        .rows()
        .map(|p| {
            [
                c * p[0] - s * p[1] + shift[0],
                s * p[0] + c * p[1] + shift[1],
                p[2] + shift[2],
            ]
        })
        .collect();
    PointCloud::from_rows(&rows).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn invariant_under_isometry_and_scale(
        seed in any::<u64>(),
        angle in 0.0..std::f64::consts::TAU,
        shift in prop::array::uniform3(-5.0..5.0f64),
        s in 0.1..10.0f64,
    ) {
        let pc = generate(&ShapeSpec::new(ShapeKind::UniformCube(3), 300, seed)).unwrap();
        let base = mle(&pc);
        prop_assert!((mle(&rotate_translate(&pc, angle, shift)) - base).abs() <= 1e-9);
        prop_assert!((mle(&pc.map_coords(|x| x * s).unwrap()) - base).abs() <= 1e-9);
    }

    #[test]
    fn box_count_invariant_under_scale(seed in any::<u64>(), s in 0.1..10.0f64) {
        let pc = generate(&ShapeSpec::new(ShapeKind::UniformCube(2), 2000, seed)).unwrap();
        let a = estimate_id_boxcount(&pc, 4, 0.5).unwrap().value;
        let b = estimate_id_boxcount(&pc.map_coords(|x| x * s).unwrap(), 4, 0.5).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-9);
    }
}

#[test]
fn cube_bands_across_seeds() {
    for d in [1usize, 2, 3, 5] {
        for seed in 0..5 {
            let pc = generate(&ShapeSpec::new(ShapeKind::UniformCube(d), 5000, seed)).unwrap();
            let est = mle(&pc);
            let rel = (est - d as f64).abs() / d as f64;
            assert!(rel <= 0.15, "d={d} seed={seed}: estimate {est}");
        }
    }
}

#[test]
fn mle_and_fit_agree() {
    for (kind, n) in [
        (ShapeKind::UniformCube(2), 2000),
        (ShapeKind::UniformCube(4), 3000),
        (ShapeKind::SwissRoll, 2000),
    ] {
        let pc = generate(&ShapeSpec::new(kind, n, 5)).unwrap();
        let a = mle(&pc);
        let b = estimate_id_2nn(&pc, 0.1, TwoNnMethod::Fit).unwrap().value;
        assert!((a - b).abs() / a <= 0.10, "{kind}: mle {a} fit {b}");
    }
}

#[test]
fn discard_changes_sample_size() {
    let pc = generate(&ShapeSpec::new(ShapeKind::UniformCube(2), 1000, 1)).unwrap();
    let est = estimate_id_2nn(&pc, 0.1, TwoNnMethod::Mle).unwrap();
    assert_eq!(est.n_used, 900);
    match est.diagnostics {
        IdDiagnostics::TwoNn { n_discarded, .. } => assert_eq!(n_discarded, 100),
        other => panic!("unexpected diagnostics {other:?}"),
    }
}

#[test]
fn box_count_on_a_segment() {
    let line = generate(&ShapeSpec::new(ShapeKind::UniformCube(1), 10_000, 2)).unwrap();
    let rows: Vec<[f64; 3]> = line.rows().map(|p| [p[0], 0.5 * p[0], -p[0]]).collect();
    let pc = PointCloud::from_rows(&rows).unwrap();
    let est = estimate_id_boxcount(&pc, 5, 0.5).unwrap();
    assert!((0.85..=1.15).contains(&est.value), "{}", est.value);
}

#[test]
fn box_count_on_the_unit_square() {
    let pc = generate(&ShapeSpec::new(ShapeKind::UniformCube(2), 10_000, 4)).unwrap();
    let est = estimate_id_boxcount(&pc, 5, 0.5).unwrap();
    assert!((1.7..=2.2).contains(&est.value), "{}", est.value);
    match est.diagnostics {
        IdDiagnostics::BoxCount {
            scales,
            counts,
            r_squared,
        } => {
            assert_eq!(scales.len(), 5);
            assert!(counts.windows(2).all(|w| w[0] <= w[1]));
            assert!(r_squared > 0.99);
        }
        other => panic!("unexpected diagnostics {other:?}"),
    }
}

#[test]
fn circle_is_one_dimensional() {
    let pc = generate(&ShapeSpec::new(ShapeKind::Circle, 200, 7)).unwrap();
    let est = mle(&pc);
    assert!((0.8..=1.2).contains(&est), "{est}");
}

#[test]
fn duplicates_are_degenerate() {
    let pc = PointCloud::from_rows(&[[0.0, 0.0], [1.0, 1.0], [0.0, 0.0], [2.0, 0.5]]).unwrap();
    let err = estimate_id_2nn(&pc, 0.0, TwoNnMethod::Mle).unwrap_err();
    assert_eq!(err.kind(), "degenerate-input");
    assert!(err.to_string().contains('0') && err.to_string().contains('2'));
}
