use implicit_core::audit::{
    audit_mean_value_matrix, audit_mean_value_pairs, audit_minors, audit_mixed_determinant, SampleBox, Verdict,
};
use implicit_core::builtins;
use implicit_core::example::paper_example;
use implicit_core::inverse::embed;
use implicit_core::map::{BoxDomain, DifferentiableMap};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn example_box() -> SampleBox {
    SampleBox::cube(2, -0.7, 0.7).unwrap()
}

#[test]
fn embedded_example_minors_respect_the_bounds() {
    let phi = embed(&paper_example()).unwrap();
    let region = SampleBox::new(vec![-1.0, -1.0, -0.7, -0.7], vec![1.0, 1.0, 0.7, 0.7]).unwrap();
    let reports = audit_minors(&phi, &region, 2000).unwrap();
    assert_eq!(reports.len(), 2);
    assert!(reports[0].min_abs >= 3.0 && reports[1].min_abs >= 5.0, "{reports:?}");
    assert!(reports.iter().all(|r| r.verdict == Verdict::NoViolationFound && r.skipped == 0));
}

#[test]
fn mixed_determinant_on_the_example() {
    let r = audit_mixed_determinant(&paper_example(), &example_box(), 5000, 9).unwrap();
    assert_eq!(r.trials, 5000);
    assert!(r.min_abs_det >= 5.0 - 1e-12, "{r:?}");
    assert_eq!(r.verdict, Verdict::NoViolationFound);
    assert_eq!(r.worst.len(), 4);
}

#[test]
fn constant_jacobian_gives_det_a_in_every_trial() {
    let b = builtins::linear();
    let region = SampleBox::cube(3, -5.0, 5.0).unwrap();
    let r = audit_mixed_determinant(&b.map, &region, 500, 3).unwrap();
    assert_eq!(r.min_abs_det, 6.0);
    assert!(!r.sign_change);
}

#[test]
fn sign_changing_entry_is_refuted() {
    let f = DifferentiableMap::implicit(1, 2, BoxDomain::cube(3, -1.0, 1.0).unwrap(), |x, y| {
        Ok(vec![y[0] * y[0] * y[0] - 0.25 * y[0] + x[0], y[1]])
    })
    .unwrap();
    let r = audit_mixed_determinant(&f, &SampleBox::cube(3, -1.0, 1.0).unwrap(), 200, 5).unwrap();
    assert!(r.sign_change);
    assert_eq!(r.verdict, Verdict::ViolationFound, "{r:?}");
}

#[test]
fn identity_block_and_square_first() {
    let f = DifferentiableMap::implicit(1, 3, BoxDomain::cube(4, -2.0, 2.0).unwrap(), |_, y| Ok(y.to_vec())).unwrap();
    for r in audit_minors(&f, &SampleBox::cube(4, -2.0, 2.0).unwrap(), 50).unwrap() {
        assert!((r.min_abs - 1.0).abs() < 1e-9, "{r:?}");
    }
    let b = builtins::square_first();
    let r = audit_minors(&b.map, &SampleBox::cube(3, -1.0, 1.0).unwrap(), 100).unwrap();
    assert_eq!(r[0].verdict, Verdict::ViolationFound);
    assert!(r[0].argmin[1].abs() < 1e-6, "{:?}", r[0]);
}

#[test]
fn reports_are_reproducible() {
    let f = paper_example();
    assert_eq!(audit_minors(&f, &example_box(), 700).unwrap(), audit_minors(&f, &example_box(), 700).unwrap());
    let a = audit_mixed_determinant(&f, &example_box(), 300, 77).unwrap();
    let b = audit_mixed_determinant(&f, &example_box(), 300, 77).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.min_abs_det.to_bits(), b.min_abs_det.to_bits());
    let c = audit_mean_value_matrix(&f, &example_box(), 10, 4, 1e-7).unwrap();
    assert_eq!(c, audit_mean_value_matrix(&f, &example_box(), 10, 4, 1e-7).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn larger_budgets_never_raise_the_minimum(b1 in 1usize..400, extra in 0usize..400) {
        let b2 = b1 + extra;
        for f in [paper_example(), builtins::triple().map] {
            let region = SampleBox::from(f.domain());
            let small = audit_minors(&f, &region, b1).unwrap();
            let large = audit_minors(&f, &region, b2).unwrap();
            for (s, l) in small.iter().zip(&large) {
                prop_assert!(l.min_abs <= s.min_abs);
            }
        }
    }
}

#[test]
fn mean_value_points_on_simple_maps() {
    let square = DifferentiableMap::pure(1, BoxDomain::cube(1, -2.0, 2.0).unwrap(), |x| Ok(vec![x[0] * x[0]]))
        .unwrap()
        .with_jacobian(|x, _| implicit_core::Matrix::from_rows(&[[2.0 * x[0]]]).unwrap());
    let r = audit_mean_value_pairs(&square, &[(vec![0.0], vec![1.0])], 1e-12).unwrap();
    assert_eq!(r.rows_verified, 1);
    assert!((r.points[0][0] - 0.5).abs() < 1e-9, "{r:?}");

    let b = builtins::linear();
    let r = audit_mean_value_matrix(&b.map, &SampleBox::cube(3, -5.0, 5.0).unwrap(), 20, 1, 1e-12).unwrap();
    assert_eq!(r.rows_verified, 40);
    assert!(r.failures.is_empty() && r.max_residual <= 1e-12, "{r:?}");
}

#[test]
fn mean_value_points_for_the_example() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let mut disc = || loop {
        let p = vec![rng.random_range(-0.4..0.4), rng.random_range(-0.4..0.4)];
        if f64::hypot(p[0], p[1]) < 0.4 {
            return p;
        }
    };
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..50).map(|_| (disc(), disc())).collect();
    let r = audit_mean_value_pairs(&paper_example(), &pairs, 1e-7).unwrap();
    assert_eq!(r.segments, 50);
    assert!(r.failures.is_empty(), "{:?}", r.failures);
    assert_eq!(r.rows_verified, 100);
    assert!(r.max_residual <= 1e-7);
}
