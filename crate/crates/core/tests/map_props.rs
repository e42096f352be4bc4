use implicit_core::builtins::{builtin, NAMES};
use implicit_core::example::paper_example;
use implicit_core::map::DifferentiableMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random point of the domain, shrunk towards its center so that
/// `p + h` stays inside for small `h`.
fn interior_point(f: &DifferentiableMap, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let d = f.domain();
    d.lower()
        .iter()
        .zip(d.upper())
        .map(|(lo, hi)| {
            let (c, w) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            c + 0.9 * w * rng.random_range(-1.0..1.0)
        })
        .collect()
}

#[test]
fn finite_differences_match_analytic_jacobians() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for name in NAMES {
        let f = builtin(name).unwrap().map;
        for _ in 0..100 {
            let p = interior_point(&f, &mut rng);
            let (x, y) = p.split_at(f.n());
            let j = f.jacobian(x, y).unwrap();
            let fd = f.fd_jacobian(x, y).unwrap();
            let tol = 1e-5f64.max(1e-4 * j.norm_inf());
            let err = j.sub(&fd).unwrap().max_abs();
            assert!(err <= tol, "{name} at {p:?}: {err} > {tol}");
        }
    }
}

#[test]
fn jacobian_is_the_two_blocks_side_by_side() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for name in NAMES {
        let f = builtin(name).unwrap().map;
        if f.is_pure() {
            continue;
        }
        let p = interior_point(&f, &mut rng);
        let (x, y) = p.split_at(f.n());
        let joined = f.partial_x(x, y).unwrap().hstack(&f.partial_y(x, y).unwrap()).unwrap();
        assert_eq!(joined, f.jacobian(x, y).unwrap(), "{name}");
    }
}

fn linearization_residual(f: &DifferentiableMap, p: &[f64], dir: &[f64], h: f64) -> f64 {
    let n = f.n();
    let q: Vec<f64> = p.iter().zip(dir).map(|(a, d)| a + h * d).collect();
    let (fp, fq) = (f.evaluate(&p[..n], &p[n..]).unwrap(), f.evaluate(&q[..n], &q[n..]).unwrap());
    let step: Vec<f64> = dir.iter().map(|d| h * d).collect();
    let jh = f.jacobian(&p[..n], &p[n..]).unwrap().mul_vec(&step).unwrap();
    let norm = step.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    fq.iter().zip(&fp).zip(&jh).fold(0.0f64, |a, ((q, p), j)| a.max((q - p - j).abs())) / norm
}

#[test]
fn linearization_residual_shrinks_with_the_step() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for name in NAMES {
        let f = builtin(name).unwrap().map;
        for _ in 0..20 {
            let mut p = interior_point(&f, &mut rng);
            if name == "paper-example" {
                // Keep away from the origin, where the scale of variation is 1/r^2.
                p = p.iter().map(|v| 0.3 + 0.3 * v.abs()).collect();
            }
            let dir: Vec<f64> = (0..p.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let r: Vec<f64> = [1e-2, 1e-3, 1e-4].iter().map(|&h| linearization_residual(&f, &p, &dir, h)).collect();
            assert!(r[2] < 1e-3, "{name} at {p:?}: {r:?}");
            // Affine maps only show rounding noise of order eps |F| / h.
            assert!(r[2] <= r[0].max(1e-9), "{name} at {p:?}: {r:?}");
        }
    }
}

#[test]
fn example_map_is_differentiable_at_the_origin() {
    let f = paper_example();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..20 {
        let dir = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let r: Vec<f64> = [1e-2, 1e-3, 1e-4].iter().map(|&h| linearization_residual(&f, &[0.0, 0.0], &dir, h)).collect();
        assert!(r[1] < 1e-3 && r[2] < 1e-3, "{r:?}");
    }
}
