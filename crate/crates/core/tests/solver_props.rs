mod common;

use common::{damped_newton, gauss_solve, max_abs_diff};
use implicit_core::builtins::{self, Builtin};
use implicit_core::example::{example_eval, example_jacobian, paper_example};
use implicit_core::halton::disc_points;
use implicit_core::implicit::{
    implicit_jacobian, reduced_system, solve_implicit, solve_on_grid, EliminationSection, ImplicitProblem, SolveError,
    SolverConfig,
};
use implicit_core::inverse::{invert_at, InverseProblem};
use implicit_core::linalg::{det, leading_principal_minors, Matrix, Vector};
use implicit_core::map::{BoxDomain, DifferentiableMap};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Linear {
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
}

/// Lower-triangular dominant `A` with every leading minor at least 0.5.
fn random_linear(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Linear {
    loop {
        let a: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| match j.cmp(&i) {
                        std::cmp::Ordering::Less => rng.random_range(-1.0..1.0),
                        std::cmp::Ordering::Equal => rng.random_range(0.8..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 },
                        std::cmp::Ordering::Greater => rng.random_range(-0.1..0.1),
                    })
                    .collect()
            })
            .collect();
        let minors = leading_principal_minors(&Matrix::from_rows(&a).unwrap()).unwrap();
        if minors.iter().all(|d| d.abs() >= 0.5) {
            let b = (0..m).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
            return Linear { a, b };
        }
    }
}

fn linear_problem(sys: &Linear, n: usize, m: usize) -> ImplicitProblem {
    let (a, b) = (sys.a.clone(), sys.b.clone());
    let (ja, jb) = (sys.a.clone(), sys.b.clone());
    let map = DifferentiableMap::implicit(n, m, BoxDomain::cube(n + m, -50.0, 50.0).unwrap(), move |x, y| {
        Ok((0..m)
            .map(|i| (0..m).map(|j| a[i][j] * y[j]).sum::<f64>() + (0..n).map(|j| b[i][j] * x[j]).sum::<f64>())
            .collect())
    })
    .unwrap()
    .with_jacobian(move |_, _| {
        let rows: Vec<Vec<f64>> = (0..m).map(|i| jb[i].iter().chain(&ja[i]).copied().collect()).collect();
        Matrix::from_rows(&rows).unwrap()
    });
    ImplicitProblem::new(map, Vector::zeros(n), Vector::zeros(m), SolverConfig::default()).unwrap()
}

#[test]
fn linear_systems_match_the_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for trial in 0..50 {
        let (n, m) = (rng.random_range(1..=2), rng.random_range(1..=3));
        let sys = random_linear(&mut rng, n, m);
        let p = linear_problem(&sys, n, m);
        for _ in 0..5 {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let bx: Vec<f64> = sys.b.iter().map(|row| -row.iter().zip(&x).map(|(u, v)| u * v).sum::<f64>()).collect();
            let expected = gauss_solve(&sys.a, &bx).unwrap();
            let v = solve_implicit(&p, &x).unwrap();
            assert!(v.residual <= m as f64 * 1e-11, "trial {trial}: {v:?}");
            let err = max_abs_diff(v.y.as_slice(), &expected);
            assert!(err <= 1e-9, "trial {trial} n={n} m={m}: {err}");
        }
    }
}

#[test]
fn circle_matches_damped_newton() {
    let p = builtins::circle_problem(SolverConfig::default());
    for k in 0..19 {
        let x = -0.9 + 0.1 * k as f64;
        let v = solve_implicit(&p, &[x]).unwrap();
        let newton = damped_newton(|y| vec![x * x + y[0] * y[0] - 1.0], |y| vec![vec![2.0 * y[0]]], &[1.0], 1e-14).unwrap();
        assert!((v.y[0] - newton[0]).abs() <= 1e-8, "x = {x}");
        assert!((v.y[0] - (1.0 - x * x).sqrt()).abs() <= 1e-9);
    }
}

#[test]
fn example_inversion_matches_damped_newton() {
    let p = InverseProblem::at_base_point(paper_example(), Vector::zeros(2), SolverConfig::default()).unwrap();
    for q in disc_points(30, 0.4) {
        let y = example_eval(q);
        let x = invert_at(&p, &y).unwrap();
        let newton = damped_newton(
            |z| {
                let f = example_eval([z[0], z[1]]);
                vec![f[0] - y[0], f[1] - y[1]]
            },
            |z| {
                let j = example_jacobian([z[0], z[1]]);
                vec![j.row(0).to_vec(), j.row(1).to_vec()]
            },
            &[0.0, 0.0],
            1e-13,
        )
        .unwrap();
        assert!(max_abs_diff(x.as_slice(), &newton) <= 1e-8, "{q:?}: {x:?} vs {newton:?}");
    }
}

fn matched_point(b: &Builtin, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let n = b.map.n();
    let x: Vec<f64> = (0..n).map(|_| rng.random_range(-0.3..0.3)).collect();
    let rest: Vec<f64> = b.seed_b.as_slice()[1..].iter().map(|s| s + rng.random_range(-0.3..0.3)).collect();
    (x, rest)
}

#[test]
fn reduction_preserves_leading_minors() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for b in [builtins::linear(), builtins::circle_pair(), builtins::triple()] {
        let m = b.map.m();
        let section = EliminationSection { seed: b.seed_b[0], config: SolverConfig::default() };
        let reduced = reduced_system(&b.map, section.clone()).unwrap();
        for _ in 0..20 {
            let (x, rest) = matched_point(&b, &mut rng);
            let y1 = section.solve(&b.map, &x, &rest).unwrap();
            let y: Vec<f64> = std::iter::once(y1).chain(rest.iter().copied()).collect();
            let fy = b.map.partial_y(&x, &y).unwrap();
            let reduced_fy = reduced.fd_jacobian(&x, &rest).unwrap().columns(x.len(), x.len() + m - 1);
            let pivot = fy.get(0, 0);
            for k in 1..m {
                let lhs = det(&reduced_fy.leading_block(k)).unwrap() * pivot;
                let rhs = det(&fy.leading_block(k + 1)).unwrap();
                let tol = 1e-4f64.max(1e-3 * rhs.abs());
                assert!((lhs - rhs).abs() <= tol, "{} k={k} at x={x:?} y={y:?}: {lhs} vs {rhs}", b.name);
            }
        }
    }
}

#[test]
fn reduction_rejects_single_unknown() {
    let section = EliminationSection { seed: 1.0, config: SolverConfig::default() };
    assert!(matches!(reduced_system(&builtins::circle().map, section), Err(SolveError::Precondition(_))));
}

fn solved_points(b: &Builtin) -> (ImplicitProblem, Vec<(Vec<f64>, Vec<f64>)>) {
    let p = ImplicitProblem::new(b.map.clone(), b.seed_a.clone(), b.seed_b.clone(), SolverConfig::default()).unwrap();
    let points = (0..8)
        .map(|k| {
            let x = vec![-0.35 + 0.1 * k as f64; b.map.n()];
            let v = solve_implicit(&p, &x).unwrap();
            assert!(v.residual <= b.map.m() as f64 * 1e-11);
            (x, v.y.into_vec())
        })
        .collect();
    (p, points)
}

#[test]
fn implicit_jacobian_matches_finite_differences_of_the_solver() {
    let h = 1e-4;
    for b in [builtins::circle(), builtins::linear(), builtins::circle_pair(), builtins::triple()] {
        let (p, points) = solved_points(&b);
        for (x, y) in points {
            let jg = implicit_jacobian(&p, &x, &y).unwrap();
            for j in 0..x.len() {
                let (mut xp, mut xm) = (x.clone(), x.clone());
                xp[j] += h;
                xm[j] -= h;
                let (gp, gm) = (solve_implicit(&p, &xp).unwrap().y, solve_implicit(&p, &xm).unwrap().y);
                for i in 0..y.len() {
                    let fd = (gp[i] - gm[i]) / (2.0 * h);
                    let tol = 1e-5 * (1.0 + jg.norm_inf());
                    assert!((jg.get(i, j) - fd).abs() <= tol, "{} at {x:?}: {} vs {fd}", b.name, jg.get(i, j));
                }
            }
        }
    }
}

#[test]
fn chain_rule_holds_at_solved_points() {
    for b in [builtins::circle(), builtins::linear(), builtins::circle_pair(), builtins::triple()] {
        let (p, points) = solved_points(&b);
        for (x, y) in points {
            let jg = implicit_jacobian(&p, &x, &y).unwrap();
            let fx = b.map.partial_x(&x, &y).unwrap();
            let fy = b.map.partial_y(&x, &y).unwrap();
            let defect = fx.sub(&fy.mul(&jg).unwrap().scale(-1.0)).unwrap().max_abs();
            assert!(defect <= 1e-8, "{} at {x:?}: {defect}", b.name);
        }
    }
}

#[test]
fn grid_with_and_without_continuation() {
    let p = builtins::circle_problem(SolverConfig::default());
    let grid: Vec<Vec<f64>> = (0..19).map(|k| vec![-0.9 + 0.1 * k as f64]).collect();
    for continuation in [false, true] {
        let out = solve_on_grid(&p, &grid, continuation);
        assert_eq!(out.len(), 19);
        for (g, x) in out.iter().zip(&grid) {
            assert_eq!(&g.x, x);
            let y = g.outcome.as_ref().unwrap().y[0];
            assert!((y - (1.0 - x[0] * x[0]).sqrt()).abs() <= 1e-9);
        }
    }
    let mixed = solve_on_grid(&p, &[vec![0.5], vec![1.5], vec![-0.5]], true);
    assert!(mixed[0].outcome.is_ok() && mixed[2].outcome.is_ok());
    assert!(matches!(mixed[1].outcome, Err(SolveError::Bracket { equation: 1, .. })));
    assert!(solve_on_grid(&p, &[], false).is_empty());
}
