//! Named test problems with analytic Jacobians.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::example::paper_example;
use crate::implicit::{ImplicitProblem, SolverConfig};
use crate::linalg::{Matrix, Vector};
use crate::map::{BoxDomain, DifferentiableMap};

/// A registered map with a known point on its zero set.
///
/// For implicit maps `(seed_a, seed_b)` satisfies `F(a, b) = 0`. For pure
/// maps `seed_a` is a base point `x0` and `seed_b` its image `F(x0)`.
#[derive(Clone, Debug)]
pub struct Builtin {
    pub name: &'static str,
    pub description: &'static str,
    pub map: DifferentiableMap,
    pub seed_a: Vector,
    pub seed_b: Vector,
}

pub const NAMES: [&str; 9] = [
    "circle",
    "linear",
    "circle-pair",
    "triple",
    "square-first",
    "paper-example",
    "identity",
    "double",
    "cubic-shear",
];

pub fn builtin(name: &str) -> Option<Builtin> {
    Some(match name {
        "circle" => circle(),
        "linear" => linear(),
        "circle-pair" => circle_pair(),
        "triple" => triple(),
        "square-first" => square_first(),
        "paper-example" => pure_builtin(
            "paper-example",
            "8x + x^3 cos(1/r^2), 8y + y^3 sin(1/r^2); differentiable, Jacobian discontinuous at 0",
            paper_example(),
        ),
        "identity" => identity(),
        "double" => double(),
        "cubic-shear" => cubic_shear(),
        _ => return None,
    })
}

fn v(entries: &[f64]) -> Vector {
    Vector::from_slice(entries).expect("finite seed")
}

fn rows<const C: usize>(r: &[[f64; C]]) -> Matrix {
    Matrix::from_rows(r).expect("finite Jacobian")
}

fn pure_builtin(name: &'static str, description: &'static str, map: DifferentiableMap) -> Builtin {
    let x0 = vec![0.0; map.n()];
    let y0 = map.evaluate(&x0, &[]).expect("origin inside domain");
    Builtin { name, description, map, seed_a: v(&x0), seed_b: v(&y0) }
}

/// `x^2 + y^2 - 1`, seeded at `(0, 1)`.
pub fn circle() -> Builtin {
    let map = DifferentiableMap::implicit(1, 1, BoxDomain::cube(2, -2.0, 2.0).unwrap(), |x, y| {
        Ok(vec![x[0] * x[0] + y[0] * y[0] - 1.0])
    })
    .unwrap()
    .with_jacobian(|x, y| rows(&[[2.0 * x[0], 2.0 * y[0]]]));
    Builtin { name: "circle", description: "x^2 + y^2 - 1 = 0 (upper branch from (0, 1))", map, seed_a: v(&[0.0]), seed_b: v(&[1.0]) }
}

/// `A y + B x` with `A = [[2, 0], [1, 3]]`, `B = [1, 1]^T`.
pub fn linear() -> Builtin {
    let map = DifferentiableMap::implicit(1, 2, BoxDomain::cube(3, -10.0, 10.0).unwrap(), |x, y| {
        Ok(vec![2.0 * y[0] + x[0], y[0] + 3.0 * y[1] + x[0]])
    })
    .unwrap()
    .with_jacobian(|_, _| rows(&[[1.0, 2.0, 0.0], [1.0, 1.0, 3.0]]));
    Builtin { name: "linear", description: "A y + B x with A = [[2,0],[1,3]], B = [1,1]", map, seed_a: v(&[0.0]), seed_b: v(&[0.0, 0.0]) }
}

/// `(x^2 + y1^2 - 1, y1 - y2)`, seeded at `(0, (1, 1))`.
pub fn circle_pair() -> Builtin {
    let map = DifferentiableMap::implicit(1, 2, BoxDomain::cube(3, -2.0, 2.0).unwrap(), |x, y| {
        Ok(vec![x[0] * x[0] + y[0] * y[0] - 1.0, y[0] - y[1]])
    })
    .unwrap()
    .with_jacobian(|x, y| rows(&[[2.0 * x[0], 2.0 * y[0], 0.0], [0.0, 1.0, -1.0]]));
    Builtin { name: "circle-pair", description: "(x^2 + y1^2 - 1, y1 - y2)", map, seed_a: v(&[0.0]), seed_b: v(&[1.0, 1.0]) }
}

/// A coupled nonlinear system in three unknowns, `dF/dy(0, 0) = I`.
pub fn triple() -> Builtin {
    let map = DifferentiableMap::implicit(1, 3, BoxDomain::cube(4, -1.0, 1.0).unwrap(), |x, y| {
        let (x, y1, y2, y3) = (x[0], y[0], y[1], y[2]);
        Ok(vec![
            y1 + 0.2 * y2 * y2 + 0.1 * Float::sin(y3) - x,
            y2 + 0.3 * y1 * y3 - x * x,
            y3 + 0.1 * y1 * y2 - 0.5 * x,
        ])
    })
    .unwrap()
    .with_jacobian(|x, y| {
        let (x, y1, y2, y3) = (x[0], y[0], y[1], y[2]);
        rows(&[
            [-1.0, 1.0, 0.4 * y2, 0.1 * Float::cos(y3)],
            [-2.0 * x, 0.3 * y3, 1.0, 0.3 * y1],
            [-0.5, 0.1 * y2, 0.1 * y1, 1.0],
        ])
    });
    Builtin {
        name: "triple",
        description: "(y1 + 0.2 y2^2 + 0.1 sin y3 - x, y2 + 0.3 y1 y3 - x^2, y3 + 0.1 y1 y2 - x/2)",
        map,
        seed_a: v(&[0.0]),
        seed_b: v(&[0.0, 0.0, 0.0]),
    }
}

/// `(y1^2, y2)`: the first leading minor vanishes on `y1 = 0`.
pub fn square_first() -> Builtin {
    let map = DifferentiableMap::implicit(1, 2, BoxDomain::cube(3, -1.0, 1.0).unwrap(), |_, y| {
        Ok(vec![y[0] * y[0], y[1]])
    })
    .unwrap()
    .with_jacobian(|_, y| rows(&[[0.0, 2.0 * y[0], 0.0], [0.0, 0.0, 1.0]]));
    Builtin { name: "square-first", description: "(y1^2, y2); violates the minor hypothesis", map, seed_a: v(&[0.0]), seed_b: v(&[0.0, 0.0]) }
}

pub fn identity() -> Builtin {
    let map = DifferentiableMap::pure(2, BoxDomain::cube(2, -10.0, 10.0).unwrap(), |x| Ok(x.to_vec()))
        .unwrap()
        .with_jacobian(|_, _| Matrix::identity(2));
    pure_builtin("identity", "F(x) = x on R^2", map)
}

pub fn double() -> Builtin {
    let map = DifferentiableMap::pure(2, BoxDomain::cube(2, -10.0, 10.0).unwrap(), |x| {
        Ok(x.iter().map(|v| 2.0 * v).collect::<Vec<_>>())
    })
    .unwrap()
    .with_jacobian(|_, _| Matrix::diagonal(&[2.0, 2.0]));
    pure_builtin("double", "F(x) = 2x on R^2", map)
}

/// `(x1 + x2^3, x2)`.
pub fn cubic_shear() -> Builtin {
    let map = DifferentiableMap::pure(2, BoxDomain::cube(2, -3.0, 3.0).unwrap(), |x| {
        Ok(vec![x[0] + x[1] * x[1] * x[1], x[1]])
    })
    .unwrap()
    .with_jacobian(|x, _| rows(&[[1.0, 3.0 * x[1] * x[1]], [0.0, 1.0]]));
    pure_builtin("cubic-shear", "F(x1, x2) = (x1 + x2^3, x2)", map)
}

fn problem(b: Builtin, config: SolverConfig) -> ImplicitProblem {
    ImplicitProblem::new(b.map, b.seed_a, b.seed_b, config).expect("builtin seed lies on the zero set")
}

pub fn circle_problem(config: SolverConfig) -> ImplicitProblem {
    problem(circle(), config)
}

pub fn linear_problem(config: SolverConfig) -> ImplicitProblem {
    problem(linear(), config)
}
