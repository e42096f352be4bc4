//! Local inverse of a pure map `F: R^n -> R^n`.
//!
//! `G(y)` is the implicit function of `Phi(y, x) = F(x) - y = 0`, with `y`
//! as the independent variable and `x` as the unknowns. The block the nested
//! solver eliminates is then `dPhi/dx = JF`, so its leading principal minors
//! are exactly those of `JF`. The image neighbourhood is never built as a
//! set; each query brackets around `x0` with the configured radii.

use alloc::vec;
use alloc::vec::Vec;

use crate::implicit::{solve_implicit, ImplicitProblem, SolveError, SolverConfig};
use crate::linalg::{invert, leading_principal_minors, norm_inf, Matrix, Vector};
use crate::map::{BoxDomain, DifferentiableMap};

#[derive(Clone, Debug)]
pub struct InverseProblem {
    map: DifferentiableMap,
    x0: Vector,
    y0: Vector,
    embedded: ImplicitProblem,
}

/// `Phi(y, x) = F(x) - y` over `R^n x domain(F)`.
pub fn embed(f: &DifferentiableMap) -> Result<DifferentiableMap, SolveError> {
    if !f.is_pure() {
        return Err(SolveError::Precondition("inversion needs a pure map R^n -> R^n"));
    }
    let n = f.n();
    let targets = BoxDomain::new(vec![f64::NEG_INFINITY; n], vec![f64::INFINITY; n])
        .expect("unbounded box is non-degenerate");
    let domain = targets.product(f.domain());
    let inner = f.clone();
    let phi = DifferentiableMap::implicit(n, n, domain, move |y, x| {
        let fx = inner.evaluate(x, &[])?;
        Ok(fx.iter().zip(y).map(|(a, b)| a - b).collect())
    })?;
    if !f.has_analytic_jacobian() {
        return Ok(phi);
    }
    let inner = f.clone();
    Ok(phi.with_jacobian(move |_, x| {
        let jf = inner.jacobian(x, &[]).expect("Jacobian inside the domain");
        Matrix::identity(jf.rows()).scale(-1.0).hstack(&jf).expect("square blocks")
    }))
}

impl InverseProblem {
    /// Requires `||F(x0) - y0||_inf <= config.seed_tol`.
    pub fn new(map: DifferentiableMap, x0: Vector, y0: Vector, config: SolverConfig) -> Result<Self, SolveError> {
        let phi = embed(&map)?;
        if y0.dim() != map.n() {
            return Err(SolveError::DimensionMismatch { what: "y0", expected: map.n(), found: y0.dim() });
        }
        let embedded = ImplicitProblem::new(phi, y0.clone(), x0.clone(), config)?;
        Ok(Self { map, x0, y0, embedded })
    }

    /// Uses `y0 = F(x0)`.
    pub fn at_base_point(map: DifferentiableMap, x0: Vector, config: SolverConfig) -> Result<Self, SolveError> {
        let y0 = map.evaluate(x0.as_slice(), &[])?;
        let y0 = Vector::new(y0).map_err(|e| SolveError::Map(e.into()))?;
        Self::new(map, x0, y0, config)
    }

    pub fn map(&self) -> &DifferentiableMap {
        &self.map
    }

    pub fn x0(&self) -> &Vector {
        &self.x0
    }

    pub fn y0(&self) -> &Vector {
        &self.y0
    }

    pub fn config(&self) -> &SolverConfig {
        self.embedded.config()
    }

    /// The implicit problem `Phi(y, x) = 0` seeded at `(y0, x0)`.
    pub fn embedded(&self) -> &ImplicitProblem {
        &self.embedded
    }
}

/// `x = G(y)` with `||F(x) - y||_inf <= n * residual_tol`.
pub fn invert_at(p: &InverseProblem, y: &[f64]) -> Result<Vector, SolveError> {
    Ok(solve_implicit(&p.embedded, y)?.y)
}

/// `JG(y) = JF(x)^-1` at `x = G(y)`.
pub fn inverse_jacobian(p: &InverseProblem, y: &[f64], x: &[f64]) -> Result<Matrix, SolveError> {
    let fx = p.map.evaluate(x, &[])?;
    if y.len() != fx.len() {
        return Err(SolveError::DimensionMismatch { what: "y", expected: fx.len(), found: y.len() });
    }
    let residual = fx.iter().zip(y).fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
    let bound = p.map.n() as f64 * p.config().residual_tol;
    if residual > bound {
        return Err(SolveError::Residual { y: x.to_vec(), residual, bound });
    }
    let jf = p.map.jacobian(x, &[])?;
    invert(&jf).map_err(|source| SolveError::Singular {
        minors: leading_principal_minors(&jf).unwrap_or_default(),
        source,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundTripPoint {
    pub x: Vec<f64>,
    /// `||G(F(x)) - x||_inf`.
    pub round_trip_error: f64,
    /// `||JG(F(x)) JF(x) - I||_inf`, entrywise maximum.
    pub jacobian_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundTripReport {
    pub points: Vec<RoundTripPoint>,
    pub failures: Vec<(Vec<f64>, SolveError)>,
    pub max_round_trip_error: f64,
    pub max_jacobian_error: f64,
}

/// `G(F(x)) = x` and `JG(F(x)) JF(x) = I` at every `x` in `xs`.
pub fn round_trip_check(p: &InverseProblem, xs: &[Vec<f64>]) -> RoundTripReport {
    let mut report =
        RoundTripReport { points: Vec::new(), failures: Vec::new(), max_round_trip_error: 0.0, max_jacobian_error: 0.0 };
    for x in xs {
        match round_trip_point(p, x) {
            Ok(pt) => {
                report.max_round_trip_error = report.max_round_trip_error.max(pt.round_trip_error);
                report.max_jacobian_error = report.max_jacobian_error.max(pt.jacobian_error);
                report.points.push(pt);
            }
            Err(e) => report.failures.push((x.clone(), e)),
        }
    }
    report
}

fn round_trip_point(p: &InverseProblem, x: &[f64]) -> Result<RoundTripPoint, SolveError> {
    let y = p.map.evaluate(x, &[])?;
    let back = invert_at(p, &y)?;
    let round_trip_error = back.as_slice().iter().zip(x).fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
    let jg = inverse_jacobian(p, &y, back.as_slice())?;
    let jf = p.map.jacobian(x, &[])?;
    let product = jg.mul(&jf).map_err(|e| SolveError::Map(e.into()))?;
    let jacobian_error = norm_inf(product.sub(&Matrix::identity(jf.rows())).map_err(|e| SolveError::Map(e.into()))?.as_slice());
    Ok(RoundTripPoint { x: x.to_vec(), round_trip_error, jacobian_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins;
    use crate::example::{example_eval, paper_example};

    fn problem(b: builtins::Builtin) -> InverseProblem {
        InverseProblem::new(b.map, b.seed_a, b.seed_b, SolverConfig::default()).unwrap()
    }

    #[test]
    fn doubling_map() {
        let p = problem(builtins::double());
        let x = invert_at(&p, &[3.0, 5.0]).unwrap();
        assert!((x[0] - 1.5).abs() < 1e-12 && (x[1] - 2.5).abs() < 1e-12);
        let jg = inverse_jacobian(&p, &[3.0, 5.0], x.as_slice()).unwrap();
        assert_eq!(jg, Matrix::diagonal(&[0.5, 0.5]));
    }

    #[test]
    fn example_map_round_trip() {
        let p = InverseProblem::at_base_point(paper_example(), Vector::zeros(2), SolverConfig::default()).unwrap();
        let y = example_eval([0.1, 0.2]);
        let x = invert_at(&p, &y).unwrap();
        assert!((x[0] - 0.1).abs() < 1e-8 && (x[1] - 0.2).abs() < 1e-8);
        assert_eq!(invert_at(&p, &[0.0, 0.0]).unwrap(), Vector::zeros(2));
        let jg = inverse_jacobian(&p, &[0.0, 0.0], &[0.0, 0.0]).unwrap();
        assert_eq!(jg, Matrix::diagonal(&[0.125, 0.125]));
    }

    #[test]
    fn embedded_block_is_jf() {
        let phi = embed(&paper_example()).unwrap();
        assert_eq!(phi.partial_y(&[0.0, 0.0], &[0.0, 0.0]).unwrap(), Matrix::diagonal(&[8.0, 8.0]));
        assert_eq!(phi.partial_x(&[0.0, 0.0], &[0.0, 0.0]).unwrap(), Matrix::diagonal(&[-1.0, -1.0]));
    }

    #[test]
    fn cubic_shear_inverse_jacobian() {
        let p = problem(builtins::cubic_shear());
        let y = [2.0, 1.0];
        let x = invert_at(&p, &y).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-10 && (x[1] - 1.0).abs() < 1e-10);
        let jg = inverse_jacobian(&p, &y, &[1.0, 1.0]).unwrap();
        let expected = [[1.0, -3.0], [0.0, 1.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((jg.get(i, j) - expected[i][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn identity_round_trip_is_exact() {
        let p = problem(builtins::identity());
        let xs: Vec<Vec<f64>> = vec![vec![0.25, -0.5], vec![1.0, 2.0], vec![-3.0, 0.125]];
        let r = round_trip_check(&p, &xs);
        assert!(r.failures.is_empty());
        assert_eq!(r.max_jacobian_error, 0.0);
        assert!(r.max_round_trip_error <= 1e-11);
    }

    #[test]
    fn unreachable_target_fails() {
        let p = InverseProblem::at_base_point(paper_example(), Vector::zeros(2), SolverConfig::default()).unwrap();
        assert!(matches!(invert_at(&p, &[100.0, 0.0]), Err(SolveError::Bracket { .. })));
    }

    #[test]
    fn rejects_implicit_maps_and_bad_seeds() {
        assert!(embed(&builtins::circle().map).is_err());
        let b = builtins::double();
        assert!(matches!(
            InverseProblem::new(b.map, b.seed_a, Vector::from_slice(&[1.0, 0.0]).unwrap(), SolverConfig::default()),
            Err(SolveError::SeedNotOnZeroSet { .. })
        ));
    }
}
