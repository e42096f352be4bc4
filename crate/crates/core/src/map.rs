//! Differentiable map handles and their box domains.
//!
//! A [`DifferentiableMap`] is either *implicit*, `F(x, y)` with `n` inputs,
//! `m` unknowns and `m` outputs, or *pure*, `F(x)` from `n` inputs to `n`
//! outputs (stored with `m = 0`). Jacobians are analytic when the map was
//! built with one, central finite differences otherwise.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use num_traits::Float;

use crate::linalg::{LinalgError, Matrix};

/// Evaluation callback. Must be reentrant: solver code may call it from
/// several threads at once.
pub type EvalFn = Arc<dyn Fn(&[f64], &[f64]) -> Result<Vec<f64>, MapError> + Send + Sync>;

/// Analytic Jacobian callback returning the `outputs x (n + m)` matrix.
pub type JacobianFn = Arc<dyn Fn(&[f64], &[f64]) -> Matrix + Send + Sync>;

#[derive(Clone, Debug, PartialEq)]
pub enum MapError {
    /// The query point lies outside the map's domain box.
    OutsideDomain { point: Vec<f64> },
    DimensionMismatch { what: &'static str, expected: usize, found: usize },
    /// The map produced NaN or an infinity.
    NonFinite { component: usize, point: Vec<f64> },
    /// Domain error raised by the map's own formula (log of a negative, ...).
    Evaluation(String),
    /// A nested solve inside the map failed (reduced systems).
    Nested(Box<crate::implicit::SolveError>),
    Linalg(LinalgError),
}

impl fmt::Display for MapError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::OutsideDomain { point } => write!(f, "point {point:?} lies outside the domain"),
            Self::DimensionMismatch { what, expected, found } => {
                write!(f, "{what} has dimension {found}, expected {expected}")
            }
            Self::NonFinite { component, point } => {
                write!(f, "component {} is not finite at {point:?}", component + 1)
            }
            Self::Evaluation(msg) => write!(f, "evaluation error: {msg}"),
            Self::Nested(e) => write!(f, "nested solve failed: {e}"),
            Self::Linalg(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for MapError {}

impl From<LinalgError> for MapError {
    fn from(e: LinalgError) -> Self {
        Self::Linalg(e)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DomainError {
    LengthMismatch { lower: usize, upper: usize },
    /// `lower[i] < upper[i]` failed (or a bound was NaN).
    Degenerate { index: usize, lower: f64, upper: f64 },
    InvalidRadius(f64),
}

impl fmt::Display for DomainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::LengthMismatch { lower, upper } => {
                write!(f, "lower bound has {lower} entries but upper bound has {upper}")
            }
            Self::Degenerate { index, lower, upper } => {
                write!(f, "coordinate {index}: lower bound {lower} is not below upper bound {upper}")
            }
            Self::InvalidRadius(r) => write!(f, "ball radius must be positive and finite, got {r}"),
        }
    }
}

impl core::error::Error for DomainError {}

/// Axis-aligned open box standing in for the map's open domain.
///
/// Bounds may be infinite, which is how the inverse solver leaves its
/// independent variables unconstrained.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, DomainError> {
        if lower.len() != upper.len() {
            return Err(DomainError::LengthMismatch { lower: lower.len(), upper: upper.len() });
        }
        for (index, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo < hi) {
                return Err(DomainError::Degenerate { index, lower: lo, upper: hi });
            }
        }
        Ok(Self { lower, upper })
    }

    /// The cube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self, DomainError> {
        Self::new(alloc::vec![lo; dim], alloc::vec![hi; dim])
    }

    /// Largest box inscribed in the ball of `radius` around `center`.
    pub fn inscribed_in_ball(center: &[f64], radius: f64) -> Result<Self, DomainError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(DomainError::InvalidRadius(radius));
        }
        let half = radius / Float::sqrt(center.len().max(1) as f64);
        Self::new(
            center.iter().map(|c| c - half).collect(),
            center.iter().map(|c| c + half).collect(),
        )
    }

    /// Cartesian product `self x other`.
    pub fn product(&self, other: &BoxDomain) -> BoxDomain {
        let mut lower = self.lower.clone();
        lower.extend_from_slice(&other.lower);
        let mut upper = self.upper.clone();
        upper.extend_from_slice(&other.upper);
        BoxDomain { lower, upper }
    }

    /// Coordinates `start..end` as a box of their own.
    pub fn slice(&self, start: usize, end: usize) -> BoxDomain {
        BoxDomain {
            lower: self.lower[start..end].to_vec(),
            upper: self.upper[start..end].to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn is_bounded(&self) -> bool {
        self.lower.iter().chain(&self.upper).all(|v| v.is_finite())
    }

    /// Closed-box membership.
    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (lo, hi))| lo <= v && v <= hi)
    }
}

/// Handle for `F(x, y)` or `F(x)` with an optional analytic Jacobian.
#[derive(Clone)]
pub struct DifferentiableMap {
    n: usize,
    m: usize,
    eval: EvalFn,
    jacobian: Option<JacobianFn>,
    domain: BoxDomain,
}

impl fmt::Debug for DifferentiableMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DifferentiableMap")
            .field("n", &self.n)
            .field("m", &self.m)
            .field("analytic_jacobian", &self.jacobian.is_some())
            .field("domain", &self.domain)
            .finish()
    }
}

impl DifferentiableMap {
    /// Implicit map `F: R^n x R^m -> R^m` on a box of dimension `n + m`.
    pub fn implicit<F>(n: usize, m: usize, domain: BoxDomain, eval: F) -> Result<Self, MapError>
    where
        F: Fn(&[f64], &[f64]) -> Result<Vec<f64>, MapError> + Send + Sync + 'static,
    {
        if m == 0 {
            return Err(MapError::DimensionMismatch { what: "unknown count", expected: 1, found: 0 });
        }
        if domain.dim() != n + m {
            return Err(MapError::DimensionMismatch { what: "domain", expected: n + m, found: domain.dim() });
        }
        Ok(Self { n, m, eval: Arc::new(eval), jacobian: None, domain })
    }

    /// Pure map `F: R^n -> R^n`. The callback receives an empty `y` slice.
    pub fn pure<F>(n: usize, domain: BoxDomain, eval: F) -> Result<Self, MapError>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>, MapError> + Send + Sync + 'static,
    {
        if n == 0 {
            return Err(MapError::DimensionMismatch { what: "input dimension", expected: 1, found: 0 });
        }
        if domain.dim() != n {
            return Err(MapError::DimensionMismatch { what: "domain", expected: n, found: domain.dim() });
        }
        Ok(Self { n, m: 0, eval: Arc::new(move |x, _y| eval(x)), jacobian: None, domain })
    }

    /// Attaches an analytic Jacobian (`outputs x (n + m)`).
    pub fn with_jacobian<J>(mut self, jacobian: J) -> Self
    where
        J: Fn(&[f64], &[f64]) -> Matrix + Send + Sync + 'static,
    {
        self.jacobian = Some(Arc::new(jacobian));
        self
    }

    /// Same map on another box of the same dimension.
    pub fn with_domain(mut self, domain: BoxDomain) -> Result<Self, MapError> {
        if domain.dim() != self.domain.dim() {
            return Err(MapError::DimensionMismatch { what: "domain", expected: self.domain.dim(), found: domain.dim() });
        }
        self.domain = domain;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn is_pure(&self) -> bool {
        self.m == 0
    }

    pub fn outputs(&self) -> usize {
        if self.m == 0 { self.n } else { self.m }
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    fn check_dims(&self, x: &[f64], y: &[f64]) -> Result<(), MapError> {
        if x.len() != self.n {
            return Err(MapError::DimensionMismatch { what: "x", expected: self.n, found: x.len() });
        }
        if y.len() != self.m {
            return Err(MapError::DimensionMismatch { what: "y", expected: self.m, found: y.len() });
        }
        Ok(())
    }

    fn in_domain(&self, x: &[f64], y: &[f64]) -> bool {
        let (lo, hi) = (&self.domain.lower, &self.domain.upper);
        x.iter().chain(y).enumerate().all(|(i, v)| lo[i] <= *v && *v <= hi[i])
    }

    /// `F(x, y)`; for pure maps pass an empty `y`.
    pub fn evaluate(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>, MapError> {
        self.check_dims(x, y)?;
        if !self.in_domain(x, y) {
            return Err(MapError::OutsideDomain { point: join(x, y) });
        }
        self.eval_unchecked(x, y)
    }

    fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>, MapError> {
        let out = (self.eval)(x, y)?;
        if out.len() != self.outputs() {
            return Err(MapError::DimensionMismatch {
                what: "map output",
                expected: self.outputs(),
                found: out.len(),
            });
        }
        if let Some(component) = out.iter().position(|v| !v.is_finite()) {
            return Err(MapError::NonFinite { component, point: join(x, y) });
        }
        Ok(out)
    }

    /// Full Jacobian `[dF/dx | dF/dy]`, analytic when available.
    pub fn jacobian(&self, x: &[f64], y: &[f64]) -> Result<Matrix, MapError> {
        self.check_dims(x, y)?;
        if !self.in_domain(x, y) {
            return Err(MapError::OutsideDomain { point: join(x, y) });
        }
        match &self.jacobian {
            Some(jac) => {
                let j = jac(x, y);
                if (j.rows(), j.cols()) != (self.outputs(), self.n + self.m) {
                    return Err(MapError::Linalg(LinalgError::DimensionMismatch {
                        expected: (self.outputs(), self.n + self.m),
                        found: (j.rows(), j.cols()),
                    }));
                }
                Ok(j)
            }
            None => self.fd_jacobian(x, y),
        }
    }

    /// Central finite-difference Jacobian, falling back to a one-sided
    /// difference where a central stencil would leave the domain.
    pub fn fd_jacobian(&self, x: &[f64], y: &[f64]) -> Result<Matrix, MapError> {
        self.check_dims(x, y)?;
        let p = join(x, y);
        let rows = self.outputs();
        let cols = p.len();
        let base = self.evaluate(x, y)?;
        let mut jac = Matrix::zeros(rows, cols);
        let step_scale = Float::cbrt(f64::EPSILON);
        let mut probe = p.clone();
        for j in 0..cols {
            let h = step_scale * p[j].abs().max(1.0);
            let (lo, hi) = (self.domain.lower[j], self.domain.upper[j]);
            let forward_ok = p[j] + h <= hi;
            let backward_ok = p[j] - h >= lo;
            let mut at = |v: f64| -> Result<Vec<f64>, MapError> {
                probe[j] = v;
                let r = self.eval_unchecked(&probe[..self.n], &probe[self.n..]);
                probe[j] = p[j];
                r
            };
            let column: Vec<f64> = match (forward_ok, backward_ok) {
                (true, true) => {
                    let (fp, fm) = (at(p[j] + h)?, at(p[j] - h)?);
                    // Use the actual spacing of the representable stencil points.
                    let width = (p[j] + h) - (p[j] - h);
                    fp.iter().zip(&fm).map(|(a, b)| (a - b) / width).collect()
                }
                (true, false) => {
                    let fp = at(p[j] + h)?;
                    let width = (p[j] + h) - p[j];
                    fp.iter().zip(&base).map(|(a, b)| (a - b) / width).collect()
                }
                (false, true) => {
                    let fm = at(p[j] - h)?;
                    let width = p[j] - (p[j] - h);
                    base.iter().zip(&fm).map(|(a, b)| (a - b) / width).collect()
                }
                (false, false) => {
                    return Err(MapError::OutsideDomain { point: p });
                }
            };
            for (i, v) in column.into_iter().enumerate() {
                jac.set(i, j, v);
            }
        }
        Ok(jac)
    }

    /// `dF/dx`, the first `n` Jacobian columns.
    pub fn partial_x(&self, x: &[f64], y: &[f64]) -> Result<Matrix, MapError> {
        Ok(self.jacobian(x, y)?.columns(0, self.n))
    }

    /// `dF/dy`, the last `m` Jacobian columns. Empty (`n x 0`) for pure maps.
    pub fn partial_y(&self, x: &[f64], y: &[f64]) -> Result<Matrix, MapError> {
        Ok(self.jacobian(x, y)?.columns(self.n, self.n + self.m))
    }

    /// The square block whose leading principal minors the solvers rely on:
    /// `dF/dy` for implicit maps, the whole Jacobian for pure maps.
    pub fn solve_block(&self, x: &[f64], y: &[f64]) -> Result<Matrix, MapError> {
        if self.is_pure() { self.jacobian(x, y) } else { self.partial_y(x, y) }
    }
}

pub(crate) fn join(x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut p = Vec::with_capacity(x.len() + y.len());
    p.extend_from_slice(x);
    p.extend_from_slice(y);
    p
}
