//! Implicit function evaluation by nested elimination.
//!
//! To evaluate `y = g(x)` for `F(x, y) = 0` with `m` unknowns, the first
//! equation is solved for `y1` with the remaining unknowns held fixed, that
//! solution is substituted into equations `2..m`, and the reduced system is
//! solved the same way. Every level is a one-dimensional bracketed solve
//! ([`crate::scalar`]), so the only requirement on `F` is that each
//! eliminated section is continuous and strictly monotone, which is what
//! nowhere-vanishing leading principal minors of `dF/dy` provide.
//!
//! Cost grows like `iterations^m`; [`SolverConfig::max_unknowns`] caps `m`.
//!
//! Uniqueness of the solution branch is not checked per solve. It is a
//! property of the whole domain; [`crate::audit::audit_mixed_determinant`]
//! looks for counterexamples to the hypothesis that guarantees it.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::Float;

use crate::linalg::{leading_principal_minors, norm_inf, solve_linear, LinalgError, Matrix, Vector};
use crate::map::{join, BoxDomain, DifferentiableMap, MapError};
use crate::scalar::{make_bracket_within, solve_monotone, Accel, BracketSearch, RootConfig, RootError};

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub residual_tol: f64,
    /// Relative bracket-width tolerance, see [`RootConfig::width_tol`].
    pub width_tol: f64,
    pub max_iter: usize,
    /// Initial bracket radius per unknown; the last entry is reused for
    /// unknowns beyond the list.
    pub bracket_r0: Vec<f64>,
    pub max_expansions: usize,
    pub accel: Accel,
    /// Largest `m` accepted by [`solve_implicit`].
    pub max_unknowns: usize,
    /// Tolerance on `||F(a, b)||_inf` for the seed point.
    pub seed_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            residual_tol: 1e-11,
            width_tol: 1e-13,
            max_iter: 200,
            bracket_r0: vec![0.5],
            max_expansions: 20,
            accel: Accel::Illinois,
            max_unknowns: 6,
            seed_tol: 1e-8,
        }
    }
}

impl SolverConfig {
    pub fn radius(&self, unknown: usize) -> f64 {
        self.bracket_r0.get(unknown).or(self.bracket_r0.last()).copied().unwrap_or(0.5)
    }

    pub fn root_config(&self) -> RootConfig {
        RootConfig {
            residual_tol: self.residual_tol,
            width_tol: self.width_tol,
            max_iter: self.max_iter,
            accel: self.accel,
        }
    }

    fn validate(&self) -> Result<(), SolveError> {
        let ok = self.residual_tol > 0.0
            && self.width_tol > 0.0
            && self.seed_tol > 0.0
            && self.max_iter >= 1
            && self.bracket_r0.iter().all(|r| *r > 0.0 && r.is_finite());
        if ok { Ok(()) } else { Err(SolveError::InvalidConfig) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolveError {
    InvalidConfig,
    /// `||F(a, b)||_inf` exceeds the seed tolerance.
    SeedNotOnZeroSet { residual: f64 },
    SeedOutsideDomain,
    TooManyUnknowns { m: usize, max: usize },
    DimensionMismatch { what: &'static str, expected: usize, found: usize },
    /// No sign change while eliminating unknown `equation` (1-based) at the
    /// given `x` with the later unknowns held at `fixed`.
    Bracket { equation: usize, x: Vec<f64>, fixed: Vec<f64>, lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    /// A scalar solve hit its iteration cap.
    Convergence { equation: usize, x: Vec<f64>, fixed: Vec<f64>, best: f64, residual: f64 },
    /// The assembled solution misses the residual bound.
    Residual { y: Vec<f64>, residual: f64, bound: f64 },
    /// `dF/dy` is singular at the point; carries its leading principal minors.
    Singular { minors: Vec<f64>, source: LinalgError },
    Map(MapError),
    Precondition(&'static str),
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidConfig => f.write_str("solver tolerances and radii must be positive"),
            Self::SeedNotOnZeroSet { residual } => {
                write!(f, "seed point is not on the zero set (residual {residual:e})")
            }
            Self::SeedOutsideDomain => f.write_str("seed point lies outside the domain"),
            Self::TooManyUnknowns { m, max } => {
                write!(f, "{m} unknowns exceed the nested-solve cap of {max}")
            }
            Self::DimensionMismatch { what, expected, found } => {
                write!(f, "{what} has dimension {found}, expected {expected}")
            }
            Self::Bracket { equation, x, fixed, lo, hi, f_lo, f_hi } => write!(
                f,
                "bracket failure in equation {equation} at x = {x:?}, fixed unknowns {fixed:?}: \
                 no sign change on [{lo}, {hi}] (values {f_lo:e}, {f_hi:e}); \
                 a leading minor may vanish here, the domain may be too small, \
                 or the unknowns may need reordering"
            ),
            Self::Convergence { equation, x, fixed, best, residual } => write!(
                f,
                "equation {equation} did not converge at x = {x:?}, fixed unknowns {fixed:?} \
                 (best {best}, residual {residual:e})"
            ),
            Self::Residual { y, residual, bound } => {
                write!(f, "solution {y:?} has residual {residual:e} above {bound:e}")
            }
            Self::Singular { minors, source } => {
                write!(f, "{source}; leading principal minors of dF/dy: {minors:?}")
            }
            Self::Map(e) => write!(f, "{e}"),
            Self::Precondition(what) => f.write_str(what),
        }
    }
}

impl core::error::Error for SolveError {}

impl From<MapError> for SolveError {
    fn from(e: MapError) -> Self {
        match e {
            MapError::Nested(inner) => *inner,
            other => Self::Map(other),
        }
    }
}

/// `F(x, y) = 0` near a known solution `(a, b)`.
#[derive(Clone, Debug)]
pub struct ImplicitProblem {
    map: DifferentiableMap,
    a: Vector,
    b: Vector,
    config: SolverConfig,
}

impl ImplicitProblem {
    pub fn new(map: DifferentiableMap, a: Vector, b: Vector, config: SolverConfig) -> Result<Self, SolveError> {
        config.validate()?;
        if map.is_pure() {
            return Err(SolveError::Precondition("implicit problems need a map with unknowns (m >= 1)"));
        }
        if a.dim() != map.n() {
            return Err(SolveError::DimensionMismatch { what: "seed a", expected: map.n(), found: a.dim() });
        }
        if b.dim() != map.m() {
            return Err(SolveError::DimensionMismatch { what: "seed b", expected: map.m(), found: b.dim() });
        }
        if !map.domain().contains(&join(a.as_slice(), b.as_slice())) {
            return Err(SolveError::SeedOutsideDomain);
        }
        let residual = norm_inf(&map.evaluate(a.as_slice(), b.as_slice())?);
        if residual > config.seed_tol {
            return Err(SolveError::SeedNotOnZeroSet { residual });
        }
        Ok(Self { map, a, b, config })
    }

    pub fn map(&self) -> &DifferentiableMap {
        &self.map
    }

    pub fn a(&self) -> &Vector {
        &self.a
    }

    pub fn b(&self) -> &Vector {
        &self.b
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ImplicitValue {
    pub y: Vector,
    /// `||F(x, y)||_inf`.
    pub residual: f64,
    /// Scalar solves performed, across all nesting levels.
    pub inner_solves: usize,
}

/// Memo key: a level and the later unknowns rounded to 12 decimals.
type MemoKey = (usize, Vec<i64>);

fn round12(v: f64) -> i64 {
    Float::round(v * 1e12) as i64
}

struct Elimination<'a> {
    map: &'a DifferentiableMap,
    config: &'a SolverConfig,
    x: &'a [f64],
    seed: &'a [f64],
    memo: BTreeMap<MemoKey, Vec<f64>>,
    solves: usize,
}

impl Elimination<'_> {
    /// Solves the first `k` (reduced) equations for `y1..yk` with
    /// `y(k+1)..ym` fixed to `tail`.
    fn leading(&mut self, k: usize, tail: &[f64]) -> Result<Vec<f64>, SolveError> {
        if k == 0 {
            return Ok(Vec::new());
        }
        let key = (k, tail.iter().map(|v| round12(*v)).collect::<Vec<_>>());
        if let Some(hit) = self.memo.get(&key) {
            return Ok(hit.clone());
        }
        let root = self.solve_level(k, tail)?;
        let mut with_root = Vec::with_capacity(tail.len() + 1);
        with_root.push(root);
        with_root.extend_from_slice(tail);
        let mut prefix = self.leading(k - 1, &with_root)?;
        prefix.push(root);
        self.memo.insert(key, prefix.clone());
        Ok(prefix)
    }

    /// Level-`k` reduced equation at `y_k = t`: equation `k` of `F` after
    /// eliminating `y1..y(k-1)`.
    fn section(&mut self, k: usize, t: f64, tail: &[f64]) -> Result<f64, SolveError> {
        let mut with_t = Vec::with_capacity(tail.len() + 1);
        with_t.push(t);
        with_t.extend_from_slice(tail);
        let mut y = self.leading(k - 1, &with_t)?;
        y.extend_from_slice(&with_t);
        let value = self.map.evaluate(self.x, &y)?;
        Ok(value[k - 1])
    }

    fn solve_level(&mut self, k: usize, tail: &[f64]) -> Result<f64, SolveError> {
        let n = self.map.n();
        let idx = n + k - 1;
        let domain = self.map.domain();
        let limits = (domain.lower()[idx], domain.upper()[idx]);
        let center = self.seed[k - 1].clamp(limits.0, limits.1);
        let cfg = self.config.root_config();
        let (r0, expansions) = (self.config.radius(k - 1), self.config.max_expansions);
        self.solves += 1;
        let search = make_bracket_within(|t| self.section(k, t, tail), center, r0, expansions, limits);
        let bracket = match search {
            Ok(BracketSearch::ExactRoot(t)) => return Ok(t),
            Ok(BracketSearch::Bracket(b)) => b,
            Err(e) => return Err(self.level_error(k, tail, e)),
        };
        match solve_monotone(|t| self.section(k, t, tail), &bracket, &cfg) {
            Ok(r) => Ok(r.root),
            Err(e) => Err(self.level_error(k, tail, e)),
        }
    }

    fn level_error(&self, k: usize, tail: &[f64], e: RootError<SolveError>) -> SolveError {
        let (x, fixed) = (self.x.to_vec(), tail.to_vec());
        match e {
            RootError::NoBracket { lo, hi, f_lo, f_hi } => {
                SolveError::Bracket { equation: k, x, fixed, lo, hi, f_lo, f_hi }
            }
            RootError::NoConvergence { best, residual, .. } => {
                SolveError::Convergence { equation: k, x, fixed, best, residual }
            }
            RootError::NonFinite { at } => SolveError::Map(MapError::NonFinite {
                component: k - 1,
                point: vec![at],
            }),
            RootError::Eval { error, .. } => error,
            RootError::InvalidInput(what) => SolveError::Precondition(what),
        }
    }
}

/// Evaluates `g(x)` seeded from the problem's `b`.
pub fn solve_implicit(p: &ImplicitProblem, x: &[f64]) -> Result<ImplicitValue, SolveError> {
    solve_implicit_from(p, x, p.b.as_slice())
}

/// Evaluates `g(x)` with every bracket centered on `seed` instead of `b`.
pub fn solve_implicit_from(p: &ImplicitProblem, x: &[f64], seed: &[f64]) -> Result<ImplicitValue, SolveError> {
    let map = &p.map;
    let m = map.m();
    if m > p.config.max_unknowns {
        return Err(SolveError::TooManyUnknowns { m, max: p.config.max_unknowns });
    }
    if x.len() != map.n() {
        return Err(SolveError::DimensionMismatch { what: "x", expected: map.n(), found: x.len() });
    }
    if seed.len() != m {
        return Err(SolveError::DimensionMismatch { what: "seed", expected: m, found: seed.len() });
    }
    let mut elim = Elimination { map, config: &p.config, x, seed, memo: BTreeMap::new(), solves: 0 };
    let y = elim.leading(m, &[])?;
    let residual = norm_inf(&map.evaluate(x, &y)?);
    let bound = m as f64 * p.config.residual_tol;
    if residual > bound {
        return Err(SolveError::Residual { y, residual, bound });
    }
    Ok(ImplicitValue { y: Vector::new(y).map_err(|e| SolveError::Map(e.into()))?, residual, inner_solves: elim.solves })
}

/// `Jg = -(dF/dy)^-1 dF/dx` at `(x, y)`, via a linear solve.
pub fn implicit_jacobian(p: &ImplicitProblem, x: &[f64], y: &[f64]) -> Result<Matrix, SolveError> {
    let residual = norm_inf(&p.map.evaluate(x, y)?);
    let bound = p.map.m() as f64 * p.config.residual_tol;
    if residual > bound {
        return Err(SolveError::Residual { y: y.to_vec(), residual, bound });
    }
    let jac = p.map.jacobian(x, y)?;
    let n = p.map.n();
    let fx = jac.columns(0, n);
    let fy = jac.columns(n, n + p.map.m());
    match solve_linear(&fy, &fx) {
        Ok(sol) => Ok(sol.scale(-1.0)),
        Err(source) => Err(SolveError::Singular {
            minors: leading_principal_minors(&fy).unwrap_or_default(),
            source,
        }),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridPoint {
    pub x: Vec<f64>,
    pub outcome: Result<ImplicitValue, SolveError>,
}

/// Solves at every grid point, in order. Failures are recorded per point.
///
/// With `continuation`, each solve is seeded from the most recent successful
/// solution instead of `b`.
pub fn solve_on_grid(p: &ImplicitProblem, grid: &[Vec<f64>], continuation: bool) -> Vec<GridPoint> {
    let mut seed = p.b.as_slice().to_vec();
    grid.iter()
        .map(|x| {
            let outcome = solve_implicit_from(p, x, &seed);
            if continuation {
                if let Ok(v) = &outcome {
                    seed = v.y.as_slice().to_vec();
                }
            }
            GridPoint { x: x.clone(), outcome }
        })
        .collect()
}

/// The scalar section `phi(x, y')`: root of `F1(x, ., y') = 0` near a seed.
#[derive(Clone, Debug)]
pub struct EliminationSection {
    pub seed: f64,
    pub config: SolverConfig,
}

impl EliminationSection {
    /// `phi(x, y')` for the first equation of `f`.
    pub fn solve(&self, f: &DifferentiableMap, x: &[f64], rest: &[f64]) -> Result<f64, SolveError> {
        let seed: Vec<f64> = core::iter::once(self.seed).chain(rest.iter().copied()).collect();
        let mut elim = Elimination { map: f, config: &self.config, x, seed: &seed, memo: BTreeMap::new(), solves: 0 };
        elim.solve_level(1, rest)
    }
}

/// The reduced system `Fi(x, phi(x, y'), y')`, `i = 2..m`, over the
/// remaining unknowns `y' = (y2, .., ym)`.
///
/// The result has no analytic Jacobian since `phi` has no closed form.
pub fn reduced_system(f: &DifferentiableMap, section: EliminationSection) -> Result<DifferentiableMap, SolveError> {
    let m = f.m();
    if f.is_pure() || m < 2 {
        return Err(SolveError::Precondition("reduction needs at least two unknowns"));
    }
    section.config.validate()?;
    let n = f.n();
    let domain = f.domain();
    let reduced_domain: BoxDomain = domain.slice(0, n).product(&domain.slice(n + 1, n + m));
    let inner = f.clone();
    DifferentiableMap::implicit(n, m - 1, reduced_domain, move |x, rest| {
        let y1 = section.solve(&inner, x, rest).map_err(|e| MapError::Nested(Box::new(e)))?;
        let mut y = Vec::with_capacity(m);
        y.push(y1);
        y.extend_from_slice(rest);
        let full = inner.evaluate(x, &y)?;
        Ok(full[1..].to_vec())
    })
    .map_err(SolveError::Map)
}
