//! Sampling audits of the solver hypotheses over a box.
//!
//! The hypotheses quantify over every point (or every tuple of points) of
//! the domain. Sampling can refute them but never certify them, so a clean
//! audit reports [`Verdict::NoViolationFound`], never "verified".

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::halton::Halton;
use crate::linalg::{det, leading_principal_minors, Matrix};
use crate::map::{DifferentiableMap, MapError};
use crate::scalar::{make_bracket_within, solve_monotone, Accel, BracketSearch, RootConfig};

/// Boxes with more coordinates than this skip the corner samples.
pub const MAX_CORNER_DIM: usize = 12;

/// Closed sampling region; unlike [`crate::map::BoxDomain`] it may collapse
/// to a single point.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl SampleBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, AuditError> {
        let ok = lower.len() == upper.len()
            && lower.iter().zip(&upper).all(|(lo, hi)| lo.is_finite() && hi.is_finite() && lo <= hi);
        if ok { Ok(Self { lower, upper }) } else { Err(AuditError::InvalidBox) }
    }

    pub fn point(p: &[f64]) -> Self {
        Self { lower: p.to_vec(), upper: p.to_vec() }
    }

    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self, AuditError> {
        Self::new(vec![lo; dim], vec![hi; dim])
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

    fn lerp(&self, unit: &[f64]) -> Vec<f64> {
        unit.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(u, (lo, hi))| lo + u * (hi - lo))
            .collect()
    }

    /// Box corners (when `dim <= MAX_CORNER_DIM`), the center, then `budget`
    /// Halton points. Larger budgets extend smaller ones.
    pub fn samples(&self, budget: usize) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut out = Vec::new();
        if d <= MAX_CORNER_DIM {
            for mask in 0..(1usize << d) {
                out.push(
                    (0..d).map(|i| if mask >> i & 1 == 1 { self.upper[i] } else { self.lower[i] }).collect(),
                );
            }
        }
        out.push(self.lerp(&vec![0.5; d]));
        out.extend(Halton::new(d).take(budget).map(|u| self.lerp(&u)));
        out
    }

    fn random_point(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let unit: Vec<f64> = (0..self.dim()).map(|_| rng.random::<f64>()).collect();
        self.lerp(&unit)
    }
}

impl From<&crate::map::BoxDomain> for SampleBox {
    fn from(b: &crate::map::BoxDomain) -> Self {
        Self { lower: b.lower().to_vec(), upper: b.upper().to_vec() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AuditError {
    InvalidBox,
    BoxDimension { expected: usize, found: usize },
    ZeroBudget,
    /// No sample could be evaluated.
    NoSamples { skipped: usize },
}

impl fmt::Display for AuditError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidBox => f.write_str("sample box needs finite bounds with lower <= upper"),
            Self::BoxDimension { expected, found } => {
                write!(f, "sample box has {found} coordinates, the map needs {expected}")
            }
            Self::ZeroBudget => f.write_str("budget must be at least 1"),
            Self::NoSamples { skipped } => write!(f, "all {skipped} samples failed to evaluate"),
        }
    }
}

impl core::error::Error for AuditError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    NoViolationFound,
    ViolationFound,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::NoViolationFound => "no-violation-found",
            Verdict::ViolationFound => "violation-found",
        }
    }
}

/// Relative tolerance behind `violation_tol = rtol * (1 + median |value|)`.
pub const DEFAULT_VIOLATION_RTOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct MinorReport {
    /// Minor order, 1-based.
    pub k: usize,
    pub min_abs: f64,
    pub argmin: Vec<f64>,
    pub samples: usize,
    /// Samples skipped because the map failed to evaluate there.
    pub skipped: usize,
    pub violation_tol: f64,
    /// The minor took both signs across samples. For a differentiable map
    /// that means it vanishes somewhere in between, even if no sample
    /// landed close enough to flag it.
    pub sign_change: bool,
    pub verdict: Verdict,
}

fn median_abs(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().map(|x| x.abs()).collect();
    v.sort_by(f64::total_cmp);
    match v.len() {
        0 => 0.0,
        n if n % 2 == 1 => v[n / 2],
        n => 0.5 * (v[n / 2 - 1] + v[n / 2]),
    }
}

fn split<'a>(f: &DifferentiableMap, p: &'a [f64]) -> (&'a [f64], &'a [f64]) {
    p.split_at(f.n())
}

fn check_box(f: &DifferentiableMap, region: &SampleBox) -> Result<(), AuditError> {
    let expected = f.n() + f.m();
    if region.dim() != expected {
        return Err(AuditError::BoxDimension { expected, found: region.dim() });
    }
    Ok(())
}

/// Minimum `|minor_k|` of the solve block (`dF/dy`, or `JF` for pure maps)
/// over corners, center and `budget` Halton points of `region`.
pub fn audit_minors(f: &DifferentiableMap, region: &SampleBox, budget: usize) -> Result<Vec<MinorReport>, AuditError> {
    audit_minors_with(f, region, budget, DEFAULT_VIOLATION_RTOL)
}

pub fn audit_minors_with(
    f: &DifferentiableMap,
    region: &SampleBox,
    budget: usize,
    violation_rtol: f64,
) -> Result<Vec<MinorReport>, AuditError> {
    if budget == 0 {
        return Err(AuditError::ZeroBudget);
    }
    check_box(f, region)?;
    let order = f.outputs();
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); order];
    let mut best: Vec<(f64, Vec<f64>)> = vec![(f64::INFINITY, Vec::new()); order];
    let mut skipped = 0;
    for p in region.samples(budget) {
        let (x, y) = split(f, &p);
        let minors = match f.solve_block(x, y).and_then(|b| Ok(leading_principal_minors(&b)?)) {
            Ok(v) => v,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        for (k, value) in minors.into_iter().enumerate() {
            values[k].push(value);
            if value.abs() < best[k].0 {
                best[k] = (value.abs(), p.clone());
            }
        }
    }
    if values[0].is_empty() {
        return Err(AuditError::NoSamples { skipped });
    }
    Ok(values
        .into_iter()
        .zip(best)
        .enumerate()
        .map(|(k, (vals, (min_abs, argmin)))| {
            let violation_tol = violation_rtol * (1.0 + median_abs(&vals));
            let sign_change = vals.iter().any(|v| *v > 0.0) && vals.iter().any(|v| *v < 0.0);
            MinorReport {
                k: k + 1,
                min_abs,
                argmin,
                samples: vals.len(),
                skipped,
                violation_tol,
                sign_change,
                verdict: if min_abs <= violation_tol { Verdict::ViolationFound } else { Verdict::NoViolationFound },
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct MixedReport {
    pub trials: usize,
    pub skipped: usize,
    pub min_abs_det: f64,
    /// Points `xi_ij` of the worst tuple, row-major over `(i, j)`.
    pub worst: Vec<Vec<f64>>,
    pub violation_tol: f64,
    /// Determinants of both signs were seen; the worst tuple then comes from
    /// bisecting the straight path between a positive and a negative tuple.
    pub sign_change: bool,
    pub verdict: Verdict,
}

fn mixed_det(f: &DifferentiableMap, tuple: &[Vec<f64>]) -> Result<f64, MapError> {
    let m = f.outputs();
    let mut mixed = Matrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let p = &tuple[i * m + j];
            let (x, y) = split(f, p);
            mixed.set(i, j, f.solve_block(x, y)?.get(i, j));
        }
    }
    Ok(det(&mixed)?)
}

fn lerp_tuple(a: &[Vec<f64>], b: &[Vec<f64>], t: f64) -> Vec<Vec<f64>> {
    a.iter()
        .zip(b)
        .map(|(p, q)| p.iter().zip(q).map(|(u, v)| u + t * (v - u)).collect())
        .collect()
}

/// Determinant of the mixed matrix `(dFi/dyj (xi_ij))` for `trials` random
/// tuples of independent points in `region`. Deterministic in `rng_seed`.
pub fn audit_mixed_determinant(
    f: &DifferentiableMap,
    region: &SampleBox,
    trials: usize,
    rng_seed: u64,
) -> Result<MixedReport, AuditError> {
    if trials == 0 {
        return Err(AuditError::ZeroBudget);
    }
    check_box(f, region)?;
    let m = f.outputs();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut dets = Vec::with_capacity(trials);
    let mut skipped = 0;
    let mut worst: (f64, Vec<Vec<f64>>) = (f64::INFINITY, Vec::new());
    // Smallest positive and smallest-magnitude negative determinant seen.
    let mut pos: Option<(f64, Vec<Vec<f64>>)> = None;
    let mut neg: Option<(f64, Vec<Vec<f64>>)> = None;
    for _ in 0..trials {
        let tuple: Vec<Vec<f64>> = (0..m * m).map(|_| region.random_point(&mut rng)).collect();
        let d = match mixed_det(f, &tuple) {
            Ok(d) => d,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        dets.push(d);
        if d > 0.0 && pos.as_ref().is_none_or(|(v, _)| d < *v) {
            pos = Some((d, tuple.clone()));
        }
        if d < 0.0 && neg.as_ref().is_none_or(|(v, _)| -d < *v) {
            neg = Some((-d, tuple.clone()));
        }
        if d.abs() < worst.0 {
            worst = (d.abs(), tuple);
        }
    }
    if dets.is_empty() {
        return Err(AuditError::NoSamples { skipped });
    }
    let violation_tol = DEFAULT_VIOLATION_RTOL * (1.0 + median_abs(&dets));
    let sign_change = pos.is_some() && neg.is_some();
    if let (Some((_, a)), Some((_, b))) = (&pos, &neg) {
        if let Some((v, tuple)) = refine_sign_change(f, a, b) {
            if v < worst.0 {
                worst = (v, tuple);
            }
        }
    }
    Ok(MixedReport {
        trials,
        skipped,
        min_abs_det: worst.0,
        worst: worst.1,
        violation_tol,
        sign_change,
        verdict: if worst.0 <= violation_tol { Verdict::ViolationFound } else { Verdict::NoViolationFound },
    })
}

/// Bisects the mixed determinant along the segment between a tuple with a
/// positive and one with a negative determinant.
fn refine_sign_change(f: &DifferentiableMap, pos: &[Vec<f64>], neg: &[Vec<f64>]) -> Option<(f64, Vec<Vec<f64>>)> {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut best: Option<(f64, Vec<Vec<f64>>)> = None;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let tuple = lerp_tuple(pos, neg, mid);
        let d = mixed_det(f, &tuple).ok()?;
        if best.as_ref().is_none_or(|(v, _)| d.abs() < *v) {
            best = Some((d.abs(), tuple));
        }
        if d == 0.0 {
            break;
        }
        if d > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    best
}

/// One row of a mean-value check that could not be verified.
#[derive(Clone, Debug, PartialEq)]
pub struct MeanValueFailure {
    pub segment: usize,
    pub row: usize,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeanValueReport {
    pub segments: usize,
    pub rows_verified: usize,
    /// Largest identity residual over verified rows.
    pub max_residual: f64,
    /// Segment parameter `t` of the mean-value point, per segment and row
    /// (`NaN` where none was found).
    pub points: Vec<Vec<f64>>,
    pub failures: Vec<MeanValueFailure>,
    pub tol: f64,
}

/// Grid resolution for locating sign changes of the mean-value residual.
const MEAN_VALUE_SCAN: usize = 32;

/// Row-wise mean-value check on explicit segments `p -> q`: for every
/// output `i` looks for `t` in `[0, 1]` with
/// `Fi(p) - Fi(q) = <grad Fi(p + t (q - p)), p - q>` to within `tol`.
pub fn audit_mean_value_pairs(
    f: &DifferentiableMap,
    pairs: &[(Vec<f64>, Vec<f64>)],
    tol: f64,
) -> Result<MeanValueReport, AuditError> {
    let outputs = f.outputs();
    let dim = f.n() + f.m();
    let mut report = MeanValueReport {
        segments: pairs.len(),
        rows_verified: 0,
        max_residual: 0.0,
        points: Vec::with_capacity(pairs.len()),
        failures: Vec::new(),
        tol,
    };
    for (segment, (p, q)) in pairs.iter().enumerate() {
        if p.len() != dim || q.len() != dim {
            return Err(AuditError::BoxDimension { expected: dim, found: p.len().max(q.len()) });
        }
        let mut ts = vec![f64::NAN; outputs];
        let ends = split(f, p);
        let fp = f.evaluate(ends.0, ends.1);
        let ends = split(f, q);
        let fq = f.evaluate(ends.0, ends.1);
        let (fp, fq) = match (fp, fq) {
            (Ok(a), Ok(b)) => (a, b),
            _ => {
                for row in 0..outputs {
                    report.failures.push(MeanValueFailure { segment, row, residual: f64::INFINITY });
                }
                report.points.push(ts);
                continue;
            }
        };
        let diff: Vec<f64> = p.iter().zip(q).map(|(a, b)| a - b).collect();
        for row in 0..outputs {
            let target = fp[row] - fq[row];
            let g = |t: f64| -> Result<f64, MapError> {
                let c: Vec<f64> = p.iter().zip(q).map(|(a, b)| a + t * (b - a)).collect();
                let (x, y) = split(f, &c);
                let grad = f.jacobian(x, y)?;
                let dot: f64 = grad.row(row).iter().zip(&diff).map(|(u, v)| u * v).sum();
                Ok(dot - target)
            };
            match mean_value_point(g, tol) {
                Some((t, residual)) => {
                    ts[row] = t;
                    report.rows_verified += 1;
                    report.max_residual = report.max_residual.max(residual);
                }
                None => {
                    let residual = scan_min(g);
                    report.failures.push(MeanValueFailure { segment, row, residual });
                }
            }
        }
        report.points.push(ts);
    }
    Ok(report)
}

fn scan_min(mut g: impl FnMut(f64) -> Result<f64, MapError>) -> f64 {
    (0..=MEAN_VALUE_SCAN)
        .filter_map(|i| g(i as f64 / MEAN_VALUE_SCAN as f64).ok())
        .fold(f64::INFINITY, |acc, v| acc.min(v.abs()))
}

fn mean_value_point(mut g: impl FnMut(f64) -> Result<f64, MapError>, tol: f64) -> Option<(f64, f64)> {
    let grid: Vec<(f64, f64)> = (0..=MEAN_VALUE_SCAN)
        .filter_map(|i| {
            let t = i as f64 / MEAN_VALUE_SCAN as f64;
            g(t).ok().map(|v| (t, v))
        })
        .collect();
    let (t_best, v_best) = grid.iter().copied().min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))?;
    if v_best.abs() <= tol {
        return Some((t_best, v_best.abs()));
    }
    let cfg = RootConfig { residual_tol: tol * 1e-3, width_tol: 1e-15, max_iter: 200, accel: Accel::Bisect };
    for w in grid.windows(2) {
        let ((t0, v0), (t1, v1)) = (w[0], w[1]);
        if (v0 < 0.0) == (v1 < 0.0) {
            continue;
        }
        let half = 0.5 * (t1 - t0);
        let search = make_bracket_within(&mut g, t0 + half, half, 0, (t0, t1));
        let root = match search {
            Ok(BracketSearch::ExactRoot(t)) => Some(t),
            Ok(BracketSearch::Bracket(b)) => solve_monotone(&mut g, &b, &cfg).ok().map(|r| r.root),
            Err(_) => None,
        };
        if let Some(t) = root {
            if let Ok(v) = g(t) {
                if v.abs() <= tol {
                    return Some((t, v.abs()));
                }
            }
        }
    }
    None
}

/// [`audit_mean_value_pairs`] on `pair_budget` random segments in `region`.
pub fn audit_mean_value_matrix(
    f: &DifferentiableMap,
    region: &SampleBox,
    pair_budget: usize,
    rng_seed: u64,
    tol: f64,
) -> Result<MeanValueReport, AuditError> {
    if pair_budget == 0 {
        return Err(AuditError::ZeroBudget);
    }
    check_box(f, region)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let pairs: Vec<(Vec<f64>, Vec<f64>)> =
        (0..pair_budget).map(|_| (region.random_point(&mut rng), region.random_point(&mut rng))).collect();
    audit_mean_value_pairs(f, &pairs, tol)
}
