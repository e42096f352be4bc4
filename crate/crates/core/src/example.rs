//! A planar map that is differentiable everywhere, has a Jacobian that is
//! discontinuous at the origin, and is still invertible near the origin:
//!
//! ```text
//! F(x, y) = (8x + x^3 cos(1/(x^2+y^2)), 8y + y^3 sin(1/(x^2+y^2)))   off the origin
//! F(0, 0) = (0, 0)
//! ```
//!
//! `JF(0, 0) = diag(8, 8)`. On the closed unit square every entry of `JF`
//! stays within `[-1, 1]`-weighted perturbations of `diag(8, 8)`, which gives
//! `|minor_1| >= 8 - 3 - 2 = 3` and `|det JF| >= 3^2 - 2^2 = 5`.

use core::fmt;

use num_traits::Float;

use crate::audit::{audit_minors, AuditError, MinorReport, SampleBox};
use crate::linalg::Matrix;
use crate::map::{BoxDomain, DifferentiableMap};

/// Below this squared radius the Jacobian returns `diag(8, 8)`: the
/// analytic entries would overflow in `(x^2 + y^2)^-2`.
pub const ORIGIN_RADIUS_SQ: f64 = 1e-150;

/// Half-width of the fixture's domain box; `0.7 * sqrt(2) < 1`.
pub const DOMAIN_HALF_WIDTH: f64 = 0.7;

pub const MINOR_1_BOUND: f64 = 3.0;
pub const DET_BOUND: f64 = 5.0;

pub fn example_eval(p: [f64; 2]) -> [f64; 2] {
    let [x, y] = p;
    let s = x * x + y * y;
    if s == 0.0 {
        return [0.0, 0.0];
    }
    let w = 1.0 / s;
    [8.0 * x + x * x * x * Float::cos(w), 8.0 * y + y * y * y * Float::sin(w)]
}

/// Entries obtained by differentiating [`example_eval`] directly.
pub fn example_jacobian(p: [f64; 2]) -> Matrix {
    let [x, y] = p;
    let s = x * x + y * y;
    if s < ORIGIN_RADIUS_SQ {
        return Matrix::diagonal(&[8.0, 8.0]);
    }
    let w = 1.0 / s;
    let (sin_w, cos_w) = (Float::sin(w), Float::cos(w));
    let s2 = s * s;
    // d/dx of 1/s is -2x/s^2, d/dy is -2y/s^2.
    let a11 = 8.0 + 3.0 * x * x * cos_w + 2.0 * Float::powi(x, 4) / s2 * sin_w;
    let a12 = 2.0 * Float::powi(x, 3) * y / s2 * sin_w;
    let a21 = -2.0 * x * Float::powi(y, 3) / s2 * cos_w;
    let a22 = 8.0 + 3.0 * y * y * sin_w - 2.0 * Float::powi(y, 4) / s2 * cos_w;
    Matrix::new(2, 2, alloc::vec![a11, a12, a21, a22]).expect("finite entries")
}

/// The fixture as a pure map on `[-0.7, 0.7]^2`.
pub fn paper_example() -> DifferentiableMap {
    paper_example_on(BoxDomain::cube(2, -DOMAIN_HALF_WIDTH, DOMAIN_HALF_WIDTH).expect("valid box"))
}

pub fn paper_example_on(domain: BoxDomain) -> DifferentiableMap {
    DifferentiableMap::pure(2, domain, |x| Ok(example_eval([x[0], x[1]]).to_vec()))
        .expect("two-dimensional domain")
        .with_jacobian(|x, _| example_jacobian([x[0], x[1]]))
}

/// `|F(h) - JF(0) h| / |h|`, Euclidean norms, for `h != 0`.
pub fn origin_residual(h: [f64; 2]) -> f64 {
    let f = example_eval(h);
    let (dx, dy) = (f[0] - 8.0 * h[0], f[1] - 8.0 * h[1]);
    Float::hypot(dx, dy) / Float::hypot(h[0], h[1])
}

#[derive(Clone, Debug, PartialEq)]
pub struct RadialScan {
    pub points: usize,
    /// Largest `origin_residual(h) / |h|^2`; differentiability at the
    /// origin with the cubic envelope means this stays `<= 1`.
    pub worst_ratio: f64,
    pub worst_point: [f64; 2],
    /// Points where the residual exceeded `|h|^2`.
    pub violations: usize,
    /// Points where it exceeded `|h|^2 + u |F(h)| / |h|`, `u` the unit
    /// roundoff: the envelope plus the error of evaluating `F` in double
    /// precision. Below `|h|` of about `1e-7`, `|h|^3` is comparable to one
    /// ulp of `8 |h|`, so only this count is free of rounding.
    pub violations_beyond_rounding: usize,
}

/// Scans [`origin_residual`] against the envelope `|h|^2` on radii
/// `10^-1, .., 10^-decades` (`per_decade` radii per decade) along `angles`
/// equally spaced directions.
pub fn origin_residual_scan(decades: u32, per_decade: u32, angles: u32) -> RadialScan {
    let u = f64::EPSILON / 2.0;
    let mut scan =
        RadialScan { points: 0, worst_ratio: 0.0, worst_point: [0.0, 0.0], violations: 0, violations_beyond_rounding: 0 };
    for step in 0..=(decades - 1) * per_decade {
        let r = Float::powf(10.0, -1.0 - step as f64 / per_decade as f64);
        for a in 0..angles {
            let theta = 2.0 * core::f64::consts::PI * (a as f64 + 0.5) / angles as f64;
            let h = [r * Float::cos(theta), r * Float::sin(theta)];
            let r2 = h[0] * h[0] + h[1] * h[1];
            let residual = origin_residual(h);
            let ratio = residual / r2;
            scan.points += 1;
            if residual > r2 {
                scan.violations += 1;
                let f = example_eval(h);
                if residual > r2 + u * Float::hypot(f[0], f[1]) / Float::sqrt(r2) {
                    scan.violations_beyond_rounding += 1;
                }
            }
            if ratio > scan.worst_ratio {
                scan.worst_ratio = ratio;
                scan.worst_point = h;
            }
        }
    }
    scan
}

#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub samples: usize,
    /// Extremes of `J11(r, 0) - 8 - 3 r^2 cos(1/r^2)` and where they occur.
    pub max: f64,
    pub r_at_max: f64,
    pub min: f64,
    pub r_at_min: f64,
}

/// Along `(r, 0)` the `(1, 1)` entry minus its vanishing part is
/// `2 sin(1/r^2)`. Samples it at `r = 1/sqrt(pi/2 + k pi)` for
/// `k_start <= k <= k_end`, where it alternates between about `2` and `-2`,
/// so the entry has no limit at the origin.
pub fn discontinuity_witness(k_start: u64, k_end: u64) -> Witness {
    use core::f64::consts::{FRAC_PI_2, PI};
    let mut w = Witness { samples: 0, max: f64::NEG_INFINITY, r_at_max: 0.0, min: f64::INFINITY, r_at_min: 0.0 };
    for k in k_start..=k_end {
        let r = 1.0 / Float::sqrt(FRAC_PI_2 + k as f64 * PI);
        let j11 = example_jacobian([r, 0.0]).get(0, 0);
        let v = j11 - 8.0 - 3.0 * r * r * Float::cos(1.0 / (r * r));
        w.samples += 1;
        if v > w.max {
            w.max = v;
            w.r_at_max = r;
        }
        if v < w.min {
            w.min = v;
            w.r_at_min = r;
        }
    }
    w
}

#[derive(Clone, Debug, PartialEq)]
pub enum FixtureError {
    /// The sampling box leaves `[-1, 1]^2`, where the bounds are not claimed.
    BoxOutsideUnitSquare,
    Audit(AuditError),
    /// A bound failed: the fixture implementation is wrong.
    BoundViolated { k: usize, min_abs: f64, bound: f64 },
}

impl fmt::Display for FixtureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::BoxOutsideUnitSquare => f.write_str("sampling box must lie inside [-1, 1]^2"),
            Self::Audit(e) => write!(f, "{e}"),
            Self::BoundViolated { k, min_abs, bound } => write!(
                f,
                "fixture integrity failure: minor {k} reached {min_abs} below its bound {bound}"
            ),
        }
    }
}

impl core::error::Error for FixtureError {}

/// Audits both leading minors of `JF` on `region` and checks them against
/// the bounds 3 and 5 (up to `1e-12`).
pub fn example_minor_bounds(region: &SampleBox, budget: usize) -> Result<(MinorReport, MinorReport), FixtureError> {
    const TOL: f64 = 1e-12;
    if region.dim() != 2 || region.lower().iter().chain(region.upper()).any(|v| v.abs() > 1.0) {
        return Err(FixtureError::BoxOutsideUnitSquare);
    }
    let f = paper_example_on(BoxDomain::cube(2, -1.0, 1.0).expect("valid box"));
    let mut reports = audit_minors(&f, region, budget).map_err(FixtureError::Audit)?.into_iter();
    let (first, second) = (reports.next().expect("order 1"), reports.next().expect("order 2"));
    for (report, bound) in [(&first, MINOR_1_BOUND), (&second, DET_BOUND)] {
        if report.min_abs < bound - TOL {
            return Err(FixtureError::BoundViolated { k: report.k, min_abs: report.min_abs, bound });
        }
    }
    Ok((first, second))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit::Verdict;
    use crate::linalg::det;

    #[test]
    fn origin_branch() {
        assert_eq!(example_eval([0.0, 0.0]), [0.0, 0.0]);
        assert_eq!(example_jacobian([0.0, 0.0]), Matrix::diagonal(&[8.0, 8.0]));
        assert_eq!(det(&example_jacobian([0.0, 0.0])).unwrap(), 64.0);
    }

    #[test]
    fn value_on_unit_circle() {
        // 1/(x^2+y^2) = 1 at (0.6, 0.8).
        let v = example_eval([0.6, 0.8]);
        assert!((v[0] - (4.8 + 0.216 * 1f64.cos())).abs() < 1e-14);
        assert!((v[1] - (6.4 + 0.512 * 1f64.sin())).abs() < 1e-14);
        // 30-digit reference values.
        assert!((v[0] - 4.916705298067518).abs() < 1e-14);
        assert!((v[1] - 6.830833144221643).abs() < 1e-14);
    }

    #[test]
    fn value_at_reference_point() {
        // 30-digit reference values; 1/(x^2+y^2) = 20.
        let v = example_eval([0.1, 0.2]);
        assert!((v[0] - 0.8004080820618134).abs() < 1e-15);
        assert!((v[1] - 1.607303562005821).abs() < 1e-15);
    }

    #[test]
    fn odd_symmetry_is_exact() {
        for k in 1..=20 {
            let t = k as f64 * 0.37;
            let p = [0.6 * Float::sin(t), 0.6 * Float::cos(1.7 * t)];
            let f = example_eval(p);
            let g = example_eval([-p[0], -p[1]]);
            assert_eq!(g, [-f[0], -f[1]]);
        }
    }

    #[test]
    fn origin_residual_examples() {
        // F(h, 0) - 8h = (h^3 cos(1/h^2), 0).
        let h = 0.05;
        let expected = Float::abs(h * h * Float::cos(1.0 / (h * h)));
        assert!((origin_residual([h, 0.0]) - expected).abs() < 1e-15);
        let scan = origin_residual_scan(3, 2, 8);
        assert_eq!(scan.points, 5 * 8);
        assert!(scan.worst_ratio <= 1.0);
    }

    #[test]
    fn witness_alternates() {
        let w = discontinuity_witness(0, 3);
        assert_eq!(w.samples, 4);
        assert!(w.max > 1.99 && w.min < -1.99);
    }

    #[test]
    fn minor_bounds_on_boxes() {
        let (m1, m2) = example_minor_bounds(&SampleBox::cube(2, -0.1, 0.1).unwrap(), 1000).unwrap();
        assert!(m1.min_abs >= 3.0 && m2.min_abs >= 5.0);
        assert_eq!(m2.verdict, Verdict::NoViolationFound);

        let (m1, m2) = example_minor_bounds(&SampleBox::point(&[0.0, 0.0]), 1).unwrap();
        assert_eq!((m1.min_abs, m2.min_abs), (8.0, 64.0));

        assert_eq!(
            example_minor_bounds(&SampleBox::cube(2, -1.5, 1.5).unwrap(), 10),
            Err(FixtureError::BoxOutsideUnitSquare)
        );
    }
}
