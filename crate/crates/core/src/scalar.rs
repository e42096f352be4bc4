//! Root of a strictly monotone scalar section on a sign-changing bracket.
//!
//! Only continuity and strict monotonicity along the section are assumed, so
//! everything here is bracketing: plain bisection, or Illinois-modified
//! regula falsi with a bisection safeguard. The bracket always keeps a strict
//! sign change.

use core::fmt;

/// Update rule inside the bracket.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Accel {
    Bisect,
    #[default]
    Illinois,
}

/// Stopping rule for [`solve_monotone`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootConfig {
    /// Stop once `|psi(root)| <= residual_tol`.
    pub residual_tol: f64,
    /// Relative width tolerance: stop once the bracket is narrower than
    /// `width_tol * (1 + |lo| + |hi|)` of the initial bracket.
    pub width_tol: f64,
    pub max_iter: usize,
    pub accel: Accel,
}

impl Default for RootConfig {
    fn default() -> Self {
        Self { residual_tol: 1e-11, width_tol: 1e-13, max_iter: 200, accel: Accel::Illinois }
    }
}

/// Interval with strictly opposite, nonzero end values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bracket {
    lo: f64,
    hi: f64,
    f_lo: f64,
    f_hi: f64,
}

impl Bracket {
    /// Returns `None` unless `lo < hi` and the end values have strictly
    /// opposite signs.
    pub fn new(lo: f64, hi: f64, f_lo: f64, f_hi: f64) -> Option<Self> {
        let opposite = (f_lo < 0.0 && f_hi > 0.0) || (f_lo > 0.0 && f_hi < 0.0);
        (lo < hi && opposite).then_some(Self { lo, hi, f_lo, f_hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn f_lo(&self) -> f64 {
        self.f_lo
    }

    pub fn f_hi(&self) -> f64 {
        self.f_hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Direction of a monotone section: `+1` increasing, `-1` decreasing.
pub fn monotone_direction(b: &Bracket) -> i8 {
    if b.f_lo < 0.0 { 1 } else { -1 }
}

/// Either a usable bracket or a point where the section is exactly zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BracketSearch {
    Bracket(Bracket),
    ExactRoot(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RootResult {
    pub root: f64,
    pub residual: f64,
    pub iterations: usize,
    /// Width of the last retained bracket (0 for exact hits).
    pub width: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RootError<E> {
    /// No sign change on any tried interval.
    NoBracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    /// Iteration cap reached; `best` is the iterate with smallest residual.
    NoConvergence { best: f64, residual: f64, width: f64, iterations: usize },
    /// The section produced a non-finite value.
    NonFinite { at: f64 },
    /// The section itself failed.
    Eval { at: f64, error: E },
    InvalidInput(&'static str),
}

impl<E: fmt::Display> fmt::Display for RootError<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NoBracket { lo, hi, f_lo, f_hi } => write!(
                f,
                "no sign change on [{lo}, {hi}] (values {f_lo:e}, {f_hi:e})"
            ),
            Self::NoConvergence { best, residual, width, iterations } => write!(
                f,
                "no convergence after {iterations} iterations (best {best}, residual {residual:e}, width {width:e})"
            ),
            Self::NonFinite { at } => write!(f, "section value is not finite at {at}"),
            Self::Eval { at, error } => write!(f, "section evaluation failed at {at}: {error}"),
            Self::InvalidInput(what) => f.write_str(what),
        }
    }
}

impl<E: fmt::Debug + fmt::Display> core::error::Error for RootError<E> {}

fn eval<E, F>(psi: &mut F, t: f64) -> Result<f64, RootError<E>>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let v = psi(t).map_err(|error| RootError::Eval { at: t, error })?;
    if v.is_finite() { Ok(v) } else { Err(RootError::NonFinite { at: t }) }
}

/// Searches `[center - r, center + r]` for a sign change, doubling `r` from
/// `r0` up to `max_expansions` times.
pub fn make_bracket<E, F>(
    psi: F,
    center: f64,
    r0: f64,
    max_expansions: usize,
) -> Result<BracketSearch, RootError<E>>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    make_bracket_within(psi, center, r0, max_expansions, (f64::NEG_INFINITY, f64::INFINITY))
}

/// [`make_bracket`] with both ends clipped to `limits`.
///
/// An evaluation failure on the first interval is returned as is; on a later
/// expansion it ends the search with [`RootError::NoBracket`] for the last
/// interval that evaluated.
pub fn make_bracket_within<E, F>(
    mut psi: F,
    center: f64,
    r0: f64,
    max_expansions: usize,
    limits: (f64, f64),
) -> Result<BracketSearch, RootError<E>>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(RootError::InvalidInput("initial bracket radius must be positive and finite"));
    }
    if !(limits.0 <= center && center <= limits.1) {
        return Err(RootError::InvalidInput("bracket center lies outside the limits"));
    }
    let f_center = eval(&mut psi, center)?;
    if f_center == 0.0 {
        return Ok(BracketSearch::ExactRoot(center));
    }
    let mut last: Option<(f64, f64, f64, f64)> = None;
    let mut r = r0;
    for k in 0..=max_expansions {
        let lo = (center - r).max(limits.0);
        let hi = (center + r).min(limits.1);
        let ends = eval(&mut psi, lo).and_then(|f_lo| Ok((f_lo, eval(&mut psi, hi)?)));
        let (f_lo, f_hi) = match ends {
            Ok(v) => v,
            Err(e) if k == 0 => return Err(e),
            Err(_) => break,
        };
        if f_lo == 0.0 {
            return Ok(BracketSearch::ExactRoot(lo));
        }
        if f_hi == 0.0 {
            return Ok(BracketSearch::ExactRoot(hi));
        }
        if let Some(b) = Bracket::new(lo, hi, f_lo, f_hi) {
            return Ok(BracketSearch::Bracket(b));
        }
        last = Some((lo, hi, f_lo, f_hi));
        if lo == limits.0 && hi == limits.1 {
            break;
        }
        r *= 2.0;
    }
    let (lo, hi, f_lo, f_hi) = last.unwrap_or((center, center, f_center, f_center));
    Err(RootError::NoBracket { lo, hi, f_lo, f_hi })
}

/// Converges to the sign change inside `b`.
///
/// Exact zeros are returned immediately with residual 0. Otherwise the
/// result is the best interior iterate once `|psi| <= residual_tol` or the
/// bracket is narrower than the width tolerance.
pub fn solve_monotone<E, F>(mut psi: F, b: &Bracket, cfg: &RootConfig) -> Result<RootResult, RootError<E>>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    if !(cfg.residual_tol > 0.0 && cfg.width_tol > 0.0 && cfg.max_iter >= 1) {
        return Err(RootError::InvalidInput("tolerances must be positive and max_iter at least 1"));
    }
    let (mut lo, mut hi, mut f_lo, mut f_hi) = (b.lo, b.hi, b.f_lo, b.f_hi);
    let width_tol = cfg.width_tol * (1.0 + lo.abs() + hi.abs());
    // Illinois bookkeeping: which end was retained last time (-1 lo, +1 hi).
    let mut stuck_side = 0i8;
    let mut slow_steps = 0u8;
    let mut best = (f64::NAN, f64::INFINITY);
    for iteration in 1..=cfg.max_iter {
        let width = hi - lo;
        let mid = lo + 0.5 * width;
        let mut t = match cfg.accel {
            Accel::Bisect => mid,
            Accel::Illinois if slow_steps >= 2 => {
                slow_steps = 0;
                mid
            }
            Accel::Illinois => lo - f_lo * (hi - lo) / (f_hi - f_lo),
        };
        if !(t > lo && t < hi) {
            t = mid;
        }
        if !(t > lo && t < hi) {
            // No representable point strictly inside: the bracket is as
            // narrow as double precision allows.
            return finish(best, width, iteration, cfg, width_tol);
        }
        let f_t = eval(&mut psi, t)?;
        if f_t.abs() < best.1 {
            best = (t, f_t.abs());
        }
        if f_t == 0.0 || f_t.abs() <= cfg.residual_tol {
            return Ok(RootResult { root: t, residual: f_t.abs(), iterations: iteration, width });
        }
        let same_sign_as_lo = (f_t < 0.0) == (f_lo < 0.0);
        if same_sign_as_lo {
            lo = t;
            f_lo = f_t;
            if stuck_side == 1 {
                f_hi *= 0.5;
            }
            stuck_side = 1;
        } else {
            hi = t;
            f_hi = f_t;
            if stuck_side == -1 {
                f_lo *= 0.5;
            }
            stuck_side = -1;
        }
        let new_width = hi - lo;
        if new_width > 0.5 * width {
            slow_steps += 1;
        } else {
            slow_steps = 0;
        }
        if new_width <= width_tol {
            return Ok(RootResult { root: best.0, residual: best.1, iterations: iteration, width: new_width });
        }
    }
    Err(RootError::NoConvergence { best: best.0, residual: best.1, width: hi - lo, iterations: cfg.max_iter })
}

fn finish<E>(
    best: (f64, f64),
    width: f64,
    iterations: usize,
    cfg: &RootConfig,
    width_tol: f64,
) -> Result<RootResult, RootError<E>> {
    if best.0.is_nan() {
        return Err(RootError::InvalidInput("bracket has no interior points"));
    }
    if best.1 <= cfg.residual_tol || width <= width_tol {
        Ok(RootResult { root: best.0, residual: best.1, iterations, width })
    } else {
        Err(RootError::NoConvergence { best: best.0, residual: best.1, width, iterations })
    }
}
