use std::io::Write;

use implicit_core::audit::{audit_mixed_determinant, SampleBox};
use implicit_core::example::{
    discontinuity_witness, example_eval, example_jacobian, example_minor_bounds, origin_residual_scan, paper_example,
    DET_BOUND, DOMAIN_HALF_WIDTH,
};
use implicit_core::halton::disc_points;
use implicit_core::implicit::SolverConfig;
use implicit_core::inverse::{round_trip_check, InverseProblem};
use implicit_core::{Matrix, Vector};

use crate::args::DemoArgs;
use crate::error::CliError;

pub const DEFAULT_BUDGET: usize = 5000;
pub const ROUND_TRIP_TOL: f64 = 1e-8;
pub const JACOBIAN_TOL: f64 = 1e-6;

struct Check {
    claim: &'static str,
    pass: bool,
    detail: String,
}

fn checks(args: &DemoArgs) -> Result<Vec<Check>, CliError> {
    let budget = args.budget.unwrap_or(DEFAULT_BUDGET);
    if budget == 0 {
        return Err(CliError::invalid("budget", "must be at least 1"));
    }
    let rng_seed = args.rng_seed.unwrap_or(0);
    let mut cfg = SolverConfig::default();
    if let Some(t) = args.tol_residual {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::invalid("tol-residual", format!("{t} must be positive and finite")));
        }
        cfg.residual_tol = t;
    }
    let rt_tol = args.tol_round_trip.unwrap_or(ROUND_TRIP_TOL);
    if !(rt_tol >= 0.0 && rt_tol.is_finite()) {
        return Err(CliError::invalid("tol-round-trip", format!("{rt_tol} must be non-negative and finite")));
    }
    let mut out = Vec::new();

    let origin_ok = example_eval([0.0, 0.0]) == [0.0, 0.0] && example_jacobian([0.0, 0.0]) == Matrix::diagonal(&[8.0, 8.0]);
    out.push(Check {
        claim: "F(0,0) = (0,0) and JF(0,0) = diag(8,8)",
        pass: origin_ok,
        detail: format!("JF(0,0) = {:?}", example_jacobian([0.0, 0.0]).as_slice()),
    });

    let scan = origin_residual_scan(6, 10, 16);
    out.push(Check {
        claim: "|F(h) - 8h| / |h| <= |h|^2 for 1e-6 <= |h| <= 0.1",
        pass: scan.violations == 0,
        detail: format!("{} points, worst ratio {:.4}, {} violations", scan.points, scan.worst_ratio, scan.violations),
    });

    let scan = origin_residual_scan(8, 10, 16);
    out.push(Check {
        claim: "same envelope down to |h| = 1e-8, allowing the rounding of F in double precision",
        pass: scan.violations_beyond_rounding == 0,
        detail: format!(
            "{} points, {} strict violations, {} beyond rounding",
            scan.points, scan.violations, scan.violations_beyond_rounding
        ),
    });

    let k0 = (1e6 / std::f64::consts::PI).ceil() as u64;
    let w = discontinuity_witness(k0, 1_000_000);
    out.push(Check {
        claim: "J11 - 8 - 3r^2 cos(1/r^2) swings past +-1.9 for r < 1e-3 along (r, 0)",
        pass: w.max >= 1.9 && w.min <= -1.9 && w.r_at_max < 1e-3 && w.r_at_min < 1e-3,
        detail: format!("max {:.6} at r = {:.3e}, min {:.6} at r = {:.3e}", w.max, w.r_at_max, w.min, w.r_at_min),
    });

    let square = SampleBox::cube(2, -DOMAIN_HALF_WIDTH, DOMAIN_HALF_WIDTH).expect("valid box");
    let (pass, detail) = match example_minor_bounds(&square, budget) {
        Ok((m1, m2)) => (true, format!("min |m1| = {:.6}, min |det| = {:.6} over {} samples", m1.min_abs, m2.min_abs, m2.samples)),
        Err(e) => (false, e.to_string()),
    };
    out.push(Check { claim: "leading minors: |m1| >= 3 and |det JF| >= 5 on [-0.7, 0.7]^2", pass, detail });

    let (pass, detail) = match audit_mixed_determinant(&paper_example(), &square, budget, rng_seed) {
        Ok(r) => (r.min_abs_det >= DET_BOUND - 1e-12, format!("min |det| = {:.6} over {} trials", r.min_abs_det, r.trials)),
        Err(e) => (false, e.to_string()),
    };
    out.push(Check { claim: "mixed-point determinants stay >= 5 on [-0.7, 0.7]^2", pass, detail });

    let (pass, detail) = match InverseProblem::at_base_point(paper_example(), Vector::zeros(2), cfg) {
        Ok(p) => {
            let xs: Vec<Vec<f64>> = disc_points(100, 0.4).iter().map(|q| q.to_vec()).collect();
            let r = round_trip_check(&p, &xs);
            let pass = r.failures.is_empty() && r.max_round_trip_error <= rt_tol && r.max_jacobian_error <= JACOBIAN_TOL;
            let mut detail = format!(
                "{} of 100 points inverted, max |G(F(x)) - x| = {:.3e} (bound {rt_tol:e}), max |JG JF - I| = {:.3e}",
                r.points.len(),
                r.max_round_trip_error,
                r.max_jacobian_error
            );
            if let Some((x, e)) = r.failures.first() {
                detail.push_str(&format!("; first failure at {x:?}: {e}"));
            }
            (pass, detail)
        }
        Err(e) => (false, e.to_string()),
    };
    out.push(Check { claim: "G(F(x)) = x and JG JF = I on 100 Halton points of the 0.4-disc", pass, detail });
    Ok(out)
}

pub fn run(args: &DemoArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let start = std::time::Instant::now();
    let results = checks(args)?;
    writeln!(stdout, "F(x, y) = (8x + x^3 cos(1/(x^2+y^2)), 8y + y^3 sin(1/(x^2+y^2))), F(0, 0) = (0, 0)")?;
    for c in &results {
        writeln!(stdout, "[{}] {}\n       {}", if c.pass { "PASS" } else { "FAIL" }, c.claim, c.detail)?;
    }
    let passed = results.iter().filter(|c| c.pass).count();
    writeln!(stdout, "{passed} of {} checks passed", results.len())?;
    writeln!(stderr, "demo finished in {:.3} s", start.elapsed().as_secs_f64())?;
    Ok(if passed == results.len() { 0 } else { 1 })
}
