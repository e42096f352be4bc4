use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use implicit_core::audit::{MeanValueReport, MinorReport, MixedReport};
use implicit_core::implicit::{SolveError, SolverConfig};
use implicit_core::map::BoxDomain;
use implicit_core::scalar::Accel;
use serde_json::{json, Value};

use crate::error::CliError;

/// Note attached to every audit: sampling can refute, never certify.
pub const AUDIT_NOTE: &str =
    "sampled check: a violation refutes the hypothesis, no violation does not certify it on the whole box";

/// 17 significant digits, enough to round-trip any double.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

pub fn write_json_line(w: &mut dyn Write, v: &Value) -> Result<(), CliError> {
    serde_json::to_writer(&mut *w, v)?;
    w.write_all(b"\n")?;
    Ok(())
}

/// Runs `f` against `--out` if given, else stdout.
pub fn with_sink<T>(
    out: Option<&Path>,
    stdout: &mut dyn Write,
    f: impl FnOnce(&mut dyn Write) -> Result<T, CliError>,
) -> Result<T, CliError> {
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            let t = f(&mut w)?;
            w.flush()?;
            Ok(t)
        }
        None => {
            let t = f(stdout)?;
            stdout.flush()?;
            Ok(t)
        }
    }
}

pub fn config_json(cfg: &SolverConfig) -> Value {
    json!({
        "residual_tol": cfg.residual_tol,
        "width_tol": cfg.width_tol,
        "max_iter": cfg.max_iter,
        "bracket_r0": cfg.bracket_r0,
        "max_expansions": cfg.max_expansions,
        "accel": match cfg.accel { Accel::Bisect => "bisect", Accel::Illinois => "illinois" },
        "max_unknowns": cfg.max_unknowns,
        "seed_tol": cfg.seed_tol,
    })
}

pub fn domain_json(d: &BoxDomain) -> Value {
    json!({ "lower": d.lower(), "upper": d.upper() })
}

pub fn error_json(e: &SolveError) -> Value {
    let kind = match e {
        SolveError::Bracket { .. } => "bracket",
        SolveError::Convergence { .. } => "convergence",
        SolveError::Residual { .. } => "residual",
        SolveError::Singular { .. } => "singular",
        SolveError::Map(_) => "evaluation",
        _ => "precondition",
    };
    let mut v = json!({ "kind": kind, "reason": e.to_string() });
    let extra = match e {
        SolveError::Bracket { equation, x, fixed, lo, hi, f_lo, f_hi } => json!({
            "equation": equation, "x": x, "fixed": fixed, "lo": lo, "hi": hi, "f_lo": f_lo, "f_hi": f_hi,
        }),
        SolveError::Convergence { equation, x, fixed, best, residual } => json!({
            "equation": equation, "x": x, "fixed": fixed, "best": best, "residual": residual,
        }),
        SolveError::Residual { y, residual, bound } => json!({ "y": y, "residual": residual, "bound": bound }),
        SolveError::Singular { minors, .. } => json!({ "minors": minors }),
        _ => json!({}),
    };
    if let (Some(obj), Value::Object(more)) = (v.as_object_mut(), extra) {
        obj.extend(more);
    }
    v
}

pub fn minor_json(r: &MinorReport) -> Value {
    json!({
        "record": "minor",
        "k": r.k,
        "min_abs": r.min_abs,
        "argmin": r.argmin,
        "samples": r.samples,
        "skipped": r.skipped,
        "violation_tol": r.violation_tol,
        "sign_change": r.sign_change,
        "verdict": r.verdict.as_str(),
    })
}

pub fn mixed_json(r: &MixedReport) -> Value {
    json!({
        "record": "mixed",
        "trials": r.trials,
        "skipped": r.skipped,
        "min_abs_det": r.min_abs_det,
        "worst": r.worst,
        "violation_tol": r.violation_tol,
        "sign_change": r.sign_change,
        "verdict": r.verdict.as_str(),
    })
}

pub fn mean_value_json(r: &MeanValueReport) -> Value {
    let failures: Vec<Value> =
        r.failures.iter().map(|f| json!({ "segment": f.segment, "row": f.row, "residual": f.residual })).collect();
    json!({
        "record": "mean-value",
        "segments": r.segments,
        "rows_verified": r.rows_verified,
        "max_residual": r.max_residual,
        "tol": r.tol,
        "failures": failures,
    })
}
