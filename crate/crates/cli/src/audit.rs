use std::io::Write;
use std::time::Instant;

use implicit_core::audit::{audit_mean_value_matrix, audit_minors, audit_mixed_determinant, AuditError, SampleBox, Verdict};
use serde_json::json;

use crate::args::{AuditArgs, Format};
use crate::config::FileConfig;
use crate::error::CliError;
use crate::output::{mean_value_json, minor_json, mixed_json, with_sink, write_json_line, AUDIT_NOTE};
use crate::problem::{resolve_problem, Role};
use crate::{format_of, out_path};

pub const DEFAULT_BUDGET: usize = 2000;
pub const MEAN_VALUE_TOL: f64 = 1e-7;

fn audit_error(e: AuditError) -> CliError {
    let field = match e {
        AuditError::ZeroBudget => "budget",
        _ => "box",
    };
    CliError::invalid(field, e.to_string())
}

pub fn run(args: &AuditArgs, echo: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let file = FileConfig::load(args.problem.config.as_deref())?;
    let spec = resolve_problem(&args.problem, &file, Role::Audit)?;
    if format_of(args.output.format, &file, Format::Jsonl)? != Format::Jsonl {
        return Err(CliError::invalid("format", "audit reports are JSON-lines only"));
    }
    let out = out_path(args.output.out.as_deref(), &file);
    let budget = args.budget.or(file.budget).unwrap_or(DEFAULT_BUDGET);
    let rng_seed = args.rng_seed.or(file.rng_seed).unwrap_or(0);
    let pairs = args.pairs.or(file.pairs).unwrap_or(0);
    let region = match &spec.region {
        Some((lower, upper)) => SampleBox::new(lower.clone(), upper.clone()).map_err(audit_error)?,
        None if spec.map.domain().is_bounded() => SampleBox::from(spec.map.domain()),
        None => return Err(CliError::invalid("box", "the domain is unbounded; give a sampling box")),
    };

    let start = Instant::now();
    let minors = audit_minors(&spec.map, &region, budget).map_err(audit_error)?;
    let mixed = audit_mixed_determinant(&spec.map, &region, budget, rng_seed).map_err(audit_error)?;
    let mean_value = if pairs > 0 {
        Some(audit_mean_value_matrix(&spec.map, &region, pairs, rng_seed, MEAN_VALUE_TOL).map_err(audit_error)?)
    } else {
        None
    };
    let violated = minors.iter().any(|r| r.verdict == Verdict::ViolationFound) || mixed.verdict == Verdict::ViolationFound;
    let overall = if violated { Verdict::ViolationFound } else { Verdict::NoViolationFound };

    with_sink(out.as_deref(), stdout, |w| {
        write_json_line(
            w,
            &json!({
                "record": "run",
                "command": echo,
                "problem": spec.label,
                "exprs": spec.exprs,
                "n": spec.map.n(),
                "m": spec.map.m(),
                "box": { "lower": region.lower(), "upper": region.upper() },
                "budget": budget,
                "rng_seed": rng_seed,
                "pairs": pairs,
            }),
        )?;
        for r in &minors {
            write_json_line(w, &minor_json(r))?;
        }
        write_json_line(w, &mixed_json(&mixed))?;
        if let Some(mv) = &mean_value {
            write_json_line(w, &mean_value_json(mv))?;
        }
        write_json_line(w, &json!({ "record": "summary", "verdict": overall.as_str(), "note": AUDIT_NOTE }))
    })?;
    writeln!(stderr, "audit finished in {:.3} s", start.elapsed().as_secs_f64())?;
    Ok(0)
}
