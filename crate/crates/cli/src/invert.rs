use std::io::Write;
use std::time::Instant;

use implicit_core::implicit::SolveError;
use implicit_core::inverse::{invert_at, InverseProblem};
use implicit_core::Vector;
use serde_json::json;

use crate::args::{Format, InvertArgs};
use crate::config::FileConfig;
use crate::error::CliError;
use crate::output::{config_json, csv_writer, domain_json, error_json, fmt17, with_sink, write_json_line};
use crate::parallel::parallel_map;
use crate::problem::{collect_points, parse_points, resolve_problem, resolve_solver, setup_error, threads, Role};
use crate::{format_of, out_path};

struct Inverted {
    x: Vector,
    /// `||F(x) - y||_inf`.
    round_trip_error: f64,
}

fn invert_one(p: &InverseProblem, y: &[f64]) -> Result<Inverted, SolveError> {
    let x = invert_at(p, y)?;
    let fx = p.map().evaluate(x.as_slice(), &[])?;
    let round_trip_error = fx.iter().zip(y).fold(0.0f64, |a, (u, v)| a.max((u - v).abs()));
    Ok(Inverted { x, round_trip_error })
}

pub fn run(args: &InvertArgs, echo: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let file = FileConfig::load(args.problem.config.as_deref())?;
    let spec = resolve_problem(&args.problem, &file, Role::Invert)?;
    let cfg = resolve_solver(&args.solver, &file)?;
    let format = format_of(args.output.format, &file, Format::Csv)?;
    let out = out_path(args.output.out.as_deref(), &file);
    let n = spec.map.n();
    let targets = parse_points("target", &args.targets, file.target.as_ref())?;
    let ys = collect_points("grid", args.grid.as_deref().or(file.grid.as_deref()), "target", &targets, n)?;
    let workers = threads(args.threads, file.threads)?;
    let domain = spec.map.domain().clone();
    let problem = InverseProblem::new(spec.map, spec.seed_a.clone(), spec.seed_b.clone(), cfg).map_err(setup_error)?;

    let start = Instant::now();
    let results = parallel_map(&ys, workers, |y| invert_one(&problem, y));
    let failures = results.iter().filter(|r| r.is_err()).count();

    with_sink(out.as_deref(), stdout, |w| {
        match format {
            Format::Csv => {
                let mut csv = csv_writer(&mut *w);
                let header: Vec<String> = (1..=n)
                    .map(|i| format!("y{i}"))
                    .chain((1..=n).map(|i| format!("x{i}")))
                    .chain(["round_trip_error".to_string()])
                    .collect();
                csv.write_record(&header)?;
                for (y, r) in ys.iter().zip(&results) {
                    if let Ok(v) = r {
                        let row: Vec<String> =
                            y.iter().chain(v.x.as_slice()).map(|&c| fmt17(c)).chain([fmt17(v.round_trip_error)]).collect();
                        csv.write_record(&row)?;
                    }
                }
                csv.flush()?;
                for (index, (y, r)) in ys.iter().zip(&results).enumerate() {
                    if let Err(e) = r {
                        write_json_line(stderr, &json!({ "record": "failure", "index": index, "y": y, "error": error_json(e) }))?;
                    }
                }
            }
            Format::Jsonl => {
                write_json_line(
                    w,
                    &json!({
                        "record": "run",
                        "command": echo,
                        "problem": spec.label,
                        "exprs": spec.exprs,
                        "n": n,
                        "x0": spec.seed_a.as_slice(),
                        "y0": spec.seed_b.as_slice(),
                        "domain": domain_json(&domain),
                        "config": config_json(problem.config()),
                    }),
                )?;
                for (index, (y, r)) in ys.iter().zip(&results).enumerate() {
                    let record = match r {
                        Ok(v) => json!({
                            "record": "point",
                            "index": index,
                            "y": y,
                            "x": v.x.as_slice(),
                            "round_trip_error": v.round_trip_error,
                        }),
                        Err(e) => json!({ "record": "failure", "index": index, "y": y, "error": error_json(e) }),
                    };
                    write_json_line(w, &record)?;
                }
                write_json_line(w, &json!({ "record": "summary", "points": results.len(), "failures": failures }))?;
            }
        }
        Ok(())
    })?;
    writeln!(
        stderr,
        "inverted {} of {} targets in {:.3} s",
        results.len() - failures,
        results.len(),
        start.elapsed().as_secs_f64()
    )?;
    Ok(if failures == 0 { 0 } else { 1 })
}
