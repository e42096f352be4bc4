use std::io::Write;
use std::time::Instant;

use implicit_core::implicit::{solve_implicit, solve_on_grid, GridPoint, ImplicitProblem};
use serde_json::json;

use crate::args::{Format, SolveArgs};
use crate::config::FileConfig;
use crate::error::CliError;
use crate::output::{config_json, csv_writer, domain_json, error_json, fmt17, with_sink, write_json_line};
use crate::parallel::parallel_map;
use crate::problem::{collect_points, parse_points, resolve_problem, resolve_solver, setup_error, threads, Role};
use crate::{format_of, out_path};

pub fn run(args: &SolveArgs, echo: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let file = FileConfig::load(args.problem.config.as_deref())?;
    let spec = resolve_problem(&args.problem, &file, Role::Solve)?;
    let cfg = resolve_solver(&args.solver, &file)?;
    let format = format_of(args.output.format, &file, Format::Csv)?;
    let out = out_path(args.output.out.as_deref(), &file);
    let (n, m) = (spec.map.n(), spec.map.m());
    let points = parse_points("at", &args.points, file.at.as_ref())?;
    let grid = collect_points("grid", args.grid.as_deref().or(file.grid.as_deref()), "at", &points, n)?;
    let continuation = args.continuation || file.continuation.unwrap_or(false);
    let workers = threads(args.threads, file.threads)?;
    let domain = spec.map.domain().clone();
    let problem = ImplicitProblem::new(spec.map, spec.seed_a.clone(), spec.seed_b.clone(), cfg).map_err(setup_error)?;

    let start = Instant::now();
    let results: Vec<GridPoint> = if continuation {
        solve_on_grid(&problem, &grid, true)
    } else {
        parallel_map(&grid, workers, |x| GridPoint { x: x.clone(), outcome: solve_implicit(&problem, x) })
    };
    let failures = results.iter().filter(|g| g.outcome.is_err()).count();

    with_sink(out.as_deref(), stdout, |w| {
        match format {
            Format::Csv => {
                let mut csv = csv_writer(&mut *w);
                let header: Vec<String> = (1..=n)
                    .map(|i| format!("x{i}"))
                    .chain((1..=m).map(|i| format!("y{i}")))
                    .chain(["residual".to_string(), "iterations".to_string()])
                    .collect();
                csv.write_record(&header)?;
                for g in &results {
                    if let Ok(v) = &g.outcome {
                        let row: Vec<String> = g
                            .x
                            .iter()
                            .chain(v.y.as_slice())
                            .map(|&c| fmt17(c))
                            .chain([fmt17(v.residual), v.inner_solves.to_string()])
                            .collect();
                        csv.write_record(&row)?;
                    }
                }
                csv.flush()?;
                for (index, g) in results.iter().enumerate() {
                    if let Err(e) = &g.outcome {
                        write_json_line(stderr, &json!({ "record": "failure", "index": index, "x": g.x, "error": error_json(e) }))?;
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
                        "m": m,
                        "seed_a": spec.seed_a.as_slice(),
                        "seed_b": spec.seed_b.as_slice(),
                        "domain": domain_json(&domain),
                        "continuation": continuation,
                        "config": config_json(problem.config()),
                    }),
                )?;
                for (index, g) in results.iter().enumerate() {
                    let record = match &g.outcome {
                        Ok(v) => json!({
                            "record": "point",
                            "index": index,
                            "x": g.x,
                            "y": v.y.as_slice(),
                            "residual": v.residual,
                            "iterations": v.inner_solves,
                        }),
                        Err(e) => json!({ "record": "failure", "index": index, "x": g.x, "error": error_json(e) }),
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
        "solved {} of {} points in {:.3} s",
        results.len() - failures,
        results.len(),
        start.elapsed().as_secs_f64()
    )?;
    Ok(if failures == 0 { 0 } else { 1 })
}
