use implicit_core::builtins::{builtin, NAMES};
use implicit_core::expr::{expression_map, ExprMapError};
use implicit_core::implicit::{SolveError, SolverConfig};
use implicit_core::map::{BoxDomain, DifferentiableMap};
use implicit_core::scalar::Accel;
use implicit_core::Vector;

use crate::args::{AccelArg, ProblemArgs, SolverArgs};
use crate::config::FileConfig;
use crate::error::CliError;

/// Half-width of the default domain for expression problems.
pub const DEFAULT_HALF_WIDTH: f64 = 10.0;

/// What the problem is used for; decides defaults and what `--box` means.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Role {
    Solve,
    Invert,
    Audit,
}

#[derive(Clone, Debug)]
pub struct ProblemSpec {
    /// Built-in name, or `expr`.
    pub label: String,
    pub exprs: Vec<String>,
    pub map: DifferentiableMap,
    pub seed_a: Vector,
    pub seed_b: Vector,
    /// `--box` for audits: the sampling region.
    pub region: Option<(Vec<f64>, Vec<f64>)>,
}

pub fn parse_list(field: &str, text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::invalid(field, format!("'{s}' is not a finite number")))
        })
        .collect()
}

fn parse_number(field: &str, s: &str) -> Result<f64, CliError> {
    let s = s.trim();
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::invalid(field, format!("'{s}' is not a finite number")))
}

fn check_dim(field: &str, found: usize, expected: usize) -> Result<(), CliError> {
    if found != expected {
        return Err(CliError::invalid(field, format!("expected {expected} coordinates, got {found}")));
    }
    Ok(())
}

/// `lo:hi;lo:hi;...` with exactly `dim` ranges.
pub fn parse_box(field: &str, text: &str, dim: usize) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for part in text.split(';') {
        let ends: Vec<&str> = part.split(':').collect();
        if ends.len() != 2 {
            return Err(CliError::invalid(field, format!("'{part}' is not of the form lo:hi")));
        }
        let (lo, hi) = (parse_number(field, ends[0])?, parse_number(field, ends[1])?);
        if lo > hi {
            return Err(CliError::invalid(field, format!("lower end {lo} exceeds upper end {hi}")));
        }
        lower.push(lo);
        upper.push(hi);
    }
    check_dim(field, lower.len(), dim)?;
    Ok((lower, upper))
}

/// `lo:hi:count;...`, one range per coordinate; the last coordinate varies
/// fastest.
pub fn parse_grid(field: &str, text: &str, dim: usize) -> Result<Vec<Vec<f64>>, CliError> {
    let mut axes: Vec<Vec<f64>> = Vec::new();
    for part in text.split(';') {
        let pieces: Vec<&str> = part.split(':').collect();
        if pieces.len() != 3 {
            return Err(CliError::invalid(field, format!("'{part}' is not of the form lo:hi:count")));
        }
        let (lo, hi) = (parse_number(field, pieces[0])?, parse_number(field, pieces[1])?);
        let count: usize = pieces[2]
            .trim()
            .parse()
            .ok()
            .filter(|&c| c >= 1)
            .ok_or_else(|| CliError::invalid(field, format!("count '{}' must be a positive integer", pieces[2].trim())))?;
        if lo > hi {
            return Err(CliError::invalid(field, format!("lower end {lo} exceeds upper end {hi}")));
        }
        let axis = if count == 1 {
            vec![lo]
        } else {
            let last = (count - 1) as f64;
            (0..count)
                .map(|i| {
                    let t = i as f64 / last;
                    lo * (1.0 - t) + hi * t
                })
                .collect()
        };
        axes.push(axis);
    }
    check_dim(field, axes.len(), dim)?;
    let mut points = vec![Vec::new()];
    for axis in &axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    Ok(points)
}

/// Grid points plus explicit points, in that order.
pub fn collect_points(
    grid_field: &str,
    grid: Option<&str>,
    point_field: &str,
    points: &[Vec<f64>],
    dim: usize,
) -> Result<Vec<Vec<f64>>, CliError> {
    let mut out = match grid {
        Some(g) => parse_grid(grid_field, g, dim)?,
        None => Vec::new(),
    };
    for p in points {
        check_dim(point_field, p.len(), dim)?;
        out.push(p.clone());
    }
    if out.is_empty() {
        return Err(CliError::invalid(grid_field, format!("no points given; use --{grid_field} or --{point_field}")));
    }
    Ok(out)
}

pub fn parse_points(field: &str, flags: &[String], file: Option<&Vec<Vec<f64>>>) -> Result<Vec<Vec<f64>>, CliError> {
    if !flags.is_empty() {
        return flags.iter().map(|s| parse_list(field, s)).collect();
    }
    Ok(file.cloned().unwrap_or_default())
}

fn vector(field: &str, v: &[f64]) -> Result<Vector, CliError> {
    Vector::from_slice(v).map_err(|e| CliError::invalid(field, e.to_string()))
}

fn seed(field: &str, flag: Option<&String>, file: Option<&Vec<f64>>) -> Result<Option<Vec<f64>>, CliError> {
    match (flag, file) {
        (Some(s), _) => Ok(Some(parse_list(field, s)?)),
        (None, Some(v)) => Ok(Some(v.clone())),
        (None, None) => Ok(None),
    }
}

fn expr_error(e: ExprMapError) -> CliError {
    match e {
        ExprMapError::Count { .. } => CliError::invalid("expr", e.to_string()),
        ExprMapError::Parse { component, error } => CliError::invalid(&format!("expr[{}]", component + 1), error.to_string()),
        ExprMapError::Map(e) => CliError::invalid("box", e.to_string()),
    }
}

pub fn resolve_problem(args: &ProblemArgs, file: &FileConfig, role: Role) -> Result<ProblemSpec, CliError> {
    let name = args.problem.clone().or_else(|| file.problem.clone());
    let exprs: Vec<String> = if args.exprs.is_empty() { file.expr.clone().unwrap_or_default() } else { args.exprs.clone() };
    let n_flag = args.n.or(file.n);
    let m_flag = args.m.or(file.m);
    let region_text = args.region.clone().or_else(|| file.region.clone());

    let (label, map, default_a, default_b) = match (name, exprs.is_empty()) {
        (Some(_), false) => return Err(CliError::invalid("problem", "give either --problem or --expr, not both")),
        (None, true) => return Err(CliError::invalid("problem", "one of --problem or --expr is required")),
        (Some(name), true) => {
            let b = builtin(&name).ok_or_else(|| {
                CliError::invalid("problem", format!("unknown problem '{name}'; known: {}", NAMES.join(", ")))
            })?;
            if let Some(n) = n_flag.filter(|&n| n != b.map.n()) {
                return Err(CliError::invalid("n", format!("'{name}' has n = {}, not {n}", b.map.n())));
            }
            if let Some(m) = m_flag.filter(|&m| m != b.map.m()) {
                return Err(CliError::invalid("m", format!("'{name}' has m = {}, not {m}", b.map.m())));
            }
            (name, b.map, Some(b.seed_a.into_vec()), Some(b.seed_b.into_vec()))
        }
        (None, false) => {
            let n = n_flag.unwrap_or(if role == Role::Invert { exprs.len() } else { 1 });
            let m = m_flag.unwrap_or(if role == Role::Invert { 0 } else { exprs.len() });
            if n == 0 {
                return Err(CliError::invalid("n", "must be at least 1"));
            }
            let dim = if m == 0 { n } else { n + m };
            let domain = BoxDomain::cube(dim, -DEFAULT_HALF_WIDTH, DEFAULT_HALF_WIDTH).expect("valid default box");
            let sources: Vec<&str> = exprs.iter().map(String::as_str).collect();
            let map = expression_map(&sources, n, m, domain).map_err(expr_error)?;
            ("expr".to_string(), map, None, None)
        }
    };

    match role {
        Role::Solve if map.is_pure() => {
            return Err(CliError::invalid("problem", format!("'{label}' has no unknowns y; use invert")));
        }
        Role::Invert if !map.is_pure() => {
            return Err(CliError::invalid("problem", format!("'{label}' is not a map R^n -> R^n; use solve")));
        }
        _ => {}
    }

    let dim = map.n() + map.m();
    let mut map = map;
    let mut region = None;
    if let Some(text) = region_text {
        let (lower, upper) = parse_box("box", &text, dim)?;
        if role == Role::Audit {
            region = Some((lower, upper));
        } else {
            let domain = BoxDomain::new(lower, upper).map_err(|e| CliError::invalid("box", e.to_string()))?;
            map = map.with_domain(domain).map_err(|e| CliError::invalid("box", e.to_string()))?;
        }
    }

    let a = seed("seed-a", args.seed_a.as_ref(), file.seed_a.as_ref())?;
    let b = seed("seed-b", args.seed_b.as_ref(), file.seed_b.as_ref())?;
    let a_given = a.is_some();
    let seed_a = a.or(default_a).unwrap_or_else(|| vec![0.0; map.n()]);
    check_dim("seed-a", seed_a.len(), map.n())?;
    let seed_b = match b {
        Some(b) => b,
        None if map.is_pure() && (a_given || default_b.is_none()) && role != Role::Audit => map
            .evaluate(&seed_a, &[])
            .map_err(|e| CliError::invalid("seed-a", format!("F(seed-a) failed: {e}")))?,
        None => default_b.unwrap_or_else(|| vec![0.0; map.outputs()]),
    };
    check_dim("seed-b", seed_b.len(), map.outputs())?;
    Ok(ProblemSpec {
        label,
        exprs,
        map,
        seed_a: vector("seed-a", &seed_a)?,
        seed_b: vector("seed-b", &seed_b)?,
        region,
    })
}

pub fn resolve_solver(args: &SolverArgs, file: &FileConfig) -> Result<SolverConfig, CliError> {
    let mut cfg = SolverConfig::default();
    let positive = |field: &str, v: f64| {
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(CliError::invalid(field, format!("{v} must be positive and finite")))
        }
    };
    if let Some(v) = args.tol_residual.or(file.tol_residual) {
        cfg.residual_tol = positive("tol-residual", v)?;
    }
    if let Some(v) = args.tol_width.or(file.tol_width) {
        cfg.width_tol = positive("tol-width", v)?;
    }
    if let Some(v) = args.max_iter.or(file.max_iter) {
        if v == 0 {
            return Err(CliError::invalid("max-iter", "must be at least 1"));
        }
        cfg.max_iter = v;
    }
    let radii = match (&args.bracket_r0, &file.bracket_r0) {
        (Some(s), _) => Some(parse_list("bracket-r0", s)?),
        (None, Some(v)) => Some(v.clone()),
        (None, None) => None,
    };
    if let Some(radii) = radii {
        if radii.is_empty() {
            return Err(CliError::invalid("bracket-r0", "needs at least one radius"));
        }
        for &r in &radii {
            positive("bracket-r0", r)?;
        }
        cfg.bracket_r0 = radii;
    }
    let accel = match (args.accel, &file.accel) {
        (Some(a), _) => Some(a),
        (None, Some(s)) => Some(match s.as_str() {
            "bisect" => AccelArg::Bisect,
            "illinois" => AccelArg::Illinois,
            other => return Err(CliError::invalid("accel", format!("'{other}' is not one of bisect, illinois"))),
        }),
        (None, None) => None,
    };
    if let Some(a) = accel {
        cfg.accel = match a {
            AccelArg::Bisect => Accel::Bisect,
            AccelArg::Illinois => Accel::Illinois,
        };
    }
    Ok(cfg)
}

/// Maps problem-construction errors to the field the user should fix.
pub fn setup_error(e: SolveError) -> CliError {
    let field = match &e {
        SolveError::SeedNotOnZeroSet { .. } => "seed-b",
        SolveError::SeedOutsideDomain => "seed-a",
        SolveError::TooManyUnknowns { .. } => "m",
        SolveError::DimensionMismatch { what, .. } => match *what {
            "a" | "x0" => "seed-a",
            _ => "seed-b",
        },
        SolveError::InvalidConfig => "solver settings",
        _ => "problem",
    };
    CliError::invalid(field, e.to_string())
}

pub fn threads(flag: Option<usize>, file: Option<usize>) -> Result<usize, CliError> {
    match flag.or(file) {
        Some(0) => Err(CliError::invalid("threads", "must be at least 1")),
        Some(t) => Ok(t),
        None => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_and_boxes() {
        let g = parse_grid("grid", "-0.9:0.9:19", 1).unwrap();
        assert_eq!(g.len(), 19);
        assert_eq!(g[0], vec![-0.9]);
        assert_eq!(g[18], vec![0.9]);
        let g = parse_grid("grid", "0:1:2; 5:5:1", 2).unwrap();
        assert_eq!(g, vec![vec![0.0, 5.0], vec![1.0, 5.0]]);
        assert!(parse_grid("grid", "0:1:0", 1).is_err());
        assert!(parse_grid("grid", "0:1:3", 2).is_err());
        assert!(parse_grid("grid", "1:0:3", 1).is_err());
        assert_eq!(parse_box("box", "-1:1;0:2", 2).unwrap(), (vec![-1.0, 0.0], vec![1.0, 2.0]));
        assert!(parse_box("box", "-1:1", 2).is_err());
        assert!(parse_list("seed-a", "1,x").is_err());
        assert!(parse_list("seed-a", "inf").is_err());
    }

    #[test]
    fn builtin_and_expression_problems() {
        let file = FileConfig::default();
        let args = ProblemArgs { problem: Some("circle".into()), ..Default::default() };
        let p = resolve_problem(&args, &file, Role::Solve).unwrap();
        assert_eq!((p.seed_a.as_slice(), p.seed_b.as_slice()), (&[0.0][..], &[1.0][..]));
        assert!(resolve_problem(&args, &file, Role::Invert).is_err());

        let args = ProblemArgs { exprs: vec!["x1^2+y1^2-1".into()], seed_b: Some("1".into()), ..Default::default() };
        let p = resolve_problem(&args, &file, Role::Solve).unwrap();
        assert_eq!((p.map.n(), p.map.m()), (1, 1));

        let args = ProblemArgs { exprs: vec!["2*x1".into(), "2*x2".into()], n: Some(2), ..Default::default() };
        let p = resolve_problem(&args, &file, Role::Invert).unwrap();
        assert!(p.map.is_pure());
        assert_eq!(p.seed_b.as_slice(), &[0.0, 0.0]);

        let bad = ProblemArgs { exprs: vec!["x1 +* y1".into()], ..Default::default() };
        match resolve_problem(&bad, &file, Role::Solve) {
            Err(CliError::Validation { field, message }) => {
                assert_eq!(field, "expr[1]");
                assert!(message.contains("byte 4"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        let both = ProblemArgs { problem: Some("circle".into()), exprs: vec!["y1".into()], ..Default::default() };
        assert!(resolve_problem(&both, &file, Role::Solve).is_err());
    }

    #[test]
    fn solver_overrides() {
        let mut file = FileConfig { tol_residual: Some(1e-9), accel: Some("bisect".into()), ..Default::default() };
        let args = SolverArgs { tol_residual: Some(1e-10), ..Default::default() };
        let cfg = resolve_solver(&args, &file).unwrap();
        assert_eq!(cfg.residual_tol, 1e-10);
        assert_eq!(cfg.accel, Accel::Bisect);
        file.accel = Some("newton".into());
        assert!(resolve_solver(&args, &file).is_err());
        let neg = SolverArgs { tol_width: Some(-1.0), ..Default::default() };
        assert!(resolve_solver(&neg, &FileConfig::default()).is_err());
    }
}
