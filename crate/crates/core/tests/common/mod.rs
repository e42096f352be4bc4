#![allow(dead_code)]

/// Gaussian elimination with partial pivoting on a dense row-major copy.
pub fn gauss_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().zip(b).map(|(row, &r)| {
        let mut row = row.clone();
        row.push(r);
        row
    }).collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))?;
        if m[p][c].abs() < 1e-300 {
            return None;
        }
        m.swap(c, p);
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for k in c..=n {
                m[r][k] -= f * m[c][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| m[r][k] * x[k]).sum();
        x[r] = (m[r][n] - s) / m[r][r];
    }
    Some(x)
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, b| a.max(b.abs()))
}

/// Damped Newton for `G(z) = 0` with Jacobian `dg`, halving the step until
/// the residual decreases.
pub fn damped_newton<G, D>(g: G, dg: D, z0: &[f64], tol: f64) -> Option<Vec<f64>>
where
    G: Fn(&[f64]) -> Vec<f64>,
    D: Fn(&[f64]) -> Vec<Vec<f64>>,
{
    let mut z = z0.to_vec();
    let mut r = g(&z);
    for _ in 0..100 {
        if inf_norm(&r) <= tol {
            return Some(z);
        }
        let neg: Vec<f64> = r.iter().map(|v| -v).collect();
        let step = gauss_solve(&dg(&z), &neg)?;
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = z.iter().zip(&step).map(|(a, s)| a + lambda * s).collect();
            let rt = g(&trial);
            if inf_norm(&rt) < inf_norm(&r) || lambda < 1e-6 {
                z = trial;
                r = rt;
                break;
            }
            lambda *= 0.5;
        }
    }
    (inf_norm(&r) <= tol).then_some(z)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
