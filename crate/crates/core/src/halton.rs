//! Halton low-discrepancy points.

use alloc::vec::Vec;

use num_traits::Float;

/// The first `count` primes.
pub fn primes(count: usize) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::with_capacity(count);
    let mut candidate = 2u64;
    while out.len() < count {
        if out.iter().take_while(|p| **p * **p <= candidate).all(|p| !candidate.is_multiple_of(*p)) {
            out.push(candidate);
        }
        candidate += 1;
    }
    out
}

/// Van der Corput radical inverse of `index` in `base`, in `[0, 1)`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv_base = 1.0 / base as f64;
    let mut scale = inv_base;
    let mut acc = 0.0;
    while index > 0 {
        acc += (index % base) as f64 * scale;
        index /= base;
        scale *= inv_base;
    }
    acc
}

/// Halton sequence in `[0, 1)^dim`, starting at index 1 so the origin
/// corner is not repeated.
#[derive(Clone, Debug)]
pub struct Halton {
    bases: Vec<u64>,
    index: u64,
}

impl Halton {
    pub fn new(dim: usize) -> Self {
        Self { bases: primes(dim), index: 0 }
    }
}

impl Iterator for Halton {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        self.index += 1;
        Some(self.bases.iter().map(|b| radical_inverse(self.index, *b)).collect())
    }
}

/// `count` Halton points in the disc of `radius` around the origin, by the
/// area-preserving polar map `(u, v) -> (R sqrt(u), 2 pi v)`.
pub fn disc_points(count: usize, radius: f64) -> Vec<[f64; 2]> {
    Halton::new(2)
        .take(count)
        .map(|uv| {
            let r = radius * Float::sqrt(uv[0]);
            let theta = 2.0 * core::f64::consts::PI * uv[1];
            [r * Float::cos(theta), r * Float::sin(theta)]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_primes() {
        assert_eq!(primes(6), alloc::vec![2, 3, 5, 7, 11, 13]);
    }

    #[test]
    fn van_der_corput_base_two() {
        let v: Vec<f64> = (1..=4).map(|i| radical_inverse(i, 2)).collect();
        assert_eq!(v, alloc::vec![0.5, 0.25, 0.75, 0.125]);
        assert!((radical_inverse(1, 3) - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn disc_points_stay_inside() {
        let pts = disc_points(500, 0.4);
        assert_eq!(pts.len(), 500);
        assert!(pts.iter().all(|p| p[0] * p[0] + p[1] * p[1] <= 0.16 + 1e-15));
    }
}
