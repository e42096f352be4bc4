use implicit_core::linalg::{det, invert, leading_principal_minors, Matrix};
use proptest::prelude::*;

/// Diagonally dominant, hence well conditioned.
fn dominant(order: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-1.0f64..1.0, order * order).prop_map(move |mut data| {
        for i in 0..order {
            let row_sum: f64 = (0..order).map(|j| data[i * order + j].abs()).sum();
            data[i * order + i] = data[i * order + i].signum() * (row_sum + 1.0);
        }
        Matrix::new(order, order, data).unwrap()
    })
}

fn pair() -> impl Strategy<Value = (Matrix, Matrix)> {
    (1usize..=6).prop_flat_map(|n| (dominant(n), dominant(n)))
}

fn rel_close(a: f64, b: f64, rtol: f64) -> bool {
    (a - b).abs() <= rtol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

proptest! {
    #[test]
    fn det_is_multiplicative((a, b) in pair()) {
        let ab = a.mul(&b).unwrap();
        let lhs = det(&ab).unwrap();
        let rhs = det(&a).unwrap() * det(&b).unwrap();
        prop_assert!(rel_close(lhs, rhs, 1e-9), "{lhs} vs {rhs}");
    }

    #[test]
    fn last_leading_minor_is_det(a in (1usize..=6).prop_flat_map(dominant)) {
        let minors = leading_principal_minors(&a).unwrap();
        prop_assert_eq!(minors.len(), a.rows());
        prop_assert_eq!(*minors.last().unwrap(), det(&a).unwrap());
    }

    #[test]
    fn inverse_times_matrix_is_identity(a in (1usize..=6).prop_flat_map(dominant)) {
        let inv = invert(&a).unwrap();
        let err = inv.mul(&a).unwrap().sub(&Matrix::identity(a.rows())).unwrap().norm_inf();
        prop_assert!(err <= 1e-9, "{err}");
    }

    #[test]
    fn row_swap_flips_sign(
        (a, i, j) in (2usize..=6).prop_flat_map(|n| (dominant(n), 0..n, 0..n))
            .prop_filter("distinct rows", |(_, i, j)| i != j)
    ) {
        let mut swapped = a.clone();
        swapped.swap_rows(i, j);
        prop_assert!(rel_close(det(&swapped).unwrap(), -det(&a).unwrap(), 1e-12));
    }

    #[test]
    fn permutation_determinants_are_exact(perm in Just((0..5).collect::<Vec<usize>>()).prop_shuffle()) {
        let mut p = Matrix::zeros(5, 5);
        for (i, &j) in perm.iter().enumerate() {
            p.set(i, j, 1.0);
        }
        let mut parity = 1.0;
        let mut seen = perm.clone();
        for i in 0..5 {
            while seen[i] != i {
                let k = seen[i];
                seen.swap(i, k);
                parity = -parity;
            }
        }
        prop_assert_eq!(det(&p).unwrap(), parity);
        let mut q = p.clone();
        q.swap_rows(0, 4);
        prop_assert_eq!(det(&q).unwrap(), -parity);
    }
}

#[test]
fn ill_conditioned_inverse_within_tolerance() {
    // Condition number about 1e6.
    let a = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0 + 2e-6]]).unwrap();
    let err = invert(&a).unwrap().mul(&a).unwrap().sub(&Matrix::identity(2)).unwrap().norm_inf();
    assert!(err <= 1e-9, "{err}");
}
