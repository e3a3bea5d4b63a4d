use gspkit::finalg::{smith_normal_form, Matrix};
use gspkit::{IntMatrix, RatMatrix};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn int_matrix(rows: usize, cols: usize) -> impl Strategy<Value = IntMatrix> {
    prop::collection::vec(-6i64..=6, rows * cols)
        .prop_map(move |v| IntMatrix::from_i64(rows, cols, &v))
}

fn shaped() -> impl Strategy<Value = IntMatrix> {
    (1usize..=5, 1usize..=5).prop_flat_map(|(r, c)| int_matrix(r, c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn multiplication_is_associative(
        (a, b, c) in (1usize..=4, 1usize..=4, 1usize..=4, 1usize..=4)
            .prop_flat_map(|(n, m, k, l)| (int_matrix(n, m), int_matrix(m, k), int_matrix(k, l)))
    ) {
        let left = a.mul(&b).unwrap().mul(&c).unwrap();
        let right = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn rank_plus_nullity(a in shaped()) {
        let q = RatMatrix::from_integer_matrix(&a);
        let kernel = q.nullspace();
        prop_assert_eq!(q.rank() + kernel.cols(), q.cols());
        prop_assert_eq!(q.rank(), q.rank_exact());
        prop_assert_eq!(q.rank(), a.bareiss_rank());
        prop_assert!(q.mul(&kernel).unwrap().is_zero_matrix() || kernel.cols() == 0);
        prop_assert_eq!(q.rank(), q.transpose().rank());
    }

    #[test]
    fn smith_form_divisibility(a in shaped()) {
        let s = smith_normal_form(&a);
        prop_assert_eq!(s.u.mul(&a).unwrap().mul(&s.v).unwrap(), s.d.clone());
        prop_assert!(s.u.determinant().unwrap().abs().is_one());
        prop_assert!(s.v.determinant().unwrap().abs().is_one());
        let f = s.invariant_factors();
        for w in f.windows(2) {
            prop_assert!(!w[0].is_zero() && (&w[1] % &w[0]).is_zero());
        }
        prop_assert!(f.iter().all(|x| *x > BigInt::zero()));
        prop_assert_eq!(f.len(), RatMatrix::from_integer_matrix(&a).rank());
    }

    #[test]
    fn inverse_of_unimodular(a in int_matrix(3, 3)) {
        let q = RatMatrix::from_integer_matrix(&a);
        match q.inverse() {
            Some(inv) => prop_assert_eq!(q.mul(&inv).unwrap(), Matrix::identity(3)),
            None => prop_assert!(q.rank() < 3),
        }
    }
}
