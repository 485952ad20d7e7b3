use gabor_recover::transforms::{naive, Direction};
use gabor_recover::{
    dft2, gabor_col, gabor_col_inverse, gabor_row, gabor_row_inverse, idft2, support, Complex64,
    GridDims, Signal2D,
};
use proptest::prelude::*;

const TOL: f64 = 1e-10;

fn signal_strategy(max_n: usize, max_t: usize) -> impl Strategy<Value = Signal2D> {
    (1..=max_n, 1..=max_t).prop_flat_map(|(n, t)| {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * t).prop_map(move |v| {
            let values = v
                .into_iter()
                .map(|(re, im)| Complex64::new(re, im))
                .collect();
            Signal2D::new(GridDims::new(n, t).unwrap(), values).unwrap()
        })
    })
}

fn close(a: &Signal2D, b: &Signal2D) -> bool {
    a.max_abs_diff(b).unwrap() < TOL
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fast_matches_naive(f in signal_strategy(16, 16)) {
        prop_assert!(close(&dft2(&f), &naive::dft2(&f)));
        prop_assert!(close(&gabor_row(&f), &naive::gabor_row(&f)));
        prop_assert!(close(&gabor_col(&f), &naive::gabor_col(&f)));
    }

    #[test]
    fn unitary(f in signal_strategy(64, 64)) {
        let norm = f.norm_l2();
        for g in [dft2(&f), gabor_row(&f), gabor_col(&f)] {
            prop_assert!((g.norm_l2() - norm).abs() < TOL * norm.max(1.0));
        }
    }

    #[test]
    fn inverses_roundtrip(f in signal_strategy(24, 24)) {
        prop_assert!(close(&idft2(&dft2(&f)), &f));
        prop_assert!(close(&gabor_row_inverse(&gabor_row(&f)), &f));
        prop_assert!(close(&gabor_col_inverse(&gabor_col(&f)), &f));
    }

    #[test]
    fn row_then_column_is_dft2(f in signal_strategy(16, 16)) {
        prop_assert!(close(&gabor_col(&gabor_row(&f)), &dft2(&f)));
        prop_assert!(close(&gabor_row(&gabor_col(&f)), &dft2(&f)));
    }

    #[test]
    fn uncertainty_on_sparse_signals(
        (n, t, entries) in (1usize..=12, 1usize..=12).prop_flat_map(|(n, t)| {
            (Just(n), Just(t), prop::collection::vec((0..n, 0..t, -3i32..=3, -3i32..=3), 1..6))
        })
    ) {
        let d = GridDims::new(n, t).unwrap();
        let mut values = vec![Complex64::new(0.0, 0.0); d.len()];
        for (x, y, re, im) in entries {
            values[d.index(x, y)] = Complex64::new(re as f64, im as f64);
        }
        let f = Signal2D::new(d, values).unwrap();
        prop_assume!(f.max_modulus() > 0.0);
        let g = dft2(&f);
        let product = support(&f, 0.0).len() * support(&g, 1e-9 * g.max_modulus()).len();
        prop_assert!(product >= n * t);
    }
}

#[test]
fn one_dimensional_dft_matches_matrix() {
    let v: Vec<Complex64> = (0..7)
        .map(|k| Complex64::new(k as f64, -(k as f64) / 2.0))
        .collect();
    for dir in [Direction::Forward, Direction::Inverse] {
        let mut fast = v.clone();
        gabor_recover::transforms::dft1_in_place(&mut fast, dir);
        let slow = naive::dft1(&v, dir);
        let by_matrix: Vec<Complex64> = (0..7)
            .map(|r| {
                (0..7)
                    .map(|c| naive::matrix_entry(r, c, 7, dir) * v[c])
                    .sum()
            })
            .collect();
        for k in 0..7 {
            assert!((fast[k] - slow[k]).norm() < TOL);
            assert!((fast[k] - by_matrix[k]).norm() < TOL);
        }
    }
}
