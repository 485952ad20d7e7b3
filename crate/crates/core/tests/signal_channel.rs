use gabor_recover::experiments::{generate_test_signal, SignalShape};
use gabor_recover::{
    erasure_stats, sample_erasure, support, support_profile, Complex64, GridDims, Signal2D,
};
use proptest::prelude::*;
use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, Discrete};

fn integer_signal() -> impl Strategy<Value = Signal2D> {
    (1usize..=10, 1usize..=10).prop_flat_map(|(n, t)| {
        prop::collection::vec((-2i32..=2, -2i32..=2), n * t).prop_map(move |v| {
            let values = v
                .into_iter()
                .map(|(a, b)| Complex64::new(a as f64, b as f64))
                .collect();
            Signal2D::new(GridDims::new(n, t).unwrap(), values).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn profile_bounds(f in integer_signal()) {
        let d = f.dims();
        let p = support_profile(&f, 0.0);
        prop_assert!(p.e_max <= d.n);
        prop_assert!(p.e_max <= p.total_support && p.total_support <= d.t * p.e_max
            || p.total_support == 0);
        let exact = f.values().iter().filter(|v| v.re != 0.0 || v.im != 0.0).count();
        prop_assert_eq!(p.total_support, exact);
    }

    #[test]
    fn support_shrinks_with_tol(f in integer_signal(), a in 0.0f64..3.0, b in 0.0f64..3.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(support(&f, hi).is_subset(&support(&f, lo)));
    }

    #[test]
    fn pattern_is_pure(n in 1usize..20, t in 1usize..6, theta in 0.0f64..=1.0, seed: u64) {
        let d = GridDims::new(n, t).unwrap();
        prop_assert_eq!(sample_erasure(d, theta, seed).unwrap(), sample_erasure(d, theta, seed).unwrap());
    }
}

#[test]
fn uniform_rows_profile() {
    let d = GridDims::new(4, 3).unwrap();
    let f = generate_test_signal(d, 1, 7, SignalShape::UniformRows).unwrap();
    assert_eq!(support_profile(&f, 0.0).row_supports, vec![1, 1, 1]);
}

/// Row loss counts at 32x1 against Binomial(32, theta).
#[test]
fn row_counts_are_binomial() {
    let (n, theta, samples) = (32u64, 0.2, 100_000u64);
    let d = GridDims::new(n as usize, 1).unwrap();
    let mut hist = vec![0u64; n as usize + 1];
    for seed in 0..samples {
        hist[sample_erasure(d, theta, 10_000_000 + seed)
            .unwrap()
            .per_row_counts()[0]] += 1;
    }
    let law = Binomial::new(theta, n).unwrap();
    // Pool outer bins until each expected count is at least 5.
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for k in 0..=n {
        obs += hist[k as usize] as f64;
        exp += law.pmf(k) * samples as f64;
        if exp >= 5.0 {
            bins.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    let last = bins.last_mut().unwrap();
    last.0 += obs;
    last.1 += exp;
    let stat: f64 = bins.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = (bins.len() - 1) as f64;
    let critical = ChiSquared::new(dof).unwrap().inverse_cdf(1.0 - 1e-3);
    assert!(
        stat < critical,
        "chi-square {stat} >= {critical} with {dof} dof"
    );
}

#[test]
fn mmax_event_frequency() {
    // Indicator of M_max < n / (2 e_max) averaged over seeds versus its exact probability.
    let (n, t, theta, c) = (32usize, 4usize, 0.15, 8.0);
    let d = GridDims::new(n, t).unwrap();
    let trials = 20_000;
    let hits = (0..trials)
        .filter(|&s| (erasure_stats(&sample_erasure(d, theta, s).unwrap()).m_max as f64) < c)
        .count();
    let p = gabor_recover::probbounds::prob_mmax_below(n as u64, t as u64, theta, c).unwrap();
    let se = (p * (1.0 - p) / trials as f64).sqrt();
    let freq = hits as f64 / trials as f64;
    assert!((freq - p).abs() < 5.0 * se, "freq {freq} vs {p}");
}
