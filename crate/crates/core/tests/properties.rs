//! Property tests for estimator invariants.

use dkhac::baselines::{self, FixedBCriticalValues};
use dkhac::bandwidths::phi2_hat;
use dkhac::dkhac::{dk_hac, dk_hac_auto, local_autocov_hat, BandwidthPlan, LrvEstimate};
use dkhac::hartests::{dm_test, LrvMethod};
use dkhac::kernels::{LagKernel, TimeKernel};
use dkhac::series::SeriesMatrix;
use proptest::prelude::*;

fn series(nobs: usize, dim: usize) -> impl Strategy<Value = SeriesMatrix> {
    prop::collection::vec(-3.0f64..3.0, nobs * dim)
        .prop_map(move |data| SeriesMatrix::from_row_major(nobs, dim, data).unwrap())
}

/// Random AR(1)-filtered series so that autocorrelations are not trivial.
fn ar_series(nobs: usize, dim: usize) -> impl Strategy<Value = SeriesMatrix> {
    (series(nobs, dim), -0.8f64..0.8).prop_map(move |(raw, a)| {
        let mut data = raw.as_slice().to_vec();
        for t in 1..nobs {
            for c in 0..dim {
                data[t * dim + c] += a * data[(t - 1) * dim + c];
            }
        }
        SeriesMatrix::from_row_major(nobs, dim, data).unwrap()
    })
}

fn psd_lag_kernel() -> impl Strategy<Value = LagKernel> {
    prop_oneof![Just(LagKernel::Bartlett), Just(LagKernel::Parzen), Just(LagKernel::QuadraticSpectral)]
}

fn time_kernel() -> impl Strategy<Value = TimeKernel> {
    prop_oneof![Just(TimeKernel::EpanechnikovOpt), Just(TimeKernel::Uniform)]
}

fn max_abs_diff(a: &nalgebra::DMatrix<f64>, b: &nalgebra::DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

fn scale_of(m: &nalgebra::DMatrix<f64>) -> f64 {
    m.abs().max().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fixed_plan_estimate_is_symmetric_and_scale_equivariant(
        v in ar_series(120, 2),
        c in 0.1f64..10.0,
        b1 in 0.02f64..0.5,
        b2 in 0.1f64..1.0,
        lag in psd_lag_kernel(),
        time in time_kernel(),
    ) {
        let plan = BandwidthPlan::predetermined_default_blocks(b1, b2, v.nobs()).unwrap();
        let j = dk_hac(&v, lag, time, &plan, false, 0).unwrap();
        let jc = dk_hac(&v.scaled(c), lag, time, &plan, false, 0).unwrap();
        prop_assert_eq!(&j.j, &j.j.transpose());
        prop_assert!(max_abs_diff(&jc.j, &(&j.j * (c * c))) <= 1e-9 * scale_of(&jc.j));
    }

    #[test]
    fn psd_generating_kernels_give_psd_estimates(
        v in ar_series(100, 3),
        b1 in 0.02f64..0.5,
        lag in psd_lag_kernel(),
    ) {
        let plan = BandwidthPlan::predetermined_default_blocks(b1, 1.0, v.nobs()).unwrap();
        let j = dk_hac(&v, lag, TimeKernel::Uniform, &plan, false, 0).unwrap();
        prop_assert!(!j.psd_warning, "min eigenvalue {}", j.min_eigenvalue);
    }

    #[test]
    fn component_permutation_permutes_the_estimate(v in ar_series(90, 2), b1 in 0.05f64..0.5) {
        let swapped: Vec<f64> = (0..v.nobs()).flat_map(|t| [v.get(t, 1), v.get(t, 0)]).collect();
        let w = SeriesMatrix::from_row_major(v.nobs(), 2, swapped).unwrap();
        let plan = BandwidthPlan::predetermined_default_blocks(b1, 0.6, v.nobs()).unwrap();
        let a = dk_hac(&v, LagKernel::QuadraticSpectral, TimeKernel::EpanechnikovOpt, &plan, false, 0).unwrap().j;
        let b = dk_hac(&w, LagKernel::QuadraticSpectral, TimeKernel::EpanechnikovOpt, &plan, false, 0).unwrap().j;
        let tol = 1e-12 * scale_of(&a);
        prop_assert!((a[(0, 0)] - b[(1, 1)]).abs() <= tol);
        prop_assert!((a[(1, 1)] - b[(0, 0)]).abs() <= tol);
        prop_assert!((a[(0, 1)] - b[(1, 0)]).abs() <= tol);
    }

    #[test]
    fn local_autocovariance_is_transpose_symmetric_in_the_lag(
        v in ar_series(150, 2),
        k in 1i64..10,
        b2 in 0.2f64..1.0,
    ) {
        let n = 40;
        let plus = local_autocov_hat(&v, 0, k, b2, TimeKernel::EpanechnikovOpt, n).unwrap();
        let minus = local_autocov_hat(&v, 0, -k, b2, TimeKernel::EpanechnikovOpt, n).unwrap();
        prop_assert!(max_abs_diff(&plus, &minus.transpose()) <= 1e-12 * scale_of(&plus));
    }

    #[test]
    fn curvature_ratio_is_scale_invariant(v in ar_series(200, 1), c in 0.01f64..100.0) {
        let a = phi2_hat(&v, &[1.0], 20).unwrap();
        let b = phi2_hat(&v.scaled(c), &[1.0], 20).unwrap();
        prop_assert!((a.value - b.value).abs() <= 1e-9 * a.value.abs().max(1e-12));
    }

    #[test]
    fn automatic_baselines_are_scale_equivariant(v in ar_series(120, 1), c in 0.1f64..10.0) {
        for prewhiten in [false, true] {
            let a = baselines::andrews_hac(&v, prewhiten).unwrap().scalar();
            let ac = baselines::andrews_hac(&v.scaled(c), prewhiten).unwrap().scalar();
            prop_assert!((ac - c * c * a).abs() <= 1e-8 * ac.abs());
            let n = baselines::nw_hac(&v, true, prewhiten).unwrap().scalar();
            let nc = baselines::nw_hac(&v.scaled(c), true, prewhiten).unwrap().scalar();
            prop_assert!((nc - c * c * n).abs() <= 1e-8 * nc.abs());
        }
        let k = baselines::kvb_fixed_b(&v).unwrap().scalar();
        let kc = baselines::kvb_fixed_b(&v.scaled(c)).unwrap().scalar();
        prop_assert!((kc - c * c * k).abs() <= 1e-8 * kc.abs());
    }

    #[test]
    fn automatic_estimate_is_symmetric_and_finite(v in ar_series(120, 2)) {
        let j = dk_hac_auto(&v, LagKernel::QuadraticSpectral, TimeKernel::EpanechnikovOpt, 0).unwrap();
        prop_assert_eq!(&j.j, &j.j.transpose());
        prop_assert!(j.j.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn estimate_survives_a_json_round_trip(v in ar_series(80, 2), b1 in 0.05f64..0.5, b2 in 0.2f64..1.0) {
        let plan = BandwidthPlan::predetermined_default_blocks(b1, b2, v.nobs()).unwrap();
        let j = dk_hac(&v, LagKernel::Parzen, TimeKernel::EpanechnikovOpt, &plan, true, 1).unwrap();
        let back: LrvEstimate = serde_json::from_str(&serde_json::to_string(&j).unwrap()).unwrap();
        prop_assert_eq!(back, j);
    }

    #[test]
    fn dm_statistic_flips_sign_when_losses_swap(
        raw in prop::collection::vec((0.0f64..4.0, 0.0f64..4.0), 60),
    ) {
        let l1: Vec<f64> = raw.iter().map(|p| p.0).collect();
        let l2: Vec<f64> = raw.iter().map(|p| p.1).collect();
        let table = FixedBCriticalValues::embedded();
        for method in [LrvMethod::NeweyWest { prewhiten: false }, LrvMethod::FixedB] {
            let a = dm_test(&l1, &l2, &method, &table, 0.05);
            let b = dm_test(&l2, &l1, &method, &table, 0.05);
            if let (Ok(a), Ok(b)) = (a, b) {
                prop_assert!((a.statistic + b.statistic).abs() <= 1e-9 * a.statistic.abs().max(1.0));
                prop_assert_eq!(a.reject, b.reject);
            }
        }
    }

    #[test]
    fn fixed_b_statistic_is_scale_invariant(e in prop::collection::vec(-2.0f64..2.0, 50), c in 0.01f64..100.0) {
        let s = baselines::fixedb::studentized_mean(&e);
        let scaled: Vec<f64> = e.iter().map(|x| c * x).collect();
        let sc = baselines::fixedb::studentized_mean(&scaled);
        prop_assert!((s - sc).abs() <= 1e-8 * s.abs().max(1.0));
    }
}
