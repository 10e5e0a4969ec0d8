//! Support-recovery behaviour of the sparse estimators on planted instances.

mod common;

use common::{complex_normal, instance};
use cs_papr::channel::{ChannelRealization, MeasurementOperator};
use cs_papr::clipper::ClipScheme;
use cs_papr::harness::{Method, Setup, Trial};
use cs_papr::ofdm::draw_tone_map;
use cs_papr::recovery::{lasso, refine_ls, weighted_lasso, WeightVector};
use cs_papr::rng::{trial_rng, Stream};
use cs_papr::{Complex64, OfdmConfig, SolverConfig};

fn strict_solver() -> SolverConfig {
    SolverConfig { tol: 1e-14, max_iters: 20_000, ..SolverConfig::default() }
}

fn max_correlation(psi: &MeasurementOperator, y: &[Complex64]) -> f64 {
    psi.adjoint(y).iter().map(|v| v.norm()).fold(0.0, f64::max)
}

#[test]
fn planted_weights_recover_support_up_to_m_minus_one() {
    let (n, m) = (64, 24);
    for s in [1, 6, 12, 23] {
        for seed in 0..5 {
            let inst = instance(n, m, s, 1.0, 0.0, 100 * s as u64 + seed);
            let w: Vec<f64> = inst.c.iter().map(|v| if v.norm() > 0.0 { 1e-6 } else { 1e3 }).collect();
            let lambda = 1e-4 * max_correlation(&inst.psi, &inst.y);
            let est =
                weighted_lasso(&inst.y, &inst.psi, lambda, &WeightVector::new(w).unwrap(), &strict_solver()).unwrap();
            let truth: Vec<usize> = (0..n).filter(|&i| inst.c[i].norm() > 0.0).collect();
            assert_eq!(est.support, truth, "s = {s}, seed {seed}");
        }
    }
}

#[test]
fn noiseless_flat_channel_lasso_recovers_support() {
    let cfg = OfdmConfig::default();
    let (n, m) = (cfg.n_subcarriers, cfg.n_measurement_tones);
    let s = m / 4;
    let flat = ChannelRealization::identity(n);
    let trials = 500u64;
    let mut hits = 0;
    for seed in 0..trials {
        let tones = draw_tone_map(&cfg, &mut trial_rng(seed, 0, Stream::Tones)).unwrap();
        let psi = MeasurementOperator::new(&flat, &tones);
        let mut rng = trial_rng(seed, 0, Stream::Data);
        let support = {
            let mut v = rand::seq::index::sample(&mut rng, n, s).into_vec();
            v.sort_unstable();
            v
        };
        let mut c = vec![Complex64::new(0.0, 0.0); n];
        for &i in &support {
            c[i] = complex_normal(&mut rng, 1.0);
        }
        let y = psi.apply(&c);
        let lambda = 1e-3 * max_correlation(&psi, &y);
        let est = refine_ls(&lasso(&y, &psi, lambda, &strict_solver()).unwrap(), &y, &psi).unwrap();
        if est.support == support {
            hits += 1;
        }
    }
    let rate = hits as f64 / trials as f64;
    assert!(rate >= 0.99, "exact support recovery rate {rate}");
}

#[test]
fn weighting_improves_support_recovery() {
    let cfg = OfdmConfig::default();
    let setup = Setup::new(&cfg, ClipScheme::Ps, 2.0, None, 31).unwrap();
    let (mut wl, mut plain, mut total) = (0usize, 0usize, 0usize);
    for i in 0..500u64 {
        let t = Trial::draw(&setup, i).unwrap();
        let truth = &t.clip.support;
        let found = |m: Method| {
            let est = t.estimate(&setup, m).unwrap();
            truth.iter().filter(|k| est.support.binary_search(k).is_ok()).count()
        };
        wl += found(Method::Wl);
        plain += found(Method::Lasso);
        total += truth.len();
    }
    let (rate_wl, rate_lasso) = (wl as f64 / total as f64, plain as f64 / total as f64);
    assert!(rate_wl >= rate_lasso, "WL {rate_wl:.4} vs LASSO {rate_lasso:.4}");
}
