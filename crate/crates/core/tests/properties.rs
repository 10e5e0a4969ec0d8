//! Statistical and structural properties checked against independent oracles.

mod common;

use std::f64::consts::PI;

use common::{instance, ks_statistic};
use cs_papr::channel::{complex_gaussian, draw_channel, ChannelRealization, MeasurementOperator};
use cs_papr::clipper::{self, ClipScheme};
use cs_papr::harness::{Method, Setup, Trial};
use cs_papr::metrics::{self, capacity_condition, capacity_pair, Aggregate, CapacityModel, TrialRecord};
use cs_papr::ofdm::{draw_tone_map, modulate, random_symbols, ComplexBlock};
use cs_papr::recovery::{lasso, recover_rts, refine_ls, PhaseMatrix};
use cs_papr::rng::{trial_rng, Stream};
use cs_papr::{Complex64, Constellation, Dft, OfdmConfig};
use proptest::prelude::*;
use rand::Rng;
use statrs::function::erf::erfc;

/// Q(x) = P(N(0,1) > x).
fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / 2f64.sqrt())
}

/// E[(r − γ)² | r > γ] for r ~ Rayleigh(σ) in closed form.
fn tail_moment_closed_form(gamma: f64, sigma: f64) -> f64 {
    let a = gamma * gamma / (2.0 * sigma * sigma);
    2.0 * sigma * sigma - 2.0 * gamma * sigma * (2.0 * PI).sqrt() * q_function(gamma / sigma) * a.exp()
}

fn blocks(cfg: &OfdmConfig, seed: u64, count: u64) -> Vec<ComplexBlock> {
    let dft = Dft::new(cfg.n_subcarriers);
    let constellation = Constellation::new(cfg.qam_order).unwrap();
    (0..count)
        .map(|i| {
            let tones = draw_tone_map(cfg, &mut trial_rng(seed, i, Stream::Tones)).unwrap();
            let (_, sym) = random_symbols(&constellation, cfg.data_tones(), &mut trial_rng(seed, i, Stream::Data));
            modulate(&sym, &tones, &dft).unwrap()
        })
        .collect()
}

#[test]
fn envelope_is_rayleigh_with_and_without_reservation() {
    for m in [0, 51] {
        let cfg = OfdmConfig { n_measurement_tones: m, ..OfdmConfig::default() };
        let env: Vec<f64> = blocks(&cfg, 11, 200).iter().flat_map(|b| b.values.iter().map(|v| v.norm())).collect();
        let sigma = cfg.envelope_sigma();
        assert!((sigma - (cfg.data_tones() as f64 / (2.0 * cfg.n_subcarriers as f64)).sqrt()).abs() < 1e-15);
        let ks = ks_statistic(&env, |r| 1.0 - (-r * r / (2.0 * sigma * sigma)).exp());
        assert!(ks < 0.01, "m = {m}: KS = {ks}");
    }
}

#[test]
fn block_power_matches_loaded_fraction() {
    let cfg = OfdmConfig::default();
    let bs = blocks(&cfg, 12, 500);
    let mean = bs.iter().map(|b| metrics::mean_power(&b.values)).sum::<f64>() / bs.len() as f64;
    let expected = cfg.data_tones() as f64 / cfg.n_subcarriers as f64;
    assert!((mean / expected - 1.0).abs() < 0.01, "{mean} vs {expected}");
    assert!((cfg.sample_power() - expected).abs() < 1e-15);
}

#[test]
fn tail_moment_quadrature_matches_closed_form() {
    let sigma = 0.4;
    for g in [0.0, 0.5, 1.0, 1.9, 2.0, 2.3, 2.6, 3.0] {
        let gamma = g * sigma;
        let quad = clipper::ps_tail_second_moment(gamma, sigma).unwrap();
        let exact = tail_moment_closed_form(gamma, sigma);
        assert!((quad - exact).abs() < 1e-7 * exact, "γ = {g}σ: {quad} vs {exact}");
    }
}

#[test]
fn ps_clip_statistics_match_rayleigh_tail() {
    let cfg = OfdmConfig::default();
    let sigma = cfg.envelope_sigma();
    let gamma = cfg.gamma_abs(2.0);
    let bs = blocks(&cfg, 13, 3000);
    let (mut support, mut energy) = (0usize, 0.0);
    for b in &bs {
        let out = clipper::clip_ps(b, gamma).unwrap();
        support += out.sparsity();
        energy += out.c.iter().map(|v| v.norm_sqr()).sum::<f64>();
    }
    let mean_s = support as f64 / bs.len() as f64;
    let expected_s = clipper::expected_sparsity(gamma, &cfg);
    assert!((mean_s / expected_s - 1.0).abs() < 0.03, "sparsity {mean_s} vs {expected_s}");
    let per_coeff = energy / support as f64;
    let expected = tail_moment_closed_form(gamma, sigma);
    assert!((per_coeff / expected - 1.0).abs() < 0.05, "energy {per_coeff} vs {expected}");
}

#[test]
fn ps_magnitudes_follow_shifted_rayleigh_tail() {
    let cfg = OfdmConfig::default().without_reservation();
    let sigma = cfg.envelope_sigma();
    let gamma = cfg.gamma_abs(1.8);
    let mut mags = Vec::new();
    for b in blocks(&cfg, 19, 2500) {
        let out = clipper::clip_ps(&b, gamma).unwrap();
        mags.extend(out.support.iter().map(|&i| out.c[i].norm()));
    }
    assert!(mags.len() >= 100_000, "{} clips", mags.len());
    let ks = ks_statistic(&mags, |v| 1.0 - (-((gamma + v).powi(2) - gamma * gamma) / (2.0 * sigma * sigma)).exp());
    assert!(ks < 0.02, "KS = {ks}");
}

#[test]
fn dmc_magnitudes_are_two_point() {
    let cfg = OfdmConfig::default();
    let gamma = cfg.gamma_abs(2.0);
    let zeta = 0.8 * cfg.envelope_sigma();
    for b in blocks(&cfg, 20, 200) {
        let out = clipper::clip_dmc(&b, gamma, zeta).unwrap();
        assert!(out.c.iter().all(|v| *v == Complex64::new(0.0, 0.0) || (v.norm() - zeta).abs() < 1e-12));
        let l1: f64 = out.c.iter().map(|v| v.norm()).sum();
        let l2: f64 = out.c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let s = out.sparsity() as f64;
        assert!((l1 - zeta * s).abs() < 1e-10 && (l2 - zeta * s.sqrt()).abs() < 1e-10);
    }
}

#[test]
fn wrong_phases_are_worse_than_plain_lasso() {
    let cfg = OfdmConfig::default();
    let setup = Setup::new(&cfg, ClipScheme::Dmc, 2.2, Some(0.8), 21).unwrap();
    let (mut plain, mut wrong) = (0.0, 0.0);
    for i in 0..30u64 {
        let t = Trial::draw(&setup, i).unwrap();
        let mut rng = trial_rng(21, i, Stream::Noise);
        let theta = PhaseMatrix::new((0..cfg.n_subcarriers).map(|_| rng.random_range(-PI..PI)).collect()).unwrap();
        let a = lasso(&t.y, &t.psi, cfg.lambda(), &cfg.solver).unwrap();
        let b = recover_rts(&t.y, &t.psi, &theta, cfg.rts_lambda(), None, &cfg.solver).unwrap();
        plain += metrics::nmse(&t.clip.c, &a.c_hat).unwrap().unwrap_or(0.0);
        wrong += metrics::nmse(&t.clip.c, &b.c_hat).unwrap().unwrap_or(0.0);
    }
    assert!(wrong > plain, "random phases {wrong} vs LASSO {plain}");
}

#[test]
fn matched_zeta_equalizes_cnr() {
    // Fully loaded data (σ = 1/√2) observed through independently drawn tones.
    let cfg = OfdmConfig::default();
    let full = cfg.without_reservation();
    let gamma = full.gamma_abs(2.0);
    let zeta = clipper::zeta_for_cnr_match(gamma, &full).unwrap();
    let (mut ps, mut dmc, mut ops) = (Vec::new(), Vec::new(), Vec::new());
    for (i, x) in blocks(&full, 14, 4000).into_iter().enumerate() {
        let i = i as u64;
        let tones = draw_tone_map(&cfg, &mut trial_rng(114, i, Stream::Tones)).unwrap();
        let ch = draw_channel(&cfg, &mut trial_rng(14, i, Stream::Channel)).unwrap();
        ps.push(clipper::clip_ps(&x, gamma).unwrap());
        dmc.push(clipper::clip_dmc(&x, gamma, zeta).unwrap());
        ops.push(MeasurementOperator::new(&ch, &tones));
    }
    let nv = cfg.noise_var();
    let a = clipper::cnr_monte_carlo(ps.iter().zip(&ops), nv).unwrap();
    let b = clipper::cnr_monte_carlo(dmc.iter().zip(&ops), nv).unwrap();
    assert!((a / b - 1.0).abs() < 0.02, "PS {} dB vs DMC {} dB", clipper::to_db(a), clipper::to_db(b));
}

#[test]
fn channel_gain_and_noise_statistics() {
    let cfg = OfdmConfig::default();
    let n = cfg.n_subcarriers;
    let gain = (0..2000u64)
        .map(|i| draw_channel(&cfg, &mut trial_rng(15, i, Stream::Channel)).unwrap().mean_gain())
        .sum::<f64>()
        / 2000.0;
    assert!((gain - 1.0).abs() < 0.02, "mean channel gain {gain}");

    // Received SNR per sample equals the configured SNR for unit gain.
    let snr = 10f64.powf(cfg.snr_db / 10.0);
    assert!((cfg.sample_power() / cfg.noise_var() - snr).abs() < 1e-9 * snr);

    // Noise is circular white with the requested variance.
    let id = ChannelRealization::identity(n);
    let zero = ComplexBlock::time(vec![Complex64::new(0.0, 0.0); n]);
    let nv = 0.3;
    let mut rng = trial_rng(15, 0, Stream::Noise);
    let draws: Vec<Vec<Complex64>> = (0..4000).map(|_| id.apply(&zero, nv, &mut rng).unwrap().values).collect();
    let count = draws.len() as f64;
    let var = draws.iter().map(|z| z[0].norm_sqr()).sum::<f64>() / count;
    let pseudo = draws.iter().map(|z| z[0] * z[0]).sum::<Complex64>() / count;
    let cross = draws.iter().map(|z| z[0] * z[1].conj()).sum::<Complex64>() / count;
    assert!((var / nv - 1.0).abs() < 0.05, "variance {var}");
    assert!(pseudo.norm() < 0.05 * nv, "pseudo-covariance {pseudo}");
    assert!(cross.norm() < 0.05 * nv, "cross-covariance {cross}");
}

#[test]
fn zf_error_variance_matches_empirical() {
    let cfg = OfdmConfig::default();
    let n = cfg.n_subcarriers;
    let ch = draw_channel(&cfg, &mut trial_rng(16, 0, Stream::Channel)).unwrap();
    let nv = cfg.noise_var();
    let zero = ComplexBlock::time(vec![Complex64::new(0.0, 0.0); n]);
    let mut rng = trial_rng(16, 0, Stream::Noise);
    let mut acc = 0.0;
    let reps = 400;
    for _ in 0..reps {
        let y = ch.apply(&zero, nv, &mut rng).unwrap();
        acc += metrics::mean_power(&ch.equalize(&y).unwrap().values);
    }
    let empirical = acc / reps as f64;
    let predicted = ch.zf_error_var(nv);
    assert!((empirical / predicted - 1.0).abs() < 0.1, "{empirical} vs {predicted}");
}

#[test]
fn ls_refine_lowers_average_nmse() {
    let cfg = OfdmConfig::default();
    let setup = Setup::new(&cfg, ClipScheme::Ps, 2.2, None, 17).unwrap();
    let (mut raw, mut refined, mut count) = (0.0, 0.0, 0);
    for i in 0..60u64 {
        let t = Trial::draw(&setup, i).unwrap();
        let est = lasso(&t.y, &t.psi, cfg.lambda(), &cfg.solver).unwrap();
        let fixed = refine_ls(&est, &t.y, &t.psi).unwrap();
        if let (Some(a), Some(b)) =
            (metrics::nmse(&t.clip.c, &est.c_hat).unwrap(), metrics::nmse(&t.clip.c, &fixed.c_hat).unwrap())
        {
            raw += a;
            refined += b;
            count += 1;
        }
    }
    assert!(count > 50);
    assert!(refined < raw, "refined {refined} vs raw {raw}");
}

#[test]
fn recovery_beats_doing_nothing() {
    let cfg = OfdmConfig::default();
    let setup = Setup::new(&cfg, ClipScheme::Ps, 2.2, None, 18).unwrap();
    let mut sums = [0.0; 3];
    for i in 0..40u64 {
        let t = Trial::draw(&setup, i).unwrap();
        for (k, m) in [Method::None, Method::Lasso, Method::Wpal].into_iter().enumerate() {
            sums[k] += t.run(&setup, m).unwrap().1.residual_clip_var;
        }
    }
    assert!(sums[1] < sums[0] && sums[2] < sums[1], "{sums:?}");
}

#[test]
fn fbmp_recovers_sparse_instances_better_than_zero() {
    let mut err = 0.0;
    let mut base = 0.0;
    for seed in 0..20 {
        let inst = instance(64, 24, 3, 1.0, 1e-3, seed);
        let params = cs_papr::recovery::FbmpParams {
            beta: 64,
            rho: 3,
            s_max: 5,
            amp_var: 1.0,
            activity_prob: 3.0 / 64.0,
            noise_var: 1e-3,
        };
        let w = cs_papr::recovery::WeightVector::ones(64);
        let est = cs_papr::recovery::beta_fbmp(&inst.y, &inst.psi, &w, &params).unwrap();
        err += inst.c.iter().zip(&est.c_hat).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>();
        base += inst.c.iter().map(|a| a.norm_sqr()).sum::<f64>();
    }
    assert!(err < 0.1 * base, "{err} vs {base}");
}

fn complex_vec(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| Complex64::new(a, b)), n)
}

fn record(seed: u64, ser: f64) -> TrialRecord {
    TrialRecord {
        seed,
        gamma: 2.0,
        method: "lasso".into(),
        ser,
        nmse: Some(ser * 0.5),
        papr_reduction_db: 3.0 + ser,
        residual_clip_var: ser * 1e-3,
        clip_var: 1e-2,
        sparsity: seed as usize % 7,
        wall_time: None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dft_round_trip_and_parseval(v in complex_vec(64)) {
        let dft = Dft::new(64);
        let f = dft.forward(&v);
        let back = dft.inverse(&f);
        let e0: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let e1: f64 = f.iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((e0 - e1).abs() <= 1e-10 * (1.0 + e0));
        for (a, b) in v.iter().zip(&back) {
            prop_assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn ps_clip_invariants(v in complex_vec(64), gamma in 0.1f64..2.5) {
        let x = ComplexBlock::time(v.clone());
        let out = clipper::clip_ps(&x, gamma).unwrap();
        let expected: Vec<usize> = (0..v.len()).filter(|&i| v[i].norm() > gamma).collect();
        prop_assert_eq!(&out.support, &expected);
        prop_assert!(out.residual_peak(&x).is_none_or(|p| p <= gamma * (1.0 + 1e-12)));
        for (i, c) in out.c.iter().enumerate() {
            if out.support.binary_search(&i).is_ok() {
                prop_assert!(((v[i] + c).norm() - gamma).abs() < 1e-12);
                let z = c * v[i].conj();
                prop_assert!(z.re < 0.0 && z.im.abs() <= 1e-12 * z.norm());
            } else {
                prop_assert_eq!(*c, Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn dmc_clip_has_constant_magnitude(v in complex_vec(64), gamma in 0.1f64..2.5, zeta in 0.01f64..1.0) {
        let x = ComplexBlock::time(v.clone());
        let out = clipper::clip_dmc(&x, gamma, zeta).unwrap();
        for &i in &out.support {
            prop_assert!((out.c[i].norm() - zeta).abs() < 1e-12);
            prop_assert!(v[i].norm() > gamma);
        }
    }

    #[test]
    fn operator_adjoint_identity(c in complex_vec(32), seed in 0u64..1000) {
        let cfg = common::small_cfg(32, 9);
        let tones = draw_tone_map(&cfg, &mut trial_rng(seed, 0, Stream::Tones)).unwrap();
        let ch = draw_channel(&cfg, &mut trial_rng(seed, 0, Stream::Channel)).unwrap();
        let psi = MeasurementOperator::new(&ch, &tones);
        let mut rng = trial_rng(seed, 1, Stream::Noise);
        let r: Vec<Complex64> = (0..9).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
        let lhs: Complex64 = psi.apply(&c).iter().zip(&r).map(|(a, b)| a.conj() * b).sum();
        let rhs: Complex64 = c.iter().zip(&psi.adjoint(&r)).map(|(a, b)| a.conj() * b).sum();
        prop_assert!((lhs - rhs).norm() < 1e-9 * (1.0 + lhs.norm()));
    }

    #[test]
    fn nmse_and_ser_bounds(c in complex_vec(16), labels in prop::collection::vec(0usize..32, 1..40)) {
        let n = metrics::nmse(&c, &c).unwrap();
        prop_assert!(n.is_none_or(|v| v == 0.0));
        let zero = vec![Complex64::new(0.0, 0.0); c.len()];
        if let Some(v) = metrics::nmse(&c, &zero).unwrap() {
            prop_assert!((v - 1.0).abs() < 1e-12);
        }
        let shifted: Vec<usize> = labels.iter().map(|l| (l + 1) % 32).collect();
        prop_assert_eq!(metrics::ser(&labels, &labels).unwrap(), 0.0);
        prop_assert_eq!(metrics::ser(&labels, &shifted).unwrap(), 1.0);
    }

    #[test]
    fn capacity_condition_agrees(
        gain in 0.1f64..4.0,
        noise in 1e-5f64..1e-1,
        clip_full in 1e-5f64..0.2,
        resid in 0.0f64..0.2,
        m in 1usize..128,
    ) {
        let model = CapacityModel { n: 256, m, gain, noise_var: noise, signal_var: 1.0 };
        let (c1, c2) = capacity_pair(&model, clip_full, resid);
        // Skip the measure-zero neighbourhood of the threshold.
        prop_assume!((c1 - c2).abs() > 1e-9);
        prop_assert_eq!(capacity_condition(resid, clip_full, &model).unwrap(), c2 > c1);
        prop_assert!(model.c2(resid) <= model.c2(resid * 0.5) + 1e-15);
    }

    #[test]
    fn aggregate_is_order_independent(sers in prop::collection::vec(0.0f64..1.0, 1..30), rot in 0usize..30) {
        let recs: Vec<TrialRecord> = sers.iter().enumerate().map(|(i, &s)| record(i as u64, s)).collect();
        let mut a = Aggregate::new();
        recs.iter().cloned().for_each(|r| a.push(r));
        let mut rotated = recs.clone();
        let k = rot % rotated.len();
        rotated.rotate_left(k);
        let (left, right) = rotated.split_at(rotated.len() / 2);
        let mut b1 = Aggregate::new();
        let mut b2 = Aggregate::new();
        left.iter().cloned().for_each(|r| b1.push(r));
        right.iter().cloned().for_each(|r| b2.push(r));
        prop_assert_eq!(a.summary(), b2.merge(b1).summary());
    }
}
