use proptest::prelude::*;
use stablegw::offspring::{make_stable_rho, make_theta, size_bias, survival_probs, SpecialLaw};
use stablegw::rng::Streams;
use stablegw::stats;

/// Generalised binomial coefficient binom(a, k).
fn binom(a: f64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (a - j as f64) / (j + 1) as f64)
}

/// Point masses of r + γ(1-r)^α read off its power series.
fn rho_oracle(alpha: f64, gamma: f64, k: u64) -> f64 {
    match k {
        0 => gamma,
        1 => 1.0 - gamma * alpha,
        _ => gamma * binom(alpha, k) * if k % 2 == 0 { 1.0 } else { -1.0 },
    }
}

/// α (2-α)(3-α)...(k-1-α) / k!
fn theta_oracle(alpha: f64, k: u64) -> f64 {
    if k < 2 {
        return 0.0;
    }
    let mut p = alpha / 2.0;
    for j in 2..k {
        p *= (j as f64 - alpha) / (j + 1) as f64;
    }
    p
}

fn theta_gf(alpha: f64, r: f64) -> f64 {
    ((1.0 - r).powf(alpha) - 1.0 + alpha * r) / (alpha - 1.0)
}

fn theta_hat_gf(alpha: f64, r: f64) -> f64 {
    r * (1.0 - (1.0 - r).powf(alpha - 1.0))
}

#[test]
fn frozen_rho_values() {
    let rho = make_stable_rho(1.5, 2.0 / 3.0).unwrap();
    let want = [2.0 / 3.0, 0.0, 0.25, 0.041_666_666_666_666_664];
    for (k, w) in want.iter().enumerate() {
        assert!((rho.pmf(k as u64) - w).abs() < 1e-12, "k = {k}");
    }
    let bin = make_stable_rho(2.0, 0.5).unwrap();
    assert!((bin.pmf(0) - 0.5).abs() < 1e-15);
    assert!((bin.pmf(2) - 0.5).abs() < 1e-15);
    for k in [1, 3, 4, 10] {
        assert!(bin.pmf(k).abs() < 1e-15);
    }
}

#[test]
fn rho_matches_series_coefficients() {
    for (alpha, gamma) in [(1.2, 0.5), (1.5, 2.0 / 3.0), (1.8, 0.3), (1.9, 0.52)] {
        let rho = make_stable_rho(alpha, gamma).unwrap();
        for k in 0..60 {
            let o = rho_oracle(alpha, gamma, k);
            assert!((rho.pmf(k) - o).abs() < 1e-12 * o.max(1e-3), "alpha {alpha} k {k}");
        }
    }
}

#[test]
fn frozen_theta_values() {
    let t = make_theta(1.5).unwrap();
    assert!((t.pmf(2) - 0.75).abs() < 1e-12);
    assert!((t.pmf(3) - 0.125).abs() < 1e-12);
    assert!((t.pmf(4) - 0.046875).abs() < 1e-12);
    assert!((t.mean() - 3.0).abs() < 1e-9);
    let t2 = make_theta(2.0).unwrap();
    assert!((t2.pmf(2) - 1.0).abs() < 1e-15);
    for alpha in [1.1, 1.3, 1.7] {
        let t = make_theta(alpha).unwrap();
        for k in 0..200 {
            let o = theta_oracle(alpha, k);
            assert!((t.pmf(k) - o).abs() < 1e-12 * o.max(1e-3), "alpha {alpha} k {k}: {} vs {o}", t.pmf(k));
        }
    }
}

#[test]
fn generating_functions() {
    for alpha in [1.2, 1.5, 1.8, 2.0] {
        let t = make_theta(alpha).unwrap();
        let hat = size_bias(&t).unwrap();
        for r in [0.0, 0.1, 0.37, 0.5, 0.8, 0.95] {
            assert!((t.gf(r) - theta_gf(alpha, r)).abs() < 1e-9, "alpha {alpha} r {r}");
            assert!((hat.gf(r) - theta_hat_gf(alpha, r)).abs() < 1e-9, "alpha {alpha} r {r}");
        }
        let rho = make_stable_rho(alpha, 1.0 / alpha).unwrap();
        for r in [0.2f64, 0.6, 0.9] {
            let closed = r + (1.0 - r).powf(alpha) / alpha;
            assert!((rho.gf(r) - closed).abs() < 1e-9);
            assert!((rho.gf_by_summation(r, 100_000) - closed).abs() < 1e-9);
        }
    }
}

#[test]
fn size_biased_theta() {
    let hat = size_bias(&make_theta(1.5).unwrap()).unwrap();
    assert!((hat.pmf(2) - 0.5).abs() < 1e-12);
    assert!((hat.tail(3) - 0.5).abs() < 1e-12);
    let hat2 = size_bias(&make_theta(2.0).unwrap()).unwrap();
    assert!((hat2.pmf(2) - 1.0).abs() < 1e-15);
}

#[test]
fn frozen_survival_values() {
    let rho = make_stable_rho(2.0, 0.5).unwrap();
    let q = survival_probs(&rho, 1000).unwrap();
    assert_eq!(q.q(0), 1.0);
    assert!((q.q(1) - 0.5).abs() < 1e-15);
    assert!((q.q(2) - 0.375).abs() < 1e-15);
    assert!((q.q(3) - 0.3046875).abs() < 1e-15);
    assert!((1000.0 * q.q(1000) - 2.0).abs() < 0.1);
    for (alpha, gamma) in [(1.3, 0.5), (1.7, 0.4)] {
        let rho = make_stable_rho(alpha, gamma).unwrap();
        let q = survival_probs(&rho, 3).unwrap();
        assert!((q.q(1) - (1.0 - rho.pmf(0))).abs() < 1e-12);
    }
}

#[test]
fn special_laws() {
    let mut rng = Streams::new(31).stream(0, 0, 0);
    let n = 100_000;
    let mut r: Vec<f64> = (0..n).map(|_| SpecialLaw::R { alpha: 2.0 }.sample(&mut rng)).collect();
    r.sort_by(f64::total_cmp);
    let med = stats::quantile_sorted(&r, 0.5);
    assert!((med - (2f64.sqrt() - 1.0)).abs() < 0.01, "{med}");
    let v: Vec<f64> = (0..n).map(|_| SpecialLaw::V { alpha: 2.0 }.sample(&mut rng)).collect();
    let e = stats::mean_se(&v);
    assert!((e.value - 1.0 / 3.0).abs() < 4.0 * e.stderr);
    let u: Vec<f64> = (0..n).map(|_| SpecialLaw::Uniform.sample(&mut rng)).collect();
    assert!(stats::ks_one_sample(&u, |x| SpecialLaw::Uniform.cdf(x)).p_value > 0.01);
    for alpha in [1.3, 1.7] {
        let law = SpecialLaw::V { alpha };
        let xs: Vec<f64> = (0..20_000).map(|_| law.sample(&mut rng)).collect();
        assert!(stats::ks_one_sample(&xs, |x| law.cdf(x)).p_value > 0.01);
    }
}

#[test]
fn sampler_matches_pmf() {
    let mut rng = Streams::new(8).stream(0, 0, 0);
    for law in [make_theta(1.5).unwrap(), make_stable_rho(1.3, 0.6).unwrap()] {
        let n = 200_000;
        let mut counts = [0u64; 6];
        for _ in 0..n {
            let k = law.sample(&mut rng) as usize;
            counts[k.min(5)] += 1;
        }
        for (k, &c) in counts.iter().enumerate().take(5) {
            let p = law.pmf(k as u64);
            let se = (p * (1.0 - p) / n as f64).sqrt().max(1e-9);
            assert!((c as f64 / n as f64 - p).abs() < 4.5 * se, "k {k}");
        }
        let tail5 = law.tail(5);
        let se = (tail5 * (1.0 - tail5) / n as f64).sqrt();
        assert!((counts[5] as f64 / n as f64 - tail5).abs() < 4.5 * se);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pmf_is_tail_difference(alpha in 1.05f64..2.0, gamma_frac in 0.05f64..1.0, k in 0u64..5000) {
        let gamma = gamma_frac / alpha;
        let rho = make_stable_rho(alpha, gamma).unwrap();
        let d = rho.tail(k) - rho.tail(k + 1);
        prop_assert!((rho.pmf(k) - d).abs() <= 1e-12 * rho.tail(k).max(1e-300) + 1e-15);
        let theta = make_theta(alpha).unwrap();
        let d = theta.tail(k) - theta.tail(k + 1);
        prop_assert!((theta.pmf(k) - d).abs() <= 1e-12 * theta.tail(k).max(1e-300) + 1e-15);
    }

    #[test]
    fn rho_is_critical(alpha in 1.05f64..=2.0, gamma_frac in 0.05f64..1.0) {
        let rho = make_stable_rho(alpha, gamma_frac / alpha).unwrap();
        prop_assert!((rho.mean() - 1.0).abs() < 1e-9);
        prop_assert!((rho.tail(0) - 1.0).abs() < 1e-12);
        let partial: f64 = (0..2000).map(|k| rho.pmf(k)).sum();
        prop_assert!((partial + rho.tail(2000) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn survival_decreases(alpha in 1.05f64..=2.0, gamma_frac in 0.05f64..1.0) {
        let rho = make_stable_rho(alpha, gamma_frac / alpha).unwrap();
        let q = survival_probs(&rho, 200).unwrap();
        for n in 1..=200 {
            prop_assert!(q.q(n) < q.q(n - 1) && q.q(n) > 0.0);
        }
    }
}
