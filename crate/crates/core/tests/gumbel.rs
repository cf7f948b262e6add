use irradiance_core::sim::replicate_rng;
use irradiance_core::stats;
use irradiance_core::trends::{fit_gumbel, GumbelParams, TrendModel, EULER_GAMMA};
use proptest::prelude::*;

fn reference_triples() -> [GumbelParams; 3] {
    let t = TrendModel::reference();
    [t.a.residual, t.b.residual, t.c.residual]
}

fn integrate(p: &GumbelParams, lo: f64, hi: f64) -> f64 {
    let n = 200_000;
    let h = (hi - lo) / n as f64;
    let inner: f64 = (1..n).map(|i| p.pdf(lo + i as f64 * h)).sum();
    (inner + 0.5 * (p.pdf(lo) + p.pdf(hi))) * h
}

#[test]
fn pdf_integrates_to_one() {
    for p in reference_triples() {
        let total = integrate(&p, p.mu - 40.0 * p.nu, p.mu + 12.0 * p.nu);
        assert!((total - 1.0).abs() < 1e-6, "{total}");
        // mass left of mu - 12 nu is 1 - exp(-exp(-12))
        let window = integrate(&p, p.mu - 12.0 * p.nu, p.mu + 12.0 * p.nu);
        assert!((1.0 - window - (-12.0f64).exp()).abs() < 1e-8, "{window}");
    }
}

#[test]
fn sampler_mean_within_three_standard_errors() {
    for (k, p) in reference_triples().into_iter().enumerate() {
        let mut rng = replicate_rng(1, k as u32, 0);
        let xs: Vec<f64> = (0..1_000_000).map(|_| p.sample(&mut rng)).collect();
        let se = stats::std_dev(&xs) / (xs.len() as f64).sqrt();
        let expected = p.mu - p.nu * EULER_GAMMA;
        assert!((stats::mean(&xs) - expected).abs() <= 3.0 * se);
    }
}

#[test]
fn histogram_passes_chi_square() {
    // 15 equiprobable bins, 14 degrees of freedom, 1% critical value
    const CRITICAL: f64 = 29.141;
    for (k, p) in reference_triples().into_iter().enumerate() {
        let mut rng = replicate_rng(2, k as u32, 0);
        let n = 100_000;
        let edges: Vec<f64> = (1..15).map(|i| p.quantile(i as f64 / 15.0)).collect();
        let mut counts = [0usize; 15];
        for _ in 0..n {
            let x = p.sample(&mut rng);
            counts[edges.partition_point(|&e| e < x)] += 1;
        }
        let expected = n as f64 / 15.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        assert!(chi2 < CRITICAL, "chi2 = {chi2}");
    }
}

#[test]
fn fit_recovers_reference_triples() {
    for (k, p) in reference_triples().into_iter().enumerate() {
        let mut rng = replicate_rng(3, k as u32, 0);
        let xs: Vec<f64> = (0..100_000).map(|_| p.sample(&mut rng)).collect();
        let f = fit_gumbel(&xs).unwrap();
        assert!((f.mu - p.mu).abs() <= 0.02 * p.mu.abs(), "{f:?} vs {p:?}");
        assert!((f.nu - p.nu).abs() <= 0.02 * p.nu, "{f:?} vs {p:?}");
    }
}

#[test]
fn samples_skew_left() {
    let p = reference_triples()[2];
    let mut rng = replicate_rng(4, 0, 0);
    let xs: Vec<f64> = (0..100_000).map(|_| p.sample(&mut rng)).collect();
    let m = stats::mean(&xs);
    let m2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>();
    let m3 = xs.iter().map(|x| (x - m).powi(3)).sum::<f64>();
    assert!(m3 / m2.powf(1.5) < 0.0);
}

proptest! {
    #[test]
    fn quantile_inverts_cdf(mu in -100.0..100.0f64, nu in 0.01..50.0f64, u in 0.001..0.999f64) {
        let p = GumbelParams::new(mu, nu).unwrap();
        prop_assert!((p.cdf(p.quantile(u)) - u).abs() < 1e-9);
    }

    #[test]
    fn quantile_is_monotone(mu in -10.0..10.0f64, nu in 0.1..5.0f64, u in 0.01..0.98f64) {
        let p = GumbelParams::new(mu, nu).unwrap();
        prop_assert!(p.quantile(u) < p.quantile(u + 0.01));
    }
}
