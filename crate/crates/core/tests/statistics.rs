use lmnpt::distributions::{draw_sample, solve_params, Family};
use lmnpt::harness::empirical_quantile_curve;
use lmnpt::lmoments::{population_lmoments, sample_lmoments};
use lmnpt::normal::inverse_normal_cdf;
use lmnpt::npt::fit_lmnpt;
use lmnpt::quadrature::QuadratureConfig;

#[test]
fn sample_lmoments_are_unbiased_for_gumbel() {
    let spec = solve_params(Family::Gumbel, 167.0, 0.15).unwrap();
    let pop = spec
        .population_lmoments(QuadratureConfig::default())
        .unwrap()
        .as_array();
    let reps = 4000;
    let mut sums = [0.0; 4];
    let mut sq = [0.0; 4];
    for i in 0..reps {
        let lm = sample_lmoments(&draw_sample(&spec, 8, 0x5EED ^ i).unwrap())
            .unwrap()
            .as_array();
        for r in 0..4 {
            sums[r] += lm[r];
            sq[r] += lm[r] * lm[r];
        }
    }
    for r in 0..4 {
        let mean = sums[r] / reps as f64;
        let se = ((sq[r] / reps as f64 - mean * mean) / reps as f64).sqrt();
        assert!(
            (mean - pop[r]).abs() <= 4.5 * se,
            "l{}: mean {mean} vs population {} (se {se})",
            r + 1,
            pop[r]
        );
    }
}

#[test]
fn sample_ratios_converge_to_population() {
    let spec = solve_params(Family::Gumbel, 167.0, 0.15).unwrap();
    let lm = sample_lmoments(&draw_sample(&spec, 50_000, 7).unwrap()).unwrap();
    let (t3, t4) = lm.ratios().unwrap();
    assert!((t3 - 0.1699).abs() < 0.01, "tau3 {t3}");
    assert!((t4 - 0.1504).abs() < 0.01, "tau4 {t4}");
}

#[test]
fn normal_population_is_a_fixed_point() {
    let spec = solve_params(Family::Normal, 167.0, 0.07).unwrap();
    let lm = population_lmoments(
        |p| spec.true_quantile(p).unwrap(),
        QuadratureConfig::default(),
    )
    .unwrap();
    let k = fit_lmnpt(&lm).unwrap();
    assert!((k.a - 167.0).abs() < 1e-6);
    assert!((k.b - 11.69).abs() < 1e-3, "b {}", k.b);
    assert!(k.c.abs() < 1e-8);
    assert!(k.d.abs() < 1e-4, "d {}", k.d);
}

#[test]
fn empirical_quantiles_converge_for_large_samples() {
    let spec = solve_params(Family::Normal, 167.0, 0.07).unwrap();
    let sample = draw_sample(&spec, 100_000, 2024).unwrap();
    let curve = empirical_quantile_curve(&sample, &[0.5, 0.975]).unwrap();
    let q975 = 167.0 + 11.69 * inverse_normal_cdf(0.975).unwrap();
    assert!((q975 - 189.91).abs() < 0.01);
    assert!(
        (curve.values()[1] - q975).abs() < 0.3,
        "{}",
        curve.values()[1]
    );
    assert!(
        (curve.values()[0] - 167.0).abs() < 0.2,
        "{}",
        curve.values()[0]
    );
}
