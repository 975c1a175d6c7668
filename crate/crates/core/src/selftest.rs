//! Built-in checks run by `lmnpt selftest`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::lmoments::{brute_force_lmoment, sample_lmoments, SampleSet};
use crate::npt::{recover_constants, sqm_table, NptConstants};
use crate::quadrature::QuadratureConfig;

pub const CONSTANT_TOLERANCE: f64 = 1e-5;
pub const ORACLE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Largest absolute deviation of the recovered constants from the
/// published ones.
pub fn constant_recovery(quadrature: QuadratureConfig) -> Result<(NptConstants, f64)> {
    let recovered = recover_constants(&sqm_table(quadrature)?)?;
    let worst = recovered
        .as_array()
        .iter()
        .zip(NptConstants::PUBLISHED.as_array())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok((recovered, worst))
}

/// Relative deviation |fast − brute| / max(|brute|, l2); the l2 floor keeps
/// near-zero l3 and l4 from inflating the ratio.
pub fn oracle_deviation(sample: &SampleSet) -> Result<f64> {
    let lm = sample_lmoments(sample)?.as_array();
    let scale = lm[1].abs();
    let mut worst: f64 = 0.0;
    for r in 1..=4 {
        let brute = brute_force_lmoment(sample, r)?;
        let dev = (lm[r - 1] - brute).abs() / brute.abs().max(scale).max(f64::MIN_POSITIVE);
        worst = worst.max(dev);
    }
    Ok(worst)
}

/// Random positive samples of size 4..=12 from a fixed stream.
pub fn oracle_samples(count: usize, seed: u64) -> Vec<SampleSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.random_range(4..=12);
            let scale = 10f64.powf(rng.random_range(-2.0..3.0));
            let values = (0..n)
                .map(|_| scale * (0.01 + rng.random::<f64>()).powf(rng.random_range(0.5..3.0)))
                .collect();
            SampleSet::new(values).expect("positive finite draws")
        })
        .collect()
}

pub fn run_all() -> Vec<Check> {
    let mut checks = Vec::new();
    checks.push(match constant_recovery(QuadratureConfig::default()) {
        Ok((k, worst)) => Check {
            name: "constant_recovery",
            passed: worst <= CONSTANT_TOLERANCE,
            detail: format!(
                "a1={:.8} b1={:.8} b2={:.8} c1={:.8} d1={:.8} d2={:.8} max|Δ|={worst:.2e}",
                k.a1, k.b1, k.b2, k.c1, k.d1, k.d2
            ),
        },
        Err(e) => Check {
            name: "constant_recovery",
            passed: false,
            detail: e.to_string(),
        },
    });
    let samples = oracle_samples(500, 0x5EED);
    let worst = samples
        .iter()
        .map(oracle_deviation)
        .try_fold(0.0_f64, |acc, d| d.map(|d| acc.max(d)));
    checks.push(match worst {
        Ok(w) => Check {
            name: "brute_force_oracle",
            passed: w <= ORACLE_TOLERANCE,
            detail: format!("{} samples, max relative deviation {w:.2e}", samples.len()),
        },
        Err(e) => Check {
            name: "brute_force_oracle",
            passed: false,
            detail: e.to_string(),
        },
    });
    checks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for c in run_all() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }

    #[test]
    fn oracle_samples_are_reproducible() {
        let a = oracle_samples(3, 9);
        let b = oracle_samples(3, 9);
        assert_eq!(a, b);
        assert!(a.iter().all(|s| (4..=12).contains(&s.len())));
    }
}
