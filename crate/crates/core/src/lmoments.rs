//! Sample and population L-moments.
//!
//! Sample L-moments are computed from unbiased probability weighted moments
//! of the ordered sample. A direct enumeration over all size-r subsamples
//! is kept alongside as an oracle for small samples.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::QuadratureConfig;

/// Largest sample the subsample-enumeration oracle accepts.
pub const BRUTE_FORCE_LIMIT: usize = 20;

/// Positive, finite travel-time observations in seconds.
///
/// Keeps the observation order and a sorted copy.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    values: Vec<f64>,
    sorted: Vec<f64>,
}

impl SampleSet {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InsufficientSample {
                required: 1,
                actual: 0,
            });
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::InvalidSampleValue { index, value });
        }
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { values, sorted })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Observations in insertion order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Ascending order statistics.
    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn min(&self) -> f64 {
        self.sorted[0]
    }

    pub fn max(&self) -> f64 {
        self.sorted[self.sorted.len() - 1]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    /// Returns a new set with `value` appended.
    pub fn with_appended(&self, value: f64) -> Result<Self> {
        let mut values = self.values.clone();
        values.push(value);
        Self::new(values)
    }

    fn is_constant(&self) -> bool {
        self.min() == self.max()
    }
}

impl TryFrom<Vec<f64>> for SampleSet {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

/// The first four L-moments and the L-moment ratios.
///
/// `tau3`/`tau4` are `None` when `l2` is not strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LMomentSummary {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub l4: f64,
    pub tau3: Option<f64>,
    pub tau4: Option<f64>,
}

impl LMomentSummary {
    pub fn from_lmoments(l1: f64, l2: f64, l3: f64, l4: f64) -> Self {
        let (tau3, tau4) = if l2 > 0.0 {
            (Some(l3 / l2), Some(l4 / l2))
        } else {
            (None, None)
        };
        Self {
            l1,
            l2,
            l3,
            l4,
            tau3,
            tau4,
        }
    }

    /// `(tau3, tau4)` when both are defined.
    pub fn ratios(&self) -> Option<(f64, f64)> {
        self.tau3.zip(self.tau4)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.l1, self.l2, self.l3, self.l4]
    }
}

/// Unbiased probability weighted moment estimator b_q, 0 ≤ q ≤ 3.
///
/// b_q = n⁻¹ Σ_{i>q} [(i−1)…(i−q)] / [(n−1)…(n−q)] · x_{i:n}
pub fn sample_pwm(sample: &SampleSet, q: usize) -> Result<f64> {
    if q > 3 {
        return Err(Error::Domain {
            what: "PWM order",
            value: q as f64,
            domain: "0..=3",
        });
    }
    let n = sample.len();
    if n <= q {
        return Err(Error::InsufficientSample {
            required: q + 1,
            actual: n,
        });
    }
    if sample.is_constant() {
        return Ok(sample.min());
    }
    Ok(pwm_sorted(sample.sorted(), q))
}

fn pwm_sorted(sorted: &[f64], q: usize) -> f64 {
    let n = sorted.len();
    let nf = n as f64;
    let sum: f64 = sorted
        .iter()
        .enumerate()
        .skip(q)
        .map(|(idx, &x)| {
            let i = (idx + 1) as f64;
            let weight: f64 = (1..=q).map(|j| (i - j as f64) / (nf - j as f64)).product();
            weight * x
        })
        .sum();
    sum / nf
}

/// Sample L-moments l1..l4 from unbiased PWMs. Requires n ≥ 4.
pub fn sample_lmoments(sample: &SampleSet) -> Result<LMomentSummary> {
    let n = sample.len();
    if n < 4 {
        return Err(Error::InsufficientSample {
            required: 4,
            actual: n,
        });
    }
    if sample.is_constant() {
        return Ok(LMomentSummary::from_lmoments(sample.min(), 0.0, 0.0, 0.0));
    }
    let s = sample.sorted();
    let b = [
        pwm_sorted(s, 0),
        pwm_sorted(s, 1),
        pwm_sorted(s, 2),
        pwm_sorted(s, 3),
    ];
    let l1 = b[0];
    let l2 = 2.0 * b[1] - b[0];
    let l3 = 6.0 * b[2] - 6.0 * b[1] + b[0];
    let l4 = 20.0 * b[3] - 30.0 * b[2] + 12.0 * b[1] - b[0];
    Ok(LMomentSummary::from_lmoments(l1, l2, l3, l4))
}

/// r-th sample L-moment by enumerating every size-r subsample and averaging
/// r⁻¹ Σ_k (−1)^k C(r−1, k) x_{(r−k)}.
pub fn brute_force_lmoment(sample: &SampleSet, r: usize) -> Result<f64> {
    if !(1..=4).contains(&r) {
        return Err(Error::Domain {
            what: "L-moment order",
            value: r as f64,
            domain: "1..=4",
        });
    }
    let n = sample.len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::SizeGuard {
            n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    if n < r {
        return Err(Error::InsufficientSample {
            required: r,
            actual: n,
        });
    }
    let coeffs: Vec<f64> = (0..r)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(r - 1, k) as f64
        })
        .collect();
    let mut total = 0.0;
    let mut count = 0usize;
    // Combinations of a sorted slice come out sorted.
    for sub in sample.sorted().iter().combinations(r) {
        let combo: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * sub[r - 1 - k])
            .sum();
        total += combo;
        count += 1;
    }
    Ok(total / (r as f64 * count as f64))
}

fn binomial(n: usize, k: usize) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// Population L-moments of a distribution given its quantile function.
pub fn population_lmoments<F>(
    quantile_fn: F,
    quadrature: QuadratureConfig,
) -> Result<LMomentSummary>
where
    F: Fn(f64) -> f64,
{
    let rule = quadrature.rule()?;
    let mut l = [0.0; 4];
    for (&p, &w) in rule.points().iter().zip(rule.weights()) {
        let x = quantile_fn(p);
        if !x.is_finite() {
            return Err(Error::NonFiniteIntegrand { p });
        }
        let wx = w * x;
        l[0] += wx;
        l[1] += wx * (2.0 * p - 1.0);
        l[2] += wx * ((6.0 * p - 6.0) * p + 1.0);
        l[3] += wx * (((20.0 * p - 30.0) * p + 12.0) * p - 1.0);
    }
    Ok(LMomentSummary::from_lmoments(l[0], l[1], l[2], l[3]))
}
