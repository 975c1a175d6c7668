//! Fourth-order Cornish-Fisher percentile estimator, the central-moment
//! baseline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lmoments::SampleSet;
use crate::normal::{inverse_normal_cdf, inverse_normal_cdf_unchecked};
use crate::npt::{validate_grid, PercentileCurve, ValidityKind, ValidityStatus};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CentralMomentSummary {
    pub mean: f64,
    pub sd: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

/// Mean, sample sd (n − 1) and the adjusted Fisher-Pearson skewness G1 and
/// excess kurtosis G2.
pub fn sample_central_moments(sample: &SampleSet) -> Result<CentralMomentSummary> {
    let n = sample.len();
    if n < 4 {
        return Err(Error::InsufficientSample {
            required: 4,
            actual: n,
        });
    }
    let nf = n as f64;
    let mean = sample.mean();
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in sample.values() {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    if m2.is_nan() || m2 <= 0.0 {
        return Err(Error::Degenerate("sample variance is zero".into()));
    }
    let g1 = m3 / m2.powf(1.5);
    let g2 = m4 / (m2 * m2) - 3.0;
    let skewness = g1 * (nf * (nf - 1.0)).sqrt() / (nf - 2.0);
    let excess_kurtosis = ((nf + 1.0) * g2 + 6.0) * (nf - 1.0) / ((nf - 2.0) * (nf - 3.0));
    Ok(CentralMomentSummary {
        mean,
        sd: (m2 * nf / (nf - 1.0)).sqrt(),
        skewness,
        excess_kurtosis,
    })
}

/// Standardized Cornish-Fisher quantile
/// w = z + (z²−1)s/6 + (z³−3z)k/24 − (2z³−5z)s²/36.
#[inline]
pub fn cf_expansion(z: f64, skewness: f64, excess_kurtosis: f64) -> f64 {
    let (s, k) = (skewness, excess_kurtosis);
    let z2 = z * z;
    let z3 = z2 * z;
    z + (z2 - 1.0) * s / 6.0 + (z3 - 3.0 * z) * k / 24.0 - (2.0 * z3 - 5.0 * z) * s * s / 36.0
}

fn check_summary(cm: &CentralMomentSummary) -> Result<()> {
    if !(cm.sd > 0.0 && cm.sd.is_finite()) {
        return Err(Error::Degenerate(format!(
            "standard deviation {} must be positive",
            cm.sd
        )));
    }
    if !(cm.mean.is_finite() && cm.skewness.is_finite() && cm.excess_kurtosis.is_finite()) {
        return Err(Error::Degenerate("non-finite central moments".into()));
    }
    Ok(())
}

/// The series as a cubic in z: mean + sd·w(z) = a + b·z + c·z² + d·z³.
pub fn cf_cubic_coefficients(cm: &CentralMomentSummary) -> [f64; 4] {
    let (m, sd, s, k) = (cm.mean, cm.sd, cm.skewness, cm.excess_kurtosis);
    [
        m - sd * s / 6.0,
        sd * (1.0 - k / 8.0 + 5.0 * s * s / 36.0),
        sd * s / 6.0,
        sd * (k / 24.0 - s * s / 18.0),
    ]
}

pub fn cf_quantile(cm: &CentralMomentSummary, p: f64) -> Result<f64> {
    check_summary(cm)?;
    let z = inverse_normal_cdf(p)?;
    Ok(cm.mean + cm.sd * cf_expansion(z, cm.skewness, cm.excess_kurtosis))
}

pub fn cf_curve(cm: &CentralMomentSummary, grid: &[f64]) -> Result<PercentileCurve> {
    check_summary(cm)?;
    validate_grid(grid)?;
    let values = grid
        .iter()
        .map(|&p| {
            let z = inverse_normal_cdf_unchecked(p);
            cm.mean + cm.sd * cf_expansion(z, cm.skewness, cm.excess_kurtosis)
        })
        .collect();
    PercentileCurve::new(grid.to_vec(), values)
}

/// Monotonicity of the series over all real z.
///
/// dw/dz = A z² + B z + C with A = k/8 − s²/6, B = s/3,
/// C = 1 − k/8 + 5s²/36. Valid iff A > 0 with B² − 4AC ≤ 0, or the
/// derivative is a non-negative constant.
pub fn cf_validity(skewness: f64, excess_kurtosis: f64) -> ValidityStatus {
    let (s, k) = (skewness, excess_kurtosis);
    if !(s.is_finite() && k.is_finite()) {
        return ValidityStatus::undefined();
    }
    let a = k / 8.0 - s * s / 6.0;
    let b = s / 3.0;
    let c = 1.0 - k / 8.0 + 5.0 * s * s / 36.0;
    let disc = b * b - 4.0 * a * c;
    let kind = if a > 0.0 {
        if disc <= 0.0 {
            ValidityKind::Valid
        } else {
            ValidityKind::InvalidDiscriminant
        }
    } else if a == 0.0 && b == 0.0 && c >= 0.0 {
        ValidityKind::Valid
    } else {
        ValidityKind::InvalidCurvature
    };
    ValidityStatus {
        kind,
        tau3: s,
        tau4: k,
        h_value: disc,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normal::inverse_normal_cdf;

    fn set(v: &[f64]) -> SampleSet {
        SampleSet::new(v.to_vec()).unwrap()
    }

    fn cm(mean: f64, sd: f64, s: f64, k: f64) -> CentralMomentSummary {
        CentralMomentSummary {
            mean,
            sd,
            skewness: s,
            excess_kurtosis: k,
        }
    }

    #[test]
    fn symmetric_sample() {
        let m = sample_central_moments(&set(&[1.0, 2.0, 3.0, 4.0, 5.0])).unwrap();
        assert_eq!(m.mean, 3.0);
        assert!(m.skewness.abs() < 1e-15);
        assert!((m.sd - 2.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn adjusted_skewness_of_three_equal_and_one_larger() {
        // Zero is not a travel time; shift by 1 (skewness is shift invariant).
        let m = sample_central_moments(&set(&[1.0, 1.0, 1.0, 2.0])).unwrap();
        assert!((m.skewness - 2.0).abs() < 1e-12, "{}", m.skewness);
        // g2 = -2/3, adjusted G2 = 4.
        assert!(
            (m.excess_kurtosis - 4.0).abs() < 1e-12,
            "{}",
            m.excess_kurtosis
        );
    }

    #[test]
    fn scale_equivariance() {
        let base = set(&[3.0, 1.0, 4.0, 1.5, 9.0, 2.6]);
        let scaled = SampleSet::new(base.values().iter().map(|v| v * 7.0).collect()).unwrap();
        let (a, b) = (
            sample_central_moments(&base).unwrap(),
            sample_central_moments(&scaled).unwrap(),
        );
        assert!((b.sd - 7.0 * a.sd).abs() < 1e-12);
        assert!((b.skewness - a.skewness).abs() < 1e-12);
        assert!((b.excess_kurtosis - a.excess_kurtosis).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            sample_central_moments(&set(&[1.0, 2.0, 3.0])),
            Err(Error::InsufficientSample { .. })
        ));
        assert!(matches!(
            sample_central_moments(&set(&[2.0; 5])),
            Err(Error::Degenerate(_))
        ));
        assert!(cf_quantile(&cm(1.0, 0.0, 0.0, 0.0), 0.5).is_err());
    }

    #[test]
    fn normal_case_collapses() {
        let m = cm(167.0, 11.69, 0.0, 0.0);
        for p in [0.01, 0.2, 0.5, 0.9, 0.999] {
            let want = 167.0 + 11.69 * inverse_normal_cdf(p).unwrap();
            assert!((cf_quantile(&m, p).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn skew_shifts_the_median() {
        let m = cm(10.0, 2.0, 0.6, 0.0);
        assert!((cf_quantile(&m, 0.5).unwrap() - (10.0 - 0.2)).abs() < 1e-15);
        for k in [-1.0, 0.0, 3.5] {
            assert_eq!(cf_quantile(&cm(10.0, 2.0, 0.0, k), 0.5).unwrap(), 10.0);
        }
    }

    #[test]
    fn cubic_form_matches_series() {
        let m = cm(50.0, 4.0, 0.7, 2.2);
        let [a, b, c, d] = cf_cubic_coefficients(&m);
        for p in [0.001, 0.1, 0.5, 0.77, 0.999] {
            let z = inverse_normal_cdf(p).unwrap();
            let cubic = a + z * (b + z * (c + z * d));
            assert!((cubic - cf_quantile(&m, p).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn validity_examples() {
        assert!(cf_validity(0.0, 0.0).is_valid());
        let v = cf_validity(0.0, 4.0);
        assert!(v.is_valid());
        assert!((v.h_value + 1.0).abs() < 1e-15);
        assert_eq!(cf_validity(2.0, 0.0).kind, ValidityKind::InvalidCurvature);
        assert_eq!(cf_validity(0.0, -0.5).kind, ValidityKind::InvalidCurvature);
        // A > 0 but discriminant positive.
        assert_eq!(
            cf_validity(1.0, 9.0).kind,
            ValidityKind::InvalidDiscriminant
        );
    }

    #[test]
    fn valid_series_gives_monotone_curve() {
        let m = cm(100.0, 10.0, 0.5, 1.5);
        assert!(cf_validity(m.skewness, m.excess_kurtosis).is_valid());
        let grid: Vec<f64> = (1..1000).map(|i| i as f64 / 1000.0).collect();
        assert!(cf_curve(&m, &grid).unwrap().is_monotone());
    }
}
