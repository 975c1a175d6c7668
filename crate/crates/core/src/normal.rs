//! Standard normal CDF, density and quantile.

use statrs::function::erf::erfc;

use crate::error::{Error, Result};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[inline]
pub fn normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

#[inline]
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Φ⁻¹(p) for 0 < p < 1.
///
/// Acklam's rational approximation (relative error below 1.2e-9) refined by
/// one Newton step against the erfc-based CDF. The lower tail is always
/// evaluated and the upper tail obtained by antisymmetry, so the Newton
/// residual keeps full relative precision on both sides.
pub fn inverse_normal_cdf(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain {
            what: "probability",
            value: p,
            domain: "(0, 1)",
        });
    }
    Ok(inverse_normal_cdf_unchecked(p))
}

/// As [`inverse_normal_cdf`] but without the domain check. Callers must
/// guarantee 0 < p < 1.
pub(crate) fn inverse_normal_cdf_unchecked(p: f64) -> f64 {
    if p == 0.5 {
        return 0.0;
    }
    if p > 0.5 {
        // 1 - p is exact for p in (0.5, 1).
        return -lower_tail_quantile(1.0 - p);
    }
    lower_tail_quantile(p)
}

fn lower_tail_quantile(p: f64) -> f64 {
    let x = acklam(p);
    let residual = normal_cdf(x) - p;
    x - residual / normal_pdf(x)
}

fn acklam(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        C[0].mul_add(q, C[1])
            .mul_add(q, C[2])
            .mul_add(q, C[3])
            .mul_add(q, C[4])
            .mul_add(q, C[5])
            / D[0]
                .mul_add(q, D[1])
                .mul_add(q, D[2])
                .mul_add(q, D[3])
                .mul_add(q, 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        A[0].mul_add(r, A[1])
            .mul_add(r, A[2])
            .mul_add(r, A[3])
            .mul_add(r, A[4])
            .mul_add(r, A[5])
            * q
            / B[0]
                .mul_add(r, B[1])
                .mul_add(r, B[2])
                .mul_add(r, B[3])
                .mul_add(r, B[4])
                .mul_add(r, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Bisection on the CDF; independent of the rational approximation.
    fn bisect_quantile(p: f64) -> f64 {
        let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if normal_cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn median_is_zero() {
        assert_eq!(inverse_normal_cdf(0.5).unwrap(), 0.0);
    }

    #[test]
    fn upper_2_5_percent_point() {
        let oracle = bisect_quantile(0.975);
        assert!((oracle - 1.959964).abs() < 1e-6);
        assert!((inverse_normal_cdf(0.975).unwrap() - oracle).abs() < 1e-9);
    }

    #[test]
    fn antisymmetric() {
        for p in [1e-8, 1e-5, 0.01, 0.2, 0.37, 0.4999] {
            // Pair each upper point with its exactly representable complement.
            let upper = 1.0 - p;
            let lo = inverse_normal_cdf(1.0 - upper).unwrap();
            let hi = inverse_normal_cdf(upper).unwrap();
            assert_eq!(lo, -hi, "p = {p}");
        }
    }

    #[test]
    fn matches_bisection_oracle_across_range() {
        let mut p = 1e-8;
        while p < 0.5 {
            // Upper-tail CDF values lose relative precision, so the oracle
            // bisects the mirrored lower-tail problem there.
            let upper = 1.0 - p;
            for (q, want) in [
                (p, bisect_quantile(p)),
                (upper, -bisect_quantile(1.0 - upper)),
            ] {
                let got = inverse_normal_cdf(q).unwrap();
                assert!((got - want).abs() <= 1e-9, "p={q}: {got} vs {want}");
            }
            p *= 1.37;
        }
    }

    #[test]
    fn rejects_closed_endpoints_and_nan() {
        for p in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(inverse_normal_cdf(p), Err(Error::Domain { .. })));
        }
    }
}
