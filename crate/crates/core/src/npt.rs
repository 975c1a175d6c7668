//! L-moments based normal-polynomial transformation (LMNPT).
//!
//! The percentile function is modelled as a cubic in the standard normal
//! quantile, `Q(p) = a + b·z + c·z² + d·z³` with `z = Φ⁻¹(p)`, and the
//! coefficients are linear in the first four L-moments:
//!
//! ```text
//! a = l1 + a1·l3      b = b1·l2 + b2·l4
//! c = c1·l3           d = d1·l2 + d2·l4
//! ```
//!
//! The six constants come from the integrals `S(q, m) = ∫ p^q z^m dp`;
//! [`sqm_table`] and [`recover_constants`] rebuild them numerically.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lmoments::LMomentSummary;
use crate::normal::{inverse_normal_cdf, inverse_normal_cdf_unchecked};
use crate::quadrature::QuadratureConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NptConstants {
    pub a1: f64,
    pub b1: f64,
    pub b2: f64,
    pub c1: f64,
    pub d1: f64,
    pub d2: f64,
}

impl NptConstants {
    /// Published values; the default everywhere.
    pub const PUBLISHED: NptConstants = NptConstants {
        a1: -1.813_799_37,
        b1: 2.255_186_17,
        b2: -3.937_402_5,
        c1: 1.813_799_37,
        d1: -0.193_092_93,
        d2: 1.574_961,
    };

    /// Ten-digit values recovered by high-precision integration of S(q, m).
    pub const PRECISE: NptConstants = NptConstants {
        a1: -1.813_799_364_2,
        b1: 2.255_186_166_3,
        b2: -3.937_402_486_4,
        c1: 1.813_799_364_2,
        d1: -0.193_092_926_1,
        d2: 1.574_960_994_6,
    };

    /// Lower τ4 edge of the validity domain, −d1/d2.
    pub fn tau4_lower(&self) -> f64 {
        -self.d1 / self.d2
    }

    /// Upper τ4 edge of the validity domain, −b1/b2.
    pub fn tau4_upper(&self) -> f64 {
        -self.b1 / self.b2
    }

    /// Discriminant h(τ3) = c1²τ3² − 3(d1 + d2τ4)(b1 + b2τ4) of the
    /// derivative quadratic, in L-moment-ratio units.
    pub fn discriminant(&self, tau3: f64, tau4: f64) -> f64 {
        self.c1 * self.c1 * tau3 * tau3
            - 3.0 * (self.d1 + self.d2 * tau4) * (self.b1 + self.b2 * tau4)
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.a1, self.b1, self.b2, self.c1, self.d1, self.d2]
    }
}

impl Default for NptConstants {
    fn default() -> Self {
        Self::PUBLISHED
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidityKind {
    Valid,
    InvalidTau4Low,
    InvalidTau4High,
    InvalidDiscriminant,
    /// Cornish-Fisher only: the derivative quadratic opens downward.
    InvalidCurvature,
    UndefinedRatios,
}

/// Outcome of a monotonicity-domain check.
///
/// For LMNPT, `tau3`/`tau4` are the L-moment ratios and `h_value` the
/// discriminant h(τ3). The Cornish-Fisher baseline reuses the type with
/// skewness, excess kurtosis and the discriminant of dw/dz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidityStatus {
    pub kind: ValidityKind,
    pub tau3: f64,
    pub tau4: f64,
    pub h_value: f64,
}

impl ValidityStatus {
    pub fn is_valid(&self) -> bool {
        self.kind == ValidityKind::Valid
    }

    pub fn undefined() -> Self {
        Self {
            kind: ValidityKind::UndefinedRatios,
            tau3: f64::NAN,
            tau4: f64::NAN,
            h_value: f64::NAN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NptCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub validity: ValidityStatus,
}

impl NptCoefficients {
    /// Coefficients supplied directly; validity is taken from the
    /// derivative quadratic b + 2cz + 3dz² itself.
    pub fn from_raw(a: f64, b: f64, c: f64, d: f64) -> Self {
        let validity = cubic_validity(b, c, d);
        Self {
            a,
            b,
            c,
            d,
            validity,
        }
    }

    /// Cubic in z, no domain checks.
    #[inline]
    pub fn polynomial(&self, z: f64) -> f64 {
        ((self.d * z + self.c) * z + self.b).mul_add(z, self.a)
    }

    /// dQ/dz = b + 2cz + 3dz².
    #[inline]
    pub fn derivative(&self, z: f64) -> f64 {
        (3.0 * self.d * z + 2.0 * self.c).mul_add(z, self.b)
    }

    /// Minimum of dQ/dz over `[lo, hi]`.
    pub fn min_derivative_on(&self, lo: f64, hi: f64) -> f64 {
        let mut m = self.derivative(lo).min(self.derivative(hi));
        if self.d != 0.0 {
            let vertex = -self.c / (3.0 * self.d);
            if vertex > lo && vertex < hi {
                m = m.min(self.derivative(vertex));
            }
        }
        m
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }
}

/// Monotonicity of b + 2cz + 3dz² over all real z, without reference to
/// L-moments. Used for coefficients that were not produced by a fit.
fn cubic_validity(b: f64, c: f64, d: f64) -> ValidityStatus {
    let disc = 4.0 * c * c - 12.0 * d * b;
    let kind = if (d > 0.0 && disc <= 0.0) || (d == 0.0 && c == 0.0 && b >= 0.0) {
        ValidityKind::Valid
    } else if d <= 0.0 {
        ValidityKind::InvalidCurvature
    } else {
        ValidityKind::InvalidDiscriminant
    };
    ValidityStatus {
        kind,
        tau3: f64::NAN,
        tau4: f64::NAN,
        h_value: disc,
    }
}

/// Estimated percentile values on a probability grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercentileCurve {
    grid: Vec<f64>,
    values: Vec<f64>,
    monotone: bool,
}

impl PercentileCurve {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        validate_grid(&grid)?;
        if grid.len() != values.len() {
            return Err(Error::InvalidGrid(format!(
                "{} grid points but {} values",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "non-finite curve value at grid index {i}"
            )));
        }
        let monotone = values.windows(2).all(|w| w[1] >= w[0]);
        Ok(Self {
            grid,
            values,
            monotone,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Whether values are nondecreasing along the grid.
    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }
}

/// p = 0.01, 0.02, …, 0.99.
pub fn default_grid() -> Vec<f64> {
    (1..=99).map(|i| i as f64 / 100.0).collect()
}

pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("empty grid".into()));
    }
    if let Some(p) = grid.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
        return Err(Error::InvalidGrid(format!(
            "probability {p} outside (0, 1)"
        )));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid(
            "grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Fits LMNPT coefficients with the published constants.
pub fn fit_lmnpt(lm: &LMomentSummary) -> Result<NptCoefficients> {
    fit_lmnpt_with(lm, &NptConstants::PUBLISHED)
}

/// Fits LMNPT coefficients. Invalid-domain fits are still returned; the
/// validity status records why they are outside the domain.
pub fn fit_lmnpt_with(lm: &LMomentSummary, k: &NptConstants) -> Result<NptCoefficients> {
    let Some((tau3, tau4)) = lm.ratios() else {
        return Err(Error::Degenerate(format!(
            "l2 = {} must be positive to fit LMNPT",
            lm.l2
        )));
    };
    if lm.l2.is_nan() || lm.l2 <= 0.0 {
        return Err(Error::Degenerate(format!(
            "l2 = {} must be positive",
            lm.l2
        )));
    }
    Ok(NptCoefficients {
        a: lm.l1 + k.a1 * lm.l3,
        b: k.b1 * lm.l2 + k.b2 * lm.l4,
        c: k.c1 * lm.l3,
        d: k.d1 * lm.l2 + k.d2 * lm.l4,
        validity: lmnpt_validity_with(tau3, tau4, k),
    })
}

/// Validity domain check with the published constants.
pub fn lmnpt_validity(tau3: f64, tau4: f64) -> ValidityStatus {
    lmnpt_validity_with(tau3, tau4, &NptConstants::PUBLISHED)
}

/// Checks −d1/d2 ≤ τ4 ≤ −b1/b2 and h(τ3) ≤ 0, boundaries inclusive. The
/// constant-derivative case (τ3 = 0, d1 + d2τ4 = 0) sits on the lower edge
/// with h = 0, so it is covered by the same test.
pub fn lmnpt_validity_with(tau3: f64, tau4: f64, k: &NptConstants) -> ValidityStatus {
    if !(tau3.is_finite() && tau4.is_finite()) {
        return ValidityStatus::undefined();
    }
    let h_value = k.discriminant(tau3, tau4);
    let kind = if tau4 < k.tau4_lower() {
        ValidityKind::InvalidTau4Low
    } else if tau4 > k.tau4_upper() {
        ValidityKind::InvalidTau4High
    } else if h_value > 0.0 {
        ValidityKind::InvalidDiscriminant
    } else {
        ValidityKind::Valid
    };
    ValidityStatus {
        kind,
        tau3,
        tau4,
        h_value,
    }
}

/// Q(p) = a + b·z + c·z² + d·z³, z = Φ⁻¹(p).
pub fn evaluate_ptt(coeffs: &NptCoefficients, p: f64) -> Result<f64> {
    Ok(coeffs.polynomial(inverse_normal_cdf(p)?))
}

pub fn evaluate_curve(coeffs: &NptCoefficients, grid: &[f64]) -> Result<PercentileCurve> {
    validate_grid(grid)?;
    let values = grid
        .iter()
        .map(|&p| coeffs.polynomial(inverse_normal_cdf_unchecked(p)))
        .collect();
    PercentileCurve::new(grid.to_vec(), values)
}

/// S(q, m) = ∫₀¹ p^q [Φ⁻¹(p)]^m dp for q, m in 0..4, by quadrature.
pub fn sqm_table(quadrature: QuadratureConfig) -> Result<[[f64; 4]; 4]> {
    if quadrature.nodes < 256 {
        return Err(Error::Quadrature(format!(
            "S(q, m) table needs at least 256 nodes, got {}",
            quadrature.nodes
        )));
    }
    let rule = quadrature.rule()?;
    let mut s = [[0.0; 4]; 4];
    for (&p, &w) in rule.points().iter().zip(rule.weights()) {
        let z = inverse_normal_cdf_unchecked(p);
        let mut pq = w;
        for row in s.iter_mut() {
            let mut zm = 1.0;
            for cell in row.iter_mut() {
                *cell += pq * zm;
                zm *= z;
            }
            pq *= p;
        }
    }
    Ok(s)
}

/// Coefficients of β0..β3 in l1..l4.
const PWM_TO_LMOMENT: [[f64; 4]; 4] = [
    [1.0, 0.0, 0.0, 0.0],
    [-1.0, 2.0, 0.0, 0.0],
    [1.0, -6.0, 6.0, 0.0],
    [-1.0, 12.0, -30.0, 20.0],
];

/// Linear map (l1..l4) → (a, b, c, d) implied by an S(q, m) table: the
/// inverse of (PWM→L-moment) · S.
pub fn lmoment_to_coefficient_map(s: &[[f64; 4]; 4]) -> Result<[[f64; 4]; 4]> {
    let mut t = [[0.0; 4]; 4];
    for (i, row) in t.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = (0..4).map(|q| PWM_TO_LMOMENT[i][q] * s[q][j]).sum();
        }
    }
    invert4(&t)
}

/// Reads the six constants off the map produced by
/// [`lmoment_to_coefficient_map`].
pub fn recover_constants(s: &[[f64; 4]; 4]) -> Result<NptConstants> {
    let inv = lmoment_to_coefficient_map(s)?;
    Ok(NptConstants {
        a1: inv[0][2],
        b1: inv[1][1],
        b2: inv[1][3],
        c1: inv[2][2],
        d1: inv[3][1],
        d2: inv[3][3],
    })
}

fn invert4(m: &[[f64; 4]; 4]) -> Result<[[f64; 4]; 4]> {
    let mut a = *m;
    let mut inv = [[0.0; 4]; 4];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap_or(col);
        if a[pivot][col].abs() < 1e-300 {
            return Err(Error::Degenerate("singular S(q, m) system".into()));
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let d = a[col][col];
        for j in 0..4 {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for r in 0..4 {
            if r != col {
                let f = a[r][col];
                for j in 0..4 {
                    a[r][j] -= f * a[col][j];
                    inv[r][j] -= f * inv[col][j];
                }
            }
        }
    }
    Ok(inv)
}

/// One row of the validity-domain boundary: for a given τ4 the admissible
/// τ3 lie in [tau3_min, tau3_max].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub tau4: f64,
    pub tau3_min: f64,
    pub tau3_max: f64,
}

/// Samples the boundary of the validity domain from −d1/d2 to −b1/b2.
pub fn validity_boundary(step: f64, k: &NptConstants) -> Result<Vec<BoundaryPoint>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Config(format!(
            "boundary step must be positive, got {step}"
        )));
    }
    let (lo, hi) = (k.tau4_lower(), k.tau4_upper());
    let count = ((hi - lo) / step).floor() as usize;
    let mut taus: Vec<f64> = (0..=count).map(|i| lo + i as f64 * step).collect();
    if taus.last().is_some_and(|&t| hi - t > 1e-12) {
        taus.push(hi);
    }
    Ok(taus
        .into_iter()
        .map(|tau4| {
            let prod = 3.0 * (k.d1 + k.d2 * tau4) * (k.b1 + k.b2 * tau4);
            let r = prod.max(0.0).sqrt() / k.c1.abs();
            BoundaryPoint {
                tau4,
                tau3_min: 0.0 - r,
                tau3_max: r,
            }
        })
        .collect())
}
