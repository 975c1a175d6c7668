//! Ground-truth travel-time distributions parameterized by mean and
//! coefficient of variation, with exact quantile functions and seeded
//! inverse-transform sampling.

use std::f64::consts::PI;
use std::fmt;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::beta::ln_beta;
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::error::{Error, Result};
use crate::lmoments::{population_lmoments, LMomentSummary, SampleSet};
use crate::normal::{inverse_normal_cdf_unchecked, normal_cdf};
use crate::npt::{validate_grid, PercentileCurve};
use crate::quadrature::QuadratureConfig;

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
/// Second Burr XII shape held fixed while solving for (mean, CoV).
pub const BURR_K: f64 = 10.0;
/// Required accuracy of the CoV residual in the shape solvers.
pub const SOLVER_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Normal,
    #[serde(alias = "burr", alias = "burr12")]
    BurrXii,
    /// Largest extreme value (type I) distribution.
    #[serde(alias = "extreme_value")]
    Gumbel,
    Gamma,
    Lognormal,
    Weibull,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Normal,
        Family::BurrXii,
        Family::Gumbel,
        Family::Gamma,
        Family::Lognormal,
        Family::Weibull,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Normal => "normal",
            Family::BurrXii => "burr_xii",
            Family::Gumbel => "gumbel",
            Family::Gamma => "gamma",
            Family::Lognormal => "lognormal",
            Family::Weibull => "weibull",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Family-specific parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Params {
    Normal {
        mu: f64,
        sigma: f64,
    },
    /// F(x) = 1 − (1 + (x/scale)^c)^(−k).
    BurrXii {
        c: f64,
        k: f64,
        scale: f64,
    },
    /// F(x) = exp(−exp(−(x − location)/scale)).
    Gumbel {
        location: f64,
        scale: f64,
    },
    Gamma {
        shape: f64,
        scale: f64,
    },
    /// Parameters of the underlying normal on the log scale.
    Lognormal {
        log_mean: f64,
        log_sd: f64,
    },
    Weibull {
        shape: f64,
        scale: f64,
    },
}

impl Params {
    pub fn family(&self) -> Family {
        match self {
            Params::Normal { .. } => Family::Normal,
            Params::BurrXii { .. } => Family::BurrXii,
            Params::Gumbel { .. } => Family::Gumbel,
            Params::Gamma { .. } => Family::Gamma,
            Params::Lognormal { .. } => Family::Lognormal,
            Params::Weibull { .. } => Family::Weibull,
        }
    }

    fn check(&self) -> Result<()> {
        let positive: &[(&'static str, f64)] = match *self {
            Params::Normal { mu, sigma } => {
                if !mu.is_finite() {
                    return Err(domain("mu", mu, "finite"));
                }
                &[("sigma", sigma)]
            }
            Params::BurrXii { c, k, scale } => {
                if c * k <= 2.0 {
                    return Err(domain("c·k", c * k, "(2, ∞)"));
                }
                &[("c", c), ("k", k), ("scale", scale)]
            }
            Params::Gumbel { location, scale } => {
                if !location.is_finite() {
                    return Err(domain("location", location, "finite"));
                }
                &[("scale", scale)]
            }
            Params::Gamma { shape, scale } | Params::Weibull { shape, scale } => {
                &[("shape", shape), ("scale", scale)]
            }
            Params::Lognormal { log_mean, log_sd } => {
                if !log_mean.is_finite() {
                    return Err(domain("log_mean", log_mean, "finite"));
                }
                &[("log_sd", log_sd)]
            }
        };
        for &(what, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(domain(what, v, "(0, ∞)"));
            }
        }
        Ok(())
    }

    /// Exact inverse CDF. Callers guarantee 0 < p < 1.
    fn quantile_unchecked(&self, p: f64) -> f64 {
        match *self {
            Params::Normal { mu, sigma } => mu + sigma * inverse_normal_cdf_unchecked(p),
            Params::BurrXii { c, k, scale } => {
                // (1 − p)^(−1/k) − 1 without cancellation.
                scale * (-(-p).ln_1p() / k).exp_m1().powf(1.0 / c)
            }
            Params::Gumbel { location, scale } => location - scale * (-p.ln()).ln(),
            Params::Gamma { shape, scale } => scale * standard_gamma_quantile(shape, p),
            Params::Lognormal { log_mean, log_sd } => {
                (log_mean + log_sd * inverse_normal_cdf_unchecked(p)).exp()
            }
            Params::Weibull { shape, scale } => scale * (-(-p).ln_1p()).powf(1.0 / shape),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Params::Normal { mu, sigma } => normal_cdf((x - mu) / sigma),
            Params::BurrXii { c, k, scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-k * (x / scale).powf(c).ln_1p()).exp_m1()
                }
            }
            Params::Gumbel { location, scale } => (-(-(x - location) / scale).exp()).exp(),
            Params::Gamma { shape, scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    gamma_lr(shape, x / scale)
                }
            }
            Params::Lognormal { log_mean, log_sd } => {
                if x <= 0.0 {
                    0.0
                } else {
                    normal_cdf((x.ln() - log_mean) / log_sd)
                }
            }
            Params::Weibull { shape, scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-(x / scale).powf(shape)).exp_m1()
                }
            }
        }
    }

    /// Analytic mean.
    pub fn mean(&self) -> f64 {
        match *self {
            Params::Normal { mu, .. } => mu,
            Params::BurrXii { c, k, scale } => scale * burr_raw_moment(c, k, 1.0),
            Params::Gumbel { location, scale } => location + EULER_GAMMA * scale,
            Params::Gamma { shape, scale } => shape * scale,
            Params::Lognormal { log_mean, log_sd } => (log_mean + 0.5 * log_sd * log_sd).exp(),
            Params::Weibull { shape, scale } => scale * ln_gamma(1.0 + 1.0 / shape).exp(),
        }
    }

    /// Analytic standard deviation.
    pub fn sd(&self) -> f64 {
        match *self {
            Params::Normal { sigma, .. } => sigma,
            Params::Gumbel { scale, .. } => scale * PI / 6f64.sqrt(),
            Params::Gamma { shape, scale } => shape.sqrt() * scale,
            Params::Lognormal { log_sd, .. } => self.mean() * (log_sd * log_sd).exp_m1().sqrt(),
            Params::BurrXii { c, k, .. } => self.mean() * burr_cov(c, k),
            Params::Weibull { shape, .. } => self.mean() * weibull_cov(shape),
        }
    }
}

fn domain(what: &'static str, value: f64, domain: &'static str) -> Error {
    Error::Domain {
        what,
        value,
        domain,
    }
}

/// E[X^r] / scale^r = k·B(k − r/c, 1 + r/c).
fn burr_raw_moment(c: f64, k: f64, r: f64) -> f64 {
    (k.ln() + ln_beta(k - r / c, 1.0 + r / c)).exp()
}

fn burr_cov(c: f64, k: f64) -> f64 {
    let ln_m1 = k.ln() + ln_beta(k - 1.0 / c, 1.0 + 1.0 / c);
    let ln_m2 = k.ln() + ln_beta(k - 2.0 / c, 1.0 + 2.0 / c);
    (ln_m2 - 2.0 * ln_m1).exp_m1().sqrt()
}

fn weibull_cov(shape: f64) -> f64 {
    (ln_gamma(1.0 + 2.0 / shape) - 2.0 * ln_gamma(1.0 + 1.0 / shape))
        .exp_m1()
        .sqrt()
}

/// Solves cov_of(shape) = target for a shape in [lo, hi], where cov_of is
/// strictly decreasing. Bisection on log(shape).
fn solve_decreasing_cov<F: Fn(f64) -> f64>(
    family: Family,
    target: f64,
    lo: f64,
    hi: f64,
    cov_of: F,
) -> Result<f64> {
    if !(cov_of(lo) >= target && cov_of(hi) <= target) {
        return Err(Error::Infeasible {
            family: family.to_string(),
            cov: target,
        });
    }
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let mut mid = 0.5 * (a + b);
    for _ in 0..200 {
        mid = 0.5 * (a + b);
        let r = cov_of(mid.exp()) - target;
        if r == 0.0 {
            break;
        }
        if r > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
        if b - a <= 1e-15 * mid.abs().max(1.0) {
            break;
        }
    }
    let shape = mid.exp();
    let residual = cov_of(shape) - target;
    if residual.is_nan() || residual.abs() > SOLVER_TOLERANCE {
        return Err(Error::Solver {
            what: format!("{family} shape for cov {target}"),
            residual,
        });
    }
    Ok(shape)
}

/// Inverse of the regularized lower incomplete gamma P(a, x) in x.
///
/// Newton steps safeguarded by a shrinking bracket. The upper half uses
/// the complementary function so residuals keep relative precision.
fn standard_gamma_quantile(a: f64, p: f64) -> f64 {
    let upper = p > 0.5;
    let q = 1.0 - p;
    let residual = |x: f64| {
        if upper {
            q - gamma_ur(a, x)
        } else {
            gamma_lr(a, x) - p
        }
    };
    let ln_gamma_a = ln_gamma(a);
    let density = |x: f64| ((a - 1.0) * x.ln() - x - ln_gamma_a).exp();

    // Wilson-Hilferty start, falling back to the small-x series.
    let z = inverse_normal_cdf_unchecked(p);
    let t = 1.0 - 1.0 / (9.0 * a) + z / (3.0 * a.sqrt());
    let mut x = if t > 0.0 {
        a * t * t * t
    } else {
        ((p.ln() + ln_gamma(a + 1.0)) / a).exp()
    };
    if !(x > 0.0 && x.is_finite()) {
        x = a;
    }

    let (mut lo, mut hi) = (0.0_f64, f64::INFINITY);
    for _ in 0..300 {
        let r = residual(x);
        if r == 0.0 {
            return x;
        }
        if r < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let f = density(x);
        let mut next = x - r / f;
        if !(next > lo && next < hi && next.is_finite()) {
            next = if hi.is_finite() {
                0.5 * (lo + hi)
            } else {
                2.0 * x
            };
        }
        if (next - x).abs() <= 1e-15 * x {
            return next;
        }
        x = next;
    }
    x
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    #[serde(flatten)]
    pub params: Params,
    pub mean: f64,
    pub cov: f64,
}

impl DistributionSpec {
    /// Builds a spec from explicit parameters; mean and CoV are derived.
    pub fn from_params(params: Params) -> Result<Self> {
        params.check()?;
        let mean = params.mean();
        Ok(Self {
            params,
            mean,
            cov: params.sd() / mean,
        })
    }

    pub fn family(&self) -> Family {
        self.params.family()
    }

    /// Human-readable label, e.g. `gamma_cov0.15`.
    /// `<family>_cov<cov>` with the CoV rounded to four decimals.
    pub fn label(&self) -> String {
        format!("{}_cov{}", self.family(), (self.cov * 1e4).round() / 1e4)
    }

    pub fn true_quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(domain("probability", p, "(0, 1)"));
        }
        Ok(self.params.quantile_unchecked(p))
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.params.cdf(x)
    }

    pub fn truth_curve(&self, grid: &[f64]) -> Result<PercentileCurve> {
        validate_grid(grid)?;
        let values = grid
            .iter()
            .map(|&p| self.params.quantile_unchecked(p))
            .collect();
        PercentileCurve::new(grid.to_vec(), values)
    }

    pub fn population_lmoments(&self, quadrature: QuadratureConfig) -> Result<LMomentSummary> {
        population_lmoments(|p| self.params.quantile_unchecked(p), quadrature)
    }
}

/// Solves the family parameters that give the requested mean and CoV.
pub fn solve_params(family: Family, mean: f64, cov: f64) -> Result<DistributionSpec> {
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(domain("mean", mean, "(0, ∞)"));
    }
    if !(cov > 0.0 && cov < 1.0) {
        return Err(domain("cov", cov, "(0, 1)"));
    }
    let sd = mean * cov;
    let params = match family {
        Family::Normal => Params::Normal {
            mu: mean,
            sigma: sd,
        },
        Family::Gamma => Params::Gamma {
            shape: 1.0 / (cov * cov),
            scale: mean * cov * cov,
        },
        Family::Lognormal => {
            let var = (cov * cov).ln_1p();
            Params::Lognormal {
                log_mean: mean.ln() - 0.5 * var,
                log_sd: var.sqrt(),
            }
        }
        Family::Gumbel => {
            let scale = sd * 6f64.sqrt() / PI;
            Params::Gumbel {
                location: mean - EULER_GAMMA * scale,
                scale,
            }
        }
        Family::Weibull => {
            let shape = solve_decreasing_cov(family, cov, 0.5, 1e4, weibull_cov)?;
            Params::Weibull {
                shape,
                scale: mean / ln_gamma(1.0 + 1.0 / shape).exp(),
            }
        }
        Family::BurrXii => {
            // c·k > 4 keeps the fourth moment finite.
            let c_min = 4.0 / BURR_K * (1.0 + 1e-9);
            let c = solve_decreasing_cov(family, cov, c_min, 1e4, |c| burr_cov(c, BURR_K))?;
            Params::BurrXii {
                c,
                k: BURR_K,
                scale: mean / burr_raw_moment(c, BURR_K, 1.0),
            }
        }
    };
    params.check()?;
    Ok(DistributionSpec { params, mean, cov })
}

/// Draws `n` values by inverse-transform sampling from a ChaCha stream
/// seeded with `seed`. A non-positive draw (possible only in the Normal
/// tail) is replaced by the next variate of the same stream.
pub fn draw_sample(spec: &DistributionSpec, n: usize, seed: u64) -> Result<SampleSet> {
    if n == 0 {
        return Err(Error::InsufficientSample {
            required: 1,
            actual: 0,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..n)
        .map(|_| loop {
            let u: f64 = rng.sample(Open01);
            let x = spec.params.quantile_unchecked(u);
            if x > 0.0 && x.is_finite() {
                break x;
            }
        })
        .collect();
    SampleSet::new(values)
}
