//! Monte Carlo experiment harness: outlier injection, per-trial curve
//! metrics, deterministic parallel aggregation and sample-size sweeps.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cornish_fisher::{cf_curve, cf_validity, sample_central_moments};
use crate::distributions::{draw_sample, DistributionSpec};
use crate::error::{Error, Result};
use crate::lmoments::{sample_lmoments, SampleSet};
use crate::npt::{
    evaluate_curve, fit_lmnpt_with, validate_grid, NptConstants, PercentileCurve, ValidityStatus,
};

/// Minimum sample size for theoretical scenarios.
pub const MIN_SCENARIO_N: usize = 5;
/// Minimum sample size for an empirical quantile curve.
pub const MIN_EMPIRICAL_N: usize = 20;
/// Odd multiplier mixing the sample size into sweep seeds.
const SWEEP_SEED_MIX: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[serde(alias = "lm")]
    Lmnpt,
    #[serde(alias = "cornish_fisher")]
    Cf,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Lmnpt, Method::Cf];

    pub fn name(self) -> &'static str {
        match self {
            Method::Lmnpt => "lmnpt",
            Method::Cf => "cf",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutlierKind {
    None,
    /// Appends 0.5 · min.
    #[serde(alias = "low")]
    LowHalfMin,
    /// Appends 1.5 · max.
    #[serde(alias = "high")]
    HighHalfMax,
}

impl OutlierKind {
    pub const ALL: [OutlierKind; 3] = [
        OutlierKind::None,
        OutlierKind::LowHalfMin,
        OutlierKind::HighHalfMax,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OutlierKind::None => "none",
            OutlierKind::LowHalfMin => "low_half_min",
            OutlierKind::HighHalfMax => "high_half_max",
        }
    }
}

impl fmt::Display for OutlierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Appends one outlier: 0.5 · min or 1.5 · max of the sample.
pub fn inject_outlier(sample: &SampleSet, kind: OutlierKind) -> Result<SampleSet> {
    match kind {
        OutlierKind::None => Ok(sample.clone()),
        OutlierKind::LowHalfMin => sample.with_appended(0.5 * sample.min()),
        OutlierKind::HighHalfMax => sample.with_appended(1.5 * sample.max()),
    }
}

/// Where a trial's sample and truth curve come from.
#[derive(Debug, Clone)]
pub enum TrialSource {
    /// Draw `n` values from the distribution; truth is its quantile function.
    Distribution(DistributionSpec),
    /// Trial i uses window i; truth is the window's empirical quantile curve.
    Empirical {
        label: String,
        windows: Arc<Vec<SampleSet>>,
    },
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub source: TrialSource,
    pub method: Method,
    pub outlier: OutlierKind,
    /// Sample size per trial (theoretical sources only).
    pub n: usize,
    pub trials: usize,
    pub grid: Vec<f64>,
    pub run_seed: u64,
    pub constants: NptConstants,
}

impl ScenarioConfig {
    pub fn theoretical(
        spec: DistributionSpec,
        method: Method,
        outlier: OutlierKind,
        n: usize,
        trials: usize,
        grid: Vec<f64>,
        run_seed: u64,
    ) -> Self {
        Self {
            source: TrialSource::Distribution(spec),
            method,
            outlier,
            n,
            trials,
            grid,
            run_seed,
            constants: NptConstants::default(),
        }
    }

    /// One trial per window.
    pub fn empirical(
        label: impl Into<String>,
        windows: Arc<Vec<SampleSet>>,
        method: Method,
        outlier: OutlierKind,
        grid: Vec<f64>,
    ) -> Self {
        let trials = windows.len();
        let n = windows.iter().map(SampleSet::len).min().unwrap_or(0);
        Self {
            source: TrialSource::Empirical {
                label: label.into(),
                windows,
            },
            method,
            outlier,
            n,
            trials,
            grid,
            run_seed: 0,
            constants: NptConstants::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        validate_grid(&self.grid)?;
        match &self.source {
            TrialSource::Distribution(_) => {
                if self.n < MIN_SCENARIO_N {
                    return Err(Error::Config(format!(
                        "sample size {} below minimum {MIN_SCENARIO_N}",
                        self.n
                    )));
                }
            }
            TrialSource::Empirical { windows, .. } => {
                if self.trials > windows.len() {
                    return Err(Error::Config(format!(
                        "{} trials requested but only {} windows",
                        self.trials,
                        windows.len()
                    )));
                }
                if let Some(w) = windows.iter().find(|w| w.len() < MIN_EMPIRICAL_N) {
                    return Err(Error::Config(format!(
                        "window of {} records below minimum {MIN_EMPIRICAL_N}",
                        w.len()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Seed for a trial: run seed XOR trial index.
    pub fn trial_seed(&self, trial_index: usize) -> u64 {
        self.run_seed ^ trial_index as u64
    }

    pub fn label(&self) -> String {
        let source = match &self.source {
            TrialSource::Distribution(spec) => spec.label(),
            TrialSource::Empirical { label, .. } => label.clone(),
        };
        format!("{source}_{}_{}", self.method, self.outlier)
    }

    pub fn echo(&self) -> ScenarioEcho {
        let (source, spec) = match &self.source {
            TrialSource::Distribution(spec) => (spec.label(), Some(*spec)),
            TrialSource::Empirical { label, .. } => (label.clone(), None),
        };
        ScenarioEcho {
            source,
            spec,
            method: self.method,
            outlier: self.outlier,
            n: self.n,
            trials: self.trials,
            grid_points: self.grid.len(),
            run_seed: self.run_seed,
        }
    }
}

/// Scenario identification carried in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioEcho {
    pub source: String,
    pub spec: Option<DistributionSpec>,
    pub method: Method,
    pub outlier: OutlierKind,
    pub n: usize,
    pub trials: usize,
    pub grid_points: usize,
    pub run_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    /// Fitted summary lies in the method's validity domain.
    pub valid: bool,
    /// Estimated curve is nondecreasing on the grid.
    pub monotone: bool,
    pub chi2: f64,
    /// Fraction, not percent.
    pub mape: f64,
    pub rmse: f64,
    pub r2: f64,
}

/// Accuracy of `est` against `truth` over the grid points:
/// χ² = Σ e²/t, MAPE = mean |e|/t, RMSE = √mean e², R² = 1 − Σe²/Σ(t − t̄)².
/// `valid` is left false; callers set it from the fitted summary.
pub fn curve_metrics(est: &PercentileCurve, truth: &PercentileCurve) -> Result<TrialMetrics> {
    if est.grid() != truth.grid() {
        return Err(Error::GridMismatch);
    }
    if let Some((index, &value)) = truth.values().iter().enumerate().find(|(_, v)| **v <= 0.0) {
        return Err(Error::NonPositiveTruth { index, value });
    }
    let m = truth.len() as f64;
    let t_mean = truth.values().iter().sum::<f64>() / m;
    let (mut chi2, mut abs_rel, mut sse, mut sst) = (0.0, 0.0, 0.0, 0.0);
    for (&e, &t) in est.values().iter().zip(truth.values()) {
        let err = e - t;
        chi2 += err * err / t;
        abs_rel += err.abs() / t;
        sse += err * err;
        sst += (t - t_mean) * (t - t_mean);
    }
    // A flat truth curve has no variance to explain.
    let r2 = if sst > 0.0 {
        1.0 - sse / sst
    } else if sse == 0.0 {
        1.0
    } else {
        f64::NEG_INFINITY
    };
    Ok(TrialMetrics {
        valid: false,
        monotone: est.is_monotone(),
        chi2,
        mape: abs_rel / m,
        rmse: (sse / m).sqrt(),
        r2,
    })
}

/// Empirical quantiles by linear interpolation between order statistics at
/// plotting positions i/(n+1); grid points outside [1/(n+1), n/(n+1)] take
/// the extreme order statistics.
pub fn empirical_quantile_curve(sample: &SampleSet, grid: &[f64]) -> Result<PercentileCurve> {
    let n = sample.len();
    if n < MIN_EMPIRICAL_N {
        return Err(Error::InsufficientSample {
            required: MIN_EMPIRICAL_N,
            actual: n,
        });
    }
    validate_grid(grid)?;
    let x = sample.sorted();
    let values = grid
        .iter()
        .map(|&p| {
            let h = p * (n as f64 + 1.0);
            if h <= 1.0 {
                x[0]
            } else if h >= n as f64 {
                x[n - 1]
            } else {
                let j = h.floor();
                let i = j as usize;
                x[i - 1] + (h - j) * (x[i] - x[i - 1])
            }
        })
        .collect();
    PercentileCurve::new(grid.to_vec(), values)
}

/// Fitted estimate on the grid with its validity verdict.
#[derive(Debug, Clone)]
pub struct MethodFit {
    pub curve: PercentileCurve,
    pub validity: ValidityStatus,
}

/// Fits `method` to `sample` and evaluates it on `grid`.
pub fn fit_method(
    method: Method,
    sample: &SampleSet,
    grid: &[f64],
    constants: &NptConstants,
) -> Result<MethodFit> {
    match method {
        Method::Lmnpt => {
            let lm = sample_lmoments(sample)?;
            let coeffs = fit_lmnpt_with(&lm, constants)?;
            Ok(MethodFit {
                curve: evaluate_curve(&coeffs, grid)?,
                validity: coeffs.validity,
            })
        }
        Method::Cf => {
            let cm = sample_central_moments(sample)?;
            Ok(MethodFit {
                curve: cf_curve(&cm, grid)?,
                validity: cf_validity(cm.skewness, cm.excess_kurtosis),
            })
        }
    }
}

/// Everything one trial produced, for curve export.
#[derive(Debug, Clone)]
pub struct TrialDetail {
    pub metrics: TrialMetrics,
    pub truth: PercentileCurve,
    pub estimate: PercentileCurve,
    pub validity: ValidityStatus,
}

pub fn run_trial_detailed(cfg: &ScenarioConfig, trial_index: usize) -> Result<TrialDetail> {
    let (sample, truth) = match &cfg.source {
        TrialSource::Distribution(spec) => (
            draw_sample(spec, cfg.n, cfg.trial_seed(trial_index))?,
            spec.truth_curve(&cfg.grid)?,
        ),
        TrialSource::Empirical { windows, .. } => {
            let window = windows.get(trial_index).ok_or_else(|| {
                Error::Config(format!("trial {trial_index} has no matching window"))
            })?;
            (window.clone(), empirical_quantile_curve(window, &cfg.grid)?)
        }
    };
    let contaminated = inject_outlier(&sample, cfg.outlier)?;
    let fit = fit_method(cfg.method, &contaminated, &cfg.grid, &cfg.constants)?;
    let mut metrics = curve_metrics(&fit.curve, &truth)?;
    metrics.valid = fit.validity.is_valid();
    Ok(TrialDetail {
        metrics,
        truth,
        estimate: fit.curve,
        validity: fit.validity,
    })
}

pub fn run_trial(cfg: &ScenarioConfig, trial_index: usize) -> Result<TrialMetrics> {
    run_trial_detailed(cfg, trial_index).map(|d| d.metrics)
}

/// Mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
}

impl MeanSd {
    /// Sample sd with n − 1 in the denominator; a single value has sd 0.
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                sd: f64::NAN,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = if n < 2 {
            0.0
        } else {
            let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
            (ss / (n - 1) as f64).sqrt()
        };
        Self { mean, sd }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub scenario: ScenarioEcho,
    pub label: String,
    pub trials: usize,
    pub valid_trials: usize,
    /// Trials that raised an estimator error; they count as invalid and are
    /// excluded from the accuracy metrics.
    pub failed_trials: usize,
    pub first_failure: Option<String>,
    /// valid_trials / trials.
    pub vr: f64,
    /// Sample sd of the 0/1 validity indicators over all trials.
    pub vr_sd: f64,
    /// Fraction of completed trials whose curve is nondecreasing on the grid.
    pub monotone_rate: f64,
    pub chi2: MeanSd,
    pub mape: MeanSd,
    pub rmse: MeanSd,
    pub r2: MeanSd,
}

/// Runs all trials (in parallel) and folds them in trial-index order.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<AggregateReport> {
    cfg.validate()?;
    let outcomes: Vec<Result<TrialMetrics>> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| run_trial(cfg, i))
        .collect();
    aggregate(cfg, &outcomes)
}

fn aggregate(cfg: &ScenarioConfig, outcomes: &[Result<TrialMetrics>]) -> Result<AggregateReport> {
    let mut ok = Vec::with_capacity(outcomes.len());
    let mut first_failure = None;
    for outcome in outcomes {
        match outcome {
            Ok(m) => ok.push(*m),
            Err(e) => {
                first_failure.get_or_insert_with(|| e.to_string());
            }
        }
    }
    if ok.is_empty() {
        return Err(Error::AllTrialsFailed {
            trials: outcomes.len(),
            first: first_failure.unwrap_or_default(),
        });
    }
    let trials = outcomes.len();
    let indicators: Vec<f64> = outcomes
        .iter()
        .map(|o| matches!(o, Ok(m) if m.valid) as u8 as f64)
        .collect();
    let valid_trials = indicators.iter().filter(|&&v| v == 1.0).count();
    let column = |f: fn(&TrialMetrics) -> f64| MeanSd::of(&ok.iter().map(f).collect::<Vec<_>>());
    Ok(AggregateReport {
        scenario: cfg.echo(),
        label: cfg.label(),
        trials,
        valid_trials,
        failed_trials: trials - ok.len(),
        first_failure,
        vr: valid_trials as f64 / trials as f64,
        vr_sd: MeanSd::of(&indicators).sd,
        monotone_rate: ok.iter().filter(|m| m.monotone).count() as f64 / ok.len() as f64,
        chi2: column(|m| m.chi2),
        mape: column(|m| m.mape),
        rmse: column(|m| m.rmse),
        r2: column(|m| m.r2),
    })
}

/// Seed for one size of a sweep.
pub fn sweep_seed(run_seed: u64, n: usize) -> u64 {
    run_seed ^ (n as u64).wrapping_mul(SWEEP_SEED_MIX)
}

/// One report per size, in input order. Errors are carried per entry.
pub fn sample_size_sweep(
    cfg: &ScenarioConfig,
    sizes: &[usize],
) -> Result<Vec<(usize, Result<AggregateReport>)>> {
    if sizes.is_empty() {
        return Err(Error::Config("sweep needs at least one sample size".into()));
    }
    if let Some(n) = sizes.iter().find(|&&n| n < MIN_SCENARIO_N) {
        return Err(Error::Config(format!(
            "sweep size {n} below minimum {MIN_SCENARIO_N}"
        )));
    }
    Ok(sizes
        .iter()
        .map(|&n| {
            let sized = ScenarioConfig {
                n,
                run_seed: sweep_seed(cfg.run_seed, n),
                ..cfg.clone()
            };
            (n, run_scenario(&sized))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{solve_params, Family};
    use crate::npt::default_grid;

    fn set(v: &[f64]) -> SampleSet {
        SampleSet::new(v.to_vec()).unwrap()
    }

    fn curve(values: Vec<f64>) -> PercentileCurve {
        let grid = (1..=values.len())
            .map(|i| i as f64 / (values.len() + 1) as f64)
            .collect();
        PercentileCurve::new(grid, values).unwrap()
    }

    fn normal_cfg(method: Method, outlier: OutlierKind, trials: usize) -> ScenarioConfig {
        let spec = solve_params(Family::Normal, 167.0, 0.07).unwrap();
        ScenarioConfig::theoretical(spec, method, outlier, 100, trials, default_grid(), 42)
    }

    #[test]
    fn outlier_examples() {
        let s = set(&[100.0, 150.0, 200.0]);
        let hi = inject_outlier(&s, OutlierKind::HighHalfMax).unwrap();
        assert_eq!(hi.values(), &[100.0, 150.0, 200.0, 300.0]);
        let lo = inject_outlier(&s, OutlierKind::LowHalfMin).unwrap();
        assert_eq!(lo.values(), &[100.0, 150.0, 200.0, 50.0]);
        let twice = inject_outlier(&lo, OutlierKind::LowHalfMin).unwrap();
        assert_eq!(twice.values(), &[100.0, 150.0, 200.0, 50.0, 25.0]);
        assert_eq!(inject_outlier(&s, OutlierKind::None).unwrap(), s);
    }

    #[test]
    fn metrics_of_perfect_fit() {
        let t = curve(vec![10.0, 20.0, 30.0]);
        let m = curve_metrics(&t, &t).unwrap();
        assert_eq!((m.chi2, m.mape, m.rmse, m.r2), (0.0, 0.0, 0.0, 1.0));
    }

    #[test]
    fn metrics_of_uniform_relative_error() {
        let t = curve(vec![10.0, 20.0, 30.0]);
        let e = curve(t.values().iter().map(|v| v * 1.01).collect());
        let m = curve_metrics(&e, &t).unwrap();
        assert!((m.mape - 0.01).abs() < 1e-12);
        // χ² = Σ (0.01 t)²/t = 1e-4 Σ t
        assert!((m.chi2 - 1e-4 * 60.0).abs() < 1e-12);
        assert!((m.rmse - (1e-4 * (100.0 + 400.0 + 900.0) / 3.0f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn metrics_of_constant_mean_estimate() {
        let t = curve(vec![10.0, 20.0, 30.0]);
        let e = curve(vec![20.0; 3]);
        assert_eq!(curve_metrics(&e, &t).unwrap().r2, 0.0);
    }

    #[test]
    fn metrics_errors() {
        let t = curve(vec![10.0, 20.0, 30.0]);
        let other = PercentileCurve::new(vec![0.1, 0.5, 0.9], vec![1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(
            curve_metrics(&other, &t),
            Err(Error::GridMismatch)
        ));
        let bad = curve(vec![-1.0, 20.0, 30.0]);
        assert!(matches!(
            curve_metrics(&t, &bad),
            Err(Error::NonPositiveTruth { index: 0, .. })
        ));
    }

    #[test]
    fn empirical_curve_examples() {
        let s = SampleSet::new((1..=99).map(f64::from).collect()).unwrap();
        let c = empirical_quantile_curve(&s, &[0.005, 0.5, 0.555, 0.999]).unwrap();
        for (got, want) in c.values().iter().zip([1.0, 50.0, 55.5, 99.0]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        let flat = empirical_quantile_curve(&set(&[4.0; 25]), &default_grid()).unwrap();
        assert!(flat.values().iter().all(|&v| v == 4.0));
        assert!(matches!(
            empirical_quantile_curve(&set(&[1.0; 19]), &default_grid()),
            Err(Error::InsufficientSample { required: 20, .. })
        ));
    }

    #[test]
    fn trials_are_deterministic() {
        let cfg = normal_cfg(Method::Lmnpt, OutlierKind::LowHalfMin, 3);
        assert_eq!(run_trial(&cfg, 2).unwrap(), run_trial(&cfg, 2).unwrap());
        assert_ne!(run_trial(&cfg, 1).unwrap(), run_trial(&cfg, 2).unwrap());
    }

    #[test]
    fn single_trial_has_zero_sd() {
        let r = run_scenario(&normal_cfg(Method::Cf, OutlierKind::None, 1)).unwrap();
        assert_eq!(r.trials, 1);
        for s in [r.chi2, r.mape, r.rmse, r.r2] {
            assert_eq!(s.sd, 0.0);
        }
        assert_eq!(r.vr_sd, 0.0);
    }

    #[test]
    fn scenario_matches_sequential_fold() {
        let cfg = normal_cfg(Method::Lmnpt, OutlierKind::HighHalfMax, 24);
        let parallel = run_scenario(&cfg).unwrap();
        let seq: Vec<_> = (0..cfg.trials).map(|i| run_trial(&cfg, i)).collect();
        assert_eq!(parallel, aggregate(&cfg, &seq).unwrap());
        assert_eq!(
            parallel.valid_trials,
            seq.iter().filter(|m| m.as_ref().unwrap().valid).count()
        );
    }

    #[test]
    fn failed_trials_are_counted_not_averaged() {
        let cfg = normal_cfg(Method::Cf, OutlierKind::None, 3);
        let good = run_trial(&cfg, 0).unwrap();
        let outcomes = vec![Ok(good), Err(Error::Degenerate("x".into())), Ok(good)];
        let r = aggregate(&cfg, &outcomes).unwrap();
        assert_eq!(r.failed_trials, 1);
        assert_eq!(r.mape.mean, good.mape);
        assert_eq!(r.first_failure.as_deref(), Some("degenerate summary: x"));
        let all_bad = vec![Err(Error::Degenerate("x".into()))];
        assert!(matches!(
            aggregate(&cfg, &all_bad),
            Err(Error::AllTrialsFailed { trials: 1, .. })
        ));
    }

    #[test]
    fn config_validation() {
        let mut cfg = normal_cfg(Method::Cf, OutlierKind::None, 0);
        assert!(matches!(run_scenario(&cfg), Err(Error::Config(_))));
        cfg.trials = 1;
        cfg.n = 4;
        assert!(matches!(run_scenario(&cfg), Err(Error::Config(_))));
        cfg.n = 10;
        cfg.grid = vec![0.5, 0.2];
        assert!(matches!(run_scenario(&cfg), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn sweep_preserves_order() {
        let cfg = normal_cfg(Method::Lmnpt, OutlierKind::None, 4);
        let out = sample_size_sweep(&cfg, &[200, 100]).unwrap();
        assert_eq!(
            out.iter().map(|(n, _)| *n).collect::<Vec<_>>(),
            vec![200, 100]
        );
        assert_eq!(out[1].1.as_ref().unwrap().scenario.n, 100);
        assert!(sample_size_sweep(&cfg, &[]).is_err());
        assert!(sample_size_sweep(&cfg, &[100, 3]).is_err());
    }

    #[test]
    fn empirical_source_uses_one_window_per_trial() {
        let spec = solve_params(Family::Lognormal, 120.0, 0.2).unwrap();
        let windows: Vec<_> = (0..3).map(|s| draw_sample(&spec, 40, s).unwrap()).collect();
        let cfg = ScenarioConfig::empirical(
            "link",
            Arc::new(windows),
            Method::Lmnpt,
            OutlierKind::None,
            default_grid(),
        );
        let r = run_scenario(&cfg).unwrap();
        assert_eq!(r.trials, 3);
        assert_eq!(r.scenario.n, 40);
    }
}
