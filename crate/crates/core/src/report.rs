//! Experiment orchestration for the CLI: builds scenarios from a run
//! configuration, runs them and renders CSV and JSON outputs.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;

use crate::config::{EmpiricalConfig, RunConfig};
use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::harness::{
    run_scenario, run_trial_detailed, sample_size_sweep, AggregateReport, Method, OutlierKind,
    ScenarioConfig,
};
use crate::io::{
    csv_bytes, ingest_csv, window_group, write_atomic, write_synthetic_lpr_csv, Reject,
};
use crate::lmoments::SampleSet;
use crate::npt::{validity_boundary, BoundaryPoint, NptConstants};

/// One row of `report.csv`.
#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub label: String,
    pub source: String,
    pub method: String,
    pub outlier: String,
    pub n: usize,
    pub trials: usize,
    pub valid_trials: usize,
    pub failed_trials: usize,
    pub vr: f64,
    pub vr_sd: f64,
    pub monotone_rate: f64,
    pub chi2_mean: f64,
    pub chi2_sd: f64,
    pub mape_mean: f64,
    pub mape_sd: f64,
    pub rmse_mean: f64,
    pub rmse_sd: f64,
    pub r2_mean: f64,
    pub r2_sd: f64,
    pub vr_cell: String,
    pub chi2_cell: String,
    pub mape_cell: String,
    pub rmse_cell: String,
    pub r2_cell: String,
}

impl From<&AggregateReport> for ReportRow {
    fn from(r: &AggregateReport) -> Self {
        Self {
            label: r.label.clone(),
            source: r.scenario.source.clone(),
            method: r.scenario.method.to_string(),
            outlier: r.scenario.outlier.to_string(),
            n: r.scenario.n,
            trials: r.trials,
            valid_trials: r.valid_trials,
            failed_trials: r.failed_trials,
            vr: r.vr,
            vr_sd: r.vr_sd,
            monotone_rate: r.monotone_rate,
            chi2_mean: r.chi2.mean,
            chi2_sd: r.chi2.sd,
            mape_mean: r.mape.mean,
            mape_sd: r.mape.sd,
            rmse_mean: r.rmse.mean,
            rmse_sd: r.rmse.sd,
            r2_mean: r.r2.mean,
            r2_sd: r.r2.sd,
            vr_cell: format!("{:.2}% ({:.2}%)", 100.0 * r.vr, 100.0 * r.vr_sd),
            chi2_cell: format!("{:.3} ({:.3})", r.chi2.mean, r.chi2.sd),
            mape_cell: format!("{:.2}% ({:.2}%)", 100.0 * r.mape.mean, 100.0 * r.mape.sd),
            rmse_cell: format!("{:.2} ({:.2})", r.rmse.mean, r.rmse.sd),
            r2_cell: format!("{:.3} ({:.3})", r.r2.mean, r.r2.sd),
        }
    }
}

/// One row of `sweep.csv`.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub source: String,
    pub method: String,
    pub outlier: String,
    pub n: usize,
    pub vr: Option<f64>,
    pub vr_sd: Option<f64>,
    pub monotone_rate: Option<f64>,
    pub failed_trials: Option<usize>,
    pub chi2_mean: Option<f64>,
    pub chi2_sd: Option<f64>,
    pub mape_mean: Option<f64>,
    pub mape_sd: Option<f64>,
    pub rmse_mean: Option<f64>,
    pub rmse_sd: Option<f64>,
    pub r2_mean: Option<f64>,
    pub r2_sd: Option<f64>,
    pub error: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepEntry {
    pub n: usize,
    pub report: Option<AggregateReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IngestSummary {
    pub csv: PathBuf,
    pub rows: usize,
    pub records: usize,
    pub rejected_rows: usize,
    pub windows: usize,
    pub windowed_records: usize,
    pub dropped_windows: usize,
    pub dropped_records: usize,
    pub window_minutes: u32,
    pub min_samples: usize,
}

/// Machine-readable summary written as JSON.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub constants: NptConstants,
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ingest: Option<IngestSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub reports: Vec<AggregateReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sweeps: Vec<SweepEntry>,
}

impl RunSummary {
    fn new(command: &'static str, cfg: &RunConfig) -> Self {
        Self {
            tool: "lmnpt",
            version: env!("CARGO_PKG_VERSION"),
            command,
            constants: cfg.constants.constants(),
            config: cfg.clone(),
            ingest: None,
            reports: Vec::new(),
            sweeps: Vec::new(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Files written by a command, for the caller's log.
#[derive(Debug, Clone, Default)]
pub struct Written(pub Vec<PathBuf>);

impl Written {
    fn put(&mut self, path: PathBuf, bytes: &[u8]) -> Result<()> {
        write_atomic(&path, bytes)?;
        self.0.push(path);
        Ok(())
    }

    fn put_csv<S: Serialize>(&mut self, path: PathBuf, rows: &[S]) -> Result<()> {
        let bytes = csv_bytes(rows, &path)?;
        self.put(path, &bytes)
    }
}

fn theoretical(
    cfg: &RunConfig,
    spec: DistributionSpec,
) -> impl Fn(Method, OutlierKind) -> ScenarioConfig + '_ {
    move |method, outlier| ScenarioConfig {
        constants: cfg.constants.constants(),
        ..ScenarioConfig::theoretical(
            spec,
            method,
            outlier,
            cfg.n,
            cfg.trials,
            cfg.grid(),
            cfg.seed,
        )
    }
}

/// Runs every spec × outlier × method scenario in the configuration.
pub fn validate_reports(cfg: &RunConfig) -> Result<Vec<AggregateReport>> {
    let mut reports = Vec::new();
    for spec in cfg.specs()? {
        let make = theoretical(cfg, spec);
        for &outlier in &cfg.outliers {
            for &method in &cfg.methods {
                reports.push(run_scenario(&make(method, outlier))?);
            }
        }
    }
    Ok(reports)
}

/// Builds `p, truth, <method>...` rows for one outlier kind.
fn curve_rows(scenarios: &[ScenarioConfig], trial: usize) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut header = vec!["p".to_string(), "truth".to_string()];
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for sc in scenarios {
        let detail = run_trial_detailed(sc, trial)?;
        if columns.is_empty() {
            columns.push(detail.truth.grid().to_vec());
            columns.push(detail.truth.values().to_vec());
        }
        header.push(sc.method.to_string());
        columns.push(detail.estimate.values().to_vec());
    }
    let rows = (0..columns.first().map_or(0, Vec::len))
        .map(|i| columns.iter().map(|c| c[i]).collect())
        .collect();
    Ok((header, rows))
}

fn write_curves(
    out: &mut Written,
    dir: &Path,
    name: &str,
    scenarios: &[ScenarioConfig],
    trial: usize,
) -> Result<()> {
    let (header, rows) = curve_rows(scenarios, trial)?;
    let path = dir.join(format!("curves_{name}.csv"));
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Csv {
        path: path.clone(),
        source: e,
    };
    wtr.write_record(&header).map_err(csv_err)?;
    for row in rows {
        wtr.write_record(row.iter().map(|v| v.to_string()))
            .map_err(csv_err)?;
    }
    let bytes = wtr
        .into_inner()
        .map_err(|e| Error::Config(format!("csv buffer: {e}")))?;
    out.put(path, &bytes)
}

/// `validate`: report.csv, report.json and one curves file per
/// distribution × outlier kind.
pub fn run_validate(cfg: &RunConfig) -> Result<(RunSummary, Written)> {
    let dir = &cfg.output_dir;
    let mut out = Written::default();
    let mut summary = RunSummary::new("validate", cfg);
    summary.reports = validate_reports(cfg)?;
    for spec in cfg.specs()? {
        let make = theoretical(cfg, spec);
        for &outlier in &cfg.outliers {
            let scenarios: Vec<_> = cfg.methods.iter().map(|&m| make(m, outlier)).collect();
            let name = format!("{}_{}", spec.label(), outlier);
            write_curves(&mut out, dir, &name, &scenarios, cfg.curve_trial)?;
        }
    }
    let rows: Vec<ReportRow> = summary.reports.iter().map(ReportRow::from).collect();
    out.put_csv(dir.join("report.csv"), &rows)?;
    out.put(dir.join("report.json"), summary.to_json()?.as_bytes())?;
    Ok((summary, out))
}

/// `sweep`: sweep.csv and sweep.json over `cfg.sweep_sizes`.
pub fn run_sweep(cfg: &RunConfig) -> Result<(RunSummary, Written)> {
    let dir = &cfg.output_dir;
    let mut out = Written::default();
    let mut summary = RunSummary::new("sweep", cfg);
    let mut rows = Vec::new();
    for spec in cfg.specs()? {
        let make = theoretical(cfg, spec);
        for &outlier in &cfg.outliers {
            for &method in &cfg.methods {
                for (n, result) in sample_size_sweep(&make(method, outlier), &cfg.sweep_sizes)? {
                    let r = result.as_ref().ok();
                    rows.push(SweepRow {
                        source: spec.label(),
                        method: method.to_string(),
                        outlier: outlier.to_string(),
                        n,
                        vr: r.map(|r| r.vr),
                        vr_sd: r.map(|r| r.vr_sd),
                        monotone_rate: r.map(|r| r.monotone_rate),
                        failed_trials: r.map(|r| r.failed_trials),
                        chi2_mean: r.map(|r| r.chi2.mean),
                        chi2_sd: r.map(|r| r.chi2.sd),
                        mape_mean: r.map(|r| r.mape.mean),
                        mape_sd: r.map(|r| r.mape.sd),
                        rmse_mean: r.map(|r| r.rmse.mean),
                        rmse_sd: r.map(|r| r.rmse.sd),
                        r2_mean: r.map(|r| r.r2.mean),
                        r2_sd: r.map(|r| r.r2.sd),
                        error: result
                            .as_ref()
                            .err()
                            .map(ToString::to_string)
                            .unwrap_or_default(),
                    });
                    summary.sweeps.push(SweepEntry {
                        n,
                        error: result.as_ref().err().map(ToString::to_string),
                        report: result.ok(),
                    });
                }
            }
        }
    }
    out.put_csv(dir.join("sweep.csv"), &rows)?;
    out.put(dir.join("sweep.json"), summary.to_json()?.as_bytes())?;
    Ok((summary, out))
}

/// Windows plus ingestion accounting for an empirical configuration.
pub struct EmpiricalData {
    pub windows: Arc<Vec<SampleSet>>,
    pub summary: IngestSummary,
    pub rejects: Vec<Reject>,
}

pub fn load_empirical(emp: &EmpiricalConfig, output_dir: &Path) -> Result<EmpiricalData> {
    let csv = match (&emp.csv, &emp.synthetic) {
        (Some(p), _) => p.clone(),
        (None, Some(opts)) => {
            let p = output_dir.join("synthetic_lpr.csv");
            write_synthetic_lpr_csv(&p, opts)?;
            p
        }
        (None, None) => {
            return Err(Error::Config(
                "empirical section needs csv or synthetic".into(),
            ))
        }
    };
    let ingest = ingest_csv(&csv, &emp.schema)?;
    let grouped = window_group(&ingest.records, emp.window_minutes, emp.min_samples)?;
    let summary = IngestSummary {
        csv,
        rows: ingest.rows(),
        records: ingest.records.len(),
        rejected_rows: ingest.rejects.len(),
        windows: grouped.windows.len(),
        windowed_records: grouped.windowed_records(),
        dropped_windows: grouped.dropped_windows,
        dropped_records: grouped.dropped_records,
        window_minutes: emp.window_minutes,
        min_samples: emp.min_samples,
    };
    if grouped.windows.is_empty() {
        return Err(Error::Config(format!(
            "no window of {} minutes holds {} records",
            emp.window_minutes, emp.min_samples
        )));
    }
    Ok(EmpiricalData {
        windows: Arc::new(grouped.windows.into_iter().map(|w| w.sample).collect()),
        summary,
        rejects: ingest.rejects,
    })
}

fn empirical_scenario(
    cfg: &RunConfig,
    windows: &Arc<Vec<SampleSet>>,
    method: Method,
    outlier: OutlierKind,
) -> ScenarioConfig {
    ScenarioConfig {
        constants: cfg.constants.constants(),
        ..ScenarioConfig::empirical("empirical", windows.clone(), method, outlier, cfg.grid())
    }
}

/// Runs every method × outlier scenario over the empirical windows.
pub fn empirical_reports(cfg: &RunConfig, data: &EmpiricalData) -> Result<Vec<AggregateReport>> {
    let mut reports = Vec::new();
    for &outlier in &cfg.outliers {
        for &method in &cfg.methods {
            reports.push(run_scenario(&empirical_scenario(
                cfg,
                &data.windows,
                method,
                outlier,
            ))?);
        }
    }
    Ok(reports)
}

/// `empirical`: report.csv, report.json, rejects.csv and curves for the
/// window selected by `curve_trial`.
pub fn run_empirical(cfg: &RunConfig) -> Result<(RunSummary, Written)> {
    let emp = cfg
        .empirical
        .as_ref()
        .ok_or_else(|| Error::Config("config has no empirical section".into()))?;
    let dir = &cfg.output_dir;
    let mut out = Written::default();
    let data = load_empirical(emp, dir)?;
    let mut summary = RunSummary::new("empirical", cfg);
    summary.reports = empirical_reports(cfg, &data)?;
    let trial = cfg.curve_trial.min(data.windows.len() - 1);
    for &outlier in &cfg.outliers {
        let scenarios: Vec<_> = cfg
            .methods
            .iter()
            .map(|&m| empirical_scenario(cfg, &data.windows, m, outlier))
            .collect();
        write_curves(
            &mut out,
            dir,
            &format!("empirical_{outlier}"),
            &scenarios,
            trial,
        )?;
    }
    summary.ingest = Some(data.summary);
    let rows: Vec<ReportRow> = summary.reports.iter().map(ReportRow::from).collect();
    out.put_csv(dir.join("report.csv"), &rows)?;
    out.put_csv(dir.join("rejects.csv"), &data.rejects)?;
    out.put(dir.join("report.json"), summary.to_json()?.as_bytes())?;
    Ok((summary, out))
}

/// `domain`: the validity-domain boundary as CSV.
pub fn write_domain(path: &Path, step: f64, k: &NptConstants) -> Result<Vec<BoundaryPoint>> {
    let points = validity_boundary(step, k)?;
    write_atomic(path, &csv_bytes(&points, path)?)?;
    Ok(points)
}
