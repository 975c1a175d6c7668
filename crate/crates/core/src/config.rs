//! JSON run configuration shared by the CLI subcommands.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::distributions::{solve_params, DistributionSpec, Family, Params};
use crate::error::{Error, Result};
use crate::harness::{Method, OutlierKind};
use crate::io::{SchemaOptions, SyntheticOptions};
use crate::npt::{default_grid, validate_grid, NptConstants};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantsChoice {
    #[default]
    Published,
    Precise,
}

impl ConstantsChoice {
    pub fn constants(self) -> NptConstants {
        match self {
            ConstantsChoice::Published => NptConstants::PUBLISHED,
            ConstantsChoice::Precise => NptConstants::PRECISE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmpiricalConfig {
    /// Input CSV. When absent, `synthetic` must be set.
    pub csv: Option<PathBuf>,
    /// Generate a synthetic dataset into the output directory and use it.
    pub synthetic: Option<SyntheticOptions>,
    pub schema: SchemaOptions,
    pub window_minutes: u32,
    pub min_samples: usize,
}

impl Default for EmpiricalConfig {
    fn default() -> Self {
        Self {
            csv: None,
            synthetic: None,
            schema: SchemaOptions::default(),
            window_minutes: 15,
            min_samples: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Common mean of the distribution group, seconds.
    pub mean: f64,
    /// CoV of the distribution group; with `families` it selects solved specs.
    pub cov: Option<f64>,
    /// Families solved at (`mean`, `cov`). Defaults to all six.
    pub families: Option<Vec<Family>>,
    /// Explicitly parameterized distributions, in addition to the group.
    pub distributions: Vec<Params>,
    pub methods: Vec<Method>,
    pub outliers: Vec<OutlierKind>,
    pub trials: usize,
    pub n: usize,
    /// Probability grid; the 99-point grid 0.01..0.99 when absent.
    pub grid: Option<Vec<f64>>,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub sweep_sizes: Vec<usize>,
    pub constants: ConstantsChoice,
    /// Trial whose curves are exported to `curves_<scenario>.csv`.
    pub curve_trial: usize,
    pub empirical: Option<EmpiricalConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mean: 167.0,
            cov: None,
            families: None,
            distributions: Vec::new(),
            methods: Method::ALL.to_vec(),
            outliers: OutlierKind::ALL.to_vec(),
            trials: 100,
            n: 100,
            grid: None,
            seed: 1,
            output_dir: PathBuf::from("lmnpt-out"),
            sweep_sizes: (1..=20).map(|i| i * 100).collect(),
            constants: ConstantsChoice::Published,
            curve_trial: 0,
            empirical: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    fn check(&self) -> Result<()> {
        if self.methods.is_empty() || self.outliers.is_empty() {
            return Err(Error::Config(
                "methods and outliers must be nonempty".into(),
            ));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.curve_trial >= self.trials {
            return Err(Error::Config(format!(
                "curve_trial {} must be below trials {}",
                self.curve_trial, self.trials
            )));
        }
        validate_grid(&self.grid())?;
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        self.grid.clone().unwrap_or_else(default_grid)
    }

    /// Solved group members followed by the explicit distributions.
    pub fn specs(&self) -> Result<Vec<DistributionSpec>> {
        let mut specs = Vec::new();
        if let Some(cov) = self.cov {
            let families = self
                .families
                .clone()
                .unwrap_or_else(|| Family::ALL.to_vec());
            for f in families {
                specs.push(solve_params(f, self.mean, cov)?);
            }
        } else if self.families.is_some() {
            return Err(Error::Config("families need a group cov".into()));
        }
        for p in &self.distributions {
            specs.push(DistributionSpec::from_params(*p)?);
        }
        if specs.is_empty() {
            return Err(Error::Config(
                "no distributions: set cov (and optionally families) or distributions".into(),
            ));
        }
        Ok(specs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_group_config() {
        let cfg = RunConfig::from_json(r#"{"cov": 0.07, "families": ["normal", "extreme_value"]}"#)
            .unwrap();
        let specs = cfg.specs().unwrap();
        assert_eq!(specs.len(), 2);
        assert_eq!(specs[1].family(), Family::Gumbel);
        assert_eq!(cfg.grid().len(), 99);
        assert_eq!(cfg.methods, Method::ALL.to_vec());
    }

    #[test]
    fn explicit_distributions() {
        let cfg = RunConfig::from_json(
            r#"{"distributions": [{"family": "gamma", "shape": 4.0, "scale": 2.0}]}"#,
        )
        .unwrap();
        let s = cfg.specs().unwrap();
        assert_eq!(s[0].mean, 8.0);
        assert_eq!(s[0].cov, 0.5);
    }

    #[test]
    fn usage_errors() {
        for bad in [
            r#"{"cov": 0.07, "bogus": 1}"#,
            r#"{"cov": 0.07, "trials": 0}"#,
            r#"{"cov": 0.07, "methods": []}"#,
            r#"{"cov": 0.07, "grid": [0.5, 0.1]}"#,
            r#"{"cov": 0.07, "methods": ["magic"]}"#,
        ] {
            let err = RunConfig::from_json(bad).unwrap_err();
            assert!(err.is_usage(), "{bad}: {err}");
        }
        let none = RunConfig::from_json("{}").unwrap();
        assert!(none.specs().is_err());
    }
}
