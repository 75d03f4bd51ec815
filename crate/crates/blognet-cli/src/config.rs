//! Pipeline configuration: defaults, config-file loading and flag
//! overrides, with precedence flags > file > defaults.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

/// All pipeline parameters. The defaults are the reference settings every
/// stage assumes when nothing is overridden.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Words occurring fewer times than this are discarded.
    pub min_count: u64,
    /// Keep the rarest percentile of the surviving distinct words.
    pub keep_percentile: f64,
    /// Keep documents whose vocabulary word set has at least this many words.
    pub min_wordset_size: usize,
    /// Store pairwise similarities at or above this value.
    pub store_threshold: f64,
    /// Analysis threshold for cluster and hierarchy views.
    pub gamma: f64,
    /// Near-duplicate component threshold.
    pub dup_threshold: f64,
    /// Outlier flagging strength in residual standard deviations.
    pub outlier_k: f64,
    /// Power-law fit region over similarity values.
    pub fit_region_lo: f64,
    pub fit_region_hi: f64,
    /// Log-spaced histogram bins.
    pub n_bins: usize,
    /// MCMC burn-in; unset means 10 n^2.
    pub hrg_burn_in: Option<u64>,
    /// MCMC recorded steps; unset means 100 n^2.
    pub hrg_steps: Option<u64>,
    pub seed: u64,
    /// Extra thresholded views exported by the graph stage.
    pub view_gammas: Vec<f64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            min_count: 10,
            keep_percentile: 5.0,
            min_wordset_size: 25,
            store_threshold: 0.025,
            gamma: 0.05,
            dup_threshold: 0.8,
            outlier_k: 2.0,
            fit_region_lo: 0.025,
            fit_region_hi: 0.2,
            n_bins: 50,
            hrg_burn_in: None,
            hrg_steps: None,
            seed: 1,
            view_gammas: Vec::new(),
        }
    }
}

impl PipelineConfig {
    pub fn fit_region(&self) -> (f64, f64) {
        (self.fit_region_lo, self.fit_region_hi)
    }

    /// Loads a flat TOML key-value file; missing keys keep their defaults,
    /// unknown keys are rejected by name.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("failed to read config {}", path.display()))?;
        let config: PipelineConfig =
            toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        Ok(config)
    }
}

/// Per-parameter override flags shared by every subcommand; field names
/// mirror [`PipelineConfig`].
#[derive(Debug, Clone, Default, clap::Args)]
pub struct ConfigOverrides {
    /// TOML config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub min_count: Option<u64>,
    #[arg(long)]
    pub keep_percentile: Option<f64>,
    #[arg(long)]
    pub min_wordset_size: Option<usize>,
    #[arg(long)]
    pub store_threshold: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub dup_threshold: Option<f64>,
    #[arg(long)]
    pub outlier_k: Option<f64>,
    #[arg(long)]
    pub fit_region_lo: Option<f64>,
    #[arg(long)]
    pub fit_region_hi: Option<f64>,
    #[arg(long)]
    pub n_bins: Option<usize>,
    #[arg(long)]
    pub hrg_burn_in: Option<u64>,
    #[arg(long)]
    pub hrg_steps: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated list, e.g. `0.04,0.045,0.055,0.07`.
    #[arg(long, value_delimiter = ',')]
    pub view_gammas: Option<Vec<f64>>,
}

impl ConfigOverrides {
    /// Effective config: defaults, then the file, then the flags.
    pub fn resolve(&self) -> Result<PipelineConfig> {
        let mut config = match &self.config {
            Some(path) => PipelineConfig::from_file(path)?,
            None => PipelineConfig::default(),
        };
        macro_rules! apply {
            ($($field:ident),* $(,)?) => {
                $(if let Some(value) = &self.$field {
                    config.$field = value.clone();
                })*
            };
        }
        apply!(
            min_count,
            keep_percentile,
            min_wordset_size,
            store_threshold,
            gamma,
            dup_threshold,
            outlier_k,
            fit_region_lo,
            fit_region_hi,
            n_bins,
            seed,
            view_gammas,
        );
        if self.hrg_burn_in.is_some() {
            config.hrg_burn_in = self.hrg_burn_in;
        }
        if self.hrg_steps.is_some() {
            config.hrg_steps = self.hrg_steps;
        }
        Ok(config)
    }
}
