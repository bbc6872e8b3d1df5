//! Run configuration: an optional TOML file overridden by flags.
//!
//! ```toml
//! tau = 0.5
//! text_radius = 5.0
//! eps = 1e-8
//! rules = "rules.toml"
//! planner_endpoint = "http://localhost:8080/plan"
//! format = "both"
//! ```

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::Deserialize;

use v2g_core::pipeline::PipelineConfig;
use v2g_core::planner::{default_rules, Rule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Structured,
    #[default]
    Text,
    Both,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// TOML config file; flags override its values
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Endpoint merge tolerance in drawing units [default: 0.5]
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    /// Annotation attachment radius in drawing units [default: 5]
    #[arg(long, global = true)]
    pub text_radius: Option<f64>,
    /// Relative zero-eigenvalue threshold [default: 1e-8]
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    /// Rules file (TOML with [[rules]] tables, or a JSON array) [default: built-in ten rules]
    #[arg(long, global = true)]
    pub rules: Option<PathBuf>,
    /// External planner URL; PLANNER_API_KEY is sent as a bearer token
    #[arg(long, global = true)]
    pub planner_endpoint: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    tau: Option<f64>,
    text_radius: Option<f64>,
    eps: Option<f64>,
    rules: Option<PathBuf>,
    planner_endpoint: Option<String>,
    format: Option<Format>,
}

#[derive(Debug, Deserialize)]
struct RulesFile {
    rules: Vec<Rule>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditConfig {
    pub pipeline: PipelineConfig,
    pub planner_endpoint: Option<String>,
    /// Format from the config file, used when no flag is given.
    pub format: Option<Format>,
}

pub fn load_rules(path: &Path) -> Result<Vec<Rule>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading rules {}", path.display()))?;
    let rules = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).with_context(|| format!("parsing rules {}", path.display()))?
    } else {
        toml::from_str::<RulesFile>(&text)
            .with_context(|| format!("parsing rules {}", path.display()))?
            .rules
    };
    if rules.is_empty() {
        bail!("rules file {} lists no rules", path.display());
    }
    Ok(rules)
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<AuditConfig> {
        let (file, base) = match &self.config {
            Some(path) => {
                let text =
                    std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
                let file: FileConfig =
                    toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
                (file, path.parent().map(Path::to_path_buf).unwrap_or_default())
            }
            None => (FileConfig::default(), PathBuf::new()),
        };
        let mut pipeline = PipelineConfig::default();
        if let Some(tau) = self.tau.or(file.tau) {
            pipeline.builder.tau = tau;
        }
        if let Some(r) = self.text_radius.or(file.text_radius) {
            pipeline.builder.text_radius = r;
        }
        if let Some(eps) = self.eps.or(file.eps) {
            pipeline.eps = eps;
        }
        // rules paths in the file are relative to the file
        let rules_path = self.rules.clone().or_else(|| file.rules.map(|p| base.join(p)));
        pipeline.rules = match rules_path {
            Some(p) => load_rules(&p)?,
            None => default_rules(),
        };
        pipeline.builder.validate()?;
        if !(pipeline.eps.is_finite() && pipeline.eps > 0.0) {
            bail!("eps must be > 0, got {}", pipeline.eps);
        }
        Ok(AuditConfig {
            pipeline,
            planner_endpoint: self.planner_endpoint.clone().or(file.planner_endpoint),
            format: file.format,
        })
    }
}
