//! Effective run configuration: command-line flags over a TOML config file
//! over built-in defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use oql_core::{EngineConfig, LegField};
use serde::{Deserialize, Serialize};

pub const CONFIG_ENV: &str = "OQL_CONFIG";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputMode {
    #[default]
    Standard,
    /// Flat `contract_ticker_<ROLE>` / `price_<ROLE>` records.
    Blueprint,
}

/// Contents of a config file. Every key is optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub epsilon: Option<f64>,
    pub epsilon_abs: Option<f64>,
    pub atm_band: Option<f64>,
    pub multiplier: Option<f64>,
    pub rate: Option<f64>,
    pub combinatorial_cap: Option<u64>,
    pub symmetric_butterfly: Option<bool>,
    pub output_format: Option<OutputFormat>,
    pub output_mode: Option<OutputMode>,
    #[serde(default)]
    pub field_epsilon: BTreeMap<String, f64>,
}

/// Engine flags shared by `run`, `eval` and `repl`.
#[derive(Debug, Clone, Default, Args)]
pub struct EngineFlags {
    /// Relative tolerance of `~`.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Absolute tolerance of `~ 0`.
    #[arg(long)]
    pub epsilon_abs: Option<f64>,
    /// Relative distance from spot counted as at-the-money.
    #[arg(long)]
    pub atm_band: Option<f64>,
    /// Contract multiplier applied to money aggregates.
    #[arg(long)]
    pub multiplier: Option<f64>,
    /// Risk-free rate; overrides the chain file's metadata.
    #[arg(long)]
    pub rate: Option<f64>,
    /// Largest Cartesian product the assembler will enumerate.
    #[arg(long)]
    pub cap: Option<u64>,
    /// Require equal wing widths for BUTTERFLY_CALL.
    #[arg(long)]
    pub symmetric_butterfly: bool,
    /// Per-field tolerance override, e.g. `Dte=0.1`. Repeatable.
    #[arg(long = "field-epsilon", value_name = "FIELD=EPS")]
    pub field_epsilon: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub engine: EngineConfig,
    /// `None` keeps each chain file's own rate.
    pub rate: Option<f64>,
    pub output_format: OutputFormat,
    pub output_mode: OutputMode,
}

pub fn config_path(flag: Option<&Path>) -> Option<PathBuf> {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os(CONFIG_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
}

pub fn load_file(path: Option<&Path>) -> Result<FileConfig, String> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    toml::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
}

fn parse_field_epsilon(map: &mut BTreeMap<LegField, f64>, name: &str, eps: f64) -> Result<(), String> {
    let field = LegField::lookup(name).ok_or_else(|| format!("unknown leg field `{name}` in field epsilon"))?;
    map.insert(field, eps);
    Ok(())
}

pub fn resolve(
    file: &FileConfig,
    flags: &EngineFlags,
    format: Option<OutputFormat>,
    mode: Option<OutputMode>,
) -> Result<RunConfig, String> {
    let defaults = EngineConfig::default();
    let mut field_epsilon = BTreeMap::new();
    for (name, eps) in &file.field_epsilon {
        parse_field_epsilon(&mut field_epsilon, name, *eps)?;
    }
    for spec in &flags.field_epsilon {
        let (name, eps) = spec
            .split_once('=')
            .ok_or_else(|| format!("--field-epsilon expects FIELD=EPS, got `{spec}`"))?;
        let eps: f64 = eps.trim().parse().map_err(|_| format!("bad epsilon in `{spec}`"))?;
        parse_field_epsilon(&mut field_epsilon, name.trim(), eps)?;
    }
    let engine = EngineConfig {
        epsilon: flags.epsilon.or(file.epsilon).unwrap_or(defaults.epsilon),
        epsilon_abs: flags.epsilon_abs.or(file.epsilon_abs).unwrap_or(defaults.epsilon_abs),
        field_epsilon,
        atm_band: flags.atm_band.or(file.atm_band).unwrap_or(defaults.atm_band),
        multiplier: flags.multiplier.or(file.multiplier).unwrap_or(defaults.multiplier),
        combinatorial_cap: flags.cap.or(file.combinatorial_cap).unwrap_or(defaults.combinatorial_cap),
        symmetric_butterfly: flags.symmetric_butterfly || file.symmetric_butterfly.unwrap_or(false),
    };
    engine.validate()?;
    Ok(RunConfig {
        engine,
        rate: flags.rate.or(file.rate),
        output_format: format.or(file.output_format).unwrap_or_default(),
        output_mode: mode.or(file.output_mode).unwrap_or_default(),
    })
}
