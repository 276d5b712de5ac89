//! Argument surface: plain flags plus an optional `key=value` config file,
//! with flags taking precedence over file entries.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "qep",
    about = "Two-qubit open-system dynamics across Liouvillian exceptional points",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evolve an initial state and emit the trajectory columns.
    Evolve(EvolveArgs),
    /// Sweep the first concurrence maximum over a parameter grid.
    SweepMax(SweepArgs),
    /// Eigenstructure report of the 5x5 generator.
    Spectrum(SpectrumArgs),
    /// Phase classification of the 4x4 correlation matrix over kappa.
    PtPhase(PtPhaseArgs),
    /// Regenerate the data behind a named figure.
    Fig(FigArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InitKind {
    #[value(name = "10")]
    Excited10,
    #[value(name = "01")]
    Excited01,
    #[value(name = "11")]
    Excited11,
    #[value(name = "mix")]
    Mix,
}

#[derive(Args, Debug)]
pub struct EvolveArgs {
    /// Initial condition.
    #[arg(long, value_enum)]
    pub init: Option<InitKind>,
    /// Mixture weight for --init mix (1 = single excitation endpoint).
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    /// Final rescaled time.
    #[arg(long)]
    pub tau_max: Option<f64>,
    /// Output sampling interval.
    #[arg(long)]
    pub dt_sample: Option<f64>,
    /// Add a column with the max componentwise deviation from the RK4
    /// integrator.
    #[arg(long)]
    pub oracle_check: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// key=value file supplying defaults for absent flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub init: Option<InitKind>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Gamma grid: start:stop:count. Kappa follows gamma unless --kappa
    /// pins it.
    #[arg(long)]
    pub grid: Option<String>,
    /// Fixed kappa (default: kappa = gamma along the sweep).
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Single kappa; alternatively scan with --grid.
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    /// Kappa grid: start:stop:count.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PtPhaseArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    /// Kappa grid: start:stop:count.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FigArgs {
    /// Figure id: 1a 1b 2a 2b 3 4 5a 5b 6a 6b 7a 7b.
    #[arg(long)]
    pub fig: Option<String>,
    /// Override the default gamma list for the curve figures, e.g.
    /// "0.1,0.3,1,3,10".
    #[arg(long)]
    pub gammas: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Parse a `key=value` file; blank lines and `#` comments are skipped.
pub fn read_config(path: &PathBuf) -> Result<BTreeMap<String, String>, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(format!(
                "config {}:{}: expected key=value",
                path.display(),
                lineno + 1
            ));
        };
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

pub fn fill_f64(
    slot: &mut Option<f64>,
    map: &BTreeMap<String, String>,
    key: &str,
) -> Result<(), String> {
    if slot.is_none() {
        if let Some(v) = map.get(key) {
            *slot = Some(
                v.parse::<f64>()
                    .map_err(|e| format!("config key {key}: {e}"))?,
            );
        }
    }
    Ok(())
}

pub fn fill_string(slot: &mut Option<String>, map: &BTreeMap<String, String>, key: &str) {
    if slot.is_none() {
        if let Some(v) = map.get(key) {
            *slot = Some(v.clone());
        }
    }
}

pub fn fill_init(
    slot: &mut Option<InitKind>,
    map: &BTreeMap<String, String>,
    key: &str,
) -> Result<(), String> {
    if slot.is_none() {
        if let Some(v) = map.get(key) {
            *slot = Some(match v.as_str() {
                "10" => InitKind::Excited10,
                "01" => InitKind::Excited01,
                "11" => InitKind::Excited11,
                "mix" => InitKind::Mix,
                other => return Err(format!("config key {key}: unknown init '{other}'")),
            });
        }
    }
    Ok(())
}

/// Parse "start:stop:count" into a uniform grid.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("grid '{spec}' must be start:stop:count"));
    }
    let start: f64 = parts[0]
        .parse()
        .map_err(|e| format!("grid start: {e}"))?;
    let stop: f64 = parts[1].parse().map_err(|e| format!("grid stop: {e}"))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|e| format!("grid count: {e}"))?;
    if count < 1 {
        return Err("grid count must be at least 1".into());
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    if !(stop > start) {
        return Err(format!("grid '{spec}' needs stop > start"));
    }
    Ok((0..count)
        .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g = parse_grid("0:1:5").unwrap();
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_grid("2:3:1").unwrap(), vec![2.0]);
        assert!(parse_grid("1:0:5").is_err());
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("a:2:3").is_err());
    }
}
