mod args;
mod commands;
mod figs;
mod table;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use args::{fill_f64, fill_init, fill_string, parse_grid, read_config, Cli, Command};
use commands::{
    invalid, run_evolve, run_pt_phase, run_spectrum, run_sweep_max, CliError, CliResult,
    EvolveConfig, SpectrumConfig, SweepConfig,
};
use table::CsvTable;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qep: {e}");
            match e {
                CliError::Invalid(_) => ExitCode::from(2),
                CliError::Numerical(_) => ExitCode::from(3),
            }
        }
    }
}

/// Cap sweep parallelism with QEP_THREADS (default: machine parallelism).
fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("QEP_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|e| invalid(format!("QEP_THREADS: {e}")))?;
        if n == 0 {
            return Err(invalid("QEP_THREADS must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::Numerical(format!("thread pool: {e}")))
}

fn write_table(table: &CsvTable, out: Option<&PathBuf>) -> CliResult<()> {
    match out {
        Some(path) => {
            let mut f = std::fs::File::create(path)
                .map_err(|e| invalid(format!("cannot create {}: {e}", path.display())))?;
            table
                .write_to(&mut f)
                .map_err(|e| CliError::Numerical(format!("write failed: {e}")))
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            table
                .write_to(&mut lock)
                .map_err(|e| CliError::Numerical(format!("write failed: {e}")))
        }
    }
}

fn config_map(
    path: Option<&PathBuf>,
) -> CliResult<std::collections::BTreeMap<String, String>> {
    match path {
        Some(p) => read_config(p).map_err(invalid),
        None => Ok(Default::default()),
    }
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Evolve(mut a) => {
            let map = config_map(a.config.as_ref())?;
            fill_init(&mut a.init, &map, "init").map_err(invalid)?;
            fill_f64(&mut a.alpha, &map, "alpha").map_err(invalid)?;
            fill_f64(&mut a.gamma, &map, "gamma").map_err(invalid)?;
            fill_f64(&mut a.kappa, &map, "kappa").map_err(invalid)?;
            fill_f64(&mut a.tau_max, &map, "tau-max").map_err(invalid)?;
            fill_f64(&mut a.dt_sample, &map, "dt-sample").map_err(invalid)?;
            let cfg = EvolveConfig {
                init: a.init.ok_or_else(|| invalid("--init is required"))?,
                alpha: a.alpha,
                gamma: a.gamma.ok_or_else(|| invalid("--gamma is required"))?,
                kappa: a.kappa.ok_or_else(|| invalid("--kappa is required"))?,
                tau_max: a.tau_max.ok_or_else(|| invalid("--tau-max is required"))?,
                dt_sample: a.dt_sample.unwrap_or(0.05),
                oracle_check: a.oracle_check,
            };
            let table = run_evolve(&cfg)?;
            write_table(&table, a.out.as_ref())
        }
        Command::SweepMax(mut a) => {
            let map = config_map(a.config.as_ref())?;
            fill_init(&mut a.init, &map, "init").map_err(invalid)?;
            fill_f64(&mut a.alpha, &map, "alpha").map_err(invalid)?;
            fill_f64(&mut a.kappa, &map, "kappa").map_err(invalid)?;
            let mut grid = a.grid.clone();
            fill_string(&mut grid, &map, "grid");
            let spec = grid.ok_or_else(|| invalid("--grid is required"))?;
            let cfg = SweepConfig {
                init: a.init.ok_or_else(|| invalid("--init is required"))?,
                alpha: a.alpha,
                gammas: parse_grid(&spec).map_err(invalid)?,
                kappa: a.kappa,
            };
            let table = thread_pool()?.install(|| run_sweep_max(&cfg))?;
            write_table(&table, a.out.as_ref())
        }
        Command::Spectrum(mut a) => {
            let map = config_map(a.config.as_ref())?;
            fill_f64(&mut a.gamma, &map, "gamma").map_err(invalid)?;
            fill_f64(&mut a.kappa, &map, "kappa").map_err(invalid)?;
            let mut grid = a.grid.clone();
            fill_string(&mut grid, &map, "grid");
            let kappas = match (a.kappa, grid) {
                (Some(k), None) => vec![k],
                (None, Some(spec)) => parse_grid(&spec).map_err(invalid)?,
                (Some(_), Some(_)) => {
                    return Err(invalid("--kappa and --grid are mutually exclusive"))
                }
                (None, None) => return Err(invalid("provide --kappa or --grid")),
            };
            let cfg = SpectrumConfig {
                gamma: a.gamma.ok_or_else(|| invalid("--gamma is required"))?,
                kappas,
            };
            let table = run_spectrum(&cfg)?;
            write_table(&table, a.out.as_ref())
        }
        Command::PtPhase(mut a) => {
            let map = config_map(a.config.as_ref())?;
            fill_f64(&mut a.kappa, &map, "kappa").map_err(invalid)?;
            let mut grid = a.grid.clone();
            fill_string(&mut grid, &map, "grid");
            let kappas = match (a.kappa, grid) {
                (Some(k), None) => vec![k],
                (None, Some(spec)) => parse_grid(&spec).map_err(invalid)?,
                (Some(_), Some(_)) => {
                    return Err(invalid("--kappa and --grid are mutually exclusive"))
                }
                (None, None) => return Err(invalid("provide --kappa or --grid")),
            };
            let table = run_pt_phase(&kappas)?;
            write_table(&table, a.out.as_ref())
        }
        Command::Fig(mut a) => {
            let map = config_map(a.config.as_ref())?;
            let mut fig = a.fig.clone();
            fill_string(&mut fig, &map, "fig");
            fill_string(&mut a.gammas, &map, "gammas");
            let fig = fig.ok_or_else(|| invalid("--fig is required"))?;
            let gammas: Option<Vec<f64>> = match &a.gammas {
                Some(list) => Some(
                    list.split(',')
                        .map(|s| s.trim().parse::<f64>())
                        .collect::<Result<_, _>>()
                        .map_err(|e| invalid(format!("--gammas: {e}")))?,
                ),
                None => None,
            };
            let table = thread_pool()?.install(|| figs::run_fig(&fig, gammas.as_deref()))?;
            // a small companion plot script when writing to a file
            if let Some(path) = &a.out {
                let name = path
                    .file_name()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "figure.csv".into());
                let script = figs::gnuplot_script(&name, &table);
                let gp = path.with_extension("gp");
                let mut f = std::fs::File::create(&gp)
                    .map_err(|e| invalid(format!("cannot create {}: {e}", gp.display())))?;
                f.write_all(script.as_bytes())
                    .map_err(|e| CliError::Numerical(format!("write failed: {e}")))?;
            }
            write_table(&table, a.out.as_ref())
        }
    }
}
