//! Figure-data presets. Each id regenerates the plotted quantities of the
//! corresponding figure at desk resolution; a matching gnuplot script can
//! be emitted alongside the data.
//!
//! The curve figures accept an explicit gamma list; the shipped default
//! {0.1, 0.3, 1, 3, 10} is an artifact choice, not source data.

use rayon::prelude::*;

use qep_core::{concurrence_10, concurrence_11, first_max_11, first_max_mix, make_params};

use crate::commands::{first_max_corr_xy, invalid, tau10_or_nan, CliResult};
use crate::table::CsvTable;

pub const DEFAULT_CURVE_GAMMAS: [f64; 5] = [0.1, 0.3, 1.0, 3.0, 10.0];
const CURVE_SAMPLES: usize = 400;
const SWEEP_SAMPLES: usize = 240;
const SWEEP_RANGE: (f64, f64) = (0.2, 5.0);
pub const MIX_ALPHAS: [f64; 5] = [1.0, 0.75, 0.5, 0.25, 0.1];

pub const FIG_IDS: [&str; 12] = [
    "1a", "1b", "2a", "2b", "3", "4", "5a", "5b", "6a", "6b", "7a", "7b",
];

fn tau_grid(tau_max: f64, samples: usize) -> Vec<f64> {
    (0..=samples)
        .map(|i| tau_max * i as f64 / samples as f64)
        .collect()
}

fn gamma_sweep() -> Vec<f64> {
    (0..SWEEP_SAMPLES)
        .map(|i| {
            SWEEP_RANGE.0 + (SWEEP_RANGE.1 - SWEEP_RANGE.0) * i as f64 / (SWEEP_SAMPLES - 1) as f64
        })
        .collect()
}

fn gamma_label(g: f64) -> String {
    // trim trailing zeros for readable column names
    let s = format!("{g}");
    s.replace('.', "p")
}

/// Concurrence curves at fixed kappa (ids 1a/1b) or along kappa = +-gamma
/// (ids 2a/2b).
fn curves_c10(gammas: &[f64], kappa_of: impl Fn(f64) -> f64) -> CliResult<CsvTable> {
    let mut header = vec!["tau".to_string()];
    for &g in gammas {
        header.push(format!("C_g{}", gamma_label(g)));
    }
    let mut table = CsvTable::new(header);
    let params: Vec<_> = gammas
        .iter()
        .map(|&g| make_params(g, kappa_of(g)))
        .collect::<Result<_, _>>()?;
    for &tau in &tau_grid(10.0, CURVE_SAMPLES) {
        let mut row = vec![tau];
        for p in &params {
            row.push(concurrence_10(p, tau));
        }
        table.push_row(row);
    }
    Ok(table)
}

fn curves_c11(gammas: &[f64]) -> CliResult<CsvTable> {
    let mut header = vec!["tau".to_string()];
    for &g in gammas {
        header.push(format!("C_g{}", gamma_label(g)));
    }
    let mut table = CsvTable::new(header);
    let params: Vec<_> = gammas
        .iter()
        .map(|&g| make_params(g, g))
        .collect::<Result<_, _>>()?;
    for &tau in &tau_grid(10.0, CURVE_SAMPLES) {
        let mut row = vec![tau];
        for p in &params {
            row.push(concurrence_11(p, tau));
        }
        table.push_row(row);
    }
    Ok(table)
}

/// First-maximum time of the single-excitation concurrence against kappa
/// for several gamma, plus the enveloping gamma = |kappa| curve.
fn first_max_time_map() -> CliResult<CsvTable> {
    let gammas = [0.5, 1.0, 2.0, 5.0];
    let mut header = vec!["kappa".to_string()];
    for &g in &gammas {
        header.push(format!("tau_g{}", gamma_label(g)));
    }
    header.push("tau_envelope".into());
    let mut table = CsvTable::new(header);
    let n = 401;
    for i in 0..n {
        let kappa = -5.0 + 10.0 * i as f64 / (n - 1) as f64;
        let mut row = vec![kappa];
        for &g in &gammas {
            row.push(tau10_or_nan(g, kappa));
        }
        row.push(if kappa == 0.0 {
            f64::NAN
        } else {
            tau10_or_nan(kappa.abs(), kappa)
        });
        table.push_row(row);
    }
    Ok(table)
}

fn sweep_11(which_value: bool) -> CliResult<CsvTable> {
    let header = if which_value {
        vec!["gamma".to_string(), "c_max".to_string()]
    } else {
        vec!["gamma".to_string(), "tau_star".to_string()]
    };
    let mut table = CsvTable::new(header);
    let gammas = gamma_sweep();
    let rows: Vec<(f64, f64)> = gammas
        .par_iter()
        .map(|&g| {
            let fm = make_params(g, g).and_then(|p| first_max_11(&p));
            match fm {
                Ok(fm) => {
                    if which_value {
                        (g, fm.value)
                    } else {
                        (g, fm.tau_star)
                    }
                }
                Err(_) => (g, f64::NAN),
            }
        })
        .collect();
    for (g, v) in rows {
        table.push_row(vec![g, v]);
    }
    Ok(table)
}

fn sweep_mix(which_value: bool) -> CliResult<CsvTable> {
    let mut header = vec!["gamma".to_string()];
    for &a in &MIX_ALPHAS {
        let tag = format!("{a}").replace('.', "p");
        header.push(if which_value {
            format!("c_max_a{tag}")
        } else {
            format!("tau_star_a{tag}")
        });
    }
    let mut table = CsvTable::new(header);
    let gammas = gamma_sweep();
    let rows: Vec<Vec<f64>> = gammas
        .par_iter()
        .map(|&g| {
            let mut row = vec![g];
            for &a in &MIX_ALPHAS {
                let fm = make_params(g, g).and_then(|p| first_max_mix(a, &p));
                row.push(match fm {
                    Ok(fm) => {
                        if which_value {
                            fm.value
                        } else {
                            fm.tau_star
                        }
                    }
                    Err(_) => f64::NAN,
                });
            }
            row
        })
        .collect();
    for row in rows {
        table.push_row(row);
    }
    Ok(table)
}

fn sweep_corr(which_value: bool) -> CliResult<CsvTable> {
    let header = if which_value {
        vec!["gamma".to_string(), "corr_max".to_string()]
    } else {
        vec!["gamma".to_string(), "tau_star".to_string()]
    };
    let mut table = CsvTable::new(header);
    for &g in &gamma_sweep() {
        let fm = make_params(g, g).and_then(|p| first_max_corr_xy(&p));
        let v = match fm {
            Ok(fm) => {
                if which_value {
                    fm.value
                } else {
                    fm.tau_star
                }
            }
            Err(_) => f64::NAN,
        };
        table.push_row(vec![g, v]);
    }
    Ok(table)
}

pub fn run_fig(fig_id: &str, gammas: Option<&[f64]>) -> CliResult<CsvTable> {
    let curve_gammas: Vec<f64> = gammas
        .map(|g| g.to_vec())
        .unwrap_or_else(|| DEFAULT_CURVE_GAMMAS.to_vec());
    match fig_id {
        "1a" => curves_c10(&curve_gammas, |_| 0.1),
        "1b" => curves_c10(&curve_gammas, |_| -0.1),
        "2a" => curves_c10(&curve_gammas, |g| g),
        "2b" => curves_c10(&curve_gammas, |g| -g),
        "3" => first_max_time_map(),
        "4" => curves_c11(&[0.2, 0.5, 1.02, 2.0, 5.0]),
        "5a" => sweep_11(true),
        "5b" => sweep_11(false),
        "6a" => sweep_mix(true),
        "6b" => sweep_mix(false),
        "7a" => sweep_corr(true),
        "7b" => sweep_corr(false),
        other => Err(invalid(format!(
            "unknown figure id '{other}'; expected one of {}",
            FIG_IDS.join(" ")
        ))),
    }
}

/// A minimal gnuplot script plotting every data column against the first.
pub fn gnuplot_script(csv_name: &str, table: &CsvTable) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set key autotitle columnhead\n");
    s.push_str(&format!("set xlabel '{}'\n", table.header()[0]));
    s.push_str("plot \\\n");
    let n = table.header().len();
    for col in 2..=n {
        let sep = if col < n { ", \\\n" } else { "\n" };
        s.push_str(&format!("  '{csv_name}' using 1:{col} with lines{sep}"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_fig_ids_produce_tables() {
        for id in FIG_IDS {
            let t = run_fig(id, None).unwrap();
            assert!(t.rows().len() >= 200, "fig {id} has {} rows", t.rows().len());
        }
    }

    #[test]
    fn fig_5a_has_interior_maximum_near_unity() {
        let t = run_fig("5a", None).unwrap();
        let best = t
            .rows()
            .iter()
            .max_by(|a, b| a[1].partial_cmp(&b[1]).unwrap())
            .unwrap();
        assert!((best[1] - 0.425).abs() < 0.005, "peak {}", best[1]);
        assert!((best[0] - 1.02).abs() < 0.05, "at gamma {}", best[0]);
    }

    #[test]
    fn fig_7b_monotone_decreasing() {
        let t = run_fig("7b", None).unwrap();
        let mut prev = f64::INFINITY;
        for row in t.rows() {
            assert!(row[1] < prev);
            prev = row[1];
        }
    }

    #[test]
    fn fig_6a_hollow_appears_for_small_alpha() {
        let t = run_fig("6a", None).unwrap();
        // column 1 is alpha = 1: no interior maximum (monotone decreasing);
        // column 3 is alpha = 0.5: an interior maximum has appeared
        let col = |j: usize| -> Vec<f64> { t.rows().iter().map(|r| r[j]).collect() };
        let has_interior_max = |v: &[f64]| {
            (1..v.len() - 1).any(|i| v[i] > v[i - 1] && v[i] > v[i + 1])
        };
        assert!(!has_interior_max(&col(1)), "alpha=1 should be monotone");
        assert!(has_interior_max(&col(3)), "alpha=0.5 should have a maximum");
        assert!(has_interior_max(&col(4)), "alpha=0.25 should have a maximum");
    }

    #[test]
    fn gnuplot_script_references_columns() {
        let t = run_fig("5a", None).unwrap();
        let s = gnuplot_script("fig5a.csv", &t);
        assert!(s.contains("using 1:2"));
    }
}
