//! Implementations behind the subcommands, producing [`CsvTable`]s.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use qep_core::linalg::max_abs_diff;
use qep_core::oracle::integrate_endpoint;
use qep_core::spectral::{liouvillian_spectrum, pt_phase, Phase};
use qep_core::{
    concurrence_x, entanglement, first_max_10, first_max_11, first_max_mix, initial_xstate,
    make_params, propagate, xstate_to_density, Error as CoreError, InitialCondition,
    LindbladGenerator, Params,
};

use crate::args::InitKind;
use crate::table::CsvTable;

/// Failures split by exit code: invalid parameters (2) versus numerical
/// trouble (3).
#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Numerical(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Invalid(m) => write!(f, "invalid parameters: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::ConstraintViolation(m) => CliError::Invalid(m),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}

fn initial_condition(kind: InitKind, alpha: Option<f64>) -> CliResult<InitialCondition> {
    Ok(match kind {
        InitKind::Excited10 => InitialCondition::Excited10,
        InitKind::Excited01 => InitialCondition::Excited01,
        InitKind::Excited11 => InitialCondition::Excited11,
        InitKind::Mix => {
            let alpha = alpha.ok_or_else(|| invalid("--init mix requires --alpha"))?;
            InitialCondition::Mix(alpha)
        }
    })
}

/// Mixture weight reported in sweep tables; the excited-01 family is not
/// part of the mixture and reports `nan`.
fn alpha_label(kind: InitKind, alpha: Option<f64>) -> f64 {
    match kind {
        InitKind::Excited10 => 1.0,
        InitKind::Excited11 => 0.0,
        InitKind::Excited01 => f64::NAN,
        InitKind::Mix => alpha.unwrap_or(f64::NAN),
    }
}

/// Correlation `<sigma_x mu_y>` of a propagated state.
fn corr_xy_of(s: &qep_core::XState) -> f64 {
    2.0 * (s.m.im - s.h.im)
}

pub struct EvolveConfig {
    pub init: InitKind,
    pub alpha: Option<f64>,
    pub gamma: f64,
    pub kappa: f64,
    pub tau_max: f64,
    pub dt_sample: f64,
    pub oracle_check: bool,
}

pub fn run_evolve(cfg: &EvolveConfig) -> CliResult<CsvTable> {
    if cfg.tau_max <= 0.0 {
        return Err(invalid(format!("--tau-max must be positive, got {}", cfg.tau_max)));
    }
    if cfg.dt_sample <= 0.0 {
        return Err(invalid(format!(
            "--dt-sample must be positive, got {}",
            cfg.dt_sample
        )));
    }
    let p = make_params(cfg.gamma, cfg.kappa)?;
    let ic = initial_condition(cfg.init, cfg.alpha)?;
    let s0 = initial_xstate(ic)?;

    let mut header: Vec<String> = [
        "tau", "a", "b", "c", "d", "re_m", "im_m", "re_h", "im_h", "C", "corr_xy",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    if cfg.oracle_check {
        header.push("max_dev".into());
    }
    let mut table = CsvTable::new(header);

    let n = (cfg.tau_max / cfg.dt_sample).floor() as usize;
    let gen = cfg.oracle_check.then(|| LindbladGenerator::new(p));
    let mut rho = xstate_to_density(&s0);
    for k in 0..=n {
        let tau = k as f64 * cfg.dt_sample;
        let s = propagate(&s0, &p, tau);
        let mut row = vec![
            tau,
            s.a,
            s.b,
            s.c,
            s.d,
            s.m.re,
            s.m.im,
            s.h.re,
            s.h.im,
            concurrence_x(&s),
            corr_xy_of(&s),
        ];
        if let Some(gen) = &gen {
            if k > 0 {
                rho = integrate_endpoint(gen, &rho, cfg.dt_sample, 1e-3)?;
            }
            row.push(max_abs_diff(&rho, &xstate_to_density(&s)));
        }
        table.push_row(row);
    }
    Ok(table)
}

pub struct SweepConfig {
    pub init: InitKind,
    pub alpha: Option<f64>,
    pub gammas: Vec<f64>,
    pub kappa: Option<f64>,
}

fn sweep_point(init: InitKind, alpha: Option<f64>, p: &Params) -> CliResult<(f64, f64)> {
    let outcome = match init {
        InitKind::Excited10 => first_max_10(p).map(|fm| (fm.tau_star, fm.value)),
        InitKind::Excited01 => {
            let reflected = make_params(p.gamma(), -p.kappa())?;
            first_max_10(&reflected).map(|fm| (fm.tau_star, fm.value))
        }
        InitKind::Excited11 => first_max_11(p).map(|fm| (fm.tau_star, fm.value)),
        InitKind::Mix => {
            let alpha = alpha.ok_or_else(|| invalid("--init mix requires --alpha"))?;
            first_max_mix(alpha, p).map(|fm| (fm.tau_star, fm.value))
        }
    };
    match outcome {
        Ok(pair) => Ok(pair),
        // a flat-zero concurrence is a data point, not a failure
        Err(CoreError::NoPositiveConcurrence) => Ok((f64::NAN, 0.0)),
        Err(e) => Err(e.into()),
    }
}

pub fn run_sweep_max(cfg: &SweepConfig) -> CliResult<CsvTable> {
    let mut table = CsvTable::new(
        ["gamma", "kappa", "alpha", "tau_star", "c_max"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
    );
    // validate every grid point up front so failures exit before any work
    let points: Vec<Params> = cfg
        .gammas
        .iter()
        .map(|&g| make_params(g, cfg.kappa.unwrap_or(g)))
        .collect::<Result<_, _>>()?;
    let results: Vec<CliResult<(f64, f64)>> = points
        .par_iter()
        .map(|p| sweep_point(cfg.init, cfg.alpha, p))
        .collect();
    let alpha = alpha_label(cfg.init, cfg.alpha);
    for (p, res) in points.iter().zip(results) {
        let (tau_star, c_max) = res?;
        table.push_row(vec![p.gamma(), p.kappa(), alpha, tau_star, c_max]);
    }
    Ok(table)
}

fn phase_code(phase: Phase) -> f64 {
    match phase {
        Phase::PtSymmetric => 0.0,
        Phase::Broken => 1.0,
        Phase::Critical => 2.0,
    }
}

fn sorted_eigenvalues(vals: &[C64]) -> Vec<C64> {
    let mut v = vals.to_vec();
    v.sort_by(|a, b| {
        (a.re, a.im)
            .partial_cmp(&(b.re, b.im))
            .expect("finite eigenvalues")
    });
    v
}

pub struct SpectrumConfig {
    pub gamma: f64,
    pub kappas: Vec<f64>,
}

pub fn run_spectrum(cfg: &SpectrumConfig) -> CliResult<CsvTable> {
    let mut header = vec!["kappa".to_string()];
    for i in 0..5 {
        header.push(format!("re_{i}"));
        header.push(format!("im_{i}"));
    }
    header.extend(
        ["min_gap", "min_angle", "ep_order", "phase_code", "biorth_residual"]
            .iter()
            .map(|s| s.to_string()),
    );
    let mut table = CsvTable::new(header);
    for &kappa in &cfg.kappas {
        let p = make_params(cfg.gamma, kappa)?;
        let report = liouvillian_spectrum(&p)?;
        let mut row = vec![kappa];
        for lam in sorted_eigenvalues(&report.eigenvalues) {
            row.push(lam.re);
            row.push(lam.im);
        }
        let (min_gap, min_angle) = report
            .coalescence
            .iter()
            .map(|c| (c.eigenvalue_gap, c.eigenvector_angle))
            .fold((f64::NAN, f64::NAN), |acc, (g, a)| {
                (
                    if acc.0.is_nan() { g } else { acc.0.min(g) },
                    if acc.1.is_nan() { a } else { acc.1.min(a) },
                )
            });
        row.push(min_gap);
        row.push(min_angle);
        row.push(report.ep_order.map_or(f64::NAN, |o| o as f64));
        row.push(phase_code(report.phase));
        row.push(report.biorthogonality_residual);
        table.push_row(row);
    }
    Ok(table)
}

pub fn run_pt_phase(kappas: &[f64]) -> CliResult<CsvTable> {
    let mut header = vec!["kappa".to_string(), "phase_code".to_string()];
    for i in 0..4 {
        header.push(format!("re_{i}"));
        header.push(format!("im_{i}"));
    }
    let mut table = CsvTable::new(header);
    for &kappa in kappas {
        let (phase, vals) = pt_phase(kappa)?;
        let mut row = vec![kappa, phase_code(phase)];
        for lam in sorted_eigenvalues(&vals) {
            row.push(lam.re);
            row.push(lam.im);
        }
        table.push_row(row);
    }
    Ok(table)
}

/// Evaluate the first maximum of the single-excitation concurrence, with
/// `nan` where the constraint excludes the point.
pub fn tau10_or_nan(gamma: f64, kappa: f64) -> f64 {
    if kappa.abs() > gamma {
        return f64::NAN;
    }
    match make_params(gamma, kappa).and_then(|p| first_max_10(&p)) {
        Ok(fm) => fm.tau_star,
        Err(_) => f64::NAN,
    }
}

pub use entanglement::first_max_corr_xy;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evolve_rejects_bad_parameters() {
        let cfg = EvolveConfig {
            init: InitKind::Excited10,
            alpha: None,
            gamma: 0.5,
            kappa: 0.8,
            tau_max: 1.0,
            dt_sample: 0.1,
            oracle_check: false,
        };
        assert!(matches!(run_evolve(&cfg), Err(CliError::Invalid(_))));
    }

    #[test]
    fn evolve_columns_and_oracle_check() {
        let cfg = EvolveConfig {
            init: InitKind::Excited11,
            alpha: None,
            gamma: 1.0,
            kappa: 0.5,
            tau_max: 2.0,
            dt_sample: 0.25,
            oracle_check: true,
        };
        let t = run_evolve(&cfg).unwrap();
        assert_eq!(t.header().last().unwrap(), "max_dev");
        assert_eq!(t.rows().len(), 9);
        for row in t.rows() {
            assert!(row[row.len() - 1] <= 1e-7, "oracle deviation {}", row[row.len() - 1]);
            // populations sum to one
            let tr: f64 = row[1..5].iter().sum();
            assert!((tr - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sweep_emits_nan_sentinel_where_flat() {
        // kappa pinned to zero: the double-excitation concurrence never
        // turns positive
        let cfg = SweepConfig {
            init: InitKind::Excited11,
            alpha: None,
            gammas: vec![0.5, 1.0],
            kappa: Some(0.0),
        };
        let t = run_sweep_max(&cfg).unwrap();
        for row in t.rows() {
            assert!(row[3].is_nan());
            assert_eq!(row[4], 0.0);
        }
    }

    #[test]
    fn spectrum_known_point() {
        // gamma=2, kappa=0: eigenvalues {0, -4, -2, -2 +- i}
        let cfg = SpectrumConfig {
            gamma: 2.0,
            kappas: vec![0.0],
        };
        let t = run_spectrum(&cfg).unwrap();
        let row = &t.rows()[0];
        let eigs: Vec<(f64, f64)> = (0..5).map(|i| (row[1 + 2 * i], row[2 + 2 * i])).collect();
        for (re, im) in [(-4.0, 0.0), (-2.0, -1.0), (-2.0, 0.0), (-2.0, 1.0), (0.0, 0.0)] {
            assert!(
                eigs.iter()
                    .any(|&(r, i)| (r - re).abs() < 1e-9 && (i - im).abs() < 1e-9),
                "missing {re}+{im}i in {eigs:?}"
            );
        }
    }

    #[test]
    fn pt_phase_scan_flips_at_unity() {
        let kappas: Vec<f64> = (0..21).map(|i| i as f64 * 0.1).collect();
        let t = run_pt_phase(&kappas).unwrap();
        for row in t.rows() {
            let kappa = row[0];
            let code = row[1];
            if kappa < 0.95 {
                assert_eq!(code, 0.0, "kappa={kappa}");
            } else if kappa > 1.05 {
                assert_eq!(code, 1.0, "kappa={kappa}");
            }
        }
    }
}
