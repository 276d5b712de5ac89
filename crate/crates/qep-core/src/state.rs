//! Domain types shared by every other module: rescaled decay parameters,
//! the X-shaped density-matrix family, and initial conditions.
//!
//! Basis ordering is fixed as |11>, |10>, |01>, |00>, so the double
//! excitation sits in the top-left corner of the 4x4 matrix.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use std::collections::BTreeMap;

use crate::{Error, Result};

/// Trace tolerance for X-state construction.
pub const TRACE_TOL: f64 = 1e-12;
/// Allowed round-off negativity of populations.
pub const POPULATION_TOL: f64 = 1e-12;
/// Allowed round-off negativity of the smallest matrix eigenvalue.
pub const POSITIVITY_TOL: f64 = 1e-10;

/// Rescaled decay parameters: total rate `gamma = (gamma1 + gamma2)/(4J)` and
/// disparity `kappa = (gamma2 - gamma1)/(4J)`. Since both raw rates are
/// nonnegative, `|kappa| <= gamma` must hold. All dynamics is expressed in
/// the rescaled time `tau = 2 J t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    gamma: f64,
    kappa: f64,
}

impl Params {
    pub fn new(gamma: f64, kappa: f64) -> Result<Self> {
        if !gamma.is_finite() || !kappa.is_finite() {
            return Err(Error::ConstraintViolation(format!(
                "non-finite parameters gamma={gamma}, kappa={kappa}"
            )));
        }
        if gamma < 0.0 {
            return Err(Error::ConstraintViolation(format!(
                "gamma must be nonnegative, got {gamma}"
            )));
        }
        if kappa.abs() > gamma + 1e-12 {
            return Err(Error::ConstraintViolation(format!(
                "|kappa| <= gamma required, got gamma={gamma}, kappa={kappa}"
            )));
        }
        Ok(Params { gamma, kappa })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Raw decay rates `(gamma1, gamma2)` for a given coupling strength `j`:
    /// `gamma1 = 2J(gamma - kappa)`, `gamma2 = 2J(gamma + kappa)`.
    pub fn raw_rates(&self, j: f64) -> (f64, f64) {
        (2.0 * j * (self.gamma - self.kappa), 2.0 * j * (self.gamma + self.kappa))
    }

    /// Build from raw decay rates and coupling strength.
    pub fn from_raw_rates(gamma1: f64, gamma2: f64, j: f64) -> Result<Self> {
        if j <= 0.0 {
            return Err(Error::ConstraintViolation(format!(
                "coupling strength must be positive, got {j}"
            )));
        }
        Params::new((gamma1 + gamma2) / (4.0 * j), (gamma2 - gamma1) / (4.0 * j))
    }

    /// Rescaled time for a lab time `t` and coupling `j`: `tau = 2 J t`.
    pub fn tau_from_time(j: f64, t: f64) -> f64 {
        2.0 * j * t
    }
}

/// Convenience alias used throughout the tests and the CLI.
pub fn make_params(gamma: f64, kappa: f64) -> Result<Params> {
    Params::new(gamma, kappa)
}

/// The six independent entries of the X-shaped density matrix: populations
/// `a` (|11>), `b` (|10>), `c` (|01>), `d` (|00>), the outer coherence `h`
/// (|11><00|) and the inner coherence `m` (|10><01|).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XState {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub h: C64,
    pub m: C64,
}

impl XState {
    pub fn new(a: f64, b: f64, c: f64, d: f64, h: C64, m: C64) -> Result<Self> {
        let s = XState { a, b, c, d, h, m };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        let trace = self.a + self.b + self.c + self.d;
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::ConstraintViolation(format!(
                "trace {trace} deviates from 1 by more than {TRACE_TOL:e}"
            )));
        }
        for (name, v) in [("a", self.a), ("b", self.b), ("c", self.c), ("d", self.d)] {
            if !v.is_finite() || v < -POPULATION_TOL {
                return Err(Error::ConstraintViolation(format!(
                    "population {name}={v} below -{POPULATION_TOL:e}"
                )));
            }
        }
        let min_eig = self.min_eigenvalue();
        if !(min_eig >= -POSITIVITY_TOL) {
            return Err(Error::ConstraintViolation(format!(
                "matrix not positive semidefinite: min eigenvalue {min_eig}"
            )));
        }
        Ok(())
    }

    /// Smallest eigenvalue of the induced 4x4 matrix. The X pattern splits
    /// into the outer block {a,h,d} and the inner block {b,m,c}, so the
    /// eigenvalues are available in closed form.
    pub fn min_eigenvalue(&self) -> f64 {
        let outer = block_min(self.a, self.d, self.h);
        let inner = block_min(self.b, self.c, self.m);
        outer.min(inner)
    }

    /// Combined population of the single-excitation pair, `x = b + c`.
    pub fn x(&self) -> f64 {
        self.b + self.c
    }

    /// Population imbalance of the single-excitation pair, `y = b - c`.
    pub fn y(&self) -> f64 {
        self.b - self.c
    }

    /// Antisymmetric part of the inner coherence, `z = m - m*`. Purely
    /// imaginary by construction.
    pub fn z(&self) -> C64 {
        C64::new(0.0, 2.0 * self.m.im)
    }
}

fn block_min(p: f64, q: f64, r: C64) -> f64 {
    let mid = 0.5 * (p + q);
    let rad = (0.25 * (p - q) * (p - q) + r.norm_sqr()).sqrt();
    mid - rad
}

/// Product or mixed initial conditions used in the analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialCondition {
    /// First qubit excited: |10><10|.
    Excited10,
    /// Second qubit excited: |01><01|.
    Excited01,
    /// Both qubits excited: |11><11|.
    Excited11,
    /// Convex mixture `alpha |10><10| + (1-alpha) |11><11|`, `alpha` in [0,1].
    /// `Mix(1)` is `Excited10` and `Mix(0)` is `Excited11`.
    Mix(f64),
}

/// Initial X state for a given initial condition.
pub fn initial_xstate(ic: InitialCondition) -> Result<XState> {
    let zero = C64::new(0.0, 0.0);
    match ic {
        InitialCondition::Excited10 => XState::new(0.0, 1.0, 0.0, 0.0, zero, zero),
        InitialCondition::Excited01 => XState::new(0.0, 0.0, 1.0, 0.0, zero, zero),
        InitialCondition::Excited11 => XState::new(1.0, 0.0, 0.0, 0.0, zero, zero),
        InitialCondition::Mix(alpha) => {
            if !(0.0..=1.0).contains(&alpha) {
                return Err(Error::ConstraintViolation(format!(
                    "mixture weight must lie in [0,1], got {alpha}"
                )));
            }
            XState::new(1.0 - alpha, alpha, 0.0, 0.0, zero, zero)
        }
    }
}

/// Assemble the full 4x4 matrix in the |11>,|10>,|01>,|00> basis.
pub fn xstate_to_density(s: &XState) -> Array2<C64> {
    let mut rho = Array2::zeros((4, 4));
    rho[[0, 0]] = C64::new(s.a, 0.0);
    rho[[1, 1]] = C64::new(s.b, 0.0);
    rho[[2, 2]] = C64::new(s.c, 0.0);
    rho[[3, 3]] = C64::new(s.d, 0.0);
    rho[[0, 3]] = s.h;
    rho[[3, 0]] = s.h.conj();
    rho[[1, 2]] = s.m;
    rho[[2, 1]] = s.m.conj();
    rho
}

/// Extract the six X entries back out of a 4x4 matrix.
pub fn xstate_from_density(rho: &Array2<C64>) -> Result<XState> {
    XState::new(
        rho[[0, 0]].re,
        rho[[1, 1]].re,
        rho[[2, 2]].re,
        rho[[3, 3]].re,
        rho[[0, 3]],
        rho[[1, 2]],
    )
}

/// A time-indexed sequence of X states with named derived scalars.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    taus: Vec<f64>,
    states: Vec<XState>,
    scalars: BTreeMap<String, Vec<f64>>,
}

impl Trajectory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Append a sample; times must be strictly increasing.
    pub fn push(&mut self, tau: f64, state: XState) -> Result<()> {
        if let Some(&last) = self.taus.last() {
            if tau <= last {
                return Err(Error::ConstraintViolation(format!(
                    "times must be strictly increasing: {tau} after {last}"
                )));
            }
        }
        self.taus.push(tau);
        self.states.push(state);
        Ok(())
    }

    pub fn set_scalar(&mut self, name: &str, values: Vec<f64>) -> Result<()> {
        if values.len() != self.taus.len() {
            return Err(Error::ConstraintViolation(format!(
                "scalar '{name}' length {} does not match {} samples",
                values.len(),
                self.taus.len()
            )));
        }
        self.scalars.insert(name.to_string(), values);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn states(&self) -> &[XState] {
        &self.states
    }

    pub fn scalar(&self, name: &str) -> Option<&[f64]> {
        self.scalars.get(name).map(|v| v.as_slice())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_constraint() {
        assert!(make_params(1.0, 1.0).is_ok()); // EP locus, gamma1 = 0
        assert!(matches!(
            make_params(0.5, 0.8),
            Err(Error::ConstraintViolation(_))
        ));
        assert!(make_params(1.02, 1.02).is_ok());
        assert!(make_params(-0.1, 0.0).is_err());
        assert!(make_params(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn raw_rate_roundtrip() {
        let p = make_params(1.5, -0.5).unwrap();
        let (g1, g2) = p.raw_rates(2.0);
        assert!((g1 - 2.0 * 2.0 * 2.0).abs() < 1e-14); // 2J(gamma-kappa) = 4*2
        assert!((g2 - 2.0 * 2.0 * 1.0).abs() < 1e-14);
        let q = Params::from_raw_rates(g1, g2, 2.0).unwrap();
        assert!((q.gamma() - 1.5).abs() < 1e-14 && (q.kappa() + 0.5).abs() < 1e-14);
    }

    #[test]
    fn initial_states() {
        let s = initial_xstate(InitialCondition::Excited10).unwrap();
        assert_eq!((s.a, s.b, s.c, s.d), (0.0, 1.0, 0.0, 0.0));
        let s = initial_xstate(InitialCondition::Excited01).unwrap();
        assert_eq!((s.a, s.b, s.c, s.d), (0.0, 0.0, 1.0, 0.0));
        let s = initial_xstate(InitialCondition::Excited11).unwrap();
        assert_eq!((s.a, s.b, s.c, s.d), (1.0, 0.0, 0.0, 0.0));
        let s = initial_xstate(InitialCondition::Mix(0.25)).unwrap();
        assert_eq!((s.a, s.b, s.c, s.d), (0.75, 0.25, 0.0, 0.0));
        assert!(initial_xstate(InitialCondition::Mix(1.5)).is_err());
    }

    #[test]
    fn mix_endpoints_match_pure_states() {
        let m1 = initial_xstate(InitialCondition::Mix(1.0)).unwrap();
        let e10 = initial_xstate(InitialCondition::Excited10).unwrap();
        assert_eq!(m1, e10);
        let m0 = initial_xstate(InitialCondition::Mix(0.0)).unwrap();
        let e11 = initial_xstate(InitialCondition::Excited11).unwrap();
        assert_eq!(m0, e11);
    }

    #[test]
    fn density_assembly() {
        // Bell-like inner block
        let s = XState::new(0.0, 0.5, 0.5, 0.0, C64::new(0.0, 0.0), C64::new(0.5, 0.0)).unwrap();
        let rho = xstate_to_density(&s);
        assert_eq!(rho[[1, 2]], C64::new(0.5, 0.0));
        assert_eq!(rho[[2, 1]], C64::new(0.5, 0.0));
        // |11><11|
        let s = initial_xstate(InitialCondition::Excited11).unwrap();
        let rho = xstate_to_density(&s);
        assert_eq!(rho[[0, 0]], C64::new(1.0, 0.0));
        let tr: C64 = (0..4).map(|i| rho[[i, i]]).sum();
        assert!((tr.re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn density_roundtrip_exact() {
        let s = XState::new(
            0.3,
            0.25,
            0.25,
            0.2,
            C64::new(0.1, -0.05),
            C64::new(-0.07, 0.2),
        )
        .unwrap();
        let rho = xstate_to_density(&s);
        let back = xstate_from_density(&rho).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn positivity_rejected() {
        // coherence too large for the populations
        let err = XState::new(0.5, 0.0, 0.0, 0.5, C64::new(0.6, 0.0), C64::new(0.0, 0.0));
        assert!(err.is_err());
    }

    #[test]
    fn z_purely_imaginary() {
        let s = XState::new(0.1, 0.4, 0.3, 0.2, C64::new(0.0, 0.0), C64::new(0.2, 0.15)).unwrap();
        assert_eq!(s.z().re, 0.0);
        assert!((s.z().im - 0.3).abs() < 1e-15);
    }

    #[test]
    fn trajectory_ordering() {
        let s = initial_xstate(InitialCondition::Excited10).unwrap();
        let mut t = Trajectory::new();
        t.push(0.0, s).unwrap();
        t.push(0.5, s).unwrap();
        assert!(t.push(0.5, s).is_err());
        assert_eq!(t.len(), 2);
        t.set_scalar("C", vec![0.0, 0.1]).unwrap();
        assert!(t.set_scalar("bad", vec![1.0]).is_err());
        assert_eq!(t.scalar("C").unwrap()[1], 0.1);
    }
}
