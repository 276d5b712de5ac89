//! Concurrence along the named initial-condition families, two-qubit
//! correlation functions, and solvers for the time and value of the first
//! concurrence maximum.
//!
//! The closed forms for the first maximum after a single excitation were
//! re-derived from the stationarity condition
//! `gamma + A cosh(Delta tau) + B sinh(Delta tau) = 0`; the printed
//! tangent/hyperbolic-tangent expressions carry an overall sign error in
//! the numerator. With the corrected numerator the branch rule is uniform:
//! upper sign for `kappa > 0`, lower sign for `kappa < 0`. Every closed
//! form here is cross-checked against a bracketed root finder in the tests.

use crate::analytic::{damped_kernels, propagate, Branch, Discriminant};
use crate::state::{Params, XState};
use crate::{Error, Result};

/// How a first-maximum result was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    RootFind,
}

/// Location and value of the first positive maximum of a time trace.
#[derive(Debug, Clone, Copy)]
pub struct FirstMax {
    /// Rescaled time of the first maximum.
    pub tau_star: f64,
    /// Value at the maximum; nonnegative by construction.
    pub value: f64,
    pub method: Method,
}

/// X-state concurrence `2 max(0, |m| - sqrt(ad), |h| - sqrt(bc))`.
pub fn concurrence_x(s: &XState) -> f64 {
    let inner = s.m.norm() - (s.a.max(0.0) * s.d.max(0.0)).sqrt();
    let outer = s.h.norm() - (s.b.max(0.0) * s.c.max(0.0)).sqrt();
    2.0 * inner.max(outer).max(0.0)
}

/// Concurrence after the single-excitation start |10>: `C = |z|`, with
/// `z/i = e^{-gamma tau} (kappa (cosh-1)/Delta^2 + sinh/Delta)`.
/// The |01> start is this with `kappa -> -kappa`.
pub fn concurrence_10(p: &Params, tau: f64) -> f64 {
    let k = damped_kernels(p.gamma(), p.kappa(), tau);
    (p.kappa() * k.e_cm1 + k.e_shd).abs()
}

/// Concurrence after the double-excitation start |11>:
/// `C = max(0, |z| - 2 sqrt(ad))`, even in `kappa`.
pub fn concurrence_11(p: &Params, tau: f64) -> f64 {
    let kappa = p.kappa();
    let k = damped_kernels(p.gamma(), kappa, tau);
    let z_abs = 2.0 * kappa.abs() * k.e_cm1;
    let a = k.e2;
    let d = ((1.0 - k.e) * (1.0 - k.e) - 2.0 * kappa * kappa * k.e_cm1).max(0.0);
    (z_abs - 2.0 * (a * d).sqrt()).max(0.0)
}

/// Concurrence for the mixture `alpha |10><10| + (1-alpha) |11><11|`, using
/// the mixed-state closed forms for `a`, `z`, `d`.
pub fn concurrence_mix(alpha: f64, p: &Params, tau: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::ConstraintViolation(format!(
            "mixture weight must lie in [0,1], got {alpha}"
        )));
    }
    let kappa = p.kappa();
    let k = damped_kernels(p.gamma(), kappa, tau);
    let z_abs = ((2.0 - alpha) * kappa * k.e_cm1 + alpha * k.e_shd).abs();
    let a = (1.0 - alpha) * k.e2;
    let d = ((1.0 - alpha) * ((1.0 - k.e) * (1.0 - k.e) - 2.0 * kappa * kappa * k.e_cm1)
        + alpha * (1.0 - k.e - kappa * kappa * k.e_cm1 - kappa * k.e_shd))
        .max(0.0);
    Ok((z_abs - 2.0 * (a * d).sqrt()).max(0.0))
}

/// Correlation `<sigma_x mu_y> = -i (z - h + h*)` along the propagated
/// state of the given initial condition; always real.
pub fn correlation_xy(p: &Params, ic: crate::state::InitialCondition, tau: f64) -> Result<f64> {
    let s0 = crate::state::initial_xstate(ic)?;
    let s = propagate(&s0, p, tau);
    // z - h + h* has zero real part; -i of it is real
    Ok(2.0 * s.m.im - 2.0 * s.h.im)
}

/// `<sigma_y mu_x> = i (z + h - h*)`; equals `-<sigma_x mu_y>` for the
/// double-excitation start where `h` vanishes.
pub fn correlation_yx(p: &Params, ic: crate::state::InitialCondition, tau: f64) -> Result<f64> {
    let s0 = crate::state::initial_xstate(ic)?;
    let s = propagate(&s0, p, tau);
    Ok(-2.0 * s.m.im - 2.0 * s.h.im)
}

/// Upper time bound for first-maximum searches: every transient decays at
/// least as fast as `e^{-gamma tau}`.
fn search_window(gamma: f64) -> f64 {
    20.0 / gamma.max(0.1)
}

const GRID_STEP: f64 = 1e-2;
const GOLDEN_XTOL: f64 = 1e-10;
/// Smallest value that counts as a genuine maximum of the clamped
/// concurrence; the `max(0, .)` plateaus must not qualify.
const POSITIVE_FLOOR: f64 = 1e-12;

/// Golden-section maximization on a bracket.
fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, xtol: f64) -> (f64, f64) {
    let inv_phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while hi - lo > xtol {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Earliest strict local maximum with value above the positive floor:
/// coarse grid scan followed by golden-section refinement. Derivative-free
/// because the clamped concurrence has kinks at sudden-death boundaries.
fn first_local_max(f: impl Fn(f64) -> f64, t_max: f64) -> Option<(f64, f64)> {
    let n = (t_max / GRID_STEP).ceil() as usize;
    let mut prev2 = f(0.0);
    let mut prev = f(GRID_STEP);
    for i in 2..=n {
        let t = i as f64 * GRID_STEP;
        let cur = f(t);
        if prev > POSITIVE_FLOOR && prev >= prev2 && prev > cur {
            let (x, v) = golden_max(&f, (i as f64 - 2.0) * GRID_STEP, t, GOLDEN_XTOL);
            return Some((x, v));
        }
        prev2 = prev;
        prev = cur;
    }
    None
}

/// Stationarity function for the single-excitation concurrence: zero of
/// `(kappa sinh/Delta + cosh) - gamma (kappa (cosh-1)/Delta^2 + sinh/Delta)`.
fn stationarity_10(p: &Params, tau: f64) -> f64 {
    let k = crate::analytic::kernels(p.kappa(), tau);
    (p.kappa() * k.sinh_over_d + k.cosh_val)
        - p.gamma() * (p.kappa() * k.cm1_over_d2 + k.sinh_over_d)
}

/// First concurrence maximum after |10>, from the branch-appropriate closed
/// form. Always earlier than `pi/2`.
pub fn first_max_10(p: &Params) -> Result<FirstMax> {
    let gamma = p.gamma();
    let kappa = p.kappa();
    if gamma <= 0.0 {
        return Err(Error::ConstraintViolation(
            "first_max_10 requires gamma > 0".into(),
        ));
    }
    let tau_star = first_max_10_time(gamma, kappa)?;
    Ok(FirstMax {
        tau_star,
        value: concurrence_10(p, tau_star),
        method: Method::ClosedForm,
    })
}

fn first_max_10_time(gamma: f64, kappa: f64) -> Result<f64> {
    let disc = Discriminant::new(kappa);
    let root = 1.0 + gamma * gamma;
    let s = root.sqrt();
    if kappa == 0.0 {
        return Ok((1.0 / gamma).atan());
    }
    let sign = kappa.signum();
    match disc.branch {
        Branch::Critical => {
            // tau' = (1 -+ gamma +- sqrt(1+gamma^2))/gamma, upper for kappa=+1
            Ok((1.0 - sign * gamma + sign * s) / gamma)
        }
        Branch::Over => {
            let d = disc.value;
            let a = (kappa * kappa - 1.0) / kappa - gamma;
            let b = (1.0 - gamma / kappa) * d;
            let num = -gamma * kappa.abs() * b + sign * d * a * s;
            let den = gamma * kappa.abs() * a - sign * d * b * s;
            let r = num / den;
            if !(r.abs() < 1.0) {
                return Err(Error::Numerical(format!(
                    "tanh argument out of range for gamma={gamma}, kappa={kappa}"
                )));
            }
            let t = r.atanh() / d;
            if t <= 0.0 {
                return Err(Error::Numerical(format!(
                    "no positive stationary point for gamma={gamma}, kappa={kappa}"
                )));
            }
            Ok(t)
        }
        Branch::Under => {
            let d = disc.value;
            let a = (kappa * kappa - 1.0) / kappa - gamma;
            let b = (1.0 - gamma / kappa) * d;
            let num = -gamma * kappa.abs() * b + sign * d * a * s;
            let den = gamma * kappa.abs() * a + sign * d * b * s;
            let mut t = num.atan2(den) / d;
            while t <= 0.0 {
                t += std::f64::consts::PI / d;
            }
            Ok(t)
        }
    }
}

/// Same quantity as [`first_max_10`], obtained by bracketing the first sign
/// change of the stationarity condition and bisecting. Kept as an
/// independent route for validating the closed forms.
pub fn first_max_10_numeric(p: &Params) -> Result<FirstMax> {
    if p.gamma() <= 0.0 {
        return Err(Error::ConstraintViolation(
            "first_max_10 requires gamma > 0".into(),
        ));
    }
    let t_max = search_window(p.gamma()).max(2.0);
    let step = 1e-2;
    let n = (t_max / step).ceil() as usize;
    let mut prev_t = 1e-12;
    let mut prev_g = stationarity_10(p, prev_t);
    for i in 1..=n {
        let t = i as f64 * step;
        let g = stationarity_10(p, t);
        if prev_g > 0.0 && g <= 0.0 {
            let (mut lo, mut hi) = (prev_t, t);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if stationarity_10(p, mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-14 {
                    break;
                }
            }
            let tau_star = 0.5 * (lo + hi);
            return Ok(FirstMax {
                tau_star,
                value: concurrence_10(p, tau_star),
                method: Method::RootFind,
            });
        }
        prev_t = t;
        prev_g = g;
    }
    Err(Error::NoMaximum)
}

/// First positive maximum of the double-excitation concurrence, by grid
/// scan plus golden-section refinement.
pub fn first_max_11(p: &Params) -> Result<FirstMax> {
    if p.gamma() <= 0.0 {
        return Err(Error::ConstraintViolation(
            "first_max_11 requires gamma > 0".into(),
        ));
    }
    let (tau_star, value) = first_local_max(|t| concurrence_11(p, t), search_window(p.gamma()))
        .ok_or(Error::NoPositiveConcurrence)?;
    Ok(FirstMax {
        tau_star,
        value,
        method: Method::RootFind,
    })
}

/// First positive maximum of the mixed-state concurrence.
pub fn first_max_mix(alpha: f64, p: &Params) -> Result<FirstMax> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::ConstraintViolation(format!(
            "mixture weight must lie in [0,1], got {alpha}"
        )));
    }
    if p.gamma() <= 0.0 {
        return Err(Error::ConstraintViolation(
            "first_max_mix requires gamma > 0".into(),
        ));
    }
    let (tau_star, value) = first_local_max(
        |t| concurrence_mix(alpha, p, t).unwrap_or(0.0),
        search_window(p.gamma()),
    )
    .ok_or(Error::NoPositiveConcurrence)?;
    Ok(FirstMax {
        tau_star,
        value,
        method: Method::RootFind,
    })
}

/// First extremum of `<sigma_x mu_y>` for the double-excitation start.
///
/// The stationarity condition `coth(Delta tau / 2) = gamma / Delta` always
/// has a root for valid parameters with `kappa != 0`; at the exceptional
/// points it degenerates to `tau = 2/gamma` exactly. The reported value is
/// the magnitude of the correlation at the extremum (for `kappa < 0` the
/// extremum is a minimum of the signed correlation).
pub fn first_max_corr_xy(p: &Params) -> Result<FirstMax> {
    let gamma = p.gamma();
    let kappa = p.kappa();
    if kappa == 0.0 {
        // the kappa prefactor makes the correlation vanish identically
        return Err(Error::NoMaximum);
    }
    let disc = Discriminant::new(kappa);
    let tau_star = match disc.branch {
        Branch::Critical => 2.0 / gamma,
        Branch::Over => {
            let d = disc.value;
            // coth(d tau/2) = gamma/d, solvable since gamma > d
            2.0 / d * (d / gamma).atanh()
        }
        Branch::Under => {
            let d = disc.value;
            2.0 / d * (d / gamma).atan()
        }
    };
    let k = damped_kernels(gamma, kappa, tau_star);
    Ok(FirstMax {
        tau_star,
        value: (2.0 * kappa * k.e_cm1).abs(),
        method: Method::ClosedForm,
    })
}

/// Numeric counterpart of [`first_max_corr_xy`]: bisection on the first
/// sign change of the stationarity condition `sinh/Delta = gamma (cosh-1)/Delta^2`.
pub fn first_max_corr_xy_numeric(p: &Params) -> Result<FirstMax> {
    if p.kappa() == 0.0 {
        return Err(Error::NoMaximum);
    }
    let stat = |t: f64| {
        let k = crate::analytic::kernels(p.kappa(), t);
        k.sinh_over_d - p.gamma() * k.cm1_over_d2
    };
    let t_max = search_window(p.gamma()).max(2.0);
    let n = (t_max / GRID_STEP).ceil() as usize;
    let mut prev_t = 1e-12;
    let mut prev_g = stat(prev_t);
    for i in 1..=n {
        let t = i as f64 * GRID_STEP;
        let g = stat(t);
        if prev_g > 0.0 && g <= 0.0 {
            let (mut lo, mut hi) = (prev_t, t);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if stat(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-14 {
                    break;
                }
            }
            let tau_star = 0.5 * (lo + hi);
            let k = damped_kernels(p.gamma(), p.kappa(), tau_star);
            return Ok(FirstMax {
                tau_star,
                value: (2.0 * p.kappa() * k.e_cm1).abs(),
                method: Method::RootFind,
            });
        }
        prev_t = t;
        prev_g = g;
    }
    Err(Error::NoMaximum)
}

/// Largest tolerated deviation between the closed forms and their numeric
/// validation routes.
pub const CLOSED_FORM_TOL: f64 = 1e-8;
