//! Closed-form propagation of the X state.
//!
//! The dynamics is governed by three scalar kernels built from the
//! discriminant `Delta^2 = kappa^2 - 1`: `cosh(Delta tau)`,
//! `sinh(Delta tau)/Delta` and `(cosh(Delta tau) - 1)/Delta^2`. All three
//! are real for every `kappa` once the underdamped branch (`|kappa| < 1`)
//! is rewritten through trigonometric functions, and all three extend
//! continuously through the exceptional points `|kappa| = 1`, where they
//! become `1`, `tau` and `tau^2/2`.
//!
//! The solution set printed in the source material carries a sign error in
//! the `kappa^2 (cosh - 1)/Delta^2` terms of `x(tau)` and `d(tau)`; the
//! forms implemented here were re-derived from the equations of motion and
//! match both the RK4 oracle and the mixed-state closed forms.

use num_complex::Complex64 as C64;

use crate::state::{InitialCondition, Params, XState};
use crate::{initial_xstate, Result};

/// Width of the series window around the exceptional points.
pub const EPS_EP: f64 = 1e-7;

/// Damping regime of the single-excitation block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `|kappa| < 1`: oscillatory kernels.
    Under,
    /// `||kappa| - 1| <= EPS_EP`: series evaluation in `Delta^2`.
    Critical,
    /// `|kappa| > 1`: hyperbolic kernels.
    Over,
}

/// Classified discriminant `sqrt(|kappa^2 - 1|)` with its branch.
#[derive(Debug, Clone, Copy)]
pub struct Discriminant {
    pub kappa: f64,
    pub branch: Branch,
    /// `sqrt(|kappa^2 - 1|)`.
    pub value: f64,
}

impl Discriminant {
    pub fn new(kappa: f64) -> Self {
        let branch = if (kappa.abs() - 1.0).abs() <= EPS_EP {
            Branch::Critical
        } else if kappa.abs() < 1.0 {
            Branch::Under
        } else {
            Branch::Over
        };
        Discriminant {
            kappa,
            branch,
            value: (kappa * kappa - 1.0).abs().sqrt(),
        }
    }
}

/// The three propagation kernels, evaluated on the branch-correct form.
#[derive(Debug, Clone, Copy)]
pub struct KernelValues {
    /// `(cosh(Delta tau) - 1)/Delta^2`; `tau^2/2` at the exceptional points.
    pub cm1_over_d2: f64,
    /// `sinh(Delta tau)/Delta`; `tau` at the exceptional points.
    pub sinh_over_d: f64,
    /// `cosh(Delta tau)`; `1` at the exceptional points.
    pub cosh_val: f64,
}

/// Evaluate the kernels for any `kappa` and `tau >= 0`.
///
/// The underdamped branch uses `2 sin^2` / `sin` forms and the overdamped
/// branch `2 sinh^2` / `sinh` forms, so no catastrophic cancellation occurs
/// away from the exceptional points; inside the `EPS_EP` window a six-term
/// series in `Delta^2` takes over.
pub fn kernels(kappa: f64, tau: f64) -> KernelValues {
    let disc = Discriminant::new(kappa);
    let s = kappa * kappa - 1.0;
    match disc.branch {
        Branch::Critical => {
            // series in s = Delta^2; |s| <= ~2e-7 inside the window
            let t2 = tau * tau;
            let mut cm1 = 0.0;
            let mut shd = 0.0;
            let mut ch = 0.0;
            // n-th terms: s^n tau^{2n}/(2n)! etc., six terms each
            let mut pow = 1.0; // s^n t^{2n} running value for ch
            let mut fact2n = 1.0; // (2n)!
            let mut fact2n1 = 1.0; // (2n+1)!
            for n in 0..6 {
                if n > 0 {
                    pow *= s * t2;
                    fact2n *= ((2 * n - 1) * (2 * n)) as f64;
                    fact2n1 *= ((2 * n) * (2 * n + 1)) as f64;
                }
                ch += pow / fact2n;
                shd += pow * tau / fact2n1;
                // cm1 term n: s^n tau^{2n+2}/(2n+2)!
                cm1 += pow * t2 / (fact2n * ((2 * n + 1) * (2 * n + 2)) as f64);
            }
            KernelValues {
                cm1_over_d2: cm1,
                sinh_over_d: shd,
                cosh_val: ch,
            }
        }
        Branch::Over => {
            let d = disc.value;
            let sh_half = (0.5 * d * tau).sinh();
            KernelValues {
                cm1_over_d2: 2.0 * sh_half * sh_half / s,
                sinh_over_d: (d * tau).sinh() / d,
                cosh_val: (d * tau).cosh(),
            }
        }
        Branch::Under => {
            let d = disc.value;
            let sin_half = (0.5 * d * tau).sin();
            KernelValues {
                cm1_over_d2: 2.0 * sin_half * sin_half / (-s),
                sinh_over_d: (d * tau).sin() / d,
                cosh_val: (d * tau).cos(),
            }
        }
    }
}

/// Kernels with the overall decay folded in: `e^{-gamma tau} * kernel`.
///
/// For valid parameters `Delta < gamma`, so these never overflow even when
/// the raw hyperbolic kernels would; the overdamped branch is assembled
/// from `exp((Delta - gamma) tau)` and `exp(-(Delta + gamma) tau)` directly.
#[derive(Debug, Clone, Copy)]
pub(crate) struct DampedKernels {
    /// `e^{-gamma tau} (cosh(Delta tau) - 1)/Delta^2`
    pub e_cm1: f64,
    /// `e^{-gamma tau} sinh(Delta tau)/Delta`
    pub e_shd: f64,
    /// `e^{-gamma tau} cosh(Delta tau)`
    pub e_ch: f64,
    /// `e^{-gamma tau}`
    pub e: f64,
    /// `e^{-2 gamma tau}`
    pub e2: f64,
}

pub(crate) fn damped_kernels(gamma: f64, kappa: f64, tau: f64) -> DampedKernels {
    let e = (-gamma * tau).exp();
    let e2 = (-2.0 * gamma * tau).exp();
    let disc = Discriminant::new(kappa);
    if disc.branch == Branch::Over {
        let d = disc.value;
        let s = kappa * kappa - 1.0;
        let up = ((d - gamma) * tau).exp();
        let dn = (-(d + gamma) * tau).exp();
        let w = 0.5 * (((d - gamma) * 0.5 * tau).exp() - (-(d + gamma) * 0.5 * tau).exp());
        DampedKernels {
            e_cm1: 2.0 * w * w / s,
            e_shd: 0.5 * (up - dn) / d,
            e_ch: 0.5 * (up + dn),
            e,
            e2,
        }
    } else {
        let k = kernels(kappa, tau);
        DampedKernels {
            e_cm1: e * k.cm1_over_d2,
            e_shd: e * k.sinh_over_d,
            e_ch: e * k.cosh_val,
            e,
            e2,
        }
    }
}

/// Exact propagation of an X state to rescaled time `tau`.
///
/// Pure in `(s0, p, tau)`: the closed forms are exact at any time, so no
/// internal stepping takes place. The decoupled channels `m + m*` and `h`
/// decay as plain exponentials; the five-component block `(a, x, y, z, d)`
/// evolves through the kernels.
pub fn propagate(s0: &XState, p: &Params, tau: f64) -> XState {
    let gamma = p.gamma();
    let kappa = p.kappa();
    let k = damped_kernels(gamma, kappa, tau);
    let (e, e2) = (k.e, k.e2);

    let a0 = s0.a;
    let x0 = s0.x();
    let y0 = s0.y();
    let zi0 = 2.0 * s0.m.im; // z = i * zi
    let mm0 = 2.0 * s0.m.re; // m + m*

    // e^{-gamma tau} (1 + kappa^2 (cosh - 1)/Delta^2)
    let e_kk = e + kappa * kappa * k.e_cm1;
    let a = e2 * a0;
    let x = -2.0 * a0 * (e2 - e_kk) + x0 * e_kk + y0 * kappa * k.e_shd - zi0 * kappa * k.e_cm1;
    let y = y0 * k.e_ch + (2.0 * a0 * kappa + x0 * kappa - zi0) * k.e_shd;
    let zi = (2.0 * a0 + x0) * kappa * k.e_cm1 + y0 * k.e_shd + zi0 * (e - k.e_cm1);
    let d = s0.d + a0 * (1.0 + e2 - 2.0 * e_kk) + x0 * (1.0 - e_kk) - y0 * kappa * k.e_shd
        + zi0 * kappa * k.e_cm1;

    let b = 0.5 * (x + y);
    let c = 0.5 * (x - y);
    let m = C64::new(0.5 * mm0 * e, 0.5 * zi);
    let h = s0.h * e;

    XState::new(a, b, c, d, h, m)
        .expect("closed-form propagation preserves X-state validity")
}

/// Propagation of the mixture `alpha |10><10| + (1-alpha) |11><11|` via the
/// dedicated mixed-state closed forms for `a`, `z` and `d`; the remaining
/// entries come from the general solution, with which these forms agree.
pub fn propagate_mixed(alpha: f64, p: &Params, tau: f64) -> Result<XState> {
    let s0 = initial_xstate(InitialCondition::Mix(alpha))?;
    let mut out = propagate(&s0, p, tau);

    // closed forms specific to the mixture
    let gamma = p.gamma();
    let kappa = p.kappa();
    let k = damped_kernels(gamma, kappa, tau);
    let e = k.e;
    let a = (1.0 - alpha) * k.e2;
    let zi = (2.0 - alpha) * kappa * k.e_cm1 + alpha * k.e_shd;
    let d = (1.0 - alpha) * ((1.0 - e) * (1.0 - e) - 2.0 * kappa * kappa * k.e_cm1)
        + alpha * (1.0 - e - kappa * kappa * k.e_cm1 - kappa * k.e_shd);

    debug_assert!((out.a - a).abs() < 1e-12);
    debug_assert!((2.0 * out.m.im - zi).abs() < 1e-12);
    debug_assert!((out.d - d).abs() < 1e-12);
    out.a = a;
    out.d = d;
    out.m = C64::new(out.m.re, 0.5 * zi);
    Ok(out)
}
