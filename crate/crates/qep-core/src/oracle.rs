//! Brute-force verification path: direct RK4 integration of the full
//! master-equation generator on 4x4 density matrices, plus the general
//! Wootters concurrence. Nothing here shares code with the closed forms in
//! [`crate::analytic`], so agreement between the two is meaningful.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::linalg::{adjoint, hermitian_eig, kron, max_abs_diff};
use crate::state::Params;
use crate::{Error, Result};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// A validated 4x4 density matrix: Hermitian, unit trace, positive
/// semidefinite up to round-off.
#[derive(Debug, Clone)]
pub struct DensityMatrix(Array2<C64>);

impl DensityMatrix {
    pub fn new(rho: Array2<C64>) -> Result<Self> {
        if rho.dim() != (4, 4) {
            return Err(Error::ConstraintViolation("density matrix must be 4x4".into()));
        }
        let herm_dev = max_abs_diff(&rho, &adjoint(&rho));
        if herm_dev > 1e-12 {
            return Err(Error::ConstraintViolation(format!(
                "not Hermitian: deviation {herm_dev:e}"
            )));
        }
        let tr: C64 = (0..4).map(|i| rho[[i, i]]).sum();
        if (tr.re - 1.0).abs() > 1e-12 || tr.im.abs() > 1e-12 {
            return Err(Error::ConstraintViolation(format!("trace {tr} is not 1")));
        }
        let (lam, _) = hermitian_eig(&rho)?;
        if lam[0] < -1e-10 {
            return Err(Error::ConstraintViolation(format!(
                "not positive semidefinite: min eigenvalue {}",
                lam[0]
            )));
        }
        Ok(DensityMatrix(rho))
    }

    pub(crate) fn from_array_unchecked(rho: Array2<C64>) -> Self {
        DensityMatrix(rho)
    }

    pub fn as_array(&self) -> &Array2<C64> {
        &self.0
    }

    pub fn into_array(self) -> Array2<C64> {
        self.0
    }
}

/// Single-qubit ladder operators embedded in the two-qubit space, basis
/// |11>, |10>, |01>, |00> with the first label the sigma qubit.
pub(crate) struct TwoQubitOps {
    pub sp: Array2<C64>,
    pub sm: Array2<C64>,
    pub mp: Array2<C64>,
    pub mm: Array2<C64>,
}

pub(crate) fn two_qubit_ops() -> TwoQubitOps {
    // single-qubit basis (|1>, |0>): raising operator |1><0|
    let mut raise = Array2::zeros((2, 2));
    raise[[0, 1]] = c(1.0);
    let lower = adjoint(&raise);
    let eye = Array2::from_diag_elem(2, c(1.0));
    TwoQubitOps {
        sp: kron(&raise, &eye),
        sm: kron(&lower, &eye),
        mp: kron(&eye, &raise),
        mm: kron(&eye, &lower),
    }
}

/// Spin-flip matrix `sigma_y (x) mu_y` used by the Wootters construction.
pub(crate) fn spin_flip() -> Array2<C64> {
    let mut sy = Array2::zeros((2, 2));
    sy[[0, 1]] = C64::new(0.0, -1.0);
    sy[[1, 0]] = C64::new(0.0, 1.0);
    kron(&sy, &sy)
}

/// The master-equation generator in rescaled time: the swap commutator with
/// coefficient 1/2 and the two decay channels with rates `(gamma -+ kappa)/2`.
pub struct LindbladGenerator {
    params: Params,
    hamiltonian: Array2<C64>,
    sm_sigma: Array2<C64>,
    sp_sigma: Array2<C64>,
    proj_sigma: Array2<C64>,
    mm_mu: Array2<C64>,
    mp_mu: Array2<C64>,
    proj_mu: Array2<C64>,
}

impl LindbladGenerator {
    pub fn new(params: Params) -> Self {
        let ops = two_qubit_ops();
        let hamiltonian = ops.sp.dot(&ops.mm) + ops.sm.dot(&ops.mp);
        let proj_sigma = ops.sp.dot(&ops.sm);
        let proj_mu = ops.mp.dot(&ops.mm);
        LindbladGenerator {
            params,
            hamiltonian,
            sm_sigma: ops.sm,
            sp_sigma: ops.sp,
            proj_sigma,
            mm_mu: ops.mm,
            mp_mu: ops.mp,
            proj_mu,
        }
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    /// Right-hand side `d rho / d tau` of the master equation.
    pub fn apply(&self, rho: &Array2<C64>) -> Array2<C64> {
        let g1 = 0.5 * (self.params.gamma() - self.params.kappa());
        let g2 = 0.5 * (self.params.gamma() + self.params.kappa());
        let comm = self.hamiltonian.dot(rho) - rho.dot(&self.hamiltonian);
        let mut out = comm * C64::new(0.0, -0.5);
        // qubit 1 decay
        let jump = self.sm_sigma.dot(rho).dot(&self.sp_sigma);
        let anti = self.proj_sigma.dot(rho) + rho.dot(&self.proj_sigma);
        out = out + (jump * c(2.0) - anti) * c(g1);
        // qubit 2 decay
        let jump = self.mm_mu.dot(rho).dot(&self.mp_mu);
        let anti = self.proj_mu.dot(rho) + rho.dot(&self.proj_mu);
        out = out + (jump * c(2.0) - anti) * c(g2);
        out
    }
}

type Mat4 = [[C64; 4]; 4];

fn to_mat4(rho: &Array2<C64>) -> Mat4 {
    let mut out = [[C64::new(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = rho[[i, j]];
        }
    }
    out
}

fn from_mat4(m: &Mat4) -> Array2<C64> {
    Array2::from_shape_fn((4, 4), |(i, j)| m[i][j])
}

impl LindbladGenerator {
    /// Allocation-free expansion of the generator on the fixed basis, for
    /// the inner RK4 loop. Agrees with [`LindbladGenerator::apply`] to
    /// machine precision (tested on generic complex matrices).
    fn apply_fused(&self, rho: &Mat4) -> Mat4 {
        let g1 = 0.5 * (self.params.gamma() - self.params.kappa());
        let g2 = 0.5 * (self.params.gamma() + self.params.kappa());
        let half_i = C64::new(0.0, -0.5);
        // occupation masks of the two excited-state projectors
        const P1: [f64; 4] = [1.0, 1.0, 0.0, 0.0];
        const P2: [f64; 4] = [1.0, 0.0, 1.0, 0.0];
        let mut out = [[C64::new(0.0, 0.0); 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                // swap Hamiltonian exchanges the single-excitation rows/cols
                let hr = match i {
                    1 => rho[2][j],
                    2 => rho[1][j],
                    _ => C64::new(0.0, 0.0),
                };
                let rh = match j {
                    1 => rho[i][2],
                    2 => rho[i][1],
                    _ => C64::new(0.0, 0.0),
                };
                out[i][j] = half_i * (hr - rh)
                    - c(g1 * (P1[i] + P1[j]) + g2 * (P2[i] + P2[j])) * rho[i][j];
            }
        }
        // jump terms: sigma lowers 0 -> 2, 1 -> 3; mu lowers 0 -> 1, 2 -> 3
        out[2][2] += c(2.0 * g1) * rho[0][0];
        out[2][3] += c(2.0 * g1) * rho[0][1];
        out[3][2] += c(2.0 * g1) * rho[1][0];
        out[3][3] += c(2.0 * g1) * rho[1][1];
        out[1][1] += c(2.0 * g2) * rho[0][0];
        out[1][3] += c(2.0 * g2) * rho[0][2];
        out[3][1] += c(2.0 * g2) * rho[2][0];
        out[3][3] += c(2.0 * g2) * rho[2][2];
        out
    }
}

/// Fixed-step classical Runge-Kutta stepper.
#[derive(Debug, Clone, Copy)]
pub struct Stepper {
    pub dt: f64,
}

impl Stepper {
    pub fn new(dt: f64) -> Result<Self> {
        if dt <= 0.0 {
            return Err(Error::ConstraintViolation(format!("dt must be positive, got {dt}")));
        }
        Ok(Stepper { dt })
    }

    /// One RK4 step of the master equation.
    pub fn step(&self, g: &LindbladGenerator, rho: &Array2<C64>) -> Array2<C64> {
        let mut m = to_mat4(rho);
        self.step_fused(g, &mut m);
        from_mat4(&m)
    }

    fn step_fused(&self, g: &LindbladGenerator, rho: &mut Mat4) {
        let h = self.dt;
        let k1 = g.apply_fused(rho);
        let mut tmp = *rho;
        axpy(&mut tmp, 0.5 * h, &k1);
        let k2 = g.apply_fused(&tmp);
        tmp = *rho;
        axpy(&mut tmp, 0.5 * h, &k2);
        let k3 = g.apply_fused(&tmp);
        tmp = *rho;
        axpy(&mut tmp, h, &k3);
        let k4 = g.apply_fused(&tmp);
        for i in 0..4 {
            for j in 0..4 {
                rho[i][j] += c(h / 6.0)
                    * (k1[i][j] + 2.0 * k2[i][j] + 2.0 * k3[i][j] + k4[i][j]);
            }
        }
    }
}

fn axpy(dst: &mut Mat4, factor: f64, src: &Mat4) {
    for i in 0..4 {
        for j in 0..4 {
            dst[i][j] += c(factor) * src[i][j];
        }
    }
}

fn rehermitize(rho: &mut Mat4) {
    for i in 0..4 {
        for j in i..4 {
            let avg = 0.5 * (rho[i][j] + rho[j][i].conj());
            rho[i][j] = avg;
            rho[j][i] = avg.conj();
        }
    }
}

/// Dense RK4 trajectory of the master equation from `rho0` to `tau_end`.
///
/// Fails with [`Error::StepTooLarge`] if the trace drifts by more than
/// `1e-9` along the way. The state is re-symmetrized every 100 steps to
/// bound round-off drift of hermiticity.
pub fn integrate(
    g: &LindbladGenerator,
    rho0: &DensityMatrix,
    tau_end: f64,
    dt: f64,
) -> Result<Vec<(f64, DensityMatrix)>> {
    if dt > 1e-2 {
        return Err(Error::ConstraintViolation(format!(
            "oracle step must satisfy dt <= 1e-2, got {dt}"
        )));
    }
    if tau_end < 0.0 {
        return Err(Error::ConstraintViolation(format!("tau_end must be >= 0, got {tau_end}")));
    }
    // hit tau_end exactly with a step no larger than requested
    let n_steps = (tau_end / dt).ceil().max(1.0) as usize;
    let h = if tau_end > 0.0 { tau_end / n_steps as f64 } else { 0.0 };
    let stepper = Stepper::new(if h > 0.0 { h } else { dt })?;
    let mut rho = to_mat4(rho0.as_array());
    let mut out = Vec::with_capacity(n_steps + 1);
    out.push((0.0, DensityMatrix::from_array_unchecked(from_mat4(&rho))));
    if tau_end == 0.0 {
        return Ok(out);
    }
    for k in 1..=n_steps {
        stepper.step_fused(g, &mut rho);
        if k % 100 == 0 {
            rehermitize(&mut rho);
        }
        let tr: C64 = (0..4).map(|i| rho[i][i]).sum();
        if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
            return Err(Error::StepTooLarge(format!(
                "trace drift {:e} at tau = {}",
                (tr.re - 1.0).abs().max(tr.im.abs()),
                k as f64 * h
            )));
        }
        out.push((k as f64 * h, DensityMatrix::from_array_unchecked(from_mat4(&rho))));
    }
    Ok(out)
}

/// RK4 endpoint only; same stepping as [`integrate`] without storing the
/// trajectory. Used by the equivalence tests and the CLI oracle check.
pub fn integrate_endpoint(
    g: &LindbladGenerator,
    rho0: &Array2<C64>,
    tau_end: f64,
    dt: f64,
) -> Result<Array2<C64>> {
    if tau_end <= 0.0 {
        return Ok(rho0.clone());
    }
    let n_steps = (tau_end / dt).ceil().max(1.0) as usize;
    let stepper = Stepper::new(tau_end / n_steps as f64)?;
    let mut rho = to_mat4(rho0);
    for k in 1..=n_steps {
        stepper.step_fused(g, &mut rho);
        if k % 100 == 0 {
            rehermitize(&mut rho);
        }
    }
    Ok(from_mat4(&rho))
}

/// General two-qubit concurrence: with `R = rho (sy my) rho* (sy my)` and
/// `lambda_i` the descending eigenvalues of `R`,
/// `C = max(0, sqrt(l1) - sqrt(l2) - sqrt(l3) - sqrt(l4))`.
///
/// The eigenvalues are obtained from the Hermitian reformulation
/// `sqrt(rho) (sy my) rho* (sy my) sqrt(rho)`, which shares the spectrum of
/// `R` and keeps the computation inside the Jacobi solver.
pub fn wootters_concurrence(rho: &DensityMatrix) -> Result<f64> {
    let rho = rho.as_array();
    let y = spin_flip();
    let (lam, v) = hermitian_eig(rho)?;
    // sqrt(rho) from the eigendecomposition, clamping round-off negatives
    let mut sqrt_rho = Array2::<C64>::zeros((4, 4));
    for k in 0..4 {
        let s = lam[k].max(0.0).sqrt();
        for i in 0..4 {
            for j in 0..4 {
                sqrt_rho[[i, j]] += v[[i, k]] * c(s) * v[[j, k]].conj();
            }
        }
    }
    let rho_tilde = y.dot(&rho.mapv(|z| z.conj())).dot(&y);
    let b = sqrt_rho.dot(&rho_tilde).dot(&sqrt_rho);
    let (mut ev, _) = hermitian_eig(&b)?;
    ev.reverse(); // descending
    let roots: Vec<f64> = ev.iter().map(|&x| x.max(0.0).sqrt()).collect();
    Ok((roots[0] - roots[1] - roots[2] - roots[3]).max(0.0))
}
