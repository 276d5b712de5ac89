//! Dense complex linear algebra for the small (2x2 .. 5x5) matrices used by
//! the oracle and the spectral analysis: Hessenberg reduction, shifted QR,
//! eigenvectors by back-substitution, a cyclic Jacobi solver for Hermitian
//! matrices, and a Pade scaling-and-squaring matrix exponential.
//!
//! Everything here is self-contained so the eigenstructure results can be
//! tested against the closed forms without pulling in an external solver.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::{Error, Result};

const EPS: f64 = f64::EPSILON;

pub fn identity(n: usize) -> Array2<C64> {
    Array2::from_diag_elem(n, C64::new(1.0, 0.0))
}

pub fn adjoint(a: &Array2<C64>) -> Array2<C64> {
    a.t().mapv(|z| z.conj())
}

pub fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::zeros((ra * rb, ca * cb));
    for i in 0..ra {
        for j in 0..ca {
            for k in 0..rb {
                for l in 0..cb {
                    out[[i * rb + k, j * cb + l]] = a[[i, j]] * b[[k, l]];
                }
            }
        }
    }
    out
}

/// Max column sum of absolute values.
pub fn one_norm(a: &Array2<C64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..a.ncols() {
        let s: f64 = (0..a.nrows()).map(|i| a[[i, j]].norm()).sum();
        best = best.max(s);
    }
    best
}

pub fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    let mut worst = 0.0f64;
    for (x, y) in a.iter().zip(b.iter()) {
        worst = worst.max((x - y).norm());
    }
    worst
}

pub fn vec_norm(v: &Array1<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Coalescence metric between directions: `1 - |<u,v>|` on normalized vectors.
pub fn vec_angle(u: &Array1<C64>, v: &Array1<C64>) -> f64 {
    let nu = vec_norm(u);
    let nv = vec_norm(v);
    if nu == 0.0 || nv == 0.0 {
        return 1.0;
    }
    let dot: C64 = u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
    (1.0 - dot.norm() / (nu * nv)).max(0.0)
}

/// Householder reduction to upper Hessenberg form: `a = q h q^H`.
fn hessenberg(a: &Array2<C64>) -> (Array2<C64>, Array2<C64>) {
    let n = a.nrows();
    let mut h = a.clone();
    let mut q = identity(n);
    for k in 0..n.saturating_sub(2) {
        // Householder vector annihilating h[k+2.., k].
        let mut x: Vec<C64> = (k + 1..n).map(|i| h[[i, k]]).collect();
        let xn = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xn < 1e-300 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { C64::new(1.0, 0.0) };
        let alpha = -phase * xn;
        x[0] -= alpha;
        let vn = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vn < 1e-300 {
            continue;
        }
        for xi in x.iter_mut() {
            *xi /= vn;
        }
        // h <- (I - 2 v v^H) h (I - 2 v v^H), acting on rows/cols k+1..
        for j in 0..n {
            let dot: C64 = (0..x.len()).map(|i| x[i].conj() * h[[k + 1 + i, j]]).sum();
            for i in 0..x.len() {
                let d = 2.0 * x[i] * dot;
                h[[k + 1 + i, j]] -= d;
            }
        }
        for i in 0..n {
            let dot: C64 = (0..x.len()).map(|j| h[[i, k + 1 + j]] * x[j]).sum();
            for j in 0..x.len() {
                let d = 2.0 * dot * x[j].conj();
                h[[i, k + 1 + j]] -= d;
            }
        }
        for i in 0..n {
            let dot: C64 = (0..x.len()).map(|j| q[[i, k + 1 + j]] * x[j]).sum();
            for j in 0..x.len() {
                let d = 2.0 * dot * x[j].conj();
                q[[i, k + 1 + j]] -= d;
            }
        }
        // clean the annihilated entries
        h[[k + 1, k]] = alpha;
        for i in k + 2..n {
            h[[i, k]] = C64::new(0.0, 0.0);
        }
    }
    (h, q)
}

fn eig2x2(a: C64, b: C64, c: C64, d: C64) -> (C64, C64) {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr * 0.25 - det).sqrt();
    (tr * 0.5 + disc, tr * 0.5 - disc)
}

/// Complex Schur decomposition `a = z t z^H` with `t` upper triangular,
/// by explicitly shifted QR iteration on the Hessenberg form.
pub fn schur(a: &Array2<C64>) -> Result<(Array2<C64>, Array2<C64>)> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "schur requires a square matrix");
    if n == 0 {
        return Ok((a.clone(), a.clone()));
    }
    let scale = one_norm(a).max(1e-300);
    let (mut h, mut z) = hessenberg(a);
    let mut hi = n - 1;
    let mut iters = 0usize;
    let max_iters = 60 * n * n + 120;
    loop {
        // deflate negligible subdiagonals
        for i in 0..n - 1 {
            let s = h[[i, i]].norm() + h[[i + 1, i + 1]].norm();
            if h[[i + 1, i]].norm() <= EPS * (s + scale) {
                h[[i + 1, i]] = C64::new(0.0, 0.0);
            }
        }
        while hi > 0 && h[[hi, hi - 1]].norm() == 0.0 {
            hi -= 1;
        }
        if hi == 0 {
            break;
        }
        let mut lo = hi;
        while lo > 0 && h[[lo, lo - 1]].norm() != 0.0 {
            lo -= 1;
        }
        iters += 1;
        if iters > max_iters {
            return Err(Error::Numerical("QR iteration failed to converge".into()));
        }
        // Wilkinson shift from the trailing 2x2 of the active block, with an
        // occasional exceptional shift to break symmetric stalls.
        let mu = if iters % 16 == 0 {
            h[[hi, hi]] + C64::new(1.5, 0.5) * h[[hi, hi - 1]].norm()
        } else {
            let (e1, e2) = eig2x2(
                h[[hi - 1, hi - 1]],
                h[[hi - 1, hi]],
                h[[hi, hi - 1]],
                h[[hi, hi]],
            );
            if (e1 - h[[hi, hi]]).norm() <= (e2 - h[[hi, hi]]).norm() {
                e1
            } else {
                e2
            }
        };
        // explicit QR step on the window [lo..=hi] via Givens rotations
        let m = hi - lo + 1;
        let mut r = Array2::<C64>::zeros((m, m));
        for i in 0..m {
            for j in 0..m {
                r[[i, j]] = h[[lo + i, lo + j]];
            }
            r[[i, i]] -= mu;
        }
        // accumulate Q of the window
        let mut qw = identity(m);
        for k in 0..m - 1 {
            let f = r[[k, k]];
            let g = r[[k + 1, k]];
            let d = (f.norm_sqr() + g.norm_sqr()).sqrt();
            if d < 1e-300 {
                continue;
            }
            let cs = f.norm() / d;
            let ph = if f.norm() > 0.0 { f / f.norm() } else { C64::new(1.0, 0.0) };
            let sn = ph * g.conj() / d;
            // G^H = [[c, s],[ -s^*, c]] acting on rows k,k+1 (premultiply)
            for j in 0..m {
                let t1 = r[[k, j]];
                let t2 = r[[k + 1, j]];
                r[[k, j]] = cs * t1 + sn * t2;
                r[[k + 1, j]] = -sn.conj() * t1 + cs * t2;
            }
            // accumulate Q = G_1^H G_2^H ... by right-multiplying with G_k^H
            for i in 0..m {
                let t1 = qw[[i, k]];
                let t2 = qw[[i, k + 1]];
                qw[[i, k]] = cs * t1 + sn.conj() * t2;
                qw[[i, k + 1]] = -sn * t1 + cs * t2;
            }
        }
        // window update: h_w = R Q + mu I
        let rq = r.dot(&qw);
        for i in 0..m {
            for j in 0..m {
                h[[lo + i, lo + j]] = rq[[i, j]];
            }
            h[[lo + i, lo + i]] += mu;
        }
        // couple the window to the rest of the matrix and accumulate z
        if lo > 0 {
            for i in 0..lo {
                let row: Vec<C64> = (0..m).map(|j| h[[i, lo + j]]).collect();
                for j in 0..m {
                    h[[i, lo + j]] = (0..m).map(|k| row[k] * qw[[k, j]]).sum();
                }
            }
        }
        if hi + 1 < n {
            for j in hi + 1..n {
                let col: Vec<C64> = (0..m).map(|i| h[[lo + i, j]]).collect();
                for i in 0..m {
                    h[[lo + i, j]] = (0..m).map(|k| qw[[k, i]].conj() * col[k]).sum();
                }
            }
        }
        for i in 0..n {
            let row: Vec<C64> = (0..m).map(|j| z[[i, lo + j]]).collect();
            for j in 0..m {
                z[[i, lo + j]] = (0..m).map(|k| row[k] * qw[[k, j]]).sum();
            }
        }
    }
    // zero the strictly lower part
    for i in 0..n {
        for j in 0..i {
            h[[i, j]] = C64::new(0.0, 0.0);
        }
    }
    Ok((h, z))
}

pub fn eigenvalues(a: &Array2<C64>) -> Result<Vec<C64>> {
    let (t, _) = schur(a)?;
    Ok((0..a.nrows()).map(|i| t[[i, i]]).collect())
}

/// Right eigenpairs of a general complex matrix.
pub struct Eigen {
    pub values: Vec<C64>,
    /// Unit-norm right eigenvectors, same order as `values`.
    pub vectors: Vec<Array1<C64>>,
}

/// Eigenvalues and right eigenvectors via Schur form plus back-substitution.
///
/// Vectors belonging to a numerically repeated eigenvalue are solved with
/// the other repeats' components pinned to zero, so a semisimple group
/// comes out as an independent basis of its eigenspace. The grouping
/// tolerance sits well above the round-off scatter of exact degeneracies
/// and well below the scatter of defective clusters, which behaves like
/// `eps^(1/m)` and must stay unpinned for coalescence measurements.
pub fn eig(a: &Array2<C64>) -> Result<Eigen> {
    let n = a.nrows();
    let (t, z) = schur(a)?;
    let values: Vec<C64> = (0..n).map(|i| t[[i, i]]).collect();
    let scale = one_norm(a).max(1e-300);
    let group_tol = 1e-8 * scale;
    let mut vectors = Vec::with_capacity(n);
    for i in 0..n {
        let lam = values[i];
        let mut y = vec![C64::new(0.0, 0.0); n];
        y[i] = C64::new(1.0, 0.0);
        for j in (0..i).rev() {
            if (values[j] - lam).norm() <= group_tol {
                // same eigenvalue to machine precision: pin to zero to get an
                // independent basis vector of the shared eigenspace
                y[j] = C64::new(0.0, 0.0);
                continue;
            }
            let mut s = C64::new(0.0, 0.0);
            for k in j + 1..=i {
                s += t[[j, k]] * y[k];
            }
            let mut piv = t[[j, j]] - lam;
            if piv.norm() < EPS * scale {
                piv = C64::new(EPS * scale, 0.0);
            }
            y[j] = -s / piv;
        }
        let mut v = Array1::<C64>::zeros(n);
        for r in 0..n {
            v[r] = (0..=i).map(|k| z[[r, k]] * y[k]).sum();
        }
        let nv = vec_norm(&v);
        if nv > 0.0 {
            v.mapv_inplace(|x| x / nv);
        }
        vectors.push(v);
    }
    Ok(Eigen { values, vectors })
}

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns) of a
/// Hermitian matrix by cyclic complex Jacobi rotations.
pub fn hermitian_eig(a: &Array2<C64>) -> Result<(Vec<f64>, Array2<C64>)> {
    let n = a.nrows();
    let mut m = a.clone();
    let mut v = identity(n);
    let norm = one_norm(a).max(1e-300);
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                off += m[[p, q]].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-15 * norm {
            let lam: Vec<f64> = (0..n).map(|i| m[[i, i]].re).collect();
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&i, &j| lam[i].partial_cmp(&lam[j]).unwrap());
            let values: Vec<f64> = idx.iter().map(|&i| lam[i]).collect();
            let mut vecs = Array2::<C64>::zeros((n, n));
            for (jnew, &jold) in idx.iter().enumerate() {
                for i in 0..n {
                    vecs[[i, jnew]] = v[[i, jold]];
                }
            }
            return Ok((values, vecs));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[[p, q]];
                if apq.norm() <= 1e-30 * norm {
                    continue;
                }
                let phase = apq / apq.norm();
                let tau = (m[[q, q]].re - m[[p, p]].re) / (2.0 * apq.norm());
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = phase * (t * c);
                // rows/cols p,q of the unitary J: [[c, s],[-s^*, c]]
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s.conj() * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s.conj() * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s.conj() * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    Err(Error::Numerical("Jacobi sweep failed to converge".into()))
}

/// Singular values (descending) via the Hermitian eigenvalues of `a^H a`.
pub fn singular_values(a: &Array2<C64>) -> Result<Vec<f64>> {
    let ata = adjoint(a).dot(a);
    let (lam, _) = hermitian_eig(&ata)?;
    let mut s: Vec<f64> = lam.iter().map(|&x| x.max(0.0).sqrt()).collect();
    s.reverse();
    Ok(s)
}

/// Numerical rank with an absolute singular-value threshold.
pub fn rank_abs(a: &Array2<C64>, abs_tol: f64) -> Result<usize> {
    Ok(singular_values(a)?.iter().filter(|&&s| s > abs_tol).count())
}

/// Orthonormal basis of the (numerical) null space of `a`.
pub fn null_space(a: &Array2<C64>, abs_tol: f64) -> Result<Vec<Array1<C64>>> {
    let ata = adjoint(a).dot(a);
    let (lam, v) = hermitian_eig(&ata)?;
    let mut out = Vec::new();
    for (j, &l) in lam.iter().enumerate() {
        if l.max(0.0).sqrt() <= abs_tol {
            out.push(v.column(j).to_owned());
        }
    }
    Ok(out)
}

/// Solve `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve(a: &Array2<C64>, b: &Array2<C64>) -> Result<Array2<C64>> {
    let n = a.nrows();
    let m = b.ncols();
    let mut aug = Array2::<C64>::zeros((n, n + m));
    for i in 0..n {
        for j in 0..n {
            aug[[i, j]] = a[[i, j]];
        }
        for j in 0..m {
            aug[[i, n + j]] = b[[i, j]];
        }
    }
    for col in 0..n {
        let mut pr = col;
        let mut pv = aug[[col, col]].norm();
        for r in col + 1..n {
            if aug[[r, col]].norm() > pv {
                pv = aug[[r, col]].norm();
                pr = r;
            }
        }
        if pv < 1e-300 {
            return Err(Error::Numerical("singular system in solve".into()));
        }
        if pr != col {
            for j in 0..n + m {
                let t = aug[[col, j]];
                aug[[col, j]] = aug[[pr, j]];
                aug[[pr, j]] = t;
            }
        }
        let piv = aug[[col, col]];
        for r in col + 1..n {
            let f = aug[[r, col]] / piv;
            for j in col..n + m {
                let t = aug[[col, j]];
                aug[[r, j]] -= f * t;
            }
        }
    }
    let mut x = Array2::<C64>::zeros((n, m));
    for col in (0..n).rev() {
        for j in 0..m {
            let mut s = aug[[col, n + j]];
            for k in col + 1..n {
                s -= aug[[col, k]] * x[[k, j]];
            }
            x[[col, j]] = s / aug[[col, col]];
        }
    }
    Ok(x)
}

// [6/6] Pade coefficients of the exponential, p(x)/q(x) with q(x) = p(-x).
const PADE6: [f64; 7] = [
    1.0,
    0.5,
    5.0 / 44.0,
    1.0 / 66.0,
    1.0 / 792.0,
    1.0 / 15840.0,
    1.0 / 665280.0,
];
const PADE6_THETA: f64 = 0.248;

/// Matrix exponential by scaling-and-squaring with a degree-6 Pade
/// approximant. Correct on defective matrices, unlike eigendecomposition.
pub fn expm(a: &Array2<C64>) -> Result<Array2<C64>> {
    let n = a.nrows();
    let norm = one_norm(a);
    let s = if norm > PADE6_THETA {
        (norm / PADE6_THETA).log2().ceil() as u32
    } else {
        0
    };
    let factor = C64::new(1.0 / (1u64 << s) as f64, 0.0);
    let b = a * factor;
    let eye = identity(n);
    let b2 = b.dot(&b);
    let b4 = b2.dot(&b2);
    let b6 = b2.dot(&b4);
    let c = |k: usize| C64::new(PADE6[k], 0.0);
    let u_inner = &eye * c(1) + &b2 * c(3) + &b4 * c(5);
    let u = b.dot(&u_inner);
    let v = &eye * c(0) + &b2 * c(2) + &b4 * c(4) + &b6 * c(6);
    let num = &v + &u;
    let den = &v - &u;
    let mut x = solve(&den, &num)?;
    for _ in 0..s {
        x = x.dot(&x);
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_matrix(n: usize, seed: u64) -> Array2<C64> {
        // small deterministic LCG; avoids pulling rand into the unit tests
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        Array2::from_shape_fn((n, n), |_| c(next(), next()))
    }

    #[test]
    fn schur_reconstructs_matrix() {
        for seed in 0..8 {
            for n in [2usize, 3, 4, 5] {
                let a = random_matrix(n, seed * 31 + n as u64);
                let (t, z) = schur(&a).unwrap();
                let rec = z.dot(&t).dot(&adjoint(&z));
                assert!(max_abs_diff(&rec, &a) < 1e-12, "n={n} seed={seed}");
                let ortho = adjoint(&z).dot(&z);
                assert!(max_abs_diff(&ortho, &identity(n)) < 1e-13);
            }
        }
    }

    #[test]
    fn eig_residuals_small() {
        for seed in 0..8 {
            let a = random_matrix(5, 1000 + seed);
            let e = eig(&a).unwrap();
            for (lam, v) in e.values.iter().zip(e.vectors.iter()) {
                let av = a.dot(v);
                let res: f64 = av
                    .iter()
                    .zip(v.iter())
                    .map(|(x, y)| (x - lam * y).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                assert!(res < 1e-10, "residual {res}");
            }
        }
    }

    #[test]
    fn eig_diagonal_exact() {
        let mut a = Array2::zeros((3, 3));
        a[[0, 0]] = c(1.0, 0.0);
        a[[1, 1]] = c(-2.0, 0.5);
        a[[2, 2]] = c(0.25, -1.0);
        let mut vals = eigenvalues(&a).unwrap();
        vals.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap());
        assert!((vals[0] - c(-2.0, 0.5)).norm() < 1e-14);
        assert!((vals[1] - c(0.25, -1.0)).norm() < 1e-14);
        assert!((vals[2] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn hermitian_eig_known() {
        // Pauli x: eigenvalues -1, +1
        let mut a = Array2::zeros((2, 2));
        a[[0, 1]] = c(1.0, 0.0);
        a[[1, 0]] = c(1.0, 0.0);
        let (lam, v) = hermitian_eig(&a).unwrap();
        assert!((lam[0] + 1.0).abs() < 1e-14 && (lam[1] - 1.0).abs() < 1e-14);
        let rec = v.dot(&Array2::from_diag(
            &Array1::from(lam.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>()),
        ))
        .dot(&adjoint(&v));
        assert!(max_abs_diff(&rec, &a) < 1e-13);
    }

    #[test]
    fn hermitian_eig_random() {
        for seed in 0..6 {
            let g = random_matrix(4, 77 + seed);
            let a = &g + &adjoint(&g);
            let (lam, v) = hermitian_eig(&a).unwrap();
            for j in 0..4 {
                let vj = v.column(j).to_owned();
                let av = a.dot(&vj);
                let res: f64 = av
                    .iter()
                    .zip(vj.iter())
                    .map(|(x, y)| (x - c(lam[j], 0.0) * y).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                assert!(res < 1e-12);
            }
        }
    }

    #[test]
    fn expm_zero_and_diagonal() {
        let z = Array2::<C64>::zeros((4, 4));
        assert!(max_abs_diff(&expm(&z).unwrap(), &identity(4)) < 1e-15);
        let mut a = Array2::zeros((2, 2));
        a[[0, 0]] = c(1.0, 0.0);
        a[[1, 1]] = c(-3.0, 2.0);
        let e = expm(&a).unwrap();
        assert!((e[[0, 0]] - c(1.0, 0.0).exp()).norm() < 1e-13);
        assert!((e[[1, 1]] - c(-3.0, 2.0).exp()).norm() < 1e-13);
    }

    #[test]
    fn expm_vs_series_random() {
        for seed in 0..5 {
            let a = random_matrix(4, 5 + seed) * c(2.0, 0.0);
            let e = expm(&a).unwrap();
            // plain Taylor series as an independent reference
            let mut term = identity(4);
            let mut sum = identity(4);
            for k in 1..60 {
                term = term.dot(&a) * c(1.0 / k as f64, 0.0);
                sum = &sum + &term;
            }
            assert!(max_abs_diff(&e, &sum) < 1e-11);
        }
    }

    #[test]
    fn expm_jordan_block() {
        // exp of a nilpotent Jordan block is the truncated series, exactly
        let mut a = Array2::zeros((3, 3));
        a[[0, 1]] = c(1.0, 0.0);
        a[[1, 2]] = c(1.0, 0.0);
        let e = expm(&a).unwrap();
        assert!((e[[0, 1]] - c(1.0, 0.0)).norm() < 1e-14);
        assert!((e[[0, 2]] - c(0.5, 0.0)).norm() < 1e-14);
        assert!((e[[1, 2]] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn rank_and_null_space() {
        let mut a = Array2::<C64>::zeros((3, 3));
        a[[0, 0]] = c(1.0, 0.0);
        a[[0, 1]] = c(2.0, 0.0);
        a[[1, 0]] = c(2.0, 0.0);
        a[[1, 1]] = c(4.0, 0.0);
        a[[2, 2]] = c(1.0, 0.0);
        assert_eq!(rank_abs(&a, 1e-10).unwrap(), 2);
        let ns = null_space(&a, 1e-10).unwrap();
        assert_eq!(ns.len(), 1);
        let av = a.dot(&ns[0]);
        assert!(vec_norm(&av) < 1e-12);
    }

    #[test]
    fn solve_roundtrip() {
        for seed in 0..4 {
            let a = random_matrix(5, 400 + seed);
            let b = random_matrix(5, 500 + seed);
            let x = solve(&a, &b).unwrap();
            assert!(max_abs_diff(&a.dot(&x), &b) < 1e-11);
        }
    }
}
