//! Eigenstructure analysis of the three non-Hermitian generators: the 5x5
//! block over `(a, x, y, z, d)`, the 4x4 parity-time matrix over the
//! correlation vector, and the 2x2 damped-oscillator companion matrix.
//!
//! Exceptional points are located by eigenvector coalescence and classified
//! by the rank sequence of `(G - lambda I)^j`, which separates defective
//! (Jordan-block) degeneracy from diabolic degeneracy that eigenvalue
//! clustering alone cannot distinguish.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::linalg::{
    self, adjoint, eig, expm, identity, null_space, one_norm, rank_abs, vec_angle, vec_norm,
};
use crate::state::Params;
use crate::{Error, Result};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn ci(im: f64) -> C64 {
    C64::new(0.0, im)
}

/// Half-width of the parameter window treated as exactly critical.
pub const EP_KAPPA_TOL: f64 = 1e-7;
/// Relative rank tolerance of the Jordan-structure test.
pub const RANK_TOL: f64 = 1e-7;

/// Spectral phase of a generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Oscillatory regime; the gauge-transformed spectrum is real.
    PtSymmetric,
    /// Purely exponential regime; a complex-conjugate pair has appeared.
    Broken,
    /// On the exceptional point within [`EP_KAPPA_TOL`].
    Critical,
}

fn phase_of_kappa(kappa: f64) -> Phase {
    if (kappa.abs() - 1.0).abs() <= EP_KAPPA_TOL {
        Phase::Critical
    } else if kappa.abs() < 1.0 {
        Phase::PtSymmetric
    } else {
        Phase::Broken
    }
}

/// The 5x5 evolution generator of the vector `(a, x, y, z, d)`.
#[derive(Debug, Clone)]
pub struct GeneratorL {
    gamma: f64,
    kappa: f64,
    matrix: Array2<C64>,
}

impl GeneratorL {
    pub fn new(p: &Params) -> Self {
        Self::from_rates(p.gamma(), p.kappa())
    }

    /// Build directly from rates; used by parameter scans that step outside
    /// the physical region `|kappa| <= gamma`.
    pub fn from_rates(gamma: f64, kappa: f64) -> Self {
        let mut m = Array2::zeros((5, 5));
        m[[0, 0]] = c(-2.0 * gamma);
        m[[1, 0]] = c(2.0 * gamma);
        m[[1, 1]] = c(-gamma);
        m[[1, 2]] = c(kappa);
        m[[2, 0]] = c(2.0 * kappa);
        m[[2, 1]] = c(kappa);
        m[[2, 2]] = c(-gamma);
        m[[2, 3]] = ci(1.0);
        m[[3, 2]] = ci(1.0);
        m[[3, 3]] = c(-gamma);
        m[[4, 1]] = c(gamma);
        m[[4, 2]] = c(-kappa);
        GeneratorL { gamma, kappa, matrix: m }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    /// Closed-form eigenvalues `{0, -2g, -g, -g - D, -g + D}` with
    /// `D = sqrt(kappa^2 - 1)`.
    pub fn closed_form_eigenvalues(&self) -> [C64; 5] {
        let d = C64::new(self.kappa * self.kappa - 1.0, 0.0).sqrt();
        let g = c(self.gamma);
        [c(0.0), -2.0 * g, -g, -g - d, -g + d]
    }

    /// Closed-form right eigenvectors, same order as the eigenvalues.
    pub fn closed_form_eigenvectors(&self) -> [Array1<C64>; 5] {
        let k = self.kappa;
        let d = C64::new(k * k - 1.0, 0.0).sqrt();
        [
            Array1::from(vec![c(0.0), c(0.0), c(0.0), c(0.0), c(1.0)]),
            Array1::from(vec![c(1.0), c(-2.0), c(0.0), c(0.0), c(1.0)]),
            Array1::from(vec![c(0.0), c(1.0), c(0.0), ci(k), c(-1.0)]),
            Array1::from(vec![c(0.0), c(k), -d, ci(1.0), c(-k)]),
            Array1::from(vec![c(0.0), c(k), d, ci(1.0), c(-k)]),
        ]
    }
}

/// The 4x4 gauge-transformed evolution matrix of the correlation vector
/// `(<s+m+>, <s+m->, <s-m+>, <s-m->)`; parity `P = sigma_x mu_x` with
/// complex conjugation as time reversal leaves it invariant.
#[derive(Debug, Clone)]
pub struct GeneratorM {
    kappa: f64,
    matrix: Array2<C64>,
}

impl GeneratorM {
    pub fn new(kappa: f64) -> Self {
        let mut m = Array2::zeros((4, 4));
        m[[0, 0]] = ci(kappa);
        m[[0, 1]] = c(0.5);
        m[[0, 2]] = c(-0.5);
        m[[1, 0]] = c(0.5);
        m[[1, 3]] = c(-0.5);
        m[[2, 0]] = c(-0.5);
        m[[2, 3]] = c(0.5);
        m[[3, 1]] = c(-0.5);
        m[[3, 2]] = c(0.5);
        m[[3, 3]] = ci(-kappa);
        GeneratorM { kappa, matrix: m }
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    /// `P conj(M) P` with the antidiagonal parity; equals `M` entrywise.
    pub fn pt_conjugated(&self) -> Array2<C64> {
        let n = 4;
        let mut out = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                out[[i, j]] = self.matrix[[n - 1 - i, n - 1 - j]].conj();
            }
        }
        out
    }
}

/// Companion matrix `((0, 1), (-k, -gamma))` of the damped oscillator with
/// unit mass; its eigenvalues coalesce at critical damping `gamma^2 = 4k`.
#[derive(Debug, Clone)]
pub struct DampedOscillator {
    pub gamma_c: f64,
    pub spring_k: f64,
    matrix: Array2<C64>,
}

impl DampedOscillator {
    pub fn new(gamma_c: f64, spring_k: f64) -> Result<Self> {
        if spring_k <= 0.0 || gamma_c < 0.0 {
            return Err(Error::ConstraintViolation(format!(
                "need spring_k > 0 and gamma_c >= 0, got k={spring_k}, gamma={gamma_c}"
            )));
        }
        let mut m = Array2::zeros((2, 2));
        m[[0, 1]] = c(1.0);
        m[[1, 0]] = c(-spring_k);
        m[[1, 1]] = c(-gamma_c);
        Ok(DampedOscillator { gamma_c, spring_k, matrix: m })
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }
}

/// A group of near-degenerate eigenvalues and its coalescence metrics.
#[derive(Debug, Clone)]
pub struct CoalescenceCluster {
    /// Indices into the report's eigenvalue list.
    pub indices: Vec<usize>,
    /// Largest pairwise eigenvalue distance inside the cluster.
    pub eigenvalue_gap: f64,
    /// Smallest pairwise eigenvector angle inside the cluster.
    pub eigenvector_angle: f64,
}

/// Full eigenstructure report for one generator at one parameter point.
#[derive(Debug, Clone)]
pub struct SpectralReport {
    pub eigenvalues: Vec<C64>,
    /// Right eigenvectors; at a detected exceptional point the defective
    /// eigenvalue's slots carry the Jordan chain instead.
    pub right_vectors: Vec<Array1<C64>>,
    /// Left eigenvectors, biorthogonally normalized against the right set
    /// away from exceptional points.
    pub left_vectors: Vec<Array1<C64>>,
    /// `max |v_i^H u_j - delta_ij|`; `NaN` at exceptional points, where the
    /// eigenvector basis is incomplete and the chain is reported instead.
    pub biorthogonality_residual: f64,
    pub coalescence: Vec<CoalescenceCluster>,
    /// Largest Jordan block size at the coalesced eigenvalue, when the
    /// report sits on an exceptional point.
    pub ep_order: Option<usize>,
    pub phase: Phase,
}

/// Cluster eigenvalues whose pairwise distance is below `tol`.
fn cluster_eigenvalues(values: &[C64], tol: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut assigned = vec![false; n];
    let mut clusters = Vec::new();
    for i in 0..n {
        if assigned[i] {
            continue;
        }
        // grow the cluster transitively
        let mut members = vec![i];
        assigned[i] = true;
        let mut cursor = 0;
        while cursor < members.len() {
            let a = members[cursor];
            for j in 0..n {
                if !assigned[j] && (values[a] - values[j]).norm() <= tol {
                    assigned[j] = true;
                    members.push(j);
                }
            }
            cursor += 1;
        }
        clusters.push(members);
    }
    clusters
}

fn coalescence_clusters(
    values: &[C64],
    vectors: &[Array1<C64>],
    tol: f64,
) -> Vec<CoalescenceCluster> {
    cluster_eigenvalues(values, tol)
        .into_iter()
        .filter(|m| m.len() > 1)
        .map(|members| {
            let mut gap = 0.0f64;
            let mut angle = 1.0f64;
            for (ii, &i) in members.iter().enumerate() {
                for &j in members.iter().skip(ii + 1) {
                    gap = gap.max((values[i] - values[j]).norm());
                    angle = angle.min(vec_angle(&vectors[i], &vectors[j]));
                }
            }
            CoalescenceCluster {
                indices: members,
                eigenvalue_gap: gap,
                eigenvector_angle: angle,
            }
        })
        .collect()
}

/// Largest Jordan block size at `lambda`, from the rank sequence of the
/// normalized powers of `G - lambda I`.
pub fn jordan_block_size(g: &Array2<C64>, lambda: C64) -> Result<usize> {
    let n = g.nrows();
    let mut nmat = g.clone();
    for i in 0..n {
        nmat[[i, i]] -= lambda;
    }
    let scale = one_norm(&nmat).max(1e-300);
    nmat.mapv_inplace(|z| z / scale);
    let mut largest = 0;
    let mut rank_prev = n;
    let mut power = identity(n);
    for j in 1..=n {
        power = power.dot(&nmat);
        let r = rank_abs(&power, RANK_TOL)?;
        if r < rank_prev {
            largest = j;
        }
        rank_prev = r;
    }
    Ok(largest)
}

/// Jordan chain `{v_0, ..., v_{len-1}}` with `(G - lambda) v_j = v_{j-1}`
/// and `(G - lambda) v_0 = 0`.
///
/// The chain top is taken from `ker(N^len)` orthogonal to `ker(N^{len-1})`
/// and pushed down by repeated application of `N`, which satisfies the
/// chain relations by construction. Fails with [`Error::NotDefective`] when
/// the geometric multiplicity already matches the requested structure.
pub fn generalized_eigenvectors(
    g: &Array2<C64>,
    lambda: C64,
    chain_len: usize,
) -> Result<Vec<Array1<C64>>> {
    let n = g.nrows();
    if chain_len == 0 || chain_len > n {
        return Err(Error::ConstraintViolation(format!(
            "chain length {chain_len} out of range for a {n}x{n} generator"
        )));
    }
    let mut nmat = g.clone();
    for i in 0..n {
        nmat[[i, i]] -= lambda;
    }
    let scale = one_norm(&nmat).max(1e-300);
    nmat.mapv_inplace(|z| z / scale);

    // null spaces of successive powers
    let mut kernels: Vec<Vec<Array1<C64>>> = Vec::with_capacity(chain_len + 1);
    let mut power = identity(n);
    for _ in 0..chain_len {
        power = power.dot(&nmat);
        kernels.push(null_space(&power, RANK_TOL)?);
    }
    let dim_prev = if chain_len >= 2 {
        kernels[chain_len - 2].len()
    } else {
        0
    };
    let dim_top = kernels[chain_len - 1].len();
    if chain_len == 1 {
        if dim_top == 0 {
            return Err(Error::NotDefective(format!(
                "{lambda} is not an eigenvalue of the generator"
            )));
        }
        return Ok(vec![kernels[0][0].clone()]);
    }
    if dim_top <= dim_prev {
        return Err(Error::NotDefective(format!(
            "no Jordan chain of length {chain_len} at {lambda}: \
             dim ker(N^{chain_len}) = {dim_top}, dim ker(N^{}) = {dim_prev}",
            chain_len - 1
        )));
    }
    // project a ker(N^len) vector against ker(N^{len-1})
    let prev = &kernels[chain_len - 2];
    let mut top = None;
    for cand in &kernels[chain_len - 1] {
        let mut v = cand.clone();
        for w in prev {
            let overlap: C64 = w.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
            for i in 0..n {
                let wi = w[i];
                v[i] -= overlap * wi;
            }
        }
        let nv = vec_norm(&v);
        if nv > 1e-8 {
            v.mapv_inplace(|z| z / nv);
            top = Some(v);
            break;
        }
    }
    let top = top.ok_or_else(|| {
        Error::Numerical("could not separate the chain top from the lower kernel".into())
    })?;

    let mut chain = vec![top];
    for _ in 1..chain_len {
        let last = chain.last().unwrap();
        chain.push(nmat.dot(last));
    }
    chain.reverse(); // chain[0] is now the true eigenvector
    // normalize so the eigenvector has unit norm; rescaling the whole chain
    // by a common factor preserves the chain relations of the scaled N
    let n0 = vec_norm(&chain[0]);
    if n0 < 1e-300 {
        return Err(Error::Numerical("degenerate Jordan chain".into()));
    }
    for v in chain.iter_mut() {
        v.mapv_inplace(|z| z / n0);
    }
    // undo the normalization of N: (G - lambda) v_j = scale * v_{j-1}, so
    // rescale v_j by scale^j to satisfy the unscaled chain relations
    let mut factor = 1.0;
    for (j, v) in chain.iter_mut().enumerate() {
        if j > 0 {
            factor /= scale;
        }
        let f = c(factor);
        v.mapv_inplace(|z| z * f);
    }
    Ok(chain)
}

/// Eigenpairs of `a` together with left eigenvectors of the matching
/// eigenvalues, biorthogonally normalized when possible.
fn eig_with_left(a: &Array2<C64>) -> Result<(Vec<C64>, Vec<Array1<C64>>, Vec<Array1<C64>>, f64)> {
    let right = eig(a)?;
    let left_raw = eig(&adjoint(a))?;
    let n = right.values.len();
    // match left eigenvalues (conjugates) to right ones greedily
    let mut used = vec![false; n];
    let mut left = Vec::with_capacity(n);
    for lam in &right.values {
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for j in 0..n {
            if used[j] {
                continue;
            }
            let d = (left_raw.values[j].conj() - lam).norm();
            if d < best_d {
                best_d = d;
                best = j;
            }
        }
        used[best] = true;
        left.push(left_raw.vectors[best].clone());
    }
    // biorthogonal normalization: scale each left vector so v_i^H u_i = 1
    let mut residual = 0.0f64;
    let mut singular = false;
    for i in 0..n {
        let dot: C64 = left[i]
            .iter()
            .zip(right.vectors[i].iter())
            .map(|(v, u)| v.conj() * u)
            .sum();
        if dot.norm() < 1e-10 {
            singular = true;
            continue;
        }
        let w = (c(1.0) / dot).conj();
        left[i].mapv_inplace(|z| z * w);
    }
    if singular {
        residual = f64::NAN;
    } else {
        for i in 0..n {
            for j in 0..n {
                let dot: C64 = left[i]
                    .iter()
                    .zip(right.vectors[j].iter())
                    .map(|(v, u)| v.conj() * u)
                    .sum();
                let target = if i == j { c(1.0) } else { c(0.0) };
                residual = residual.max((dot - target).norm());
            }
        }
    }
    Ok((right.values, right.vectors, left, residual))
}

/// Refine near-degenerate defective clusters: members of a cluster that
/// hosts a genuine Jordan block are replaced by the cluster mean, which is
/// accurate to machine precision where the individual roots scatter like
/// `u^{1/m}`. Clusters of merely close (or exactly semisimple) eigenvalues
/// are left untouched.
fn refine_defective_clusters(g: &Array2<C64>, values: &mut [C64], tol: f64) -> Result<()> {
    let clusters = cluster_eigenvalues(values, tol);
    for members in clusters {
        if members.len() < 2 {
            continue;
        }
        let mean = members.iter().map(|&i| values[i]).sum::<C64>() / c(members.len() as f64);
        if jordan_block_size(g, mean)? >= 2 {
            for &i in &members {
                values[i] = mean;
            }
        }
    }
    Ok(())
}

const CLUSTER_TOL_FACTOR: f64 = 1e-3;

/// Full eigenstructure of the 5x5 generator at the given parameters.
///
/// Away from the exceptional points the report carries simple eigenpairs
/// with biorthogonally normalized left vectors. On an exceptional point
/// (`||kappa| - 1| <= EP_KAPPA_TOL`) the defective eigenvalue's vectors are
/// replaced by its Jordan chain and `ep_order` is set from the rank test.
pub fn liouvillian_spectrum(p: &Params) -> Result<SpectralReport> {
    let gen = GeneratorL::new(p);
    let g = gen.matrix();
    let scale = one_norm(g).max(1.0);
    let (mut values, mut rights, lefts, residual) = eig_with_left(g)?;
    refine_defective_clusters(g, &mut values, CLUSTER_TOL_FACTOR * scale)?;
    let coalescence = coalescence_clusters(&values, &rights, CLUSTER_TOL_FACTOR * scale);
    let phase = phase_of_kappa(p.kappa());
    let mut ep_order = None;
    let mut left_vectors = lefts;
    let mut biorth = residual;
    if phase == Phase::Critical {
        // triple at -gamma: report the Jordan chain in its slots
        let lam = c(-p.gamma());
        let order = jordan_block_size(g, lam)?;
        ep_order = Some(order);
        let chain = generalized_eigenvectors(g, lam, order)?;
        let mut slots: Vec<usize> = (0..values.len())
            .filter(|&i| (values[i] - lam).norm() <= CLUSTER_TOL_FACTOR * scale)
            .collect();
        slots.truncate(chain.len());
        for (v, &slot) in chain.iter().zip(slots.iter()) {
            rights[slot] = v.clone();
        }
        // left chain from the adjoint generator at the conjugate eigenvalue
        let left_chain = generalized_eigenvectors(&adjoint(g), lam.conj(), order)?;
        for (v, &slot) in left_chain.iter().zip(slots.iter()) {
            left_vectors[slot] = v.clone();
        }
        biorth = f64::NAN;
    }
    Ok(SpectralReport {
        eigenvalues: values,
        right_vectors: rights,
        left_vectors,
        biorthogonality_residual: biorth,
        coalescence,
        ep_order,
        phase,
    })
}

/// Spectrum report for the damped oscillator; at critical damping the
/// Jordan chain of the coalesced eigenvalue `-gamma/2` is returned.
pub fn damped_oscillator_spectrum(gamma_c: f64, spring_k: f64) -> Result<SpectralReport> {
    let osc = DampedOscillator::new(gamma_c, spring_k)?;
    let g = osc.matrix();
    let scale = one_norm(g).max(1.0);
    let disc = gamma_c * gamma_c - 4.0 * spring_k;
    let critical = disc.abs() <= 1e-9 * scale * scale;
    let (mut values, mut rights, mut lefts, mut residual) = eig_with_left(g)?;
    refine_defective_clusters(g, &mut values, CLUSTER_TOL_FACTOR * scale)?;
    let coalescence = coalescence_clusters(&values, &rights, CLUSTER_TOL_FACTOR * scale);
    let phase = if critical {
        Phase::Critical
    } else if disc < 0.0 {
        Phase::PtSymmetric
    } else {
        Phase::Broken
    };
    let mut ep_order = None;
    if critical {
        let lam = c(-0.5 * gamma_c);
        let order = jordan_block_size(g, lam)?;
        ep_order = Some(order);
        let chain = generalized_eigenvectors(g, lam, order)?;
        for (slot, v) in chain.iter().enumerate() {
            rights[slot] = v.clone();
        }
        let left_chain = generalized_eigenvectors(&adjoint(g), lam.conj(), order)?;
        for (slot, v) in left_chain.iter().enumerate() {
            lefts[slot] = v.clone();
        }
        residual = f64::NAN;
    }
    Ok(SpectralReport {
        eigenvalues: values,
        right_vectors: rights,
        left_vectors: lefts,
        biorthogonality_residual: residual,
        coalescence,
        ep_order,
        phase,
    })
}

/// Phase classification of the correlation-matrix spectrum at `kappa`,
/// together with the four eigenvalues.
pub fn pt_phase(kappa: f64) -> Result<(Phase, Vec<C64>)> {
    let m = GeneratorM::new(kappa);
    let mut values = linalg::eigenvalues(m.matrix())?;
    refine_defective_clusters(m.matrix(), &mut values, CLUSTER_TOL_FACTOR)?;
    values.sort_by(|a, b| {
        (a.re, a.im)
            .partial_cmp(&(b.re, b.im))
            .expect("finite eigenvalues")
    });
    Ok((phase_of_kappa(kappa), values))
}

/// What [`ep_detect`] scans over.
#[derive(Debug, Clone, Copy)]
pub enum EpScanTarget {
    /// The 5x5 generator at fixed `gamma`; the scan may step outside the
    /// physical region since only the matrix structure matters here.
    Liouvillian { gamma: f64 },
    /// The 4x4 correlation matrix, which depends on `kappa` alone.
    Correlation,
}

impl EpScanTarget {
    fn matrix_at(&self, kappa: f64) -> Array2<C64> {
        match self {
            EpScanTarget::Liouvillian { gamma } => {
                GeneratorL::from_rates(*gamma, kappa).matrix().clone()
            }
            EpScanTarget::Correlation => GeneratorM::new(kappa).matrix().clone(),
        }
    }
}

/// Minimal pairwise eigenvector angle at one parameter point, with exact
/// semisimple groups orthogonalized and excluded (any basis of a shared
/// eigenspace is arbitrary, so its angles carry no coalescence signal).
fn min_coalescence_angle(target: &EpScanTarget, kappa: f64) -> Result<f64> {
    let (angle, _) = angle_and_set(target, kappa, 1.0)?;
    Ok(angle)
}

/// Returns the minimal pairwise angle and the size of the largest group of
/// mutually coalescing eigenvectors under `edge_tol` (1.0 disables the
/// grouping and only the angle is meaningful).
fn angle_and_set(target: &EpScanTarget, kappa: f64, edge_tol: f64) -> Result<(f64, usize)> {
    let m = target.matrix_at(kappa);
    let decomp = eig(&m)?;
    let n = decomp.values.len();
    let scale = one_norm(&m).max(1.0);
    // numerically exact degenerate groups: such an eigenspace is semisimple
    // (a defective cluster scatters like eps^(1/m), far above this tol) and
    // its returned basis is arbitrary, so its angles carry no signal
    let clusters = cluster_eigenvalues(&decomp.values, 1e-8 * scale);
    let mut semisimple = vec![false; n];
    for members in &clusters {
        if members.len() > 1 {
            for &i in members {
                semisimple[i] = true;
            }
        }
    }
    let mut min_angle = 1.0f64;
    let mut adj = vec![vec![false; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            if semisimple[i] || semisimple[j] {
                continue;
            }
            let a = vec_angle(&decomp.vectors[i], &decomp.vectors[j]);
            min_angle = min_angle.min(a);
            if a < edge_tol {
                adj[i][j] = true;
                adj[j][i] = true;
            }
        }
    }
    // largest connected component of the coalescence graph
    let mut best = 1usize;
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut stack = vec![s];
        let mut size = 0;
        seen[s] = true;
        while let Some(x) = stack.pop() {
            size += 1;
            for y in 0..n {
                if adj[x][y] && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        best = best.max(size);
    }
    Ok((min_angle, best))
}

/// Certification threshold on the refined minimal angle.
const EP_ANGLE_TOL: f64 = 1e-8;
/// Offset used for measuring the order of a located exceptional point.
const EP_ORDER_OFFSET: f64 = 1e-4;
/// Angle threshold separating coalescing pairs (angle ~ offset) from
/// non-coalescing ones (angle order one) at the measurement offset.
const EP_EDGE_TOL: f64 = 1e-2;

/// Locate exceptional points of the target inside `[lo, hi]` by scanning
/// the minimal eigenvector angle and refining each local minimum with a
/// golden-section search; classify the order as the size of the set of
/// mutually coalescing eigenvectors just off the located point, confirmed
/// defective by the Jordan rank test.
pub fn ep_detect(
    target: EpScanTarget,
    scan: (f64, f64),
    points: usize,
) -> Result<Vec<(f64, usize)>> {
    let (lo, hi) = scan;
    if points < 3 || !(hi > lo) {
        return Err(Error::ConstraintViolation(
            "scan needs at least 3 points and hi > lo".into(),
        ));
    }
    let step = (hi - lo) / (points - 1) as f64;
    let angles: Vec<f64> = (0..points)
        .map(|i| min_coalescence_angle(&target, lo + i as f64 * step))
        .collect::<Result<_>>()?;
    let mut found: Vec<(f64, usize)> = Vec::new();
    for i in 1..points - 1 {
        if angles[i] <= angles[i - 1] && angles[i] <= angles[i + 1] {
            let a = lo + (i - 1) as f64 * step;
            let b = lo + (i + 1) as f64 * step;
            let kappa_star = golden_min_angle(&target, a, b)?;
            let refined = min_coalescence_angle(&target, kappa_star)?;
            if refined > EP_ANGLE_TOL {
                continue;
            }
            // order from the coalescing set measured just off the point
            let probe = if kappa_star - EP_ORDER_OFFSET >= lo {
                kappa_star - EP_ORDER_OFFSET
            } else {
                kappa_star + EP_ORDER_OFFSET
            };
            let (_, set_size) = angle_and_set(&target, probe, EP_EDGE_TOL)?;
            if set_size < 2 {
                continue;
            }
            // defectiveness certificate at the point itself
            let m = target.matrix_at(kappa_star);
            let vals = linalg::eigenvalues(&m)?;
            let clusters = cluster_eigenvalues(&vals, CLUSTER_TOL_FACTOR * one_norm(&m).max(1.0));
            let mut defective = false;
            for members in clusters {
                if members.len() < 2 {
                    continue;
                }
                let mean =
                    members.iter().map(|&k| vals[k]).sum::<C64>() / c(members.len() as f64);
                if jordan_block_size(&m, mean)? >= 2 {
                    defective = true;
                }
            }
            if !defective {
                continue;
            }
            if found
                .iter()
                .all(|(k, _)| (k - kappa_star).abs() > 10.0 * EP_ORDER_OFFSET)
            {
                found.push((kappa_star, set_size));
            }
        }
    }
    if found.is_empty() {
        return Err(Error::NoEpInRange(lo, hi));
    }
    found.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(found)
}

fn golden_min_angle(target: &EpScanTarget, mut lo: f64, mut hi: f64) -> Result<f64> {
    let inv_phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let mut c1 = hi - inv_phi * (hi - lo);
    let mut d1 = lo + inv_phi * (hi - lo);
    let mut fc = min_coalescence_angle(target, c1)?;
    let mut fd = min_coalescence_angle(target, d1)?;
    while hi - lo > 1e-10 {
        if fc < fd {
            hi = d1;
            d1 = c1;
            fd = fc;
            c1 = hi - inv_phi * (hi - lo);
            fc = min_coalescence_angle(target, c1)?;
        } else {
            lo = c1;
            c1 = d1;
            fc = fd;
            d1 = lo + inv_phi * (hi - lo);
            fd = min_coalescence_angle(target, d1)?;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Verifies the gauge transformation `qbar = e^{gamma tau} q` against the
/// matrix exponential of the correlation generator: the pre-gauge system
/// `dq/dtau = -gamma q - i M q` is integrated by RK4 and the gauged result
/// compared with `exp(-i M tau) q0`. The exponential goes through
/// scaling-and-squaring, so the check is meaningful on the Jordan block at
/// the exceptional points as well.
pub fn gauge_transform_check(p: &Params, q0: &[C64; 4], tau: f64) -> Result<f64> {
    let gamma = p.gamma();
    let m = GeneratorM::new(p.kappa());
    let mm = m.matrix();
    // dq/dtau = -gamma q - i M q
    let rhs = |q: &[C64; 4]| -> [C64; 4] {
        let mut out = [C64::new(0.0, 0.0); 4];
        for i in 0..4 {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..4 {
                acc += mm[[i, j]] * q[j];
            }
            out[i] = -c(gamma) * q[i] - ci(1.0) * acc;
        }
        out
    };
    let dt = 1e-3f64;
    let n_steps = (tau / dt).round().max(0.0) as usize;
    let h = if n_steps > 0 { tau / n_steps as f64 } else { 0.0 };
    let mut q = *q0;
    for _ in 0..n_steps {
        let k1 = rhs(&q);
        let mut q2 = q;
        for i in 0..4 {
            q2[i] += c(0.5 * h) * k1[i];
        }
        let k2 = rhs(&q2);
        let mut q3 = q;
        for i in 0..4 {
            q3[i] += c(0.5 * h) * k2[i];
        }
        let k3 = rhs(&q3);
        let mut q4 = q;
        for i in 0..4 {
            q4[i] += c(h) * k3[i];
        }
        let k4 = rhs(&q4);
        for i in 0..4 {
            q[i] += c(h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    let prop = expm(&(mm * ci(-tau)))?;
    let mut residual = 0.0f64;
    let growth = (gamma * tau).exp();
    for i in 0..4 {
        let mut predicted = C64::new(0.0, 0.0);
        for j in 0..4 {
            predicted += prop[[i, j]] * q0[j];
        }
        residual = residual.max((q[i] * c(growth) - predicted).norm());
    }
    Ok(residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::state::make_params;

    #[test]
    fn generator_l_rows_as_printed() {
        let p = make_params(1.5, 0.5).unwrap();
        let g = GeneratorL::new(&p);
        let m = g.matrix();
        // first row: (-2 gamma, 0, 0, 0, 0)
        assert_eq!(m[[0, 0]], c(-3.0));
        for j in 1..5 {
            assert_eq!(m[[0, j]], c(0.0));
        }
        // coupling row of z: (0, 0, i, -gamma, 0)
        assert_eq!(m[[3, 2]], ci(1.0));
        assert_eq!(m[[3, 3]], c(-1.5));
        // bottom row: (0, gamma, -kappa, 0, 0)
        assert_eq!(m[[4, 1]], c(1.5));
        assert_eq!(m[[4, 2]], c(-0.5));
    }

    #[test]
    fn closed_form_eigenpairs_satisfy_generator() {
        for &(gamma, kappa) in &[(2.0, 0.5), (1.0, 0.0), (3.0, 2.0), (1.0, -0.99)] {
            let g = GeneratorL::from_rates(gamma, kappa);
            let vals = g.closed_form_eigenvalues();
            let vecs = g.closed_form_eigenvectors();
            for (lam, v) in vals.iter().zip(vecs.iter()) {
                let gv = g.matrix().dot(v);
                let res: f64 = gv
                    .iter()
                    .zip(v.iter())
                    .map(|(x, y)| (x - lam * y).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                assert!(res < 1e-12, "gamma={gamma} kappa={kappa} lambda={lam}");
            }
        }
    }

    #[test]
    fn liouvillian_numeric_matches_closed_form() {
        for &(gamma, kappa) in &[(2.0, 0.5), (1.0, 0.9), (3.0, 2.0), (0.7, -0.3)] {
            let p = make_params(gamma, kappa).unwrap();
            let report = liouvillian_spectrum(&p).unwrap();
            let expect = GeneratorL::new(&p).closed_form_eigenvalues();
            for lam in expect {
                let best = report
                    .eigenvalues
                    .iter()
                    .map(|x| (x - lam).norm())
                    .fold(f64::INFINITY, f64::min);
                assert!(best < 1e-10, "missing eigenvalue {lam}");
            }
            assert!(report.biorthogonality_residual < 1e-8);
            assert!(report.ep_order.is_none());
        }
    }

    #[test]
    fn liouvillian_eigenvectors_match_closed_form() {
        let p = make_params(2.0, 0.5).unwrap();
        let report = liouvillian_spectrum(&p).unwrap();
        let gen = GeneratorL::new(&p);
        for (lam, v_cf) in gen
            .closed_form_eigenvalues()
            .iter()
            .zip(gen.closed_form_eigenvectors().iter())
        {
            let idx = report
                .eigenvalues
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| {
                    (*a - lam).norm().partial_cmp(&(*b - lam).norm()).unwrap()
                })
                .map(|(i, _)| i)
                .unwrap();
            let angle = vec_angle(&report.right_vectors[idx], v_cf);
            assert!(angle < 1e-8, "lambda={lam}: angle {angle}");
        }
    }

    #[test]
    fn liouvillian_ep_triple_and_order() {
        let p = make_params(1.0, 1.0).unwrap();
        let report = liouvillian_spectrum(&p).unwrap();
        let triple: Vec<_> = report
            .eigenvalues
            .iter()
            .filter(|x| (*x - c(-1.0)).norm() < 1e-9)
            .collect();
        assert_eq!(triple.len(), 3, "eigenvalues {:?}", report.eigenvalues);
        assert_eq!(report.ep_order, Some(3));
        assert_eq!(report.phase, Phase::Critical);
        // the chain eigenvector is parallel to (0, 1, 0, i, -1)
        let expect = Array1::from(vec![c(0.0), c(1.0), c(0.0), ci(1.0), c(-1.0)]);
        let slot = report
            .eigenvalues
            .iter()
            .position(|x| (x - c(-1.0)).norm() < 1e-9)
            .unwrap();
        let angle = vec_angle(&report.right_vectors[slot], &expect);
        assert!(angle < 1e-6, "angle {angle}");
    }

    #[test]
    fn liouvillian_overdamped_real_spectrum() {
        let p = make_params(3.0, 2.0).unwrap();
        let report = liouvillian_spectrum(&p).unwrap();
        for lam in &report.eigenvalues {
            assert!(lam.im.abs() < 1e-10, "complex eigenvalue {lam}");
        }
    }

    #[test]
    fn pt_matrix_symmetry_identity() {
        for &kappa in &[0.0, 0.5, 1.0, 2.0, -1.3] {
            let m = GeneratorM::new(kappa);
            assert_eq!(max_abs_diff(&m.pt_conjugated(), m.matrix()), 0.0);
        }
    }

    #[test]
    fn pt_phase_classification() {
        let (phase, vals) = pt_phase(0.0).unwrap();
        assert_eq!(phase, Phase::PtSymmetric);
        // {-1, 0, 0, 1}
        assert!((vals[0] - c(-1.0)).norm() < 1e-10);
        assert!((vals[3] - c(1.0)).norm() < 1e-10);
        assert!(vals.iter().all(|v| v.im.abs() < 1e-10));

        let (phase, vals) = pt_phase(1.0).unwrap();
        assert_eq!(phase, Phase::Critical);
        assert!(vals.iter().all(|v| v.norm() < 1e-9), "{vals:?}");

        let (phase, vals) = pt_phase(2.0).unwrap();
        assert_eq!(phase, Phase::Broken);
        let d = 3.0f64.sqrt();
        assert!(vals.iter().any(|v| (v - ci(d)).norm() < 1e-9));
        assert!(vals.iter().any(|v| (v - ci(-d)).norm() < 1e-9));
    }

    #[test]
    fn ep_detect_on_liouvillian() {
        let eps = ep_detect(EpScanTarget::Liouvillian { gamma: 1.0 }, (0.0, 2.0), 21).unwrap();
        assert_eq!(eps.len(), 1);
        assert!((eps[0].0 - 1.0).abs() <= 1e-6, "kappa* = {}", eps[0].0);
        assert_eq!(eps[0].1, 3);
    }

    #[test]
    fn ep_detect_on_correlation_matrix() {
        let eps = ep_detect(EpScanTarget::Correlation, (-2.0, 0.0), 21).unwrap();
        assert_eq!(eps.len(), 1);
        assert!((eps[0].0 + 1.0).abs() <= 1e-6, "kappa* = {}", eps[0].0);
        assert_eq!(eps[0].1, 2);
    }

    #[test]
    fn ep_detect_empty_range() {
        assert!(matches!(
            ep_detect(EpScanTarget::Liouvillian { gamma: 1.0 }, (0.0, 0.5), 11),
            Err(Error::NoEpInRange(_, _))
        ));
    }

    #[test]
    fn oscillator_spectrum_cases() {
        // critical damping: doubly degenerate -1 with a Jordan chain
        let report = damped_oscillator_spectrum(2.0, 1.0).unwrap();
        assert_eq!(report.ep_order, Some(2));
        assert!(report
            .eigenvalues
            .iter()
            .all(|lam| (lam - c(-1.0)).norm() < 1e-9));
        let k = DampedOscillator::new(2.0, 1.0).unwrap();
        let v0 = &report.right_vectors[0];
        let v1 = &report.right_vectors[1];
        let res0 = {
            let kv = k.matrix().dot(v0);
            kv.iter()
                .zip(v0.iter())
                .map(|(x, y)| (x - c(-1.0) * y).norm_sqr())
                .sum::<f64>()
                .sqrt()
        };
        assert!(res0 < 1e-8);
        // K v1 = lambda v1 + v0
        let kv1 = k.matrix().dot(v1);
        let res1: f64 = kv1
            .iter()
            .zip(v1.iter().zip(v0.iter()))
            .map(|(x, (y, w))| (x - (c(-1.0) * y + w)).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(res1 < 1e-8, "chain residual {res1}");
        // the coalesced eigenvector is parallel to (1, lambda_c)
        let expect = Array1::from(vec![c(1.0), c(-1.0)]);
        assert!(vec_angle(v0, &expect) < 1e-8);

        // undamped: +-i
        let report = damped_oscillator_spectrum(0.0, 1.0).unwrap();
        assert!(report.eigenvalues.iter().any(|v| (v - ci(1.0)).norm() < 1e-10));
        assert!(report.eigenvalues.iter().any(|v| (v - ci(-1.0)).norm() < 1e-10));
        assert_eq!(report.phase, Phase::PtSymmetric);

        // overdamped: -(3 +- sqrt(5))/2
        let report = damped_oscillator_spectrum(3.0, 1.0).unwrap();
        let e1 = -(3.0 + 5.0f64.sqrt()) / 2.0;
        let e2 = -(3.0 - 5.0f64.sqrt()) / 2.0;
        for target in [e1, e2] {
            assert!(report
                .eigenvalues
                .iter()
                .any(|v| (v - c(target)).norm() < 1e-10));
        }
        assert_eq!(report.phase, Phase::Broken);

        assert!(DampedOscillator::new(1.0, 0.0).is_err());
    }

    #[test]
    fn jordan_chain_on_liouvillian_ep() {
        let g = GeneratorL::from_rates(1.0, 1.0);
        let chain = generalized_eigenvectors(g.matrix(), c(-1.0), 3).unwrap();
        assert_eq!(chain.len(), 3);
        let expect = Array1::from(vec![c(0.0), c(1.0), c(0.0), ci(1.0), c(-1.0)]);
        assert!(vec_angle(&chain[0], &expect) < 1e-7);
        // residuals of the chain relations
        let n = g.matrix();
        for j in 0..3 {
            let mut nv = n.dot(&chain[j]);
            for i in 0..5 {
                nv[i] += chain[j][i]; // (G + I) v_j
            }
            if j == 0 {
                assert!(vec_norm(&nv) < 1e-8);
            } else {
                let diff: f64 = nv
                    .iter()
                    .zip(chain[j - 1].iter())
                    .map(|(x, y)| (x - y).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                assert!(diff < 1e-8, "chain link {j}: {diff}");
            }
        }
    }

    #[test]
    fn jordan_chain_rejects_semisimple() {
        let g = GeneratorL::from_rates(1.0, 0.5);
        assert!(matches!(
            generalized_eigenvectors(g.matrix(), c(-1.0), 3),
            Err(Error::NotDefective(_))
        ));
    }

    #[test]
    fn gauge_check_small_residual() {
        // coherence-only vector, kappa = 0
        let p = make_params(0.5, 0.0).unwrap();
        let q0 = [c(0.0), c(0.5), c(0.5), c(0.0)];
        let r = gauge_transform_check(&p, &q0, 2.0).unwrap();
        assert!(r <= 1e-7, "residual {r}");
        // tau = 0 is exact
        let r = gauge_transform_check(&p, &q0, 0.0).unwrap();
        assert!(r == 0.0);
        // on the exceptional point the exponential must handle the Jordan
        // block; generic complex vector
        let p = make_params(1.0, 1.0).unwrap();
        let q0 = [
            C64::new(0.1, 0.2),
            C64::new(0.5, 0.0),
            C64::new(0.0, -0.3),
            C64::new(0.4, -0.1),
        ];
        let r = gauge_transform_check(&p, &q0, 3.0).unwrap();
        assert!(r <= 1e-7, "residual {r}");
    }

    #[test]
    fn gauge_matches_physical_trajectory_at_equal_rates() {
        // For equal decay rates and a real inner coherence the correlation
        // vector extracted from a true master-equation trajectory follows
        // exp(-i M tau) after the gauge transformation.
        use crate::oracle::{integrate_endpoint, LindbladGenerator};
        use crate::state::{xstate_to_density, XState};
        let p = make_params(0.5, 0.0).unwrap();
        let s0 = XState::new(0.0, 0.5, 0.5, 0.0, c(0.0), c(0.5)).unwrap();
        let rho0 = xstate_to_density(&s0);
        let gen = LindbladGenerator::new(p);
        let tau = 2.0;
        let rho = integrate_endpoint(&gen, &rho0, tau, 1e-3).unwrap();
        // q = (h*, m*, m, h)
        let q_tau = [
            rho[[0, 3]].conj(),
            rho[[1, 2]].conj(),
            rho[[1, 2]],
            rho[[0, 3]],
        ];
        let q0 = [c(0.0), c(0.5), c(0.5), c(0.0)];
        let m = GeneratorM::new(0.0);
        let prop = expm(&(m.matrix() * ci(-tau))).unwrap();
        let growth = (0.5f64 * tau).exp();
        let mut residual = 0.0f64;
        for i in 0..4 {
            let mut pred = c(0.0);
            for j in 0..4 {
                pred += prop[[i, j]] * q0[j];
            }
            residual = residual.max((q_tau[i] * c(growth) - pred).norm());
        }
        assert!(residual <= 1e-7, "residual {residual}");
    }

    #[test]
    fn propagator_norm_by_phase() {
        // spectral radius of exp(-i M): 1 in the symmetric phase, e^Delta
        // in the broken phase
        for &kappa in &[0.0, 0.5, 0.99] {
            let m = GeneratorM::new(kappa);
            let e = expm(&(m.matrix() * ci(-1.0))).unwrap();
            let vals = linalg::eigenvalues(&e).unwrap();
            let radius = vals.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
            assert!((radius - 1.0).abs() < 1e-9, "kappa={kappa}: radius {radius}");
        }
        for &kappa in &[1.5, 2.0] {
            let m = GeneratorM::new(kappa);
            let e = expm(&(m.matrix() * ci(-1.0))).unwrap();
            let vals = linalg::eigenvalues(&e).unwrap();
            let radius = vals.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
            let d = (kappa * kappa - 1.0f64).sqrt();
            assert!(
                (radius - d.exp()).abs() < 1e-8,
                "kappa={kappa}: radius {radius} vs {}",
                d.exp()
            );
        }
    }

    #[test]
    fn eigenvector_coalescence_is_monotone_toward_ep() {
        let t = EpScanTarget::Liouvillian { gamma: 1.0 };
        let near = min_coalescence_angle(&t, 1.0 + 1e-4).unwrap();
        let far = min_coalescence_angle(&t, 1.0 + 1e-2).unwrap();
        assert!(near < far, "{near} vs {far}");
        let near = min_coalescence_angle(&t, 1.0 - 1e-4).unwrap();
        let far = min_coalescence_angle(&t, 1.0 - 1e-2).unwrap();
        assert!(near < far, "{near} vs {far}");
    }

    #[test]
    fn completeness_away_from_eps() {
        // sum_i u_i v_i^H = I after biorthogonal normalization
        let p = make_params(2.0, 0.5).unwrap();
        let report = liouvillian_spectrum(&p).unwrap();
        let mut sum = Array2::<C64>::zeros((5, 5));
        for (u, v) in report.right_vectors.iter().zip(report.left_vectors.iter()) {
            for i in 0..5 {
                for j in 0..5 {
                    sum[[i, j]] += u[i] * v[j].conj();
                }
            }
        }
        assert!(max_abs_diff(&sum, &identity(5)) < 1e-8);
    }
}
