//! Spectra of general real matrices, both-sided eigenvectors and first-order
//! eigenvalue perturbation for non-self-adjoint operators.
//!
//! Eigenvalues come from the real Schur form. Eigenvectors are obtained by
//! inverse iteration on the Hessenberg form, one LU per eigenvalue cluster,
//! so the full decomposition costs O(n³). Left eigenvectors are right
//! eigenvectors of the transpose and are paired with right ones through the
//! bilinear form `<v, u> = sum_i v_i u_i` (no conjugation).

mod hessenberg;

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use nalgebra::linalg::{Hessenberg, Schur, SVD};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
#[allow(unused_imports)]
use num_traits::Float;

use hessenberg::ShiftedHessenbergLu;

pub type Complex64 = Complex<f64>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectralError {
    #[error("eigenvalue iteration did not converge")]
    EigenSolveFailure,
    #[error("matrix must be square and finite")]
    InvalidMatrix,
    #[error("perturbation must have the same shape as the operator")]
    ShapeMismatch,
    #[error("eigenvalue index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("eigenvalue {index} belongs to a cluster of {multiplicity}; use the degenerate formula")]
    DegenerateEigenvalue { index: usize, multiplicity: usize },
    #[error("left/right pairing {0:e} is too small (nearly defective eigenvalue)")]
    VanishingPairing(f64),
    #[error("eigenvalue cluster has algebraic multiplicity {algebraic} but only {geometric} eigenvectors")]
    NotSemisimple { algebraic: usize, geometric: usize },
    #[error("pairing matrix of the eigenspace is numerically singular (condition {0:e})")]
    SingularPairing(f64),
    #[error("polynomial has no nonzero coefficient")]
    ZeroPolynomial,
}

/// Tolerances for [`eigenpairs_with`] and the perturbation routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Eigenvalues closer than `cluster_gap * ||M||` are treated as one
    /// multiple eigenvalue.
    pub cluster_gap: f64,
    /// Relative residual bound `||M u - nu u|| <= residual_tol * ||M||`.
    pub residual_tol: f64,
    /// Singular-value threshold (relative to `||M||`) separating eigen
    /// directions from generalized ones inside a cluster.
    pub semisimple_tol: f64,
    /// Smallest acceptable `|<v, u>|` for unit vectors.
    pub pairing_tol: f64,
    /// Total QR sweeps per Schur attempt; 0 means `30 * max(n, 10)`.
    pub max_schur_iterations: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            cluster_gap: 1e-8,
            residual_tol: 1e-10,
            semisimple_tol: 1e-6,
            pairing_tol: 1e-12,
            max_schur_iterations: 0,
        }
    }
}

/// Indices of eigenvalues treated as one multiple eigenvalue.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EigenCluster {
    pub members: Vec<usize>,
    pub geometric_multiplicity: usize,
}

impl EigenCluster {
    pub fn algebraic_multiplicity(&self) -> usize {
        self.members.len()
    }

    pub fn is_defective(&self) -> bool {
        self.geometric_multiplicity < self.members.len()
    }
}

/// Full eigendecomposition of a real square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    /// Sorted by descending real part, ties by descending imaginary part.
    pub eigenvalues: Vec<Complex64>,
    /// Unit right eigenvectors, column `k` for `eigenvalues[k]`.
    pub right_vectors: DMatrix<Complex64>,
    /// Unit left eigenvectors (`M^T v = nu v`), column `k` for `eigenvalues[k]`.
    pub left_vectors: DMatrix<Complex64>,
    /// `||M u_k - nu_k u_k||`.
    pub right_residuals: Vec<f64>,
    /// `||M^T v_k - nu_k v_k||`.
    pub left_residuals: Vec<f64>,
    pub clusters: Vec<EigenCluster>,
    /// Cluster index of every eigenvalue.
    pub cluster_of: Vec<usize>,
    /// Frobenius norm of the decomposed matrix.
    pub matrix_norm: f64,
}

impl SpectrumResult {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Largest backward error over both sides, relative to `||M||`.
    pub fn max_relative_residual(&self) -> f64 {
        let worst = self
            .right_residuals
            .iter()
            .chain(&self.left_residuals)
            .fold(0.0f64, |a, &b| a.max(b));
        if self.matrix_norm > 0.0 {
            worst / self.matrix_norm
        } else {
            worst
        }
    }

    /// True when some eigenvalue has fewer eigenvectors than its multiplicity.
    pub fn is_defective(&self) -> bool {
        self.clusters.iter().any(EigenCluster::is_defective)
    }

    pub fn cluster(&self, k: usize) -> &EigenCluster {
        &self.clusters[self.cluster_of[k]]
    }

    pub fn right(&self, k: usize) -> DVector<Complex64> {
        self.right_vectors.column(k).into_owned()
    }

    pub fn left(&self, k: usize) -> DVector<Complex64> {
        self.left_vectors.column(k).into_owned()
    }

    pub fn spectral_abscissa(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Descending real part, then descending imaginary part.
pub fn spectrum_order(a: &Complex64, b: &Complex64) -> Ordering {
    b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im))
}

fn check_square(m: &DMatrix<f64>) -> Result<(), SpectralError> {
    if m.nrows() != m.ncols() || m.iter().any(|x| !x.is_finite()) {
        Err(SpectralError::InvalidMatrix)
    } else {
        Ok(())
    }
}

/// Fallback attempts when the plain QR iteration fails: a looser deflation
/// tolerance first, since repeated eigenvalues can keep subdiagonals just
/// above `EPSILON`, then scalar offsets (relative to `1 + ||M||`), since the
/// Francis iteration has no exceptional shifts and can cycle on defective
/// matrices.
const RETRY_DEFLATION: f64 = 64.0 * f64::EPSILON;
const RETRY_OFFSETS: [f64; 5] = [0.0, 0.137, -0.291, 0.613, -1.07];

fn schur_budget(n: usize, opts: &EigenOptions) -> usize {
    match opts.max_schur_iterations {
        0 => 30 * n.max(10),
        k => k,
    }
}

fn real_schur_eigenvalues(m: &DMatrix<f64>, opts: &EigenOptions) -> Option<Vec<Complex64>> {
    let n = m.nrows();
    let budget = schur_budget(n, opts);
    if let Some(s) = Schur::try_new(m.clone(), f64::EPSILON, budget) {
        return Some(s.complex_eigenvalues().iter().copied().collect());
    }
    let scale = 1.0 + m.norm();
    RETRY_OFFSETS.iter().find_map(|&c| {
        let shift = c * scale;
        let shifted = m + DMatrix::identity(n, n) * shift;
        Schur::try_new(shifted, RETRY_DEFLATION, budget)
            .map(|s| s.complex_eigenvalues().iter().map(|z| z - shift).collect())
    })
}

fn complex_schur_eigenvalues(m: &DMatrix<Complex64>, opts: &EigenOptions) -> Option<Vec<Complex64>> {
    let n = m.nrows();
    let budget = schur_budget(n, opts);
    let eig = |a: DMatrix<Complex64>, eps: f64| {
        Schur::try_new(a, eps, budget).and_then(|s| s.eigenvalues())
    };
    if let Some(ev) = eig(m.clone(), f64::EPSILON) {
        return Some(ev.iter().copied().collect());
    }
    let scale = 1.0 + m.norm();
    RETRY_OFFSETS.iter().find_map(|&c| {
        let shift = Complex64::new(c * scale, 0.0);
        let shifted = m + DMatrix::identity(n, n) * shift;
        eig(shifted, RETRY_DEFLATION).map(|ev| ev.iter().map(|z| z - shift).collect())
    })
}

/// All eigenvalues, sorted by [`spectrum_order`].
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>, SpectralError> {
    eigenvalues_with(m, &EigenOptions::default())
}

pub fn eigenvalues_with(
    m: &DMatrix<f64>,
    opts: &EigenOptions,
) -> Result<Vec<Complex64>, SpectralError> {
    check_square(m)?;
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    if m.nrows() == 1 {
        return Ok(vec![Complex64::new(m[(0, 0)], 0.0)]);
    }
    let mut ev = real_schur_eigenvalues(m, opts).ok_or(SpectralError::EigenSolveFailure)?;
    if ev.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(SpectralError::EigenSolveFailure);
    }
    ev.sort_by(spectrum_order);
    Ok(ev)
}

/// Largest real part over the spectrum.
pub fn spectral_abscissa(m: &DMatrix<f64>) -> Result<f64, SpectralError> {
    Ok(eigenvalues(m)?
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Eigenvalues with left and right eigenvectors, default tolerances.
pub fn eigenpairs(m: &DMatrix<f64>) -> Result<SpectrumResult, SpectralError> {
    eigenpairs_with(m, &EigenOptions::default())
}

pub fn eigenpairs_with(
    m: &DMatrix<f64>,
    opts: &EigenOptions,
) -> Result<SpectrumResult, SpectralError> {
    let eigenvalues = eigenvalues_with(m, opts)?;
    let n = eigenvalues.len();
    let norm = m.norm();
    let scale = if norm > 0.0 { norm } else { 1.0 };

    let (clusters_idx, cluster_of) = cluster(&eigenvalues, opts.cluster_gap * norm);

    let (q, h) = if n > 0 {
        Hessenberg::new(m.clone()).unpack()
    } else {
        (DMatrix::zeros(0, 0), DMatrix::zeros(0, 0))
    };

    let zero = Complex64::new(0.0, 0.0);
    let mut right_vectors = DMatrix::from_element(n, n, zero);
    let mut left_vectors = DMatrix::from_element(n, n, zero);
    let mut clusters = Vec::with_capacity(clusters_idx.len());
    let qc = q.map(|x| Complex64::new(x, 0.0));

    for members in clusters_idx {
        let s = members.len();
        let center = members.iter().fold(zero, |acc, &k| acc + eigenvalues[k]) / s as f64;
        let lu = ShiftedHessenbergLu::new(&h, center, f64::EPSILON * scale);
        let seed = members[0] as u64;

        let y_right = invariant_basis(&h, center, s, seed, scale, opts, |b| lu.solve(b), false);
        let y_left = invariant_basis(&h, center, s, seed ^ 0x5bd1, scale, opts, |b| {
            lu.solve_transpose(b)
        }, true);

        let (right, g_right) = eigen_directions(&h, center, &y_right, scale, opts, false);
        let (left, g_left) = eigen_directions(&h, center, &y_left, scale, opts, true);

        for (slot, &k) in members.iter().enumerate() {
            let u = normalize_phase(&qc * &right.column(slot.min(right.ncols() - 1)));
            let v = normalize_phase(&qc * &left.column(slot.min(left.ncols() - 1)));
            right_vectors.set_column(k, &u);
            left_vectors.set_column(k, &v);
        }
        clusters.push(EigenCluster {
            members,
            geometric_multiplicity: g_right.min(g_left),
        });
    }

    let mc = m.map(|x| Complex64::new(x, 0.0));
    let mt = mc.transpose();
    let right_residuals = (0..n)
        .map(|k| residual(&mc, eigenvalues[k], &right_vectors.column(k).into_owned()))
        .collect();
    let left_residuals = (0..n)
        .map(|k| residual(&mt, eigenvalues[k], &left_vectors.column(k).into_owned()))
        .collect();

    Ok(SpectrumResult {
        eigenvalues,
        right_vectors,
        left_vectors,
        right_residuals,
        left_residuals,
        clusters,
        cluster_of,
        matrix_norm: norm,
    })
}

fn residual(m: &DMatrix<Complex64>, nu: Complex64, u: &DVector<Complex64>) -> f64 {
    (m * u - u * nu).norm()
}

/// Single-linkage clustering of eigenvalues closer than `gap`. Clusters are
/// listed in order of their first member.
fn cluster(ev: &[Complex64], gap: f64) -> (Vec<Vec<usize>>, Vec<usize>) {
    let n = ev.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (ev[i] - ev[j]).norm() <= gap {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut root_to_cluster = vec![usize::MAX; n];
    let mut cluster_of = vec![0; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_to_cluster[r] == usize::MAX {
            root_to_cluster[r] = clusters.len();
            clusters.push(Vec::new());
        }
        cluster_of[i] = root_to_cluster[r];
        clusters[root_to_cluster[r]].push(i);
    }
    (clusters, cluster_of)
}

/// Deterministic start vectors for inverse iteration.
fn start_block(n: usize, s: usize, seed: u64) -> DMatrix<Complex64> {
    let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15) ^ 0x2545f4914f6cdd1d;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    DMatrix::from_fn(n, s, |_, _| Complex64::new(next(), next()))
}

/// Modified Gram-Schmidt, applied twice. Columns that collapse are replaced by
/// unit vectors orthogonal to the previous ones.
fn orthonormalize(y: &mut DMatrix<Complex64>) {
    let (n, s) = y.shape();
    for j in 0..s {
        for _ in 0..2 {
            for i in 0..j {
                let (qi, yj) = (y.column(i).into_owned(), y.column(j).into_owned());
                let proj = qi.dotc(&yj);
                y.set_column(j, &(yj - qi * proj));
            }
        }
        let norm = y.column(j).norm();
        if norm > 0.0 && norm.is_finite() {
            y.column_mut(j).unscale_mut(norm);
        } else {
            let mut e = DVector::from_element(n, Complex64::new(0.0, 0.0));
            e[j % n] = Complex64::new(1.0, 0.0);
            y.set_column(j, &e);
        }
    }
}

fn shifted_apply(h: &DMatrix<f64>, center: Complex64, y: &DMatrix<Complex64>, transpose: bool) -> DMatrix<Complex64> {
    let hc = h.map(|x| Complex64::new(x, 0.0));
    let hc = if transpose { hc.transpose() } else { hc };
    &hc * y - y * center
}

/// Orthonormal basis of the invariant subspace belonging to the eigenvalues
/// near `center`, by block inverse iteration.
#[allow(clippy::too_many_arguments)]
fn invariant_basis<S>(
    h: &DMatrix<f64>,
    center: Complex64,
    s: usize,
    seed: u64,
    scale: f64,
    opts: &EigenOptions,
    solve: S,
    transpose: bool,
) -> DMatrix<Complex64>
where
    S: Fn(&mut [Complex64]),
{
    let n = h.nrows();
    let mut y = start_block(n, s, seed);
    orthonormalize(&mut y);
    for _ in 0..8 {
        for j in 0..s {
            let mut col: Vec<Complex64> = y.column(j).iter().copied().collect();
            solve(&mut col);
            y.set_column(j, &DVector::from_vec(col));
        }
        orthonormalize(&mut y);
        let r = shifted_apply(h, center, &y, transpose);
        if r.norm() <= 0.1 * opts.residual_tol * scale {
            break;
        }
    }
    y
}

/// Splits an invariant basis into eigen directions. Returns the coefficient
/// matrix mapping back to Hessenberg coordinates (eigen directions first) and
/// the number of genuine eigen directions.
fn eigen_directions(
    h: &DMatrix<f64>,
    center: Complex64,
    y: &DMatrix<Complex64>,
    scale: f64,
    opts: &EigenOptions,
    transpose: bool,
) -> (DMatrix<Complex64>, usize) {
    let s = y.ncols();
    if s == 1 {
        return (y.clone(), 1);
    }
    let r = shifted_apply(h, center, y, transpose);
    let svd = SVD::new(r, false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let sv = svd.singular_values;
    // Singular values are not guaranteed sorted; order ascending.
    let mut order: Vec<usize> = (0..s).collect();
    order.sort_by(|&a, &b| sv[a].total_cmp(&sv[b]));
    let geometric = order
        .iter()
        .filter(|&&i| sv[i] <= opts.semisimple_tol * scale)
        .count()
        .max(1);
    let mut out = DMatrix::from_element(y.nrows(), s, Complex64::new(0.0, 0.0));
    for slot in 0..s {
        // Beyond the geometric multiplicity, repeat the best eigen direction.
        let i = if slot < geometric { order[slot] } else { order[0] };
        let w = v_t.row(i).adjoint();
        out.set_column(slot, &(y * w));
    }
    (out, geometric)
}

/// Unit norm with the largest-magnitude component real and positive.
fn normalize_phase(u: DVector<Complex64>) -> DVector<Complex64> {
    let norm = u.norm();
    if norm == 0.0 {
        return u;
    }
    let mut best = 0;
    for i in 0..u.len() {
        if u[i].norm() > u[best].norm() * (1.0 + 1e-12) {
            best = i;
        }
    }
    let phase = u[best] / u[best].norm();
    u.map(|z| z / phase / norm)
}

/// `<v, u> = sum_i v_i u_i`.
pub fn pairing(v: &DVector<Complex64>, u: &DVector<Complex64>) -> Complex64 {
    v.iter().zip(u.iter()).fold(Complex64::new(0.0, 0.0), |acc, (a, b)| acc + a * b)
}

fn real_times(dm: &DMatrix<f64>, u: &DVector<Complex64>) -> DVector<Complex64> {
    dm.map(|x| Complex64::new(x, 0.0)) * u
}

fn first_order_shift(
    v: &DVector<Complex64>,
    u: &DVector<Complex64>,
    dm: &DMatrix<f64>,
    pairing_tol: f64,
) -> Result<Complex64, SpectralError> {
    let denom = pairing(v, u);
    let scaled = denom.norm() / (v.norm() * u.norm());
    if !(scaled > pairing_tol) {
        return Err(SpectralError::VanishingPairing(scaled));
    }
    Ok(pairing(v, &real_times(dm, u)) / denom)
}

/// First-order shift `<v_k, dM u_k> / <v_k, u_k>` of a simple eigenvalue.
pub fn perturb_simple(
    base: &SpectrumResult,
    dm: &DMatrix<f64>,
    k: usize,
) -> Result<Complex64, SpectralError> {
    perturb_simple_with(base, dm, k, &EigenOptions::default())
}

pub fn perturb_simple_with(
    base: &SpectrumResult,
    dm: &DMatrix<f64>,
    k: usize,
    opts: &EigenOptions,
) -> Result<Complex64, SpectralError> {
    let n = base.len();
    if dm.shape() != (n, n) {
        return Err(SpectralError::ShapeMismatch);
    }
    if k >= n {
        return Err(SpectralError::IndexOutOfRange(k));
    }
    let multiplicity = base.cluster(k).algebraic_multiplicity();
    if multiplicity > 1 {
        return Err(SpectralError::DegenerateEigenvalue { index: k, multiplicity });
    }
    first_order_shift(&base.left(k), &base.right(k), dm, opts.pairing_tol)
}

/// First-order splitting of a semisimple multiple eigenvalue: the roots of
/// `det(F - z G) = 0` with `F_ab = <v_a, dM u_b>` and `G_ab = <v_a, u_b>`
/// over the eigenspace of eigenvalue `k`.
pub fn perturb_degenerate(
    m: &DMatrix<f64>,
    dm: &DMatrix<f64>,
    k: usize,
) -> Result<Vec<Complex64>, SpectralError> {
    let opts = EigenOptions::default();
    let base = eigenpairs_with(m, &opts)?;
    perturb_degenerate_with(&base, dm, k, &opts)
}

pub fn perturb_degenerate_with(
    base: &SpectrumResult,
    dm: &DMatrix<f64>,
    k: usize,
    opts: &EigenOptions,
) -> Result<Vec<Complex64>, SpectralError> {
    let n = base.len();
    if dm.shape() != (n, n) {
        return Err(SpectralError::ShapeMismatch);
    }
    if k >= n {
        return Err(SpectralError::IndexOutOfRange(k));
    }
    let cl = base.cluster(k);
    if cl.is_defective() {
        return Err(SpectralError::NotSemisimple {
            algebraic: cl.algebraic_multiplicity(),
            geometric: cl.geometric_multiplicity,
        });
    }
    if cl.members.len() == 1 {
        return Ok(vec![first_order_shift(
            &base.left(k),
            &base.right(k),
            dm,
            opts.pairing_tol,
        )?]);
    }

    let s = cl.members.len();
    let dmc = dm.map(|x| Complex64::new(x, 0.0));
    let mut f = DMatrix::from_element(s, s, Complex64::new(0.0, 0.0));
    let mut g = f.clone();
    for (a, &ka) in cl.members.iter().enumerate() {
        let v = base.left(ka);
        for (b, &kb) in cl.members.iter().enumerate() {
            let u = base.right(kb);
            f[(a, b)] = pairing(&v, &(&dmc * &u));
            g[(a, b)] = pairing(&v, &u);
        }
    }

    let sv = g.clone().singular_values();
    let (smax, smin) = sv.iter().fold((0.0f64, f64::INFINITY), |(hi, lo), &x| (hi.max(x), lo.min(x)));
    if !(smin > opts.pairing_tol.sqrt() * smax) {
        let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        return Err(SpectralError::SingularPairing(cond));
    }
    let reduced = g.lu().solve(&f).ok_or(SpectralError::SingularPairing(f64::INFINITY))?;
    let mut shifts = complex_schur_eigenvalues(&reduced, opts).ok_or(SpectralError::EigenSolveFailure)?;
    shifts.sort_by(spectrum_order);
    Ok(shifts)
}

/// Roots of `c[0] x^d + c[1] x^{d-1} + ... + c[d]` from the eigenvalues of
/// the companion matrix, each polished by a few Newton steps.
///
/// Leading zeros are dropped; trailing zeros give exact zero roots.
pub fn polynomial_roots(coeffs: &[f64]) -> Result<Vec<Complex64>, SpectralError> {
    if coeffs.iter().any(|x| !x.is_finite()) {
        return Err(SpectralError::InvalidMatrix);
    }
    let start = coeffs
        .iter()
        .position(|&c| c != 0.0)
        .ok_or(SpectralError::ZeroPolynomial)?;
    let c = &coeffs[start..];
    let zero_roots = c.iter().rev().take_while(|&&x| x == 0.0).count();
    let c = &c[..c.len() - zero_roots];
    let d = c.len() - 1;

    let mut roots = vec![Complex64::new(0.0, 0.0); zero_roots];
    if d > 0 {
        let lead = c[0];
        let companion = DMatrix::from_fn(d, d, |i, j| {
            if i == 0 {
                -c[j + 1] / lead
            } else if i == j + 1 {
                1.0
            } else {
                0.0
            }
        });
        for z in eigenvalues(&companion)? {
            roots.push(newton_polish(c, z));
        }
    }
    roots.sort_by(spectrum_order);
    Ok(roots)
}

/// Horner evaluation of the polynomial and its derivative.
pub fn eval_polynomial(c: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &a in c {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

fn newton_polish(c: &[f64], mut z: Complex64) -> Complex64 {
    let real_root = z.im == 0.0;
    for _ in 0..3 {
        let (p, dp) = eval_polynomial(c, z);
        if dp.norm() == 0.0 {
            break;
        }
        let next = z - p / dp;
        if !(next.re.is_finite() && next.im.is_finite()) {
            break;
        }
        if eval_polynomial(c, next).0.norm() < p.norm() {
            z = next;
        } else {
            break;
        }
    }
    if real_root {
        z.im = 0.0;
    }
    z
}

#[cfg(test)]
mod tests;
