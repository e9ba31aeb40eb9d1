//! Closed evolution equations for degree-m moments `E[x^{k_1} ... x^{k_m}]`.
//!
//! For the linear Itô system the generator maps monomials of degree m into
//! themselves:
//!
//! ```text
//! d/dt Y^{k_1..k_m} = sum_s A^{k_s}_j Y^{k_1..j..k_m}
//!                   + sum_{a<b} C^{k_a,k_b}_{j,l} Y^{k_1..j..l..k_m}
//! ```
//!
//! Moments are symmetric under permutation of the indices, so the operator is
//! assembled on the multiset basis of non-decreasing index tuples, which has
//! `binomial(n + m - 1, m)` elements instead of `n^m`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::model::{
    correlation_from_noise, CorrelationTensor, DiagonalNoiseSpec, LinearSDESystem, ModelError,
};

/// Default cap on the number of basis elements.
pub const DEFAULT_MAX_BASIS: usize = 20_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MomentError {
    #[error("moment basis needs {required} elements, cap is {cap}")]
    BasisTooLarge { required: u128, cap: usize },
    #[error("index {index} at position {position} is out of range for dimension {dim}")]
    IndexOutOfRange {
        index: usize,
        position: usize,
        dim: usize,
    },
    #[error("moment degree must be ≥ 1")]
    InvalidDegree,
    #[error("drift must be {expected}×{expected}, found {rows}×{cols}")]
    DriftShape {
        expected: usize,
        rows: usize,
        cols: usize,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// `binomial(n + m - 1, m)` without overflow, `None` past `u128`.
pub fn basis_size(dim: usize, degree: usize) -> Option<u128> {
    if dim == 0 {
        return Some(if degree == 0 { 1 } else { 0 });
    }
    let mut acc: u128 = 1;
    for i in 1..=degree as u128 {
        // acc * (dim - 1 + i) / i stays integral at every step.
        acc = acc.checked_mul(dim as u128 - 1 + i)? / i;
    }
    Some(acc)
}

/// Non-decreasing index tuples of length `degree` over `0..dim`, in
/// lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentBasis {
    dim: usize,
    degree: usize,
    elements: Vec<usize>,
    /// `tail_counts[r][v]`: number of non-decreasing tuples of length `r` with
    /// entries in `v..dim`, summed over all `v' >= v`.
    tail_counts: Vec<Vec<usize>>,
}

impl MomentBasis {
    pub fn new(dim: usize, degree: usize, cap: usize) -> Result<Self, MomentError> {
        if degree == 0 {
            return Err(MomentError::InvalidDegree);
        }
        let required = basis_size(dim, degree).unwrap_or(u128::MAX);
        if required > cap as u128 {
            return Err(MomentError::BasisTooLarge { required, cap });
        }
        let size = required as usize;

        let mut elements = Vec::with_capacity(size * degree);
        let mut t = vec![0usize; degree];
        if dim > 0 {
            loop {
                elements.extend_from_slice(&t);
                match (0..degree).rev().find(|&s| t[s] + 1 < dim) {
                    Some(s) => {
                        let v = t[s] + 1;
                        t[s..].iter_mut().for_each(|x| *x = v);
                    }
                    None => break,
                }
            }
        }
        debug_assert_eq!(elements.len(), size * degree);

        // count(r, v) = binomial(dim - v + r - 1, r); stored as suffix sums over v.
        let mut tail_counts = vec![vec![0usize; dim + 1]; degree];
        for (r, row) in tail_counts.iter_mut().enumerate() {
            for v in (0..dim).rev() {
                let count = basis_size(dim - v, r).unwrap_or(0) as usize;
                row[v] = row[v + 1] + count;
            }
        }

        Ok(Self {
            dim,
            degree,
            elements,
            tail_counts,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.elements.len() / self.degree
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn tuple(&self, k: usize) -> &[usize] {
        &self.elements[k * self.degree..(k + 1) * self.degree]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> {
        self.elements.chunks_exact(self.degree)
    }

    /// Position of a sorted tuple. The caller guarantees sortedness and range.
    pub fn rank_sorted(&self, t: &[usize]) -> usize {
        let m = self.degree;
        let mut rank = 0;
        let mut prev = 0;
        for (s, &v) in t.iter().enumerate() {
            let row = &self.tail_counts[m - s - 1];
            rank += row[prev] - row[v];
            prev = v;
        }
        rank
    }

    /// Position of any tuple after canonical (ascending) sorting.
    pub fn index_of(&self, tuple: &[usize]) -> Result<usize, MomentError> {
        if tuple.len() != self.degree {
            return Err(MomentError::InvalidDegree);
        }
        check_range(tuple, self.dim)?;
        let mut t = tuple.to_vec();
        t.sort_unstable();
        Ok(self.rank_sorted(&t))
    }
}

fn check_range(tuple: &[usize], dim: usize) -> Result<(), MomentError> {
    match tuple.iter().position(|&k| k >= dim) {
        Some(position) => Err(MomentError::IndexOutOfRange {
            index: tuple[position],
            position,
            dim,
        }),
        None => Ok(()),
    }
}

#[inline]
fn insertion_sort(t: &mut [usize]) {
    for i in 1..t.len() {
        let mut j = i;
        while j > 0 && t[j - 1] > t[j] {
            t.swap(j - 1, j);
            j -= 1;
        }
    }
}

/// Matrix of the moment evolution operator on the multiset basis.
///
/// Row `r` holds the coefficients of `d/dt Y_r` in terms of the basis moments,
/// so `dY/dt = matrix * Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentOperator {
    pub basis: MomentBasis,
    pub matrix: DMatrix<f64>,
}

impl MomentOperator {
    pub fn degree(&self) -> usize {
        self.basis.degree()
    }
}

/// Generator of the moment dynamics applied to one monomial.
///
/// Returns `d/dt E[x^{k_1} ... x^{k_m}]` as a map from sorted index tuples to
/// coefficients. Exact zero contributions are omitted.
pub fn apply_generator(
    sys: &LinearSDESystem,
    corr: &CorrelationTensor,
    monomial: &[usize],
) -> Result<BTreeMap<Vec<usize>, f64>, MomentError> {
    if monomial.is_empty() {
        return Err(MomentError::InvalidDegree);
    }
    check_range(monomial, sys.dim)?;
    let mut out = BTreeMap::new();
    for_each_term(Some(&sys.drift), Some(corr), monomial, |t, c| {
        *out.entry(t.to_vec()).or_insert(0.0) += c;
    });
    Ok(out)
}

/// Visits every `(target tuple, coefficient)` pair of the generator applied to
/// `t`, drift terms first, then noise pairs `a < b` in lexicographic order.
fn for_each_term<F>(
    drift: Option<&DMatrix<f64>>,
    corr: Option<&CorrelationTensor>,
    t: &[usize],
    mut visit: F,
) where
    F: FnMut(&[usize], f64),
{
    let m = t.len();
    let mut buf = t.to_vec();
    if let Some(a) = drift {
        let n = a.ncols();
        for s in 0..m {
            for j in 0..n {
                let c = a[(t[s], j)];
                if c == 0.0 {
                    continue;
                }
                buf.copy_from_slice(t);
                buf[s] = j;
                insertion_sort(&mut buf);
                visit(&buf, c);
            }
        }
    }
    if let Some(corr) = corr {
        let n = corr.dim;
        for a in 0..m {
            for b in a + 1..m {
                for j in 0..n {
                    for l in 0..n {
                        let c = corr.get(t[a], j, t[b], l);
                        if c == 0.0 {
                            continue;
                        }
                        buf.copy_from_slice(t);
                        buf[a] = j;
                        buf[b] = l;
                        insertion_sort(&mut buf);
                        visit(&buf, c);
                    }
                }
            }
        }
    }
}

fn assemble(
    basis: &MomentBasis,
    drift: Option<&DMatrix<f64>>,
    corr: Option<&CorrelationTensor>,
) -> DMatrix<f64> {
    let size = basis.len();
    let mut matrix = DMatrix::zeros(size, size);
    for (row, t) in basis.iter().enumerate() {
        for_each_term(drift, corr, t, |target, c| {
            matrix[(row, basis.rank_sorted(target))] += c;
        });
    }
    matrix
}

/// Moment operator of degree `degree` with the default basis cap.
pub fn build_moment_operator(
    sys: &LinearSDESystem,
    degree: usize,
) -> Result<MomentOperator, MomentError> {
    build_moment_operator_capped(sys, degree, DEFAULT_MAX_BASIS)
}

pub fn build_moment_operator_capped(
    sys: &LinearSDESystem,
    degree: usize,
    cap: usize,
) -> Result<MomentOperator, MomentError> {
    sys.check()?;
    let basis = MomentBasis::new(sys.dim, degree, cap)?;
    let corr = correlation_from_noise(sys);
    let corr = (!corr.is_zero()).then_some(corr);
    let matrix = assemble(&basis, Some(&sys.drift), corr.as_ref());
    Ok(MomentOperator { basis, matrix })
}

/// Moment operator for diagonal noise, where the noise only adds
/// `sum_{a<b} V2^{k_a,k_b}` on the diagonal.
pub fn build_moment_operator_diagonal(
    spec: &DiagonalNoiseSpec,
    drift: &DMatrix<f64>,
    degree: usize,
) -> Result<MomentOperator, MomentError> {
    build_moment_operator_diagonal_capped(spec, drift, degree, DEFAULT_MAX_BASIS)
}

pub fn build_moment_operator_diagonal_capped(
    spec: &DiagonalNoiseSpec,
    drift: &DMatrix<f64>,
    degree: usize,
    cap: usize,
) -> Result<MomentOperator, MomentError> {
    spec.check()?;
    let n = spec.dim;
    if drift.nrows() != n || drift.ncols() != n {
        return Err(MomentError::DriftShape {
            expected: n,
            rows: drift.nrows(),
            cols: drift.ncols(),
        });
    }
    if let Some(x) = drift.iter().find(|x| !x.is_finite()) {
        return Err(ModelError::InconsistentSpec(alloc::format!("drift entry {x}")).into());
    }
    let basis = MomentBasis::new(n, degree, cap)?;
    let mut matrix = assemble(&basis, Some(drift), None);
    let v2 = &spec.pair_matrix;
    for (row, t) in basis.iter().enumerate() {
        let mut shift = 0.0;
        for a in 0..degree {
            for b in a + 1..degree {
                shift += v2[(t[a], t[b])];
            }
        }
        matrix[(row, row)] += shift;
    }
    Ok(MomentOperator { basis, matrix })
}

/// Unperturbed Kronecker-sum part and noise perturbation of the moment
/// operator. Their sum is the full operator.
pub fn split_unperturbed(
    sys: &LinearSDESystem,
    degree: usize,
) -> Result<(MomentOperator, DMatrix<f64>), MomentError> {
    split_unperturbed_capped(sys, degree, DEFAULT_MAX_BASIS)
}

pub fn split_unperturbed_capped(
    sys: &LinearSDESystem,
    degree: usize,
    cap: usize,
) -> Result<(MomentOperator, DMatrix<f64>), MomentError> {
    sys.check()?;
    let basis = MomentBasis::new(sys.dim, degree, cap)?;
    let corr = correlation_from_noise(sys);
    let unperturbed = assemble(&basis, Some(&sys.drift), None);
    let delta = assemble(&basis, None, Some(&corr));
    Ok((
        MomentOperator {
            basis,
            matrix: unperturbed,
        },
        delta,
    ))
}
