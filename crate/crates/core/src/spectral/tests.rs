use super::*;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn assert_multiset(got: &[Complex64], want: &[Complex64], tol: f64) {
    assert_eq!(got.len(), want.len());
    let mut used = vec![false; got.len()];
    for w in want {
        let (best, dist) = got
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, g)| (i, (g - w).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert!(dist <= tol, "missing {w}: nearest off by {dist:e} in {got:?}");
        used[best] = true;
    }
}

#[test]
fn rotation_generator_spectrum() {
    let m = DMatrix::from_row_slice(2, 2, &[-1.0, 2.0, -2.0, -1.0]);
    let ev = eigenvalues(&m).unwrap();
    assert_eq!(ev.len(), 2);
    assert!((ev[0] - c(-1.0, 2.0)).norm() < 1e-13);
    assert!((ev[1] - c(-1.0, -2.0)).norm() < 1e-13);
    assert!((spectral_abscissa(&m).unwrap() + 1.0).abs() < 1e-13);
}

#[test]
fn triangular_non_normal_eigenpairs() {
    let m = DMatrix::from_row_slice(2, 2, &[1.0, 100.0, 0.0, 2.0]);
    let sp = eigenpairs(&m).unwrap();
    assert!((sp.eigenvalues[0] - c(2.0, 0.0)).norm() < 1e-12);
    assert!((sp.eigenvalues[1] - c(1.0, 0.0)).norm() < 1e-12);
    assert!(sp.max_relative_residual() < 1e-10);
    assert!(!sp.is_defective());
    // Biorthogonality of distinct eigenvalues.
    let cross = pairing(&sp.left(0), &sp.right(1));
    assert!(cross.norm() < 1e-12);
}

#[test]
fn sorted_descending_real_then_imaginary() {
    let m = DMatrix::from_row_slice(
        4,
        4,
        &[0.0, 1.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0, -3.0],
    );
    let ev = eigenvalues(&m).unwrap();
    assert!((ev[0] - c(0.5, 0.0)).norm() < 1e-13);
    assert!(ev[1].im > 0.0 && ev[2].im < 0.0);
    assert!((ev[3] - c(-3.0, 0.0)).norm() < 1e-13);
}

#[test]
fn jordan_block_is_flagged_defective() {
    let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
    let sp = eigenpairs(&m).unwrap();
    assert_eq!(sp.clusters.len(), 1);
    assert_eq!(sp.clusters[0].geometric_multiplicity, 1);
    assert!(sp.is_defective());
    let dm = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]);
    assert!(matches!(
        perturb_degenerate(&m, &dm, 0),
        Err(SpectralError::NotSemisimple { algebraic: 2, geometric: 1 })
    ));
    assert!(matches!(
        perturb_simple(&sp, &dm, 0),
        Err(SpectralError::DegenerateEigenvalue { multiplicity: 2, .. })
    ));
}

#[test]
fn identity_is_semisimple_cluster() {
    let m = DMatrix::<f64>::identity(3, 3);
    let sp = eigenpairs(&m).unwrap();
    assert_eq!(sp.clusters.len(), 1);
    assert_eq!(sp.clusters[0].geometric_multiplicity, 3);
    assert!(sp.max_relative_residual() < 1e-12);
}

#[test]
fn degenerate_split_of_identity() {
    let m = DMatrix::<f64>::identity(2, 2);
    let dm = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    let z = perturb_degenerate(&m, &dm, 0).unwrap();
    assert!((z[0] - c(1.0, 0.0)).norm() < 1e-10);
    assert!((z[1] - c(-1.0, 0.0)).norm() < 1e-10);
}

#[test]
fn degenerate_split_non_normal_block() {
    // Double eigenvalue 0 inside a non-normal 3x3 with an unrelated eigenvalue.
    let m = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 5.0, 0.0, 0.0, -2.0, 0.0, 0.0, -1.0]);
    let dm = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 0.0, 3.0, 0.0, 0.0, 0.0, 0.0]);
    // Oracle: restricted to the eigenspace span{e1, e2}, the left eigenvectors
    // are e1 + 5 e3 and e2 - 2 e3, so F relative to G is [[2,1],[0,3]].
    let z = perturb_degenerate(&m, &dm, 1).unwrap();
    assert!((z[0] - c(3.0, 0.0)).norm() < 1e-9);
    assert!((z[1] - c(2.0, 0.0)).norm() < 1e-9);
}

#[test]
fn simple_perturbation_matches_finite_difference() {
    let m = DMatrix::from_row_slice(3, 3, &[-1.0, 3.0, 0.5, 0.0, -2.0, 4.0, 0.2, 0.0, -0.5]);
    let dm = DMatrix::from_row_slice(3, 3, &[0.3, -0.1, 0.0, 0.7, 0.2, -0.4, 0.0, 0.5, 0.1]);
    let sp = eigenpairs(&m).unwrap();
    let eps = 1e-6;
    let moved = eigenvalues(&(&m + &dm * eps)).unwrap();
    for k in 0..3 {
        let d = perturb_simple(&sp, &dm, k).unwrap();
        let target = sp.eigenvalues[k] + d * eps;
        let nearest = moved.iter().map(|z| (z - target).norm()).fold(f64::INFINITY, f64::min);
        assert!(nearest < 1e-9, "k={k}: {nearest:e}");
    }
}

#[test]
fn degenerate_formula_agrees_with_simple_on_simple_eigenvalues() {
    let m = DMatrix::from_row_slice(2, 2, &[-1.0, 4.0, 0.0, -3.0]);
    let dm = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.5]);
    let sp = eigenpairs(&m).unwrap();
    for k in 0..2 {
        let a = perturb_simple(&sp, &dm, k).unwrap();
        let b = perturb_degenerate_with(&sp, &dm, k, &EigenOptions::default()).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(a, b[0]);
    }
}

#[test]
fn shape_and_index_errors() {
    let m = DMatrix::<f64>::identity(2, 2);
    let sp = eigenpairs(&m).unwrap();
    assert_eq!(
        perturb_simple(&sp, &DMatrix::zeros(3, 3), 0),
        Err(SpectralError::ShapeMismatch)
    );
    let rect = DMatrix::<f64>::zeros(2, 3);
    assert_eq!(eigenvalues(&rect), Err(SpectralError::InvalidMatrix));
    let d = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
    let sp = eigenpairs(&d).unwrap();
    assert_eq!(perturb_simple(&sp, &d, 5), Err(SpectralError::IndexOutOfRange(5)));
}

#[test]
fn polynomial_roots_basic() {
    // (x - 1)(x + 2)(x^2 + 1)
    let r = polynomial_roots(&[1.0, 1.0, -1.0, 1.0, -2.0]).unwrap();
    assert_multiset(&r, &[c(1.0, 0.0), c(-2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0)], 1e-12);
    let r = polynomial_roots(&[0.0, 2.0, -4.0, 0.0]).unwrap();
    assert_eq!(r.len(), 2);
    assert_eq!(r[1], c(0.0, 0.0));
    assert!((r[0] - c(2.0, 0.0)).norm() < 1e-14);
    assert_eq!(polynomial_roots(&[0.0, 0.0]), Err(SpectralError::ZeroPolynomial));
    assert!(polynomial_roots(&[3.0]).unwrap().is_empty());
}

fn small_matrix() -> impl Strategy<Value = DMatrix<f64>> {
    (1usize..6).prop_flat_map(|n| {
        proptest::collection::vec(-3.0f64..3.0, n * n)
            .prop_map(move |v| DMatrix::from_row_slice(n, n, &v))
    })
}

proptest! {
    #[test]
    fn residuals_small_for_generic_matrices(m in small_matrix()) {
        let sp = eigenpairs(&m).unwrap();
        prop_assume!(!sp.is_defective() && sp.clusters.len() == sp.len());
        prop_assert!(sp.max_relative_residual() <= 1e-9, "{}", sp.max_relative_residual());
    }

    #[test]
    fn trace_equals_eigenvalue_sum(m in small_matrix()) {
        let ev = eigenvalues(&m).unwrap();
        let sum = ev.iter().fold(c(0.0, 0.0), |a, b| a + b);
        let scale = 1.0 + m.norm();
        prop_assert!((sum.re - m.trace()).abs() <= 1e-10 * scale);
        prop_assert!(sum.im.abs() <= 1e-10 * scale);
        for w in ev.windows(2) {
            prop_assert!(spectrum_order(&w[0], &w[1]) != Ordering::Greater);
        }
    }

    #[test]
    fn similarity_preserves_abscissa(m in small_matrix(), s in 0.5f64..2.0) {
        let n = m.nrows();
        let mut p = DMatrix::<f64>::identity(n, n);
        if n > 1 { p[(0, n - 1)] = s; }
        let pinv = p.clone().try_inverse().unwrap();
        let a = spectral_abscissa(&m).unwrap();
        let b = spectral_abscissa(&(&p * &m * pinv)).unwrap();
        prop_assert!((a - b).abs() <= 1e-7 * (1.0 + m.norm()));
    }

    #[test]
    fn roots_reproduce_real_roots(r in proptest::collection::vec(-4.0f64..4.0, 1..5)) {
        let mut coeffs = vec![1.0];
        for &root in &r {
            let mut next = vec![0.0; coeffs.len() + 1];
            for (i, &a) in coeffs.iter().enumerate() {
                next[i] += a;
                next[i + 1] -= a * root;
            }
            coeffs = next;
        }
        let got = polynomial_roots(&coeffs).unwrap();
        for z in &got {
            let (p, _) = eval_polynomial(&coeffs, *z);
            let mag: f64 = coeffs.iter().enumerate()
                .map(|(i, a)| a.abs() * z.norm().powi((coeffs.len() - 1 - i) as i32)).sum();
            prop_assert!(p.norm() <= 1e-9 * (1.0 + mag));
        }
    }
}

fn kronecker_cube_sum(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let i = DMatrix::<f64>::identity(n, n);
    let k2 = a.kronecker(&i) + i.kronecker(a);
    a.kronecker(&DMatrix::identity(n * n, n * n)) + i.kronecker(&k2)
}

#[test]
fn repeated_semisimple_eigenvalues_converge() {
    let a = DMatrix::from_row_slice(3, 3, &[
        0.19440302622124211, 0.0, -0.9032963236180712,
        -0.508356097907741, -0.6418396133607602, 0.5928740690378401,
        0.0, 0.7667089512384955, 0.0,
    ]);
    let nu = eigenvalues(&a).unwrap();
    let got = eigenvalues(&kronecker_cube_sum(&a)).unwrap();
    let mut want = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                want.push(nu[i] + nu[j] + nu[k]);
            }
        }
    }
    assert_multiset(&got, &want, 1e-6);
}

#[test]
fn nilpotent_blocks_converge() {
    let a = DMatrix::from_row_slice(3, 3, &[
        0.0, 0.0, 0.0,
        0.0, 0.45614051238583986, 0.0,
        0.0, -0.39387707011415807, 0.0,
    ]);
    let got = eigenvalues(&kronecker_cube_sum(&a)).unwrap();
    let lam = 0.45614051238583986;
    let mut full = Vec::new();
    for i in [0.0, lam, 0.0] {
        for j in [0.0, lam, 0.0] {
            for k in [0.0, lam, 0.0] {
                full.push(c(i + j + k, 0.0));
            }
        }
    }
    // Jordan blocks of size up to 4 around zero limit the attainable accuracy.
    assert_multiset(&got, &full, 1e-3);
}
