use super::*;

/// Deterministic xorshift-style generator so these tests need no RNG crate.
struct TestRng(u64);

impl TestRng {
    fn new(seed: u64) -> Self {
        TestRng(seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1))
    }

    fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }

    /// Uniform in [-1, 1).
    fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 52) as f64 - 1.0
    }
}

fn random_symmetric(n: usize, rng: &mut TestRng) -> Matrix {
    let mut a = Matrix::zeros(n, n);
    for j in 0..n {
        for i in 0..=j {
            let v = rng.uniform();
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    a
}

fn random_matrix(rows: usize, cols: usize, rng: &mut TestRng) -> Matrix {
    let mut a = Matrix::zeros(rows, cols);
    for v in a.data_mut() {
        *v = rng.uniform();
    }
    a
}

/// Hand oracle for 2x2 symmetric eigenvalues via the characteristic
/// polynomial lambda^2 - tr*lambda + det = 0.
fn eig2x2_oracle(a: &Matrix) -> [f64; 2] {
    let tr = a[(0, 0)] + a[(1, 1)];
    let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    [tr / 2.0 + disc, tr / 2.0 - disc]
}

#[test]
fn sym_eig_diagonal() {
    let a = Matrix::from_diag(&[2.0, 1.0]);
    let eig = sym_eig(&a).unwrap();
    assert_eq!(eig.eigenvalues, vec![2.0, 1.0]);
    // standard basis, positive leading component
    assert!((eig.eigenvectors[(0, 0)] - 1.0).abs() < 1e-12);
    assert!(eig.eigenvectors[(1, 0)].abs() < 1e-12);
    assert!((eig.eigenvectors[(1, 1)] - 1.0).abs() < 1e-12);
}

#[test]
fn sym_eig_identity() {
    let eig = sym_eig(&Matrix::identity(3)).unwrap();
    for &l in &eig.eigenvalues {
        assert!((l - 1.0).abs() < 1e-12);
    }
}

#[test]
fn sym_eig_offdiagonal_matches_char_poly_oracle() {
    let a = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
    let oracle = eig2x2_oracle(&a);
    assert_eq!(oracle, [1.0, -1.0]);
    let eig = sym_eig(&a).unwrap();
    assert!((eig.eigenvalues[0] - 1.0).abs() < 1e-12);
    assert!((eig.eigenvalues[1] + 1.0).abs() < 1e-12);

    let mut rng = TestRng::new(7);
    for _ in 0..50 {
        let a = random_symmetric(2, &mut rng);
        let oracle = eig2x2_oracle(&a);
        let eig = sym_eig(&a).unwrap();
        assert!((eig.eigenvalues[0] - oracle[0]).abs() < 1e-10);
        assert!((eig.eigenvalues[1] - oracle[1]).abs() < 1e-10);
    }
}

#[test]
fn sym_eig_rejects_asymmetric_and_nonfinite() {
    let a = Matrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]);
    assert!(matches!(sym_eig(&a), Err(LinAlgError::NonSymmetric { .. })));
    let mut b = Matrix::identity(2);
    b[(0, 0)] = f64::NAN;
    assert!(matches!(sym_eig(&b), Err(LinAlgError::NonFinite)));
}

#[test]
fn sym_eig_reconstruction_and_orthonormality() {
    let mut rng = TestRng::new(42);
    for trial in 0..100 {
        let a = random_symmetric(20, &mut rng);
        let eig = sym_eig(&a).unwrap();
        // V'V = I
        let vtv = eig.eigenvectors.gram();
        let dev = vtv.sub(&Matrix::identity(20)).max_abs();
        assert!(
            dev <= 1e-10,
            "trial {trial}: orthonormality deviation {dev:e}"
        );
        // reconstruction in operator norm
        let recon = eig.reconstruct();
        let err = operator_norm(&recon.sub(&a)).unwrap();
        let scale = operator_norm(&a).unwrap().max(1.0);
        assert!(
            err <= 1e-8 * scale,
            "trial {trial}: reconstruction error {err:e}"
        );
        // eigenvalues agree with the values-only path
        let vals = sym_eigenvalues(&a).unwrap();
        for (x, y) in eig.eigenvalues.iter().zip(&vals) {
            assert!((x - y).abs() <= 1e-10);
        }
    }
}

#[test]
fn sign_convention_is_deterministic() {
    let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
    let eig = sym_eig(&a).unwrap();
    for j in 0..2 {
        let col = eig.eigenvectors.col(j);
        let scale = col.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let lead = col.iter().find(|v| v.abs() > 1e-12 * scale).unwrap();
        assert!(*lead > 0.0);
    }
}

#[test]
fn operator_norm_examples() {
    assert!((operator_norm(&Matrix::identity(2)).unwrap() - 1.0).abs() < 1e-12);
    let d = Matrix::from_diag(&[0.4, 0.02]);
    assert!((operator_norm(&d).unwrap() - 0.4).abs() < 1e-12);
    // rank-1 oracle: norm equals the Euclidean norm of the only nonzero row
    let a = Matrix::from_rows(&[vec![3.0, 4.0], vec![0.0, 0.0]]);
    assert!((operator_norm(&a).unwrap() - 5.0).abs() < 1e-10);
}

#[test]
fn operator_norm_matches_max_abs_eigenvalue_for_symmetric() {
    let mut rng = TestRng::new(3);
    for _ in 0..100 {
        let a = random_symmetric(8, &mut rng);
        let by_svd = operator_norm(&a).unwrap();
        let by_eig = sym_eig(&a)
            .unwrap()
            .eigenvalues
            .iter()
            .fold(0.0f64, |m, &l| m.max(l.abs()));
        let scale = by_eig.max(1e-30);
        assert!((by_svd - by_eig).abs() / scale <= 1e-8);
        assert!((operator_norm_sym(&a).unwrap() - by_eig).abs() / scale <= 1e-8);
    }
}

#[test]
fn operator_norm_is_submultiplicative() {
    let mut rng = TestRng::new(11);
    for _ in 0..50 {
        let a = random_matrix(6, 5, &mut rng);
        let b = random_matrix(5, 7, &mut rng);
        let ab = a.mul(&b);
        let lhs = operator_norm(&ab).unwrap();
        let rhs = operator_norm(&a).unwrap() * operator_norm(&b).unwrap();
        assert!(lhs <= rhs + 1e-10, "{lhs} > {rhs}");
    }
}

#[test]
fn operator_norm_rejects_nonfinite() {
    let mut a = Matrix::identity(2);
    a[(1, 0)] = f64::INFINITY;
    assert!(matches!(operator_norm(&a), Err(LinAlgError::NonFinite)));
}

#[test]
fn psd_clamp_within_tolerance() {
    let a = Matrix::from_diag(&[1.0, -1e-12]);
    let c = psd_clamp(&a, 1e-10).unwrap();
    let vals = sym_eigenvalues(&c).unwrap();
    assert!((vals[0] - 1.0).abs() < 1e-12);
    assert!(vals[1].abs() < 1e-12 && vals[1] >= 0.0);
}

#[test]
fn psd_clamp_noop_on_psd() {
    let a = Matrix::from_diag(&[2.0, 0.5]);
    let c = psd_clamp(&a, 1e-10).unwrap();
    assert_eq!(a, c);
}

#[test]
fn psd_clamp_rejects_indefinite() {
    let a = Matrix::from_diag(&[1.0, -0.5]);
    assert!(matches!(
        psd_clamp(&a, 1e-10),
        Err(LinAlgError::EigenvalueBelowTolerance { .. })
    ));
}

#[test]
fn spd_solve_round_trip() {
    let mut rng = TestRng::new(5);
    for _ in 0..20 {
        let b = random_matrix(6, 6, &mut rng);
        // SPD via BᵀB + I
        let a = b.gram().add(&Matrix::identity(6));
        let x_true: Vec<f64> = (0..6).map(|_| rng.uniform()).collect();
        let rhs = a.matvec(&x_true);
        let x = solve_spd(&a, &rhs).unwrap();
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).abs() < 1e-9);
        }
    }
}

#[test]
fn spd_solve_rejects_indefinite() {
    let a = Matrix::from_diag(&[1.0, -1.0]);
    assert!(matches!(
        solve_spd(&a, &[1.0, 1.0]),
        Err(LinAlgError::SingularSystem)
    ));
}

#[test]
fn matmul_agrees_with_naive() {
    let mut rng = TestRng::new(9);
    let a = random_matrix(4, 3, &mut rng);
    let b = random_matrix(3, 5, &mut rng);
    let c = a.mul(&b);
    for i in 0..4 {
        for j in 0..5 {
            let mut acc = 0.0;
            for k in 0..3 {
                acc += a[(i, k)] * b[(k, j)];
            }
            assert!((c[(i, j)] - acc).abs() < 1e-12);
        }
    }
    let at_b = a.t_mul(&a);
    let g = a.gram();
    assert_eq!(at_b, g);
    let a_bt = b.mul_t(&b); // 3x3
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = 0.0;
            for k in 0..5 {
                acc += b[(i, k)] * b[(j, k)];
            }
            assert!((a_bt[(i, j)] - acc).abs() < 1e-12);
        }
    }
}

#[test]
fn gram_of_rows_matches_full_gram_on_tail_block() {
    let mut rng = TestRng::new(13);
    let a = random_matrix(7, 4, &mut rng);
    let tail = a.gram_of_rows(2, 7);
    // naive
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = 0.0;
            for k in 2..7 {
                acc += a[(k, i)] * a[(k, j)];
            }
            assert!((tail[(i, j)] - acc).abs() < 1e-12);
        }
    }
}

#[test]
fn degenerate_sizes_are_handled() {
    let empty = Matrix::zeros(0, 0);
    assert!(sym_eig(&empty).unwrap().eigenvalues.is_empty());
    assert!(sym_eigenvalues(&empty).unwrap().is_empty());
    assert_eq!(operator_norm(&Matrix::zeros(0, 3)).unwrap(), 0.0);

    let one = Matrix::from_diag(&[4.0]);
    let eig = sym_eig(&one).unwrap();
    assert_eq!(eig.eigenvalues, vec![4.0]);
    assert_eq!(eig.eigenvectors[(0, 0)], 1.0);
}
