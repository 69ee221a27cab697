use super::*;
use crate::datagen::{gen_toy_pair, gen_toy_weak, ToyPairConfig};
use numlin::Matrix;

fn subspace_from_basis(basis: Matrix) -> PrincipalSubspace {
    PrincipalSubspace {
        basis,
        source: SubspaceSource::Analytic,
        alpha: None,
        bias_appended: false,
    }
}

#[test]
fn kernel_matrix_examples() {
    // orthonormal columns → identity
    let reps = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
    let k = kernel_matrix(&reps, None).unwrap();
    assert_eq!(k, Matrix::identity(2));

    let reps = Matrix::from_rows(&[vec![1.0, 3.0], vec![2.0, 4.0]]);
    let k = kernel_matrix(&reps, None).unwrap();
    let expect = Matrix::from_rows(&[vec![5.0, 11.0], vec![11.0, 25.0]]);
    assert!(k.sub(&expect).max_abs() < 1e-12);

    // project onto coordinate 1 first
    let mut e1 = Matrix::zeros(2, 1);
    e1[(0, 0)] = 1.0;
    let k = kernel_matrix(&reps, Some(&subspace_from_basis(e1))).unwrap();
    let expect = Matrix::from_rows(&[vec![1.0, 3.0], vec![3.0, 9.0]]);
    assert!(k.sub(&expect).max_abs() < 1e-12);
}

/// Columns = scaled standard basis vectors (n_per per coordinate) so that
/// the uncentered covariance is exactly diag(vals).
fn reps_with_cov_eigenvalues(vals: &[f64], n_per: usize) -> Matrix {
    let d = vals.len();
    let n = d * n_per;
    let mut reps = Matrix::zeros(d, n);
    for (i, &v) in vals.iter().enumerate() {
        let m = (v * n as f64 / n_per as f64).sqrt();
        for r in 0..n_per {
            reps[(i, i * n_per + r)] = m;
        }
    }
    reps
}

#[test]
fn pca_threshold_keeps_expected_count() {
    // Σ̂ eigenvalues [4, 2, 0.1]; α = 0.1 → threshold 0.4 keeps two
    let reps = reps_with_cov_eigenvalues(&[4.0, 2.0, 0.1], 2);
    let sub = subspace_empirical(&reps, ThresholdMode::Pca, 0.1, false).unwrap();
    assert_eq!(sub.k(), 2);
    assert_eq!(sub.source, SubspaceSource::PcaThreshold);

    // α = 0 keeps every positive-eigenvalue direction
    let all = subspace_empirical(&reps, ThresholdMode::Pca, 0.0, false).unwrap();
    assert_eq!(all.k(), 3);
}

#[test]
fn pca_threshold_keeps_exact_ties() {
    let reps = reps_with_cov_eigenvalues(&[4.0, 0.4, 0.4], 2);
    let sub = subspace_empirical(&reps, ThresholdMode::Pca, 0.1, false).unwrap();
    assert_eq!(sub.k(), 3, "ties at the threshold are kept");
}

#[test]
fn pca_nesting_in_alpha() {
    let cfg = ToyPairConfig {
        eta_w: 0.5,
        eta_s: 1.0,
        d: 40,
        sigma2: 2.0,
        n_hat: 60,
        n_tilde: 2,
        n_test: 0,
        seed: 21,
    };
    let ds = gen_toy_weak(&cfg).unwrap();
    let coarse = subspace_empirical(&ds.hat.reps, ThresholdMode::Pca, 0.5, false).unwrap();
    let fine = subspace_empirical(&ds.hat.reps, ThresholdMode::Pca, 0.05, false).unwrap();
    assert!(coarse.k() <= fine.k());
    // span containment: projecting the coarse basis through the fine one is lossless
    let proj = fine.basis.t_mul(&coarse.basis);
    let restored = fine.basis.mul(&proj);
    assert!(restored.sub(&coarse.basis).max_abs() < 1e-8);
}

#[test]
fn variance_mode_selects_coordinates() {
    let reps = Matrix::from_rows(&[
        vec![2.0, -2.0, 2.0, -2.0],
        vec![0.1, 0.1, -0.1, -0.1],
        vec![1.0, 1.0, -1.0, -1.0],
    ]);
    let sub = subspace_empirical(&reps, ThresholdMode::Variance, 0.2, false).unwrap();
    assert_eq!(sub.k(), 2);
    // indicator columns on coordinates 0 and 2
    assert_eq!(sub.basis[(0, 0)], 1.0);
    assert_eq!(sub.basis[(2, 1)], 1.0);
    // a threshold above everything keeps nothing
    assert!(matches!(
        subspace_empirical(&reps, ThresholdMode::Variance, 1.5, false),
        Err(Error::EmptySubspace)
    ));
}

#[test]
fn subspace_rejects_degenerate_inputs() {
    let zero = Matrix::zeros(3, 4);
    assert!(matches!(
        subspace_empirical(&zero, ThresholdMode::Pca, 0.1, false),
        Err(Error::DegenerateData(_))
    ));
    let one = Matrix::zeros(3, 1);
    assert!(matches!(
        subspace_empirical(&one, ThresholdMode::Pca, 0.1, false),
        Err(Error::DegenerateData(_))
    ));
}

#[test]
fn analytic_subspace_of_toy_strong_is_first_coordinate() {
    let cfg = ToyPairConfig {
        eta_w: 0.5,
        eta_s: 1.0,
        d: 30,
        sigma2: 1.0,
        n_hat: 16,
        n_tilde: 8,
        n_test: 0,
        seed: 3,
    };
    let (_, strong) = gen_toy_pair(&cfg).unwrap();
    let sub = subspace_analytic(strong.population.as_ref().unwrap(), false).unwrap();
    assert_eq!(sub.k(), 1);
    assert_eq!(sub.basis[(0, 0)], 1.0);
    assert!(sub.basis.col(0)[1..].iter().all(|&v| v == 0.0));
}

#[test]
fn build_p_examples() {
    let p = build_p(&Matrix::identity(2), 1.0, Side::Weak).unwrap();
    assert!(p.matrix.sub(&Matrix::identity(2).scaled(0.5)).max_abs() < 1e-12);

    let p = build_p(&Matrix::from_diag(&[3.0, 0.0]), 1.0, Side::Strong).unwrap();
    assert!(p.matrix.sub(&Matrix::from_diag(&[0.75, 0.0])).max_abs() < 1e-12);

    let p = build_p(&Matrix::identity(3), 1e6, Side::Weak).unwrap();
    let norm = numlin::operator_norm_sym(&p.matrix).unwrap();
    assert!(norm <= 1e-6 * (1.0 + 1e-6));

    assert!(matches!(
        build_p(&Matrix::from_diag(&[1.0, -1.0]), 1.0, Side::Weak),
        Err(Error::NonPsd)
    ));
    assert!(matches!(
        build_p(&Matrix::identity(2), 0.0, Side::Weak),
        Err(Error::ConfigViolation(_))
    ));
}

#[test]
fn projection_spectra_stay_in_unit_interval() {
    let mut s = 5u64;
    let mut next = move || {
        s = s
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (s >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    for trial in 0..50 {
        let n = 4 + trial % 6;
        let mut g = Matrix::zeros(n + 2, n);
        for v in g.data_mut() {
            *v = next();
        }
        let scaled = g.gram().scaled(1.0 / n as f64);
        let reg = [0.01, 0.3, 5.0][trial % 3];
        let p = build_p(&scaled, reg, Side::Weak).unwrap();
        let vals = numlin::sym_eigenvalues(&p.matrix).unwrap();
        for v in vals {
            assert!((-1e-12..1.0).contains(&v), "trial {trial}: eigenvalue {v}");
        }
        // symmetric
        let asym = p.matrix.sub(&p.matrix.transpose()).max_abs();
        assert!(asym <= 1e-10);
    }
}

fn p_from_diag(vals: &[f64]) -> ProjectionOperator {
    // eigenvalue map λ/(λ+1) inverted: λ = p/(1−p) with reg 1
    let s: Vec<f64> = vals.iter().map(|&p| p / (1.0 - p)).collect();
    build_p(&Matrix::from_diag(&s), 1.0, Side::Weak).unwrap()
}

#[test]
fn weak_error_vector_limits() {
    let y = vec![1.0, -2.0, 0.5];
    // P = 0: ε = ŷ/√n̂
    let p0 = build_p(&Matrix::zeros(3, 3), 1.0, Side::Weak).unwrap();
    let eps = weak_error_vector(&p0, &y).unwrap();
    let scale = 1.0 / 3.0f64.sqrt();
    for (e, v) in eps.iter().zip(&y) {
        assert!((e - v * scale).abs() < 1e-12);
    }
    // near-identity P (full-rank kernel, reg → 0): ε ≈ 0
    let p1 = build_p(&Matrix::identity(3), 1e-12, Side::Weak).unwrap();
    let eps = weak_error_vector(&p1, &y).unwrap();
    assert!(numlin::vecops::norm2(&eps) < 1e-10);
    assert!(matches!(
        weak_error_vector(&p0, &[1.0]),
        Err(Error::DimensionMismatch(_))
    ));
}

#[test]
fn theory_rhs_examples() {
    let n = 2.0f64;
    let y = vec![n.sqrt(), 0.0]; // ŷ/√n̂ = [1, 0]
    let p_w = p_from_diag(&[0.5, 0.5]);
    let p_s = p_from_diag(&[0.8, 0.2]);
    let rhs = theory_predgap_rhs(&p_s, &p_w, &y).unwrap();
    assert!((rhs - 0.16).abs() < 1e-12, "rhs = {rhs}");

    // P_w = I − nothing left; P_s = 0 − nothing absorbed
    let p_id = build_p(&Matrix::identity(2).scaled(1e15), 1e-3, Side::Weak).unwrap();
    assert!(theory_predgap_rhs(&p_s, &p_id, &y).unwrap() < 1e-12);
    let p_zero = build_p(&Matrix::zeros(2, 2), 1.0, Side::Strong).unwrap();
    assert!(theory_predgap_rhs(&p_zero, &p_w, &y).unwrap() < 1e-30);
}

#[test]
fn metrics_examples_and_inequality() {
    let y = vec![1.0, 1.0];
    let p_s = p_from_diag(&[0.8, 0.2]);
    let p_w = p_from_diag(&[0.5, 0.9]);
    let m = w2s_metrics(&p_s, &p_w, &y, None).unwrap();
    // diagonal product: diag(0.4, 0.02) → norm 0.4
    assert!((m.norm_ps_ipw - 0.4).abs() < 1e-10);
    assert!(m.bound2.is_none());
    assert!(!m.degenerate_labels);

    // P_w = I: both norms vanish
    let p_id = build_p(&Matrix::identity(2).scaled(1e15), 1e-3, Side::Weak).unwrap();
    let m0 = w2s_metrics(&p_s, &p_id, &y, Some(0.1)).unwrap();
    assert!(m0.norm_ps_ipw < 1e-12 && m0.norm_ps_ipw_ps < 1e-12);

    // degenerate labels: C = 0, bounds 0, flag set
    let mz = w2s_metrics(&p_s, &p_w, &[0.0, 0.0], Some(0.0)).unwrap();
    assert!(mz.degenerate_labels);
    assert_eq!(mz.bound1, 0.0);
    assert_eq!(mz.bound2, Some(0.0));
}

/// ‖P_s(I−P_w)P_s‖ ≤ ‖P_s(I−P_w)‖ and the theory RHS respects both bounds
/// when err_sc is the exact complement energy ‖(I−P_s)ŷ/√n̂‖².
#[test]
fn bounds_dominate_theory_rhs() {
    let mut s = 17u64;
    let mut next = move || {
        s = s
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (s >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    for trial in 0..40 {
        let n = 5 + trial % 4;
        let mut gw = Matrix::zeros(n + 1, n);
        let mut gs = Matrix::zeros(n + 1, n);
        for v in gw.data_mut() {
            *v = next();
        }
        for v in gs.data_mut() {
            *v = next();
        }
        let p_w = build_p(&gw.gram().scaled(1.0 / n as f64), 0.2, Side::Weak).unwrap();
        let p_s = build_p(&gs.gram().scaled(1.0 / n as f64), 0.1, Side::Strong).unwrap();
        let y: Vec<f64> = (0..n).map(|_| next() * 2.0).collect();
        let err_sc = complement_energy(&p_s, &y).unwrap();
        let m = w2s_metrics(&p_s, &p_w, &y, Some(err_sc)).unwrap();
        assert!(m.norm_ps_ipw_ps <= m.norm_ps_ipw + 1e-10);
        let rhs = theory_predgap_rhs(&p_s, &p_w, &y).unwrap();
        assert!(
            rhs <= m.bound1 + 1e-10,
            "trial {trial}: rhs {rhs} > bound1 {}",
            m.bound1
        );
        assert!(
            rhs <= m.bound2.unwrap() + 1e-10,
            "trial {trial}: rhs {rhs} > bound2 {}",
            m.bound2.unwrap()
        );
    }
}

#[test]
fn bias_append_extends_subspace_and_kernel() {
    let reps = Matrix::from_rows(&[vec![1.0, -1.0, 0.5, -0.5]]);
    let sub = subspace_empirical(&reps, ThresholdMode::Variance, 0.0, true).unwrap();
    assert_eq!(sub.basis.rows(), 2);
    assert!(sub.bias_appended);
    let k = kernel_matrix(&reps, Some(&sub)).unwrap();
    // kernel of augmented reps: ⟨[x_i, 1], [x_j, 1]⟩
    let expect = |a: f64, b: f64| a * b + 1.0;
    assert!((k[(0, 0)] - expect(1.0, 1.0)).abs() < 1e-12);
    assert!((k[(0, 1)] - expect(1.0, -1.0)).abs() < 1e-12);
}
