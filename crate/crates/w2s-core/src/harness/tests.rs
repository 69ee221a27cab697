use super::*;
use crate::datagen::TailFamily;

#[test]
fn spearman_examples() {
    assert_eq!(spearman(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap(), 1.0);
    assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
    // 1 − 6·Σd²/(n(n²−1)) = 1 − 12/60 = 0.8
    let r = spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
    assert!((r - 0.8).abs() < 1e-12);
}

#[test]
fn spearman_handles_ties_with_average_ranks() {
    // ranks x = [1.5, 1.5, 3], y = [1, 2, 3] → Pearson = 1.5/√(1.5·2) = √3/2
    let r = spearman(&[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0]).unwrap();
    assert!((r - 0.75f64.sqrt()).abs() < 1e-12, "r = {r}");
}

#[test]
fn spearman_rejects_degenerate_inputs() {
    assert!(matches!(
        spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
        Err(Error::ConstantInput)
    ));
    assert!(matches!(
        spearman(&[1.0], &[1.0]),
        Err(Error::ConfigViolation(_))
    ));
    assert!(matches!(
        spearman(&[1.0, 2.0], &[1.0]),
        Err(Error::LengthMismatch(2, 1))
    ));
}

/// Rank-formula oracle 1 − 6Σd²/(n(n²−1)), valid on tie-free data.
pub fn spearman_rank_formula(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let rank = |v: &[f64]| -> Vec<f64> {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
        let mut r = vec![0.0; n];
        for (pos, &i) in idx.iter().enumerate() {
            r[i] = (pos + 1) as f64;
        }
        r
    };
    let rx = rank(x);
    let ry = rank(y);
    let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b) * (a - b)).sum();
    let nf = n as f64;
    1.0 - 6.0 * d2 / (nf * (nf * nf - 1.0))
}

#[test]
fn spearman_matches_rank_formula_on_tie_free_data() {
    let mut s = 31u64;
    let mut next = move || {
        s = s
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (s >> 11) as f64 / (1u64 << 53) as f64
    };
    for trial in 0..100 {
        let n = 5 + trial % 20;
        let x: Vec<f64> = (0..n).map(|_| next()).collect();
        let y: Vec<f64> = (0..n).map(|_| next()).collect();
        let ours = spearman(&x, &y).unwrap();
        let oracle = spearman_rank_formula(&x, &y);
        assert!(
            (ours - oracle).abs() <= 1e-12,
            "trial {trial}: {ours} vs {oracle}"
        );
    }
}

fn small_toy() -> ToyPairConfig {
    ToyPairConfig {
        eta_w: 0.6,
        eta_s: 1.0,
        d: 2500,
        sigma2: 2.0,
        n_hat: 48,
        n_tilde: 48,
        n_test: 0,
        seed: 0,
    }
}

#[test]
fn thm31_runs_are_bit_reproducible() {
    let spec = PairSpec::Toy(small_toy());
    let beta = 1e-6 * 2.0 / 48.0;
    let a = run_thm31(&spec, &[1, 2, 3], beta, beta).unwrap();
    let b = run_thm31(&spec, &[1, 2, 3], beta, beta).unwrap();
    assert_eq!(a.sweep.rows.len(), 3);
    for (x, y) in a.sweep.rows.iter().zip(&b.sweep.rows) {
        assert_eq!(x.predgap, y.predgap);
        assert_eq!(x.theory_rhs, y.theory_rhs);
        assert_eq!(x.norm_ps_ipw, y.norm_ps_ipw);
        assert_eq!(x.err_w2s, y.err_w2s);
    }
    assert_eq!(a.sweep.to_csv(), b.sweep.to_csv());
    // single config → no correlations
    assert!(a.sweep.correlations.is_none());
}

/// Near-perfect weak supervisor: almost nothing is left to propagate.
#[test]
fn thm31_near_perfect_weak_model() {
    let cfg = ToyPairConfig {
        eta_w: 0.99,
        d: 20_000,
        n_hat: 128,
        n_tilde: 128,
        sigma2: 8.0,
        ..small_toy()
    };
    let beta = 1e-6 * cfg.sigma2 / cfg.n_hat as f64;
    let report = run_thm31(&PairSpec::Toy(cfg), &[10, 11, 12], beta, beta).unwrap();
    for row in &report.sweep.rows {
        assert!(row.theory_rhs <= 0.02, "theory_rhs = {}", row.theory_rhs);
    }
}

#[test]
fn thm31_supports_spiked_pairs() {
    let mk = |k: usize, coupling: Vec<f64>| SpikedConfig {
        k,
        d: 4000,
        sigma2: 2.0,
        n_hat: 40,
        n_tilde: 40,
        n_test: 0,
        tail_family: TailFamily::Gaussian,
        label_coupling: coupling,
        seed: 0,
    };
    let spec = PairSpec::Spiked {
        weak: mk(1, vec![0.5]),
        strong: mk(1, vec![0.95]),
    };
    let beta = 1e-4;
    let report = run_thm31(&spec, &[5, 6], beta, beta).unwrap();
    assert_eq!(report.sweep.rows.len(), 2);
    for row in &report.sweep.rows {
        assert!(row.predgap.is_finite() && row.theory_rhs.is_finite());
        assert!(row.norm_ps_ipw_ps <= row.norm_ps_ipw + 1e-10);
    }
}

#[test]
fn benign_enforces_its_preconditions() {
    let mut cfg = small_toy();
    cfg.eta_s = 0.9;
    assert!(matches!(
        run_benign(&cfg, &[1], 1e-8, 1e-8),
        Err(Error::ConfigViolation(_))
    ));
    let cfg = small_toy();
    // beta above the 0.01·σ²/n̂ cap
    assert!(matches!(
        run_benign(&cfg, &[1], 0.1, 0.1),
        Err(Error::ConfigViolation(_))
    ));
}

#[test]
fn pythagoras_enforces_precondition_ratio() {
    // σ² = 8, n̂ = 128 gives γ̂ = 0.0625 > 0.05·ρ with ρ = 1
    let cfg = ToyPairConfig {
        sigma2: 8.0,
        n_hat: 128,
        n_tilde: 128,
        d: 2500,
        ..small_toy()
    };
    let beta = 1e-6 * 8.0 / 128.0;
    match run_pythagoras(&PairSpec::Toy(cfg), &[1], beta, beta) {
        Err(Error::PreconditionRatioViolated { ratio, bound }) => {
            assert!((ratio - (0.0625 + beta)).abs() < 1e-9, "ratio = {ratio}");
            assert_eq!(bound, 0.05);
        }
        other => panic!("expected precondition violation, got {other:?}"),
    }
}

#[test]
fn pythagoras_small_run_holds_triangle() {
    let cfg = ToyPairConfig {
        sigma2: 2.0,
        d: 10_000,
        n_hat: 96,
        n_tilde: 96,
        ..small_toy()
    };
    let beta = 1e-6 * cfg.sigma2 / cfg.n_hat as f64;
    let report = run_pythagoras(&PairSpec::Toy(cfg), &[3, 4, 5], beta, beta).unwrap();
    assert!(report.precondition_ratio <= 0.05);
    for row in &report.rows {
        assert!(row.triangle_slack <= 0.02, "slack = {}", row.triangle_slack);
    }
}

#[test]
fn metric_sweep_rejects_short_and_degenerate_grids() {
    let cfg = small_toy();
    let proj = EmpiricalProjection {
        mode: ThresholdMode::Pca,
        alpha_w: 0.1,
        alpha_s: 0.1,
        beta_eff_w: 0.05,
        beta_eff_s: 0.05,
        bias: false,
    };
    let beta = 1e-6 * cfg.sigma2 / cfg.n_hat as f64;
    assert!(matches!(
        run_metric_sweep(&cfg, &[0.1, 0.5, 0.9], &[1], beta, beta, &proj),
        Err(Error::ConfigViolation(_))
    ));
    // five identical grid points survive the precondition but make the rank
    // correlation undefined
    assert!(matches!(
        run_metric_sweep(&cfg, &[0.5; 5], &[1], beta, beta, &proj),
        Err(Error::ConstantInput)
    ));
}

/// Empirical-pipeline metrics track the analytic-mode metrics in rank order
/// across the weak grid (same seed → same underlying samples in both modes).
#[test]
fn metric_sweep_pca_agrees_with_analytic_in_rank_order() {
    let cfg = ToyPairConfig {
        d: 10_000,
        sigma2: 8.0,
        n_hat: 96,
        n_tilde: 96,
        ..small_toy()
    };
    let beta = 1e-6 * cfg.sigma2 / cfg.n_hat as f64;
    let grid = [0.1, 0.3, 0.5, 0.7, 0.9];
    let proj = EmpiricalProjection {
        mode: ThresholdMode::Pca,
        alpha_w: 0.1,
        alpha_s: 0.1,
        beta_eff_w: 8.0 / 96.0,
        beta_eff_s: 8.0 / 96.0,
        bias: false,
    };
    let sweep = run_metric_sweep(&cfg, &grid, &[8], beta, beta, &proj).unwrap();
    let empirical: Vec<f64> = sweep.aggregates.iter().map(|a| a.norm_ps_ipw).collect();
    let mut analytic = Vec::new();
    for &eta in &grid {
        let mut c = cfg.clone();
        c.eta_w = eta;
        let r = run_thm31(&PairSpec::Toy(c), &[8], beta, beta).unwrap();
        analytic.push(r.sweep.rows[0].norm_ps_ipw);
    }
    // aggregates are sorted by config id = eta, matching the grid order
    let rho = spearman(&empirical, &analytic).unwrap();
    assert!(rho >= 0.95, "rank agreement rho = {rho}");
}

#[test]
fn sweep_csv_shape() {
    let spec = PairSpec::Toy(small_toy());
    let beta = 1e-6 * 2.0 / 48.0;
    let report = run_thm31(&spec, &[1, 2], beta, beta).unwrap();
    let csv = report.sweep.to_csv();
    let lines: Vec<&str> = csv.trim().lines().collect();
    assert_eq!(lines[0], SWEEP_CSV_HEADER);
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[1].split(',').count(), 12);
}

/// The benign study's gap between weak error and the projected-error target
/// approximates the corrected fraction η(1−η) ≈ 0.24.
#[test]
fn benign_delta_check_matches_corrected_fraction() {
    let cfg = ToyPairConfig {
        eta_w: 0.6,
        eta_s: 1.0,
        d: 10_000,
        sigma2: 2.0,
        n_hat: 96,
        n_tilde: 96,
        n_test: 0,
        seed: 0,
    };
    let beta = 1e-6 * cfg.sigma2 / cfg.n_hat as f64;
    let seeds: Vec<u64> = (50..55).collect();
    let report = run_benign(&cfg, &seeds, beta, beta).unwrap();
    assert!(
        (report.mean_delta_check - 0.24).abs() <= 0.06,
        "delta = {}",
        report.mean_delta_check
    );
}
