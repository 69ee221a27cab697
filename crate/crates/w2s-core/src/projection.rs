//! Principal subspaces, principal kernels, the scaled projection operators
//! `P = (K/n̂)(K/n̂ + reg·I)⁻¹`, the theoretical prediction-gap target
//! `‖P_s(I−P_w)ŷ/√n̂‖²`, and the label-free metrics `‖P_s(I−P_w)‖` and
//! `‖P_s(I−P_w)P_s‖` with their upper bounds.

use numlin::vecops::{dot, mean_sq, norm2_sq, scale};
use numlin::Matrix;
use serde::Serialize;

use crate::datagen::PopulationSummary;
use crate::finetune::Estimate;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SubspaceSource {
    Analytic,
    PcaThreshold,
    VarianceThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdMode {
    Pca,
    Variance,
}

/// Orthonormal basis `U'` of an (approximate) principal subspace, together
/// with how it was selected.
#[derive(Debug, Clone)]
pub struct PrincipalSubspace {
    pub basis: Matrix,
    pub source: SubspaceSource,
    pub alpha: Option<f64>,
    pub bias_appended: bool,
}

impl PrincipalSubspace {
    pub fn k(&self) -> usize {
        self.basis.cols()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Weak,
    Strong,
}

/// Symmetric scaled projection `P = S (S + reg·I)⁻¹` built from a scaled
/// principal kernel `S = K/n̂`; spectrum lies in `[0, 1)`.
#[derive(Debug, Clone)]
pub struct ProjectionOperator {
    pub matrix: Matrix,
    pub eff_reg: f64,
    pub side: Side,
}

impl ProjectionOperator {
    pub fn n(&self) -> usize {
        self.matrix.rows()
    }

    /// `(I − P) x`.
    pub fn complement_apply(&self, x: &[f64]) -> Vec<f64> {
        let px = self.matrix.matvec(x);
        x.iter().zip(&px).map(|(a, b)| a - b).collect()
    }
}

/// Label-free metric fragment: the two projection-overlap norms, their
/// upper bounds on the prediction gap, and the label energy
/// `C = (1/n̂)Σŷᵢ²`.
#[derive(Debug, Clone, Serialize)]
pub struct MetricFragment {
    pub norm_ps_ipw: f64,
    pub norm_ps_ipw_ps: f64,
    pub c: f64,
    pub bound1: f64,
    pub bound2: Option<f64>,
    /// Set when `ŷ = 0`: the metrics are defined (zero) but uninformative.
    pub degenerate_labels: bool,
}

/// Full metric report assembled by the harness / CLI.
#[derive(Debug, Clone, Serialize)]
pub struct MetricReport {
    pub predgap: Estimate,
    pub theory_rhs: f64,
    pub norm_ps_ipw: f64,
    pub norm_ps_ipw_ps: f64,
    pub bound1: f64,
    pub bound2: Option<f64>,
    pub c: f64,
    pub err_w: f64,
    pub err_w2s: f64,
    pub err_sc: f64,
}

/// Gram matrix of (optionally projected) representations:
/// `K_ij = ⟨Π r_i, Π r_j⟩`. The result is clamped to be PSD; the clamp
/// tolerance is 1e-10 scaled by the kernel magnitude.
pub fn kernel_matrix(reps: &Matrix, subspace: Option<&PrincipalSubspace>) -> Result<Matrix> {
    let raw = match subspace {
        None => reps.gram(),
        Some(sub) => {
            let work;
            let reps = if sub.bias_appended && reps.rows() + 1 == sub.basis.rows() {
                work = append_ones_row(reps);
                &work
            } else {
                reps
            };
            if reps.rows() != sub.basis.rows() {
                return Err(Error::DimensionMismatch(format!(
                    "subspace lives in dim {}, representations in dim {}",
                    sub.basis.rows(),
                    reps.rows()
                )));
            }
            let projected = sub.basis.t_mul(reps);
            projected.gram()
        }
    };
    let tol = 1e-10 * raw.frobenius_norm().max(1.0);
    numlin::psd_clamp(&raw, tol).map_err(Error::from)
}

fn append_ones_row(reps: &Matrix) -> Matrix {
    let (d, n) = (reps.rows(), reps.cols());
    let mut out = Matrix::zeros(d + 1, n);
    for j in 0..n {
        out.col_mut(j)[..d].copy_from_slice(reps.col(j));
        out.col_mut(j)[d] = 1.0;
    }
    out
}

/// Analytic principal subspace from a population summary. With `bias` set
/// the basis is extended by the constant-coordinate axis, matching the
/// bias-appended empirical pipeline.
pub fn subspace_analytic(pop: &PopulationSummary, bias: bool) -> Result<PrincipalSubspace> {
    let basis = pop.principal_basis()?;
    let basis = if bias {
        let (d, k) = (basis.rows(), basis.cols());
        let mut out = Matrix::zeros(d + 1, k + 1);
        for j in 0..k {
            out.col_mut(j)[..d].copy_from_slice(basis.col(j));
        }
        out[(d, k)] = 1.0;
        out
    } else {
        basis
    };
    Ok(PrincipalSubspace {
        basis,
        source: SubspaceSource::Analytic,
        alpha: None,
        bias_appended: bias,
    })
}

/// Empirical principal subspace from the representations of one split.
///
/// PCA mode keeps eigenvectors of the (uncentered) covariance `Σ̂` with
/// eigenvalue ≥ α·λ_max (inclusive, ties kept); variance mode keeps the
/// coordinate axes whose second moment is ≥ α·(largest second moment).
pub fn subspace_empirical(
    reps: &Matrix,
    mode: ThresholdMode,
    alpha: f64,
    bias: bool,
) -> Result<PrincipalSubspace> {
    if reps.cols() < 2 {
        return Err(Error::DegenerateData(
            "subspace selection needs n >= 2 samples".into(),
        ));
    }
    if alpha < 0.0 {
        return Err(Error::ConfigViolation(format!(
            "alpha {alpha} must be nonnegative"
        )));
    }
    let work;
    let reps = if bias {
        work = append_ones_row(reps);
        &work
    } else {
        reps
    };
    let (d, n) = (reps.rows(), reps.cols());
    let basis = match mode {
        ThresholdMode::Pca => {
            if d > n {
                // Gram trick: nonzero eigenpairs of Σ̂ = RRᵀ/n from K/n = RᵀR/n,
                // mapped through u = Rv/√(nλ).
                let gram = reps.gram().scaled(1.0 / n as f64);
                let eig = numlin::sym_eig(&gram)?;
                let lam_max = eig.eigenvalues.first().copied().unwrap_or(0.0);
                if lam_max <= 0.0 {
                    return Err(Error::DegenerateData("zero covariance".into()));
                }
                // numerical-rank cutoff keeps mapped vectors orthonormal
                let floor = lam_max * 1e-12;
                let threshold = (alpha * lam_max).max(floor);
                let kept: Vec<usize> = (0..n)
                    .filter(|&e| eig.eigenvalues[e] >= threshold)
                    .collect();
                if kept.is_empty() {
                    return Err(Error::EmptySubspace);
                }
                let mut basis = Matrix::zeros(d, kept.len());
                for (out_j, &e) in kept.iter().enumerate() {
                    let lam = eig.eigenvalues[e];
                    let v = eig.eigenvectors.col(e);
                    let u = reps.matvec(v);
                    let s = 1.0 / (n as f64 * lam).sqrt();
                    for (slot, x) in basis.col_mut(out_j).iter_mut().zip(&u) {
                        *slot = x * s;
                    }
                }
                numlin::fix_signs(&mut basis);
                basis
            } else {
                let cov = reps.mul_t(reps).scaled(1.0 / n as f64);
                let eig = numlin::sym_eig(&cov)?;
                let lam_max = eig.eigenvalues.first().copied().unwrap_or(0.0);
                if lam_max <= 0.0 {
                    return Err(Error::DegenerateData("zero covariance".into()));
                }
                let floor = lam_max * 1e-12;
                let threshold = (alpha * lam_max).max(floor);
                let kept: Vec<usize> = (0..d)
                    .filter(|&e| eig.eigenvalues[e] >= threshold)
                    .collect();
                if kept.is_empty() {
                    return Err(Error::EmptySubspace);
                }
                let mut basis = Matrix::zeros(d, kept.len());
                for (out_j, &e) in kept.iter().enumerate() {
                    basis
                        .col_mut(out_j)
                        .copy_from_slice(eig.eigenvectors.col(e));
                }
                basis
            }
        }
        ThresholdMode::Variance => {
            let moments: Vec<f64> = (0..d)
                .map(|i| (0..n).map(|j| reps[(i, j)] * reps[(i, j)]).sum::<f64>() / n as f64)
                .collect();
            let max = moments.iter().cloned().fold(0.0f64, f64::max);
            if max <= 0.0 {
                return Err(Error::DegenerateData("zero coordinate variance".into()));
            }
            let kept: Vec<usize> = (0..d).filter(|&i| moments[i] >= alpha * max).collect();
            if kept.is_empty() {
                return Err(Error::EmptySubspace);
            }
            let mut basis = Matrix::zeros(d, kept.len());
            for (j, &i) in kept.iter().enumerate() {
                basis[(i, j)] = 1.0;
            }
            basis
        }
    };
    Ok(PrincipalSubspace {
        basis,
        source: match mode {
            ThresholdMode::Pca => SubspaceSource::PcaThreshold,
            ThresholdMode::Variance => SubspaceSource::VarianceThreshold,
        },
        alpha: Some(alpha),
        bias_appended: bias,
    })
}

/// Builds `P = S (S + reg·I)⁻¹` from the scaled principal kernel `S = K/n̂`
/// via the shared eigenbasis (eigenvalue map `λ ↦ λ/(λ+reg)`).
pub fn build_p(scaled_kernel: &Matrix, eff_reg: f64, side: Side) -> Result<ProjectionOperator> {
    if !(eff_reg > 0.0) {
        return Err(Error::ConfigViolation(
            "effective regularization must be positive".into(),
        ));
    }
    let eig = numlin::sym_eig(scaled_kernel)?;
    let min = eig.eigenvalues.last().copied().unwrap_or(0.0);
    let scale_ref = eig.eigenvalues.first().copied().unwrap_or(0.0).max(1.0);
    if min < -1e-10 * scale_ref {
        return Err(Error::NonPsd);
    }
    let matrix = eig.reconstruct_mapped(|l| {
        let l = l.max(0.0);
        l / (l + eff_reg)
    });
    Ok(ProjectionOperator {
        matrix,
        eff_reg,
        side,
    })
}

/// Convenience: principal kernel of `reps` through `subspace`, scaled by
/// `1/n`, then `build_p`.
pub fn build_p_from_reps(
    reps: &Matrix,
    subspace: &PrincipalSubspace,
    eff_reg: f64,
    side: Side,
) -> Result<ProjectionOperator> {
    let kernel = kernel_matrix(reps, Some(subspace))?;
    let scaled = kernel.scaled(1.0 / reps.cols() as f64);
    build_p(&scaled, eff_reg, side)
}

/// The weak model's (approximate) error vector on the hat split:
/// `(I − P_w)·ŷ/√n̂`.
pub fn weak_error_vector(p_w: &ProjectionOperator, y_hat: &[f64]) -> Result<Vec<f64>> {
    if y_hat.len() != p_w.n() {
        return Err(Error::DimensionMismatch(format!(
            "P is {}x{}, ŷ has length {}",
            p_w.n(),
            p_w.n(),
            y_hat.len()
        )));
    }
    let scaled = scale(y_hat, 1.0 / (y_hat.len() as f64).sqrt());
    Ok(p_w.complement_apply(&scaled))
}

/// `‖P_s (I − P_w) ŷ/√n̂‖²`, the theory's prediction-gap characterization.
pub fn theory_predgap_rhs(
    p_s: &ProjectionOperator,
    p_w: &ProjectionOperator,
    y_hat: &[f64],
) -> Result<f64> {
    if p_s.n() != p_w.n() {
        return Err(Error::DimensionMismatch(format!(
            "P_s is {0}x{0}, P_w is {1}x{1}",
            p_s.n(),
            p_w.n()
        )));
    }
    let eps = weak_error_vector(p_w, y_hat)?;
    Ok(norm2_sq(&p_s.matrix.matvec(&eps)))
}

/// Label-free metrics: `‖P_s(I−P_w)‖`, `‖P_s(I−P_w)P_s‖`, label energy `C`,
/// and the two prediction-gap upper bounds (the tighter one needs `err_sc`).
pub fn w2s_metrics(
    p_s: &ProjectionOperator,
    p_w: &ProjectionOperator,
    y_hat: &[f64],
    err_sc: Option<f64>,
) -> Result<MetricFragment> {
    if p_s.n() != p_w.n() || y_hat.len() != p_s.n() {
        return Err(Error::DimensionMismatch(
            "metric inputs must share the hat-split size".into(),
        ));
    }
    let n = p_s.n();
    let i_minus_pw = Matrix::identity(n).sub(&p_w.matrix);
    let prod = p_s.matrix.mul(&i_minus_pw);
    let norm_ps_ipw = numlin::operator_norm(&prod)?;
    let norm_ps_ipw_ps = numlin::operator_norm(&prod.mul(&p_s.matrix))?;
    let c = mean_sq(y_hat);
    let degenerate_labels = c == 0.0;
    let bound1 = c * norm_ps_ipw * norm_ps_ipw;
    let bound2 = err_sc.map(|e| {
        let root = (c.sqrt() * norm_ps_ipw_ps) + e.max(0.0).sqrt();
        root * root
    });
    Ok(MetricFragment {
        norm_ps_ipw,
        norm_ps_ipw_ps,
        c,
        bound1,
        bound2,
        degenerate_labels,
    })
}

/// `‖(I − P)·ŷ/√n̂‖²`: the population-error approximation of the lemma on
/// weak (and strong-ceiling) errors; used as the exact `err_sc` surrogate in
/// bound cross-checks.
pub fn complement_energy(p: &ProjectionOperator, y_hat: &[f64]) -> Result<f64> {
    Ok(norm2_sq(&weak_error_vector(p, y_hat)?))
}

/// Projection coefficient `⟨ε, v/√n̂⟩ / ‖v/√n̂‖²` used by the error-
/// decomposition diagnostics.
pub fn projection_coefficient(eps: &[f64], v: &[f64]) -> Result<f64> {
    if eps.len() != v.len() {
        return Err(Error::LengthMismatch(eps.len(), v.len()));
    }
    let vs = scale(v, 1.0 / (v.len() as f64).sqrt());
    let denom = norm2_sq(&vs);
    if denom == 0.0 {
        return Err(Error::DegenerateData("projection target is zero".into()));
    }
    Ok(dot(eps, &vs) / denom)
}

#[cfg(test)]
mod tests;
