//! Closed-form ridge-regression heads for the weak, W2S, and strong-ceiling
//! roles, with empirical and population evaluation and the prediction gap
//! between the two strong-side heads.
//!
//! The minimizer of `(1/n)Σ(wᵀrᵢ − yᵢ)² + β‖w‖²` is computed either in
//! primal form `w = (Σ̂ + βI)⁻¹ (1/n) R y` or in dual (kernel) form
//! `w = (1/n) R (K/n + βI)⁻¹ y`; the push-through identity makes the two
//! agree, which the tests exercise directly. The dual path is used when
//! `d > n` (the regime every experiment here lives in).

use numlin::vecops::{dot, mean_sq, sub};
use numlin::Matrix;
use serde::Serialize;

use crate::datagen::{PopulationSummary, RepDataset, Split};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Weak,
    W2s,
    Ceiling,
}

/// A fitted linear head. When `bias` is set, a constant-1 coordinate was
/// appended to the representations before solving and `weights` carries the
/// bias weight as its last entry; the bias participates in regularization.
#[derive(Debug, Clone, Serialize)]
pub struct RidgeHead {
    pub weights: Vec<f64>,
    pub beta: f64,
    pub bias: bool,
    pub role: Option<Role>,
}

impl RidgeHead {
    /// Representation dimension expected by `predict` (excluding the bias).
    pub fn rep_dim(&self) -> usize {
        self.weights.len() - usize::from(self.bias)
    }

    fn main_weights(&self) -> &[f64] {
        &self.weights[..self.rep_dim()]
    }

    fn bias_weight(&self) -> f64 {
        if self.bias {
            *self.weights.last().unwrap()
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMode {
    /// Dual when `d > n`, primal otherwise.
    Auto,
    Primal,
    Dual,
}

/// A scalar estimate with an optional Monte-Carlo standard error (absent for
/// exact analytic values).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_err: Option<f64>,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate {
            value,
            std_err: None,
        }
    }
}

/// Evaluation of one head: training error, optional test-split error, and
/// optional population error.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub err_train: f64,
    pub err_test: Option<f64>,
    pub err_population: Option<Estimate>,
    pub predictions: Vec<f64>,
}

fn augmented(reps: &Matrix) -> Matrix {
    let (d, n) = (reps.rows(), reps.cols());
    let mut out = Matrix::zeros(d + 1, n);
    for j in 0..n {
        out.col_mut(j)[..d].copy_from_slice(reps.col(j));
        out.col_mut(j)[d] = 1.0;
    }
    out
}

fn fit_weights_dual(reps: &Matrix, targets: &[f64], beta: f64) -> Result<Vec<f64>> {
    let n = reps.cols();
    let kernel = reps.gram().scaled(1.0 / n as f64);
    let shifted = kernel.add(&Matrix::identity(n).scaled(beta));
    let coef = numlin::solve_spd(&shifted, targets)?;
    let coef: Vec<f64> = coef.iter().map(|c| c / n as f64).collect();
    Ok(reps.matvec(&coef))
}

/// Dual fit reusing a precomputed raw Gram matrix `RᵀR` (the sweep harness
/// fits several heads on the same strong representations).
pub(crate) fn fit_weights_dual_with_gram(
    reps: &Matrix,
    gram: &Matrix,
    targets: &[f64],
    beta: f64,
) -> Result<Vec<f64>> {
    let n = reps.cols();
    let shifted = gram
        .scaled(1.0 / n as f64)
        .add(&Matrix::identity(n).scaled(beta));
    let coef = numlin::solve_spd(&shifted, targets)?;
    let coef: Vec<f64> = coef.iter().map(|c| c / n as f64).collect();
    Ok(reps.matvec(&coef))
}

fn fit_weights_primal(reps: &Matrix, targets: &[f64], beta: f64) -> Result<Vec<f64>> {
    let (d, n) = (reps.rows(), reps.cols());
    let cov = reps.mul_t(reps).scaled(1.0 / n as f64);
    let shifted = cov.add(&Matrix::identity(d).scaled(beta));
    let mut rhs = vec![0.0; d];
    for j in 0..n {
        let t = targets[j] / n as f64;
        for (r, &v) in rhs.iter_mut().zip(reps.col(j)) {
            *r += t * v;
        }
    }
    numlin::solve_spd(&shifted, &rhs).map_err(Error::from)
}

fn check_fit_inputs(reps: &Matrix, targets: &[f64]) -> Result<()> {
    if reps.cols() == 0 {
        return Err(Error::ConfigViolation("cannot fit on zero samples".into()));
    }
    if targets.len() != reps.cols() {
        return Err(Error::LengthMismatch(targets.len(), reps.cols()));
    }
    if !reps.all_finite() || !numlin::vecops::all_finite(targets) {
        return Err(Error::NonFiniteEntry);
    }
    Ok(())
}

/// Ridge fit with explicit solver choice (used by the push-through checks).
pub fn fit_head_mode(
    reps: &Matrix,
    targets: &[f64],
    beta: f64,
    bias: bool,
    mode: SolveMode,
) -> Result<RidgeHead> {
    check_fit_inputs(reps, targets)?;
    if !(beta > 0.0) {
        return Err(Error::ConfigViolation(
            "beta must be positive (use fit_head_pinv for the interpolation mode)".into(),
        ));
    }
    let work;
    let reps = if bias {
        work = augmented(reps);
        &work
    } else {
        reps
    };
    let use_dual = match mode {
        SolveMode::Auto => reps.rows() > reps.cols(),
        SolveMode::Dual => true,
        SolveMode::Primal => false,
    };
    let weights = if use_dual {
        fit_weights_dual(reps, targets, beta)?
    } else {
        fit_weights_primal(reps, targets, beta)?
    };
    Ok(RidgeHead {
        weights,
        beta,
        bias,
        role: None,
    })
}

/// Closed-form ridge fit; dual (kernel) path when `d > n`, primal otherwise.
pub fn fit_head(reps: &Matrix, targets: &[f64], beta: f64, bias: bool) -> Result<RidgeHead> {
    fit_head_mode(reps, targets, beta, bias, SolveMode::Auto)
}

/// Explicit pseudo-inverse mode for interpolation experiments: `β = 0` with
/// kernel eigenvalues below 1e-10 treated as zero (minimum-norm solution).
pub fn fit_head_pinv(reps: &Matrix, targets: &[f64], bias: bool) -> Result<RidgeHead> {
    check_fit_inputs(reps, targets)?;
    let work;
    let reps = if bias {
        work = augmented(reps);
        &work
    } else {
        reps
    };
    let n = reps.cols();
    let kernel = reps.gram().scaled(1.0 / n as f64);
    let eig = numlin::sym_eig(&kernel)?;
    let mut coef = vec![0.0; n];
    for (e, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam < 1e-10 {
            continue;
        }
        let v = eig.eigenvectors.col(e);
        let p = dot(v, targets) / (lam * n as f64);
        for (c, &ve) in coef.iter_mut().zip(v) {
            *c += p * ve;
        }
    }
    Ok(RidgeHead {
        weights: reps.matvec(&coef),
        beta: 0.0,
        bias,
        role: None,
    })
}

/// Column-wise predictions `wᵀr (+ bias)` on `d×m` representations.
pub fn predict(head: &RidgeHead, reps: &Matrix) -> Result<Vec<f64>> {
    if reps.rows() != head.rep_dim() {
        return Err(Error::DimensionMismatch(format!(
            "head expects dim {}, representations have dim {}",
            head.rep_dim(),
            reps.rows()
        )));
    }
    let w = head.main_weights();
    let b = head.bias_weight();
    Ok((0..reps.cols()).map(|j| dot(w, reps.col(j)) + b).collect())
}

/// Mean squared difference.
pub fn empirical_mse(preds: &[f64], targets: &[f64]) -> Result<f64> {
    if preds.len() != targets.len() {
        return Err(Error::LengthMismatch(preds.len(), targets.len()));
    }
    Ok(mean_sq(&sub(preds, targets)))
}

/// The three-head W2SG pipeline: the weak head is fit on the weak model's
/// tilde split with true labels, the W2S head on the strong model's hat
/// split with the weak head's predictions, and the ceiling head on the
/// strong hat split with true labels.
pub fn fit_pipeline(
    weak_ds: &RepDataset,
    strong_ds: &RepDataset,
    beta_w: f64,
    beta_s: f64,
) -> Result<(RidgeHead, RidgeHead, RidgeHead)> {
    fit_pipeline_with_gram(weak_ds, strong_ds, beta_w, beta_s, None)
}

pub(crate) fn fit_pipeline_with_gram(
    weak_ds: &RepDataset,
    strong_ds: &RepDataset,
    beta_w: f64,
    beta_s: f64,
    strong_hat_gram: Option<&Matrix>,
) -> Result<(RidgeHead, RidgeHead, RidgeHead)> {
    if weak_ds.hat.labels != strong_ds.hat.labels || weak_ds.tilde.labels != strong_ds.tilde.labels
    {
        return Err(Error::LabelMismatch);
    }
    let mut weak = fit_head(&weak_ds.tilde.reps, &weak_ds.tilde.labels, beta_w, false)?;
    weak.role = Some(Role::Weak);
    let weak_targets = predict(&weak, &weak_ds.hat.reps)?;
    let (mut w2s, mut ceiling) = match strong_hat_gram {
        Some(gram) => {
            let w2s_w =
                fit_weights_dual_with_gram(&strong_ds.hat.reps, gram, &weak_targets, beta_s)?;
            let sc_w = fit_weights_dual_with_gram(
                &strong_ds.hat.reps,
                gram,
                &strong_ds.hat.labels,
                beta_s,
            )?;
            (
                RidgeHead {
                    weights: w2s_w,
                    beta: beta_s,
                    bias: false,
                    role: None,
                },
                RidgeHead {
                    weights: sc_w,
                    beta: beta_s,
                    bias: false,
                    role: None,
                },
            )
        }
        None => (
            fit_head(&strong_ds.hat.reps, &weak_targets, beta_s, false)?,
            fit_head(&strong_ds.hat.reps, &strong_ds.hat.labels, beta_s, false)?,
        ),
    };
    w2s.role = Some(Role::W2s);
    ceiling.role = Some(Role::Ceiling);
    Ok((weak, w2s, ceiling))
}

/// Exact population error `wᵀΣw − 2wᵀE[ry] + E[y²]`. The population
/// summaries produced by the generators have zero-mean representations and
/// labels, so a bias weight contributes `b²` and no cross term.
pub fn population_error_analytic(head: &RidgeHead, pop: &PopulationSummary) -> Result<f64> {
    let w = head.main_weights();
    if w.len() != pop.dim {
        return Err(Error::DimensionMismatch(format!(
            "head dim {} vs population dim {}",
            w.len(),
            pop.dim
        )));
    }
    let b = head.bias_weight();
    Ok(pop.quad_form(w) - 2.0 * pop.ery_dot(w) + pop.e_y2 + b * b)
}

/// Monte-Carlo population error on a test split, with its standard error.
pub fn population_error_mc(head: &RidgeHead, test: &Split) -> Result<Estimate> {
    let preds = predict(head, &test.reps)?;
    let sq: Vec<f64> = preds
        .iter()
        .zip(&test.labels)
        .map(|(p, y)| (p - y) * (p - y))
        .collect();
    Ok(mc_estimate(&sq))
}

fn mc_estimate(sq: &[f64]) -> Estimate {
    let n = sq.len() as f64;
    let m = sq.iter().sum::<f64>() / n;
    let var = sq.iter().map(|s| (s - m) * (s - m)).sum::<f64>() / (n - 1.0).max(1.0);
    Estimate {
        value: m,
        std_err: Some((var / n).sqrt()),
    }
}

/// Population error dispatching on what the dataset carries: the analytic
/// summary when present, the test split otherwise.
pub fn population_error(head: &RidgeHead, ds: &RepDataset) -> Result<Estimate> {
    if let Some(pop) = &ds.population {
        Ok(Estimate::exact(population_error_analytic(head, pop)?))
    } else if let Some(test) = &ds.test {
        population_error_mc(head, test)
    } else {
        Err(Error::MissingPopulation)
    }
}

/// Analytic prediction gap `(w_w2s − w_sc)ᵀ Σ_s (w_w2s − w_sc)` between two
/// heads over the same (strong) representation space.
pub fn pred_gap_analytic(
    w2s: &RidgeHead,
    ceiling: &RidgeHead,
    pop: &PopulationSummary,
) -> Result<f64> {
    if w2s.rep_dim() != ceiling.rep_dim() || w2s.bias != ceiling.bias {
        return Err(Error::SpaceMismatch);
    }
    if w2s.rep_dim() != pop.dim {
        return Err(Error::DimensionMismatch(format!(
            "heads dim {} vs population dim {}",
            w2s.rep_dim(),
            pop.dim
        )));
    }
    let delta = sub(&w2s.weights, &ceiling.weights);
    let main = &delta[..w2s.rep_dim()];
    let db = if w2s.bias {
        *delta.last().unwrap()
    } else {
        0.0
    };
    Ok(pop.quad_form(main) + db * db)
}

/// Monte-Carlo prediction gap on test representations.
pub fn pred_gap_mc(w2s: &RidgeHead, ceiling: &RidgeHead, test_reps: &Matrix) -> Result<Estimate> {
    if w2s.rep_dim() != ceiling.rep_dim() || w2s.bias != ceiling.bias {
        return Err(Error::SpaceMismatch);
    }
    let a = predict(w2s, test_reps)?;
    let b = predict(ceiling, test_reps)?;
    let sq: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).collect();
    Ok(mc_estimate(&sq))
}

/// Prediction gap dispatching like [`population_error`].
pub fn pred_gap(w2s: &RidgeHead, ceiling: &RidgeHead, ds: &RepDataset) -> Result<Estimate> {
    if let Some(pop) = &ds.population {
        Ok(Estimate::exact(pred_gap_analytic(w2s, ceiling, pop)?))
    } else if let Some(test) = &ds.test {
        pred_gap_mc(w2s, ceiling, &test.reps)
    } else {
        Err(Error::MissingPopulation)
    }
}

/// Full evaluation of a head against a dataset split structure.
pub fn evaluate(
    head: &RidgeHead,
    train_reps: &Matrix,
    train_targets: &[f64],
    ds: &RepDataset,
) -> Result<EvalReport> {
    let predictions = predict(head, train_reps)?;
    let err_train = empirical_mse(&predictions, train_targets)?;
    let err_test = match &ds.test {
        Some(t) => Some(empirical_mse(&predict(head, &t.reps)?, &t.labels)?),
        None => None,
    };
    let err_population = match population_error(head, ds) {
        Ok(e) => Some(e),
        Err(Error::MissingPopulation) => None,
        Err(e) => return Err(e),
    };
    Ok(EvalReport {
        err_train,
        err_test,
        err_population,
        predictions,
    })
}
