//! End-to-end experiment drivers: numeric validation of the prediction-gap
//! characterization, the benign-overfitting case study, the Pythagorean
//! error decomposition, and the metric-vs-error sweep with Spearman rank
//! correlation. Every run is a deterministic function of (config, seeds).

use serde::Serialize;

use crate::datagen::{self, gen_toy_strong, gen_toy_weak, RepDataset, SpikedConfig, ToyPairConfig};
use crate::decomp;
use crate::finetune::{
    self, empirical_mse, fit_pipeline_with_gram, population_error_analytic, pred_gap_analytic,
    predict,
};
use crate::projection::{
    self, build_p_from_reps, subspace_analytic, subspace_empirical, theory_predgap_rhs,
    w2s_metrics, weak_error_vector, Side, ThresholdMode,
};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Spearman rank correlation
// ---------------------------------------------------------------------------

/// Average ranks (1-based), ties receiving the mean of their rank range.
fn average_ranks(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap_or(std::cmp::Ordering::Equal));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation of the rank vectors, with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::ConfigViolation(
            "spearman needs at least 2 points".into(),
        ));
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ConstantInput);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

// ---------------------------------------------------------------------------
// Sweep result table
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub config_id: String,
    pub seed: u64,
    pub err_w: f64,
    pub err_w2s: f64,
    pub err_sc: f64,
    pub predgap: f64,
    pub theory_rhs: f64,
    pub norm_ps_ipw: f64,
    pub norm_ps_ipw_ps: f64,
    pub bound1: f64,
    pub bound2: f64,
    pub train_mse_w2s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AggregateRow {
    pub config_id: String,
    pub seeds: usize,
    pub err_w: f64,
    pub err_w2s: f64,
    pub err_sc: f64,
    pub predgap: f64,
    pub theory_rhs: f64,
    pub norm_ps_ipw: f64,
    pub norm_ps_ipw_ps: f64,
    pub bound1: f64,
    pub bound2: f64,
    pub train_mse_w2s: f64,
}

/// Seed-averaged Spearman ρ between each metric column and `err_w2s`.
#[derive(Debug, Clone, Serialize)]
pub struct MetricCorrelations {
    pub norm_ps_ipw: f64,
    pub norm_ps_ipw_ps: f64,
    pub theory_rhs: f64,
    pub bound1: f64,
    pub predgap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub aggregates: Vec<AggregateRow>,
    /// Present when the run covers at least two configs.
    pub correlations: Option<MetricCorrelations>,
}

pub const SWEEP_CSV_HEADER: &str = "config_id,seed,err_w,err_w2s,err_sc,predgap,theory_rhs,norm_ps_ipw,norm_ps_ipw_ps,bound1,bound2,train_mse_w2s";

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(SWEEP_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                r.config_id,
                r.seed,
                r.err_w,
                r.err_w2s,
                r.err_sc,
                r.predgap,
                r.theory_rhs,
                r.norm_ps_ipw,
                r.norm_ps_ipw_ps,
                r.bound1,
                r.bound2,
                r.train_mse_w2s
            ));
        }
        out
    }

    fn from_rows(rows: Vec<SweepRow>) -> Result<SweepResult> {
        let mut config_order: Vec<String> = Vec::new();
        for r in &rows {
            if !config_order.contains(&r.config_id) {
                config_order.push(r.config_id.clone());
            }
        }
        let mut aggregates = Vec::new();
        for id in &config_order {
            let cells: Vec<&SweepRow> = rows.iter().filter(|r| &r.config_id == id).collect();
            let n = cells.len() as f64;
            let mean = |f: &dyn Fn(&SweepRow) -> f64| cells.iter().map(|r| f(r)).sum::<f64>() / n;
            aggregates.push(AggregateRow {
                config_id: id.clone(),
                seeds: cells.len(),
                err_w: mean(&|r| r.err_w),
                err_w2s: mean(&|r| r.err_w2s),
                err_sc: mean(&|r| r.err_sc),
                predgap: mean(&|r| r.predgap),
                theory_rhs: mean(&|r| r.theory_rhs),
                norm_ps_ipw: mean(&|r| r.norm_ps_ipw),
                norm_ps_ipw_ps: mean(&|r| r.norm_ps_ipw_ps),
                bound1: mean(&|r| r.bound1),
                bound2: mean(&|r| r.bound2),
                train_mse_w2s: mean(&|r| r.train_mse_w2s),
            });
        }
        // Correlations are defined whenever each seed contributes a grid of
        // cells (even a degenerate grid of identical configs, which then
        // surfaces ConstantInput from spearman).
        let mut seeds: Vec<u64> = rows.iter().map(|r| r.seed).collect();
        seeds.sort_unstable();
        seeds.dedup();
        let correlations = if !rows.is_empty() && rows.len() > seeds.len() {
            Some(Self::correlations(&rows)?)
        } else {
            None
        };
        Ok(SweepResult {
            rows,
            aggregates,
            correlations,
        })
    }

    /// Per-seed Spearman between each metric column and err_w2s over the
    /// config grid, averaged over seeds.
    fn correlations(rows: &[SweepRow]) -> Result<MetricCorrelations> {
        let mut seeds: Vec<u64> = rows.iter().map(|r| r.seed).collect();
        seeds.sort_unstable();
        seeds.dedup();
        let mut acc = [0.0f64; 5];
        for &s in &seeds {
            let cells: Vec<&SweepRow> = rows.iter().filter(|r| r.seed == s).collect();
            let err: Vec<f64> = cells.iter().map(|r| r.err_w2s).collect();
            let columns: [Vec<f64>; 5] = [
                cells.iter().map(|r| r.norm_ps_ipw).collect(),
                cells.iter().map(|r| r.norm_ps_ipw_ps).collect(),
                cells.iter().map(|r| r.theory_rhs).collect(),
                cells.iter().map(|r| r.bound1).collect(),
                cells.iter().map(|r| r.predgap).collect(),
            ];
            for (a, col) in acc.iter_mut().zip(&columns) {
                *a += spearman(col, &err)?;
            }
        }
        let n = seeds.len() as f64;
        Ok(MetricCorrelations {
            norm_ps_ipw: acc[0] / n,
            norm_ps_ipw_ps: acc[1] / n,
            theory_rhs: acc[2] / n,
            bound1: acc[3] / n,
            predgap: acc[4] / n,
        })
    }
}

// ---------------------------------------------------------------------------
// Pair specification and the per-cell pipeline
// ---------------------------------------------------------------------------

/// Generator pair for pipeline runs: the toy model or two spiked models
/// sharing labels.
#[derive(Debug, Clone)]
pub enum PairSpec {
    Toy(ToyPairConfig),
    Spiked {
        weak: SpikedConfig,
        strong: SpikedConfig,
    },
}

impl PairSpec {
    fn generate(&self, seed: u64) -> Result<(RepDataset, RepDataset)> {
        match self {
            PairSpec::Toy(cfg) => {
                let mut cfg = cfg.clone();
                cfg.seed = seed;
                datagen::gen_toy_pair(&cfg)
            }
            PairSpec::Spiked { weak, strong } => {
                let mut weak = weak.clone();
                let mut strong = strong.clone();
                weak.seed = seed;
                strong.seed = seed;
                datagen::gen_spiked_pair(&weak, &strong)
            }
        }
    }

    fn id(&self) -> String {
        match self {
            PairSpec::Toy(cfg) => format!("toy_eta_w={:.4}_eta_s={:.4}", cfg.eta_w, cfg.eta_s),
            PairSpec::Spiked { weak, strong } => {
                format!("spiked_kw={}_ks={}", weak.k, strong.k)
            }
        }
    }
}

/// Theory-side effective regularizations: weak `β_w + γ̃_w`, strong
/// `β_s + γ̂_s`, with γ taken from the generators' analytic σ².
fn theory_eff_regs(
    weak_ds: &RepDataset,
    strong_ds: &RepDataset,
    beta_w: f64,
    beta_s: f64,
) -> Result<(f64, f64)> {
    let gw = decomp::gamma_from_config(weak_ds)?;
    let gs = decomp::gamma_from_config(strong_ds)?;
    Ok((beta_w + gw.gamma_tilde, beta_s + gs.gamma_hat))
}

struct CellOutcome {
    row: SweepRow,
    err_w_hat: f64,
    eps_proj_y: f64,
    eps_proj_zeta: Option<f64>,
}

/// One full pipeline cell with the theoretical (analytic-subspace) P
/// operators: fits the three heads, evaluates all analytic errors, and
/// computes the projection metrics.
fn run_theory_cell(
    config_id: &str,
    seed: u64,
    weak_ds: &RepDataset,
    strong_ds: &RepDataset,
    beta_w: f64,
    beta_s: f64,
) -> Result<CellOutcome> {
    let weak_pop = weak_ds
        .population
        .as_ref()
        .ok_or(Error::MissingPopulation)?;
    let strong_pop = strong_ds
        .population
        .as_ref()
        .ok_or(Error::MissingPopulation)?;

    let (weak, w2s, ceiling) = finetune::fit_pipeline(weak_ds, strong_ds, beta_w, beta_s)?;
    let err_w = population_error_analytic(&weak, weak_pop)?;
    let err_w2s = population_error_analytic(&w2s, strong_pop)?;
    let err_sc = population_error_analytic(&ceiling, strong_pop)?;
    let predgap = pred_gap_analytic(&w2s, &ceiling, strong_pop)?;

    let weak_targets = predict(&weak, &weak_ds.hat.reps)?;
    let train_mse_w2s = empirical_mse(&predict(&w2s, &strong_ds.hat.reps)?, &weak_targets)?;

    let (reg_w, reg_s) = theory_eff_regs(weak_ds, strong_ds, beta_w, beta_s)?;
    let sub_w = subspace_analytic(weak_pop, false)?;
    let sub_s = subspace_analytic(strong_pop, false)?;
    let p_w = build_p_from_reps(&weak_ds.hat.reps, &sub_w, reg_w, Side::Weak)?;
    let p_s = build_p_from_reps(&strong_ds.hat.reps, &sub_s, reg_s, Side::Strong)?;

    let y_hat = &strong_ds.hat.labels;
    let theory_rhs = theory_predgap_rhs(&p_s, &p_w, y_hat)?;
    let metrics = w2s_metrics(&p_s, &p_w, y_hat, Some(err_sc))?;

    let eps = weak_error_vector(&p_w, y_hat)?;
    let eps_proj_y = projection::projection_coefficient(&eps, y_hat)?;
    let eps_proj_zeta = match &weak_ds.aux_hat_zeta {
        Some(zeta) => Some(projection::projection_coefficient(&eps, zeta)?),
        None => None,
    };
    let err_w_hat = empirical_mse(&weak_targets, y_hat)?;

    Ok(CellOutcome {
        row: SweepRow {
            config_id: config_id.to_string(),
            seed,
            err_w,
            err_w2s,
            err_sc,
            predgap,
            theory_rhs,
            norm_ps_ipw: metrics.norm_ps_ipw,
            norm_ps_ipw_ps: metrics.norm_ps_ipw_ps,
            bound1: metrics.bound1,
            bound2: metrics.bound2.unwrap_or(f64::NAN),
            train_mse_w2s,
        },
        err_w_hat,
        eps_proj_y,
        eps_proj_zeta,
    })
}

// ---------------------------------------------------------------------------
// run_thm31
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct Thm31Report {
    pub sweep: SweepResult,
    /// mean over seeds of |predgap − theory_rhs|
    pub mean_abs_gap: f64,
    /// max over seeds of predgap − bound1 (negative = bound satisfied)
    pub max_bound1_slack: f64,
    pub max_bound2_slack: f64,
}

/// Per seed: generate → fit pipeline → analytic-subspace P operators →
/// prediction gap vs `‖P_s(I−P_w)ŷ/√n̂‖²` and the two upper bounds.
pub fn run_thm31(spec: &PairSpec, seeds: &[u64], beta_w: f64, beta_s: f64) -> Result<Thm31Report> {
    if seeds.is_empty() {
        return Err(Error::ConfigViolation("at least one seed required".into()));
    }
    let id = spec.id();
    let mut rows = Vec::with_capacity(seeds.len());
    let mut gap_acc = 0.0;
    let mut b1 = f64::NEG_INFINITY;
    let mut b2 = f64::NEG_INFINITY;
    for &seed in seeds {
        let (weak_ds, strong_ds) = spec.generate(seed)?;
        let cell = run_theory_cell(&id, seed, &weak_ds, &strong_ds, beta_w, beta_s)?;
        gap_acc += (cell.row.predgap - cell.row.theory_rhs).abs();
        b1 = b1.max(cell.row.predgap - cell.row.bound1);
        b2 = b2.max(cell.row.predgap - cell.row.bound2);
        rows.push(cell.row);
    }
    Ok(Thm31Report {
        sweep: SweepResult::from_rows(rows)?,
        mean_abs_gap: gap_acc / seeds.len() as f64,
        max_bound1_slack: b1,
        max_bound2_slack: b2,
    })
}

// ---------------------------------------------------------------------------
// run_benign
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct BenignRow {
    pub seed: u64,
    /// empirical weak error on the hat split
    pub err_w_hat: f64,
    /// analytic population weak error
    pub err_w: f64,
    pub train_mse_w2s: f64,
    pub err_w2s: f64,
    pub err_sc: f64,
    /// ⟨ε_w, ŷ/√n̂⟩ / ‖ŷ/√n̂‖²
    pub eps_proj_y: f64,
    /// ⟨ε_w, ζ̂/√n̂⟩ / ‖ζ̂/√n̂‖²
    pub eps_proj_zeta: f64,
    /// err_w − theory_rhs (the Δ of the benign-overfitting condition)
    pub delta_check: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenignReport {
    pub sweep: SweepResult,
    pub rows: Vec<BenignRow>,
    pub mean_err_w: f64,
    pub mean_err_w2s: f64,
    pub mean_err_sc: f64,
    pub max_train_mse_w2s: f64,
    pub mean_eps_proj_y: f64,
    pub mean_eps_proj_zeta: f64,
    pub mean_delta_check: f64,
}

/// Benign-overfitting study on the toy pair. Requires `eta_s = 1` and
/// interpolation-scale regularization `β ≤ 0.01·σ²/n̂` on both sides.
pub fn run_benign(
    cfg: &ToyPairConfig,
    seeds: &[u64],
    beta_w: f64,
    beta_s: f64,
) -> Result<BenignReport> {
    cfg.validate()?;
    if cfg.eta_s != 1.0 {
        return Err(Error::ConfigViolation(
            "benign study requires eta_s = 1".into(),
        ));
    }
    let cap = 0.01 * cfg.sigma2 / cfg.n_hat as f64;
    if beta_w > cap || beta_s > cap {
        return Err(Error::ConfigViolation(format!(
            "benign study requires beta <= 0.01·sigma2/n_hat = {cap:e}"
        )));
    }
    if seeds.is_empty() {
        return Err(Error::ConfigViolation("at least one seed required".into()));
    }
    let spec = PairSpec::Toy(cfg.clone());
    let id = spec.id();
    let mut rows = Vec::new();
    let mut sweep_rows = Vec::new();
    for &seed in seeds {
        let (weak_ds, strong_ds) = spec.generate(seed)?;
        let cell = run_theory_cell(&id, seed, &weak_ds, &strong_ds, beta_w, beta_s)?;
        rows.push(BenignRow {
            seed,
            err_w_hat: cell.err_w_hat,
            err_w: cell.row.err_w,
            train_mse_w2s: cell.row.train_mse_w2s,
            err_w2s: cell.row.err_w2s,
            err_sc: cell.row.err_sc,
            eps_proj_y: cell.eps_proj_y,
            eps_proj_zeta: cell
                .eps_proj_zeta
                .expect("toy weak dataset always carries aux ζ"),
            delta_check: cell.row.err_w - cell.row.theory_rhs,
        });
        sweep_rows.push(cell.row);
    }
    let n = rows.len() as f64;
    let mean = |f: &dyn Fn(&BenignRow) -> f64| rows.iter().map(|r| f(r)).sum::<f64>() / n;
    Ok(BenignReport {
        sweep: SweepResult::from_rows(sweep_rows)?,
        mean_err_w: mean(&|r| r.err_w),
        mean_err_w2s: mean(&|r| r.err_w2s),
        mean_err_sc: mean(&|r| r.err_sc),
        max_train_mse_w2s: rows.iter().map(|r| r.train_mse_w2s).fold(0.0, f64::max),
        mean_eps_proj_y: mean(&|r| r.eps_proj_y),
        mean_eps_proj_zeta: mean(&|r| r.eps_proj_zeta),
        mean_delta_check: mean(&|r| r.delta_check),
        rows,
    })
}

// ---------------------------------------------------------------------------
// run_pythagoras
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct PythagorasRow {
    pub seed: u64,
    pub err_w2s: f64,
    pub predgap: f64,
    pub err_sc: f64,
    /// |err_w2s − (predgap + err_sc)|
    pub residual: f64,
    /// √err_w2s − (√predgap + √err_sc); ≤ 0 means the triangle bound holds
    pub triangle_slack: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PythagorasReport {
    pub sweep: SweepResult,
    pub rows: Vec<PythagorasRow>,
    pub mean_residual: f64,
    pub max_triangle_slack: f64,
    /// (β_s + γ̂_s) / λ_min,≠0(Σ'_s), enforced ≤ 0.05
    pub precondition_ratio: f64,
}

const PYTHAGORAS_RATIO_BOUND: f64 = 0.05;

/// Checks `Err_w2s = PredGap + Err_sc ± o(1)` under the small-regularization
/// precondition `(β_s + γ̂_s)/λ_min,≠0(Σ'_s) ≤ 0.05`.
pub fn run_pythagoras(
    spec: &PairSpec,
    seeds: &[u64],
    beta_w: f64,
    beta_s: f64,
) -> Result<PythagorasReport> {
    if seeds.is_empty() {
        return Err(Error::ConfigViolation("at least one seed required".into()));
    }
    // Enforce the precondition from the analytic population of the first cell.
    let (_, strong_probe) = spec.generate(seeds[0])?;
    let pop = strong_probe
        .population
        .as_ref()
        .ok_or(Error::MissingPopulation)?;
    let gamma_hat =
        pop.tail_total_variance().ok_or(Error::MissingPopulation)? / strong_probe.n_hat() as f64;
    let rho = pop.rho();
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::DegenerateData(
            "strong principal spectrum is empty".into(),
        ));
    }
    let ratio = (beta_s + gamma_hat) / rho;
    if ratio > PYTHAGORAS_RATIO_BOUND {
        return Err(Error::PreconditionRatioViolated {
            ratio,
            bound: PYTHAGORAS_RATIO_BOUND,
        });
    }
    drop(strong_probe);

    let id = spec.id();
    let mut rows = Vec::new();
    let mut sweep_rows = Vec::new();
    for &seed in seeds {
        let (weak_ds, strong_ds) = spec.generate(seed)?;
        let cell = run_theory_cell(&id, seed, &weak_ds, &strong_ds, beta_w, beta_s)?;
        let residual = (cell.row.err_w2s - (cell.row.predgap + cell.row.err_sc)).abs();
        let triangle_slack =
            cell.row.err_w2s.sqrt() - (cell.row.predgap.sqrt() + cell.row.err_sc.max(0.0).sqrt());
        rows.push(PythagorasRow {
            seed,
            err_w2s: cell.row.err_w2s,
            predgap: cell.row.predgap,
            err_sc: cell.row.err_sc,
            residual,
            triangle_slack,
        });
        sweep_rows.push(cell.row);
    }
    let mean_residual = rows.iter().map(|r| r.residual).sum::<f64>() / rows.len() as f64;
    let max_triangle_slack = rows
        .iter()
        .map(|r| r.triangle_slack)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(PythagorasReport {
        sweep: SweepResult::from_rows(sweep_rows)?,
        rows,
        mean_residual,
        max_triangle_slack,
        precondition_ratio: ratio,
    })
}

// ---------------------------------------------------------------------------
// run_metric_sweep
// ---------------------------------------------------------------------------

/// Empirical projection pipeline settings: threshold-selected subspaces
/// with a user-supplied effective regularization.
#[derive(Debug, Clone, Serialize)]
pub struct EmpiricalProjection {
    pub mode: ThresholdMode,
    pub alpha_w: f64,
    pub alpha_s: f64,
    pub beta_eff_w: f64,
    pub beta_eff_s: f64,
    pub bias: bool,
}

/// Metric-vs-error sweep: per seed the strong model is fixed and the weak
/// model varies over `weak_grid` (values of `eta_w`) on the same underlying
/// samples. Metrics come from the empirical projection pipeline; errors are
/// analytic. The result carries seed-averaged Spearman correlations.
pub fn run_metric_sweep(
    strong_cfg: &ToyPairConfig,
    weak_grid: &[f64],
    seeds: &[u64],
    beta_w: f64,
    beta_s: f64,
    proj: &EmpiricalProjection,
) -> Result<SweepResult> {
    strong_cfg.validate()?;
    if weak_grid.len() < 5 {
        return Err(Error::ConfigViolation(
            "metric sweep needs at least 5 grid points".into(),
        ));
    }
    if seeds.is_empty() {
        return Err(Error::ConfigViolation("at least one seed required".into()));
    }
    let mut rows = Vec::with_capacity(weak_grid.len() * seeds.len());
    for &seed in seeds {
        let mut cfg = strong_cfg.clone();
        cfg.seed = seed;
        let strong_ds = gen_toy_strong(&cfg)?;
        let strong_pop = strong_ds
            .population
            .as_ref()
            .ok_or(Error::MissingPopulation)?;
        let strong_gram = strong_ds.hat.reps.gram();
        let sub_s = subspace_empirical(&strong_ds.hat.reps, proj.mode, proj.alpha_s, proj.bias)?;
        let p_s = build_p_from_reps(&strong_ds.hat.reps, &sub_s, proj.beta_eff_s, Side::Strong)?;
        let ceiling_weights = finetune::fit_weights_dual_with_gram(
            &strong_ds.hat.reps,
            &strong_gram,
            &strong_ds.hat.labels,
            beta_s,
        )?;
        let ceiling = crate::finetune::RidgeHead {
            weights: ceiling_weights,
            beta: beta_s,
            bias: false,
            role: Some(crate::finetune::Role::Ceiling),
        };
        let err_sc = population_error_analytic(&ceiling, strong_pop)?;

        for &eta_w in weak_grid {
            let mut wcfg = cfg.clone();
            wcfg.eta_w = eta_w;
            let weak_ds = gen_toy_weak(&wcfg)?;
            let weak_pop = weak_ds
                .population
                .as_ref()
                .ok_or(Error::MissingPopulation)?;
            let (weak, w2s, _) =
                fit_pipeline_with_gram(&weak_ds, &strong_ds, beta_w, beta_s, Some(&strong_gram))?;
            let err_w = population_error_analytic(&weak, weak_pop)?;
            let err_w2s = population_error_analytic(&w2s, strong_pop)?;
            let predgap = pred_gap_analytic(&w2s, &ceiling, strong_pop)?;
            let weak_targets = predict(&weak, &weak_ds.hat.reps)?;
            let train_mse_w2s = empirical_mse(&predict(&w2s, &strong_ds.hat.reps)?, &weak_targets)?;

            let sub_w = subspace_empirical(&weak_ds.hat.reps, proj.mode, proj.alpha_w, proj.bias)?;
            let p_w = build_p_from_reps(&weak_ds.hat.reps, &sub_w, proj.beta_eff_w, Side::Weak)?;
            let y_hat = &strong_ds.hat.labels;
            let theory_rhs = theory_predgap_rhs(&p_s, &p_w, y_hat)?;
            let metrics = w2s_metrics(&p_s, &p_w, y_hat, Some(err_sc))?;

            rows.push(SweepRow {
                config_id: format!("eta_w={eta_w:.4}"),
                seed,
                err_w,
                err_w2s,
                err_sc,
                predgap,
                theory_rhs,
                norm_ps_ipw: metrics.norm_ps_ipw,
                norm_ps_ipw_ps: metrics.norm_ps_ipw_ps,
                bound1: metrics.bound1,
                bound2: metrics.bound2.unwrap_or(f64::NAN),
                train_mse_w2s,
            });
        }
    }
    // deterministic order: config first, then seed
    rows.sort_by(|a, b| a.config_id.cmp(&b.config_id).then(a.seed.cmp(&b.seed)));
    SweepResult::from_rows(rows)
}

#[cfg(test)]
mod tests;
