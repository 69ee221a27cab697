//! Command implementations.

use std::path::Path;

use serde::Serialize;
use w2s_core::datagen::{self, DatasetFormat, RepDataset};
use w2s_core::finetune::{
    self, fit_pipeline, population_error, pred_gap, predict, Estimate, EvalReport, RidgeHead,
};
use w2s_core::harness::{
    run_benign, run_metric_sweep, run_pythagoras, run_thm31, AggregateRow, EmpiricalProjection,
    MetricCorrelations, PairSpec,
};
use w2s_core::projection::{
    self, build_p_from_reps, subspace_analytic, subspace_empirical, MetricReport,
    ProjectionOperator, Side,
};
use w2s_core::{decomp, Error};

use crate::config::{require_path, GeneratorBlock, RunConfig};
use crate::svg;
use crate::{jsonfmt, CliError};

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| CliError::Data(format!("writing {}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    jsonfmt::to_string(value).map_err(|e| CliError::Numerical(format!("json: {e}")))
}

fn single_seed(cfg: &RunConfig) -> u64 {
    cfg.seeds.as_ref().map(|s| s.seeds()[0]).unwrap_or_else(|| {
        std::env::var("W2S_SEED")
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or(0)
    })
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

fn write_dataset(ds: &RepDataset, path: &Path, format: DatasetFormat) -> Result<(), CliError> {
    match format {
        DatasetFormat::Binary => datagen::write_binary(ds, path)?,
        DatasetFormat::Csv => datagen::write_csv(ds, path)?,
    }
    Ok(())
}

pub fn cmd_gen(cfg: &RunConfig) -> Result<(), CliError> {
    let io = cfg.io()?;
    let format = io.format.unwrap_or(DatasetFormat::Binary);
    let seed = single_seed(cfg);
    match cfg.generator()? {
        GeneratorBlock::Toy(toy) => {
            let mut toy = toy.clone();
            toy.seed = seed;
            let (weak, strong) = datagen::gen_toy_pair(&toy)?;
            let weak_path = require_path("out_weak", &io.out_weak)?;
            let strong_path = require_path("out_strong", &io.out_strong)?;
            write_dataset(&weak, weak_path, format)?;
            write_dataset(&strong, strong_path, format)?;
            println!(
                "wrote {} and {}",
                weak_path.display(),
                strong_path.display()
            );
        }
        GeneratorBlock::Spiked(sp) => {
            let mut sp = sp.clone();
            sp.seed = seed;
            let ds = datagen::gen_spiked(&sp)?;
            let path = require_path("out", &io.out)?;
            write_dataset(&ds, path, format)?;
            println!("wrote {}", path.display());
        }
        GeneratorBlock::Bounded(b) => {
            let mut b = b.clone();
            b.seed = seed;
            let ds = datagen::gen_bounded(&b)?;
            let path = require_path("out", &io.out)?;
            write_dataset(&ds, path, format)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// input loading shared by fit / metric
// ---------------------------------------------------------------------------

fn read_dataset(path: &Path, format: DatasetFormat) -> Result<RepDataset, CliError> {
    let ds = match format {
        DatasetFormat::Binary => datagen::read_binary(path)?,
        DatasetFormat::Csv => datagen::read_csv(path)?,
    };
    Ok(ds)
}

/// Model pair from `io.in_weak`/`io.in_strong` when given, otherwise
/// generated from the [generator] block (toy only).
fn load_or_generate_pair(cfg: &RunConfig) -> Result<(RepDataset, RepDataset), CliError> {
    let io = cfg.io()?;
    match (&io.in_weak, &io.in_strong) {
        (Some(w), Some(s)) => {
            let format = io.format.unwrap_or(DatasetFormat::Binary);
            Ok((read_dataset(w, format)?, read_dataset(s, format)?))
        }
        (None, None) => {
            let toy = cfg.toy_generator()?;
            let mut toy = toy.clone();
            toy.seed = single_seed(cfg);
            Ok(datagen::gen_toy_pair(&toy)?)
        }
        _ => Err(CliError::Config(
            "need both io.in_weak and io.in_strong (or neither plus a [generator])".into(),
        )),
    }
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct HeadReport {
    head: RidgeHead,
    eval: EvalReport,
}

#[derive(Serialize)]
struct FitReport {
    weak: HeadReport,
    w2s: HeadReport,
    ceiling: HeadReport,
    predgap: Estimate,
}

pub fn cmd_fit(cfg: &RunConfig) -> Result<(), CliError> {
    let beta = cfg.beta()?;
    let io = cfg.io()?;
    let (weak_ds, strong_ds) = load_or_generate_pair(cfg)?;
    let (weak, w2s, ceiling) = fit_pipeline(&weak_ds, &strong_ds, beta.beta_w, beta.beta_s)?;
    let weak_targets = predict(&weak, &weak_ds.hat.reps)?;
    let predgap = pred_gap(&w2s, &ceiling, &strong_ds)?;
    let report = FitReport {
        weak: HeadReport {
            eval: finetune::evaluate(&weak, &weak_ds.tilde.reps, &weak_ds.tilde.labels, &weak_ds)?,
            head: weak,
        },
        w2s: HeadReport {
            eval: finetune::evaluate(&w2s, &strong_ds.hat.reps, &weak_targets, &strong_ds)?,
            head: w2s,
        },
        ceiling: HeadReport {
            eval: finetune::evaluate(
                &ceiling,
                &strong_ds.hat.reps,
                &strong_ds.hat.labels,
                &strong_ds,
            )?,
            head: ceiling,
        },
        predgap,
    };
    let path = require_path("out_json", &io.out_json)?;
    write_text(path, &to_json(&report)?)?;
    println!("wrote {}", path.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// metric
// ---------------------------------------------------------------------------

fn projection_operators(
    cfg: &RunConfig,
    weak_ds: &RepDataset,
    strong_ds: &RepDataset,
) -> Result<(ProjectionOperator, ProjectionOperator), CliError> {
    let proj = cfg.projection()?;
    let beta = cfg.beta()?;
    match proj.mode.threshold_mode() {
        None => {
            // analytic mode: theory effective regularizations β + γ
            let weak_pop = weak_ds
                .population
                .as_ref()
                .ok_or(Error::MissingPopulation)?;
            let strong_pop = strong_ds
                .population
                .as_ref()
                .ok_or(Error::MissingPopulation)?;
            let gw = decomp::gamma_from_config(weak_ds)?;
            let gs = decomp::gamma_from_config(strong_ds)?;
            let sub_w = subspace_analytic(weak_pop, proj.bias)?;
            let sub_s = subspace_analytic(strong_pop, proj.bias)?;
            let p_w = build_p_from_reps(
                &weak_ds.hat.reps,
                &sub_w,
                beta.beta_w + gw.gamma_tilde,
                Side::Weak,
            )?;
            let p_s = build_p_from_reps(
                &strong_ds.hat.reps,
                &sub_s,
                beta.beta_s + gs.gamma_hat,
                Side::Strong,
            )?;
            Ok((p_w, p_s))
        }
        Some(mode) => {
            let beta_eff_w = beta.beta_eff_w.ok_or_else(|| {
                CliError::Config("empirical projection mode requires beta.beta_eff_w".into())
            })?;
            let beta_eff_s = beta.beta_eff_s.ok_or_else(|| {
                CliError::Config("empirical projection mode requires beta.beta_eff_s".into())
            })?;
            let sub_w = subspace_empirical(&weak_ds.hat.reps, mode, proj.alpha_w, proj.bias)?;
            let sub_s = subspace_empirical(&strong_ds.hat.reps, mode, proj.alpha_s, proj.bias)?;
            let p_w = build_p_from_reps(&weak_ds.hat.reps, &sub_w, beta_eff_w, Side::Weak)?;
            let p_s = build_p_from_reps(&strong_ds.hat.reps, &sub_s, beta_eff_s, Side::Strong)?;
            Ok((p_w, p_s))
        }
    }
}

pub fn cmd_metric(cfg: &RunConfig) -> Result<(), CliError> {
    let beta = cfg.beta()?;
    let io = cfg.io()?;
    let (weak_ds, strong_ds) = load_or_generate_pair(cfg)?;
    if weak_ds.hat.n() != strong_ds.hat.n() {
        return Err(CliError::Data(format!(
            "hat splits disagree: {} vs {} samples",
            weak_ds.hat.n(),
            strong_ds.hat.n()
        )));
    }
    let (weak, w2s, ceiling) = fit_pipeline(&weak_ds, &strong_ds, beta.beta_w, beta.beta_s)?;
    let err_w = population_error(&weak, &weak_ds)?;
    let err_w2s = population_error(&w2s, &strong_ds)?;
    let err_sc = population_error(&ceiling, &strong_ds)?;
    let predgap = pred_gap(&w2s, &ceiling, &strong_ds)?;

    let (p_w, p_s) = projection_operators(cfg, &weak_ds, &strong_ds)?;
    let y_hat = &strong_ds.hat.labels;
    let theory_rhs = projection::theory_predgap_rhs(&p_s, &p_w, y_hat)?;
    let fragment = projection::w2s_metrics(&p_s, &p_w, y_hat, Some(err_sc.value))?;

    let report = MetricReport {
        predgap,
        theory_rhs,
        norm_ps_ipw: fragment.norm_ps_ipw,
        norm_ps_ipw_ps: fragment.norm_ps_ipw_ps,
        bound1: fragment.bound1,
        bound2: fragment.bound2,
        c: fragment.c,
        err_w: err_w.value,
        err_w2s: err_w2s.value,
        err_sc: err_sc.value,
    };
    let path = require_path("out_json", &io.out_json)?;
    write_text(path, &to_json(&report)?)?;
    println!("wrote {}", path.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

pub fn cmd_validate(cfg: &RunConfig, which: &str) -> Result<(), CliError> {
    let beta = cfg.beta()?;
    let seeds = cfg.seeds()?.seeds();
    let io = cfg.io()?;
    let toy = cfg.toy_generator()?.clone();
    let path = require_path("out_json", &io.out_json)?;
    match which {
        "thm31" => {
            let report = run_thm31(&PairSpec::Toy(toy), &seeds, beta.beta_w, beta.beta_s)?;
            write_text(path, &to_json(&report)?)?;
            println!(
                "thm31: mean |predgap − theory_rhs| = {:.4} over {} seeds",
                report.mean_abs_gap,
                seeds.len()
            );
        }
        "benign" => {
            let report = run_benign(&toy, &seeds, beta.beta_w, beta.beta_s)?;
            write_text(path, &to_json(&report)?)?;
            println!(
                "benign: mean_err_w = {:.4}, mean_err_w2s = {:.4}, max w2s train mse = {:.2e}",
                report.mean_err_w, report.mean_err_w2s, report.max_train_mse_w2s
            );
        }
        "pythagoras" => {
            let report = run_pythagoras(&PairSpec::Toy(toy), &seeds, beta.beta_w, beta.beta_s)?;
            write_text(path, &to_json(&report)?)?;
            println!(
                "pythagoras: mean residual = {:.4}, precondition ratio = {:.4}",
                report.mean_residual, report.precondition_ratio
            );
        }
        _ => unreachable!("main vets the subcommand"),
    }
    println!("wrote {}", path.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SweepSummary<'a> {
    aggregates: &'a [AggregateRow],
    correlations: &'a Option<MetricCorrelations>,
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<(), CliError> {
    let beta = cfg.beta()?;
    let proj = cfg.projection()?;
    let io = cfg.io()?;
    let seeds = cfg.seeds()?.seeds();
    let toy = cfg.toy_generator()?.clone();
    let grid = &cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [sweep] block".into()))?
        .eta_grid;
    let mode = proj.mode.threshold_mode().ok_or_else(|| {
        CliError::Config(
            "sweep uses the empirical pipeline: projection.mode must be pca or variance".into(),
        )
    })?;
    let empirical = EmpiricalProjection {
        mode,
        alpha_w: proj.alpha_w,
        alpha_s: proj.alpha_s,
        beta_eff_w: cfg
            .beta()?
            .beta_eff_w
            .ok_or_else(|| CliError::Config("sweep requires beta.beta_eff_w".into()))?,
        beta_eff_s: cfg
            .beta()?
            .beta_eff_s
            .ok_or_else(|| CliError::Config("sweep requires beta.beta_eff_s".into()))?,
        bias: proj.bias,
    };
    let result = run_metric_sweep(&toy, grid, &seeds, beta.beta_w, beta.beta_s, &empirical)?;
    let csv_path = require_path("out_csv", &io.out_csv)?;
    write_text(csv_path, &result.to_csv())?;
    let json_path = require_path("out_json", &io.out_json)?;
    let summary = SweepSummary {
        aggregates: &result.aggregates,
        correlations: &result.correlations,
    };
    write_text(json_path, &to_json(&summary)?)?;
    if let Some(c) = &result.correlations {
        println!(
            "sweep: rho(norm_ps_ipw, err_w2s) = {:.3}, rho(norm_ps_ipw_ps, err_w2s) = {:.3}",
            c.norm_ps_ipw, c.norm_ps_ipw_ps
        );
    }
    println!("wrote {} and {}", csv_path.display(), json_path.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

pub fn cmd_report(cfg: &RunConfig) -> Result<(), CliError> {
    let io = cfg.io()?;
    let metric = &cfg
        .report
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [report] block".into()))?
        .metric;
    let csv_path = require_path("in_csv", &io.in_csv)?;
    let csv = std::fs::read_to_string(csv_path)
        .map_err(|e| CliError::Data(format!("reading {}: {e}", csv_path.display())))?;
    let data = svg::scatter_from_csv(&csv, metric)?;
    let out = require_path("out_svg", &io.out_svg)?;
    write_text(out, &svg::render_scatter(&data))?;
    println!("wrote {}", out.display());
    Ok(())
}
