//! Decomposability diagnostics: the raw magnitudes behind conditions (a)-(e)
//! of the `(δ, γ̂, γ̃)`-decomposability definition, for a dataset and a
//! candidate principal subspace.
//!
//! The conditions themselves are asymptotic (`o(·)` statements), so this
//! module never passes judgment: it reports the magnitudes together with the
//! comparison scales (`γ²+δ²+ρ²`, `γ+δ+ρ`, ...) and their ratios, and leaves
//! interpretation to the caller.

use numlin::vecops::{mean_sq, norm2, sub};
use numlin::Matrix;
use serde::Serialize;

use crate::datagen::{PopulationSummary, RepDataset, SigmaSpec, Split};
use crate::projection::PrincipalSubspace;
use crate::{Error, Result};

/// Parameters of the decomposability definition.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecompParams {
    pub delta: f64,
    pub gamma_hat: f64,
    pub gamma_tilde: f64,
    /// `min(γ̂, γ̃)`, maintained by the constructor.
    pub gamma: f64,
    /// `λ_min,≠0(Σ(Π_V h))`.
    pub rho: f64,
}

impl DecompParams {
    pub fn new(delta: f64, gamma_hat: f64, gamma_tilde: f64, rho: f64) -> Result<Self> {
        if delta < 0.0 || gamma_hat < 0.0 || gamma_tilde < 0.0 || rho < 0.0 {
            return Err(Error::ConfigViolation(
                "decomposability parameters must be >= 0".into(),
            ));
        }
        Ok(DecompParams {
            delta,
            gamma_hat,
            gamma_tilde,
            gamma: gamma_hat.min(gamma_tilde),
            rho,
        })
    }
}

/// Analytic parameters from the generator's population summary:
/// `γ̂ = σ²/n̂`, `γ̃ = σ²/ñ`, `δ = 0`, `ρ` from the principal spectrum.
pub fn gamma_from_config(ds: &RepDataset) -> Result<DecompParams> {
    let pop = ds.population.as_ref().ok_or(Error::MissingPopulation)?;
    let sigma2 = pop.tail_total_variance().ok_or(Error::MissingPopulation)?;
    let rho = pop.rho();
    let rho = if rho.is_finite() { rho } else { 0.0 };
    DecompParams::new(
        0.0,
        sigma2 / ds.n_hat() as f64,
        sigma2 / ds.n_tilde() as f64,
        rho,
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundednessReport {
    pub sigma_op: f64,
    pub sigma_hat_op: f64,
    pub sigma_tilde_op: f64,
    pub e_y2: f64,
    pub mean_y2_hat: f64,
    pub mean_y2_tilde: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationReport {
    /// `‖Σ̂(Π_V h) − Σ(Π_V h)‖`.
    pub cov_hat: f64,
    pub cov_tilde: f64,
    /// `‖(1/n̂)Σ Π_V h(x̂ᵢ)ŷᵢ − E[Π_V h·y]‖`.
    pub ry_hat: f64,
    pub ry_tilde: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct IsotropyReport {
    /// `‖K̂(Π_{V⊥}h)/n̂ − γ̂·I‖`.
    pub hat: f64,
    pub tilde: f64,
}

/// Comparison scales of the definition, derived from the parameters.
#[derive(Debug, Clone, Serialize)]
pub struct DecompScales {
    /// `γ² + δ² + ρ²` (covariance concentration scale).
    pub concentration_sq: f64,
    /// `γ + δ + ρ` (rep-label concentration scale).
    pub concentration: f64,
    /// `γ² + δ²` (kernel isotropy scale).
    pub isotropy: f64,
    /// `γ + δ` (cross-sample and tail scale).
    pub cross: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompReport {
    pub a_bounds: BoundednessReport,
    pub b_concentration: ConcentrationReport,
    pub c_isotropy: IsotropyReport,
    pub d_cross: f64,
    pub e_tail: f64,
    pub scales: DecompScales,
    /// Magnitude / scale for the scaled conditions (b)-(e), in report order.
    pub ratios: Vec<f64>,
}

fn subspace_gram(split: &Split, basis: &Matrix) -> Matrix {
    // K(Π h) = Bᵀ B for B = U'ᵀ R
    basis.t_mul(&split.reps).gram()
}

/// `‖Σ̂(Π_V h) − Σ(Π_V h)‖` computed in the k-dimensional basis: both
/// operators are congruent to their `U'ᵀ · U'` compressions.
fn concentration_cov(split: &Split, basis: &Matrix, pop: &PopulationSummary) -> Result<f64> {
    let b = basis.t_mul(&split.reps);
    let emp = b.mul_t(&b).scaled(1.0 / split.n() as f64);
    let k = basis.cols();
    let mut anal = Matrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let v = pop.bilinear(basis.col(i), basis.col(j));
            anal[(i, j)] = v;
            anal[(j, i)] = v;
        }
    }
    numlin::operator_norm_sym(&emp.sub(&anal)).map_err(Error::from)
}

fn concentration_ry(split: &Split, basis: &Matrix, pop: &PopulationSummary) -> f64 {
    let n = split.n() as f64;
    // U'ᵀ (1/n) R y
    let mut emp = vec![0.0; basis.cols()];
    for j in 0..split.n() {
        let w = split.labels[j] / n;
        let proj = basis.tr_matvec(split.reps.col(j));
        for (e, p) in emp.iter_mut().zip(&proj) {
            *e += w * p;
        }
    }
    let anal = basis.tr_matvec(&pop.e_ry);
    norm2(&sub(&emp, &anal))
}

/// `‖Σ(Π_{V⊥} h)‖` for a block-plus-tail population. The operator is block
/// diagonal over span(blocks ∪ U') and its complement, where it acts as
/// `v·I`; the finite part is assembled in an orthonormal basis of the span.
fn population_tail_norm(pop: &PopulationSummary, subspace_basis: &Matrix) -> Result<f64> {
    let d = pop.dim;
    let k = subspace_basis.cols();
    if k == d {
        return Ok(0.0);
    }
    let (blocks, tail) = match &pop.sigma {
        SigmaSpec::Blocks { blocks, tail } => (blocks, tail),
        SigmaSpec::Lifted { .. } => {
            return Err(Error::ConfigViolation(
                "tail norm for lifted populations is not supported; supply an MC estimate".into(),
            ))
        }
    };
    let tail_var = tail.map(|t| t.variance).unwrap_or(0.0);
    // Orthonormal basis W of span(blocks) + span(U') by Gram-Schmidt.
    let total: usize = blocks.iter().map(|b| b.basis.cols()).sum::<usize>() + k;
    let mut w_cols: Vec<Vec<f64>> = Vec::with_capacity(total);
    let push = |v: &[f64], w_cols: &mut Vec<Vec<f64>>| {
        let mut v = v.to_vec();
        for _ in 0..2 {
            for u in w_cols.iter() {
                let p = numlin::vecops::dot(u, &v);
                for (x, &b) in v.iter_mut().zip(u) {
                    *x -= p * b;
                }
            }
        }
        let n = norm2(&v);
        if n > 1e-10 {
            for x in v.iter_mut() {
                *x /= n;
            }
            w_cols.push(v);
        }
    };
    for b in blocks {
        for j in 0..b.basis.cols() {
            push(b.basis.col(j), &mut w_cols);
        }
    }
    for j in 0..k {
        push(subspace_basis.col(j), &mut w_cols);
    }
    let m = w_cols.len();
    let mut w = Matrix::zeros(d, m);
    for (j, c) in w_cols.iter().enumerate() {
        w.col_mut(j).copy_from_slice(c);
    }
    // Π⊥ Σ Π⊥ restricted to span(W), in W coordinates.
    let g = w.t_mul(subspace_basis); // m×k, coordinates of U' in W
    let mut proj_c = Matrix::identity(m); // I − GGᵀ
    let ggt = g.mul_t(&g);
    proj_c = proj_c.sub(&ggt);
    // Σ in W coordinates: Σ_b λ_b (WᵀU_b)(WᵀU_b)ᵀ + v(I − Σ_b ...)
    let mut sigma_w = Matrix::identity(m).scaled(tail_var);
    for b in blocks {
        let wb = w.t_mul(&b.basis); // m×kb
        let outer = wb.mul_t(&wb);
        sigma_w = sigma_w.add(&outer.scaled(b.eigenvalue - tail_var));
    }
    let inner = proj_c.mul(&sigma_w).mul(&proj_c);
    let finite_part = numlin::operator_norm(&inner)?;
    // Outside span(W): Π⊥ = I and Σ = v·I (whenever dim > m).
    let outside = if d > m { tail_var } else { 0.0 };
    Ok(finite_part.max(outside))
}

/// Computes the condition-(a)-(e) magnitudes for `ds` against `subspace`,
/// with `params` supplying `γ̂`, `γ̃`, `δ`, `ρ`. Population quantities come
/// from the dataset's summary (analytic or estimated).
pub fn decomposability_report(
    ds: &RepDataset,
    subspace: &PrincipalSubspace,
    params: &DecompParams,
) -> Result<DecompReport> {
    let pop = ds.population.as_ref().ok_or(Error::MissingPopulation)?;
    let basis = &subspace.basis;
    if basis.rows() != ds.dim {
        return Err(Error::DimensionMismatch(format!(
            "subspace dim {} vs dataset dim {}",
            basis.rows(),
            ds.dim
        )));
    }
    let full_space = basis.cols() == ds.dim;
    let n_hat = ds.n_hat() as f64;
    let n_tilde = ds.n_tilde() as f64;

    // ‖Σ̂‖ through whichever side of R Rᵀ / Rᵀ R is smaller; the isotropy
    // items below need the full n×n Grams, so reuse them when they exist.
    let need_grams = !full_space;
    let gram_hat = need_grams.then(|| ds.hat.reps.gram());
    let gram_tilde = need_grams.then(|| ds.tilde.reps.gram());
    let cov_top = |split: &Split, gram: &Option<Matrix>| -> Result<f64> {
        let n = split.n() as f64;
        let small = if split.dim() <= split.n() {
            split.reps.mul_t(&split.reps)
        } else if let Some(g) = gram {
            g.clone()
        } else {
            split.reps.gram()
        };
        Ok(numlin::sym_eigenvalues(&small.scaled(1.0 / n))?
            .first()
            .copied()
            .unwrap_or(0.0))
    };

    let a_bounds = BoundednessReport {
        sigma_op: pop.sigma_op_norm(),
        sigma_hat_op: cov_top(&ds.hat, &gram_hat)?,
        sigma_tilde_op: cov_top(&ds.tilde, &gram_tilde)?,
        e_y2: pop.e_y2,
        mean_y2_hat: mean_sq(&ds.hat.labels),
        mean_y2_tilde: mean_sq(&ds.tilde.labels),
    };

    let b_concentration = ConcentrationReport {
        cov_hat: concentration_cov(&ds.hat, basis, pop)?,
        cov_tilde: concentration_cov(&ds.tilde, basis, pop)?,
        ry_hat: concentration_ry(&ds.hat, basis, pop),
        ry_tilde: concentration_ry(&ds.tilde, basis, pop),
    };

    // K'' = K − K(Π_V h); for the full space it is exactly the zero matrix,
    // so ‖K''/n − γI‖ = γ and the cross-sample block vanishes.
    let (c_isotropy, d_cross) = if full_space {
        (
            IsotropyReport {
                hat: params.gamma_hat,
                tilde: params.gamma_tilde,
            },
            0.0,
        )
    } else {
        let iso = |split: &Split, gram: &Matrix, n: f64, gamma: f64| -> Result<f64> {
            let principal = subspace_gram(split, basis);
            let mut residual = gram.sub(&principal).scaled(1.0 / n);
            for i in 0..residual.rows() {
                residual[(i, i)] -= gamma;
            }
            numlin::operator_norm_sym(&residual).map_err(Error::from)
        };
        let hat = iso(&ds.hat, gram_hat.as_ref().unwrap(), n_hat, params.gamma_hat)?;
        let tilde = iso(
            &ds.tilde,
            gram_tilde.as_ref().unwrap(),
            n_tilde,
            params.gamma_tilde,
        )?;

        let cross_full = ds.hat.reps.t_mul(&ds.tilde.reps);
        let bh = basis.t_mul(&ds.hat.reps);
        let bt = basis.t_mul(&ds.tilde.reps);
        let cross_principal = bh.t_mul(&bt);
        let cross = cross_full
            .sub(&cross_principal)
            .scaled(1.0 / (n_hat * n_tilde).sqrt());
        (
            IsotropyReport { hat, tilde },
            numlin::operator_norm(&cross)?,
        )
    };

    let e_tail = if full_space {
        0.0
    } else {
        population_tail_norm(pop, basis)?
    };

    let scales = DecompScales {
        concentration_sq: params.gamma * params.gamma
            + params.delta * params.delta
            + params.rho * params.rho,
        concentration: params.gamma + params.delta + params.rho,
        isotropy: params.gamma * params.gamma + params.delta * params.delta,
        cross: params.gamma + params.delta,
    };
    let ratio = |m: f64, s: f64| {
        if s > 0.0 {
            m / s
        } else if m == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    };
    let ratios = vec![
        ratio(b_concentration.cov_hat, scales.concentration_sq),
        ratio(b_concentration.cov_tilde, scales.concentration_sq),
        ratio(b_concentration.ry_hat, scales.concentration),
        ratio(b_concentration.ry_tilde, scales.concentration),
        ratio(c_isotropy.hat, scales.isotropy),
        ratio(c_isotropy.tilde, scales.isotropy),
        ratio(d_cross, scales.cross),
        ratio(e_tail, scales.cross),
    ];

    Ok(DecompReport {
        a_bounds,
        b_concentration,
        c_isotropy,
        d_cross,
        e_tail,
        scales,
        ratios,
    })
}

/// Kernel isotropy magnitudes alone (condition (c)); the fast path for the
/// large-`d` scaling studies, which need nothing else.
pub fn isotropy_only(
    ds: &RepDataset,
    principal_rows: usize,
    params: &DecompParams,
) -> Result<IsotropyReport> {
    let iso = |split: &Split, gamma: f64| -> Result<f64> {
        let n = split.n() as f64;
        let mut residual = split
            .reps
            .gram_of_rows(principal_rows, ds.dim)
            .scaled(1.0 / n);
        for i in 0..residual.rows() {
            residual[(i, i)] -= gamma;
        }
        numlin::operator_norm_sym(&residual).map_err(Error::from)
    };
    Ok(IsotropyReport {
        hat: iso(&ds.hat, params.gamma_hat)?,
        tilde: iso(&ds.tilde, params.gamma_tilde)?,
    })
}
