//! Synthetic representation generators and dataset containers.
//!
//! Datasets carry two labeled splits — `tilde` (weak finetuning) and `hat`
//! (W2S finetuning) — plus an optional test split and an optional population
//! summary. Splits are drawn i.i.d. and independently of each other; within
//! a sample the pair generators share the label (and, for the toy model, the
//! coupling noise ζ) between the weak and strong representations.
//!
//! Determinism: every random quantity comes from a named stream derived from
//! the master seed (see [`crate::rng`]), one stream per column. Identical
//! configs therefore produce bit-identical datasets, and the strong half of
//! the toy pair does not depend on `eta_w`.

use numlin::vecops::{self, dot};
use numlin::Matrix;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::rng::{normal, rademacher, stream_rng, unit};
use crate::{Error, Result};

mod io;
mod population;

pub use io::{read_binary, read_csv, write_binary, write_csv, DatasetFormat};
pub use population::{IsotropicTail, PopulationSource, PopulationSummary, SigmaBlock, SigmaSpec};

/// One labeled split: representations are `d×n`, one column per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub reps: Matrix,
    pub labels: Vec<f64>,
}

impl Split {
    pub fn new(reps: Matrix, labels: Vec<f64>) -> Self {
        Split { reps, labels }
    }

    pub fn empty(dim: usize) -> Self {
        Split {
            reps: Matrix::zeros(dim, 0),
            labels: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.reps.cols()
    }

    pub fn dim(&self) -> usize {
        self.reps.rows()
    }

    fn validate(&self, what: &str) -> Result<()> {
        if self.labels.len() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "{what}: {} labels for {} samples",
                self.labels.len(),
                self.n()
            )));
        }
        if !self.reps.all_finite() || !vecops::all_finite(&self.labels) {
            return Err(Error::NonFiniteEntry);
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RepDataset {
    pub dim: usize,
    pub tilde: Split,
    pub hat: Split,
    pub test: Option<Split>,
    pub population: Option<PopulationSummary>,
    /// ζ draws on the hat split (toy model only).
    pub aux_hat_zeta: Option<Vec<f64>>,
}

impl RepDataset {
    pub fn n_hat(&self) -> usize {
        self.hat.n()
    }

    pub fn n_tilde(&self) -> usize {
        self.tilde.n()
    }

    pub fn validate(&self) -> Result<()> {
        self.tilde.validate("tilde split")?;
        self.hat.validate("hat split")?;
        if let Some(t) = &self.test {
            t.validate("test split")?;
        }
        for (name, d) in [("tilde", self.tilde.dim()), ("hat", self.hat.dim())] {
            if d != self.dim {
                return Err(Error::DimensionMismatch(format!(
                    "{name} split has dim {d}, dataset says {}",
                    self.dim
                )));
            }
        }
        if let Some(z) = &self.aux_hat_zeta {
            if z.len() != self.hat.n() {
                return Err(Error::DimensionMismatch(format!(
                    "aux_hat_zeta has length {}, hat split has {} samples",
                    z.len(),
                    self.hat.n()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailFamily {
    Gaussian,
    RademacherScaled,
    UniformScaled,
}

impl TailFamily {
    /// Zero-mean draw with unit variance.
    fn draw_unit(self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            TailFamily::Gaussian => normal(rng),
            TailFamily::RademacherScaled => rademacher(rng),
            // uniform on [-√3, √3) has variance 1
            TailFamily::UniformScaled => (unit(rng) * 2.0 - 1.0) * 3f64.sqrt(),
        }
    }
}

// ---------------------------------------------------------------------------
// Configs
// ---------------------------------------------------------------------------

/// Sub-Gaussian spiked-covariance generator: `k` unit-variance principal
/// coordinates (coordinate `i` is `√ηᵢ·y + √(1−ηᵢ)·ζᵢ`) over an isotropic
/// tail of total variance `σ²` spread across the remaining `d−k` coordinates.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpikedConfig {
    pub k: usize,
    pub d: usize,
    pub sigma2: f64,
    pub n_hat: usize,
    pub n_tilde: usize,
    #[serde(default)]
    pub n_test: usize,
    pub tail_family: TailFamily,
    pub label_coupling: Vec<f64>,
    pub seed: u64,
}

impl SpikedConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d <= self.k {
            return Err(Error::ConfigViolation(format!(
                "d={} must exceed k={}",
                self.d, self.k
            )));
        }
        if self.sigma2 < 0.0 {
            return Err(Error::ConfigViolation("sigma2 must be nonnegative".into()));
        }
        if self.label_coupling.len() != self.k {
            return Err(Error::ConfigViolation(format!(
                "label_coupling has length {}, k={}",
                self.label_coupling.len(),
                self.k
            )));
        }
        if self
            .label_coupling
            .iter()
            .any(|&e| !(0.0..=1.0).contains(&e))
        {
            return Err(Error::ConfigViolation(
                "label couplings must lie in [0,1]".into(),
            ));
        }
        let total: f64 = self.label_coupling.iter().sum();
        if total > 1.0 + 1e-12 {
            return Err(Error::ConfigViolation(format!(
                "label coupling energy {total} exceeds the budget 1"
            )));
        }
        if self.n_hat == 0 || self.n_tilde == 0 {
            return Err(Error::ConfigViolation(
                "n_hat and n_tilde must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// The benign-overfitting toy pair: weak representation
/// `[√η_w·y + √(1−η_w)·ζ, ξ_wᵀ]ᵀ`, strong representation
/// `[√η_s·y + √(1−η_s)·ζ′, ξ_sᵀ]ᵀ`, with `y` and `ζ` shared per sample and
/// `ξ ~ N(0, σ²/(d−1)·I)` independent per model. `eta_s = 1` gives the
/// strong model a perfect first coordinate.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToyPairConfig {
    pub eta_w: f64,
    pub eta_s: f64,
    pub d: usize,
    pub sigma2: f64,
    pub n_hat: usize,
    pub n_tilde: usize,
    #[serde(default)]
    pub n_test: usize,
    pub seed: u64,
}

impl ToyPairConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta_w > 0.0 && self.eta_w < 1.0) {
            return Err(Error::ConfigViolation("eta_w must lie in (0,1)".into()));
        }
        if !(self.eta_s > 0.0 && self.eta_s <= 1.0) {
            return Err(Error::ConfigViolation("eta_s must lie in (0,1]".into()));
        }
        if self.sigma2 <= 0.0 {
            return Err(Error::ConfigViolation("sigma2 must be positive".into()));
        }
        if self.d < 2 {
            return Err(Error::ConfigViolation("toy model needs d >= 2".into()));
        }
        if self.n_hat == 0 || self.n_tilde == 0 {
            return Err(Error::ConfigViolation(
                "n_hat and n_tilde must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Bounded representations with low intrinsic dimension. One concrete
/// instantiation of the family: a label-coupled coordinate plus a latent
/// point uniform in a `q`-ball, embedded into `ℝ^d` by a seeded random
/// orthonormal map; labels are clipped Gaussians. Every sample satisfies
/// `‖h(x)‖² ≤ B` and `y² ≤ C` by construction.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundedConfig {
    pub b: f64,
    pub q: usize,
    pub d: usize,
    pub c: f64,
    pub n_hat: usize,
    pub n_tilde: usize,
    #[serde(default)]
    pub n_test: usize,
    pub seed: u64,
}

impl BoundedConfig {
    pub fn validate(&self) -> Result<()> {
        if self.b <= 0.0 || self.c <= 0.0 {
            return Err(Error::ConfigViolation("B and C must be positive".into()));
        }
        if self.q == 0 {
            return Err(Error::ConfigViolation("q must be positive".into()));
        }
        // the latent space is (q+1)-dimensional: q-ball + label coordinate
        if self.d < self.q + 1 {
            return Err(Error::ConfigViolation(format!(
                "d={} must be at least q+1={}",
                self.d,
                self.q + 1
            )));
        }
        if self.n_hat == 0 || self.n_tilde == 0 {
            return Err(Error::ConfigViolation(
                "n_hat and n_tilde must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Lift `α(x) = M·h(x) + M⊥·ξ(x)` with jointly orthonormal `M`, `M⊥` and
/// `ξ` i.i.d. `N(0, σ²/m)`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiftConfig {
    pub m: usize,
    pub sigma2: f64,
    pub seed: u64,
}

// ---------------------------------------------------------------------------
// Spiked generator
// ---------------------------------------------------------------------------

const SPLITS: [&str; 3] = ["tilde", "hat", "test"];

fn split_sizes(n_tilde: usize, n_hat: usize, n_test: usize) -> [usize; 3] {
    [n_tilde, n_hat, n_test]
}

fn spiked_column(cfg: &SpikedConfig, y: f64, rng: &mut ChaCha8Rng, col: &mut [f64]) {
    let tail_sd = (cfg.sigma2 / (cfg.d - cfg.k) as f64).sqrt();
    for i in 0..cfg.k {
        let eta = cfg.label_coupling[i];
        let zeta = normal(rng);
        col[i] = eta.sqrt() * y + (1.0 - eta).sqrt() * zeta;
    }
    for v in col[cfg.k..].iter_mut() {
        *v = tail_sd * cfg.tail_family.draw_unit(rng);
    }
}

fn spiked_population(cfg: &SpikedConfig) -> PopulationSummary {
    // Σ' on the principal coordinates: (I_k − diag(η)) + √η √ηᵀ, since all
    // coupled coordinates share the same y.
    let k = cfg.k;
    let mut blocks = Vec::new();
    if k > 0 {
        let mut sigma_p = Matrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                let mut v = (cfg.label_coupling[i] * cfg.label_coupling[j]).sqrt();
                if i == j {
                    v += 1.0 - cfg.label_coupling[i];
                }
                sigma_p[(i, j)] = v;
            }
        }
        let eig = numlin::sym_eig(&sigma_p).expect("k x k principal covariance");
        for (e, &lam) in eig.eigenvalues.iter().enumerate() {
            if lam <= 1e-14 {
                continue;
            }
            let mut basis = Matrix::zeros(cfg.d, 1);
            for i in 0..k {
                basis[(i, 0)] = eig.eigenvectors[(i, e)];
            }
            blocks.push(SigmaBlock {
                basis,
                eigenvalue: lam,
            });
        }
    }
    let mut e_ry = vec![0.0; cfg.d];
    for i in 0..k {
        e_ry[i] = cfg.label_coupling[i].sqrt();
    }
    PopulationSummary {
        dim: cfg.d,
        sigma: SigmaSpec::Blocks {
            blocks,
            tail: Some(IsotropicTail {
                dim: cfg.d - k,
                variance: cfg.sigma2 / (cfg.d - k) as f64,
            }),
        },
        e_ry,
        e_y2: 1.0,
        principal_coords: Some((0..k).collect()),
        source: PopulationSource::Analytic,
    }
}

/// Spiked-covariance dataset with its own i.i.d. labels per split.
pub fn gen_spiked(cfg: &SpikedConfig) -> Result<RepDataset> {
    cfg.validate()?;
    let mut splits = Vec::with_capacity(3);
    for (s, &n) in SPLITS
        .iter()
        .zip(&split_sizes(cfg.n_tilde, cfg.n_hat, cfg.n_test))
    {
        let mut reps = Matrix::zeros(cfg.d, n);
        let mut labels = vec![0.0; n];
        for j in 0..n {
            let y = normal(&mut stream_rng(cfg.seed, &format!("y/{s}"), j as u64));
            let mut rng = stream_rng(cfg.seed, &format!("spiked/{s}"), j as u64);
            spiked_column(cfg, y, &mut rng, reps.col_mut(j));
            labels[j] = y;
        }
        splits.push(Split::new(reps, labels));
    }
    let test = splits.pop().unwrap();
    let hat = splits.pop().unwrap();
    let tilde = splits.pop().unwrap();
    Ok(RepDataset {
        dim: cfg.d,
        tilde,
        hat,
        test: if cfg.n_test > 0 { Some(test) } else { None },
        population: Some(spiked_population(cfg)),
        aux_hat_zeta: None,
    })
}

/// Two spiked datasets over the same samples: labels are shared per sample,
/// while coupling noises and tails are drawn independently per model. This
/// is the spiked analog of the toy pair for running the W2SG pipeline.
pub fn gen_spiked_pair(
    weak: &SpikedConfig,
    strong: &SpikedConfig,
) -> Result<(RepDataset, RepDataset)> {
    weak.validate()?;
    strong.validate()?;
    if weak.seed != strong.seed
        || weak.n_hat != strong.n_hat
        || weak.n_tilde != strong.n_tilde
        || weak.n_test != strong.n_test
    {
        return Err(Error::ConfigViolation(
            "spiked pair requires matching seed and split sizes".into(),
        ));
    }
    let gen_side = |cfg: &SpikedConfig, side: &str| -> RepDataset {
        let mut splits = Vec::with_capacity(3);
        for (s, &n) in SPLITS
            .iter()
            .zip(&split_sizes(cfg.n_tilde, cfg.n_hat, cfg.n_test))
        {
            let mut reps = Matrix::zeros(cfg.d, n);
            let mut labels = vec![0.0; n];
            for j in 0..n {
                let y = normal(&mut stream_rng(cfg.seed, &format!("y/{s}"), j as u64));
                let mut rng = stream_rng(cfg.seed, &format!("spiked_{side}/{s}"), j as u64);
                spiked_column(cfg, y, &mut rng, reps.col_mut(j));
                labels[j] = y;
            }
            splits.push(Split::new(reps, labels));
        }
        let test = splits.pop().unwrap();
        let hat = splits.pop().unwrap();
        let tilde = splits.pop().unwrap();
        RepDataset {
            dim: cfg.d,
            tilde,
            hat,
            test: if cfg.n_test > 0 { Some(test) } else { None },
            population: Some(spiked_population(cfg)),
            aux_hat_zeta: None,
        }
    };
    Ok((gen_side(weak, "w"), gen_side(strong, "s")))
}

// ---------------------------------------------------------------------------
// Toy pair generator
// ---------------------------------------------------------------------------

fn toy_population(cfg: &ToyPairConfig, eta: f64) -> PopulationSummary {
    let mut basis = Matrix::zeros(cfg.d, 1);
    basis[(0, 0)] = 1.0;
    let mut e_ry = vec![0.0; cfg.d];
    e_ry[0] = eta.sqrt();
    PopulationSummary {
        dim: cfg.d,
        sigma: SigmaSpec::Blocks {
            blocks: vec![SigmaBlock {
                basis,
                eigenvalue: 1.0,
            }],
            tail: Some(IsotropicTail {
                dim: cfg.d - 1,
                variance: cfg.sigma2 / (cfg.d - 1) as f64,
            }),
        },
        e_ry,
        e_y2: 1.0,
        principal_coords: Some(vec![0]),
        source: PopulationSource::Analytic,
    }
}

fn gen_toy_side(cfg: &ToyPairConfig, strong: bool) -> RepDataset {
    let eta = if strong { cfg.eta_s } else { cfg.eta_w };
    let xi_stream = if strong { "toy_xi_s" } else { "toy_xi_w" };
    let tail_sd = (cfg.sigma2 / (cfg.d - 1) as f64).sqrt();
    let mut splits = Vec::with_capacity(3);
    let mut hat_zeta = Vec::new();
    for (s, &n) in SPLITS
        .iter()
        .zip(&split_sizes(cfg.n_tilde, cfg.n_hat, cfg.n_test))
    {
        let mut reps = Matrix::zeros(cfg.d, n);
        let mut labels = vec![0.0; n];
        for j in 0..n {
            let y = normal(&mut stream_rng(cfg.seed, &format!("y/{s}"), j as u64));
            let zeta = normal(&mut stream_rng(cfg.seed, &format!("zeta/{s}"), j as u64));
            let col = reps.col_mut(j);
            col[0] = if strong {
                if cfg.eta_s == 1.0 {
                    y
                } else {
                    let zp = normal(&mut stream_rng(
                        cfg.seed,
                        &format!("zeta_prime/{s}"),
                        j as u64,
                    ));
                    eta.sqrt() * y + (1.0 - eta).sqrt() * zp
                }
            } else {
                eta.sqrt() * y + (1.0 - eta).sqrt() * zeta
            };
            let mut xi = stream_rng(cfg.seed, &format!("{xi_stream}/{s}"), j as u64);
            for v in col[1..].iter_mut() {
                *v = tail_sd * normal(&mut xi);
            }
            labels[j] = y;
            if !strong && *s == "hat" {
                hat_zeta.push(zeta);
            }
        }
        splits.push(Split::new(reps, labels));
    }
    let test = splits.pop().unwrap();
    let hat = splits.pop().unwrap();
    let tilde = splits.pop().unwrap();
    RepDataset {
        dim: cfg.d,
        tilde,
        hat,
        test: if cfg.n_test > 0 { Some(test) } else { None },
        population: Some(toy_population(cfg, eta)),
        aux_hat_zeta: if strong { None } else { Some(hat_zeta) },
    }
}

/// Weak side of the toy pair; deterministic in `(seed, eta_w, d, sigma2, n)`.
pub fn gen_toy_weak(cfg: &ToyPairConfig) -> Result<RepDataset> {
    cfg.validate()?;
    Ok(gen_toy_side(cfg, false))
}

/// Strong side of the toy pair; does not depend on `eta_w`.
pub fn gen_toy_strong(cfg: &ToyPairConfig) -> Result<RepDataset> {
    cfg.validate()?;
    Ok(gen_toy_side(cfg, true))
}

/// Toy pair with shared labels, shared test-split samples, and the ζ draws
/// of the hat split recorded on the weak dataset.
pub fn gen_toy_pair(cfg: &ToyPairConfig) -> Result<(RepDataset, RepDataset)> {
    cfg.validate()?;
    Ok((gen_toy_side(cfg, false), gen_toy_side(cfg, true)))
}

// ---------------------------------------------------------------------------
// Bounded generator
// ---------------------------------------------------------------------------

/// Share of the squared-norm budget given to the label-coupled coordinate.
const BOUNDED_LABEL_SHARE: f64 = 0.5;
const BOUNDED_MC_SAMPLES: usize = 1_000_000;

/// Latent draw for the bounded family: `(u, y)` with `u ∈ ℝ^{q+1}`,
/// `‖u‖² ≤ B`, `y² ≤ C`.
fn bounded_latent(cfg: &BoundedConfig, rng: &mut ChaCha8Rng, u: &mut [f64]) -> f64 {
    let root_c = cfg.c.sqrt();
    let y_raw = normal(rng) * root_c / 2.0;
    let y = y_raw.clamp(-root_c, root_c);
    u[0] = (BOUNDED_LABEL_SHARE * cfg.b).sqrt() * y / root_c;
    // uniform in the q-ball of radius sqrt(B(1-share))
    let radius = ((1.0 - BOUNDED_LABEL_SHARE) * cfg.b).sqrt();
    let mut norm_sq = 0.0;
    for v in u[1..].iter_mut() {
        *v = normal(rng);
        norm_sq += *v * *v;
    }
    let norm = norm_sq.sqrt();
    let r = radius * unit(rng).powf(1.0 / cfg.q as f64);
    if norm > 0.0 {
        for v in u[1..].iter_mut() {
            *v *= r / norm;
        }
    } else {
        u[1] = r;
    }
    y
}

/// Random orthonormal `rows×cols` matrix via modified Gram-Schmidt on
/// Gaussian columns, optionally orthogonal to the columns of `against`.
fn random_orthonormal(
    rows: usize,
    cols: usize,
    against: Option<&Matrix>,
    rng: &mut ChaCha8Rng,
) -> Matrix {
    let mut q = Matrix::zeros(rows, cols);
    for j in 0..cols {
        loop {
            let mut v: Vec<f64> = (0..rows).map(|_| normal(rng)).collect();
            // two MGS passes for numerical orthogonality
            for _ in 0..2 {
                if let Some(a) = against {
                    for c in 0..a.cols() {
                        let p = dot(a.col(c), &v);
                        for (x, &b) in v.iter_mut().zip(a.col(c)) {
                            *x -= p * b;
                        }
                    }
                }
                for c in 0..j {
                    let p = dot(q.col(c), &v);
                    for (x, &b) in v.iter_mut().zip(q.col(c)) {
                        *x -= p * b;
                    }
                }
            }
            let norm = vecops::norm2(&v);
            if norm > 1e-8 {
                for (slot, x) in q.col_mut(j).iter_mut().zip(&v) {
                    *slot = x / norm;
                }
                break;
            }
        }
    }
    q
}

/// Bounded low-intrinsic-dimension dataset. The population summary is a
/// Monte-Carlo estimate (flagged as such), since the clipped label breaks
/// closed-form moments.
pub fn gen_bounded(cfg: &BoundedConfig) -> Result<RepDataset> {
    cfg.validate()?;
    let latent_dim = cfg.q + 1;
    let embed = random_orthonormal(
        cfg.d,
        latent_dim,
        None,
        &mut stream_rng(cfg.seed, "bounded/embed", 0),
    );
    let mut splits = Vec::with_capacity(3);
    let mut u = vec![0.0; latent_dim];
    for (s, &n) in SPLITS
        .iter()
        .zip(&split_sizes(cfg.n_tilde, cfg.n_hat, cfg.n_test))
    {
        let mut reps = Matrix::zeros(cfg.d, n);
        let mut labels = vec![0.0; n];
        for j in 0..n {
            let mut rng = stream_rng(cfg.seed, &format!("bounded/{s}"), j as u64);
            let y = bounded_latent(cfg, &mut rng, &mut u);
            let col = embed.matvec(&u);
            reps.col_mut(j).copy_from_slice(&col);
            labels[j] = y;
        }
        splits.push(Split::new(reps, labels));
    }

    // Monte-Carlo population pass in latent coordinates.
    let mut rng = stream_rng(cfg.seed, "bounded/mc", 0);
    let mut second = Matrix::zeros(latent_dim, latent_dim);
    let mut uy = vec![0.0; latent_dim];
    let mut y2 = 0.0;
    for _ in 0..BOUNDED_MC_SAMPLES {
        let y = bounded_latent(cfg, &mut rng, &mut u);
        for a in 0..latent_dim {
            for b in a..latent_dim {
                second[(a, b)] += u[a] * u[b];
            }
            uy[a] += u[a] * y;
        }
        y2 += y * y;
    }
    let inv_n = 1.0 / BOUNDED_MC_SAMPLES as f64;
    for a in 0..latent_dim {
        for b in a..latent_dim {
            let v = second[(a, b)] * inv_n;
            second[(a, b)] = v;
            second[(b, a)] = v;
        }
        uy[a] *= inv_n;
    }
    let eig = numlin::sym_eig(&second)?;
    let mut blocks = Vec::new();
    for (e, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam <= 1e-12 {
            continue;
        }
        let mut v = vec![0.0; latent_dim];
        v.copy_from_slice(eig.eigenvectors.col(e));
        let mut basis = Matrix::zeros(cfg.d, 1);
        basis.col_mut(0).copy_from_slice(&embed.matvec(&v));
        blocks.push(SigmaBlock {
            basis,
            eigenvalue: lam,
        });
    }
    let population = PopulationSummary {
        dim: cfg.d,
        sigma: SigmaSpec::Blocks { blocks, tail: None },
        e_ry: embed.matvec(&uy),
        e_y2: y2 * inv_n,
        principal_coords: None,
        source: PopulationSource::Estimated {
            samples: BOUNDED_MC_SAMPLES,
        },
    };

    let test = splits.pop().unwrap();
    let hat = splits.pop().unwrap();
    let tilde = splits.pop().unwrap();
    Ok(RepDataset {
        dim: cfg.d,
        tilde,
        hat,
        test: if cfg.n_test > 0 { Some(test) } else { None },
        population: Some(population),
        aux_hat_zeta: None,
    })
}

// ---------------------------------------------------------------------------
// Lift
// ---------------------------------------------------------------------------

/// Lifts a dataset to dimension `d+m`: `α(x) = M·h(x) + M⊥·ξ(x)`. Labels,
/// split structure, aux data, and the population summary are carried along.
pub fn lift(cfg: &LiftConfig, base: &RepDataset) -> Result<RepDataset> {
    base.validate()?;
    if cfg.m == 0 && cfg.sigma2 > 0.0 {
        return Err(Error::ConfigViolation(
            "m=0 with sigma2>0: there is no subspace to carry the noise".into(),
        ));
    }
    let d = base.dim;
    let out_dim = d + cfg.m;
    let mut rng = stream_rng(cfg.seed, "lift/map", 0);
    let map = random_orthonormal(out_dim, d, None, &mut rng);
    let perp = random_orthonormal(out_dim, cfg.m, Some(&map), &mut rng);
    let xi_sd = if cfg.m > 0 {
        (cfg.sigma2 / cfg.m as f64).sqrt()
    } else {
        0.0
    };

    let lift_split = |split: &Split, name: &str| -> Split {
        let n = split.n();
        let mut reps = Matrix::zeros(out_dim, n);
        for j in 0..n {
            let mut col = map.matvec(split.reps.col(j));
            if cfg.m > 0 {
                let mut xi_rng = stream_rng(cfg.seed, &format!("lift_xi/{name}"), j as u64);
                let xi: Vec<f64> = (0..cfg.m).map(|_| xi_sd * normal(&mut xi_rng)).collect();
                let noise = perp.matvec(&xi);
                for (c, v) in col.iter_mut().zip(&noise) {
                    *c += v;
                }
            }
            reps.col_mut(j).copy_from_slice(&col);
        }
        Split::new(reps, split.labels.clone())
    };

    let population = base.population.as_ref().map(|pop| PopulationSummary {
        dim: out_dim,
        sigma: SigmaSpec::Lifted {
            base: Box::new(pop.clone()),
            map: map.clone(),
            perp: perp.clone(),
            xi_variance: if cfg.m > 0 {
                cfg.sigma2 / cfg.m as f64
            } else {
                0.0
            },
        },
        e_ry: map.matvec(&pop.e_ry),
        e_y2: pop.e_y2,
        principal_coords: None,
        source: pop.source.clone(),
    });

    Ok(RepDataset {
        dim: out_dim,
        tilde: lift_split(&base.tilde, "tilde"),
        hat: lift_split(&base.hat, "hat"),
        test: base.test.as_ref().map(|t| lift_split(t, "test")),
        population,
        aux_hat_zeta: base.aux_hat_zeta.clone(),
    })
}
