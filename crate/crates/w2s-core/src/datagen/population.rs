//! Analytic (or Monte-Carlo estimated) population summaries.
//!
//! A [`PopulationSummary`] describes the uncentered second moments of a
//! representation distribution: a structured covariance `Σ(h)`, the
//! label-rep correlation `E[r y]`, the label energy `E[y²]`, and the
//! analytic principal subspace. All generators in this crate produce
//! zero-mean representations and labels, which the quadratic forms below
//! rely on.

use numlin::vecops::dot;
use numlin::Matrix;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum PopulationSource {
    Analytic,
    /// Estimated by a Monte-Carlo pass of the given size.
    Estimated {
        samples: usize,
    },
}

/// One eigenvalue with its (orthonormal) eigenvector columns.
#[derive(Debug, Clone)]
pub struct SigmaBlock {
    pub basis: Matrix,
    pub eigenvalue: f64,
}

/// Isotropic remainder on the orthogonal complement of the block spans:
/// `variance` per coordinate over `dim` dimensions.
#[derive(Debug, Clone, Copy)]
pub struct IsotropicTail {
    pub dim: usize,
    pub variance: f64,
}

#[derive(Debug, Clone)]
pub enum SigmaSpec {
    /// `Σ = Σ_b λ_b U_b U_bᵀ + v·Π_⊥` with `Π_⊥` the projection onto the
    /// complement of the union of block spans (absent tail means zero there).
    Blocks {
        blocks: Vec<SigmaBlock>,
        tail: Option<IsotropicTail>,
    },
    /// Covariance of `α(x) = M h(x) + M⊥ ξ(x)`: the base covariance pushed
    /// through `M` plus `xi_variance` per coordinate on the span of `M⊥`.
    Lifted {
        base: Box<PopulationSummary>,
        map: Matrix,
        perp: Matrix,
        xi_variance: f64,
    },
}

#[derive(Debug, Clone)]
pub struct PopulationSummary {
    pub dim: usize,
    pub sigma: SigmaSpec,
    /// `E[r y]`, length `dim`.
    pub e_ry: Vec<f64>,
    pub e_y2: f64,
    /// Coordinate indices spanning the analytic principal subspace, when it
    /// is coordinate-aligned (spiked and toy generators). `None` for bases
    /// produced by embeddings or lifts.
    pub principal_coords: Option<Vec<usize>>,
    pub source: PopulationSource,
}

impl PopulationSummary {
    /// `uᵀ Σ v`.
    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> f64 {
        assert_eq!(u.len(), self.dim);
        assert_eq!(v.len(), self.dim);
        match &self.sigma {
            SigmaSpec::Blocks { blocks, tail } => {
                let mut acc = 0.0;
                let mut overlap = 0.0;
                for b in blocks {
                    let pu = b.basis.tr_matvec(u);
                    let pv = b.basis.tr_matvec(v);
                    let o = dot(&pu, &pv);
                    acc += b.eigenvalue * o;
                    overlap += o;
                }
                if let Some(t) = tail {
                    acc += t.variance * (dot(u, v) - overlap);
                }
                acc
            }
            SigmaSpec::Lifted {
                base,
                map,
                perp,
                xi_variance,
            } => {
                let bu = map.tr_matvec(u);
                let bv = map.tr_matvec(v);
                let pu = perp.tr_matvec(u);
                let pv = perp.tr_matvec(v);
                base.bilinear(&bu, &bv) + xi_variance * dot(&pu, &pv)
            }
        }
    }

    /// `wᵀ Σ w`.
    pub fn quad_form(&self, w: &[f64]) -> f64 {
        self.bilinear(w, w)
    }

    /// `wᵀ E[r y]`.
    pub fn ery_dot(&self, w: &[f64]) -> f64 {
        dot(w, &self.e_ry)
    }

    /// `‖Σ‖_op`.
    pub fn sigma_op_norm(&self) -> f64 {
        match &self.sigma {
            SigmaSpec::Blocks { blocks, tail } => {
                let b = blocks.iter().fold(0.0f64, |m, b| m.max(b.eigenvalue));
                let t = tail.map(|t| t.variance).unwrap_or(0.0);
                b.max(t)
            }
            SigmaSpec::Lifted {
                base, xi_variance, ..
            } => base.sigma_op_norm().max(*xi_variance),
        }
    }

    /// Smallest nonzero eigenvalue of `Σ(Π_V h)` for the analytic `V`.
    pub fn rho(&self) -> f64 {
        match &self.sigma {
            SigmaSpec::Blocks { blocks, .. } => {
                let max = blocks.iter().fold(0.0f64, |m, b| m.max(b.eigenvalue));
                blocks
                    .iter()
                    .map(|b| b.eigenvalue)
                    .filter(|&l| l > 1e-12 * max.max(1.0))
                    .fold(f64::INFINITY, f64::min)
            }
            SigmaSpec::Lifted { base, .. } => base.rho(),
        }
    }

    /// Total variance of the isotropic part outside the principal subspace
    /// (`dim × per-coordinate variance`); this is the `σ²` of the
    /// decomposability parameters `γ̂ = σ²/n̂`, `γ̃ = σ²/ñ`.
    pub fn tail_total_variance(&self) -> Option<f64> {
        match &self.sigma {
            SigmaSpec::Blocks { tail, .. } => tail.map(|t| t.dim as f64 * t.variance),
            SigmaSpec::Lifted {
                base,
                perp,
                xi_variance,
                ..
            } => {
                // Only meaningful when the base has no tail of its own (the
                // lift construction starts from fully-principal bases).
                match base.tail_total_variance() {
                    Some(v) if v > 0.0 => None,
                    _ => Some(perp.cols() as f64 * xi_variance),
                }
            }
        }
    }

    pub fn tail(&self) -> Option<IsotropicTail> {
        match &self.sigma {
            SigmaSpec::Blocks { tail, .. } => *tail,
            SigmaSpec::Lifted {
                perp, xi_variance, ..
            } => Some(IsotropicTail {
                dim: perp.cols(),
                variance: *xi_variance,
            }),
        }
    }

    pub fn blocks(&self) -> Option<&[SigmaBlock]> {
        match &self.sigma {
            SigmaSpec::Blocks { blocks, .. } => Some(blocks),
            SigmaSpec::Lifted { .. } => None,
        }
    }

    /// Orthonormal basis of the analytic principal subspace `V`.
    pub fn principal_basis(&self) -> Result<Matrix> {
        match (&self.principal_coords, &self.sigma) {
            (Some(coords), _) => {
                if coords.is_empty() {
                    return Err(Error::EmptySubspace);
                }
                let mut basis = Matrix::zeros(self.dim, coords.len());
                for (j, &c) in coords.iter().enumerate() {
                    basis[(c, j)] = 1.0;
                }
                Ok(basis)
            }
            (None, SigmaSpec::Blocks { blocks, .. }) => {
                let max = blocks.iter().fold(0.0f64, |m, b| m.max(b.eigenvalue));
                let keep: Vec<&SigmaBlock> = blocks
                    .iter()
                    .filter(|b| b.eigenvalue > 1e-12 * max.max(1.0))
                    .collect();
                let k: usize = keep.iter().map(|b| b.basis.cols()).sum();
                if k == 0 {
                    return Err(Error::EmptySubspace);
                }
                let mut basis = Matrix::zeros(self.dim, k);
                let mut at = 0;
                for b in keep {
                    for j in 0..b.basis.cols() {
                        basis.col_mut(at).copy_from_slice(b.basis.col(j));
                        at += 1;
                    }
                }
                Ok(basis)
            }
            (None, SigmaSpec::Lifted { base, map, .. }) => {
                let inner = base.principal_basis()?;
                Ok(map.mul(&inner))
            }
        }
    }
}
