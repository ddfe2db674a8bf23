//! Tolerance-aware dense real linear algebra.
//!
//! Every rank decision goes through [`TolerancePolicy`]: a singular value
//! counts as nonzero when it exceeds `rank_cutoff_rel · max(rows, cols) · σ_max`.
//! Orthonormal bases are read off the SVD, so empty bases (zero subspaces)
//! are ordinary values.

mod matrix;

pub use matrix::{dot, norm2, DenseMatrix};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative thresholds used for rank decisions and residual acceptance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    pub rank_cutoff_rel: f64,
    pub residual_rel: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self {
            rank_cutoff_rel: 1e-10,
            residual_rel: 1e-9,
        }
    }
}

impl TolerancePolicy {
    pub fn new(rank_cutoff_rel: f64, residual_rel: f64) -> Result<Self> {
        for (name, v) in [("rank_cutoff_rel", rank_cutoff_rel), ("residual_rel", residual_rel)] {
            if !(v > 0.0 && v < 1e-2) {
                return Err(Error::Tolerance(format!("{name} = {v} must lie in (0, 1e-2)")));
            }
        }
        Ok(Self {
            rank_cutoff_rel,
            residual_rel,
        })
    }

    /// `residual ≤ residual_rel · (1 + scale)`.
    pub fn accepts(&self, residual: f64, scale: f64) -> bool {
        residual <= self.residual_rel * (1.0 + scale)
    }
}

/// Thin singular value decomposition `M = U · diag(s) · Vᵀ`.
///
/// `U` is rows×k, `V` is cols×k with k = min(rows, cols); singular values are
/// nonincreasing. Each singular pair is sign-normalised so that the
/// largest-magnitude entry of the left vector is positive.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: DenseMatrix,
    pub singular_values: Vec<f64>,
    pub v: DenseMatrix,
}

impl Svd {
    /// Number of singular values above the policy cutoff.
    pub fn rank(&self, tol: &TolerancePolicy) -> usize {
        let smax = self.singular_values.first().copied().unwrap_or(0.0);
        let dim = self.u.rows().max(self.v.rows()) as f64;
        let cutoff = tol.rank_cutoff_rel * dim * smax;
        self.singular_values.iter().filter(|&&s| s > cutoff).count()
    }
}

pub fn svd_factor(m: &DenseMatrix) -> Result<Svd> {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return Ok(Svd {
            u: DenseMatrix::zeros(rows, 0),
            singular_values: Vec::new(),
            v: DenseMatrix::zeros(cols, 0),
        });
    }
    let mat = faer::Mat::<f64>::from_fn(rows, cols, |i, j| m[(i, j)]);
    let svd = mat.thin_svd().map_err(|_| Error::SvdNoConvergence { rows, cols })?;
    let (u, v) = (svd.U(), svd.V());
    let sv: Vec<f64> = svd.S().column_vector().iter().copied().collect();
    let scale = m.max_abs();
    let mut residual = 0.0_f64;
    for i in 0..rows {
        for j in 0..cols {
            let rebuilt: f64 = (0..k).map(|t| u[(i, t)] * sv[t] * v[(j, t)]).sum();
            residual = residual.max((rebuilt - m[(i, j)]).abs());
        }
    }
    if !(residual <= 1e-11 * scale * rows.max(cols) as f64 || residual == 0.0) {
        return Err(Error::SvdNoConvergence { rows, cols });
    }

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));

    let mut uo = DenseMatrix::zeros(rows, k);
    let mut vo = DenseMatrix::zeros(cols, k);
    let mut s = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        s.push(sv[src].max(0.0));
        let mut pivot = 0;
        for i in 1..rows {
            if u[(i, src)].abs() > u[(pivot, src)].abs() * (1.0 + 1e-12) {
                pivot = i;
            }
        }
        let sign = if u[(pivot, src)] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..rows {
            uo[(i, dst)] = sign * u[(i, src)];
        }
        for j in 0..cols {
            vo[(j, dst)] = sign * v[(j, src)];
        }
    }
    Ok(Svd {
        u: uo,
        singular_values: s,
        v: vo,
    })
}

pub fn rank_of(m: &DenseMatrix, tol: &TolerancePolicy) -> Result<usize> {
    Ok(svd_factor(m)?.rank(tol))
}

/// Number of singular values strictly above an absolute cutoff.
///
/// Used when a submatrix must be judged against the scale of the matrix it
/// was cut from rather than its own σ_max.
pub fn rank_above(m: &DenseMatrix, cutoff: f64) -> Result<usize> {
    Ok(svd_factor(m)?.singular_values.iter().filter(|&&s| s > cutoff).count())
}

/// The absolute rank cutoff the policy assigns to `m`.
pub fn rank_cutoff(m: &DenseMatrix, tol: &TolerancePolicy) -> Result<f64> {
    Ok(tol.rank_cutoff_rel * m.rows().max(m.cols()) as f64 * operator_norm(m)?)
}

/// Moore–Penrose pseudo-inverse, truncating singular values below the rank cutoff.
pub fn pseudo_inverse(m: &DenseMatrix, tol: &TolerancePolicy) -> Result<DenseMatrix> {
    let svd = svd_factor(m)?;
    let r = svd.rank(tol);
    let mut p = DenseMatrix::zeros(m.cols(), m.rows());
    for k in 0..r {
        let inv = 1.0 / svd.singular_values[k];
        for i in 0..m.cols() {
            let vik = svd.v[(i, k)] * inv;
            if vik == 0.0 {
                continue;
            }
            for j in 0..m.rows() {
                p[(i, j)] += vik * svd.u[(j, k)];
            }
        }
    }
    Ok(p)
}

/// Largest singular value (0 for empty matrices).
pub fn operator_norm(m: &DenseMatrix) -> Result<f64> {
    Ok(svd_factor(m)?.singular_values.first().copied().unwrap_or(0.0))
}

/// Orthonormal basis of a subspace of R^ambient_dim, stored as columns.
#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceBasis {
    ambient_dim: usize,
    basis: DenseMatrix,
}

impl SubspaceBasis {
    pub fn empty(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: DenseMatrix::zeros(ambient_dim, 0),
        }
    }

    /// Orthonormal basis for the span of the columns of `m`.
    pub fn span_of(m: &DenseMatrix, tol: &TolerancePolicy) -> Result<Self> {
        range_basis(m, tol)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.dim() == 0
    }

    pub fn basis(&self) -> &DenseMatrix {
        &self.basis
    }

    /// Orthogonal projector `B·Bᵀ` onto the subspace.
    pub fn projector(&self) -> DenseMatrix {
        self.basis.matmul(&self.basis.transpose())
    }

    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        let coords = self.basis.tr_mul_vec(v);
        self.basis.mul_vec(&coords)
    }

    /// Distance of `v` from the subspace.
    pub fn distance(&self, v: &[f64]) -> f64 {
        let p = self.project(v);
        v.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }

    pub fn contains(&self, v: &[f64], tol: &TolerancePolicy) -> bool {
        tol.accepts(self.distance(v), norm2(v))
    }

    /// True when every basis vector of `other` lies in `self`.
    pub fn contains_subspace(&self, other: &SubspaceBasis, tol: &TolerancePolicy) -> bool {
        (0..other.dim()).all(|j| self.contains(&other.basis.column(j), tol))
    }

    pub fn orthogonal_complement(&self, tol: &TolerancePolicy) -> Result<SubspaceBasis> {
        if self.is_empty() {
            return Ok(SubspaceBasis {
                ambient_dim: self.ambient_dim,
                basis: DenseMatrix::identity(self.ambient_dim),
            });
        }
        null_space_basis(&self.basis.transpose(), tol)
    }

    /// Largest deviation of `Bᵀ·B` from the identity.
    pub fn orthonormality_residual(&self) -> f64 {
        let g = self.basis.transpose().matmul(&self.basis);
        g.sub(&DenseMatrix::identity(self.dim())).max_abs()
    }
}

/// Orthonormal basis of the column space (left singular vectors of the
/// nonzero singular values).
pub fn range_basis(m: &DenseMatrix, tol: &TolerancePolicy) -> Result<SubspaceBasis> {
    let svd = svd_factor(m)?;
    let r = svd.rank(tol);
    let idx: Vec<usize> = (0..r).collect();
    Ok(SubspaceBasis {
        ambient_dim: m.rows(),
        basis: svd.u.select_columns(&idx),
    })
}

/// Orthonormal basis of `{x : M·x = 0}`.
pub fn null_space_basis(m: &DenseMatrix, tol: &TolerancePolicy) -> Result<SubspaceBasis> {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return Ok(SubspaceBasis::empty(0));
    }
    // Pad with zero rows so the SVD yields a full set of right singular vectors.
    let padded;
    let target = if rows < cols {
        padded = DenseMatrix::from_fn(cols, cols, |i, j| if i < rows { m[(i, j)] } else { 0.0 });
        &padded
    } else {
        m
    };
    let svd = svd_factor(target)?;
    // Rank is decided on the original shape so padding does not shift the cutoff.
    let smax = svd.singular_values.first().copied().unwrap_or(0.0);
    let cutoff = tol.rank_cutoff_rel * rows.max(cols) as f64 * smax;
    let r = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    let idx: Vec<usize> = (r..cols).collect();
    Ok(SubspaceBasis {
        ambient_dim: cols,
        basis: svd.v.select_columns(&idx),
    })
}

/// Orthogonal projector onto the column space of `m`.
pub fn range_projector(m: &DenseMatrix, tol: &TolerancePolicy) -> Result<DenseMatrix> {
    Ok(range_basis(m, tol)?.projector())
}

/// A square operator restricted to a subspace, expressed in orthonormal
/// coordinates of the domain and of its image.
#[derive(Clone, Debug)]
pub struct RestrictedOperator {
    /// `range_basisᵀ · T · domain_basis`, of size dim(range)×dim(domain).
    pub matrix: DenseMatrix,
    pub range: SubspaceBasis,
    pub domain: SubspaceBasis,
}

impl RestrictedOperator {
    pub fn is_invertible(&self) -> bool {
        self.range.dim() == self.domain.dim()
    }

    /// dim(domain) − dim(image).
    pub fn defect(&self) -> usize {
        self.domain.dim() - self.range.dim()
    }

    /// Ambient n×n matrix of `(T|_domain)⁻¹ ∘ π_range`: maps the image back
    /// onto the domain and annihilates the orthogonal complement of the image.
    pub fn inverse_on_range(&self, tol: &TolerancePolicy) -> Result<DenseMatrix> {
        if !self.is_invertible() {
            return Err(Error::SingularRestriction {
                defect: self.defect(),
            });
        }
        let inv = pseudo_inverse(&self.matrix, tol)?;
        Ok(self
            .domain
            .basis()
            .matmul(&inv)
            .matmul(&self.range.basis().transpose()))
    }
}

pub fn restricted_operator(
    t: &DenseMatrix,
    domain: &SubspaceBasis,
    tol: &TolerancePolicy,
) -> Result<RestrictedOperator> {
    if !t.is_square() {
        return Err(Error::Shape(format!(
            "restricted operator needs a square matrix, got {}x{}",
            t.rows(),
            t.cols()
        )));
    }
    if domain.ambient_dim() != t.rows() {
        return Err(Error::Shape(format!(
            "domain lives in R^{} but operator acts on R^{}",
            domain.ambient_dim(),
            t.rows()
        )));
    }
    let image = t.matmul(domain.basis());
    // Rank relative to the operator scale, not only to the image scale, so a
    // restriction that collapses the domain numerically reports as deficient.
    let svd = svd_factor(&image)?;
    let tnorm = operator_norm(t)?;
    let cutoff = tol.rank_cutoff_rel * t.rows() as f64 * tnorm;
    let r = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    let idx: Vec<usize> = (0..r).collect();
    let range = SubspaceBasis {
        ambient_dim: t.rows(),
        basis: svd.u.select_columns(&idx),
    };
    let matrix = range.basis().transpose().matmul(&image);
    Ok(RestrictedOperator {
        matrix,
        range,
        domain: domain.clone(),
    })
}
