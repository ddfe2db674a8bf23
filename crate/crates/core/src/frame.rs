//! K-frame systems: verification, bounds, Gramian, classification, K-dual
//! verification, the dual perturbation family, worst-case erasure error and
//! the `F ↦ A·F·U` transforms.

use serde::{Deserialize, Serialize};

use crate::erasure::ErasureSet;
use crate::error::{Error, Result};
use crate::linalg::{
    null_space_basis, operator_norm, pseudo_inverse, range_basis, rank_of, DenseMatrix,
    SubspaceBasis, TolerancePolicy,
};
use crate::subsets;

/// The operator K (as an n×n matrix) together with its cached range data.
#[derive(Clone, Debug)]
pub struct OperatorK {
    matrix: DenseMatrix,
    rank: usize,
    range: SubspaceBasis,
    pinv: DenseMatrix,
    adjoint_range: SubspaceBasis,
    norm: f64,
}

impl OperatorK {
    pub fn new(matrix: DenseMatrix, tol: &TolerancePolicy) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Shape(format!(
                "K must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let range = range_basis(&matrix, tol)?;
        let adjoint_range = range_basis(&matrix.transpose(), tol)?;
        Ok(Self {
            rank: range.dim(),
            pinv: pseudo_inverse(&matrix, tol)?,
            norm: operator_norm(&matrix)?,
            matrix,
            range,
            adjoint_range,
        })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Orthonormal basis of R(K).
    pub fn range(&self) -> &SubspaceBasis {
        &self.range
    }

    /// Orthonormal basis of R(Kᵀ) = R(K†).
    pub fn adjoint_range(&self) -> &SubspaceBasis {
        &self.adjoint_range
    }

    pub fn pinv(&self) -> &DenseMatrix {
        &self.pinv
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn is_zero(&self) -> bool {
        self.rank == 0
    }
}

/// Optimal K-frame bounds `A·‖Kᵀf‖² ≤ ‖Fᵀf‖² ≤ B·‖f‖²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    /// α with `F·Fᵀ = α·K·Kᵀ`, when such an α fits.
    pub tight: Option<f64>,
    pub parseval: bool,
    pub equal_norm: bool,
}

/// A candidate K-dual `G` (n×m, columns g_i) with its verification residual
/// `‖F·Gᵀ − K‖`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DualSystem {
    #[serde(rename = "G")]
    pub g: DenseMatrix,
    pub residual: f64,
    pub is_valid: bool,
}

/// Worst-case erasure error over all erasure sets of a given size.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ErrorNorm {
    pub value: f64,
    pub argmax: ErasureSet,
}

/// A verified K-frame: synthesis matrix F (n×m, columns f_i) and operator K.
#[derive(Clone, Debug)]
pub struct KFrameSystem {
    f: DenseMatrix,
    k: OperatorK,
    bounds: Option<FrameBounds>,
    gramian: DenseMatrix,
    frame_range: SubspaceBasis,
    null_space: SubspaceBasis,
    tol: TolerancePolicy,
}

/// Tests `R(K) ⊆ R(F)` via `rank([F | K]) = rank(F)`.
pub fn is_kframe(f: &DenseMatrix, k: &DenseMatrix, tol: &TolerancePolicy) -> Result<bool> {
    if f.rows() != k.rows() {
        return Err(Error::Shape(format!(
            "F has {} rows but K acts on R^{}",
            f.rows(),
            k.rows()
        )));
    }
    if f.cols() == 0 {
        return Ok(rank_of(k, tol)? == 0);
    }
    Ok(rank_of(&f.hstack(k), tol)? == rank_of(f, tol)?)
}

pub fn verify_kframe(f: DenseMatrix, k: DenseMatrix, tol: TolerancePolicy) -> Result<KFrameSystem> {
    KFrameSystem::new(f, k, tol)
}

impl KFrameSystem {
    pub fn new(f: DenseMatrix, k: DenseMatrix, tol: TolerancePolicy) -> Result<Self> {
        let k = OperatorK::new(k, &tol)?;
        if f.rows() != k.dim() {
            return Err(Error::Shape(format!(
                "F has {} rows but K acts on R^{}",
                f.rows(),
                k.dim()
            )));
        }
        if !is_kframe(&f, k.matrix(), &tol)? {
            let frame_range = range_basis(&f, &tol)?;
            let basis = k.range().basis();
            let witness = (0..basis.cols())
                .map(|j| basis.column(j))
                .max_by(|a, b| frame_range.distance(a).total_cmp(&frame_range.distance(b)))
                .unwrap_or_default();
            return Err(Error::NotKFrame { witness });
        }
        let gramian = f.transpose().matmul(&f);
        let frame_range = range_basis(&f, &tol)?;
        let null_space = null_space_basis(&f, &tol)?;
        let mut sys = Self {
            f,
            k,
            bounds: None,
            gramian,
            frame_range,
            null_space,
            tol,
        };
        sys.bounds = match sys.frame_bounds() {
            Ok(b) => Some(b),
            Err(Error::ZeroOperator) => None,
            Err(e) => return Err(e),
        };
        Ok(sys)
    }

    pub fn f(&self) -> &DenseMatrix {
        &self.f
    }

    pub fn k(&self) -> &OperatorK {
        &self.k
    }

    pub fn tol(&self) -> &TolerancePolicy {
        &self.tol
    }

    /// Dimension n of the ambient space.
    pub fn n(&self) -> usize {
        self.f.rows()
    }

    /// Number m of frame vectors.
    pub fn m(&self) -> usize {
        self.f.cols()
    }

    pub fn bounds(&self) -> Option<FrameBounds> {
        self.bounds
    }

    /// `Fᵀ·F`, entry (j, i) = ⟨f_i, f_j⟩.
    pub fn gramian(&self) -> &DenseMatrix {
        &self.gramian
    }

    /// Orthonormal basis of span{f_i}.
    pub fn frame_range(&self) -> &SubspaceBasis {
        &self.frame_range
    }

    /// Orthonormal basis of ker F ⊂ R^m.
    pub fn null_space(&self) -> &SubspaceBasis {
        &self.null_space
    }

    /// Frame operator `S_F = F·Fᵀ`.
    pub fn frame_operator(&self) -> DenseMatrix {
        self.f.matmul(&self.f.transpose())
    }

    /// Upper bound σ_max(F)², lower bound 1/‖F†K‖².
    pub fn frame_bounds(&self) -> Result<FrameBounds> {
        if self.k.is_zero() {
            return Err(Error::ZeroOperator);
        }
        let upper = operator_norm(&self.f)?.powi(2);
        let x = pseudo_inverse(&self.f, &self.tol)?.matmul(self.k.matrix());
        let lower = 1.0 / operator_norm(&x)?.powi(2);
        Ok(FrameBounds { lower, upper })
    }

    pub fn classify(&self) -> Classification {
        let ff = self.frame_operator();
        let kk = self.k.matrix().matmul(&self.k.matrix().transpose());
        let kk_norm2 = kk.frobenius_dot(&kk);
        let tight = if kk_norm2 > 0.0 {
            let alpha = ff.frobenius_dot(&kk) / kk_norm2;
            let resid = ff.sub(&kk.scale(alpha)).frobenius_norm();
            let scale = ff.frobenius_norm().max(kk.frobenius_norm() * alpha.abs());
            (resid <= self.tol.residual_rel * scale && alpha > 0.0).then_some(alpha)
        } else {
            None
        };
        let parseval = tight.is_some_and(|a| (a - 1.0).abs() <= self.tol.residual_rel);
        let norms: Vec<f64> = (0..self.m()).map(|j| crate::linalg::norm2(&self.f.column(j))).collect();
        let max = norms.iter().cloned().fold(0.0, f64::max);
        let min = norms.iter().cloned().fold(f64::INFINITY, f64::min);
        let equal_norm = norms.is_empty() || max - min <= self.tol.residual_rel * max.max(1.0);
        Classification {
            tight,
            parseval,
            equal_norm,
        }
    }

    fn check_dual_shape(&self, g: &DenseMatrix) -> Result<()> {
        if g.shape() != self.f.shape() {
            return Err(Error::Shape(format!(
                "dual must be {}x{} like F, got {}x{}",
                self.n(),
                self.m(),
                g.rows(),
                g.cols()
            )));
        }
        Ok(())
    }

    /// Residual `‖F·Gᵀ − K‖` and validity against `residual_rel·(1 + ‖K‖)`.
    pub fn verify_kdual(&self, g: DenseMatrix) -> Result<DualSystem> {
        self.check_dual_shape(&g)?;
        let residual = operator_norm(&self.f.matmul(&g.transpose()).sub(self.k.matrix()))?;
        Ok(DualSystem {
            is_valid: self.tol.accepts(residual, self.k.norm()),
            residual,
            g,
        })
    }

    /// `G + C·Nᵀ` where N spans ker F and C is the n×d coefficient block given
    /// row-major in `coeffs`. Every such G is again a K-dual.
    pub fn dual_perturbation(&self, base: &DualSystem, coeffs: &[f64]) -> Result<DualSystem> {
        if !base.is_valid {
            return Err(Error::InvalidDual {
                residual: base.residual,
            });
        }
        self.check_dual_shape(&base.g)?;
        let d = self.null_space.dim();
        if coeffs.len() != self.n() * d {
            return Err(Error::Shape(format!(
                "null space of F has dimension {d}; expected {} coefficients (n x d), got {}",
                self.n() * d,
                coeffs.len()
            )));
        }
        if d == 0 {
            return self.verify_kdual(base.g.clone());
        }
        let c = DenseMatrix::new(self.n(), d, coeffs.to_vec())?;
        let u = c.matmul(&self.null_space.basis().transpose());
        self.verify_kdual(base.g.add(&u))
    }

    /// Operator norm of the error operator `E_Λ = Σ_{i∈Λ} f_i g_iᵀ`.
    pub fn erasure_error(&self, g: &DenseMatrix, lambda: &ErasureSet) -> Result<f64> {
        self.check_dual_shape(g)?;
        lambda.validate(self.m())?;
        let idx = lambda.indices();
        let e = self.f.select_columns(idx).matmul(&g.select_columns(idx).transpose());
        operator_norm(&e)
    }

    /// `d_r(F, G) = max_{|Λ| = r} ‖E_Λ‖`, with the lexicographically first maximiser.
    pub fn error_norm_dr(&self, g: &DenseMatrix, r: usize, cap: u128) -> Result<ErrorNorm> {
        self.check_dual_shape(g)?;
        if r == 0 || r >= self.m() {
            return Err(Error::InvalidArgument(format!(
                "erasure count r = {r} must satisfy 1 <= r < m = {}",
                self.m()
            )));
        }
        let (value, argmax) = subsets::max_over_subsets(self.m(), r, cap, |idx| {
            let e = self.f.select_columns(idx).matmul(&g.select_columns(idx).transpose());
            operator_norm(&e)
        })?;
        Ok(ErrorNorm {
            value,
            argmax: ErasureSet::from_sorted_unchecked(argmax),
        })
    }

    /// The system `(A·F·U, A·K)` for square A and orthogonal U.
    pub fn transform(&self, a: &DenseMatrix, u: &DenseMatrix) -> Result<KFrameSystem> {
        if a.shape() != (self.n(), self.n()) {
            return Err(Error::Shape(format!(
                "A must be {n}x{n}, got {}x{}",
                a.rows(),
                a.cols(),
                n = self.n()
            )));
        }
        check_orthogonal(u, self.m(), &self.tol)?;
        KFrameSystem::new(
            a.matmul(&self.f).matmul(u),
            a.matmul(self.k.matrix()),
            self.tol,
        )
    }

    /// Columns restricted to `keep` (0-based), when they still form a K-frame.
    pub fn subsystem(&self, keep: &[usize]) -> Result<KFrameSystem> {
        KFrameSystem::new(self.f.select_columns(keep), self.k.matrix().clone(), self.tol)
    }
}

/// Checks that `u` is m×m with `UᵀU = I`.
pub fn check_orthogonal(u: &DenseMatrix, m: usize, tol: &TolerancePolicy) -> Result<()> {
    if u.shape() != (m, m) {
        return Err(Error::Shape(format!(
            "U must be {m}x{m}, got {}x{}",
            u.rows(),
            u.cols()
        )));
    }
    let residual = u.transpose().matmul(u).sub(&DenseMatrix::identity(m)).max_abs();
    if residual > tol.residual_rel * 10.0 {
        return Err(Error::NotUnitary { residual });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use approx::assert_abs_diff_eq;

    fn tol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    #[test]
    fn verify_examples() {
        let a = fixtures::fix_a();
        assert!(a.system().is_ok());

        let b = fixtures::fix_b();
        let f34 = b.f.select_columns(&[2, 3]);
        let err = KFrameSystem::new(f34, b.k.clone(), tol()).unwrap_err();
        let Error::NotKFrame { witness } = err else {
            panic!("expected NotKFrame")
        };
        // The witness lies in R(K) = span{e1, e2} but outside span{e3, e1+e3}.
        assert_abs_diff_eq!(witness[2], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(witness[3], 0.0, epsilon = 1e-12);
        assert!(witness[1].abs() > 0.5);

        assert!(KFrameSystem::new(DenseMatrix::identity(3), DenseMatrix::identity(3), tol()).is_ok());

        let shape = KFrameSystem::new(DenseMatrix::identity(3), DenseMatrix::identity(2), tol());
        assert!(matches!(shape, Err(Error::Shape(_))));
    }

    #[test]
    fn bounds_examples() {
        let sys = fixtures::fix_a().system().unwrap();
        let b = sys.frame_bounds().unwrap();
        assert_abs_diff_eq!(b.upper, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.lower, 4.0 / 9.0, epsilon = 1e-12);

        let id = KFrameSystem::new(DenseMatrix::identity(2), DenseMatrix::identity(2), tol()).unwrap();
        let b = id.bounds().unwrap();
        assert_abs_diff_eq!(b.lower, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.upper, 1.0, epsilon = 1e-12);

        let zero = KFrameSystem::new(DenseMatrix::identity(2), DenseMatrix::zeros(2, 2), tol()).unwrap();
        assert!(zero.bounds().is_none());
        assert!(matches!(zero.frame_bounds(), Err(Error::ZeroOperator)));
    }

    /// Grid search over the unit sphere for min ‖Fᵀf‖²/‖Kᵀf‖².
    #[test]
    fn fix_a_lower_bound_matches_grid_oracle() {
        let fx = fixtures::fix_a();
        let sys = fx.system().unwrap();
        let steps = 400;
        let mut best = f64::INFINITY;
        for i in 0..=steps {
            let theta = std::f64::consts::PI * i as f64 / steps as f64;
            for j in 0..(2 * steps) {
                let phi = std::f64::consts::PI * j as f64 / steps as f64;
                let f = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
                let kt = fx.k.tr_mul_vec(&f);
                let den: f64 = kt.iter().map(|x| x * x).sum();
                if den < 1e-6 {
                    continue;
                }
                let num: f64 = fx.f.tr_mul_vec(&f).iter().map(|x| x * x).sum();
                best = best.min(num / den);
            }
        }
        let lower = sys.bounds().unwrap().lower;
        assert!(lower <= best + 1e-12);
        assert!((best - lower) / lower < 0.01, "grid {best} vs bound {lower}");
    }

    #[test]
    fn gramian_examples() {
        let c = fixtures::fix_c().system().unwrap();
        let expected = DenseMatrix::from_rows(&[
            [2.0, -1.0, 1.0, 0.0],
            [-1.0, 1.0, -1.0, 0.5],
            [1.0, -1.0, 5.0, -0.5],
            [0.0, 0.5, -0.5, 0.5],
        ])
        .unwrap();
        assert_eq!(c.gramian(), &expected);

        let d = fixtures::fix_d().system().unwrap();
        let expected = DenseMatrix::from_rows(&[
            [1.0, 0.0, 1.0, 0.0],
            [0.0, 1.0, 2.0, 0.0],
            [1.0, 2.0, 5.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ])
        .unwrap();
        assert_eq!(d.gramian(), &expected);

        let id = KFrameSystem::new(DenseMatrix::identity(3), DenseMatrix::identity(3), tol()).unwrap();
        assert_eq!(id.gramian(), &DenseMatrix::identity(3));
    }

    #[test]
    fn classify_examples() {
        let id = KFrameSystem::new(DenseMatrix::identity(3), DenseMatrix::identity(3), tol()).unwrap();
        let c = id.classify();
        assert_abs_diff_eq!(c.tight.unwrap(), 1.0, epsilon = 1e-12);
        assert!(c.parseval && c.equal_norm);

        let a = fixtures::fix_a().system().unwrap().classify();
        assert!(a.tight.is_none());
        assert!(!a.parseval);

        let f = DenseMatrix::from_columns(3, &[[1.0, 0.0, 0.0], [1.0, 0.0, 0.0]]).unwrap();
        let k = DenseMatrix::diag(&[1.0, 0.0, 0.0]);
        let c = KFrameSystem::new(f, k, tol()).unwrap().classify();
        assert_abs_diff_eq!(c.tight.unwrap(), 2.0, epsilon = 1e-12);
        assert!(!c.parseval);
        assert!(c.equal_norm);
    }

    #[test]
    fn verify_kdual_examples() {
        let a = fixtures::fix_a();
        let sys = a.system().unwrap();
        let g = DenseMatrix::from_columns(3, &[[1.0, 1.0, 0.5], [0.0, 0.0, 0.0]]).unwrap();
        let d = sys.verify_kdual(g).unwrap();
        assert!(d.is_valid);
        assert_eq!(d.residual, 0.0);

        let dfx = fixtures::fix_d();
        let d = dfx.system().unwrap().verify_kdual(dfx.g.clone().unwrap()).unwrap();
        assert!(d.is_valid);

        let cfx = fixtures::fix_c();
        let sys = cfx.system().unwrap();
        let g = cfx.g.clone().unwrap();
        let diff = sys.f().matmul(&g.transpose()).sub(sys.k().matrix());
        assert_abs_diff_eq!(diff[(0, 3)], 2.0, epsilon = 1e-12);
        let d = sys.verify_kdual(g).unwrap();
        assert!(!d.is_valid);
        assert_abs_diff_eq!(d.residual, 2.0, epsilon = 1e-9);

        assert!(matches!(sys.verify_kdual(DenseMatrix::zeros(4, 3)), Err(Error::Shape(_))));
    }

    #[test]
    fn dual_perturbation_examples() {
        let cfx = fixtures::fix_c();
        let sys = cfx.system().unwrap();
        let base = crate::canonical::canonical_kdual(&sys).unwrap().dual;
        assert_eq!(sys.null_space().dim(), 1);

        let same = sys.dual_perturbation(&base, &[0.0; 4]).unwrap();
        assert!(same.g.sub(&base.g).max_abs() < 1e-15);

        let moved = sys.dual_perturbation(&base, &[1.0, -2.0, 0.5, 3.0]).unwrap();
        assert!(moved.is_valid);
        assert!(moved.g.sub(&base.g).max_abs() > 0.1);

        assert!(matches!(sys.dual_perturbation(&base, &[1.0]), Err(Error::Shape(_))));

        let inv = KFrameSystem::new(
            DenseMatrix::from_rows(&[[2.0, 1.0], [0.0, 1.0]]).unwrap(),
            DenseMatrix::identity(2),
            tol(),
        )
        .unwrap();
        let base = crate::canonical::canonical_kdual(&inv).unwrap().dual;
        assert!(inv.dual_perturbation(&base, &[]).is_ok());
        assert!(inv.dual_perturbation(&base, &[0.0]).is_err());
    }

    #[test]
    fn error_norm_examples() {
        let sys = fixtures::fix_a().system().unwrap();
        let g = DenseMatrix::from_columns(3, &[[1.0, 1.0, 0.5], [0.0, 0.0, 0.0]]).unwrap();
        let e = sys.error_norm_dr(&g, 1, subsets::DEFAULT_SUBSET_CAP).unwrap();
        assert_abs_diff_eq!(e.value, 1.5, epsilon = 1e-12);
        assert_eq!(e.argmax.one_based(), vec![1]);

        let zero = KFrameSystem::new(DenseMatrix::identity(2), DenseMatrix::zeros(2, 2), tol()).unwrap();
        let e = zero.error_norm_dr(&DenseMatrix::zeros(2, 2), 1, 10).unwrap();
        assert_eq!(e.value, 0.0);

        // r = m - 1 on FIX-D: brute force over the four 3-subsets.
        let dfx = fixtures::fix_d();
        let sys = dfx.system().unwrap();
        let g = dfx.g.unwrap();
        let brute = subsets::k_subsets(4, 3)
            .map(|s| {
                let mut e = DenseMatrix::zeros(4, 4);
                for &i in &s {
                    let fi = sys.f().column(i);
                    let gi = g.column(i);
                    e = e.add(&DenseMatrix::from_fn(4, 4, |a, b| fi[a] * gi[b]));
                }
                operator_norm(&e).unwrap()
            })
            .fold(0.0, f64::max);
        let e = sys.error_norm_dr(&g, 3, 100).unwrap();
        assert_abs_diff_eq!(e.value, brute, epsilon = 1e-12);
        assert_abs_diff_eq!(e.value, 2f64.sqrt(), epsilon = 1e-12);
        assert_eq!(e.argmax.one_based(), vec![1, 2, 3]);

        assert!(matches!(sys.error_norm_dr(&g, 4, 100), Err(Error::InvalidArgument(_))));
        assert!(matches!(sys.error_norm_dr(&g, 2, 3), Err(Error::Budget { .. })));
    }

    #[test]
    fn transform_examples() {
        let a = fixtures::fix_a();
        let sys = a.system().unwrap();
        let same = sys.transform(&DenseMatrix::identity(3), &DenseMatrix::identity(2)).unwrap();
        assert_eq!(same.f(), sys.f());
        assert_eq!(same.k().matrix(), sys.k().matrix());

        let scale = DenseMatrix::diag(&[2.0, 1.0, 1.0]);
        let t = sys.transform(&scale, &DenseMatrix::identity(2)).unwrap();
        assert_eq!(t.k().matrix(), &scale.matmul(&a.k));
        let g = DenseMatrix::from_columns(3, &[[1.0, 1.0, 0.5], [0.0, 0.0, 0.0]]).unwrap();
        assert!(t.verify_kdual(g).unwrap().is_valid);

        let d = fixtures::fix_d().system().unwrap();
        let swap = DenseMatrix::from_rows(&[
            [0.0, 1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ])
        .unwrap();
        let t = d.transform(&DenseMatrix::identity(4), &swap).unwrap();
        let (c0, c1) = (d.classify(), t.classify());
        assert_eq!(c0.tight.is_some(), c1.tight.is_some());
        assert_eq!(c0.equal_norm, c1.equal_norm);

        let not_orth = DenseMatrix::diag(&[2.0, 1.0]);
        assert!(matches!(
            sys.transform(&DenseMatrix::identity(3), &not_orth),
            Err(Error::NotUnitary { .. })
        ));
    }
}
