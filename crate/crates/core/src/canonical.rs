//! Canonical K-duals.
//!
//! The canonical K-dual is read off the minimal-norm solution `X_F = F†·K` of
//! `F·X = K`: its vectors are `g_i = X_Fᵀ·δ_i`, so the dual synthesis matrix is
//! `G = X_Fᵀ`. The same dual is produced by `Γ_Fᵀ·f_i` with `Γ_F = (Fᵀ)†·X_F`,
//! and, under range hypotheses, by two restricted-inverse formulas built from
//! the frame operator restricted to R(K).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{DualSystem, KFrameSystem};
use crate::linalg::{operator_norm, pseudo_inverse, restricted_operator, DenseMatrix};
use crate::rng;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CanonicalDualResult {
    pub dual: DualSystem,
    /// Minimal-norm solution of `F·X = K` (m×n).
    pub x_f: DenseMatrix,
    /// `Γ_F` (n×n) with `X_F = Fᵀ·Γ_F`.
    pub gamma: DenseMatrix,
    /// `‖X_F‖`, the analysis-operator norm of the canonical dual.
    pub analysis_norm: f64,
}

pub fn canonical_kdual(sys: &KFrameSystem) -> Result<CanonicalDualResult> {
    let tol = sys.tol();
    let f_pinv = pseudo_inverse(sys.f(), tol)?;
    let x_f = f_pinv.matmul(sys.k().matrix());
    let gamma = f_pinv.transpose().matmul(&x_f);
    let analysis_norm = operator_norm(&x_f)?;
    let dual = sys.verify_kdual(x_f.transpose())?;
    Ok(CanonicalDualResult {
        dual,
        x_f,
        gamma,
        analysis_norm,
    })
}

/// `Γ_F` with `X_F = Fᵀ·Γ_F` and range inside R(F).
pub fn gamma_operator(sys: &KFrameSystem) -> Result<DenseMatrix> {
    Ok(canonical_kdual(sys)?.gamma)
}

/// Decides whether `g` is the canonical K-dual by testing `G·Gᵀ = G·Zᵀ`
/// against other K-duals Z.
///
/// The tested set always contains the canonical dual and one perturbation
/// `G + E_{jk}·Nᵀ` per row j and null-space direction k of F, which spans every
/// admissible perturbation; `trials` extra seeded random perturbations are
/// added on top.
pub fn is_canonical(sys: &KFrameSystem, g: &DualSystem, trials: usize, seed: u64) -> Result<bool> {
    if !g.is_valid {
        return Err(Error::InvalidDual { residual: g.residual });
    }
    let tol = sys.tol();
    let (n, d) = (sys.n(), sys.null_space().dim());
    let s_g = g.g.matmul(&g.g.transpose());
    let g_norm = operator_norm(&g.g)?;

    let holds = |z: &DenseMatrix| -> Result<bool> {
        let resid = operator_norm(&s_g.sub(&g.g.matmul(&z.transpose())))?;
        Ok(tol.accepts(resid, g_norm * operator_norm(z)?.max(g_norm)))
    };

    if !holds(&canonical_kdual(sys)?.dual.g)? {
        return Ok(false);
    }
    let mut coeffs = vec![0.0; n * d];
    for slot in 0..n * d {
        coeffs[slot] = 1.0;
        let z = sys.dual_perturbation(g, &coeffs)?;
        coeffs[slot] = 0.0;
        if !holds(&z.g)? {
            return Ok(false);
        }
    }
    if d > 0 {
        let mut rng = rng::seeded(seed);
        for _ in 0..trials {
            let c = rng::normal_vec(&mut rng, n * d);
            let z = sys.dual_perturbation(g, &c)?;
            if !holds(&z.g)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Which range hypotheses of the restricted-inverse construction hold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisReport {
    /// Every f_i lies in R(K).
    pub frame_in_range_k: bool,
    /// R(K) ⊆ S_F(R(K)).
    pub range_k_in_image: bool,
    /// Every f_i lies in S_F(R(K)).
    pub frame_in_image: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RestrictedDuals {
    /// `g_i = Kᵀ·(S_F|_{R(K)})⁻¹·π_{S_F(R(K))}·f_i`.
    pub projected_image: DualSystem,
    /// `g_i = Kᵀ·((S_F|_{R(K)})⁻¹)ᵀ·π_{R(K)}·f_i`.
    pub adjoint_inverse: DualSystem,
    pub hypotheses: HypothesisReport,
    /// Whether each formula reproduces the canonical dual numerically.
    pub projected_image_is_canonical: bool,
    pub adjoint_inverse_is_canonical: bool,
}

/// Builds both restricted-inverse candidates and reports hypothesis status
/// rather than refusing when the hypotheses fail.
pub fn canonical_via_restricted(sys: &KFrameSystem) -> Result<RestrictedDuals> {
    let tol = sys.tol();
    let range_k = sys.k().range();
    let restriction = restricted_operator(&sys.frame_operator(), range_k, tol)?;
    if !restriction.is_invertible() {
        return Err(Error::SingularRestriction {
            defect: restriction.defect(),
        });
    }
    let inv = restriction.inverse_on_range(tol)?;
    let kt = sys.k().matrix().transpose();

    let g1 = kt.matmul(&inv).matmul(sys.f());
    let g2 = kt.matmul(&inv.transpose()).matmul(sys.f());

    let image = &restriction.range;
    let columns: Vec<Vec<f64>> = sys.f().columns();
    let hypotheses = HypothesisReport {
        frame_in_range_k: columns.iter().all(|c| range_k.contains(c, tol)),
        range_k_in_image: image.contains_subspace(range_k, tol),
        frame_in_image: columns.iter().all(|c| image.contains(c, tol)),
    };

    let canonical = canonical_kdual(sys)?.dual.g;
    let scale = operator_norm(&canonical)?;
    let matches = |g: &DenseMatrix| -> Result<bool> {
        Ok(tol.accepts(operator_norm(&g.sub(&canonical))?, scale))
    };

    Ok(RestrictedDuals {
        projected_image_is_canonical: matches(&g1)?,
        adjoint_inverse_is_canonical: matches(&g2)?,
        projected_image: sys.verify_kdual(g1)?,
        adjoint_inverse: sys.verify_kdual(g2)?,
        hypotheses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::linalg::TolerancePolicy;

    fn close(a: &DenseMatrix, b: &DenseMatrix, eps: f64) -> bool {
        a.shape() == b.shape() && a.sub(b).max_abs() <= eps
    }

    fn fix_a_dual() -> DenseMatrix {
        DenseMatrix::from_columns(3, &[[1.0, 1.0, 0.5], [0.0, 0.0, 0.0]]).unwrap()
    }

    #[test]
    fn canonical_examples() {
        let sys = fixtures::fix_a().system().unwrap();
        let c = canonical_kdual(&sys).unwrap();
        assert!(close(&c.dual.g, &fix_a_dual(), 1e-12));
        assert!(c.dual.is_valid);

        // Orthonormal basis with K = I is self-dual.
        let theta: f64 = 0.3;
        let f = DenseMatrix::from_rows(&[[theta.cos(), -theta.sin()], [theta.sin(), theta.cos()]]).unwrap();
        let sys = KFrameSystem::new(f.clone(), DenseMatrix::identity(2), TolerancePolicy::default()).unwrap();
        assert!(close(&canonical_kdual(&sys).unwrap().dual.g, &f, 1e-12));
    }

    #[test]
    fn fix_d_canonical_is_norm_minimal_among_perturbed_duals() {
        let sys = fixtures::fix_d().system().unwrap();
        let c = canonical_kdual(&sys).unwrap();
        let base_norm = operator_norm(&c.dual.g).unwrap();
        let d = sys.null_space().dim();
        assert!(d > 0);
        let mut rng = rng::seeded(7);
        for _ in 0..50 {
            let coeffs = rng::normal_vec(&mut rng, sys.n() * d);
            let z = sys.dual_perturbation(&c.dual, &coeffs).unwrap();
            assert!(z.is_valid);
            assert!(base_norm <= operator_norm(&z.g).unwrap() + 1e-12);
        }
    }

    #[test]
    fn invariants_of_canonical_result() {
        for fx in fixtures::all() {
            let sys = fx.system().unwrap();
            let c = canonical_kdual(&sys).unwrap();
            // F·X_F = K
            assert!(close(&sys.f().matmul(&c.x_f), sys.k().matrix(), 1e-10), "{}", fx.name);
            // columns of X_F lie in R(Fᵀ)
            let row_space = crate::linalg::range_projector(&sys.f().transpose(), sys.tol()).unwrap();
            assert!(close(&row_space.matmul(&c.x_f), &c.x_f, 1e-10));
            // X_F = Fᵀ·Γ_F
            assert!(close(&sys.f().transpose().matmul(&c.gamma), &c.x_f, 1e-10));
        }
    }

    #[test]
    fn gamma_examples() {
        let sys = fixtures::fix_a().system().unwrap();
        let gamma = gamma_operator(&sys).unwrap();
        let g = gamma.transpose().matmul(sys.f());
        assert!(close(&g, &fix_a_dual(), 1e-12));

        // Orthonormal columns with K = F·Fᵀ: Γ_Fᵀ·f_i reproduces the canonical dual.
        let f = DenseMatrix::from_columns(3, &[[1.0, 0.0, 0.0], [0.0, 0.6, 0.8]]).unwrap();
        let k = f.matmul(&f.transpose());
        let sys = KFrameSystem::new(f, k, TolerancePolicy::default()).unwrap();
        let c = canonical_kdual(&sys).unwrap();
        assert!(close(&c.gamma.transpose().matmul(sys.f()), &c.dual.g, 1e-12));
        assert!(close(&sys.f().transpose().matmul(&c.gamma), &c.x_f, 1e-12));
    }

    #[test]
    fn parseval_gamma_is_pinv_transpose() {
        // F = K·W with orthonormal rows W gives F·Fᵀ = K·Kᵀ.
        let k = DenseMatrix::from_rows(&[[1.0, 2.0, 0.0], [0.0, 1.0, 1.0], [1.0, 3.0, 1.0]]).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let w = DenseMatrix::from_rows(&[
            [s, 0.0, 0.0, s],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
        ])
        .unwrap();
        let f = k.matmul(&w);
        let sys = KFrameSystem::new(f, k, TolerancePolicy::default()).unwrap();
        assert!(sys.classify().parseval);
        let c = canonical_kdual(&sys).unwrap();
        assert!(close(&c.gamma, &sys.k().pinv().transpose(), 1e-9));
        assert!(close(&c.dual.g, &sys.k().pinv().matmul(sys.f()), 1e-9));
    }

    #[test]
    fn is_canonical_examples() {
        let sys = fixtures::fix_a().system().unwrap();
        let g = sys.verify_kdual(fix_a_dual()).unwrap();
        assert!(is_canonical(&sys, &g, 5, 1).unwrap());
        // FIX-A has a trivial null space, so its K-dual is unique and any
        // perturbation leaves the set of K-duals.
        assert_eq!(sys.null_space().dim(), 0);
        let moved = sys.verify_kdual(fix_a_dual().add(&DenseMatrix::from_fn(3, 2, |i, j| if i == 2 && j == 1 { 0.1 } else { 0.0 }))).unwrap();
        assert!(matches!(is_canonical(&sys, &moved, 5, 1), Err(Error::InvalidDual { .. })));

        // FIX-D has a one-dimensional null space; a perturbed dual is not canonical.
        let sys = fixtures::fix_d().system().unwrap();
        let c = canonical_kdual(&sys).unwrap().dual;
        assert!(is_canonical(&sys, &c, 10, 3).unwrap());
        let z = sys.dual_perturbation(&c, &[0.0, 0.5, 0.0, 0.0]).unwrap();
        assert!(!is_canonical(&sys, &z, 10, 3).unwrap());
        let published = sys.verify_kdual(fixtures::fix_d().g.unwrap()).unwrap();
        assert!(!is_canonical(&sys, &published, 0, 0).unwrap());

        let inv = KFrameSystem::new(
            DenseMatrix::from_rows(&[[2.0, 1.0], [0.0, 1.0]]).unwrap(),
            DenseMatrix::identity(2),
            TolerancePolicy::default(),
        )
        .unwrap();
        let c = canonical_kdual(&inv).unwrap().dual;
        assert!(is_canonical(&inv, &c, 3, 9).unwrap());
    }

    #[test]
    fn restricted_fix_a_matches_canonical_despite_failed_hypotheses() {
        let sys = fixtures::fix_a().system().unwrap();
        let r = canonical_via_restricted(&sys).unwrap();
        assert!(close(&r.projected_image.g, &fix_a_dual(), 1e-12));
        assert!(close(&r.adjoint_inverse.g, &fix_a_dual(), 1e-12));
        assert!(r.projected_image_is_canonical && r.adjoint_inverse_is_canonical);
        assert!(!r.hypotheses.frame_in_range_k);
        assert!(!r.hypotheses.frame_in_image);
        // R(K) = span{e1} = S_F(R(K)) here.
        assert!(r.hypotheses.range_k_in_image);
    }

    #[test]
    fn restricted_fix_b_is_not_a_dual() {
        let sys = fixtures::fix_b().system().unwrap();
        let r = canonical_via_restricted(&sys).unwrap();
        let expected = DenseMatrix::from_columns(
            4,
            &[
                [0.4, 0.0, 0.4, 0.0],
                [0.0, 1.0, 0.0, 0.5],
                [0.2, 0.0, 0.2, 0.0],
                [0.6, 0.0, 0.6, 0.0],
            ],
        )
        .unwrap();
        assert!(close(&r.projected_image.g, &expected, 1e-12));
        assert!(!r.projected_image.is_valid);
        // F·Gᵀ·e3 = e1 + (4/5)·e3.
        let e3 = sys.f().matmul(&r.projected_image.g.transpose()).mul_vec(&[0.0, 0.0, 1.0, 0.0]);
        assert!((e3[0] - 1.0).abs() < 1e-12 && (e3[2] - 0.8).abs() < 1e-12);
        assert!(!r.hypotheses.frame_in_range_k);
        assert!(!r.hypotheses.range_k_in_image);
        assert!(!r.hypotheses.frame_in_image);
    }

    #[test]
    fn restricted_with_frame_inside_range_k() {
        // K = diag(1,1,0); frame vectors drawn from R(K) = span{e1, e2}.
        let f = DenseMatrix::from_columns(3, &[[1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 2.0, 0.0]]).unwrap();
        let k = DenseMatrix::from_rows(&[[1.0, 2.0, 0.0], [0.0, 1.0, 3.0], [0.0, 0.0, 0.0]]).unwrap();
        let sys = KFrameSystem::new(f, k, TolerancePolicy::default()).unwrap();
        let r = canonical_via_restricted(&sys).unwrap();
        assert!(r.hypotheses.frame_in_range_k);
        assert!(r.projected_image.is_valid);
        assert!(r.projected_image_is_canonical);
        // R(K) = S_F(R(K)) as well, so the adjoint formula is canonical too.
        assert!(r.hypotheses.range_k_in_image);
        assert!(r.adjoint_inverse_is_canonical);
    }
}
