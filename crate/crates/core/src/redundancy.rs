//! Combinatorial redundancy diagnostics: Hamming weight, spark, minimal
//! redundancy (MRC), uniform excess, maximal robustness and the derived
//! K†-frame pair of an MRC subset.
//!
//! All scans are size-ascending and lexicographic within a size, so witnesses
//! are deterministic.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::canonical::canonical_kdual;
use crate::erasure::ErasureSet;
use crate::error::{Error, Result};
use crate::frame::{is_kframe, KFrameSystem};
use crate::linalg::{
    null_space_basis, operator_norm, range_basis, rank_above, rank_cutoff, rank_of, restricted_operator,
    DenseMatrix, SubspaceBasis, TolerancePolicy,
};
use crate::subsets::{binomial, check_budget, complement, k_subsets};

/// Default cap on the number of columns a spark computation will enumerate.
pub const DEFAULT_SPARK_CAP: usize = 24;

/// Number of entries with `|x_j| > tol·max(1, ‖x‖∞)`.
pub fn hamming_weight(x: &[f64], tol: f64) -> usize {
    let scale = x.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    x.iter().filter(|v| v.abs() > tol * scale).count()
}

/// A support size that may be unbounded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Spark {
    Finite(usize),
    Infinite,
}

impl Spark {
    pub fn is_finite(self) -> bool {
        matches!(self, Spark::Finite(_))
    }

    pub fn finite(self) -> Option<usize> {
        match self {
            Spark::Finite(s) => Some(s),
            Spark::Infinite => None,
        }
    }

    /// `spark − 1`, or `m` when the spark is infinite.
    pub fn tolerated(self, m: usize) -> usize {
        match self {
            Spark::Finite(s) => s.saturating_sub(1),
            Spark::Infinite => m,
        }
    }
}

impl fmt::Display for Spark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Spark::Finite(s) => write!(f, "{s}"),
            Spark::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Spark {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Spark::Finite(v) => s.serialize_u64(*v as u64),
            Spark::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Spark {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            N(usize),
            S(String),
        }
        match Repr::deserialize(d)? {
            Repr::N(0) => Err(serde::de::Error::custom("spark must be positive")),
            Repr::N(v) => Ok(Spark::Finite(v)),
            Repr::S(s) if s.eq_ignore_ascii_case("inf") => Ok(Spark::Infinite),
            Repr::S(s) => Err(serde::de::Error::custom(format!("expected a positive integer or \"inf\", got {s:?}"))),
        }
    }
}

/// Spark (or minimal support) together with a vector attaining it.
///
/// The witness has exactly `value` nonzero entries and its first nonzero
/// entry is 1. It is absent when the value is infinite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparkResult {
    #[serde(rename = "spark")]
    pub value: Spark,
    pub witness: Option<Vec<f64>>,
}

impl SparkResult {
    fn infinite() -> Self {
        Self {
            value: Spark::Infinite,
            witness: None,
        }
    }
}

fn normalise_witness(mut x: Vec<f64>) -> Vec<f64> {
    let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if let Some(&lead) = x.iter().find(|v| v.abs() > 1e-9 * scale) {
        for v in &mut x {
            *v /= lead;
            if v.abs() <= 1e-12 {
                *v = 0.0;
            }
        }
    }
    x
}

fn check_spark_cap(dim: usize, cap: usize) -> Result<()> {
    if dim > cap {
        return Err(Error::Budget {
            needed: dim as u128,
            cap: cap as u128,
        });
    }
    Ok(())
}

/// `min{‖x‖₀ : Mx = 0, x ≠ 0}` by testing column subsets of increasing size
/// for rank deficiency. Every subset of size rank(M)+1 is dependent, so the
/// scan stops there.
pub fn spark(m: &DenseMatrix, tol: &TolerancePolicy, cap: usize) -> Result<SparkResult> {
    check_spark_cap(m.cols(), cap)?;
    // Submatrices are judged against the scale of the whole matrix.
    let cutoff = rank_cutoff(m, tol)?;
    let rank = rank_above(m, cutoff)?;
    for k in 1..=(rank + 1).min(m.cols()) {
        for subset in k_subsets(m.cols(), k) {
            let sub = m.select_columns(&subset);
            if rank_above(&sub, cutoff)? < k {
                // Smallest right singular vector, via the k×k Gram matrix.
                let gram = sub.transpose().matmul(&sub);
                let y = crate::linalg::svd_factor(&gram)?.v.column(k - 1);
                let mut x = vec![0.0; m.cols()];
                for (pos, &j) in subset.iter().enumerate() {
                    x[j] = y[pos];
                }
                return Ok(SparkResult {
                    value: Spark::Finite(k),
                    witness: Some(normalise_witness(x)),
                });
            }
        }
    }
    Ok(SparkResult::infinite())
}

/// Smallest support of a nonzero vector in the subspace spanned by the
/// orthonormal columns of `b`: a support S is feasible iff the rows of `b`
/// outside S have rank below dim.
fn min_support(b: &SubspaceBasis, tol: &TolerancePolicy, cap: usize) -> Result<SparkResult> {
    let n = b.ambient_dim();
    check_spark_cap(n, cap)?;
    let d = b.dim();
    if d == 0 {
        return Ok(SparkResult::infinite());
    }
    let cutoff = tol.rank_cutoff_rel * n.max(d) as f64;
    for k in 1..=n {
        for support in k_subsets(n, k) {
            let outside = complement(&support, n);
            let rows = b.basis().select_rows(&outside);
            if outside.is_empty() || rank_above(&rows, cutoff)? < d {
                let y = if outside.is_empty() {
                    let mut e = vec![0.0; d];
                    e[0] = 1.0;
                    e
                } else {
                    // Smallest right singular vector of the row block, taken
                    // from its d×d Gram matrix so it exists even when the
                    // block has fewer than d rows.
                    let gram = rows.transpose().matmul(&rows);
                    crate::linalg::svd_factor(&gram)?.v.column(d - 1)
                };
                let mut x = b.basis().mul_vec(&y);
                for &j in &outside {
                    x[j] = 0.0;
                }
                return Ok(SparkResult {
                    value: Spark::Finite(k),
                    witness: Some(normalise_witness(x)),
                });
            }
        }
    }
    Ok(SparkResult::infinite())
}

/// Spark computed from an orthonormal kernel basis by support enumeration.
/// Independent of [`spark`], which enumerates column subsets instead.
pub fn spark_via_kernel(m: &DenseMatrix, tol: &TolerancePolicy, cap: usize) -> Result<SparkResult> {
    check_spark_cap(m.cols(), cap)?;
    min_support(&null_space_basis(m, tol)?, tol, cap)
}

/// Smallest ‖x‖₀ over nonzero x in the column space of `m`.
pub fn min_support_in_range(m: &DenseMatrix, tol: &TolerancePolicy, cap: usize) -> Result<SparkResult> {
    check_spark_cap(m.rows(), cap)?;
    min_support(&range_basis(m, tol)?, tol, cap)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MrcReport {
    pub sigma: ErasureSet,
    /// `{f_i}_{i∉σ}` is still a K-frame.
    pub is_mrc: bool,
    /// `R(FᵀK) ∩ span{δ_i}_{i∈σ} = {0}`, which every MRC subset satisfies.
    pub necessary_condition_i: bool,
    /// For Parseval K-frames only: `(K − F_σ·G_σᵀ)` restricted to R(K†) is
    /// invertible onto `S_{σᶜ}(R(K))`, with G the canonical dual.
    pub parseval_condition_ii: Option<bool>,
}

fn check_shapes(f: &DenseMatrix, k: &DenseMatrix) -> Result<()> {
    if !k.is_square() || f.rows() != k.rows() {
        return Err(Error::Shape(format!(
            "F is {}x{} but K is {}x{}; K must be square with as many rows as F",
            f.rows(),
            f.cols(),
            k.rows(),
            k.cols()
        )));
    }
    Ok(())
}

fn subsystem_is_kframe(f: &DenseMatrix, k: &DenseMatrix, keep: &[usize], tol: &TolerancePolicy) -> Result<bool> {
    is_kframe(&f.select_columns(keep), k, tol)
}

pub fn mrc_subset(f: &DenseMatrix, k: &DenseMatrix, sigma: &ErasureSet, tol: &TolerancePolicy) -> Result<MrcReport> {
    check_shapes(f, k)?;
    sigma.validate(f.cols())?;
    let keep = sigma.complement(f.cols());
    let is_mrc = subsystem_is_kframe(f, k, &keep, tol)?;
    let necessary_condition_i = trivial_intersection_with_coordinates(f, k, sigma, tol)?;
    let parseval_condition_ii = parseval_condition(f, k, sigma, &keep, tol)?;
    Ok(MrcReport {
        sigma: sigma.clone(),
        is_mrc,
        necessary_condition_i,
        parseval_condition_ii,
    })
}

fn trivial_intersection_with_coordinates(
    f: &DenseMatrix,
    k: &DenseMatrix,
    sigma: &ErasureSet,
    tol: &TolerancePolicy,
) -> Result<bool> {
    if sigma.is_empty() {
        return Ok(true);
    }
    let m = f.cols();
    let b = range_basis(&f.transpose().matmul(k), tol)?;
    let deltas = DenseMatrix::from_fn(m, sigma.len(), |i, j| if sigma.indices()[j] == i { 1.0 } else { 0.0 });
    let joint = if b.is_empty() { deltas } else { b.basis().hstack(&deltas) };
    Ok(rank_of(&joint, tol)? == b.dim() + sigma.len())
}

fn parseval_condition(
    f: &DenseMatrix,
    k: &DenseMatrix,
    sigma: &ErasureSet,
    keep: &[usize],
    tol: &TolerancePolicy,
) -> Result<Option<bool>> {
    let sys = match KFrameSystem::new(f.clone(), k.clone(), *tol) {
        Ok(s) => s,
        Err(Error::NotKFrame { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    if !sys.classify().parseval {
        return Ok(None);
    }
    let g = canonical_kdual(&sys)?.dual.g;
    let idx = sigma.indices();
    let t = k.sub(&f.select_columns(idx).matmul(&g.select_columns(idx).transpose()));
    let restricted = restricted_operator(&t, sys.k().adjoint_range(), tol)?;
    let f_keep = f.select_columns(keep);
    let s_keep = f_keep.matmul(&f_keep.transpose());
    let target = restricted_operator(&s_keep, sys.k().range(), tol)?.range;
    let same_range = restricted.range.contains_subspace(&target, tol) && target.contains_subspace(&restricted.range, tol);
    Ok(Some(restricted.is_invertible() && same_range))
}

/// Whether every r-subset σ is MRC, with the lexicographically first failing σ.
pub fn mrc_all(
    f: &DenseMatrix,
    k: &DenseMatrix,
    r: usize,
    cap: u128,
    tol: &TolerancePolicy,
) -> Result<(bool, Option<ErasureSet>)> {
    check_shapes(f, k)?;
    let m = f.cols();
    if r > m {
        return Err(Error::InvalidArgument(format!("cannot erase r = {r} of m = {m} vectors")));
    }
    check_budget(binomial(m, r), cap)?;
    for sigma in k_subsets(m, r) {
        if !subsystem_is_kframe(f, k, &complement(&sigma, m), tol)? {
            return Ok((false, Some(ErasureSet::from_sorted_unchecked(sigma))));
        }
    }
    Ok((true, None))
}

/// A K-frame from which no single column can be removed.
pub fn is_exact_kframe(f: &DenseMatrix, k: &DenseMatrix, tol: &TolerancePolicy) -> Result<bool> {
    check_shapes(f, k)?;
    let all: Vec<usize> = (0..f.cols()).collect();
    exact_on(f, k, &all, tol)
}

fn exact_on(f: &DenseMatrix, k: &DenseMatrix, keep: &[usize], tol: &TolerancePolicy) -> Result<bool> {
    if !subsystem_is_kframe(f, k, keep, tol)? {
        return Ok(false);
    }
    for drop in 0..keep.len() {
        let rest: Vec<usize> = keep.iter().enumerate().filter(|&(p, _)| p != drop).map(|(_, &j)| j).collect();
        if subsystem_is_kframe(f, k, &rest, tol)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Result of [`uniform_excess`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformExcess {
    pub excess: usize,
    /// When `excess` is 0: the first single removal that does not leave an
    /// exact K-frame (absent when m ≤ 1).
    pub witness: Option<ErasureSet>,
}

fn all_subsystems_exact(
    f: &DenseMatrix,
    k: &DenseMatrix,
    r: usize,
    tol: &TolerancePolicy,
) -> Result<Option<ErasureSet>> {
    let m = f.cols();
    for sigma in k_subsets(m, r) {
        if !exact_on(f, k, &complement(&sigma, m), tol)? {
            return Ok(Some(ErasureSet::from_sorted_unchecked(sigma)));
        }
    }
    Ok(None)
}

/// The r such that every (m−r)-column subsystem is an exact K-frame.
///
/// At most one r can qualify: any larger subsystem contains an exact one and
/// is therefore not exact itself. The scan runs upward from r = 0.
pub fn uniform_excess(f: &DenseMatrix, k: &DenseMatrix, cap: u128, tol: &TolerancePolicy) -> Result<UniformExcess> {
    check_shapes(f, k)?;
    let m = f.cols();
    let mut witness = None;
    for r in 0..m {
        check_budget(binomial(m, r), cap)?;
        match all_subsystems_exact(f, k, r, tol)? {
            None if r > 0 => return Ok(UniformExcess { excess: r, witness: None }),
            None => {
                // F itself is exact; report the first single removal.
                if m > 1 {
                    witness = Some(ErasureSet::from_sorted_unchecked(vec![0]));
                }
                return Ok(UniformExcess { excess: 0, witness });
            }
            Some(sigma) if r == 1 => witness = Some(sigma),
            Some(_) => {}
        }
    }
    Ok(UniformExcess { excess: 0, witness })
}

/// Every rank(K)-column subset is an exact K-frame.
pub fn is_maximal_robust(f: &DenseMatrix, k: &DenseMatrix, cap: u128, tol: &TolerancePolicy) -> Result<bool> {
    check_shapes(f, k)?;
    let m = f.cols();
    let rk = rank_of(k, tol)?;
    if rk > m {
        return Ok(false);
    }
    check_budget(binomial(m, rk), cap)?;
    for keep in k_subsets(m, rk) {
        if !exact_on(f, k, &keep, tol)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The K†-frame / K†-dual pair carried by the surviving vectors of an MRC subset.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DerivedSystems {
    pub sigma: ErasureSet,
    /// Columns `Kᵀ·(S_{σᶜ}|_{R(K)})⁻¹·π·f_i`, i ∉ σ.
    pub seq1: DenseMatrix,
    /// Columns `(K†)ᵀ·K†·f_i`, i ∉ σ.
    pub seq2: DenseMatrix,
    /// `‖Seq1·Seq2ᵀ − K†‖`.
    pub dual_residual: f64,
    pub seq1_is_kdagger_frame: bool,
    pub seq2_is_kframe: bool,
    pub holds: bool,
}

pub fn mrc_derived_systems(
    f: &DenseMatrix,
    k: &DenseMatrix,
    sigma: &ErasureSet,
    tol: &TolerancePolicy,
) -> Result<DerivedSystems> {
    check_shapes(f, k)?;
    sigma.validate(f.cols())?;
    let keep = sigma.complement(f.cols());
    if !subsystem_is_kframe(f, k, &keep, tol)? {
        return Err(Error::MrcPrecondition);
    }
    let f_keep = f.select_columns(&keep);
    let s_keep = f_keep.matmul(&f_keep.transpose());
    let k_range = range_basis(k, tol)?;
    let inv = restricted_operator(&s_keep, &k_range, tol)?.inverse_on_range(tol)?;
    let k_pinv = crate::linalg::pseudo_inverse(k, tol)?;
    let seq1 = k.transpose().matmul(&inv).matmul(&f_keep);
    let seq2 = k_pinv.transpose().matmul(&k_pinv).matmul(&f_keep);
    let dual_residual = operator_norm(&seq1.matmul(&seq2.transpose()).sub(&k_pinv))?;
    let seq1_is_kdagger_frame = is_kframe(&seq1, &k_pinv, tol)?;
    let seq2_is_kframe = is_kframe(&seq2, k, tol)?;
    let dual_ok = tol.accepts(dual_residual, operator_norm(&k_pinv)?);
    Ok(DerivedSystems {
        sigma: sigma.clone(),
        seq1,
        seq2,
        dual_residual,
        seq1_is_kdagger_frame,
        seq2_is_kframe,
        holds: dual_ok && seq1_is_kdagger_frame && seq2_is_kframe,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn tol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    fn set(one_based: &[usize], m: usize) -> ErasureSet {
        ErasureSet::from_one_based(one_based, m).unwrap()
    }

    fn e1_e2_sum() -> (DenseMatrix, DenseMatrix) {
        let f = DenseMatrix::from_columns(2, &[&[1.0, 0.0][..], &[0.0, 1.0], &[1.0, 1.0]]).unwrap();
        (f, DenseMatrix::identity(2))
    }

    #[test]
    fn hamming_examples() {
        assert_eq!(hamming_weight(&[0.0, 0.0, 0.0], 1e-9), 0);
        assert_eq!(hamming_weight(&[0.5, 1.0, 0.0, -1.0], 1e-9), 3);
        assert_eq!(hamming_weight(&[1.0, 2.0, -1.0, 0.0], 1e-9), 3);
        assert_eq!(hamming_weight(&[1.0, 1e-14], 1e-9), 1);
    }

    #[test]
    fn spark_fix_c() {
        let fx = fixtures::fix_c();
        let s = spark(&fx.f, &tol(), DEFAULT_SPARK_CAP).unwrap();
        assert_eq!(s.value, Spark::Finite(3));
        let w = s.witness.unwrap();
        for (a, b) in w.iter().zip([1.0, 2.0, 0.0, -2.0]) {
            assert!((a - b).abs() < 1e-9, "{w:?}");
        }
        assert!(crate::linalg::norm2(&fx.f.mul_vec(&w)) < 1e-9);
    }

    #[test]
    fn spark_identity_and_zero() {
        let s = spark(&DenseMatrix::identity(3), &tol(), DEFAULT_SPARK_CAP).unwrap();
        assert_eq!(s, SparkResult::infinite());
        let z = spark(&DenseMatrix::zeros(2, 3), &tol(), DEFAULT_SPARK_CAP).unwrap();
        assert_eq!(z.value, Spark::Finite(1));
        assert_eq!(z.witness.unwrap(), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn spark_gramian_fix_d() {
        let sys = fixtures::fix_d().system().unwrap();
        let s = spark(sys.gramian(), &tol(), DEFAULT_SPARK_CAP).unwrap();
        assert_eq!(s.value, Spark::Finite(3));
        assert_eq!(hamming_weight(s.witness.as_ref().unwrap(), 1e-9), 3);
    }

    #[test]
    fn spark_implementations_agree_on_fixtures() {
        for fx in fixtures::all() {
            let sys = fx.system().unwrap();
            for m in [&fx.f, sys.gramian()] {
                let a = spark(m, &tol(), DEFAULT_SPARK_CAP).unwrap();
                let b = spark_via_kernel(m, &tol(), DEFAULT_SPARK_CAP).unwrap();
                assert_eq!(a.value, b.value, "{}", fx.name);
            }
        }
    }

    #[test]
    fn spark_cap() {
        let m = DenseMatrix::identity(3);
        assert!(matches!(spark(&m, &tol(), 2), Err(Error::Budget { .. })));
    }

    #[test]
    fn spark_json() {
        assert_eq!(serde_json::to_string(&Spark::Infinite).unwrap(), "\"inf\"");
        assert_eq!(serde_json::to_string(&Spark::Finite(3)).unwrap(), "3");
        let back: Spark = serde_json::from_str("\"inf\"").unwrap();
        assert_eq!(back, Spark::Infinite);
        assert!(serde_json::from_str::<Spark>("0").is_err());
        assert_eq!(Spark::Infinite.tolerated(5), 5);
        assert_eq!(Spark::Finite(3).tolerated(5), 2);
    }

    #[test]
    fn min_support_examples() {
        let id = min_support_in_range(&DenseMatrix::identity(3), &tol(), DEFAULT_SPARK_CAP).unwrap();
        assert_eq!(id.value, Spark::Finite(1));
        let ones = DenseMatrix::from_columns(3, &[&[1.0, 1.0, 1.0][..]]).unwrap();
        let s = min_support_in_range(&ones, &tol(), DEFAULT_SPARK_CAP).unwrap();
        assert_eq!(s.value, Spark::Finite(3));
        let zero = min_support_in_range(&DenseMatrix::zeros(3, 2), &tol(), DEFAULT_SPARK_CAP).unwrap();
        assert_eq!(zero.value, Spark::Infinite);
    }

    #[test]
    fn min_support_range_of_fix_d_dual() {
        let fx = fixtures::fix_d();
        let gt = fx.g.unwrap().transpose();
        let s = min_support_in_range(&gt, &tol(), DEFAULT_SPARK_CAP).unwrap();
        // Oracle: a support S is feasible iff R(Gᵀ) meets span{e_i : i ∈ S}.
        let b = range_basis(&gt, &tol()).unwrap();
        let mut best = usize::MAX;
        for k in 1..=4 {
            for supp in k_subsets(4, k) {
                let coords = DenseMatrix::from_fn(4, k, |i, j| if supp[j] == i { 1.0 } else { 0.0 });
                let joint = b.basis().hstack(&coords);
                if rank_of(&joint, &tol()).unwrap() < b.dim() + k {
                    best = best.min(k);
                }
            }
        }
        assert_eq!(s.value, Spark::Finite(best));
        let w = s.witness.unwrap();
        assert!(b.contains(&w, &tol()));
        assert_eq!(hamming_weight(&w, 1e-9), best);
    }

    #[test]
    fn mrc_fix_b() {
        let fx = fixtures::fix_b();
        let r = mrc_subset(&fx.f, &fx.k, &set(&[1, 3], 4), &tol()).unwrap();
        assert!(!r.is_mrc);
        assert!(r.necessary_condition_i);
        assert_eq!(r.parseval_condition_ii, None);
        let empty = mrc_subset(&fx.f, &fx.k, &ErasureSet::empty(), &tol()).unwrap();
        assert!(empty.is_mrc && empty.necessary_condition_i);
    }

    #[test]
    fn mrc_fix_d_dual_as_adjoint_frame() {
        let fx = fixtures::fix_d();
        let r = mrc_subset(&fx.g.unwrap(), &fx.k.transpose(), &set(&[1], 4), &tol()).unwrap();
        assert!(!r.is_mrc);
    }

    #[test]
    fn mrc_all_examples() {
        let fx = fixtures::fix_b();
        let (ok, w) = mrc_all(&fx.f, &fx.k, 2, 1000, &tol()).unwrap();
        assert!(!ok);
        assert_eq!(w.unwrap().one_based(), vec![1, 2]);
        assert_eq!(mrc_all(&fx.f, &fx.k, 0, 1000, &tol()).unwrap(), (true, None));
        let (f, k) = e1_e2_sum();
        assert_eq!(mrc_all(&f, &k, 1, 1000, &tol()).unwrap(), (true, None));
        assert!(matches!(mrc_all(&fx.f, &fx.k, 2, 3, &tol()), Err(Error::Budget { .. })));
    }

    #[test]
    fn uniform_excess_examples() {
        let (f, k) = e1_e2_sum();
        assert_eq!(uniform_excess(&f, &k, 1000, &tol()).unwrap().excess, 1);

        let fx = fixtures::fix_d();
        let u = uniform_excess(&fx.f, &fx.k, 1000, &tol()).unwrap();
        assert_eq!(u.excess, 0);
        assert_eq!(u.witness.unwrap().one_based(), vec![4]);

        let basis = DenseMatrix::identity(3);
        let u = uniform_excess(&basis, &basis, 1000, &tol()).unwrap();
        assert_eq!(u.excess, 0);
        assert!(is_exact_kframe(&basis, &basis, &tol()).unwrap());
    }

    #[test]
    fn maximal_robust_examples() {
        let fx = fixtures::fix_b();
        assert!(!is_maximal_robust(&fx.f, &fx.k, 1000, &tol()).unwrap());
        let vander = DenseMatrix::from_rows(&[&[1.0, 1.0, 1.0][..], &[0.5, 1.5, -2.0]]).unwrap();
        assert!(is_maximal_robust(&vander, &DenseMatrix::identity(2), 1000, &tol()).unwrap());
        let with_zero = DenseMatrix::from_rows(&[&[1.0, 0.0, 0.0][..], &[0.0, 1.0, 0.0]]).unwrap();
        assert!(!is_maximal_robust(&with_zero, &DenseMatrix::identity(2), 1000, &tol()).unwrap());
    }

    #[test]
    fn derived_systems_fix_b() {
        let fx = fixtures::fix_b();
        let d = mrc_derived_systems(&fx.f, &fx.k, &ErasureSet::empty(), &tol()).unwrap();
        assert!(d.holds, "{d:?}");
        let k_pinv = crate::linalg::pseudo_inverse(&fx.k, &tol()).unwrap();
        let mut rng = crate::rng::seeded(7);
        for _ in 0..100 {
            let x = crate::rng::normal_vec(&mut rng, 4);
            let coeffs = d.seq2.tr_mul_vec(&x);
            let lhs = d.seq1.mul_vec(&coeffs);
            let rhs = k_pinv.mul_vec(&x);
            for (a, b) in lhs.iter().zip(&rhs) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn derived_systems_identity_operator() {
        let (f, k) = e1_e2_sum();
        let d = mrc_derived_systems(&f, &k, &set(&[3], 3), &tol()).unwrap();
        assert!(d.holds);
        // With K = I the pair is the kept vectors and their canonical dual.
        let keep = f.select_columns(&[0, 1]);
        assert!(d.seq2.sub(&keep).max_abs() < 1e-12);
        assert!(d.seq1.matmul(&d.seq2.transpose()).sub(&k).max_abs() < 1e-12);
    }

    #[test]
    fn derived_systems_need_mrc() {
        let fx = fixtures::fix_b();
        assert!(matches!(
            mrc_derived_systems(&fx.f, &fx.k, &set(&[1, 3], 4), &tol()),
            Err(Error::MrcPrecondition)
        ));
    }

    #[test]
    fn parseval_condition_reported_for_parseval_systems() {
        // F = K·W with W·Wᵀ = I gives F·Fᵀ = K·Kᵀ.
        let k = DenseMatrix::from_rows(&[&[1.0, 0.0, 0.0][..], &[0.0, 2.0, 0.0], &[0.0, 0.0, 0.0]]).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let w = DenseMatrix::from_rows(&[&[s, 0.0, s, 0.0][..], &[0.0, s, 0.0, s], &[0.0, 0.0, 0.0, 0.0]]).unwrap();
        let f = k.matmul(&w);
        for sigma in [set(&[1], 4), set(&[1, 2], 4)] {
            let r = mrc_subset(&f, &k, &sigma, &tol()).unwrap();
            assert!(r.is_mrc);
            assert_eq!(r.parseval_condition_ii, Some(true), "{sigma:?}");
        }
        let r = mrc_subset(&f, &k, &set(&[1, 3], 4), &tol()).unwrap();
        assert!(!r.is_mrc);
        assert_eq!(r.parseval_condition_ii, Some(false));
    }
}
