//! Recovering erased K-dual coefficients.
//!
//! A signal f is transmitted as `c = Gᵀ·f` (c_i = ⟨f, g_i⟩) and the receiver
//! reconstructs `Kf = F·c`. When positions Λ are lost, three solvers are
//! available:
//!
//! - side information: with `v = Fᵀ·K·f` known, solve `M_Λ·c_Λ = v − M_{Λᶜ}·c_{Λᶜ}`
//!   for an (r,k)-matrix M (one with `(M − 𝒢_F)·Gᵀ = 0`);
//! - blind: solve `N_Λ·c_Λ = −N_{Λᶜ}·c_{Λᶜ}` with `N = M − 𝒢_F`;
//! - consistency: least squares on the surviving analysis equations.

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::canonical::canonical_kdual;
use crate::erasure::ErasureSet;
use crate::error::{Error, Result};
use crate::frame::{is_kframe, DualSystem, KFrameSystem};
use crate::linalg::{
    norm2, null_space_basis, operator_norm, pseudo_inverse, range_basis, range_projector, rank_above, rank_cutoff,
    DenseMatrix,
};
use crate::redundancy::{spark, SparkResult, Spark};
use crate::rng;
use crate::subsets::max_over_subsets;

/// Coefficients with a known set of erased positions.
///
/// The mask is authoritative: erased entries are held as 0.0 internally and
/// serialised as `null`.
#[derive(Clone, Debug, PartialEq)]
pub struct CodedSignal {
    coefficients: Vec<f64>,
    erased: ErasureSet,
}

impl CodedSignal {
    pub fn new(mut coefficients: Vec<f64>, erased: ErasureSet) -> Result<Self> {
        erased.validate(coefficients.len())?;
        for &i in erased.indices() {
            coefficients[i] = 0.0;
        }
        if let Some(i) = coefficients.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: i + 1, col: 1 });
        }
        Ok(Self { coefficients, erased })
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn erased(&self) -> &ErasureSet {
        &self.erased
    }

    /// Entry i, or `None` when erased.
    pub fn get(&self, i: usize) -> Option<f64> {
        (!self.erased.contains(i)).then(|| self.coefficients[i])
    }

    /// Surviving positions and their values.
    pub fn known(&self) -> (Vec<usize>, Vec<f64>) {
        let idx = self.erased.complement(self.len());
        let vals = idx.iter().map(|&i| self.coefficients[i]).collect();
        (idx, vals)
    }

    fn with_recovered(&self, values: &[f64]) -> Vec<f64> {
        let mut c = self.coefficients.clone();
        for (&i, &v) in self.erased.indices().iter().zip(values) {
            c[i] = v;
        }
        c
    }
}

#[derive(Serialize, Deserialize)]
struct CodedRepr {
    coefficients: Vec<Option<f64>>,
    #[serde(default)]
    erased: Option<Vec<usize>>,
}

impl Serialize for CodedSignal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CodedRepr {
            coefficients: (0..self.len()).map(|i| self.get(i)).collect(),
            erased: Some(self.erased.one_based()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CodedSignal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = CodedRepr::deserialize(d)?;
        let m = repr.coefficients.len();
        let mut erased: Vec<usize> = repr.erased.unwrap_or_default();
        for (i, v) in repr.coefficients.iter().enumerate() {
            if v.is_none() && !erased.contains(&(i + 1)) {
                erased.push(i + 1);
            }
        }
        let erased = ErasureSet::from_one_based(&erased, m).map_err(D::Error::custom)?;
        let values = repr.coefficients.iter().map(|v| v.unwrap_or(0.0)).collect();
        CodedSignal::new(values, erased).map_err(D::Error::custom)
    }
}

/// `c = Gᵀ·f`.
pub fn encode(g: &DualSystem, f: &[f64]) -> Result<Vec<f64>> {
    if f.len() != g.g.rows() {
        return Err(Error::Shape(format!(
            "signal has length {} but the dual lives in R^{}",
            f.len(),
            g.g.rows()
        )));
    }
    Ok(g.g.tr_mul_vec(f))
}

pub fn erase(c: &[f64], lambda: &ErasureSet) -> Result<CodedSignal> {
    CodedSignal::new(c.to_vec(), lambda.clone())
}

/// Spark data for a candidate recovery matrix M.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RkCertificate {
    #[serde(rename = "M")]
    pub m: DenseMatrix,
    pub spark_m: SparkResult,
    /// `M − 𝒢_F`.
    #[serde(rename = "N")]
    pub n: DenseMatrix,
    pub spark_n: SparkResult,
    /// `‖(M − 𝒢_F)·Gᵀ‖`.
    pub annihilation_residual: f64,
    pub annihilates: bool,
    /// Erasures recoverable with side information: spark(M) − 1 (m if infinite).
    pub r_side_info: usize,
    /// Erasures recoverable blindly: spark(M − 𝒢_F) − 1 (m if infinite).
    pub r_blind: usize,
}

fn annihilation(sys: &KFrameSystem, g: &DenseMatrix, m: &DenseMatrix) -> Result<(DenseMatrix, f64, bool)> {
    let n = m.sub(sys.gramian());
    let residual = operator_norm(&n.matmul(&g.transpose()))?;
    let scale = (operator_norm(m)? + operator_norm(sys.gramian())?) * operator_norm(g)?;
    Ok((n, residual, sys.tol().accepts(residual, scale)))
}

fn check_dual(sys: &KFrameSystem, g: &DenseMatrix) -> Result<()> {
    if g.shape() != sys.f().shape() {
        return Err(Error::Shape(format!(
            "dual must be {}x{} like F, got {}x{}",
            sys.n(),
            sys.m(),
            g.rows(),
            g.cols()
        )));
    }
    Ok(())
}

fn check_square_m(sys: &KFrameSystem, m: &DenseMatrix) -> Result<()> {
    if m.shape() != (sys.m(), sys.m()) {
        return Err(Error::Shape(format!(
            "recovery matrix must be {k}x{k}, got {}x{}",
            m.rows(),
            m.cols(),
            k = sys.m()
        )));
    }
    Ok(())
}

/// Computes both sparks and the annihilation residual of M. A failed
/// annihilation is reported, not raised. `g` need not be a valid K-dual.
pub fn validate_rk_matrix(sys: &KFrameSystem, g: &DenseMatrix, m: &DenseMatrix, cap: usize) -> Result<RkCertificate> {
    check_dual(sys, g)?;
    check_square_m(sys, m)?;
    let (n, annihilation_residual, annihilates) = annihilation(sys, g, m)?;
    let spark_m = spark(m, sys.tol(), cap)?;
    let spark_n = spark(&n, sys.tol(), cap)?;
    Ok(RkCertificate {
        r_side_info: spark_m.value.tolerated(sys.m()),
        r_blind: spark_n.value.tolerated(sys.m()),
        m: m.clone(),
        spark_m,
        n,
        spark_n,
        annihilation_residual,
        annihilates,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    SideInfo,
    Blind,
    Consistency,
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "side-info" => Ok(Self::SideInfo),
            "blind" => Ok(Self::Blind),
            "consistency" => Ok(Self::Consistency),
            _ => Err(Error::InvalidArgument(format!(
                "unknown strategy {s:?}; expected side-info, blind or consistency"
            ))),
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::SideInfo => "side-info",
            Self::Blind => "blind",
            Self::Consistency => "consistency",
        })
    }
}

/// An (r,k)-matrix found by [`find_rk_matrix`] and the mode it certifies.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RkSearch {
    pub certificate: RkCertificate,
    /// Blind when `r_blind` reached the target, otherwise side-info.
    pub mode: Strategy,
    /// 0 for the Gramian itself, otherwise the 1-based trial that succeeded.
    pub trial: usize,
}

/// Searches `M = 𝒢_F + A·(I − π_{R(Gᵀ)})` over seeded Gaussian A. Every such M
/// annihilates Gᵀ exactly; a trial succeeds once either spark reaches
/// `r_target + 1`, blind mode taking precedence.
pub fn find_rk_matrix(
    sys: &KFrameSystem,
    g: &DualSystem,
    r_target: usize,
    trials: usize,
    seed: u64,
    cap: usize,
) -> Result<RkSearch> {
    check_dual(sys, &g.g)?;
    if !g.is_valid {
        return Err(Error::InvalidDual { residual: g.residual });
    }
    let m = sys.m();
    if r_target >= m {
        return Err(Error::InvalidArgument(format!(
            "target r = {r_target} must be below m = {m}"
        )));
    }
    let gram = sys.gramian().clone();
    if r_target == 0 {
        return Ok(RkSearch {
            certificate: validate_rk_matrix(sys, &g.g, &gram, cap)?,
            mode: Strategy::SideInfo,
            trial: 0,
        });
    }
    let p = DenseMatrix::identity(m).sub(&range_projector(&g.g.transpose(), sys.tol())?);
    let mut rng = rng::seeded(seed);
    for trial in 1..=trials {
        let a = rng::normal_matrix(&mut rng, m, m);
        let cand = gram.add(&a.matmul(&p));
        let cert = validate_rk_matrix(sys, &g.g, &cand, cap)?;
        let mode = if cert.r_blind >= r_target {
            Strategy::Blind
        } else if cert.r_side_info >= r_target {
            Strategy::SideInfo
        } else {
            continue;
        };
        return Ok(RkSearch {
            certificate: cert,
            mode,
            trial,
        });
    }
    Err(Error::SearchExhausted { trials })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub recovered_coefficients: Vec<f64>,
    /// `K̂f = F·c` for the recovered c.
    pub reconstructed: Vec<f64>,
    pub strategy: Strategy,
    pub solver_residual: f64,
    pub certified_exact: bool,
}

fn check_coded(sys: &KFrameSystem, coded: &CodedSignal) -> Result<()> {
    if coded.len() != sys.m() {
        return Err(Error::Shape(format!(
            "coded signal has {} coefficients, expected m = {}",
            coded.len(),
            sys.m()
        )));
    }
    Ok(())
}

/// Solves `A_Λ·x = rhs` by pseudo-inverse, requiring full column rank of A_Λ
/// judged at the scale of A. Returns x and the residual norm.
fn solve_erased(sys: &KFrameSystem, a: &DenseMatrix, lambda: &[usize], rhs: &[f64]) -> Result<(Vec<f64>, f64)> {
    let a_l = a.select_columns(lambda);
    let rank = rank_above(&a_l, rank_cutoff(a, sys.tol())?)?;
    if rank < lambda.len() {
        return Err(Error::Ambiguous {
            deficiency: lambda.len() - rank,
        });
    }
    let x = pseudo_inverse(&a_l, sys.tol())?.mul_vec(rhs);
    let fit = a_l.mul_vec(&x);
    let residual = norm2(&fit.iter().zip(rhs).map(|(a, b)| a - b).collect::<Vec<_>>());
    Ok((x, residual))
}

fn finish(sys: &KFrameSystem, coefficients: Vec<f64>, strategy: Strategy, residual: f64, certified: bool) -> RecoveryReport {
    RecoveryReport {
        reconstructed: sys.f().mul_vec(&coefficients),
        recovered_coefficients: coefficients,
        strategy,
        solver_residual: residual,
        certified_exact: certified,
    }
}

fn linear_recovery(
    sys: &KFrameSystem,
    a: &DenseMatrix,
    coded: &CodedSignal,
    offset: Option<&[f64]>,
    strategy: Strategy,
) -> Result<RecoveryReport> {
    let lambda = coded.erased().indices();
    let (known_idx, known) = coded.known();
    let mut rhs: Vec<f64> = a.select_columns(&known_idx).mul_vec(&known).iter().map(|x| -x).collect();
    if let Some(v) = offset {
        for (r, vi) in rhs.iter_mut().zip(v) {
            *r += vi;
        }
    }
    if lambda.is_empty() {
        return Ok(finish(sys, coded.with_recovered(&[]), strategy, 0.0, true));
    }
    let (x, residual) = solve_erased(sys, a, lambda, &rhs)?;
    let certified = sys.tol().accepts(residual, norm2(&rhs));
    Ok(finish(sys, coded.with_recovered(&x), strategy, residual, certified))
}

/// Side-information recovery with `v = Fᵀ·K·f`.
pub fn recover_side_info(
    sys: &KFrameSystem,
    g: &DualSystem,
    m: &DenseMatrix,
    coded: &CodedSignal,
    v: &[f64],
) -> Result<RecoveryReport> {
    check_dual(sys, &g.g)?;
    check_square_m(sys, m)?;
    check_coded(sys, coded)?;
    if !g.is_valid {
        return Err(Error::InvalidDual { residual: g.residual });
    }
    if v.len() != sys.m() {
        return Err(Error::Shape(format!(
            "side vector has length {}, expected m = {}",
            v.len(),
            sys.m()
        )));
    }
    let (_, residual, ok) = annihilation(sys, &g.g, m)?;
    if !ok {
        return Err(Error::Annihilation { residual });
    }
    linear_recovery(sys, m, coded, Some(v), Strategy::SideInfo)
}

/// The side vector `v = Fᵀ·K·f`, for tests and simulations that know f.
pub fn side_vector(sys: &KFrameSystem, f: &[f64]) -> Vec<f64> {
    sys.f().tr_mul_vec(&sys.k().matrix().mul_vec(f))
}

/// Blind recovery from the homogeneous equations `(M − 𝒢_F)·c = 0`.
pub fn recover_blind(sys: &KFrameSystem, g: &DualSystem, m: &DenseMatrix, coded: &CodedSignal) -> Result<RecoveryReport> {
    check_dual(sys, &g.g)?;
    check_square_m(sys, m)?;
    check_coded(sys, coded)?;
    let (n, residual, ok) = annihilation(sys, &g.g, m)?;
    if !ok {
        return Err(Error::Annihilation { residual });
    }
    linear_recovery(sys, &n, coded, None, Strategy::Blind)
}

/// Least-squares estimate f̂ from the surviving coefficients, then `c_Λ = G_Λᵀ·f̂`.
///
/// Certified when the surviving g_i still form a Kᵀ-frame: then `K·f̂ = K·f`
/// although `c_Λ` may differ from the transmitted values.
pub fn recover_consistency(sys: &KFrameSystem, g: &DualSystem, coded: &CodedSignal) -> Result<RecoveryReport> {
    check_dual(sys, &g.g)?;
    check_coded(sys, coded)?;
    if !g.is_valid {
        return Err(Error::InvalidDual { residual: g.residual });
    }
    let (known_idx, known) = coded.known();
    let g_known = g.g.select_columns(&known_idx);
    let f_hat = pseudo_inverse(&g_known.transpose(), sys.tol())?.mul_vec(&known);
    let fit = g_known.tr_mul_vec(&f_hat);
    let residual = norm2(&fit.iter().zip(&known).map(|(a, b)| a - b).collect::<Vec<_>>());
    let lambda = coded.erased().indices();
    let c_lambda = g.g.select_columns(lambda).tr_mul_vec(&f_hat);
    let coefficients = coded.with_recovered(&c_lambda);
    let spans = is_kframe(&g_known, &sys.k().matrix().transpose(), sys.tol())?;
    let certified = spans && sys.tol().accepts(residual, norm2(&known));
    let mut report = finish(sys, coefficients, Strategy::Consistency, residual, certified);
    report.reconstructed = sys.k().matrix().mul_vec(&f_hat);
    Ok(report)
}

/// Expansion of the projected erased dual vectors over surviving frame vectors.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Method1Expansion {
    pub lambda: ErasureSet,
    /// Row i holds `α_{i,·}` with `π_{R(K)}g_i = Σ_j α_{i,j}·f_j` over surviving j.
    pub alpha: DenseMatrix,
    /// |Λ|×m: identity on the Λ columns and `−α` on the surviving columns.
    pub m_f: DenseMatrix,
    pub expansion_residual: f64,
}

pub fn method1_expansion(sys: &KFrameSystem, g: &DualSystem, lambda: &ErasureSet) -> Result<Method1Expansion> {
    check_dual(sys, &g.g)?;
    lambda.validate(sys.m())?;
    let m = sys.m();
    let keep = lambda.complement(m);
    let f_keep = sys.f().select_columns(&keep);
    let f_keep_pinv = pseudo_inverse(&f_keep, sys.tol())?;
    let proj = sys.k().range().projector();
    let mut alpha = DenseMatrix::zeros(lambda.len(), keep.len());
    let mut worst = 0.0_f64;
    for (row, &i) in lambda.indices().iter().enumerate() {
        let p = proj.mul_vec(&g.g.column(i));
        let a = f_keep_pinv.mul_vec(&p);
        let fit = f_keep.mul_vec(&a);
        let residual = norm2(&fit.iter().zip(&p).map(|(x, y)| x - y).collect::<Vec<_>>());
        if !sys.tol().accepts(residual, norm2(&p)) {
            return Err(Error::ExpansionHypothesis { index: i + 1, residual });
        }
        worst = worst.max(residual);
        for (col, v) in a.into_iter().enumerate() {
            alpha[(row, col)] = v;
        }
    }
    let mut m_f = DenseMatrix::zeros(lambda.len(), m);
    for (row, &i) in lambda.indices().iter().enumerate() {
        m_f[(row, i)] = 1.0;
        for (col, &j) in keep.iter().enumerate() {
            m_f[(row, j)] = -alpha[(row, col)];
        }
    }
    Ok(Method1Expansion {
        lambda: lambda.clone(),
        alpha,
        m_f,
        expansion_residual: worst,
    })
}

/// `⟨f, π_{R(K)}g_i⟩ = Σ_j α_{i,j}·⟨f, f_j⟩` for i ∈ Λ, given the surviving
/// frame coefficients `⟨f, f_j⟩`.
pub fn method1_recover(exp: &Method1Expansion, frame_coeffs: &[f64]) -> Result<Vec<f64>> {
    if frame_coeffs.len() != exp.alpha.cols() {
        return Err(Error::Shape(format!(
            "expected {} surviving frame coefficients, got {}",
            exp.alpha.cols(),
            frame_coeffs.len()
        )));
    }
    Ok(exp.alpha.mul_vec(frame_coeffs))
}

/// `E_Λ = Δ_Λ + Ẽ_Λ`, splitting each g_i into its R(K) and R(K)^⊥ parts.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReducedError {
    pub e: DenseMatrix,
    pub delta: DenseMatrix,
    pub e_tilde: DenseMatrix,
    pub e_norm: f64,
    pub delta_norm: f64,
    pub e_tilde_norm: f64,
}

fn perp_part(sys: &KFrameSystem, g: &DenseMatrix) -> DenseMatrix {
    let p = sys.k().range().projector();
    g.sub(&p.matmul(g))
}

pub fn reduced_error(sys: &KFrameSystem, g: &DenseMatrix, lambda: &ErasureSet) -> Result<ReducedError> {
    check_dual(sys, g)?;
    lambda.validate(sys.m())?;
    let idx = lambda.indices();
    let f_l = sys.f().select_columns(idx);
    let g_l = g.select_columns(idx);
    let g_perp = perp_part(sys, &g_l);
    let e = f_l.matmul(&g_l.transpose());
    let e_tilde = f_l.matmul(&g_perp.transpose());
    let delta = f_l.matmul(&g_l.sub(&g_perp).transpose());
    Ok(ReducedError {
        e_norm: operator_norm(&e)?,
        delta_norm: operator_norm(&delta)?,
        e_tilde_norm: operator_norm(&e_tilde)?,
        e,
        delta,
        e_tilde,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReducedErrorMax {
    pub value: f64,
    pub argmax: ErasureSet,
}

/// `max_{|Λ| = r} ‖Ẽ_Λ‖` by enumeration; ties go to the lexicographically first Λ.
pub fn reduced_error_max(sys: &KFrameSystem, g: &DenseMatrix, r: usize, cap: u128) -> Result<ReducedErrorMax> {
    check_dual(sys, g)?;
    if r > sys.m() {
        return Err(Error::InvalidArgument(format!(
            "cannot erase r = {r} of m = {} coefficients",
            sys.m()
        )));
    }
    let g_perp = perp_part(sys, g);
    let (value, argmax) = max_over_subsets(sys.m(), r, cap, |idx| {
        operator_norm(&sys.f().select_columns(idx).matmul(&g_perp.select_columns(idx).transpose()))
    })?;
    Ok(ReducedErrorMax {
        value,
        argmax: ErasureSet::from_sorted_unchecked(argmax),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MinimizedDual {
    pub dual: DualSystem,
    pub objective: f64,
    /// Objective at the canonical dual, where the search starts.
    pub start_objective: f64,
}

/// Heuristic search over `G = G_can + C·Nᵀ` (N an orthonormal basis of ker F)
/// for a small worst-case reduced error. Seeded random steps are accepted only
/// when they lower the objective, so the result is never worse than the
/// canonical dual. Not certified optimal.
pub fn minimize_reduced_error(sys: &KFrameSystem, r: usize, trials: usize, seed: u64, cap: u128) -> Result<MinimizedDual> {
    let canonical = canonical_kdual(sys)?.dual;
    let objective = |g: &DenseMatrix| reduced_error_max(sys, g, r, cap).map(|x| x.value);
    let start_objective = objective(&canonical.g)?;
    let d = sys.null_space().dim();
    if d == 0 || trials == 0 {
        return Ok(MinimizedDual {
            dual: canonical,
            objective: start_objective,
            start_objective,
        });
    }
    let n = sys.null_space().basis().clone();
    let mut rng = rng::seeded(seed);
    let mut best_c = DenseMatrix::zeros(sys.n(), d);
    let mut best = start_objective;
    let mut step = operator_norm(&canonical.g)?.max(1.0);
    for t in 0..trials {
        let dir = rng::normal_matrix(&mut rng, sys.n(), d);
        let dir = if rng.random_bool(0.5) { perp_part(sys, &dir) } else { dir };
        let c = best_c.add(&dir.scale(step / (1.0 + dir.frobenius_norm())));
        let g = canonical.g.add(&c.matmul(&n.transpose()));
        let value = objective(&g)?;
        if value < best {
            best = value;
            best_c = c;
        } else if t > 0 && t % 8 == 0 {
            step *= 0.5;
        }
        if best <= f64::EPSILON {
            break;
        }
    }
    let dual = sys.verify_kdual(canonical.g.add(&best_c.matmul(&n.transpose())))?;
    Ok(MinimizedDual {
        dual,
        objective: best,
        start_objective,
    })
}

/// `N·M` for a classical erasure-recovery matrix N of F (`N·Fᵀ = 0`).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComposedRecovery {
    pub product: DenseMatrix,
    /// Spark of `N·M`; reported as infinite when the product vanishes.
    pub spark: SparkResult,
    pub spark_m: SparkResult,
    /// The product is the zero matrix.
    pub degenerate: bool,
    /// `ker M ⊆ ker N·M`, checked on a kernel basis of M.
    pub kernel_contained: bool,
    /// Whether `spark(N·M) ≥ spark(M)` holds for this pair.
    pub spark_not_decreased: bool,
    pub precondition_residual: f64,
}

pub fn compose_recovery_matrices(
    sys: &KFrameSystem,
    n_mat: &DenseMatrix,
    m: &DenseMatrix,
    cap: usize,
) -> Result<ComposedRecovery> {
    check_square_m(sys, m)?;
    if n_mat.cols() != sys.m() {
        return Err(Error::Shape(format!(
            "N must have m = {} columns, got {}",
            sys.m(),
            n_mat.cols()
        )));
    }
    let tol = sys.tol();
    let precondition_residual = operator_norm(&n_mat.matmul(&sys.f().transpose()))?;
    if !tol.accepts(precondition_residual, operator_norm(n_mat)? * operator_norm(sys.f())?) {
        return Err(Error::RecoveryMatrixPrecondition {
            residual: precondition_residual,
        });
    }
    let product = n_mat.matmul(m);
    let degenerate = product.max_abs() <= tol.residual_rel * (1.0 + operator_norm(n_mat)? * operator_norm(m)?);
    let spark_m = spark(m, tol, cap)?;
    let spark_p = if degenerate {
        SparkResult {
            value: Spark::Infinite,
            witness: None,
        }
    } else {
        spark(&product, tol, cap)?
    };
    let ker = null_space_basis(m, tol)?;
    let kernel_contained = ker.is_empty() || {
        let image = product.matmul(ker.basis());
        image.max_abs() <= tol.residual_rel * (1.0 + operator_norm(&product)?)
    };
    Ok(ComposedRecovery {
        spark_not_decreased: spark_p.value >= spark_m.value,
        product,
        spark: spark_p,
        spark_m,
        degenerate,
        kernel_contained,
        precondition_residual,
    })
}

/// `I − π_{R(Gᵀ)}`. Any `A·(I − π_{R(Gᵀ)})` added to 𝒢_F gives a matrix that
/// annihilates Gᵀ.
pub fn annihilator_projector(sys: &KFrameSystem, g: &DenseMatrix) -> Result<DenseMatrix> {
    check_dual(sys, g)?;
    let r = range_basis(&g.transpose(), sys.tol())?;
    Ok(DenseMatrix::identity(sys.m()).sub(&r.projector()))
}
