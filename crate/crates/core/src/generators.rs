//! Seeded constructions of K-frame systems with prescribed structure, used by
//! property tests, the acceptance suite and benchmarks.

use rand::Rng;

use crate::linalg::{range_basis, DenseMatrix, TolerancePolicy};
use crate::rng::{normal_matrix, seeded};

/// Random n×m matrix of rank ≤ p. With `dup`, one column is overwritten by a
/// multiple of another so that short dependencies occur.
pub fn structured_matrix(seed: u64, n: usize, m: usize, p: usize, dup: bool) -> DenseMatrix {
    let mut rng = seeded(seed);
    let mut f = normal_matrix(&mut rng, n, p).matmul(&normal_matrix(&mut rng, p, m));
    if dup && m >= 2 {
        let (a, b) = (rng.random_range(0..m), rng.random_range(0..m));
        if a != b {
            let c: f64 = rng.random_range(0.5..2.0);
            for i in 0..n {
                f[(i, b)] = c * f[(i, a)];
            }
        }
    }
    f
}

/// `(F, K)` with F n×m of random rank and `K = F·W`, so R(K) ⊆ R(F) holds by
/// construction.
pub fn random_kframe(seed: u64, n: usize, m: usize) -> (DenseMatrix, DenseMatrix) {
    let mut rng = seeded(seed);
    let p = rng.random_range(1..=n.min(m).max(1));
    let f = structured_matrix(seed ^ 0x5eed, n, m, p, rng.random_bool(0.5));
    let q = rng.random_range(1..=n);
    let w = normal_matrix(&mut rng, m, q).matmul(&normal_matrix(&mut rng, q, n));
    let k = f.matmul(&w);
    (f, k)
}

/// K of rank p on Rⁿ (n ≥ p) and p + r columns in general position inside
/// R(K): every p-column subset is a basis of R(K), so the system has uniform
/// excess r.
pub fn uniform_excess_system(seed: u64, n: usize, p: usize, r: usize) -> (DenseMatrix, DenseMatrix) {
    assert!(p >= 1 && n >= p, "need 1 <= p <= n");
    let mut rng = seeded(seed);
    let k = normal_matrix(&mut rng, n, p).matmul(&normal_matrix(&mut rng, p, n));
    let b = range_basis(&k, &TolerancePolicy::default()).expect("finite Gaussian product");
    let f = b.basis().matmul(&normal_matrix(&mut rng, p, p + r));
    (f, k)
}

/// `(F, K, G)` where every column of the K-dual G lies in R(K).
///
/// F = [B·C | E] with B an orthonormal basis of a p-dimensional subspace
/// containing R(K) and E extra columns; G = K·Y is chosen so that F·Gᵀ = K.
pub fn dual_in_range_system(seed: u64, n: usize, p: usize, extra: usize) -> (DenseMatrix, DenseMatrix, DenseMatrix) {
    assert!(p >= 1 && n >= p, "need 1 <= p <= n");
    let mut rng = seeded(seed);
    // Symmetric K of rank p: R(K) = R(Kᵀ).
    let a = normal_matrix(&mut rng, n, p);
    let k = a.matmul(&a.transpose());
    let tol = TolerancePolicy::default();
    let b = range_basis(&k, &tol).expect("finite Gaussian product");
    let m = p + extra;
    let f = b.basis().matmul(&normal_matrix(&mut rng, p, m));
    // Minimal-norm X with F·X = K has rows in R(Fᵀ); G = Xᵀ has columns
    // X_iᵀ = Kᵀ·(F†)ᵀ·δ_i ∈ R(Kᵀ) = R(K).
    let x = crate::linalg::pseudo_inverse(&f, &tol)
        .expect("finite")
        .matmul(&k);
    (f, k, x.transpose())
}
