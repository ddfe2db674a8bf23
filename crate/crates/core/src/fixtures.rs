//! The four worked systems used throughout the tests and shipped by the CLI.
//!
//! Vectors are written as columns exactly as they appear in the source
//! examples; K is given by its action on the standard basis.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::frame::KFrameSystem;
use crate::linalg::{DenseMatrix, TolerancePolicy};

#[derive(Clone, Debug, Serialize)]
pub struct Fixture {
    #[serde(skip)]
    pub name: &'static str,
    #[serde(rename = "F")]
    pub f: DenseMatrix,
    #[serde(rename = "K")]
    pub k: DenseMatrix,
    /// A published dual, when the example provides one.
    #[serde(rename = "G", skip_serializing_if = "Option::is_none")]
    pub g: Option<DenseMatrix>,
}

impl Fixture {
    pub fn system(&self) -> Result<KFrameSystem> {
        self.system_with(TolerancePolicy::default())
    }

    pub fn system_with(&self, tol: TolerancePolicy) -> Result<KFrameSystem> {
        KFrameSystem::new(self.f.clone(), self.k.clone(), tol)
    }
}

fn cols(n: usize, columns: &[&[f64]]) -> DenseMatrix {
    DenseMatrix::from_columns(n, columns).expect("fixture columns are well formed")
}

fn rows(rows: &[&[f64]]) -> DenseMatrix {
    DenseMatrix::from_rows(rows).expect("fixture rows are well formed")
}

/// F = {e1, e2} in R³, Kf = (c1 + c2 + c3/2)·e1.
pub fn fix_a() -> Fixture {
    Fixture {
        name: "FIX-A",
        f: cols(3, &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]),
        k: rows(&[&[1.0, 1.0, 0.5], &[0.0, 0.0, 0.0], &[0.0, 0.0, 0.0]]),
        g: None,
    }
}

/// F = {e1, e2, e3, e1+e3} in R⁴, Kf = (c1 + c3)·e1 + (c2 + c4/2)·e2.
pub fn fix_b() -> Fixture {
    Fixture {
        name: "FIX-B",
        f: cols(
            4,
            &[
                &[1.0, 0.0, 0.0, 0.0],
                &[0.0, 1.0, 0.0, 0.0],
                &[0.0, 0.0, 1.0, 0.0],
                &[1.0, 0.0, 1.0, 0.0],
            ],
        ),
        k: rows(&[
            &[1.0, 0.0, 1.0, 0.0],
            &[0.0, 1.0, 0.0, 0.5],
            &[0.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 0.0],
        ]),
        g: None,
    }
}

/// Four vectors in R⁴ with Ke1 = Ke2 = Ke3 = e1, Ke4 = e4 − e1, plus the
/// published dual (which fails F·Gᵀ = K at entry (1, 4)).
pub fn fix_c() -> Fixture {
    Fixture {
        name: "FIX-C",
        f: cols(
            4,
            &[
                &[1.0, 0.0, -1.0, 0.0],
                &[0.0, 0.0, 1.0, 0.0],
                &[0.0, 0.0, -1.0, 2.0],
                &[0.5, 0.0, 0.5, 0.0],
            ],
        ),
        k: cols(
            4,
            &[
                &[1.0, 0.0, 0.0, 0.0],
                &[1.0, 0.0, 0.0, 0.0],
                &[1.0, 0.0, 0.0, 0.0],
                &[-1.0, 0.0, 0.0, 1.0],
            ],
        ),
        g: Some(cols(
            4,
            &[
                &[1.0, 1.0, 1.0, 0.5],
                &[1.0, 1.0, 1.0, 0.5],
                &[0.0, 0.0, 0.0, 0.5],
                &[0.0, 0.0, 0.0, 1.0],
            ],
        )),
    }
}

/// F = {−e4, e2, 2e2 − e4, e1}, Kf = c1·e1 + c2·e2 + (c3 + c4)·e4, with a
/// published K-dual.
pub fn fix_d() -> Fixture {
    Fixture {
        name: "FIX-D",
        f: cols(
            4,
            &[
                &[0.0, 0.0, 0.0, -1.0],
                &[0.0, 1.0, 0.0, 0.0],
                &[0.0, 2.0, 0.0, -1.0],
                &[1.0, 0.0, 0.0, 0.0],
            ],
        ),
        k: rows(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 1.0],
        ]),
        g: Some(cols(
            4,
            &[
                &[0.0, 0.0, -1.0, -1.0],
                &[0.0, 1.0, 0.0, 0.0],
                &[0.0, 0.0, 0.0, 0.0],
                &[1.0, 0.0, 0.0, 0.0],
            ],
        )),
    }
}

pub fn all() -> Vec<Fixture> {
    vec![fix_a(), fix_b(), fix_c(), fix_d()]
}

/// Looks up `FIX-A` … `FIX-D` (case-insensitive, the `FIX-` prefix optional).
pub fn by_name(name: &str) -> Result<Fixture> {
    let key = name.trim().to_ascii_uppercase();
    let key = key.strip_prefix("FIX-").unwrap_or(&key);
    match key {
        "A" => Ok(fix_a()),
        "B" => Ok(fix_b()),
        "C" => Ok(fix_c()),
        "D" => Ok(fix_d()),
        _ => Err(Error::InvalidArgument(format!(
            "unknown fixture {name:?}; expected one of FIX-A, FIX-B, FIX-C, FIX-D"
        ))),
    }
}
