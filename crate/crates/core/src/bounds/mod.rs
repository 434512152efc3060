//! Bound matrices and bound spectra for superquadratic functions of
//! symmetric matrices, each packaged with the left-hand side it controls and
//! a recomputable verdict.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::constants::GammaValue;
use crate::error::{Error, Result};
use crate::linalg::{
    eig_order_leq, eigenvalues, loewner_leq, matrix_rows, vector_order_leq, ComparisonTolerance,
    Matrix, OrderVerdict, OrthogonalMatrix, SymmetricMatrix,
};
use crate::scalar::ScalarFunctionModel;

mod concave;
mod convex;
mod dilation;
mod sandwich;

pub use concave::{
    combine_pair_bound, concave_bound_s, cor_midpoint_concave, cor_power_mean_reverse,
    cor_sum_lower, phi_bound,
};
pub use convex::{convex_bound_t, cor_midpoint_convex, cor_power_convex};
pub use dilation::{dilation_block_bound, dilation_pair, Dilation};
pub use sandwich::{subadditivity_sandwich, SandwichReport};

/// How the left-hand side is compared with the bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompareMode {
    /// `λ↓(·) ≤ λ↓(·)` entrywise.
    EigenvalueOrder,
    /// `· ≤ ·` in the Löwner order.
    Loewner,
}

/// Which side is claimed to be smaller.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    LhsBelowBound,
    BoundBelowLhs,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundForm {
    Matrix(SymmetricMatrix),
    /// Descending bound vector for statements that only bound eigenvalues.
    Spectrum(Vec<f64>),
}

impl BoundForm {
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        match self {
            BoundForm::Matrix(m) => eigenvalues(m),
            BoundForm::Spectrum(v) => Ok(v.clone()),
        }
    }

    pub fn as_matrix(&self) -> Option<&SymmetricMatrix> {
        match self {
            BoundForm::Matrix(m) => Some(m),
            BoundForm::Spectrum(_) => None,
        }
    }
}

/// Named intermediate quantity recorded alongside a bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Ingredient {
    Scalar(f64),
    Spectrum(Vec<f64>),
    Matrix(SymmetricMatrix),
    Orthogonal(OrthogonalMatrix),
    Gamma(GammaValue),
    Verdict(OrderVerdict),
    Note(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub theorem: String,
    pub lhs: SymmetricMatrix,
    pub bound: BoundForm,
    pub mode: CompareMode,
    pub direction: Direction,
    pub verdict: OrderVerdict,
    pub ingredients: BTreeMap<String, Ingredient>,
}

impl BoundReport {
    fn build(
        theorem: &str,
        lhs: SymmetricMatrix,
        bound: BoundForm,
        mode: CompareMode,
        direction: Direction,
        tol: ComparisonTolerance,
    ) -> Result<Self> {
        let verdict = evaluate(&lhs, &bound, mode, direction, tol)?;
        Ok(Self {
            theorem: theorem.into(),
            lhs,
            bound,
            mode,
            direction,
            verdict,
            ingredients: BTreeMap::new(),
        })
    }

    fn with(mut self, name: &str, value: Ingredient) -> Self {
        self.ingredients.insert(name.into(), value);
        self
    }

    fn spectrum(mut self, name: &str, m: &SymmetricMatrix) -> Result<Self> {
        self.ingredients
            .insert(name.into(), Ingredient::Spectrum(eigenvalues(m)?));
        Ok(self)
    }

    /// Recomputes the verdict from `lhs` and `bound`.
    pub fn recheck(&self, tol: ComparisonTolerance) -> Result<OrderVerdict> {
        evaluate(&self.lhs, &self.bound, self.mode, self.direction, tol)
    }

    /// `max(1, ‖lhs‖₂, ‖bound‖₂)`, the normalization for margins.
    pub fn scale(&self) -> Result<f64> {
        let l = max_abs(&eigenvalues(&self.lhs)?);
        let b = max_abs(&self.bound.spectrum()?);
        Ok(1f64.max(l).max(b))
    }

    pub fn normalized_margin(&self) -> Result<f64> {
        Ok(self.verdict.margin / self.scale()?)
    }

    pub fn lhs_spectrum(&self) -> Result<Vec<f64>> {
        eigenvalues(&self.lhs)
    }

    pub fn bound_spectrum(&self) -> Result<Vec<f64>> {
        self.bound.spectrum()
    }
}

fn evaluate(
    lhs: &SymmetricMatrix,
    bound: &BoundForm,
    mode: CompareMode,
    direction: Direction,
    tol: ComparisonTolerance,
) -> Result<OrderVerdict> {
    match (bound, mode) {
        (BoundForm::Matrix(b), CompareMode::Loewner) => match direction {
            Direction::LhsBelowBound => loewner_leq(lhs, b, tol),
            Direction::BoundBelowLhs => loewner_leq(b, lhs, tol),
        },
        (BoundForm::Matrix(b), CompareMode::EigenvalueOrder) => match direction {
            Direction::LhsBelowBound => eig_order_leq(lhs, b, tol),
            Direction::BoundBelowLhs => eig_order_leq(b, lhs, tol),
        },
        (BoundForm::Spectrum(v), CompareMode::EigenvalueOrder) => {
            let l = eigenvalues(lhs)?;
            let scale = max_abs(&l).max(max_abs(v));
            match direction {
                Direction::LhsBelowBound => vector_order_leq(&l, v, tol, scale),
                Direction::BoundBelowLhs => vector_order_leq(v, &l, tol, scale),
            }
        }
        (BoundForm::Spectrum(_), CompareMode::Loewner) => Err(Error::Config(
            "a spectrum bound cannot be compared in the Loewner order".into(),
        )),
    }
}

pub(crate) fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |acc, &t| acc.max(t.abs()))
}

/// Correction term of the subadditivity sandwich.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// The constant as printed.
    Paper,
    /// The constant the argument actually supports.
    #[default]
    Derived,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Paper => "paper",
            Variant::Derived => "derived",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Variant::Paper),
            "derived" => Ok(Variant::Derived),
            other => Err(Error::Config(format!(
                "unknown variant {other:?} (expected paper or derived)"
            ))),
        }
    }
}

/// `Φ(X) = [Cᵀ Dᵀ] X [C; D]` on `2n × 2n` matrices, unital when
/// `CᵀC + DᵀD = I`. On an `n × n` argument it acts as `X ↦ Φ(X ⊕ X)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PositiveMapCD {
    c: Matrix,
    d: Matrix,
}

/// Unitality tolerance on `‖CᵀC + DᵀD − I‖_F`.
pub const UNITAL_TOL: f64 = 1e-10;

impl PositiveMapCD {
    pub fn new(c: Matrix, d: Matrix) -> Result<Self> {
        for m in [&c, &d] {
            if m.nrows() != m.ncols() {
                return Err(Error::NotSquare {
                    rows: m.nrows(),
                    cols: m.ncols(),
                });
            }
        }
        if c.nrows() != d.nrows() {
            return Err(Error::DimensionMismatch {
                left: c.nrows(),
                right: d.nrows(),
            });
        }
        if c.nrows() == 0 {
            return Err(Error::Empty);
        }
        let map = Self { c, d };
        let residual = map.unitality_residual();
        if residual > UNITAL_TOL || !residual.is_finite() {
            return Err(Error::NotUnital { residual });
        }
        Ok(map)
    }

    /// `C = √(1−α)·I`, `D = √α·I`, so `Φ(A ⊕ B) = (1−α)A + αB`.
    pub fn convex_combination(n: usize, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Self::new(
            Matrix::identity(n, n) * (1.0 - alpha).sqrt(),
            Matrix::identity(n, n) * alpha.sqrt(),
        )
    }

    pub fn dim(&self) -> usize {
        self.c.nrows()
    }

    pub fn c(&self) -> &Matrix {
        &self.c
    }

    pub fn d(&self) -> &Matrix {
        &self.d
    }

    pub fn unitality_residual(&self) -> f64 {
        let n = self.dim();
        (self.c.transpose() * &self.c + self.d.transpose() * &self.d - Matrix::identity(n, n))
            .norm()
    }

    pub fn apply(&self, x: &SymmetricMatrix) -> Result<SymmetricMatrix> {
        let n = self.dim();
        if x.dim() == n {
            let m = x.as_matrix();
            return Ok(SymmetricMatrix::symmetrize(
                self.c.transpose() * m * &self.c + self.d.transpose() * m * &self.d,
            ));
        }
        if x.dim() != 2 * n {
            return Err(Error::DimensionMismatch {
                left: x.dim(),
                right: 2 * n,
            });
        }
        let mut stacked = Matrix::zeros(2 * n, n);
        stacked.view_mut((0, 0), (n, n)).copy_from(&self.c);
        stacked.view_mut((n, 0), (n, n)).copy_from(&self.d);
        Ok(SymmetricMatrix::symmetrize(
            stacked.transpose() * x.as_matrix() * &stacked,
        ))
    }
}

impl Serialize for PositiveMapCD {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            c: Vec<Vec<f64>>,
            d: Vec<Vec<f64>>,
        }
        Repr {
            c: matrix_rows(&self.c),
            d: matrix_rows(&self.d),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PositiveMapCD {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            c: Vec<Vec<f64>>,
            d: Vec<Vec<f64>>,
        }
        let r = Repr::deserialize(d)?;
        let c = crate::linalg::matrix_from_rows(&r.c).map_err(serde::de::Error::custom)?;
        let dm = crate::linalg::matrix_from_rows(&r.d).map_err(serde::de::Error::custom)?;
        PositiveMapCD::new(c, dm).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::Parameter {
            name: "alpha".into(),
            value: alpha,
            valid: "[0, 1]".into(),
        })
    }
}

pub(crate) fn require_concave_decreasing(f: &ScalarFunctionModel) -> Result<()> {
    if f.is_concave_decreasing() {
        Ok(())
    } else {
        Err(Error::Classification {
            function: f.specifier(),
            required: "superquadratic, concave and decreasing".into(),
        })
    }
}

pub(crate) fn require_convex_positive(f: &ScalarFunctionModel) -> Result<()> {
    if f.is_convex_increasing() && f.flags().positive {
        Ok(())
    } else {
        Err(Error::Classification {
            function: f.specifier(),
            required: "superquadratic, positive, strictly convex and increasing".into(),
        })
    }
}

/// `λ₁(m) − λₙ(m)`.
pub(crate) fn spread(m: &SymmetricMatrix) -> Result<f64> {
    Ok(crate::linalg::spectral_range(m)?.width())
}

/// `x ↦ x^q` on a PSD matrix.
pub(crate) fn psd_power(m: &SymmetricMatrix, q: f64, what: &str) -> Result<SymmetricMatrix> {
    crate::linalg::ensure_psd(m, what)?;
    crate::linalg::map_spectrum(m, |t| t.max(0.0).powf(q))
}
