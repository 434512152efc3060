//! Pointwise checkers for the vector-state inequalities and the comparison
//! of the two concave estimates.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::bounds::{combine_pair_bound, concave_bound_s, PositiveMapCD};
use crate::error::{Error, Result};
use crate::linalg::{
    apply_scalar_function, eig_order_leq, matrix_abs, ComparisonTolerance, OrderVerdict,
    SymmetricMatrix,
};
use crate::scalar::{Curvature, ScalarFunctionModel};

/// Which vector inequality [`check_vector_jensen`] evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JensenMode {
    /// `f(⟨Ax,x⟩) ≤ ⟨f(A)x,x⟩` for convex `f`.
    Convex,
    /// `f(⟨Ax,x⟩) ≤ ⟨f(A)x,x⟩ − ⟨f(|A − ⟨Ax,x⟩|)x,x⟩` for superquadratic `f`.
    Superquadratic,
}

/// Slack allowed on `‖x‖ = 1`.
pub const UNIT_TOL: f64 = 1e-12;

fn ensure_unit(x: &DVector<f64>) -> Result<()> {
    let norm = x.norm();
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(Error::NotUnit { norm });
    }
    Ok(())
}

/// Signed slack of a vector-state inequality together with the magnitude
/// of its terms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateMargin {
    pub margin: f64,
    pub scale: f64,
}

fn state_margin(terms: &[f64], margin: f64) -> StateMargin {
    let scale = terms.iter().fold(1f64, |acc, t| acc.max(t.abs()));
    StateMargin { margin, scale }
}

pub fn check_vector_jensen(
    f: &ScalarFunctionModel,
    a: &SymmetricMatrix,
    x: &DVector<f64>,
    mode: JensenMode,
) -> Result<StateMargin> {
    ensure_unit(x)?;
    if x.len() != a.dim() {
        return Err(Error::DimensionMismatch {
            left: x.len(),
            right: a.dim(),
        });
    }
    if mode == JensenMode::Convex && f.flags().curvature != Curvature::Convex {
        return Err(Error::Classification {
            function: f.specifier(),
            required: "convex".into(),
        });
    }
    let t = a.quadratic_form(x).max(f.domain_lo());
    let fa = apply_scalar_function(f, a)?.quadratic_form(x);
    let ft = f.value(t);
    Ok(match mode {
        JensenMode::Convex => state_margin(&[fa, ft], fa - ft),
        JensenMode::Superquadratic => {
            let dev = matrix_abs(&a.shift(-t))?;
            let fd = apply_scalar_function(f, &dev)?.quadratic_form(x);
            state_margin(&[fa, fd, ft], fa - fd - ft)
        }
    })
}

/// `⟨Φ(f(A))x,x⟩ − ⟨Φ(f(|A − ⟨Φ(A)x,x⟩|))x,x⟩ − f(⟨Φ(A)x,x⟩)`.
pub fn check_map_jensen(
    f: &ScalarFunctionModel,
    phi: &PositiveMapCD,
    a: &SymmetricMatrix,
    x: &DVector<f64>,
) -> Result<StateMargin> {
    ensure_unit(x)?;
    if x.len() != phi.dim() {
        return Err(Error::DimensionMismatch {
            left: x.len(),
            right: phi.dim(),
        });
    }
    let t = phi.apply(a)?.quadratic_form(x).max(f.domain_lo());
    let fa = phi.apply(&apply_scalar_function(f, a)?)?.quadratic_form(x);
    let dev = matrix_abs(&a.shift(-t))?;
    let fd = phi
        .apply(&apply_scalar_function(f, &dev)?)?
        .quadratic_form(x);
    let ft = f.value(t);
    Ok(state_margin(&[fa, fd, ft], fa - fd - ft))
}

/// `λ↓(((A+B)/2)ᵖ) ≤ λ↓((Aᵖ + Bᵖ)/2)` for PSD `A`, `B` and `p ≥ 1`.
pub fn check_power_mean(
    a: &SymmetricMatrix,
    b: &SymmetricMatrix,
    p: f64,
    tol: ComparisonTolerance,
) -> Result<OrderVerdict> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Parameter {
            name: "p".into(),
            value: p,
            valid: "[1, inf)".into(),
        });
    }
    a.ensure_same_dim(b)?;
    let pow = |m: &SymmetricMatrix, what: &str| -> Result<SymmetricMatrix> {
        crate::linalg::ensure_psd(m, what)?;
        crate::linalg::map_spectrum(m, |t| t.max(0.0).powf(p))
    };
    let mid = pow(&(&(a + b) * 0.5), "(a+b)/2")?;
    let mean = &(&pow(a, "a")? + &pow(b, "b")?) * 0.5;
    eig_order_leq(&mid, &mean, tol)
}

/// Which concave estimate gives the smaller upper bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tighter {
    Thm21,
    Thm25,
    /// Both bound vectors agree within tolerance.
    Tie,
    Incomparable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRecord {
    pub instance: String,
    pub bound_thm21_spectrum: Vec<f64>,
    pub bound_thm25_spectrum: Vec<f64>,
    pub tighter: Tighter,
}

/// Entrywise comparison of two descending bound vectors; `tol` is absolute.
pub fn classify(thm21: &[f64], thm25: &[f64], tol: f64) -> Tighter {
    let le = |x: &[f64], y: &[f64]| x.iter().zip(y).all(|(a, b)| *a <= b + tol);
    match (le(thm21, thm25), le(thm25, thm21)) {
        (true, true) => Tighter::Tie,
        (true, false) => Tighter::Thm21,
        (false, true) => Tighter::Thm25,
        (false, false) => Tighter::Incomparable,
    }
}

/// Runs both concave estimates on one instance and reports which bound
/// vector is entrywise smaller.
pub fn compare_estimates(
    instance: &str,
    f: &ScalarFunctionModel,
    a: &SymmetricMatrix,
    b: &SymmetricMatrix,
    alpha: f64,
    tol: ComparisonTolerance,
) -> Result<ComparisonRecord> {
    let s = concave_bound_s(f, a, b, alpha, tol)?.bound_spectrum()?;
    let p = combine_pair_bound(f, a, b, alpha, tol)?.bound_spectrum()?;
    let scale = s.iter().chain(&p).fold(1f64, |acc, t| acc.max(t.abs()));
    Ok(ComparisonRecord {
        instance: instance.into(),
        tighter: classify(&s, &p, tol.threshold(scale)),
        bound_thm21_spectrum: s,
        bound_thm25_spectrum: p,
    })
}
