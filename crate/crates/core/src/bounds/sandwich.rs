use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    aligning_orthogonal, congruence_orthogonal, congruence_residual, eig_order_leq, loewner_leq,
    map_spectrum, spectral_range, sqrt_psd, ComparisonTolerance, OrderVerdict, OrthogonalMatrix,
    SymmetricMatrix,
};
use crate::scalar::ScalarFunctionModel;

use super::{psd_power, Ingredient, Variant};

/// Smallest admissible eigenvalue of `x + y`.
pub const SUM_PD_FLOOR: f64 = 1e-10;

/// Two-sided estimate
/// `U₁ᵀXᑫU₁ + U₂ᵀYᑫU₂ ≤ (X+Y)ᑫ ≤ V₁ᵀXᑫV₁ + V₂ᵀYᑫV₂ + κ·I`
/// with explicit orthogonal witnesses.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SandwichReport {
    pub lhs: SymmetricMatrix,
    pub lower: SymmetricMatrix,
    pub u1: OrthogonalMatrix,
    pub u2: OrthogonalMatrix,
    pub upper: SymmetricMatrix,
    pub v1: OrthogonalMatrix,
    pub v2: OrthogonalMatrix,
    pub correction_variant: Variant,
    pub correction_value: f64,
    pub lower_verdict: OrderVerdict,
    pub upper_verdict: OrderVerdict,
    pub ingredients: BTreeMap<String, Ingredient>,
}

impl SandwichReport {
    pub fn pass(&self) -> bool {
        self.lower_verdict.pass && self.upper_verdict.pass
    }

    /// `max(1, ‖lower‖₂, ‖lhs‖₂, ‖upper‖₂)`.
    pub fn scale(&self) -> Result<f64> {
        let mut s = 1f64;
        for m in [&self.lower, &self.lhs, &self.upper] {
            s = s.max(m.spectral_norm()?);
        }
        Ok(s)
    }

    /// Recomputes both verdicts from the stored matrices.
    pub fn recheck(&self, tol: ComparisonTolerance) -> Result<(OrderVerdict, OrderVerdict)> {
        Ok((
            loewner_leq(&self.lower, &self.lhs, tol)?,
            loewner_leq(&self.lhs, &self.upper, tol)?,
        ))
    }
}

struct Side {
    /// `Z = (X+Y)^{(q−1)/2} X^{1/2}`.
    w: OrthogonalMatrix,
    /// `ZᵀZ = X^{1/2}(X+Y)^{q−1}X^{1/2}`.
    h: SymmetricMatrix,
    power: SymmetricMatrix,
    congruence_residual: f64,
}

fn side(x: &SymmetricMatrix, sum_half_power: &SymmetricMatrix, q: f64) -> Result<Side> {
    let root = sqrt_psd(x)?;
    let z = sum_half_power.as_matrix() * root.as_matrix();
    let w = congruence_orthogonal(&z)?;
    let h = SymmetricMatrix::new(z.transpose() * &z)?;
    Ok(Side {
        congruence_residual: congruence_residual(&z, &w),
        w,
        h,
        power: psd_power(x, q, "x")?,
    })
}

/// Builds both halves of the sandwich for PSD `x`, `y` with positive
/// definite `x + y` and `q ∈ [1, 2]`.
///
/// The lower witnesses come from the congruence `ZZᵀ = W(ZᵀZ)Wᵀ` together
/// with `ZᵀZ ≥ Xᑫ` (operator monotonicity of `t^{q−1}`). The upper
/// witnesses compose the same congruence with the rotation that realizes
/// `λ↓(ZᵀZ − κ/2) ≤ λ↓(Xᑫ)`. `κ = 2(λ₁ − λₙ)ᑫ` for [`Variant::Paper`] and
/// `2λ₁ᑫ` for [`Variant::Derived`], eigenvalues taken of `x + y`.
pub fn subadditivity_sandwich(
    x: &SymmetricMatrix,
    y: &SymmetricMatrix,
    q: f64,
    variant: Variant,
    tol: ComparisonTolerance,
) -> Result<SandwichReport> {
    ScalarFunctionModel::neg_pow_q(q)?;
    x.ensure_same_dim(y)?;
    let n = x.dim();
    let sum = x + y;
    let range = spectral_range(&sum)?;
    if range.lo < SUM_PD_FLOOR {
        return Err(Error::Singular {
            what: "x + y".into(),
            sigma_min: range.lo,
            threshold: SUM_PD_FLOOR,
        });
    }
    let lhs = psd_power(&sum, q, "x+y")?;
    let half = map_spectrum(&sum, |t| t.powf(0.5 * (q - 1.0)))?;
    let sx = side(x, &half, q)?;
    let sy = side(y, &half, q)?;

    // (X+Y)ᑫ = W_X H_X W_Xᵀ + W_Y H_Y W_Yᵀ and H ≥ Xᑫ, so U = Wᵀ.
    let u1 = sx.w.transpose();
    let u2 = sy.w.transpose();
    let lower = &u1.conjugate(&sx.power) + &u2.conjugate(&sy.power);
    let lower_verdict = loewner_leq(&lower, &lhs, tol)?;

    let half_correction = match variant {
        Variant::Paper => range.width().powf(q),
        Variant::Derived => range.hi.powf(q),
    };
    let mut ingredients = BTreeMap::new();
    let mut upper = SymmetricMatrix::scalar(n, 2.0 * half_correction);
    let mut vs = Vec::with_capacity(2);
    for (label, s) in [("x", &sx), ("y", &sy)] {
        let shifted = s.h.shift(-half_correction);
        let order = eig_order_leq(&shifted, &s.power, tol)?;
        let u = aligning_orthogonal(&shifted, &s.power)?;
        // V = U·Wᵀ gives Vᵀ Pᑫ V = W Uᵀ Pᑫ U Wᵀ ≥ W (H − κ/2) Wᵀ.
        let v = u.compose(&s.w.transpose());
        upper = &upper + &v.conjugate(&s.power);
        ingredients.insert(format!("order_{label}"), Ingredient::Verdict(order));
        ingredients.insert(
            format!("congruence_residual_{label}"),
            Ingredient::Scalar(s.congruence_residual),
        );
        vs.push(v);
    }
    let upper_verdict = loewner_leq(&lhs, &upper, tol)?;
    ingredients.insert("q".into(), Ingredient::Scalar(q));
    ingredients.insert("sum_lambda_max".into(), Ingredient::Scalar(range.hi));
    ingredients.insert("sum_lambda_min".into(), Ingredient::Scalar(range.lo));
    let v2 = vs.pop().expect("two sides");
    let v1 = vs.pop().expect("two sides");
    Ok(SandwichReport {
        lhs,
        lower,
        u1,
        u2,
        upper,
        v1,
        v2,
        correction_variant: variant,
        correction_value: 2.0 * half_correction,
        lower_verdict,
        upper_verdict,
        ingredients,
    })
}
