//! Replayable trial instances and their evaluation.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    concave_bound_s, convex_bound_t, cor_power_convex, dilation_block_bound, phi_bound,
    subadditivity_sandwich, BoundReport, Ingredient, PositiveMapCD, Variant,
};
use crate::constants::{AbsComposite, GammaValue};
use crate::error::Result;
use crate::linalg::{
    congruence_orthogonal, congruence_residual, conjugating_orthogonal, loewner_leq,
    matrix_from_rows, matrix_rows, ComparisonTolerance, Matrix, SymmetricMatrix,
};
use crate::scalar::ScalarFunctionModel;

use super::checks::{check_map_jensen, check_power_mean, check_vector_jensen, JensenMode};

/// Tolerance passed to the bound builders; suites judge raw margins
/// themselves.
const INNER_TOL: ComparisonTolerance = ComparisonTolerance::new(1e-9, 1e-9);

/// Floor on `γ` and the relative root residual allowed for finite constants.
pub const GAMMA_FLOOR_SLACK: f64 = 1e-9;

/// Orthogonality slack for constructed witnesses.
pub const WITNESS_TOL: f64 = 1e-10;

/// Absolute slack on the dilation block identities.
pub const DILATION_IDENTITY_TOL: f64 = 1e-9;

/// Everything needed to re-run one trial bit for bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Instance {
    ConcavePair {
        f: ScalarFunctionModel,
        a: SymmetricMatrix,
        b: SymmetricMatrix,
        alpha: f64,
    },
    Map {
        f: ScalarFunctionModel,
        a: SymmetricMatrix,
        map: PositiveMapCD,
    },
    ConvexPair {
        f: ScalarFunctionModel,
        a: SymmetricMatrix,
        b: SymmetricMatrix,
        alpha: f64,
    },
    PowerConvex {
        a: SymmetricMatrix,
        b: SymmetricMatrix,
        p: f64,
        variant: Variant,
    },
    State {
        f: ScalarFunctionModel,
        a: SymmetricMatrix,
        x: Vec<f64>,
        mode: JensenMode,
    },
    MapState {
        f: ScalarFunctionModel,
        a: SymmetricMatrix,
        map: PositiveMapCD,
        x: Vec<f64>,
    },
    PowerMean {
        a: SymmetricMatrix,
        b: SymmetricMatrix,
        p: f64,
    },
    SandwichLower {
        x: SymmetricMatrix,
        y: SymmetricMatrix,
        q: f64,
    },
    SandwichUpper {
        x: SymmetricMatrix,
        y: SymmetricMatrix,
        q: f64,
        variant: Variant,
    },
    UnitConjugation {
        h: SymmetricMatrix,
        k: SymmetricMatrix,
    },
    Congruence {
        z: Vec<Vec<f64>>,
    },
    Dilation {
        f: ScalarFunctionModel,
        x: SymmetricMatrix,
        c: Vec<Vec<f64>>,
    },
}

/// How an auxiliary statistic is combined across trials.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reduce {
    Sum,
    Min,
    Max,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub margin: f64,
    pub scale: f64,
    /// Reason the trial fails apart from its margin.
    pub defect: Option<String>,
    pub extras: Vec<(&'static str, Reduce, f64)>,
}

impl Evaluation {
    fn new(margin: f64, scale: f64) -> Self {
        Self {
            margin,
            scale,
            defect: None,
            extras: Vec::new(),
        }
    }

    fn from_report(r: &BoundReport) -> Result<Self> {
        Ok(Self::new(r.verdict.margin, r.scale()?))
    }

    pub fn normalized(&self) -> f64 {
        self.margin / self.scale
    }

    fn flag(&mut self, reason: String) {
        if self.defect.is_none() {
            self.defect = Some(reason);
        }
    }
}

fn norm2(m: &SymmetricMatrix) -> Result<f64> {
    m.spectral_norm()
}

fn gamma_audit(eval: &mut Evaluation, f: &ScalarFunctionModel, report: &BoundReport) {
    let g = AbsComposite::new(*f);
    let mut finite = 0.0;
    for ingredient in report.ingredients.values() {
        if let Ingredient::Gamma(GammaValue::Sharp(r)) = ingredient {
            finite += 1.0;
            eval.extras.push(("min_finite_gamma", Reduce::Min, r.gamma));
            let bound = r.residual_bound(&g);
            eval.extras
                .push(("max_residual_ratio", Reduce::Max, r.residual.abs() / bound));
            if r.gamma < 1.0 - GAMMA_FLOOR_SLACK {
                eval.flag(format!("gamma {} below 1", r.gamma));
            }
            if r.residual.abs() > bound {
                eval.flag(format!("t0 residual {:e} above {:e}", r.residual, bound));
            }
        }
    }
    eval.extras
        .push(("finite_gamma_count", Reduce::Sum, finite));
}

impl Instance {
    /// Deterministic evaluation; replaying a stored instance reproduces its
    /// margin exactly.
    pub fn evaluate(&self) -> Result<Evaluation> {
        match self {
            Instance::ConcavePair { f, a, b, alpha } => {
                Evaluation::from_report(&concave_bound_s(f, a, b, *alpha, INNER_TOL)?)
            }
            Instance::Map { f, a, map } => {
                Evaluation::from_report(&phi_bound(f, map, a, INNER_TOL)?)
            }
            Instance::ConvexPair { f, a, b, alpha } => {
                let r = convex_bound_t(f, a, b, *alpha, INNER_TOL)?;
                let mut eval = Evaluation::from_report(&r)?;
                gamma_audit(&mut eval, f, &r);
                Ok(eval)
            }
            Instance::PowerConvex { a, b, p, variant } => {
                Evaluation::from_report(&cor_power_convex(a, b, *p, *variant, INNER_TOL)?)
            }
            Instance::State { f, a, x, mode } => {
                let m = check_vector_jensen(f, a, &DVector::from_vec(x.clone()), *mode)?;
                Ok(Evaluation::new(m.margin, m.scale))
            }
            Instance::MapState { f, a, map, x } => {
                let m = check_map_jensen(f, map, a, &DVector::from_vec(x.clone()))?;
                Ok(Evaluation::new(m.margin, m.scale))
            }
            Instance::PowerMean { a, b, p } => {
                let v = check_power_mean(a, b, *p, INNER_TOL)?;
                let scale = 1f64.max(norm2(a)?.powf(*p)).max(norm2(b)?.powf(*p));
                Ok(Evaluation::new(v.margin, scale))
            }
            Instance::SandwichLower { x, y, q } => {
                let r = subadditivity_sandwich(x, y, *q, Variant::Derived, INNER_TOL)?;
                let mut eval = Evaluation::new(r.lower_verdict.margin, r.scale()?);
                for w in [&r.u1, &r.u2] {
                    if w.residual() > WITNESS_TOL {
                        eval.flag(format!("witness orthogonality residual {:e}", w.residual()));
                    }
                }
                Ok(eval)
            }
            Instance::SandwichUpper { x, y, q, variant } => {
                let r = subadditivity_sandwich(x, y, *q, *variant, INNER_TOL)?;
                let mut eval = Evaluation::new(r.upper_verdict.margin, r.scale()?);
                for w in [&r.v1, &r.v2] {
                    if w.residual() > WITNESS_TOL {
                        eval.flag(format!("witness orthogonality residual {:e}", w.residual()));
                    }
                }
                Ok(eval)
            }
            Instance::UnitConjugation { h, k } => {
                let q = conjugating_orthogonal(h, k, INNER_TOL)?;
                let v = loewner_leq(h, &q.conjugate(k), INNER_TOL)?;
                let scale = 1f64.max(norm2(h)?).max(norm2(k)?);
                let mut eval = Evaluation::new(v.margin, scale);
                if q.residual() > WITNESS_TOL {
                    eval.flag(format!("orthogonality residual {:e}", q.residual()));
                }
                Ok(eval)
            }
            Instance::Congruence { z } => {
                let z = matrix_from_rows(z)?;
                let w = congruence_orthogonal(&z)?;
                let residual = congruence_residual(&z, &w);
                let scale = 1f64.max(z.norm_squared());
                let mut eval = Evaluation::new(-residual, scale);
                eval.extras
                    .push(("max_relative_residual", Reduce::Max, residual / scale));
                Ok(eval)
            }
            Instance::Dilation { f, x, c } => {
                let c = matrix_from_rows(c)?;
                let r = dilation_block_bound(x, &c, f, INNER_TOL)?;
                let mut eval = Evaluation::from_report(&r)?;
                for key in ["midpoint_residual", "abs_residual"] {
                    if let Some(Ingredient::Scalar(v)) = r.ingredients.get(key) {
                        eval.extras.push((
                            if key == "abs_residual" {
                                "max_abs_identity_residual"
                            } else {
                                "max_midpoint_identity_residual"
                            },
                            Reduce::Max,
                            *v,
                        ));
                        if *v > DILATION_IDENTITY_TOL {
                            eval.flag(format!("{key} {v:e} above {DILATION_IDENTITY_TOL:e}"));
                        }
                    }
                }
                Ok(eval)
            }
        }
    }
}

pub(crate) fn vec_of(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

pub(crate) fn rows_of(m: &Matrix) -> Vec<Vec<f64>> {
    matrix_rows(m)
}
