//! The JSON document every command prints.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use superquad_core::bounds::{BoundReport, Ingredient};
use superquad_core::constants::GammaValue;
use superquad_core::harness::SuiteReport;
use superquad_core::linalg::eigenvalues;
use superquad_core::{OrderVerdict, SymmetricMatrix};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictSummary {
    pub pass: bool,
    pub margin: f64,
    pub threshold: f64,
    pub failing_index: Option<usize>,
}

impl From<&OrderVerdict> for VerdictSummary {
    fn from(v: &OrderVerdict) -> Self {
        Self {
            pass: v.pass,
            margin: v.margin,
            threshold: v.threshold,
            failing_index: v.failing_index,
        }
    }
}

/// One printed tuple against its recomputation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PaperTarget {
    pub name: String,
    /// Printed values, re-sorted descending.
    pub expected: Vec<f64>,
    pub computed: Vec<f64>,
    /// Largest entrywise difference after sorting both sides.
    pub abs_error: f64,
    /// Eigensolver-free recomputation of `computed`.
    pub analytic: Vec<f64>,
    pub path_agreement: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema: u32,
    pub command: String,
    pub inputs: Value,
    /// Named spectra, each sorted descending.
    pub eigenvalues: BTreeMap<String, Vec<f64>>,
    pub verdicts: BTreeMap<String, VerdictSummary>,
    pub ingredients: BTreeMap<String, Value>,
    pub paper_targets: Vec<PaperTarget>,
    pub erratum_notes: Vec<String>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub counterexample: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub suite: Option<SuiteReport>,
}

impl ReportDocument {
    pub fn new(command: &str, inputs: Value) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            command: command.into(),
            inputs,
            eigenvalues: BTreeMap::new(),
            verdicts: BTreeMap::new(),
            ingredients: BTreeMap::new(),
            paper_targets: Vec::new(),
            erratum_notes: Vec::new(),
            warnings: Vec::new(),
            counterexample: None,
            suite: None,
        }
    }

    pub fn add_spectrum(&mut self, name: &str, mut values: Vec<f64>) {
        values.sort_by(|x, y| y.total_cmp(x));
        self.eigenvalues.insert(name.into(), values);
    }

    pub fn add_matrix_spectrum(
        &mut self,
        name: &str,
        m: &SymmetricMatrix,
    ) -> superquad_core::Result<()> {
        self.add_spectrum(name, eigenvalues(m)?);
        Ok(())
    }

    pub fn all_verdicts_pass(&self) -> bool {
        self.verdicts.values().all(|v| v.pass)
    }

    /// Records the left side, the bound and their comparison.
    pub fn absorb_bound(&mut self, key: &str, r: &BoundReport) -> superquad_core::Result<()> {
        self.add_spectrum(&format!("{key}lhs"), r.lhs_spectrum()?);
        self.add_spectrum(&format!("{key}bound"), r.bound_spectrum()?);
        self.verdicts
            .insert(format!("{key}{}", r.theorem), (&r.verdict).into());
        for (name, ingredient) in &r.ingredients {
            self.ingredients
                .insert(format!("{key}{name}"), ingredient_value(ingredient)?);
        }
        Ok(())
    }
}

pub fn gamma_value(g: &GammaValue) -> Value {
    match g {
        GammaValue::Sharp(r) => json!({
            "finite": true,
            "gamma": r.gamma,
            "gamma_inverse": 1.0 / r.gamma,
            "m": r.m,
            "M": r.big_m,
            "mu": r.mu,
            "nu": r.nu,
            "t0": r.t0,
            "residual": r.residual,
            "brackets": r.brackets,
        }),
        GammaValue::Unbounded { m, big_m } => json!({
            "finite": false,
            "gamma": Value::Null,
            "gamma_inverse": 0.0,
            "m": m,
            "M": big_m,
            "note": "interval contains 0 where the function vanishes; the constant is unbounded",
        }),
    }
}

/// Plain JSON for an ingredient: numbers and spectra stay bare, matrices
/// carry their rows and spectrum.
pub fn ingredient_value(i: &Ingredient) -> superquad_core::Result<Value> {
    Ok(match i {
        Ingredient::Scalar(x) => json!(x),
        Ingredient::Spectrum(v) => json!(v),
        Ingredient::Matrix(m) => json!({
            "matrix": m.rows(),
            "spectrum": eigenvalues(m)?,
        }),
        Ingredient::Orthogonal(q) => json!({
            "matrix": superquad_core::linalg::matrix_rows(q.as_matrix()),
            "orthogonality_residual": q.residual(),
        }),
        Ingredient::Gamma(g) => gamma_value(g),
        Ingredient::Verdict(v) => {
            serde_json::to_value(VerdictSummary::from(v)).expect("verdict serializes")
        }
        Ingredient::Note(s) => json!(s),
    })
}
