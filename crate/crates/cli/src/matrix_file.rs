//! `{"matrix": [[...], ...]}` input files.

use std::fs;
use std::path::Path;

use serde::Deserialize;
use superquad_core::linalg::matrix_from_rows;
use superquad_core::{Matrix, SymmetricMatrix};

use crate::CliError;

/// Relative asymmetry accepted (and silently repaired) on load.
pub const LOAD_SYMMETRY_TOL: f64 = 1e-8;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixFile {
    matrix: Vec<Vec<f64>>,
}

pub fn load_general(path: &Path) -> Result<Matrix, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let file: MatrixFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    matrix_from_rows(&file.matrix).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Loads a symmetric matrix. Asymmetry up to [`LOAD_SYMMETRY_TOL`] relative
/// is averaged away and reported through `warnings`.
pub fn load_symmetric(
    path: &Path,
    warnings: &mut Vec<String>,
) -> Result<SymmetricMatrix, CliError> {
    let m = load_general(path)?;
    if m.nrows() != m.ncols() {
        return Err(CliError::Input(format!(
            "{}: matrix is {}x{}, expected square",
            path.display(),
            m.nrows(),
            m.ncols()
        )));
    }
    let skew = (&m - m.transpose()).norm();
    let rel = skew / m.norm().max(1.0);
    if rel > LOAD_SYMMETRY_TOL {
        return Err(CliError::Input(format!(
            "{}: matrix is not symmetric (relative asymmetry {rel:e})",
            path.display()
        )));
    }
    if skew > 0.0 {
        warnings.push(format!(
            "{}: symmetrized on load (relative asymmetry {rel:e})",
            path.display()
        ));
    }
    SymmetricMatrix::new((&m + m.transpose()) * 0.5)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}
