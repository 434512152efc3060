use nalgebra::DVector;

use crate::constants::abs_gamma;
use crate::error::{Error, Result};
use crate::linalg::{
    aligning_orthogonal, apply_scalar_function, eig_order_leq, ensure_positive_definite, left_abs,
    matrix_abs, spectral_range, ComparisonTolerance, Matrix, OrthogonalMatrix, SymmetricMatrix,
};
use crate::scalar::ScalarFunctionModel;

use super::convex::t_parts;
use super::{require_convex_positive, BoundForm, BoundReport, CompareMode, Direction, Ingredient};

/// Slack on `‖C‖₂ ≤ 1`.
pub const CONTRACTION_TOL: f64 = 1e-12;

/// Unitary dilation of `x` by a contraction `c`:
/// `a = R₁ᵀ(x ⊕ 0)R₁`, `b = R₂ᵀ(x ⊕ 0)R₂` with
/// `R₁ = [[C, D], [E, −Cᵀ]]`, `R₂ = [[C, −D], [E, Cᵀ]]`,
/// `D = (I − CCᵀ)^{1/2}` and `E = (I − CᵀC)^{1/2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dilation {
    pub a: SymmetricMatrix,
    pub b: SymmetricMatrix,
    pub r1: OrthogonalMatrix,
    pub r2: OrthogonalMatrix,
    pub d: SymmetricMatrix,
    pub e: SymmetricMatrix,
    /// `‖(a+b)/2 − (CᵀxC ⊕ DxD)‖_F`.
    pub midpoint_residual: f64,
    /// `‖|(a−b)/2| − (|CᵀxD| ⊕ |DxC|)‖_F` with `|M| = (MMᵀ)^{1/2}`.
    pub abs_residual: f64,
}

fn blocks(tl: &Matrix, tr: &Matrix, bl: &Matrix, br: &Matrix) -> Matrix {
    let n = tl.nrows();
    let mut m = Matrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(tl);
    m.view_mut((0, n), (n, n)).copy_from(tr);
    m.view_mut((n, 0), (n, n)).copy_from(bl);
    m.view_mut((n, n), (n, n)).copy_from(br);
    m
}

/// Defect square roots `(I − CCᵀ)^{1/2}` and `(I − CᵀC)^{1/2}` from one SVD
/// of `C`, so that `CᵀD = EᵀCᵀ` holds to rounding.
fn defects(c: &Matrix) -> Result<(Matrix, Matrix)> {
    let n = c.nrows();
    let svd = c.clone().svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => {
            return Err(Error::Computation {
                dim: n,
                echo: format!("{c:?}"),
            })
        }
    };
    let top = svd.singular_values.max();
    if top > 1.0 + CONTRACTION_TOL {
        return Err(Error::Parameter {
            name: "||c||_2".into(),
            value: top,
            valid: "[0, 1] (contraction)".into(),
        });
    }
    let s = DVector::from_iterator(
        n,
        svd.singular_values
            .iter()
            .map(|&x| (1.0 - x.min(1.0) * x.min(1.0)).sqrt()),
    );
    let diag = Matrix::from_diagonal(&s);
    let d = &u * &diag * u.transpose();
    let v = v_t.transpose();
    let e = &v * &diag * v_t;
    Ok((d, e))
}

/// Builds the dilated pair for positive definite `x` and a contraction `c`.
pub fn dilation_pair(x: &SymmetricMatrix, c: &Matrix) -> Result<Dilation> {
    let n = x.dim();
    if c.nrows() != n || c.ncols() != n {
        return Err(Error::DimensionMismatch {
            left: c.nrows().max(c.ncols()),
            right: n,
        });
    }
    ensure_positive_definite(x, "x")?;
    let (d, e) = defects(c)?;
    let ct = c.transpose();
    let r1 = OrthogonalMatrix::new(blocks(c, &d, &e, &(-&ct)))?;
    let r2 = OrthogonalMatrix::new(blocks(c, &(-&d), &e, &ct))?;
    let padded = x.direct_sum(&SymmetricMatrix::zeros(n));
    let a = r1.conjugate(&padded);
    let b = r2.conjugate(&padded);

    let xm = x.as_matrix();
    let ctxc = SymmetricMatrix::symmetrize(&ct * xm * c);
    let dxd = SymmetricMatrix::symmetrize(&d * xm * &d);
    let mid = &(&a + &b) * 0.5;
    let midpoint_residual = (mid.as_matrix() - ctxc.direct_sum(&dxd).as_matrix()).norm();
    let p = &ct * xm * &d;
    let expected_abs = left_abs(&p)?.direct_sum(&left_abs(&p.transpose())?);
    let abs_half = matrix_abs(&(&(&a - &b) * 0.5))?;
    let abs_residual = (abs_half.as_matrix() - expected_abs.as_matrix()).norm();

    Ok(Dilation {
        a,
        b,
        r1,
        r2,
        d: SymmetricMatrix::symmetrize(d),
        e: SymmetricMatrix::symmetrize(e),
        midpoint_residual,
        abs_residual,
    })
}

/// Runs the midpoint convex bound on the dilation of `x` by `c` and checks
/// the compressed conclusion: with `U` realizing
/// `Uᵀ(f(CᵀxC) ⊕ 0)U ≤ Y ⊕ Z`, the top-left block of the left side is
/// below `Y = Cᵀf(x)C − γ⁻¹f(|CᵀxD|)` in the Löwner order.
///
/// `γ` is taken over half the spectral interval of `a − b`. That spectrum is
/// symmetric about zero, so the interval always contains zero and the
/// returned bound uses `γ⁻¹ = 0`. The constant computed from the singular
/// values of `CᵀxD` is recorded separately as `statement_gamma`.
pub fn dilation_block_bound(
    x: &SymmetricMatrix,
    c: &Matrix,
    f: &ScalarFunctionModel,
    tol: ComparisonTolerance,
) -> Result<BoundReport> {
    require_convex_positive(f)?;
    let n = x.dim();
    let dil = dilation_pair(x, c)?;
    let parts = t_parts(f, &dil.a, &dil.b, 0.5)?;
    let y = parts.t.principal_block(0, n);
    let z = parts.t.principal_block(n, n);
    let off_diagonal = parts.t.as_matrix().view((0, n), (n, n)).norm();

    let ct = c.transpose();
    let ctxc = SymmetricMatrix::symmetrize(&ct * x.as_matrix() * c);
    let h = apply_scalar_function(f, &ctxc)?.direct_sum(&SymmetricMatrix::zeros(n));
    let k = y.direct_sum(&z);
    let order = eig_order_leq(&h, &k, tol)?;
    let q = aligning_orthogonal(&h, &k)?;
    let rotated = h.congruence_t(q.as_matrix());
    let pdf = crate::linalg::loewner_leq(&rotated, &k, tol)?;
    let block = rotated.principal_block(0, n);

    let p = &ct * x.as_matrix() * dil.d.as_matrix();
    let stmt = spectral_range(&left_abs(&p)?)?;
    let (sm, s_big) = (stmt.lo.max(0.0).sqrt(), stmt.hi.max(0.0).sqrt());
    let statement_gamma = abs_gamma(f, sm / 2.0, s_big / 2.0)?;

    BoundReport::build(
        "dilation",
        block,
        BoundForm::Matrix(y),
        CompareMode::Loewner,
        Direction::LhsBelowBound,
        tol,
    )
    .map(|r| {
        r.with("eigenvalue_order", Ingredient::Verdict(order))
            .with("block_inequality", Ingredient::Verdict(pdf))
            .with("U", Ingredient::Orthogonal(q.transpose()))
            .with("gamma", Ingredient::Gamma(parts.gamma_alpha))
            .with("diff_lambda_min", Ingredient::Scalar(parts.diff_lo))
            .with("diff_lambda_max", Ingredient::Scalar(parts.diff_hi))
            .with("statement_m", Ingredient::Scalar(sm))
            .with("statement_M", Ingredient::Scalar(s_big))
            .with("statement_gamma", Ingredient::Gamma(statement_gamma))
            .with(
                "midpoint_residual",
                Ingredient::Scalar(dil.midpoint_residual),
            )
            .with("abs_residual", Ingredient::Scalar(dil.abs_residual))
            .with("t_off_diagonal", Ingredient::Scalar(off_diagonal))
    })?
    .spectrum("Z", &z)
}
