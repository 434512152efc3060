use crate::error::Result;
use crate::linalg::{
    aligning_orthogonal, apply_scalar_function, eig_order_leq, eigenvalues, matrix_abs,
    ComparisonTolerance, SymmetricMatrix,
};
use crate::scalar::ScalarFunctionModel;

use super::{
    check_alpha, psd_power, require_concave_decreasing, spread, BoundForm, BoundReport,
    CompareMode, Direction, Ingredient, PositiveMapCD,
};

struct SParts {
    s: SymmetricMatrix,
    lhs: SymmetricMatrix,
    f_spread_a: f64,
    f_spread_b: f64,
    abs_diff: SymmetricMatrix,
}

fn s_parts(
    f: &ScalarFunctionModel,
    a: &SymmetricMatrix,
    b: &SymmetricMatrix,
    alpha: f64,
) -> Result<SParts> {
    require_concave_decreasing(f)?;
    check_alpha(alpha)?;
    a.ensure_same_dim(b)?;
    let n = a.dim();
    let fa = apply_scalar_function(f, a)?;
    let fb = apply_scalar_function(f, b)?;
    let f_spread_a = f.value(spread(a)?);
    let f_spread_b = f.value(spread(b)?);
    let abs_diff = matrix_abs(&(a - b))?;
    let f_alpha = apply_scalar_function(f, &(&abs_diff * alpha))?;
    let f_beta = apply_scalar_function(f, &(&abs_diff * (1.0 - alpha)))?;

    let first = &(&(&fa - &SymmetricMatrix::scalar(n, f_spread_a)) - &f_alpha) * (1.0 - alpha);
    let second = &(&(&fb - &SymmetricMatrix::scalar(n, f_spread_b)) - &f_beta) * alpha;
    let s = &first + &second;
    let lhs = apply_scalar_function(f, &(&(a * (1.0 - alpha)) + &(b * alpha)))?;
    Ok(SParts {
        s,
        lhs,
        f_spread_a,
        f_spread_b,
        abs_diff,
    })
}

/// `λ↓(f((1−α)A + αB)) ≤ λ↓(S)` for concave decreasing superquadratic `f`,
/// with
/// `S = (1−α)(f(A) − f(λ₁(A)−λₙ(A)) − f(α|A−B|)) + α(f(B) − f(λ₁(B)−λₙ(B)) − f((1−α)|A−B|))`.
pub fn concave_bound_s(
    f: &ScalarFunctionModel,
    a: &SymmetricMatrix,
    b: &SymmetricMatrix,
    alpha: f64,
    tol: ComparisonTolerance,
) -> Result<BoundReport> {
    let parts = s_parts(f, a, b, alpha)?;
    let neg_s = -&parts.s;
    BoundReport::build(
        "thm21",
        parts.lhs,
        BoundForm::Matrix(parts.s),
        CompareMode::EigenvalueOrder,
        Direction::LhsBelowBound,
        tol,
    )?
    .with("alpha", Ingredient::Scalar(alpha))
    .with("f_spread_a", Ingredient::Scalar(parts.f_spread_a))
    .with("f_spread_b", Ingredient::Scalar(parts.f_spread_b))
    .spectrum("abs_diff", &parts.abs_diff)?
    .spectrum("neg_bound", &neg_s)
}

/// Löwner form at `α = 1/2`: `f((A+B)/2) ≤ Vᵀ S V` with `V` built from the
/// eigenvalue order.
pub fn cor_midpoint_concave(
    f: &ScalarFunctionModel,
    a: &SymmetricMatrix,
    b: &SymmetricMatrix,
    tol: ComparisonTolerance,
) -> Result<BoundReport> {
    let parts = s_parts(f, a, b, 0.5)?;
    let order = eig_order_leq(&parts.lhs, &parts.s, tol)?;
    // Q carries the eigenbasis of the left side onto that of S, so that
    // lhs ≤ Qᵀ S Q whenever the eigenvalue order holds.
    let q = aligning_orthogonal(&parts.lhs, &parts.s)?;
    let bound = q.conjugate(&parts.s);
    BoundReport::build(
        "cor22",
        parts.lhs,
        BoundForm::Matrix(bound),
        CompareMode::Loewner,
        Direction::LhsBelowBound,
        tol,
    )?
    .with("eigenvalue_order", Ingredient::Verdict(order))
    .with("V", Ingredient::Orthogonal(q))
    .spectrum("S", &parts.s)
}

/// `(Aᑫ + Bᑫ)/2 ≤ V((A+B)/2)ᑫVᵀ + |(A−B)/2|ᑫ + ((λ₁(A)−λₙ(A))ᑫ + (λ₁(B)−λₙ(B))ᑫ)/2·I`
/// for `q ∈ [1, 2]`.
pub fn cor_power_mean_reverse(
    a: &SymmetricMatrix,
    b: &SymmetricMatrix,
    q: f64,
    tol: ComparisonTolerance,
) -> Result<BoundReport> {
    // Validates q through the registry.
    ScalarFunctionModel::neg_pow_q(q)?;
    a.ensure_same_dim(b)?;
    let n = a.dim();
    let aq = psd_power(a, q, "a")?;
    let bq = psd_power(b, q, "b")?;
    let lhs = &(&aq + &bq) * 0.5;
    let mid = &(a + b) * 0.5;
    let mid_q = psd_power(&mid, q, "(a+b)/2")?;
    let half_abs_q = psd_power(&matrix_abs(&(&(a - b) * 0.5))?, q, "|a-b|/2")?;
    let constant = 0.5 * (spread(a)?.powf(q) + spread(b)?.powf(q));
    let correction = &half_abs_q + &SymmetricMatrix::scalar(n, constant);
    let reduced = &lhs - &correction;

    let order = eig_order_leq(&reduced, &mid_q, tol)?;
    let q_rot = aligning_orthogonal(&reduced, &mid_q)?;
    let bound = &q_rot.conjugate(&mid_q) + &correction;
    BoundReport::build(
        "cor23",
        lhs.clone(),
        BoundForm::Matrix(bound),
        CompareMode::Loewner,
        Direction::LhsBelowBound,
        tol,
    )?
    .with("q", Ingredient::Scalar(q))
    .with("spread_constant", Ingredient::Scalar(constant))
    .with("eigenvalue_order", Ingredient::Verdict(order))
    .with("V", Ingredient::Orthogonal(q_rot.transpose()))
    .spectrum("power_mean", &lhs)?
    .spectrum("midpoint_power", &mid_q)?
    .spectrum("midpoint_form", &reduced)
}

/// `λ↓((A+B)ᑫ) ≥ λ↓(2^{q−1}(Aᑫ + Bᑫ − (λ₁(A)−λₙ(A))ᑫ − (λ₁(B)−λₙ(B))ᑫ) − |A−B|ᑫ)`.
pub fn cor_sum_lower(
    a: &SymmetricMatrix,
    b: &SymmetricMatrix,
    q: f64,
    tol: ComparisonTolerance,
) -> Result<BoundReport> {
    ScalarFunctionModel::neg_pow_q(q)?;
    a.ensure_same_dim(b)?;
    let n = a.dim();
    let aq = psd_power(a, q, "a")?;
    let bq = psd_power(b, q, "b")?;
    let lhs = psd_power(&(a + b), q, "a+b")?;
    let abs_q = psd_power(&matrix_abs(&(a - b))?, q, "|a-b|")?;
    let constant = spread(a)?.powf(q) + spread(b)?.powf(q);
    let inner = &(&aq + &bq) - &SymmetricMatrix::scalar(n, constant);
    let bound = &(&inner * 2f64.powf(q - 1.0)) - &abs_q;
    let midpoint_form = &bound * 2f64.powf(-q);
    BoundReport::build(
        "cor24",
        lhs,
        BoundForm::Matrix(bound),
        CompareMode::EigenvalueOrder,
        Direction::BoundBelowLhs,
        tol,
    )?
    .with("q", Ingredient::Scalar(q))
    .spectrum("midpoint_form", &midpoint_form)
}

/// `λ↓(f(Φ(A))) ≤ λ↓(Φ(f(A))) − f(λ₁(A) − λₙ(A))` for a unital `Φ`.
pub fn phi_bound(
    f: &ScalarFunctionModel,
    phi: &PositiveMapCD,
    a: &SymmetricMatrix,
    tol: ComparisonTolerance,
) -> Result<BoundReport> {
    require_concave_decreasing(f)?;
    let phi_a = phi.apply(a)?;
    let lhs = apply_scalar_function(f, &phi_a)?;
    let phi_fa = phi.apply(&apply_scalar_function(f, a)?)?;
    let f_spread = f.value(spread(a)?);
    let bound: Vec<f64> = eigenvalues(&phi_fa)?
        .into_iter()
        .map(|t| t - f_spread)
        .collect();
    let neg_bound: Vec<f64> = bound.iter().rev().map(|t| -t).collect();
    BoundReport::build(
        "thm25",
        lhs,
        BoundForm::Spectrum(bound),
        CompareMode::EigenvalueOrder,
        Direction::LhsBelowBound,
        tol,
    )
    .map(|r| {
        r.with("f_spread", Ingredient::Scalar(f_spread))
            .with(
                "unitality_residual",
                Ingredient::Scalar(phi.unitality_residual()),
            )
            .with("neg_bound", Ingredient::Spectrum(neg_bound))
    })?
    .spectrum("phi_a", &phi_a)
}

/// The positive-map bound applied to `A ⊕ B` with the convex-combination
/// map, giving
/// `λ↓(f((1−α)A + αB)) ≤ λ↓((1−α)f(A) + αf(B)) − f(max λ₁ − min λₙ)`.
pub fn combine_pair_bound(
    f: &ScalarFunctionModel,
    a: &SymmetricMatrix,
    b: &SymmetricMatrix,
    alpha: f64,
    tol: ComparisonTolerance,
) -> Result<BoundReport> {
    a.ensure_same_dim(b)?;
    let phi = PositiveMapCD::convex_combination(a.dim(), alpha)?;
    let mut report = phi_bound(f, &phi, &a.direct_sum(b), tol)?;
    report.theorem = "thm25_pair".into();
    Ok(report.with("alpha", Ingredient::Scalar(alpha)).with(
        "weights",
        Ingredient::Note("C = sqrt(1-alpha) I, D = sqrt(alpha) I".into()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigenvalues, SymmetricMatrix};
    use approx::assert_abs_diff_eq;

    fn sym(rows: &[&[f64]]) -> SymmetricMatrix {
        SymmetricMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn spectrum(r: &BoundReport, key: &str) -> Vec<f64> {
        match &r.ingredients[key] {
            Ingredient::Spectrum(v) => v.clone(),
            other => panic!("{key}: {other:?}"),
        }
    }

    fn tol() -> ComparisonTolerance {
        ComparisonTolerance::default()
    }

    #[test]
    fn s_bound_trivial_and_scalar_cases() {
        let f = ScalarFunctionModel::neg_pow_q(1.5).unwrap();
        let i = SymmetricMatrix::identity(2);
        let r = concave_bound_s(&f, &i, &i, 0.5, tol()).unwrap();
        assert!(r.verdict.pass);
        assert_abs_diff_eq!(r.verdict.margin, 0.0, epsilon = 1e-12);

        let f = ScalarFunctionModel::neg_pow_q(2.0).unwrap();
        let r = concave_bound_s(
            &f,
            &SymmetricMatrix::scalar(1, 4.0),
            &SymmetricMatrix::scalar(1, 2.0),
            0.5,
            tol(),
        )
        .unwrap();
        assert_abs_diff_eq!(r.lhs.get(0, 0), -9.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            r.bound.as_matrix().unwrap().get(0, 0),
            -9.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn s_bound_matches_printed_example() {
        let f = ScalarFunctionModel::neg_pow_q(4.0 / 3.0).unwrap();
        let a = sym(&[&[5.0, -1.0], &[-1.0, 5.0]]);
        let b = sym(&[&[4.0, 1.0], &[1.0, 5.0]]);
        let r = concave_bound_s(&f, &a, &b, 0.5, tol()).unwrap();
        let neg = spectrum(&r, "neg_bound");
        assert_abs_diff_eq!(neg[0], 4.9944, epsilon = 1e-3);
        assert_abs_diff_eq!(neg[1], 3.6099, epsilon = 1e-3);
        assert!(r.verdict.pass);
    }

    #[test]
    fn s_bound_rejects_misclassified_function_and_indefinite_input() {
        let f = ScalarFunctionModel::pow_p(2.0).unwrap();
        let i = SymmetricMatrix::identity(2);
        assert!(matches!(
            concave_bound_s(&f, &i, &i, 0.5, tol()),
            Err(crate::Error::Classification { .. })
        ));
        let g = ScalarFunctionModel::neg_pow_q(1.5).unwrap();
        let bad = SymmetricMatrix::diagonal(&[1.0, -1.0]);
        assert!(matches!(
            concave_bound_s(&g, &bad, &i, 0.5, tol()),
            Err(crate::Error::Domain { .. })
        ));
    }

    #[test]
    fn power_mean_reverse_cases() {
        let a = sym(&[&[5.0, -1.0], &[-1.0, 5.0]]);
        // With a = b only the spread constant (λ₁ − λₙ)ᑫ separates the sides.
        let r = cor_power_mean_reverse(&a, &a, 1.5, tol()).unwrap();
        assert!(r.verdict.pass);
        assert_abs_diff_eq!(r.verdict.margin, 2f64.powf(1.5), epsilon = 1e-9);
        let c = SymmetricMatrix::scalar(2, 3.0);
        let r = cor_power_mean_reverse(&c, &c, 1.5, tol()).unwrap();
        assert!(r.verdict.margin.abs() < 1e-9);

        let r = cor_power_mean_reverse(
            &SymmetricMatrix::scalar(1, 4.0),
            &SymmetricMatrix::scalar(1, 2.0),
            2.0,
            tol(),
        )
        .unwrap();
        assert_abs_diff_eq!(r.lhs.get(0, 0), 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            r.bound.as_matrix().unwrap().get(0, 0),
            10.0,
            epsilon = 1e-12
        );

        let r = cor_power_mean_reverse(
            &SymmetricMatrix::scalar(1, 4.0),
            &SymmetricMatrix::scalar(1, 1.0),
            2.0,
            tol(),
        )
        .unwrap();
        assert_abs_diff_eq!(r.lhs.get(0, 0), 8.5, epsilon = 1e-12);
        assert_abs_diff_eq!(r.bound.as_matrix().unwrap().get(0, 0), 8.5, epsilon = 1e-12);

        let b = SymmetricMatrix::diagonal(&[2.0, 4.0]);
        let r = cor_power_mean_reverse(&a, &b, 1.5, tol()).unwrap();
        let pm = spectrum(&r, "power_mean");
        let mp = spectrum(&r, "midpoint_power");
        let mf = spectrum(&r, "midpoint_form");
        for (got, want) in pm.iter().zip([10.4967, 6.266]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-3);
        }
        for (got, want) in mp.iter().zip([10.2125, 5.9754]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-3);
        }
        for (got, want) in mf.iter().zip([6.5921, 2.1248]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-3);
        }
        assert!(r.verdict.pass);
    }

    #[test]
    fn sum_lower_cases() {
        let i = SymmetricMatrix::identity(2);
        let r = cor_sum_lower(&i, &i, 2.0, tol()).unwrap();
        assert!(r.verdict.pass);
        assert!((r.bound.as_matrix().unwrap().as_matrix() - r.lhs.as_matrix()).norm() < 1e-12);

        let r = cor_sum_lower(
            &SymmetricMatrix::scalar(1, 4.0),
            &SymmetricMatrix::scalar(1, 1.0),
            2.0,
            tol(),
        )
        .unwrap();
        assert_abs_diff_eq!(r.lhs.get(0, 0), 25.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            r.bound.as_matrix().unwrap().get(0, 0),
            25.0,
            epsilon = 1e-12
        );

        let a = sym(&[&[5.0, -1.0], &[-1.0, 5.0]]);
        let b = SymmetricMatrix::diagonal(&[2.0, 4.0]);
        let r = cor_sum_lower(&a, &b, 1.5, tol()).unwrap();
        let mf = spectrum(&r, "midpoint_form");
        assert_abs_diff_eq!(mf[0], 6.5921, epsilon = 1e-3);
        assert_abs_diff_eq!(mf[1], 2.1248, epsilon = 1e-3);
        assert!(r.verdict.pass);
    }

    #[test]
    fn phi_bound_cases() {
        let f = ScalarFunctionModel::neg_pow_q(1.5).unwrap();
        let a = sym(&[&[5.0, -1.0], &[-1.0, 5.0]]);
        let n = 2;
        let id = PositiveMapCD::new(
            crate::linalg::Matrix::identity(n, n),
            crate::linalg::Matrix::zeros(n, n),
        )
        .unwrap();
        let r = phi_bound(&f, &id, &a, tol()).unwrap();
        assert!(r.verdict.pass);

        let r = phi_bound(&f, &id, &SymmetricMatrix::scalar(2, 3.0), tol()).unwrap();
        assert!(r.verdict.margin.abs() < 1e-12);

        let half = PositiveMapCD::convex_combination(2, 0.5).unwrap();
        let r = phi_bound(&f, &half, &a, tol()).unwrap();
        let fa = eigenvalues(&apply_scalar_function(&f, &a).unwrap()).unwrap();
        let bound = r.bound_spectrum().unwrap();
        assert_abs_diff_eq!(f.value(2.0), -8f64.sqrt(), epsilon = 1e-12);
        for (got, want) in bound.iter().zip(&fa) {
            assert_abs_diff_eq!(*got, want - f.value(2.0), epsilon = 1e-12);
        }
    }

    #[test]
    fn pair_bound_matches_printed_examples() {
        let f = ScalarFunctionModel::neg_pow_q(4.0 / 3.0).unwrap();
        let cases = [
            (
                sym(&[&[5.0, -1.0], &[-1.0, 5.0]]),
                sym(&[&[4.0, 1.0], &[1.0, 5.0]]),
                [5.0212, 3.9202],
            ),
            (
                sym(&[&[9.0, -1.0], &[-1.0, 8.0]]),
                sym(&[&[5.0, 1.0], &[1.0, 5.0]]),
                [3.7477, 2.3178],
            ),
        ];
        for (a, b, want) in cases {
            let r = combine_pair_bound(&f, &a, &b, 0.5, tol()).unwrap();
            let neg = spectrum(&r, "neg_bound");
            let mut neg_desc = neg.clone();
            neg_desc.sort_by(|x, y| y.total_cmp(x));
            assert_abs_diff_eq!(neg_desc[0], want[0], epsilon = 1e-3);
            assert_abs_diff_eq!(neg_desc[1], want[1], epsilon = 1e-3);
            assert!(r.verdict.pass);
        }
        let c = SymmetricMatrix::scalar(2, 3.0);
        let r = combine_pair_bound(&f, &c, &c, 0.3, tol()).unwrap();
        assert!(r.verdict.margin.abs() < 1e-9);
    }
}
