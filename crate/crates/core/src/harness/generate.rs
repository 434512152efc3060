//! Seeded random instances. Every generator is a pure function of its seed
//! and parameters.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bounds::PositiveMapCD;
use crate::error::{Error, Result};
use crate::linalg::{singular_values, sqrt_psd, Matrix, SymmetricMatrix};

/// Attempts allowed before a rejection sampler gives up.
pub const MAX_ATTEMPTS: usize = 1000;

pub type TrialRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

/// Seed of trial `index` of check `check` under `master`.
pub fn trial_seed(master: u64, check: &str, index: usize) -> u64 {
    let s = splitmix64(master);
    let s = splitmix64(s ^ fnv1a(check));
    splitmix64(s ^ index as u64)
}

fn gaussian_matrix(rng: &mut TrialRng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with the
/// sign of `R`'s diagonal folded into `Q`).
pub fn random_orthogonal(rng: &mut TrialRng, n: usize) -> Matrix {
    let qr = gaussian_matrix(rng, n, n).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// `QΛQᵀ` with eigenvalues drawn uniformly from `[lo, hi]`.
pub fn random_spectrum_matrix(rng: &mut TrialRng, n: usize, lo: f64, hi: f64) -> SymmetricMatrix {
    let q = random_orthogonal(rng, n);
    let values: Vec<f64> = (0..n).map(|_| rng.random_range(lo..=hi)).collect();
    let lambda = Matrix::from_diagonal(&DVector::from_vec(values));
    SymmetricMatrix::symmetrize(&q * lambda * q.transpose())
}

/// Random PSD matrix with spectrum in `[0, spread]`.
pub fn random_psd(n: usize, seed: u64, spread: f64) -> SymmetricMatrix {
    random_spectrum_matrix(&mut rng_from_seed(seed), n, 0.0, spread)
}

fn check_dims(n: usize, spread: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::Config("dimension must be positive".into()));
    }
    if !(spread > 0.0 && spread.is_finite()) {
        return Err(Error::Parameter {
            name: "spread".into(),
            value: spread,
            valid: "(0, inf)".into(),
        });
    }
    Ok(())
}

/// Positive definite pair with spectra in `[spread/100, spread]` and
/// `σ_min(a − b) ≥ gap`, by rejection.
pub fn pd_pair_from_rng(
    rng: &mut TrialRng,
    n: usize,
    spread: f64,
    gap: f64,
) -> Result<(SymmetricMatrix, SymmetricMatrix)> {
    check_dims(n, spread)?;
    if gap.is_nan() || gap <= 0.0 {
        return Err(Error::Parameter {
            name: "gap".into(),
            value: gap,
            valid: "(0, inf)".into(),
        });
    }
    let lo = spread / 100.0;
    for _ in 0..MAX_ATTEMPTS {
        let a = random_spectrum_matrix(rng, n, lo, spread);
        let b = random_spectrum_matrix(rng, n, lo, spread);
        let s = singular_values((&a - &b).as_matrix());
        if s[s.len() - 1] >= gap {
            return Ok((a, b));
        }
    }
    Err(Error::Generation {
        what: format!("pair with sigma_min(a - b) >= {gap}"),
        attempts: MAX_ATTEMPTS,
    })
}

pub fn random_pd_pair_invertible_diff(
    n: usize,
    seed: u64,
    spread: f64,
    gap: f64,
) -> Result<(SymmetricMatrix, SymmetricMatrix)> {
    pd_pair_from_rng(&mut rng_from_seed(seed), n, spread, gap)
}

/// Pair with `a − b` positive definite, `σ_min(a − b) ≥ gap`.
pub fn ordered_pd_pair_from_rng(
    rng: &mut TrialRng,
    n: usize,
    spread: f64,
    gap: f64,
) -> Result<(SymmetricMatrix, SymmetricMatrix)> {
    check_dims(n, spread)?;
    let b = random_spectrum_matrix(rng, n, spread / 100.0, spread);
    let p = random_spectrum_matrix(rng, n, gap, spread.max(gap));
    Ok((&b + &p, b))
}

/// `C = U diag(s) Vᵀ` with singular values drawn from `[lo, hi] ⊂ [0, 1]`.
pub fn random_contraction(rng: &mut TrialRng, n: usize, lo: f64, hi: f64) -> Matrix {
    let u = random_orthogonal(rng, n);
    let v = random_orthogonal(rng, n);
    let s: Vec<f64> = (0..n).map(|_| rng.random_range(lo..=hi)).collect();
    u * Matrix::from_diagonal(&DVector::from_vec(s)) * v.transpose()
}

pub fn unital_map_from_rng(rng: &mut TrialRng, n: usize) -> Result<PositiveMapCD> {
    let g = gaussian_matrix(rng, n, n);
    let norm = singular_values(&g)[0];
    let target = 0.9 * rng.random::<f64>();
    let c = if norm > 0.0 { g * (target / norm) } else { g };
    let defect = SymmetricMatrix::symmetrize(Matrix::identity(n, n) - c.transpose() * &c);
    let d = sqrt_psd(&defect)?.into_matrix();
    PositiveMapCD::new(c, d)
}

/// `Φ(X) = CᵀXC + DᵀXD` with `‖C‖₂ ≤ 0.9` and `D = (I − CᵀC)^{1/2}`.
pub fn random_unital_map(n: usize, seed: u64) -> Result<PositiveMapCD> {
    unital_map_from_rng(&mut rng_from_seed(seed), n)
}

/// Normalized standard Gaussian vector.
pub fn random_unit_vector(rng: &mut TrialRng, n: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = v.norm();
        if norm > 1e-8 {
            return v / norm;
        }
    }
}

pub fn pick<'a, T>(rng: &mut TrialRng, items: &'a [T]) -> &'a T {
    &items[rng.random_range(0..items.len())]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigenvalues, orthogonality_residual};

    #[test]
    fn psd_generator_is_deterministic_and_psd() {
        let a = random_psd(2, 42, 10.0);
        let b = random_psd(2, 42, 10.0);
        assert_eq!(a, b);
        for n in 1..6 {
            let m = random_psd(n, 7, 10.0);
            let l = eigenvalues(&m).unwrap();
            assert!(l[n - 1] >= -1e-12 && l[0] <= 10.0 + 1e-12);
        }
        assert!(random_psd(1, 3, 5.0).get(0, 0) >= 0.0);
    }

    #[test]
    fn pd_pair_has_certified_gap() {
        let (a, b) = random_pd_pair_invertible_diff(2, 7, 10.0, 0.1).unwrap();
        let s = singular_values((&a - &b).as_matrix());
        assert!(s[1] >= 0.1);
        assert_eq!(
            (a.clone(), b.clone()),
            random_pd_pair_invertible_diff(2, 7, 10.0, 0.1).unwrap()
        );
        let (a, b) = random_pd_pair_invertible_diff(1, 9, 10.0, 0.5).unwrap();
        assert!((a.get(0, 0) - b.get(0, 0)).abs() >= 0.5);
        assert!(eigenvalues(&a).unwrap()[0] >= 0.1);
    }

    #[test]
    fn unital_maps_are_unital_and_deterministic() {
        for seed in 0..20 {
            let phi = random_unital_map(3, seed).unwrap();
            assert!(phi.unitality_residual() <= 1e-10);
        }
        assert_eq!(
            random_unital_map(4, 5).unwrap(),
            random_unital_map(4, 5).unwrap()
        );
    }

    #[test]
    fn orthogonal_and_unit_vectors() {
        let mut rng = rng_from_seed(1);
        let q = random_orthogonal(&mut rng, 5);
        assert!(orthogonality_residual(&q) < 1e-12);
        let v = random_unit_vector(&mut rng, 4);
        assert!((v.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn seeds_differ_across_checks_and_indices() {
        let a = trial_seed(42, "thm21", 0);
        assert_ne!(a, trial_seed(42, "thm21", 1));
        assert_ne!(a, trial_seed(42, "thm25", 0));
        assert_ne!(a, trial_seed(43, "thm21", 0));
        assert_eq!(a, trial_seed(42, "thm21", 0));
    }
}
