use approx::assert_relative_eq;
use proptest::prelude::*;
use superquad_core::constants::{
    gamma_constant, kantorovich_abs_power, kantorovich_power, locate_t0, secant_coeffs, solve_t0,
    Power, SmoothFunction,
};

/// Generalized Kantorovich constant in the closed form
/// `(mMᵖ − Mmᵖ)/((p−1)(M−m)) · ((p−1)/p · (Mᵖ − mᵖ)/(mMᵖ − Mmᵖ))ᵖ`.
fn kantorovich_closed(m: f64, big_m: f64, p: f64) -> f64 {
    let (mp, big_mp) = (m.powf(p), big_m.powf(p));
    let cross = m * big_mp - big_m * mp;
    cross / ((p - 1.0) * (big_m - m)) * ((p - 1.0) / p * (big_mp - mp) / cross).powf(p)
}

/// For `g = tᵖ` the root equation is linear in `t`: `t₀ = −pν/((p−1)μ)`.
fn t0_closed(m: f64, big_m: f64, p: f64) -> f64 {
    let mu = (big_m.powf(p) - m.powf(p)) / (big_m - m);
    let nu = m.powf(p) - mu * m;
    -p * nu / ((p - 1.0) * mu)
}

#[test]
fn square_on_one_four() {
    assert!((kantorovich_power(1.0, 4.0, 2.0).unwrap() - 1.5625).abs() <= 1e-12);
    assert!((kantorovich_abs_power(1.0, 4.0, 2.0).unwrap() - 1.5625).abs() <= 1e-12);
    assert!((solve_t0(&Power::new(2.0), 1.0, 4.0).unwrap() - 1.6).abs() <= 1e-12);
    let (mu, nu) = secant_coeffs(&Power::new(2.0), 1.0, 4.0).unwrap();
    assert_relative_eq!(mu, 5.0, epsilon = 1e-14);
    assert_relative_eq!(nu, -4.0, epsilon = 1e-14);
}

#[test]
fn cube_on_one_two() {
    let r = gamma_constant(&Power::new(3.0), 1.0, 2.0).unwrap();
    assert_relative_eq!(r.t0, 9.0 / 7.0, max_relative = 1e-13);
    assert_relative_eq!(r.gamma, 1029.0 / 729.0, max_relative = 1e-13);
}

#[test]
fn degenerate_interval_uses_unit_constant() {
    assert_eq!(
        gamma_constant(&Power::new(2.5), 3.0, 3.0).unwrap().gamma,
        1.0
    );
    assert_eq!(kantorovich_abs_power(3.0, 3.0, 2.5).unwrap(), 1.0);
}

#[test]
fn dual_path_on_seeded_intervals() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20);
    for p in [2.0, 2.5, 3.0, 4.0] {
        for _ in 0..20 {
            let m: f64 = rng.random_range(0.01..5.0);
            let big_m = m + rng.random_range(0.01..10.0);
            let printed = kantorovich_abs_power(m, big_m, p).unwrap();
            let sharp = gamma_constant(&Power::new(p), m, big_m).unwrap().gamma;
            assert_relative_eq!(printed, sharp, max_relative = 1e-10);
        }
    }
}

fn interval() -> impl Strategy<Value = (f64, f64)> {
    (0.05f64..20.0, 0.05f64..20.0).prop_map(|(m, w)| (m, m + w))
}

proptest! {
    #[test]
    fn power_constant_matches_closed_forms((m, big_m) in interval(), p in 1.5f64..5.0) {
        let r = gamma_constant(&Power::new(p), m, big_m).unwrap();
        prop_assert!((r.t0 - t0_closed(m, big_m, p)).abs() <= 1e-9 * big_m);
        let k = kantorovich_closed(m, big_m, p);
        prop_assert!((r.gamma - k).abs() <= 1e-9 * k);
        prop_assert!(r.gamma >= 1.0 - 1e-12);
        prop_assert!(r.residual.abs() <= r.residual_bound(&Power::new(p)));
    }

    #[test]
    fn root_lies_in_interval_and_secant_interpolates((m, big_m) in interval(), p in 1.5f64..5.0) {
        let g = Power::new(p);
        let root = locate_t0(&g, m, big_m).unwrap();
        prop_assert!(root.t0 >= m && root.t0 <= big_m);
        let (mu, nu) = secant_coeffs(&g, m, big_m).unwrap();
        let scale = g.value(big_m).max(1.0);
        prop_assert!((mu * m + nu - g.value(m)).abs() <= 1e-12 * scale);
        prop_assert!((mu * big_m + nu - g.value(big_m)).abs() <= 1e-12 * scale);
    }

    #[test]
    fn constant_grows_with_the_interval(m in 0.1f64..5.0, w in 0.1f64..5.0, extra in 0.1f64..5.0) {
        let g = Power::new(3.0);
        let inner = gamma_constant(&g, m, m + w).unwrap().gamma;
        let outer = gamma_constant(&g, m, m + w + extra).unwrap().gamma;
        prop_assert!(outer >= inner - 1e-12);
    }
}
