//! Secant coefficients, the `t₀` root equation, the reverse-Jensen constant
//! `γ(m, M, g)` and the Kantorovich constants for powers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Curvature, ScalarFunctionModel};

/// Number of grid points used to bracket the `t₀` equation.
pub const SCAN_POINTS: usize = 1024;

/// A twice differentiable function on an interval, as needed by the
/// reverse-Jensen machinery.
pub trait SmoothFunction {
    fn value(&self, t: f64) -> f64;
    fn deriv(&self, t: f64) -> f64;
    fn second_deriv(&self, t: f64) -> f64;
    /// Rejects intervals on which the function is not strictly convex and
    /// twice differentiable.
    fn check_interval(&self, m: f64, big_m: f64) -> Result<()>;
    fn label(&self) -> String;
}

/// `t ↦ tᵖ`. Integer exponents are evaluated with `powi` so that `t²` is
/// usable on intervals containing negative numbers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Power {
    p: f64,
}

impl Power {
    pub fn new(p: f64) -> Self {
        Self { p }
    }

    pub fn exponent(&self) -> f64 {
        self.p
    }

    fn integer(&self) -> Option<i32> {
        (self.p.fract() == 0.0 && self.p.abs() < 1e6).then_some(self.p as i32)
    }

    fn pow(&self, t: f64, e: f64) -> f64 {
        match self.integer() {
            Some(_) if e.fract() == 0.0 => t.powi(e as i32),
            _ => t.powf(e),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.pow(t, self.p)
    }
}

impl SmoothFunction for Power {
    fn value(&self, t: f64) -> f64 {
        self.eval(t)
    }

    fn deriv(&self, t: f64) -> f64 {
        if self.p == 0.0 {
            0.0
        } else {
            self.p * self.pow(t, self.p - 1.0)
        }
    }

    fn second_deriv(&self, t: f64) -> f64 {
        if self.p == 0.0 || self.p == 1.0 {
            0.0
        } else {
            self.p * (self.p - 1.0) * self.pow(t, self.p - 2.0)
        }
    }

    fn check_interval(&self, m: f64, big_m: f64) -> Result<()> {
        check_order(m, big_m)?;
        let p = self.p;
        if !p.is_finite() || (0.0..=1.0).contains(&p) {
            return Err(Error::Parameter {
                name: "p".into(),
                value: p,
                valid: "real outside [0, 1]".into(),
            });
        }
        let ok = match self.integer() {
            // Even powers ≥ 2 are strictly convex on the whole line.
            Some(k) if k >= 2 && k % 2 == 0 => true,
            Some(k) if k >= 2 => m >= 0.0,
            _ if p >= 2.0 => m >= 0.0,
            _ => m > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain {
                function: self.label(),
                eigenvalue: m,
                domain_lo: if p >= 2.0 { 0.0 } else { f64::MIN_POSITIVE },
            })
        }
    }

    fn label(&self) -> String {
        format!("pow:{}", self.p)
    }
}

/// Even extension `x ↦ f(|x|)` of a registry member.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AbsComposite {
    f: ScalarFunctionModel,
}

impl AbsComposite {
    pub fn new(f: ScalarFunctionModel) -> Self {
        Self { f }
    }

    /// `|t|ᵖ`.
    pub fn abs_power(p: f64) -> Result<Self> {
        Ok(Self::new(ScalarFunctionModel::pow_p(p)?))
    }

    pub fn inner(&self) -> &ScalarFunctionModel {
        &self.f
    }
}

impl SmoothFunction for AbsComposite {
    fn value(&self, t: f64) -> f64 {
        self.f.value(t.abs())
    }

    fn deriv(&self, t: f64) -> f64 {
        if t < 0.0 {
            -self.f.deriv(-t)
        } else {
            self.f.deriv(t)
        }
    }

    fn second_deriv(&self, t: f64) -> f64 {
        self.f.second_deriv(t.abs())
    }

    fn check_interval(&self, m: f64, big_m: f64) -> Result<()> {
        check_order(m, big_m)?;
        if self.f.flags().curvature != Curvature::Convex {
            return Err(Error::Classification {
                function: self.label(),
                required: "convex".into(),
            });
        }
        if m < 0.0 && big_m > 0.0 && !self.f.even_extension_is_c2() {
            return Err(Error::Classification {
                function: self.label(),
                required: "twice differentiable even extension (p >= 2)".into(),
            });
        }
        Ok(())
    }

    fn label(&self) -> String {
        format!("abs_{}", self.f.specifier())
    }
}

impl SmoothFunction for ScalarFunctionModel {
    fn value(&self, t: f64) -> f64 {
        ScalarFunctionModel::value(self, t)
    }

    fn deriv(&self, t: f64) -> f64 {
        ScalarFunctionModel::deriv(self, t)
    }

    fn second_deriv(&self, t: f64) -> f64 {
        ScalarFunctionModel::second_deriv(self, t)
    }

    fn check_interval(&self, m: f64, big_m: f64) -> Result<()> {
        check_order(m, big_m)?;
        if m < self.domain_lo() {
            return Err(Error::Domain {
                function: self.specifier(),
                eigenvalue: m,
                domain_lo: self.domain_lo(),
            });
        }
        if self.flags().curvature != Curvature::Convex {
            return Err(Error::Classification {
                function: self.specifier(),
                required: "convex".into(),
            });
        }
        Ok(())
    }

    fn label(&self) -> String {
        self.specifier()
    }
}

fn check_order(m: f64, big_m: f64) -> Result<()> {
    if m.is_finite() && big_m.is_finite() && m <= big_m {
        Ok(())
    } else {
        Err(Error::Interval { m, big_m })
    }
}

/// Slope and intercept of the chord of `g` over `[m, M]`.
pub fn secant_coeffs<G: SmoothFunction + ?Sized>(g: &G, m: f64, big_m: f64) -> Result<(f64, f64)> {
    if !(m.is_finite() && big_m.is_finite() && m < big_m) {
        return Err(Error::Interval { m, big_m });
    }
    let (gm, gmm) = (g.value(m), g.value(big_m));
    let w = big_m - m;
    Ok(((gmm - gm) / w, (big_m * gm - m * gmm) / w))
}

/// Located root of `h(t) = μ g(t) − g′(t)(μ t + ν)` with diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct T0Root {
    pub t0: f64,
    pub residual: f64,
    /// Number of sign-change brackets found in the scan; 1 when the
    /// uniqueness claim holds numerically.
    pub brackets: usize,
}

fn h_at<G: SmoothFunction + ?Sized>(g: &G, mu: f64, nu: f64, t: f64) -> f64 {
    mu * g.value(t) - g.deriv(t) * (mu * t + nu)
}

fn refine<G: SmoothFunction + ?Sized>(
    g: &G,
    mu: f64,
    nu: f64,
    mut lo: f64,
    mut hi: f64,
    width: f64,
) -> f64 {
    let mut h_lo = h_at(g, mu, nu, lo);
    if h_lo == 0.0 {
        return lo;
    }
    if h_at(g, mu, nu, hi) == 0.0 {
        return hi;
    }
    for _ in 0..200 {
        if hi - lo <= width {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let h_mid = h_at(g, mu, nu, mid);
        if h_mid == 0.0 {
            return mid;
        }
        if (h_mid > 0.0) == (h_lo > 0.0) {
            lo = mid;
            h_lo = h_mid;
        } else {
            hi = mid;
        }
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..2 {
        let h = h_at(g, mu, nu, t);
        // h′(t) = −g″(t)(μ t + ν)
        let dh = -g.second_deriv(t) * (mu * t + nu);
        if dh == 0.0 || !dh.is_finite() {
            break;
        }
        let next = t - h / dh;
        if next >= lo && next <= hi && h_at(g, mu, nu, next).abs() <= h.abs() {
            t = next;
        } else {
            break;
        }
    }
    t
}

/// Finds `t₀`, reporting the residual and bracket count. When the scan finds
/// several brackets the root maximizing `(μ t + ν)/g(t)` among those with
/// `g(t) ≠ 0` is chosen.
pub fn locate_t0<G: SmoothFunction + ?Sized>(g: &G, m: f64, big_m: f64) -> Result<T0Root> {
    g.check_interval(m, big_m)?;
    let (mu, nu) = secant_coeffs(g, m, big_m)?;
    let step = (big_m - m) / (SCAN_POINTS - 1) as f64;
    let node = |i: usize| {
        if i == SCAN_POINTS - 1 {
            big_m
        } else {
            m + step * i as f64
        }
    };
    let width = 1e-13 * 1f64.max(m.abs()).max(big_m.abs());

    let mut roots = Vec::new();
    let mut prev_t = node(0);
    let mut prev_h = h_at(g, mu, nu, prev_t);
    if prev_h == 0.0 {
        roots.push(prev_t);
    }
    for i in 1..SCAN_POINTS {
        let t = node(i);
        let h = h_at(g, mu, nu, t);
        if h == 0.0 {
            roots.push(t);
        } else if prev_h != 0.0 && (h > 0.0) != (prev_h > 0.0) {
            roots.push(refine(g, mu, nu, prev_t, t, width));
        }
        prev_t = t;
        prev_h = h;
    }
    if roots.is_empty() {
        return Err(Error::RootBracketing {
            m,
            big_m,
            points: SCAN_POINTS,
        });
    }
    let brackets = roots.len();
    let ratio = |t: f64| {
        let gt = g.value(t);
        if gt == 0.0 {
            f64::NEG_INFINITY
        } else {
            (mu * t + nu) / gt
        }
    };
    let t0 = roots.iter().copied().fold(
        roots[0],
        |best, t| if ratio(t) > ratio(best) { t } else { best },
    );
    Ok(T0Root {
        t0,
        residual: h_at(g, mu, nu, t0),
        brackets,
    })
}

/// The root `t₀ ∈ [m, M]` of `μ g(t) = g′(t)(μ t + ν)`.
pub fn solve_t0<G: SmoothFunction + ?Sized>(g: &G, m: f64, big_m: f64) -> Result<f64> {
    Ok(locate_t0(g, m, big_m)?.t0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaResult {
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
    pub mu: f64,
    pub nu: f64,
    pub t0: f64,
    pub gamma: f64,
    pub residual: f64,
    pub brackets: usize,
}

impl GammaResult {
    /// Tolerance the root-equation residual must meet.
    pub fn residual_bound<G: SmoothFunction + ?Sized>(&self, g: &G) -> f64 {
        1e-12 * 1f64.max(self.mu.abs() * g.value(self.m).abs().max(g.value(self.big_m).abs()))
    }
}

/// `γ(m, M, g) = (μ t₀ + ν)/g(t₀)`, the sharp constant in
/// `⟨g(Z)x, x⟩ ≤ γ g(⟨Zx, x⟩)`.
pub fn gamma_constant<G: SmoothFunction + ?Sized>(
    g: &G,
    m: f64,
    big_m: f64,
) -> Result<GammaResult> {
    if m == big_m && m.is_finite() {
        g.check_interval(m, big_m)?;
        let gm = g.value(m);
        if gm == 0.0 {
            return Err(Error::SingularConstant {
                what: "g(t0)".into(),
                value: gm,
            });
        }
        let mu = g.deriv(m);
        return Ok(GammaResult {
            m,
            big_m,
            mu,
            nu: gm - mu * m,
            t0: m,
            gamma: 1.0,
            residual: 0.0,
            brackets: 1,
        });
    }
    let root = locate_t0(g, m, big_m)?;
    let (mu, nu) = secant_coeffs(g, m, big_m)?;
    let gt = g.value(root.t0);
    let scale = 1f64.max(g.value(m).abs()).max(g.value(big_m).abs());
    if gt.abs() <= 1e-14 * scale {
        return Err(Error::SingularConstant {
            what: "g(t0)".into(),
            value: gt,
        });
    }
    Ok(GammaResult {
        m,
        big_m,
        mu,
        nu,
        t0: root.t0,
        gamma: (mu * root.t0 + nu) / gt,
        residual: root.residual,
        brackets: root.brackets,
    })
}

/// `γ` as consumed by the difference bounds. When the spectral interval
/// straddles zero and `g = f(|·|)` with `f(0) = 0`, the root equation is
/// solved at `t = 0` where `g` vanishes and the reverse-Jensen ratio is
/// unbounded; `γ⁻¹ = 0` is then the sharp factor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GammaValue {
    Sharp(GammaResult),
    Unbounded {
        m: f64,
        #[serde(rename = "M")]
        big_m: f64,
    },
}

impl GammaValue {
    pub fn gamma(&self) -> f64 {
        match self {
            GammaValue::Sharp(r) => r.gamma,
            GammaValue::Unbounded { .. } => f64::INFINITY,
        }
    }

    pub fn inverse(&self) -> f64 {
        match self {
            GammaValue::Sharp(r) => 1.0 / r.gamma,
            GammaValue::Unbounded { .. } => 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, GammaValue::Sharp(_))
    }
}

/// `γ(m, M, f(|·|))`, mapping the vanishing-`g(t₀)` case on an interval
/// that contains zero to [`GammaValue::Unbounded`].
/// A degenerate interval yields `γ = 1` even at `m = 0`, where every term it
/// multiplies vanishes.
pub fn abs_gamma(f: &ScalarFunctionModel, m: f64, big_m: f64) -> Result<GammaValue> {
    let g = AbsComposite::new(*f);
    if m == big_m && m.is_finite() {
        g.check_interval(m, big_m)?;
        let mu = g.deriv(m);
        return Ok(GammaValue::Sharp(GammaResult {
            m,
            big_m,
            mu,
            nu: g.value(m) - mu * m,
            t0: m,
            gamma: 1.0,
            residual: 0.0,
            brackets: 1,
        }));
    }
    match gamma_constant(&g, m, big_m) {
        Ok(r) => Ok(GammaValue::Sharp(r)),
        Err(Error::SingularConstant { .. }) if m <= 0.0 && big_m >= 0.0 && f.value(0.0) == 0.0 => {
            Ok(GammaValue::Unbounded { m, big_m })
        }
        Err(e) => Err(e),
    }
}

/// Generalized Kantorovich constant `K(m, M, p) = γ(m, M, tᵖ)` for
/// `0 < m < M`.
pub fn kantorovich_power(m: f64, big_m: f64, p: f64) -> Result<f64> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::Parameter {
            name: "m".into(),
            value: m,
            valid: "(0, M)".into(),
        });
    }
    if !(big_m > m && big_m.is_finite()) {
        return Err(Error::Parameter {
            name: "M".into(),
            value: big_m,
            valid: "(m, inf)".into(),
        });
    }
    if !p.is_finite() || (0.0..=1.0).contains(&p) {
        return Err(Error::Parameter {
            name: "p".into(),
            value: p,
            valid: "real outside [0, 1]".into(),
        });
    }
    Ok(gamma_constant(&Power::new(p), m, big_m)?.gamma)
}

/// Closed form of `K(m, M, |t|ᵖ)`:
/// `(m|M|ᵖ − M|m|ᵖ)/((p−1)(M−m)) · |((p−1)/p)(|M|ᵖ − |m|ᵖ)/(m|M|ᵖ − M|m|ᵖ)|ᵖ`.
/// A degenerate interval returns 1.
pub fn kantorovich_abs_power(m: f64, big_m: f64, p: f64) -> Result<f64> {
    check_order(m, big_m)?;
    if !(p >= 2.0 && p.is_finite()) {
        return Err(Error::Parameter {
            name: "p".into(),
            value: p,
            valid: "[2, inf)".into(),
        });
    }
    if m == big_m {
        return Ok(1.0);
    }
    let (am, abm) = (m.abs().powf(p), big_m.abs().powf(p));
    let den = m * abm - big_m * am;
    let scale = 1f64.max(m.abs() * abm + big_m.abs() * am);
    if den.abs() <= 1e-14 * scale {
        return Err(Error::SingularConstant {
            what: "m|M|^p - M|m|^p".into(),
            value: den,
        });
    }
    let inner = ((p - 1.0) / p) * (abm - am) / den;
    Ok(den / ((p - 1.0) * (big_m - m)) * inner.abs().powf(p))
}
