//! Scalar superquadratic function models and pointwise checkers.
//!
//! A function `f: [0, ∞) → ℝ` is superquadratic when every `t ≥ 0` admits a
//! constant `C_t` with `f(s) ≥ f(t) + C_t(s − t) + f(|s − t|)` for all
//! `s ≥ 0`. The registry holds the two families used by the bounds (convex
//! increasing powers, concave decreasing negated powers) plus two further
//! members and `t²`, the equality case of every inequality here.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Curvature {
    Convex,
    Concave,
    Neither,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    Neither,
}

/// Declared class of a registry member. These are declared per family and
/// spot-checked in tests, never inferred from samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassFlags {
    pub superquadratic: bool,
    pub curvature: Curvature,
    pub monotonicity: Monotonicity,
    /// `f(t) > 0` for every `t > 0`.
    pub positive: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    /// `tᵖ`, `p ≥ 2`.
    PowP { p: f64 },
    /// `−t^q`, `q ∈ [1, 2]`.
    NegPowQ { q: f64 },
    /// `t²·ln t` with `f(0) = 0`.
    X2Log,
    /// `−(1 + t^{1/r})^r`, `r ∈ (0, 1]`.
    NegRootSum { r: f64 },
    /// `t²`.
    Square,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalarFunctionModel {
    family: Family,
    flags: ClassFlags,
}

fn check_range(name: &str, value: f64, ok: bool, valid: &str) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter {
            name: name.into(),
            value,
            valid: valid.into(),
        })
    }
}

impl ScalarFunctionModel {
    pub fn pow_p(p: f64) -> Result<Self> {
        check_range("p", p, p >= 2.0, "[2, inf)")?;
        Ok(Self {
            family: Family::PowP { p },
            flags: ClassFlags {
                superquadratic: true,
                curvature: Curvature::Convex,
                monotonicity: Monotonicity::Increasing,
                positive: true,
            },
        })
    }

    pub fn neg_pow_q(q: f64) -> Result<Self> {
        check_range("q", q, (1.0..=2.0).contains(&q), "[1, 2]")?;
        Ok(Self {
            family: Family::NegPowQ { q },
            flags: ClassFlags {
                superquadratic: true,
                curvature: Curvature::Concave,
                monotonicity: Monotonicity::Decreasing,
                positive: false,
            },
        })
    }

    /// `t² ln t` dips below zero on `(0, 1)` and is neither monotone nor
    /// convex near the origin (`f″(t) = 2 ln t + 3`), so it carries no
    /// curvature or monotonicity flag.
    pub fn x2_log() -> Self {
        Self {
            family: Family::X2Log,
            flags: ClassFlags {
                superquadratic: true,
                curvature: Curvature::Neither,
                monotonicity: Monotonicity::Neither,
                positive: false,
            },
        }
    }

    pub fn neg_root_sum(r: f64) -> Result<Self> {
        check_range("r", r, r > 0.0 && r <= 1.0, "(0, 1]")?;
        Ok(Self {
            family: Family::NegRootSum { r },
            flags: ClassFlags {
                superquadratic: true,
                curvature: Curvature::Concave,
                monotonicity: Monotonicity::Decreasing,
                positive: false,
            },
        })
    }

    pub fn square() -> Self {
        Self {
            family: Family::Square,
            flags: ClassFlags {
                superquadratic: true,
                curvature: Curvature::Convex,
                monotonicity: Monotonicity::Increasing,
                positive: true,
            },
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn flags(&self) -> ClassFlags {
        self.flags
    }

    pub fn name(&self) -> &'static str {
        match self.family {
            Family::PowP { .. } => "pow_p",
            Family::NegPowQ { .. } => "neg_pow_q",
            Family::X2Log => "x2_log",
            Family::NegRootSum { .. } => "neg_root_sum",
            Family::Square => "square",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match self.family {
            Family::PowP { p } => vec![p],
            Family::NegPowQ { q } => vec![q],
            Family::NegRootSum { r } => vec![r],
            Family::X2Log | Family::Square => vec![],
        }
    }

    /// `name:param` form accepted by [`FromStr`].
    pub fn specifier(&self) -> String {
        self.to_string()
    }

    pub fn domain_lo(&self) -> f64 {
        0.0
    }

    pub fn value(&self, t: f64) -> f64 {
        match self.family {
            Family::PowP { p } => t.powf(p),
            Family::NegPowQ { q } => -t.powf(q),
            Family::X2Log => {
                if t == 0.0 {
                    0.0
                } else {
                    t * t * t.ln()
                }
            }
            Family::NegRootSum { r } => -(1.0 + t.powf(1.0 / r)).powf(r),
            Family::Square => t * t,
        }
    }

    /// `f′(t)`; at `t = 0` the one-sided derivative.
    pub fn deriv(&self, t: f64) -> f64 {
        match self.family {
            Family::PowP { p } => p * t.powf(p - 1.0),
            Family::NegPowQ { q } => {
                if q == 1.0 {
                    -1.0
                } else {
                    -q * t.powf(q - 1.0)
                }
            }
            Family::X2Log => {
                if t == 0.0 {
                    0.0
                } else {
                    t * (2.0 * t.ln() + 1.0)
                }
            }
            Family::NegRootSum { r } => {
                if r == 1.0 {
                    -1.0
                } else {
                    -(1.0 + t.powf(1.0 / r)).powf(r - 1.0) * t.powf(1.0 / r - 1.0)
                }
            }
            Family::Square => 2.0 * t,
        }
    }

    /// `f″(t)`; may be infinite at `t = 0`.
    pub fn second_deriv(&self, t: f64) -> f64 {
        match self.family {
            Family::PowP { p } => {
                if p == 2.0 {
                    2.0
                } else {
                    p * (p - 1.0) * t.powf(p - 2.0)
                }
            }
            Family::NegPowQ { q } => {
                if q == 1.0 {
                    0.0
                } else if q == 2.0 {
                    -2.0
                } else {
                    -q * (q - 1.0) * t.powf(q - 2.0)
                }
            }
            Family::X2Log => 2.0 * t.ln() + 3.0,
            Family::NegRootSum { r } => {
                if r == 1.0 {
                    return 0.0;
                }
                let u = t.powf(1.0 / r);
                let du = t.powf(1.0 / r - 1.0) / r;
                let e = 1.0 / r - 1.0;
                -((r - 1.0) * (1.0 + u).powf(r - 2.0) * du * t.powf(e)
                    + (1.0 + u).powf(r - 1.0) * e * t.powf(e - 1.0))
            }
            Family::Square => 2.0,
        }
    }

    /// Whether `x ↦ f(|x|)` is twice differentiable through `x = 0`.
    pub fn even_extension_is_c2(&self) -> bool {
        matches!(self.family, Family::PowP { .. } | Family::Square)
    }

    pub fn is_concave_decreasing(&self) -> bool {
        self.flags.superquadratic
            && self.flags.curvature == Curvature::Concave
            && self.flags.monotonicity == Monotonicity::Decreasing
    }

    pub fn is_convex_increasing(&self) -> bool {
        self.flags.superquadratic
            && self.flags.curvature == Curvature::Convex
            && self.flags.monotonicity == Monotonicity::Increasing
    }
}

impl fmt::Display for ScalarFunctionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.params().first() {
            Some(p) => write!(f, "{}:{}", self.name(), p),
            None => write!(f, "{}", self.name()),
        }
    }
}

/// Parses a real number, accepting rationals such as `4/3`.
pub fn parse_real(s: &str) -> Result<f64> {
    let s = s.trim();
    let parse = |x: &str| {
        x.trim()
            .parse::<f64>()
            .map_err(|_| Error::Number(s.to_string()))
    };
    let value = match s.split_once('/') {
        Some((num, den)) => {
            let den = parse(den)?;
            if den == 0.0 {
                return Err(Error::Number(s.to_string()));
            }
            parse(num)? / den
        }
        None => parse(s)?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Number(s.to_string()))
    }
}

/// Builds a registry member by name.
pub fn make_function(name: &str, params: &[f64]) -> Result<ScalarFunctionModel> {
    let one = |label: &str| -> Result<f64> {
        match params {
            [x] => Ok(*x),
            _ => Err(Error::Parameter {
                name: label.into(),
                value: f64::NAN,
                valid: format!("exactly one parameter for {name}"),
            }),
        }
    };
    let none = || -> Result<()> {
        if params.is_empty() {
            Ok(())
        } else {
            Err(Error::Parameter {
                name: "params".into(),
                value: params[0],
                valid: format!("no parameters for {name}"),
            })
        }
    };
    match name {
        "pow_p" => ScalarFunctionModel::pow_p(one("p")?),
        "neg_pow_q" => ScalarFunctionModel::neg_pow_q(one("q")?),
        "neg_root_sum" => ScalarFunctionModel::neg_root_sum(one("r")?),
        "x2_log" => none().map(|_| ScalarFunctionModel::x2_log()),
        "square" => none().map(|_| ScalarFunctionModel::square()),
        other => Err(Error::UnknownFunction(other.to_string())),
    }
}

impl FromStr for ScalarFunctionModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.split_once(':') {
            Some((name, param)) => make_function(name.trim(), &[parse_real(param)?]),
            None => make_function(s, &[]),
        }
    }
}

impl Serialize for ScalarFunctionModel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.specifier())
    }
}

impl<'de> Deserialize<'de> for ScalarFunctionModel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn ensure_nonnegative(f: &ScalarFunctionModel, label: &str, x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            function: format!("{} ({label})", f.specifier()),
            eigenvalue: x,
            domain_lo: 0.0,
        })
    }
}

/// `f(s) − f(t) − f′(t)(s − t) − f(|s − t|)`, the defining inequality's
/// slack with `C_t = f′(t)`.
pub fn superquadratic_gap(f: &ScalarFunctionModel, s: f64, t: f64) -> Result<f64> {
    ensure_nonnegative(f, "s", s)?;
    ensure_nonnegative(f, "t", t)?;
    Ok(f.value(s) - f.value(t) - f.deriv(t) * (s - t) - f.value((s - t).abs()))
}

/// Right side minus left side of the superquadratic Jensen inequality
/// `f(αt + (1−α)s) ≤ αf(t) + (1−α)f(s) − αf((1−α)|t−s|) − (1−α)f(α|t−s|)`.
pub fn jensen_gap_scalar(f: &ScalarFunctionModel, t: f64, s: f64, alpha: f64) -> Result<f64> {
    ensure_nonnegative(f, "t", t)?;
    ensure_nonnegative(f, "s", s)?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Parameter {
            name: "alpha".into(),
            value: alpha,
            valid: "[0, 1]".into(),
        });
    }
    let d = (t - s).abs();
    let rhs = alpha * f.value(t) + (1.0 - alpha) * f.value(s)
        - alpha * f.value((1.0 - alpha) * d)
        - (1.0 - alpha) * f.value(alpha * d);
    Ok(rhs - f.value(alpha * t + (1.0 - alpha) * s))
}

/// Set of constants `C` satisfying the defining inequality at `t` for every
/// sampled `s`. Each sample contributes a half-line, so the feasible set is
/// the interval `[lo, hi]` (empty when `lo > hi`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SupportInterval {
    pub lo: f64,
    pub hi: f64,
    /// Worst `−f(0)` slack from samples with `s = t`; must be ≥ 0.
    pub diagonal_slack: f64,
}

impl SupportInterval {
    pub fn is_feasible(&self, tol: f64) -> bool {
        self.lo <= self.hi + tol && self.diagonal_slack >= -tol
    }

    pub fn contains(&self, c: f64, tol: f64) -> bool {
        self.lo - tol <= c && c <= self.hi + tol && self.diagonal_slack >= -tol
    }

    /// A feasible constant, preferring `hint` when it is admissible.
    pub fn witness(&self, hint: f64, tol: f64) -> Option<f64> {
        if !self.is_feasible(tol) {
            None
        } else if self.contains(hint, tol) {
            Some(hint)
        } else {
            Some(hint.clamp(self.lo.min(self.hi), self.hi.max(self.lo)))
        }
    }
}

/// Feasible `C_t` over the samples. Used for members such as `neg_root_sum`
/// where `f(0) ≠ 0` and `f′(t)` is not guaranteed to be the witness.
pub fn support_constant_interval(
    f: &ScalarFunctionModel,
    t: f64,
    samples: &[f64],
) -> Result<SupportInterval> {
    ensure_nonnegative(f, "t", t)?;
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    let mut diagonal_slack = f64::INFINITY;
    let ft = f.value(t);
    for &s in samples {
        ensure_nonnegative(f, "s", s)?;
        // f(s) − f(t) − f(|s−t|) ≥ C(s − t)
        let rest = f.value(s) - ft - f.value((s - t).abs());
        let ds = s - t;
        if ds > 0.0 {
            hi = hi.min(rest / ds);
        } else if ds < 0.0 {
            lo = lo.max(rest / ds);
        } else {
            diagonal_slack = diagonal_slack.min(rest);
        }
    }
    Ok(SupportInterval {
        lo,
        hi,
        diagonal_slack,
    })
}
