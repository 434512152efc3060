//! Closed-form arithmetic on real symmetric 2×2 matrices, used as an
//! eigensolver-free second path for the printed examples.

use superquad_core::ScalarFunctionModel;

/// `[[a, b], [b, d]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sym2 {
    pub a: f64,
    pub b: f64,
    pub d: f64,
}

impl Sym2 {
    pub const fn new(a: f64, b: f64, d: f64) -> Self {
        Self { a, b, d }
    }

    pub const fn scalar(c: f64) -> Self {
        Self::new(c, 0.0, c)
    }

    /// Eigenvalues in descending order from the characteristic polynomial.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let mean = 0.5 * (self.a + self.d);
        let radius = (0.5 * (self.a - self.d)).hypot(self.b);
        [mean + radius, mean - radius]
    }

    /// `f(X) = f(λ₁)P₁ + f(λ₂)P₂` with the spectral projectors
    /// `P₁ = (X − λ₂I)/(λ₁ − λ₂)` and `P₂ = I − P₁`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Sym2 {
        let [l1, l2] = self.eigenvalues();
        if l1 - l2 <= f64::EPSILON * l1.abs().max(1.0) {
            return Sym2::scalar(f(0.5 * (l1 + l2)));
        }
        let (f1, f2) = (f(l1), f(l2));
        let w = 1.0 / (l1 - l2);
        let p1 = Sym2::new((self.a - l2) * w, self.b * w, (self.d - l2) * w);
        let p2 = Sym2::new(1.0 - p1.a, -p1.b, 1.0 - p1.d);
        p1.scale(f1).add(&p2.scale(f2))
    }

    pub fn apply(&self, f: &ScalarFunctionModel) -> Sym2 {
        self.map(|t| f.value(t))
    }

    pub fn abs(&self) -> Sym2 {
        self.map(f64::abs)
    }

    pub fn add(&self, o: &Sym2) -> Sym2 {
        Sym2::new(self.a + o.a, self.b + o.b, self.d + o.d)
    }

    pub fn sub(&self, o: &Sym2) -> Sym2 {
        Sym2::new(self.a - o.a, self.b - o.b, self.d - o.d)
    }

    pub fn scale(&self, c: f64) -> Sym2 {
        Sym2::new(c * self.a, c * self.b, c * self.d)
    }

    pub fn spread(&self) -> f64 {
        let [l1, l2] = self.eigenvalues();
        l1 - l2
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        vec![vec![self.a, self.b], vec![self.b, self.d]]
    }
}

/// Spectra of `(Aᑫ+Bᑫ)/2`, `((A+B)/2)ᑫ` and
/// `(Aᑫ+Bᑫ)/2 − |(A−B)/2|ᑫ − ((λ₁(A)−λ₂(A))ᑫ + (λ₁(B)−λ₂(B))ᑫ)/2·I`.
pub fn power_mean_triple(a: &Sym2, b: &Sym2, q: f64) -> [[f64; 2]; 3] {
    let pow = |m: &Sym2| m.map(|t| t.max(0.0).powf(q));
    let mean = pow(a).add(&pow(b)).scale(0.5);
    let mid = pow(&a.add(b).scale(0.5));
    let half_abs = pow(&a.sub(b).scale(0.5).abs());
    let c = 0.5 * (a.spread().powf(q) + b.spread().powf(q));
    let form = mean.sub(&half_abs).sub(&Sym2::scalar(c));
    [mean.eigenvalues(), mid.eigenvalues(), form.eigenvalues()]
}

/// Spectrum of `−S` for the concave estimate at weight `α`.
pub fn neg_s_spectrum(f: &ScalarFunctionModel, a: &Sym2, b: &Sym2, alpha: f64) -> [f64; 2] {
    let d = a.sub(b).abs();
    let first = a
        .apply(f)
        .sub(&Sym2::scalar(f.value(a.spread())))
        .sub(&d.scale(alpha).apply(f))
        .scale(1.0 - alpha);
    let second = b
        .apply(f)
        .sub(&Sym2::scalar(f.value(b.spread())))
        .sub(&d.scale(1.0 - alpha).apply(f))
        .scale(alpha);
    first.add(&second).scale(-1.0).eigenvalues()
}

/// Negated bound vector of the positive-map estimate on `A ⊕ B` with the
/// convex-combination map, in descending order.
pub fn neg_pair_spectrum(f: &ScalarFunctionModel, a: &Sym2, b: &Sym2, alpha: f64) -> [f64; 2] {
    let [a1, a2] = a.eigenvalues();
    let [b1, b2] = b.eigenvalues();
    let spread = a1.max(b1) - a2.min(b2);
    let [m1, m2] = a
        .apply(f)
        .scale(1.0 - alpha)
        .add(&b.apply(f).scale(alpha))
        .eigenvalues();
    let fs = f.value(spread);
    [fs - m2, fs - m1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_and_functions() {
        let m = Sym2::new(5.0, -1.0, 5.0);
        assert_eq!(m.eigenvalues(), [6.0, 4.0]);
        let sq = m.map(|t| t * t);
        assert!((sq.a - 26.0).abs() < 1e-12 && (sq.b + 10.0).abs() < 1e-12);
        let s = Sym2::scalar(3.0).map(f64::sqrt);
        assert!((s.a - 3f64.sqrt()).abs() < 1e-15 && s.b == 0.0);
        let abs = Sym2::new(1.0, 2.0, 1.0).abs();
        let back = abs.map(|t| t * t);
        assert!((back.a - 5.0).abs() < 1e-12 && (back.b - 4.0).abs() < 1e-12);
    }
}
