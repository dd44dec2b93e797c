//! The Beta kernel in mean/scale coordinates.
//!
//! A Beta(a, b) density is reparametrized through a = α/(1−ε), b = α/ε so
//! that ε is the kernel mean and α a concentration scale. The exact density
//! factors as
//!
//! ```text
//! g_{α,ε}(x) = √α / (√(2π) x(1−x)) · exp(−α K(ε,x)/(ε(1−ε))) · exp(S(α,ε))
//! ```
//!
//! where K is the Bernoulli Kullback-Leibler divergence and S(α,ε) is the
//! Stirling-series tail of the normalizer — an identity, not an expansion:
//! only S carries asymptotics in α. The module exposes the exact density,
//! the truncated Laplace form, the Taylor coefficients of the exponent and
//! the polynomial-times-Gaussian local expansion valid in a window around
//! the mean.

use crate::error::{Error, Result};
use crate::numkit::{log_gamma_unchecked, stirling_tail};
use crate::real::Real;

/// A Beta kernel in (scale α, mean ε) coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaParam<S> {
    alpha: S,
    eps: S,
}

impl<S: Real> BetaParam<S> {
    /// Requires α > 0 and ε ∈ (0, 1).
    pub fn new(alpha: S, eps: S) -> Result<Self> {
        if !(alpha > S::zero()) || !alpha.is_finite() {
            return Err(Error::domain("BetaParam::new", format!("alpha = {alpha} must be positive")));
        }
        if !(eps > S::zero() && eps < S::one()) {
            return Err(Error::domain("BetaParam::new", format!("eps = {eps} must lie in (0,1)")));
        }
        Ok(BetaParam { alpha, eps })
    }

    pub fn alpha(&self) -> S {
        self.alpha
    }

    pub fn eps(&self) -> S {
        self.eps
    }

    /// Shape pair (a, b) = (α/(1−ε), α/ε); the kernel mean a/(a+b) is ε.
    pub fn to_shape(&self) -> (S, S) {
        (self.alpha / (S::one() - self.eps), self.alpha / self.eps)
    }

    /// Exact log density at x ∈ (0, 1).
    pub fn log_pdf(&self, x: S) -> Result<S> {
        if !(x > S::zero() && x < S::one()) {
            return Err(Error::domain("log_pdf", format!("x = {x} must lie in (0,1)")));
        }
        let (a, b) = self.to_shape();
        let ln_norm = log_gamma_unchecked(a + b) - log_gamma_unchecked(a) - log_gamma_unchecked(b);
        Ok((a - S::one()) * x.ln() + (b - S::one()) * (S::one() - x).ln() + ln_norm)
    }

    /// Exact density at x ∈ (0, 1); zero outside by continuity convention.
    pub fn pdf(&self, x: S) -> S {
        if !(x > S::zero() && x < S::one()) {
            return S::zero();
        }
        match self.log_pdf(x) {
            Ok(lp) if lp > S::of(-700.0) => lp.exp(),
            _ => S::zero(),
        }
    }

    /// Exact log of the Stirling bracket S(α,ε):
    /// `log g = log laplace_order0 + exact_log_bracket`, identically in x.
    pub fn exact_log_bracket(&self) -> S {
        let (a, b) = self.to_shape();
        let half = S::of(0.5);
        let two_pi = S::of(2.0) * S::PI();
        log_gamma_unchecked(a + b) - log_gamma_unchecked(a) - log_gamma_unchecked(b)
            + a * self.eps.ln()
            + b * (S::one() - self.eps).ln()
            - half * self.alpha.ln()
            + half * two_pi.ln()
    }

    /// Stirling bracket truncated to `order` tail terms; order 0 gives 1.
    pub fn truncated_log_bracket(&self, order: usize) -> S {
        if order == 0 {
            return S::zero();
        }
        let (a, b) = self.to_shape();
        stirling_tail(a + b, order) - stirling_tail(a, order) - stirling_tail(b, order)
    }
}

/// Kullback-Leibler divergence between Bernoulli(ε) and Bernoulli(x).
pub fn bern_kl<S: Real>(eps: S, x: S) -> S {
    debug_assert!(eps > S::zero() && eps < S::one() && x > S::zero() && x < S::one());
    let one = S::one();
    (eps * (eps / x).ln() + (one - eps) * ((one - eps) / (one - x)).ln()).max(S::zero())
}

/// Laplace (Gaussian-type) form of the kernel density:
/// `√α/(√(2π) x(1−x)) · exp(−α K(ε,x)/(ε(1−ε))) · bracket(order)`.
///
/// The exponent is exact; only the bracket is truncated, so the relative
/// error against [`BetaParam::log_pdf`] is O(α^-(order+1)) uniformly on the
/// interior window. Requires all three Stirling arguments α/ε, α/(1−ε),
/// α/(ε(1−ε)) to exceed one.
pub fn laplace_pdf<S: Real>(p: &BetaParam<S>, x: S, stirling_order: usize) -> Result<S> {
    let (a, b) = p.to_shape();
    if !(a > S::one() && b > S::one()) {
        return Err(Error::domain(
            "laplace_pdf",
            format!(
                "Stirling arguments must exceed 1: alpha/(1-eps) = {a}, alpha/eps = {b}"
            ),
        ));
    }
    if !(x > S::zero() && x < S::one()) {
        return Err(Error::domain("laplace_pdf", format!("x = {x} must lie in (0,1)")));
    }
    let one = S::one();
    let expo = -p.alpha() * bern_kl(p.eps(), x) / (p.eps() * (one - p.eps()));
    let two_pi = S::of(2.0) * S::PI();
    let pref = p.alpha().sqrt() / (two_pi.sqrt() * x * (one - x));
    Ok(pref * (expo + p.truncated_log_bracket(stirling_order)).exp())
}

/// Taylor data of the exponent K(ε,x)/(ε(1−ε)) around ε = x, in the bracket
/// normalization
///
/// ```text
/// K(ε,x)/(ε(1−ε)) = (x−ε)²/(2x²(1−x)²) · [1 + u·(C(x) + Σ_l C_l(x) u^l)],
/// u = (x−ε)/(x(1−x)).
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentSeries<S> {
    /// Expansion point.
    pub x: S,
    /// Quadratic coefficient 1/(2x²(1−x)²).
    pub leading: S,
    /// Cubic coefficient C(x); zero at x = 1/2 by symmetry.
    pub c: S,
    /// Higher coefficients C_l(x), l = 1..order−3 (C_l multiplies u^l inside
    /// the bracket, i.e. the u^{l+3} term of the exponent).
    pub higher: Vec<S>,
}

impl<S: Real> ExponentSeries<S> {
    /// Evaluate the bracketed exponent approximation at mean ε,
    /// (u²/2)(1 + C u + Σ C_l u^{l+1}) in the scaled variable.
    pub fn eval(&self, eps: S) -> S {
        let one = S::one();
        let u = (self.x - eps) / (self.x * (one - self.x));
        let mut bracket = self.c;
        let mut pow = u;
        for &cl in &self.higher {
            bracket = bracket + cl * pow;
            pow = pow * u;
        }
        let half = S::of(0.5);
        half * u * u * (one + u * bracket)
    }
}

/// Highest supported expansion order of [`exponent_taylor`].
pub const EXPONENT_ORDER_MAX: usize = 10;

/// Coefficients c_m of K(ε,x)/(ε(1−ε)) = Σ_{m≥2} c_m u^m in
/// u = (x−ε)/(x(1−x)), assembled analytically through the product rule;
/// K and 1/(ε(1−ε)) have closed-form derivatives of every order.
fn exponent_coeffs<S: Real>(x: S, order: usize) -> Vec<S> {
    let one = S::one();
    let y = one - x;
    let mut k_deriv = vec![S::zero(); order + 1];
    let mut psi_deriv = vec![S::zero(); order + 1];
    let mut fact = vec![S::one(); order + 1];
    for i in 1..=order {
        fact[i] = fact[i - 1] * S::of_usize(i);
    }
    for i in 2..=order {
        let sign = if i % 2 == 0 { S::one() } else { -S::one() };
        k_deriv[i] = fact[i - 2] * (sign / x.powi(i as i32 - 1) + one / y.powi(i as i32 - 1));
    }
    for j in 0..=order {
        let sign = if j % 2 == 0 { S::one() } else { -S::one() };
        psi_deriv[j] = fact[j] * (sign / x.powi(j as i32 + 1) + one / y.powi(j as i32 + 1));
    }

    // c_m = (-1)^m phi^{(m)}(x) x^m (1-x)^m / m!,  phi = K * psi
    let mut coeff = vec![S::zero(); order + 1];
    for m in 2..=order {
        let mut phi_m = S::zero();
        for i in 2..=m {
            let binom = fact[m] / (fact[i] * fact[m - i]);
            phi_m = phi_m + binom * k_deriv[i] * psi_deriv[m - i];
        }
        let sign = if m % 2 == 0 { S::one() } else { -S::one() };
        coeff[m] = sign * phi_m * (x * y).powi(m as i32) / fact[m];
    }
    debug_assert!((coeff[2] - S::of(0.5)).abs() < S::of(1e-10));
    coeff
}

/// The cubic coefficient C(x) of the exponent expansion, analytically; the
/// closed form is (4/3)(1−2x). Valid for any interior x.
pub fn cubic_coeff<S: Real>(x: S) -> S {
    S::of(2.0) * exponent_coeffs(x, 3)[3]
}

/// Analytic Taylor data of the exponent at ε = x; `order` is the highest
/// power of u kept, 3 ≤ order ≤ [`EXPONENT_ORDER_MAX`]. Errors within 1e-4
/// of the boundary, where the high-order coefficient scales overflow the
/// stable range.
pub fn exponent_taylor<S: Real>(x: S, order: usize) -> Result<ExponentSeries<S>> {
    if !(3..=EXPONENT_ORDER_MAX).contains(&order) {
        return Err(Error::contract(
            "exponent_taylor",
            format!("order = {order} must lie in 3..={EXPONENT_ORDER_MAX}"),
        ));
    }
    let margin = S::of(1e-4);
    if !(x > margin && x < S::one() - margin) {
        return Err(Error::domain(
            "exponent_taylor",
            format!("x = {x} is within 1e-4 of the boundary"),
        ));
    }
    let coeff = exponent_coeffs(x, order);
    let one = S::one();
    let y = one - x;
    let two = S::of(2.0);
    let half = S::of(0.5);
    Ok(ExponentSeries {
        x,
        leading: half / (x * x * y * y),
        c: two * coeff[3],
        higher: (4..=order).map(|m| two * coeff[m]).collect(),
    })
}

/// Window constant C₀ of the local expansion; the theory allows any
/// positive constant.
pub const LOCAL_WINDOW_C0: f64 = 1.0;

/// Polynomial-times-Gaussian local form of the kernel density.
///
/// Valid when α|x−ε|³ ≤ C₀ x³(1−x)³; the Gaussian carries the quadratic
/// exponent term, the degree-k2 polynomial the exponentiated cubic-and-up
/// remainder, and the exact Stirling bracket closes the identity up to the
/// series truncations.
pub fn local_expanded_pdf<S: Real>(p: &BetaParam<S>, x: S, k1: usize, k2: usize) -> Result<S> {
    if k1 < 3.max(3 * k2) {
        return Err(Error::contract(
            "local_expanded_pdf",
            format!("k1 = {k1} must be at least max(3, 3*k2) with k2 = {k2}"),
        ));
    }
    if !(x > S::zero() && x < S::one()) {
        return Err(Error::domain("local_expanded_pdf", format!("x = {x} must lie in (0,1)")));
    }
    let one = S::one();
    let y = one - x;
    let diff = x - p.eps();
    let lhs = p.alpha() * diff.abs().powi(3);
    let rhs = S::of(LOCAL_WINDOW_C0) * (x * y).powi(3);
    if lhs > rhs {
        return Err(Error::domain(
            "local_expanded_pdf",
            format!("window violated: alpha|x-eps|^3 = {lhs} > C0 x^3(1-x)^3 = {rhs}"),
        ));
    }
    let series = exponent_taylor(x, k1)?;

    let u = diff / (x * y);
    let z = p.alpha() * diff * diff * series.leading;
    // w = u (C + sum_l C_l u^l): the bracket excess over 1
    let mut tail = series.c;
    let mut pow = u;
    for &cl in &series.higher {
        tail = tail + cl * pow;
        pow = pow * u;
    }
    let w = u * tail;

    // truncated Taylor series of exp(-z w)
    let mut poly = S::one();
    let mut term = S::one();
    for j in 1..=k2 {
        term = term * (-(z * w)) / S::of_usize(j);
        poly = poly + term;
    }

    let two_pi = S::of(2.0) * S::PI();
    let pref = p.alpha().sqrt() / (two_pi.sqrt() * x * y);
    Ok(pref * (-z).exp() * poly * p.exact_log_bracket().exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::integrate_split;

    fn beta(alpha: f64, eps: f64) -> BetaParam<f64> {
        BetaParam::new(alpha, eps).unwrap()
    }

    #[test]
    fn shape_examples() {
        assert_eq!(beta(1.0, 0.5).to_shape(), (2.0, 2.0));
        let (a, b) = beta(2.0, 0.25).to_shape();
        assert!((a - 8.0 / 3.0).abs() < 1e-15);
        assert!((b - 8.0).abs() < 1e-15);
        for &(al, ep) in &[(0.5, 0.1), (3.0, 0.73), (1e3, 0.5), (7.0, 0.999)] {
            let (a, b) = beta(al, ep).to_shape();
            assert!((a / (a + b) - ep).abs() < 1e-15 * ep.max(1e-3));
        }
    }

    #[test]
    fn log_pdf_closed_forms() {
        // alpha=1, eps=0.5 is Beta(2,2): density 6x(1-x), value 1.5 at x=0.5
        let lp = beta(1.0, 0.5).log_pdf(0.5).unwrap();
        assert!((lp - 1.5f64.ln()).abs() < 1e-13);
        // alpha=2, eps=0.5 is Beta(4,4): 140 x^3 (1-x)^3 -> 2.1875 at 0.5
        let lp = beta(2.0, 0.5).log_pdf(0.5).unwrap();
        assert!((lp - 2.1875f64.ln()).abs() < 1e-13);
        assert!(beta(1.0, 0.5).log_pdf(0.0).is_err());
        assert!(beta(1.0, 0.5).log_pdf(1.0).is_err());
    }

    #[test]
    fn pdf_normalizes_and_centers() {
        for &(al, ep) in &[(0.5, 0.3), (1.0, 0.5), (10.0, 0.9), (250.0, 0.12)] {
            let p = beta(al, ep);
            let w = 12.0 * ep * (1.0 - ep) / al.max(4.0).sqrt();
            let pts = [0.0, (ep - w).max(1e-12), (ep + w).min(1.0 - 1e-12), 1.0];
            let mut cuts: Vec<f64> = pts.to_vec();
            cuts.dedup_by(|a, b| *a <= *b);
            cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            cuts.dedup();
            let mass = integrate_split(|x| p.pdf(x), &cuts, 1e-11).unwrap().value;
            assert!((mass - 1.0).abs() < 1e-8, "mass {mass} at alpha={al} eps={ep}");
            let mean = integrate_split(|x| x * p.pdf(x), &cuts, 1e-11).unwrap().value;
            assert!((mean - ep).abs() < 1e-7, "mean {mean} at alpha={al} eps={ep}");
        }
    }

    #[test]
    fn bern_kl_pinned_values() {
        assert_eq!(bern_kl(0.3f64, 0.3), 0.0);
        assert!((bern_kl(0.5f64, 0.25) - 0.14384103622589046).abs() < 1e-15);
        assert!((bern_kl(0.25f64, 0.5) - 0.13081203594113696).abs() < 1e-15);
        // nonnegative, zero only on the diagonal
        for &(e, x) in &[(0.1, 0.9), (0.5, 0.500001), (0.99, 0.01)] {
            assert!(bern_kl(e, x) > 0.0);
        }
    }

    #[test]
    fn laplace_exponent_is_exact() {
        // log_pdf == log(laplace order 0) + exact bracket, identically
        for &(al, ep, x) in &[(5.0, 0.3, 0.7), (100.0, 0.5, 0.52), (1e4, 0.9, 0.88)] {
            let p = beta(al, ep);
            let lhs = p.log_pdf(x).unwrap();
            let rhs = laplace_pdf(&p, x, 0).unwrap().ln() + p.exact_log_bracket();
            assert!((lhs - rhs).abs() < 1e-11 * lhs.abs().max(1.0), "({al},{ep},{x})");
        }
    }

    #[test]
    fn laplace_order0_error_small_at_large_alpha() {
        let p = beta(1e4, 0.5);
        let exact = p.pdf(0.5);
        let approx = laplace_pdf(&p, 0.5, 0).unwrap();
        let rel = ((approx - exact) / exact).abs();
        assert!(rel <= 10.0 / 1e4, "rel = {rel}");
    }

    #[test]
    fn laplace_error_halves_when_alpha_doubles() {
        // order-0 relative error scales like 1/alpha at interior points
        for &alpha in &[100.0f64, 1000.0, 10_000.0] {
            let e1 = laplace_rel_err(alpha, 0.4, 0.43);
            let e2 = laplace_rel_err(2.0 * alpha, 0.4, 0.43);
            let ratio = e1 / e2;
            assert!((ratio - 2.0).abs() <= 0.6, "alpha={alpha}: ratio {ratio}");
        }
    }

    fn laplace_rel_err(alpha: f64, eps: f64, x: f64) -> f64 {
        let p = beta(alpha, eps);
        let exact = p.pdf(x);
        ((laplace_pdf(&p, x, 0).unwrap() - exact) / exact).abs()
    }

    #[test]
    fn laplace_rejects_small_alpha() {
        // alpha/eps = 0.5/0.9 < 1 violates the Stirling precondition
        assert!(laplace_pdf(&beta(0.5, 0.9), 0.5, 0).is_err());
    }

    #[test]
    fn cubic_coefficient_closed_form() {
        // C(x) = (4/3)(1-2x)
        let s = exponent_taylor(0.5f64, 6).unwrap();
        assert!(s.c.abs() < 1e-14);
        let s = exponent_taylor(0.25f64, 6).unwrap();
        assert!((s.c - 2.0 / 3.0).abs() < 1e-12);
        for k in 1..=9 {
            let x = k as f64 / 10.0;
            let s = exponent_taylor(x, 6).unwrap();
            let closed = (4.0 / 3.0) * (1.0 - 2.0 * x);
            assert!((s.c - closed).abs() < 1e-12, "x = {x}: {} vs {closed}", s.c);
        }
    }

    #[test]
    fn series_matches_exact_exponent_nearby() {
        // bracketed series vs exact K/(eps(1-eps)) close to the center
        for &x in &[0.2f64, 0.5, 0.8] {
            let s = exponent_taylor(x, 8).unwrap();
            for &d in &[-0.02, -0.005, 0.005, 0.02] {
                let eps = x + d * x * (1.0 - x);
                let exact = bern_kl(eps, x) / (eps * (1.0 - eps));
                let approx = s.eval(eps);
                assert!(
                    (exact - approx).abs() < 1e-9 * exact.max(1e-12),
                    "x={x} d={d}: {exact} vs {approx}"
                );
            }
        }
    }

    #[test]
    fn coefficients_match_polynomial_fit_of_exact_exponent() {
        // extract C, C_1, C_2 by fitting the exact bracket excess in u
        for &x in &[0.25f64, 0.5, 0.7] {
            let s = exponent_taylor(x, 6).unwrap();
            let us: Vec<f64> = [-1.0f64, -0.75, -0.5, -0.25, 0.25, 0.5, 0.75, 1.0]
                .iter()
                .map(|t| t * 0.04)
                .collect();
            // B(u) = (phi / (u^2/2) - 1) / u = C + C_1 u + C_2 u^2 + ...
            let bs: Vec<f64> = us
                .iter()
                .map(|&u| {
                    let eps = x - u * x * (1.0 - x);
                    let phi = bern_kl(eps, x) / (eps * (1.0 - eps));
                    (phi / (0.5 * u * u) - 1.0) / u
                })
                .collect();
            // least squares on powers 0..3
            let fitted = poly_fit(&us, &bs, 3);
            assert!((fitted[0] - s.c).abs() < 1e-6, "x={x}: C {} vs {}", fitted[0], s.c);
            assert!((fitted[1] - s.higher[0]).abs() < 1e-4, "x={x}: C_1");
            assert!((fitted[2] - s.higher[1]).abs() < 5e-3, "x={x}: C_2");
        }
    }

    fn poly_fit(xs: &[f64], ys: &[f64], deg: usize) -> Vec<f64> {
        // normal equations, tiny systems only
        let n = deg + 1;
        let mut ata = vec![vec![0.0f64; n]; n];
        let mut atb = vec![0.0f64; n];
        for (&x, &y) in xs.iter().zip(ys) {
            let pows: Vec<f64> = (0..n).map(|k| x.powi(k as i32)).collect();
            for i in 0..n {
                for j in 0..n {
                    ata[i][j] += pows[i] * pows[j];
                }
                atb[i] += pows[i] * y;
            }
        }
        // gaussian elimination
        for col in 0..n {
            let piv = (col..n).max_by(|&i, &j| ata[i][col].abs().partial_cmp(&ata[j][col].abs()).unwrap()).unwrap();
            ata.swap(col, piv);
            atb.swap(col, piv);
            for row in (col + 1)..n {
                let f = ata[row][col] / ata[col][col];
                for k in col..n {
                    ata[row][k] -= f * ata[col][k];
                }
                atb[row] -= f * atb[col];
            }
        }
        let mut sol = vec![0.0f64; n];
        for row in (0..n).rev() {
            let mut acc = atb[row];
            for k in (row + 1)..n {
                acc -= ata[row][k] * sol[k];
            }
            sol[row] = acc / ata[row][row];
        }
        sol
    }

    #[test]
    fn exponent_taylor_domain_checks() {
        assert!(exponent_taylor(5e-5f64, 4).is_err());
        assert!(exponent_taylor(0.99995f64, 4).is_err());
        assert!(exponent_taylor(0.5f64, 2).is_err());
        assert!(exponent_taylor(0.5f64, 11).is_err());
    }

    #[test]
    fn local_expansion_at_center_reduces_to_prefactor() {
        let p = beta(400.0, 0.5);
        let v = local_expanded_pdf(&p, 0.5, 3, 0).unwrap();
        let pref = 400.0f64.sqrt() / ((2.0 * std::f64::consts::PI).sqrt() * 0.25)
            * p.exact_log_bracket().exp();
        assert!((v - pref).abs() < 1e-12 * pref);
    }

    #[test]
    fn local_expansion_accuracy_and_monotone_improvement() {
        let p = beta(400.0, 0.5);
        let x = 0.52;
        let exact = p.pdf(x);
        let rel = |k1: usize, k2: usize| {
            (local_expanded_pdf(&p, x, k1, k2).unwrap() - exact).abs() / exact
        };
        assert!(rel(3, 1) <= 1e-2, "rel(3,1) = {}", rel(3, 1));
        let e0 = rel(6, 0);
        let e1 = rel(6, 1);
        let e2 = rel(6, 2);
        assert!(e1 < e0 && e2 < e1, "errors not monotone: {e0} {e1} {e2}");
    }

    #[test]
    fn local_expansion_window_enforced() {
        let p = beta(4000.0, 0.5);
        // |x-eps| = 0.2 busts alpha |x-eps|^3 <= x^3(1-x)^3 at alpha=4000
        match local_expanded_pdf(&p, 0.7, 3, 0) {
            Err(Error::Domain { detail, .. }) => assert!(detail.contains("window")),
            other => panic!("expected window violation, got {other:?}"),
        }
    }
}
