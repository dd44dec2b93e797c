//! Discrete and continuous Beta mixtures, and the distance/divergence
//! toolbox used throughout: L1, Kullback-Leibler, V_p, Hellinger, sup-norm,
//! plus the Kullback-Leibler ball membership test.

use crate::error::{Error, Result};
use crate::kernel::BetaParam;
use crate::numkit::{composite_gl, integrate_split, Quadrature};
use crate::real::Real;

/// Divergence values above this threshold signal an effectively infinite
/// divergence (support violation); returned instead of an error so callers
/// can still rank near-violating pairs.
pub const DIVERGENCE_INFINITE: f64 = 1e6;

/// True when a divergence value carries the effectively-infinite signal.
pub fn is_effectively_infinite<S: Real>(v: S) -> bool {
    !(v < S::of(DIVERGENCE_INFINITE))
}

/// Finite mixing measure P = Σ p_j δ(ε_j) with a shared kernel scale α.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMixture<S> {
    alpha: S,
    atoms: Vec<(S, S)>, // (weight, eps)
}

impl<S: Real> DiscreteMixture<S> {
    /// Validating constructor: weights positive and summing to 1 within
    /// 1e-12, means in (0,1), at least one atom.
    pub fn new(alpha: S, atoms: Vec<(S, S)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::domain("DiscreteMixture::new", "at least one atom required"));
        }
        if !(alpha > S::zero()) || !alpha.is_finite() {
            return Err(Error::domain("DiscreteMixture::new", format!("alpha = {alpha} must be positive")));
        }
        let mut total = S::zero();
        for &(w, e) in &atoms {
            if !(w > S::zero()) {
                return Err(Error::domain("DiscreteMixture::new", format!("weight {w} must be positive")));
            }
            if !(e > S::zero() && e < S::one()) {
                return Err(Error::domain("DiscreteMixture::new", format!("eps {e} must lie in (0,1)")));
            }
            total = total + w;
        }
        if (total - S::one()).abs() > S::of(1e-12) {
            return Err(Error::domain(
                "DiscreteMixture::new",
                format!("weights sum to {total}, expected 1 within 1e-12"),
            ));
        }
        Ok(DiscreteMixture { alpha, atoms })
    }

    /// Construct after rescaling the weights to sum to one.
    pub fn new_normalizing(alpha: S, atoms: Vec<(S, S)>) -> Result<Self> {
        let total: S = atoms.iter().map(|&(w, _)| w).sum();
        if !(total > S::zero()) {
            return Err(Error::domain("DiscreteMixture::new_normalizing", "total weight must be positive"));
        }
        let scaled = atoms.into_iter().map(|(w, e)| (w / total, e)).collect();
        Self::new(alpha, scaled)
    }

    pub fn alpha(&self) -> S {
        self.alpha
    }

    pub fn atoms(&self) -> &[(S, S)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Mixture log density at x via log-sum-exp over the components.
    pub fn log_pdf(&self, x: S) -> Result<S> {
        if !(x > S::zero() && x < S::one()) {
            return Err(Error::domain("mix_pdf", format!("x = {x} must lie in (0,1)")));
        }
        Ok(MixtureEval::new(self).log_pdf(x))
    }

    /// Mixture density at x.
    pub fn pdf(&self, x: S) -> Result<S> {
        Ok(self.log_pdf(x)?.exp())
    }

    /// Flat text record: `alpha`, then `k`, then k lines `weight eps`,
    /// decimals carrying 17 significant digits (round-trip exact for f64).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{:.16e}\n", self.alpha.as_f64()));
        out.push_str(&format!("{}\n", self.atoms.len()));
        for &(w, e) in &self.atoms {
            out.push_str(&format!("{:.16e} {:.16e}\n", w.as_f64(), e.as_f64()));
        }
        out
    }

    /// Parse the [`Self::to_text`] format.
    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |d: &str| Error::Parse { what: "DiscreteMixture".into(), detail: d.into() };
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let alpha: f64 = lines
            .next()
            .ok_or_else(|| bad("missing alpha line"))?
            .trim()
            .parse()
            .map_err(|e| bad(&format!("alpha: {e}")))?;
        let k: usize = lines
            .next()
            .ok_or_else(|| bad("missing count line"))?
            .trim()
            .parse()
            .map_err(|e| bad(&format!("count: {e}")))?;
        let mut atoms = Vec::with_capacity(k);
        for i in 0..k {
            let line = lines.next().ok_or_else(|| bad(&format!("missing atom line {i}")))?;
            let mut parts = line.split_whitespace();
            let w: f64 = parts
                .next()
                .ok_or_else(|| bad("missing weight"))?
                .parse()
                .map_err(|e| bad(&format!("weight: {e}")))?;
            let e: f64 = parts
                .next()
                .ok_or_else(|| bad("missing eps"))?
                .parse()
                .map_err(|e| bad(&format!("eps: {e}")))?;
            atoms.push((S::of(w), S::of(e)));
        }
        DiscreteMixture::new(S::of(alpha), atoms)
    }
}

/// Precomputed per-component terms for repeated mixture evaluation:
/// log g_{α,ε_j}(x) = (a_j−1) ln x + (b_j−1) ln(1−x) + const_j.
#[derive(Debug, Clone)]
pub struct MixtureEval<S> {
    terms: Vec<(S, S, S)>,
}

impl<S: Real> MixtureEval<S> {
    pub fn new(m: &DiscreteMixture<S>) -> Self {
        let terms = m
            .atoms()
            .iter()
            .map(|&(w, e)| {
                let p = BetaParam::new(m.alpha(), e).expect("mixture invariants hold");
                let (a, b) = p.to_shape();
                let ln_norm = crate::numkit::log_gamma_unchecked(a + b)
                    - crate::numkit::log_gamma_unchecked(a)
                    - crate::numkit::log_gamma_unchecked(b);
                (a - S::one(), b - S::one(), ln_norm + w.ln())
            })
            .collect();
        MixtureEval { terms }
    }

    /// Log density at x ∈ (0,1), stabilized log-sum-exp.
    pub fn log_pdf(&self, x: S) -> S {
        let lx = x.ln();
        let l1x = (S::one() - x).ln();
        let mut max = S::neg_infinity();
        let mut vals = Vec::with_capacity(self.terms.len());
        for &(am1, bm1, c) in &self.terms {
            let v = am1 * lx + bm1 * l1x + c;
            if v > max {
                max = v;
            }
            vals.push(v);
        }
        if !max.is_finite() {
            return S::neg_infinity();
        }
        let sum: S = vals.iter().map(|&v| (v - max).exp()).sum();
        max + sum.ln()
    }

    pub fn pdf(&self, x: S) -> S {
        if !(x > S::zero() && x < S::one()) {
            return S::zero();
        }
        let lp = self.log_pdf(x);
        if lp > S::of(-700.0) {
            lp.exp()
        } else {
            S::zero()
        }
    }
}

/// Default quadrature tolerance of the continuous mixture evaluator.
pub const CONT_MIX_TOL: f64 = 1e-9;

/// Breakpoints isolating the kernel spike of `ε ↦ g_{α,ε}(x)` around ε = x.
pub(crate) fn spike_cuts<S: Real>(alpha: S, x: S) -> Vec<S> {
    let one = S::one();
    let w = S::of(14.0) * x * (one - x) * (S::of(1.0).max(alpha.ln()) / alpha).sqrt();
    let mut cuts = vec![S::zero(), x - w, x - w * S::of(0.25), x + w * S::of(0.25), x + w, one];
    cuts.retain(|&c| c >= S::zero() && c <= one);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    if cuts.len() < 2 {
        vec![S::zero(), one]
    } else {
        cuts
    }
}

/// Continuous mixture g_{α,f}(x) = ∫₀¹ f(ε) g_{α,ε}(x) dε at the given
/// quadrature tolerance.
pub fn cont_mix_pdf_tol<S: Real, F: Fn(S) -> S>(alpha: S, f: F, x: S, tol: S) -> Result<S> {
    if !(x > S::zero() && x < S::one()) {
        return Err(Error::domain("cont_mix_pdf", format!("x = {x} must lie in (0,1)")));
    }
    let integrand = move |e: S| {
        if e <= S::zero() || e >= S::one() {
            return S::zero();
        }
        let fe = f(e);
        if fe == S::zero() {
            return S::zero();
        }
        let p = BetaParam::new(alpha, e).expect("interior eps");
        fe * p.pdf(x)
    };
    let cuts = spike_cuts(alpha, x);
    let q = integrate_split(integrand, &cuts, tol)?;
    Ok(q.value.max(S::zero()))
}

/// Continuous mixture at the default tolerance [`CONT_MIX_TOL`].
pub fn cont_mix_pdf<S: Real, F: Fn(S) -> S>(alpha: S, f: F, x: S) -> Result<S> {
    cont_mix_pdf_tol(alpha, f, x, S::of(CONT_MIX_TOL))
}

/// Continuous mixture by a fixed layered rule: dense Gauss-Legendre panels
/// across the kernel spike at ε ≈ x, geometrically widening panels through
/// the tails. Deterministic cost and no error-estimate pathologies; the
/// layout is matched to the kernel's known spike width x(1−x)/√α, which
/// the accuracy tests pin against the adaptive path.
pub fn cont_mix_pdf_fixed<S: Real, F: Fn(S) -> S>(alpha: S, f: F, x: S) -> S {
    let one = S::one();
    debug_assert!(x > S::zero() && x < one);
    let integrand = move |e: S| {
        if e <= S::zero() || e >= one {
            return S::zero();
        }
        let fe = f(e);
        if fe == S::zero() {
            return S::zero();
        }
        let p = BetaParam::new(alpha, e).expect("interior eps");
        fe * p.pdf(x)
    };
    let w = S::of(10.0) * x * (one - x) * (one.max(alpha.ln()) / alpha).sqrt();
    let lo = (x - w).max(S::zero());
    let hi = (x + w).min(one);
    let mut cuts: Vec<S> = Vec::with_capacity(48);
    // left tail: doubling panels from lo down to 0
    let mut tail_cuts = Vec::new();
    let mut width = w;
    let mut edge = lo;
    while edge > S::zero() && tail_cuts.len() < 60 {
        edge = (edge - width).max(S::zero());
        tail_cuts.push(edge);
        width = width * S::of(2.0);
    }
    cuts.extend(tail_cuts.iter().rev());
    // spike core: 16 uniform panels
    for i in 0..=16usize {
        cuts.push(lo + (hi - lo) * S::of_usize(i) / S::of(16.0));
    }
    // right tail: doubling panels from hi up to 1
    width = w;
    edge = hi;
    while edge < one && cuts.len() < 160 {
        edge = (edge + width).min(one);
        cuts.push(edge);
        width = width * S::of(2.0);
    }
    cuts.retain(|c| *c >= S::zero() && *c <= one);
    cuts.dedup();
    composite_gl(integrand, &cuts, 24).max(S::zero())
}

/// Default seed mesh for the distance integrals: Chebyshev-spaced points
/// cluster where Beta mixtures vary fastest (near the endpoints).
pub fn chebyshev_grid<S: Real>(n: usize) -> Vec<S> {
    let half = S::of(0.5);
    let nf = S::of_usize(n - 1);
    let mut pts: Vec<S> = (0..n)
        .map(|j| half - half * (S::PI() * S::of_usize(j) / nf).cos())
        .collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts
}

fn seed_mesh<S: Real>(extra: &[S]) -> Vec<S> {
    let mut pts: Vec<S> = chebyshev_grid(33);
    pts.extend_from_slice(extra);
    pts.retain(|&p| p >= S::zero() && p <= S::one());
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    pts
}

const DIST_TOL: f64 = 1e-10;

fn dist_quad<S: Real, F: Fn(S) -> S>(integrand: F, extra_breaks: &[S]) -> Result<Quadrature<S>> {
    integrate_split(integrand, &seed_mesh(extra_breaks), S::of(DIST_TOL))
}

/// L1 distance ∫|f−g| ∈ [0, 2] between densities on (0,1).
pub fn l1<S: Real>(f: impl Fn(S) -> S, g: impl Fn(S) -> S) -> Result<S> {
    l1_with_breaks(f, g, &[])
}

/// L1 distance with extra quadrature breakpoints at known feature locations.
pub fn l1_with_breaks<S: Real>(
    f: impl Fn(S) -> S,
    g: impl Fn(S) -> S,
    breaks: &[S],
) -> Result<S> {
    Ok(dist_quad(|x| (f(x) - g(x)).abs(), breaks)?.value.max(S::zero()))
}

/// Hellinger distance sqrt(∫ (√f − √g)²) ∈ [0, √2].
pub fn hellinger<S: Real>(f: impl Fn(S) -> S, g: impl Fn(S) -> S) -> Result<S> {
    let v = dist_quad(
        |x| {
            let d = f(x).max(S::zero()).sqrt() - g(x).max(S::zero()).sqrt();
            d * d
        },
        &[],
    )?
    .value;
    Ok(v.max(S::zero()).sqrt())
}

fn log_ratio_clamped<S: Real>(fx: S, gx: S, violated: &std::cell::Cell<bool>) -> S {
    let floor = S::of(1e-300);
    if gx < S::of(1e-250) && fx > S::of(1e-12) {
        violated.set(true);
    }
    (fx.max(floor) / gx.max(floor)).ln()
}

fn divergence_result<S: Real>(
    out: Result<Quadrature<S>>,
    violated: bool,
) -> S {
    let value = match out {
        Ok(q) => q.value.max(S::zero()),
        Err(Error::Accuracy { best, .. }) => S::of(best.abs()),
        Err(_) => S::of(DIVERGENCE_INFINITE) * S::of(10.0),
    };
    if violated {
        value.max(S::of(DIVERGENCE_INFINITE) * S::of(10.0))
    } else {
        value
    }
}

/// Kullback-Leibler divergence ∫ f log(f/g).
///
/// A support violation (g vanishing against f on the quadrature mesh)
/// yields a value above [`DIVERGENCE_INFINITE`] — an effectively infinite
/// signal, not an error — and quadrature breakdown degrades to the same
/// signal, so near-violating pairs still rank.
pub fn kl<S: Real>(f: impl Fn(S) -> S, g: impl Fn(S) -> S) -> S {
    kl_with_breaks(f, g, &[])
}

/// KL with extra quadrature breakpoints.
pub fn kl_with_breaks<S: Real>(f: impl Fn(S) -> S, g: impl Fn(S) -> S, breaks: &[S]) -> S {
    let violated = std::cell::Cell::new(false);
    let integrand = |x: S| {
        let fx = f(x);
        if fx <= S::zero() {
            return S::zero();
        }
        fx * log_ratio_clamped(fx, g(x), &violated)
    };
    let out = dist_quad(integrand, breaks);
    divergence_result(out, violated.get())
}

/// KL through the nonnegative integrand f·(δ − log(1+δ)), δ = (g−f)/f.
///
/// Identical to [`kl`] whenever g integrates to one (the linear δ term then
/// integrates to zero exactly), but free of the signed-integrand
/// cancellation that floors the direct form near 1e-12; resolves
/// divergences down to the 1e-18 scale. Requires g > 0 against f.
pub fn kl_of_normalized<S: Real>(
    f: impl Fn(S) -> S,
    g: impl Fn(S) -> S,
    breaks: &[S],
) -> S {
    let violated = std::cell::Cell::new(false);
    let integrand = |x: S| {
        let fx = f(x);
        if fx <= S::zero() {
            return S::zero();
        }
        let gx = g(x);
        if gx <= S::zero() {
            violated.set(true);
            return fx * S::of(700.0);
        }
        let delta = (gx - fx) / fx;
        fx * delta_minus_log1p(delta)
    };
    let out = dist_quad(integrand, breaks);
    divergence_result(out, violated.get())
}

/// δ − ln(1+δ), series-evaluated for small δ where the direct form cancels.
fn delta_minus_log1p<S: Real>(d: S) -> S {
    if d.abs() < S::of(1e-2) {
        // δ²/2 − δ³/3 + δ⁴/4 − δ⁵/5; next term below 1e-13 relative
        let d2 = d * d;
        d2 * (S::of(0.5) - d * (S::of(1.0 / 3.0) - d * (S::of(0.25) - d * S::of(0.2))))
    } else {
        d - d.ln_1p()
    }
}

/// V_p divergence ∫ f |log(f/g)|^p for p > 1, same infinite-signal contract
/// as [`kl`].
pub fn v_p<S: Real>(f: impl Fn(S) -> S, g: impl Fn(S) -> S, p: S) -> S {
    v_p_with_breaks(f, g, p, &[])
}

/// V_p with extra quadrature breakpoints.
pub fn v_p_with_breaks<S: Real>(
    f: impl Fn(S) -> S,
    g: impl Fn(S) -> S,
    p: S,
    breaks: &[S],
) -> S {
    debug_assert!(p > S::one());
    let violated = std::cell::Cell::new(false);
    let integrand = |x: S| {
        let fx = f(x);
        if fx <= S::zero() {
            return S::zero();
        }
        fx * log_ratio_clamped(fx, g(x), &violated).abs().powf(p)
    };
    let out = dist_quad(integrand, breaks);
    divergence_result(out, violated.get())
}

/// Sup distance max_grid |f − g| over an explicit evaluation grid.
pub fn sup_dist<S: Real>(f: impl Fn(S) -> S, g: impl Fn(S) -> S, grid: &[S]) -> S {
    grid.iter()
        .map(|&x| (f(x) - g(x)).abs())
        .fold(S::zero(), S::max)
}

/// Default sup-norm grid: 4097 Chebyshev-spaced points on (0,1).
pub fn default_sup_grid<S: Real>() -> Vec<S> {
    let mut g = chebyshev_grid::<S>(4099);
    g.retain(|&x| x > S::zero() && x < S::one());
    g
}

/// Membership in the Kullback-Leibler ball
/// B*(f0, τ, p) = { f : KL(f0,f) ≤ τ², V_p(f0,f) ≤ τ^p }, p ≥ 2.
pub fn in_kl_ball<S: Real>(
    f0: impl Fn(S) -> S + Copy,
    f: impl Fn(S) -> S + Copy,
    tau: S,
    p: S,
) -> Result<bool> {
    if !(tau > S::zero()) && !(tau == S::zero()) {
        return Err(Error::domain("in_kl_ball", "tau must be nonnegative"));
    }
    if !(p >= S::of(2.0)) {
        return Err(Error::domain("in_kl_ball", "p must be at least 2"));
    }
    let d_kl = kl(f0, f);
    if d_kl > tau * tau {
        return Ok(false);
    }
    Ok(v_p(f0, f, p) <= tau.powf(p))
}

/// A density on (0,1) with derivative evaluators, Hölder metadata, boundary
/// orders and an exact sampler through the quantile function.
pub trait TargetDensity<S: Real>: Send + Sync {
    /// Density value; zero outside (0,1).
    fn pdf(&self, x: S) -> S;

    /// Highest derivative order available from [`Self::deriv`].
    fn deriv_order(&self) -> usize;

    /// j-th derivative of the density, j ≤ `deriv_order`; j = 0 is the
    /// density itself.
    fn deriv(&self, j: usize, x: S) -> S;

    /// Hölder regularity (β, L).
    fn holder(&self) -> (S, S);

    /// Boundary orders (k0, k1): the first derivative orders that do not
    /// vanish at 0 and at 1.
    fn boundary_orders(&self) -> (usize, usize);

    /// Cumulative distribution function.
    fn cdf(&self, x: S) -> S;

    /// Quantile by monotone bisection of the CDF to absolute accuracy 1e-12.
    fn quantile(&self, u: S) -> S {
        let mut lo = S::zero();
        let mut hi = S::one();
        let tol = S::of(1e-12);
        while hi - lo > tol {
            let mid = S::of(0.5) * (lo + hi);
            if self.cdf(mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        S::of(0.5) * (lo + hi)
    }
}

/// Numeric validation of a [`TargetDensity`]: unit mass within 1e-8 and the
/// boundary-order flags consistent at offset 1e-6 from each endpoint (the
/// first non-vanishing derivative is positive at 0, and carries sign
/// (−1)^k1 at 1, as a positive density with those contact orders must).
pub fn validate_target<S: Real>(f: &dyn TargetDensity<S>) -> Result<()> {
    let mass = integrate_split(|x| f.pdf(x), &seed_mesh::<S>(&[]), S::of(1e-10))?.value;
    if (mass - S::one()).abs() > S::of(1e-8) {
        return Err(Error::domain("validate_target", format!("density mass {mass} is not 1")));
    }
    let (k0, k1) = f.boundary_orders();
    let off = S::of(1e-6);
    if k0 > f.deriv_order() || k1 > f.deriv_order() {
        return Err(Error::contract("validate_target", "boundary order exceeds available derivatives"));
    }
    let left = f.deriv(k0, off);
    if !(left > S::zero()) {
        return Err(Error::domain(
            "validate_target",
            format!("deriv({k0}) near 0 is {left}, expected positive"),
        ));
    }
    let right = f.deriv(k1, S::one() - off);
    let signed = if k1 % 2 == 0 { right } else { -right };
    if !(signed > S::zero()) {
        return Err(Error::domain(
            "validate_target",
            format!("deriv({k1}) near 1 is {right}, expected sign (-1)^{k1}"),
        ));
    }
    Ok(())
}
