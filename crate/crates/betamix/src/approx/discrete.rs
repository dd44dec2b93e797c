//! Discretization of a continuous mixing density into finitely many atoms.
//!
//! A geometric grid with ratio 1 + M√(log α / α) covers [ε₀, 1−ε₀] with
//! ε₀ = α^{-t₀}; on each cell the renormalized restriction of the mixing
//! density is replaced by its moment-matched Gauss rule, and the tail mass
//! below ε₀ (above 1−ε₀) collapses to a single atom at ε₀ (at 1−ε₀).
//! Weight flooring then lifts every atom weight to at least ≈ α^{-A}.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mixture::{kl_with_breaks, v_p_with_breaks, DiscreteMixture, MixtureEval, TargetDensity};
use crate::numkit::{gauss_from_moments, integrate, integrate_split, MomentVector};
use crate::real::Real;

use super::continuous::build_f1;

/// Default grid depth exponent ε₀ = α^{-t₀}.
pub const DEFAULT_T0: f64 = 1.0;
/// Default grid ratio constant M.
pub const DEFAULT_M: f64 = 1.0;
/// Default weight-floor exponent A (floor v = α^{-A}).
pub const DEFAULT_FLOOR_A: f64 = 8.0;
/// Default nodes per cell.
pub const DEFAULT_NODES_PER_CELL: usize = 6;

/// Geometric support grid over (0,1), mirrored around 1/2.
#[derive(Debug, Clone)]
pub struct SupportGrid<S> {
    eps0: S,
    ratio: S,
    j_formula: usize,
    breakpoints: Vec<S>,
}

impl<S: Real> SupportGrid<S> {
    pub fn eps0(&self) -> S {
        self.eps0
    }

    /// The geometric ratio 1 + M√(log α / α).
    pub fn ratio(&self) -> S {
        self.ratio
    }

    /// The cell-count formula value
    /// J = ⌊(t₀ log α + 2 log log α)/log ratio⌋ + 1.
    pub fn j_formula(&self) -> usize {
        self.j_formula
    }

    /// Increasing breakpoints spanning [ε₀, 1−ε₀].
    pub fn breakpoints(&self) -> &[S] {
        &self.breakpoints
    }

    pub fn cell_count(&self) -> usize {
        self.breakpoints.len() - 1
    }
}

/// Build the geometric grid: breakpoints ε_j = ε₀ ratioʲ while below 1/2,
/// mirrored into (1/2, 1−ε₀]. Requires α ≥ e so log α ≥ 1.
pub fn support_grid<S: Real>(alpha: S, t0: S, m_const: S) -> Result<SupportGrid<S>> {
    if !(alpha >= S::E()) {
        return Err(Error::domain("support_grid", format!("alpha = {alpha} must be at least e")));
    }
    if !(t0 > S::zero()) || !(m_const > S::zero()) {
        return Err(Error::domain("support_grid", "t0 and M must be positive"));
    }
    let log_alpha = alpha.ln();
    let ratio = S::one() + m_const * (log_alpha / alpha).sqrt();
    let j_real = ((t0 * log_alpha + S::of(2.0) * log_alpha.ln()) / ratio.ln()).floor();
    let j_formula = j_real.as_f64() as i64 + 1;
    if j_formula <= 0 || j_formula > 1_000_000 {
        return Err(Error::Budget {
            op: "support_grid",
            detail: format!("cell formula J = {j_formula} outside (0, 1e6]"),
        });
    }
    let eps0 = alpha.powf(-t0);
    if !(eps0 > S::zero() && eps0 < S::of(0.5)) {
        return Err(Error::domain("support_grid", format!("eps0 = {eps0} must lie in (0, 1/2)")));
    }

    let half = S::of(0.5);
    let mut left = vec![eps0];
    loop {
        let next = *left.last().unwrap() * ratio;
        if next >= half {
            break;
        }
        if left.len() > 2_000_000 {
            return Err(Error::Budget {
                op: "support_grid",
                detail: "breakpoint budget exceeded".into(),
            });
        }
        left.push(next);
    }
    let mut breakpoints = left.clone();
    breakpoints.push(half);
    for &b in left.iter().rev() {
        breakpoints.push(S::one() - b);
    }
    breakpoints.dedup();
    if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::domain("support_grid", "breakpoints failed to be strictly increasing"));
    }
    Ok(SupportGrid { eps0, ratio, j_formula: j_formula as usize, breakpoints })
}

/// Diagnostics of a discretization run.
#[derive(Debug, Clone, Default)]
pub struct DiscretizeInfo {
    /// Cells skipped for carrying mass below 1e-15.
    pub skipped_cells: usize,
    /// Cells where the moment reduction degenerated and a single node at
    /// the conditional mean was used instead.
    pub degenerate_cells: usize,
    /// Raw piece-mass total before the final normalization.
    pub raw_total: f64,
}

const CELL_SKIP_MASS: f64 = 1e-15;
const CELL_QUAD_TOL: f64 = 1e-13;

/// Moment-matched discretization of a mixing density on the grid. See the
/// module docs; `nodes_per_cell` is capped by the moment-rule limit.
pub fn discretize<S: Real>(
    alpha: S,
    f: impl Fn(S) -> S,
    grid: &SupportGrid<S>,
    nodes_per_cell: usize,
) -> Result<DiscreteMixture<S>> {
    discretize_with_info(alpha, f, grid, nodes_per_cell).map(|(m, _)| m)
}

/// [`discretize`] with run diagnostics.
pub fn discretize_with_info<S: Real>(
    alpha: S,
    f: impl Fn(S) -> S,
    grid: &SupportGrid<S>,
    nodes_per_cell: usize,
) -> Result<(DiscreteMixture<S>, DiscretizeInfo)> {
    if nodes_per_cell == 0 || nodes_per_cell > crate::numkit::MAX_NODES {
        return Err(Error::contract(
            "discretize",
            format!("nodes_per_cell = {nodes_per_cell} outside 1..={}", crate::numkit::MAX_NODES),
        ));
    }
    let tol = S::of(CELL_QUAD_TOL);
    let mut info = DiscretizeInfo::default();
    let mut atoms: Vec<(S, S)> = Vec::new();

    // tail atoms at eps0 and 1-eps0 carrying the uncovered mass
    let eps0 = grid.eps0();
    let left_tail = integrate(|e| f(e), S::zero(), eps0, tol)?.value.max(S::zero());
    let right_tail = integrate(|e| f(e), S::one() - eps0, S::one(), tol)?
        .value
        .max(S::zero());
    if left_tail > S::zero() {
        atoms.push((left_tail, eps0));
    }
    if right_tail > S::zero() {
        atoms.push((right_tail, S::one() - eps0));
    }

    for w in grid.breakpoints().windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mass = integrate(|e| f(e), lo, hi, tol)?.value;
        if !(mass > S::of(CELL_SKIP_MASS)) {
            info.skipped_cells += 1;
            continue;
        }
        // standardized moments over t in [-1,1]
        let center = S::of(0.5) * (lo + hi);
        let halfw = S::of(0.5) * (hi - lo);
        let count = 2 * nodes_per_cell;
        let mut moments = Vec::with_capacity(count);
        for l in 0..count {
            let v = integrate(
                |e| {
                    let t = (e - center) / halfw;
                    f(e) * t.powi(l as i32)
                },
                lo,
                hi,
                tol,
            )?
            .value;
            moments.push(v / mass);
        }
        let mv = MomentVector::new({
            let mut m = moments.clone();
            m[0] = S::one();
            m
        })?;
        match gauss_from_moments(&mv, nodes_per_cell) {
            Ok(rule) => {
                for (&t, &wt) in rule.nodes.iter().zip(&rule.weights) {
                    let node = (center + halfw * t).max(lo).min(hi);
                    atoms.push((mass * wt, node));
                }
            }
            Err(Error::Degenerate { .. }) => {
                info.degenerate_cells += 1;
                let mean = center + halfw * moments[1];
                atoms.push((mass, mean.max(lo).min(hi)));
            }
            Err(e) => return Err(e),
        }
    }

    let raw_total: S = atoms.iter().map(|&(w, _)| w).sum();
    info.raw_total = raw_total.as_f64();
    let mixture = DiscreteMixture::new_normalizing(alpha, atoms)?;
    Ok((mixture, info))
}

/// Weight flooring: with v = α^{-A}, lift every weight p_j ≤ v to c·v and
/// rescale the rest to c·p_j, c restoring total mass one. Mixtures whose
/// weights already exceed v come back unchanged (c = 1).
pub fn floor_weights<S: Real>(m: &DiscreteMixture<S>, a_exponent: S) -> Result<DiscreteMixture<S>> {
    if !(a_exponent > S::zero()) {
        return Err(Error::domain("floor_weights", "A must be positive"));
    }
    let v = m.alpha().powf(-a_exponent);
    let mut off_total = S::zero();
    let mut floored = 0usize;
    for &(w, _) in m.atoms() {
        if w <= v {
            floored += 1;
        } else {
            off_total = off_total + w;
        }
    }
    if floored == 0 {
        return Ok(m.clone());
    }
    let c = S::one() / (off_total + S::of_usize(floored) * v);
    let atoms = m
        .atoms()
        .iter()
        .map(|&(w, e)| if w <= v { (c * v, e) } else { (c * w, e) })
        .collect();
    DiscreteMixture::new_normalizing(m.alpha(), atoms)
}

/// Row of a discrete-approximation divergence report.
#[derive(Debug, Clone, Copy)]
pub struct DiscreteKlRow<S> {
    pub alpha: S,
    pub kl: S,
    pub vp: S,
    pub atoms: usize,
    /// Atom budget N₀ √α (log α)^{3/2} with N₀ = 3.
    pub atom_budget: S,
}

/// Atom budget N₀ √α (log α)^{3/2}.
pub fn atom_budget<S: Real>(alpha: S, n0: S) -> S {
    n0 * alpha.sqrt() * alpha.ln().powf(S::of(1.5))
}

/// Full pipeline per α: correct the target's mixing density, discretize it,
/// floor the weights and measure KL / V₂ divergences of the target against
/// the finite mixture.
pub fn discrete_kl_report<S: Real>(
    f0: Arc<dyn TargetDensity<S>>,
    alpha_grid: &[S],
    t0: S,
    m_const: S,
    nodes_per_cell: usize,
    floor_a: S,
) -> Result<Vec<DiscreteKlRow<S>>> {
    crate::mixture::validate_target(f0.as_ref())?;
    let mut rows = Vec::with_capacity(alpha_grid.len());
    for &alpha in alpha_grid {
        let ledger = build_f1(Arc::clone(&f0), alpha)?;
        let grid = support_grid(alpha, t0, m_const)?;
        let d = ledger.final_density();
        let mixture = discretize(alpha, |e| d.pdf(e), &grid, nodes_per_cell)?;
        let mixture = floor_weights(&mixture, floor_a)?;
        let ev = MixtureEval::new(&mixture);
        let breaks: Vec<S> = mixture.atoms().iter().map(|&(_, e)| e).take(64).collect();
        let kl = kl_with_breaks(|x| f0.pdf(x), |x| ev.pdf(x), &breaks);
        let vp = v_p_with_breaks(|x| f0.pdf(x), |x| ev.pdf(x), S::of(2.0), &breaks);
        rows.push(DiscreteKlRow {
            alpha,
            kl,
            vp,
            atoms: mixture.len(),
            atom_budget: atom_budget(alpha, S::of(3.0)),
        });
    }
    Ok(rows)
}

/// L1 distance between a continuous mixture (supplied as a pointwise
/// evaluator) and the discrete mixture g_{α,P}, with quadrature panels
/// forced at the grid breakpoints.
pub fn mixture_l1_distance<S: Real>(
    cont: impl Fn(S) -> S,
    mixture: &DiscreteMixture<S>,
    grid: &SupportGrid<S>,
) -> Result<S> {
    let ev = MixtureEval::new(mixture);
    let mut cuts: Vec<S> = vec![S::zero()];
    cuts.extend_from_slice(grid.breakpoints());
    cuts.push(S::one());
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    let integrand = |x: S| (cont(x) - ev.pdf(x)).abs();
    Ok(integrate_split(integrand, &cuts, S::of(1e-8))?.value)
}
