//! Beta-mixture density estimation on [0,1] in the mean/scale
//! parametrization.
//!
//! A Beta(a, b) kernel is rewritten with a = α/(1−ε), b = α/ε so that
//! ε ∈ (0,1) is the kernel mean and α > 0 a concentration scale; large α
//! localizes the kernel near ε. The crate provides:
//!
//! - exact kernel densities and the local Gaussian-type expansions that
//!   govern their large-α behaviour ([`kernel`]);
//! - discrete and continuous mixtures with an L1 / Kullback-Leibler /
//!   V_p / Hellinger distance toolbox ([`mixture`]);
//! - the constructive approximation schemes: mixing-density correction
//!   for smooth targets and moment-matched discretization on a geometric
//!   grid ([`approx`]);
//! - two nonparametric priors (adaptive finite mixture, Dirichlet
//!   process) with exact samplers and posterior contraction rate
//!   formulas ([`prior`]);
//! - reversible-jump and stick-breaking MCMC samplers with posterior
//!   summaries ([`sampler`]);
//! - a density corpus and benchmark harness that measures empirical
//!   convergence rates at desk scale ([`harness`]).
//!
//! The numerical core is generic over the scalar type through [`Real`];
//! the aliases at the crate root fix `f64`, which every default tolerance
//! assumes.

pub mod error;
pub mod numkit;
pub mod real;

pub mod kernel;
pub mod mixture;

pub mod approx;
pub mod prior;
pub mod sampler;

pub mod harness;

pub use error::{Error, Result};
pub use real::Real;

/// Beta kernel in mean/scale coordinates over `f64`.
pub type BetaParam = kernel::BetaParam<f64>;
/// Finite mixing measure with shared scale over `f64`.
pub type DiscreteMixture = mixture::DiscreteMixture<f64>;
/// Quadrature rule over `f64`.
pub type QuadratureRule = numkit::QuadratureRule<f64>;
/// Raw-moment vector over `f64`.
pub type MomentVector = numkit::MomentVector<f64>;
/// Geometric support grid over `f64`.
pub type SupportGrid = approx::SupportGrid<f64>;
