//! Shared numerical substrate: special functions, adaptive quadrature,
//! normal moments, Gauss rules from raw moments, Chebyshev interpolation
//! and log-log slope fitting.
//!
//! Everything here is a pure function of its inputs and safe to call from
//! multiple threads concurrently.

mod cheb;
mod fit;
mod gamma;
mod gauss;
mod normal;
mod quad;

pub use cheb::ChebInterp;
pub use fit::{fit_line, fit_loglog, LineFit};
pub use gamma::{log_gamma, stirling_tail, STIRLING_TAIL_MAX};
pub use gauss::{gauss_from_moments, uniform_moments, MomentVector, QuadratureRule, MAX_NODES};
pub use normal::{normal_abs_moment, normal_moment};
pub use quad::{composite_gl, gauss_legendre_unit, integrate, integrate_split, tanh_sinh, Quadrature};

pub(crate) use gamma::log_gamma_unchecked;
