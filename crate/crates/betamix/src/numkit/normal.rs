//! Moments of the standard normal distribution.

use crate::error::{Error, Result};
use crate::real::Real;

use super::gamma::log_gamma_unchecked;

/// j-th raw moment of N(0,1): zero for odd j, (j-1)!! for even j.
pub fn normal_moment<S: Real>(j: usize) -> S {
    if j % 2 == 1 {
        return S::zero();
    }
    let mut m = S::one();
    let mut i = j as i64 - 1;
    while i >= 2 {
        m = m * S::of(i as f64);
        i -= 2;
    }
    m
}

/// E|N(0,1)|^beta = 2^{beta/2} Γ((beta+1)/2) / √π for beta > 0.
pub fn normal_abs_moment<S: Real>(beta: S) -> Result<S> {
    if !(beta > S::zero()) || !beta.is_finite() {
        return Err(Error::domain("normal_abs_moment", format!("beta = {beta} must be positive")));
    }
    let half = S::of(0.5);
    let lg = log_gamma_unchecked((beta + S::one()) * half);
    Ok((half * beta * S::LN_2() + lg - half * S::PI().ln()).exp())
}
