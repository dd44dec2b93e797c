//! Least-squares line fits on log-log scales.

use crate::error::{Error, Result};
use crate::real::Real;

/// Slope, intercept and slope standard error of an ordinary least-squares
/// line fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit<S> {
    pub slope: S,
    pub intercept: S,
    pub slope_stderr: S,
}

/// Fit y = intercept + slope * x by least squares.
pub fn fit_line<S: Real>(xs: &[S], ys: &[S]) -> Result<LineFit<S>> {
    let n = xs.len();
    if n != ys.len() || n < 2 {
        return Err(Error::contract("fit_line", "need at least two matched points"));
    }
    let nf = S::of_usize(n);
    let mx = xs.iter().copied().sum::<S>() / nf;
    let my = ys.iter().copied().sum::<S>() / nf;
    let mut sxx = S::zero();
    let mut sxy = S::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        sxx = sxx + (x - mx) * (x - mx);
        sxy = sxy + (x - mx) * (y - my);
    }
    if !(sxx > S::zero()) {
        return Err(Error::contract("fit_line", "xs are all identical"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let stderr = if n > 2 {
        let mut ss_res = S::zero();
        for (&x, &y) in xs.iter().zip(ys) {
            let r = y - intercept - slope * x;
            ss_res = ss_res + r * r;
        }
        (ss_res / (S::of_usize(n - 2) * sxx)).sqrt()
    } else {
        S::zero()
    };
    Ok(LineFit { slope, intercept, slope_stderr: stderr })
}

/// Fit ln(y) = intercept + slope * ln(x). All xs and ys must be positive.
pub fn fit_loglog<S: Real>(xs: &[S], ys: &[S]) -> Result<LineFit<S>> {
    if xs.iter().chain(ys).any(|&v| !(v > S::zero()) || !v.is_finite()) {
        return Err(Error::domain("fit_loglog", "all coordinates must be positive and finite"));
    }
    let lx: Vec<S> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<S> = ys.iter().map(|y| y.ln()).collect();
    fit_line(&lx, &ly)
}
