//! Chebyshev interpolation on an interval, with spectral differentiation.
//!
//! Densities produced by the mixing-density correction steps have no closed
//! form; they are sampled once on Chebyshev–Lobatto points and then
//! evaluated (and differentiated) through the coefficient representation.

use crate::error::{Error, Result};
use crate::real::Real;

/// Chebyshev series on [lo, hi] through Lobatto samples.
#[derive(Debug, Clone)]
pub struct ChebInterp<S> {
    lo: S,
    hi: S,
    coeffs: Vec<S>,
}

impl<S: Real> ChebInterp<S> {
    /// The n+1 Chebyshev–Lobatto points of [lo, hi], descending from hi to lo.
    pub fn lobatto_points(lo: S, hi: S, n: usize) -> Vec<S> {
        let half = S::of(0.5);
        (0..=n)
            .map(|j| {
                let t = (S::PI() * S::of_usize(j) / S::of_usize(n)).cos();
                half * (lo + hi) + half * (hi - lo) * t
            })
            .collect()
    }

    /// Fit from samples taken at `lobatto_points(lo, hi, n)` in that order.
    pub fn fit(lo: S, hi: S, samples: &[S]) -> Result<Self> {
        let n = samples.len().checked_sub(1).filter(|&n| n >= 1).ok_or_else(|| {
            Error::contract("ChebInterp::fit", "need at least two samples")
        })?;
        if !(lo < hi) {
            return Err(Error::contract("ChebInterp::fit", "lo must be below hi"));
        }
        // discrete cosine transform, direct O(n^2) form
        let nf = S::of_usize(n);
        let two = S::of(2.0);
        let mut coeffs = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let mut acc = S::zero();
            for (j, &fj) in samples.iter().enumerate() {
                let w = if j == 0 || j == n { S::of(0.5) } else { S::one() };
                let ang = S::PI() * S::of_usize(j * k % (2 * n)) / nf;
                acc = acc + w * fj * ang.cos();
            }
            let norm = if k == 0 || k == n { S::one() / nf } else { two / nf };
            coeffs.push(acc * norm);
        }
        Ok(ChebInterp { lo, hi, coeffs })
    }

    /// Convenience: sample `f` on n+1 Lobatto points and fit.
    pub fn from_fn<F: FnMut(S) -> S>(lo: S, hi: S, n: usize, mut f: F) -> Result<Self> {
        let pts = Self::lobatto_points(lo, hi, n);
        let samples: Vec<S> = pts.into_iter().map(&mut f).collect();
        Self::fit(lo, hi, &samples)
    }

    pub fn range(&self) -> (S, S) {
        (self.lo, self.hi)
    }

    /// Evaluate by Clenshaw recurrence. Arguments outside [lo, hi] are
    /// clamped to the boundary.
    pub fn eval(&self, x: S) -> S {
        let two = S::of(2.0);
        let x = x.max(self.lo).min(self.hi);
        let t = (two * x - self.lo - self.hi) / (self.hi - self.lo);
        let mut b1 = S::zero();
        let mut b2 = S::zero();
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = two * t * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        t * b1 - b2 + self.coeffs[0]
    }

    /// Derivative series (spectral differentiation).
    pub fn derivative(&self) -> Self {
        let n = self.coeffs.len();
        let two = S::of(2.0);
        let mut d = vec![S::zero(); n];
        if n >= 2 {
            // recurrence d_{k-1} = d_{k+1} + 2k c_k on [-1,1]
            let mut kk = n - 1;
            while kk >= 1 {
                let upper = if kk + 1 < n { d[kk + 1] } else { S::zero() };
                d[kk - 1] = upper + two * S::of_usize(kk) * self.coeffs[kk];
                kk -= 1;
            }
            d[0] = d[0] * S::of(0.5);
        }
        let scale = two / (self.hi - self.lo);
        for v in d.iter_mut() {
            *v = *v * scale;
        }
        d.pop();
        if d.is_empty() {
            d.push(S::zero());
        }
        ChebInterp { lo: self.lo, hi: self.hi, coeffs: d }
    }
}
