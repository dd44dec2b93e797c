//! Gaussian quadrature rules built from raw moments.
//!
//! The moment sequence is reduced to three-term recurrence coefficients by
//! the Chebyshev algorithm, the resulting symmetric tridiagonal Jacobi
//! matrix is diagonalized by implicit-shift QL, and nodes/weights follow
//! Golub–Welsch. Raw-moment Hankel matrices are badly conditioned for large
//! rules, so the node count is capped at [`MAX_NODES`]; the discretization
//! scheme that feeds this only ever needs narrow-cell rules.

use crate::error::{Error, Result};
use crate::real::Real;

/// Hard cap on the rule size (raw-moment conditioning limit).
pub const MAX_NODES: usize = 12;

/// Nodes and positive weights of a quadrature rule.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<S> {
    pub nodes: Vec<S>,
    pub weights: Vec<S>,
}

impl<S: Real> QuadratureRule<S> {
    /// Apply the rule to a function.
    pub fn apply<F: Fn(S) -> S>(&self, f: F) -> S {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .fold(S::zero(), |a, v| a + v)
    }

    /// Raw moment Σ w_i x_i^l of the rule.
    pub fn moment(&self, l: usize) -> S {
        self.apply(|x| x.powi(l as i32))
    }
}

/// Raw moments m[l] = ∫ x^l dF(x), l = 0..len-1, of a positive measure.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentVector<S> {
    m: Vec<S>,
}

impl<S: Real> MomentVector<S> {
    /// Wrap a raw moment sequence. Requires m[0] > 0 and all entries finite.
    pub fn new(m: Vec<S>) -> Result<Self> {
        if m.is_empty() || !(m[0] > S::zero()) {
            return Err(Error::domain("MomentVector::new", "m[0] must be positive"));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("MomentVector::new", "moments must be finite"));
        }
        Ok(MomentVector { m })
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }

    pub fn as_slice(&self) -> &[S] {
        &self.m
    }
}

/// Build the N-node Gauss rule matching raw moments 0..2N-1.
///
/// Fails with [`Error::Degenerate`] when the Chebyshev reduction produces a
/// non-positive recurrence coefficient, which signals a measure supported on
/// fewer than N points (or moments too ill-conditioned to resolve N nodes).
pub fn gauss_from_moments<S: Real>(m: &MomentVector<S>, n: usize) -> Result<QuadratureRule<S>> {
    if n == 0 {
        return Err(Error::contract("gauss_from_moments", "n must be at least 1"));
    }
    if n > MAX_NODES {
        return Err(Error::contract(
            "gauss_from_moments",
            format!("n = {n} exceeds the cap {MAX_NODES}"),
        ));
    }
    if m.len() < 2 * n {
        return Err(Error::contract(
            "gauss_from_moments",
            format!("need 2n = {} moments, got {}", 2 * n, m.len()),
        ));
    }
    let (diag, offdiag) = chebyshev_recurrence(m.as_slice(), n)?;
    let (nodes, first_components) = tridiag_eigen(&diag, &offdiag)?;
    let weights: Vec<S> = first_components.iter().map(|&z| m.as_slice()[0] * z * z).collect();
    Ok(QuadratureRule { nodes, weights })
}

/// Chebyshev algorithm: raw moments -> (a_k, b_k) recurrence coefficients.
/// Returns diag a_0..a_{n-1} and offdiag sqrt(b_1)..sqrt(b_{n-1}).
fn chebyshev_recurrence<S: Real>(m: &[S], n: usize) -> Result<(Vec<S>, Vec<S>)> {
    let cols = 2 * n;
    let mut a = vec![S::zero(); n];
    let mut b = vec![S::zero(); n];
    a[0] = m[1] / m[0];
    b[0] = m[0];
    // sigma rows: sig_prev = sigma_{k-1}, sig_cur = sigma_k
    let mut sig_prev = vec![S::zero(); cols];
    let mut sig_cur = m.to_vec();
    for k in 1..n {
        let mut sig_next = vec![S::zero(); cols];
        for l in k..(cols - k) {
            let prev_term = if k >= 2 { b[k - 1] * sig_prev[l] } else { S::zero() };
            sig_next[l] = sig_cur[l + 1] - a[k - 1] * sig_cur[l] - prev_term;
        }
        // a_k = sig_{k,k+1}/sig_{k,k} - sig_{k-1,k}/sig_{k-1,k-1}
        // b_k = sig_{k,k}/sig_{k-1,k-1}
        let den = sig_next[k];
        let denom_cur = sig_cur[k - 1];
        if !den.is_finite() || den.abs() <= S::zero() {
            return Err(degenerate(k));
        }
        a[k] = sig_next[k + 1] / den - sig_cur[k] / denom_cur;
        b[k] = den / denom_cur;
        if !(b[k] > S::zero()) || !b[k].is_finite() || !a[k].is_finite() {
            return Err(degenerate(k));
        }
        sig_prev = sig_cur;
        sig_cur = sig_next;
    }
    let offdiag: Vec<S> = b[1..].iter().map(|&v| v.sqrt()).collect();
    Ok((a, offdiag))
}

fn degenerate(k: usize) -> Error {
    Error::Degenerate {
        op: "gauss_from_moments",
        detail: format!(
            "Hankel/Jacobi reduction singular at step {k}; the measure may have fewer than the requested support points — retry with a smaller n"
        ),
    }
}

/// Eigen-decomposition of the symmetric tridiagonal Jacobi matrix by cyclic
/// Jacobi rotations. Returns eigenvalues ascending with the first component
/// of each normalized eigenvector (all Golub–Welsch needs). The rule sizes
/// here are tiny (n <= 12), so the dense O(n^3) sweep is immaterial.
fn tridiag_eigen<S: Real>(diag: &[S], offdiag: &[S]) -> Result<(Vec<S>, Vec<S>)> {
    let n = diag.len();
    let mut a = vec![vec![S::zero(); n]; n];
    for i in 0..n {
        a[i][i] = diag[i];
    }
    for i in 0..n - 1 {
        a[i][i + 1] = offdiag[i];
        a[i + 1][i] = offdiag[i];
    }
    let mut v = vec![vec![S::zero(); n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = S::one();
    }

    let scale: S = diag.iter().map(|d| d.abs()).fold(S::zero(), S::max)
        + offdiag.iter().map(|e| e.abs()).fold(S::zero(), S::max);
    let tiny = S::epsilon() * scale.max(S::min_positive_value());

    for _sweep in 0..60 {
        let mut off = S::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off + a[p][q] * a[p][q];
            }
        }
        if off.sqrt() <= tiny {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() <= tiny * S::of(1e-3) {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (S::of(2.0) * a[p][q]);
                let t = {
                    let s = if theta >= S::zero() { S::one() } else { -S::one() };
                    s / (theta.abs() + (theta * theta + S::one()).sqrt())
                };
                let c = S::one() / (t * t + S::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }

    let d: Vec<S> = (0..n).map(|i| a[i][i]).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap_or(std::cmp::Ordering::Equal));
    let nodes: Vec<S> = order.iter().map(|&i| d[i]).collect();
    let firsts: Vec<S> = order.iter().map(|&i| v[0][i]).collect();
    if nodes.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Degenerate {
            op: "gauss_from_moments",
            detail: "repeated nodes; measure has fewer support points than requested".into(),
        });
    }
    Ok((nodes, firsts))
}

/// Raw moments of the uniform distribution on [a, b].
pub fn uniform_moments<S: Real>(a: S, b: S, count: usize) -> MomentVector<S> {
    // m_l = (b^{l+1} - a^{l+1}) / ((l+1)(b-a))
    let mut m = Vec::with_capacity(count);
    let mut pa = a;
    let mut pb = b;
    for l in 0..count {
        m.push((pb - pa) / (S::of_usize(l + 1) * (b - a)));
        pa = pa * a;
        pb = pb * b;
    }
    MomentVector::new(m).expect("uniform moments are valid")
}
