//! Test-density catalog: members satisfy the boundary-order assumption and
//! carry exact quantile samplers (monotone bisection of closed-form CDFs).

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mixture::TargetDensity;

/// Catalog density families.
#[derive(Debug, Clone, Copy)]
enum Family {
    /// Uniform on (0,1); smooth proxy with k0 = k1 = 0.
    Uniform,
    /// Beta(2,2) density 6x(1−x); smooth with k0 = k1 = 1.
    Beta22,
    /// Rough family f ∝ 1 + |2x−1|^β / 2 for β ∈ (0,1]: Hölder-β at the
    /// midpoint, smooth elsewhere, k0 = k1 = 0.
    Rough { beta: f64 },
}

/// A corpus member.
#[derive(Debug, Clone, Copy)]
pub struct CorpusDensity {
    family: Family,
}

impl CorpusDensity {
    fn rough_norm(beta: f64) -> f64 {
        1.0 + 0.5 / (beta + 1.0)
    }
}

impl TargetDensity<f64> for CorpusDensity {
    fn pdf(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        match self.family {
            Family::Uniform => 1.0,
            Family::Beta22 => 6.0 * x * (1.0 - x),
            Family::Rough { beta } => {
                (1.0 + 0.5 * (2.0 * x - 1.0).abs().powf(beta)) / Self::rough_norm(beta)
            }
        }
    }

    fn deriv_order(&self) -> usize {
        match self.family {
            Family::Uniform | Family::Beta22 => 6,
            Family::Rough { .. } => 0,
        }
    }

    fn deriv(&self, j: usize, x: f64) -> f64 {
        match (self.family, j) {
            (_, 0) => self.pdf(x),
            (Family::Uniform, _) => 0.0,
            (Family::Beta22, 1) => 6.0 - 12.0 * x,
            (Family::Beta22, 2) => -12.0,
            (Family::Beta22, _) => 0.0,
            (Family::Rough { .. }, _) => {
                panic!("rough family declares no derivatives (deriv_order 0)")
            }
        }
    }

    fn holder(&self) -> (f64, f64) {
        match self.family {
            // smooth members declared at regularity 4: one correction step
            Family::Uniform => (4.0, 1.0),
            Family::Beta22 => (4.0, 12.0),
            Family::Rough { beta } => (beta, 1.0),
        }
    }

    fn boundary_orders(&self) -> (usize, usize) {
        match self.family {
            Family::Uniform | Family::Rough { .. } => (0, 0),
            Family::Beta22 => (1, 1),
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        match self.family {
            Family::Uniform => x,
            Family::Beta22 => x * x * (3.0 - 2.0 * x),
            Family::Rough { beta } => {
                let z = Self::rough_norm(beta);
                let half_cdf = |t: f64| {
                    // integral over [0, t] of 1 + (1-2s)^beta / 2, t <= 1/2
                    t + (1.0 - (1.0 - 2.0 * t).powf(beta + 1.0)) / (4.0 * (beta + 1.0))
                };
                if x <= 0.5 {
                    half_cdf(x) / z
                } else {
                    1.0 - half_cdf(1.0 - x) / z
                }
            }
        }
    }
}

const CATALOG: &str = "uniform, beta22, rough (param beta in (0,1])";

/// Look up a corpus density by id. `rough` takes a `beta` parameter.
pub fn density_corpus(id: &str, params: &[(&str, f64)]) -> Result<Arc<dyn TargetDensity<f64>>> {
    let family = match id {
        "uniform" => Family::Uniform,
        "beta22" => Family::Beta22,
        "rough" => {
            let beta = params
                .iter()
                .find(|(k, _)| *k == "beta")
                .map(|&(_, v)| v)
                .ok_or_else(|| Error::contract("density_corpus", "rough requires a beta parameter"))?;
            if !(beta > 0.0 && beta <= 1.0) {
                return Err(Error::domain("density_corpus", format!("rough beta = {beta} outside (0,1]")));
            }
            Family::Rough { beta }
        }
        other => {
            return Err(Error::Catalog { id: other.into(), known: CATALOG.into() });
        }
    };
    Ok(Arc::new(CorpusDensity { family }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixture::validate_target;

    #[test]
    fn catalog_lookup() {
        assert!(density_corpus("uniform", &[]).is_ok());
        assert!(density_corpus("beta22", &[]).is_ok());
        assert!(density_corpus("rough", &[("beta", 0.5)]).is_ok());
        assert!(density_corpus("rough", &[]).is_err());
        assert!(density_corpus("rough", &[("beta", 2.0)]).is_err());
        match density_corpus("nope", &[]) {
            Err(Error::Catalog { known, .. }) => assert!(known.contains("beta22")),
            Err(other) => panic!("expected catalog error, got {other:?}"),
            Ok(_) => panic!("expected catalog error"),
        }
    }

    #[test]
    fn members_pass_target_invariants() {
        for f in [
            density_corpus("uniform", &[]).unwrap(),
            density_corpus("beta22", &[]).unwrap(),
            density_corpus("rough", &[("beta", 0.5)]).unwrap(),
            density_corpus("rough", &[("beta", 1.0)]).unwrap(),
        ] {
            validate_target(f.as_ref()).unwrap();
        }
    }

    #[test]
    fn beta22_boundary_flags() {
        let f = density_corpus("beta22", &[]).unwrap();
        // f'(0) = 6 > 0 qualifies k0 = 1
        assert!((f.deriv(1, 0.0) - 6.0).abs() < 1e-12);
        assert_eq!(f.boundary_orders(), (1, 1));
    }

    #[test]
    fn rough_normalizer_half() {
        // beta = 1/2: normalizer 1 + (1/2)(2/3)/... = 4/3, f = (3/4)(1 + |2x-1|^{1/2}/2)
        let f = density_corpus("rough", &[("beta", 0.5)]).unwrap();
        let expect = 0.75 * (1.0 + 0.5 * 0.5f64.sqrt());
        // at x = 0.75: |2x-1| = 1/2
        assert!((f.pdf(0.75) - expect).abs() < 1e-14);
        assert!((f.cdf(1.0) - 1.0).abs() < 1e-14);
        assert!((f.cdf(0.5) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn quantile_inverts_cdf() {
        for f in [
            density_corpus("beta22", &[]).unwrap(),
            density_corpus("rough", &[("beta", 0.7)]).unwrap(),
        ] {
            for k in 1..20 {
                let u = k as f64 / 20.0;
                let x = f.quantile(u);
                assert!((f.cdf(x) - u).abs() < 1e-9, "u = {u}");
            }
        }
    }

    #[test]
    fn uniform_sampler_is_identity() {
        let f = density_corpus("uniform", &[]).unwrap();
        for &u in &[0.1, 0.33, 0.9] {
            assert!((f.quantile(u) - u).abs() < 1e-11);
        }
    }
}
