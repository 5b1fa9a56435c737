use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use super::{HarmonicExpr, Part};
use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum CoefficientLaw {
    Gaussian { sigma: f64 },
    Uniform { half_width: f64 },
}

impl Default for CoefficientLaw {
    fn default() -> Self {
        CoefficientLaw::Gaussian { sigma: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub dim: usize,
    pub max_degree: u32,
    #[serde(default)]
    pub law: CoefficientLaw,
}

impl EnsembleSpec {
    pub fn new(dim: usize, max_degree: u32) -> Self {
        EnsembleSpec {
            dim,
            max_degree,
            law: CoefficientLaw::default(),
        }
    }
}

/// Random linear combination of homogeneous harmonic polynomials of degrees
/// `1..=max_degree`.
///
/// In two dimensions the basis is `Re/Im (x₁ + i x₂)^k`; in three it is the
/// real solid harmonics. Every member vanishes at the origin.
pub fn random_ensemble(seed: u64, spec: &EnsembleSpec) -> Result<HarmonicExpr> {
    if spec.max_degree == 0 {
        return Err(LabError::Precondition("max_degree must be at least 1".into()));
    }
    let mut children = Vec::new();
    match spec.dim {
        2 => {
            for k in 1..=spec.max_degree {
                children.push(HarmonicExpr::planar_power(k, Part::Re));
                children.push(HarmonicExpr::planar_power(k, Part::Im));
            }
        }
        3 => {
            for l in 1..=spec.max_degree {
                for m in -(l as i32)..=(l as i32) {
                    children.push(HarmonicExpr::solid_harmonic(l, m));
                }
            }
        }
        d => return Err(LabError::Dimension(d)),
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coefficients: Vec<f64> = match spec.law {
        CoefficientLaw::Gaussian { sigma } => {
            let law = Normal::new(0.0, sigma)
                .map_err(|e| LabError::Precondition(format!("coefficient law: {e}")))?;
            (0..children.len()).map(|_| law.sample(&mut rng)).collect()
        }
        CoefficientLaw::Uniform { half_width } => {
            let law = Uniform::new_inclusive(-half_width, half_width)
                .map_err(|e| LabError::Precondition(format!("coefficient law: {e}")))?;
            (0..children.len()).map(|_| law.sample(&mut rng)).collect()
        }
    };
    Ok(HarmonicExpr::lin_comb(coefficients, children))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hfun::laplacian_residual;

    #[test]
    fn degree_one_is_linear() {
        let f = random_ensemble(1, &EnsembleSpec::new(2, 1)).unwrap();
        let HarmonicExpr::LinComb { coefficients, .. } = &f else {
            panic!("expected lin_comb")
        };
        assert_eq!(coefficients.len(), 2);
        let v = f.evaluate(&[0.3, 0.7]);
        let expect = coefficients[0] * 0.3 + coefficients[1] * 0.7;
        assert!((v - expect).abs() < 1e-15);
    }

    #[test]
    fn deterministic_and_harmonic() {
        let spec = EnsembleSpec::new(2, 8);
        let a = random_ensemble(7, &spec).unwrap();
        let b = random_ensemble(7, &spec).unwrap();
        assert_eq!(a, b);
        let x = [0.2, -0.35];
        assert!(laplacian_residual(&a, &x, 1e-3).abs() < 1e-5);
        let c = random_ensemble(4, &EnsembleSpec::new(3, 4)).unwrap();
        assert!(laplacian_residual(&c, &[0.2, 0.1, -0.3], 1e-3).abs() < 1e-5);
    }

    #[test]
    fn rejects_other_dimensions() {
        assert_eq!(
            random_ensemble(1, &EnsembleSpec::new(4, 2)).unwrap_err().kind(),
            "DimensionError"
        );
        assert!(random_ensemble(1, &EnsembleSpec::new(2, 0)).is_err());
    }
}
