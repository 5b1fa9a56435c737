//! Holomorphic continuation of a harmonic function through the Poisson
//! kernel with complexified distance.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicBool, Ordering};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Field;
use crate::error::{LabError, Result};
use crate::geom::Ball;
use crate::growth::{sup_on_ball, GrowthSpec};
use crate::quad::{integrate_sphere, QuadratureSpec};

/// `z = x + i y` with `x, y ∈ Rⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexPoint {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl ComplexPoint {
    pub fn new(re: Vec<f64>, im: Vec<f64>) -> Self {
        ComplexPoint { re, im }
    }

    pub fn real(re: Vec<f64>) -> Self {
        let im = vec![0.0; re.len()];
        ComplexPoint { re, im }
    }

    pub fn dim(&self) -> usize {
        self.re.len()
    }

    /// Membership in `(1/5)B + i(1/5)B`.
    pub fn in_omega(&self, ball: &Ball) -> bool {
        if self.re.len() != ball.dim() || self.im.len() != ball.dim() {
            return false;
        }
        let lim = ball.radius / 5.0;
        let dx: f64 = self
            .re
            .iter()
            .zip(&ball.center)
            .map(|(a, c)| (a - c) * (a - c))
            .sum::<f64>()
            .sqrt();
        let dy: f64 = self.im.iter().map(|b| b * b).sum::<f64>().sqrt();
        dx <= lim && dy <= lim
    }

    fn normalized(&self, ball: &Ball) -> Vec<Complex64> {
        self.re
            .iter()
            .zip(&self.im)
            .zip(&ball.center)
            .map(|((a, b), c)| Complex64::new((a - c) / ball.radius, b / ball.radius))
            .collect()
    }
}

/// `Σ_k (z_k − ζ_k)²` for `z` in unit-ball coordinates.
pub fn kernel_denominator(z: &[Complex64], zeta: &[f64]) -> Complex64 {
    z.iter()
        .zip(zeta)
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum()
}

fn unit_sphere_area(n: usize) -> f64 {
    match n {
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => unreachable!(),
    }
}

/// `u^C(z) = ∫_{∂B} P(z, ζ) f(ζ) dS(ζ)` with the complexified Poisson
/// kernel and the principal square root.
pub fn poisson_extend<F: Field + ?Sized>(
    f: &F,
    ball: &Ball,
    z: &ComplexPoint,
    quad: &QuadratureSpec,
) -> Result<Complex64> {
    let n = ball.dim();
    if n != 2 && n != 3 {
        return Err(LabError::Dimension(n));
    }
    if !z.in_omega(ball) {
        return Err(LabError::Domain(format!(
            "{z:?} is outside (1/5)B + i(1/5)B"
        )));
    }
    let zn = z.normalized(ball);
    let numerator: Complex64 = Complex64::new(1.0, 0.0) - zn.iter().map(|a| a * a).sum::<Complex64>();
    let cn = 1.0 / unit_sphere_area(n);
    let branch_violation = AtomicBool::new(false);
    let origin = vec![0.0; n];
    let res = integrate_sphere::<2, _>(&origin, 1.0, quad, |zeta, _| {
        let w = kernel_denominator(&zn, zeta);
        if (Complex64::new(1.0, 0.0) - w).norm() >= 1.0 {
            branch_violation.store(true, Ordering::Relaxed);
        }
        let den = w.sqrt().powi(n as i32);
        let mut p = [0.0; 3];
        for i in 0..n {
            p[i] = ball.center[i] + ball.radius * zeta[i];
        }
        let k = numerator / den * cn * f.value(&p[..n]);
        [k.re, k.im]
    })?;
    if branch_violation.load(Ordering::Relaxed) {
        return Err(LabError::Domain(
            "square-root branch condition |1 - w| < 1 violated".into(),
        ));
    }
    Ok(Complex64::new(res.value[0], res.value[1]))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SupRatio {
    pub sup_omega: f64,
    pub sup_ball: f64,
    pub ratio: f64,
    pub samples: usize,
    pub min_denominator: f64,
}

fn sample_in_ball(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> Vec<f64> {
    loop {
        let p: Vec<f64> = (0..n).map(|_| rng.random_range(-radius..=radius)).collect();
        if p.iter().map(|v| v * v).sum::<f64>() <= radius * radius {
            return p;
        }
    }
}

/// Random points of `Ω` (seeded), for sampling `|u^C|`.
pub fn sample_omega(ball: &Ball, samples: usize, seed: u64) -> Vec<ComplexPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = ball.dim();
    (0..samples)
        .map(|_| {
            let x = sample_in_ball(&mut rng, n, ball.radius / 5.0);
            let y = sample_in_ball(&mut rng, n, ball.radius / 5.0);
            ComplexPoint::new(
                x.iter().zip(&ball.center).map(|(a, c)| a + c).collect(),
                y,
            )
        })
        .collect()
}

/// Sampled `sup_Ω |u^C| / sup_B |f|`.
pub fn complexification_sup_ratio<F: Field + ?Sized>(
    f: &F,
    ball: &Ball,
    samples: usize,
    seed: u64,
    quad: &QuadratureSpec,
) -> Result<SupRatio> {
    let sup_ball = sup_on_ball(f, ball, &GrowthSpec::default())?.value;
    let mut sup_omega: f64 = 0.0;
    let mut min_den = f64::INFINITY;
    let rule = crate::quad::sphere_rule(ball.dim(), 64)?;
    for z in sample_omega(ball, samples, seed) {
        let v = poisson_extend(f, ball, &z, quad)?;
        sup_omega = sup_omega.max(v.norm());
        let zn = z.normalized(ball);
        for d in &rule.directions {
            min_den = min_den.min(kernel_denominator(&zn, &d[..ball.dim()]).norm());
        }
    }
    if sup_ball <= 1e-300 {
        return Err(LabError::Degenerate("sup over the ball vanishes".into()));
    }
    Ok(SupRatio {
        sup_omega,
        sup_ball,
        ratio: sup_omega / sup_ball,
        samples,
        min_denominator: min_den,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hfun::{HarmonicExpr, Part};

    #[test]
    fn real_slice_coordinate() {
        let f = HarmonicExpr::coordinate(1);
        let b = Ball::unit(2);
        let v = poisson_extend(&f, &b, &ComplexPoint::real(vec![0.1, 0.0]), &QuadratureSpec::default())
            .unwrap();
        assert!((v.re - 0.1).abs() < 1e-12 && v.im.abs() < 1e-12);
    }

    #[test]
    fn cubic_continuation_matches_polynomial() {
        let f = HarmonicExpr::planar_power(3, Part::Re);
        let b = Ball::unit(2);
        let z = ComplexPoint::new(vec![0.1, 0.1], vec![0.05, -0.02]);
        let v = poisson_extend(&f, &b, &z, &QuadratureSpec::default()).unwrap();
        let z1 = Complex64::new(0.1, 0.05);
        let z2 = Complex64::new(0.1, -0.02);
        let i = Complex64::new(0.0, 1.0);
        let w = z1 + i * z2;
        let expect = 0.5 * (w.powu(3) + (z1 - i * z2).powu(3));
        assert!((v - expect).norm() < 1e-10, "{v} vs {expect}");
    }

    #[test]
    fn outside_omega_rejected() {
        let f = HarmonicExpr::coordinate(1);
        let b = Ball::unit(2);
        let z = ComplexPoint::new(vec![0.3, 0.0], vec![0.0, 0.0]);
        assert_eq!(
            poisson_extend(&f, &b, &z, &QuadratureSpec::default()).unwrap_err().kind(),
            "DomainError"
        );
    }

    #[test]
    fn three_dimensional_real_slice() {
        let f = HarmonicExpr::solid_harmonic(2, 1);
        let b = Ball::unit(3);
        let x = vec![0.05, -0.1, 0.08];
        let v = poisson_extend(&f, &b, &ComplexPoint::real(x.clone()), &QuadratureSpec::default())
            .unwrap();
        assert!((v.re - f.evaluate(&x)).abs() < 1e-10);
    }
}
