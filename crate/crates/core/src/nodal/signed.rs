//! Pairs of small sign-definite balls around a zero-centered ball.
//!
//! Concentric spheres `S_i` of radii `(4/3 + i/(3N))·R` are scanned for
//! `m_i^+ = max_{S_i} f` and `m_i^- = min_{S_i} f`. Indices where both
//! extremes grow by at most `C₁` to the next sphere give points `x_i^±` with
//! `|f|` bounded below on a ball of radius `c₀ R/(10N)`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::geom::Ball;
use crate::growth::{doubling_index, sup_on_ball, sup_on_sphere, GrowthSpec, Objective};
use crate::hfun::Field;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SignedBallSpec {
    /// Allowed growth of `m_i^±` from one sphere to the next.
    pub c1: f64,
    /// Shrink factor `c₀` applied to the `R/(10N)` ball radius.
    pub shrink: f64,
    pub samples_per_ball: usize,
    /// `|f(center)| ≤ zero_tol · sup_B |f|` counts as a zero.
    pub zero_tol: f64,
    pub growth: GrowthSpec,
}

impl Default for SignedBallSpec {
    fn default() -> Self {
        SignedBallSpec {
            c1: std::f64::consts::E * std::f64::consts::E,
            shrink: 0.25,
            samples_per_ball: 200,
            zero_tol: 1e-8,
            growth: GrowthSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignedBallPair {
    pub positive: Ball,
    pub negative: Ball,
    pub radius: f64,
    pub layer_index: usize,
    /// Both balls passed the gradient-bound certificate, not only sampling.
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignedBallSearch {
    pub doubling_index: f64,
    /// Number of layers `N = 20⌈N(B)⌉`.
    pub layers: usize,
    pub m_plus: Vec<f64>,
    pub m_minus: Vec<f64>,
    /// Indices `i < N` with `m_{i+1}^± ≤ C₁ m_i^±` in absolute value.
    pub passing: Vec<usize>,
    pub pairs: Vec<SignedBallPair>,
}

/// Deterministic, roughly uniform sample of the ball (sunflower / spiral).
pub(crate) fn ball_samples(ball: &Ball, count: usize) -> Vec<Vec<f64>> {
    let n = ball.dim();
    let golden = PI * (3.0 - 5f64.sqrt());
    let mut out = vec![ball.center.clone()];
    for k in 0..count.saturating_sub(1) {
        let u = (k as f64 + 0.5) / (count - 1) as f64;
        let dir = if n == 2 {
            let a = golden * k as f64;
            vec![a.cos(), a.sin()]
        } else {
            let z = 1.0 - 2.0 * ((k * 7 % (count - 1)) as f64 + 0.5) / (count - 1) as f64;
            let s = (1.0 - z * z).sqrt();
            let a = golden * k as f64;
            vec![s * a.cos(), s * a.sin(), z]
        };
        let rho = ball.radius * u.powf(1.0 / n as f64);
        out.push(ball.center.iter().zip(&dir).map(|(c, d)| c + rho * d).collect());
    }
    out
}

/// `|f(x)| − r·(n/s)·sup_{B(x, r+s)} |f|`; positive means `f` keeps the sign
/// of `f(x)` on `B(x, r)`.
fn certificate<F: Field + ?Sized>(f: &F, x: &[f64], r: f64, outer: f64, spec: &GrowthSpec) -> Result<f64> {
    let s = outer - r;
    let sup = sup_on_ball(f, &Ball::new(x.to_vec(), outer)?, spec)?.value;
    Ok(f.value(x).abs() - r * (x.len() as f64 / s) * sup)
}

pub fn signed_balls_in_layers<F: Field + ?Sized>(f: &F, ball: &Ball, spec: &SignedBallSpec) -> Result<SignedBallSearch> {
    let sup = sup_on_ball(f, ball, &spec.growth)?.value;
    let f0 = f.value(&ball.center);
    if sup <= spec.growth.floor {
        return Err(LabError::NotFound("f vanishes identically on the ball".into()));
    }
    if f0.abs() > spec.zero_tol * sup {
        return Err(LabError::NotFound(format!(
            "f(center) = {f0:.3e} is not a zero (sup {sup:.3e})"
        )));
    }
    let di = doubling_index(f, ball, &spec.growth)?;
    let layers = 20 * (di.ceil().max(1.0) as usize);
    let radius_of = |i: usize| ball.radius * (4.0 / 3.0 + i as f64 / (3.0 * layers as f64));

    let extremes: Vec<(f64, Vec<f64>, f64, Vec<f64>)> = (0..=layers)
        .into_par_iter()
        .map(|i| -> Result<_> {
            let s = Ball::new(ball.center.clone(), radius_of(i))?;
            let hi = sup_on_sphere(f, &s, Objective::Signed(1.0), &spec.growth.sup)?;
            let lo = sup_on_sphere(f, &s, Objective::Signed(-1.0), &spec.growth.sup)?;
            Ok((hi.value, hi.witness, -lo.value, lo.witness))
        })
        .collect::<Result<_>>()?;
    let m_plus: Vec<f64> = extremes.iter().map(|e| e.0).collect();
    let m_minus: Vec<f64> = extremes.iter().map(|e| e.2).collect();

    let passing: Vec<usize> = (0..layers)
        .filter(|&i| {
            m_plus[i] > 0.0
                && m_minus[i] < 0.0
                && m_plus[i + 1] <= spec.c1 * m_plus[i]
                && m_minus[i + 1].abs() <= spec.c1 * m_minus[i].abs()
        })
        .collect();
    if passing.is_empty() {
        return Err(LabError::NotFound("no layer satisfies the bounded-increment condition".into()));
    }

    let outer = ball.radius / (10.0 * layers as f64);
    let r = spec.shrink * outer;
    let pairs: Vec<Option<SignedBallPair>> = passing
        .par_iter()
        .map(|&i| -> Result<Option<SignedBallPair>> {
            let pos = Ball::new(extremes[i].1.clone(), r)?;
            let neg = Ball::new(extremes[i].3.clone(), r)?;
            let pos_ok = ball_samples(&pos, spec.samples_per_ball).iter().all(|p| f.value(p) > 0.0);
            let neg_ok = ball_samples(&neg, spec.samples_per_ball).iter().all(|p| f.value(p) < 0.0);
            if !(pos_ok && neg_ok) {
                return Ok(None);
            }
            let cp = certificate(f, &pos.center, r, outer, &spec.growth)?;
            let cn = certificate(f, &neg.center, r, outer, &spec.growth)?;
            Ok(Some(SignedBallPair {
                positive: pos,
                negative: neg,
                radius: r,
                layer_index: i,
                certified: cp > 0.0 && cn > 0.0,
            }))
        })
        .collect::<Result<_>>()?;
    let pairs: Vec<SignedBallPair> = pairs.into_iter().flatten().collect();
    if pairs.is_empty() {
        return Err(LabError::NotFound("no sign-definite ball pair survived sampling".into()));
    }
    Ok(SignedBallSearch {
        doubling_index: di,
        layers,
        m_plus,
        m_minus,
        passing,
        pairs,
    })
}
