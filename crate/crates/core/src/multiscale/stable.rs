//! Windows of nearly constant frequency and balls of stable growth.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::geom::{Ball, SphericalLayer};
use crate::growth::{doubling_index, frequency, sup_on_ball, BetaProfile};
use crate::hfun::Field;

use super::MultiscaleParams;

const T_LO: f64 = 1.1;
const T_HI: f64 = 1.9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StableWindow {
    /// `β` at the left endpoint.
    pub level: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    /// `a_0 = 1.1, a_1, …, a_k`.
    pub breakpoints: Vec<f64>,
    /// True when no breakpoint interval was long enough and the tail
    /// `[a_k, 1.9]` was returned.
    pub tail: bool,
}

/// `inf{t ∈ [lo, 1.9] : β(t) ≥ target}` by bisection, assuming `β(lo) <
/// target ≤ β(1.9)`.
fn first_crossing<P: BetaProfile + ?Sized>(profile: &P, lo: f64, target: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, T_HI);
    while b - a > 1e-10 {
        let mid = 0.5 * (a + b);
        if profile.beta(mid)? >= target {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(b)
}

fn beta_floor<P: BetaProfile + ?Sized>(profile: &P) -> Result<(f64, f64)> {
    let b0 = profile.beta(T_LO)?;
    if !(b0 > E) {
        return Err(LabError::Degenerate(format!(
            "β(1.1) = {b0:.4} must exceed e for the logarithmic scales to be positive"
        )));
    }
    Ok((b0, profile.beta(T_HI)?))
}

/// Splits `[1.1, 1.9]` at `a_j = inf{t : β(t) ≥ e^j β(1.1)}` and returns the
/// first interval `[a_j, a_{j+1}]` of length at least `(ln β(a_j))^{−2}/100`,
/// or the tail `[a_k, 1.9]`.
pub fn stable_interval_search<P: BetaProfile + ?Sized>(profile: &P) -> Result<StableWindow> {
    let (b0, b1) = beta_floor(profile)?;
    let k = (b1 / b0).ln().floor().max(0.0) as usize;
    let mut a = vec![T_LO];
    for j in 1..=k {
        let prev = *a.last().unwrap();
        a.push(first_crossing(profile, prev, E.powi(j as i32) * b0)?);
    }
    for j in 0..k {
        let level = profile.beta(a[j])?;
        if a[j + 1] - a[j] >= 0.01 / level.ln().powi(2) {
            return Ok(StableWindow {
                level,
                t_lo: a[j],
                t_hi: a[j + 1],
                breakpoints: a,
                tail: false,
            });
        }
    }
    let t_lo = a[k];
    Ok(StableWindow {
        level: profile.beta(t_lo)?,
        t_lo,
        t_hi: T_HI,
        breakpoints: a,
        tail: true,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerPartition {
    pub beta0: f64,
    /// `a_0 = 1.1 < a_1 < … < a_{k+1} = 1.9` with `β(a_j) = 10^j β(1.1)`.
    pub breakpoints: Vec<f64>,
    /// `w_j = (a_{j+1} − a_j)/20`.
    pub widths: Vec<f64>,
    /// Indices with `w_j² 10^j β(1.1) ≥ C_n`.
    pub good: Vec<usize>,
    pub c_n: f64,
    /// `Σ_{j∈G} w_j`.
    pub good_width: f64,
    /// `Σ_{j∈G} 10^j w_j^n`.
    pub holder_mass: f64,
}

impl LayerPartition {
    /// Center radius and half-thickness `w` of layer `j`, relative to the
    /// ball radius.
    pub fn layer(&self, j: usize) -> (f64, f64) {
        (0.5 * (self.breakpoints[j] + self.breakpoints[j + 1]), self.widths[j])
    }

    /// `10^j β(1.1)`.
    pub fn level(&self, j: usize) -> f64 {
        10f64.powi(j as i32) * self.beta0
    }
}

pub fn layer_partition<P: BetaProfile + ?Sized>(profile: &P, dim: usize, c_n: f64) -> Result<LayerPartition> {
    let (b0, b1) = beta_floor(profile)?;
    let k = (b1 / b0).log10().floor().max(0.0) as usize;
    let mut a = vec![T_LO];
    for j in 1..=k {
        let prev = *a.last().unwrap();
        a.push(first_crossing(profile, prev, 10f64.powi(j as i32) * b0)?);
    }
    a.push(T_HI);
    let widths: Vec<f64> = a.windows(2).map(|p| (p[1] - p[0]) / 20.0).collect();
    let good: Vec<usize> = (0..widths.len())
        .filter(|&j| widths[j].powi(2) * 10f64.powi(j as i32) * b0 >= c_n)
        .collect();
    let good_width = good.iter().map(|&j| widths[j]).fold(0.0, |a, b| a + b);
    let holder_mass = good
        .iter()
        .map(|&j| 10f64.powi(j as i32) * widths[j].powi(dim as i32))
        .fold(0.0, |a, b| a + b);
    Ok(LayerPartition {
        beta0: b0,
        breakpoints: a,
        widths,
        good,
        c_n,
        good_width,
        holder_mass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StableBall {
    pub ball: Ball,
    /// Maximum point of `|f|` on `∂(ρB)`; lies on `∂D`.
    pub x0: Vec<f64>,
    pub half_index: f64,
    pub double_index: f64,
    /// `N(2D) / N(½D)`.
    pub ratio: f64,
    pub beta_samples: Vec<f64>,
}

/// Ball `D` of radius `w` inside `ρB`, tangent to `∂(ρB)` at the maximum
/// point of `|f|`.
pub fn stable_ball_at_max<F: Field + ?Sized>(
    f: &F,
    layer: &SphericalLayer,
    level: f64,
    params: &MultiscaleParams,
) -> Result<StableBall> {
    let spec = &params.growth;
    if !(level > 0.0) {
        return Err(LabError::Precondition(format!("frequency level {level} is not positive")));
    }
    let slack = 1e-6;
    let mut beta_samples = Vec::new();
    for k in 0..5 {
        let r = layer.inner() + (layer.outer() - layer.inner()) * k as f64 / 4.0;
        let b = frequency(f, &layer.center, r, spec)
            .map_err(|e| LabError::Precondition(format!("frequency on the layer: {e}")))?;
        if b < level * (1.0 - slack) || b > 10.0 * level * (1.0 + slack) {
            return Err(LabError::Precondition(format!(
                "β({r:.4}) = {b:.4} outside [{level:.4}, {:.4}]",
                10.0 * level
            )));
        }
        beta_samples.push(b);
    }
    let w = layer.w;
    if level * w / (1.0 / w).ln() < params.narrowness {
        return Err(LabError::Precondition("layer too narrow for its frequency".into()));
    }
    let sphere = Ball::new(layer.center.clone(), layer.rho)?;
    let top = sup_on_ball(f, &sphere, spec)?;
    let x0 = top.witness;
    let center: Vec<f64> = x0
        .iter()
        .zip(&layer.center)
        .map(|(x, c)| x - w * (x - c) / layer.rho)
        .collect();
    let d = Ball::new(center, w)?;
    let half_index = doubling_index(f, &d.scale(0.5), spec)?;
    let double_index = doubling_index(f, &d.scale(2.0), spec)?;
    Ok(StableBall {
        ball: d,
        x0,
        half_index,
        double_index,
        ratio: double_index / half_index,
        beta_samples,
    })
}
