//! Quadrature on spheres, balls and intervals.
//!
//! Circles use the composite trapezoid rule (spectrally accurate for smooth
//! periodic integrands). Two-spheres use Gauss–Legendre in `cos θ` times the
//! trapezoid rule in `φ`. Balls add a Gauss–Legendre radial factor. Every
//! integral doubles its order until two consecutive levels agree relative to
//! `∫|g|`, which is also the reported scale.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    pub initial_order: usize,
    pub refinement_factor: usize,
    pub rel_tol: f64,
    pub max_refinements: usize,
    /// Hard cap on nodes per rule; refinement stops with an error beyond it.
    pub max_points: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            initial_order: 16,
            refinement_factor: 2,
            rel_tol: 1e-12,
            max_refinements: 10,
            max_points: 1 << 21,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tol(rel_tol: f64) -> Self {
        QuadratureSpec {
            rel_tol,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || self.initial_order < 2 || self.refinement_factor < 2 {
            return Err(LabError::Precondition(
                "quadrature needs rel_tol > 0, initial_order >= 2, refinement_factor >= 2".into(),
            ));
        }
        Ok(())
    }
}

/// Converged integral with per-component error and absolute mass.
#[derive(Debug, Clone, Copy)]
pub struct QuadValue<const M: usize> {
    pub value: [f64; M],
    pub error: [f64; M],
    pub mass: [f64; M],
    pub order: usize,
}

#[derive(Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

fn compute_gauss(n: usize) -> GaussRule {
    if n == 1 {
        return GaussRule {
            nodes: vec![0.0],
            weights: vec![2.0],
        };
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (pn, pm) = legendre_pair(n, x);
            let dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (pn, pm) = legendre_pair(n, x);
        let dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    GaussRule { nodes, weights }
}

/// Gauss–Legendre rule with `n` nodes on `[−1, 1]` (cached).
pub fn gauss_legendre(n: usize) -> Arc<GaussRule> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<GaussRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(r) = cache.read().unwrap().get(&n) {
        return r.clone();
    }
    let rule = Arc::new(compute_gauss(n.max(1)));
    cache.write().unwrap().insert(n, rule.clone());
    rule
}

/// Unit-sphere rule: directions and weights (summing to the sphere area).
#[derive(Debug)]
pub struct SphereRule {
    pub dim: usize,
    pub directions: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

fn compute_sphere(dim: usize, order: usize) -> SphereRule {
    match dim {
        2 => {
            let h = 2.0 * PI / order as f64;
            let directions = (0..order)
                .map(|k| {
                    let t = h * k as f64;
                    [t.cos(), t.sin(), 0.0]
                })
                .collect();
            SphereRule {
                dim,
                directions,
                weights: vec![h; order],
            }
        }
        3 => {
            let nt = order.div_ceil(2).max(2);
            let np = order.max(4);
            let gl = gauss_legendre(nt);
            let h = 2.0 * PI / np as f64;
            let mut directions = Vec::with_capacity(nt * np);
            let mut weights = Vec::with_capacity(nt * np);
            for (t, wt) in gl.nodes.iter().zip(&gl.weights) {
                let st = (1.0 - t * t).max(0.0).sqrt();
                for j in 0..np {
                    let p = h * j as f64;
                    directions.push([st * p.cos(), st * p.sin(), *t]);
                    weights.push(wt * h);
                }
            }
            SphereRule {
                dim,
                directions,
                weights,
            }
        }
        _ => unreachable!("sphere rules exist for dimensions 2 and 3"),
    }
}

/// Cached unit-sphere rule of the given order; `dim` must be 2 or 3.
pub fn sphere_rule(dim: usize, order: usize) -> Result<Arc<SphereRule>> {
    if dim != 2 && dim != 3 {
        return Err(LabError::Dimension(dim));
    }
    static CACHE: OnceLock<RwLock<HashMap<(usize, usize), Arc<SphereRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(r) = cache.read().unwrap().get(&(dim, order)) {
        return Ok(r.clone());
    }
    let rule = Arc::new(compute_sphere(dim, order));
    cache.write().unwrap().insert((dim, order), rule.clone());
    Ok(rule)
}

pub fn sphere_rule_len(dim: usize, order: usize) -> usize {
    match dim {
        2 => order,
        _ => order.div_ceil(2).max(2) * order.max(4),
    }
}

const PAR_THRESHOLD: usize = 4096;

fn sum_terms<const M: usize>(
    n: usize,
    term: impl Fn(usize) -> ([f64; M], [f64; M]) + Sync,
) -> ([f64; M], [f64; M]) {
    let add = |mut a: ([f64; M], [f64; M]), b: ([f64; M], [f64; M])| {
        for c in 0..M {
            a.0[c] += b.0[c];
            a.1[c] += b.1[c];
        }
        a
    };
    let zero = ([0.0; M], [0.0; M]);
    if n < PAR_THRESHOLD {
        (0..n).map(&term).fold(zero, add)
    } else {
        // Fixed chunking keeps the reduction order independent of scheduling.
        let chunk = 1024;
        let parts: Vec<_> = (0..n.div_ceil(chunk))
            .into_par_iter()
            .map(|c| {
                (c * chunk..((c + 1) * chunk).min(n))
                    .map(&term)
                    .fold(zero, add)
            })
            .collect();
        parts.into_iter().fold(zero, add)
    }
}

fn converge<const M: usize>(
    spec: &QuadratureSpec,
    points_at: impl Fn(usize) -> usize,
    level: impl Fn(usize) -> Result<([f64; M], [f64; M])>,
) -> Result<QuadValue<M>> {
    spec.validate()?;
    let mut order = spec.initial_order;
    let mut prev = level(order)?;
    let mut last_err = f64::INFINITY;
    let mut last_req = 0.0;
    for _ in 0..spec.max_refinements {
        // The +1 keeps consecutive periodic rules from aliasing the same
        // frequency onto zero.
        let next_order = order * spec.refinement_factor + 1;
        if points_at(next_order) > spec.max_points {
            break;
        }
        let next = level(next_order)?;
        let mut ok = true;
        let mut error = [0.0; M];
        last_err = 0.0;
        last_req = 0.0;
        for c in 0..M {
            error[c] = (next.0[c] - prev.0[c]).abs();
            let req = spec.rel_tol * next.1[c];
            if error[c] > req && error[c] > 1e-300 {
                ok = false;
            }
            if error[c] - req > last_err - last_req {
                last_err = error[c];
                last_req = req;
            }
        }
        if ok {
            return Ok(QuadValue {
                value: next.0,
                error,
                mass: next.1,
                order: next_order,
            });
        }
        prev = next;
        order = next_order;
    }
    Err(LabError::Quadrature {
        estimate: last_err,
        requested: last_req,
    })
}

/// `∫_{∂B(center, radius)} g(x, n̂) dS`; `g` receives the point and the
/// outward unit normal.
pub fn integrate_sphere<const M: usize, G>(
    center: &[f64],
    radius: f64,
    spec: &QuadratureSpec,
    g: G,
) -> Result<QuadValue<M>>
where
    G: Fn(&[f64], &[f64]) -> [f64; M] + Sync,
{
    let dim = center.len();
    sphere_rule(dim, 4)?;
    let jac = radius.powi(dim as i32 - 1);
    converge::<M>(
        spec,
        |o| sphere_rule_len(dim, o),
        |order| {
            let rule = sphere_rule(dim, order)?;
            let (v, m) = sum_terms::<M>(rule.weights.len(), |k| {
                let d = &rule.directions[k][..dim];
                let mut p = [0.0; 3];
                for i in 0..dim {
                    p[i] = center[i] + radius * d[i];
                }
                let val = g(&p[..dim], d);
                let w = rule.weights[k] * jac;
                let mut a = [0.0; M];
                let mut b = [0.0; M];
                for c in 0..M {
                    a[c] = w * val[c];
                    b[c] = w * val[c].abs();
                }
                (a, b)
            });
            Ok((v, m))
        },
    )
}

/// `∫_{B(center, radius)} g(x) dx` by radial Gauss–Legendre shells.
pub fn integrate_ball<const M: usize, G>(
    center: &[f64],
    radius: f64,
    spec: &QuadratureSpec,
    g: G,
) -> Result<QuadValue<M>>
where
    G: Fn(&[f64]) -> [f64; M] + Sync,
{
    let dim = center.len();
    sphere_rule(dim, 4)?;
    converge::<M>(
        spec,
        |o| sphere_rule_len(dim, o) * o.div_ceil(2),
        |order| {
            let rule = sphere_rule(dim, order)?;
            let radial = gauss_legendre(order.div_ceil(2).max(2));
            let nr = radial.nodes.len();
            let ns = rule.weights.len();
            let (v, m) = sum_terms::<M>(nr * ns, |idx| {
                let (ri, si) = (idx / ns, idx % ns);
                let s = 0.5 * radius * (radial.nodes[ri] + 1.0);
                let wr = 0.5 * radius * radial.weights[ri] * s.powi(dim as i32 - 1);
                let d = &rule.directions[si][..dim];
                let mut p = [0.0; 3];
                for i in 0..dim {
                    p[i] = center[i] + s * d[i];
                }
                let val = g(&p[..dim]);
                let w = wr * rule.weights[si];
                let mut a = [0.0; M];
                let mut b = [0.0; M];
                for c in 0..M {
                    a[c] = w * val[c];
                    b[c] = w * val[c].abs();
                }
                (a, b)
            });
            Ok((v, m))
        },
    )
}

/// `∫_a^b g` by Gauss–Legendre with doubling node counts, starting from
/// `initial_nodes`, until consecutive levels agree to `rel_tol · ∫|g|`.
pub fn integrate_interval<G>(g: G, a: f64, b: f64, rel_tol: f64, initial_nodes: usize) -> Result<f64>
where
    G: Fn(f64) -> Result<f64>,
{
    let level = |n: usize| -> Result<(f64, f64)> {
        let rule = gauss_legendre(n);
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        let mut acc = 0.0;
        let mut mass = 0.0;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let v = g(mid + half * x)?;
            acc += w * half * v;
            mass += w * half.abs() * v.abs();
        }
        Ok((acc, mass))
    };
    let mut n = initial_nodes.max(2);
    let mut prev = level(n)?;
    let mut err = f64::INFINITY;
    while n <= 512 {
        n *= 2;
        let next = level(n)?;
        err = (next.0 - prev.0).abs();
        if err <= rel_tol * next.1 || err <= 1e-300 {
            return Ok(next.0);
        }
        prev = next;
    }
    Err(LabError::Quadrature {
        estimate: err,
        requested: rel_tol * prev.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_detects_high_frequency() {
        let spec = QuadratureSpec::default();
        let q = integrate_sphere::<1, _>(&[0.0, 0.0], 1.0, &spec, |p, _| {
            let t = p[1].atan2(p[0]);
            [(16.0 * t).cos().powi(2)]
        })
        .unwrap();
        assert!((q.value[0] - PI).abs() < 1e-9, "{}", q.value[0]);
    }

    #[test]
    fn gauss_rules_integrate_polynomials() {
        for n in [1, 2, 5, 16, 33] {
            let r = gauss_legendre(n);
            let total: f64 = r.weights.iter().sum();
            assert!((total - 2.0).abs() < 1e-13, "n={n}");
            // exact for degree 2n-1
            let deg = 2 * n - 1;
            let approx: f64 = r
                .nodes
                .iter()
                .zip(&r.weights)
                .map(|(x, w)| w * x.powi(deg as i32 - (deg % 2) as i32))
                .sum();
            let e = (deg - deg % 2) as i32;
            let exact = 2.0 / (e as f64 + 1.0);
            assert!((approx - exact).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn sphere_areas() {
        let spec = QuadratureSpec::default();
        let c2 = integrate_sphere::<1, _>(&[0.3, -1.0], 2.0, &spec, |_, _| [1.0]).unwrap();
        assert!((c2.value[0] - 4.0 * PI).abs() < 1e-12);
        let c3 = integrate_sphere::<1, _>(&[0.0; 3], 0.5, &spec, |_, _| [1.0]).unwrap();
        assert!((c3.value[0] - PI).abs() < 1e-12);
        let b3 = integrate_ball::<1, _>(&[0.0; 3], 2.0, &spec, |_| [1.0]).unwrap();
        assert!((b3.value[0] - 4.0 / 3.0 * PI * 8.0).abs() < 1e-10);
        let b2 = integrate_ball::<1, _>(&[1.0, 1.0], 1.0, &spec, |x| [x[0] * x[0]]).unwrap();
        // ∫_disc (1 + r cos)^2 = π + π/4
        assert!((b2.value[0] - (PI + PI / 4.0)).abs() < 1e-12);
    }

    #[test]
    fn sphere_rejects_other_dims() {
        let spec = QuadratureSpec::default();
        assert!(integrate_sphere::<1, _>(&[0.0; 4], 1.0, &spec, |_, _| [1.0]).is_err());
    }

    #[test]
    fn refinement_failure_is_reported() {
        let spec = QuadratureSpec {
            max_refinements: 1,
            ..Default::default()
        };
        let r = integrate_sphere::<1, _>(&[0.0, 0.0], 1.0, &spec, |x, _| {
            [(200.0 * x[0]).exp()]
        });
        assert_eq!(r.unwrap_err().kind(), "QuadratureError");
    }

    #[test]
    fn interval_integrates_smooth() {
        let v = integrate_interval(|x| Ok(x.sin()), 0.0, PI, 1e-13, 4).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }
}
