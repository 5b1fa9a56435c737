//! Tunnel bundles near the maximum of `|f|`, their growth along the chain of
//! subcubes, and zero extraction inside them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::geom::{dist, Ball, Cube, Tunnel};
use crate::growth::{doubling_index, max_doubling_index, sup_on_ball, sup_on_cube, GrowthSpec, IndexGrid};
use crate::hfun::Field;
use crate::nodal::zero_on_segment;

use super::MultiscaleParams;

/// Smallest `K ≥ k_min` with `c′ ln K / ln ln K ≥ ln A`.
pub fn k_from_a(a: f64, c_prime: f64, k_min: usize) -> usize {
    let target = a.ln();
    let mut k = k_min.max(16);
    while c_prime * (k as f64).ln() / (k as f64).ln().ln() < target {
        k += 1;
    }
    k
}

/// `C_K = exp(c′ ln K / ln ln K)`.
pub fn c_k(k: usize, c_prime: f64) -> f64 {
    let l = (k as f64).ln();
    (c_prime * l / l.ln()).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunnelBundle {
    pub ball: Ball,
    /// Maximum point of `|f|` on `∂(1.5B)`; center of the end face of `R`.
    pub x0: Vec<f64>,
    pub k: usize,
    /// Width of `R` (absolute).
    pub width: f64,
    /// Subcubes per subtunnel.
    pub m: usize,
    pub outer: Tunnel,
    pub tunnels: Vec<Tunnel>,
}

/// Tunnel `R` of length `¼r` and width `w r` (with `w ≈ c₀/ln K`, adjusted
/// so that each of the `K^{n−1}` subtunnels chops into an integral number of
/// cubes) whose end face is centered at the maximum of `|f|` on `∂(1.5B)`.
pub fn build_tunnel_bundle<F: Field + ?Sized>(
    f: &F,
    ball: &Ball,
    k: usize,
    c0: f64,
    spec: &GrowthSpec,
) -> Result<TunnelBundle> {
    if k < 2 {
        return Err(LabError::Precondition(format!("K = {k} must be at least 2")));
    }
    let r = ball.radius;
    let w0 = c0 / (k as f64).ln();
    let m = ((k as f64) / (4.0 * w0)).round().max(1.0) as usize;
    let w = k as f64 / (4.0 * m as f64);
    let top = sup_on_ball(f, &ball.scale(1.5), spec)?;
    let x0 = top.witness;
    let dir: Vec<f64> = x0.iter().zip(&ball.center).map(|(x, c)| (x - c) / (1.5 * r)).collect();
    let anchor: Vec<f64> = ball.center.iter().zip(&dir).map(|(c, d)| c + 1.25 * r * d).collect();
    let outer = Tunnel::new(anchor, dir, 0.25 * r, w * r)?;
    let tunnels = outer.split(k);
    for t in &tunnels {
        t.m()?;
    }
    let big = ball.scale(1.6);
    if !outer.corners().iter().all(|p| big.contains(p)) {
        return Err(LabError::Geometry("R is not contained in 1.6B".into()));
    }
    let h = w * r / k as f64;
    let start = Tunnel {
        length: h,
        ..outer.clone()
    };
    let near = ball.scale(1.3);
    if !start.corners().iter().all(|p| near.contains(p)) {
        return Err(LabError::Geometry("the first layer of cubes is not contained in 1.3B".into()));
    }
    Ok(TunnelBundle {
        ball: ball.clone(),
        x0,
        k,
        width: w * r,
        m,
        outer,
        tunnels,
    })
}

fn cube_sups<F: Field + ?Sized>(f: &F, cubes: &[Cube], spec: &GrowthSpec) -> Result<Vec<f64>> {
    cubes
        .par_iter()
        .map(|q| sup_on_cube(f, q, spec).map(|s| s.value))
        .collect()
}

fn increment(sups: &[f64], spec: &GrowthSpec) -> Result<f64> {
    let first = sups[0];
    let last = *sups.last().unwrap();
    if first < spec.floor || last < spec.floor {
        return Err(LabError::Degenerate("f vanishes on an end cube of the tunnel".into()));
    }
    Ok((last / first).ln())
}

/// `Z = ln(sup_{q_m}|f| / sup_{q_1}|f|)`.
pub fn lmi<F: Field + ?Sized>(f: &F, t: &Tunnel, spec: &GrowthSpec) -> Result<f64> {
    let cubes = t.subcubes()?;
    if cubes.len() < 2 {
        return Err(LabError::Precondition("tunnel has fewer than two subcubes".into()));
    }
    let ends = [cubes[0].clone(), cubes[cubes.len() - 1].clone()];
    increment(&cube_sups(f, &ends, spec)?, spec)
}

/// `max_k N*(inflation · q_k)` and whether any sample was skipped.
pub fn tunnel_max_index<F: Field + ?Sized>(
    f: &F,
    t: &Tunnel,
    inflation: f64,
    grid: &IndexGrid,
    spec: &GrowthSpec,
) -> Result<(f64, bool)> {
    let cubes = t.subcubes()?;
    let res: Vec<(f64, bool)> = cubes
        .par_iter()
        .map(|q| match max_doubling_index(f, &q.scale(inflation), spec, grid) {
            Ok(r) => (r.value, r.clipped || r.skipped > 0),
            // A constant vanishing cube has no meaningful index.
            Err(LabError::Degenerate(_)) => (0.0, true),
            Err(_) => (f64::NAN, true),
        })
        .collect();
    let value = res.iter().map(|r| r.0).filter(|v| v.is_finite()).fold(0.0, f64::max);
    Ok((value, res.iter().any(|r| r.1)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroBall {
    pub ball: Ball,
    /// Index `k` of the cube pair `2q_k ∪ 2q_{k+1}` where the zero was found.
    pub index: usize,
    /// `N(½B_k)`.
    pub half_index: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunnelAnalysis {
    pub tunnel: Tunnel,
    /// Logarithmic multiplicative increment.
    pub z: f64,
    pub sups: Vec<f64>,
    pub max_index: f64,
    pub clipped: bool,
    pub good: bool,
    /// Largest one-step increment `|ln(sup_{q_{k+1}} / sup_{q_k})|`.
    pub harnack_c0: f64,
    /// `m ≤ Z / (2C₀)`.
    pub gate: bool,
    pub zero_balls: Vec<ZeroBall>,
}

/// Sups along the chain, `Z`, `N*` of the inflated cubes and the good flag
/// `N* ≤ level / C_K`.
pub fn analyze_tunnel<F: Field + ?Sized>(
    f: &F,
    t: &Tunnel,
    level: f64,
    ck: f64,
    params: &MultiscaleParams,
) -> Result<TunnelAnalysis> {
    let cubes = t.subcubes()?;
    if cubes.len() < 2 {
        return Err(LabError::Precondition("tunnel has fewer than two subcubes".into()));
    }
    let sups = cube_sups(f, &cubes, &params.growth)?;
    let z = increment(&sups, &params.growth)?;
    let harnack_c0 = sups
        .windows(2)
        .map(|p| (p[1] / p[0]).ln().abs())
        .fold(0.0, f64::max);
    let gate = cubes.len() as f64 <= z / (2.0 * harnack_c0.max(f64::MIN_POSITIVE));
    let (max_index, clipped) = tunnel_max_index(f, t, params.inflation, &params.tunnel_grid, &params.growth)?;
    let good = max_index <= level / ck && (gate || !params.enforce_gate);
    Ok(TunnelAnalysis {
        tunnel: t.clone(),
        z,
        sups,
        max_index,
        clipped,
        good,
        harnack_c0,
        gate,
        zero_balls: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoodTunnels {
    /// Indices with `N* ≤ N / C_K`.
    pub good: Vec<usize>,
    /// Greedy subfamily whose `separation`-neighborhoods are disjoint.
    pub separated: Vec<usize>,
}

/// Greedy pick from `candidates` (in the given order) keeping the
/// `radius`-neighborhoods pairwise disjoint.
pub fn separated_subfamily(tunnels: &[&Tunnel], candidates: &[usize], radius: f64) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    for &i in candidates {
        if chosen.iter().all(|&j| tunnels[i].separation(tunnels[j]) > 2.0 * radius) {
            chosen.push(i);
        }
    }
    chosen
}

pub fn good_tunnels(analyses: &[TunnelAnalysis], level: f64, ck: f64, separation: f64) -> GoodTunnels {
    let good: Vec<usize> = (0..analyses.len())
        .filter(|&i| analyses[i].max_index <= level / ck)
        .collect();
    let tunnels: Vec<&Tunnel> = analyses.iter().map(|a| &a.tunnel).collect();
    let separated = match analyses.first() {
        Some(a) => separated_subfamily(&tunnels, &good, separation * a.tunnel.width),
        None => Vec::new(),
    };
    GoodTunnels { good, separated }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroExtraction {
    /// Zeros found, one per cube pair at most.
    pub detected: usize,
    /// Number of color classes with pairwise disjoint `4B_k`.
    pub classes: usize,
    /// The class with the largest `Σ N(½B_k)`.
    pub balls: Vec<ZeroBall>,
    pub mass: f64,
}

fn grid_points(q: &Cube, s: usize) -> Vec<Vec<f64>> {
    let n = q.dim();
    let s = s.max(2);
    (0..s.pow(n as u32))
        .map(|idx| {
            let mut rem = idx;
            let local: Vec<f64> = (0..n)
                .map(|_| {
                    let k = rem % s;
                    rem /= s;
                    -q.half_side + 2.0 * q.half_side * k as f64 / (s - 1) as f64
                })
                .collect();
            q.point(&local)
        })
        .collect()
}

/// Zeros in `2q_k ∪ 2q_{k+1}` found by sign sampling and bisection, wrapped
/// in balls of radius `zero_ball_factor · h`, thinned to a color class of
/// pairwise disjoint `4B_k`.
pub fn zeros_in_tunnel<F: Field + ?Sized>(f: &F, t: &Tunnel, params: &MultiscaleParams) -> Result<ZeroExtraction> {
    let cubes = t.subcubes()?;
    let h = t.width;
    let radius = params.zero_ball_factor * h;
    let found: Vec<Option<(usize, Vec<f64>)>> = (0..cubes.len().saturating_sub(1))
        .into_par_iter()
        .map(|k| {
            let mut pts = grid_points(&cubes[k].scale(2.0), params.sign_grid);
            pts.extend(grid_points(&cubes[k + 1].scale(2.0), params.sign_grid));
            let vals: Vec<f64> = pts.iter().map(|p| f.value(p)).collect();
            let mut best: Option<(f64, usize, usize)> = None;
            for i in 0..pts.len() {
                if vals[i] <= 0.0 {
                    continue;
                }
                for j in 0..pts.len() {
                    if vals[j] >= 0.0 {
                        continue;
                    }
                    let d = dist(&pts[i], &pts[j]);
                    if best.is_none_or(|b| d < b.0) {
                        best = Some((d, i, j));
                    }
                }
            }
            let (_, i, j) = best?;
            zero_on_segment(f, &pts[i], &pts[j], 1e-15).map(|y| (k, y))
        })
        .collect();
    let zeros: Vec<(usize, Vec<f64>)> = found.into_iter().flatten().collect();
    if zeros.is_empty() {
        return Err(LabError::NotFound("no sign change inside the tunnel".into()));
    }
    let balls: Vec<ZeroBall> = zeros
        .par_iter()
        .map(|(k, y)| -> Result<ZeroBall> {
            let ball = Ball::new(y.clone(), radius)?;
            let half_index = doubling_index(f, &ball.scale(0.5), &params.growth)?;
            Ok(ZeroBall {
                ball,
                index: *k,
                half_index,
            })
        })
        .collect::<Result<_>>()?;

    // Greedy coloring: same-colored balls have disjoint 4B.
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (i, b) in balls.iter().enumerate() {
        let fits = |class: &Vec<usize>| {
            class
                .iter()
                .all(|&j| dist(&b.ball.center, &balls[j].ball.center) > 4.0 * (b.ball.radius + balls[j].ball.radius))
        };
        match classes.iter_mut().find(|c| fits(c)) {
            Some(c) => c.push(i),
            None => classes.push(vec![i]),
        }
    }
    let mass = |c: &Vec<usize>| c.iter().map(|&i| balls[i].half_index).sum::<f64>();
    let best = classes
        .iter()
        .max_by(|a, b| mass(a).total_cmp(&mass(b)))
        .cloned()
        .unwrap_or_default();
    Ok(ZeroExtraction {
        detected: balls.len(),
        classes: classes.len(),
        mass: mass(&best),
        balls: best.into_iter().map(|i| balls[i].clone()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hfun::{HarmonicExpr, Part, Trig};

    #[test]
    fn k_wiring() {
        assert_eq!(k_from_a(4.0, 0.5, 16), 29);
        assert!(c_k(29, 0.5) >= 4.0);
        assert!(c_k(28, 0.5) < 4.0);
        assert_eq!(k_from_a(1.5, 0.5, 16), 16);
    }

    #[test]
    fn bundle_geometry() {
        let f = HarmonicExpr::planar_power(5, Part::Re);
        let spec = GrowthSpec::default();
        let b = build_tunnel_bundle(&f, &Ball::unit(2), 16, 0.5, &spec).unwrap();
        assert_eq!(b.tunnels.len(), 16);
        assert!((crate::geom::norm(&b.x0) - 1.5).abs() < 1e-12);
        let b = build_tunnel_bundle(&f, &Ball::unit(2), 4, 0.25, &spec).unwrap();
        assert_eq!(b.tunnels.len(), 4);
        for t in &b.tunnels {
            assert_eq!(t.m().unwrap(), b.m);
        }
    }

    #[test]
    fn exp_trig_axis() {
        let f = HarmonicExpr::exp_trig(20.0, Trig::Sin);
        let b = build_tunnel_bundle(&f, &Ball::unit(2), 16, 0.5, &GrowthSpec::default()).unwrap();
        assert!(b.outer.direction[0] > 0.99, "{:?}", b.outer.direction);
    }

    #[test]
    fn increment_of_exponential() {
        // sup over each cube is e^{N · right edge} once N h > π.
        let n = 40.0;
        let f = HarmonicExpr::exp_trig(n, Trig::Sin);
        let t = Tunnel::new(vec![0.0, 0.3], vec![1.0, 0.0], 0.8, 0.1).unwrap();
        let z = lmi(&f, &t, &GrowthSpec::default()).unwrap();
        let oracle = n * (0.8 - 0.1);
        assert!((z - oracle).abs() < 0.02 * oracle, "{z} vs {oracle}");
        assert_eq!(lmi(&HarmonicExpr::constant(2.0), &t, &GrowthSpec::default()).unwrap(), 0.0);
    }

    #[test]
    fn radial_increment_of_power() {
        let n = 30u32;
        let f = HarmonicExpr::planar_power(n, Part::Re);
        let t = Tunnel::new(vec![1.3, 0.0], vec![1.0, 0.0], 0.25, 0.01).unwrap();
        let z = lmi(&f, &t, &GrowthSpec::default()).unwrap();
        let oracle = n as f64 * (1.55f64 / 1.3).ln();
        assert!((z - oracle).abs() < 0.05 * oracle, "{z} vs {oracle}");
    }

    #[test]
    fn max_index_near_and_far_from_zeros() {
        let f = HarmonicExpr::coordinate(1);
        let spec = GrowthSpec::default();
        let grid = IndexGrid::coarse();
        let away = Tunnel::new(vec![1.0, 0.0], vec![0.0, 1.0], 0.5, 0.1).unwrap();
        let (v, _) = tunnel_max_index(&f, &away, 1.0, &grid, &spec).unwrap();
        assert!(v < 0.2, "{v}");
        let across = Tunnel::new(vec![-0.25, 0.0], vec![1.0, 0.0], 0.5, 0.1).unwrap();
        let (v, _) = tunnel_max_index(&f, &across, 1.0, &grid, &spec).unwrap();
        assert!(v >= 1.0 - 1e-9, "{v}");
        let (v, _) = tunnel_max_index(&HarmonicExpr::constant(1.0), &across, 1.0, &grid, &spec).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn separated_family() {
        let t = Tunnel::new(vec![0.0, 0.0], vec![1.0, 0.0], 1.0, 0.1).unwrap();
        let parts = t.split(10);
        let refs: Vec<&Tunnel> = parts.iter().collect();
        let all: Vec<usize> = (0..10).collect();
        // Gaps (j − i − 1)·0.01 must exceed two neighborhood radii.
        assert_eq!(separated_subfamily(&refs, &all, 0.0105), vec![0, 4, 8]);
        assert_eq!(separated_subfamily(&refs[..1], &[0], 0.5), vec![0]);
    }

    #[test]
    fn zeros_along_exp_trig() {
        let n = 20.0;
        let f = HarmonicExpr::exp_trig(n, Trig::Sin);
        // Tunnel along y crossing the lines y = kπ/20.
        let t = Tunnel::new(vec![0.1, 0.05], vec![0.0, 1.0], 1.0, 0.02).unwrap();
        let z = zeros_in_tunnel(&f, &t, &MultiscaleParams::default()).unwrap();
        assert!(!z.balls.is_empty());
        for b in &z.balls {
            let k = (b.ball.center[1] * n / std::f64::consts::PI).round();
            assert!((b.ball.center[1] - k * std::f64::consts::PI / n).abs() < 1e-12);
        }
        for (i, a) in z.balls.iter().enumerate() {
            for b in &z.balls[i + 1..] {
                assert!(dist(&a.ball.center, &b.ball.center) > 4.0 * (a.ball.radius + b.ball.radius));
            }
        }
        let e = zeros_in_tunnel(&HarmonicExpr::constant(1.0), &t, &MultiscaleParams::default()).unwrap_err();
        assert_eq!(e.kind(), "NotFound");
    }
}
