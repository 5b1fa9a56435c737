//! Zero sets: detection on segments, nodal-volume estimation, certified
//! projection lower bounds, signed-ball search and zero-cube counting.

mod marching;
mod signed;

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::geom::{dist, unit_ball_volume, Ball, Region};
use crate::hfun::Field;

pub use marching::{clip_segment, clipped_area, positive, Segment, Triangle};
pub use signed::{signed_balls_in_layers, SignedBallPair, SignedBallSearch, SignedBallSpec};

use marching::Grid;

/// Bisection for a zero of `f` on `[a, b]`.
///
/// Returns `None` when `f(a)` and `f(b)` have the same sign. Otherwise the
/// returned point lies within `tol · |b − a|` of a sign change.
pub fn zero_on_segment<F: Field + ?Sized>(f: &F, a: &[f64], b: &[f64], tol: f64) -> Option<Vec<f64>> {
    let at = |t: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect() };
    let fa = f.value(a);
    let fb = f.value(b);
    if fa == 0.0 {
        return Some(a.to_vec());
    }
    if fb == 0.0 {
        return Some(b.to_vec());
    }
    if (fa > 0.0) == (fb > 0.0) || !fa.is_finite() || !fb.is_finite() {
        return None;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let sa = fa > 0.0;
    let tol = tol.max(f64::EPSILON);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid == lo || mid == hi {
            break;
        }
        let v = f.value(&at(mid));
        if v == 0.0 {
            return Some(at(mid));
        }
        if (v > 0.0) == sa {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(at(0.5 * (lo + hi)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodalMethod {
    Marching,
    Projection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodalEstimate {
    pub region: Region,
    pub resolution: usize,
    /// `(n−1)`-dimensional measure of the zero set inside the region.
    pub measure: f64,
    pub method: NodalMethod,
    /// Grid cells whose corners change sign.
    pub cell_count: usize,
    /// `|M(res) − M(res/2)|`, a first-order Richardson indicator.
    pub error_indicator: f64,
}

fn check_resolution(resolution: usize) -> Result<()> {
    if resolution < 8 {
        return Err(LabError::Resolution(format!(
            "{resolution} cells per side (minimum 8)"
        )));
    }
    Ok(())
}

fn grid_for<F: Field + ?Sized>(f: &F, region: &Region, resolution: usize) -> Result<Grid> {
    let n = region.dim();
    if n != 2 && n != 3 {
        return Err(LabError::Dimension(n));
    }
    let (lo, hi) = region.bounding_box();
    Ok(Grid::sample(f, lo, hi, resolution))
}

fn measure_once<F: Field + ?Sized>(f: &F, region: &Region, resolution: usize) -> Result<(f64, usize)> {
    let g = grid_for(f, region, resolution)?;
    if region.dim() == 2 {
        let (segs, cells) = marching::squares(&g);
        let total = segs
            .par_iter()
            .map(|s| {
                let len = dist(&s.a, &s.b);
                clip_segment(region, &s.a, &s.b)
                    .iter()
                    .map(|(t0, t1)| (t1 - t0) * len)
                    .sum::<f64>()
            })
            .collect::<Vec<_>>()
            .iter()
            .fold(0.0, |a, b| a + b);
        Ok((total, cells))
    } else {
        let (tris, cells) = marching::tetrahedra(&g);
        let total = tris
            .par_iter()
            .map(|t| clipped_area(t, region))
            .collect::<Vec<_>>()
            .iter()
            .fold(0.0, |a, b| a + b);
        Ok((total, cells))
    }
}

/// Measure of `{f = 0} ∩ region` by marching squares (2D) or marching
/// tetrahedra (3D) with linear interpolation, clipped exactly to the region.
pub fn nodal_volume<F: Field + ?Sized>(f: &F, region: &Region, resolution: usize) -> Result<NodalEstimate> {
    check_resolution(resolution)?;
    let (measure, cell_count) = measure_once(f, region, resolution)?;
    let (coarse, _) = measure_once(f, region, resolution / 2)?;
    Ok(NodalEstimate {
        region: region.clone(),
        resolution,
        measure,
        method: NodalMethod::Marching,
        cell_count,
        error_indicator: (measure - coarse).abs(),
    })
}

/// Zero curves of a planar function as polylines, clipped to the region.
pub fn nodal_polylines<F: Field + ?Sized>(f: &F, region: &Region, resolution: usize) -> Result<Vec<Vec<[f64; 2]>>> {
    check_resolution(resolution)?;
    if region.dim() != 2 {
        return Err(LabError::Dimension(region.dim()));
    }
    let g = grid_for(f, region, resolution)?;
    let (segs, _) = marching::squares(&g);
    // Clipped pieces get fresh keys so they only chain where they are intact.
    let mut fresh = u64::MAX;
    let mut pieces = Vec::with_capacity(segs.len());
    for s in segs {
        for (t0, t1) in clip_segment(region, &s.a, &s.b) {
            let at = |t: f64| [s.a[0] + t * (s.b[0] - s.a[0]), s.a[1] + t * (s.b[1] - s.a[1])];
            let mut next_key = |keep: bool, k: u64| {
                if keep {
                    k
                } else {
                    fresh -= 1;
                    fresh
                }
            };
            let ka = next_key(t0 == 0.0, s.keys[0]);
            let kb = next_key(t1 == 1.0, s.keys[1]);
            pieces.push(Segment {
                a: at(t0),
                b: at(t1),
                keys: [ka, kb],
            });
        }
    }
    Ok(chain(&pieces))
}

fn chain(segs: &[Segment]) -> Vec<Vec<[f64; 2]>> {
    let mut by_key: HashMap<u64, Vec<usize>> = HashMap::new();
    for (i, s) in segs.iter().enumerate() {
        by_key.entry(s.keys[0]).or_default().push(i);
        by_key.entry(s.keys[1]).or_default().push(i);
    }
    let mut used = vec![false; segs.len()];
    let mut out = Vec::new();
    // Walk from open ends first so open curves come out whole.
    let mut order: Vec<usize> = (0..segs.len())
        .filter(|&i| segs[i].keys.iter().any(|k| by_key[k].len() == 1))
        .collect();
    order.extend(0..segs.len());
    for start in order {
        if used[start] {
            continue;
        }
        used[start] = true;
        let s = &segs[start];
        let mut pts = vec![s.a, s.b];
        let mut key = s.keys[1];
        loop {
            let next = by_key[&key].iter().copied().find(|&j| !used[j]);
            let Some(j) = next else { break };
            used[j] = true;
            let t = &segs[j];
            if t.keys[0] == key {
                pts.push(t.b);
                key = t.keys[1];
            } else {
                pts.push(t.a);
                key = t.keys[0];
            }
        }
        // Extend backwards from the start for curves entered mid-way.
        let mut key = s.keys[0];
        let mut head = Vec::new();
        loop {
            let next = by_key[&key].iter().copied().find(|&j| !used[j]);
            let Some(j) = next else { break };
            used[j] = true;
            let t = &segs[j];
            if t.keys[0] == key {
                head.push(t.b);
                key = t.keys[1];
            } else {
                head.push(t.a);
                key = t.keys[0];
            }
        }
        if !head.is_empty() {
            head.reverse();
            head.extend(pts);
            pts = head;
        }
        out.push(pts);
    }
    out
}

/// Number of times the polylines pass from `inside(p) == true` to `false` or
/// back (half-open rule, so a vertex on the boundary is counted once).
pub fn count_crossings<P: Fn(&[f64; 2]) -> bool>(polylines: &[Vec<[f64; 2]>], inside: P) -> usize {
    polylines
        .iter()
        .flat_map(|pl| pl.windows(2))
        .filter(|w| inside(&w[0]) != inside(&w[1]))
        .count()
}

/// Zero-set triangles of a 3D function whose centroid lies in the region.
pub fn nodal_triangles<F: Field + ?Sized>(f: &F, region: &Region, resolution: usize) -> Result<Vec<Triangle>> {
    check_resolution(resolution)?;
    if region.dim() != 3 {
        return Err(LabError::Dimension(region.dim()));
    }
    let g = grid_for(f, region, resolution)?;
    let (tris, _) = marching::tetrahedra(&g);
    Ok(tris
        .into_iter()
        .filter(|t| {
            let c: Vec<f64> = (0..3).map(|a| (t[0][a] + t[1][a] + t[2][a]) / 3.0).collect();
            region.contains(&c)
        })
        .collect())
}

/// `ω_{n−1} r^{n−1}`: the zero set separating the two balls projects onto a
/// full `(n−1)`-ball of radius `r`.
pub fn projection_lower_bound(pair: &SignedBallPair) -> Result<f64> {
    let r = pair.radius;
    let n = pair.positive.center.len();
    if r == 0.0 {
        return Ok(0.0);
    }
    if dist(&pair.positive.center, &pair.negative.center) <= 2.0 * r {
        return Err(LabError::Geometry("signed balls overlap".into()));
    }
    Ok(unit_ball_volume(n - 1) * r.powi(n as i32 - 1))
}

/// Cubes of side `radius/N` (lattice anchored at the center) meeting `2B`
/// whose `s^n` corner-inclusive sample grid is not strictly one-signed.
pub fn count_zero_subcubes<F: Field + ?Sized>(f: &F, ball: &Ball, n_div: usize, s: usize) -> usize {
    let n = ball.dim();
    let h = ball.radius / n_div as f64;
    let s = s.max(2);
    let per_axis = 4 * n_div;
    let total = per_axis.pow(n as u32);
    (0..total)
        .into_par_iter()
        .filter(|&code| {
            let mut lo = vec![0.0; n];
            let mut rem = code;
            for a in 0..n {
                let k = (rem % per_axis) as f64 - 2.0 * n_div as f64;
                rem /= per_axis;
                lo[a] = ball.center[a] + k * h;
            }
            // Distance from the center to the cube.
            let d2: f64 = (0..n)
                .map(|a| {
                    let c = ball.center[a];
                    let g = (lo[a] - c).max(c - (lo[a] + h)).max(0.0);
                    g * g
                })
                .sum();
            if d2.sqrt() > 2.0 * ball.radius {
                return false;
            }
            let mut has_pos = false;
            let mut has_neg = false;
            let mut p = vec![0.0; n];
            for idx in 0..s.pow(n as u32) {
                let mut r = idx;
                for a in 0..n {
                    p[a] = lo[a] + h * (r % s) as f64 / (s - 1) as f64;
                    r /= s;
                }
                let v = f.value(&p);
                if v == 0.0 {
                    return true;
                }
                if v > 0.0 {
                    has_pos = true;
                } else {
                    has_neg = true;
                }
                if has_pos && has_neg {
                    return true;
                }
            }
            false
        })
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Cube;
    use crate::hfun::{HarmonicExpr, Part, Trig};
    use std::f64::consts::PI;

    #[test]
    fn segment_zeros() {
        let x = HarmonicExpr::coordinate(1);
        let z = zero_on_segment(&x, &[-1.0, 0.0], &[1.0, 0.0], 1e-14).unwrap();
        assert!(z[0].abs() < 1e-12 && z[1] == 0.0);
        assert!(zero_on_segment(&HarmonicExpr::constant(1.0), &[0.0, 0.0], &[1.0, 0.0], 1e-12).is_none());

        let f = HarmonicExpr::planar_power(3, Part::Re);
        let z = zero_on_segment(&f, &[0.5f64.cos(), 0.5f64.sin()], &[0.55f64.cos(), 0.55f64.sin()], 1e-14).unwrap();
        let theta = z[1].atan2(z[0]);
        assert!((theta - PI / 6.0).abs() < 1e-9, "{theta}");
    }

    #[test]
    fn rays_of_planar_power() {
        let f = HarmonicExpr::planar_power(10, Part::Re);
        let r = Region::Ball(Ball::new(vec![0.0, 0.0], 2.0).unwrap());
        let e = nodal_volume(&f, &r, 512).unwrap();
        assert!((e.measure - 40.0).abs() < 0.4, "{}", e.measure);
    }

    #[test]
    fn exp_trig_lines() {
        let f = HarmonicExpr::exp_trig(100.0, Trig::Sin);
        let q = Region::Cube(Cube::from_corner(&[0.0, 0.0], 1.0));
        let e = nodal_volume(&f, &q, 400).unwrap();
        // Lines y = kπ/100, k = 1..31; the edge y = 0 is not a crossing.
        assert!((e.measure - 31.0).abs() < 0.31, "{}", e.measure);
    }

    #[test]
    fn resolution_floor() {
        let f = HarmonicExpr::coordinate(1);
        let r = Region::Ball(Ball::unit(2));
        assert_eq!(nodal_volume(&f, &r, 7).unwrap_err().kind(), "ResolutionError");
        assert_eq!(nodal_volume(&HarmonicExpr::constant(1.0), &r, 8).unwrap().measure, 0.0);
    }

    #[test]
    fn slice_of_ball_3d() {
        let f = HarmonicExpr::coordinate(1);
        let r = Region::Ball(Ball::unit(3));
        let e = nodal_volume(&f, &r, 32).unwrap();
        assert!((e.measure - PI).abs() < 0.01 * PI, "{}", e.measure);
        let c = Region::Cube(Cube::new(vec![0.1, 0.0, 0.0], 0.5).unwrap());
        let e = nodal_volume(&f, &c, 16).unwrap();
        assert!((e.measure - 1.0).abs() < 1e-9, "{}", e.measure);
    }

    #[test]
    fn projection_bounds() {
        let mk = |n: usize, r: f64| SignedBallPair {
            positive: Ball { center: vec![1.0; n], radius: r },
            negative: Ball { center: vec![-1.0; n], radius: r },
            radius: r,
            layer_index: 0,
            certified: false,
        };
        assert!((projection_lower_bound(&mk(2, 0.1)).unwrap() - 0.2).abs() < 1e-15);
        assert!((projection_lower_bound(&mk(3, 0.1)).unwrap() - PI * 0.01).abs() < 1e-15);
        assert_eq!(projection_lower_bound(&mk(2, 0.0)).unwrap(), 0.0);
        assert_eq!(projection_lower_bound(&mk(2, 2.0)).unwrap_err().kind(), "GeometryError");
    }

    #[test]
    fn zero_subcube_counts() {
        // Columns on both sides of x₁ = 0 touch the hyperplane: 2 × 40 cubes.
        let f = HarmonicExpr::coordinate(1);
        assert_eq!(count_zero_subcubes(&f, &Ball::unit(2), 10, 4), 80);
        assert_eq!(count_zero_subcubes(&HarmonicExpr::constant(1.0), &Ball::unit(2), 10, 4), 0);
    }

    #[test]
    fn polylines_cross_circle() {
        let f = HarmonicExpr::planar_power(10, Part::Re);
        let r = Region::Cube(Cube::new(vec![0.0, 0.0], 2.0).unwrap());
        let pl = nodal_polylines(&f, &r, 256).unwrap();
        assert_eq!(count_crossings(&pl, |p| p[0] * p[0] + p[1] * p[1] < 1.0), 20);
    }
}
