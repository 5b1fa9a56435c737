//! Balls, cubes, spherical layers and tunnels.
//!
//! All regions are closed. Cubes carry an optional orthonormal frame so that
//! tunnel subcubes can point in arbitrary directions; user-facing cubes are
//! axis-aligned.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Volume of the unit ball in `R^k`.
pub fn unit_ball_volume(k: usize) -> f64 {
    use std::f64::consts::PI;
    match k {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(k - 2) * 2.0 * PI / k as f64,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) || center.iter().any(|c| !c.is_finite()) {
            return Err(LabError::Parse(format!("invalid ball radius {radius}")));
        }
        Ok(Ball { center, radius })
    }

    pub fn unit(dim: usize) -> Self {
        Ball {
            center: vec![0.0; dim],
            radius: 1.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// The concentric ball `kB`.
    pub fn scale(&self, k: f64) -> Ball {
        Ball {
            center: self.center.clone(),
            radius: k * self.radius,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        dist(&self.center, x) <= self.radius
    }

    pub fn contains_ball(&self, other: &Ball) -> bool {
        dist(&self.center, &other.center) + other.radius <= self.radius * (1.0 + 1e-12)
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        (dist(&self.center, x) - self.radius).max(0.0)
    }

    pub fn volume(&self) -> f64 {
        unit_ball_volume(self.dim()) * self.radius.powi(self.dim() as i32)
    }
}

pub fn scale_ball(b: &Ball, k: f64) -> Ball {
    b.scale(k)
}

/// Hypercube `center + frame·[−half_side, half_side]^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cube {
    pub center: Vec<f64>,
    pub half_side: f64,
    /// Rows are the cube's axis directions; `None` means the standard basis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<Vec<Vec<f64>>>,
}

impl Cube {
    pub fn new(center: Vec<f64>, half_side: f64) -> Result<Self> {
        if !(half_side.is_finite() && half_side > 0.0) {
            return Err(LabError::Parse(format!("invalid cube half side {half_side}")));
        }
        Ok(Cube {
            center,
            half_side,
            frame: None,
        })
    }

    /// Axis-aligned box `[lo, lo + side]^n`.
    pub fn from_corner(lo: &[f64], side: f64) -> Self {
        Cube {
            center: lo.iter().map(|a| a + side / 2.0).collect(),
            half_side: side / 2.0,
            frame: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn side(&self) -> f64 {
        2.0 * self.half_side
    }

    pub fn diam(&self) -> f64 {
        self.side() * (self.dim() as f64).sqrt()
    }

    pub fn volume(&self) -> f64 {
        self.side().powi(self.dim() as i32)
    }

    /// Homothetic copy `ℓQ`.
    pub fn scale(&self, l: f64) -> Cube {
        Cube {
            center: self.center.clone(),
            half_side: l * self.half_side,
            frame: self.frame.clone(),
        }
    }

    pub fn axis(&self, i: usize) -> Vec<f64> {
        match &self.frame {
            Some(f) => f[i].clone(),
            None => {
                let mut e = vec![0.0; self.dim()];
                e[i] = 1.0;
                e
            }
        }
    }

    /// World point from local coordinates (each in `[−half_side, half_side]`).
    pub fn point(&self, local: &[f64]) -> Vec<f64> {
        match &self.frame {
            None => self.center.iter().zip(local).map(|(c, u)| c + u).collect(),
            Some(f) => {
                let mut p = self.center.clone();
                for (row, u) in f.iter().zip(local) {
                    for (pi, r) in p.iter_mut().zip(row) {
                        *pi += u * r;
                    }
                }
                p
            }
        }
    }

    pub fn to_local(&self, x: &[f64]) -> Vec<f64> {
        let d: Vec<f64> = x.iter().zip(&self.center).map(|(a, c)| a - c).collect();
        match &self.frame {
            None => d,
            Some(f) => f.iter().map(|row| dot(row, &d)).collect(),
        }
    }

    /// Map a local gradient-free direction into the world frame.
    pub fn to_world_vector(&self, local: &[f64]) -> Vec<f64> {
        match &self.frame {
            None => local.to_vec(),
            Some(f) => {
                let mut v = vec![0.0; self.dim()];
                for (row, u) in f.iter().zip(local) {
                    for (vi, r) in v.iter_mut().zip(row) {
                        *vi += u * r;
                    }
                }
                v
            }
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let tol = 1e-12 * self.half_side;
        self.to_local(x).iter().all(|u| u.abs() <= self.half_side + tol)
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        self.to_local(x)
            .iter()
            .map(|u| {
                let e = (u.abs() - self.half_side).max(0.0);
                e * e
            })
            .sum::<f64>()
            .sqrt()
    }

    /// All `2^n` corners.
    pub fn corners(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..(1usize << n))
            .map(|mask| {
                let local: Vec<f64> = (0..n)
                    .map(|i| {
                        if mask >> i & 1 == 1 {
                            self.half_side
                        } else {
                            -self.half_side
                        }
                    })
                    .collect();
                self.point(&local)
            })
            .collect()
    }

    /// `A^n` congruent subcubes in lexicographic grid order (first axis
    /// slowest).
    pub fn subdivide(&self, a: usize) -> Vec<Cube> {
        let n = self.dim();
        let a = a.max(1);
        let h = self.half_side / a as f64;
        let total = a.pow(n as u32);
        (0..total)
            .map(|idx| {
                let mut rem = idx;
                let mut local = vec![0.0; n];
                for i in (0..n).rev() {
                    let k = rem % a;
                    rem /= a;
                    local[i] = -self.half_side + (2 * k + 1) as f64 * h;
                }
                Cube {
                    center: self.point(&local),
                    half_side: h,
                    frame: self.frame.clone(),
                }
            })
            .collect()
    }
}

pub fn subdivide_cube(q: &Cube, a: usize) -> Vec<Cube> {
    q.subdivide(a)
}

/// Annulus `ρ − 10w ≤ |x − center| ≤ ρ + 10w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphericalLayer {
    pub center: Vec<f64>,
    pub rho: f64,
    pub w: f64,
}

impl SphericalLayer {
    pub fn new(center: Vec<f64>, rho: f64, w: f64) -> Result<Self> {
        if !(w > 0.0 && 20.0 * w < rho) {
            return Err(LabError::Geometry(format!(
                "layer needs 0 < 20w < rho (rho={rho}, w={w})"
            )));
        }
        Ok(SphericalLayer { center, rho, w })
    }

    pub fn inner(&self) -> f64 {
        self.rho - 10.0 * self.w
    }

    pub fn outer(&self) -> f64 {
        self.rho + 10.0 * self.w
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let r = dist(&self.center, x);
        self.inner() <= r && r <= self.outer()
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        let r = dist(&self.center, x);
        (self.inner() - r).max(r - self.outer()).max(0.0)
    }
}

/// Orthonormal completion of `v` to a frame of `R^n` (Gram–Schmidt over the
/// standard basis, deterministic).
pub fn complement_frame(v: &[f64]) -> Vec<Vec<f64>> {
    let n = v.len();
    let mut basis: Vec<Vec<f64>> = vec![v.to_vec()];
    for i in 0..n {
        if basis.len() == n {
            break;
        }
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        for b in &basis {
            let d = dot(&e, b);
            for (ej, bj) in e.iter_mut().zip(b) {
                *ej -= d * bj;
            }
        }
        let l = norm(&e);
        if l > 1e-8 {
            e.iter_mut().for_each(|x| *x /= l);
            basis.push(e);
        }
    }
    basis.remove(0);
    basis
}

/// Hyper-rectangle with one long side, chopped into a chain of cubes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tunnel {
    /// Center of the beginning face.
    pub anchor: Vec<f64>,
    pub direction: Vec<f64>,
    pub length: f64,
    pub width: f64,
    /// Orthonormal basis of the cross-section (`n − 1` vectors).
    pub frame: Vec<Vec<f64>>,
}

impl Tunnel {
    pub fn new(anchor: Vec<f64>, direction: Vec<f64>, length: f64, width: f64) -> Result<Self> {
        let l = norm(&direction);
        if !(l > 0.0) || !(length > 0.0) || !(width > 0.0) {
            return Err(LabError::Geometry("tunnel needs a direction, length and width".into()));
        }
        let v: Vec<f64> = direction.iter().map(|a| a / l).collect();
        let frame = complement_frame(&v);
        Ok(Tunnel {
            anchor,
            direction: v,
            length,
            width,
            frame,
        })
    }

    pub fn dim(&self) -> usize {
        self.anchor.len()
    }

    /// Number of subcubes `ℓ/h`, which must be integral.
    pub fn m(&self) -> Result<usize> {
        let ratio = self.length / self.width;
        let m = ratio.round();
        if m < 1.0 || (ratio - m).abs() > 1e-9 * ratio.max(1.0) {
            return Err(LabError::NonIntegralChop {
                length: self.length,
                width: self.width,
            });
        }
        Ok(m as usize)
    }

    pub fn end_center(&self) -> Vec<f64> {
        self.anchor
            .iter()
            .zip(&self.direction)
            .map(|(a, v)| a + self.length * v)
            .collect()
    }

    fn cube_frame(&self) -> Vec<Vec<f64>> {
        let mut f = vec![self.direction.clone()];
        f.extend(self.frame.iter().cloned());
        f
    }

    /// `q₁, …, q_m` from the beginning face to the end face.
    pub fn subcubes(&self) -> Result<Vec<Cube>> {
        let m = self.m()?;
        let h = self.length / m as f64;
        let frame = self.cube_frame();
        Ok((1..=m)
            .map(|k| Cube {
                center: self
                    .anchor
                    .iter()
                    .zip(&self.direction)
                    .map(|(a, v)| a + (k as f64 - 0.5) * h * v)
                    .collect(),
                half_side: h / 2.0,
                frame: Some(frame.clone()),
            })
            .collect())
    }

    /// `K^{n−1}` parallel subtunnels of width `w/K` tiling the cross-section.
    pub fn split(&self, k: usize) -> Vec<Tunnel> {
        let n = self.dim();
        let k = k.max(1);
        let sub = self.width / k as f64;
        let total = k.pow((n - 1) as u32);
        (0..total)
            .map(|idx| {
                let mut rem = idx;
                let mut anchor = self.anchor.clone();
                for j in (0..n - 1).rev() {
                    let i = rem % k;
                    rem /= k;
                    let off = -self.width / 2.0 + (i as f64 + 0.5) * sub;
                    for (a, e) in anchor.iter_mut().zip(&self.frame[j]) {
                        *a += off * e;
                    }
                }
                Tunnel {
                    anchor,
                    direction: self.direction.clone(),
                    length: self.length,
                    width: sub,
                    frame: self.frame.clone(),
                }
            })
            .collect()
    }

    /// Axial and lateral local coordinates of `x`.
    fn local(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let d: Vec<f64> = x.iter().zip(&self.anchor).map(|(a, b)| a - b).collect();
        (
            dot(&d, &self.direction),
            self.frame.iter().map(|e| dot(e, &d)).collect(),
        )
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.distance(x) <= 1e-12 * self.width
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        let (t, lat) = self.local(x);
        let axial = (-t).max(t - self.length).max(0.0);
        let mut acc = axial * axial;
        for u in lat {
            let e = (u.abs() - self.width / 2.0).max(0.0);
            acc += e * e;
        }
        acc.sqrt()
    }

    pub fn corners(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut out = Vec::new();
        for mask in 0..(1usize << n) {
            let mut p = self.anchor.clone();
            if mask & 1 == 1 {
                for (pi, v) in p.iter_mut().zip(&self.direction) {
                    *pi += self.length * v;
                }
            }
            for j in 0..n - 1 {
                let s = if mask >> (j + 1) & 1 == 1 { 0.5 } else { -0.5 };
                for (pi, e) in p.iter_mut().zip(&self.frame[j]) {
                    *pi += s * self.width * e;
                }
            }
            out.push(p);
        }
        out
    }

    pub fn volume(&self) -> f64 {
        self.length * self.width.powi(self.dim() as i32 - 1)
    }

    /// Distance between two parallel tunnels sharing direction and frame.
    /// Falls back to a conservative axis-to-axis bound otherwise.
    pub fn separation(&self, other: &Tunnel) -> f64 {
        let parallel = dot(&self.direction, &other.direction) > 1.0 - 1e-12;
        if parallel {
            let (t, lat) = self.local(&other.anchor);
            let axial = (t - self.length).max(-(t + other.length)).max(0.0);
            let half = 0.5 * (self.width + other.width);
            let mut acc = axial * axial;
            for u in lat {
                let e = (u.abs() - half).max(0.0);
                acc += e * e;
            }
            acc.sqrt()
        } else {
            let r1 = 0.5 * (self.length.powi(2) + (self.dim() - 1) as f64 * self.width.powi(2)).sqrt();
            let r2 = 0.5 * (other.length.powi(2) + (other.dim() - 1) as f64 * other.width.powi(2)).sqrt();
            let c1: Vec<f64> = self
                .anchor
                .iter()
                .zip(&self.direction)
                .map(|(a, v)| a + 0.5 * self.length * v)
                .collect();
            let c2: Vec<f64> = other
                .anchor
                .iter()
                .zip(&other.direction)
                .map(|(a, v)| a + 0.5 * other.length * v)
                .collect();
            (dist(&c1, &c2) - r1 - r2).max(0.0)
        }
    }
}

pub fn tunnel_subcubes(t: &Tunnel) -> Result<Vec<Cube>> {
    t.subcubes()
}

pub fn split_tunnel(r: &Tunnel, k: usize) -> Vec<Tunnel> {
    r.split(k)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Ball(Ball),
    Cube(Cube),
    Layer(SphericalLayer),
    Tunnel(Tunnel),
}

impl Region {
    pub fn dim(&self) -> usize {
        match self {
            Region::Ball(b) => b.dim(),
            Region::Cube(c) => c.dim(),
            Region::Layer(l) => l.center.len(),
            Region::Tunnel(t) => t.dim(),
        }
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        match self {
            Region::Ball(b) => b.distance(x),
            Region::Cube(c) => c.distance(x),
            Region::Layer(l) => l.distance(x),
            Region::Tunnel(t) => t.distance(x),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Region::Ball(b) => b.contains(x),
            Region::Cube(c) => c.contains(x),
            Region::Layer(l) => l.contains(x),
            Region::Tunnel(t) => t.contains(x),
        }
    }

    /// Axis-aligned bounding box `(lo, hi)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Region::Ball(b) => (
                b.center.iter().map(|c| c - b.radius).collect(),
                b.center.iter().map(|c| c + b.radius).collect(),
            ),
            Region::Layer(l) => (
                l.center.iter().map(|c| c - l.outer()).collect(),
                l.center.iter().map(|c| c + l.outer()).collect(),
            ),
            Region::Cube(c) => bbox_of(&c.corners()),
            Region::Tunnel(t) => bbox_of(&t.corners()),
        }
    }

    pub fn from_json(text: &str) -> Result<Region> {
        let r: Region = serde_json::from_str(text)?;
        match &r {
            Region::Ball(b) => {
                Ball::new(b.center.clone(), b.radius)?;
            }
            Region::Cube(c) => {
                Cube::new(c.center.clone(), c.half_side)?;
            }
            Region::Layer(l) => {
                SphericalLayer::new(l.center.clone(), l.rho, l.w)?;
            }
            Region::Tunnel(t) => {
                t.m()?;
            }
        }
        Ok(r)
    }
}

fn bbox_of(points: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = points[0].len();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for p in points {
        for i in 0..n {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    (lo, hi)
}

/// `dist(x, S) ≤ ℓ`.
pub fn neighborhood_contains(s: &Region, l: f64, x: &[f64]) -> bool {
    s.distance(x) <= l
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_scaling() {
        let b = Ball::new(vec![1.0, 1.0], 0.5).unwrap();
        let s = scale_ball(&b, 4.0);
        assert_eq!(s.center, vec![1.0, 1.0]);
        assert_eq!(s.radius, 2.0);
        assert_eq!(scale_ball(&b, 1.0), b);
    }

    #[test]
    fn subdivision_counts_and_volume() {
        let q = Cube::from_corner(&[0.0, 0.0], 1.0);
        let s = q.subdivide(2);
        assert_eq!(s.len(), 4);
        assert!(s.iter().all(|c| (c.side() - 0.5).abs() < 1e-15));
        assert_eq!(q.subdivide(1), vec![q.clone()]);
        let c3 = Cube::from_corner(&[0.0; 3], 1.0);
        let parts = c3.subdivide(3);
        assert_eq!(parts.len(), 27);
        let vol: f64 = parts.iter().map(|c| c.volume()).sum();
        assert!((vol - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tunnel_chain() {
        let t = Tunnel::new(vec![0.0, 0.0], vec![1.0, 0.0], 1.0, 0.25).unwrap();
        let q = t.subcubes().unwrap();
        assert_eq!(q.len(), 4);
        assert!(q[0].contains(&t.anchor));
        assert!(q[3].contains(&t.end_center()));
        let single = Tunnel::new(vec![0.0, 0.0], vec![0.0, 1.0], 0.3, 0.3).unwrap();
        assert_eq!(single.subcubes().unwrap().len(), 1);
        let bad = Tunnel::new(vec![0.0, 0.0], vec![1.0, 0.0], 1.0, 0.3).unwrap();
        assert_eq!(bad.subcubes().unwrap_err().kind(), "NonIntegralChop");
    }

    #[test]
    fn tunnel_split_counts() {
        let t = Tunnel::new(vec![0.0, 0.0], vec![1.0, 0.0], 1.0, 0.4).unwrap();
        let s = t.split(4);
        assert_eq!(s.len(), 4);
        assert!(s.iter().all(|x| (x.width - 0.1).abs() < 1e-15));
        assert_eq!(t.split(1), vec![t.clone()]);
        let t3 = Tunnel::new(vec![0.0; 3], vec![0.0, 0.0, 1.0], 0.9, 0.3).unwrap();
        assert_eq!(t3.split(3).len(), 9);
    }

    #[test]
    fn neighborhoods() {
        let b = Region::Ball(Ball::unit(2));
        assert!(neighborhood_contains(&b, 0.5, &[1.4, 0.0]));
        assert!(!neighborhood_contains(&b, 0.5, &[1.6, 0.0]));
        let n = 2.0f64;
        let h = 0.01;
        let t = Tunnel::new(vec![0.0, 0.0], vec![1.0, 0.0], 0.1, h).unwrap();
        let x = [0.05, h / 2.0 + 49.0 * n.sqrt() * h];
        assert!(neighborhood_contains(&Region::Tunnel(t), 50.0 * n.sqrt() * h, &x));
    }

    #[test]
    fn layer_membership() {
        let l = SphericalLayer::new(vec![0.0, 0.0], 1.5, 0.05).unwrap();
        assert!(l.contains(&[1.0, 0.0]));
        assert!(l.contains(&[0.0, 2.0]));
        assert!(!l.contains(&[0.0, 2.01]));
        assert!(SphericalLayer::new(vec![0.0, 0.0], 1.0, 0.05).is_err());
    }

    #[test]
    fn region_json() {
        let r = Region::from_json(r#"{"kind":"ball","center":[0,0],"radius":2}"#).unwrap();
        assert_eq!(r, Region::Ball(Ball::new(vec![0.0, 0.0], 2.0).unwrap()));
        let text = serde_json::to_string(&r).unwrap();
        assert_eq!(Region::from_json(&text).unwrap(), r);
    }

    #[test]
    fn unit_ball_volumes() {
        use std::f64::consts::PI;
        assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
    }
}
