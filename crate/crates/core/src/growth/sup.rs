//! Sup norms over balls and cubes by boundary search.
//!
//! The maximum principle puts `sup |f|` on the boundary. Samples are laid out
//! with spacing `δ` chosen from a coarse pass so that `δ · G_t ≤ factor · S`
//! (`G_t` the largest sampled tangential gradient, `S` the coarse sup); the
//! best separated samples are then polished by projected gradient ascent
//! with Armijo backtracking.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::geom::{dist, Ball, Cube};
use crate::hfun::{Field, MAX_DIM};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SupSpec {
    /// Samples per unit of angle in the coarse pass (2D count; 3D uses its
    /// square root per polar direction).
    pub coarse_samples: usize,
    pub spacing_factor: f64,
    pub max_samples: usize,
    pub candidates: usize,
    pub polish_iterations: usize,
}

impl Default for SupSpec {
    fn default() -> Self {
        SupSpec {
            coarse_samples: 64,
            spacing_factor: 0.25,
            max_samples: 1 << 17,
            candidates: 6,
            polish_iterations: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupResult {
    pub value: f64,
    pub witness: Vec<f64>,
    /// `δ · G_t` from the final sampling pass.
    pub error_bound: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Objective {
    /// `|f|`
    Abs,
    /// `sign · f`
    Signed(f64),
}

impl Objective {
    fn eval<F: Field + ?Sized>(&self, f: &F, x: &[f64], grad: &mut [f64]) -> f64 {
        let v = f.value_and_gradient(x, grad);
        let s = match self {
            Objective::Abs => {
                if v < 0.0 {
                    -1.0
                } else {
                    1.0
                }
            }
            Objective::Signed(s) => *s,
        };
        if s != 1.0 {
            grad.iter_mut().for_each(|g| *g *= s);
        }
        s * v
    }
}

/// Boundary surface being searched.
enum Surface<'a> {
    Sphere { center: &'a [f64], radius: f64 },
    Cube(&'a Cube),
}

struct Sample {
    point: Vec<f64>,
    value: f64,
    tangential: f64,
}

impl Surface<'_> {
    fn dim(&self) -> usize {
        match self {
            Surface::Sphere { center, .. } => center.len(),
            Surface::Cube(c) => c.dim(),
        }
    }

    /// Sample points with (approximate) spacing `delta`.
    fn points(&self, delta: f64, max_samples: usize) -> (Vec<Vec<f64>>, f64) {
        let n = self.dim();
        match self {
            Surface::Sphere { center, radius } => match n {
                2 => {
                    let m = ((2.0 * PI * radius / delta).ceil() as usize).clamp(16, max_samples);
                    let pts = (0..m)
                        .map(|k| {
                            let t = 2.0 * PI * k as f64 / m as f64;
                            vec![center[0] + radius * t.cos(), center[1] + radius * t.sin()]
                        })
                        .collect();
                    (pts, 2.0 * PI * radius / m as f64)
                }
                _ => {
                    let cap = ((max_samples / 2) as f64).sqrt() as usize;
                    let nt = ((PI * radius / delta).ceil() as usize).clamp(8, cap.max(8));
                    let np = 2 * nt;
                    let mut pts = Vec::with_capacity(nt * np + 2);
                    for i in 0..nt {
                        let th = PI * (i as f64 + 0.5) / nt as f64;
                        for j in 0..np {
                            let ph = 2.0 * PI * j as f64 / np as f64;
                            pts.push(vec![
                                center[0] + radius * th.sin() * ph.cos(),
                                center[1] + radius * th.sin() * ph.sin(),
                                center[2] + radius * th.cos(),
                            ]);
                        }
                    }
                    pts.push(vec![center[0], center[1], center[2] + radius]);
                    pts.push(vec![center[0], center[1], center[2] - radius]);
                    (pts, PI * radius / nt as f64)
                }
            },
            Surface::Cube(c) => {
                let a = c.half_side;
                let faces = 2 * n;
                let per_face = (max_samples / faces).max(4);
                let cap = (per_face as f64).powf(1.0 / (n - 1) as f64).floor() as usize;
                let p = ((2.0 * a / delta).ceil() as usize + 1).clamp(5, cap.max(5));
                let step = 2.0 * a / (p - 1) as f64;
                let mut pts = Vec::new();
                let face_count = p.pow((n - 1) as u32);
                for axis in 0..n {
                    for side in [-a, a] {
                        for idx in 0..face_count {
                            let mut rem = idx;
                            let mut local = vec![0.0; n];
                            for j in 0..n {
                                if j == axis {
                                    local[j] = side;
                                } else {
                                    let k = rem % p;
                                    rem /= p;
                                    local[j] = -a + k as f64 * step;
                                }
                            }
                            pts.push(c.point(&local));
                        }
                    }
                }
                (pts, step)
            }
        }
    }

    /// Tangential part of a world gradient at `x`.
    fn tangential(&self, x: &[f64], grad: &mut [f64]) {
        match self {
            Surface::Sphere { center, radius } => {
                let mut d = 0.0;
                for i in 0..x.len() {
                    d += grad[i] * (x[i] - center[i]) / radius;
                }
                for i in 0..x.len() {
                    grad[i] -= d * (x[i] - center[i]) / radius;
                }
            }
            Surface::Cube(c) => {
                let local = c.to_local(x);
                let a = c.half_side;
                for (j, u) in local.iter().enumerate() {
                    if (u.abs() - a).abs() <= 1e-12 * a {
                        let axis = c.axis(j);
                        let d: f64 = axis.iter().zip(grad.iter()).map(|(e, g)| e * g).sum();
                        for (g, e) in grad.iter_mut().zip(&axis) {
                            *g -= d * e;
                        }
                        break;
                    }
                }
            }
        }
    }

    fn project(&self, x: &mut [f64], fixed: Option<(usize, f64)>) {
        match self {
            Surface::Sphere { center, radius } => {
                let r = dist(x, center);
                if r > 0.0 {
                    for i in 0..x.len() {
                        x[i] = center[i] + (x[i] - center[i]) * radius / r;
                    }
                }
            }
            Surface::Cube(c) => {
                let a = c.half_side;
                let mut local = c.to_local(x);
                for u in local.iter_mut() {
                    *u = u.clamp(-a, a);
                }
                if let Some((j, s)) = fixed {
                    local[j] = s;
                }
                let p = c.point(&local);
                x.copy_from_slice(&p);
            }
        }
    }

    fn face_of(&self, x: &[f64]) -> Option<(usize, f64)> {
        match self {
            Surface::Sphere { .. } => None,
            Surface::Cube(c) => {
                let local = c.to_local(x);
                let a = c.half_side;
                local
                    .iter()
                    .enumerate()
                    .max_by(|p, q| p.1.abs().total_cmp(&q.1.abs()))
                    .map(|(j, u)| (j, if *u < 0.0 { -a } else { a }))
            }
        }
    }
}

fn sample_all<F: Field + ?Sized>(f: &F, surf: &Surface, obj: Objective, pts: Vec<Vec<f64>>) -> Vec<Sample> {
    let n = surf.dim();
    let eval = |p: Vec<f64>| {
        let mut g = [0.0; MAX_DIM];
        let v = obj.eval(f, &p, &mut g[..n]);
        surf.tangential(&p, &mut g[..n]);
        let t = g[..n].iter().map(|a| a * a).sum::<f64>().sqrt();
        Sample {
            point: p,
            value: v,
            tangential: t,
        }
    };
    if pts.len() > 2048 {
        pts.into_par_iter().map(eval).collect()
    } else {
        pts.into_iter().map(eval).collect()
    }
}

fn polish<F: Field + ?Sized>(
    f: &F,
    surf: &Surface,
    obj: Objective,
    start: &[f64],
    step0: f64,
    iterations: usize,
) -> Result<(f64, Vec<f64>)> {
    let n = surf.dim();
    let fixed = surf.face_of(start);
    let mut x = start.to_vec();
    let mut g = [0.0; MAX_DIM];
    let mut val = obj.eval(f, &x, &mut g[..n]);
    let mut step = step0;
    let scale = step0.max(1e-300);
    for _ in 0..iterations {
        surf.tangential(&x, &mut g[..n]);
        let gn = g[..n].iter().map(|a| a * a).sum::<f64>().sqrt();
        if !(gn > 0.0) || gn * scale <= 1e-16 * val.abs().max(1e-300) {
            break;
        }
        let mut accepted = false;
        let mut trial = vec![0.0; n];
        let mut tg = [0.0; MAX_DIM];
        for _ in 0..60 {
            for i in 0..n {
                trial[i] = x[i] + step * g[i] / gn;
            }
            surf.project(&mut trial, fixed);
            let tv = obj.eval(f, &trial, &mut tg[..n]);
            if !tv.is_finite() {
                return Err(LabError::Convergence("sup polish produced a non-finite value".into()));
            }
            if tv > val && tv >= val + 0.5 * step * gn {
                accepted = true;
                x.copy_from_slice(&trial);
                val = tv;
                g[..n].copy_from_slice(&tg[..n]);
                step *= 2.0;
                break;
            }
            step *= 0.5;
            if step < 1e-15 * scale {
                break;
            }
        }
        if !accepted {
            break;
        }
    }
    Ok((val, x))
}

fn search<F: Field + ?Sized>(f: &F, surf: Surface, obj: Objective, spec: &SupSpec, extent: f64) -> Result<SupResult> {
    let n = surf.dim();
    if n != 2 && n != 3 {
        return Err(LabError::Dimension(n));
    }
    // Coarse pass.
    let mut delta = 2.0 * PI * extent / spec.coarse_samples as f64;
    let (pts, mut spacing) = surf.points(delta, spec.max_samples);
    let mut samples = sample_all(f, &surf, obj, pts);
    for _ in 0..2 {
        let s = samples.iter().map(|p| p.value.abs()).fold(0.0, f64::max);
        let gt = samples.iter().map(|p| p.tangential).fold(0.0, f64::max);
        let wanted = if gt > 0.0 && s > 0.0 {
            spec.spacing_factor * s / gt
        } else if gt > 0.0 {
            spacing / 4.0
        } else {
            spacing
        };
        if wanted >= spacing * 0.999 {
            break;
        }
        delta = wanted;
        let (pts, sp) = surf.points(delta, spec.max_samples);
        if sp >= spacing * 0.999 {
            break;
        }
        spacing = sp;
        samples = sample_all(f, &surf, obj, pts);
    }
    let gt = samples.iter().map(|p| p.tangential).fold(0.0, f64::max);
    let count = samples.len();

    let mut order: Vec<usize> = (0..count).collect();
    order.sort_by(|&a, &b| samples[b].value.total_cmp(&samples[a].value).then(a.cmp(&b)));
    let mut chosen: Vec<usize> = Vec::new();
    for &i in &order {
        if chosen.len() >= spec.candidates {
            break;
        }
        if chosen
            .iter()
            .all(|&j| dist(&samples[i].point, &samples[j].point) > 3.0 * spacing)
        {
            chosen.push(i);
        }
    }
    let mut best_val = samples[order[0]].value;
    let mut best_pt = samples[order[0]].point.clone();
    for &i in &chosen {
        let (v, x) = polish(f, &surf, obj, &samples[i].point, spacing, spec.polish_iterations)?;
        if v > best_val {
            best_val = v;
            best_pt = x;
        }
    }
    if !best_val.is_finite() {
        return Err(LabError::Convergence("sup search produced a non-finite value".into()));
    }
    Ok(SupResult {
        value: best_val,
        witness: best_pt,
        error_bound: spacing * gt,
        samples: count,
    })
}

/// `sup_B |f|` with a boundary witness.
pub fn sup_on_ball<F: Field + ?Sized>(f: &F, ball: &Ball, spec: &super::GrowthSpec) -> Result<SupResult> {
    sup_on_sphere(f, ball, Objective::Abs, &spec.sup)
}

/// Maximum of the objective over the sphere `∂B`.
pub fn sup_on_sphere<F: Field + ?Sized>(f: &F, ball: &Ball, obj: Objective, spec: &SupSpec) -> Result<SupResult> {
    search(
        f,
        Surface::Sphere {
            center: &ball.center,
            radius: ball.radius,
        },
        obj,
        spec,
        ball.radius,
    )
}

/// `sup_Q |f|` over a (possibly rotated) cube, searched on its faces.
pub fn sup_on_cube<F: Field + ?Sized>(f: &F, cube: &Cube, spec: &super::GrowthSpec) -> Result<SupResult> {
    let extent = cube.half_side * 4.0 / PI;
    search(f, Surface::Cube(cube), Objective::Abs, &spec.sup, extent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::growth::GrowthSpec;
    use crate::hfun::{HarmonicExpr, Part, Trig};

    #[test]
    fn planar_power_sup() {
        let spec = GrowthSpec::default();
        for n in [1u32, 5, 12, 20] {
            let f = HarmonicExpr::planar_power(n, Part::Re);
            let r = 0.7;
            let s = sup_on_ball(&f, &Ball::new(vec![0.0, 0.0], r).unwrap(), &spec).unwrap();
            let exact = r.powi(n as i32);
            assert!((s.value - exact).abs() <= 1e-9 * exact, "N={n}: {} vs {exact}", s.value);
            assert!((dist(&s.witness, &[0.0, 0.0]) - r).abs() < 1e-12);
        }
    }

    #[test]
    fn trivial_sups() {
        let spec = GrowthSpec::default();
        let c = HarmonicExpr::coordinate(1);
        let s = sup_on_ball(&c, &Ball::new(vec![0.0, 0.0], 2.0).unwrap(), &spec).unwrap();
        assert!((s.value - 2.0).abs() < 1e-12);
        let k = HarmonicExpr::constant(5.0);
        let s = sup_on_ball(&k, &Ball::unit(3), &spec).unwrap();
        assert_eq!(s.value, 5.0);
    }

    #[test]
    fn three_dimensional_sup() {
        let spec = GrowthSpec::default();
        let f = HarmonicExpr::coordinate(3);
        let s = sup_on_ball(&f, &Ball::new(vec![0.0, 0.0, 0.0], 1.5).unwrap(), &spec).unwrap();
        assert!((s.value - 1.5).abs() < 1e-10);
        // (x + iy)^3 real part in 3D: sup r^3 in the equatorial plane.
        let p = HarmonicExpr::planar_power(3, Part::Re);
        let s = sup_on_ball(&p, &Ball::unit(3), &spec).unwrap();
        assert!((s.value - 1.0).abs() < 1e-9, "{}", s.value);
    }

    #[test]
    fn cube_sup_of_exponential() {
        let spec = GrowthSpec::default();
        let f = HarmonicExpr::exp_trig(10.0, Trig::Cos);
        let q = Cube::from_corner(&[0.0, 0.0], 0.5);
        let s = sup_on_cube(&f, &q, &spec).unwrap();
        // max of e^{10x}|cos 10y| on the square: x = 0.5, y = 0 → e^5.
        assert!((s.value - 5f64.exp()).abs() < 1e-9 * 5f64.exp());
    }

    #[test]
    fn signed_extremes() {
        let f = HarmonicExpr::coordinate(1);
        let b = Ball::unit(2);
        let lo = sup_on_sphere(&f, &b, Objective::Signed(-1.0), &SupSpec::default()).unwrap();
        assert!((lo.value - 1.0).abs() < 1e-12);
        assert!((lo.witness[0] + 1.0).abs() < 1e-9);
    }
}
