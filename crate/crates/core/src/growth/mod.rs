//! Growth quantities: boundary mass `H`, Dirichlet energy `G`, frequency
//! `β = rG/H`, doubling index, maximal cube index and scaled doubling index.

mod sup;

pub use sup::{sup_on_ball, sup_on_cube, sup_on_sphere, Objective, SupResult, SupSpec};

use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::geom::{Ball, Cube, SphericalLayer};
use crate::hfun::{Field, MAX_DIM};
pub use crate::quad::QuadratureSpec;
use crate::quad::{integrate_ball, integrate_interval, integrate_sphere};

/// Numerical settings shared by every growth computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GrowthSpec {
    pub quadrature: QuadratureSpec,
    pub sup: SupSpec,
    /// Sup norms or boundary masses below this raise `DegenerateError`.
    pub floor: f64,
}

impl Default for GrowthSpec {
    fn default() -> Self {
        GrowthSpec {
            quadrature: QuadratureSpec::default(),
            sup: SupSpec::default(),
            floor: 1e-300,
        }
    }
}

impl GrowthSpec {
    pub fn with_tol(rel_tol: f64) -> Self {
        GrowthSpec {
            quadrature: QuadratureSpec::with_tol(rel_tol),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GMethod {
    Boundary,
    Volume,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub center: Vec<f64>,
    pub radius: f64,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "G")]
    pub g: f64,
    pub beta: f64,
    pub doubling_index: f64,
    pub sdi: f64,
    pub quadrature_error: f64,
    pub sup_value: f64,
}

fn check_radius(r: f64) -> Result<()> {
    if !(r.is_finite() && r > 0.0) {
        return Err(LabError::Precondition(format!("radius must be positive, got {r}")));
    }
    Ok(())
}

/// `H(x, r) = ∫_{∂B(x,r)} f² dS` with its quadrature error.
pub fn h_with_error<F: Field + ?Sized>(f: &F, x: &[f64], r: f64, spec: &GrowthSpec) -> Result<(f64, f64)> {
    check_radius(r)?;
    let q = integrate_sphere::<1, _>(x, r, &spec.quadrature, |p, _| {
        let v = f.value(p);
        [v * v]
    })?;
    Ok((q.value[0], q.error[0]))
}

pub fn compute_h<F: Field + ?Sized>(f: &F, x: &[f64], r: f64, spec: &GrowthSpec) -> Result<f64> {
    h_with_error(f, x, r, spec).map(|v| v.0)
}

/// `(H, ∫_{∂B} f ∂_n f dS)` from one boundary pass.
fn boundary_pair<F: Field + ?Sized>(f: &F, x: &[f64], r: f64, spec: &GrowthSpec) -> Result<([f64; 2], f64)> {
    check_radius(r)?;
    let n = x.len();
    let q = integrate_sphere::<2, _>(x, r, &spec.quadrature, |p, normal| {
        let mut g = [0.0; MAX_DIM];
        let v = f.value_and_gradient(p, &mut g[..n]);
        let dn: f64 = g[..n].iter().zip(normal).map(|(a, b)| a * b).sum();
        [v * v, v * dn]
    })?;
    Ok((q.value, q.error[0].max(q.error[1])))
}

fn g_volume<F: Field + ?Sized>(f: &F, x: &[f64], r: f64, spec: &GrowthSpec) -> Result<(f64, f64)> {
    check_radius(r)?;
    let n = x.len();
    let q = integrate_ball::<1, _>(x, r, &spec.quadrature, |p| {
        let mut g = [0.0; MAX_DIM];
        f.value_and_gradient(p, &mut g[..n]);
        [g[..n].iter().map(|a| a * a).sum()]
    })?;
    Ok((q.value[0], q.error[0]))
}

/// Dirichlet energy `G(x, r)`, either as `∫_B |∇f|²` or as the boundary
/// flux `∫_{∂B} f ∂_n f`.
pub fn compute_g<F: Field + ?Sized>(f: &F, x: &[f64], r: f64, spec: &GrowthSpec, method: GMethod) -> Result<f64> {
    match method {
        GMethod::Volume => g_volume(f, x, r, spec).map(|v| v.0),
        GMethod::Boundary => boundary_pair(f, x, r, spec).map(|v| v.0[1]),
    }
}

/// Frequency `β = rG/H` with `G` the volume energy.
pub fn frequency<F: Field + ?Sized>(f: &F, x: &[f64], r: f64, spec: &GrowthSpec) -> Result<f64> {
    let h = compute_h(f, x, r, spec)?;
    if h < spec.floor {
        return Err(LabError::Degenerate(format!("H({r}) = {h:e} is below the floor")));
    }
    let g = g_volume(f, x, r, spec)?.0;
    Ok(r * g / h)
}

/// Frequency from the logarithmic derivative of `H`:
/// `β = rH'/(2H) − (n−1)/2`, `H' = (n−1)H/r + 2∫_{∂B} f ∂_n f`.
pub fn frequency_logderiv<F: Field + ?Sized>(f: &F, x: &[f64], r: f64, spec: &GrowthSpec) -> Result<f64> {
    let n = x.len() as f64;
    let ([h, flux], _) = boundary_pair(f, x, r, spec)?;
    if h < spec.floor {
        return Err(LabError::Degenerate(format!("H({r}) = {h:e} is below the floor")));
    }
    let dh = (n - 1.0) * h / r + 2.0 * flux;
    Ok(r * dh / (2.0 * h) - (n - 1.0) / 2.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublingReport {
    pub value: f64,
    pub sup_inner: f64,
    pub sup_outer: f64,
    pub witness_inner: Vec<f64>,
    pub witness_outer: Vec<f64>,
    pub error_bound: f64,
}

pub fn doubling_report<F: Field + ?Sized>(f: &F, ball: &Ball, spec: &GrowthSpec) -> Result<DoublingReport> {
    let inner = sup_on_ball(f, ball, spec)?;
    if inner.value < spec.floor {
        return Err(LabError::Degenerate(format!(
            "sup over the ball is {:e}, below the floor",
            inner.value
        )));
    }
    let outer = sup_on_ball(f, &ball.scale(2.0), spec)?;
    let value = (outer.value / inner.value).log2();
    let error_bound = (inner.error_bound / inner.value + outer.error_bound / outer.value.max(spec.floor))
        / std::f64::consts::LN_2;
    Ok(DoublingReport {
        value,
        sup_inner: inner.value,
        sup_outer: outer.value,
        witness_inner: inner.witness,
        witness_outer: outer.witness,
        error_bound,
    })
}

/// `N(B) = log₂ (sup_{2B}|f| / sup_B|f|)`.
pub fn doubling_index<F: Field + ?Sized>(f: &F, ball: &Ball, spec: &GrowthSpec) -> Result<f64> {
    doubling_report(f, ball, spec).map(|r| r.value)
}

/// `SN(B) = N(B) · r^{n−1}`.
pub fn scaled_doubling_index<F: Field + ?Sized>(f: &F, ball: &Ball, spec: &GrowthSpec) -> Result<f64> {
    Ok(doubling_index(f, ball, spec)? * ball.radius.powi(ball.dim() as i32 - 1))
}

pub fn growth_report<F: Field + ?Sized>(f: &F, x: &[f64], r: f64, spec: &GrowthSpec) -> Result<GrowthReport> {
    let (h, herr) = h_with_error(f, x, r, spec)?;
    let (g, gerr) = g_volume(f, x, r, spec)?;
    let ball = Ball::new(x.to_vec(), r)?;
    let d = doubling_report(f, &ball, spec)?;
    let beta = if h >= spec.floor {
        r * g / h
    } else {
        return Err(LabError::Degenerate(format!("H({r}) = {h:e} is below the floor")));
    };
    Ok(GrowthReport {
        center: x.to_vec(),
        radius: r,
        h,
        g,
        beta,
        doubling_index: d.value,
        sdi: d.value * r.powi(x.len() as i32 - 1),
        quadrature_error: herr.max(gerr),
        sup_value: d.sup_inner,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IndexGrid {
    pub points_per_side: usize,
    pub radii_per_decade: usize,
    /// `ρ_min = diam(Q) · rho_min_fraction`.
    pub rho_min_fraction: f64,
}

impl Default for IndexGrid {
    fn default() -> Self {
        IndexGrid {
            points_per_side: 17,
            radii_per_decade: 8,
            rho_min_fraction: 1.0 / 64.0,
        }
    }
}

impl IndexGrid {
    pub fn coarse() -> Self {
        IndexGrid {
            points_per_side: 5,
            radii_per_decade: 4,
            rho_min_fraction: 1.0 / 16.0,
        }
    }

    /// Log-spaced radii from `ρ_min` up to `diam` inclusive.
    pub fn radii(&self, diam: f64) -> Vec<f64> {
        let lo = diam * self.rho_min_fraction;
        let decades = (diam / lo).log10();
        let steps = ((decades * self.radii_per_decade as f64).ceil() as usize).max(1);
        (0..=steps)
            .map(|k| lo * (diam / lo).powf(k as f64 / steps as f64))
            .collect()
    }

    pub fn centers(&self, q: &Cube) -> Vec<Vec<f64>> {
        let n = q.dim();
        let p = self.points_per_side.max(1);
        let total = p.pow(n as u32);
        (0..total)
            .map(|idx| {
                let mut rem = idx;
                let mut local = vec![0.0; n];
                for i in (0..n).rev() {
                    let k = rem % p;
                    rem /= p;
                    local[i] = if p == 1 {
                        0.0
                    } else {
                        -q.half_side + 2.0 * q.half_side * k as f64 / (p - 1) as f64
                    };
                }
                q.point(&local)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxIndexReport {
    pub value: f64,
    pub argmax_center: Vec<f64>,
    pub argmax_radius: f64,
    pub grid: IndexGrid,
    pub evaluated: usize,
    pub skipped: usize,
    /// True when some `(x, ρ)` pairs were dropped because `B(x, 2ρ)` left the
    /// admissible domain.
    pub clipped: bool,
}

/// `N*(Q)` approximated from below on a grid of centers and radii.
pub fn max_doubling_index<F: Field + ?Sized>(
    f: &F,
    q: &Cube,
    spec: &GrowthSpec,
    grid: &IndexGrid,
) -> Result<MaxIndexReport> {
    max_doubling_index_within(f, q, spec, grid, None)
}

/// As [`max_doubling_index`], skipping balls `B(x, 2ρ)` that leave `domain`.
pub fn max_doubling_index_within<F: Field + ?Sized>(
    f: &F,
    q: &Cube,
    spec: &GrowthSpec,
    grid: &IndexGrid,
    domain: Option<&Ball>,
) -> Result<MaxIndexReport> {
    let radii = grid.radii(q.diam());
    let centers = grid.centers(q);
    let jobs: Vec<(usize, usize)> = (0..centers.len())
        .flat_map(|c| (0..radii.len()).map(move |r| (c, r)))
        .collect();
    let results: Vec<Option<Option<f64>>> = jobs
        .par_iter()
        .map(|&(c, r)| {
            let ball = Ball {
                center: centers[c].clone(),
                radius: radii[r],
            };
            if let Some(d) = domain {
                if !d.contains_ball(&ball.scale(2.0)) {
                    return None;
                }
            }
            Some(doubling_index(f, &ball, spec).ok())
        })
        .collect();
    let mut best = f64::NEG_INFINITY;
    let mut arg = (0, 0);
    let mut evaluated = 0;
    let mut skipped = 0;
    let mut clipped = false;
    for (job, res) in jobs.iter().zip(&results) {
        match res {
            None => clipped = true,
            Some(None) => skipped += 1,
            Some(Some(v)) => {
                evaluated += 1;
                if *v > best {
                    best = *v;
                    arg = *job;
                }
            }
        }
    }
    if evaluated == 0 {
        return Err(LabError::Degenerate("no admissible doubling-index sample".into()));
    }
    Ok(MaxIndexReport {
        value: best,
        argmax_center: centers[arg.0].clone(),
        argmax_radius: radii[arg.1],
        grid: grid.clone(),
        evaluated,
        skipped,
        clipped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRatio {
    pub t1: f64,
    pub t2: f64,
    pub m1: f64,
    pub m2: f64,
    pub ratio: f64,
    /// `ln(ratio) / ((t2 − t1) · N)`.
    pub rate: f64,
}

/// `M(t) = sup_{B(center, t)} |f|` compared at two radii inside a layer.
pub fn growth_ratio_bounds<F: Field + ?Sized>(
    f: &F,
    layer: &SphericalLayer,
    t1: f64,
    t2: f64,
    level: f64,
    spec: &GrowthSpec,
) -> Result<GrowthRatio> {
    let lo = layer.rho - 3.0 * layer.w;
    let hi = layer.rho + 3.0 * layer.w;
    if !(t1 < t2 && t1 >= lo - 1e-12 && t2 <= hi + 1e-12 && t2 - t1 >= layer.w / 2.0 - 1e-12) {
        return Err(LabError::Precondition(format!(
            "need t1 < t2 in [{lo}, {hi}] with t2 - t1 >= w/2"
        )));
    }
    let m1 = sup_on_ball(f, &Ball::new(layer.center.clone(), t1)?, spec)?.value;
    let m2 = sup_on_ball(f, &Ball::new(layer.center.clone(), t2)?, spec)?.value;
    if m1 < spec.floor {
        return Err(LabError::Degenerate("sup vanishes on the inner ball".into()));
    }
    let ratio = m2 / m1;
    Ok(GrowthRatio {
        t1,
        t2,
        m1,
        m2,
        ratio,
        rate: ratio.ln() / ((t2 - t1) * level),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub lambda: f64,
    #[serde(rename = "Lambda")]
    pub big_lambda: f64,
    pub pairs: Vec<GrowthRatio>,
}

/// Smallest and largest growth rates over all admissible pairs of a radius
/// grid in `[ρ−3w, ρ+3w]`.
pub fn fit_growth_rates<F: Field + ?Sized>(
    f: &F,
    layer: &SphericalLayer,
    level: f64,
    points: usize,
    spec: &GrowthSpec,
) -> Result<RateFit> {
    let lo = layer.rho - 3.0 * layer.w;
    let hi = layer.rho + 3.0 * layer.w;
    let pts = points.max(2);
    let ts: Vec<f64> = (0..pts)
        .map(|k| lo + (hi - lo) * k as f64 / (pts - 1) as f64)
        .collect();
    let mut pairs = Vec::new();
    for i in 0..pts {
        for j in i + 1..pts {
            if ts[j] - ts[i] >= layer.w / 2.0 {
                pairs.push(growth_ratio_bounds(f, layer, ts[i], ts[j], level, spec)?);
            }
        }
    }
    let lambda = pairs.iter().map(|p| p.rate).fold(f64::INFINITY, f64::min);
    let big_lambda = pairs.iter().map(|p| p.rate).fold(f64::NEG_INFINITY, f64::max);
    Ok(RateFit {
        lambda,
        big_lambda,
        pairs,
    })
}

/// Residual of `H(r₂)/r₂^{n−1} = H(r₁)/r₁^{n−1} · exp(2∫_{r₁}^{r₂} β/r dr)`,
/// relative to the left-hand side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthIdentity {
    pub r1: f64,
    pub r2: f64,
    pub h1: f64,
    pub h2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub integral: f64,
    pub relative_residual: f64,
    /// `ln(H₂/H₁) − (2β₁ + n − 1) ln(r₂/r₁)`; non-negative when the lower
    /// sandwich bound holds.
    pub lower_margin: f64,
    /// `(2β₂ + n − 1) ln(r₂/r₁) − ln(H₂/H₁)`; non-negative when the upper
    /// sandwich bound holds.
    pub upper_margin: f64,
}

pub fn growth_identity<F: Field + ?Sized>(
    f: &F,
    x: &[f64],
    r1: f64,
    r2: f64,
    spec: &GrowthSpec,
) -> Result<GrowthIdentity> {
    if !(0.0 < r1 && r1 < r2) {
        return Err(LabError::Precondition("need 0 < r1 < r2".into()));
    }
    let n = x.len() as f64;
    let h1 = compute_h(f, x, r1, spec)?;
    let h2 = compute_h(f, x, r2, spec)?;
    let beta1 = frequency(f, x, r1, spec)?;
    let beta2 = frequency(f, x, r2, spec)?;
    let integral = integrate_interval(|r| Ok(frequency(f, x, r, spec)? / r), r1, r2, 1e-10, 8)?;
    let lhs = h2 / r2.powf(n - 1.0);
    let rhs = h1 / r1.powf(n - 1.0) * (2.0 * integral).exp();
    let lr = (r2 / r1).ln();
    let lh = (h2 / h1).ln();
    Ok(GrowthIdentity {
        r1,
        r2,
        h1,
        h2,
        beta1,
        beta2,
        integral,
        relative_residual: (lhs - rhs).abs() / lhs,
        lower_margin: lh - (2.0 * beta1 + n - 1.0) * lr,
        upper_margin: (2.0 * beta2 + n - 1.0) * lr - lh,
    })
}

/// Memoized `t ↦ β(center, t · unit)` for searches that re-query nearby
/// radii.
pub struct FrequencyProfile<'a, F: Field + ?Sized> {
    pub f: &'a F,
    pub center: Vec<f64>,
    pub unit: f64,
    pub spec: GrowthSpec,
    cache: Mutex<HashMap<i64, f64>>,
}

impl<'a, F: Field + ?Sized> FrequencyProfile<'a, F> {
    pub fn new(f: &'a F, center: Vec<f64>, unit: f64, spec: GrowthSpec) -> Self {
        FrequencyProfile {
            f,
            center,
            unit,
            spec,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn cached(&self) -> usize {
        self.cache.lock().unwrap().len()
    }
}

/// A monotone frequency profile on the relative radius interval
/// `[1.1, 1.9]`.
pub trait BetaProfile: Sync {
    fn beta(&self, t: f64) -> Result<f64>;
}

impl<F: Field + ?Sized> BetaProfile for FrequencyProfile<'_, F> {
    fn beta(&self, t: f64) -> Result<f64> {
        let key = (t * 1e12).round() as i64;
        if let Some(v) = self.cache.lock().unwrap().get(&key) {
            return Ok(*v);
        }
        let v = frequency(self.f, &self.center, t * self.unit, &self.spec)?;
        self.cache.lock().unwrap().insert(key, v);
        Ok(v)
    }
}

impl<T: Fn(f64) -> f64 + Sync> BetaProfile for T {
    fn beta(&self, t: f64) -> Result<f64> {
        Ok(self(t))
    }
}

/// Largest measured `N(r₁)(1−δ) − N(r₂)(1+δ)` over concentric pairs with
/// `r₁ ≤ r₂/2`.
pub fn almost_monotonicity_excess<F: Field + ?Sized>(
    f: &F,
    x: &[f64],
    radii: &[f64],
    delta: f64,
    spec: &GrowthSpec,
) -> Result<f64> {
    let ns: Vec<f64> = radii
        .iter()
        .map(|&r| doubling_index(f, &Ball::new(x.to_vec(), r)?, spec))
        .collect::<Result<_>>()?;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..radii.len() {
        for j in 0..radii.len() {
            if radii[i] <= radii[j] / 2.0 {
                worst = worst.max(ns[i] * (1.0 - delta) - ns[j] * (1.0 + delta));
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hfun::{HarmonicExpr, Part, Trig};
    use std::f64::consts::PI;

    fn spec() -> GrowthSpec {
        GrowthSpec::default()
    }

    #[test]
    fn h_examples() {
        let r = 0.7;
        let h = compute_h(&HarmonicExpr::coordinate(1), &[0.0, 0.0], r, &spec()).unwrap();
        assert!((h - PI * r.powi(3)).abs() < 1e-12);
        let h = compute_h(&HarmonicExpr::constant(1.0), &[0.0; 3], r, &spec()).unwrap();
        assert!((h - 4.0 * PI * r * r).abs() < 1e-12);
        let n = 6;
        let h = compute_h(&HarmonicExpr::planar_power(n, Part::Re), &[0.0, 0.0], r, &spec()).unwrap();
        let exact = PI * r.powi(2 * n as i32 + 1);
        assert!((h - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn g_examples() {
        let r = 0.8;
        for m in [GMethod::Boundary, GMethod::Volume] {
            let g = compute_g(&HarmonicExpr::coordinate(1), &[0.0, 0.0], r, &spec(), m).unwrap();
            assert!((g - PI * r * r).abs() < 1e-12);
            let g = compute_g(&HarmonicExpr::constant(1.0), &[0.0, 0.0], r, &spec(), m).unwrap();
            assert_eq!(g, 0.0);
            let n = 5;
            let g = compute_g(&HarmonicExpr::planar_power(n, Part::Re), &[0.0, 0.0], r, &spec(), m).unwrap();
            let exact = n as f64 * PI * r.powi(2 * n as i32);
            assert!((g - exact).abs() < 1e-11 * exact, "{m:?}");
        }
    }

    #[test]
    fn frequency_examples() {
        for n in [1u32, 4, 9] {
            let f = HarmonicExpr::planar_power(n, Part::Re);
            for r in [0.1, 0.5, 1.3] {
                let b = frequency(&f, &[0.0, 0.0], r, &spec()).unwrap();
                let l = frequency_logderiv(&f, &[0.0, 0.0], r, &spec()).unwrap();
                assert!((b - n as f64).abs() < 1e-9);
                assert!((l - n as f64).abs() < 1e-9);
            }
        }
        let c = HarmonicExpr::constant(1.0);
        assert_eq!(frequency(&c, &[0.0, 0.0], 1.0, &spec()).unwrap(), 0.0);
        assert!(frequency_logderiv(&c, &[0.0, 0.0], 1.0, &spec()).unwrap().abs() < 1e-14);
        let z = HarmonicExpr::constant(0.0);
        assert_eq!(frequency(&z, &[0.0, 0.0], 1.0, &spec()).unwrap_err().kind(), "DegenerateError");
    }

    #[test]
    fn doubling_examples() {
        let f = HarmonicExpr::planar_power(7, Part::Re);
        let d = doubling_index(&f, &Ball::new(vec![0.0, 0.0], 0.3).unwrap(), &spec()).unwrap();
        assert!((d - 7.0).abs() < 1e-6);
        let d = doubling_index(&HarmonicExpr::constant(1.0), &Ball::unit(2), &spec()).unwrap();
        assert!(d.abs() < 1e-15);
        let d = doubling_index(&HarmonicExpr::coordinate(1), &Ball::unit(2), &spec()).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
        let s = scaled_doubling_index(&f, &Ball::new(vec![0.0, 0.0], 0.3).unwrap(), &spec()).unwrap();
        assert!((s - 7.0 * 0.3).abs() < 1e-6);
    }

    #[test]
    fn growth_ratio_homogeneous() {
        let f = HarmonicExpr::planar_power(10, Part::Re);
        let layer = SphericalLayer::new(vec![0.0, 0.0], 1.05, 0.02).unwrap();
        let g = growth_ratio_bounds(&f, &layer, 1.0, 1.1, 10.0, &spec()).unwrap();
        assert!((g.ratio - 1.1f64.powi(10)).abs() < 1e-8 * g.ratio);
        let c = growth_ratio_bounds(&HarmonicExpr::constant(2.0), &layer, 1.0, 1.1, 1.0, &spec()).unwrap();
        assert_eq!(c.ratio, 1.0);
        assert!(growth_ratio_bounds(&f, &layer, 1.0, 1.005, 10.0, &spec()).is_err());
    }

    #[test]
    fn identity_on_exponential() {
        let f = HarmonicExpr::exp_trig(2.0, Trig::Sin);
        let id = growth_identity(&f, &[0.1, 0.2], 0.3, 0.9, &spec()).unwrap();
        assert!(id.relative_residual < 1e-6, "{id:?}");
        assert!(id.lower_margin >= -1e-9 && id.upper_margin >= -1e-9);
    }

    #[test]
    fn max_index_oracles() {
        let q = Cube::new(vec![0.0, 0.0], 2.0).unwrap();
        let f = HarmonicExpr::constant(1.0);
        let r = max_doubling_index(&f, &q, &spec(), &IndexGrid::coarse()).unwrap();
        assert!(r.value.abs() < 1e-12);
    }
}
