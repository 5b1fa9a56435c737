//! Closed-form harmonic functions.
//!
//! A [`HarmonicExpr`] is a small expression tree whose leaves are classical
//! harmonic functions (planar powers, exponential-trigonometric products,
//! solid harmonics, coordinates, constants) and whose inner nodes are linear
//! combinations and similarity pullbacks. Values and gradients are computed
//! in closed form, so every quantity downstream (sup norms, boundary
//! integrals, frequencies) inherits only quadrature and search error.
//!
//! Coordinates are 1-based in the public surface: `Coordinate { axis: 1 }`
//! is `x₁`, and `PlanarPower` always acts on `(x₁, x₂)`.

mod ensemble;
mod poisson;
mod solid;

pub use ensemble::{random_ensemble, CoefficientLaw, EnsembleSpec};
pub use poisson::{
    complexification_sup_ratio, kernel_denominator, poisson_extend, sample_omega, ComplexPoint, SupRatio,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Largest ambient dimension handled by the stack buffers used during
/// evaluation.
pub const MAX_DIM: usize = 16;

/// Anything that can be sampled pointwise with a gradient.
///
/// The analysis routines are generic over this trait so that test doubles
/// (including deliberately non-harmonic ones) can be plugged in.
pub trait Field: Sync {
    fn value(&self, x: &[f64]) -> f64;

    /// Writes the gradient into `grad` and returns the value.
    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64;

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        self.value_and_gradient(x, &mut g);
        g
    }
}

impl<T: Field + ?Sized> Field for &T {
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        (**self).value_and_gradient(x, grad)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    Re,
    Im,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trig {
    Sin,
    Cos,
}

fn default_axes() -> [usize; 2] {
    [1, 2]
}

/// Closed-form harmonic function.
///
/// The JSON form is tagged by `kind`, e.g.
/// `{"kind": "planar_power", "degree": 10, "part": "re"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HarmonicExpr {
    /// `Re` or `Im` of `(x₁ + i x₂)^degree`.
    PlanarPower { degree: u32, part: Part },
    /// `exp(rate·x_i) · trig(rate·x_j)` for `axes = [i, j]`.
    ExpTrig {
        rate: f64,
        trig: Trig,
        #[serde(default = "default_axes")]
        axes: [usize; 2],
    },
    /// `r^l Y_l^m` in real form (orthonormal on the unit sphere), acting on
    /// `(x₁, x₂, x₃)`.
    #[serde(rename = "solid_harmonic3")]
    SolidHarmonic3 { l: u32, m: i32 },
    Coordinate { axis: usize },
    Constant { value: f64 },
    LinComb {
        coefficients: Vec<f64>,
        children: Vec<HarmonicExpr>,
    },
    /// `child(dilation · R · (x − translation))`.
    AffinePullback {
        child: Box<HarmonicExpr>,
        translation: Vec<f64>,
        dilation: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rotation: Option<Vec<Vec<f64>>>,
    },
}

impl HarmonicExpr {
    pub fn planar_power(degree: u32, part: Part) -> Self {
        HarmonicExpr::PlanarPower { degree, part }
    }

    pub fn exp_trig(rate: f64, trig: Trig) -> Self {
        HarmonicExpr::ExpTrig {
            rate,
            trig,
            axes: default_axes(),
        }
    }

    pub fn solid_harmonic(l: u32, m: i32) -> Self {
        HarmonicExpr::SolidHarmonic3 { l, m }
    }

    pub fn coordinate(axis: usize) -> Self {
        HarmonicExpr::Coordinate { axis }
    }

    pub fn constant(value: f64) -> Self {
        HarmonicExpr::Constant { value }
    }

    pub fn lin_comb(coefficients: Vec<f64>, children: Vec<HarmonicExpr>) -> Self {
        HarmonicExpr::LinComb {
            coefficients,
            children,
        }
    }

    /// Pullback by `x ↦ dilation · (x − translation)`.
    pub fn dilate(child: HarmonicExpr, translation: Vec<f64>, dilation: f64) -> Self {
        HarmonicExpr::AffinePullback {
            child: Box::new(child),
            translation,
            dilation,
            rotation: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let expr: HarmonicExpr = serde_json::from_str(text)?;
        expr.validate_structure()?;
        Ok(expr)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("expression serializes")
    }

    /// Smallest ambient dimension in which the expression makes sense.
    pub fn min_dim(&self) -> usize {
        match self {
            HarmonicExpr::PlanarPower { .. } => 2,
            HarmonicExpr::ExpTrig { axes, .. } => axes[0].max(axes[1]),
            HarmonicExpr::SolidHarmonic3 { .. } => 3,
            HarmonicExpr::Coordinate { axis } => *axis,
            HarmonicExpr::Constant { .. } => 1,
            HarmonicExpr::LinComb { children, .. } => {
                children.iter().map(|c| c.min_dim()).max().unwrap_or(1)
            }
            HarmonicExpr::AffinePullback {
                child,
                translation,
                rotation,
                ..
            } => child
                .min_dim()
                .max(translation.len())
                .max(rotation.as_ref().map_or(0, |r| r.len())),
        }
    }

    /// Total polynomial degree, or `None` for transcendental expressions.
    pub fn polynomial_degree(&self) -> Option<u32> {
        match self {
            HarmonicExpr::PlanarPower { degree, .. } => Some(*degree),
            HarmonicExpr::ExpTrig { .. } => None,
            HarmonicExpr::SolidHarmonic3 { l, .. } => Some(*l),
            HarmonicExpr::Coordinate { .. } => Some(1),
            HarmonicExpr::Constant { .. } => Some(0),
            HarmonicExpr::LinComb { children, .. } => children
                .iter()
                .map(|c| c.polynomial_degree())
                .try_fold(0, |acc, d| d.map(|d| acc.max(d))),
            HarmonicExpr::AffinePullback { child, .. } => child.polynomial_degree(),
        }
    }

    fn validate_structure(&self) -> Result<()> {
        match self {
            HarmonicExpr::PlanarPower { degree, .. } => {
                if *degree == 0 {
                    return Err(LabError::Parse("planar_power degree must be positive".into()));
                }
            }
            HarmonicExpr::ExpTrig { rate, axes, .. } => {
                if !(rate.is_finite() && *rate > 0.0) {
                    return Err(LabError::Parse("exp_trig rate must be positive".into()));
                }
                if axes[0] == 0 || axes[1] == 0 || axes[0] == axes[1] {
                    return Err(LabError::Parse(
                        "exp_trig axes must be two distinct 1-based indices".into(),
                    ));
                }
            }
            HarmonicExpr::SolidHarmonic3 { l, m } => {
                if m.unsigned_abs() > *l {
                    return Err(LabError::Parse("solid harmonic needs |m| <= l".into()));
                }
            }
            HarmonicExpr::Coordinate { axis } => {
                if *axis == 0 {
                    return Err(LabError::Parse("coordinate axis is 1-based".into()));
                }
            }
            HarmonicExpr::Constant { value } => {
                if !value.is_finite() {
                    return Err(LabError::Parse("constant must be finite".into()));
                }
            }
            HarmonicExpr::LinComb {
                coefficients,
                children,
            } => {
                if coefficients.len() != children.len() {
                    return Err(LabError::Parse(
                        "lin_comb needs one coefficient per child".into(),
                    ));
                }
                for c in children {
                    c.validate_structure()?;
                }
            }
            HarmonicExpr::AffinePullback {
                child,
                dilation,
                rotation,
                ..
            } => {
                if !(dilation.is_finite() && *dilation > 0.0) {
                    return Err(LabError::Parse("dilation must be positive".into()));
                }
                if let Some(rot) = rotation {
                    check_orthogonal(rot)?;
                }
                child.validate_structure()?;
            }
        }
        Ok(())
    }

    /// Checks that the expression can be evaluated on points of length `dim`.
    pub fn validate(&self, dim: usize) -> Result<()> {
        self.validate_structure()?;
        if dim > MAX_DIM {
            return Err(LabError::Dimension(dim));
        }
        if self.min_dim() > dim {
            return Err(LabError::Dimension(dim));
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        match self {
            HarmonicExpr::PlanarPower { degree, part } => {
                let z = Complex64::new(x[0], x[1]).powu(*degree);
                match part {
                    Part::Re => z.re,
                    Part::Im => z.im,
                }
            }
            HarmonicExpr::ExpTrig { rate, trig, axes } => {
                let e = (rate * x[axes[0] - 1]).exp();
                let a = rate * x[axes[1] - 1];
                match trig {
                    Trig::Sin => e * a.sin(),
                    Trig::Cos => e * a.cos(),
                }
            }
            HarmonicExpr::SolidHarmonic3 { l, m } => solid::evaluate(*l, *m, x, None),
            HarmonicExpr::Coordinate { axis } => x[axis - 1],
            HarmonicExpr::Constant { value } => *value,
            HarmonicExpr::LinComb {
                coefficients,
                children,
            } => coefficients
                .iter()
                .zip(children)
                .map(|(c, child)| c * child.evaluate(x))
                .sum(),
            HarmonicExpr::AffinePullback {
                child,
                translation,
                dilation,
                rotation,
            } => {
                let mut buf = [0.0; MAX_DIM];
                let y = pull_point(x, translation, *dilation, rotation.as_deref(), &mut buf);
                child.evaluate(y)
            }
        }
    }

    /// Analytic gradient written into `grad`; returns the value.
    pub fn evaluate_with_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let n = x.len();
        match self {
            HarmonicExpr::PlanarPower { degree, part } => {
                grad.iter_mut().for_each(|g| *g = 0.0);
                let z = Complex64::new(x[0], x[1]);
                let w = z.powu(degree - 1) * (*degree as f64);
                let zn = z.powu(*degree);
                match part {
                    Part::Re => {
                        grad[0] = w.re;
                        grad[1] = -w.im;
                        zn.re
                    }
                    Part::Im => {
                        grad[0] = w.im;
                        grad[1] = w.re;
                        zn.im
                    }
                }
            }
            HarmonicExpr::ExpTrig { rate, trig, axes } => {
                grad.iter_mut().for_each(|g| *g = 0.0);
                let (i, j) = (axes[0] - 1, axes[1] - 1);
                let e = (rate * x[i]).exp();
                let (s, c) = (rate * x[j]).sin_cos();
                match trig {
                    Trig::Sin => {
                        grad[i] = rate * e * s;
                        grad[j] = rate * e * c;
                        e * s
                    }
                    Trig::Cos => {
                        grad[i] = rate * e * c;
                        grad[j] = -rate * e * s;
                        e * c
                    }
                }
            }
            HarmonicExpr::SolidHarmonic3 { l, m } => {
                grad.iter_mut().for_each(|g| *g = 0.0);
                solid::evaluate(*l, *m, x, Some(grad))
            }
            HarmonicExpr::Coordinate { axis } => {
                grad.iter_mut().for_each(|g| *g = 0.0);
                grad[axis - 1] = 1.0;
                x[axis - 1]
            }
            HarmonicExpr::Constant { value } => {
                grad.iter_mut().for_each(|g| *g = 0.0);
                *value
            }
            HarmonicExpr::LinComb {
                coefficients,
                children,
            } => {
                grad.iter_mut().for_each(|g| *g = 0.0);
                let mut tmp = [0.0; MAX_DIM];
                let mut acc = 0.0;
                for (c, child) in coefficients.iter().zip(children) {
                    let v = child.evaluate_with_gradient(x, &mut tmp[..n]);
                    acc += c * v;
                    for (g, t) in grad.iter_mut().zip(&tmp[..n]) {
                        *g += c * t;
                    }
                }
                acc
            }
            HarmonicExpr::AffinePullback {
                child,
                translation,
                dilation,
                rotation,
            } => {
                let mut buf = [0.0; MAX_DIM];
                let y = pull_point(x, translation, *dilation, rotation.as_deref(), &mut buf);
                let mut inner = [0.0; MAX_DIM];
                let v = child.evaluate_with_gradient(y, &mut inner[..n]);
                // ∇(f∘A)(x) = dilation · Rᵀ ∇f(Ax)
                match rotation {
                    None => {
                        for (g, t) in grad.iter_mut().zip(&inner[..n]) {
                            *g = dilation * t;
                        }
                    }
                    Some(rot) => {
                        let k = rot.len();
                        for i in 0..n {
                            grad[i] = if i < k {
                                (0..k).map(|r| rot[r][i] * inner[r]).sum::<f64>() * dilation
                            } else {
                                dilation * inner[i]
                            };
                        }
                    }
                }
                v
            }
        }
    }
}

impl Field for HarmonicExpr {
    fn value(&self, x: &[f64]) -> f64 {
        self.evaluate(x)
    }
    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.evaluate_with_gradient(x, grad)
    }
}

fn pull_point<'a>(
    x: &[f64],
    translation: &[f64],
    dilation: f64,
    rotation: Option<&[Vec<f64>]>,
    buf: &'a mut [f64; MAX_DIM],
) -> &'a [f64] {
    let n = x.len();
    let mut shifted = [0.0; MAX_DIM];
    for i in 0..n {
        shifted[i] = x[i] - translation.get(i).copied().unwrap_or(0.0);
    }
    match rotation {
        None => {
            for i in 0..n {
                buf[i] = dilation * shifted[i];
            }
        }
        Some(rot) => {
            let k = rot.len();
            for i in 0..n {
                buf[i] = if i < k {
                    dilation * (0..k).map(|j| rot[i][j] * shifted[j]).sum::<f64>()
                } else {
                    dilation * shifted[i]
                };
            }
        }
    }
    &buf[..n]
}

fn check_orthogonal(rot: &[Vec<f64>]) -> Result<()> {
    let k = rot.len();
    for row in rot {
        if row.len() != k {
            return Err(LabError::Parse("rotation must be square".into()));
        }
    }
    for i in 0..k {
        for j in 0..k {
            let dot: f64 = (0..k).map(|r| rot[i][r] * rot[j][r]).sum();
            let expect = if i == j { 1.0 } else { 0.0 };
            if (dot - expect).abs() > 1e-9 {
                return Err(LabError::Parse("rotation is not orthogonal".into()));
            }
        }
    }
    Ok(())
}

/// Central second-difference Laplacian of `f` at `x` with step `h`.
pub fn laplacian_residual<F: Field + ?Sized>(f: &F, x: &[f64], h: f64) -> f64 {
    let n = x.len();
    let centre = f.value(x);
    let mut p = x.to_vec();
    let mut acc = 0.0;
    for i in 0..n {
        p[i] = x[i] + h;
        let up = f.value(&p);
        p[i] = x[i] - h;
        let down = f.value(&p);
        p[i] = x[i];
        acc += (up - 2.0 * centre + down) / (h * h);
    }
    acc
}

/// Central finite-difference gradient; used as an independent check of the
/// analytic gradients.
pub fn finite_difference_gradient<F: Field + ?Sized>(f: &F, x: &[f64], h: f64) -> Vec<f64> {
    let mut p = x.to_vec();
    (0..x.len())
        .map(|i| {
            p[i] = x[i] + h;
            let up = f.value(&p);
            p[i] = x[i] - h;
            let down = f.value(&p);
            p[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn evaluate_examples() {
        let f = HarmonicExpr::planar_power(10, Part::Re);
        assert_abs_diff_eq!(f.evaluate(&[1.0, 0.0]), 1.0, epsilon = 1e-15);
        let g = HarmonicExpr::exp_trig(100.0, Trig::Cos);
        assert_abs_diff_eq!(g.evaluate(&[0.0, PI / 200.0]), 0.0, epsilon = 1e-14);
        let c = HarmonicExpr::coordinate(1);
        assert_eq!(c.evaluate(&[0.3, -2.0]), 0.3);
    }

    #[test]
    fn gradient_examples() {
        let c = HarmonicExpr::coordinate(1);
        assert_eq!(c.gradient(&[0.7, -0.1, 2.0]), vec![1.0, 0.0, 0.0]);
        let p = HarmonicExpr::planar_power(2, Part::Re);
        let g = p.gradient(&[1.0, 1.0]);
        assert_abs_diff_eq!(g[0], 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g[1], -2.0, epsilon = 1e-15);
        // d/dx exp(3x)sin(3y) = 3 e^{3x} sin 3y = 0 at the origin,
        // d/dy = 3 e^{3x} cos 3y = 3.
        let e = HarmonicExpr::exp_trig(3.0, Trig::Sin);
        let g = e.gradient(&[0.0, 0.0]);
        assert_abs_diff_eq!(g[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g[1], 3.0, epsilon = 1e-15);
    }

    #[test]
    fn laplacian_examples() {
        let c = HarmonicExpr::coordinate(1);
        assert!(laplacian_residual(&c, &[0.2, 0.5], 1e-3).abs() < 1e-9);

        let p = HarmonicExpr::planar_power(5, Part::Re);
        let x = [0.3, 0.4];
        // Exact-arithmetic value of the five-point stencil here is 6e-6
        // (pure h² truncation); halving h divides it by four.
        let res = laplacian_residual(&p, &x, 1e-3);
        assert!((res - 6.0e-6).abs() < 1e-9, "{res}");
        let res2 = laplacian_residual(&p, &x, 5e-4);
        assert!((res / res2 - 4.0).abs() < 1e-3, "{res} {res2}");

        struct Square;
        impl Field for Square {
            fn value(&self, x: &[f64]) -> f64 {
                x[0] * x[0]
            }
            fn value_and_gradient(&self, x: &[f64], g: &mut [f64]) -> f64 {
                g.iter_mut().for_each(|v| *v = 0.0);
                g[0] = 2.0 * x[0];
                x[0] * x[0]
            }
        }
        let res = laplacian_residual(&Square, &[0.4, -0.3], 1e-3);
        assert!((res - 2.0).abs() < 1e-6, "{res}");
    }

    #[test]
    fn json_round_trip_and_validation() {
        let text = r#"{"kind":"lin_comb","coefficients":[1.0,-2.0],
            "children":[{"kind":"planar_power","degree":3,"part":"im"},
                        {"kind":"exp_trig","rate":2.0,"trig":"cos"}]}"#;
        let f = HarmonicExpr::from_json(text).unwrap();
        let back = HarmonicExpr::from_json(&f.to_json()).unwrap();
        assert_eq!(f, back);
        assert!(HarmonicExpr::from_json(r#"{"kind":"coordinate","axis":0}"#).is_err());
        assert!(HarmonicExpr::from_json(r#"{"kind":"solid_harmonic3","l":2,"m":3}"#).is_err());
        assert!(HarmonicExpr::solid_harmonic(2, 1).validate(2).is_err());
        assert!(HarmonicExpr::solid_harmonic(2, 1).validate(3).is_ok());
    }

    #[test]
    fn pullback_gradient_with_rotation() {
        let (s, c) = 0.3f64.sin_cos();
        let f = HarmonicExpr::AffinePullback {
            child: Box::new(HarmonicExpr::planar_power(3, Part::Re)),
            translation: vec![0.1, -0.2],
            dilation: 1.7,
            rotation: Some(vec![vec![c, -s], vec![s, c]]),
        };
        let x = [0.25, 0.4];
        let g = f.gradient(&x);
        let fd = finite_difference_gradient(&f, &x, 1e-6);
        for (a, b) in g.iter().zip(&fd) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
        assert!(laplacian_residual(&f, &x, 1e-3).abs() < 1e-5);
    }

    #[test]
    fn polynomial_degree_propagates() {
        let f = HarmonicExpr::lin_comb(
            vec![1.0, 1.0],
            vec![HarmonicExpr::planar_power(4, Part::Re), HarmonicExpr::coordinate(2)],
        );
        assert_eq!(f.polynomial_degree(), Some(4));
        let g = HarmonicExpr::lin_comb(
            vec![1.0],
            vec![HarmonicExpr::exp_trig(1.0, Trig::Sin)],
        );
        assert_eq!(g.polynomial_degree(), None);
    }
}
