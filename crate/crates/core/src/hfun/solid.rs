//! Real solid harmonics `r^l Y_l^m` in Cartesian form.
//!
//! With `a = |m|` and `p = l − a`,
//! `r^l P_l^a(cos θ) e^{i a φ} = (x + i y)^a · Q(z, r²)` where
//! `Q(z, s) = Σ_k A_k z^{p−2k} s^k` collects the `a`-th derivative of the
//! Legendre polynomial `P_l`. No Condon–Shortley phase is applied.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::OnceLock;

const TABLE_L: usize = 48;

fn table() -> &'static Vec<Vec<Vec<f64>>> {
    static TABLE: OnceLock<Vec<Vec<Vec<f64>>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (0..=TABLE_L)
            .map(|l| (0..=l).map(|a| coefficients(l, a)).collect())
            .collect()
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// `A_k` including the orthonormalisation factor (and the √2 for `a > 0`).
fn coefficients(l: usize, a: usize) -> Vec<f64> {
    let p = l - a;
    // (l−a)!/(l+a)!
    let mut ratio = 1.0;
    for j in (l - a + 1)..=(l + a) {
        ratio /= j as f64;
    }
    let mut norm = ((2 * l + 1) as f64 / (4.0 * PI) * ratio).sqrt();
    if a > 0 {
        norm *= std::f64::consts::SQRT_2;
    }
    let scale = 0.5f64.powi(l as i32);
    (0..=p / 2)
        .map(|k| {
            let e = l - 2 * k;
            let mut falling = 1.0;
            for j in (e - a + 1)..=e {
                falling *= j as f64;
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            norm * scale * sign * binomial(l, k) * binomial(2 * l - 2 * k, l) * falling
        })
        .collect()
}

/// Value of the real solid harmonic; fills `grad` (length ≥ 3, zeroed by the
/// caller) when given.
pub(super) fn evaluate(l: u32, m: i32, x: &[f64], grad: Option<&mut [f64]>) -> f64 {
    let l = l as usize;
    let a = m.unsigned_abs() as usize;
    let owned;
    let coeffs: &[f64] = if l <= TABLE_L {
        &table()[l][a]
    } else {
        owned = coefficients(l, a);
        &owned
    };
    let (x1, x2, x3) = (x[0], x[1], x[2]);
    let s = x1 * x1 + x2 * x2 + x3 * x3;
    let p = l - a;

    // Q, ∂Q/∂z, ∂Q/∂s by direct summation.
    let mut q = 0.0;
    let mut qz = 0.0;
    let mut qs = 0.0;
    let mut s_pow = 1.0; // s^k
    let mut s_pow_prev = 0.0; // s^{k−1}
    for (k, &c) in coeffs.iter().enumerate() {
        let e = p - 2 * k;
        let z_e = x3.powi(e as i32);
        q += c * z_e * s_pow;
        if e > 0 {
            qz += c * e as f64 * x3.powi(e as i32 - 1) * s_pow;
        }
        if k > 0 {
            qs += c * k as f64 * z_e * s_pow_prev;
        }
        s_pow_prev = s_pow;
        s_pow *= s;
    }

    let w = Complex64::new(x1, x2);
    let pw = w.powu(a as u32);
    let pick = |c: Complex64| -> f64 {
        if m >= 0 {
            c.re
        } else {
            c.im
        }
    };
    let value = pick(pw) * q;

    if let Some(g) = grad {
        let dpw = if a == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            w.powu(a as u32 - 1) * a as f64
        };
        let dpx = dpw;
        let dpy = dpw * Complex64::new(0.0, 1.0);
        g[0] = pick(dpx) * q + pick(pw) * qs * 2.0 * x1;
        g[1] = pick(dpy) * q + pick(pw) * qs * 2.0 * x2;
        g[2] = pick(pw) * (qz + qs * 2.0 * x3);
    }
    value
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hfun::{finite_difference_gradient, laplacian_residual, Field, HarmonicExpr};

    fn sphere_l2(l: u32, m: i32, other: Option<(u32, i32)>) -> f64 {
        // Product Gauss-free check: fine midpoint grid in (θ, φ).
        let nt = 200;
        let np = 400;
        let mut acc = 0.0;
        for i in 0..nt {
            let th = PI * (i as f64 + 0.5) / nt as f64;
            for j in 0..np {
                let ph = 2.0 * PI * (j as f64 + 0.5) / np as f64;
                let p = [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
                let u = evaluate(l, m, &p, None);
                let v = match other {
                    Some((l2, m2)) => evaluate(l2, m2, &p, None),
                    None => u,
                };
                acc += u * v * th.sin();
            }
        }
        acc * (PI / nt as f64) * (2.0 * PI / np as f64)
    }

    #[test]
    fn orthonormal_on_sphere() {
        for (l, m) in [(0, 0), (1, -1), (2, 1), (3, 0), (4, -3), (5, 5)] {
            let n = sphere_l2(l, m, None);
            assert!((n - 1.0).abs() < 1e-3, "l={l} m={m} norm={n}");
        }
        assert!(sphere_l2(3, 1, Some((2, 1))).abs() < 1e-3);
        assert!(sphere_l2(3, 1, Some((3, -1))).abs() < 1e-3);
    }

    #[test]
    fn known_low_order_forms() {
        // Y_1^0 r = sqrt(3/4π) z, Y_1^1 r = sqrt(3/4π) x.
        let c = (3.0 / (4.0 * PI)).sqrt();
        let p = [0.3, -0.2, 0.7];
        assert!((evaluate(1, 0, &p, None) - c * 0.7).abs() < 1e-14);
        assert!((evaluate(1, 1, &p, None) - c * 0.3).abs() < 1e-14);
        assert!((evaluate(1, -1, &p, None) - c * -0.2).abs() < 1e-14);
    }

    #[test]
    fn harmonic_and_gradient_consistent() {
        let p = [0.31, -0.42, 0.27];
        for l in 0..=10u32 {
            for m in -(l as i32)..=(l as i32) {
                let f = HarmonicExpr::solid_harmonic(l, m);
                let scale = 1.0 + f.evaluate(&p).abs();
                let lap = laplacian_residual(&f, &p, 1e-3);
                assert!(lap.abs() < 1e-3 * scale * (l as f64 + 1.0).powi(2), "l={l} m={m}: {lap}");
                let g = f.gradient(&p);
                let fd = finite_difference_gradient(&f, &p, 1e-6);
                for (a, b) in g.iter().zip(&fd) {
                    assert!((a - b).abs() < 1e-6 * (1.0 + a.abs()) * (l as f64 + 1.0), "l={l} m={m}");
                }
            }
        }
    }

    #[test]
    fn beyond_table_matches_direct() {
        let p = [0.1, 0.2, 0.3];
        let c = coefficients(50, 3);
        assert!(!c.is_empty());
        let v = evaluate(50, 3, &p, None);
        assert!(v.is_finite());
    }
}
