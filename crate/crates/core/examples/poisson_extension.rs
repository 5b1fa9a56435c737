// Holomorphic extension of a harmonic function through the complexified
// Poisson kernel, compared with the complex polynomial itself.

use num_complex::Complex64;

use nodal_lab::geom::Ball;
use nodal_lab::growth::QuadratureSpec;
use nodal_lab::hfun::{complexification_sup_ratio, poisson_extend, ComplexPoint, HarmonicExpr, Part};

pub fn run_example() {
    let f = HarmonicExpr::planar_power(3, Part::Re);
    let ball = Ball::unit(2);
    let quad = QuadratureSpec::default();
    // Re((x + iy)^3) = x^3 - 3xy^2, extended to complex x and y.
    let exact = |x: Complex64, y: Complex64| x * x * x - 3.0 * x * y * y;
    let z = ComplexPoint::new(vec![0.1, -0.05], vec![0.08, 0.02]);
    let u = poisson_extend(&f, &ball, &z, &quad).unwrap();
    let v = exact(Complex64::new(0.1, 0.08), Complex64::new(-0.05, 0.02));
    println!("u^C(z) = {u:.10}   direct = {v:.10}   |diff| = {:.2e}", (u - v).norm());

    let r = complexification_sup_ratio(&f, &ball, 20, 7, &quad).unwrap();
    println!("sup over Ω / sup over B ≈ {:.4e} from {} samples", r.ratio, r.samples);
}

pub fn main() {
    run_example();
}
