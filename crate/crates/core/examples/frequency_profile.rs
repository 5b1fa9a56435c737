// Boundary mass, Dirichlet energy and frequency along a radius grid. The
// frequency of a homogeneous polynomial is its degree; for a mixture it
// grows with the radius.

use nodal_lab::corpus::ensemble_member;
use nodal_lab::growth::{frequency, growth_report, GrowthSpec};
use nodal_lab::hfun::{HarmonicExpr, Part};

pub fn run_example() {
    let spec = GrowthSpec::default();
    let f = HarmonicExpr::planar_power(7, Part::Re);
    for r in [0.1, 0.5, 1.0] {
        let g = growth_report(&f, &[0.0, 0.0], r, &spec).unwrap();
        println!("Re z^7  r = {r:<4} H = {:.4e}  G = {:.4e}  β = {:.9}", g.h, g.g, g.beta);
    }

    let mix = ensemble_member(3).unwrap();
    let mut prev = 0.0;
    print!("seed 3  β(r):");
    for k in 1..=8 {
        let r = 0.1 * k as f64;
        let b = frequency(&mix, &[0.0, 0.0], r, &spec).unwrap();
        print!(" {b:.3}");
        assert!(b >= prev - 1e-6 * (1.0 + b));
        prev = b;
    }
    println!();
}

pub fn main() {
    run_example();
}
