// Nodal length and area by marching squares and marching tetrahedra.

use nodal_lab::geom::{Ball, Region};
use nodal_lab::hfun::{HarmonicExpr, Part};
use nodal_lab::nodal::nodal_volume;

pub fn run_example() {
    // 2N rays of length 2: total length 40.
    let f = HarmonicExpr::planar_power(10, Part::Re);
    let disk = Region::Ball(Ball::new(vec![0.0, 0.0], 2.0).unwrap());
    let e = nodal_volume(&f, &disk, 512).unwrap();
    println!("Re z^10 in B(0,2): length {:.5} (exact 40), indicator {:.2e}", e.measure, e.error_indicator);

    // The plane x1 = 0 meets the unit ball in a disk of area π.
    let x = HarmonicExpr::coordinate(1);
    let ball = Region::Ball(Ball::unit(3));
    let e = nodal_volume(&x, &ball, 48).unwrap();
    println!("x1 in B(0,1) ⊂ R^3: area {:.5} (exact {:.5})", e.measure, std::f64::consts::PI);
}

pub fn main() {
    run_example();
}
