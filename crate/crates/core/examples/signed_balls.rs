// Pairs of small sign-definite balls near a zero, and the resulting
// certified lower bound on the nodal volume.

use nodal_lab::geom::{Ball, Region};
use nodal_lab::hfun::{HarmonicExpr, Part};
use nodal_lab::nodal::{nodal_volume, projection_lower_bound, signed_balls_in_layers, SignedBallSpec};

pub fn run_example() {
    let f = HarmonicExpr::planar_power(4, Part::Re);
    let ball = Ball::unit(2);
    let s = signed_balls_in_layers(&f, &ball, &SignedBallSpec::default()).unwrap();
    println!(
        "N(B) = {:.4}, {} layers, {} pass the increment test, {} pairs",
        s.doubling_index,
        s.layers,
        s.passing.len(),
        s.pairs.len()
    );
    let best = s
        .pairs
        .iter()
        .map(|p| projection_lower_bound(p).unwrap())
        .fold(0.0, f64::max);
    let marching = nodal_volume(&f, &Region::Ball(ball.scale(2.0)), 256).unwrap().measure;
    println!("certified lower bound {best:.3e} ≤ marching estimate on 2B {marching:.4}");
    assert!(best <= marching);
}

pub fn main() {
    run_example();
}
