// A bundle of parallel tunnels aimed at the maximum of |f| on the sphere of
// radius 1.5, with the logarithmic increment along each tunnel.

use nodal_lab::geom::Ball;
use nodal_lab::growth::GrowthSpec;
use nodal_lab::hfun::{HarmonicExpr, Part};
use nodal_lab::multiscale::{build_tunnel_bundle, k_from_a, lmi};

pub fn run_example() {
    let f = HarmonicExpr::planar_power(20, Part::Re);
    let spec = GrowthSpec::default();
    let k = k_from_a(4.0, 0.5, 16);
    let bundle = build_tunnel_bundle(&f, &Ball::unit(2), k, 0.5, &spec).unwrap();
    println!(
        "K = {}, width {:.5}, {} cubes per tunnel, end point {:?}",
        bundle.k, bundle.width, bundle.m, bundle.x0
    );
    let z: Vec<f64> = bundle.tunnels.iter().map(|t| lmi(&f, t, &spec).unwrap()).collect();
    let (lo, hi) = z.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    println!("increments over {} tunnels: min {lo:.4}, max {hi:.4}", z.len());
}

pub fn main() {
    run_example();
}
