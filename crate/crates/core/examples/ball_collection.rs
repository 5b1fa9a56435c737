// Disjoint zero-centered sub-balls whose doubling index is smaller than
// the parent's by the factor A.

use nodal_lab::geom::Ball;
use nodal_lab::growth::IndexGrid;
use nodal_lab::hfun::{HarmonicExpr, Part};
use nodal_lab::multiscale::{find_subballs, MultiscaleParams};

pub fn run_example() {
    let f = HarmonicExpr::planar_power(64, Part::Re);
    let params = MultiscaleParams {
        tunnel_grid: IndexGrid {
            points_per_side: 2,
            radii_per_decade: 1,
            rho_min_fraction: 0.5,
        },
        ..Default::default()
    };
    let c = find_subballs(&f, &Ball::unit(2), &params).unwrap();
    println!(
        "N(½B) = {:.2}, N(2B) = {:.2}, K = {}, {} balls, κ = {:.4}, Σ SN = {:.4e}",
        c.parent_half_index,
        c.parent_double_index,
        c.k,
        c.balls.len(),
        c.kappa,
        c.sum_sdi
    );
    for s in &c.stages {
        println!("  {:<22} {}", s.stage, s.detail);
    }
    for b in c.balls.iter().take(5) {
        println!("  ball at ({:+.5}, {:+.5}) r = {:.3e}, N(½B) = {:.3}", b.center[0], b.center[1], b.radius, b.half_index);
    }
}

pub fn main() {
    run_example();
}
