// Windows where the frequency is nearly constant, and the partition of
// `[1.1, 1.9]` into layers of comparable frequency. The mixture below
// switches from degree 3 to degree 50 behaviour as the radius grows.

use nodal_lab::growth::{FrequencyProfile, GrowthSpec};
use nodal_lab::hfun::{HarmonicExpr, Part};
use nodal_lab::multiscale::{layer_partition, stable_interval_search};

pub fn run_example() {
    let f = HarmonicExpr::lin_comb(
        vec![1.0, 1e-7],
        vec![HarmonicExpr::planar_power(3, Part::Re), HarmonicExpr::planar_power(50, Part::Re)],
    );
    let profile = FrequencyProfile::new(&f, vec![0.0, 0.0], 1.0, GrowthSpec::default());
    let w = stable_interval_search(&profile).unwrap();
    println!(
        "stable window [{:.4}, {:.4}] at level β = {:.4} (tail: {}); breakpoints {:?}",
        w.t_lo, w.t_hi, w.level, w.tail, w.breakpoints
    );
    let p = layer_partition(&profile, 2, 0.05).unwrap();
    for j in 0..p.widths.len() {
        let (rho, width) = p.layer(j);
        println!(
            "layer {j}: center {rho:.4}, half-width {width:.5}, level {:.3}{}",
            p.level(j),
            if p.good.contains(&j) { "  good" } else { "" }
        );
    }
}

pub fn main() {
    run_example();
}
