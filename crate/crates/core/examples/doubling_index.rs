// Doubling index of balls and the maximal doubling index of a cube.

use nodal_lab::geom::{Ball, Cube};
use nodal_lab::growth::{doubling_index, max_doubling_index, scaled_doubling_index, GrowthSpec, IndexGrid};
use nodal_lab::hfun::{HarmonicExpr, Part, Trig};

pub fn run_example() {
    let spec = GrowthSpec::default();
    let f = HarmonicExpr::planar_power(10, Part::Re);
    for r in [0.05, 0.25, 1.0] {
        let b = Ball::new(vec![0.0, 0.0], r).unwrap();
        let n = doubling_index(&f, &b, &spec).unwrap();
        let sn = scaled_doubling_index(&f, &b, &spec).unwrap();
        println!("Re z^10 on B(0,{r}): N = {n:.6}  SN = {sn:.6}");
    }

    // exp(10x)cos(10y) doubles at a rate proportional to the radius.
    let g = HarmonicExpr::exp_trig(10.0, Trig::Cos);
    for r in [0.1, 0.2, 0.4] {
        let b = Ball::new(vec![0.0, 0.0], r).unwrap();
        println!("e^10x cos 10y on B(0,{r}): N = {:.4}", doubling_index(&g, &b, &spec).unwrap());
    }

    let q = Cube::new(vec![0.0, 0.0], 0.25).unwrap();
    let m = max_doubling_index(&f, &q, &spec, &IndexGrid::coarse()).unwrap();
    println!(
        "N*(Q) for Re z^10 on [-0.25,0.25]^2: {:.4} at center {:?}, radius {:.4}",
        m.value, m.argmax_center, m.argmax_radius
    );
}

pub fn main() {
    run_example();
}
