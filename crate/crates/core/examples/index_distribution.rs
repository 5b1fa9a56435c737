// How the maximal doubling index spreads over the subcubes of a cube: most
// subcubes see a much smaller index than the parent.

use nodal_lab::calibration::Calibration;
use nodal_lab::dist::{prop41_check, prop42_check, subcube_histogram, HistogramSpec, Prop42Spec, BIN_EDGES};
use nodal_lab::geom::Cube;
use nodal_lab::hfun::{HarmonicExpr, Part};

pub fn run_example() {
    let cal = Calibration::shipped();
    let f = HarmonicExpr::planar_power(12, Part::Re);
    let q = Cube::new(vec![0.0, 0.0], 0.5).unwrap();
    let h = subcube_histogram(&f, &q, 8, &HistogramSpec::fast()).unwrap();
    println!("N*(Q) = {:.3}; bins (upper edges {:?}, open, failed): {:?}", h.parent_index, BIN_EDGES, h.bins);
    let p = prop41_check(&h, cal.prop41.c, cal.prop41.floor, cal.prop41.a0).unwrap();
    println!(
        "threshold {:.3}: {} subcubes exceed it, bound {:.3}, pass = {}",
        p.threshold, p.exceed_count, p.bound, p.pass
    );
    let spec = Prop42Spec {
        side_c: cal.prop42.side_c,
        cap: cal.prop42.cap,
        ..Default::default()
    };
    let c = prop42_check(&f, &q, cal.prop42.eps, &spec).unwrap();
    println!(
        "{}x{} cells: {:.0}% have N* ≤ {:.3} (pass = {})",
        c.cells_per_side,
        c.cells_per_side,
        100.0 * c.portion,
        c.c,
        c.pass
    );
}

pub fn main() {
    run_example();
}
