// SVG drawings of two classical nodal sets, written to the temp directory:
// the stripes of exp(100x)cos(100y) and the 20 rays of Re((x+iy)^10).

use nodal_lab::geom::{Ball, Cube, Region};
use nodal_lab::hfun::{HarmonicExpr, Part, Trig};
use nodal_lab::nodal::{count_crossings, nodal_polylines};
use nodal_lab::svg;

pub fn run_example() {
    let dir = std::env::temp_dir();

    let f = HarmonicExpr::exp_trig(100.0, Trig::Cos);
    let square = Region::Cube(Cube::new(vec![0.5, 0.5], 0.5).unwrap());
    let lines = nodal_polylines(&f, &square, 400).unwrap();
    let path = dir.join("nodal_exp_trig.svg");
    std::fs::write(&path, svg::render(&square, &lines).unwrap()).unwrap();
    let crossings = count_crossings(&lines, |p| p[0] < 0.5);
    println!("{}: {} polylines, {crossings} crossings of x = 0.5", path.display(), lines.len());

    let g = HarmonicExpr::planar_power(10, Part::Re);
    let big = Region::Cube(Cube::new(vec![0.0, 0.0], 2.0).unwrap());
    let lines = nodal_polylines(&g, &big, 400).unwrap();
    let path = dir.join("nodal_planar_power.svg");
    std::fs::write(&path, svg::render(&big, &lines).unwrap()).unwrap();
    let unit = Ball::unit(2);
    let crossings = count_crossings(&lines, |p| unit.contains(p));
    println!("{}: {} polylines, {crossings} crossings of |x| = 1", path.display(), lines.len());
}

pub fn main() {
    run_example();
}
