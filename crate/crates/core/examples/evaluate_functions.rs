// Parse harmonic functions from JSON, evaluate them with gradients and
// confirm harmonicity with a finite-difference Laplacian.

use nodal_lab::hfun::{laplacian_residual, Field, HarmonicExpr};

pub fn run_example() {
    let specs = [
        r#"{"kind": "planar_power", "degree": 10, "part": "re"}"#,
        r#"{"kind": "exp_trig", "rate": 3.0, "trig": "cos"}"#,
        r#"{"kind": "solid_harmonic3", "l": 3, "m": -2}"#,
        r#"{"kind": "lin_comb", "coefficients": [1.0, -0.5],
            "children": [{"kind": "coordinate", "axis": 1},
                         {"kind": "planar_power", "degree": 2, "part": "im"}]}"#,
    ];
    let x = [0.3, -0.2, 0.1];
    for s in specs {
        let f = HarmonicExpr::from_json(s).expect("valid function");
        let n = f.min_dim().max(2);
        let p = &x[..n];
        let g = f.gradient(p);
        let lap = laplacian_residual(&f, p, 1e-3);
        println!("{:<60} f = {:+.6e}  |∇f| = {:.4e}  Δf ≈ {:+.1e}", f.to_json(), f.value(p), g.iter().map(|v| v * v).sum::<f64>().sqrt(), lap);
        assert!(lap.abs() < 1e-4 * (1.0 + f.value(p).abs()));
    }
}

pub fn main() {
    run_example();
}
