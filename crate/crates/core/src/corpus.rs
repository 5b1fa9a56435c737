//! Named reference functions shared by tests, examples and the CLI.

use crate::error::Result;
use crate::geom::Ball;
use crate::hfun::{random_ensemble, EnsembleSpec, HarmonicExpr, Part, Trig};

/// Ensemble member used by the growth checks: every fifth seed is a 3D
/// solid-harmonic mixture of degree ≤ 6, the rest are planar mixtures of
/// degree `4 + seed mod 9` (at most 12).
pub fn ensemble_member(seed: u64) -> Result<HarmonicExpr> {
    let spec = if seed.is_multiple_of(5) {
        EnsembleSpec::new(3, 6)
    } else {
        EnsembleSpec::new(2, (4 + seed % 9).min(12) as u32)
    };
    random_ensemble(seed, &spec)
}

/// Three centers per dimension, all well inside the unit ball.
pub fn ensemble_centers(dim: usize) -> Vec<Vec<f64>> {
    let base = [[0.0, 0.0, 0.0], [0.12, -0.07, 0.05], [-0.2, 0.15, -0.1]];
    base.iter().map(|c| c[..dim].to_vec()).collect()
}

/// Functions paired with a ball whose center is a zero of the function.
pub fn vanishing_at_center() -> Vec<(&'static str, HarmonicExpr, Ball)> {
    let unit2 = Ball::unit(2);
    let unit3 = Ball::unit(3);
    vec![
        ("coordinate x1", HarmonicExpr::coordinate(1), unit2.clone()),
        ("coordinate x3", HarmonicExpr::coordinate(3), unit3.clone()),
        ("Re z^2", HarmonicExpr::planar_power(2, Part::Re), unit2.clone()),
        ("Im z^7", HarmonicExpr::planar_power(7, Part::Im), unit2.clone()),
        ("Re z^20", HarmonicExpr::planar_power(20, Part::Re), unit2.clone()),
        (
            "e^{10x} sin 10y",
            HarmonicExpr::exp_trig(10.0, Trig::Sin),
            Ball::new(vec![0.3, 0.0], 0.5).expect("valid ball"),
        ),
        ("Y_3^-2", HarmonicExpr::solid_harmonic(3, -2), unit3.clone()),
        (
            "x1 + Re z^5",
            HarmonicExpr::lin_comb(
                vec![1.0, 1.0],
                vec![HarmonicExpr::coordinate(1), HarmonicExpr::planar_power(5, Part::Re)],
            ),
            unit2.clone(),
        ),
        (
            "shifted Re z^3",
            HarmonicExpr::dilate(HarmonicExpr::planar_power(3, Part::Re), vec![0.4, -0.2], 2.0),
            Ball::new(vec![0.4, -0.2], 0.25).expect("valid ball"),
        ),
        ("ensemble seed 5", ensemble_member(5).expect("3D ensemble"), unit3),
    ]
}
