//! Constants tuned on the homogeneous family and shipped with the crate.
//!
//! The values live in `calibration.json` next to `Cargo.toml`; the CLI
//! defaults and the distribution checks read them from here.

use serde::{Deserialize, Serialize};

use crate::error::Result;

const SHIPPED: &str = include_str!("../calibration.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountBoundCalibration {
    pub c: f64,
    pub floor: f64,
    pub a0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortionCalibration {
    pub side_c: f64,
    pub cap: f64,
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignedCalibration {
    pub c1: f64,
    pub shrink: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiscaleCalibration {
    pub a: f64,
    pub c_a: f64,
    pub c_n: f64,
    pub stability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub prop41: CountBoundCalibration,
    pub prop42: PortionCalibration,
    pub signed: SignedCalibration,
    pub multiscale: MultiscaleCalibration,
    /// Reference measurements kept for comparison; not read by any routine.
    #[serde(default)]
    pub measured: serde_json::Map<String, serde_json::Value>,
}

impl Calibration {
    pub fn shipped() -> Calibration {
        Calibration::from_json(SHIPPED).expect("shipped calibration parses")
    }

    pub fn from_json(text: &str) -> Result<Calibration> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_values_match_library_defaults() {
        let c = Calibration::shipped();
        let m = crate::multiscale::MultiscaleParams::default();
        assert_eq!((c.multiscale.a, c.multiscale.c_a, c.multiscale.c_n), (m.a, m.c_a, m.c_n));
        assert_eq!(c.multiscale.stability, m.stability);
        let s = crate::nodal::SignedBallSpec::default();
        assert!((c.signed.c1 - s.c1).abs() < 1e-12 && c.signed.shrink == s.shrink);
        let sw = crate::dist::SweepSpec::default();
        assert_eq!((c.prop41.c, c.prop41.floor, c.prop41.a0), (sw.c, sw.floor, sw.a0));
        assert_eq!((c.prop42.side_c, c.prop42.cap, c.prop42.eps), (sw.prop42.side_c, sw.prop42.cap, sw.eps));
    }
}
