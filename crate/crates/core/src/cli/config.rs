use serde::{Deserialize, Serialize};

use crate::calibration::Calibration;
use crate::error::Result;
use crate::growth::{GrowthSpec, IndexGrid, QuadratureSpec};
use crate::multiscale::MultiscaleParams;
use crate::nodal::SignedBallSpec;
use crate::dist::SweepSpec;

use super::GlobalArgs;

/// Everything a subcommand may read. `growth` is shared: after loading it is
/// copied into the nested module settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LabConfig {
    /// Grid cells per side for nodal estimates and plots.
    pub resolution: usize,
    /// Pieces per tunnel for `chop`.
    pub k: usize,
    pub growth: GrowthSpec,
    /// Grid for the maximal doubling index of a cube.
    pub index_grid: IndexGrid,
    pub signed: SignedBallSpec,
    pub multiscale: MultiscaleParams,
    pub sweep: SweepSpec,
}

impl Default for LabConfig {
    fn default() -> Self {
        let cal = Calibration::shipped();
        let mut multiscale = MultiscaleParams {
            a: cal.multiscale.a,
            c_a: cal.multiscale.c_a,
            c_n: cal.multiscale.c_n,
            stability: cal.multiscale.stability,
            ..Default::default()
        };
        let signed = SignedBallSpec {
            c1: cal.signed.c1,
            shrink: cal.signed.shrink,
            ..Default::default()
        };
        multiscale.signed = signed.clone();
        let mut sweep = SweepSpec {
            c: cal.prop41.c,
            floor: cal.prop41.floor,
            a0: cal.prop41.a0,
            eps: cal.prop42.eps,
            ..Default::default()
        };
        sweep.prop42.side_c = cal.prop42.side_c;
        sweep.prop42.cap = cal.prop42.cap;
        LabConfig {
            resolution: 256,
            k: 4,
            growth: GrowthSpec::default(),
            index_grid: IndexGrid::default(),
            signed,
            multiscale,
            sweep,
        }
    }
}

impl LabConfig {
    pub fn from_json(text: &str) -> Result<LabConfig> {
        let mut c: LabConfig = serde_json::from_str(text)?;
        c.share_growth();
        Ok(c)
    }

    fn share_growth(&mut self) {
        let g = self.growth.clone();
        self.signed.growth = g.clone();
        self.multiscale.growth = g.clone();
        self.multiscale.signed.growth = g.clone();
        self.sweep.histogram.growth = g.clone();
        self.sweep.prop42.histogram.growth = g;
    }

    pub(super) fn apply_flags(&mut self, g: &GlobalArgs) {
        if let Some(tol) = g.tol {
            self.growth.quadrature = QuadratureSpec::with_tol(tol);
        }
        if let Some(a) = g.a {
            self.multiscale.a = a;
            self.sweep.a_list = vec![a.round().max(1.0) as usize];
        }
        if let Some(k) = g.k {
            self.k = k;
        }
        if let Some(r) = g.resolution {
            self.resolution = r;
        }
        if let Some(s) = g.seed {
            self.sweep.seeds = vec![s];
        }
        self.share_growth();
    }
}
