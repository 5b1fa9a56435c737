//! Multi-scale constructions: stable growth windows, frequency layers,
//! tunnel bundles, zero extraction along tunnels and the recursive
//! collection of disjoint zero-centered balls.

mod collection;
mod stable;
mod tunnel;

use serde::{Deserialize, Serialize};

use crate::growth::{GrowthSpec, IndexGrid};
use crate::nodal::SignedBallSpec;

pub use collection::{
    find_subballs, recursive_collection, recursive_collection_partial, BallCollection, CollectedBall,
    ContractChecks, RecursionStatus, RecursiveCollection, RoundRecord, StageRecord,
};
pub use stable::{
    layer_partition, stable_ball_at_max, stable_interval_search, LayerPartition, StableBall, StableWindow,
};
pub use tunnel::{
    analyze_tunnel, build_tunnel_bundle, c_k, good_tunnels, k_from_a, lmi, separated_subfamily,
    tunnel_max_index, zeros_in_tunnel, GoodTunnels, TunnelAnalysis, TunnelBundle, ZeroBall, ZeroExtraction,
};

/// Every existential constant of the construction, with desk-scale defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MultiscaleParams {
    /// Doubling-index reduction factor `A`.
    pub a: f64,
    /// Freezing threshold `C_A` on `N(½B)`.
    pub c_a: f64,
    /// Layer discard constant: keep `j` when `w_j² 10^j β(1.1) ≥ C_n`.
    pub c_n: f64,
    /// Tunnel width constant: `w = c₀ / ln K`.
    pub width_c0: f64,
    /// `c′` in `c′ ln K / ln ln K ≥ ln A`.
    pub c_prime: f64,
    /// Smallest `K` considered.
    pub k_min: usize,
    /// `|f(x_i)| ≤ zero_tol · sup_{B_i} |f|`.
    pub zero_tol: f64,
    /// Stability constant: `N(2B) ≤ stability · N(½B)` skips the layer step.
    pub stability: f64,
    /// Lower bound on `N w / ln(1/w)` for a layer to be used.
    pub narrowness: f64,
    /// Zero-ball radius in units of the tunnel cube side `h`.
    pub zero_ball_factor: f64,
    /// Inflation of tunnel cubes when measuring `N*`.
    pub inflation: f64,
    /// Neighborhood size (in units of `h`) that separated tunnels keep apart.
    pub separation: f64,
    /// Sign samples per axis in each doubled tunnel cube.
    pub sign_grid: usize,
    /// Reject tunnels violating `m ≤ Z/(2C₀)` instead of only recording it.
    pub enforce_gate: bool,
    /// Extra rounds allowed beyond `⌈2 ln N₂ / ln A⌉`.
    pub round_margin: usize,
    pub tunnel_grid: IndexGrid,
    pub growth: GrowthSpec,
    pub signed: SignedBallSpec,
}

impl Default for MultiscaleParams {
    fn default() -> Self {
        MultiscaleParams {
            a: 4.0,
            c_a: 8.0,
            c_n: 0.05,
            width_c0: 0.5,
            c_prime: 0.5,
            k_min: 16,
            zero_tol: 1e-8,
            stability: 4.0,
            narrowness: 0.0,
            zero_ball_factor: 0.5,
            inflation: 2.0,
            separation: 2.5,
            sign_grid: 5,
            enforce_gate: false,
            round_margin: 2,
            tunnel_grid: IndexGrid::coarse(),
            growth: GrowthSpec::default(),
            signed: SignedBallSpec::default(),
        }
    }
}

impl MultiscaleParams {
    /// The constants exactly as they appear in the proofs for dimension `n`
    /// (zero balls of radius `32√n h`, `100√n` inflation, `50√n`
    /// neighborhoods). These are far too large for desk-scale runs.
    pub fn asymptotic_constants(n: usize) -> Self {
        let s = (n as f64).sqrt();
        MultiscaleParams {
            c_n: 1.0,
            zero_ball_factor: 32.0 * s,
            inflation: 100.0 * s,
            separation: 50.0 * s,
            ..Default::default()
        }
    }
}
