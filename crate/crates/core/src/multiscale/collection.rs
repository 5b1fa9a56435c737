//! Disjoint zero-centered balls with controlled doubling index, one level
//! ([`find_subballs`]) and recursively ([`recursive_collection`]).

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::geom::{dist, Ball, SphericalLayer, Tunnel};
use crate::growth::{doubling_index, sup_on_ball, FrequencyProfile};
use crate::hfun::Field;
use crate::nodal::{projection_lower_bound, signed_balls_in_layers};

use super::{
    analyze_tunnel, build_tunnel_bundle, c_k, k_from_a, layer_partition, separated_subfamily, stable_ball_at_max,
    zeros_in_tunnel, MultiscaleParams,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollectedBall {
    pub center: Vec<f64>,
    pub radius: f64,
    /// `N(½B_i)`.
    pub half_index: f64,
    /// `N(2B_i)`.
    pub double_index: f64,
    /// `N(½B_i) · r_i^{n−1}`.
    pub sdi: f64,
    /// `|f(x_i)| / sup_{B_i} |f|`.
    pub vanishing: f64,
}

impl CollectedBall {
    pub fn ball(&self) -> Ball {
        Ball {
            center: self.center.clone(),
            radius: self.radius,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub detail: String,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractChecks {
    /// `dist(x_i, x_j) > 4(r_i + r_j)` for all `i ≠ j`.
    pub disjoint: bool,
    /// `4B_i ⊂ 2B`.
    pub contained: bool,
    /// `|f(x_i)| ≤ zero_tol · sup_{B_i} |f|`.
    pub vanishing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallCollection {
    pub parent: Ball,
    pub balls: Vec<CollectedBall>,
    pub a: f64,
    pub c_a: f64,
    pub k: usize,
    pub c_k: f64,
    /// `N(½B)` and `N(2B)` of the parent.
    pub parent_half_index: f64,
    pub parent_double_index: f64,
    /// Whether the parent was stable enough to skip the layer reduction.
    pub stable: bool,
    /// `max N(2B_i) · A / N(2B)`.
    pub kappa: f64,
    pub sum_sdi: f64,
    /// `Σ sdi · (ln A · ln ln A)^{n−1} / N(½B)`.
    pub c_estimate: f64,
    /// Candidates discarded by the final exact contract filter.
    pub dropped: usize,
    pub checks: ContractChecks,
    pub stages: Vec<StageRecord>,
}

fn stage(stages: &mut Vec<StageRecord>, name: &str, start: Instant, detail: String) {
    stages.push(StageRecord {
        stage: name.into(),
        detail,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    });
}

fn pipeline(stage: &str, reason: impl Into<String>) -> LabError {
    LabError::Pipeline {
        stage: stage.into(),
        reason: reason.into(),
    }
}

struct Candidate {
    ball: Ball,
    half_index: f64,
}

/// One refinement step: disjoint zero-centered balls inside `2B` whose
/// doubling index drops by about `A`.
pub fn find_subballs<F: Field + ?Sized>(f: &F, ball: &Ball, params: &MultiscaleParams) -> Result<BallCollection> {
    let spec = &params.growth;
    let n = ball.dim();
    let mut stages = Vec::new();

    let t = Instant::now();
    let n_half = doubling_index(f, &ball.scale(0.5), spec)
        .map_err(|e| LabError::Precondition(format!("N(½B) not computable: {e}")))?;
    if !(n_half > params.c_a) {
        return Err(LabError::Precondition(format!(
            "N(½B) = {n_half:.4} does not exceed C_A = {}",
            params.c_a
        )));
    }
    let n_double = doubling_index(f, &ball.scale(2.0), spec)?;
    let stable = n_double <= params.stability * n_half;
    stage(&mut stages, "doubling", t, format!("N(½B) = {n_half:.6}, N(2B) = {n_double:.6}"));

    // Balls D of stable growth, each with its frequency level.
    let t = Instant::now();
    let mut stable_balls: Vec<(Ball, f64)> = Vec::new();
    if stable {
        stable_balls.push((ball.clone(), n_half));
        stage(&mut stages, "layer_partition", t, "skipped: parent already stable".into());
    } else {
        let profile = FrequencyProfile::new(f, ball.center.clone(), ball.radius, spec.clone());
        let part = layer_partition(&profile, n, params.c_n).map_err(|e| pipeline("layer_partition", e.to_string()))?;
        let found: Vec<Result<(Ball, f64)>> = part
            .good
            .par_iter()
            .map(|&j| {
                let (rho, w) = part.layer(j);
                let layer = SphericalLayer::new(ball.center.clone(), rho * ball.radius, w * ball.radius)?;
                let d = stable_ball_at_max(f, &layer, part.level(j), params)?;
                Ok((d.ball, d.half_index))
            })
            .collect();
        let failures = found.iter().filter(|r| r.is_err()).count();
        stable_balls.extend(found.into_iter().flatten());
        stage(
            &mut stages,
            "layer_partition",
            t,
            format!("{} good layers, {} stable balls, {failures} rejected", part.good.len(), stable_balls.len()),
        );
        if stable_balls.is_empty() {
            return Err(pipeline("stable_ball_at_max", "no good layer produced a stable ball"));
        }
    }

    let k = k_from_a(params.a, params.c_prime, params.k_min);
    let ck = c_k(k, params.c_prime);
    let mut candidates: Vec<Candidate> = Vec::new();
    let mut good_total = 0;
    for (d, level) in &stable_balls {
        let t = Instant::now();
        let bundle = match build_tunnel_bundle(f, d, k, params.width_c0, spec) {
            Ok(b) => b,
            Err(e) => {
                stage(&mut stages, "tunnel_bundle", t, format!("rejected: {e}"));
                continue;
            }
        };
        let analyses: Vec<_> = bundle
            .tunnels
            .par_iter()
            .map(|tn| analyze_tunnel(f, tn, *level, ck, params))
            .collect();
        let good: Vec<usize> = (0..analyses.len())
            .filter(|&i| analyses[i].as_ref().is_ok_and(|a| a.good))
            .collect();
        good_total += good.len();
        stage(
            &mut stages,
            "good_tunnels",
            t,
            format!("K = {k}, m = {}, {} of {} tunnels good", bundle.m, good.len(), analyses.len()),
        );

        let t = Instant::now();
        let extracted: Vec<Option<Vec<Candidate>>> = good
            .par_iter()
            .map(|&i| {
                zeros_in_tunnel(f, &bundle.tunnels[i], params).ok().map(|z| {
                    z.balls
                        .into_iter()
                        .map(|b| Candidate {
                            ball: b.ball,
                            half_index: b.half_index,
                        })
                        .collect()
                })
            })
            .collect();
        // Separated subfamily, visiting tunnels with the most zero mass first.
        let mass = |i: usize| -> f64 {
            extracted[i]
                .as_ref()
                .map_or(0.0, |c| c.iter().map(|b| b.half_index).fold(0.0, |a, b| a + b))
        };
        let mut order: Vec<usize> = (0..good.len()).filter(|&i| extracted[i].is_some()).collect();
        order.sort_by(|&a, &b| mass(b).total_cmp(&mass(a)).then(a.cmp(&b)));
        let tunnels: Vec<&Tunnel> = good.iter().map(|&i| &bundle.tunnels[i]).collect();
        let h = bundle.width / k as f64;
        let chosen = separated_subfamily(&tunnels, &order, params.separation * h);
        let before = candidates.len();
        let mut extracted = extracted;
        for i in &chosen {
            candidates.extend(extracted[*i].take().unwrap_or_default());
        }
        stage(
            &mut stages,
            "zeros_in_tunnel",
            t,
            format!(
                "{} tunnels with zeros, {} separated, {} balls",
                order.len(),
                chosen.len(),
                candidates.len() - before
            ),
        );
    }
    if good_total == 0 {
        return Err(pipeline("good_tunnels", "no tunnel satisfies N* ≤ N/C_K"));
    }
    if candidates.is_empty() {
        return Err(pipeline("zeros_in_tunnel", "no zeros detected in the separated good tunnels"));
    }

    // Exact contract: vanishing, containment, then greedy disjointness by
    // decreasing N(½B_i).
    let t = Instant::now();
    let outer = ball.scale(2.0);
    let measured: Vec<Option<CollectedBall>> = candidates
        .par_iter()
        .map(|c| -> Option<CollectedBall> {
            if !outer.contains_ball(&c.ball.scale(4.0)) {
                return None;
            }
            let sup = sup_on_ball(f, &c.ball, spec).ok()?.value;
            let vanishing = f.value(&c.ball.center).abs() / sup;
            if !(vanishing <= params.zero_tol) {
                return None;
            }
            let double_index = doubling_index(f, &c.ball.scale(2.0), spec).ok()?;
            Some(CollectedBall {
                center: c.ball.center.clone(),
                radius: c.ball.radius,
                half_index: c.half_index,
                double_index,
                sdi: c.half_index * c.ball.radius.powi(n as i32 - 1),
                vanishing,
            })
        })
        .collect();
    let mut pool: Vec<CollectedBall> = measured.into_iter().flatten().collect();
    pool.sort_by(|a, b| b.half_index.total_cmp(&a.half_index));
    let mut balls: Vec<CollectedBall> = Vec::new();
    for b in pool {
        if balls
            .iter()
            .all(|o| dist(&o.center, &b.center) > 4.0 * (o.radius + b.radius))
        {
            balls.push(b);
        }
    }
    let dropped = candidates.len() - balls.len();
    if balls.is_empty() {
        return Err(pipeline("contract", "every candidate failed the vanishing or containment check"));
    }
    let checks = verify_contract(&balls, ball, params.zero_tol);
    let kappa = balls.iter().map(|b| b.double_index).fold(f64::NEG_INFINITY, f64::max) * params.a / n_double;
    let sum_sdi: f64 = balls.iter().map(|b| b.sdi).fold(0.0, |a, b| a + b);
    let la = params.a.ln();
    let c_estimate = sum_sdi * (la * la.ln()).abs().powi(n as i32 - 1) / n_half;
    stage(&mut stages, "contract", t, format!("{} balls kept, {dropped} dropped", balls.len()));

    Ok(BallCollection {
        parent: ball.clone(),
        balls,
        a: params.a,
        c_a: params.c_a,
        k,
        c_k: ck,
        parent_half_index: n_half,
        parent_double_index: n_double,
        stable,
        kappa,
        sum_sdi,
        c_estimate,
        dropped,
        checks,
        stages,
    })
}

fn verify_contract(balls: &[CollectedBall], parent: &Ball, tol: f64) -> ContractChecks {
    let outer = parent.scale(2.0);
    let disjoint = balls.iter().enumerate().all(|(i, a)| {
        balls[i + 1..]
            .iter()
            .all(|b| dist(&a.center, &b.center) > 4.0 * (a.radius + b.radius))
    });
    ContractChecks {
        disjoint,
        contained: balls.iter().all(|b| outer.contains_ball(&b.ball().scale(4.0))),
        vanishing: balls.iter().all(|b| b.vanishing <= tol),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecursionStatus {
    Complete,
    RoundCapExceeded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub frozen: usize,
    pub active: usize,
    /// Active balls that could not be refined.
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecursiveCollection {
    pub root: Ball,
    pub balls: Vec<CollectedBall>,
    /// Whether each final ball satisfies `N(½B_α) ≤ C_A`.
    pub frozen: Vec<bool>,
    pub rounds: usize,
    pub round_cap: usize,
    pub status: RecursionStatus,
    pub history: Vec<RoundRecord>,
    /// Certified projection bounds summed over frozen balls.
    pub nodal_lower_bound: f64,
    /// Frozen balls that contributed a certified signed-ball pair.
    pub certified_balls: usize,
    /// `Σ N(½B_α)^{1−n} r_α^{n−1}` over frozen balls.
    pub weighted_sum: f64,
    pub a: f64,
    pub c_a: f64,
}

fn root_ball<F: Field + ?Sized>(f: &F, ball: &Ball, params: &MultiscaleParams) -> Result<CollectedBall> {
    let spec = &params.growth;
    let half_index = doubling_index(f, &ball.scale(0.5), spec)?;
    let double_index = doubling_index(f, &ball.scale(2.0), spec)?;
    let sup = sup_on_ball(f, ball, spec)?.value;
    Ok(CollectedBall {
        center: ball.center.clone(),
        radius: ball.radius,
        half_index,
        double_index,
        sdi: half_index * ball.radius.powi(ball.dim() as i32 - 1),
        vanishing: f.value(&ball.center).abs() / sup,
    })
}

/// Repeatedly refines every ball with `N(½B) > C_A` until all are frozen or
/// the round cap `⌈2 ln N₂ / ln A⌉ + margin` is reached; never fails on the
/// cap, reporting it in `status` instead.
pub fn recursive_collection_partial<F: Field + ?Sized>(
    f: &F,
    ball: &Ball,
    params: &MultiscaleParams,
) -> Result<RecursiveCollection> {
    let root = root_ball(f, ball, params)?;
    let n2 = root.double_index;
    let base = if n2 > 1.0 {
        (2.0 * n2.ln() / params.a.ln()).ceil() as usize
    } else {
        0
    };
    let round_cap = base + params.round_margin;
    let mut current = vec![root];
    let mut history = Vec::new();
    let mut rounds = 0;
    let mut status = RecursionStatus::Complete;
    loop {
        let active: Vec<usize> = (0..current.len())
            .filter(|&i| current[i].half_index > params.c_a)
            .collect();
        if active.is_empty() {
            history.push(RoundRecord {
                round: rounds,
                frozen: current.len(),
                active: 0,
                failed: 0,
            });
            break;
        }
        if rounds >= round_cap {
            status = RecursionStatus::RoundCapExceeded;
            history.push(RoundRecord {
                round: rounds,
                frozen: current.len() - active.len(),
                active: active.len(),
                failed: 0,
            });
            break;
        }
        let refined: Vec<Result<BallCollection>> = active
            .par_iter()
            .map(|&i| find_subballs(f, &current[i].ball(), params))
            .collect();
        let mut next = Vec::new();
        let mut failed = 0;
        let mut refined = refined.into_iter();
        for b in current {
            if b.half_index > params.c_a {
                match refined.next().unwrap() {
                    Ok(c) => next.extend(c.balls),
                    Err(_) => {
                        failed += 1;
                        next.push(b);
                    }
                }
            } else {
                next.push(b);
            }
        }
        history.push(RoundRecord {
            round: rounds,
            frozen: next.len() - active.len().min(next.len()),
            active: active.len(),
            failed,
        });
        rounds += 1;
        current = next;
        if failed == active.len() {
            // No progress is possible; further rounds would repeat the failure.
            status = RecursionStatus::RoundCapExceeded;
            break;
        }
    }

    let n = ball.dim();
    let frozen: Vec<bool> = current.iter().map(|b| b.half_index <= params.c_a).collect();
    let bounds: Vec<Option<f64>> = current
        .par_iter()
        .zip(&frozen)
        .map(|(b, &fz)| {
            if !fz {
                return None;
            }
            let search = signed_balls_in_layers(f, &b.ball(), &params.signed).ok()?;
            search
                .pairs
                .iter()
                .filter(|p| p.certified)
                .filter_map(|p| projection_lower_bound(p).ok())
                .reduce(f64::max)
        })
        .collect();
    let nodal_lower_bound = bounds.iter().flatten().fold(0.0, |a, b| a + b);
    let certified_balls = bounds.iter().flatten().count();
    let weighted_sum = current
        .iter()
        .zip(&frozen)
        .filter(|(_, &fz)| fz)
        .map(|(b, _)| b.half_index.max(f64::MIN_POSITIVE).powi(1 - n as i32) * b.radius.powi(n as i32 - 1))
        .fold(0.0, |a, b| a + b);
    Ok(RecursiveCollection {
        root: ball.clone(),
        balls: current,
        frozen,
        rounds,
        round_cap,
        status,
        history,
        nodal_lower_bound,
        certified_balls,
        weighted_sum,
        a: params.a,
        c_a: params.c_a,
    })
}

/// As [`recursive_collection_partial`], but a round-cap overrun is an error.
pub fn recursive_collection<F: Field + ?Sized>(
    f: &F,
    ball: &Ball,
    params: &MultiscaleParams,
) -> Result<RecursiveCollection> {
    let r = recursive_collection_partial(f, ball, params)?;
    match r.status {
        RecursionStatus::Complete => Ok(r),
        RecursionStatus::RoundCapExceeded => Err(LabError::RoundCapExceeded { cap: r.round_cap }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::growth::IndexGrid;
    use crate::hfun::{HarmonicExpr, Part};

    #[test]
    fn preconditions() {
        let p = MultiscaleParams::default();
        let b = Ball::unit(2);
        let e = find_subballs(&HarmonicExpr::constant(1.0), &b, &p).unwrap_err();
        assert_eq!(e.kind(), "PreconditionError");
        let e = find_subballs(&HarmonicExpr::coordinate(1), &b, &p).unwrap_err();
        assert_eq!(e.kind(), "PreconditionError");
    }

    #[test]
    fn already_frozen_root() {
        let f = HarmonicExpr::planar_power(3, Part::Re);
        let r = recursive_collection(&f, &Ball::unit(2), &MultiscaleParams::default()).unwrap();
        assert_eq!(r.rounds, 0);
        assert_eq!(r.balls.len(), 1);
        assert_eq!(r.balls[0].center, vec![0.0, 0.0]);
        assert!(r.nodal_lower_bound > 0.0);
    }

    #[test]
    fn one_level_on_high_power() {
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
        assert!(!c.balls.is_empty());
        assert!(c.checks.disjoint && c.checks.contained && c.checks.vanishing);
        assert!(c.sum_sdi > 0.0);
    }
}
