//! How the maximal doubling index distributes over subcubes: histograms,
//! count bounds, bounded-portion statements and seeded ensemble sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::geom::Cube;
use crate::growth::{max_doubling_index, GrowthSpec, IndexGrid};
use crate::hfun::{random_ensemble, EnsembleSpec, Field};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HistogramSpec {
    /// Grid used for every subcube.
    pub grid: IndexGrid,
    /// Grid used to re-measure the top `refine_fraction` of subcubes.
    pub refine_grid: IndexGrid,
    pub refine_fraction: f64,
    /// Cap on the total number of doubling-index samples.
    pub budget: usize,
    /// Grid for `N*(Q)` itself.
    pub parent_grid: IndexGrid,
    pub growth: GrowthSpec,
}

impl Default for HistogramSpec {
    fn default() -> Self {
        HistogramSpec {
            grid: IndexGrid::coarse(),
            refine_grid: IndexGrid::default(),
            refine_fraction: 0.1,
            budget: 1_000_000,
            parent_grid: IndexGrid::default(),
            growth: GrowthSpec::default(),
        }
    }
}

impl HistogramSpec {
    /// Coarse grid only; what the sweeps use.
    pub fn fast() -> Self {
        HistogramSpec {
            refine_fraction: 0.0,
            parent_grid: IndexGrid::coarse(),
            ..Default::default()
        }
    }
}

fn samples_per_cube(grid: &IndexGrid, cube: &Cube) -> usize {
    grid.points_per_side.pow(cube.dim() as u32) * grid.radii(cube.diam()).len()
}

/// Upper bin edges `1, 2, 4, …`; the last bin is open.
pub const BIN_EDGES: [f64; 8] = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexHistogram {
    pub cube: Cube,
    pub a: usize,
    /// `N*(Q)`.
    pub parent_index: f64,
    /// `N*(Q_i)` in subdivision order; `None` where the cell failed.
    pub values: Vec<Option<f64>>,
    /// Counts per bin of [`BIN_EDGES`] plus the open last bin and a final
    /// bin for failed cells; sums to `A^n`.
    pub bins: Vec<usize>,
    pub samples: usize,
    pub refined: usize,
}

impl IndexHistogram {
    pub fn exceed_count(&self, threshold: f64) -> usize {
        self.values.iter().flatten().filter(|v| **v > threshold).count()
    }

    /// Fraction of all `A^n` cells with `N*(Q_i) ≤ bound`.
    pub fn portion_bounded(&self, bound: f64) -> f64 {
        self.values.iter().flatten().filter(|v| **v <= bound).count() as f64 / self.values.len() as f64
    }
}

fn bin_counts(values: &[Option<f64>]) -> Vec<usize> {
    let mut bins = vec![0; BIN_EDGES.len() + 2];
    for v in values {
        let slot = match v {
            None => BIN_EDGES.len() + 1,
            Some(x) => BIN_EDGES.iter().position(|e| x < e).unwrap_or(BIN_EDGES.len()),
        };
        bins[slot] += 1;
    }
    bins
}

/// `N*(Q_i)` for each of the `A^n` subcubes, coarse first, then the top
/// fraction re-measured on the finer grid while the budget allows.
pub fn subcube_histogram<F: Field + ?Sized>(f: &F, q: &Cube, a: usize, spec: &HistogramSpec) -> Result<IndexHistogram> {
    let cells = q.subdivide(a);
    let parent_index = max_doubling_index(f, q, &spec.growth, &spec.parent_grid)
        .map(|r| r.value)
        .or_else(|e| match e {
            LabError::Degenerate(_) => Ok(0.0),
            e => Err(e),
        })?;
    let coarse_cost = samples_per_cube(&spec.grid, &cells[0]);
    if coarse_cost * cells.len() > spec.budget {
        return Err(LabError::Resolution(format!(
            "{} cells × {coarse_cost} samples exceeds the budget {}",
            cells.len(),
            spec.budget
        )));
    }
    let measure = |c: &Cube, grid: &IndexGrid| -> Option<f64> {
        match max_doubling_index(f, c, &spec.growth, grid) {
            Ok(r) => Some(r.value),
            // Identically zero or constant cells carry no growth.
            Err(LabError::Degenerate(_)) => Some(0.0),
            Err(_) => None,
        }
    };
    let mut values: Vec<Option<f64>> = cells.par_iter().map(|c| measure(c, &spec.grid)).collect();
    let mut samples = coarse_cost * cells.len();

    let fine_cost = samples_per_cube(&spec.refine_grid, &cells[0]);
    let wanted = (spec.refine_fraction * cells.len() as f64).ceil() as usize;
    let affordable = spec.budget.saturating_sub(samples) / fine_cost.max(1);
    let refine = wanted.min(affordable);
    let mut order: Vec<usize> = (0..cells.len()).filter(|&i| values[i].is_some()).collect();
    order.sort_by(|&x, &y| values[y].unwrap().total_cmp(&values[x].unwrap()).then(x.cmp(&y)));
    order.truncate(refine);
    let fine: Vec<Option<f64>> = order.par_iter().map(|&i| measure(&cells[i], &spec.refine_grid)).collect();
    for (&i, v) in order.iter().zip(fine) {
        if let (Some(new), Some(old)) = (v, values[i]) {
            values[i] = Some(new.max(old));
        }
    }
    samples += fine_cost * order.len();

    Ok(IndexHistogram {
        cube: q.clone(),
        a,
        parent_index,
        bins: bin_counts(&values),
        values,
        samples,
        refined: order.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop41Check {
    /// `max(N*(Q) · exp(−c ln A / ln ln A), floor)`.
    pub threshold: f64,
    pub exceed_count: usize,
    /// `A^{n−1−c}`.
    pub bound: f64,
    pub pass: bool,
    /// `bound − exceed_count`.
    pub margin: f64,
}

/// Compares the number of subcubes with large `N*` to `A^{n−1−c}`.
pub fn prop41_check(hist: &IndexHistogram, c: f64, floor: f64, a0: f64) -> Result<Prop41Check> {
    let a = hist.a as f64;
    if !(a > a0.max(std::f64::consts::E)) {
        return Err(LabError::Precondition(format!("A = {a} must exceed A₀ = {}", a0.max(std::f64::consts::E))));
    }
    let n = hist.cube.dim() as f64;
    let threshold = (hist.parent_index * (-c * a.ln() / a.ln().ln()).exp()).max(floor);
    let exceed_count = hist.exceed_count(threshold);
    let bound = a.powf(n - 1.0 - c);
    Ok(Prop41Check {
        threshold,
        exceed_count,
        bound,
        pass: (exceed_count as f64) < bound,
        margin: bound - exceed_count as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Prop42Spec {
    /// Cells have side `side_c / N*(Q)` (rounded to tile `Q`).
    pub side_c: f64,
    /// Largest acceptable `C`.
    pub cap: f64,
    pub cell_budget: usize,
    pub histogram: HistogramSpec,
}

impl Default for Prop42Spec {
    fn default() -> Self {
        Prop42Spec {
            side_c: 4.0,
            cap: 8.0,
            cell_budget: 10_000,
            histogram: HistogramSpec::fast(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop42Check {
    pub parent_index: f64,
    pub side: f64,
    pub cells_per_side: usize,
    /// Smallest `C` with `#{N*(Q_i) ≤ C} ≥ (1−ε) · #cells`.
    pub c: f64,
    pub portion: f64,
    pub pass: bool,
}

pub fn prop42_check<F: Field + ?Sized>(f: &F, q: &Cube, eps: f64, spec: &Prop42Spec) -> Result<Prop42Check> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(LabError::Precondition(format!("ε = {eps} must lie in (0, 1)")));
    }
    let hs = &spec.histogram;
    let parent = max_doubling_index(f, q, &hs.growth, &hs.parent_grid)
        .map(|r| r.value)
        .or_else(|e| match e {
            LabError::Degenerate(_) => Ok(0.0),
            e => Err(e),
        })?;
    let per_side = if parent * q.side() <= spec.side_c {
        1
    } else {
        (q.side() * parent / spec.side_c).ceil() as usize
    };
    let total = per_side.pow(q.dim() as u32);
    if total > spec.cell_budget {
        return Err(LabError::Resolution(format!(
            "{total} cells exceed the budget {}",
            spec.cell_budget
        )));
    }
    let hist = subcube_histogram(
        f,
        q,
        per_side,
        &HistogramSpec {
            budget: usize::MAX,
            ..hs.clone()
        },
    )?;
    let mut vals: Vec<f64> = hist.values.iter().map(|v| v.unwrap_or(f64::INFINITY)).collect();
    vals.sort_by(f64::total_cmp);
    let need = ((1.0 - eps) * total as f64).ceil() as usize;
    let c = vals[need.clamp(1, total) - 1].max(0.0);
    let portion = hist.portion_bounded(c);
    Ok(Prop42Check {
        parent_index: parent,
        side: q.side() / per_side as f64,
        cells_per_side: per_side,
        c,
        portion,
        pass: c.is_finite() && c <= spec.cap,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSpec {
    pub seeds: Vec<u64>,
    pub dims: Vec<usize>,
    pub degrees: Vec<u32>,
    pub a_list: Vec<usize>,
    /// Exponent `c` of the count bound.
    pub c: f64,
    /// Threshold floor `C`.
    pub floor: f64,
    pub a0: f64,
    pub eps: f64,
    /// Half side of the cube `Q` centered at the origin.
    pub half_side: f64,
    pub histogram: HistogramSpec,
    pub prop42: Prop42Spec,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            seeds: vec![1],
            dims: vec![2],
            degrees: vec![8],
            a_list: vec![8, 16],
            c: 0.25,
            floor: 2.0,
            a0: 3.0,
            eps: 0.1,
            half_side: 0.5,
            histogram: HistogramSpec::fast(),
            prop42: Prop42Spec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub seed: u64,
    pub dim: usize,
    pub degree: u32,
    #[serde(rename = "A")]
    pub a: usize,
    #[serde(rename = "N*(Q)")]
    pub n_star: f64,
    pub threshold: f64,
    pub exceed_count: usize,
    pub bound: f64,
    pub pass: bool,
    #[serde(rename = "C_for_eps")]
    pub c_for_eps: f64,
    pub portion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// Samples that failed, as `(seed, dim, degree, error kind)`.
    pub failures: Vec<(u64, usize, u32, String)>,
    /// Pass rate of the count bound per `A`.
    pub pass_rates: Vec<(usize, f64)>,
    pub median_margin: f64,
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Histogram and both checks for every `(seed, dim, degree, A)`; failures are
/// recorded and the sweep continues. Rows come out in input order.
pub fn ensemble_sweep(spec: &SweepSpec) -> SweepReport {
    let mut tasks = Vec::new();
    for &seed in &spec.seeds {
        for &dim in &spec.dims {
            for &degree in &spec.degrees {
                tasks.push((seed, dim, degree));
            }
        }
    }
    type Outcome = std::result::Result<Vec<(SweepRow, f64)>, String>;
    let outcomes: Vec<Outcome> = tasks
        .par_iter()
        .map(|&(seed, dim, degree)| {
            let f = random_ensemble(seed, &EnsembleSpec::new(dim, degree)).map_err(|e| e.kind().to_string())?;
            let q = Cube::new(vec![0.0; dim], spec.half_side).map_err(|e| e.kind().to_string())?;
            let p42 = prop42_check(&f, &q, spec.eps, &spec.prop42).map_err(|e| e.kind().to_string())?;
            spec.a_list
                .iter()
                .map(|&a| {
                    let h = subcube_histogram(&f, &q, a, &spec.histogram).map_err(|e| e.kind().to_string())?;
                    let p = prop41_check(&h, spec.c, spec.floor, spec.a0).map_err(|e| e.kind().to_string())?;
                    Ok((
                        SweepRow {
                            seed,
                            dim,
                            degree,
                            a,
                            n_star: h.parent_index,
                            threshold: p.threshold,
                            exceed_count: p.exceed_count,
                            bound: p.bound,
                            pass: p.pass,
                            c_for_eps: p42.c,
                            portion: p42.portion,
                        },
                        p.margin,
                    ))
                })
                .collect()
        })
        .collect();
    let mut rows = Vec::new();
    let mut margins = Vec::new();
    let mut failures = Vec::new();
    for ((seed, dim, degree), o) in tasks.into_iter().zip(outcomes) {
        match o {
            Ok(rs) => {
                for (r, m) in rs {
                    rows.push(r);
                    margins.push(m);
                }
            }
            Err(kind) => failures.push((seed, dim, degree, kind)),
        }
    }
    let pass_rates = spec
        .a_list
        .iter()
        .map(|&a| {
            let sel: Vec<&SweepRow> = rows.iter().filter(|r| r.a == a).collect();
            let rate = if sel.is_empty() {
                f64::NAN
            } else {
                sel.iter().filter(|r| r.pass).count() as f64 / sel.len() as f64
            };
            (a, rate)
        })
        .collect();
    SweepReport {
        rows,
        failures,
        pass_rates,
        median_margin: median(margins),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hfun::{HarmonicExpr, Part, Trig};

    #[test]
    fn constant_has_no_growth() {
        let f = HarmonicExpr::constant(3.0);
        let q = Cube::new(vec![0.0, 0.0], 0.5).unwrap();
        let h = subcube_histogram(&f, &q, 4, &HistogramSpec::fast()).unwrap();
        assert!(h.values.iter().all(|v| *v == Some(0.0)));
        assert_eq!(h.bins.iter().sum::<usize>(), 16);
        let p = prop41_check(&h, 0.25, 1.0, 3.0).unwrap();
        assert_eq!(p.exceed_count, 0);
        assert!(p.pass);
        let p = prop42_check(&f, &q, 0.1, &Prop42Spec::default()).unwrap();
        assert_eq!(p.c, 0.0);
    }

    #[test]
    fn exponential_spreads_evenly() {
        // N*(Q_i) ≈ N/A on every subcube, up to a fixed constant.
        let n = 64.0;
        let f = HarmonicExpr::exp_trig(n, Trig::Cos);
        let q = Cube::from_corner(&[0.0, 0.0], 1.0);
        let a = 8;
        let h = subcube_histogram(&f, &q, a, &HistogramSpec::fast()).unwrap();
        let scale = n / a as f64;
        for v in h.values.iter().flatten() {
            assert!(*v > 0.3 * scale && *v < 3.0 * scale, "{v} vs {scale}");
        }
    }

    #[test]
    fn subcubes_do_not_exceed_parent() {
        let f = HarmonicExpr::planar_power(12, Part::Re);
        let q = Cube::new(vec![0.0, 0.0], 1.0).unwrap();
        let h = subcube_histogram(&f, &q, 4, &HistogramSpec::default()).unwrap();
        let top = h.values.iter().flatten().cloned().fold(0.0, f64::max);
        assert!(top <= h.parent_index * 1.05 + 0.1, "{top} vs {}", h.parent_index);
        assert!(h.refined >= 2);
    }

    #[test]
    fn sweep_is_deterministic() {
        let spec = SweepSpec {
            seeds: vec![1],
            degrees: vec![1],
            a_list: vec![4],
            ..Default::default()
        };
        let a = ensemble_sweep(&spec);
        let b = ensemble_sweep(&spec);
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 1);
    }
}
