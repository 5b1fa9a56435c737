//! Marching squares (2D) and marching tetrahedra (3D) with exact clipping to
//! the target region.

use rayon::prelude::*;

use crate::geom::{dist, dot, Region};
use crate::hfun::Field;

/// Sign convention shared by every estimator: zero counts as positive.
#[inline]
pub fn positive(v: f64) -> bool {
    v >= 0.0
}

pub(crate) struct Grid {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub res: usize,
    pub values: Vec<f64>,
}

impl Grid {
    pub fn coord(&self, axis: usize, k: usize) -> f64 {
        let t = k as f64 / self.res as f64;
        self.lo[axis] * (1.0 - t) + self.hi[axis] * t
    }

    pub fn sample<F: Field + ?Sized>(f: &F, lo: Vec<f64>, hi: Vec<f64>, res: usize) -> Grid {
        let n = lo.len();
        let side = res + 1;
        let mut g = Grid {
            lo,
            hi,
            res,
            values: Vec::new(),
        };
        let rows = side.pow((n - 1) as u32);
        let values: Vec<Vec<f64>> = (0..rows)
            .into_par_iter()
            .map(|row| {
                let mut p = vec![0.0; n];
                let mut rem = row;
                for axis in 1..n {
                    p[axis] = g.coord(axis, rem % side);
                    rem /= side;
                }
                (0..side)
                    .map(|i| {
                        p[0] = g.coord(0, i);
                        f.value(&p)
                    })
                    .collect()
            })
            .collect();
        g.values = values.into_iter().flatten().collect();
        g
    }

    #[inline]
    pub fn index(&self, idx: &[usize]) -> usize {
        let side = self.res + 1;
        let mut k = 0;
        for axis in (0..idx.len()).rev() {
            k = k * side + idx[axis];
        }
        k
    }

    pub fn point(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().enumerate().map(|(a, &k)| self.coord(a, k)).collect()
    }
}

fn crossing(pa: &[f64], va: f64, pb: &[f64], vb: f64) -> Vec<f64> {
    let t = va / (va - vb);
    pa.iter().zip(pb).map(|(a, b)| a + t * (b - a)).collect()
}

/// Parameter intervals of the segment `a + t(b − a)`, `t ∈ [0, 1]`, lying in
/// the region.
pub fn clip_segment(region: &Region, a: &[f64], b: &[f64]) -> Vec<(f64, f64)> {
    let d: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
    match region {
        Region::Ball(ball) => ball_interval(&ball.center, ball.radius, a, &d)
            .into_iter()
            .collect(),
        Region::Layer(l) => {
            let Some((s0, s1)) = ball_interval(&l.center, l.outer(), a, &d) else {
                return vec![];
            };
            match ball_interval(&l.center, l.inner(), a, &d) {
                None => vec![(s0, s1)],
                Some((i0, i1)) => {
                    let mut out = vec![];
                    if i0 > s0 {
                        out.push((s0, i0.min(s1)));
                    }
                    if i1 < s1 {
                        out.push((i1.max(s0), s1));
                    }
                    out.retain(|(x, y)| y > x);
                    out
                }
            }
        }
        Region::Cube(c) => {
            let la = c.to_local(a);
            let lb = c.to_local(b);
            let bounds = vec![(-c.half_side, c.half_side); la.len()];
            liang_barsky(&la, &lb, &bounds).into_iter().collect()
        }
        Region::Tunnel(t) => {
            let local = |p: &[f64]| -> Vec<f64> {
                let q: Vec<f64> = p.iter().zip(&t.anchor).map(|(x, y)| x - y).collect();
                let mut out = vec![dot(&q, &t.direction)];
                out.extend(t.frame.iter().map(|e| dot(e, &q)));
                out
            };
            let la = local(a);
            let lb = local(b);
            let mut bounds = vec![(0.0, t.length)];
            bounds.extend(std::iter::repeat_n((-t.width / 2.0, t.width / 2.0), la.len() - 1));
            liang_barsky(&la, &lb, &bounds).into_iter().collect()
        }
    }
}

fn ball_interval(c: &[f64], r: f64, a: &[f64], d: &[f64]) -> Option<(f64, f64)> {
    let m: Vec<f64> = a.iter().zip(c).map(|(x, y)| x - y).collect();
    let qa = dot(d, d);
    let qb = 2.0 * dot(&m, d);
    let qc = dot(&m, &m) - r * r;
    if qa == 0.0 {
        return if qc <= 0.0 { Some((0.0, 1.0)) } else { None };
    }
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let t0 = ((-qb - sq) / (2.0 * qa)).max(0.0);
    let t1 = ((-qb + sq) / (2.0 * qa)).min(1.0);
    (t1 > t0).then_some((t0, t1))
}

fn liang_barsky(a: &[f64], b: &[f64], bounds: &[(f64, f64)]) -> Option<(f64, f64)> {
    let mut t0: f64 = 0.0;
    let mut t1: f64 = 1.0;
    for (i, &(lo, hi)) in bounds.iter().enumerate() {
        let d = b[i] - a[i];
        if d == 0.0 {
            if a[i] < lo || a[i] > hi {
                return None;
            }
            continue;
        }
        let (mut s, mut e) = ((lo - a[i]) / d, (hi - a[i]) / d);
        if s > e {
            std::mem::swap(&mut s, &mut e);
        }
        t0 = t0.max(s);
        t1 = t1.min(e);
        if t1 <= t0 {
            return None;
        }
    }
    Some((t0, t1))
}

/// A zero-set segment; `keys` identify the grid edges the endpoints sit on
/// so that segments can be chained into polylines.
#[derive(Debug, Clone)]
pub struct Segment {
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub keys: [u64; 2],
}

fn edge_key(i: usize, j: usize, vertical: bool) -> u64 {
    ((i as u64) << 33) | ((j as u64) << 1) | vertical as u64
}

/// All marching-squares segments of the grid (unclipped).
pub(crate) fn squares(g: &Grid) -> (Vec<Segment>, usize) {
    let res = g.res;
    let per_row: Vec<(Vec<Segment>, usize)> = (0..res)
        .into_par_iter()
        .map(|j| {
            let mut out = Vec::new();
            let mut cells = 0;
            for i in 0..res {
                let idx = [[i, j], [i + 1, j], [i + 1, j + 1], [i, j + 1]];
                let v: Vec<f64> = idx.iter().map(|c| g.values[g.index(c)]).collect();
                let inside: Vec<bool> = v.iter().map(|x| positive(*x)).collect();
                if inside.iter().all(|&s| s == inside[0]) {
                    continue;
                }
                cells += 1;
                // Edges in canonical orientation (low index to high index).
                let edges = [(0, 1, edge_key(i, j, false)), (1, 2, edge_key(i + 1, j, true)), (3, 2, edge_key(i, j + 1, false)), (0, 3, edge_key(i, j, true))];
                let pts: Vec<Option<([f64; 2], u64)>> = edges
                    .iter()
                    .map(|&(p, q, key)| {
                        (inside[p] != inside[q]).then(|| {
                            let c = crossing(&g.point(&idx[p]), v[p], &g.point(&idx[q]), v[q]);
                            ([c[0], c[1]], key)
                        })
                    })
                    .collect();
                let hits: Vec<usize> = (0..4).filter(|&e| pts[e].is_some()).collect();
                let mut emit = |e0: usize, e1: usize| {
                    let (a, ka) = pts[e0].unwrap();
                    let (b, kb) = pts[e1].unwrap();
                    out.push(Segment { a, b, keys: [ka, kb] });
                };
                if hits.len() == 2 {
                    emit(hits[0], hits[1]);
                } else {
                    let centre = positive(0.25 * v.iter().sum::<f64>());
                    if centre == inside[0] {
                        emit(0, 1);
                        emit(2, 3);
                    } else {
                        emit(3, 0);
                        emit(1, 2);
                    }
                }
            }
            (out, cells)
        })
        .collect();
    let cells = per_row.iter().map(|r| r.1).sum();
    (per_row.into_iter().flat_map(|r| r.0).collect(), cells)
}

/// Kuhn triangulation of the unit cube into six tetrahedra sharing the main
/// diagonal; corner `k` has offsets `(k & 1, k >> 1 & 1, k >> 2 & 1)`.
const TETS: [[usize; 4]; 6] = [
    [0, 1, 3, 7],
    [0, 1, 5, 7],
    [0, 2, 3, 7],
    [0, 2, 6, 7],
    [0, 4, 5, 7],
    [0, 4, 6, 7],
];

pub type Triangle = [[f64; 3]; 3];

/// All marching-tetrahedra triangles of the grid (unclipped).
pub(crate) fn tetrahedra(g: &Grid) -> (Vec<Triangle>, usize) {
    let res = g.res;
    let per_slab: Vec<(Vec<Triangle>, usize)> = (0..res)
        .into_par_iter()
        .map(|kz| {
            let mut out = Vec::new();
            let mut cells = 0;
            for ky in 0..res {
                for kx in 0..res {
                    let mut v = [0.0; 8];
                    let mut p = [[0.0; 3]; 8];
                    for c in 0..8 {
                        let idx = [kx + (c & 1), ky + (c >> 1 & 1), kz + (c >> 2 & 1)];
                        v[c] = g.values[g.index(&idx)];
                        for a in 0..3 {
                            p[c][a] = g.coord(a, idx[a]);
                        }
                    }
                    let s0 = positive(v[0]);
                    if v.iter().all(|x| positive(*x) == s0) {
                        continue;
                    }
                    cells += 1;
                    for tet in TETS {
                        let ins: Vec<usize> = tet.iter().copied().filter(|&c| positive(v[c])).collect();
                        let outs: Vec<usize> = tet.iter().copied().filter(|&c| !positive(v[c])).collect();
                        let cut = |a: usize, b: usize| -> [f64; 3] {
                            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                            let c = crossing(&p[lo], v[lo], &p[hi], v[hi]);
                            [c[0], c[1], c[2]]
                        };
                        match (ins.len(), outs.len()) {
                            (1, 3) => out.push([cut(ins[0], outs[0]), cut(ins[0], outs[1]), cut(ins[0], outs[2])]),
                            (3, 1) => out.push([cut(outs[0], ins[0]), cut(outs[0], ins[1]), cut(outs[0], ins[2])]),
                            (2, 2) => {
                                let q = [
                                    cut(ins[0], outs[0]),
                                    cut(ins[0], outs[1]),
                                    cut(ins[1], outs[1]),
                                    cut(ins[1], outs[0]),
                                ];
                                out.push([q[0], q[1], q[2]]);
                                out.push([q[0], q[2], q[3]]);
                            }
                            _ => {}
                        }
                    }
                }
            }
            (out, cells)
        })
        .collect();
    let cells = per_slab.iter().map(|r| r.1).sum();
    (per_slab.into_iter().flat_map(|r| r.0).collect(), cells)
}

fn tri_area(t: &[[f64; 3]]) -> f64 {
    let u = [t[1][0] - t[0][0], t[1][1] - t[0][1], t[1][2] - t[0][2]];
    let w = [t[2][0] - t[0][0], t[2][1] - t[0][1], t[2][2] - t[0][2]];
    let c = [
        u[1] * w[2] - u[2] * w[1],
        u[2] * w[0] - u[0] * w[2],
        u[0] * w[1] - u[1] * w[0],
    ];
    0.5 * (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()
}

fn polygon_area(poly: &[[f64; 3]]) -> f64 {
    (1..poly.len().saturating_sub(1))
        .map(|k| tri_area(&[poly[0], poly[k], poly[k + 1]]))
        .sum()
}

/// Sutherland–Hodgman clip of a polygon (in local box coordinates) against
/// `bounds`.
fn clip_polygon(mut poly: Vec<[f64; 3]>, bounds: &[(f64, f64); 3]) -> Vec<[f64; 3]> {
    for axis in 0..3 {
        for (limit, keep_below) in [(bounds[axis].1, true), (bounds[axis].0, false)] {
            if poly.is_empty() {
                return poly;
            }
            let inside = |p: &[f64; 3]| if keep_below { p[axis] <= limit } else { p[axis] >= limit };
            let mut out = Vec::with_capacity(poly.len() + 2);
            for k in 0..poly.len() {
                let cur = poly[k];
                let prev = poly[(k + poly.len() - 1) % poly.len()];
                let (ci, pi) = (inside(&cur), inside(&prev));
                if ci != pi {
                    let t = (limit - prev[axis]) / (cur[axis] - prev[axis]);
                    out.push([
                        prev[0] + t * (cur[0] - prev[0]),
                        prev[1] + t * (cur[1] - prev[1]),
                        prev[2] + t * (cur[2] - prev[2]),
                    ]);
                }
                if ci {
                    out.push(cur);
                }
            }
            poly = out;
        }
    }
    poly
}

fn subdivided_area(t: &Triangle, region: &Region, depth: usize) -> f64 {
    let inside = |p: &[f64; 3]| region.contains(p);
    let all_in = t.iter().all(&inside);
    let diam = dist(&t[0], &t[1]).max(dist(&t[1], &t[2])).max(dist(&t[0], &t[2]));
    if all_in && matches!(region, Region::Ball(_)) {
        return tri_area(t);
    }
    if t.iter().all(|p| region.distance(p) > diam) {
        return 0.0;
    }
    if depth == 0 {
        let c = [
            (t[0][0] + t[1][0] + t[2][0]) / 3.0,
            (t[0][1] + t[1][1] + t[2][1]) / 3.0,
            (t[0][2] + t[1][2] + t[2][2]) / 3.0,
        ];
        let hits = t.iter().filter(|p| inside(p)).count() + 2 * inside(&c) as usize;
        return tri_area(t) * hits as f64 / 5.0;
    }
    let mid = |a: &[f64; 3], b: &[f64; 3]| [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0, (a[2] + b[2]) / 2.0];
    let m01 = mid(&t[0], &t[1]);
    let m12 = mid(&t[1], &t[2]);
    let m02 = mid(&t[0], &t[2]);
    [
        [t[0], m01, m02],
        [m01, t[1], m12],
        [m02, m12, t[2]],
        [m01, m12, m02],
    ]
    .iter()
    .map(|s| subdivided_area(s, region, depth - 1))
    .sum()
}

/// Area of a triangle inside the region.
pub fn clipped_area(t: &Triangle, region: &Region) -> f64 {
    match region {
        Region::Cube(c) => {
            let poly: Vec<[f64; 3]> = t
                .iter()
                .map(|p| {
                    let l = c.to_local(p);
                    [l[0], l[1], l[2]]
                })
                .collect();
            let h = c.half_side;
            polygon_area(&clip_polygon(poly, &[(-h, h); 3]))
        }
        Region::Tunnel(tn) => {
            let poly: Vec<[f64; 3]> = t
                .iter()
                .map(|p| {
                    let q: Vec<f64> = p.iter().zip(&tn.anchor).map(|(x, y)| x - y).collect();
                    [dot(&q, &tn.direction), dot(&q, &tn.frame[0]), dot(&q, &tn.frame[1])]
                })
                .collect();
            let w = tn.width / 2.0;
            polygon_area(&clip_polygon(poly, &[(0.0, tn.length), (-w, w), (-w, w)]))
        }
        _ => subdivided_area(t, region, 4),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Ball, Cube};

    #[test]
    fn segment_clipping() {
        let b = Region::Ball(Ball::unit(2));
        let iv = clip_segment(&b, &[-2.0, 0.0], &[2.0, 0.0]);
        assert_eq!(iv.len(), 1);
        assert!((iv[0].0 - 0.25).abs() < 1e-15 && (iv[0].1 - 0.75).abs() < 1e-15);
        let c = Region::Cube(Cube::new(vec![0.0, 0.0], 1.0).unwrap());
        let iv = clip_segment(&c, &[-2.0, 0.5], &[0.0, 0.5]);
        assert!((iv[0].0 - 0.5).abs() < 1e-15 && (iv[0].1 - 1.0).abs() < 1e-15);
        assert!(clip_segment(&c, &[-2.0, 2.0], &[2.0, 2.0]).is_empty());
    }

    #[test]
    fn polygon_clip_area() {
        let c = Region::Cube(Cube::new(vec![0.0, 0.0, 0.0], 0.5).unwrap());
        let t = [[-1.0, -1.0, 0.0], [1.0, -1.0, 0.0], [-1.0, 1.0, 0.0]];
        // The triangle covers the whole unit square's lower-left half plus
        // the diagonal region; inside [-0.5,0.5]² the hypotenuse x + y = 0
        // cuts the square in half.
        let a = clipped_area(&t, &c);
        assert!((a - 0.5).abs() < 1e-12, "{a}");
    }
}
