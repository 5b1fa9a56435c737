//! SVG 1.1 rendering of planar nodal sets.
//!
//! Geometry is written in world coordinates inside a single transform group
//! (y up), every number goes through [`fmt_sig`], and styling is fixed, so
//! identical inputs give identical bytes.

use crate::error::{LabError, Result};
use crate::geom::Region;
use crate::io::fmt_sig;

const CANVAS: f64 = 800.0;
const MARGIN: f64 = 20.0;

fn outline(region: &Region, stroke: &str) -> String {
    match region {
        Region::Ball(b) => format!(
            "<circle class=\"region\" cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"none\" stroke=\"#888888\" stroke-width=\"{stroke}\"/>\n",
            fmt_sig(b.center[0]),
            fmt_sig(b.center[1]),
            fmt_sig(b.radius)
        ),
        Region::Layer(l) => [l.inner(), l.outer()]
            .iter()
            .map(|r| {
                format!(
                    "<circle class=\"region\" cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"none\" stroke=\"#888888\" stroke-width=\"{stroke}\"/>\n",
                    fmt_sig(l.center[0]),
                    fmt_sig(l.center[1]),
                    fmt_sig(*r)
                )
            })
            .collect(),
        Region::Cube(_) | Region::Tunnel(_) => {
            let mut corners = match region {
                Region::Cube(c) => c.corners(),
                Region::Tunnel(t) => t.corners(),
                _ => unreachable!(),
            };
            let cx = corners.iter().map(|p| p[0]).sum::<f64>() / corners.len() as f64;
            let cy = corners.iter().map(|p| p[1]).sum::<f64>() / corners.len() as f64;
            corners.sort_by(|p, q| (p[1] - cy).atan2(p[0] - cx).total_cmp(&(q[1] - cy).atan2(q[0] - cx)));
            format!(
                "<polygon class=\"region\" points=\"{}\" fill=\"none\" stroke=\"#888888\" stroke-width=\"{stroke}\"/>\n",
                points(corners.iter().map(|p| [p[0], p[1]]))
            )
        }
    }
}

fn points(it: impl Iterator<Item = [f64; 2]>) -> String {
    it.map(|p| format!("{},{}", fmt_sig(p[0]), fmt_sig(p[1])))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Nodal polylines over the region outline.
pub fn render(region: &Region, polylines: &[Vec<[f64; 2]>]) -> Result<String> {
    if region.dim() != 2 {
        return Err(LabError::Dimension(region.dim()));
    }
    let (lo, hi) = region.bounding_box();
    let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let s = (CANVAS - 2.0 * MARGIN) / extent;
    let width = s * (hi[0] - lo[0]) + 2.0 * MARGIN;
    let height = s * (hi[1] - lo[1]) + 2.0 * MARGIN;
    let tx = MARGIN - s * lo[0];
    let ty = MARGIN + s * hi[1];
    let thin = fmt_sig(1.0 / s);
    let thick = fmt_sig(1.5 / s);

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
        fmt_sig(width),
        fmt_sig(height),
        fmt_sig(width),
        fmt_sig(height)
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n");
    out.push_str(&format!(
        "<g transform=\"matrix({} 0 0 {} {} {})\">\n",
        fmt_sig(s),
        fmt_sig(-s),
        fmt_sig(tx),
        fmt_sig(ty)
    ));
    out.push_str(&outline(region, &thin));
    for line in polylines {
        out.push_str(&format!(
            "<polyline class=\"nodal\" points=\"{}\" fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"{thick}\" stroke-linejoin=\"round\"/>\n",
            points(line.iter().copied())
        ));
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}

/// Reads back the `points` of every nodal polyline in a document produced
/// by [`render`].
pub fn parse_polylines(svg: &str) -> Result<Vec<Vec<[f64; 2]>>> {
    let mut out = Vec::new();
    for line in svg.lines().filter(|l| l.starts_with("<polyline class=\"nodal\"")) {
        let start = line
            .find("points=\"")
            .ok_or_else(|| LabError::Parse("polyline without points".into()))?
            + 8;
        let end = start + line[start..].find('"').ok_or_else(|| LabError::Parse("unterminated points".into()))?;
        let pts = line[start..end]
            .split_whitespace()
            .map(|pair| {
                let (x, y) = pair.split_once(',').ok_or_else(|| LabError::Parse(format!("bad point {pair}")))?;
                let p = |t: &str| t.parse::<f64>().map_err(|e| LabError::Parse(format!("{t}: {e}")));
                Ok([p(x)?, p(y)?])
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(pts);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Ball, Cube};

    #[test]
    fn round_trip_and_stability() {
        let region = Region::Cube(Cube::new(vec![0.5, 0.5], 0.5).unwrap());
        let lines = vec![vec![[0.0, 0.25], [1.0, 0.25]], vec![[0.1, 0.0], [0.2, 0.5], [0.3, 1.0]]];
        let a = render(&region, &lines).unwrap();
        assert_eq!(a, render(&region, &lines).unwrap());
        assert_eq!(parse_polylines(&a).unwrap(), lines);
        assert!(a.contains("<polygon class=\"region\" points=\"0,0 1,0 1,1 0,1\""));
    }

    #[test]
    fn empty_set_and_dimension() {
        let region = Region::Ball(Ball::unit(2));
        let s = render(&region, &[]).unwrap();
        assert!(s.contains("<circle") && !s.contains("<polyline"));
        assert!(render(&Region::Ball(Ball::unit(3)), &[]).is_err());
    }
}
