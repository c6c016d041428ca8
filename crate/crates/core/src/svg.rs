//! Deterministic SVG rendering of 2-D experiments: body outline, the
//! unfolded region (a convex polygon obtained by clipping the bounding
//! box against the sampled halfspaces), and center markers.  Element
//! order and number formatting are fixed so golden-file comparisons are
//! byte-stable.

use thiserror::Error;

use crate::body::{Body, Shape};
use crate::unfolded::UnfoldedRegion;

#[derive(Debug, Error)]
pub enum SvgError {
    #[error("unsupported dimension {0}: SVG output is 2-D only")]
    UnsupportedDimension(usize),
}

fn fmt(v: f64) -> String {
    // fixed short decimal; -0.0000 normalized to 0.0000
    let s = format!("{:.4}", v);
    if s == "-0.0000" {
        "0.0000".into()
    } else {
        s
    }
}

/// Clip a convex polygon by the halfspace x . n <= c (Sutherland-Hodgman).
fn clip_halfspace(poly: &[[f64; 2]], n: &[f64], c: f64) -> Vec<[f64; 2]> {
    let inside = |p: &[f64; 2]| p[0] * n[0] + p[1] * n[1] <= c + 1e-12;
    let mut out = Vec::new();
    let k = poly.len();
    for i in 0..k {
        let a = poly[i];
        let b = poly[(i + 1) % k];
        let ia = inside(&a);
        let ib = inside(&b);
        if ia {
            out.push(a);
        }
        if ia != ib {
            let da = a[0] * n[0] + a[1] * n[1] - c;
            let db = b[0] * n[0] + b[1] * n[1] - c;
            let t = da / (da - db);
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    out
}

/// Polygon of the unfolded region inside the body's bounding box; may be
/// degenerate (a point or segment collapses to a tiny polygon).
pub fn unfolded_polygon(body: &Body, uf: &UnfoldedRegion) -> Vec<[f64; 2]> {
    let (lo, hi) = body.bbox();
    let pad = 0.05 * (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let mut poly = vec![
        [lo[0] - pad, lo[1] - pad],
        [hi[0] + pad, lo[1] - pad],
        [hi[0] + pad, hi[1] + pad],
        [lo[0] - pad, hi[1] + pad],
    ];
    for (v, &l) in uf.directions.iter().zip(&uf.thresholds) {
        poly = clip_halfspace(&poly, v, l);
        if poly.is_empty() {
            break;
        }
    }
    poly
}

fn path_from(points: &[[f64; 2]], close: bool) -> String {
    let mut d = String::new();
    for (i, p) in points.iter().enumerate() {
        let cmd = if i == 0 { "M" } else { "L" };
        d.push_str(&format!("{cmd}{} {} ", fmt(p[0]), fmt(p[1])));
    }
    if close {
        d.push('Z');
    }
    d.trim_end().to_string()
}

/// Render body outline + optional unfolded region + center sets.
pub fn emit_svg(
    body: &Body,
    uf: Option<&UnfoldedRegion>,
    center_sets: &[&[Vec<f64>]],
    path: &std::path::Path,
) -> Result<(), SvgError> {
    if body.dim != 2 {
        return Err(SvgError::UnsupportedDimension(body.dim));
    }
    let (lo, hi) = body.bbox();
    let pad = 0.1 * (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let (x0, y0) = (lo[0] - pad, lo[1] - pad);
    let (w, h) = (hi[0] - lo[0] + 2.0 * pad, hi[1] - lo[1] + 2.0 * pad);
    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\" width=\"640\">\n",
        fmt(x0),
        fmt(y0),
        fmt(w),
        fmt(h)
    ));
    // flip y so mathematical orientation matches screen orientation
    s.push_str(&format!(
        "<g transform=\"translate(0 {}) scale(1 -1)\">\n",
        fmt(y0 + h + y0)
    ));

    // body outline
    match &body.shape {
        Shape::Ball { center, radius } => {
            s.push_str(&format!(
                "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"#dde7f0\" stroke=\"#345\" stroke-width=\"0.02\"/>\n",
                fmt(center[0]),
                fmt(center[1]),
                fmt(*radius)
            ));
        }
        Shape::Annulus { center, r_in, r_out } => {
            s.push_str(&format!(
                "<path d=\"M{cx} {yo} A{ro} {ro} 0 1 0 {cx} {yo2} A{ro} {ro} 0 1 0 {cx} {yo} Z M{cx} {yi} A{ri} {ri} 0 1 1 {cx} {yi2} A{ri} {ri} 0 1 1 {cx} {yi} Z\" fill=\"#dde7f0\" fill-rule=\"evenodd\" stroke=\"#345\" stroke-width=\"0.02\"/>\n",
                cx = fmt(center[0]),
                yo = fmt(center[1] + r_out),
                yo2 = fmt(center[1] - r_out),
                ro = fmt(*r_out),
                yi = fmt(center[1] + r_in),
                yi2 = fmt(center[1] - r_in),
                ri = fmt(*r_in),
            ));
        }
        _ => {
            if let Some(outline) = body.outline_polygon() {
                s.push_str(&format!(
                    "<path d=\"{}\" fill=\"#dde7f0\" stroke=\"#345\" stroke-width=\"0.02\"/>\n",
                    path_from(outline, true)
                ));
            }
        }
    }

    // unfolded region
    if let Some(uf) = uf {
        let poly = unfolded_polygon(body, uf);
        if poly.len() >= 2 {
            s.push_str(&format!(
                "<path d=\"{}\" fill=\"#f5d9a8\" fill-opacity=\"0.7\" stroke=\"#a60\" stroke-width=\"0.015\"/>\n",
                path_from(&poly, true)
            ));
        }
    }

    // center markers, one group per set, fixed ordering
    let palette = ["#c0392b", "#2980b9", "#27a05f", "#8e44ad"];
    for (gi, set) in center_sets.iter().enumerate() {
        let color = palette[gi % palette.len()];
        s.push_str(&format!("<g fill=\"{color}\">\n"));
        for p in set.iter() {
            s.push_str(&format!(
                "<circle cx=\"{}\" cy=\"{}\" r=\"0.03\"/>\n",
                fmt(p[0]),
                fmt(p[1])
            ));
        }
        s.push_str("</g>\n");
    }

    s.push_str("</g>\n</svg>\n");
    std::fs::write(path, s).expect("svg write");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::unfolded::unfolded_region;

    #[test]
    fn svg_is_deterministic_and_counts_markers() {
        let b = Body::dumbbell(0.2).unwrap();
        let uf = unfolded_region(&b, 32).unwrap();
        let centers = vec![vec![-1.5, 0.0], vec![1.5, 0.0]];
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("a.svg");
        let p2 = dir.path().join("b.svg");
        emit_svg(&b, Some(&uf), &[&centers], &p1).unwrap();
        emit_svg(&b, Some(&uf), &[&centers], &p2).unwrap();
        let s1 = std::fs::read(&p1).unwrap();
        let s2 = std::fs::read(&p2).unwrap();
        assert_eq!(s1, s2);
        let text = String::from_utf8(s1).unwrap();
        assert_eq!(text.matches("<circle").count(), 2);
    }

    #[test]
    fn empty_center_set_is_fine() {
        let b = Body::ball(2, vec![0.0, 0.0], 1.0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.svg");
        emit_svg(&b, None, &[], &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text.matches("r=\"0.03\"").count(), 0);
    }

    #[test]
    fn three_d_rejected() {
        let b = Body::ball(3, vec![0.0; 3], 1.0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            emit_svg(&b, None, &[], &dir.path().join("d.svg")),
            Err(SvgError::UnsupportedDimension(3))
        ));
    }

    #[test]
    fn uf_polygon_of_ball_is_tiny() {
        let b = Body::ball(2, vec![0.0, 0.0], 1.0).unwrap();
        let uf = unfolded_region(&b, 32).unwrap();
        let poly = unfolded_polygon(&b, &uf);
        for p in &poly {
            assert!(p[0].abs() < 0.1 && p[1].abs() < 0.1, "{poly:?}");
        }
    }
}
