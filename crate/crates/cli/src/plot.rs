use std::fmt::Write;

use capcover::{Geometry, MetricInstance, RoundedSolution};

use crate::error::{CliError, CliResult};

const WIDTH: f64 = 640.0;
const PAD: f64 = 16.0;

/// Renders a planar instance and optionally a solution: points as dots,
/// balls as circles, selected balls emphasized with their assignments and
/// a dashed circle at the realized expansion.
pub fn render_svg(inst: &MetricInstance, sol: Option<&RoundedSolution>) -> CliResult<String> {
    let Geometry::Euclidean {
        dimension: 2,
        points,
        centers,
    } = &inst.geometry
    else {
        return Err(CliError::Usage("plot needs a Euclidean instance with d = 2".into()));
    };
    if let Some(s) = sol {
        if s.assignment.len() != points.len() || s.assignment.iter().any(|&b| b >= inst.n_balls()) {
            return Err(CliError::Usage("the solution does not match the instance".into()));
        }
    }
    let expansion = |b: usize| -> f64 {
        sol.and_then(|s| s.selected.binary_search(&b).ok().map(|k| s.expansion[k]))
            .unwrap_or(1.0)
    };

    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    let mut grow = |p: &[f64], r: f64| {
        for a in 0..2 {
            lo[a] = lo[a].min(p[a] - r);
            hi[a] = hi[a].max(p[a] + r);
        }
    };
    for p in points {
        grow(p, 0.0);
    }
    for (i, b) in inst.balls.iter().enumerate() {
        grow(&centers[b.center], b.radius * expansion(i));
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-9);
    let scale = (WIDTH - 2.0 * PAD) / span;
    let height = (hi[1] - lo[1]) * scale + 2.0 * PAD;
    let x = |p: &[f64]| (p[0] - lo[0]) * scale + PAD;
    let y = |p: &[f64]| (hi[1] - p[1]) * scale + PAD;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{height:.0}" viewBox="0 0 {WIDTH:.0} {height:.0}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let selected = |b: usize| sol.is_some_and(|s| s.selected.binary_search(&b).is_ok());
    if let Some(s) = sol {
        for (j, &b) in s.assignment.iter().enumerate() {
            let c = &centers[inst.balls[b].center];
            let _ = writeln!(
                out,
                r##"<line class="assignment" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="#8ab" stroke-width="0.8"/>"##,
                x(&points[j]),
                y(&points[j]),
                x(c),
                y(c)
            );
        }
    }
    for (i, b) in inst.balls.iter().enumerate() {
        let c = &centers[b.center];
        let (class, stroke, w) = if selected(i) {
            ("ball selected", "#c33", 2.0)
        } else {
            ("ball", "#999", 1.0)
        };
        let _ = writeln!(
            out,
            r#"<circle class="{class}" data-ball="{i}" cx="{:.3}" cy="{:.3}" r="{:.3}" fill="none" stroke="{stroke}" stroke-width="{w}"/>"#,
            x(c),
            y(c),
            b.radius * scale
        );
        let e = expansion(i);
        if selected(i) && e > 1.0 + 1e-9 {
            let _ = writeln!(
                out,
                r#"<circle class="expansion" data-ball="{i}" cx="{:.3}" cy="{:.3}" r="{:.3}" fill="none" stroke="{stroke}" stroke-dasharray="4 3"/>"#,
                x(c),
                y(c),
                b.radius * e * scale
            );
        }
    }
    for p in points {
        let _ = writeln!(
            out,
            r#"<rect class="point" x="{:.3}" y="{:.3}" width="3" height="3" fill="black"/>"#,
            x(p) - 1.5,
            y(p) - 1.5
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}
