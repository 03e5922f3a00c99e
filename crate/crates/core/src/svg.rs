//! Phase-plane plot of 2-D trajectories with the eigenvector lines.
//!
//! Output is plain SVG 1.1 text. Rendering is a pure function of its
//! inputs, so identical inputs give byte-identical documents.

use std::fmt::Write as _;

use thiserror::Error;

use crate::export::TrajectorySet;
use crate::spectral::Spectrum;

/// Trajectory colors in order: blue, red, green, cyan, yellow, black.
pub const PALETTE: [(&str, &str); 6] = [
    ("blue", "#0000ff"),
    ("red", "#ff0000"),
    ("green", "#00ff00"),
    ("cyan", "#00ffff"),
    ("yellow", "#ffff00"),
    ("black", "#000000"),
];

const MARKER_HALF: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RenderError {
    #[error("plotting needs 2-dimensional states, got {dim}")]
    NotTwoDimensional { dim: usize },
    #[error("invalid viewport: {0}")]
    InvalidViewport(&'static str),
}

/// Canvas size in pixels and the world rectangle mapped onto it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Viewport {
    pub width: u32,
    pub height: u32,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
}

impl Default for Viewport {
    fn default() -> Self {
        Viewport {
            width: 600,
            height: 600,
            x_range: (-10.0, 10.0),
            y_range: (-10.0, 10.0),
        }
    }
}

impl Viewport {
    fn check(&self) -> Result<(), RenderError> {
        if self.width == 0 || self.height == 0 {
            return Err(RenderError::InvalidViewport("zero-sized canvas"));
        }
        let ok = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo < hi;
        if !ok(self.x_range) || !ok(self.y_range) {
            return Err(RenderError::InvalidViewport(
                "world range must be finite and nonempty",
            ));
        }
        Ok(())
    }

    fn to_px(self, x: f64, y: f64) -> (f64, f64) {
        let (x0, x1) = self.x_range;
        let (y0, y1) = self.y_range;
        let px = (x - x0) / (x1 - x0) * f64::from(self.width);
        let py = f64::from(self.height) - (y - y0) / (y1 - y0) * f64::from(self.height);
        (px, py)
    }

    /// Distance from the origin to the farthest world corner.
    fn reach(&self) -> f64 {
        let xm = self.x_range.0.abs().max(self.x_range.1.abs());
        let ym = self.y_range.0.abs().max(self.y_range.1.abs());
        xm.hypot(ym)
    }
}

fn coord(x: f64) -> String {
    let s = format!("{x:.3}");
    if s == "-0.000" {
        "0.000".to_string()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Renders axes, one line per eigenvector and, per trajectory, a polyline
/// through its states plus a diamond marker at each state.
pub fn render_svg(
    ts: &TrajectorySet,
    spectrum: &Spectrum,
    viewport: &Viewport,
) -> Result<String, RenderError> {
    if ts.dim() != 2 {
        return Err(RenderError::NotTwoDimensional { dim: ts.dim() });
    }
    if spectrum.dim() != 2 {
        return Err(RenderError::NotTwoDimensional {
            dim: spectrum.dim(),
        });
    }
    viewport.check()?;
    let vp = viewport;
    let mut out = String::new();
    let (w, h) = (vp.width, vp.height);

    // writes to a String cannot fail
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(
        out,
        r##"<rect x="0" y="0" width="{w}" height="{h}" fill="#ffffff"/>"##
    );

    let _ = writeln!(out, r##"<g id="axes" stroke="#808080" stroke-width="1">"##);
    for (a, b) in [
        ((vp.x_range.0, 0.0), (vp.x_range.1, 0.0)),
        ((0.0, vp.y_range.0), (0.0, vp.y_range.1)),
    ] {
        let (x1, y1) = vp.to_px(a.0, a.1);
        let (x2, y2) = vp.to_px(b.0, b.1);
        let _ = writeln!(
            out,
            r#"<line class="axis" x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
            coord(x1),
            coord(y1),
            coord(x2),
            coord(y2)
        );
    }
    let _ = writeln!(out, "</g>");

    let reach = vp.reach();
    let _ = writeln!(
        out,
        r##"<g id="eigenlines" stroke="#000000" stroke-width="1">"##
    );
    for pair in spectrum.pairs() {
        let v = pair.vector.as_slice();
        let len = v[0].hypot(v[1]);
        if len == 0.0 {
            continue;
        }
        let t = reach / len;
        let (x1, y1) = vp.to_px(-t * v[0], -t * v[1]);
        let (x2, y2) = vp.to_px(t * v[0], t * v[1]);
        let _ = writeln!(
            out,
            r#"<line class="eigenline" x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
            coord(x1),
            coord(y1),
            coord(x2),
            coord(y2)
        );
    }
    let _ = writeln!(out, "</g>");

    let _ = writeln!(out, r#"<g id="trajectories" stroke-width="1.5">"#);
    for (i, (name, traj)) in ts.entries().iter().enumerate() {
        let (color_name, color) = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            out,
            r#"<g class="trajectory" data-name="{}" data-color="{color_name}" stroke="{color}" fill="{color}">"#,
            escape(name)
        );
        let pts: Vec<(f64, f64)> = traj.states().iter().map(|s| vp.to_px(s[0], s[1])).collect();
        let points: Vec<String> = pts
            .iter()
            .map(|(x, y)| format!("{},{}", coord(*x), coord(*y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" points="{}"/>"#,
            points.join(" ")
        );
        for (x, y) in &pts {
            let m = MARKER_HALF;
            let _ = writeln!(
                out,
                r#"<polygon class="marker" points="{},{} {},{} {},{} {},{}"/>"#,
                coord(*x),
                coord(y - m),
                coord(x + m),
                coord(*y),
                coord(*x),
                coord(y + m),
                coord(x - m),
                coord(*y)
            );
        }
        let _ = writeln!(out, "</g>");
    }
    let _ = writeln!(out, "</g>");

    let _ = writeln!(
        out,
        r#"<g id="legend" font-family="sans-serif" font-size="12">"#
    );
    for (i, (name, _)) in ts.entries().iter().enumerate() {
        let (_, color) = PALETTE[i % PALETTE.len()];
        let y = 16 + 16 * i;
        let _ = writeln!(
            out,
            r#"<text x="8" y="{y}" fill="{color}">{}</text>"#,
            escape(name)
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, "</svg>");
    Ok(out)
}
