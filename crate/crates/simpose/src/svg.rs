//! Static SVG of a plane curve with a loop of inscribed triangles.

use std::fmt::Write;

const SIZE: f64 = 480.0;
const MARGIN: f64 = 24.0;

struct Frame {
    min: [f64; 2],
    scale: f64,
}

impl Frame {
    fn fit<'a>(points: impl Iterator<Item = &'a Vec<f64>>) -> Self {
        let mut min = [f64::INFINITY; 2];
        let mut max = [f64::NEG_INFINITY; 2];
        for p in points {
            for a in 0..2 {
                min[a] = min[a].min(p[a]);
                max[a] = max[a].max(p[a]);
            }
        }
        let span = (max[0] - min[0]).max(max[1] - min[1]).max(1e-12);
        Self { min, scale: (SIZE - 2.0 * MARGIN) / span }
    }

    fn map(&self, p: &[f64]) -> (f64, f64) {
        let x = MARGIN + (p[0] - self.min[0]) * self.scale;
        let y = SIZE - MARGIN - (p[1] - self.min[1]) * self.scale;
        (x, y)
    }

    fn path(&self, pts: &[Vec<f64>]) -> String {
        let mut s = String::new();
        for (i, p) in pts.iter().enumerate() {
            let (x, y) = self.map(p);
            let _ = write!(s, "{}{x:.3},{y:.3}", if i == 0 { "" } else { " " });
        }
        s
    }
}

/// Draws `curve` as a closed polyline and `frames` triangles spread evenly
/// along `triangles`; the first is highlighted.
pub fn render(curve: &[Vec<f64>], triangles: &[Vec<Vec<f64>>], frames: usize) -> String {
    let frame = Frame::fit(curve.iter().chain(triangles.iter().flatten()));
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<polygon points="{}" fill="none" stroke="black" stroke-width="1.5"/>"#, frame.path(curve));
    let n = frames.min(triangles.len());
    for f in 0..n {
        let tri = &triangles[f * triangles.len() / n];
        let (stroke, width) = if f == 0 { ("#c0392b", 1.6) } else { ("#2c7fb8", 0.8) };
        let _ = writeln!(
            out,
            r#"<polygon points="{}" fill="none" stroke="{stroke}" stroke-width="{width}" stroke-opacity="0.8"/>"#,
            frame.path(tri)
        );
    }
    out.push_str("</svg>\n");
    out
}
