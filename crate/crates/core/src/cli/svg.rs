//! Minimal deterministic SVG emission: heatmaps as rect grids, the
//! parameter square with dashed invariant segments, and an orthographic
//! projection of Bloch-sphere trajectories.

use crate::adiabatic::BlochTrajectory;
use crate::spin::{BandSurface, InvariantSegment};

const CANVAS: f64 = 560.0;
const MARGIN: f64 = 24.0;
const PLOT: f64 = CANVAS - 2.0 * MARGIN;

fn header(title: &str, digest: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{c}\" height=\"{c}\" \
         viewBox=\"0 0 {c} {c}\">\n<!-- {title}; config sha256 {digest} -->\n\
         <rect width=\"{c}\" height=\"{c}\" fill=\"#ffffff\"/>\n",
        c = CANVAS
    )
}

/// Map a unit-square point to canvas coordinates (beta up).
fn to_canvas(alpha: f64, beta: f64) -> (f64, f64) {
    (MARGIN + alpha * PLOT, MARGIN + (1.0 - beta) * PLOT)
}

/// Blue-to-yellow ramp for scalar fields.
fn color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let r = (35.0 + 220.0 * t) as u8;
    let g = (30.0 + 195.0 * t.powf(0.8)) as u8;
    let b = (120.0 + 60.0 * (1.0 - t) - 85.0 * t) as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Heatmap of |B| on the band-surface grid.
pub fn heatmap(surface: &BandSurface, digest: &str) -> String {
    let n = surface.grid_n;
    let peak = surface
        .nodes
        .iter()
        .map(|node| node.b_mag)
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let cell = PLOT / (n - 1).max(1) as f64;
    let mut out = header("field magnitude over the parameter square", digest);
    for node in &surface.nodes {
        let (x, y) = to_canvas(node.alpha, node.beta);
        out.push_str(&format!(
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>\n",
            x - cell / 2.0,
            y - cell / 2.0,
            cell,
            cell,
            color(node.b_mag / peak)
        ));
    }
    out.push_str(&square_frame());
    out.push_str("</svg>\n");
    out
}

fn square_frame() -> String {
    let (x0, y0) = to_canvas(0.0, 1.0);
    format!(
        "<rect x=\"{x0}\" y=\"{y0}\" width=\"{PLOT}\" height=\"{PLOT}\" \
         fill=\"none\" stroke=\"#000000\" stroke-width=\"1.5\"/>\n"
    )
}

fn dashed_invariant_segments() -> String {
    let mut out = String::new();
    for segment in InvariantSegment::ALL {
        let (a0, b0) = segment.point(0.0);
        let (a1, b1) = segment.point(1.0);
        let (x0, y0) = to_canvas(a0, b0);
        let (x1, y1) = to_canvas(a1, b1);
        out.push_str(&format!(
            "<line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x1:.2}\" y2=\"{y1:.2}\" \
             stroke=\"#777777\" stroke-width=\"1\" stroke-dasharray=\"6 4\"/>\n"
        ));
    }
    out
}

/// Parameter-square picture of a sampled path with the invariant segments
/// dashed behind it.
pub fn parameter_path(samples: &[(f64, f64, f64)], digest: &str) -> String {
    let mut out = header("parameter-space path", digest);
    out.push_str(&dashed_invariant_segments());
    out.push_str(&square_frame());
    let points: Vec<String> = samples
        .iter()
        .map(|&(_, a, b)| {
            let (x, y) = to_canvas(a, b);
            format!("{x:.2},{y:.2}")
        })
        .collect();
    out.push_str(&format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#c02020\" stroke-width=\"2\"/>\n",
        points.join(" ")
    ));
    out.push_str("</svg>\n");
    out
}

/// Orthographic projection of a Bloch trajectory along +z: the front
/// hemisphere is drawn solid, the back dashed.
pub fn bloch_projection(traj: &BlochTrajectory, digest: &str) -> String {
    let mut out = header("Bloch-sphere image (orthographic, +z view)", digest);
    let r = PLOT / 2.0;
    let cx = CANVAS / 2.0;
    out.push_str(&format!(
        "<circle cx=\"{cx}\" cy=\"{cx}\" r=\"{r}\" fill=\"none\" stroke=\"#000000\" \
         stroke-width=\"1.5\"/>\n"
    ));
    // Split into runs of constant hemisphere so each can be styled.
    let mut runs: Vec<(bool, Vec<String>)> = Vec::new();
    for sample in &traj.samples {
        let front = sample.n[2] >= 0.0;
        let x = cx + sample.n[0] * r;
        let y = cx - sample.n[1] * r;
        let coord = format!("{x:.2},{y:.2}");
        match runs.last_mut() {
            Some((f, pts)) if *f == front => pts.push(coord),
            _ => {
                // Repeat the boundary point so runs connect visually.
                let mut pts = Vec::new();
                if let Some((_, prev)) = runs.last() {
                    if let Some(last) = prev.last() {
                        pts.push(last.clone());
                    }
                }
                pts.push(coord);
                runs.push((front, pts));
            }
        }
    }
    for (front, pts) in runs {
        let dash = if front { "" } else { " stroke-dasharray=\"5 4\"" };
        out.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"#2040c0\" stroke-width=\"2\"{}/>\n",
            pts.join(" "),
            dash
        ));
    }
    out.push_str("</svg>\n");
    out
}
