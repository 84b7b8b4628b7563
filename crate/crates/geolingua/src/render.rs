//! SVG rendering with an adaptive canvas.
//!
//! The canvas procedure translates negative coordinates into the first
//! quadrant and sizes the canvas to the default 100, or to the next multiple
//! of 50 above the largest translated coordinate. Rendering flips the y axis
//! (mathematical y-up to SVG y-down) and insets the content by a 5% padding
//! band so boundary points are not clipped by stroke width; the padding is a
//! uniform scale-and-shift, so angles and length ratios are unchanged and
//! every rendered coordinate stays inside the viewBox.

use crate::geometry::{dir_deg, Point};
use crate::scene::{Assignment, Scene};
use crate::solver::SolveResult;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum RenderError {
    #[error("cannot render an empty diagram (no points)")]
    EmptyDiagram,
}

/// Solved geometry ready for rendering.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagram {
    /// Point name and position, in scene order.
    pub points: Vec<(String, (f64, f64))>,
    pub segments: Vec<(String, String)>,
    pub circles: Vec<DiagramCircle>,
    pub arcs: Vec<DiagramArc>,
    /// Names of points whose label is drawn.
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramCircle {
    pub center: String,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramArc {
    pub center: String,
    pub radius: f64,
    /// Start angle in degrees, mathematical convention.
    pub start_deg: f64,
    /// Counterclockwise sweep in degrees.
    pub sweep_deg: f64,
}

impl Diagram {
    pub fn position(&self, name: &str) -> Option<Point> {
        self.points
            .iter()
            .find(|(n, _)| n == name)
            .map(|&(_, (x, y))| Point::new(x, y))
    }

    /// Coordinates that must fit on the canvas: every point plus the
    /// extremes of circles and arcs, so curved outlines are not clipped.
    pub fn extent_points(&self) -> Vec<Point> {
        let mut pts: Vec<Point> = self
            .points
            .iter()
            .map(|&(_, (x, y))| Point::new(x, y))
            .collect();
        for circle in &self.circles {
            if let Some(c) = self.position(&circle.center) {
                let r = circle.radius;
                pts.push(Point::new(c.x - r, c.y - r));
                pts.push(Point::new(c.x + r, c.y + r));
            }
        }
        for arc in &self.arcs {
            if let Some(c) = self.position(&arc.center) {
                let r = arc.radius;
                pts.push(Point::new(c.x - r, c.y - r));
                pts.push(Point::new(c.x + r, c.y + r));
            }
        }
        pts
    }
}

/// Build a diagram from a scene and a solved configuration.
pub fn diagram_from(scene: &Scene, assignment: &Assignment, coords: &[Point]) -> Diagram {
    let name = |id: usize| scene.point_names[id].clone();
    Diagram {
        points: scene
            .point_names
            .iter()
            .cloned()
            .zip(coords.iter().map(|p| (p.x, p.y)))
            .collect(),
        segments: scene
            .segments
            .iter()
            .map(|s| (name(s.0), name(s.1)))
            .collect(),
        circles: scene
            .circles
            .iter()
            .enumerate()
            .filter(|(_, c)| c.draw)
            .map(|(id, c)| DiagramCircle {
                center: name(c.center),
                radius: scene.circle_radius(assignment, coords, id),
            })
            .collect(),
        arcs: scene
            .arcs
            .iter()
            .map(|a| DiagramArc {
                center: name(scene.circles[a.circle].center),
                radius: scene.circle_radius(assignment, coords, a.circle),
                start_deg: scene.angle_value(assignment, a.start),
                sweep_deg: a.sweep_deg,
            })
            .collect(),
        labels: scene
            .point_names
            .iter()
            .zip(&scene.labels)
            .filter(|(_, &draw)| draw)
            .map(|(n, _)| n.clone())
            .collect(),
    }
}

/// Convenience: diagram for a solve result.
pub fn diagram_from_result(scene: &Scene, result: &SolveResult) -> Diagram {
    diagram_from(scene, &result.assignment, &result.coords)
}

/// Canvas translation and size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanvasSpec {
    pub x_offset: f64,
    pub y_offset: f64,
    /// Side length; a positive multiple of 50.
    pub size: f64,
}

/// Default canvas side when all translated coordinates fit.
pub const DEFAULT_CANVAS: f64 = 100.0;

/// Compute the translation offsets and canvas size for a point set: negative
/// coordinates are shifted into the first quadrant, and the canvas grows to
/// the next multiple of 50 above the largest translated coordinate when the
/// default does not contain it.
pub fn adaptive_canvas(points: &[Point]) -> CanvasSpec {
    let min_x = points.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
    let min_y = points.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
    let x_offset = if min_x < 0.0 { -min_x } else { 0.0 };
    let y_offset = if min_y < 0.0 { -min_y } else { 0.0 };
    let max_coord = points
        .iter()
        .flat_map(|p| [p.x + x_offset, p.y + y_offset])
        .fold(0.0, f64::max);
    let size = if points.is_empty() || max_coord <= DEFAULT_CANVAS {
        DEFAULT_CANVAS
    } else {
        ((max_coord / 50.0).floor() + 1.0) * 50.0
    };
    CanvasSpec { x_offset, y_offset, size }
}

/// Rendering options.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderOptions {
    pub stroke_width: f64,
    pub font_size: f64,
    /// Label offset from its point, in canvas units (applied on both axes).
    pub label_offset: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            stroke_width: 0.8,
            font_size: 4.5,
            label_offset: 2.0,
        }
    }
}

/// Fraction of the canvas kept as padding on each side.
const PADDING: f64 = 0.05;

struct Mapper {
    spec: CanvasSpec,
}

impl Mapper {
    /// Canvas-translated, padded, y-flipped SVG position.
    fn map(&self, p: Point) -> (f64, f64) {
        let size = self.spec.size;
        let x = p.x + self.spec.x_offset;
        let y = p.y + self.spec.y_offset;
        let sx = size * PADDING + x * (1.0 - 2.0 * PADDING);
        let sy = size - (size * PADDING + y * (1.0 - 2.0 * PADDING));
        (sx, sy)
    }

    fn scale(&self, v: f64) -> f64 {
        v * (1.0 - 2.0 * PADDING)
    }
}

fn fmt(v: f64) -> String {
    let rounded = (v * 1000.0).round() / 1000.0;
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    format!("{rounded:.3}")
}

/// Render a diagram to SVG bytes. Byte-deterministic for identical inputs.
pub fn render_svg(
    diagram: &Diagram,
    spec: &CanvasSpec,
    options: &RenderOptions,
) -> Result<Vec<u8>, RenderError> {
    if diagram.points.is_empty() {
        return Err(RenderError::EmptyDiagram);
    }
    let m = Mapper { spec: *spec };
    let size = spec.size;
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {} {}\" width=\"{}\" height=\"{}\">\n",
        fmt(size),
        fmt(size),
        fmt(size),
        fmt(size)
    ));
    out.push_str(&format!(
        "<g fill=\"none\" stroke=\"black\" stroke-width=\"{}\" stroke-linecap=\"round\">\n",
        fmt(options.stroke_width)
    ));

    for circle in &diagram.circles {
        if let Some(c) = diagram.position(&circle.center) {
            let (cx, cy) = m.map(c);
            out.push_str(&format!(
                "<circle cx=\"{}\" cy=\"{}\" r=\"{}\"/>\n",
                fmt(cx),
                fmt(cy),
                fmt(m.scale(circle.radius))
            ));
        }
    }

    for arc in &diagram.arcs {
        if let Some(c) = diagram.position(&arc.center) {
            let p0 = c + dir_deg(arc.start_deg) * arc.radius;
            let p1 = c + dir_deg(arc.start_deg + arc.sweep_deg) * arc.radius;
            let (x0, y0) = m.map(p0);
            let (x1, y1) = m.map(p1);
            let r = m.scale(arc.radius);
            let large = (arc.sweep_deg.abs() > 180.0) as u8;
            // Counterclockwise in math coordinates is clockwise after the
            // y flip, hence sweep flag 0 for positive sweeps.
            let sweep_flag = (arc.sweep_deg < 0.0) as u8;
            out.push_str(&format!(
                "<path d=\"M {} {} A {} {} 0 {} {} {} {}\"/>\n",
                fmt(x0),
                fmt(y0),
                fmt(r),
                fmt(r),
                large,
                sweep_flag,
                fmt(x1),
                fmt(y1)
            ));
        }
    }

    for (a, b) in &diagram.segments {
        if let (Some(pa), Some(pb)) = (diagram.position(a), diagram.position(b)) {
            let (x0, y0) = m.map(pa);
            let (x1, y1) = m.map(pb);
            out.push_str(&format!(
                "<path d=\"M {} {} L {} {}\"/>\n",
                fmt(x0),
                fmt(y0),
                fmt(x1),
                fmt(y1)
            ));
        }
    }
    out.push_str("</g>\n");

    out.push_str(&format!(
        "<g fill=\"black\" font-family=\"sans-serif\" font-size=\"{}\">\n",
        fmt(options.font_size)
    ));
    for label in &diagram.labels {
        if let Some(p) = diagram.position(label) {
            let shifted = p + Point::new(options.label_offset, options.label_offset);
            let (x, y) = m.map(shifted);
            let text = label.replace('&', "&amp;").replace('<', "&lt;");
            out.push_str(&format!(
                "<text x=\"{}\" y=\"{}\">{}</text>\n",
                fmt(x),
                fmt(y),
                text
            ));
        }
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out.into_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canvas_hand_traces() {
        let spec = adaptive_canvas(&[Point::new(-3.0, 5.0), Point::new(10.0, -2.0)]);
        assert_eq!(spec.x_offset, 3.0);
        assert_eq!(spec.y_offset, 2.0);
        assert_eq!(spec.size, 100.0);
        // Translated points: (0,7) and (13,0).
        let spec = adaptive_canvas(&[Point::new(0.0, 0.0), Point::new(120.0, 40.0)]);
        assert_eq!(spec.size, 150.0);
        let spec = adaptive_canvas(&[Point::new(5.0, 5.0), Point::new(95.0, 70.0)]);
        assert_eq!((spec.x_offset, spec.y_offset), (0.0, 0.0));
        assert_eq!(spec.size, 100.0);
    }

    #[test]
    fn canvas_exact_multiple_grows() {
        let spec = adaptive_canvas(&[Point::new(150.0, 0.0)]);
        assert_eq!(spec.size, 200.0);
    }

    fn unit_square_diagram() -> Diagram {
        Diagram {
            points: vec![
                ("A".into(), (0.0, 0.0)),
                ("B".into(), (1.0, 0.0)),
                ("C".into(), (1.0, 1.0)),
                ("D".into(), (0.0, 1.0)),
            ],
            segments: vec![
                ("A".into(), "B".into()),
                ("B".into(), "C".into()),
                ("C".into(), "D".into()),
                ("D".into(), "A".into()),
            ],
            circles: vec![],
            arcs: vec![],
            labels: vec!["A".into(), "B".into(), "C".into(), "D".into()],
        }
    }

    #[test]
    fn square_renders_four_paths_and_labels() {
        let diagram = unit_square_diagram();
        let spec = adaptive_canvas(&diagram.extent_points());
        let svg = String::from_utf8(render_svg(&diagram, &spec, &RenderOptions::default()).unwrap())
            .unwrap();
        assert_eq!(svg.matches("<path").count(), 4);
        assert_eq!(svg.matches("<text").count(), 4);
        assert!(svg.starts_with("<svg "));
        assert!(svg.contains("viewBox=\"0 0 100.000 100.000\""));
    }

    #[test]
    fn empty_diagram_is_an_error() {
        let diagram = Diagram::default();
        let spec = CanvasSpec { x_offset: 0.0, y_offset: 0.0, size: 100.0 };
        assert_eq!(
            render_svg(&diagram, &spec, &RenderOptions::default()),
            Err(RenderError::EmptyDiagram)
        );
    }

    #[test]
    fn rendering_is_byte_deterministic() {
        let diagram = unit_square_diagram();
        let spec = adaptive_canvas(&diagram.extent_points());
        let a = render_svg(&diagram, &spec, &RenderOptions::default()).unwrap();
        let b = render_svg(&diagram, &spec, &RenderOptions::default()).unwrap();
        assert_eq!(a, b);
    }
}
