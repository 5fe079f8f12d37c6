//! SVG rendering of attractor domains and point clouds.
//!
//! Fixed 800x800 viewport, `y` pointing up. Numbers are printed with two
//! decimals so output bytes depend only on the inputs.

use abcf::attractor::{boundary_segments, Component, RectDomain};
use abcf::natext::Cloud;
use std::fmt::Write;

pub const SIZE: f64 = 800.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SvgError {
    #[error("empty or non-finite window [{0}, {1}] x [{2}, {3}]")]
    EmptyWindow(f64, f64, f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Window {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Window, SvgError> {
        let ok = [x0, x1, y0, y1].iter().all(|v| v.is_finite()) && x0 < x1 && y0 < y1;
        if !ok {
            return Err(SvgError::EmptyWindow(x0, x1, y0, y1));
        }
        Ok(Window { x0, x1, y0, y1 })
    }

    pub fn square(r: f64) -> Result<Window, SvgError> {
        Window::new(-r, r, -r, r)
    }

    fn px(&self, x: f64) -> f64 {
        (x - self.x0) / (self.x1 - self.x0) * SIZE
    }

    fn py(&self, y: f64) -> f64 {
        SIZE - (y - self.y0) / (self.y1 - self.y0) * SIZE
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        self.x0 <= x && x <= self.x1 && self.y0 <= y && y <= self.y1
    }

    /// Clips an axis-parallel box to the window; `None` if nothing is left.
    fn clip_box(&self, x0: f64, x1: f64, y0: f64, y1: f64) -> Option<[f64; 4]> {
        let (x0, x1) = (x0.max(self.x0), x1.min(self.x1));
        let (y0, y1) = (y0.max(self.y0), y1.min(self.y1));
        (x0 <= x1 && y0 <= y1).then_some([x0, x1, y0, y1])
    }
}

fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" { "0.00".into() } else { s }
}

/// Draws the two components as filled boxes, the boundary steps as paths,
/// and the finite cloud points inside the window as dots.
pub fn render_svg(domain: &RectDomain, cloud: Option<&Cloud>, window: Window) -> Result<String, SvgError> {
    let w = Window::new(window.x0, window.x1, window.y0, window.y1)?;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="800" height="800" viewBox="0 0 800 800">"#
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="800" height="800" fill="white"/>"#);
    for (component, fill) in [(Component::Upper, "#cfe0f5"), (Component::Lower, "#f5dccf")] {
        let _ = writeln!(out, r#"<g class="{component}" fill="{fill}" stroke="none" shape-rendering="crispEdges">"#);
        let rects = match component {
            Component::Upper => domain.upper_rects(),
            Component::Lower => domain.lower_rects(),
        };
        for r in rects.iter().map(|r| r.to_f64()) {
            if let Some([x0, x1, y0, y1]) = w.clip_box(r.x0, r.x1, r.y0, r.y1) {
                let _ = writeln!(
                    out,
                    r#"<rect x="{}" y="{}" width="{}" height="{}"/>"#,
                    num(w.px(x0)),
                    num(w.py(y1)),
                    num(w.px(x1) - w.px(x0)),
                    num(w.py(y0) - w.py(y1)),
                );
            }
        }
        let _ = writeln!(out, "</g>");
    }
    let mut d = String::new();
    for [x0, y0, x1, y1] in boundary_segments(domain) {
        let (lx, hx) = (x0.min(x1), x0.max(x1));
        let (ly, hy) = (y0.min(y1), y0.max(y1));
        if let Some([cx0, cx1, cy0, cy1]) = w.clip_box(lx, hx, ly, hy) {
            let _ = write!(d, "M{} {}L{} {}", num(w.px(cx0)), num(w.py(cy0)), num(w.px(cx1)), num(w.py(cy1)));
        }
    }
    let _ = writeln!(out, r#"<path class="boundary" d="{d}" fill="none" stroke="black" stroke-width="1.5"/>"#);
    for (x0, y0, x1, y1) in [(w.x0, 0.0, w.x1, 0.0), (0.0, w.y0, 0.0, w.y1)] {
        if w.contains(x0, y0) && w.contains(x1, y1) {
            let _ = writeln!(
                out,
                r##"<line class="axis" x1="{}" y1="{}" x2="{}" y2="{}" stroke="#888" stroke-width="0.5"/>"##,
                num(w.px(x0)),
                num(w.py(y0)),
                num(w.px(x1)),
                num(w.py(y1)),
            );
        }
    }
    if let Some(cloud) = cloud {
        let mut d = String::new();
        for p in cloud.finite_points().filter(|p| w.contains(p[0], p[1])) {
            let _ = write!(d, "M{} {}h1v1h-1z", num(w.px(p[0]) - 0.5), num(w.py(p[1]) - 0.5));
        }
        let _ = writeln!(out, r#"<path class="cloud" d="{d}" fill="black" stroke="none"/>"#);
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use abcf::attractor::build_attractor;
    use abcf::Params;

    #[test]
    fn window_validation() {
        assert!(Window::new(0.0, 0.0, -1.0, 1.0).is_err());
        assert!(Window::new(-1.0, 1.0, 1.0, -1.0).is_err());
        assert!(Window::new(f64::NEG_INFINITY, 1.0, -1.0, 1.0).is_err());
        assert!(Window::square(3.0).is_ok());
    }

    #[test]
    fn y_axis_points_up() {
        let w = Window::square(2.0).unwrap();
        assert_eq!((w.px(-2.0), w.py(-2.0)), (0.0, 800.0));
        assert_eq!((w.px(2.0), w.py(2.0)), (800.0, 0.0));
    }

    #[test]
    fn empty_cloud_gives_boundary_only() {
        let d = build_attractor(&Params::ratio(-1, 1, 1, 1)).unwrap();
        let w = Window::square(3.0).unwrap();
        let plain = render_svg(&d, None, w).unwrap();
        assert!(!plain.contains("class=\"cloud\""));
        assert!(plain.contains("class=\"boundary\""));
        let empty = render_svg(&d, Some(&Cloud::default()), w).unwrap();
        assert!(empty.contains(r#"class="cloud" d="""#));
    }

    #[test]
    fn classical_boxes_are_clipped_to_window() {
        let d = build_attractor(&Params::ratio(-1, 1, 1, 1)).unwrap();
        let s = render_svg(&d, None, Window::square(3.0).unwrap()).unwrap();
        // the upper box [-1,0] x [1, inf] becomes [-1,0] x [1,3]
        assert!(s.contains(r#"<rect x="266.67" y="0.00" width="133.33" height="266.67"/>"#), "{s}");
    }
}
