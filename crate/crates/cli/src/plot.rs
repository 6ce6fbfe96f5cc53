//! Static polar plots of scans as SVG.
//!
//! The robot faces up and its left is drawn to the left, so a world point
//! `(x, y)` in the sensor frame lands at `(cx − y·s, cy − x·s)`. A ring marks
//! `max_range`; readings at `max_range` (no return) are drawn faintly.

use std::fmt::Write as _;

use lidar_cfe::geometry::{ray_heading, ObstacleShape, Point2};
use lidar_cfe::scan::{GoalFeatures, Scan};

const SIZE: f64 = 480.0;
const RADIUS: f64 = 200.0;

const BASE_LIGHT: &str = "#9ecae1";
const HIT: &str = "#08519c";
const OBSTACLE: &str = "#d62728";
const GOAL: &str = "#ff7f0e";

struct Canvas {
    out: String,
    scale: f64,
}

impl Canvas {
    fn new(title: &str, max_range: f64) -> Self {
        let mut out = String::new();
        let c = SIZE / 2.0;
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(out, r#"<text x="10" y="20" font-family="sans-serif" font-size="14">{}</text>"#, escape(title));
        let _ = writeln!(out, r##"<circle cx="{c}" cy="{c}" r="{RADIUS}" fill="none" stroke="#bbbbbb" stroke-dasharray="4 3"/>"##);
        let _ = writeln!(
            out,
            r##"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" fill="#888888">{max_range} m</text>"##,
            c + RADIUS * 0.72,
            c - RADIUS * 0.72
        );
        let _ = writeln!(out, r##"<line x1="{c}" y1="{:.1}" x2="{c}" y2="{:.1}" stroke="#eeeeee"/>"##, c - RADIUS, c + RADIUS);
        let _ = writeln!(out, r##"<line x1="{:.1}" y1="{c}" x2="{:.1}" y2="{c}" stroke="#eeeeee"/>"##, c - RADIUS, c + RADIUS);
        Self { out, scale: RADIUS / max_range }
    }

    fn xy(&self, p: Point2) -> (f64, f64) {
        let c = SIZE / 2.0;
        (c - p.y * self.scale, c - p.x * self.scale)
    }

    fn points(&mut self, scan: &Scan, color: &str, r: f64) {
        let n = scan.len();
        for (i, &d) in scan.readings().iter().enumerate() {
            let h = ray_heading(i, n);
            let (sx, sy) = self.xy(Point2::new(d * h.cos(), d * h.sin()));
            let opacity = if d >= scan.max_range() { 0.2 } else { 1.0 };
            let _ = writeln!(
                self.out,
                r#"<circle cx="{sx:.2}" cy="{sy:.2}" r="{r}" fill="{color}" fill-opacity="{opacity}"/>"#
            );
        }
    }

    fn shape(&mut self, shape: &ObstacleShape) {
        match shape {
            ObstacleShape::Circle(c) => {
                let (sx, sy) = self.xy(c.center);
                let _ = writeln!(
                    self.out,
                    r#"<circle cx="{sx:.2}" cy="{sy:.2}" r="{:.2}" fill="none" stroke="{OBSTACLE}" stroke-width="1.5"/>"#,
                    c.radius * self.scale
                );
            }
            ObstacleShape::Rectangle(r) => {
                let pts: Vec<String> = r
                    .corners()
                    .iter()
                    .map(|&p| {
                        let (sx, sy) = self.xy(p);
                        format!("{sx:.2},{sy:.2}")
                    })
                    .collect();
                let _ = writeln!(
                    self.out,
                    r#"<polygon points="{}" fill="none" stroke="{OBSTACLE}" stroke-width="1.5"/>"#,
                    pts.join(" ")
                );
            }
        }
    }

    fn sensor_and_goal(&mut self, goal: &GoalFeatures, max_range: f64) {
        let c = SIZE / 2.0;
        let _ = writeln!(self.out, r#"<circle cx="{c}" cy="{c}" r="4" fill="black"/>"#);
        // goals beyond the ring are pinned just outside it
        let d = goal.distance.min(max_range * 1.05);
        let (sx, sy) = self.xy(Point2::new(d * goal.cos_theta, d * goal.sin_theta));
        let _ = writeln!(
            self.out,
            r#"<path d="M {sx:.2} {:.2} L {:.2} {sy:.2} L {sx:.2} {:.2} L {:.2} {sy:.2} Z" fill="{GOAL}"/>"#,
            sy - 7.0,
            sx + 7.0,
            sy + 7.0,
            sx - 7.0
        );
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// One scan with its goal marker.
pub fn scan_svg(title: &str, scan: &Scan, goal: &GoalFeatures) -> String {
    let mut canvas = Canvas::new(title, scan.max_range());
    canvas.points(scan, HIT, 2.0);
    canvas.sensor_and_goal(goal, scan.max_range());
    canvas.finish()
}

/// Base scan (light), combined scan (dark), and obstacle outlines.
pub fn cfe_svg(title: &str, base: &Scan, combined: &Scan, obstacles: &[ObstacleShape], goal: &GoalFeatures) -> String {
    let mut canvas = Canvas::new(title, base.max_range());
    canvas.points(base, BASE_LIGHT, 3.0);
    for s in obstacles {
        canvas.shape(s);
    }
    canvas.points(combined, HIT, 1.8);
    canvas.sensor_and_goal(goal, base.max_range());
    canvas.finish()
}
