//! Static SVG pictures: walls as semicircles over the `u`-axis with vertical
//! rays, and the spherical hyperbola of a tower wall lattice.
//!
//! Floats appear only here, and every coordinate is printed with six decimals
//! so identical inputs give identical bytes.

use std::fmt::Write;

use k3walls_core::classify::PositivityReport;
use k3walls_core::quad::QuadExt;
use k3walls_core::wall::WallGeometry;

const WIDTH: f64 = 800.0;

fn num(x: f64) -> String {
    let s = format!("{x:.6}");
    // avoid "-0.000000"
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        "0.000000".into()
    } else {
        s
    }
}

struct Frame {
    x0: f64,
    x1: f64,
    y1: f64,
}

impl Frame {
    fn height(&self) -> f64 {
        WIDTH * self.y1 / (self.x1 - self.x0)
    }

    fn open(&self, out: &mut String, title: &str) {
        let w = self.x1 - self.x0;
        let stroke = w / 400.0;
        writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="{} {} {} {}">"#,
            num(WIDTH),
            num(self.height().max(1.0)),
            num(self.x0),
            num(-self.y1),
            num(w),
            num(self.y1)
        )
        .unwrap();
        writeln!(out, "<title>{title}</title>").unwrap();
        writeln!(out, r##"<g fill="none" stroke="#000" stroke-width="{}">"##, num(stroke)).unwrap();
    }

    fn close(out: &mut String) {
        out.push_str("</g>\n</svg>\n");
    }
}

/// Half-open extents of a semicircle or ray on the `u`-axis.
fn extent(g: &WallGeometry) -> Option<(f64, f64, f64)> {
    match g {
        WallGeometry::Semicircle { center, radius_sq } => {
            let c = center.to_f64();
            let r = radius_sq.to_f64().sqrt();
            Some((c - r, c + r, r))
        }
        WallGeometry::Vertical { u0 } => {
            let u = u0.to_f64();
            Some((u, u, 0.0))
        }
        WallGeometry::Empty | WallGeometry::Everywhere => None,
    }
}

/// Walls on the `(u, t)` half-plane with dashed vertical rays.
pub fn render_walls(walls: &[WallGeometry], rays: &[QuadExt], title: &str) -> String {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut top: f64 = 0.0;
    for (a, b, r) in walls.iter().filter_map(extent) {
        lo = lo.min(a);
        hi = hi.max(b);
        top = top.max(r);
    }
    for u in rays {
        let u = u.to_f64();
        lo = lo.min(u);
        hi = hi.max(u);
    }
    if !lo.is_finite() {
        lo = -1.0;
        hi = 1.0;
    }
    lo = lo.min(0.0);
    hi = hi.max(0.0);
    let span = (hi - lo).max(1e-9);
    if top <= 0.0 {
        top = span / 2.0;
    }
    let margin = 0.08 * span.max(top);
    let frame = Frame {
        x0: lo - margin,
        x1: hi + margin,
        y1: top + margin,
    };
    let mut out = String::new();
    frame.open(&mut out, title);
    // axes: u along the bottom, t at u = 0
    writeln!(
        out,
        r#"<line class="axis" x1="{}" y1="0.000000" x2="{}" y2="0.000000"/>"#,
        num(frame.x0),
        num(frame.x1)
    )
    .unwrap();
    writeln!(
        out,
        r#"<line class="axis" x1="0.000000" y1="0.000000" x2="0.000000" y2="{}"/>"#,
        num(-frame.y1)
    )
    .unwrap();
    for g in walls {
        match g {
            WallGeometry::Semicircle { .. } => {
                let (a, b, r) = extent(g).unwrap();
                writeln!(
                    out,
                    r#"<path class="wall" d="M {} 0.000000 A {} {} 0 0 1 {} 0.000000"/>"#,
                    num(a),
                    num(r),
                    num(r),
                    num(b)
                )
                .unwrap();
            }
            WallGeometry::Vertical { u0 } => {
                let u = num(u0.to_f64());
                writeln!(
                    out,
                    r#"<line class="wall" x1="{u}" y1="0.000000" x2="{u}" y2="{}"/>"#,
                    num(-frame.y1)
                )
                .unwrap();
            }
            WallGeometry::Empty | WallGeometry::Everywhere => {}
        }
    }
    for u in rays {
        let u = num(u.to_f64());
        writeln!(
            out,
            r#"<line class="ray" stroke-dasharray="{} {}" x1="{u}" y1="0.000000" x2="{u}" y2="{}"/>"#,
            num(span / 80.0),
            num(span / 80.0),
            num(-frame.y1)
        )
        .unwrap();
    }
    Frame::close(&mut out);
    out
}

/// The hyperbola `−2x² − 2xy + (2n−2)y² = −2` in the coordinates
/// `t = x·s_{r−1} + y·v_r`, the line `(t, v_{r−1}) = 0`, the half-plane
/// `(t, s_{r−1}) ≥ 3`, and the lattice sphericals of the report.
pub fn render_hyperbola(report: &PositivityReport) -> String {
    let n = report.n as f64;
    let extent = report
        .spherical
        .iter()
        .flat_map(|&(x, y)| [x.abs(), y.abs()])
        .max()
        .unwrap_or(1)
        .clamp(3, 12) as f64
        + 1.0;
    // the frame is centered: y ranges over [−extent, extent]
    let frame = Frame {
        x0: -extent,
        x1: extent,
        y1: 2.0 * extent,
    };
    let shift = |y: f64| y - extent;
    let mut out = String::new();
    frame.open(
        &mut out,
        &format!("spherical classes on the wall of v_{} (n = {})", report.r, report.n),
    );
    let p = |x: f64, y: f64| format!("{} {}", num(x), num(shift(-y)));
    // 2x + y ≤ −3 clipped to the frame
    let corners = [
        (-extent, extent),
        ((-3.0 - extent) / 2.0, extent),
        ((-3.0 + extent) / 2.0, -extent),
        (-extent, -extent),
    ];
    let poly: Vec<String> = corners.iter().map(|&(x, y)| p(x.max(-extent), y)).collect();
    writeln!(
        out,
        r##"<polygon class="half-plane" fill="#ddd" stroke="none" points="{}"/>"##,
        poly.join(" ")
    )
    .unwrap();
    writeln!(
        out,
        r#"<line class="axis" x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
        num(-extent),
        num(shift(0.0)),
        num(extent),
        num(shift(0.0))
    )
    .unwrap();
    writeln!(
        out,
        r#"<line class="axis" x1="0.000000" y1="{}" x2="0.000000" y2="{}"/>"#,
        num(shift(extent)),
        num(shift(-extent))
    )
    .unwrap();
    // x + (2n − 1)y = 0
    let k = 2.0 * n - 1.0;
    writeln!(
        out,
        r#"<line class="line" x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
        num(-extent),
        num(shift(-extent / k)),
        num(extent),
        num(shift(extent / k))
    )
    .unwrap();
    // x = (−y ± √((4n − 3)y² + 4)) / 2
    for sign in [1.0, -1.0] {
        let steps = 200;
        let pts: Vec<String> = (0..=steps)
            .map(|i| {
                let y = -extent + 2.0 * extent * i as f64 / steps as f64;
                let x = (-y + sign * ((4.0 * n - 3.0) * y * y + 4.0).sqrt()) / 2.0;
                p(x.clamp(-extent, extent), y)
            })
            .collect();
        writeln!(out, r#"<polyline class="branch" points="{}"/>"#, pts.join(" ")).unwrap();
    }
    let dot = extent / 60.0;
    for &(x, y) in &report.spherical {
        let (xf, yf) = (x as f64, y as f64);
        if xf.abs() > extent || yf.abs() > extent {
            continue;
        }
        let class = if report.violations.contains(&(x, y)) {
            "violation"
        } else if report.candidates.contains(&(x, y)) {
            "candidate"
        } else {
            "spherical"
        };
        let fill = match class {
            "violation" => "#c00",
            "candidate" => "#000",
            _ => "#fff",
        };
        writeln!(
            out,
            r#"<circle class="{class}" fill="{fill}" cx="{}" cy="{}" r="{}"/>"#,
            num(xf),
            num(shift(-yf)),
            num(dot)
        )
        .unwrap();
    }
    Frame::close(&mut out);
    out
}
