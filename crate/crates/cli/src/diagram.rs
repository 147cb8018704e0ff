//! SVG rendering of ΔP with a JSON sidecar.
//!
//! Coordinates in the SVG are floats rounded to 15 significant digits; the
//! exact values ride along in `data-*` attributes and in the sidecar, which
//! carries the whole face classification.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use gj_facets::additivity::{Analysis, FaceClass};
use gj_facets::complex2d::{Point, Triple};
use gj_facets::pwl::{extended_breakpoints, PwlFunction};
use gj_facets::QNum;

pub const SIDECAR_SCHEMA: &str = "gjf-diagram/1";

const SIZE: f64 = 600.0;
const MARGIN: f64 = 20.0;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagramSpec {
    pub show_additive: bool,
    pub show_limit_cones: bool,
    pub color_by_nf: bool,
    /// Extra text placed under the title, e.g. for a function drawn through
    /// its piecewise linear base.
    pub note: Option<String>,
}

impl Default for DiagramSpec {
    fn default() -> Self {
        DiagramSpec {
            show_additive: true,
            show_limit_cones: true,
            color_by_nf: false,
            note: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaceEntry {
    pub id: usize,
    pub name: String,
    pub triple: Triple,
    pub dim: u8,
    pub vertices: Vec<Point>,
    pub class: FaceClass,
    pub n_f: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeEntry {
    pub face: usize,
    pub sub: usize,
    /// The vertex of `sub`, or the midpoint of the edge `sub`.
    pub at: Point,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagramData {
    pub schema: String,
    pub function: PwlFunction,
    pub faces: Vec<FaceEntry>,
    pub limit_cones: Vec<ConeEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl DiagramData {
    pub fn build(pi: &PwlFunction, note: Option<String>) -> DiagramData {
        let an = Analysis::new(pi);
        let report = an.report();
        let faces = an
            .cx
            .faces
            .iter()
            .enumerate()
            .map(|(id, f)| FaceEntry {
                id,
                name: an.cx.describe(id),
                triple: f.triple,
                dim: f.dim,
                vertices: f.vertices.clone(),
                class: report.classes[id],
                n_f: an.cx.n_f(id, &pi.special_intervals),
            })
            .collect();
        let limit_cones = report
            .limit_cones
            .iter()
            .map(|lc| ConeEntry {
                face: lc.face,
                sub: lc.sub,
                at: centroid(&an.cx.face(lc.sub).vertices),
            })
            .collect();
        DiagramData {
            schema: SIDECAR_SCHEMA.to_string(),
            function: pi.clone(),
            faces,
            limit_cones,
            note,
        }
    }

    pub fn classes(&self) -> Vec<FaceClass> {
        self.faces.iter().map(|f| f.class).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("diagram data serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<DiagramData> {
        serde_json::from_str(text)
    }
}

fn centroid(vs: &[Point]) -> Point {
    let k = QNum::from_int(vs.len() as i64);
    let (x, y) = vs.iter().fold((QNum::zero(), QNum::zero()), |acc, v| {
        (acc.0 + &v.0, acc.1 + &v.1)
    });
    (x / &k, y / &k)
}

/// Round to 15 significant digits and print the shortest form.
pub fn fmt15(x: f64) -> String {
    let rounded: f64 = format!("{x:.14e}").parse().expect("float round trip");
    let s = format!("{rounded}");
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn sx(x: f64) -> f64 {
    MARGIN + x * SIZE
}

fn sy(y: f64) -> f64 {
    MARGIN + (1.0 - y) * SIZE
}

fn screen(p: &Point) -> (f64, f64) {
    (sx(p.0.to_f64()), sy(p.1.to_f64()))
}

fn attr_point(p: &Point) -> String {
    format!("{},{}", p.0, p.1)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn polygon_points(vs: &[Point]) -> String {
    vs.iter()
        .map(|v| {
            let (x, y) = screen(v);
            format!("{},{}", fmt15(x), fmt15(y))
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn render_svg(data: &DiagramData, spec: &DiagramSpec) -> String {
    let total = SIZE + 2.0 * MARGIN;
    let mut out = String::new();
    let w = &mut out;
    writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{t}" height="{t}" viewBox="0 0 {t} {t}" data-function="{}" data-schema="{SIDECAR_SCHEMA}">"#,
        escape(&data.function.name),
        t = fmt15(total)
    )
    .unwrap();
    writeln!(
        w,
        r##"<rect x="0" y="0" width="{t}" height="{t}" fill="#ffffff"/>"##,
        t = fmt15(total)
    )
    .unwrap();
    if let Some(note) = &spec.note {
        writeln!(w, r#"<title>{}</title>"#, escape(note)).unwrap();
    }

    if spec.color_by_nf {
        writeln!(w, r#"<g id="n-f">"#).unwrap();
        for f in data.faces.iter().filter(|f| f.dim == 2 && f.n_f > 0) {
            let fill = if f.n_f == 1 { "#e6e6e6" } else { "#bdbdbd" };
            writeln!(
                w,
                r#"<polygon points="{}" fill="{fill}" data-face="{}" data-n-f="{}"/>"#,
                polygon_points(&f.vertices),
                escape(&f.name),
                f.n_f
            )
            .unwrap();
        }
        writeln!(w, "</g>").unwrap();
    }

    writeln!(w, r##"<g id="grid" stroke="#9e9e9e" stroke-width="0.5">"##).unwrap();
    let xs = data.function.breakpoints();
    let one = QNum::one();
    let mut lines: Vec<QNum> = xs.clone();
    lines.push(one.clone());
    for t in &lines {
        let v = t.to_f64();
        writeln!(
            w,
            r#"<line x1="{a}" y1="{b0}" x2="{a}" y2="{b1}" data-x="{t}"/>"#,
            a = fmt15(sx(v)),
            b0 = fmt15(sy(0.0)),
            b1 = fmt15(sy(1.0))
        )
        .unwrap();
        writeln!(
            w,
            r#"<line x1="{a0}" y1="{b}" x2="{a1}" y2="{b}" data-y="{t}"/>"#,
            a0 = fmt15(sx(0.0)),
            a1 = fmt15(sx(1.0)),
            b = fmt15(sy(v))
        )
        .unwrap();
    }
    for t in extended_breakpoints(&xs) {
        if t.is_zero() || t == QNum::from_int(2) {
            continue;
        }
        // x + y = t clipped to the unit square
        let lo = (&t - &one).max(QNum::zero());
        let hi = t.clone().min(one.clone());
        let p0 = (lo.clone(), &t - &lo);
        let p1 = (hi.clone(), &t - &hi);
        let (a, b) = (screen(&p0), screen(&p1));
        writeln!(
            w,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" data-sum="{t}"/>"#,
            fmt15(a.0),
            fmt15(a.1),
            fmt15(b.0),
            fmt15(b.1)
        )
        .unwrap();
    }
    writeln!(w, "</g>").unwrap();

    if spec.show_additive {
        writeln!(w, r##"<g id="additive" fill="#43a047" stroke="#2e7d32">"##).unwrap();
        for f in data.faces.iter().filter(|f| f.class == FaceClass::Additive) {
            let name = escape(&f.name);
            match f.dim {
                2 => writeln!(
                    w,
                    r#"<polygon points="{}" fill-opacity="0.6" stroke-width="0.5" data-face="{name}"/>"#,
                    polygon_points(&f.vertices)
                ),
                1 => {
                    let (a, b) = (screen(&f.vertices[0]), screen(&f.vertices[1]));
                    writeln!(
                        w,
                        r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke-width="2" data-face="{name}"/>"#,
                        fmt15(a.0),
                        fmt15(a.1),
                        fmt15(b.0),
                        fmt15(b.1)
                    )
                }
                _ => {
                    let (x, y) = screen(&f.vertices[0]);
                    writeln!(
                        w,
                        r#"<circle cx="{}" cy="{}" r="2" data-face="{name}" data-at="{}"/>"#,
                        fmt15(x),
                        fmt15(y),
                        attr_point(&f.vertices[0])
                    )
                }
            }
            .unwrap();
        }
        writeln!(w, "</g>").unwrap();
    }

    if spec.show_limit_cones {
        writeln!(
            w,
            r##"<g id="limit-cones" stroke="#1b5e20" fill="#1b5e20">"##
        )
        .unwrap();
        for lc in &data.limit_cones {
            let face = &data.faces[lc.face];
            let (ax, ay) = screen(&lc.at);
            let (cx, cy) = screen(&centroid(&face.vertices));
            let (dx, dy) = (cx - ax, cy - ay);
            let len = (dx * dx + dy * dy).sqrt();
            if len == 0.0 {
                continue;
            }
            let (ux, uy) = (dx / len, dy / len);
            // fixed-length glyph pointing at the vertex from inside the face
            let tail = (ax + 16.0 * ux, ay + 16.0 * uy);
            let tip = (ax + 2.0 * ux, ay + 2.0 * uy);
            let base = (ax + 7.0 * ux, ay + 7.0 * uy);
            let (px, py) = (-uy * 3.0, ux * 3.0);
            writeln!(
                w,
                r#"<g class="cone" data-face="{}" data-sub="{}" data-at="{}"><line x1="{}" y1="{}" x2="{}" y2="{}" stroke-width="1.2"/><polygon points="{},{} {},{} {},{}"/></g>"#,
                escape(&face.name),
                escape(&data.faces[lc.sub].name),
                attr_point(&lc.at),
                fmt15(tail.0),
                fmt15(tail.1),
                fmt15(base.0),
                fmt15(base.1),
                fmt15(tip.0),
                fmt15(tip.1),
                fmt15(base.0 + px),
                fmt15(base.1 + py),
                fmt15(base.0 - px),
                fmt15(base.1 - py)
            )
            .unwrap();
        }
        writeln!(w, "</g>").unwrap();
    }

    writeln!(
        w,
        r##"<rect x="{m}" y="{m}" width="{s}" height="{s}" fill="none" stroke="#424242"/>"##,
        m = fmt15(MARGIN),
        s = fmt15(SIZE)
    )
    .unwrap();
    writeln!(w, "</svg>").unwrap();
    out
}
