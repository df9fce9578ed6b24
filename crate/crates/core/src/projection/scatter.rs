use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use super::Projection2D;
use crate::error::{Error, Result};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 40.0;
const LEGEND_WIDTH: f64 = 180.0;
const MARKER: f64 = 5.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shape {
    Circle,
    Square,
    Triangle,
    Diamond,
}

const SHAPES: [Shape; 4] = [
    Shape::Circle,
    Shape::Square,
    Shape::Triangle,
    Shape::Diamond,
];

impl Shape {
    fn name(self) -> &'static str {
        match self {
            Shape::Circle => "circle",
            Shape::Square => "square",
            Shape::Triangle => "triangle",
            Shape::Diamond => "diamond",
        }
    }

    fn tag(self) -> &'static str {
        match self {
            Shape::Circle => "circle",
            Shape::Square => "rect",
            Shape::Triangle | Shape::Diamond => "polygon",
        }
    }

    /// Marker element; `title` becomes a hover tooltip child.
    fn svg(self, x: f64, y: f64, fill: &str, attrs: &str, title: Option<&str>) -> String {
        let close = match title {
            Some(t) => format!("><title>{}</title></{}>", escape(t), self.tag()),
            None => "/>".to_string(),
        };
        let r = MARKER;
        match self {
            Shape::Circle => {
                format!(r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r}" fill="{fill}"{attrs}{close}"#)
            }
            Shape::Square => format!(
                r#"<rect x="{:.2}" y="{:.2}" width="{}" height="{}" fill="{fill}"{attrs}{close}"#,
                x - r,
                y - r,
                2.0 * r,
                2.0 * r
            ),
            Shape::Triangle => format!(
                r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{fill}"{attrs}{close}"#,
                x,
                y - r,
                x - r,
                y + r,
                x + r,
                y + r
            ),
            Shape::Diamond => format!(
                r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{fill}"{attrs}{close}"#,
                x,
                y - r,
                x + r,
                y,
                x,
                y + r,
                x - r,
                y
            ),
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Rendered scatter plot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scatter {
    pub svg: String,
    pub csv: String,
}

/// SVG scatter (color = cluster, marker = corpus, with legend) and a CSV
/// with columns `id,x,y,cluster,corpus`. `comment` is embedded verbatim in
/// the SVG as an XML comment.
pub fn emit_scatter(
    proj: &Projection2D,
    cluster_of: &BTreeMap<String, usize>,
    corpus_of: &BTreeMap<String, String>,
    comment: Option<&str>,
) -> Result<Scatter> {
    if proj.coords.is_empty() {
        return Err(Error::InvalidInput("projection is empty".into()));
    }
    if proj.coords.len() != proj.provision_ids.len() {
        return Err(Error::DimensionMismatch {
            expected: proj.provision_ids.len(),
            found: proj.coords.len(),
        });
    }
    let mut points = Vec::with_capacity(proj.coords.len());
    for (id, xy) in proj.provision_ids.iter().zip(&proj.coords) {
        let cluster = *cluster_of
            .get(id)
            .ok_or_else(|| Error::MissingId(id.clone()))?;
        let corpus = corpus_of
            .get(id)
            .ok_or_else(|| Error::MissingId(id.clone()))?;
        points.push((id, *xy, cluster, corpus.as_str()));
    }
    for id in cluster_of.keys().chain(corpus_of.keys()) {
        if !proj.provision_ids.contains(id) {
            return Err(Error::ExtraId(id.clone()));
        }
    }

    let corpora: Vec<&str> = points
        .iter()
        .map(|p| p.3)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let clusters: BTreeSet<usize> = points.iter().map(|p| p.2).collect();
    let shape_of =
        |corpus: &str| SHAPES[corpora.iter().position(|c| *c == corpus).unwrap() % SHAPES.len()];
    let color_of = |cluster: usize| PALETTE[cluster % PALETTE.len()];

    let (mut x_lo, mut x_hi, mut y_lo, mut y_hi) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for (_, [x, y], _, _) in &points {
        x_lo = x_lo.min(*x);
        x_hi = x_hi.max(*x);
        y_lo = y_lo.min(*y);
        y_hi = y_hi.max(*y);
    }
    let plot_w = WIDTH - LEGEND_WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let sx = |x: f64| {
        let span = x_hi - x_lo;
        MARGIN
            + if span > 0.0 {
                (x - x_lo) / span * plot_w
            } else {
                plot_w / 2.0
            }
    };
    let sy = |y: f64| {
        let span = y_hi - y_lo;
        MARGIN
            + if span > 0.0 {
                (y_hi - y) / span * plot_h
            } else {
                plot_h / 2.0
            }
    };

    let mut svg = String::new();
    writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )
    .unwrap();
    if let Some(c) = comment {
        writeln!(svg, "<!-- {} -->", c.replace("--", "- -")).unwrap();
    }
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(svg, r#"<g id="points">"#).unwrap();
    for (id, [x, y], cluster, corpus) in &points {
        let shape = shape_of(corpus);
        let attrs = format!(
            r#" data-cluster="{cluster}" data-corpus="{}" data-shape="{}""#,
            escape(corpus),
            shape.name(),
        );
        let marker = shape.svg(sx(*x), sy(*y), color_of(*cluster), &attrs, Some(id));
        writeln!(svg, "{marker}").unwrap();
    }
    writeln!(svg, "</g>").unwrap();

    let lx = WIDTH - LEGEND_WIDTH;
    let mut ly = MARGIN;
    writeln!(
        svg,
        r#"<g id="legend" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="{lx}" y="{ly}" font-weight="bold">Cluster</text>"#
    )
    .unwrap();
    for cluster in &clusters {
        ly += 18.0;
        writeln!(
            svg,
            r#"<rect x="{lx}" y="{:.1}" width="10" height="10" fill="{}"/><text x="{}" y="{ly}">{cluster}</text>"#,
            ly - 9.0,
            color_of(*cluster),
            lx + 16.0
        )
        .unwrap();
    }
    ly += 28.0;
    writeln!(
        svg,
        r#"<text x="{lx}" y="{ly}" font-weight="bold">Corpus</text>"#
    )
    .unwrap();
    for corpus in &corpora {
        ly += 18.0;
        let icon = shape_of(corpus).svg(lx + 5.0, ly - 4.0, "#444444", "", None);
        writeln!(
            svg,
            r#"{icon}<text x="{}" y="{ly}">{}</text>"#,
            lx + 16.0,
            escape(corpus)
        )
        .unwrap();
    }
    writeln!(svg, "</g>").unwrap();
    writeln!(svg, "</svg>").unwrap();

    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    writer
        .write_record(["id", "x", "y", "cluster", "corpus"])
        .expect("in-memory write");
    for (id, [x, y], cluster, corpus) in &points {
        writer
            .write_record([
                id.as_str(),
                &format!("{x:.6}"),
                &format!("{y:.6}"),
                &cluster.to_string(),
                corpus,
            ])
            .expect("in-memory write");
    }
    let csv = String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("UTF-8");
    Ok(Scatter { svg, csv })
}
