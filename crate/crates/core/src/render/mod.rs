//! SVG evolutionary dendrograms: continuous features as colored edges,
//! categorical features as pie charts of node posteriors.

mod colormap;

pub use colormap::{ColorScale, Colormap, PALETTE};

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evo::{AncestralStates, StatePosteriors};
use crate::tree::{format_sig, Dendrogram, UltrametricTree, EDGE_EPS};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// Root on the left, leaves stacked vertically on the right.
    #[default]
    Horizontal,
    /// Root at the top, leaves along the bottom.
    Vertical,
}

impl std::str::FromStr for Orientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "horizontal" => Ok(Orientation::Horizontal),
            "vertical" => Ok(Orientation::Vertical),
            _ => Err(Error::InvalidInput(format!("unknown orientation '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderSpec {
    pub width: f64,
    pub height: f64,
    pub colormap: Colormap,
    pub orientation: Orientation,
    pub samples_per_edge: usize,
    pub legend: bool,
    pub label_font_size: f64,
}

impl Default for RenderSpec {
    fn default() -> Self {
        RenderSpec {
            width: 800.0,
            height: 600.0,
            colormap: Colormap::Viridis,
            orientation: Orientation::Horizontal,
            samples_per_edge: 16,
            legend: true,
            label_font_size: 10.0,
        }
    }
}

impl RenderSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0 && self.height > 0.0 && self.label_font_size > 0.0) {
            return Err(Error::InvalidInput("render dimensions must be positive".into()));
        }
        if self.samples_per_edge < 2 {
            return Err(Error::InvalidInput("samples_per_edge must be at least 2".into()));
        }
        Ok(())
    }
}

/// Output file name `<dataset>_<feature>_<method>.svg`, with characters
/// outside `[A-Za-z0-9._-]` replaced by `_`.
pub fn file_name(dataset: &str, feature: &str, method: &str) -> String {
    let clean = |s: &str| -> String {
        s.chars().map(|c| if c.is_ascii_alphanumeric() || "._-".contains(c) { c } else { '_' }).collect()
    };
    format!("{}_{}_{}.svg", clean(dataset), clean(feature), clean(method))
}

fn num(x: f64) -> String {
    let s = format!("{x:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

const MARGIN: f64 = 20.0;
const LEGEND_BAND: f64 = 60.0;

/// Node coordinates: leaves evenly spaced, depth measured from the root.
struct Layout {
    tree: UltrametricTree,
    spec: RenderSpec,
    /// Position of each node along the leaf axis, in leaf units.
    slot: Vec<f64>,
    n_leaves: usize,
    label_room: f64,
}

impl Layout {
    fn new(d: &Dendrogram, spec: &RenderSpec) -> Result<Self> {
        spec.validate()?;
        let tree = d.to_ultrametric(EDGE_EPS)?;
        let n = d.n_leaves();
        let mut slot = vec![0.0; d.n_nodes()];
        for (k, leaf) in d.leaf_order().into_iter().enumerate() {
            slot[leaf] = k as f64 + 0.5;
        }
        for u in n..d.n_nodes() {
            let (l, r) = d.children(u).expect("internal");
            slot[u] = 0.5 * (slot[l] + slot[r]);
        }
        let longest = d.leaf_labels().iter().map(|l| l.chars().count()).max().unwrap_or(0);
        let label_room = 0.6 * spec.label_font_size * longest as f64 + 14.0;
        Ok(Layout { tree, spec: spec.clone(), slot, n_leaves: n, label_room })
    }

    fn plot_box(&self) -> (f64, f64, f64, f64) {
        let bottom = self.spec.height - MARGIN - if self.spec.legend { LEGEND_BAND } else { 0.0 };
        match self.spec.orientation {
            Orientation::Horizontal => (MARGIN, MARGIN, self.spec.width - MARGIN - self.label_room, bottom),
            Orientation::Vertical => (MARGIN, MARGIN, self.spec.width - MARGIN, bottom - self.label_room),
        }
    }

    /// Pixel distance between neighbouring leaves.
    fn spacing(&self) -> f64 {
        let (x0, y0, x1, y1) = self.plot_box();
        let extent = match self.spec.orientation {
            Orientation::Horizontal => y1 - y0,
            Orientation::Vertical => x1 - x0,
        };
        extent / self.n_leaves as f64
    }

    /// Pixel coordinates for a depth (from the root) and a leaf-axis slot.
    fn point(&self, depth: f64, slot: f64) -> (f64, f64) {
        let (x0, y0, x1, y1) = self.plot_box();
        let h = self.tree.tree_height();
        let f = if h > 0.0 { depth / h } else { 0.0 };
        let s = slot / self.n_leaves as f64;
        match self.spec.orientation {
            Orientation::Horizontal => (x0 + f * (x1 - x0), y0 + s * (y1 - y0)),
            Orientation::Vertical => (x0 + s * (x1 - x0), y0 + f * (y1 - y0)),
        }
    }

    fn node(&self, u: usize) -> (f64, f64) {
        self.point(self.tree.depth(u), self.slot[u])
    }

    fn header(&self, out: &mut String) {
        let (w, h) = (num(self.spec.width), num(self.spec.height));
        writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
        writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
        )
        .unwrap();
        writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    }

    /// Connector at the parent's depth, joining the parent's slot to the child's.
    fn connector(&self, out: &mut String, u: usize, color: &str) {
        let p = self.tree.parent(u).expect("non-root");
        let (ax, ay) = self.point(self.tree.depth(p), self.slot[p]);
        let (bx, by) = self.point(self.tree.depth(p), self.slot[u]);
        writeln!(
            out,
            r#"<line class="connector" x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="2" stroke-linecap="square"/>"#,
            num(ax),
            num(ay),
            num(bx),
            num(by)
        )
        .unwrap();
    }

    fn leaf_labels(&self, out: &mut String, d: &Dendrogram) {
        writeln!(out, r#"<g class="leaf-labels" font-family="sans-serif" font-size="{}">"#, num(self.spec.label_font_size))
            .unwrap();
        for (i, label) in d.leaf_labels().iter().enumerate() {
            let (x, y) = self.node(i);
            let (tx, ty, extra) = match self.spec.orientation {
                Orientation::Horizontal => (x + 10.0, y + 0.35 * self.spec.label_font_size, String::new()),
                Orientation::Vertical => (x, y + 10.0, format!(r#" transform="rotate(90 {} {})""#, num(x), num(y + 10.0))),
            };
            writeln!(out, r#"<text x="{}" y="{}"{extra}>{}</text>"#, num(tx), num(ty), escape(label)).unwrap();
        }
        writeln!(out, "</g>").unwrap();
    }

    fn legend_origin(&self) -> (f64, f64) {
        (MARGIN, self.spec.height - MARGIN - LEGEND_BAND + 20.0)
    }
}

/// Evolutionary dendrogram of a continuous feature. Every edge is drawn as
/// one segment per ancestral-state sample, colored by its expected value.
pub fn render_continuous(d: &Dendrogram, asr: &AncestralStates, y: &[f64], spec: &RenderSpec) -> Result<String> {
    let n = d.n_leaves();
    if y.len() != n || asr.node_mean.len() != d.n_nodes() || asr.edge_samples.len() != d.n_nodes() {
        return Err(Error::InvalidInput("ancestral states do not match the dendrogram".into()));
    }
    let layout = Layout::new(d, spec)?;
    let scale = ColorScale::spanning(asr.node_mean.iter().chain(y).copied());
    let cmap = spec.colormap;
    let color = |v: f64| cmap.hex(scale.position(v));
    let mut out = String::new();
    layout.header(&mut out);

    writeln!(out, r#"<g class="edges" fill="none">"#).unwrap();
    for u in 0..d.n_nodes() {
        let Some(p) = layout.tree.parent(u) else { continue };
        layout.connector(&mut out, u, &color(asr.node_mean[p]));
        let samples = &asr.edge_samples[u];
        if samples.len() < 2 {
            return Err(Error::InvalidInput(format!("edge above node {u} has fewer than 2 samples")));
        }
        let (dp, du) = (layout.tree.depth(p), layout.tree.depth(u));
        let s = samples.len() as f64;
        writeln!(out, r#"<g class="edge" data-node="{u}">"#).unwrap();
        for (k, &(_, v)) in samples.iter().enumerate() {
            let (a, b) = (k as f64 / s, (k + 1) as f64 / s);
            let (x1, y1) = layout.point(dp + a * (du - dp), layout.slot[u]);
            let (x2, y2) = layout.point(dp + b * (du - dp), layout.slot[u]);
            writeln!(
                out,
                r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{}" stroke-width="4" data-pos="{}"/>"#,
                num(x1),
                num(y1),
                num(x2),
                num(y2),
                color(v),
                scale.position(v)
            )
            .unwrap();
        }
        writeln!(out, "</g>").unwrap();
    }
    writeln!(out, "</g>").unwrap();

    writeln!(out, r#"<g class="tips">"#).unwrap();
    for (i, &v) in y.iter().enumerate() {
        let (x, yy) = layout.node(i);
        writeln!(
            out,
            r#"<circle cx="{}" cy="{}" r="3" fill="{}" data-leaf="{i}" data-pos="{}"/>"#,
            num(x),
            num(yy),
            color(v),
            scale.position(v)
        )
        .unwrap();
    }
    writeln!(out, "</g>").unwrap();
    layout.leaf_labels(&mut out, d);

    if spec.legend {
        let (lx, ly) = layout.legend_origin();
        let bar = (spec.width - 2.0 * MARGIN).min(300.0);
        writeln!(out, r#"<defs><linearGradient id="scale" x1="0" y1="0" x2="1" y2="0">"#).unwrap();
        for k in 0..=16 {
            let t = k as f64 / 16.0;
            writeln!(out, r#"<stop offset="{}" stop-color="{}"/>"#, num(t), cmap.hex(t)).unwrap();
        }
        writeln!(out, "</linearGradient></defs>").unwrap();
        writeln!(out, r#"<g class="legend" font-family="sans-serif" font-size="{}">"#, num(spec.label_font_size)).unwrap();
        writeln!(out, r#"<rect x="{}" y="{}" width="{}" height="10" fill="url(#scale)"/>"#, num(lx), num(ly), num(bar))
            .unwrap();
        for k in 0..5 {
            let t = k as f64 / 4.0;
            let value = if scale.max > scale.min { scale.min + t * (scale.max - scale.min) } else { scale.min };
            let x = lx + t * bar;
            writeln!(
                out,
                r#"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="black"/><text class="tick" x="{0}" y="{3}" text-anchor="middle">{4}</text>"#,
                num(x),
                num(ly + 10.0),
                num(ly + 14.0),
                num(ly + 16.0 + spec.label_font_size),
                escape(&format_sig(value, 3))
            )
            .unwrap();
        }
        writeln!(out, "</g>").unwrap();
    }
    writeln!(out, "</svg>").unwrap();
    Ok(out)
}

/// Evolutionary dendrogram of a categorical feature: a pie of the state
/// posterior at every internal node, observed states as disks at the tips.
pub fn render_categorical(d: &Dendrogram, post: &StatePosteriors, labels: &[usize], spec: &RenderSpec) -> Result<String> {
    let k = post.states.len();
    if k > PALETTE.len() {
        return Err(Error::PaletteExhausted(k));
    }
    if labels.len() != d.n_leaves() || post.probs.len() != d.n_nodes() || labels.iter().any(|&l| l >= k) {
        return Err(Error::InvalidInput("posteriors do not match the dendrogram".into()));
    }
    let layout = Layout::new(d, spec)?;
    let radius = (0.45 * layout.spacing()).clamp(2.0, 10.0);
    let mut out = String::new();
    layout.header(&mut out);

    writeln!(out, r#"<g class="edges" fill="none">"#).unwrap();
    for u in 0..d.n_nodes() {
        if layout.tree.parent(u).is_none() {
            continue;
        }
        layout.connector(&mut out, u, "#555555");
        let p = layout.tree.parent(u).unwrap();
        let (x1, y1) = layout.point(layout.tree.depth(p), layout.slot[u]);
        let (x2, y2) = layout.node(u);
        writeln!(
            out,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#555555\" stroke-width=\"2\"/>",
            num(x1),
            num(y1),
            num(x2),
            num(y2)
        )
        .unwrap();
    }
    writeln!(out, "</g>").unwrap();

    writeln!(out, r#"<g class="pies" stroke="white" stroke-width="0.5">"#).unwrap();
    for u in d.n_leaves()..d.n_nodes() {
        let (cx, cy) = layout.node(u);
        pie(&mut out, u, cx, cy, radius, &post.probs[u]);
    }
    writeln!(out, "</g>").unwrap();

    writeln!(out, r#"<g class="tips">"#).unwrap();
    for (i, &l) in labels.iter().enumerate() {
        let (x, y) = layout.node(i);
        writeln!(
            out,
            r#"<circle cx="{}" cy="{}" r="{}" fill="{}" data-leaf="{i}" data-state="{l}"/>"#,
            num(x),
            num(y),
            num(0.6 * radius),
            PALETTE[l]
        )
        .unwrap();
    }
    writeln!(out, "</g>").unwrap();
    layout.leaf_labels(&mut out, d);

    if spec.legend {
        let (lx, ly) = layout.legend_origin();
        writeln!(out, r#"<g class="legend" font-family="sans-serif" font-size="{}">"#, num(spec.label_font_size)).unwrap();
        let step = ((spec.width - 2.0 * MARGIN) / k.max(1) as f64).min(120.0);
        for (s, name) in post.states.iter().enumerate() {
            let x = lx + s as f64 * step;
            writeln!(
                out,
                r#"<rect x="{}" y="{}" width="10" height="10" fill="{}"/><text x="{}" y="{}">{}</text>"#,
                num(x),
                num(ly),
                PALETTE[s],
                num(x + 14.0),
                num(ly + 9.0),
                escape(name)
            )
            .unwrap();
        }
        writeln!(out, "</g>").unwrap();
    }
    writeln!(out, "</svg>").unwrap();
    Ok(out)
}

/// Slices carry their start angle and sweep in degrees, clockwise from
/// twelve o'clock. A certain state is drawn as a full disk.
fn pie(out: &mut String, node: usize, cx: f64, cy: f64, r: f64, probs: &[f64]) {
    writeln!(out, r#"<g class="pie" data-node="{node}">"#).unwrap();
    let total: f64 = probs.iter().sum();
    if let Some(s) = probs.iter().position(|&p| p >= total * (1.0 - 1e-12)) {
        writeln!(
            out,
            r#"<circle cx="{}" cy="{}" r="{}" fill="{}" data-state="{s}" data-start="0" data-sweep="360"/>"#,
            num(cx),
            num(cy),
            num(r),
            PALETTE[s]
        )
        .unwrap();
        writeln!(out, "</g>").unwrap();
        return;
    }
    let at = |deg: f64| {
        let a = deg.to_radians();
        (cx + r * a.sin(), cy - r * a.cos())
    };
    let mut start = 0.0;
    for (s, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        let sweep = 360.0 * p / total;
        let (x0, y0) = at(start);
        let (x1, y1) = at(start + sweep);
        let large = u8::from(sweep > 180.0);
        writeln!(
            out,
            r#"<path d="M {} {} L {} {} A {} {} 0 {large} 1 {} {} Z" fill="{}" data-state="{s}" data-start="{start}" data-sweep="{sweep}"/>"#,
            num(cx),
            num(cy),
            num(x0),
            num(y0),
            num(r),
            num(r),
            num(x1),
            num(y1),
            PALETTE[s]
        )
        .unwrap();
        start += sweep;
    }
    writeln!(out, "</g>").unwrap();
}

/// Horizontal bar chart of feature importances; missing values are marked NA.
pub fn render_importance(names: &[String], scores: &[Option<f64>], spec: &RenderSpec) -> Result<String> {
    spec.validate()?;
    if names.len() != scores.len() || names.is_empty() {
        return Err(Error::InvalidInput("one score per feature is required".into()));
    }
    let fs = spec.label_font_size;
    let longest = names.iter().map(|l| l.chars().count()).max().unwrap_or(0);
    let left = MARGIN + 0.6 * fs * longest as f64 + 8.0;
    let right = spec.width - MARGIN - 50.0;
    let lo = scores.iter().flatten().fold(0.0f64, |a, &b| a.min(b));
    let hi = scores.iter().flatten().fold(0.0f64, |a, &b| a.max(b)).max(lo + 1e-12);
    let x_of = |v: f64| left + (v - lo) / (hi - lo) * (right - left);
    let row = (spec.height - 2.0 * MARGIN) / names.len() as f64;

    let mut out = String::new();
    let (w, h) = (num(spec.width), num(spec.height));
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#)
        .unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(out, r#"<g class="bars" font-family="sans-serif" font-size="{}">"#, num(fs)).unwrap();
    for (i, (name, score)) in names.iter().zip(scores).enumerate() {
        let y = MARGIN + i as f64 * row;
        let ty = num(y + 0.5 * row + 0.35 * fs);
        writeln!(out, r#"<text x="{}" y="{ty}" text-anchor="end">{}</text>"#, num(left - 6.0), escape(name)).unwrap();
        match score {
            Some(v) => {
                let (a, b) = (x_of(0.0).min(x_of(*v)), x_of(0.0).max(x_of(*v)));
                writeln!(
                    out,
                    "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#1f78b4\"/><text x=\"{}\" y=\"{ty}\">{}</text>",
                    num(a),
                    num(y + 0.15 * row),
                    num(b - a),
                    num(0.7 * row),
                    num(b + 4.0),
                    escape(&format_sig(*v, 3))
                )
                .unwrap();
            }
            None => writeln!(out, r#"<text x="{}" y="{ty}">NA</text>"#, num(x_of(0.0) + 4.0)).unwrap(),
        }
    }
    let x0 = num(x_of(0.0));
    writeln!(out, r#"<line x1="{x0}" y1="{}" x2="{x0}" y2="{}" stroke="black"/>"#, num(MARGIN), num(spec.height - MARGIN))
        .unwrap();
    writeln!(out, "</g>").unwrap();
    writeln!(out, "</svg>").unwrap();
    Ok(out)
}
