//! SVG figures: density overlays, leaf silhouettes and dendrograms.
//!
//! Every figure draws its data inside a `<g class="data">` whose `transform`
//! maps data units to pixels, so coordinates in the emitted paths are the
//! data values themselves (shortest round-trip decimal). Output depends only
//! on the inputs.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::Path;

use crate::ccd::{CcdSequence, LeafOutline, StepDensity};
use crate::error::Result;
use crate::hcluster::Dendrogram;
use crate::io::write_text;

const COLORS: [&str; 8] = [
    "#1f5fbf", "#2ca02c", "#d62728", "#e0a800", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];
const DASHES: [&str; 4] = ["", "6 3", "8 3 2 3", "2 3"];

/// Stroke style of one group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Style {
    pub color: &'static str,
    pub dash: &'static str,
}

/// Assigns styles to group names in order of first appearance.
#[derive(Debug, Default)]
struct Palette {
    order: Vec<String>,
    index: HashMap<String, usize>,
}

impl Palette {
    fn style(&mut self, key: &str) -> Style {
        let next = self.order.len();
        let i = *self.index.entry(key.to_string()).or_insert_with(|| {
            self.order.push(key.to_string());
            next
        });
        style_at(i)
    }
}

fn style_at(i: usize) -> Style {
    Style {
        color: COLORS[i % COLORS.len()],
        dash: DASHES[(i / COLORS.len() + i) % DASHES.len()],
    }
}

/// One step curve for [`render_step_plot`].
#[derive(Debug, Clone, Copy)]
pub struct StepSeries<'a> {
    pub label: &'a str,
    /// Series sharing a group share a style; ungrouped series are styled by label.
    pub group: Option<&'a str>,
    pub breakpoints: &'a [f64],
    pub heights: &'a [f64],
}

pub(crate) fn escape(s: &str) -> String {
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

/// Rounded tick step giving roughly `target` intervals over `[0, max]`.
fn tick_step(max: f64, target: f64) -> f64 {
    let raw = max / target;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn tick_label(v: f64, step: f64) -> String {
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    format!("{v:.decimals$}")
}

/// Pixel frame of a plotting area with a linear data mapping.
#[derive(Clone)]
struct Frame {
    left: f64,
    top: f64,
    width: f64,
    height: f64,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn sx(&self) -> f64 {
        self.width / (self.x1 - self.x0)
    }

    fn sy(&self) -> f64 {
        self.height / (self.y1 - self.y0)
    }

    fn px(&self, x: f64) -> f64 {
        self.left + (x - self.x0) * self.sx()
    }

    fn py(&self, y: f64) -> f64 {
        self.top + self.height - (y - self.y0) * self.sy()
    }

    /// SVG transform taking data coordinates to pixels.
    fn transform(&self) -> String {
        let (sx, sy) = (self.sx(), self.sy());
        format!(
            "matrix({} 0 0 {} {} {})",
            sx,
            -sy,
            self.left - self.x0 * sx,
            self.top + self.height + self.y0 * sy
        )
    }

    fn clip_rect(&self, id: &str) -> String {
        format!(
            "<clipPath id=\"{id}\"><rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\"/></clipPath>\n",
            self.left, self.top, self.width, self.height
        )
    }

    fn axes(&self, out: &mut String) {
        let _ = writeln!(
            out,
            "<rect class=\"frame\" x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"#444\"/>",
            self.left, self.top, self.width, self.height
        );
    }

    fn y_ticks(&self, out: &mut String) {
        let step = tick_step(self.y1 - self.y0, 5.0);
        let mut k = (self.y0 / step).ceil() as i64;
        loop {
            let v = k as f64 * step;
            if v > self.y1 + 1e-12 * step {
                break;
            }
            let y = self.py(v);
            let _ = writeln!(
                out,
                "<line class=\"tick\" x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#444\"/>",
                self.left - 5.0,
                self.left
            );
            let _ = writeln!(
                out,
                "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\">{}</text>",
                self.left - 8.0,
                y + 4.0,
                tick_label(v, step)
            );
            k += 1;
        }
    }
}

fn header(out: &mut String, width: f64, height: f64, title: &str) {
    let _ = writeln!(out, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\">"
    );
    let _ = writeln!(out, "<title>{}</title>", escape(title));
    let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"22\" font-size=\"15\" text-anchor=\"middle\">{}</text>",
        width / 2.0,
        escape(title)
    );
}

fn dash_attr(dash: &str) -> String {
    if dash.is_empty() {
        String::new()
    } else {
        format!(" stroke-dasharray=\"{dash}\"")
    }
}

/// Overlaid step curves over `(0, 2π]`.
pub fn render_step_plot(series: &[StepSeries<'_>], title: &str, y_label: &str) -> String {
    const W: f64 = 720.0;
    const H: f64 = 440.0;
    let ymax = series
        .iter()
        .flat_map(|s| s.heights.iter().copied())
        .fold(0.0, f64::max);
    let ymax = if ymax > 0.0 { ymax * 1.05 } else { 1.0 };
    let frame = Frame {
        left: 70.0,
        top: 40.0,
        width: W - 70.0 - 150.0,
        height: H - 40.0 - 60.0,
        x0: 0.0,
        x1: TAU,
        y0: 0.0,
        y1: ymax,
    };

    let mut out = String::new();
    header(&mut out, W, H, title);
    out.push_str("<defs>\n");
    out.push_str(&frame.clip_rect("plot-area"));
    out.push_str("</defs>\n");
    frame.axes(&mut out);
    frame.y_ticks(&mut out);
    let x_ticks = [(0.0, "0"), (0.25, "π/2"), (0.5, "π"), (0.75, "3π/2"), (1.0, "2π")];
    for (frac, label) in x_ticks {
        let x = frame.px(frac * TAU);
        let y = frame.top + frame.height;
        let _ = writeln!(
            out,
            "<line class=\"tick\" x1=\"{x:.2}\" y1=\"{y:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#444\"/>",
            y + 5.0
        );
        let _ = writeln!(
            out,
            "<text x=\"{x:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"middle\">{label}</text>",
            y + 18.0
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">angle (radians)</text>",
        frame.left + frame.width / 2.0,
        H - 15.0
    );
    let _ = writeln!(
        out,
        "<text x=\"18\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.2})\">{}</text>",
        frame.top + frame.height / 2.0,
        frame.top + frame.height / 2.0,
        escape(y_label)
    );

    let mut palette = Palette::default();
    let _ = writeln!(
        out,
        "<g clip-path=\"url(#plot-area)\"><g class=\"data\" transform=\"{}\" fill=\"none\" stroke-width=\"1.2\">",
        frame.transform()
    );
    for s in series {
        let style = palette.style(s.group.unwrap_or(s.label));
        let mut points = String::new();
        for (w, h) in s.breakpoints.windows(2).zip(s.heights) {
            let _ = write!(points, "{},{} {},{} ", w[0], h, w[1], h);
        }
        let _ = writeln!(
            out,
            "<polyline data-id=\"{}\" points=\"{}\" stroke=\"{}\"{} vector-effect=\"non-scaling-stroke\"/>",
            escape(s.label),
            points.trim_end(),
            style.color,
            dash_attr(style.dash)
        );
    }
    out.push_str("</g></g>\n");

    out.push_str("<g class=\"legend\" font-size=\"11\">\n");
    let lx = frame.left + frame.width + 15.0;
    for (i, key) in palette.order.iter().enumerate() {
        let style = style_at(i);
        let y = frame.top + 10.0 + 18.0 * i as f64;
        let _ = writeln!(
            out,
            "<line x1=\"{lx:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"{}\" stroke-width=\"2\"{}/>",
            lx + 28.0,
            style.color,
            dash_attr(style.dash)
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\">{}</text>",
            lx + 34.0,
            y + 4.0,
            escape(key)
        );
    }
    out.push_str("</g>\n</svg>\n");
    out
}

/// Density overlay; `groups` runs parallel to `densities` (may be empty).
pub fn render_densities(densities: &[StepDensity], groups: &[Option<String>], title: &str) -> String {
    let series: Vec<StepSeries<'_>> = densities
        .iter()
        .enumerate()
        .map(|(i, d)| StepSeries {
            label: d.source(),
            group: groups.get(i).and_then(|g| g.as_deref()),
            breakpoints: d.breakpoints(),
            heights: d.heights(),
        })
        .collect();
    render_step_plot(&series, title, "density")
}

pub fn plot_densities(
    densities: &[StepDensity],
    groups: &[Option<String>],
    title: &str,
    path: impl AsRef<Path>,
) -> Result<()> {
    write_text(path, &render_densities(densities, groups, title))
}

/// Raw traces as step curves on their uniform grids, without normalization.
pub fn render_raw_traces(sequences: &[CcdSequence], groups: &[Option<String>], title: &str) -> String {
    let grids: Vec<Vec<f64>> = sequences
        .iter()
        .map(|s| (0..=s.len()).map(|j| s.grid_angle(j)).collect())
        .collect();
    let series: Vec<StepSeries<'_>> = sequences
        .iter()
        .zip(&grids)
        .enumerate()
        .map(|(i, (s, grid))| StepSeries {
            label: s.id(),
            group: groups.get(i).and_then(|g| g.as_deref()),
            breakpoints: grid,
            heights: s.values(),
        })
        .collect();
    render_step_plot(&series, title, "contour distance")
}

/// Grid of closed silhouettes, one equal-aspect cell per outline.
///
/// `columns = 0` picks a near-square grid.
pub fn render_leaves(outlines: &[LeafOutline], columns: usize, title: &str) -> String {
    const CELL: f64 = 180.0;
    const PAD: f64 = 14.0;
    let n = outlines.len().max(1);
    let cols = if columns == 0 {
        (n as f64).sqrt().ceil() as usize
    } else {
        columns.min(n)
    };
    let rows = n.div_ceil(cols);
    let width = cols as f64 * CELL;
    let height = rows as f64 * CELL + 36.0;

    let mut out = String::new();
    header(&mut out, width, height, title);
    for (i, outline) in outlines.iter().enumerate() {
        let (row, col) = (i / cols, i % cols);
        let x = col as f64 * CELL;
        let y = 36.0 + row as f64 * CELL;
        let extent = outline
            .points
            .iter()
            .map(|&(u, v)| u.abs().max(v.abs()))
            .fold(0.0, f64::max);
        let extent = if extent > 0.0 { extent * 1.05 } else { 1.0 };
        let side = CELL - 2.0 * PAD - 14.0;
        let frame = Frame {
            left: x + PAD,
            top: y + PAD + 14.0,
            width: side,
            height: side,
            x0: -extent,
            x1: extent,
            y0: -extent,
            y1: extent,
        };
        let _ = writeln!(out, "<g class=\"cell\" data-id=\"{}\">", escape(&outline.id));
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">{}</text>",
            x + CELL / 2.0,
            y + PAD + 6.0,
            escape(&outline.id)
        );
        let _ = writeln!(
            out,
            "<line x1=\"{:.2}\" y1=\"{cy:.2}\" x2=\"{:.2}\" y2=\"{cy:.2}\" stroke=\"#ccc\"/>",
            frame.left,
            frame.left + side,
            cy = frame.py(0.0)
        );
        let _ = writeln!(
            out,
            "<line x1=\"{cx:.2}\" y1=\"{:.2}\" x2=\"{cx:.2}\" y2=\"{:.2}\" stroke=\"#ccc\"/>",
            frame.top,
            frame.top + side,
            cx = frame.px(0.0)
        );
        let mut points = String::new();
        for &(u, v) in &outline.points {
            let _ = write!(points, "{u},{v} ");
        }
        let _ = writeln!(
            out,
            "<g class=\"data\" transform=\"{}\"><polygon points=\"{}\" fill=\"#7fb77e\" fill-opacity=\"0.5\" stroke=\"#2f6b2e\" stroke-width=\"1\" vector-effect=\"non-scaling-stroke\"/></g>",
            frame.transform(),
            points.trim_end()
        );
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}

pub fn plot_leaves(
    outlines: &[LeafOutline],
    columns: usize,
    title: &str,
    path: impl AsRef<Path>,
) -> Result<()> {
    write_text(path, &render_leaves(outlines, columns, title))
}

/// Rectangular dendrogram.
///
/// Leaves sit at x = 0, 1, … in [`Dendrogram::leaf_order`]; each internal
/// node is drawn as two stems and a `<line class="bar">` whose `y1`/`y2`
/// equal the merge height.
pub fn render_dendrogram(dend: &Dendrogram, title: &str) -> String {
    let m = dend.leaves();
    let order = dend.leaf_order();
    let label_space = 12.0
        + 7.0
            * dend
                .labels()
                .iter()
                .map(|l| l.chars().count())
                .max()
                .unwrap_or(1) as f64;
    let width = (60.0 + 40.0 * m as f64).max(360.0);
    let height = 340.0 + label_space;
    let top_h = dend.merges().iter().map(|mg| mg.height).fold(0.0, f64::max);
    let frame = Frame {
        left: 70.0,
        top: 40.0,
        width: width - 90.0,
        height: 300.0 - 40.0,
        x0: -0.5,
        x1: m as f64 - 0.5,
        y0: 0.0,
        y1: if top_h > 0.0 { top_h * 1.05 } else { 1.0 },
    };

    let mut xpos = vec![0.0; 2 * m - 1];
    for (slot, &leaf) in order.iter().enumerate() {
        xpos[leaf] = slot as f64;
    }
    for (step, mg) in dend.merges().iter().enumerate() {
        xpos[m + step] = 0.5 * (xpos[mg.left] + xpos[mg.right]);
    }

    let mut out = String::new();
    header(&mut out, width, height, title);
    let _ = writeln!(
        out,
        "<line class=\"axis\" x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#444\"/>",
        frame.top,
        frame.top + frame.height,
        x = frame.left - 10.0
    );
    let axis = Frame {
        left: frame.left - 10.0,
        ..frame.clone()
    };
    axis.y_ticks(&mut out);
    let _ = writeln!(
        out,
        "<text x=\"18\" y=\"{y:.2}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 18 {y:.2})\">height</text>",
        y = frame.top + frame.height / 2.0
    );

    let _ = writeln!(
        out,
        "<g class=\"data\" transform=\"{}\" stroke=\"#222\" stroke-width=\"1.5\" fill=\"none\">",
        frame.transform()
    );
    for (step, mg) in dend.merges().iter().enumerate() {
        let id = m + step;
        let h = mg.height;
        let (a, b) = dend.children(id).expect("internal node");
        for child in [a, b] {
            let _ = writeln!(
                out,
                "<line class=\"stem\" x1=\"{x}\" y1=\"{}\" x2=\"{x}\" y2=\"{h}\" vector-effect=\"non-scaling-stroke\"/>",
                dend.height(child),
                x = xpos[child]
            );
        }
        let _ = writeln!(
            out,
            "<line class=\"bar\" data-node=\"{id}\" x1=\"{}\" y1=\"{h}\" x2=\"{}\" y2=\"{h}\" vector-effect=\"non-scaling-stroke\"/>",
            xpos[a], xpos[b]
        );
    }
    out.push_str("</g>\n");

    out.push_str("<g class=\"labels\" font-size=\"11\">\n");
    for (slot, &leaf) in order.iter().enumerate() {
        let x = frame.px(slot as f64);
        let y = frame.top + frame.height + 8.0;
        let _ = writeln!(
            out,
            "<text x=\"{x:.2}\" y=\"{y:.2}\" text-anchor=\"end\" transform=\"rotate(-90 {x:.2} {y:.2})\" dy=\"4\">{}</text>",
            escape(&dend.labels()[leaf])
        );
    }
    out.push_str("</g>\n</svg>\n");
    out
}

pub fn plot_dendrogram(dend: &Dendrogram, title: &str, path: impl AsRef<Path>) -> Result<()> {
    write_text(path, &render_dendrogram(dend, title))
}
