//! CSV persistence and SVG plots of sweep results.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use super::ResultRow;
use crate::error::{Error, Result};
use crate::protocol::GammaSearchResult;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 130.0;
const MARGIN_Y: f64 = 40.0;

const HEADER: [&str; 11] = [
    "swept",
    "stc_minp",
    "pk_minp",
    "aais_minp",
    "stc_minp_se",
    "angle_err",
    "coeff_err",
    "chan_err",
    "gamma_star",
    "trials",
    "degraded",
];

fn csv_error(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn io_error(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes rows under the fixed header; an empty slice gives a header-only file.
pub fn write_results(rows: &[ResultRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(io_error(path))?;
    write_results_to(rows, file).map_err(csv_error(path))
}

/// [`write_results`] into any writer.
pub fn write_results_to<W: std::io::Write>(rows: &[ResultRow], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(HEADER)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results(path: impl AsRef<Path>) -> Result<Vec<ResultRow>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(csv_error(path))?;
    r.deserialize().collect::<std::result::Result<_, _>>().map_err(csv_error(path))
}

/// Writes `gamma,avg_min_power,std_error` for every grid point.
pub fn write_gamma_search(result: &GammaSearchResult, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(io_error(path))?;
    write_gamma_search_to(result, file).map_err(csv_error(path))
}

/// [`write_gamma_search`] into any writer.
pub fn write_gamma_search_to<W: std::io::Write>(result: &GammaSearchResult, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["gamma", "avg_min_power", "std_error"])?;
    for ((g, m), se) in result.grid.iter().zip(&result.objective).zip(&result.std_error) {
        w.serialize((g, m, se))?;
    }
    w.flush()?;
    Ok(())
}

/// Axis text of a plot.
#[derive(Debug, Clone)]
pub struct PlotAxes {
    pub title: String,
    pub x_label: String,
}

struct Series {
    id: &'static str,
    label: &'static str,
    color: &'static str,
    points: Vec<(f64, f64)>,
}

/// Renders `min_k P_k` of every method against the swept value as a
/// standalone SVG with one polyline per method. The power axis is
/// logarithmic whenever every value is positive.
pub fn emit_plot(rows: &[ResultRow], axes: &PlotAxes, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let svg = render_svg(rows, axes);
    let mut f = std::fs::File::create(path).map_err(io_error(path))?;
    f.write_all(svg.as_bytes()).map_err(io_error(path))
}

fn render_svg(rows: &[ResultRow], axes: &PlotAxes) -> String {
    let series = [
        ("stc", "STC", "#1f77b4", rows.iter().map(|r| (r.swept, r.stc_minp)).collect::<Vec<_>>()),
        ("pk", "PK", "#2ca02c", rows.iter().map(|r| (r.swept, r.pk_minp)).collect()),
        ("aais", "AA-IS", "#d62728", rows.iter().map(|r| (r.swept, r.aais_minp)).collect()),
    ]
    .map(|(id, label, color, points)| Series {
        id,
        label,
        color,
        points: points.into_iter().filter(|(x, y)| x.is_finite() && y.is_finite()).collect(),
    });

    let all: Vec<(f64, f64)> = series.iter().flat_map(|s| s.points.iter().copied()).collect();
    let log_y = !all.is_empty() && all.iter().all(|&(_, y)| y > 0.0);
    let ty = |y: f64| if log_y { y.log10() } else { y };
    let (x0, x1) = padded_range(all.iter().map(|p| p.0));
    let (y0, y1) = padded_range(all.iter().map(|p| ty(p.1)));
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - 2.0 * MARGIN_Y;
    let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| HEIGHT - MARGIN_Y - (ty(y) - y0) / (y1 - y0) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        escape(&axes.title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_Y}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 8.0,
        escape(&axes.x_label)
    );
    let y_label = if log_y {
        "average min power [W·blocks, log]"
    } else {
        "average min power [W·blocks]"
    };
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" transform="rotate(-90 16 {})" text-anchor="middle" font-family="sans-serif" font-size="12">{y_label}</text>"#,
        MARGIN_Y + plot_h / 2.0,
        MARGIN_Y + plot_h / 2.0,
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let xv = x0 + f * (x1 - x0);
        let yv = y0 + f * (y1 - y0);
        let label = if log_y { format!("1e{yv:.1}") } else { format!("{yv:.3e}") };
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="10">{xv:.3}</text>"#,
            sx(xv),
            HEIGHT - MARGIN_Y + 14.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="10">{label}</text>"#,
            MARGIN_LEFT - 4.0,
            HEIGHT - MARGIN_Y - f * plot_h + 3.0
        );
    }
    for (i, series) in series.iter().enumerate() {
        let pts: Vec<String> = series
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline id="{}" fill="none" stroke="{}" stroke-width="2" points="{}"/>"#,
            series.id,
            series.color,
            pts.join(" ")
        );
        let ly = MARGIN_Y + 16.0 + 18.0 * i as f64;
        let lx = WIDTH - MARGIN_RIGHT + 10.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}" stroke-width="2"/>"#,
            lx + 20.0,
            series.color
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            series.label
        );
    }
    s.push_str("</svg>\n");
    s
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= f64::EPSILON * lo.abs().max(1.0) {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
