//! CSV and SVG emission for sweep results.
//!
//! Numbers are printed with 12 significant digits in a `%g`-like style, so
//! identical results always produce identical bytes.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::experiments::{AxisKind, Observable, Record, SweepResult};
use crate::Error;

/// Formats `x` with 12 significant digits, fixed notation for exponents in
/// `-5..12`, scientific otherwise, trailing zeros trimmed.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn csv_header(observable: Observable) -> &'static str {
    match observable {
        Observable::QfiField | Observable::QfiTemp => "graph,J,h,T,classical,quantum,total",
        Observable::BoltzmannRate => "graph,J,h,T,p0,dp0_dT",
        Observable::Spectrum => "graph,J,h,index,eigenvalue",
        Observable::Deformation => "graph,J,h,n,D_n,g,excited_gap_shift,pert_pure,pert_mixed",
    }
}

fn push_row(out: &mut String, cells: &[String]) {
    out.push_str(&cells.join(","));
    out.push('\n');
}

/// CSV text (header plus rows) for records of a single observable.
pub fn csv_text(observable: Observable, records: &[&Record]) -> Result<String, Error> {
    let mut out = String::new();
    out.push_str(csv_header(observable));
    out.push('\n');
    for r in records {
        if r.observable != observable {
            return Err(Error::InvalidArgument(format!(
                "mixed observables: {} in a {} table",
                r.observable.as_str(),
                observable.as_str()
            )));
        }
        let head = [r.graph.clone(), format_number(r.coupling), format_number(r.field)];
        match observable {
            Observable::Spectrum => {
                for (i, e) in r.values.iter().enumerate() {
                    let mut cells = head.to_vec();
                    cells.push(i.to_string());
                    cells.push(format_number(*e));
                    push_row(&mut out, &cells);
                }
            }
            Observable::Deformation => {
                let mut cells = head.to_vec();
                cells.push(format!("{}", r.values[0] as usize));
                cells.push(format_number(r.values[1]));
                cells.push(format!("{}", r.values[2] as usize));
                cells.extend(r.values[3..].iter().map(|v| format_number(*v)));
                push_row(&mut out, &cells);
            }
            _ => {
                let mut cells = head.to_vec();
                cells.push(format_number(r.temperature));
                cells.extend(r.values.iter().map(|v| format_number(*v)));
                push_row(&mut out, &cells);
            }
        }
    }
    Ok(out)
}

pub fn write_csv<W: Write>(mut w: W, observable: Observable, records: &[&Record]) -> Result<(), Error> {
    let text = csv_text(observable, records)?;
    w.write_all(text.as_bytes())
        .map_err(|e| Error::io(Path::new("<stream>"), e))
}

/// `<observable>_J<J>_<fixed>.csv`, e.g. `qfi_field_J1_T0.04.csv`.
pub fn output_stem(observable: Observable, coupling: f64, axis: AxisKind, fixed: f64) -> String {
    let fixed_symbol = match axis {
        AxisKind::Field => "T",
        AxisKind::Temperature => "h",
    };
    format!(
        "{}_J{}_{}{}",
        observable.as_str(),
        format_number(coupling),
        fixed_symbol,
        format_number(fixed)
    )
}

/// Records grouped by observable then coupling, in config order.
pub fn groups(result: &SweepResult) -> Vec<(Observable, f64, Vec<&Record>)> {
    let mut out = Vec::new();
    for &obs in &result.config.observables.list {
        for &j in &result.config.parameters.couplings {
            let rows: Vec<&Record> = result
                .records
                .iter()
                .filter(|r| r.observable == obs && r.coupling == j)
                .collect();
            out.push((obs, j, rows));
        }
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<(), Error> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes one CSV per (observable, J) into `dir` and returns the paths.
pub fn emit_csv(result: &SweepResult, dir: &Path) -> Result<Vec<PathBuf>, Error> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::new();
    for (obs, j, rows) in groups(result) {
        let stem = output_stem(obs, j, result.axis(), result.config.fixed_value());
        let path = dir.join(format!("{stem}.csv"));
        write_file(&path, &csv_text(obs, &rows)?)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Writes the config echo, code version and timestamp next to the CSVs.
pub fn emit_metadata(result: &SweepResult, dir: &Path) -> Result<PathBuf, Error> {
    let path = dir.join("metadata.toml");
    let text = format!(
        "version = \"{}\"\ntimestamp = {}\nrecords = {}\n\n{}",
        result.metadata.version,
        result.metadata.timestamp,
        result.records.len(),
        result.config.to_toml()
    );
    write_file(&path, &text)?;
    Ok(path)
}

/// Legend colors for the catalog graphs; anything else cycles through grays.
pub fn graph_color(name: &str) -> &'static str {
    match name {
        "P4" => "#e41a1c",
        "C4" => "#2ca02c",
        "PAN" => "#1f3fd1",
        "Sd4" => "#d62ad6",
        "K4" => "#17becf",
        "S3" => "#ff7f0e",
        _ => {
            const OTHERS: [&str; 4] = ["#000000", "#555555", "#8c564b", "#999999"];
            OTHERS[name.bytes().map(usize::from).sum::<usize>() % OTHERS.len()]
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvgOptions {
    pub width: u32,
    pub height: u32,
}

impl Default for SvgOptions {
    fn default() -> Self {
        SvgOptions {
            width: 800,
            height: 600,
        }
    }
}

/// Tick positions at 1/2/5 × 10^k spacing covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

struct Series<'a> {
    graph: &'a str,
    points: Vec<(f64, f64)>,
}

/// Renders records of one observable and one coupling as a line chart: one
/// polyline per graph (one per level for spectra), linear axes, legend.
pub fn render_svg(records: &[&Record], axis: AxisKind, opts: &SvgOptions) -> Result<String, Error> {
    let first = records
        .first()
        .ok_or_else(|| Error::InvalidArgument("cannot plot an empty result".into()))?;
    let observable = first.observable;
    if records.iter().any(|r| r.observable != observable) {
        return Err(Error::InvalidArgument("cannot plot mixed observables in one chart".into()));
    }
    if records.iter().any(|r| r.coupling != first.coupling) {
        return Err(Error::InvalidArgument("cannot plot mixed couplings in one chart".into()));
    }

    let mut graphs: Vec<&str> = Vec::new();
    for r in records {
        if !graphs.contains(&r.graph.as_str()) {
            graphs.push(&r.graph);
        }
    }
    let mut series = Vec::new();
    for g in &graphs {
        let rows: Vec<&&Record> = records.iter().filter(|r| r.graph == *g).collect();
        if observable == Observable::Spectrum {
            let levels = rows[0].values.len();
            for level in 0..levels {
                series.push(Series {
                    graph: g,
                    points: rows.iter().map(|r| (r.axis_value, r.values[level])).collect(),
                });
            }
        } else {
            series.push(Series {
                graph: g,
                points: rows
                    .iter()
                    .map(|r| {
                        let y = match observable {
                            Observable::BoltzmannRate => r.values[1],
                            _ => observable.peak_value(&r.values).unwrap_or(f64::NAN),
                        };
                        (r.axis_value, y)
                    })
                    .collect(),
            });
        }
    }

    let all = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        if x.is_finite() && y.is_finite() {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
    }
    if !x0.is_finite() {
        return Err(Error::InvalidArgument("no finite points to plot".into()));
    }
    if x1 == x0 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 == y0 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;

    let (w, h) = (f64::from(opts.width), f64::from(opts.height));
    let (left, right, top, bottom) = (80.0, 150.0, 30.0, 60.0);
    let pw = w - left - right;
    let ph = h - top - bottom;
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        opts.width, opts.height, opts.width, opts.height
    );
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{left:.2}" y="{top:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#
    );
    for t in ticks(x0, x1) {
        let x = sx(t);
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" font-size="12" text-anchor="middle">{}</text>"#,
            top + ph,
            top + ph + 5.0,
            top + ph + 20.0,
            format_number((t * 1e9).round() / 1e9)
        );
    }
    for t in ticks(y0, y1) {
        let y = sy(t);
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{left:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" font-size="12" text-anchor="end">{}</text>"#,
            left - 5.0,
            left - 8.0,
            y + 4.0,
            format_number((t * 1e9).round() / 1e9)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-size="14" text-anchor="middle">{}</text>"#,
        left + pw / 2.0,
        h - 15.0,
        axis.symbol()
    );
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{:.2}" font-size="14" text-anchor="middle" transform="rotate(-90 20 {:.2})">{} (J={})</text>"#,
        top + ph / 2.0,
        top + ph / 2.0,
        observable.label(),
        format_number(first.coupling)
    );

    for s in &series {
        let color = graph_color(s.graph);
        let pts: Vec<(f64, f64)> = s
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| (sx(x), sy(y)))
            .collect();
        if pts.len() == 1 {
            let (x, y) = pts[0];
            let _ = writeln!(svg, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{color}"/>"#);
        } else if !pts.is_empty() {
            let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                coords.join(" ")
            );
        }
    }

    for (i, g) in graphs.iter().enumerate() {
        let y = top + 20.0 + 20.0 * i as f64;
        let x = left + pw + 15.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{}" stroke-width="2"/><text x="{:.2}" y="{:.2}" font-size="12">{}</text>"#,
            x + 25.0,
            graph_color(g),
            x + 32.0,
            y + 4.0,
            escape(g)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// One SVG per (observable, J) next to the CSVs. Spectra and scalar curves
/// both work.
pub fn emit_svg(result: &SweepResult, dir: &Path, opts: &SvgOptions) -> Result<Vec<PathBuf>, Error> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::new();
    for (obs, j, rows) in groups(result) {
        let stem = output_stem(obs, j, result.axis(), result.config.fixed_value());
        let path = dir.join(format!("{stem}.svg"));
        write_file(&path, &render_svg(&rows, result.axis(), opts)?)?;
        paths.push(path);
    }
    Ok(paths)
}
