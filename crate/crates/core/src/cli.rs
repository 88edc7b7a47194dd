//! Command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::deformation::DEFAULT_N_LEVELS;
use crate::experiments::{
    evaluate, run_sweep, AxisConfig, AxisKind, AxisScale, GraphSelection, NamedGraph, Observable,
    Parallelism, Record, SweepConfig, Tolerances,
};
use crate::graph::{graph_properties, CatalogName};
use crate::output::{csv_text, emit_csv, emit_metadata, emit_svg, format_number, SvgOptions};
use crate::qfi::DEFAULT_FD_DELTA;
use crate::spectral::DEFAULT_TOL_DEG;
use crate::Error;

#[derive(Debug, Parser)]
#[command(name = "graphsense", version, about = "Thermal QFI of transverse-field Ising sensors on small graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the catalog graphs with edge counts and ground degeneracies.
    Catalog,
    /// Eigenvalues of H, swept over h.
    Spectrum(PointArgs),
    /// Field QFI split into classical and quantum parts, swept over h.
    QfiField(PointArgs),
    /// Temperature QFI, swept over T.
    QfiTemp(PointArgs),
    /// Ground population and its temperature derivative, swept over T.
    Boltzmann(PointArgs),
    /// Spectral deformation and perturbative QFI estimates, swept over h.
    Deformation(PointArgs),
    /// Run a sweep described by a TOML config.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["graph", "graph_file"]))]
pub struct PointArgs {
    /// Catalog graph names (P4, C4, PAN, Sd4, K4, S3), comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "graph_file")]
    pub graph: Vec<String>,
    /// Graph file in the `n N` / `e u v` edge-list format.
    #[arg(long)]
    pub graph_file: Option<PathBuf>,
    /// Coupling J (positive: ferromagnetic).
    #[arg(long = "J", default_value_t = 1.0, allow_negative_numbers = true)]
    pub coupling: f64,
    /// Transverse field h.
    #[arg(long = "h", default_value_t = 0.5, allow_negative_numbers = true)]
    pub field: f64,
    /// Temperature T.
    #[arg(long = "T", default_value_t = 0.04, allow_negative_numbers = true)]
    pub temperature: f64,
    /// Sweep the natural axis as START:STOP:STEPS instead of one point.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    pub range: Option<(f64, f64, usize)>,
    /// Space the range logarithmically.
    #[arg(long, requires = "range")]
    pub log: bool,
    #[command(flatten)]
    pub tolerances: ToleranceArgs,
    /// Write CSV files into this directory instead of printing to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also render SVG charts (requires --out and --range).
    #[arg(long, requires_all = ["out", "range"])]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct ToleranceArgs {
    /// Eigenvalues closer than this are treated as degenerate.
    #[arg(long, default_value_t = DEFAULT_TOL_DEG)]
    pub tol_deg: f64,
    /// Step of the finite-difference QFI oracle.
    #[arg(long, default_value_t = DEFAULT_FD_DELTA)]
    pub fd_delta: f64,
    /// Number of low levels entering the spectral deformation.
    #[arg(long, default_value_t = DEFAULT_N_LEVELS)]
    pub n_levels: usize,
}

impl ToleranceArgs {
    fn to_tolerances(&self) -> Tolerances {
        Tolerances {
            tol_deg: self.tol_deg,
            fd_delta: self.fd_delta,
            n_levels: self.n_levels,
        }
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// TOML sweep config.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory for CSV (and SVG) files.
    #[arg(long)]
    pub out: PathBuf,
    /// Evaluate grid points on one thread.
    #[arg(long)]
    pub serial: bool,
}

fn parse_range(s: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(format!("expected START:STOP:STEPS, got {s:?}"));
    };
    let a: f64 = a.parse().map_err(|e| format!("bad start {a:?}: {e}"))?;
    let b: f64 = b.parse().map_err(|e| format!("bad stop {b:?}: {e}"))?;
    let n: usize = n.parse().map_err(|e| format!("bad step count {n:?}: {e}"))?;
    Ok((a, b, n))
}

fn natural_axis(observable: Observable) -> AxisKind {
    match observable {
        Observable::QfiTemp | Observable::BoltzmannRate => AxisKind::Temperature,
        _ => AxisKind::Field,
    }
}

/// Exit status for a failed run: 2 for bad input, 1 for numerical failure.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Graph(_) | Error::InvalidArgument(_) | Error::Config(_) | Error::Io { .. } => 2,
        Error::Spectral(_) | Error::Thermal(_) | Error::PointFailed { .. } => 1,
    }
}

pub fn run<W: Write>(cli: Cli, stdout: &mut W) -> Result<(), Error> {
    match cli.command {
        Command::Catalog => catalog(stdout),
        Command::Spectrum(a) => point(Observable::Spectrum, a, stdout),
        Command::QfiField(a) => point(Observable::QfiField, a, stdout),
        Command::QfiTemp(a) => point(Observable::QfiTemp, a, stdout),
        Command::Boltzmann(a) => point(Observable::BoltzmannRate, a, stdout),
        Command::Deformation(a) => point(Observable::Deformation, a, stdout),
        Command::Sweep(a) => sweep(a, stdout),
    }
}

fn print<W: Write>(stdout: &mut W, text: &str) -> Result<(), Error> {
    stdout
        .write_all(text.as_bytes())
        .map_err(|e| Error::io(Path::new("<stdout>"), e))
}

fn catalog<W: Write>(stdout: &mut W) -> Result<(), Error> {
    let mut text = String::from("graph,vertices,edges,total_degree,g_ferro,g_antiferro\n");
    for name in CatalogName::ALL {
        let g = name.graph();
        let ferro = graph_properties(&g, 1.0);
        let anti = graph_properties(&g, -1.0);
        text.push_str(&format!(
            "{},{},{},{},{},{}\n",
            name.as_str(),
            g.n_vertices(),
            ferro.edge_count,
            ferro.total_degree,
            ferro.ground_degeneracy,
            anti.ground_degeneracy
        ));
    }
    print(stdout, &text)
}

fn point<W: Write>(observable: Observable, a: PointArgs, stdout: &mut W) -> Result<(), Error> {
    let tolerances = a.tolerances.to_tolerances();
    let axis_kind = natural_axis(observable);
    let Some((start, stop, steps)) = a.range else {
        let graphs = resolve(&a)?;
        if a.temperature <= 0.0 && observable != Observable::Spectrum && observable != Observable::Deformation {
            return Err(Error::InvalidArgument(format!("T must be positive, got {}", a.temperature)));
        }
        let mut records = Vec::new();
        for g in &graphs {
            let values = evaluate(&g.graph, a.coupling, a.field, a.temperature, observable, &tolerances)?;
            records.push(Record {
                graph: g.name.clone(),
                coupling: a.coupling,
                axis_index: 0,
                axis_value: match axis_kind {
                    AxisKind::Field => a.field,
                    AxisKind::Temperature => a.temperature,
                },
                field: a.field,
                temperature: a.temperature,
                observable,
                values,
            });
        }
        let refs: Vec<&Record> = records.iter().collect();
        let text = csv_text(observable, &refs)?;
        return match &a.out {
            Some(dir) => {
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
                let path = dir.join(format!(
                    "{}_J{}_h{}_T{}.csv",
                    observable.as_str(),
                    format_number(a.coupling),
                    format_number(a.field),
                    format_number(a.temperature)
                ));
                std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
            }
            None => print(stdout, &text),
        };
    };

    let fixed = match axis_kind {
        AxisKind::Field => a.temperature,
        AxisKind::Temperature => a.field,
    };
    let axis = AxisConfig {
        kind: axis_kind,
        start,
        stop,
        steps,
        scale: if a.log { AxisScale::Log } else { AxisScale::Linear },
    };
    let mut cfg = SweepConfig::new(&[], &[a.coupling], axis, fixed, &[observable]);
    cfg.graphs = GraphSelection {
        names: a.graph.clone(),
        files: a.graph_file.iter().cloned().collect(),
    };
    cfg.tolerances = tolerances;
    cfg.output.svg = a.svg;
    cfg.validate().map_err(|e| match e {
        Error::Config(msg) => Error::InvalidArgument(msg),
        other => other,
    })?;
    let result = run_sweep(&cfg, Parallelism::Parallel)?;
    match &a.out {
        Some(dir) => write_outputs(&result, dir),
        None => {
            let refs: Vec<&Record> = result.records.iter().collect();
            print(stdout, &csv_text(observable, &refs)?)
        }
    }
}

fn resolve(a: &PointArgs) -> Result<Vec<NamedGraph>, Error> {
    let mut out: Vec<NamedGraph> = a.graph.iter().map(|n| NamedGraph::catalog(n)).collect::<Result<_, _>>()?;
    if let Some(path) = &a.graph_file {
        out.push(NamedGraph::from_file(path)?);
    }
    Ok(out)
}

fn write_outputs(result: &crate::experiments::SweepResult, dir: &Path) -> Result<(), Error> {
    emit_csv(result, dir)?;
    if result.config.output.svg {
        let opts = SvgOptions {
            width: result.config.output.width,
            height: result.config.output.height,
        };
        emit_svg(result, dir, &opts)?;
    }
    Ok(())
}

fn sweep<W: Write>(a: SweepArgs, stdout: &mut W) -> Result<(), Error> {
    let cfg = SweepConfig::load(&a.config)?;
    let parallelism = if a.serial {
        Parallelism::Serial
    } else {
        Parallelism::Parallel
    };
    let result = run_sweep(&cfg, parallelism)?;
    write_outputs(&result, &a.out)?;
    let meta = emit_metadata(&result, &a.out)?;
    print(
        stdout,
        &format!(
            "{} records written to {} (metadata: {})\n",
            result.records.len(),
            a.out.display(),
            meta.display()
        ),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn graph_and_graph_file_conflict() {
        let err = Cli::try_parse_from([
            "graphsense", "qfi-field", "--graph", "P4", "--graph-file", "x.txt",
        ])
        .unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn negative_coupling_parses() {
        let cli = Cli::try_parse_from(["graphsense", "spectrum", "--graph", "K4", "--J", "-1", "--range", "0:1:5"]).unwrap();
        let Command::Spectrum(a) = cli.command else { panic!() };
        assert_eq!(a.coupling, -1.0);
        assert_eq!(a.range, Some((0.0, 1.0, 5)));
    }

    #[test]
    fn help_lists_default_tolerances() {
        let help = Cli::command()
            .find_subcommand_mut("qfi-field")
            .unwrap()
            .render_long_help()
            .to_string();
        assert!(help.contains("--tol-deg"));
        assert!(help.contains("default: 0.000000001"), "{help}");
        assert!(help.contains("default: 0.00001"));
    }

    #[test]
    fn single_point_prints_csv() {
        let cli = Cli::try_parse_from(["graphsense", "boltzmann", "--graph", "P4,C4", "--T", "0.1"]).unwrap();
        let mut out = Vec::new();
        run(cli, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("graph,J,h,T,p0,dp0_dT\nP4,1,0.5,0.1,"));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::InvalidArgument("x".into())), 2);
        let e = Error::Thermal(crate::thermal::ThermalError::EmptySpectrum);
        assert_eq!(exit_code(&e), 1);
    }
}
