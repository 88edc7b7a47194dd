//! Parameter sweeps over fields or temperatures, peak extraction, and
//! ordering checks between curves.
//!
//! Grid points are independent, so a sweep can run on the rayon pool. The
//! output order is fixed by (observable, graph, J, axis index) either way.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::deformation::{
    perturbative_qfi_mixed, perturbative_qfi_pure, spectral_deformation, DEFAULT_N_LEVELS,
};
use crate::graph::{catalog_graph, Graph};
use crate::hamiltonian::build_hamiltonian;
use crate::qfi::{qfi_field, qfi_temperature, QfiOptions, DEFAULT_FD_DELTA};
use crate::spectral::{eigh, DEFAULT_TOL_DEG};
use crate::thermal::ThermalState;
use crate::Error;

/// A graph together with the label used in output files and legends.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedGraph {
    pub name: String,
    pub graph: Graph,
}

impl NamedGraph {
    pub fn catalog(name: &str) -> Result<NamedGraph, Error> {
        let graph = catalog_graph(name)?;
        // normalize the label to the catalog spelling
        let name = name.parse::<crate::graph::CatalogName>()?.as_str().to_string();
        Ok(NamedGraph { name, graph })
    }

    /// Loads a graph file; the label is the file stem.
    pub fn from_file(path: &Path) -> Result<NamedGraph, Error> {
        let graph = Graph::from_file(path)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        Ok(NamedGraph { name, graph })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    QfiField,
    QfiTemp,
    BoltzmannRate,
    Spectrum,
    Deformation,
}

impl Observable {
    pub fn as_str(self) -> &'static str {
        match self {
            Observable::QfiField => "qfi_field",
            Observable::QfiTemp => "qfi_temp",
            Observable::BoltzmannRate => "boltzmann_rate",
            Observable::Spectrum => "spectrum",
            Observable::Deformation => "deformation",
        }
    }

    /// Scalar maximized by [`find_peak`]: the QFI total, `|dp_0/dT|`, or
    /// `D_n`. Spectra have no single scalar.
    pub fn peak_value(self, values: &[f64]) -> Option<f64> {
        match self {
            Observable::QfiField | Observable::QfiTemp => Some(values[2]),
            Observable::BoltzmannRate => Some(values[1].abs()),
            Observable::Deformation => Some(values[1]),
            Observable::Spectrum => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Observable::QfiField => "F_h",
            Observable::QfiTemp => "F_T",
            Observable::BoltzmannRate => "dp0/dT",
            Observable::Spectrum => "E_n",
            Observable::Deformation => "D_n",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisKind {
    Field,
    Temperature,
}

impl AxisKind {
    pub fn symbol(self) -> &'static str {
        match self {
            AxisKind::Field => "h",
            AxisKind::Temperature => "T",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisScale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub kind: AxisKind,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
    #[serde(default)]
    pub scale: AxisScale,
}

impl AxisConfig {
    /// Default field grid: `h ∈ [0.01, 1.0]`, 200 points.
    pub fn default_field() -> AxisConfig {
        AxisConfig {
            kind: AxisKind::Field,
            start: 0.01,
            stop: 1.0,
            steps: 200,
            scale: AxisScale::Linear,
        }
    }

    /// Default temperature grid: `T ∈ [0.01, 0.5]`, 200 points.
    pub fn default_temperature() -> AxisConfig {
        AxisConfig {
            kind: AxisKind::Temperature,
            start: 0.01,
            stop: 0.5,
            steps: 200,
            scale: AxisScale::Linear,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        match self.scale {
            AxisScale::Linear => (0..self.steps)
                .map(|i| {
                    let frac = i as f64 / last;
                    self.start + frac * (self.stop - self.start)
                })
                .collect(),
            AxisScale::Log => {
                let (a, b) = (self.start.ln(), self.stop.ln());
                (0..self.steps)
                    .map(|i| (a + i as f64 / last * (b - a)).exp())
                    .collect()
            }
        }
    }

    fn validate(&self) -> Result<(), Error> {
        if self.start.is_nan() || self.stop.is_nan() || self.start >= self.stop {
            return Err(config_error(format!(
                "axis start {} must be below stop {}",
                self.start, self.stop
            )));
        }
        if self.steps < 2 {
            return Err(config_error(format!("axis needs at least 2 steps, got {}", self.steps)));
        }
        if self.scale == AxisScale::Log && self.start <= 0.0 {
            return Err(config_error("log-scaled axis must start above zero".into()));
        }
        if self.kind == AxisKind::Temperature && self.start <= 0.0 {
            return Err(config_error("temperature axis must start above zero".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSelection {
    #[serde(default)]
    pub names: Vec<String>,
    #[serde(default)]
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters {
    #[serde(rename = "J")]
    pub couplings: Vec<f64>,
    /// Fixed field, required for temperature sweeps.
    #[serde(rename = "h", default, skip_serializing_if = "Option::is_none")]
    pub field: Option<f64>,
    /// Fixed temperature, required for field sweeps.
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableList {
    pub list: Vec<Observable>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub tol_deg: f64,
    pub fd_delta: f64,
    pub n_levels: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tol_deg: DEFAULT_TOL_DEG,
            fd_delta: DEFAULT_FD_DELTA,
            n_levels: DEFAULT_N_LEVELS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputOptions {
    pub svg: bool,
    pub width: u32,
    pub height: u32,
}

impl Default for OutputOptions {
    fn default() -> Self {
        OutputOptions {
            svg: false,
            width: 800,
            height: 600,
        }
    }
}

/// Sweep description, loadable from TOML:
///
/// ```toml
/// [graphs]
/// names = ["P4", "C4", "PAN", "Sd4", "K4", "S3"]
/// files = []
///
/// [parameters]
/// J = [1.0]
/// T = 0.04          # fixed temperature for a field sweep
///
/// [axis]
/// kind = "field"    # or "temperature" (then set parameters.h)
/// start = 0.01
/// stop = 1.0
/// steps = 200
/// scale = "linear"  # or "log"
///
/// [observables]
/// list = ["qfi_field"]
///
/// [tolerances]
/// tol_deg = 1e-9
/// fd_delta = 1e-5
/// n_levels = 6
///
/// [output]
/// svg = true
/// width = 800
/// height = 600
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub graphs: GraphSelection,
    pub parameters: Parameters,
    pub axis: AxisConfig,
    pub observables: ObservableList,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputOptions,
}

fn config_error(msg: String) -> Error {
    Error::Config(msg)
}

impl SweepConfig {
    /// Config over catalog graphs with default tolerances and output.
    pub fn new(
        graphs: &[&str],
        couplings: &[f64],
        axis: AxisConfig,
        fixed: f64,
        observables: &[Observable],
    ) -> SweepConfig {
        let (field, temperature) = match axis.kind {
            AxisKind::Field => (None, Some(fixed)),
            AxisKind::Temperature => (Some(fixed), None),
        };
        SweepConfig {
            graphs: GraphSelection {
                names: graphs.iter().map(|s| s.to_string()).collect(),
                files: Vec::new(),
            },
            parameters: Parameters {
                couplings: couplings.to_vec(),
                field,
                temperature,
            },
            axis,
            observables: ObservableList {
                list: observables.to_vec(),
            },
            tolerances: Tolerances::default(),
            output: OutputOptions::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<SweepConfig, Error> {
        let cfg: SweepConfig = toml::from_str(text).map_err(|e| config_error(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<SweepConfig, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        SweepConfig::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    /// The parameter held fixed along the sweep.
    pub fn fixed_value(&self) -> f64 {
        match self.axis.kind {
            AxisKind::Field => self.parameters.temperature.unwrap_or(f64::NAN),
            AxisKind::Temperature => self.parameters.field.unwrap_or(f64::NAN),
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        self.axis.validate()?;
        if self.graphs.names.is_empty() && self.graphs.files.is_empty() {
            return Err(config_error("no graphs selected".into()));
        }
        if self.parameters.couplings.is_empty() {
            return Err(config_error("parameters.J is empty".into()));
        }
        if self.observables.list.is_empty() {
            return Err(config_error("observables.list is empty".into()));
        }
        match self.axis.kind {
            AxisKind::Field => match self.parameters.temperature {
                Some(t) if t > 0.0 && t.is_finite() => {}
                Some(t) => return Err(config_error(format!("fixed temperature must be positive, got {t}"))),
                None => return Err(config_error("field sweep needs parameters.T".into())),
            },
            AxisKind::Temperature => {
                if self.parameters.field.is_none() {
                    return Err(config_error("temperature sweep needs parameters.h".into()));
                }
            }
        }
        let t = &self.tolerances;
        if !(t.tol_deg >= 0.0 && t.fd_delta > 0.0 && t.n_levels >= 1) {
            return Err(config_error(
                "tolerances need tol_deg >= 0, fd_delta > 0 and n_levels >= 1".into(),
            ));
        }
        Ok(())
    }

    pub fn resolve_graphs(&self) -> Result<Vec<NamedGraph>, Error> {
        let mut out: Vec<NamedGraph> = self
            .graphs
            .names
            .iter()
            .map(|n| NamedGraph::catalog(n))
            .collect::<Result<_, _>>()?;
        for path in &self.graphs.files {
            out.push(NamedGraph::from_file(path)?);
        }
        Ok(out)
    }
}

/// One evaluated observable at one grid point.
///
/// `values` layout per observable:
/// * `qfi_field`, `qfi_temp`: `[classical, quantum, total]`
/// * `boltzmann_rate`: `[p0, dp0_dT]`
/// * `spectrum`: all eigenvalues, ascending
/// * `deformation`: `[n, D_n, g, excited_gap_shift, pert_pure, pert_mixed]`
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub graph: String,
    pub coupling: f64,
    pub axis_index: usize,
    pub axis_value: f64,
    pub field: f64,
    pub temperature: f64,
    pub observable: Observable,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepMetadata {
    pub version: &'static str,
    /// Seconds since the Unix epoch at completion.
    pub timestamp: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub records: Vec<Record>,
    pub metadata: SweepMetadata,
}

impl SweepResult {
    pub fn axis(&self) -> AxisKind {
        self.config.axis.kind
    }

    pub fn curve<'a>(
        &'a self,
        graph: &'a str,
        coupling: f64,
        observable: Observable,
    ) -> impl Iterator<Item = &'a Record> + 'a {
        self.records
            .iter()
            .filter(move |r| r.graph == graph && r.coupling == coupling && r.observable == observable)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parallelism {
    Serial,
    Parallel,
}

/// Evaluates one observable at one `(graph, J, h, T)` point.
pub fn evaluate(
    graph: &Graph,
    coupling: f64,
    field: f64,
    temperature: f64,
    observable: Observable,
    tol: &Tolerances,
) -> Result<Vec<f64>, Error> {
    let opts = QfiOptions {
        tol_deg: tol.tol_deg,
        fd_delta: tol.fd_delta,
    };
    Ok(match observable {
        Observable::QfiField => {
            let f = qfi_field(graph, coupling, field, temperature, &opts)?;
            vec![f.classical, f.quantum, f.total]
        }
        Observable::QfiTemp => {
            let f = qfi_temperature(graph, coupling, field, temperature, &opts)?;
            vec![f.classical, f.quantum, f.total]
        }
        Observable::BoltzmannRate => {
            let es = eigh(&build_hamiltonian(graph, coupling, field).matrix, tol.tol_deg)?;
            let ts = ThermalState::new(&es.eigenvalues, temperature)?;
            vec![ts.ground_population(), ts.boltzmann_rate()]
        }
        Observable::Spectrum => {
            eigh(&build_hamiltonian(graph, coupling, field).matrix, tol.tol_deg)?.eigenvalues
        }
        Observable::Deformation => {
            let r = spectral_deformation(graph, coupling, field, tol.n_levels, tol.tol_deg)?;
            vec![
                r.n_levels as f64,
                r.deformation,
                r.ground_degeneracy as f64,
                r.excited_gap_shift,
                perturbative_qfi_pure(graph, coupling, field, tol.tol_deg)?,
                perturbative_qfi_mixed(graph, coupling, field, tol.tol_deg)?,
            ]
        }
    })
}

pub fn run_sweep(cfg: &SweepConfig, parallelism: Parallelism) -> Result<SweepResult, Error> {
    cfg.validate()?;
    let graphs = cfg.resolve_graphs()?;
    let axis = cfg.axis.values();
    let fixed = cfg.fixed_value();

    let mut tasks = Vec::new();
    for &observable in &cfg.observables.list {
        for g in &graphs {
            for &j in &cfg.parameters.couplings {
                for (i, &x) in axis.iter().enumerate() {
                    tasks.push((observable, g, j, i, x));
                }
            }
        }
    }

    let eval = |&(observable, g, j, i, x): &(Observable, &NamedGraph, f64, usize, f64)| {
        let (field, temperature) = match cfg.axis.kind {
            AxisKind::Field => (x, fixed),
            AxisKind::Temperature => (fixed, x),
        };
        let values = evaluate(&g.graph, j, field, temperature, observable, &cfg.tolerances)
            .map_err(|e| Error::PointFailed {
                graph: g.name.clone(),
                axis_value: x,
                source: Box::new(e),
            })?;
        Ok(Record {
            graph: g.name.clone(),
            coupling: j,
            axis_index: i,
            axis_value: x,
            field,
            temperature,
            observable,
            values,
        })
    };

    let records: Vec<Record> = match parallelism {
        Parallelism::Serial => tasks.iter().map(eval).collect::<Result<_, Error>>()?,
        Parallelism::Parallel => tasks.par_iter().map(eval).collect::<Result<_, Error>>()?,
    };

    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    Ok(SweepResult {
        config: cfg.clone(),
        records,
        metadata: SweepMetadata {
            version: env!("CARGO_PKG_VERSION"),
            timestamp,
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeakSummary {
    pub graph: String,
    pub coupling: f64,
    pub observable: Observable,
    pub argmax: f64,
    pub axis_index: usize,
    pub max_value: f64,
}

/// Grid argmax of the observable's scalar along one curve. Ties go to the
/// smaller axis value.
pub fn find_peak(
    result: &SweepResult,
    graph: &str,
    coupling: f64,
    observable: Observable,
) -> Result<PeakSummary, Error> {
    let mut best: Option<(&Record, f64)> = None;
    for r in result.curve(graph, coupling, observable) {
        let v = observable.peak_value(&r.values).ok_or_else(|| {
            Error::InvalidArgument(format!("{} has no scalar peak", observable.as_str()))
        })?;
        let better = match best {
            None => true,
            Some((b, bv)) => v > bv || (v == bv && r.axis_value < b.axis_value),
        };
        if better {
            best = Some((r, v));
        }
    }
    let (r, v) = best.ok_or_else(|| {
        Error::InvalidArgument(format!(
            "no {} rows for graph {graph} at J={coupling}",
            observable.as_str()
        ))
    })?;
    Ok(PeakSummary {
        graph: graph.to_string(),
        coupling,
        observable,
        argmax: r.axis_value,
        axis_index: r.axis_index,
        max_value: v,
    })
}

/// A curve inside one of the sweeps handed to [`ordering_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRef {
    pub sweep: usize,
    pub graph: String,
    pub coupling: f64,
    pub observable: Observable,
}

impl CurveRef {
    pub fn new(sweep: usize, graph: &str, coupling: f64, observable: Observable) -> CurveRef {
        CurveRef {
            sweep,
            graph: graph.to_string(),
            coupling,
            observable,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    /// Maximum of the observable's scalar.
    Peak,
    /// Axis value of that maximum.
    Argmax,
    /// Scalar at the grid point nearest to the given axis value.
    ValueAt(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremum {
    Max,
    Min,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Relation {
    /// `metric(c_0) > metric(c_1) > ...`
    Decreasing { metric: Metric, curves: Vec<CurveRef> },
    /// `metric(c_0) < metric(c_1) < ...`
    Increasing { metric: Metric, curves: Vec<CurveRef> },
    /// `target` strictly beats every curve in `others`.
    Extreme {
        metric: Metric,
        kind: Extremum,
        target: CurveRef,
        others: Vec<CurveRef>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationOutcome {
    pub label: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OrderingReport {
    pub outcomes: Vec<RelationOutcome>,
}

impl OrderingReport {
    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }
}

fn metric_of(results: &[SweepResult], c: &CurveRef, metric: Metric) -> Result<f64, String> {
    let sweep = results
        .get(c.sweep)
        .ok_or_else(|| format!("no sweep #{}", c.sweep))?;
    match metric {
        Metric::Peak | Metric::Argmax => {
            let p = find_peak(sweep, &c.graph, c.coupling, c.observable).map_err(|e| e.to_string())?;
            Ok(if metric == Metric::Peak { p.max_value } else { p.argmax })
        }
        Metric::ValueAt(x) => {
            let r = sweep
                .curve(&c.graph, c.coupling, c.observable)
                .min_by(|a, b| (a.axis_value - x).abs().total_cmp(&(b.axis_value - x).abs()))
                .ok_or_else(|| format!("missing curve {} J={}", c.graph, c.coupling))?;
            c.observable
                .peak_value(&r.values)
                .ok_or_else(|| format!("{} has no scalar value", c.observable.as_str()))
        }
    }
}

fn describe(c: &CurveRef, v: f64) -> String {
    format!("{}[J={},#{}]={:.6e}", c.graph, c.coupling, c.sweep, v)
}

/// Evaluates each relation against the sweeps. Missing curves make that
/// relation fail; they never abort the whole check.
pub fn ordering_check(results: &[SweepResult], relations: &[(String, Relation)]) -> OrderingReport {
    let outcomes = relations
        .iter()
        .map(|(label, rel)| {
            let (passed, detail) = match evaluate_relation(results, rel) {
                Ok(v) => v,
                Err(msg) => (false, msg),
            };
            RelationOutcome {
                label: label.clone(),
                passed,
                detail,
            }
        })
        .collect();
    OrderingReport { outcomes }
}

fn evaluate_relation(results: &[SweepResult], rel: &Relation) -> Result<(bool, String), String> {
    match rel {
        Relation::Decreasing { metric, curves } | Relation::Increasing { metric, curves } => {
            let values = curves
                .iter()
                .map(|c| metric_of(results, c, *metric))
                .collect::<Result<Vec<_>, _>>()?;
            let decreasing = matches!(rel, Relation::Decreasing { .. });
            let passed = values
                .windows(2)
                .all(|w| if decreasing { w[0] > w[1] } else { w[0] < w[1] });
            let sep = if decreasing { " > " } else { " < " };
            let detail = curves
                .iter()
                .zip(&values)
                .map(|(c, v)| describe(c, *v))
                .collect::<Vec<_>>()
                .join(sep);
            Ok((passed, detail))
        }
        Relation::Extreme {
            metric,
            kind,
            target,
            others,
        } => {
            let t = metric_of(results, target, *metric)?;
            let mut detail = describe(target, t);
            let mut passed = true;
            for c in others {
                let v = metric_of(results, c, *metric)?;
                passed &= match kind {
                    Extremum::Max => t > v,
                    Extremum::Min => t < v,
                };
                detail.push_str(&format!(" vs {}", describe(c, v)));
            }
            Ok((passed, detail))
        }
    }
}
