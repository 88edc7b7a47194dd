//! Quantum Fisher information for the transverse field `h` and the bath
//! temperature `T`.
//!
//! Three routes are provided and cross-checked in the tests:
//!
//! * [`qfi_from_sld`]: the symmetric-logarithmic-derivative sum
//!   `F = 2 Σ_{n,m} |⟨ψ_n|∂ρ|ψ_m⟩|² / (λ_n + λ_m)` for a given `∂ρ`;
//! * [`qfi_split`]: the same quantity separated into the population
//!   (classical) part `Σ (∂λ_n)²/λ_n` and the eigenbasis-rotation (quantum)
//!   part `2 Σ_{n≠m} (λ_n-λ_m)²/(λ_n+λ_m) |⟨ψ_m|∂ψ_n⟩|²`;
//! * [`qfi_field_fd`]: central differences of the full density matrix fed
//!   into [`qfi_from_sld`], used only as an independent oracle.

use nalgebra::{DMatrix, DVector};

use crate::graph::Graph;
use crate::hamiltonian::{build_hamiltonian, field_generator};
use crate::spectral::{eigenvector_derivatives, eigh, DEFAULT_TOL_DEG};
use crate::thermal::ThermalState;
use crate::Error;

/// Population pairs with `λ_n + λ_m` below this are dropped from the analytic
/// sums. Their true contribution is bounded by the cutoff itself.
pub const POPULATION_CUTOFF: f64 = 1e-300;

/// Cutoff for the finite-difference oracle. A differenced `∂ρ` carries
/// rounding noise near `ε/δ ≈ 1e-11`, which must not be divided by
/// populations that have underflowed.
pub const FD_POPULATION_CUTOFF: f64 = 1e-12;

pub const DEFAULT_FD_DELTA: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parameter {
    Field,
    Temperature,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QfiBreakdown {
    pub classical: f64,
    pub quantum: f64,
    pub total: f64,
    pub parameter: Parameter,
}

impl QfiBreakdown {
    /// Cramér-Rao bound on the estimator variance after `repetitions`
    /// independent measurements: `1 / (m F)`.
    pub fn precision_bound(&self, repetitions: u32) -> f64 {
        1.0 / (f64::from(repetitions) * self.total)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QfiOptions {
    pub tol_deg: f64,
    pub fd_delta: f64,
}

impl Default for QfiOptions {
    fn default() -> Self {
        QfiOptions {
            tol_deg: DEFAULT_TOL_DEG,
            fd_delta: DEFAULT_FD_DELTA,
        }
    }
}

/// SLD form of the QFI. `eigenvectors` are the eigenvectors of `ρ` (columns,
/// aligned with `populations`) and `drho` is `∂ρ` in the same basis the
/// eigenvectors are written in.
pub fn qfi_from_sld(
    populations: &[f64],
    eigenvectors: &DMatrix<f64>,
    drho: &DMatrix<f64>,
    cutoff: f64,
) -> f64 {
    let projected = eigenvectors.transpose() * drho * eigenvectors;
    let d = populations.len();
    let mut total = 0.0;
    for n in 0..d {
        for m in 0..d {
            let denom = populations[n] + populations[m];
            if denom > cutoff {
                total += projected[(n, m)] * projected[(n, m)] / denom;
            }
        }
    }
    2.0 * total
}

/// Classical-plus-quantum form of the QFI.
///
/// `dvectors` must be gauge fixed (`⟨ψ_n|∂ψ_n⟩ = 0`); pass a zero matrix
/// when the eigenbasis does not depend on the parameter.
pub fn qfi_split(
    populations: &[f64],
    dpopulations: &[f64],
    eigenvectors: &DMatrix<f64>,
    dvectors: &DMatrix<f64>,
    parameter: Parameter,
    cutoff: f64,
) -> QfiBreakdown {
    let classical: f64 = populations
        .iter()
        .zip(dpopulations)
        .filter(|(p, _)| **p > cutoff)
        .map(|(p, dp)| dp * dp / p)
        .sum();

    // overlaps[(m, n)] = ⟨ψ_m|∂ψ_n⟩
    let overlaps = eigenvectors.transpose() * dvectors;
    let d = populations.len();
    let mut quantum = 0.0;
    for n in 0..d {
        for m in 0..d {
            let (pn, pm) = (populations[n], populations[m]);
            if n == m || pn + pm <= cutoff {
                continue;
            }
            let diff = pn - pm;
            quantum += diff * diff / (pn + pm) * overlaps[(m, n)] * overlaps[(m, n)];
        }
    }
    quantum *= 2.0;
    QfiBreakdown {
        classical,
        quantum,
        total: classical + quantum,
        parameter,
    }
}

/// Field QFI of the Gibbs state of `hamiltonian`, where `generator` is
/// `∂H/∂h`. Works on raw matrices so callers can probe shifted or relabeled
/// Hamiltonians directly.
pub fn field_qfi_of(
    hamiltonian: &DMatrix<f64>,
    generator: &DMatrix<f64>,
    temperature: f64,
    tol_deg: f64,
) -> Result<QfiBreakdown, Error> {
    let es = eigh(hamiltonian, tol_deg)?;
    let ts = ThermalState::new(&es.eigenvalues, temperature)?;
    let deriv = eigenvector_derivatives(&es, generator)?;

    // ∂_h p_n = p_n (⟨∂_h E⟩ - ∂_h E_n) / T
    let slopes = &deriv.energy_slopes;
    let mean_slope: f64 = ts.populations.iter().zip(slopes).map(|(p, s)| p * s).sum();
    let dpopulations: Vec<f64> = ts
        .populations
        .iter()
        .zip(slopes)
        .map(|(p, s)| p * (mean_slope - s) / temperature)
        .collect();

    Ok(qfi_split(
        &ts.populations,
        &dpopulations,
        &deriv.eigenvectors,
        &deriv.dvectors,
        Parameter::Field,
        POPULATION_CUTOFF,
    ))
}

pub fn qfi_field(
    graph: &Graph,
    coupling: f64,
    field: f64,
    temperature: f64,
    opts: &QfiOptions,
) -> Result<QfiBreakdown, Error> {
    let h = build_hamiltonian(graph, coupling, field);
    let v = field_generator(graph.n_vertices());
    field_qfi_of(&h.matrix, &v.matrix, temperature, opts.tol_deg)
}

/// Gibbs density matrix `V diag(p) Vᵀ` in the computational basis.
pub fn density_matrix(
    graph: &Graph,
    coupling: f64,
    field: f64,
    temperature: f64,
) -> Result<DMatrix<f64>, Error> {
    let es = eigh(&build_hamiltonian(graph, coupling, field).matrix, DEFAULT_TOL_DEG)?;
    let ts = ThermalState::new(&es.eigenvalues, temperature)?;
    let p = DMatrix::from_diagonal(&DVector::from_column_slice(&ts.populations));
    Ok(&es.eigenvectors * p * es.eigenvectors.transpose())
}

/// `(ρ(h+δ) - ρ(h-δ)) / 2δ`.
pub fn finite_difference_drho(
    graph: &Graph,
    coupling: f64,
    field: f64,
    temperature: f64,
    delta: f64,
) -> Result<DMatrix<f64>, Error> {
    let plus = density_matrix(graph, coupling, field + delta, temperature)?;
    let minus = density_matrix(graph, coupling, field - delta, temperature)?;
    Ok((plus - minus) / (2.0 * delta))
}

/// Finite-difference oracle for [`qfi_field`]. Not used in production paths.
pub fn qfi_field_fd(
    graph: &Graph,
    coupling: f64,
    field: f64,
    temperature: f64,
    delta: f64,
) -> Result<f64, Error> {
    assert!(delta > 0.0, "finite-difference step must be positive");
    let drho = finite_difference_drho(graph, coupling, field, temperature, delta)?;
    let es = eigh(&build_hamiltonian(graph, coupling, field).matrix, DEFAULT_TOL_DEG)?;
    let ts = ThermalState::new(&es.eigenvalues, temperature)?;
    Ok(qfi_from_sld(
        &ts.populations,
        &es.eigenvectors,
        &drho,
        FD_POPULATION_CUTOFF,
    ))
}

/// Both forms of the thermal QFI: `Σ (∂_T p_n)² / p_n` and
/// `(⟨H²⟩ - ⟨H⟩²) / T⁴`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemperatureRoutes {
    pub population_form: f64,
    pub variance_form: f64,
}

pub fn temperature_routes(ts: &ThermalState) -> TemperatureRoutes {
    let dp = ts.population_temperature_derivatives();
    let population_form = ts
        .populations
        .iter()
        .zip(&dp)
        .filter(|(p, _)| **p > POPULATION_CUTOFF)
        .map(|(p, d)| d * d / p)
        .sum();
    let t4 = ts.temperature.powi(4);
    TemperatureRoutes {
        population_form,
        variance_form: ts.energy_moments().1 / t4,
    }
}

/// Temperature QFI of the Gibbs state of `hamiltonian`. The eigenbasis does
/// not depend on `T`, so the quantum part is identically zero; the total is
/// the variance form.
pub fn temperature_qfi_of(
    hamiltonian: &DMatrix<f64>,
    temperature: f64,
    tol_deg: f64,
) -> Result<QfiBreakdown, Error> {
    let es = eigh(hamiltonian, tol_deg)?;
    let ts = ThermalState::new(&es.eigenvalues, temperature)?;
    let routes = temperature_routes(&ts);
    Ok(QfiBreakdown {
        classical: routes.population_form,
        quantum: 0.0,
        total: routes.variance_form,
        parameter: Parameter::Temperature,
    })
}

pub fn qfi_temperature(
    graph: &Graph,
    coupling: f64,
    field: f64,
    temperature: f64,
    opts: &QfiOptions,
) -> Result<QfiBreakdown, Error> {
    let h = build_hamiltonian(graph, coupling, field);
    temperature_qfi_of(&h.matrix, temperature, opts.tol_deg)
}
