//! Quantum Fisher information of small transverse-field Ising sensors at
//! thermal equilibrium, for arbitrary connected interaction graphs.
//!
//! The pipeline is: [`graph`] topology → [`hamiltonian`] matrix →
//! [`spectral`] eigendecomposition → [`thermal`] Gibbs populations →
//! [`qfi`] precision bounds. [`deformation`] holds the purely spectral
//! sensitivity diagnostics, and [`experiments`] drives parameter sweeps.

pub mod graph;
pub mod hamiltonian;
pub mod spectral;
pub mod thermal;
pub mod deformation;
pub mod experiments;
pub mod output;
pub mod cli;
pub mod qfi;

use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] graph::GraphError),
    #[error(transparent)]
    Spectral(#[from] spectral::SpectralError),
    #[error(transparent)]
    Thermal(#[from] thermal::ThermalError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid sweep config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("evaluation failed for graph {graph} at axis value {axis_value}: {source}")]
    PointFailed {
        graph: String,
        axis_value: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Error {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
