//! Gibbs states in the energy eigenbasis.
//!
//! Populations are computed relative to the ground energy, so the largest
//! exponent is zero and nothing overflows even at `T = 1e-4` with an energy
//! spread of 12. Excited populations may underflow to exactly zero.

use thiserror::Error;

use crate::spectral::EigenSystem;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThermalError {
    #[error("temperature must be positive and finite, got {0}")]
    InvalidTemperature(f64),
    #[error("empty spectrum")]
    EmptySpectrum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermalState {
    /// `p_n`, aligned with `energies`.
    pub populations: Vec<f64>,
    /// Ascending eigenvalues the state was built from.
    pub energies: Vec<f64>,
    pub temperature: f64,
    /// `ln Z`.
    pub log_partition: f64,
}

impl ThermalState {
    /// Builds `p_n = exp(-(E_n - E_min)/T) / Σ_m exp(-(E_m - E_min)/T)`.
    pub fn new(energies: &[f64], temperature: f64) -> Result<Self, ThermalError> {
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(ThermalError::InvalidTemperature(temperature));
        }
        if energies.is_empty() {
            return Err(ThermalError::EmptySpectrum);
        }
        let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
        let weights: Vec<f64> = energies
            .iter()
            .map(|&e| (-(e - e_min) / temperature).exp())
            .collect();
        let sum: f64 = weights.iter().sum();
        Ok(ThermalState {
            populations: weights.iter().map(|w| w / sum).collect(),
            energies: energies.to_vec(),
            temperature,
            log_partition: sum.ln() - e_min / temperature,
        })
    }

    pub fn beta(&self) -> f64 {
        1.0 / self.temperature
    }

    /// Population of the lowest-index eigenstate.
    pub fn ground_population(&self) -> f64 {
        self.populations[0]
    }

    pub fn mean_energy(&self) -> f64 {
        self.energy_moments().0
    }

    /// `(⟨H⟩, ⟨H²⟩ - ⟨H⟩²)`, accumulated in energies measured from the
    /// ground level and centered on the mean. This stays accurate when the
    /// spectrum carries a large constant offset or the variance is tiny.
    pub fn energy_moments(&self) -> (f64, f64) {
        let e0 = self.energies[0];
        let excess_mean: f64 = self
            .populations
            .iter()
            .zip(&self.energies)
            .map(|(p, e)| p * (e - e0))
            .sum();
        let variance = self
            .populations
            .iter()
            .zip(&self.energies)
            .map(|(p, e)| {
                let x = e - e0 - excess_mean;
                p * x * x
            })
            .sum();
        (e0 + excess_mean, variance)
    }

    /// `⟨H⟩ - E_n` for every level, without forming `⟨H⟩` in absolute terms.
    fn mean_minus_levels(&self) -> impl Iterator<Item = f64> + '_ {
        let e0 = self.energies[0];
        let excess_mean: f64 = self
            .populations
            .iter()
            .zip(&self.energies)
            .map(|(p, e)| p * (e - e0))
            .sum();
        self.energies.iter().map(move |e| excess_mean - (e - e0))
    }

    /// `∂p_n/∂T = p_n (E_n - ⟨H⟩) / T²`.
    pub fn population_temperature_derivatives(&self) -> Vec<f64> {
        let t2 = self.temperature * self.temperature;
        self.populations
            .iter()
            .zip(self.mean_minus_levels())
            .map(|(p, d)| -p * d / t2)
            .collect()
    }

    /// `dp_0/dT` for the lowest-index eigenstate. Degenerate ground partners
    /// share the same value.
    pub fn boltzmann_rate(&self) -> f64 {
        let t2 = self.temperature * self.temperature;
        let gap_to_mean = self.mean_minus_levels().next().expect("non-empty spectrum");
        -self.populations[0] * gap_to_mean / t2
    }
}

pub fn gibbs_state(es: &EigenSystem, temperature: f64) -> Result<ThermalState, ThermalError> {
    ThermalState::new(&es.eigenvalues, temperature)
}
