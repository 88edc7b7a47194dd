//! Purely spectral field-sensitivity diagnostics.
//!
//! These need no thermal state: they compare the low-lying spectrum at field
//! `h` against the zero-field spectrum, and estimate the field QFI from
//! leading-order perturbation theory around the (often degenerate) zero-field
//! ground space.

use nalgebra::DMatrix;

use crate::graph::Graph;
use crate::hamiltonian::{build_hamiltonian, field_generator};
use crate::spectral::{eigh, EigenSystem};
use crate::Error;

pub const DEFAULT_N_LEVELS: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct DeformationReport {
    pub coupling: f64,
    pub field: f64,
    pub n_levels: usize,
    /// `D_n(h) = sqrt(Σ_{i<n} (E_i(h) - E_i(0))²)` over the lowest levels,
    /// paired by ascending index.
    pub deformation: f64,
    /// Zero-field ground degeneracy.
    pub ground_degeneracy: usize,
    /// `E_1(h) - E_0(0)`.
    pub excited_gap_shift: f64,
}

pub fn spectral_deformation(
    graph: &Graph,
    coupling: f64,
    field: f64,
    n_levels: usize,
    tol_deg: f64,
) -> Result<DeformationReport, Error> {
    let dim = 1usize << graph.n_vertices();
    if n_levels == 0 || n_levels > dim {
        return Err(Error::InvalidArgument(format!(
            "n_levels must be in 1..={dim}, got {n_levels}"
        )));
    }
    let zero = eigh(&build_hamiltonian(graph, coupling, 0.0).matrix, tol_deg)?;
    let perturbed = eigh(&build_hamiltonian(graph, coupling, field).matrix, tol_deg)?;
    let deformation = zero.eigenvalues[..n_levels]
        .iter()
        .zip(&perturbed.eigenvalues[..n_levels])
        .map(|(e0, eh)| (eh - e0) * (eh - e0))
        .sum::<f64>()
        .sqrt();
    // dim >= 2 for any graph, so level 1 exists
    let excited_gap_shift = perturbed.eigenvalues[1] - zero.eigenvalues[0];
    Ok(DeformationReport {
        coupling,
        field,
        n_levels,
        deformation,
        ground_degeneracy: zero.ground_degeneracy(),
        excited_gap_shift,
    })
}

struct ZeroFieldCouplings {
    es: EigenSystem,
    /// `⟨ψ_m|V|ψ_n⟩` in the zero-field eigenbasis.
    coupling: DMatrix<f64>,
}

fn zero_field_couplings(graph: &Graph, coupling: f64, tol_deg: f64) -> Result<ZeroFieldCouplings, Error> {
    let es = eigh(&build_hamiltonian(graph, coupling, 0.0).matrix, tol_deg)?;
    let v = field_generator(graph.n_vertices()).matrix;
    let coupling = es.eigenvectors.transpose() * v * &es.eigenvectors;
    Ok(ZeroFieldCouplings { es, coupling })
}

/// Leading-order QFI of the uniform superposition over the zero-field ground
/// space:
///
/// ```text
/// F ≈ 4h² (1/g) Σ_{j ∈ ground} Σ_{k ∉ ground} |⟨ψ_k|V|ψ_j⟩ / (E_k - E_0)|²
/// ```
///
/// Both sums run over whole degeneracy blocks, so the value does not depend
/// on which basis the eigensolver picked inside them.
pub fn perturbative_qfi_pure(graph: &Graph, coupling: f64, field: f64, tol_deg: f64) -> Result<f64, Error> {
    let zf = zero_field_couplings(graph, coupling, tol_deg)?;
    let ground = zf.es.blocks[0].clone();
    let e0 = zf.es.eigenvalues[0];
    let mut sum = 0.0;
    for j in ground.clone() {
        for k in ground.end..zf.es.dim() {
            let term = zf.coupling[(k, j)] / (zf.es.eigenvalues[k] - e0);
            sum += term * term;
        }
    }
    Ok(4.0 * field * field * sum / ground.len() as f64)
}

/// Leading-order QFI for the maximally mixed state on the ground space:
///
/// ```text
/// F ≈ (4h²/g) Σ_{i<j} |⟨ψ_i|V|ψ_j⟩|² / (E_i - E_j)²
/// ```
///
/// over the full spectrum. Pairs inside one degeneracy block are skipped,
/// since their denominators vanish.
pub fn perturbative_qfi_mixed(graph: &Graph, coupling: f64, field: f64, tol_deg: f64) -> Result<f64, Error> {
    let zf = zero_field_couplings(graph, coupling, tol_deg)?;
    let block: Vec<usize> = (0..zf.es.dim()).map(|n| zf.es.block_of(n)).collect();
    let e = &zf.es.eigenvalues;
    let mut sum = 0.0;
    for i in 0..e.len() {
        for j in i + 1..e.len() {
            if block[i] == block[j] {
                continue;
            }
            let gap = e[i] - e[j];
            sum += zf.coupling[(i, j)] * zf.coupling[(i, j)] / (gap * gap);
        }
    }
    Ok(4.0 * field * field * sum / zf.es.ground_degeneracy() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::CatalogName;
    use crate::spectral::DEFAULT_TOL_DEG;
    use nalgebra::DVector;

    #[test]
    fn zero_field_has_no_deformation() {
        for name in CatalogName::ALL {
            for j in [-1.0, 1.0] {
                let r = spectral_deformation(&name.graph(), j, 0.0, 6, DEFAULT_TOL_DEG).unwrap();
                assert_eq!(r.deformation, 0.0);
                assert!(r.excited_gap_shift >= 0.0);
            }
        }
    }

    #[test]
    fn single_qubit_closed_form() {
        let g = Graph::new(1, &[]).unwrap();
        let h = 0.3;
        let r = spectral_deformation(&g, 1.0, h, 2, DEFAULT_TOL_DEG).unwrap();
        assert!((r.deformation - 2f64.sqrt() * h).abs() < 1e-15);
        assert_eq!(r.ground_degeneracy, 2);
        // fully degenerate H0: nothing outside the ground block
        assert_eq!(perturbative_qfi_pure(&g, 1.0, h, DEFAULT_TOL_DEG).unwrap(), 0.0);
        assert_eq!(perturbative_qfi_mixed(&g, 1.0, h, DEFAULT_TOL_DEG).unwrap(), 0.0);
    }

    #[test]
    fn n_levels_is_validated() {
        let g = CatalogName::P4.graph();
        assert!(matches!(
            spectral_deformation(&g, 1.0, 0.1, 0, DEFAULT_TOL_DEG),
            Err(Error::InvalidArgument(_))
        ));
        assert!(spectral_deformation(&g, 1.0, 0.1, 17, DEFAULT_TOL_DEG).is_err());
        assert!(spectral_deformation(&g, 1.0, 0.1, 16, DEFAULT_TOL_DEG).is_ok());
    }

    #[test]
    fn deformation_monotone_in_levels() {
        for name in CatalogName::ALL {
            let mut prev = 0.0;
            for n in 1..=16 {
                let d = spectral_deformation(&name.graph(), -1.0, 0.45, n, DEFAULT_TOL_DEG)
                    .unwrap()
                    .deformation;
                assert!(d >= prev);
                prev = d;
            }
        }
    }

    #[test]
    fn perturbative_values_scale_quadratically() {
        for name in CatalogName::ALL {
            for j in [-1.0, 1.0] {
                let g = name.graph();
                let pure = |h| perturbative_qfi_pure(&g, j, h, DEFAULT_TOL_DEG).unwrap();
                let mixed = |h| perturbative_qfi_mixed(&g, j, h, DEFAULT_TOL_DEG).unwrap();
                let (p1, p2) = (pure(0.1), pure(0.2));
                let (m1, m2) = (mixed(0.1), mixed(0.2));
                assert!(p1 > 0.0 && m1 > 0.0, "{name}");
                assert!((p2 / p1 - 4.0).abs() <= 1e-12);
                assert!((m2 / m1 - 4.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn s3_antiferro_ground_is_doubly_degenerate() {
        let r = spectral_deformation(&CatalogName::S3.graph(), -1.0, 0.01, 6, DEFAULT_TOL_DEG).unwrap();
        assert_eq!(r.ground_degeneracy, 2);
    }

    /// Exact QFI `4(⟨∂ψ|∂ψ⟩ - ⟨ψ|∂ψ⟩²)` of `ψ(h) ∝ P_g(h) ψ_0`, with `P_g(h)`
    /// the projector onto the lowest `g` levels of `H(h)` and `ψ_0` the
    /// uniform superposition over the zero-field ground space, by central
    /// differences.
    fn exact_pure_qfi(graph: &Graph, coupling: f64, h: f64) -> f64 {
        let zero = eigh(&build_hamiltonian(graph, coupling, 0.0).matrix, DEFAULT_TOL_DEG).unwrap();
        let g = zero.ground_degeneracy();
        let psi0: DVector<f64> =
            zero.eigenvectors.columns(0, g).column_sum() / (g as f64).sqrt();
        let state = |x: f64| {
            let es = eigh(&build_hamiltonian(graph, coupling, x).matrix, DEFAULT_TOL_DEG).unwrap();
            let low = es.eigenvectors.columns(0, g);
            let v = low * (low.transpose() * &psi0);
            v.normalize()
        };
        let delta = 1e-6;
        let psi = state(h);
        let dpsi = (state(h + delta) - state(h - delta)) / (2.0 * delta);
        4.0 * (dpsi.norm_squared() - psi.dot(&dpsi).powi(2))
    }

    #[test]
    fn pure_formula_tracks_exact_ground_space_qfi() {
        // S3 at J = -1: the two ground states reach disjoint excited states
        // under one spin flip, so the exact small-h QFI equals the bracket of
        // the perturbative formula, i.e. pert(h) / h² -> exact(h).
        let g = CatalogName::S3.graph();
        let h = 1e-3;
        let pert = perturbative_qfi_pure(&g, -1.0, h, DEFAULT_TOL_DEG).unwrap();
        let exact = exact_pure_qfi(&g, -1.0, h);
        assert!(((pert / (h * h)) - exact).abs() / exact < 1e-2, "{pert} vs {exact}");
    }
}
