//! Symmetric eigendecomposition and first-order eigenvector derivatives.
//!
//! The eigensolver is a cyclic Jacobi iteration. For matrices of dimension
//! 16 it converges in a handful of sweeps and its output is a deterministic
//! function of the input.

use std::ops::Range;

use nalgebra::DMatrix;
use thiserror::Error;

/// Default absolute tolerance for grouping eigenvalues into degenerate blocks.
pub const DEFAULT_TOL_DEG: f64 = 1e-9;

/// Jacobi stops once the off-diagonal Frobenius norm falls below this
/// fraction of the input's Frobenius norm.
pub const JACOBI_REL_THRESHOLD: f64 = 1e-13;
pub const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("Jacobi iteration did not converge in {sweeps} sweeps (off-diagonal norm {residual:e})")]
    NotConverged { sweeps: usize, residual: f64 },
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `n` is the eigenvector for `eigenvalues[n]`.
    pub eigenvectors: DMatrix<f64>,
    /// Maximal runs of near-equal eigenvalues, see [`degeneracy_blocks`].
    pub blocks: Vec<Range<usize>>,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn ground_degeneracy(&self) -> usize {
        self.blocks.first().map_or(0, |b| b.len())
    }

    /// Index of the degeneracy block that contains level `n`.
    pub fn block_of(&self, n: usize) -> usize {
        self.blocks
            .iter()
            .position(|b| b.contains(&n))
            .expect("level index out of range")
    }

    /// `max |VᵀV - I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let v = &self.eigenvectors;
        (v.transpose() * v - DMatrix::identity(self.dim(), self.dim())).amax()
    }

    /// `max |V diag(E) Vᵀ - H|`.
    pub fn reconstruction_error(&self, matrix: &DMatrix<f64>) -> f64 {
        let v = &self.eigenvectors;
        let e = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.eigenvalues));
        (v * e * v.transpose() - matrix).amax()
    }
}

/// Partitions ascending eigenvalues into maximal contiguous blocks where each
/// neighbouring pair differs by at most `tol`. Closeness chains, so a slow
/// drift can join values further apart than `tol`.
pub fn degeneracy_blocks(eigenvalues: &[f64], tol: f64) -> Vec<Range<usize>> {
    let mut blocks = Vec::new();
    let mut start = 0;
    for i in 1..=eigenvalues.len() {
        if i == eigenvalues.len() || eigenvalues[i] - eigenvalues[i - 1] > tol {
            blocks.push(start..i);
            start = i;
        }
    }
    blocks
}

/// Full eigendecomposition of a real symmetric matrix.
///
/// Eigenvalues come out ascending (stable with respect to Jacobi's diagonal
/// order on exact ties) and each eigenvector's first component with
/// magnitude above `1e-8` is made positive.
pub fn eigh(matrix: &DMatrix<f64>, tol_deg: f64) -> Result<EigenSystem, SpectralError> {
    let (rows, cols) = matrix.shape();
    if rows != cols {
        return Err(SpectralError::NotSquare(rows, cols));
    }
    let asym = (matrix - matrix.transpose()).amax();
    if asym > 1e-12 * matrix.amax().max(1.0) {
        return Err(SpectralError::NotSymmetric(asym));
    }
    let (values, vectors) = jacobi(matrix)?;
    Ok(sorted_system(values, vectors, tol_deg))
}

fn sorted_system(values: Vec<f64>, vectors: DMatrix<f64>, tol_deg: f64) -> EigenSystem {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = vectors.column(src).clone_owned();
        fix_sign(col.as_mut_slice());
        eigenvectors.set_column(dst, &col);
    }
    let blocks = degeneracy_blocks(&eigenvalues, tol_deg);
    EigenSystem {
        eigenvalues,
        eigenvectors,
        blocks,
    }
}

fn fix_sign(v: &mut [f64]) {
    if let Some(&lead) = v.iter().find(|x| x.abs() > 1e-8) {
        if lead < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

fn off_diagonal_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for p in 0..n {
        for q in 0..n {
            if p != q {
                sum += a[(p, q)] * a[(p, q)];
            }
        }
    }
    sum.sqrt()
}

/// Cyclic Jacobi: sweeps over all `(p, q)` pairs in row order, annihilating
/// each off-diagonal element with a plane rotation. Returns unsorted
/// eigenvalues and the accumulated rotation matrix.
fn jacobi(matrix: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>), SpectralError> {
    let n = matrix.nrows();
    let mut a = matrix.clone();
    let mut v = DMatrix::identity(n, n);
    let threshold = JACOBI_REL_THRESHOLD * matrix.norm();

    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) <= threshold {
            return Ok(((0..n).map(|i| a[(i, i)]).collect(), v));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut a, &mut v, p, q, c, s);
            }
        }
    }
    let residual = off_diagonal_norm(&a);
    if residual <= threshold {
        Ok(((0..n).map(|i| a[(i, i)]).collect(), v))
    } else {
        Err(SpectralError::NotConverged {
            sweeps: JACOBI_MAX_SWEEPS,
            residual,
        })
    }
}

/// Applies `A <- Gᵀ A G`, `V <- V G` for the rotation in the `(p, q)` plane
/// that zeroes `A[p, q]`.
fn rotate(a: &mut DMatrix<f64>, v: &mut DMatrix<f64>, p: usize, q: usize, c: f64, s: f64) {
    let n = a.nrows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    // the rotation was chosen to kill these exactly
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Eigenvectors and their first-order response to a perturbation `dH`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDerivatives {
    /// Gauge-fixed eigenvectors: inside every degeneracy block the columns
    /// diagonalize the block restriction of `dH`.
    pub eigenvectors: DMatrix<f64>,
    /// `⟨ψ_n|dH|ψ_n⟩` in the gauge-fixed basis, i.e. first-order `dE_n`.
    pub energy_slopes: Vec<f64>,
    /// `Vᵀ dH V` in the gauge-fixed basis.
    pub coupling: DMatrix<f64>,
    /// Column `n` is `|∂ψ_n⟩` in the original basis.
    pub dvectors: DMatrix<f64>,
}

/// Rotates each degenerate block so that `dH` restricted to it is diagonal,
/// sorted by ascending diagonal value.
pub fn gauge_fix(es: &EigenSystem, dh: &DMatrix<f64>) -> Result<DMatrix<f64>, SpectralError> {
    let mut vectors = es.eigenvectors.clone();
    for block in es.blocks.iter().filter(|b| b.len() > 1) {
        let basis = es.eigenvectors.columns(block.start, block.len()).clone_owned();
        let restricted = basis.transpose() * dh * &basis;
        let (values, rot) = jacobi(&restricted)?;
        let sub = sorted_system(values, rot, 0.0);
        let rotated = &basis * &sub.eigenvectors;
        for (k, col) in rotated.column_iter().enumerate() {
            let mut col = col.clone_owned();
            fix_sign(col.as_mut_slice());
            vectors.set_column(block.start + k, &col);
        }
    }
    Ok(vectors)
}

/// First-order perturbation theory:
///
/// ```text
/// |∂ψ_n⟩ = Σ_{m ∉ block(n)} ⟨ψ_m|dH|ψ_n⟩ / (E_n - E_m) |ψ_m⟩
/// ```
///
/// after gauge-fixing the degenerate blocks. Partners inside the same block
/// never enter the sum, so no denominator vanishes.
pub fn eigenvector_derivatives(
    es: &EigenSystem,
    dh: &DMatrix<f64>,
) -> Result<EigenDerivatives, SpectralError> {
    let d = es.dim();
    assert_eq!(dh.shape(), (d, d), "perturbation dimension mismatch");
    let eigenvectors = gauge_fix(es, dh)?;
    let coupling = eigenvectors.transpose() * dh * &eigenvectors;
    let block_index: Vec<usize> = (0..d).map(|n| es.block_of(n)).collect();

    // coefficients in the eigenbasis, then mapped back to the original basis
    let mut coeffs = DMatrix::zeros(d, d);
    for n in 0..d {
        for m in 0..d {
            if block_index[m] != block_index[n] {
                coeffs[(m, n)] =
                    coupling[(m, n)] / (es.eigenvalues[n] - es.eigenvalues[m]);
            }
        }
    }
    let dvectors = &eigenvectors * coeffs;
    Ok(EigenDerivatives {
        energy_slopes: coupling.diagonal().iter().copied().collect(),
        eigenvectors,
        coupling,
        dvectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::CatalogName;
    use crate::hamiltonian::{build_hamiltonian, field_generator};
    use proptest::prelude::*;

    #[test]
    fn two_level_closed_form() {
        let h = 0.7;
        let m = DMatrix::from_row_slice(2, 2, &[0.0, -h, -h, 0.0]);
        let es = eigh(&m, DEFAULT_TOL_DEG).unwrap();
        assert!((es.eigenvalues[0] + h).abs() < 1e-15);
        assert!((es.eigenvalues[1] - h).abs() < 1e-15);
        assert!(es.reconstruction_error(&m) < 1e-15);
    }

    #[test]
    fn k4_antiferro_zero_field() {
        let h = build_hamiltonian(&CatalogName::K4.graph(), -1.0, 0.0);
        let es = eigh(&h.matrix, DEFAULT_TOL_DEG).unwrap();
        let mut expected = vec![-2.0; 6];
        expected.extend([0.0; 8]);
        expected.extend([6.0; 2]);
        assert_eq!(es.eigenvalues, expected);
        assert_eq!(es.blocks, vec![0..6, 6..14, 14..16]);
    }

    #[test]
    fn blocks_examples() {
        assert_eq!(
            degeneracy_blocks(&[-2.0, -2.0, -2.0, 0.0, 0.0, 6.0], 1e-9),
            vec![0..3, 3..5, 5..6]
        );
        assert_eq!(degeneracy_blocks(&[0.0, 1e-12, 1.0], 1e-9), vec![0..2, 2..3]);
        assert!(degeneracy_blocks(&[], 1e-9).is_empty());
    }

    #[test]
    fn pan_antiferro_ground_block() {
        let h = build_hamiltonian(&CatalogName::Pan.graph(), -1.0, 0.0);
        assert_eq!(eigh(&h.matrix, DEFAULT_TOL_DEG).unwrap().ground_degeneracy(), 6);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            eigh(&DMatrix::zeros(2, 3), 1e-9),
            Err(SpectralError::NotSquare(2, 3))
        ));
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(eigh(&m, 1e-9), Err(SpectralError::NotSymmetric(_))));
    }

    #[test]
    fn deterministic_output() {
        let h = build_hamiltonian(&CatalogName::Sd4.graph(), 1.0, 0.37);
        assert_eq!(eigh(&h.matrix, 1e-9).unwrap(), eigh(&h.matrix, 1e-9).unwrap());
    }

    #[test]
    fn two_level_derivative() {
        let es = eigh(&DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]), 1e-9).unwrap();
        let dh = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let d = eigenvector_derivatives(&es, &dh).unwrap();
        // ⟨ψ_1|dH|ψ_0⟩/(E_0 - E_1) = -1 on ψ_1, and +1 on ψ_0 for the other level
        assert_eq!(d.dvectors.column(0).as_slice(), &[0.0, -1.0]);
        assert_eq!(d.dvectors.column(1).as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn identity_perturbation_has_no_derivative() {
        let h = build_hamiltonian(&CatalogName::Pan.graph(), 1.0, 0.3);
        let es = eigh(&h.matrix, 1e-9).unwrap();
        let d = eigenvector_derivatives(&es, &DMatrix::identity(16, 16)).unwrap();
        assert!(d.dvectors.amax() < 1e-12);
    }

    #[test]
    fn gauge_fixed_blocks_diagonalize_perturbation() {
        let h = build_hamiltonian(&CatalogName::K4.graph(), -1.0, 0.0);
        let es = eigh(&h.matrix, 1e-9).unwrap();
        let v = field_generator(4).matrix;
        let d = eigenvector_derivatives(&es, &v).unwrap();
        for block in &es.blocks {
            for m in block.clone() {
                for n in block.clone() {
                    if m != n {
                        assert!(d.coupling[(m, n)].abs() < 1e-10);
                    }
                }
            }
            let slopes = &d.energy_slopes[block.clone()];
            assert!(slopes.windows(2).all(|w| w[0] <= w[1] + 1e-12));
        }
        for n in 0..16 {
            let overlap = d.eigenvectors.column(n).dot(&d.dvectors.column(n));
            assert!(overlap.abs() < 1e-12);
        }
    }

    /// Central-difference oracle on the block projectors `P_B = Σ_{n∈B} ψ_n ψ_nᵀ`,
    /// which are gauge invariant and so comparable across `h ± δ` even when
    /// the blocks stay degenerate.
    fn projector(vectors: &DMatrix<f64>, block: &Range<usize>) -> DMatrix<f64> {
        let cols = vectors.columns(block.start, block.len());
        cols * cols.transpose()
    }

    #[test]
    fn derivatives_match_projector_finite_differences() {
        let delta = 1e-6;
        let v = field_generator(4).matrix;
        for name in CatalogName::ALL {
            let g = name.graph();
            let es = eigh(&build_hamiltonian(&g, 1.0, 0.3).matrix, 1e-9).unwrap();
            let plus = eigh(&build_hamiltonian(&g, 1.0, 0.3 + delta).matrix, 1e-9).unwrap();
            let minus = eigh(&build_hamiltonian(&g, 1.0, 0.3 - delta).matrix, 1e-9).unwrap();
            let d = eigenvector_derivatives(&es, &v).unwrap();
            for block in &es.blocks {
                let fd = (projector(&plus.eigenvectors, block)
                    - projector(&minus.eigenvectors, block))
                    / (2.0 * delta);
                let cols = d.eigenvectors.columns(block.start, block.len());
                let dcols = d.dvectors.columns(block.start, block.len());
                let analytic = dcols * cols.transpose() + cols * dcols.transpose();
                let err = (fd - analytic).amax();
                assert!(err <= 1e-5, "{name} block {block:?}: {err:e}");
            }
        }
    }

    #[test]
    fn first_order_eigenvalue_error_is_quadratic() {
        let g = CatalogName::Pan.graph();
        let v = field_generator(4).matrix;
        let h0 = 0.3;
        let es = eigh(&build_hamiltonian(&g, 1.0, h0).matrix, 1e-9).unwrap();
        let d = eigenvector_derivatives(&es, &v).unwrap();
        let err = |delta: f64| {
            let shifted = eigh(&build_hamiltonian(&g, 1.0, h0 + delta).matrix, 1e-9).unwrap();
            (0..16)
                .map(|n| {
                    (shifted.eigenvalues[n] - es.eigenvalues[n] - delta * d.energy_slopes[n]).abs()
                })
                .fold(0.0, f64::max)
        };
        let ratio = err(1e-3) / err(5e-4);
        assert!((ratio - 4.0).abs() <= 1.5, "ratio {ratio}");
    }

    fn symmetric_matrix(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
        proptest::collection::vec(-3.0f64..3.0, n * n).prop_map(move |vals| {
            let m = DMatrix::from_vec(n, n, vals);
            (&m + m.transpose()) * 0.5
        })
    }

    proptest! {
        #[test]
        fn decomposition_contract(m in (1usize..9).prop_flat_map(symmetric_matrix)) {
            let es = eigh(&m, 1e-9).unwrap();
            prop_assert!(es.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(es.orthonormality_error() <= 1e-10);
            prop_assert!(es.reconstruction_error(&m) <= 1e-9 * m.amax().max(f64::MIN_POSITIVE));
        }

        #[test]
        fn spectrum_invariant_under_relabeling(
            idx in 0usize..6,
            perm in Just(vec![0usize, 1, 2, 3]).prop_shuffle(),
            h in 0.0f64..1.0,
        ) {
            let g = CatalogName::ALL[idx].graph();
            let a = eigh(&build_hamiltonian(&g, -1.0, h).matrix, 1e-9).unwrap();
            let b = eigh(&build_hamiltonian(&g.relabel(&perm).unwrap(), -1.0, h).matrix, 1e-9).unwrap();
            for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
                prop_assert!((x - y).abs() <= 1e-9);
            }
        }
    }
}
