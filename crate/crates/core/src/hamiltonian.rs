//! Dense transverse-field Ising Hamiltonians on a graph.
//!
//! ```text
//! H = -J Σ_{(i,j) ∈ E} σ^z_i σ^z_j - h Σ_i σ^x_i
//! ```
//!
//! Basis index `b` has bit `i` giving spin `i`: bit 0 is `s_i = +1`, bit 1 is
//! `s_i = -1`. Every matrix element is real in this basis, so matrices are
//! stored as real symmetric `DMatrix<f64>`.

use nalgebra::DMatrix;

use crate::graph::{classical_energy, Graph};

#[derive(Debug, Clone, PartialEq)]
pub struct SpinHamiltonian {
    pub matrix: DMatrix<f64>,
    pub coupling: f64,
    pub field: f64,
    pub graph: Graph,
}

impl SpinHamiltonian {
    pub fn n_qubits(&self) -> usize {
        self.graph.n_vertices()
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// `∂H/∂h = -Σ_i σ^x_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGenerator {
    pub matrix: DMatrix<f64>,
}

pub fn build_hamiltonian(graph: &Graph, coupling: f64, field: f64) -> SpinHamiltonian {
    let n = graph.n_vertices();
    let dim = 1usize << n;
    let mut matrix = DMatrix::zeros(dim, dim);
    for b in 0..dim {
        matrix[(b, b)] = classical_energy(graph, coupling, b);
        for i in 0..n {
            matrix[(b, b ^ (1 << i))] = -field;
        }
    }
    SpinHamiltonian {
        matrix,
        coupling,
        field,
        graph: graph.clone(),
    }
}

pub fn field_generator(n_qubits: usize) -> FieldGenerator {
    assert!(n_qubits >= 1, "field generator needs at least one qubit");
    let dim = 1usize << n_qubits;
    let mut matrix = DMatrix::zeros(dim, dim);
    for b in 0..dim {
        for i in 0..n_qubits {
            matrix[(b, b ^ (1 << i))] = -1.0;
        }
    }
    FieldGenerator { matrix }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::CatalogName;
    use proptest::prelude::*;

    fn sorted_diagonal(m: &DMatrix<f64>) -> Vec<f64> {
        let mut d: Vec<f64> = m.diagonal().iter().copied().collect();
        d.sort_by(f64::total_cmp);
        d
    }

    #[test]
    fn k4_zero_field_diagonal() {
        let h = build_hamiltonian(&CatalogName::K4.graph(), -1.0, 0.0);
        // Σ_{i<j} s_i s_j = (M² - 4)/2 with M = Σ s_i, enumerated by hand:
        // M = ±4 -> 6 (2 configs), M = ±2 -> 0 (8), M = 0 -> -2 (6)
        let mut expected = vec![-2.0; 6];
        expected.extend([0.0; 8]);
        expected.extend([6.0; 2]);
        assert_eq!(sorted_diagonal(&h.matrix), expected);
    }

    #[test]
    fn zero_field_is_diagonal() {
        for j in [-1.0, 1.0, 0.3] {
            let h = build_hamiltonian(&CatalogName::P4.graph(), j, 0.0);
            for r in 0..16 {
                for c in 0..16 {
                    if r != c {
                        assert_eq!(h.matrix[(r, c)], 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn single_vertex() {
        let g = Graph::new(1, &[]).unwrap();
        let h = build_hamiltonian(&g, 1.0, 0.5);
        assert_eq!(h.matrix, DMatrix::from_row_slice(2, 2, &[0.0, -0.5, -0.5, 0.0]));
    }

    #[test]
    fn generator_small_cases() {
        assert_eq!(
            field_generator(1).matrix,
            DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0])
        );
        let g2 = field_generator(2).matrix;
        for r in 0..4 {
            for c in 0..4 {
                let hamming1 = matches!((r.min(c), r.max(c)), (0, 1) | (0, 2) | (1, 3) | (2, 3));
                assert_eq!(g2[(r, c)], if hamming1 { -1.0 } else { 0.0 }, "({r},{c})");
            }
        }
    }

    proptest! {
        #[test]
        fn affine_in_field(idx in 0usize..6, ferro in any::<bool>(), h in -2.0f64..2.0, delta in -1.0f64..1.0) {
            let g = CatalogName::ALL[idx].graph();
            let j = if ferro { 1.0 } else { -1.0 };
            let base = build_hamiltonian(&g, j, 0.0).matrix;
            let gen = field_generator(4).matrix;
            let at_h = build_hamiltonian(&g, j, h).matrix;
            prop_assert_eq!(&at_h, &(&base + &gen * h));
            let shifted = build_hamiltonian(&g, j, h + delta).matrix;
            let diff = &shifted - &at_h;
            let expected = &gen * ((h + delta) - h);
            prop_assert!((diff - expected).amax() <= 1e-15);
        }

        #[test]
        fn symmetric_and_traceless(idx in 0usize..6, j in -2.0f64..2.0, h in -2.0f64..2.0) {
            let m = build_hamiltonian(&CatalogName::ALL[idx].graph(), j, h).matrix;
            prop_assert!((&m - m.transpose()).amax() <= 1e-12);
            prop_assert!(m.trace().abs() <= 1e-12);
        }
    }
}
