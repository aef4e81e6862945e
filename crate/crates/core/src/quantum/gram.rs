use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Default tolerance on the smallest eigenvalue of a Gram matrix.
pub const DEFAULT_PSD_TOL: f64 = 1e-9;

/// Eigenvalues below this fraction of the spectral scale are treated as zero
/// when building a realization.
const RANK_TOL: f64 = 1e-13;

const MAX_DIM: usize = 4096;

/// Real symmetric matrix of probe-state inner products.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    entries: DMatrix<f64>,
}

impl GramMatrix {
    /// Wraps a square matrix, checking symmetry and the range of the diagonal.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let n = entries.nrows();
        if n == 0 || n != entries.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "Gram matrix must be square and non-empty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if n > MAX_DIM {
            return Err(Error::DimensionMismatch(format!("Gram dimension {n} too large")));
        }
        let scale = entries.amax().max(1.0);
        for i in 0..n {
            let d = entries[(i, i)];
            if !(-1e-12..=1.0 + 1e-9).contains(&d) {
                return Err(Error::Domain(format!("diagonal entry {i} = {d} outside [0, 1]")));
            }
            for j in 0..i {
                if (entries[(i, j)] - entries[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::Domain(format!("Gram matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("Gram rows of unequal length".into()));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.entries.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    /// Largest entrywise difference to another Gram matrix of the same size.
    pub fn max_abs_diff(&self, other: &GramMatrix) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        (&self.entries - &other.entries).amax()
    }

    fn sorted_eigen(&self) -> (Vec<f64>, DMatrix<f64>) {
        let eig = SymmetricEigen::new(self.entries.clone());
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(self.dim(), self.dim(), |i, c| eig.eigenvectors[(i, order[c])]);
        (values, vectors)
    }
}

/// Smallest eigenvalue of a Gram matrix.
pub fn min_eigenvalue(g: &GramMatrix) -> f64 {
    SymmetricEigen::new(g.entries.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// True iff the smallest eigenvalue of `g` is at least `-tol`.
pub fn is_psd(g: &GramMatrix, tol: f64) -> bool {
    min_eigenvalue(g) >= -tol
}

/// A list of real coordinate vectors living in a common space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSet {
    dim: usize,
    vectors: Vec<DVector<f64>>,
}

impl StateSet {
    pub fn new(dim: usize, vectors: Vec<DVector<f64>>) -> Result<Self> {
        if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} in a {dim}-dimensional state set",
                v.len()
            )));
        }
        Ok(Self { dim, vectors })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[DVector<f64>] {
        &self.vectors
    }

    pub fn vector(&self, k: usize) -> &DVector<f64> {
        &self.vectors[k]
    }

    pub fn into_vectors(self) -> Vec<DVector<f64>> {
        self.vectors
    }

    /// Matrix of pairwise inner products.
    pub fn gram(&self) -> GramMatrix {
        let n = self.count();
        let m = DMatrix::from_fn(n, n, |i, j| self.vectors[i].dot(&self.vectors[j]));
        // Symmetrize exactly so the wrapper's symmetry check never trips on rounding.
        GramMatrix {
            entries: (&m + m.transpose()) * 0.5,
        }
    }

    /// Zero-pads every vector to `dim` coordinates.
    pub fn padded(&self, dim: usize) -> StateSet {
        assert!(dim >= self.dim);
        let vectors = self
            .vectors
            .iter()
            .map(|v| DVector::from_fn(dim, |i, _| if i < self.dim { v[i] } else { 0.0 }))
            .collect();
        StateSet { dim, vectors }
    }
}

/// Builds explicit vectors whose pairwise inner products reproduce `g`.
///
/// The realization uses the eigendecomposition `g = U diag(l) U^T` and keeps
/// only the numerically nonzero eigenvalues, so the coordinate dimension
/// equals the numerical rank. Eigenvalues in `[-tol, 0]` are clipped to zero.
pub fn realize_gram(g: &GramMatrix, tol: f64) -> Result<StateSet> {
    let n = g.dim();
    let (values, vectors) = g.sorted_eigen();
    let lowest = values.last().copied().unwrap_or(0.0);
    if lowest < -tol {
        return Err(Error::Infeasible(format!(
            "Gram matrix is not positive semidefinite (minimum eigenvalue {lowest:e})"
        )));
    }
    let scale = values.first().copied().unwrap_or(0.0).max(1.0);
    let kept: Vec<usize> = (0..n).filter(|&k| values[k] > RANK_TOL * scale).collect();
    let dim = kept.len();
    let mut columns = Vec::with_capacity(dim);
    for &k in &kept {
        let mut col = vectors.column(k).into_owned();
        // Fix the eigenvector sign so the output does not depend on solver internals.
        let pivot = col
            .iter()
            .copied()
            .fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        if pivot < 0.0 {
            col.neg_mut();
        }
        columns.push(col * values[k].sqrt());
    }
    let states = (0..n).map(|i| DVector::from_fn(dim, |r, _| columns[r][i])).collect();
    StateSet::new(dim, states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn optimal_incoherent_gram_quarter() -> GramMatrix {
        // Order (E00, E01, E10, E11) with F = 0.75, D = 0.25, F1 = 0.375, D1 = 0.125.
        GramMatrix::from_rows(&[
            vec![0.75, 0.0, 0.0, 0.375],
            vec![0.0, 0.25, 0.125, 0.0],
            vec![0.0, 0.125, 0.25, 0.0],
            vec![0.375, 0.0, 0.0, 0.75],
        ])
        .unwrap()
    }

    #[test]
    fn psd_checks() {
        assert!(is_psd(&GramMatrix::identity(5), DEFAULT_PSD_TOL));
        let bad = GramMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(!is_psd(&bad, DEFAULT_PSD_TOL));
        assert!((min_eigenvalue(&bad) + 1.0).abs() < 1e-12);
        // Eigenvalues of the two 2x2 blocks: 0.75 +- 0.375 and 0.25 +- 0.125.
        let g = optimal_incoherent_gram_quarter();
        assert!(is_psd(&g, DEFAULT_PSD_TOL));
        assert!((min_eigenvalue(&g) - 0.125).abs() < 1e-12);
    }

    #[test]
    fn rejects_asymmetric_and_nonsquare() {
        assert!(GramMatrix::from_rows(&[vec![1.0, 0.5], vec![0.4, 1.0]]).is_err());
        assert!(GramMatrix::from_rows(&[vec![1.0, 0.5]]).is_err());
        assert!(GramMatrix::from_rows(&[vec![2.0]]).is_err());
    }

    #[test]
    fn realize_identity_and_rank_one() {
        let s = realize_gram(&GramMatrix::identity(2), DEFAULT_PSD_TOL).unwrap();
        assert_eq!(s.dim(), 2);
        assert!(s.vector(0).dot(s.vector(1)).abs() < 1e-15);
        assert!((s.vector(0).norm() - 1.0).abs() < 1e-15);

        let ones = GramMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let s = realize_gram(&ones, DEFAULT_PSD_TOL).unwrap();
        assert_eq!(s.dim(), 1);
        assert!((s.vector(0) - s.vector(1)).norm() < 1e-15);
        assert!((s.vector(0).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn realize_optimal_incoherent_gram() {
        let g = optimal_incoherent_gram_quarter();
        let s = realize_gram(&g, DEFAULT_PSD_TOL).unwrap();
        assert_eq!(s.count(), 4);
        assert!(s.dim() <= 4);
        assert!((s.vector(0).dot(s.vector(3)) - 0.375).abs() < 1e-12);
        assert!(s.gram().max_abs_diff(&g) < 1e-10);
        // Deterministic for identical input.
        assert_eq!(s, realize_gram(&g, DEFAULT_PSD_TOL).unwrap());
    }

    #[test]
    fn realize_rejects_non_psd() {
        let bad = GramMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(matches!(realize_gram(&bad, DEFAULT_PSD_TOL), Err(Error::Infeasible(_))));
    }

    proptest! {
        #[test]
        fn realization_reproduces_gram(
            seed in proptest::collection::vec(-1.0f64..1.0, 24),
            rank in 1usize..=4,
        ) {
            // Six random vectors confined to a `rank`-dimensional subspace.
            let vecs: Vec<DVector<f64>> = (0..6)
                .map(|i| DVector::from_fn(4, |r, _| if r < rank { seed[i * 4 + r] * 0.5 } else { 0.0 }))
                .collect();
            let g = StateSet::new(4, vecs).unwrap().gram();
            prop_assert!(is_psd(&g, DEFAULT_PSD_TOL));
            let s = realize_gram(&g, DEFAULT_PSD_TOL).unwrap();
            prop_assert!(s.dim() <= rank);
            prop_assert!(s.gram().max_abs_diff(&g) < 1e-10);
            prop_assert!(is_psd(&s.gram(), DEFAULT_PSD_TOL));
        }
    }
}
