//! Four equiprobable states forming a square- or rectangular-base pyramid and
//! the cartesian basis that discriminates them optimally.
//!
//! The states are written as `a_i = sum_k M[i][k] e_k` where `M[i][k]` is the
//! coefficient indexed by `i XOR k` in `(a, b, c, d)`. Their overlaps are
//! `<a_0|a_1> = 2(ab+cd)`, `<a_0|a_3> = 2(ad+bc)` and `<a_0|a_2> = 2(ac+bd)`.

use crate::error::{Error, Result};

const RADICAND_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PyramidSolution {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl PyramidSolution {
    /// Coefficients in XOR-index order `(a, b, c, d)`.
    pub fn coefficients(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// Outcome distribution of the cartesian measurement for any one state.
    pub fn probabilities(&self) -> [f64; 4] {
        self.coefficients().map(|x| x * x)
    }

    /// Probability of identifying the state, the squared apex coefficient.
    pub fn success(&self) -> f64 {
        self.a * self.a
    }

    /// The cosines `(2(ab+cd), 2(ad+bc), 2(ac+bd))` this solution realizes.
    pub fn cosines(&self) -> [f64; 3] {
        let PyramidSolution { a, b, c, d } = *self;
        [2.0 * (a * b + c * d), 2.0 * (a * d + b * c), 2.0 * (a * c + b * d)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.probabilities().iter().sum()
    }
}

/// Solves `a^2+b^2+c^2+d^2 = 1`, `2(ab+cd) = k1`, `2(ad+bc) = k2`,
/// `2(ac+bd) = k3` for the solution with the largest apex coefficient `a`.
///
/// The system diagonalizes under the 4-point Hadamard transform: the square
/// roots of `1 +- k1 +- k2 +- k3` (even number of minus signs) are the
/// eigenvalues of the coefficient matrix.
pub fn pyramid_solve(k1: f64, k2: f64, k3: f64) -> Result<PyramidSolution> {
    let radicands = [
        1.0 + k1 + k2 + k3,
        1.0 + k1 - k2 - k3,
        1.0 - k1 + k2 - k3,
        1.0 - k1 - k2 + k3,
    ];
    let mut u = [0.0; 4];
    for (index, (&r, root)) in radicands.iter().zip(u.iter_mut()).enumerate() {
        if r.is_nan() || r < -RADICAND_TOL {
            return Err(Error::Geometry { index, value: r });
        }
        *root = r.max(0.0).sqrt();
    }
    let [u0, u1, u2, u3] = u;
    Ok(PyramidSolution {
        a: 0.25 * (u0 + u1 + u2 + u3),
        b: 0.25 * (u0 + u1 - u2 - u3),
        c: 0.25 * (u0 - u1 - u2 + u3),
        d: 0.25 * (u0 - u1 + u2 - u3),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Matrix4, SymmetricEigen};
    use proptest::prelude::*;

    /// Independent route: the coefficient matrix is the positive square root
    /// of the normalized Gram matrix, computed by eigendecomposition.
    fn sqrt_gram_first_row(k1: f64, k2: f64, k3: f64) -> [f64; 4] {
        let x = [1.0, k1, k3, k2]; // overlap by XOR index
        let g = Matrix4::from_fn(|i, j| x[i ^ j]);
        let eig = SymmetricEigen::new(g);
        let root = eig.eigenvectors
            * Matrix4::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()))
            * eig.eigenvectors.transpose();
        [root[(0, 0)], root[(0, 1)], root[(0, 2)], root[(0, 3)]]
    }

    #[test]
    fn orthogonal_and_identical_limits() {
        let s = pyramid_solve(0.0, 0.0, 0.0).unwrap();
        assert_eq!(s.coefficients(), [1.0, 0.0, 0.0, 0.0]);
        let s = pyramid_solve(1.0, 1.0, 1.0).unwrap();
        assert_eq!(s.coefficients(), [0.5; 4]);
        assert_eq!(s.success(), 0.25);
    }

    #[test]
    fn product_attack_set_at_quarter_disturbance() {
        let s = pyramid_solve(0.5, 0.25, 0.5).unwrap();
        let r3 = 3f64.sqrt();
        assert!((s.a - (2.0 + r3) / 4.0).abs() < 1e-15);
        assert!((s.a - 0.93301).abs() < 1e-5);
        assert!((s.b - 0.25).abs() < 1e-15);
        assert!((s.c - 0.25).abs() < 1e-15);
        assert!((s.d - (2.0 - r3) / 4.0).abs() < 1e-15);
        let k = s.cosines();
        assert!((k[0] - 0.5).abs() < 1e-15 && (k[1] - 0.25).abs() < 1e-15 && (k[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn infeasible_geometry_is_rejected() {
        // 1 - k1 - k2 + k3 < 0.
        assert!(matches!(
            pyramid_solve(0.9, 0.9, 0.0),
            Err(Error::Geometry { index: 3, .. })
        ));
        assert!(pyramid_solve(f64::NAN, 0.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn matches_matrix_square_root(l in proptest::array::uniform4(0.0f64..1.0)) {
            // Draw Hadamard-domain eigenvalues, then map to cosines so the triple is feasible.
            let sum: f64 = l.iter().sum::<f64>().max(1e-9);
            let r = l.map(|x| 4.0 * x / sum);
            let k1 = (r[0] + r[1] - r[2] - r[3]) / 4.0;
            let k2 = (r[0] - r[1] + r[2] - r[3]) / 4.0;
            let k3 = (r[0] - r[1] - r[2] + r[3]) / 4.0;
            let s = pyramid_solve(k1, k2, k3).unwrap();
            let row = sqrt_gram_first_row(k1, k2, k3);
            // row is indexed by XOR: (a, b, c, d).
            for (x, y) in s.coefficients().iter().zip(row.iter()) {
                prop_assert!((x - y).abs() < 1e-9);
            }
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }
}
