//! Dense LU fallback and test oracles.
//!
//! Assembles the matrix of a [`LinOp`] column by column and solves with a
//! partial-pivoting LU. Only sensible for the small systems it is meant
//! for (curl-curl at n <= 12, elliptic oracle grids).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::LinOp;
use crate::error::{Error, Result};

type C = Complex64;

/// Assemble the dense matrix of `op` by applying it to unit vectors.
pub fn assemble(op: &dyn LinOp) -> DMatrix<C> {
    let n = op.len();
    let mut a = DMatrix::zeros(n, n);
    let mut e = vec![C::default(); n];
    let mut col = vec![C::default(); n];
    for j in 0..n {
        e[j] = C::new(1.0, 0.0);
        op.apply(&e, &mut col);
        for (i, v) in col.iter().enumerate() {
            a[(i, j)] = *v;
        }
        e[j] = C::default();
    }
    a
}

/// Direct solve via dense LU.
pub fn solve(op: &dyn LinOp, b: &[C]) -> Result<Vec<C>> {
    let a = assemble(op);
    let lu = a.lu();
    let rhs = DVector::from_column_slice(b);
    let x = lu
        .solve(&rhs)
        .ok_or(Error::NoConvergence { solver: "dense-lu", residual: f64::NAN, iterations: 0 })?;
    Ok(x.as_slice().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Diag(Vec<C>);
    impl LinOp for Diag {
        fn len(&self) -> usize {
            self.0.len()
        }
        fn apply(&self, x: &[C], y: &mut [C]) {
            for ((yi, xi), d) in y.iter_mut().zip(x).zip(&self.0) {
                *yi = d * xi;
            }
        }
    }

    #[test]
    fn dense_solve_inverts_diagonal() {
        let d: Vec<C> = (1..=5).map(|i| C::new(i as f64, 0.5)).collect();
        let op = Diag(d.clone());
        let b = vec![C::new(1.0, 0.0); 5];
        let x = solve(&op, &b).unwrap();
        for (xi, di) in x.iter().zip(&d) {
            assert!((xi * di - C::new(1.0, 0.0)).norm() < 1e-14);
        }
    }
}
