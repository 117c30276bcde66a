//! Linear solver kernels used by the forward problems.
//!
//! Systems are exposed matrix-free through [`LinOp`]; the Krylov methods
//! take an optional inverse-diagonal (Jacobi) preconditioner. All solvers
//! are deterministic for fixed inputs.

pub mod dense;
pub mod krylov;

use num_complex::Complex64;

type C = Complex64;

/// A square linear operator applied matrix-free.
pub trait LinOp {
    fn len(&self) -> usize;
    /// y := A x
    fn apply(&self, x: &[C], y: &mut [C]);
}

/// Outcome of an iterative solve.
#[derive(Debug, Clone)]
pub struct SolveStats {
    pub iterations: usize,
    /// Final residual norm relative to the right-hand side.
    pub relative_residual: f64,
    pub converged: bool,
    /// Relative residual after each iteration, for diagnostics.
    pub history: Vec<f64>,
}

pub(crate) fn dot(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(a: &[C]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn axpy(alpha: C, x: &[C], y: &mut [C]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
