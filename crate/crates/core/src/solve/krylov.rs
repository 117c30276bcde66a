//! Preconditioned Krylov methods: CG for Hermitian positive definite
//! systems, BiCGStab and restarted GMRES for general complex ones.

use num_complex::Complex64;

use super::{axpy, dot, norm, LinOp, SolveStats};
use crate::error::{Error, Result};

type C = Complex64;

const BREAKDOWN: f64 = 1e-290;

fn apply_precond(dinv: Option<&[C]>, r: &[C], out: &mut [C]) {
    match dinv {
        Some(d) => {
            for ((o, ri), di) in out.iter_mut().zip(r).zip(d) {
                *o = ri * di;
            }
        }
        None => out.copy_from_slice(r),
    }
}

/// Conjugate gradients for a Hermitian positive definite operator.
pub fn cg(
    op: &dyn LinOp,
    b: &[C],
    x: &mut [C],
    dinv: Option<&[C]>,
    tol_rel: f64,
    max_iter: usize,
) -> Result<SolveStats> {
    let n = op.len();
    assert_eq!(b.len(), n);
    assert_eq!(x.len(), n);
    let bnorm = norm(b).max(f64::MIN_POSITIVE);

    let mut r = vec![C::default(); n];
    let mut z = vec![C::default(); n];
    let mut q = vec![C::default(); n];
    op.apply(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    apply_precond(dinv, &r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut history = Vec::new();
    let mut res = norm(&r) / bnorm;
    history.push(res);
    if res <= tol_rel {
        return Ok(SolveStats { iterations: 0, relative_residual: res, converged: true, history });
    }

    for it in 1..=max_iter {
        op.apply(&p, &mut q);
        let pq = dot(&p, &q);
        if pq.norm() < BREAKDOWN {
            return Err(Error::NoConvergence { solver: "cg", residual: res, iterations: it });
        }
        let alpha = rz / pq;
        axpy(alpha, &p, x);
        axpy(-alpha, &q, &mut r);
        res = norm(&r) / bnorm;
        history.push(res);
        if res <= tol_rel {
            return Ok(SolveStats {
                iterations: it,
                relative_residual: res,
                converged: true,
                history,
            });
        }
        apply_precond(dinv, &r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    Err(Error::NoConvergence { solver: "cg", residual: res, iterations: max_iter })
}

/// Right-preconditioned BiCGStab.
pub fn bicgstab(
    op: &dyn LinOp,
    b: &[C],
    x: &mut [C],
    dinv: Option<&[C]>,
    tol_rel: f64,
    max_iter: usize,
) -> Result<SolveStats> {
    let n = op.len();
    let bnorm = norm(b).max(f64::MIN_POSITIVE);

    let mut r = vec![C::default(); n];
    op.apply(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let r_shadow = r.clone();
    let mut rho = C::new(1.0, 0.0);
    let mut alpha = C::new(1.0, 0.0);
    let mut omega = C::new(1.0, 0.0);
    let mut p = vec![C::default(); n];
    let mut v = vec![C::default(); n];
    let mut phat = vec![C::default(); n];
    let mut shat = vec![C::default(); n];
    let mut t = vec![C::default(); n];

    let mut history = Vec::new();
    let mut res = norm(&r) / bnorm;
    history.push(res);
    if res <= tol_rel {
        return Ok(SolveStats { iterations: 0, relative_residual: res, converged: true, history });
    }

    for it in 1..=max_iter {
        let rho_new = dot(&r_shadow, &r);
        if rho_new.norm() < BREAKDOWN {
            return Err(Error::NoConvergence { solver: "bicgstab", residual: res, iterations: it });
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for ((pi, ri), vi) in p.iter_mut().zip(&r).zip(&v) {
            *pi = ri + beta * (*pi - omega * vi);
        }
        apply_precond(dinv, &p, &mut phat);
        op.apply(&phat, &mut v);
        let denom = dot(&r_shadow, &v);
        if denom.norm() < BREAKDOWN {
            return Err(Error::NoConvergence { solver: "bicgstab", residual: res, iterations: it });
        }
        alpha = rho / denom;
        // s = r - alpha v (reuse r)
        axpy(-alpha, &v, &mut r);
        let snorm = norm(&r) / bnorm;
        if snorm <= tol_rel {
            axpy(alpha, &phat, x);
            history.push(snorm);
            return Ok(SolveStats {
                iterations: it,
                relative_residual: snorm,
                converged: true,
                history,
            });
        }
        apply_precond(dinv, &r, &mut shat);
        op.apply(&shat, &mut t);
        let tt = dot(&t, &t);
        if tt.norm() < BREAKDOWN {
            return Err(Error::NoConvergence { solver: "bicgstab", residual: snorm, iterations: it });
        }
        omega = dot(&t, &r) / tt;
        axpy(alpha, &phat, x);
        axpy(omega, &shat, x);
        // r = s - omega t
        axpy(-omega, &t, &mut r);
        res = norm(&r) / bnorm;
        history.push(res);
        if res <= tol_rel {
            return Ok(SolveStats {
                iterations: it,
                relative_residual: res,
                converged: true,
                history,
            });
        }
        if omega.norm() < BREAKDOWN {
            return Err(Error::NoConvergence { solver: "bicgstab", residual: res, iterations: it });
        }
    }
    Err(Error::NoConvergence { solver: "bicgstab", residual: res, iterations: max_iter })
}

/// Right-preconditioned GMRES with restart.
pub fn gmres(
    op: &dyn LinOp,
    b: &[C],
    x: &mut [C],
    dinv: Option<&[C]>,
    tol_rel: f64,
    restart: usize,
    max_iter: usize,
) -> Result<SolveStats> {
    let n = op.len();
    let bnorm = norm(b).max(f64::MIN_POSITIVE);
    let m = restart.min(n).max(1);
    let mut history = Vec::new();
    let mut total_iters = 0usize;
    let mut work = vec![C::default(); n];

    loop {
        // residual for the current iterate
        op.apply(x, &mut work);
        let mut r = vec![C::default(); n];
        for ((ri, bi), wi) in r.iter_mut().zip(b).zip(&work) {
            *ri = bi - wi;
        }
        let beta = norm(&r);
        let res0 = beta / bnorm;
        history.push(res0);
        if res0 <= tol_rel {
            return Ok(SolveStats {
                iterations: total_iters,
                relative_residual: res0,
                converged: true,
                history,
            });
        }
        if total_iters >= max_iter {
            return Err(Error::NoConvergence {
                solver: "gmres",
                residual: res0,
                iterations: total_iters,
            });
        }

        // Arnoldi with modified Gram-Schmidt and Givens rotations
        let mut basis: Vec<Vec<C>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|v| v / beta).collect());
        let mut h: Vec<Vec<C>> = Vec::new(); // column j holds H[0..=j+1, j]
        let mut cs: Vec<C> = Vec::new();
        let mut sn: Vec<C> = Vec::new();
        let mut g = vec![C::default(); m + 1];
        g[0] = C::new(beta, 0.0);
        let mut k_used = 0;

        for j in 0..m {
            total_iters += 1;
            apply_precond(dinv, &basis[j], &mut work);
            let mut w = vec![C::default(); n];
            op.apply(&work, &mut w);
            let mut hj = vec![C::default(); j + 2];
            for (i, vi) in basis.iter().enumerate() {
                hj[i] = dot(vi, &w);
                axpy(-hj[i], vi, &mut w);
            }
            let wnorm = norm(&w);
            hj[j + 1] = C::new(wnorm, 0.0);

            // apply accumulated rotations
            for i in 0..j {
                let tmp = cs[i].conj() * hj[i] + sn[i].conj() * hj[i + 1];
                hj[i + 1] = -sn[i] * hj[i] + cs[i] * hj[i + 1];
                hj[i] = tmp;
            }
            let denom = (hj[j].norm_sqr() + hj[j + 1].norm_sqr()).sqrt();
            let (c, s) = if denom < BREAKDOWN {
                (C::new(1.0, 0.0), C::new(0.0, 0.0))
            } else {
                (hj[j] / denom, hj[j + 1] / denom)
            };
            cs.push(c);
            sn.push(s);
            hj[j] = c.conj() * hj[j] + s.conj() * hj[j + 1];
            hj[j + 1] = C::default();
            let tmp = c.conj() * g[j];
            g[j + 1] = -s * g[j];
            g[j] = tmp;
            h.push(hj);
            k_used = j + 1;

            let res = g[j + 1].norm() / bnorm;
            history.push(res);
            let lucky = wnorm < BREAKDOWN;
            if !lucky {
                basis.push(w.iter().map(|v| v / wnorm).collect());
            }
            if res <= tol_rel || lucky || total_iters >= max_iter {
                break;
            }
        }

        // back-substitute y and update x += M^-1 (V y)
        let mut y = vec![C::default(); k_used];
        for i in (0..k_used).rev() {
            let mut sum = g[i];
            for j in (i + 1)..k_used {
                sum -= h[j][i] * y[j];
            }
            y[i] = sum / h[i][i];
        }
        let mut update = vec![C::default(); n];
        for (j, yj) in y.iter().enumerate() {
            axpy(*yj, &basis[j], &mut update);
        }
        apply_precond(dinv, &update, &mut work);
        for (xi, wi) in x.iter_mut().zip(&work) {
            *xi += wi;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    struct DenseOp(Vec<Vec<C>>);

    impl LinOp for DenseOp {
        fn len(&self) -> usize {
            self.0.len()
        }
        fn apply(&self, x: &[C], y: &mut [C]) {
            for (yi, row) in y.iter_mut().zip(&self.0) {
                *yi = row.iter().zip(x).map(|(a, b)| a * b).sum();
            }
        }
    }

    fn spd_system(n: usize, seed: u64) -> (DenseOp, Vec<C>) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        // A = B^H B + n I, Hermitian positive definite
        let b: Vec<Vec<C>> = (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect()
            })
            .collect();
        let mut a = vec![vec![C::default(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = C::default();
                for (k, row) in b.iter().enumerate() {
                    s += row[i].conj() * b[k][j];
                }
                a[i][j] = s;
            }
            a[i][i] += C::new(n as f64, 0.0);
        }
        let rhs: Vec<C> = (0..n)
            .map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        (DenseOp(a), rhs)
    }

    fn check_residual(op: &dyn LinOp, x: &[C], b: &[C], tol: f64) {
        let mut ax = vec![C::default(); b.len()];
        op.apply(x, &mut ax);
        let r: f64 = ax
            .iter()
            .zip(b)
            .map(|(a, bi)| (a - bi).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(r / norm(b) <= tol * 10.0, "residual {r} too large");
    }

    #[test]
    fn cg_solves_hermitian_system() {
        let (op, b) = spd_system(40, 1);
        let mut x = vec![C::default(); 40];
        let stats = cg(&op, &b, &mut x, None, 1e-12, 500).unwrap();
        assert!(stats.converged);
        check_residual(&op, &x, &b, 1e-12);
    }

    #[test]
    fn cg_is_insensitive_to_initial_guess() {
        let (op, b) = spd_system(30, 2);
        let mut x0 = vec![C::default(); 30];
        cg(&op, &b, &mut x0, None, 1e-13, 500).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let mut x1: Vec<C> = (0..30)
            .map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        cg(&op, &b, &mut x1, None, 1e-13, 500).unwrap();
        let diff: f64 = x0.iter().zip(&x1).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(diff <= 1e-10 * norm(&x0).max(1.0));
    }

    #[test]
    fn bicgstab_and_gmres_solve_nonsymmetric_system() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 50;
        let mut a = vec![vec![C::default(); n]; n];
        for (i, row) in a.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = C::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
                if i == j {
                    *v += C::new(4.0, 2.0);
                }
            }
        }
        let dinv: Vec<C> = (0..n).map(|i| C::new(1.0, 0.0) / a[i][i]).collect();
        let op = DenseOp(a);
        let b: Vec<C> = (0..n)
            .map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();

        let mut x = vec![C::default(); n];
        let s = bicgstab(&op, &b, &mut x, Some(&dinv), 1e-10, 500).unwrap();
        assert!(s.converged);
        check_residual(&op, &x, &b, 1e-10);

        let mut xg = vec![C::default(); n];
        let s = gmres(&op, &b, &mut xg, Some(&dinv), 1e-10, 30, 600).unwrap();
        assert!(s.converged);
        check_residual(&op, &xg, &b, 1e-10);
    }

    #[test]
    fn nonconvergence_reports_history() {
        // an indefinite system BiCGStab cannot crack in 3 iterations
        let (op, b) = spd_system(40, 4);
        let mut x = vec![C::default(); 40];
        let err = bicgstab(&op, &b, &mut x, None, 1e-14, 3).unwrap_err();
        match err {
            Error::NoConvergence { iterations, .. } => assert_eq!(iterations, 3),
            other => panic!("unexpected error {other:?}"),
        }
    }
}
