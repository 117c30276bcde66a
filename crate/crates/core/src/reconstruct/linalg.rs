//! Small complex matrix helpers for the transport systems.

use nalgebra::{Matrix3, SMatrix};
use num_complex::Complex64;

use crate::error::{Error, Result};

type C = Complex64;

pub type Mat3x6 = SMatrix<C, 3, 6>;
pub type Mat6x3 = SMatrix<C, 6, 3>;
pub type Mat3 = Matrix3<C>;

/// Smallest singular value of a 3x6 matrix via the Hermitian eigenvalues
/// of M M^H.
pub fn sigma_min_3x6(m: &Mat3x6) -> f64 {
    let mmh = m * m.adjoint();
    let eig = mmh.symmetric_eigenvalues();
    eig.iter().fold(f64::INFINITY, |a, b| a.min(b.max(0.0))).sqrt()
}

/// Moore-Penrose right inverse M^+ = M^H (M M^H)^-1; caller guards
/// sigma_min beforehand.
pub fn right_inverse_3x6(m: &Mat3x6, s_lin: f64) -> Result<Mat6x3> {
    let smin = sigma_min_3x6(m);
    if !(smin > s_lin) {
        return Err(Error::RankDeficient(0, 0, 0, smin));
    }
    let mmh = m * m.adjoint();
    let inv = mmh
        .try_inverse()
        .ok_or(Error::RankDeficient(0, 0, 0, smin))?;
    Ok(m.adjoint() * inv)
}

/// The 3x6 cross-product matrix [G1 x e1, G1 x e2, ..., G3 x e1, G3 x e2]
/// whose rank-three property underpins the first magnetic method.
pub fn cross_product_matrix(g: &[[C; 3]; 3]) -> Mat3x6 {
    let mut m = Mat3x6::zeros();
    for (i, gi) in g.iter().enumerate() {
        // a x e1 = (0, a3, -a2); a x e2 = (-a3, 0, a1)
        let c1 = [C::default(), gi[2], -gi[1]];
        let c2 = [-gi[2], C::default(), gi[0]];
        for row in 0..3 {
            m[(row, 2 * i)] = c1[row];
            m[(row, 2 * i + 1)] = c2[row];
        }
    }
    m
}

pub fn det3(m: &Mat3) -> C {
    m.determinant()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn basis_triple() -> [[C; 3]; 3] {
        let mut g = [[C::default(); 3]; 3];
        for (i, gi) in g.iter_mut().enumerate() {
            gi[i] = C::new(1.0, 0.0);
        }
        g
    }

    #[test]
    fn basis_cross_matrix_has_expected_columns_and_rank() {
        let m = cross_product_matrix(&basis_triple());
        // columns: 0, e3, -e3, 0, e2, -e1
        let e = |a: usize| {
            let mut v = [C::default(); 3];
            v[a] = C::new(1.0, 0.0);
            v
        };
        let want: [[C; 3]; 6] = [
            [C::default(); 3],
            e(2),
            [-e(2)[0], -e(2)[1], -e(2)[2]],
            [C::default(); 3],
            e(1),
            [-e(0)[0], -e(0)[1], -e(0)[2]],
        ];
        for (col, w) in want.iter().enumerate() {
            for row in 0..3 {
                assert_eq!(m[(row, col)], w[row], "column {col} row {row}");
            }
        }
        assert!(sigma_min_3x6(&m) > 0.5);
        let pinv = right_inverse_3x6(&m, 1e-6).unwrap();
        let eye = m * pinv;
        let mut err: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { C::new(1.0, 0.0) } else { C::default() };
                err = err.max((eye[(i, j)] - want).norm());
            }
        }
        assert!(err <= 1e-12, "||M M+ - I|| = {err}");
    }

    #[test]
    fn degenerate_directions_are_rank_deficient() {
        // all parallel: the columns span at most two directions
        let g1 = [C::new(1.0, 0.5), C::new(-0.2, 0.0), C::new(0.3, 0.1)];
        let m = cross_product_matrix(&[g1, g1, g1]);
        assert!(sigma_min_3x6(&m) < 1e-12);
        assert!(right_inverse_3x6(&m, 1e-6).is_err());

        // duplicated pair inside a plane whose normal has no first
        // component; note mere linear dependence does not force
        // deficiency (independence is sufficient, not necessary)
        let ga = [C::new(1.0, 0.0), C::new(2.0, 0.0), C::default()];
        let gb = [C::default(), C::new(3.0, 0.0), C::default()];
        let m = cross_product_matrix(&[ga, ga, gb]);
        assert!(sigma_min_3x6(&m) < 1e-12);
        assert!(right_inverse_3x6(&m, 1e-6).is_err());

        // planar real triple (e1, e2, e1 + e2): every column is a
        // multiple of e3
        let e1 = [C::new(1.0, 0.0), C::default(), C::default()];
        let e2 = [C::default(), C::new(1.0, 0.0), C::default()];
        let e12 = [C::new(1.0, 0.0), C::new(1.0, 0.0), C::default()];
        let m = cross_product_matrix(&[e1, e2, e12]);
        assert!(sigma_min_3x6(&m) < 1e-12);
    }

    #[test]
    fn random_independent_triples_satisfy_right_inverse_contract() {
        // the acceptance-grade version runs 200 samples; this is the
        // module-level smoke version
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        let mut checked = 0;
        while checked < 50 {
            let mut g = [[C::default(); 3]; 3];
            for gi in g.iter_mut() {
                for v in gi.iter_mut() {
                    *v = C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                }
            }
            let m = cross_product_matrix(&g);
            let smin = sigma_min_3x6(&m);
            let smax = {
                let mmh = m * m.adjoint();
                mmh.symmetric_eigenvalues()
                    .iter()
                    .fold(0.0f64, |a, b| a.max(*b))
                    .sqrt()
            };
            if smin <= 1e-12 || smax / smin > 1e3 {
                continue; // resample dependent or ill-conditioned triples
            }
            checked += 1;
            let pinv = right_inverse_3x6(&m, 1e-9).unwrap();
            let eye = m * pinv;
            let mut err: f64 = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    let want = if i == j { C::new(1.0, 0.0) } else { C::default() };
                    err = err.max((eye[(i, j)] - want).norm());
                }
            }
            assert!(err <= crate::tol::RIGHT_INV_RANDOM, "||M M+ - I|| = {err}");
        }
    }

    #[test]
    fn sigma_min_matches_svd_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let mut m = Mat3x6::zeros();
            for v in m.iter_mut() {
                *v = C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
            let ours = sigma_min_3x6(&m);
            let svd = m.svd(false, false);
            let oracle = svd.singular_values.iter().fold(f64::INFINITY, |a, b| a.min(*b));
            assert!(
                (ours - oracle).abs() <= 1e-9 * oracle.max(1.0),
                "{ours} vs {oracle}"
            );
        }
    }
}
