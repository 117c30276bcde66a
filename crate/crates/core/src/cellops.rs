//! Centered second-order derivative stencils for cell-centered data.
//!
//! All stencils are compact (reach one cell in each direction) and are
//! evaluated on the interior band only; entries outside the band are left
//! at zero. Pure and mixed second derivatives use the standard 3-point and
//! 4-point cross stencils, so first derivatives are exact on per-axis
//! quadratics and second derivatives on per-axis cubics.

use ndarray::Array3;
use num_complex::Complex64;

use crate::error::Result;
use crate::field::{Layout, ScalarField, ScalarLoc, VectorField};
use crate::grid::Grid;

type C = Complex64;

/// Stencil reach of every operator in this module, in cells.
pub const STENCIL_DEPTH: usize = 1;

fn band(grid: &Grid) -> Result<std::ops::Range<usize>> {
    grid.band_range(STENCIL_DEPTH)
}

fn d1(a: &Array3<C>, i: usize, j: usize, k: usize, axis: usize, ih2: f64) -> C {
    match axis {
        0 => (a[[i + 1, j, k]] - a[[i - 1, j, k]]) * ih2,
        1 => (a[[i, j + 1, k]] - a[[i, j - 1, k]]) * ih2,
        _ => (a[[i, j, k + 1]] - a[[i, j, k - 1]]) * ih2,
    }
}

fn d2(a: &Array3<C>, i: usize, j: usize, k: usize, axis: usize, ihh: f64) -> C {
    let c = a[[i, j, k]] * 2.0;
    match axis {
        0 => (a[[i + 1, j, k]] - c + a[[i - 1, j, k]]) * ihh,
        1 => (a[[i, j + 1, k]] - c + a[[i, j - 1, k]]) * ihh,
        _ => (a[[i, j, k + 1]] - c + a[[i, j, k - 1]]) * ihh,
    }
}

fn offset(i: usize, j: usize, k: usize, axis: usize, step: isize) -> [usize; 3] {
    let mut p = [i as isize, j as isize, k as isize];
    p[axis] += step;
    [p[0] as usize, p[1] as usize, p[2] as usize]
}

fn dmixed(
    a: &Array3<C>,
    i: usize,
    j: usize,
    k: usize,
    ax: usize,
    bx: usize,
    ihh4: f64,
) -> C {
    let pp = {
        let p = offset(i, j, k, ax, 1);
        offset(p[0], p[1], p[2], bx, 1)
    };
    let pm = {
        let p = offset(i, j, k, ax, 1);
        offset(p[0], p[1], p[2], bx, -1)
    };
    let mp = {
        let p = offset(i, j, k, ax, -1);
        offset(p[0], p[1], p[2], bx, 1)
    };
    let mm = {
        let p = offset(i, j, k, ax, -1);
        offset(p[0], p[1], p[2], bx, -1)
    };
    (a[pp] - a[pm] - a[mp] + a[mm]) * ihh4
}

/// Gradient of a cell scalar, on the band.
pub fn grad_scalar(f: &ScalarField) -> Result<VectorField> {
    if f.loc != ScalarLoc::Cell {
        return Err(crate::error::Error::LayoutMismatch {
            expected: "Cell".into(),
            got: format!("{:?}", f.loc),
        });
    }
    let g = f.grid;
    let r = band(&g)?;
    let ih2 = 1.0 / (2.0 * g.h());
    let mut out = VectorField::zeros(g, Layout::Cell);
    for i in r.clone() {
        for j in r.clone() {
            for k in r.clone() {
                out.x[[i, j, k]] = d1(&f.data, i, j, k, 0, ih2);
                out.y[[i, j, k]] = d1(&f.data, i, j, k, 1, ih2);
                out.z[[i, j, k]] = d1(&f.data, i, j, k, 2, ih2);
            }
        }
    }
    Ok(out)
}

/// Jacobian entries J[j][k] = d(u_j)/d(x_k) of a cell vector field.
pub fn jacobian(u: &VectorField) -> Result<[[Array3<C>; 3]; 3]> {
    u.expect_layout(Layout::Cell)?;
    let g = u.grid;
    let r = band(&g)?;
    let ih2 = 1.0 / (2.0 * g.h());
    let dims = g.cell_dims();
    let mut out: [[Array3<C>; 3]; 3] =
        std::array::from_fn(|_| std::array::from_fn(|_| Array3::zeros(dims)));
    for (row, comp) in [&u.x, &u.y, &u.z].into_iter().enumerate() {
        for col in 0..3 {
            let dst = &mut out[row][col];
            for i in r.clone() {
                for j in r.clone() {
                    for k in r.clone() {
                        dst[[i, j, k]] = d1(comp, i, j, k, col, ih2);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Divergence of a cell vector field, on the band.
pub fn div(u: &VectorField) -> Result<ScalarField> {
    u.expect_layout(Layout::Cell)?;
    let g = u.grid;
    let r = band(&g)?;
    let ih2 = 1.0 / (2.0 * g.h());
    let mut out = ScalarField::zeros(g, ScalarLoc::Cell);
    for i in r.clone() {
        for j in r.clone() {
            for k in r.clone() {
                out.data[[i, j, k]] = d1(&u.x, i, j, k, 0, ih2)
                    + d1(&u.y, i, j, k, 1, ih2)
                    + d1(&u.z, i, j, k, 2, ih2);
            }
        }
    }
    Ok(out)
}

/// Curl of a cell vector field, on the band.
pub fn curl(u: &VectorField) -> Result<VectorField> {
    u.expect_layout(Layout::Cell)?;
    let g = u.grid;
    let r = band(&g)?;
    let ih2 = 1.0 / (2.0 * g.h());
    let mut out = VectorField::zeros(g, Layout::Cell);
    for i in r.clone() {
        for j in r.clone() {
            for k in r.clone() {
                out.x[[i, j, k]] = d1(&u.z, i, j, k, 1, ih2) - d1(&u.y, i, j, k, 2, ih2);
                out.y[[i, j, k]] = d1(&u.x, i, j, k, 2, ih2) - d1(&u.z, i, j, k, 0, ih2);
                out.z[[i, j, k]] = d1(&u.y, i, j, k, 0, ih2) - d1(&u.x, i, j, k, 1, ih2);
            }
        }
    }
    Ok(out)
}

/// Componentwise vector Laplacian, on the band.
pub fn laplacian(u: &VectorField) -> Result<VectorField> {
    u.expect_layout(Layout::Cell)?;
    let g = u.grid;
    let r = band(&g)?;
    let ihh = 1.0 / (g.h() * g.h());
    let mut out = VectorField::zeros(g, Layout::Cell);
    for (axis, comp) in [&u.x, &u.y, &u.z].into_iter().enumerate() {
        let dst = out.component_mut(axis);
        for i in r.clone() {
            for j in r.clone() {
                for k in r.clone() {
                    dst[[i, j, k]] = d2(comp, i, j, k, 0, ihh)
                        + d2(comp, i, j, k, 1, ihh)
                        + d2(comp, i, j, k, 2, ihh);
                }
            }
        }
    }
    Ok(out)
}

/// grad(div u) with compact mixed stencils, on the band.
pub fn grad_div(u: &VectorField) -> Result<VectorField> {
    u.expect_layout(Layout::Cell)?;
    let g = u.grid;
    let r = band(&g)?;
    let h = g.h();
    let ihh = 1.0 / (h * h);
    let ihh4 = 1.0 / (4.0 * h * h);
    let comps = [&u.x, &u.y, &u.z];
    let mut out = VectorField::zeros(g, Layout::Cell);
    for a in 0..3 {
        let dst = out.component_mut(a);
        for i in r.clone() {
            for j in r.clone() {
                for k in r.clone() {
                    let mut acc = C::new(0.0, 0.0);
                    for (b, comp) in comps.iter().enumerate() {
                        acc += if a == b {
                            d2(comp, i, j, k, a, ihh)
                        } else {
                            dmixed(comp, i, j, k, a, b, ihh4)
                        };
                    }
                    dst[[i, j, k]] = acc;
                }
            }
        }
    }
    Ok(out)
}

/// curl(curl u) = grad(div u) - laplacian(u), on the band.
pub fn curl_curl(u: &VectorField) -> Result<VectorField> {
    let gd = grad_div(u)?;
    let lap = laplacian(u)?;
    gd.sub(&lap)
}

/// Separable Gaussian smoothing of a cell field with standard deviation
/// `width` in cell units, truncated at two standard deviations. Used as
/// an optional pre-filter before second derivatives of noisy data.
pub fn gaussian_smooth(u: &VectorField, width: f64) -> Result<VectorField> {
    u.expect_layout(Layout::Cell)?;
    if width <= 0.0 {
        return Ok(u.clone());
    }
    let radius = (2.0 * width).ceil() as isize;
    let mut kernel = Vec::with_capacity((2 * radius + 1) as usize);
    for d in -radius..=radius {
        kernel.push((-((d * d) as f64) / (2.0 * width * width)).exp());
    }
    let total: f64 = kernel.iter().sum();
    for k in kernel.iter_mut() {
        *k /= total;
    }

    let n = u.grid.n() as isize;
    let mut out = u.clone();
    for axis_dir in 0..3 {
        let src = out.clone();
        for comp in 0..3 {
            let dst = out.component_mut(comp);
            let s = src.component(comp);
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let mut acc = C::default();
                        for (ki, w) in kernel.iter().enumerate() {
                            let off = ki as isize - radius;
                            // clamp at the boundary
                            let (a, b, c) = match axis_dir {
                                0 => ((i + off).clamp(0, n - 1), j, k),
                                1 => (i, (j + off).clamp(0, n - 1), k),
                                _ => (i, j, (k + off).clamp(0, n - 1)),
                            };
                            acc += s[[a as usize, b as usize, c as usize]] * *w;
                        }
                        dst[[i as usize, j as usize, k as usize]] = acc;
                    }
                }
            }
        }
    }
    Ok(out)
}
