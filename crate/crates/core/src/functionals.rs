//! Pointwise non-degeneracy functionals.
//!
//! eta is the bilinear first-order map
//!   eta(u1,u2) = (Du1)u2 - (Du2)u1 + div(u1) u2 - div(u2) u1
//!                - 2 (Du1)^T u2 + 2 (Du2)^T u1,
//! with the gradient convention (Du)_{jk} = d(u_j)/d(x_k). Its structure
//! cancels the gradient of a common scalar factor: eta(qu, qv) = q^2
//! eta(u, v). gamma is the second-order companion
//!   gamma(u1,u2) = (grad div u1).u2 - (grad div u2).u1
//!                  - (lap u1).u2 + (lap u2).u1.
//!
//! The three condition families: zeta1 = |det[u1 u2 u3]| of three electric
//! fields (b = 3, r = 1), zeta2 = |det[eta(u1,u2) eta(u3,u4) eta(u5,u6)]|
//! (b = 6, r = 1), zeta3 = (zeta2, |(u1)_2|) (b = 6, r = 2).

use ndarray::Array3;
use num_complex::Complex64;

use crate::cellops;
use crate::error::{Error, Result};
use crate::field::{Layout, ScalarField, ScalarLoc, VectorField};
use crate::grid::Grid;
use crate::poly::{Poly3, PolyVec3};

type C = Complex64;

/// Stencil depth consumed by eta/gamma on top of their inputs' validity.
pub const ETA_DEPTH: usize = cellops::STENCIL_DEPTH;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZetaId {
    Zeta1,
    Zeta2,
    Zeta3,
}

impl ZetaId {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "zeta1" => Ok(Self::Zeta1),
            "zeta2" => Ok(Self::Zeta2),
            "zeta3" => Ok(Self::Zeta3),
            other => Err(Error::Parse(format!("unknown zeta id '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Zeta1 => "zeta1",
            Self::Zeta2 => "zeta2",
            Self::Zeta3 => "zeta3",
        }
    }

    pub fn descriptor(&self) -> ZetaDescriptor {
        match self {
            Self::Zeta1 => ZetaDescriptor { id: *self, b: 3, r: 1, derivative_order: 0 },
            Self::Zeta2 => ZetaDescriptor { id: *self, b: 6, r: 1, derivative_order: 1 },
            Self::Zeta3 => ZetaDescriptor { id: *self, b: 6, r: 2, derivative_order: 1 },
        }
    }
}

/// Shape of one condition family: number of illuminations b, number of
/// pointwise conditions r, and the derivative order it consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZetaDescriptor {
    pub id: ZetaId,
    pub b: usize,
    pub r: usize,
    pub derivative_order: usize,
}

/// Nonnegative per-condition values |zeta_l| on the interior band.
#[derive(Debug, Clone)]
pub struct ConditionField {
    pub grid: Grid,
    /// Band depth on which the values are defined.
    pub depth: usize,
    /// One nonnegative array per condition l = 1..r.
    pub conditions: Vec<Array3<f64>>,
    pub omega: f64,
    pub illumination_ids: Vec<String>,
}

impl ConditionField {
    /// c(x) = min over conditions, the coverage value of Eq. (2.5)-style
    /// thresholds.
    pub fn min_over_conditions(&self, i: usize, j: usize, k: usize) -> f64 {
        self.conditions
            .iter()
            .map(|a| a[[i, j, k]])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn min_over_band(&self) -> f64 {
        let mut m = f64::INFINITY;
        for (i, j, k) in self.grid.band_cells(self.depth).expect("depth checked") {
            m = m.min(self.min_over_conditions(i, j, k));
        }
        m
    }

    pub fn assert_finite(&self) -> Result<()> {
        for a in &self.conditions {
            if a.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument("non-finite condition value".into()));
            }
        }
        Ok(())
    }
}

fn det3(c0: [C; 3], c1: [C; 3], c2: [C; 3]) -> C {
    c0[0] * (c1[1] * c2[2] - c1[2] * c2[1]) - c1[0] * (c0[1] * c2[2] - c0[2] * c2[1])
        + c2[0] * (c0[1] * c1[2] - c0[2] * c1[1])
}

fn expect_cell_fields(fields: &[&VectorField], want: usize) -> Result<Grid> {
    if fields.len() != want {
        return Err(Error::InvalidArgument(format!(
            "expected {want} fields, got {}",
            fields.len()
        )));
    }
    let grid = fields[0].grid;
    for f in fields {
        f.expect_layout(Layout::Cell)?;
        if f.grid.n() != grid.n() {
            return Err(Error::GridMismatch { expected: grid.n(), got: f.grid.n() });
        }
    }
    Ok(grid)
}

/// eta(u1, u2) on the band (depth = input validity + ETA_DEPTH).
pub fn eta(u1: &VectorField, u2: &VectorField) -> Result<VectorField> {
    expect_cell_fields(&[u1, u2], 2)?;
    let g = u1.grid;
    let a_jac = cellops::jacobian(u1)?;
    let b_jac = cellops::jacobian(u2)?;
    let mut out = VectorField::zeros(g, Layout::Cell);
    for (i, j, k) in g.band_cells(cellops::STENCIL_DEPTH)? {
        let a = u1.at_cell(i, j, k);
        let b = u2.at_cell(i, j, k);
        let da: C = (0..3).map(|d| a_jac[d][d][[i, j, k]]).sum();
        let db: C = (0..3).map(|d| b_jac[d][d][[i, j, k]]).sum();
        for row in 0..3 {
            let mut v = da * b[row] - db * a[row];
            for col in 0..3 {
                v += a_jac[row][col][[i, j, k]] * b[col] - b_jac[row][col][[i, j, k]] * a[col];
                v += 2.0 * (b_jac[col][row][[i, j, k]] * a[col] - a_jac[col][row][[i, j, k]] * b[col]);
            }
            out.component_mut(row)[[i, j, k]] = v;
        }
    }
    Ok(out)
}

/// gamma(u1, u2) on the band.
pub fn gamma(u1: &VectorField, u2: &VectorField) -> Result<ScalarField> {
    expect_cell_fields(&[u1, u2], 2)?;
    let g = u1.grid;
    let gd1 = cellops::grad_div(u1)?;
    let gd2 = cellops::grad_div(u2)?;
    let l1 = cellops::laplacian(u1)?;
    let l2 = cellops::laplacian(u2)?;
    let mut out = ScalarField::zeros(g, ScalarLoc::Cell);
    for (i, j, k) in g.band_cells(cellops::STENCIL_DEPTH)? {
        let a = u1.at_cell(i, j, k);
        let b = u2.at_cell(i, j, k);
        let mut v = C::default();
        for d in 0..3 {
            v += gd1.at_cell(i, j, k)[d] * b[d] - gd2.at_cell(i, j, k)[d] * a[d];
            v += -l1.at_cell(i, j, k)[d] * b[d] + l2.at_cell(i, j, k)[d] * a[d];
        }
        out.data[[i, j, k]] = v;
    }
    Ok(out)
}

/// Symbolic eta on polynomial fields; the independent oracle for the
/// discrete kernel.
pub fn eta_symbolic(u1: &PolyVec3, u2: &PolyVec3) -> PolyVec3 {
    let j1 = u1.jacobian();
    let j2 = u2.jacobian();
    let d1 = u1.div();
    let d2 = u2.div();
    let mut comps = [Poly3::zero(), Poly3::zero(), Poly3::zero()];
    for (row, numer) in comps.iter_mut().enumerate() {
        let mut acc = d1.mul(&u2.0[row]).sub(&d2.mul(&u1.0[row]));
        for col in 0..3 {
            acc = acc
                .add(&j1[row][col].mul(&u2.0[col]))
                .sub(&j2[row][col].mul(&u1.0[col]));
            acc = acc
                .sub(&j1[col][row].mul(&u2.0[col]).scale(C::new(2.0, 0.0)))
                .add(&j2[col][row].mul(&u1.0[col]).scale(C::new(2.0, 0.0)));
        }
        *numer = acc;
    }
    PolyVec3(comps)
}

/// Symbolic gamma on polynomial fields.
pub fn gamma_symbolic(u1: &PolyVec3, u2: &PolyVec3) -> Poly3 {
    let gd1 = u1.grad_div();
    let gd2 = u2.grad_div();
    let l1 = u1.laplacian();
    let l2 = u2.laplacian();
    let mut acc = Poly3::zero();
    for d in 0..3 {
        acc = acc.add(&gd1.0[d].mul(&u2.0[d])).sub(&gd2.0[d].mul(&u1.0[d]));
        acc = acc.sub(&l1.0[d].mul(&u2.0[d])).add(&l2.0[d].mul(&u1.0[d]));
    }
    acc
}

/// |det[E1 E2 E3]| pointwise on the band at `depth`.
pub fn zeta1(fields: &[&VectorField], depth: usize) -> Result<ConditionField> {
    let g = expect_cell_fields(fields, 3)?;
    let mut det = Array3::zeros(g.cell_dims());
    for (i, j, k) in g.band_cells(depth)? {
        det[[i, j, k]] = det3(
            fields[0].at_cell(i, j, k),
            fields[1].at_cell(i, j, k),
            fields[2].at_cell(i, j, k),
        )
        .norm();
    }
    Ok(ConditionField {
        grid: g,
        depth,
        conditions: vec![det],
        omega: 0.0,
        illumination_ids: Vec::new(),
    })
}

/// |det[eta(E1,E2) eta(E3,E4) eta(E5,E6)]| pointwise on the band.
pub fn zeta2(fields: &[&VectorField], depth: usize) -> Result<ConditionField> {
    let g = expect_cell_fields(fields, 6)?;
    let depth = depth.max(cellops::STENCIL_DEPTH);
    let cols = [
        eta(fields[0], fields[1])?,
        eta(fields[2], fields[3])?,
        eta(fields[4], fields[5])?,
    ];
    let mut det = Array3::zeros(g.cell_dims());
    for (i, j, k) in g.band_cells(depth)? {
        det[[i, j, k]] = det3(
            cols[0].at_cell(i, j, k),
            cols[1].at_cell(i, j, k),
            cols[2].at_cell(i, j, k),
        )
        .norm();
    }
    Ok(ConditionField {
        grid: g,
        depth,
        conditions: vec![det],
        omega: 0.0,
        illumination_ids: Vec::new(),
    })
}

/// (zeta2, |(E1)_2|): the determinant condition plus a non-vanishing
/// second component of the first field.
pub fn zeta3(fields: &[&VectorField], depth: usize) -> Result<ConditionField> {
    let mut out = zeta2(fields, depth)?;
    let g = out.grid;
    let mut second = Array3::zeros(g.cell_dims());
    for (i, j, k) in g.band_cells(out.depth)? {
        second[[i, j, k]] = fields[0].y[[i, j, k]].norm();
    }
    out.conditions.push(second);
    Ok(out)
}

/// Evaluate the named condition family on cell-centered electric fields.
pub fn evaluate_zeta(
    id: ZetaId,
    fields: &[&VectorField],
    depth: usize,
    omega: f64,
    illumination_ids: Vec<String>,
) -> Result<ConditionField> {
    let desc = id.descriptor();
    if fields.len() != desc.b {
        return Err(Error::InvalidArgument(format!(
            "{} needs {} illuminations, got {}",
            id.name(),
            desc.b,
            fields.len()
        )));
    }
    let mut out = match id {
        ZetaId::Zeta1 => zeta1(fields, depth)?,
        ZetaId::Zeta2 => zeta2(fields, depth)?,
        ZetaId::Zeta3 => zeta3(fields, depth)?,
    };
    out.omega = omega;
    out.illumination_ids = illumination_ids;
    out.assert_finite()?;
    Ok(out)
}
