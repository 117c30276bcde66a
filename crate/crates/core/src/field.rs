//! Scalar and vector fields on the staggered grid.
//!
//! Complex arithmetic throughout the PDE path; material coefficients are
//! real cell fields. Shape invariants are enforced at construction.

use ndarray::Array3;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::poly::{Poly3, PolyVec3};

type C = Complex64;

/// Where a vector field's components are sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// Components on edge midpoints (E-like).
    Edge,
    /// Components on face centers (H-like, curl outputs).
    Face,
    /// All three components at cell centers (measured data, derived maps).
    Cell,
}

impl Layout {
    pub fn name(&self) -> &'static str {
        match self {
            Layout::Edge => "edge",
            Layout::Face => "face",
            Layout::Cell => "cell_centered",
        }
    }

    fn component_dims(&self, grid: &Grid, axis: usize) -> (usize, usize, usize) {
        match self {
            Layout::Edge => grid.edge_dims(axis),
            Layout::Face => grid.face_dims(axis),
            Layout::Cell => grid.cell_dims(),
        }
    }

    fn location(&self, grid: &Grid, axis: usize, i: usize, j: usize, k: usize) -> [f64; 3] {
        match self {
            Layout::Edge => grid.edge_midpoint(axis, i, j, k),
            Layout::Face => grid.face_center(axis, i, j, k),
            Layout::Cell => grid.cell_center(i, j, k),
        }
    }
}

/// What a field samples, carried as provenance on measured data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FieldKind {
    Electric,
    Magnetic,
    ElectroSeismic,
    #[default]
    Derived,
}

/// Where a scalar field's values are sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarLoc {
    Node,
    Cell,
}

impl ScalarLoc {
    fn dims(&self, grid: &Grid) -> (usize, usize, usize) {
        match self {
            ScalarLoc::Node => grid.node_dims(),
            ScalarLoc::Cell => grid.cell_dims(),
        }
    }

    fn location(&self, grid: &Grid, i: usize, j: usize, k: usize) -> [f64; 3] {
        match self {
            ScalarLoc::Node => grid.node(i, j, k),
            ScalarLoc::Cell => grid.cell_center(i, j, k),
        }
    }
}

/// Complex scalar field on nodes or cell centers.
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub grid: Grid,
    pub loc: ScalarLoc,
    pub data: Array3<C>,
}

impl ScalarField {
    pub fn zeros(grid: Grid, loc: ScalarLoc) -> Self {
        Self { grid, loc, data: Array3::zeros(loc.dims(&grid)) }
    }

    pub fn from_fn(grid: Grid, loc: ScalarLoc, f: impl Fn([f64; 3]) -> C) -> Self {
        let mut out = Self::zeros(grid, loc);
        let dims = out.data.dim();
        for i in 0..dims.0 {
            for j in 0..dims.1 {
                for k in 0..dims.2 {
                    out.data[[i, j, k]] = f(loc.location(&grid, i, j, k));
                }
            }
        }
        out
    }

    pub fn sample_poly(grid: Grid, loc: ScalarLoc, p: &Poly3) -> Self {
        Self::from_fn(grid, loc, |x| p.eval(x))
    }

    pub fn linf(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid.n() != other.grid.n() {
            return Err(Error::GridMismatch { expected: self.grid.n(), got: other.grid.n() });
        }
        if self.loc != other.loc {
            return Err(Error::LayoutMismatch {
                expected: format!("{:?}", self.loc),
                got: format!("{:?}", other.loc),
            });
        }
        Ok(())
    }
}

/// Real scalar field at cell centers (material coefficients, masks' parents).
#[derive(Debug, Clone)]
pub struct RealCellField {
    pub grid: Grid,
    pub data: Array3<f64>,
}

impl RealCellField {
    pub fn constant(grid: Grid, v: f64) -> Self {
        Self { grid, data: Array3::from_elem(grid.cell_dims(), v) }
    }

    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> f64) -> Self {
        let mut data = Array3::zeros(grid.cell_dims());
        let n = grid.n();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    data[[i, j, k]] = f(grid.cell_center(i, j, k));
                }
            }
        }
        Self { grid, data }
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Complex vector field with a staggered or collocated layout.
#[derive(Debug, Clone)]
pub struct VectorField {
    pub grid: Grid,
    pub layout: Layout,
    pub kind: FieldKind,
    pub x: Array3<C>,
    pub y: Array3<C>,
    pub z: Array3<C>,
}

impl VectorField {
    pub fn zeros(grid: Grid, layout: Layout) -> Self {
        Self {
            grid,
            layout,
            kind: FieldKind::Derived,
            x: Array3::zeros(layout.component_dims(&grid, 0)),
            y: Array3::zeros(layout.component_dims(&grid, 1)),
            z: Array3::zeros(layout.component_dims(&grid, 2)),
        }
    }

    pub fn with_kind(mut self, kind: FieldKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn from_fn(grid: Grid, layout: Layout, f: impl Fn(usize, [f64; 3]) -> C) -> Self {
        let mut out = Self::zeros(grid, layout);
        for axis in 0..3 {
            let dims = layout.component_dims(&grid, axis);
            let comp = out.component_mut(axis);
            for i in 0..dims.0 {
                for j in 0..dims.1 {
                    for k in 0..dims.2 {
                        comp[[i, j, k]] = f(axis, layout.location(&grid, axis, i, j, k));
                    }
                }
            }
        }
        out
    }

    pub fn sample_poly(grid: Grid, layout: Layout, p: &PolyVec3) -> Self {
        Self::from_fn(grid, layout, |axis, x| p.0[axis].eval(x))
    }

    pub fn component(&self, axis: usize) -> &Array3<C> {
        match axis {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => unreachable!("axis {axis}"),
        }
    }

    pub fn component_mut(&mut self, axis: usize) -> &mut Array3<C> {
        match axis {
            0 => &mut self.x,
            1 => &mut self.y,
            2 => &mut self.z,
            _ => unreachable!("axis {axis}"),
        }
    }

    pub fn at_cell(&self, i: usize, j: usize, k: usize) -> [C; 3] {
        debug_assert_eq!(self.layout, Layout::Cell);
        [self.x[[i, j, k]], self.y[[i, j, k]], self.z[[i, j, k]]]
    }

    pub fn linf(&self) -> f64 {
        [&self.x, &self.y, &self.z]
            .iter()
            .flat_map(|a| a.iter())
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn l2(&self) -> f64 {
        let s: f64 = [&self.x, &self.y, &self.z]
            .iter()
            .flat_map(|a| a.iter())
            .map(|v| v.norm_sqr())
            .sum();
        s.sqrt()
    }

    pub fn scaled(&self, s: C) -> Self {
        let mut out = self.clone();
        for axis in 0..3 {
            out.component_mut(axis).mapv_inplace(|v| v * s);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        out.x += &other.x;
        out.y += &other.y;
        out.z += &other.z;
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        out.x -= &other.x;
        out.y -= &other.y;
        out.z -= &other.z;
        Ok(out)
    }

    pub fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.grid.n() != other.grid.n() {
            return Err(Error::GridMismatch { expected: self.grid.n(), got: other.grid.n() });
        }
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch {
                expected: self.layout.name().into(),
                got: other.layout.name().into(),
            });
        }
        Ok(())
    }

    pub fn expect_layout(&self, layout: Layout) -> Result<()> {
        if self.layout != layout {
            return Err(Error::LayoutMismatch {
                expected: layout.name().into(),
                got: self.layout.name().into(),
            });
        }
        Ok(())
    }
}
