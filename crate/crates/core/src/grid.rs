//! Staggered grid on the unit cube.
//!
//! The domain is [0,1]^3 split into n^3 cells of spacing h = 1/n. Sample
//! locations follow the usual staggered layout: scalars on nodes or cell
//! centers, vector components on edge midpoints or face centers. Coordinates
//! are computed as i/n so that the endpoint lands on 1.0 exactly.

use crate::error::{Error, Result};

/// Axis-aligned staggered grid descriptor. Cheap to copy; fields that live
/// on the grid carry one of these for shape checking.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    n: usize,
    margin: usize,
}

pub const DEFAULT_MARGIN: usize = 2;

impl Grid {
    /// A grid with `n` cells per axis and an interior band margin of
    /// `margin` cells. Pointwise condition checks and cell-centered
    /// derivatives stay at least `margin` cells away from the boundary.
    pub fn new(n: usize, margin: usize) -> Result<Self> {
        if margin < 1 {
            return Err(Error::InvalidArgument("margin must be >= 1".into()));
        }
        if n < 2 * margin + 3 {
            return Err(Error::GridTooSmall { n, margin });
        }
        Ok(Self { n, margin })
    }

    pub fn with_default_margin(n: usize) -> Result<Self> {
        Self::new(n, DEFAULT_MARGIN)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn margin(&self) -> usize {
        self.margin
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Coordinate of lattice index `i` (node plane). Exact at both ends.
    pub fn coord(&self, i: usize) -> f64 {
        i as f64 / self.n as f64
    }

    /// Coordinate of the center of cell/edge slab `i`.
    pub fn coord_half(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.n as f64
    }

    pub fn cell_center(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        [self.coord_half(i), self.coord_half(j), self.coord_half(k)]
    }

    pub fn node(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        [self.coord(i), self.coord(j), self.coord(k)]
    }

    pub fn node_dims(&self) -> (usize, usize, usize) {
        let m = self.n + 1;
        (m, m, m)
    }

    pub fn cell_dims(&self) -> (usize, usize, usize) {
        (self.n, self.n, self.n)
    }

    /// Array dimensions of the edge component along `axis` (0 = x, 1 = y,
    /// 2 = z). The x-edge array is n x (n+1) x (n+1), and cyclically for
    /// the other axes.
    pub fn edge_dims(&self, axis: usize) -> (usize, usize, usize) {
        let (n, m) = (self.n, self.n + 1);
        match axis {
            0 => (n, m, m),
            1 => (m, n, m),
            2 => (m, m, n),
            _ => unreachable!("axis {axis}"),
        }
    }

    /// Array dimensions of the face component with normal `axis`.
    pub fn face_dims(&self, axis: usize) -> (usize, usize, usize) {
        let (n, m) = (self.n, self.n + 1);
        match axis {
            0 => (m, n, n),
            1 => (n, m, n),
            2 => (n, n, m),
            _ => unreachable!("axis {axis}"),
        }
    }

    /// Midpoint of edge `(i, j, k)` along `axis`.
    pub fn edge_midpoint(&self, axis: usize, i: usize, j: usize, k: usize) -> [f64; 3] {
        match axis {
            0 => [self.coord_half(i), self.coord(j), self.coord(k)],
            1 => [self.coord(i), self.coord_half(j), self.coord(k)],
            2 => [self.coord(i), self.coord(j), self.coord_half(k)],
            _ => unreachable!("axis {axis}"),
        }
    }

    /// Center of face `(i, j, k)` with normal `axis`.
    pub fn face_center(&self, axis: usize, i: usize, j: usize, k: usize) -> [f64; 3] {
        match axis {
            0 => [self.coord(i), self.coord_half(j), self.coord_half(k)],
            1 => [self.coord_half(i), self.coord(j), self.coord_half(k)],
            2 => [self.coord_half(i), self.coord_half(j), self.coord(k)],
            _ => unreachable!("axis {axis}"),
        }
    }

    /// Whether an edge along `axis` at staggered index `(i, j, k)` lies on
    /// the boundary (its tangential line is contained in a boundary face).
    pub fn edge_on_boundary(&self, axis: usize, i: usize, j: usize, k: usize) -> bool {
        let n = self.n;
        match axis {
            0 => j == 0 || j == n || k == 0 || k == n,
            1 => i == 0 || i == n || k == 0 || k == n,
            2 => i == 0 || i == n || j == 0 || j == n,
            _ => unreachable!("axis {axis}"),
        }
    }

    /// Cell index range of the interior band at stencil depth `depth`:
    /// cells with all indices in `depth .. n - depth`.
    pub fn band_range(&self, depth: usize) -> Result<std::ops::Range<usize>> {
        if 2 * depth + 1 > self.n {
            return Err(Error::BandTooThin { n: self.n, depth });
        }
        Ok(depth..self.n - depth)
    }

    /// Iterator over cell indices of the band at `depth`, lexicographic.
    pub fn band_cells(&self, depth: usize) -> Result<impl Iterator<Item = (usize, usize, usize)>> {
        let r = self.band_range(depth)?;
        let (r1, r2) = (r.clone(), r.clone());
        Ok(r.flat_map(move |i| {
            let (r1, r2) = (r1.clone(), r2.clone());
            r1.flat_map(move |j| {
                let r2 = r2.clone();
                let i = i;
                r2.map(move |k| (i, j, k))
            })
        }))
    }

    /// Band at the grid's own margin.
    pub fn band(&self) -> std::ops::Range<usize> {
        self.band_range(self.margin).expect("margin checked at construction")
    }

    pub fn cell_in_band(&self, depth: usize, i: usize, j: usize, k: usize) -> bool {
        let lo = depth;
        let hi = self.n - depth;
        i >= lo && i < hi && j >= lo && j < hi && k >= lo && k < hi
    }
}
