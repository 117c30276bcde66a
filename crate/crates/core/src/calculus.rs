//! Mimetic discrete calculus on the staggered grid.
//!
//! Primal sequence: scalars on nodes -> grad -> edges -> curl -> faces ->
//! div -> cells. The composition identities curl.grad = 0 and div.curl = 0
//! hold to roundoff by construction (telescoping sums). The dual curl maps
//! faces back to interior edges and is the transpose of the primal curl
//! with tangential boundary edges zeroed.

use num_complex::Complex64;

use crate::error::Result;
use crate::field::{Layout, ScalarField, ScalarLoc, VectorField};

type C = Complex64;

/// Gradient of a node field, sampled on edges.
pub fn grad(f: &ScalarField) -> Result<VectorField> {
    if f.loc != ScalarLoc::Node {
        return Err(crate::error::Error::LayoutMismatch {
            expected: "Node".into(),
            got: format!("{:?}", f.loc),
        });
    }
    let g = f.grid;
    let n = g.n();
    let ih = 1.0 / g.h();
    let mut out = VectorField::zeros(g, Layout::Edge);
    let w = &f.data;
    for i in 0..n {
        for j in 0..=n {
            for k in 0..=n {
                out.x[[i, j, k]] = (w[[i + 1, j, k]] - w[[i, j, k]]) * ih;
            }
        }
    }
    for i in 0..=n {
        for j in 0..n {
            for k in 0..=n {
                out.y[[i, j, k]] = (w[[i, j + 1, k]] - w[[i, j, k]]) * ih;
            }
        }
    }
    for i in 0..=n {
        for j in 0..=n {
            for k in 0..n {
                out.z[[i, j, k]] = (w[[i, j, k + 1]] - w[[i, j, k]]) * ih;
            }
        }
    }
    Ok(out)
}

/// Circulation curl: edge field to face field.
pub fn curl_edge_to_face(e: &VectorField) -> Result<VectorField> {
    e.expect_layout(Layout::Edge)?;
    let g = e.grid;
    let n = g.n();
    let ih = 1.0 / g.h();
    let mut out = VectorField::zeros(g, Layout::Face);
    let (ex, ey, ez) = (&e.x, &e.y, &e.z);
    for i in 0..=n {
        for j in 0..n {
            for k in 0..n {
                out.x[[i, j, k]] = (ez[[i, j + 1, k]] - ez[[i, j, k]]) * ih
                    - (ey[[i, j, k + 1]] - ey[[i, j, k]]) * ih;
            }
        }
    }
    for i in 0..n {
        for j in 0..=n {
            for k in 0..n {
                out.y[[i, j, k]] = (ex[[i, j, k + 1]] - ex[[i, j, k]]) * ih
                    - (ez[[i + 1, j, k]] - ez[[i, j, k]]) * ih;
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..=n {
                out.z[[i, j, k]] = (ey[[i + 1, j, k]] - ey[[i, j, k]]) * ih
                    - (ex[[i, j + 1, k]] - ex[[i, j, k]]) * ih;
            }
        }
    }
    Ok(out)
}

/// Dual curl: face field to edge field. Defined on interior edges; the
/// tangential boundary entries of the output are zero.
pub fn curl_face_to_edge(f: &VectorField) -> Result<VectorField> {
    f.expect_layout(Layout::Face)?;
    let g = f.grid;
    let n = g.n();
    let ih = 1.0 / g.h();
    let mut out = VectorField::zeros(g, Layout::Edge);
    let (fx, fy, fz) = (&f.x, &f.y, &f.z);
    for i in 0..n {
        for j in 1..n {
            for k in 1..n {
                out.x[[i, j, k]] = (fz[[i, j, k]] - fz[[i, j - 1, k]]) * ih
                    - (fy[[i, j, k]] - fy[[i, j, k - 1]]) * ih;
            }
        }
    }
    for i in 1..n {
        for j in 0..n {
            for k in 1..n {
                out.y[[i, j, k]] = (fx[[i, j, k]] - fx[[i, j, k - 1]]) * ih
                    - (fz[[i, j, k]] - fz[[i - 1, j, k]]) * ih;
            }
        }
    }
    for i in 1..n {
        for j in 1..n {
            for k in 0..n {
                out.z[[i, j, k]] = (fy[[i, j, k]] - fy[[i - 1, j, k]]) * ih
                    - (fx[[i, j, k]] - fx[[i, j - 1, k]]) * ih;
            }
        }
    }
    Ok(out)
}

/// Flux divergence: face field to cell field.
pub fn div_face_to_cell(f: &VectorField) -> Result<ScalarField> {
    f.expect_layout(Layout::Face)?;
    let g = f.grid;
    let n = g.n();
    let ih = 1.0 / g.h();
    let mut out = ScalarField::zeros(g, ScalarLoc::Cell);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out.data[[i, j, k]] = (f.x[[i + 1, j, k]] - f.x[[i, j, k]]
                    + f.y[[i, j + 1, k]]
                    - f.y[[i, j, k]]
                    + f.z[[i, j, k + 1]]
                    - f.z[[i, j, k]])
                    * ih;
            }
        }
    }
    Ok(out)
}

/// Dual divergence of an edge field at interior nodes (boundary nodes 0).
/// This is the negative transpose of `grad` with zero boundary values,
/// which makes `div_edge_to_node(sigma * grad w)` the SPD conductivity
/// operator.
pub fn div_edge_to_node(e: &VectorField) -> Result<ScalarField> {
    e.expect_layout(Layout::Edge)?;
    let g = e.grid;
    let n = g.n();
    let ih = 1.0 / g.h();
    let mut out = ScalarField::zeros(g, ScalarLoc::Node);
    for i in 1..n {
        for j in 1..n {
            for k in 1..n {
                out.data[[i, j, k]] = (e.x[[i, j, k]] - e.x[[i - 1, j, k]]
                    + e.y[[i, j, k]]
                    - e.y[[i, j - 1, k]]
                    + e.z[[i, j, k]]
                    - e.z[[i, j, k - 1]])
                    * ih;
            }
        }
    }
    Ok(out)
}

/// Transpose of `div_face_to_cell`: cell scalars to faces, including the
/// boundary-face rows.
pub fn div_face_to_cell_transpose(c: &ScalarField) -> Result<VectorField> {
    if c.loc != ScalarLoc::Cell {
        return Err(crate::error::Error::LayoutMismatch {
            expected: "Cell".into(),
            got: format!("{:?}", c.loc),
        });
    }
    let g = c.grid;
    let n = g.n();
    let ih = 1.0 / g.h();
    let mut out = VectorField::zeros(g, Layout::Face);
    let d = &c.data;
    for j in 0..n {
        for k in 0..n {
            out.x[[0, j, k]] = -d[[0, j, k]] * ih;
            out.x[[n, j, k]] = d[[n - 1, j, k]] * ih;
            for i in 1..n {
                out.x[[i, j, k]] = (d[[i - 1, j, k]] - d[[i, j, k]]) * ih;
            }
        }
    }
    for i in 0..n {
        for k in 0..n {
            out.y[[i, 0, k]] = -d[[i, 0, k]] * ih;
            out.y[[i, n, k]] = d[[i, n - 1, k]] * ih;
            for j in 1..n {
                out.y[[i, j, k]] = (d[[i, j - 1, k]] - d[[i, j, k]]) * ih;
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            out.z[[i, j, 0]] = -d[[i, j, 0]] * ih;
            out.z[[i, j, n]] = d[[i, j, n - 1]] * ih;
            for k in 1..n {
                out.z[[i, j, k]] = (d[[i, j, k - 1]] - d[[i, j, k]]) * ih;
            }
        }
    }
    Ok(out)
}

/// Transpose of `curl_face_to_edge` (restricted to interior edges): the
/// primal curl applied after zeroing tangential boundary edges.
pub fn curl_face_to_edge_transpose(e: &VectorField) -> Result<VectorField> {
    e.expect_layout(Layout::Edge)?;
    let mut interior = e.clone();
    zero_boundary_edges(&mut interior);
    curl_edge_to_face(&interior)
}

/// Set tangential boundary edges to zero in place.
pub fn zero_boundary_edges(e: &mut VectorField) {
    let g = e.grid;
    for axis in 0..3 {
        let dims = match axis {
            0 => g.edge_dims(0),
            1 => g.edge_dims(1),
            _ => g.edge_dims(2),
        };
        let comp = e.component_mut(axis);
        for i in 0..dims.0 {
            for j in 0..dims.1 {
                for k in 0..dims.2 {
                    if g.edge_on_boundary(axis, i, j, k) {
                        comp[[i, j, k]] = C::new(0.0, 0.0);
                    }
                }
            }
        }
    }
}

/// Average the (up to four) parallel edges of each cell onto its center.
/// Interior cells always see exactly four edges.
pub fn average_edge_to_cell(e: &VectorField) -> Result<VectorField> {
    e.expect_layout(Layout::Edge)?;
    let g = e.grid;
    let n = g.n();
    let quarter = C::new(0.25, 0.0);
    let mut out = VectorField::zeros(g, Layout::Cell).with_kind(e.kind);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out.x[[i, j, k]] = (e.x[[i, j, k]]
                    + e.x[[i, j + 1, k]]
                    + e.x[[i, j, k + 1]]
                    + e.x[[i, j + 1, k + 1]])
                    * quarter;
                out.y[[i, j, k]] = (e.y[[i, j, k]]
                    + e.y[[i + 1, j, k]]
                    + e.y[[i, j, k + 1]]
                    + e.y[[i + 1, j, k + 1]])
                    * quarter;
                out.z[[i, j, k]] = (e.z[[i, j, k]]
                    + e.z[[i + 1, j, k]]
                    + e.z[[i, j + 1, k]]
                    + e.z[[i + 1, j + 1, k]])
                    * quarter;
            }
        }
    }
    Ok(out)
}

/// Average the two parallel faces of each cell onto its center.
pub fn average_face_to_cell(f: &VectorField) -> Result<VectorField> {
    f.expect_layout(Layout::Face)?;
    let g = f.grid;
    let n = g.n();
    let half = C::new(0.5, 0.0);
    let mut out = VectorField::zeros(g, Layout::Cell).with_kind(f.kind);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out.x[[i, j, k]] = (f.x[[i, j, k]] + f.x[[i + 1, j, k]]) * half;
                out.y[[i, j, k]] = (f.y[[i, j, k]] + f.y[[i, j + 1, k]]) * half;
                out.z[[i, j, k]] = (f.z[[i, j, k]] + f.z[[i, j, k + 1]]) * half;
            }
        }
    }
    Ok(out)
}
