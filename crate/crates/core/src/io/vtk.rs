//! VTK legacy structured-points files, ASCII with LF endings.
//!
//! Cell-centered fields are written as POINT_DATA on the lattice of cell
//! centers (origin h/2, spacing h). Complex data becomes paired arrays
//! with `_re`/`_im` suffixes; scalars use SCALARS records and vector
//! fields VECTORS records. Values are written x-fastest in VTK order and
//! with Rust's shortest round-trip float formatting, so re-reading is
//! bit-exact. The reader accepts exactly the subset this writer emits.

use ndarray::Array3;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Layout, VectorField};
use crate::grid::Grid;

type C = Complex64;

#[derive(Debug, Clone, PartialEq)]
pub enum VtkArray {
    Scalars { name: String, values: Array3<f64> },
    Vectors { name: String, components: [Array3<f64>; 3] },
}

impl VtkArray {
    pub fn name(&self) -> &str {
        match self {
            VtkArray::Scalars { name, .. } => name,
            VtkArray::Vectors { name, .. } => name,
        }
    }
}

/// A structured-points dataset on the cell-center lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct VtkCellData {
    pub dims: (usize, usize, usize),
    pub origin: [f64; 3],
    pub spacing: f64,
    pub arrays: Vec<VtkArray>,
}

impl VtkCellData {
    pub fn new(grid: Grid) -> Self {
        let h = grid.h();
        Self {
            dims: grid.cell_dims(),
            origin: [0.5 * h; 3],
            spacing: h,
            arrays: Vec::new(),
        }
    }

    pub fn push_real_scalar(&mut self, name: &str, values: &Array3<f64>) {
        self.arrays.push(VtkArray::Scalars { name: name.into(), values: values.clone() });
    }

    pub fn push_mask(&mut self, name: &str, mask: &Array3<bool>) {
        let values = mask.mapv(|b| if b { 1.0 } else { 0.0 });
        self.arrays.push(VtkArray::Scalars { name: name.into(), values });
    }

    pub fn push_complex_scalar(&mut self, name: &str, values: &Array3<C>) {
        self.push_real_scalar(&format!("{name}_re"), &values.mapv(|v| v.re));
        self.push_real_scalar(&format!("{name}_im"), &values.mapv(|v| v.im));
    }

    /// Complex cell vector field as two VECTORS arrays `name_re`,
    /// `name_im`.
    pub fn push_complex_vector(&mut self, name: &str, field: &VectorField) -> Result<()> {
        field.expect_layout(Layout::Cell)?;
        let re: [Array3<f64>; 3] =
            std::array::from_fn(|a| field.component(a).mapv(|v| v.re));
        let im: [Array3<f64>; 3] =
            std::array::from_fn(|a| field.component(a).mapv(|v| v.im));
        self.arrays.push(VtkArray::Vectors { name: format!("{name}_re"), components: re });
        self.arrays.push(VtkArray::Vectors { name: format!("{name}_im"), components: im });
        Ok(())
    }

    pub fn scalar(&self, name: &str) -> Result<&Array3<f64>> {
        for a in &self.arrays {
            if let VtkArray::Scalars { name: n, values } = a {
                if n == name {
                    return Ok(values);
                }
            }
        }
        Err(Error::Parse(format!("scalar array '{name}' not found")))
    }

    pub fn complex_vector(&self, name: &str, grid: Grid) -> Result<VectorField> {
        let find = |suffix: &str| -> Result<&[Array3<f64>; 3]> {
            let want = format!("{name}{suffix}");
            for a in &self.arrays {
                if let VtkArray::Vectors { name: n, components } = a {
                    if *n == want {
                        return Ok(components);
                    }
                }
            }
            Err(Error::Parse(format!("vector array '{want}' not found")))
        };
        let re = find("_re")?;
        let im = find("_im")?;
        let mut out = VectorField::zeros(grid, Layout::Cell);
        for axis in 0..3 {
            let comp = out.component_mut(axis);
            for ((dst, r), i) in comp.iter_mut().zip(re[axis].iter()).zip(im[axis].iter()) {
                *dst = C::new(*r, *i);
            }
        }
        Ok(out)
    }

    pub fn complex_scalar(&self, name: &str) -> Result<Array3<C>> {
        let re = self.scalar(&format!("{name}_re"))?;
        let im = self.scalar(&format!("{name}_im"))?;
        let mut out = Array3::from_elem(re.dim(), C::default());
        for ((dst, r), i) in out.iter_mut().zip(re.iter()).zip(im.iter()) {
            *dst = C::new(*r, *i);
        }
        Ok(out)
    }

    pub fn mask(&self, name: &str) -> Result<Array3<bool>> {
        Ok(self.scalar(name)?.mapv(|v| v != 0.0))
    }

    /// Serialize in the documented byte layout.
    pub fn to_string(&self, title: &str) -> String {
        use std::fmt::Write;
        let (nx, ny, nz) = self.dims;
        let npoints = nx * ny * nz;
        let mut s = String::new();
        let _ = writeln!(s, "# vtk DataFile Version 3.0");
        let _ = writeln!(s, "{title}");
        let _ = writeln!(s, "ASCII");
        let _ = writeln!(s, "DATASET STRUCTURED_POINTS");
        let _ = writeln!(s, "DIMENSIONS {nx} {ny} {nz}");
        let _ = writeln!(s, "ORIGIN {:?} {:?} {:?}", self.origin[0], self.origin[1], self.origin[2]);
        let _ = writeln!(s, "SPACING {:?} {:?} {:?}", self.spacing, self.spacing, self.spacing);
        let _ = writeln!(s, "POINT_DATA {npoints}");
        for arr in &self.arrays {
            match arr {
                VtkArray::Scalars { name, values } => {
                    let _ = writeln!(s, "SCALARS {name} double 1");
                    let _ = writeln!(s, "LOOKUP_TABLE default");
                    // x varies fastest in VTK point order
                    for k in 0..nz {
                        for j in 0..ny {
                            for i in 0..nx {
                                let _ = writeln!(s, "{:?}", values[[i, j, k]]);
                            }
                        }
                    }
                }
                VtkArray::Vectors { name, components } => {
                    let _ = writeln!(s, "VECTORS {name} double");
                    for k in 0..nz {
                        for j in 0..ny {
                            for i in 0..nx {
                                let _ = writeln!(
                                    s,
                                    "{:?} {:?} {:?}",
                                    components[0][[i, j, k]],
                                    components[1][[i, j, k]],
                                    components[2][[i, j, k]]
                                );
                            }
                        }
                    }
                }
            }
        }
        s
    }

    pub fn write(&self, path: &std::path::Path, title: &str) -> Result<()> {
        std::fs::write(path, self.to_string(title))?;
        Ok(())
    }

    /// Parse a file produced by this writer.
    pub fn parse(text: &str) -> Result<Self> {
        fn expect<'a>(lines: &mut std::str::Lines<'a>, want: &str) -> Result<&'a str> {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("vtk: unexpected end, wanted '{want}'")))?;
            if !line.starts_with(want) {
                return Err(Error::Parse(format!("vtk: expected '{want}', got '{line}'")));
            }
            Ok(line)
        }
        let mut lines = text.lines();
        expect(&mut lines, "# vtk DataFile Version")?;
        let _title = lines.next().ok_or_else(|| Error::Parse("vtk: missing title".into()))?;
        expect(&mut lines, "ASCII")?;
        expect(&mut lines, "DATASET STRUCTURED_POINTS")?;
        let dims_line = expect(&mut lines, "DIMENSIONS")?;
        let dims: Vec<usize> = dims_line
            .split_whitespace()
            .skip(1)
            .map(|t| t.parse().map_err(|_| Error::Parse(format!("vtk: bad dimension '{t}'"))))
            .collect::<Result<_>>()?;
        if dims.len() != 3 {
            return Err(Error::Parse("vtk: DIMENSIONS needs 3 entries".into()));
        }
        let origin_line = expect(&mut lines, "ORIGIN")?;
        let origin: Vec<f64> = origin_line
            .split_whitespace()
            .skip(1)
            .map(|t| t.parse().map_err(|_| Error::Parse(format!("vtk: bad origin '{t}'"))))
            .collect::<Result<_>>()?;
        let spacing_line = expect(&mut lines, "SPACING")?;
        let spacing: f64 = spacing_line
            .split_whitespace()
            .nth(1)
            .ok_or_else(|| Error::Parse("vtk: missing spacing".into()))?
            .parse()
            .map_err(|_| Error::Parse("vtk: bad spacing".into()))?;
        let pd = expect(&mut lines, "POINT_DATA")?;
        let npoints: usize = pd
            .split_whitespace()
            .nth(1)
            .ok_or_else(|| Error::Parse("vtk: missing point count".into()))?
            .parse()
            .map_err(|_| Error::Parse("vtk: bad point count".into()))?;
        let (nx, ny, nz) = (dims[0], dims[1], dims[2]);
        if nx * ny * nz != npoints {
            return Err(Error::Parse("vtk: POINT_DATA count mismatch".into()));
        }

        let mut arrays = Vec::new();
        let remaining: Vec<&str> = lines.collect();
        let mut pos = 0;
        while pos < remaining.len() {
            let header = remaining[pos].trim();
            pos += 1;
            if header.is_empty() {
                continue;
            }
            if let Some(rest) = header.strip_prefix("SCALARS ") {
                let name = rest
                    .split_whitespace()
                    .next()
                    .ok_or_else(|| Error::Parse("vtk: SCALARS without name".into()))?
                    .to_string();
                if pos >= remaining.len() || !remaining[pos].starts_with("LOOKUP_TABLE") {
                    return Err(Error::Parse("vtk: SCALARS without LOOKUP_TABLE".into()));
                }
                pos += 1;
                let mut values = Array3::zeros((nx, ny, nz));
                for k in 0..nz {
                    for j in 0..ny {
                        for i in 0..nx {
                            let v: f64 = remaining
                                .get(pos)
                                .ok_or_else(|| Error::Parse("vtk: truncated scalars".into()))?
                                .trim()
                                .parse()
                                .map_err(|_| Error::Parse("vtk: bad scalar value".into()))?;
                            values[[i, j, k]] = v;
                            pos += 1;
                        }
                    }
                }
                arrays.push(VtkArray::Scalars { name, values });
            } else if let Some(rest) = header.strip_prefix("VECTORS ") {
                let name = rest
                    .split_whitespace()
                    .next()
                    .ok_or_else(|| Error::Parse("vtk: VECTORS without name".into()))?
                    .to_string();
                let mut components: [Array3<f64>; 3] =
                    std::array::from_fn(|_| Array3::zeros((nx, ny, nz)));
                for k in 0..nz {
                    for j in 0..ny {
                        for i in 0..nx {
                            let line = remaining
                                .get(pos)
                                .ok_or_else(|| Error::Parse("vtk: truncated vectors".into()))?;
                            let mut it = line.split_whitespace();
                            for comp in components.iter_mut() {
                                let t = it
                                    .next()
                                    .ok_or_else(|| Error::Parse("vtk: short vector line".into()))?;
                                comp[[i, j, k]] = t
                                    .parse()
                                    .map_err(|_| Error::Parse("vtk: bad vector value".into()))?;
                            }
                            pos += 1;
                        }
                    }
                }
                arrays.push(VtkArray::Vectors { name, components });
            } else {
                return Err(Error::Parse(format!("vtk: unexpected record '{header}'")));
            }
        }
        Ok(Self {
            dims: (nx, ny, nz),
            origin: [origin[0], origin[1], origin[2]],
            spacing,
            arrays,
        })
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn byte_layout_is_fixed() {
        let g = Grid::new(5, 1).unwrap();
        let mut data = VtkCellData::new(g);
        let mut field = Array3::zeros(g.cell_dims());
        field[[0, 0, 0]] = 1.5;
        field[[1, 0, 0]] = -2.0;
        data.push_real_scalar("sigma", &field);
        let s = data.to_string("test field");
        let head: Vec<&str> = s.lines().take(10).collect();
        assert_eq!(head[0], "# vtk DataFile Version 3.0");
        assert_eq!(head[1], "test field");
        assert_eq!(head[2], "ASCII");
        assert_eq!(head[3], "DATASET STRUCTURED_POINTS");
        assert_eq!(head[4], "DIMENSIONS 5 5 5");
        assert_eq!(head[5], "ORIGIN 0.1 0.1 0.1");
        assert_eq!(head[6], "SPACING 0.2 0.2 0.2");
        assert_eq!(head[7], "POINT_DATA 125");
        assert_eq!(head[8], "SCALARS sigma double 1");
        assert_eq!(head[9], "LOOKUP_TABLE default");
        // x fastest: first value is [0,0,0], second [1,0,0]
        let values: Vec<&str> = s.lines().skip(10).take(2).collect();
        assert_eq!(values, vec!["1.5", "-2.0"]);
        assert!(!s.contains('\r'));
    }

    #[test]
    fn complex_vector_round_trip_is_bit_exact() {
        let g = Grid::new(6, 1).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut f = VectorField::zeros(g, Layout::Cell);
        for axis in 0..3 {
            f.component_mut(axis).mapv_inplace(|_| {
                C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
        }
        let mut data = VtkCellData::new(g);
        data.push_complex_vector("h", &f).unwrap();
        let text = data.to_string("round trip");
        let parsed = VtkCellData::parse(&text).unwrap();
        let back = parsed.complex_vector("h", g).unwrap();
        for axis in 0..3 {
            assert_eq!(f.component(axis), back.component(axis));
        }
        // determinism of the serialization itself
        assert_eq!(text, data.to_string("round trip"));
    }

    #[test]
    fn masks_round_trip() {
        let g = Grid::new(5, 1).unwrap();
        let mut mask = Array3::from_elem(g.cell_dims(), false);
        mask[[2, 3, 1]] = true;
        let mut data = VtkCellData::new(g);
        data.push_mask("cover", &mask);
        let parsed = VtkCellData::parse(&data.to_string("mask")).unwrap();
        assert_eq!(parsed.mask("cover").unwrap(), mask);
    }

    #[test]
    fn parser_rejects_foreign_records() {
        let g = Grid::new(5, 1).unwrap();
        let data = VtkCellData::new(g);
        let mut text = data.to_string("x");
        text.push_str("FIELD whatever 1\n");
        assert!(VtkCellData::parse(&text).is_err());
    }
}
