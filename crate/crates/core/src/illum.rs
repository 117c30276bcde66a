//! Boundary illuminations.
//!
//! Both kinds in scope are curl-free by construction, so the compatibility
//! condition curl(phi) . nu = 0 on the boundary holds exactly: a constant
//! vector c (potential c.x) or the gradient of a polynomial of degree <= 2.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::{Poly3, PolyVec3};

type C = Complex64;

#[derive(Debug, Clone, PartialEq)]
pub enum IlluminationKind {
    ConstantVector([C; 3]),
    GradientOfPolynomial(Poly3),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Illumination {
    pub id: String,
    pub kind: IlluminationKind,
}

impl Illumination {
    pub fn constant(id: impl Into<String>, c: [C; 3]) -> Self {
        Self { id: id.into(), kind: IlluminationKind::ConstantVector(c) }
    }

    /// The standard basis illumination e_{axis+1}.
    pub fn basis(axis: usize) -> Self {
        let mut c = [C::new(0.0, 0.0); 3];
        c[axis] = C::new(1.0, 0.0);
        Self::constant(format!("e{}", axis + 1), c)
    }

    pub fn gradient(id: impl Into<String>, psi: Poly3) -> Result<Self> {
        if psi.total_degree() > 2 {
            return Err(Error::InvalidArgument(format!(
                "illumination potential degree {} exceeds 2",
                psi.total_degree()
            )));
        }
        Ok(Self { id: id.into(), kind: IlluminationKind::GradientOfPolynomial(psi) })
    }

    /// Parse `e1`/`e2`/`e3`, `const:a,b,c`, or `grad:<polynomial>`.
    pub fn parse(src: &str) -> Result<Self> {
        let s = src.trim();
        match s {
            "e1" => return Ok(Self::basis(0)),
            "e2" => return Ok(Self::basis(1)),
            "e3" => return Ok(Self::basis(2)),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("const:") {
            let parts: Vec<&str> = rest.split(',').collect();
            if parts.len() != 3 {
                return Err(Error::Parse(format!(
                    "constant illumination needs 3 components, got '{rest}'"
                )));
            }
            let mut c = [C::new(0.0, 0.0); 3];
            for (dst, p) in c.iter_mut().zip(parts) {
                let v: f64 = p
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad component '{p}' in '{src}'")))?;
                *dst = C::new(v, 0.0);
            }
            return Ok(Self::constant(s, c));
        }
        if let Some(rest) = s.strip_prefix("grad:") {
            return Self::gradient(s, Poly3::parse(rest)?);
        }
        Err(Error::Parse(format!("unknown illumination '{src}'")))
    }

    /// Scalar potential psi with phi = grad(psi); total degree <= 2.
    pub fn potential(&self) -> Poly3 {
        match &self.kind {
            IlluminationKind::ConstantVector(c) => {
                let mut p = Poly3::zero();
                for (axis, v) in c.iter().enumerate() {
                    p = p.add(&Poly3::var(axis).scale(*v));
                }
                p
            }
            IlluminationKind::GradientOfPolynomial(psi) => psi.clone(),
        }
    }

    /// The induced (curl-free) vector field.
    pub fn vector_field(&self) -> PolyVec3 {
        match &self.kind {
            IlluminationKind::ConstantVector(c) => PolyVec3::constant(*c),
            IlluminationKind::GradientOfPolynomial(psi) => PolyVec3::gradient_of(psi),
        }
    }

    pub fn eval(&self, x: [f64; 3]) -> [C; 3] {
        self.vector_field().eval(x)
    }
}

/// The three basis illuminations {e1, e2, e3} of the determinant condition.
pub fn basis_triple() -> Vec<Illumination> {
    (0..3).map(Illumination::basis).collect()
}

/// The sextuple {e2, grad(x1 x2), e3, grad(x2 x3), e1, grad(x1 x3)} used by
/// the second and third condition families.
pub fn standard_sextuple() -> Vec<Illumination> {
    vec![
        Illumination::basis(1),
        Illumination::gradient("grad:x1*x2", Poly3::parse("x1*x2").unwrap()).unwrap(),
        Illumination::basis(2),
        Illumination::gradient("grad:x2*x3", Poly3::parse("x2*x3").unwrap()).unwrap(),
        Illumination::basis(0),
        Illumination::gradient("grad:x1*x3", Poly3::parse("x1*x3").unwrap()).unwrap(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_kinds_are_curl_free() {
        for illum in standard_sextuple() {
            let curl = illum.vector_field().curl();
            assert!(curl.0.iter().all(|p| p.is_zero()), "{} not curl-free", illum.id);
        }
    }

    #[test]
    fn potential_gradient_matches_vector_field() {
        for illum in basis_triple().into_iter().chain(standard_sextuple()) {
            let from_pot = PolyVec3::gradient_of(&illum.potential());
            assert_eq!(from_pot, illum.vector_field());
        }
    }

    #[test]
    fn parse_round_trip() {
        assert_eq!(Illumination::parse("e2").unwrap(), Illumination::basis(1));
        let g = Illumination::parse("grad:x1*x2").unwrap();
        assert_eq!(g.eval([0.25, 0.5, 0.0])[0], C::new(0.5, 0.0));
        let c = Illumination::parse("const:1,0,-2").unwrap();
        assert_eq!(c.eval([0.1, 0.2, 0.3])[2], C::new(-2.0, 0.0));
        assert!(Illumination::parse("grad:x1^3").is_err());
        assert!(Illumination::parse("e4").is_err());
    }
}
