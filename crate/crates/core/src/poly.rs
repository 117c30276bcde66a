//! Trivariate polynomials with complex coefficients.
//!
//! Small exact algebra used for illumination potentials, manufactured
//! solutions and the symbolic oracles in the test suites. Monomials are
//! keyed by their exponent triple.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

type C = Complex64;

/// Polynomial in (x1, x2, x3) over the complex numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly3 {
    terms: BTreeMap<[u32; 3], C>,
}

impl Poly3 {
    pub fn zero() -> Self {
        Self { terms: BTreeMap::new() }
    }

    pub fn constant(c: C) -> Self {
        let mut p = Self::zero();
        p.add_term([0, 0, 0], c);
        p
    }

    /// The coordinate monomial x_{axis+1}.
    pub fn var(axis: usize) -> Self {
        let mut e = [0u32; 3];
        e[axis] = 1;
        let mut p = Self::zero();
        p.add_term(e, C::new(1.0, 0.0));
        p
    }

    pub fn monomial(exps: [u32; 3], c: C) -> Self {
        let mut p = Self::zero();
        p.add_term(exps, c);
        p
    }

    pub fn add_term(&mut self, exps: [u32; 3], c: C) {
        if c == C::new(0.0, 0.0) {
            return;
        }
        let entry = self.terms.entry(exps).or_insert(C::new(0.0, 0.0));
        *entry += c;
        if entry.norm() == 0.0 {
            self.terms.remove(&exps);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32; 3], &C)> {
        self.terms.iter()
    }

    /// Largest exponent appearing for any single variable.
    pub fn max_axis_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().copied().max().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in other.terms() {
            out.add_term(*e, *c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in other.terms() {
            out.add_term(*e, -c);
        }
        out
    }

    pub fn scale(&self, s: C) -> Self {
        let mut out = Self::zero();
        for (e, c) in self.terms() {
            out.add_term(*e, c * s);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (ea, ca) in self.terms() {
            for (eb, cb) in other.terms() {
                let e = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]];
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    /// Partial derivative with respect to x_{axis+1}.
    pub fn diff(&self, axis: usize) -> Self {
        let mut out = Self::zero();
        for (e, c) in self.terms() {
            if e[axis] == 0 {
                continue;
            }
            let mut d = *e;
            d[axis] -= 1;
            out.add_term(d, c * C::new(e[axis] as f64, 0.0));
        }
        out
    }

    pub fn gradient(&self) -> [Self; 3] {
        [self.diff(0), self.diff(1), self.diff(2)]
    }

    pub fn laplacian(&self) -> Self {
        self.diff(0)
            .diff(0)
            .add(&self.diff(1).diff(1))
            .add(&self.diff(2).diff(2))
    }

    pub fn eval(&self, x: [f64; 3]) -> C {
        let mut acc = C::new(0.0, 0.0);
        for (e, c) in self.terms() {
            let m = x[0].powi(e[0] as i32) * x[1].powi(e[1] as i32) * x[2].powi(e[2] as i32);
            acc += c * m;
        }
        acc
    }

    /// Parse expressions like `x1*x2 + 0.5*x3^2 - x1`. Terms are separated
    /// by `+`/`-`; each term is a product of a numeric factor and variable
    /// powers. Coefficients are real in this syntax.
    pub fn parse(src: &str) -> Result<Self> {
        let src = src.trim();
        if src.is_empty() {
            return Err(Error::Parse("empty polynomial expression".into()));
        }
        let mut out = Self::zero();
        let mut term = String::new();
        let mut sign = 1.0;
        let mut chars = src.chars().peekable();
        // split into signed terms, honoring a leading sign
        let flush = |term: &mut String, sign: f64, out: &mut Self| -> Result<()> {
            if term.trim().is_empty() {
                return Err(Error::Parse(format!("dangling operator in '{src}'")));
            }
            let (exps, coeff) = parse_term(term.trim())?;
            out.add_term(exps, C::new(sign * coeff, 0.0));
            term.clear();
            Ok(())
        };
        if let Some(&c) = chars.peek() {
            if c == '+' || c == '-' {
                sign = if c == '-' { -1.0 } else { 1.0 };
                chars.next();
            }
        }
        while let Some(c) = chars.next() {
            match c {
                '+' | '-' => {
                    flush(&mut term, sign, &mut out)?;
                    sign = if c == '-' { -1.0 } else { 1.0 };
                }
                _ => term.push(c),
            }
        }
        flush(&mut term, sign, &mut out)?;
        Ok(out)
    }
}

fn parse_term(term: &str) -> Result<([u32; 3], f64)> {
    let mut exps = [0u32; 3];
    let mut coeff = 1.0;
    for factor in term.split('*') {
        let f = factor.trim();
        if f.is_empty() {
            return Err(Error::Parse(format!("empty factor in term '{term}'")));
        }
        if let Some(rest) = f.strip_prefix('x') {
            let (var, pow) = match rest.split_once('^') {
                Some((v, p)) => (v, p.trim().parse::<u32>().map_err(|_| {
                    Error::Parse(format!("bad exponent in '{f}'"))
                })?),
                None => (rest, 1),
            };
            let axis = match var.trim() {
                "1" => 0,
                "2" => 1,
                "3" => 2,
                other => {
                    return Err(Error::Parse(format!("unknown variable 'x{other}' in '{term}'")))
                }
            };
            exps[axis] += pow;
        } else {
            let v = f
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad coefficient '{f}' in '{term}'")))?;
            coeff *= v;
        }
    }
    Ok((exps, coeff))
}

impl fmt::Display for Poly3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({})", c)?;
            for (axis, &p) in e.iter().enumerate() {
                if p == 1 {
                    write!(f, "*x{}", axis + 1)?;
                } else if p > 1 {
                    write!(f, "*x{}^{}", axis + 1, p)?;
                }
            }
        }
        Ok(())
    }
}

/// Polynomial vector field; one polynomial per component.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyVec3(pub [Poly3; 3]);

impl PolyVec3 {
    pub fn zero() -> Self {
        Self([Poly3::zero(), Poly3::zero(), Poly3::zero()])
    }

    pub fn constant(c: [C; 3]) -> Self {
        Self([Poly3::constant(c[0]), Poly3::constant(c[1]), Poly3::constant(c[2])])
    }

    pub fn gradient_of(p: &Poly3) -> Self {
        Self(p.gradient())
    }

    pub fn eval(&self, x: [f64; 3]) -> [C; 3] {
        [self.0[0].eval(x), self.0[1].eval(x), self.0[2].eval(x)]
    }

    pub fn div(&self) -> Poly3 {
        self.0[0]
            .diff(0)
            .add(&self.0[1].diff(1))
            .add(&self.0[2].diff(2))
    }

    pub fn curl(&self) -> Self {
        let [u, v, w] = &self.0;
        Self([
            w.diff(1).sub(&v.diff(2)),
            u.diff(2).sub(&w.diff(0)),
            v.diff(0).sub(&u.diff(1)),
        ])
    }

    pub fn laplacian(&self) -> Self {
        Self([
            self.0[0].laplacian(),
            self.0[1].laplacian(),
            self.0[2].laplacian(),
        ])
    }

    pub fn grad_div(&self) -> Self {
        Self(self.div().gradient())
    }

    /// Jacobian entry (j, k) = d(u_j)/d(x_k).
    pub fn jacobian(&self) -> [[Poly3; 3]; 3] {
        std::array::from_fn(|j| std::array::from_fn(|k| self.0[j].diff(k)))
    }

    pub fn scale_by(&self, q: &Poly3) -> Self {
        Self([q.mul(&self.0[0]), q.mul(&self.0[1]), q.mul(&self.0[2])])
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(std::array::from_fn(|i| self.0[i].add(&other.0[i])))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(std::array::from_fn(|i| self.0[i].sub(&other.0[i])))
    }

    pub fn scale(&self, s: C) -> Self {
        Self(std::array::from_fn(|i| self.0[i].scale(s)))
    }

    pub fn max_axis_degree(&self) -> u32 {
        self.0.iter().map(|p| p.max_axis_degree()).max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C {
        C::new(re, 0.0)
    }

    #[test]
    fn parse_and_eval() {
        let p = Poly3::parse("x1*x2 + 0.5*x3^2 - x1").unwrap();
        let v = p.eval([2.0, 3.0, 4.0]);
        assert_eq!(v, c(2.0 * 3.0 + 0.5 * 16.0 - 2.0));
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(Poly3::parse("x4").is_err());
        assert!(Poly3::parse("x1 +").is_err());
        assert!(Poly3::parse("").is_err());
        assert!(Poly3::parse("2y").is_err());
    }

    #[test]
    fn calculus_identities() {
        // curl of a gradient vanishes symbolically
        let psi = Poly3::parse("x1*x2 + x2*x3^2").unwrap();
        let g = PolyVec3::gradient_of(&psi);
        assert!(g.curl().0.iter().all(|p| p.is_zero()));

        // div curl vanishes
        let u = PolyVec3([
            Poly3::parse("x2^2*x3").unwrap(),
            Poly3::parse("x1*x3").unwrap(),
            Poly3::parse("x1^2*x2").unwrap(),
        ]);
        assert!(u.curl().div().is_zero());

        // laplacian of x1^2 is 2
        let p = Poly3::parse("x1^2").unwrap();
        assert_eq!(p.laplacian(), Poly3::constant(c(2.0)));
    }

    #[test]
    fn product_rule_spot_check() {
        let p = Poly3::parse("x1 + x2^2").unwrap();
        let q = Poly3::parse("x3*x1").unwrap();
        let lhs = p.mul(&q).diff(0);
        let rhs = p.diff(0).mul(&q).add(&p.mul(&q.diff(0)));
        assert_eq!(lhs, rhs);
    }
}
