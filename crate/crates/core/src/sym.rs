//! Exact multivariate polynomials over the rationals.
//!
//! Used for symbolic period-matrix entries, where unipotent inverses and
//! the big period map must come out exactly (no floating point).

use crate::qnum::{format_q, Q};
use num::traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// A monomial: sorted list of (variable name, exponent) with exponents ≥ 1.
pub type Monomial = Vec<(String, u32)>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Poly {
    /// monomial -> coefficient, no zero coefficients stored
    pub terms: BTreeMap<Monomial, Q>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: BTreeMap::new() }
    }

    pub fn constant(c: Q) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(Vec::new(), c);
        }
        p
    }

    pub fn one() -> Self {
        Poly::constant(Q::one())
    }

    pub fn var(name: &str) -> Self {
        let mut p = Poly::zero();
        p.terms.insert(vec![(name.to_string(), 1)], Q::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self.terms.get(&Vec::new()).map(|c| c.is_one()).unwrap_or(false)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            let entry = out.terms.entry(m.clone()).or_insert_with(Q::zero);
            *entry += c;
            if entry.is_zero() {
                out.terms.remove(m);
            }
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect() }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let m = mul_monomials(m1, m2);
                let c = c1 * c2;
                let entry = out.terms.entry(m).or_insert_with(Q::zero);
                *entry += c;
                if entry.is_zero() {
                    let key = mul_monomials(m1, m2);
                    out.terms.remove(&key);
                }
            }
        }
        out
    }

    pub fn scale(&self, c: &Q) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect() }
    }

    /// Substitutes numeric values for all variables.
    pub fn eval(&self, values: &BTreeMap<String, f64>) -> f64 {
        let mut total = 0.0;
        for (m, c) in &self.terms {
            let mut v = crate::qnum::q_to_f64(c);
            for (name, e) in m {
                v *= values.get(name).copied().unwrap_or(f64::NAN).powi(*e as i32);
            }
            total += v;
        }
        total
    }
}

fn mul_monomials(a: &Monomial, b: &Monomial) -> Monomial {
    let mut out: BTreeMap<String, u32> = BTreeMap::new();
    for (n, e) in a.iter().chain(b.iter()) {
        *out.entry(n.clone()).or_insert(0) += e;
    }
    out.into_iter().collect()
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let cs = format_q(c);
            if first {
                first = false;
            } else if cs.starts_with('-') {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mag = if !first && cs.starts_with('-') { cs[1..].to_string() } else { cs.clone() };
            let show_coeff = m.is_empty() || mag != "1";
            if show_coeff {
                write!(f, "{}", if f.width().is_none() { &mag } else { &mag })?;
            }
            for (i, (name, e)) in m.iter().enumerate() {
                if i > 0 || show_coeff {
                    write!(f, "*")?;
                }
                write!(f, "{name}")?;
                if *e > 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qnum::q_int;

    #[test]
    fn arithmetic() {
        let x = Poly::var("x");
        let y = Poly::var("y");
        let p = x.add(&y).mul(&x.sub(&y)); // x^2 - y^2
        let expect = x.mul(&x).sub(&y.mul(&y));
        assert_eq!(p, expect);
        assert!(p.sub(&expect).is_zero());
        assert_eq!(Poly::constant(q_int(2)).mul(&x).to_string(), "2*x");
    }
}
