//! Exact `Λ² Q*` via prime exponent vectors.
//!
//! A nonzero rational factors as `±∏ p^{e_p}`; wedges of units are stored
//! as antisymmetric integer matrices over the primes plus a mod-2 part for
//! the torsion generator −1.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;

#[derive(Debug, thiserror::Error)]
pub enum UnitsError {
    #[error("cannot factor {0}: prime factor exceeds the trial-division bound")]
    TooLargeToFactor(BigInt),
    #[error("zero has no class in the unit group")]
    ZeroUnit,
}

/// Exponent vector of a nonzero rational: sign bit and prime exponents.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UnitVector {
    pub negative: bool,
    pub exponents: BTreeMap<u64, i64>,
}

pub fn factor_rational(x: &BigRational) -> Result<UnitVector, UnitsError> {
    if x.is_zero() {
        return Err(UnitsError::ZeroUnit);
    }
    let mut out = UnitVector { negative: x.is_negative(), ..Default::default() };
    for (value, sign) in [(x.numer().abs(), 1i64), (x.denom().abs(), -1i64)] {
        let mut n = value
            .to_u128()
            .ok_or_else(|| UnitsError::TooLargeToFactor(value.clone()))?;
        let mut p = 2u128;
        while p * p <= n {
            while n % p == 0 {
                *out.exponents.entry(p as u64).or_insert(0) += sign;
                n /= p;
            }
            p += 1;
        }
        if n > 1 {
            let small = u64::try_from(n).map_err(|_| UnitsError::TooLargeToFactor(value.clone()))?;
            *out.exponents.entry(small).or_insert(0) += sign;
        }
    }
    out.exponents.retain(|_, e| *e != 0);
    Ok(out)
}

/// An element of `Λ² Q*` (over the integers, −1 included with its mod-2
/// exponent).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WedgeOfUnits {
    /// coefficient of p ∧ q for primes p < q
    pub pairs: BTreeMap<(u64, u64), BigInt>,
    /// mod-2 coefficient of (−1) ∧ p
    pub sign_part: BTreeMap<u64, bool>,
}

impl WedgeOfUnits {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.pairs.is_empty() && self.sign_part.values().all(|b| !b)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.pairs {
            let e = out.pairs.entry(*k).or_insert_with(BigInt::zero);
            *e += c;
            if e.is_zero() {
                out.pairs.remove(k);
            }
        }
        for (p, b) in &other.sign_part {
            if *b {
                let e = out.sign_part.entry(*p).or_insert(false);
                *e = !*e;
                if !*e {
                    out.sign_part.remove(p);
                }
            }
        }
        out
    }

    pub fn neg(&self) -> Self {
        WedgeOfUnits {
            pairs: self.pairs.iter().map(|(k, c)| (*k, -c.clone())).collect(),
            sign_part: self.sign_part.clone(), // mod 2
        }
    }

    pub fn scale(&self, n: i64) -> Self {
        let mut out = WedgeOfUnits {
            pairs: self
                .pairs
                .iter()
                .map(|(k, c)| (*k, c * BigInt::from(n)))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
            sign_part: if n % 2 == 0 { BTreeMap::new() } else { self.sign_part.clone() },
        };
        out.pairs.retain(|_, c| !c.is_zero());
        out
    }
}

/// `u ∧ v` for exponent vectors.
pub fn wedge_units(u: &UnitVector, v: &UnitVector) -> WedgeOfUnits {
    let mut out = WedgeOfUnits::zero();
    for (p, a) in &u.exponents {
        for (q, b) in &v.exponents {
            match p.cmp(q) {
                std::cmp::Ordering::Less => {
                    let e = out.pairs.entry((*p, *q)).or_insert_with(BigInt::zero);
                    *e += BigInt::from(a * b);
                }
                std::cmp::Ordering::Greater => {
                    let e = out.pairs.entry((*q, *p)).or_insert_with(BigInt::zero);
                    *e -= BigInt::from(a * b);
                }
                std::cmp::Ordering::Equal => {}
            }
        }
    }
    out.pairs.retain(|_, c| !c.is_zero());
    // (−1)∧q picks up u's sign against v's exponents, and v's sign against
    // u's with the antisymmetry sign absorbed mod 2
    for (q, b) in &v.exponents {
        if u.negative && b % 2 != 0 {
            let e = out.sign_part.entry(*q).or_insert(false);
            *e = !*e;
        }
    }
    for (p, a) in &u.exponents {
        if v.negative && a % 2 != 0 {
            let e = out.sign_part.entry(*p).or_insert(false);
            *e = !*e;
        }
    }
    out.sign_part.retain(|_, b| *b);
    out
}

/// `(1 − x) ∧ x` for `x ∈ Q − {0, 1}`.
pub fn steinberg(x: &BigRational) -> Result<WedgeOfUnits, UnitsError> {
    let one = BigRational::from_integer(BigInt::from(1));
    let u = factor_rational(&(&one - x))?;
    let v = factor_rational(x)?;
    Ok(wedge_units(&u, &v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qnum::q;

    #[test]
    fn factorization() {
        let v = factor_rational(&q(-12, 35)).unwrap();
        assert!(v.negative);
        assert_eq!(v.exponents.get(&2), Some(&2));
        assert_eq!(v.exponents.get(&3), Some(&1));
        assert_eq!(v.exponents.get(&5), Some(&-1));
        assert_eq!(v.exponents.get(&7), Some(&-1));
    }

    #[test]
    fn wedge_is_antisymmetric() {
        let u = factor_rational(&q(6, 1)).unwrap();
        let v = factor_rational(&q(10, 1)).unwrap();
        let a = wedge_units(&u, &v);
        let b = wedge_units(&v, &u);
        assert!(a.add(&b).is_zero());
        assert!(wedge_units(&u, &u).is_zero());
    }

    #[test]
    fn steinberg_of_half_is_torsion_only() {
        // (1−1/2) ∧ (1/2) = (1/2)∧(1/2) = 0
        assert!(steinberg(&q(1, 2)).unwrap().is_zero());
    }
}
