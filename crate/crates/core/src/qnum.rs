//! Small exact-arithmetic helpers shared across the crate.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};
use std::str::FromStr;

pub type Q = BigRational;

/// Shorthand for an integer-valued rational.
pub fn q_int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Shorthand for `n/d`.
pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn q_to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        x.numer().to_f64().unwrap_or(f64::NAN) / x.denom().to_f64().unwrap_or(f64::NAN)
    })
}

/// Parses `"p/q"`, `"p"`, or a decimal literal such as `"-3.25"`.
pub fn parse_q(s: &str) -> Result<Q, String> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|e| e.to_string())?;
        let d = BigInt::from_str(d.trim()).map_err(|e| e.to_string())?;
        if d.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(Q::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.trim_start().starts_with('-');
        let int = BigInt::from_str(int).map_err(|e| e.to_string())?;
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac_i = BigInt::from_str(frac).map_err(|e| e.to_string())?;
        let mag = int.abs() * &scale + frac_i;
        let signed = if neg { -mag } else { mag };
        return Ok(Q::new(signed, scale));
    }
    BigInt::from_str(s).map(Q::from_integer).map_err(|e| e.to_string())
}

pub fn format_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Best rational approximation of `x` with denominator at most `max_den`,
/// computed from the continued-fraction expansion.
pub fn recognize_rational(x: f64, max_den: u64) -> Option<(Q, f64)> {
    if !x.is_finite() {
        return None;
    }
    let (mut p0, mut q0) = (BigInt::from(1), BigInt::from(0));
    let (mut p1, mut q1) = (BigInt::from(x.floor() as i64), BigInt::from(1));
    let mut frac = x - x.floor();
    for _ in 0..64 {
        if let (Some(pn), Some(qn)) = (p1.to_f64(), q1.to_f64()) {
            if qn != 0.0 && (pn / qn - x).abs() < 1e-15 * (1.0 + x.abs()) {
                break;
            }
        }
        if frac.abs() < 1e-18 {
            break;
        }
        let a = 1.0 / frac;
        let ai = a.floor();
        if !ai.is_finite() || ai >= 1e18 {
            break;
        }
        let ai_b = BigInt::from(ai as i64);
        let p2 = &ai_b * &p1 + &p0;
        let q2 = &ai_b * &q1 + &q0;
        if q2 > BigInt::from(max_den) {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        frac = a - ai;
    }
    if q1.is_zero() {
        return None;
    }
    let r = Q::new(p1, q1);
    let err = (q_to_f64(&r) - x).abs();
    Some((r, err))
}

/// Quantizes a float to 12 digits after the decimal point; used as the
/// sorting/merging key for value-keyed atoms.
pub fn quantize(x: f64) -> i128 {
    let scaled = x * 1e12;
    if scaled.abs() >= 9e17 {
        // out of the exactly representable window; clamp rather than wrap
        return if scaled > 0.0 { i128::MAX } else { i128::MIN };
    }
    scaled.round() as i128
}

/// Exact dense power series over Q, truncated at a fixed order.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesQ {
    /// coefficient of t^k at index k
    pub coeffs: Vec<Q>,
}

impl SeriesQ {
    pub fn zero(order: usize) -> Self {
        SeriesQ { coeffs: vec![Q::zero(); order + 1] }
    }

    pub fn one(order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = Q::one();
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        out
    }

    pub fn scale(&self, c: &Q) -> Self {
        SeriesQ { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.order();
        let mut out = Self::zero(n);
        for i in 0..=n {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..=(n - i) {
                if other.coeffs[j].is_zero() {
                    continue;
                }
                let prod = &self.coeffs[i] * &other.coeffs[j];
                out.coeffs[i + j] += prod;
            }
        }
        out
    }

    /// `e^t − 1` up to the series order.
    pub fn exp_minus_one(order: usize) -> Self {
        let mut s = Self::zero(order);
        let mut fact = Q::one();
        for k in 1..=order {
            fact *= q_int(k as i64);
            s.coeffs[k] = Q::one() / fact.clone();
        }
        s
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_q("3/4").unwrap(), q(3, 4));
        assert_eq!(parse_q("-7").unwrap(), q_int(-7));
        assert_eq!(parse_q("-0.25").unwrap(), q(-1, 4));
        assert_eq!(format_q(&q(3, 4)), "3/4");
    }

    #[test]
    fn recognizes_small_rationals() {
        let (r, err) = recognize_rational(0.041666666666666664, 10_000).unwrap();
        assert_eq!(r, q(1, 24));
        assert!(err < 1e-12);
        let (r, _) = recognize_rational(-2.5, 10).unwrap();
        assert_eq!(r, q(-5, 2));
    }

    #[test]
    fn series_mul_matches_exp_identity() {
        let e = SeriesQ::exp_minus_one(8);
        let prod = e.mul(&e);
        // (e^t-1)^2 = e^{2t} - 2e^t + 1; coefficient of t^2 is 2 - 2/2 = 1
        assert_eq!(prod.coeffs[2], q_int(1));
    }
}
