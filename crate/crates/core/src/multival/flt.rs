//! Minimal scalar abstraction for the segment integrator: `f64` for normal
//! runs, double-double (`Dd`, ~106 significand bits) for extended-precision
//! runs. Only the operations the integrator actually uses are required.

use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Flt:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + PartialOrd
{
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn one() -> Self {
        Self::from_f64(1.0)
    }
    fn abs(self) -> Self;
    fn pi() -> Self;
    /// cos(k·π/n) for Chebyshev nodes, exact to working precision
    fn cos_pi_frac(k: usize, n: usize) -> Self;
}

impl Flt for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn cos_pi_frac(k: usize, n: usize) -> Self {
        (k as f64 * std::f64::consts::PI / n as f64).cos()
    }
}

/// Double-double: an unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = f64::mul_add(a, b, -p);
    (p, err)
}

impl Dd {
    pub fn new(hi: f64, lo: f64) -> Self {
        let (s, e) = quick_two_sum(hi, lo);
        Dd { hi: s, lo: e }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s1, e1) = two_sum(self.hi, o.hi);
        let e = e1 + self.lo + o.lo;
        Dd::new(s1, e)
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + self.hi * o.lo + self.lo * o.hi;
        Dd::new(p, e)
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * Dd::new(q1, 0.0);
        let q2 = r.hi / o.hi;
        let r2 = r - o * Dd::new(q2, 0.0);
        let q3 = r2.hi / o.hi;
        Dd::new(q1, q2) + Dd::new(q3, 0.0)
    }
}

impl Flt for Dd {
    fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }
    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
    fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }
    fn pi() -> Self {
        Dd::new(3.141592653589793, 1.2246467991473532e-16)
    }
    fn cos_pi_frac(k: usize, n: usize) -> Self {
        // cos(kθ) by the three-term recurrence from a series value of cos θ
        let theta = Dd::pi() / Dd::from_f64(n as f64);
        let c1 = cos_series(theta);
        let mut c_prev = Dd::one();
        let mut c = c1;
        if k == 0 {
            return Dd::one();
        }
        for _ in 1..k {
            let next = Dd::from_f64(2.0) * c1 * c - c_prev;
            c_prev = c;
            c = next;
        }
        c
    }
}

/// cos by Taylor series; adequate for |x| ≤ π/2 node generation.
fn cos_series(x: Dd) -> Dd {
    let x2 = x * x;
    let mut term = Dd::one();
    let mut sum = Dd::one();
    let mut k = 0f64;
    loop {
        k += 2.0;
        term = -term * x2 / Dd::from_f64(k * (k - 1.0));
        sum = sum + term;
        if term.hi.abs() < 1e-35 {
            break;
        }
    }
    sum
}

/// Complex numbers over a generic scalar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cx<F: Flt> {
    pub re: F,
    pub im: F,
}

impl<F: Flt> Cx<F> {
    pub fn new(re: F, im: F) -> Self {
        Cx { re, im }
    }
    pub fn from_c64(z: num::complex::Complex64) -> Self {
        Cx { re: F::from_f64(z.re), im: F::from_f64(z.im) }
    }
    pub fn to_c64(self) -> num::complex::Complex64 {
        num::complex::Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
    pub fn zero() -> Self {
        Cx { re: F::zero(), im: F::zero() }
    }
    pub fn scale(self, s: F) -> Self {
        Cx { re: self.re * s, im: self.im * s }
    }
    pub fn norm_sqr(self) -> F {
        self.re * self.re + self.im * self.im
    }
}

impl<F: Flt> Add for Cx<F> {
    type Output = Cx<F>;
    fn add(self, o: Self) -> Self {
        Cx::new(self.re + o.re, self.im + o.im)
    }
}

impl<F: Flt> Sub for Cx<F> {
    type Output = Cx<F>;
    fn sub(self, o: Self) -> Self {
        Cx::new(self.re - o.re, self.im - o.im)
    }
}

impl<F: Flt> Neg for Cx<F> {
    type Output = Cx<F>;
    fn neg(self) -> Self {
        Cx::new(-self.re, -self.im)
    }
}

impl<F: Flt> Mul for Cx<F> {
    type Output = Cx<F>;
    fn mul(self, o: Self) -> Self {
        Cx::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
}

impl<F: Flt> Div for Cx<F> {
    type Output = Cx<F>;
    fn div(self, o: Self) -> Self {
        let d = o.norm_sqr();
        let n = self * Cx::new(o.re, -o.im);
        Cx::new(n.re / d, n.im / d)
    }
}
