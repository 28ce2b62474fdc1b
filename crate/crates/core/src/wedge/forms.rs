//! Numerical differential forms attached to formal sums.
//!
//! A [`FormEvaluator`] wraps a degree-`k` holomorphic form on a polydisc as
//! a closure `(point, tangent vectors) → value`. Exterior derivatives are
//! taken by fourth-order central differences in complex directions, which
//! keeps chain-square residuals near rounding level for the step sizes used
//! by the test suite.

use super::{two_pi_i, Atom, FormalSum, Symmetry};
use crate::qnum::q_to_f64;
use num::complex::Complex64;
use std::rc::Rc;

type FormFn = Rc<dyn Fn(&[Complex64], &[Vec<Complex64>]) -> Complex64>;

#[derive(Clone)]
pub struct FormEvaluator {
    pub degree: usize,
    eval: FormFn,
}

impl FormEvaluator {
    pub fn new(degree: usize, eval: FormFn) -> Self {
        FormEvaluator { degree, eval }
    }

    pub fn zero(degree: usize) -> Self {
        FormEvaluator { degree, eval: Rc::new(|_, _| Complex64::new(0.0, 0.0)) }
    }

    pub fn eval(&self, point: &[Complex64], tangents: &[Vec<Complex64>]) -> Complex64 {
        assert_eq!(tangents.len(), self.degree, "tangent count must match form degree");
        (self.eval)(point, tangents)
    }

    pub fn add(&self, other: &FormEvaluator) -> FormEvaluator {
        assert_eq!(self.degree, other.degree);
        let (a, b) = (self.eval.clone(), other.eval.clone());
        FormEvaluator::new(self.degree, Rc::new(move |p, t| a(p, t) + b(p, t)))
    }

    pub fn sub(&self, other: &FormEvaluator) -> FormEvaluator {
        assert_eq!(self.degree, other.degree);
        let (a, b) = (self.eval.clone(), other.eval.clone());
        FormEvaluator::new(self.degree, Rc::new(move |p, t| a(p, t) - b(p, t)))
    }

    pub fn scale(&self, c: Complex64) -> FormEvaluator {
        let a = self.eval.clone();
        FormEvaluator::new(self.degree, Rc::new(move |p, t| c * a(p, t)))
    }

    /// Exterior derivative by central differences with step `h`.
    pub fn d(&self, h: f64) -> FormEvaluator {
        let k = self.degree;
        let inner = self.eval.clone();
        FormEvaluator::new(
            k + 1,
            Rc::new(move |p: &[Complex64], t: &[Vec<Complex64>]| {
                let mut total = Complex64::new(0.0, 0.0);
                for i in 0..=k {
                    let rest: Vec<Vec<Complex64>> =
                        t.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| v.clone()).collect();
                    let dir = &t[i];
                    let f = |x: &[Complex64]| inner(x, &rest);
                    let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                    total += sign * directional_derivative(&f, p, dir, h);
                }
                total
            }),
        )
    }
}

/// Fourth-order central difference of `f` at `p` in direction `dir`.
pub fn directional_derivative(
    f: &dyn Fn(&[Complex64]) -> Complex64,
    p: &[Complex64],
    dir: &[Complex64],
    h: f64,
) -> Complex64 {
    let shift = |s: f64| -> Vec<Complex64> {
        p.iter().zip(dir).map(|(x, d)| x + d * Complex64::new(s, 0.0)).collect()
    };
    let f1 = f(&shift(h)) - f(&shift(-h));
    let f2 = f(&shift(2.0 * h)) - f(&shift(-2.0 * h));
    (f1 * 8.0 - f2) / (12.0 * h)
}

fn atom_fn(atom: &Atom) -> Rc<dyn Fn(&[Complex64]) -> Complex64> {
    match atom {
        Atom::Germ(g) => match &g.func {
            Some(f) => f.clone(),
            None => {
                let v = g.value;
                Rc::new(move |_| v)
            }
        },
        other => {
            let v = other.value();
            Rc::new(move |_| v)
        }
    }
}

fn det(rows: &[Vec<Complex64>]) -> Complex64 {
    let n = rows.len();
    match n {
        0 => Complex64::new(1.0, 0.0),
        1 => rows[0][0],
        2 => rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0],
        _ => {
            let mut total = Complex64::new(0.0, 0.0);
            for j in 0..n {
                let minor: Vec<Vec<Complex64>> = rows[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, v)| *v).collect())
                    .collect();
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                total += sign * rows[0][j] * det(&minor);
            }
            total
        }
    }
}

/// The map from the weight-`n` exponential complex to logarithmic forms:
/// on `(2πi)^{n−m−1}·f_1⊗…⊗f_m⊗g` it evaluates
/// `(2πi)^{n−m−1}·(−1)^m·g·dlog f_1∧…∧dlog f_m`, and on the top degree
/// `f_1⊗…⊗f_n` it evaluates `(−1)^n·dlog f_1∧…∧dlog f_n`.
pub fn omega_tensor(x: &FormalSum, n: i64, h: f64) -> FormEvaluator {
    assert_eq!(x.symmetry, Symmetry::Tensor);
    let top = x.star_slots == x.arity;
    let m = if top { x.arity } else { x.arity - 1 };
    assert!(
        if top { m as i64 == n && x.twist == 0 } else { x.twist == n - m as i64 - 1 },
        "cochain shape does not match the weight-{n} complex"
    );
    let terms: Vec<(f64, Vec<Rc<dyn Fn(&[Complex64]) -> Complex64>>, Option<Rc<dyn Fn(&[Complex64]) -> Complex64>>)> = x
        .terms
        .iter()
        .map(|t| {
            let stars: Vec<_> = t.slots[..m].iter().map(atom_fn).collect();
            let g = if top { None } else { Some(atom_fn(&t.slots[m])) };
            (q_to_f64(&t.coeff), stars, g)
        })
        .collect();
    let tw = two_pi_i().powi(x.twist as i32);
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    FormEvaluator::new(
        m,
        Rc::new(move |p: &[Complex64], tang: &[Vec<Complex64>]| {
            let mut total = Complex64::new(0.0, 0.0);
            for (coeff, stars, g) in &terms {
                let rows: Vec<Vec<Complex64>> = stars
                    .iter()
                    .map(|f| {
                        let fv = f(p);
                        tang.iter().map(|v| directional_derivative(&**f, p, v, h) / fv).collect()
                    })
                    .collect();
                let gv = g.as_ref().map(|g| g(p)).unwrap_or(Complex64::new(1.0, 0.0));
                total += *coeff * sign * gv * det(&rows);
            }
            total * tw
        }),
    )
}

/// The map from the weight-`n` Lie-exponential complex to forms:
/// `(2πi)^{n−m−1}⊗(f_0∧…∧f_m) ↦ (2πi)^{n−m−1}·m!·Σ_j (−1)^j f_j
/// df_0∧…∧d̂f_j∧…∧df_m`, and `f_1∧…∧f_n ↦ n!·dlog f_1∧…∧dlog f_n` on top.
pub fn omega_wedge(x: &FormalSum, n: i64, h: f64) -> FormEvaluator {
    assert_eq!(x.symmetry, Symmetry::Wedge);
    let top = x.star_slots == x.arity && x.arity > 0;
    let m = if top { x.arity } else { x.arity - 1 };
    assert!(
        if top { m as i64 == n && x.twist == 0 } else { x.twist == n - m as i64 - 1 },
        "cochain shape does not match the weight-{n} Lie-exponential complex"
    );
    let terms: Vec<(f64, Vec<Rc<dyn Fn(&[Complex64]) -> Complex64>>)> = x
        .terms
        .iter()
        .map(|t| (q_to_f64(&t.coeff), t.slots.iter().map(atom_fn).collect()))
        .collect();
    let tw = two_pi_i().powi(x.twist as i32);
    let factorial: f64 = (1..=m).map(|i| i as f64).product();
    FormEvaluator::new(
        m,
        Rc::new(move |p: &[Complex64], tang: &[Vec<Complex64>]| {
            let mut total = Complex64::new(0.0, 0.0);
            for (coeff, slots) in &terms {
                if top {
                    let rows: Vec<Vec<Complex64>> = slots
                        .iter()
                        .map(|f| {
                            let fv = f(p);
                            tang.iter().map(|v| directional_derivative(&**f, p, v, h) / fv).collect()
                        })
                        .collect();
                    total += *coeff * factorial * det(&rows);
                } else {
                    // m! Σ_j (−1)^j f_j df_0 ∧ … ∧ d̂f_j ∧ … ∧ df_m
                    let values: Vec<Complex64> = slots.iter().map(|f| f(p)).collect();
                    let diffs: Vec<Vec<Complex64>> = slots
                        .iter()
                        .map(|f| tang.iter().map(|v| directional_derivative(&**f, p, v, h)).collect())
                        .collect();
                    for j in 0..slots.len() {
                        let rows: Vec<Vec<Complex64>> = diffs
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| *i != j)
                            .map(|(_, r)| r.clone())
                            .collect();
                        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                        total += *coeff * factorial * sign * values[j] * det(&rows);
                    }
                }
            }
            total * tw
        }),
    )
}

/// A cochain of the cone built from the exponential complex, the Hodge
/// subcomplex `F^n Ω^•`, and the de Rham complex shifted by one.
#[derive(Clone)]
pub struct ConeCochain {
    pub weight: i64,
    pub degree: usize,
    /// exponential-complex component in the same degree
    pub exp_part: Option<FormalSum>,
    /// Hodge component: a closed `degree`-form, zero unless `degree ≥ n`
    pub hodge: Option<FormEvaluator>,
    /// de Rham component: a `(degree−1)`-form
    pub de_rham: Option<FormEvaluator>,
}

impl ConeCochain {
    /// Differential of the cone: the exponential and Hodge parts map by
    /// their own differentials, and the de Rham slot receives the
    /// comparison map minus the de Rham differential.
    pub fn differential(&self, h: f64) -> Result<ConeCochain, super::WedgeError> {
        let n = self.weight;
        let k = self.degree;
        let exp_next = match &self.exp_part {
            Some(e) if (k as i64) < n => Some(super::exp_differential(e, n, k + 1)?),
            _ => None,
        };
        let hodge_next = self.hodge.as_ref().map(|f| f.d(h));
        let omega = self.exp_part.as_ref().map(|e| omega_tensor(e, n, h));
        let mut de_rham_next = FormEvaluator::zero(k);
        if let Some(o) = omega {
            de_rham_next = de_rham_next.add(&o);
        }
        if let Some(f) = &self.hodge {
            de_rham_next = de_rham_next.sub(f);
        }
        if let Some(r) = &self.de_rham {
            de_rham_next = de_rham_next.sub(&r.d(h));
        }
        Ok(ConeCochain {
            weight: n,
            degree: k + 1,
            exp_part: exp_next,
            hodge: hodge_next,
            de_rham: Some(de_rham_next),
        })
    }
}
