//! Exact wedge algebra over monomials in named germs.
//!
//! Slots of a [`SymSum`] hold Q-linear combinations of monomials in a small
//! set of symbols (values of `log`, `Li_k`, …) times integer powers of
//! `2πi`. Normalization expands slots multilinearly, so zero-testing of the
//! polylogarithmic ladder identities is exact: the torsion rule
//! `2πi ∧ q·2πi = 0` is just antisymmetry of equal slots, and branch shifts
//! act by polynomial substitution. A [`SymTable`] carries numeric values
//! (and optional closures) for the symbols so a `SymSum` can be lowered to
//! a value-keyed [`FormalSum`] when forms need evaluating.

use crate::qnum::{format_q, Q};
use crate::wedge::{Atom, FormalSum, GermFn, Symmetry};
use num::complex::Complex64;
use num::traits::{One, Zero};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::rc::Rc;

/// Symbol registry: names, cached values, optional parameter closures.
#[derive(Default, Clone)]
pub struct SymTable {
    names: Vec<String>,
    values: Vec<Complex64>,
    funcs: Vec<Option<GermFn>>,
}

impl SymTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: &str, value: Complex64) -> usize {
        self.add_fn(name, value, None)
    }

    pub fn add_fn(&mut self, name: &str, value: Complex64, func: Option<GermFn>) -> usize {
        if let Some(id) = self.names.iter().position(|n| n == name) {
            self.values[id] = value;
            if func.is_some() {
                self.funcs[id] = func;
            }
            return id;
        }
        self.names.push(name.to_string());
        self.values.push(value);
        self.funcs.push(func);
        self.names.len() - 1
    }

    pub fn value(&self, id: usize) -> Complex64 {
        self.values[id]
    }

    pub fn name(&self, id: usize) -> &str {
        &self.names[id]
    }
}

/// Sorted (symbol, exponent) list.
pub type Mono = Vec<(usize, u32)>;

fn mono_mul(a: &Mono, b: &Mono) -> Mono {
    let mut m: BTreeMap<usize, u32> = BTreeMap::new();
    for (s, e) in a.iter().chain(b) {
        *m.entry(*s).or_insert(0) += e;
    }
    m.into_iter().collect()
}

/// One slot value: Σ coeff · monomial · (2πi)^pow.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LExpr {
    pub terms: BTreeMap<(Mono, i64), Q>,
}

impl LExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Q) -> Self {
        let mut e = Self::default();
        if !c.is_zero() {
            e.terms.insert((Vec::new(), 0), c);
        }
        e
    }

    /// the symbol itself
    pub fn sym(id: usize) -> Self {
        let mut e = Self::default();
        e.terms.insert((vec![(id, 1)], 0), Q::one());
        e
    }

    /// `q · (2πi)^pow`
    pub fn two_pi_i_pow(pow: i64, q: Q) -> Self {
        let mut e = Self::default();
        if !q.is_zero() {
            e.terms.insert((Vec::new(), pow), q);
        }
        e
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &LExpr) -> LExpr {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            let e = out.terms.entry(k.clone()).or_insert_with(Q::zero);
            *e += c;
            if e.is_zero() {
                out.terms.remove(k);
            }
        }
        out
    }

    pub fn neg(&self) -> LExpr {
        LExpr { terms: self.terms.iter().map(|(k, c)| (k.clone(), -c.clone())).collect() }
    }

    pub fn sub(&self, other: &LExpr) -> LExpr {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Q) -> LExpr {
        if c.is_zero() {
            return LExpr::zero();
        }
        LExpr { terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect() }
    }

    pub fn mul(&self, other: &LExpr) -> LExpr {
        let mut out = LExpr::zero();
        for ((m1, p1), c1) in &self.terms {
            for ((m2, p2), c2) in &other.terms {
                let key = (mono_mul(m1, m2), p1 + p2);
                let e = out.terms.entry(key.clone()).or_insert_with(Q::zero);
                *e += c1 * c2;
                if e.is_zero() {
                    out.terms.remove(&key);
                }
            }
        }
        out
    }

    /// shift every term's `2πi` power
    pub fn mul_two_pi_i_pow(&self, pow: i64) -> LExpr {
        LExpr {
            terms: self.terms.iter().map(|((m, p), c)| ((m.clone(), p + pow), c.clone())).collect(),
        }
    }

    /// substitutes symbols by expressions (symbols absent from the map stay)
    pub fn substitute(&self, rules: &BTreeMap<usize, LExpr>) -> LExpr {
        let mut out = LExpr::zero();
        for ((mono, pow), c) in &self.terms {
            let mut term = LExpr::two_pi_i_pow(*pow, c.clone());
            for (sym, e) in mono {
                let base = rules.get(sym).cloned().unwrap_or_else(|| LExpr::sym(*sym));
                for _ in 0..*e {
                    term = term.mul(&base);
                }
            }
            out = out.add(&term);
        }
        out
    }

    pub fn eval(&self, table: &SymTable) -> Complex64 {
        let tpi = Complex64::new(0.0, 2.0 * PI);
        let mut total = Complex64::new(0.0, 0.0);
        for ((mono, pow), c) in &self.terms {
            let mut v = Complex64::new(crate::qnum::q_to_f64(c), 0.0) * tpi.powi(*pow as i32);
            for (s, e) in mono {
                v *= table.value(*s).powu(*e);
            }
            total += v;
        }
        total
    }

    pub fn describe(&self, table: &SymTable) -> String {
        let mut parts = Vec::new();
        for ((mono, pow), c) in &self.terms {
            let mut s = format_q(c);
            if *pow != 0 {
                s.push_str(&format!("·(2πi)^{pow}"));
            }
            for (id, e) in mono {
                s.push_str(&format!("·{}", table.name(*id)));
                if *e > 1 {
                    s.push_str(&format!("^{e}"));
                }
            }
            parts.push(s);
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

/// Key of a single expanded slot: a monomial times a `2πi` power.
pub type SlotKey = (Mono, i64);

/// A wedge sum whose slots are single monomial atoms after normalization.
#[derive(Debug, Clone)]
pub struct SymSum {
    pub arity: usize,
    pub twist: i64,
    pub terms: Vec<(Q, Vec<LExpr>)>,
}

impl SymSum {
    pub fn zero(arity: usize, twist: i64) -> Self {
        SymSum { arity, twist, terms: Vec::new() }
    }

    pub fn term(mut self, coeff: Q, slots: Vec<LExpr>) -> Self {
        assert_eq!(slots.len(), self.arity);
        self.terms.push((coeff, slots));
        self
    }

    pub fn push(&mut self, coeff: Q, slots: Vec<LExpr>) {
        assert_eq!(slots.len(), self.arity);
        self.terms.push((coeff, slots));
    }

    pub fn neg(&self) -> Self {
        SymSum {
            arity: self.arity,
            twist: self.twist,
            terms: self.terms.iter().map(|(c, s)| (-c.clone(), s.clone())).collect(),
        }
    }

    pub fn scale(&self, q: &Q) -> Self {
        SymSum {
            arity: self.arity,
            twist: self.twist,
            terms: self.terms.iter().map(|(c, s)| (c * q, s.clone())).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.arity, other.arity);
        assert_eq!(self.twist, other.twist);
        let mut out = self.clone();
        out.terms.extend(other.terms.iter().cloned());
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn substitute(&self, rules: &BTreeMap<usize, LExpr>) -> Self {
        SymSum {
            arity: self.arity,
            twist: self.twist,
            terms: self
                .terms
                .iter()
                .map(|(c, slots)| (c.clone(), slots.iter().map(|s| s.substitute(rules)).collect()))
                .collect(),
        }
    }

    /// Multilinear expansion into single-monomial slots, antisymmetrized and
    /// collected; the unique exact normal form.
    pub fn normalize(&self) -> BTreeMap<Vec<SlotKey>, Q> {
        let mut out: BTreeMap<Vec<SlotKey>, Q> = BTreeMap::new();
        for (coeff, slots) in &self.terms {
            // expand slot expressions
            let mut expanded: Vec<(Q, Vec<SlotKey>)> = vec![(coeff.clone(), Vec::new())];
            for slot in slots {
                if slot.is_zero() {
                    expanded.clear();
                    break;
                }
                let mut next = Vec::with_capacity(expanded.len() * slot.terms.len());
                for (key, c) in &slot.terms {
                    for (acc, keys) in &expanded {
                        let mut keys = keys.clone();
                        keys.push(key.clone());
                        next.push((acc * c, keys));
                    }
                }
                expanded = next;
            }
            for (c, mut keys) in expanded {
                // insertion sort with sign; duplicate slots vanish
                let mut sign = 1i32;
                let mut dead = false;
                for i in 1..keys.len() {
                    let mut j = i;
                    while j > 0 && keys[j - 1] > keys[j] {
                        keys.swap(j - 1, j);
                        sign = -sign;
                        j -= 1;
                    }
                }
                for w in keys.windows(2) {
                    if w[0] == w[1] {
                        dead = true;
                    }
                }
                if dead || c.is_zero() {
                    continue;
                }
                let c = if sign < 0 { -c } else { c };
                *out.entry(keys).or_insert_with(Q::zero) += c;
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    pub fn is_zero_exact(&self) -> bool {
        self.normalize().is_empty()
    }

    /// True when the normal form either vanishes or consists of terms with
    /// a pure `2πi` slot whose partner evaluates to a rational multiple of
    /// `2πi` within `tol` (the torsion classes).
    pub fn vanishes_mod_torsion(&self, table: &SymTable, max_den: u64, tol: f64) -> bool {
        let n = self.normalize();
        if n.is_empty() {
            return true;
        }
        if self.arity != 2 {
            return false;
        }
        // every leftover term must wedge a bare 2πi against a partner, and
        // the partner total must evaluate to a rational multiple of 2πi
        let mut partner_total = Complex64::new(0.0, 0.0);
        for (keys, c) in &n {
            let tpi_pos = match keys.iter().position(|(m, p)| m.is_empty() && *p == 1) {
                None => return false,
                Some(i) => i,
            };
            let sign = if tpi_pos == 0 { 1.0 } else { -1.0 };
            let other = &keys[1 - tpi_pos];
            let mut single = LExpr::zero();
            single.terms.insert(other.clone(), c.clone());
            partner_total += sign * single.eval(table);
        }
        let ratio = partner_total / Complex64::new(0.0, 2.0 * PI);
        if ratio.im.abs() > tol {
            return false;
        }
        matches!(crate::qnum::recognize_rational(ratio.re, max_den), Some((_, err)) if err < tol)
    }

    /// Worst leftover term magnitude when evaluated numerically.
    pub fn numeric_residual(&self, table: &SymTable) -> f64 {
        let n = self.normalize();
        let mut worst = 0.0f64;
        for (keys, c) in &n {
            let mut mag = crate::qnum::q_to_f64(c).abs();
            for k in keys {
                let mut single = LExpr::zero();
                single.terms.insert(k.clone(), Q::one());
                mag *= single.eval(table).norm();
            }
            worst = worst.max(mag);
        }
        worst
    }

    /// Lowers to a value-keyed additive wedge `FormalSum`, attaching product
    /// closures where the table has them.
    pub fn to_formal_sum(&self, table: &SymTable) -> FormalSum {
        let mut out = FormalSum::zero(self.arity, Symmetry::Wedge, self.twist, 0);
        for (keys, c) in self.normalize() {
            let slots: Vec<Atom> = keys
                .iter()
                .map(|(mono, pow)| slot_atom(table, mono, *pow))
                .collect();
            out.push(c, slots);
        }
        out
    }

    /// The Lie-exponential differential: prepend a `2πi` slot while the
    /// twist is positive (the exp boundary is taken separately, since its
    /// target is multiplicative).
    pub fn lie_differential(&self) -> SymSum {
        assert!(self.twist > 0, "top-degree cochains exponentiate instead");
        let mut out = SymSum::zero(self.arity + 1, self.twist - 1);
        for (c, slots) in &self.terms {
            let mut s = Vec::with_capacity(self.arity + 1);
            s.push(LExpr::two_pi_i_pow(1, Q::one()));
            s.extend(slots.iter().cloned());
            out.push(c.clone(), s);
        }
        out
    }

    /// The exp boundary `Λ^n O → Λ^n O*` as a value-keyed multiplicative sum.
    pub fn exp_boundary(&self, table: &SymTable) -> FormalSum {
        assert_eq!(self.twist, 0);
        let mut out = FormalSum::zero(self.arity, Symmetry::Wedge, 0, self.arity);
        'terms: for (keys, c) in self.normalize() {
            let mut slots = Vec::with_capacity(self.arity);
            for (mono, pow) in &keys {
                let mut single = LExpr::zero();
                single.terms.insert((mono.clone(), *pow), Q::one());
                let v = single.eval(table).exp();
                if (v - Complex64::new(1.0, 0.0)).norm() < 1e-12 {
                    continue 'terms;
                }
                slots.push(Atom::germ(&format!("exp({})", single.describe(table)), v));
            }
            out.push(c, slots);
        }
        out
    }
}

/// The star product on `Λ^{•−1}` with `a∗b = ab/2πi`, computed exactly on
/// symbolic slots.
pub fn sym_star(u: &SymSum, v: &SymSum) -> SymSum {
    let k = u.arity - 1;
    let l = v.arity - 1;
    let mut out = SymSum::zero(k + l + 1, u.twist + v.twist);
    for (cu, su) in &u.terms {
        for (cv, sv) in &v.terms {
            for i in 0..=k {
                for j in 0..=l {
                    let sign = if (k as i64 - j as i64 + i as i64).rem_euclid(2) == 0 {
                        Q::one()
                    } else {
                        -Q::one()
                    };
                    let merged = su[i].mul(&sv[j]).mul_two_pi_i_pow(-1);
                    let mut slots = Vec::with_capacity(k + l + 1);
                    for (s, a) in su.iter().enumerate() {
                        if s != i {
                            slots.push(a.clone());
                        }
                    }
                    slots.push(merged);
                    for (s, b) in sv.iter().enumerate() {
                        if s != j {
                            slots.push(b.clone());
                        }
                    }
                    out.push(cu * cv * sign, slots);
                }
            }
        }
    }
    out
}

fn slot_atom(table: &SymTable, mono: &Mono, pow: i64) -> Atom {
    let tpi = Complex64::new(0.0, 2.0 * PI);
    if mono.is_empty() && pow == 1 {
        return Atom::two_pi_i();
    }
    let mut value = tpi.powi(pow as i32);
    let mut name = if pow == 0 { String::new() } else { format!("(2πi)^{pow}") };
    let mut funcs: Vec<(GermFn, u32)> = Vec::new();
    let mut consts = Complex64::new(1.0, 0.0);
    for (id, e) in mono {
        value *= table.value(*id).powu(*e);
        name.push_str(&format!("·{}^{e}", table.name(*id)));
        match &table.funcs[*id] {
            Some(f) => funcs.push((f.clone(), *e)),
            None => consts *= table.value(*id).powu(*e),
        }
    }
    if funcs.is_empty() {
        return Atom::germ(&name, value);
    }
    let tpi_pow = tpi.powi(pow as i32);
    let func: GermFn = Rc::new(move |p: &[Complex64]| {
        let mut v = tpi_pow * consts;
        for (f, e) in &funcs {
            v *= f(p).powu(*e);
        }
        v
    });
    Atom::germ_fn(&name, value, func)
}
