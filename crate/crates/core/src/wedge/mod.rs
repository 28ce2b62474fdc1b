//! Formal graded tensor/wedge algebra over Q with complex-valued atoms.
//!
//! Elements are finite Q-linear combinations of tensor or wedge terms whose
//! slots hold atoms: exact `2πi`-multiples, exact rationals, or value-keyed
//! function germs. Transcendental entries have no decidable equality, so the
//! normal form merges germ atoms by their numeric value quantized to twelve
//! digits; merges are re-verified against `atom_tol` and collisions are
//! reported rather than silently accepted.
//!
//! The leading `star_slots` positions of a sum are multiplicative (they live
//! in the unit group of the structure sheaf): a slot holding the unit kills
//! its term, and a sign on the value is torsion, hence invisible. Slots past
//! `star_slots` are additive and Q-linear: exact rational factors are pulled
//! into the coefficient, which in particular makes `2πi ∧ q·2πi` vanish for
//! every rational `q`.

mod forms;

pub use forms::{directional_derivative, omega_tensor, omega_wedge, ConeCochain, FormEvaluator};

use crate::qnum::{format_q, parse_q, q_to_f64, quantize, Q};
use num::complex::Complex64;
use num::traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::rc::Rc;

pub type GermFn = Rc<dyn Fn(&[Complex64]) -> Complex64>;

pub fn two_pi_i() -> Complex64 {
    Complex64::new(0.0, 2.0 * PI)
}

#[derive(Debug, thiserror::Error)]
pub enum WedgeError {
    #[error("atom collision: values {0} and {1} share a key but differ by more than atom_tol")]
    AtomCollision(Complex64, Complex64),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("{0}")]
    Parse(String),
}

/// A germ: a branch-tracked function value, optionally evaluable as a
/// function of parameters for differential-form checks.
#[derive(Clone)]
pub struct Germ {
    pub tag: String,
    pub value: Complex64,
    pub branch: Option<String>,
    pub func: Option<GermFn>,
}

impl Germ {
    pub fn constant(tag: &str, value: Complex64) -> Self {
        Germ { tag: tag.to_string(), value, branch: None, func: None }
    }

    pub fn with_func(tag: &str, value: Complex64, func: GermFn) -> Self {
        Germ { tag: tag.to_string(), value, branch: None, func: Some(func) }
    }
}

impl fmt::Debug for Germ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Germ({} = {:.6}+{:.6}i)", self.tag, self.value.re, self.value.im)
    }
}

#[derive(Debug, Clone)]
pub enum Atom {
    /// q · 2πi
    TwoPiI(Q),
    /// an exact rational constant
    Rational(Q),
    /// a complex function germ, compared by quantized value
    Germ(Germ),
}

impl Atom {
    pub fn two_pi_i() -> Self {
        Atom::TwoPiI(Q::one())
    }

    pub fn rational(q: Q) -> Self {
        Atom::Rational(q)
    }

    pub fn germ(tag: &str, value: Complex64) -> Self {
        Atom::Germ(Germ::constant(tag, value))
    }

    pub fn germ_fn(tag: &str, value: Complex64, func: GermFn) -> Self {
        Atom::Germ(Germ::with_func(tag, value, func))
    }

    pub fn value(&self) -> Complex64 {
        match self {
            Atom::TwoPiI(q) => two_pi_i() * q_to_f64(q),
            Atom::Rational(q) => Complex64::new(q_to_f64(q), 0.0),
            Atom::Germ(g) => g.value,
        }
    }

    /// Evaluates the atom as a function of parameters, falling back to the
    /// cached value for constants.
    pub fn eval(&self, params: &[Complex64]) -> Complex64 {
        match self {
            Atom::Germ(g) => match &g.func {
                Some(f) => f(params),
                None => g.value,
            },
            _ => self.value(),
        }
    }

    fn negated(&self) -> Atom {
        match self {
            Atom::TwoPiI(q) => Atom::TwoPiI(-q.clone()),
            Atom::Rational(q) => Atom::Rational(-q.clone()),
            Atom::Germ(g) => {
                let mut g = g.clone();
                g.value = -g.value;
                if let Some(f) = g.func.clone() {
                    g.func = Some(Rc::new(move |p: &[Complex64]| -f(p)));
                }
                g.tag = format!("-({})", g.tag);
                g
            }
            .into(),
        }
    }
}

impl From<Germ> for Atom {
    fn from(g: Germ) -> Self {
        Atom::Germ(g)
    }
}

/// Canonical merge key of an atom. Special atoms key exactly; germs key by
/// quantized value with the overall sign normalized away.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum AtomKey {
    TwoPiI,
    One,
    Germ(i128, i128),
}

fn germ_sign_flipped(v: Complex64) -> bool {
    let (re, im) = (quantize(v.re), quantize(v.im));
    re < 0 || (re == 0 && im < 0)
}

fn atom_key(atom: &Atom) -> AtomKey {
    match atom {
        Atom::TwoPiI(_) => AtomKey::TwoPiI,
        Atom::Rational(_) => AtomKey::One,
        Atom::Germ(g) => {
            let v = if germ_sign_flipped(g.value) { -g.value } else { g.value };
            AtomKey::Germ(quantize(v.re), quantize(v.im))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Symmetry {
    #[serde(rename = "tensor")]
    Tensor,
    #[serde(rename = "wedge")]
    Wedge,
}

#[derive(Debug, Clone)]
pub struct Term {
    pub coeff: Q,
    pub slots: Vec<Atom>,
}

/// A Q-linear combination of tensor/wedge terms with a global `(2πi)^twist`
/// factor kept symbolically.
#[derive(Debug, Clone)]
pub struct FormalSum {
    pub arity: usize,
    pub symmetry: Symmetry,
    pub twist: i64,
    /// number of leading multiplicative slots
    pub star_slots: usize,
    pub terms: Vec<Term>,
}

impl FormalSum {
    pub fn zero(arity: usize, symmetry: Symmetry, twist: i64, star_slots: usize) -> Self {
        FormalSum { arity, symmetry, twist, star_slots, terms: Vec::new() }
    }

    pub fn wedge(arity: usize, twist: i64) -> Self {
        Self::zero(arity, Symmetry::Wedge, twist, 0)
    }

    pub fn tensor(arity: usize, twist: i64, star_slots: usize) -> Self {
        Self::zero(arity, Symmetry::Tensor, twist, star_slots)
    }

    pub fn push(&mut self, coeff: Q, slots: Vec<Atom>) {
        assert_eq!(slots.len(), self.arity, "slot count must match arity");
        self.terms.push(Term { coeff, slots });
    }

    pub fn term(mut self, coeff: Q, slots: Vec<Atom>) -> Self {
        self.push(coeff, slots);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coeff = -t.coeff.clone();
        }
        out
    }

    pub fn scale(&self, c: &Q) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coeff = &t.coeff * c;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.arity, other.arity);
        assert_eq!(self.symmetry, other.symmetry);
        assert_eq!(self.twist, other.twist, "twists must agree to add");
        let mut out = self.clone();
        out.terms.extend(other.terms.iter().cloned());
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Exterior/tensor concatenation: slots of `other` appended to slots of
    /// `self`, coefficients multiplied. Twists add.
    pub fn concat(&self, other: &Self) -> Self {
        assert_eq!(self.symmetry, other.symmetry);
        let mut out = FormalSum::zero(
            self.arity + other.arity,
            self.symmetry,
            self.twist + other.twist,
            self.star_slots + other.star_slots,
        );
        for a in &self.terms {
            for b in &other.terms {
                let mut slots = a.slots.clone();
                slots.extend(b.slots.iter().cloned());
                out.push(&a.coeff * &b.coeff, slots);
            }
        }
        out
    }

    /// The unique normal form; idempotent and Q-linear.
    pub fn normalize(&self) -> Result<FormalSum, WedgeError> {
        self.normalize_with_tol(1e-9)
    }

    pub fn normalize_with_tol(&self, atom_tol: f64) -> Result<FormalSum, WedgeError> {
        let mut reps: HashMap<AtomKey, Complex64> = HashMap::new();
        let mut merged: HashMap<Vec<AtomKey>, (Q, Vec<Atom>)> = HashMap::new();
        let mut order: Vec<Vec<AtomKey>> = Vec::new();

        'terms: for term in &self.terms {
            if term.coeff.is_zero() {
                continue;
            }
            let mut coeff = term.coeff.clone();
            let mut canon: Vec<(AtomKey, Atom)> = Vec::with_capacity(self.arity);
            for (idx, atom) in term.slots.iter().enumerate() {
                let mult = idx < self.star_slots;
                let (catom, factor, dead) = canonicalize_atom(atom, mult, atom_tol);
                if dead {
                    continue 'terms;
                }
                coeff *= factor;
                if coeff.is_zero() {
                    continue 'terms;
                }
                let key = atom_key(&catom);
                if let Atom::Germ(g) = &catom {
                    let rep = reps.entry(key).or_insert(g.value);
                    if (*rep - g.value).norm() > atom_tol {
                        return Err(WedgeError::AtomCollision(*rep, g.value));
                    }
                }
                canon.push((key, catom));
            }
            if self.symmetry == Symmetry::Wedge {
                let sign = sort_with_parity(&mut canon);
                if sign == 0 {
                    continue; // repeated slot
                }
                if sign < 0 {
                    coeff = -coeff;
                }
            }
            let keys: Vec<AtomKey> = canon.iter().map(|(k, _)| *k).collect();
            let slots: Vec<Atom> = canon.into_iter().map(|(_, a)| a).collect();
            match merged.get_mut(&keys) {
                Some((c, _)) => *c += coeff,
                None => {
                    order.push(keys.clone());
                    merged.insert(keys, (coeff, slots));
                }
            }
        }

        order.sort();
        let mut out = FormalSum::zero(self.arity, self.symmetry, self.twist, self.star_slots);
        for keys in order {
            if let Some((c, slots)) = merged.remove(&keys) {
                if !c.is_zero() {
                    out.terms.push(Term { coeff: c, slots });
                }
            }
        }
        Ok(out)
    }

    /// Max distance between this sum and `other` after normalization: zero
    /// when the difference cancels atom-by-atom, otherwise the best pairing
    /// residual between leftover terms (ratio-to-one on multiplicative
    /// slots, absolute difference on additive ones).
    pub fn residual_against(&self, other: &FormalSum) -> f64 {
        let diff = match self.sub(other).normalize() {
            Ok(d) => d,
            Err(_) => return f64::INFINITY,
        };
        if diff.is_empty() {
            return 0.0;
        }
        // pair +/− leftovers greedily by slot values
        let mut pos: Vec<&Term> = diff.terms.iter().filter(|t| t.coeff.is_positive()).collect();
        let mut neg: Vec<&Term> = diff.terms.iter().filter(|t| t.coeff.is_negative()).collect();
        if pos.len() != neg.len() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        while let Some(p) = pos.pop() {
            let mut best = (f64::INFINITY, 0usize);
            for (i, n) in neg.iter().enumerate() {
                let mut r = 0.0f64;
                for (a, b) in p.slots.iter().zip(n.slots.iter()) {
                    r = r.max((a.value() - b.value()).norm());
                }
                if r < best.0 {
                    best = (r, i);
                }
            }
            if neg.is_empty() {
                return f64::INFINITY;
            }
            neg.swap_remove(best.1);
            worst = worst.max(best.0);
        }
        worst
    }

    /// Recognizes germ atoms in additive slots whose value is within `tol`
    /// of a rational multiple of `2πi` (denominator ≤ `max_den`) and
    /// replaces them with exact `2πi`-multiples, so that the torsion rule
    /// can see them.
    pub fn recognize_two_pi_i(&self, max_den: u64, tol: f64) -> FormalSum {
        let mut out = self.clone();
        for t in &mut out.terms {
            for (idx, slot) in t.slots.iter_mut().enumerate() {
                if idx < out.star_slots {
                    continue;
                }
                if let Atom::Germ(g) = slot {
                    if g.value.re.abs() < tol {
                        let ratio = g.value.im / (2.0 * PI);
                        if let Some((q, err)) = crate::qnum::recognize_rational(ratio, max_den) {
                            if err < tol && g.value.re.abs() < tol {
                                *slot = Atom::TwoPiI(q);
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// One round of bilinear merging on a tensor sum: two terms with equal
    /// coefficients up to sign that agree in all slots but one combine into
    /// a single term (product/ratio on multiplicative slots, sum/difference
    /// on additive ones). Repeated with [`Self::normalize`] this implements
    /// the bilinearity of the tensor product far enough for chain-map
    /// cancellations, where the leftover slot becomes the unit or zero.
    pub fn bilinear_reduce(&self, atom_tol: f64) -> Result<FormalSum, WedgeError> {
        let mut cur = self.normalize_with_tol(atom_tol)?;
        'outer: loop {
            let n = cur.terms.len();
            for i in 0..n {
                for j in (i + 1)..n {
                    let (a, b) = (&cur.terms[i], &cur.terms[j]);
                    let (same_mag, opposite) = {
                        if a.coeff == b.coeff {
                            (true, false)
                        } else if a.coeff == -b.coeff.clone() {
                            (true, true)
                        } else {
                            (false, false)
                        }
                    };
                    if !same_mag {
                        continue;
                    }
                    let mut diff_slot = None;
                    let mut mismatch = 0;
                    for s in 0..self.arity {
                        if atom_key(&a.slots[s]) != atom_key(&b.slots[s]) {
                            mismatch += 1;
                            diff_slot = Some(s);
                        }
                    }
                    let s = match (mismatch, diff_slot) {
                        (1, Some(s)) => s,
                        _ => continue,
                    };
                    let va = a.slots[s].value();
                    let vb = b.slots[s].value();
                    let merged_value = if s < self.star_slots {
                        if opposite {
                            va / vb
                        } else {
                            va * vb
                        }
                    } else if opposite {
                        va - vb
                    } else {
                        va + vb
                    };
                    // a merged multiplicative unit or additive zero kills
                    // the pair outright
                    let dead = if s < self.star_slots {
                        (merged_value - Complex64::new(1.0, 0.0)).norm() <= atom_tol
                    } else {
                        merged_value.norm() <= atom_tol
                    };
                    let mut terms: Vec<Term> = Vec::with_capacity(n - 1);
                    for (t, term) in cur.terms.iter().enumerate() {
                        if t != i && t != j {
                            terms.push(term.clone());
                        }
                    }
                    if !dead {
                        let merged = Atom::germ(&format!("merged[{s}]"), merged_value);
                        let mut slots = a.slots.clone();
                        slots[s] = merged;
                        terms.push(Term { coeff: a.coeff.clone(), slots });
                    }
                    cur = FormalSum { terms, ..cur.clone() }.normalize_with_tol(atom_tol)?;
                    continue 'outer;
                }
            }
            return Ok(cur);
        }
    }

    /// Componentwise exp: maps `Λ^k O → Λ^k O*` (or the tensor analogue),
    /// dropping terms in which a slot becomes the unit.
    pub fn exp_slots(&self) -> FormalSum {
        let mut out = FormalSum::zero(self.arity, self.symmetry, self.twist, self.arity);
        'terms: for t in &self.terms {
            let mut slots = Vec::with_capacity(self.arity);
            for a in &t.slots {
                match exp_atom(a) {
                    Some(e) => slots.push(e),
                    None => continue 'terms,
                }
            }
            out.push(t.coeff.clone(), slots);
        }
        out
    }
}

/// exp of a single atom; `None` means the result is the unit of the
/// multiplicative group (an integer multiple of `2πi` was exponentiated).
pub fn exp_atom(atom: &Atom) -> Option<Atom> {
    match atom {
        Atom::TwoPiI(q) => {
            if q.denom().is_one() {
                None
            } else {
                let v = (two_pi_i() * q_to_f64(q)).exp();
                Some(Atom::germ(&format!("exp({}*2pi*i)", format_q(q)), v))
            }
        }
        Atom::Rational(q) => {
            if q.is_zero() {
                None
            } else {
                Some(Atom::germ(&format!("exp({})", format_q(q)), Complex64::new(q_to_f64(q), 0.0).exp()))
            }
        }
        Atom::Germ(g) => {
            let tag = format!("exp({})", g.tag);
            let value = g.value.exp();
            match &g.func {
                Some(f) => {
                    let f = f.clone();
                    Some(Atom::germ_fn(&tag, value, Rc::new(move |p: &[Complex64]| f(p).exp())))
                }
                None => Some(Atom::germ(&tag, value)),
            }
        }
    }
}

/// Returns (canonical atom, rational factor pulled out, term-dead flag).
fn canonicalize_atom(atom: &Atom, mult: bool, unit_tol: f64) -> (Atom, Q, bool) {
    if mult {
        // multiplicative slot: the unit kills the term, sign is torsion
        match atom {
            Atom::Rational(q) => {
                if q.is_one() || (-q.clone()).is_one() {
                    return (atom.clone(), Q::one(), true);
                }
                (atom.clone(), Q::one(), false)
            }
            Atom::Germ(g) => {
                if (g.value - Complex64::new(1.0, 0.0)).norm() <= unit_tol
                    || (g.value + Complex64::new(1.0, 0.0)).norm() <= unit_tol
                {
                    return (atom.clone(), Q::one(), true);
                }
                // in O*⊗Q both the sign (torsion) and inversion (negation of
                // the class) normalize away; inversion flips the coefficient
                let mut v = g.value;
                let mut factor = Q::one();
                let r = v.norm();
                if (r - 1.0).abs() <= unit_tol {
                    if quantize(v.im) < 0 {
                        v = v.inv();
                        factor = -factor;
                    }
                } else if r < 1.0 {
                    v = v.inv();
                    factor = -factor;
                }
                let mut g2 = g.clone();
                if germ_sign_flipped(v) {
                    v = -v;
                }
                g2.value = v;
                g2.func = None;
                (Atom::Germ(g2), factor, false)
            }
            Atom::TwoPiI(_) => (atom.clone(), Q::one(), false),
        }
    } else {
        match atom {
            Atom::TwoPiI(q) => {
                if q.is_zero() {
                    (atom.clone(), Q::zero(), true)
                } else {
                    (Atom::TwoPiI(Q::one()), q.clone(), false)
                }
            }
            Atom::Rational(q) => {
                if q.is_zero() {
                    (atom.clone(), Q::zero(), true)
                } else {
                    (Atom::Rational(Q::one()), q.clone(), false)
                }
            }
            Atom::Germ(g) => {
                if germ_sign_flipped(g.value) {
                    (atom.negated(), -Q::one(), false)
                } else {
                    (atom.clone(), Q::one(), false)
                }
            }
        }
    }
}

/// Insertion sort by key returning the permutation sign, or 0 if two keys
/// coincide (the wedge term vanishes).
fn sort_with_parity(slots: &mut [(AtomKey, Atom)]) -> i32 {
    let mut sign = 1;
    for i in 1..slots.len() {
        let mut j = i;
        while j > 0 && slots[j - 1].0 > slots[j].0 {
            slots.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    for w in slots.windows(2) {
        if w[0].0 == w[1].0 {
            return 0;
        }
    }
    sign
}

/// The non-associative star product on `Λ^{•−1} O` induced by
/// `a * b = (1/2πi)·ab` on the structure sheaf.
///
/// `(a_0∧…∧a_k) ∗ (b_0∧…∧b_l) = Σ_{i,j} (−1)^{k−j+i}
///   a_0∧…∧â_i∧…∧a_k ∧ (a_i·b_j/2πi) ∧ b_0∧…∧b̂_j∧…∧b_l`.
pub fn star_product(u: &FormalSum, v: &FormalSum) -> FormalSum {
    assert_eq!(u.symmetry, Symmetry::Wedge);
    assert_eq!(v.symmetry, Symmetry::Wedge);
    let k = u.arity - 1;
    let l = v.arity - 1;
    let mut out = FormalSum::wedge(k + l + 1, u.twist + v.twist);
    for tu in &u.terms {
        for tv in &v.terms {
            for i in 0..=k {
                for j in 0..=l {
                    let sign = if (k as i64 - j as i64 + i as i64).rem_euclid(2) == 0 {
                        Q::one()
                    } else {
                        -Q::one()
                    };
                    let (factor, merged) = merge_atoms(&tu.slots[i], &tv.slots[j]);
                    let mut slots = Vec::with_capacity(k + l + 1);
                    for (s, a) in tu.slots.iter().enumerate() {
                        if s != i {
                            slots.push(a.clone());
                        }
                    }
                    slots.push(merged);
                    for (s, b) in tv.slots.iter().enumerate() {
                        if s != j {
                            slots.push(b.clone());
                        }
                    }
                    out.push(&tu.coeff * &tv.coeff * sign * factor, slots);
                }
            }
        }
    }
    out
}

/// `a·b/(2πi)` as (rational factor, atom); exact whenever one side is a
/// `2πi`-multiple or a rational.
pub fn merge_atoms(a: &Atom, b: &Atom) -> (Q, Atom) {
    match (a, b) {
        (Atom::TwoPiI(p), Atom::TwoPiI(q)) => (p * q, Atom::two_pi_i()),
        (Atom::TwoPiI(p), other) | (other, Atom::TwoPiI(p)) => (p.clone(), other.clone()),
        (Atom::Rational(p), Atom::Rational(q)) => {
            let v = Complex64::new(q_to_f64(&(p * q)), 0.0) / two_pi_i();
            (Q::one(), Atom::germ(&format!("{}/(2pi i)", format_q(&(p * q))), v))
        }
        (Atom::Rational(p), Atom::Germ(g)) | (Atom::Germ(g), Atom::Rational(p)) => {
            let tag = format!("({})*{}/(2pi i)", format_q(p), g.tag);
            let pv = q_to_f64(p);
            let value = g.value * pv / two_pi_i();
            let atom = match &g.func {
                Some(f) => {
                    let f = f.clone();
                    Atom::germ_fn(&tag, value, Rc::new(move |x: &[Complex64]| f(x) * pv / two_pi_i()))
                }
                None => Atom::germ(&tag, value),
            };
            (Q::one(), atom)
        }
        (Atom::Germ(g), Atom::Germ(h)) => {
            let tag = format!("{}*{}/(2pi i)", g.tag, h.tag);
            let value = g.value * h.value / two_pi_i();
            let atom = match (&g.func, &h.func) {
                (Some(f1), Some(f2)) => {
                    let (f1, f2) = (f1.clone(), f2.clone());
                    Atom::germ_fn(&tag, value, Rc::new(move |x: &[Complex64]| f1(x) * f2(x) / two_pi_i()))
                }
                (Some(f1), None) => {
                    let (f1, hv) = (f1.clone(), h.value);
                    Atom::germ_fn(&tag, value, Rc::new(move |x: &[Complex64]| f1(x) * hv / two_pi_i()))
                }
                (None, Some(f2)) => {
                    let (gv, f2) = (g.value, f2.clone());
                    Atom::germ_fn(&tag, value, Rc::new(move |x: &[Complex64]| gv * f2(x) / two_pi_i()))
                }
                (None, None) => Atom::germ(&tag, value),
            };
            (Q::one(), atom)
        }
    }
}

/// Differential of the weight-`n` exponential complex on a degree-`k`
/// cochain of shape `⊗^{k−1} O* ⊗ O ⊗ (2πi)^{⊗(n−k)}`:
/// the `O`-slot exponentiates and a `2πi` factor shifts into the `O`-slot.
pub fn exp_differential(x: &FormalSum, n: i64, k: usize) -> Result<FormalSum, WedgeError> {
    if k == 0
        || x.symmetry != Symmetry::Tensor
        || x.arity != k
        || x.star_slots + 1 != k
        || x.twist != n - k as i64
    {
        return Err(WedgeError::ShapeMismatch(format!(
            "expected degree-{k} cochain of the weight-{n} exponential complex, got arity {} star {} twist {}",
            x.arity, x.star_slots, x.twist
        )));
    }
    let mut out = if x.twist > 0 {
        FormalSum::tensor(x.arity + 1, x.twist - 1, x.arity)
    } else {
        FormalSum::tensor(x.arity, 0, x.arity)
    };
    'terms: for t in &x.terms {
        let mut slots: Vec<Atom> = t.slots[..x.arity - 1].to_vec();
        match exp_atom(&t.slots[x.arity - 1]) {
            Some(e) => slots.push(e),
            None => continue 'terms,
        }
        if x.twist > 0 {
            slots.push(Atom::two_pi_i());
        }
        out.push(t.coeff.clone(), slots);
    }
    Ok(out)
}

/// Differential of the weight-`n` Lie-exponential complex on a degree-`k`
/// cochain `(2πi)^{n−k} ⊗ Λ^k O`: prepend a `2πi` slot while the twist is
/// positive, exponentiate all slots at the top.
pub fn lie_exp_differential(x: &FormalSum, n: i64, k: usize) -> Result<FormalSum, WedgeError> {
    if x.symmetry != Symmetry::Wedge || x.arity != k || x.twist != n - k as i64 {
        return Err(WedgeError::ShapeMismatch(format!(
            "expected degree-{k} cochain of the weight-{n} Lie-exponential complex, got arity {} twist {}",
            x.arity, x.twist
        )));
    }
    if x.twist > 0 {
        let mut out = FormalSum::wedge(x.arity + 1, x.twist - 1);
        for t in &x.terms {
            let mut slots = Vec::with_capacity(x.arity + 1);
            slots.push(Atom::two_pi_i());
            slots.extend(t.slots.iter().cloned());
            out.push(t.coeff.clone(), slots);
        }
        Ok(out)
    } else {
        Ok(x.exp_slots())
    }
}

// ---------------------------------------------------------------------------
// serde: {arity, symmetry, twist, star_slots, terms:[{coeff, slots:[...]}]}
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct AtomJson {
    kind: String,
    value: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    q: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tag: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    branch: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    coeff: String,
    slots: Vec<AtomJson>,
}

#[derive(Serialize, Deserialize)]
struct FormalSumJson {
    arity: usize,
    symmetry: Symmetry,
    twist: i64,
    #[serde(default)]
    star_slots: usize,
    terms: Vec<TermJson>,
}

impl Serialize for FormalSum {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let terms = self
            .terms
            .iter()
            .map(|t| TermJson {
                coeff: format_q(&t.coeff),
                slots: t
                    .slots
                    .iter()
                    .map(|a| match a {
                        Atom::TwoPiI(q) => AtomJson {
                            kind: "two-pi-i".into(),
                            value: [a.value().re, a.value().im],
                            q: Some(format_q(q)),
                            tag: None,
                            branch: None,
                        },
                        Atom::Rational(q) => AtomJson {
                            kind: "rational".into(),
                            value: [a.value().re, a.value().im],
                            q: Some(format_q(q)),
                            tag: None,
                            branch: None,
                        },
                        Atom::Germ(g) => AtomJson {
                            kind: "germ".into(),
                            value: [g.value.re, g.value.im],
                            q: None,
                            tag: Some(g.tag.clone()),
                            branch: g.branch.clone(),
                        },
                    })
                    .collect(),
            })
            .collect();
        FormalSumJson {
            arity: self.arity,
            symmetry: self.symmetry,
            twist: self.twist,
            star_slots: self.star_slots,
            terms,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FormalSum {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = FormalSumJson::deserialize(d)?;
        let mut out = FormalSum::zero(raw.arity, raw.symmetry, raw.twist, raw.star_slots);
        for t in raw.terms {
            let coeff = parse_q(&t.coeff).map_err(serde::de::Error::custom)?;
            let slots = t
                .slots
                .into_iter()
                .map(|a| match a.kind.as_str() {
                    "two-pi-i" => {
                        let q = a.q.as_deref().map(parse_q).transpose().map_err(serde::de::Error::custom)?;
                        Ok(Atom::TwoPiI(q.unwrap_or_else(Q::one)))
                    }
                    "rational" => {
                        let q = a.q.as_deref().map(parse_q).transpose().map_err(serde::de::Error::custom)?;
                        Ok(Atom::Rational(q.unwrap_or_else(Q::one)))
                    }
                    "germ" => Ok(Atom::Germ(Germ {
                        tag: a.tag.unwrap_or_default(),
                        value: Complex64::new(a.value[0], a.value[1]),
                        branch: a.branch,
                        func: None,
                    })),
                    other => Err(serde::de::Error::custom(format!("unknown atom kind {other:?}"))),
                })
                .collect::<Result<Vec<_>, D::Error>>()?;
            out.push(coeff, slots);
        }
        Ok(out)
    }
}

impl fmt::Display for FormalSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let sep = if self.symmetry == Symmetry::Wedge { " ^ " } else { " (x) " };
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}*[", format_q(&t.coeff))?;
            for (j, a) in t.slots.iter().enumerate() {
                if j > 0 {
                    write!(f, "{sep}")?;
                }
                match a {
                    Atom::TwoPiI(q) => write!(f, "{}·2πi", format_q(q))?,
                    Atom::Rational(q) => write!(f, "{}", format_q(q))?,
                    Atom::Germ(g) => write!(f, "{}", g.tag)?,
                }
            }
            write!(f, "]")?;
        }
        if self.twist != 0 {
            write!(f, " (2πi)^{}", self.twist)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests;
