//! Weight-graded unipotent period matrices and the big period maps.
//!
//! A matrix here always has ones on the diagonal and is lower triangular
//! with respect to a nondecreasing vector of levels (`level k` standing for
//! weight `−2k`); entries are exact rationals, exact polynomials in named
//! symbols, or branch-tracked complex germs. All the maps of this module —
//! the big period, its tensor-word extensions, the coproduct and the
//! logarithm of the coproduct — are plain finite sums over chains of matrix
//! indices, so one implementation serves symbolic, exact-rational and
//! numeric inputs alike.

use crate::qnum::{q_int, quantize, Q};
use crate::sym::Poly;
use crate::wedge::{Atom, FormalSum, GermFn, Germ, Symmetry};
use num::complex::Complex64;
use num::traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::rc::Rc;

#[derive(Debug, thiserror::Error)]
pub enum PeriodError {
    #[error("matrix is not unipotent lower-triangular in block order: {0}")]
    BadMatrix(String),
    #[error("frame indices must sit in the top and bottom weight blocks")]
    BadFrame,
    #[error("weight mismatch: {0}")]
    WeightMismatch(String),
    #[error("symbolic entries cannot be used here: {0}")]
    Symbolic(String),
}

/// A matrix entry: exact rational, exact polynomial, or complex germ.
#[derive(Clone)]
pub enum Scalar {
    Rat(Q),
    Poly(Poly),
    Germ { tag: String, value: Complex64, func: Option<GermFn> },
}

impl std::fmt::Debug for Scalar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scalar::Rat(q) => write!(f, "{}", crate::qnum::format_q(q)),
            Scalar::Poly(p) => write!(f, "{p}"),
            Scalar::Germ { tag, value, .. } => write!(f, "{tag}={value}"),
        }
    }
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Rat(Q::zero())
    }

    pub fn one() -> Self {
        Scalar::Rat(Q::one())
    }

    pub fn rat(q: Q) -> Self {
        Scalar::Rat(q)
    }

    pub fn var(name: &str) -> Self {
        Scalar::Poly(Poly::var(name))
    }

    pub fn germ(tag: &str, value: Complex64) -> Self {
        Scalar::Germ { tag: tag.into(), value, func: None }
    }

    pub fn germ_fn(tag: &str, value: Complex64, func: GermFn) -> Self {
        Scalar::Germ { tag: tag.into(), value, func: Some(func) }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rat(q) => q.is_zero(),
            Scalar::Poly(p) => p.is_zero(),
            Scalar::Germ { .. } => false,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Rat(q) => q.is_one(),
            Scalar::Poly(p) => p.is_one(),
            Scalar::Germ { .. } => false,
        }
    }

    pub fn value(&self) -> Complex64 {
        match self {
            Scalar::Rat(q) => Complex64::new(crate::qnum::q_to_f64(q), 0.0),
            Scalar::Poly(_) => Complex64::new(f64::NAN, f64::NAN),
            Scalar::Germ { value, .. } => *value,
        }
    }

    /// Evaluates as a function of parameters where a closure is present.
    pub fn eval(&self, params: &[Complex64]) -> Complex64 {
        match self {
            Scalar::Germ { func: Some(f), .. } => f(params),
            other => other.value(),
        }
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a + b),
            (Scalar::Poly(a), Scalar::Poly(b)) => Scalar::Poly(a.add(b)),
            (Scalar::Rat(a), Scalar::Poly(b)) | (Scalar::Poly(b), Scalar::Rat(a)) => {
                Scalar::Poly(Poly::constant(a.clone()).add(b))
            }
            (a, b) => {
                if a.is_zero() {
                    return b.clone();
                }
                if b.is_zero() {
                    return a.clone();
                }
                germ_binop(a, b, "+", |x, y| x + y)
            }
        }
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a * b),
            (Scalar::Poly(a), Scalar::Poly(b)) => Scalar::Poly(a.mul(b)),
            (Scalar::Rat(a), Scalar::Poly(b)) | (Scalar::Poly(b), Scalar::Rat(a)) => {
                Scalar::Poly(b.scale(a))
            }
            (a, b) => {
                if a.is_zero() || b.is_zero() {
                    return Scalar::zero();
                }
                if a.is_one() {
                    return b.clone();
                }
                if b.is_one() {
                    return a.clone();
                }
                germ_binop(a, b, "*", |x, y| x * y)
            }
        }
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Rat(q) => Scalar::Rat(-q.clone()),
            Scalar::Poly(p) => Scalar::Poly(p.neg()),
            Scalar::Germ { tag, value, func } => {
                let func = func.clone().map(|f| -> GermFn { Rc::new(move |p: &[Complex64]| -f(p)) });
                Scalar::Germ { tag: format!("-({tag})"), value: -*value, func }
            }
        }
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        self.add(&other.neg())
    }

    pub fn to_atom(&self) -> Atom {
        match self {
            Scalar::Rat(q) => Atom::Rational(q.clone()),
            Scalar::Poly(_) => panic!("symbolic scalar has no numeric atom"),
            Scalar::Germ { tag, value, func } => Atom::Germ(Germ {
                tag: tag.clone(),
                value: *value,
                branch: None,
                func: func.clone(),
            }),
        }
    }
}

fn germ_binop(a: &Scalar, b: &Scalar, op: &str, f: fn(Complex64, Complex64) -> Complex64) -> Scalar {
    let tag = format!("({:?}{op}{:?})", a, b);
    let value = f(a.value(), b.value());
    let (fa, fb) = (scalar_fn(a), scalar_fn(b));
    match (fa, fb) {
        (None, None) => Scalar::Germ { tag, value, func: None },
        (ga, gb) => {
            let (va, vb) = (a.value(), b.value());
            let func: GermFn = Rc::new(move |p: &[Complex64]| {
                let x = ga.as_ref().map(|g| g(p)).unwrap_or(va);
                let y = gb.as_ref().map(|g| g(p)).unwrap_or(vb);
                f(x, y)
            });
            Scalar::Germ { tag, value, func: Some(func) }
        }
    }
}

fn scalar_fn(s: &Scalar) -> Option<GermFn> {
    match s {
        Scalar::Germ { func, .. } => func.clone(),
        _ => None,
    }
}

/// Weight-graded unipotent lower-triangular matrix in the normalized
/// convention: every entry is a weight-zero quantity.
#[derive(Debug, Clone)]
pub struct PeriodMatrix {
    /// nondecreasing level per index; level k sits in weight −2k
    pub levels: Vec<u32>,
    pub entries: Vec<Vec<Scalar>>,
}

impl PeriodMatrix {
    pub fn new(levels: Vec<u32>, entries: Vec<Vec<Scalar>>) -> Result<Self, PeriodError> {
        let n = levels.len();
        if entries.len() != n || entries.iter().any(|r| r.len() != n) {
            return Err(PeriodError::BadMatrix("entry grid is not square".into()));
        }
        if levels.windows(2).any(|w| w[0] > w[1]) {
            return Err(PeriodError::BadMatrix("levels must be nondecreasing".into()));
        }
        for i in 0..n {
            if !entries[i][i].is_one() {
                return Err(PeriodError::BadMatrix(format!("diagonal entry {i} is not 1")));
            }
            for j in (i + 1)..n {
                if !entries[i][j].is_zero() {
                    return Err(PeriodError::BadMatrix(format!("entry ({i},{j}) above the diagonal")));
                }
            }
        }
        Ok(PeriodMatrix { levels, entries })
    }

    pub fn size(&self) -> usize {
        self.levels.len()
    }

    pub fn identity(levels: Vec<u32>) -> Self {
        let n = levels.len();
        let entries = (0..n)
            .map(|i| (0..n).map(|j| if i == j { Scalar::one() } else { Scalar::zero() }).collect())
            .collect();
        PeriodMatrix { levels, entries }
    }

    /// Unipotent inverse via the finite Neumann series.
    pub fn inverse(&self) -> PeriodMatrix {
        let n = self.size();
        // N = M − I
        let nil: Vec<Vec<Scalar>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { Scalar::zero() } else { self.entries[i][j].clone() })
                    .collect()
            })
            .collect();
        let mut inv: Vec<Vec<Scalar>> = PeriodMatrix::identity(self.levels.clone()).entries;
        let mut power = nil.clone();
        let mut sign = -1i32;
        for _ in 0..n {
            let mut all_zero = true;
            for i in 0..n {
                for j in 0..n {
                    if !power[i][j].is_zero() {
                        all_zero = false;
                        let term = if sign > 0 { power[i][j].clone() } else { power[i][j].neg() };
                        inv[i][j] = inv[i][j].add(&term);
                    }
                }
            }
            if all_zero {
                break;
            }
            power = mat_mul(&power, &nil);
            sign = -sign;
        }
        PeriodMatrix { levels: self.levels.clone(), entries: inv }
    }

    pub fn mul(&self, other: &PeriodMatrix) -> PeriodMatrix {
        PeriodMatrix {
            levels: self.levels.clone(),
            entries: mat_mul(&self.entries, &other.entries),
        }
    }

    /// Kronecker product, with levels added; index pairs are flattened in
    /// row-major order and then stably sorted by level.
    pub fn tensor(&self, other: &PeriodMatrix) -> (PeriodMatrix, Vec<(usize, usize)>) {
        let (n, m) = (self.size(), other.size());
        let mut index: Vec<(usize, usize)> = Vec::with_capacity(n * m);
        for i in 0..n {
            for j in 0..m {
                index.push((i, j));
            }
        }
        index.sort_by_key(|(i, j)| self.levels[*i] + other.levels[*j]);
        let levels: Vec<u32> =
            index.iter().map(|(i, j)| self.levels[*i] + other.levels[*j]).collect();
        let entries: Vec<Vec<Scalar>> = index
            .iter()
            .map(|(i, j)| {
                index
                    .iter()
                    .map(|(k, l)| self.entries[*i][*k].mul(&other.entries[*j][*l]))
                    .collect()
            })
            .collect();
        (PeriodMatrix { levels, entries }, index)
    }

    /// Evaluates germ entries at parameters, producing a numeric matrix.
    pub fn eval(&self, params: &[Complex64]) -> Vec<Vec<Complex64>> {
        self.entries.iter().map(|r| r.iter().map(|e| e.eval(params)).collect()).collect()
    }
}

fn mat_mul(a: &[Vec<Scalar>], b: &[Vec<Scalar>]) -> Vec<Vec<Scalar>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut acc = Scalar::zero();
                    for k in 0..n {
                        if !a[i][k].is_zero() && !b[k][j].is_zero() {
                            acc = acc.add(&a[i][k].mul(&b[k][j]));
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// A framing: the row of `f^n` and the column of `v_0`.
#[derive(Clone, Debug)]
pub struct FramedMatrix {
    pub matrix: Rc<PeriodMatrix>,
    pub row: usize,
    pub col: usize,
}

impl FramedMatrix {
    pub fn new(matrix: Rc<PeriodMatrix>, row: usize, col: usize) -> Result<Self, PeriodError> {
        if row >= matrix.size() || col >= matrix.size() || matrix.levels[row] < matrix.levels[col]
        {
            return Err(PeriodError::BadFrame);
        }
        Ok(FramedMatrix { matrix, row, col })
    }

    pub fn weight(&self) -> u32 {
        self.matrix.levels[self.row] - self.matrix.levels[self.col]
    }
}

// ---------------------------------------------------------------------------
// tensor chains in C ⊗_Q C and the associative merge product
// ---------------------------------------------------------------------------

/// A Q-linear combination of simple tensors with `Scalar` slots; the home of
/// the big period and its star extensions before atoms enter the picture.
#[derive(Clone, Debug)]
pub struct ScalarTensor {
    pub arity: usize,
    pub terms: Vec<(Q, Vec<Scalar>)>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum SlotKey {
    Mono(crate::sym::Monomial),
    Germ(i128, i128),
}

impl ScalarTensor {
    pub fn zero(arity: usize) -> Self {
        ScalarTensor { arity, terms: Vec::new() }
    }

    pub fn push(&mut self, coeff: Q, slots: Vec<Scalar>) {
        assert_eq!(slots.len(), self.arity);
        self.terms.push((coeff, slots));
    }

    pub fn neg(&self) -> Self {
        ScalarTensor {
            arity: self.arity,
            terms: self.terms.iter().map(|(c, s)| (-c.clone(), s.clone())).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.arity, other.arity);
        let mut out = self.clone();
        out.terms.extend(other.terms.iter().cloned());
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Ring product in the tensor algebra: slotwise multiplication.
    pub fn ring_mul(&self, other: &Self) -> Self {
        assert_eq!(self.arity, other.arity);
        let mut out = ScalarTensor::zero(self.arity);
        for (c1, s1) in &self.terms {
            for (c2, s2) in &other.terms {
                let slots: Vec<Scalar> = s1.iter().zip(s2).map(|(a, b)| a.mul(b)).collect();
                out.push(c1 * c2, slots);
            }
        }
        out
    }

    /// Merge product `(a_0⊗…⊗a_k) ∗ (b_0⊗…⊗b_l) = a_0⊗…⊗(a_k·b_0)⊗…⊗b_l`.
    pub fn merge_star(&self, other: &Self) -> Self {
        let mut out = ScalarTensor::zero(self.arity + other.arity - 1);
        for (c1, s1) in &self.terms {
            for (c2, s2) in &other.terms {
                let mut slots: Vec<Scalar> = s1[..s1.len() - 1].to_vec();
                slots.push(s1[s1.len() - 1].mul(&s2[0]));
                slots.extend(s2[1..].iter().cloned());
                out.push(c1 * c2, slots);
            }
        }
        out
    }

    /// Exact Q-bilinear normal form: polynomial slots split into monomials
    /// with coefficients extracted; germ slots merge by quantized value with
    /// the sign normalized away.
    pub fn normalize(&self) -> Self {
        let mut merged: BTreeMap<Vec<SlotKey>, (Q, Vec<Scalar>)> = BTreeMap::new();
        for (coeff, slots) in &self.terms {
            // distribute polynomial slots over their monomials
            let mut expanded: Vec<(Q, Vec<Scalar>)> = vec![(coeff.clone(), Vec::new())];
            for s in slots {
                match s {
                    Scalar::Rat(q) => {
                        if q.is_zero() {
                            expanded.clear();
                            break;
                        }
                        for (c, v) in &mut expanded {
                            *c *= q;
                            v.push(Scalar::one());
                        }
                    }
                    Scalar::Poly(p) => {
                        if p.is_zero() {
                            expanded.clear();
                            break;
                        }
                        let mut next = Vec::with_capacity(expanded.len() * p.terms.len());
                        for (mono, mc) in &p.terms {
                            for (c, v) in &expanded {
                                let mut v = v.clone();
                                let mut monomial = Poly::zero();
                                monomial.terms.insert(mono.clone(), Q::one());
                                v.push(Scalar::Poly(monomial));
                                next.push((c * mc, v));
                            }
                        }
                        expanded = next;
                    }
                    Scalar::Germ { .. } => {
                        let v = s.value();
                        let flip = quantize(v.re) < 0 || (quantize(v.re) == 0 && quantize(v.im) < 0);
                        for (c, slots) in &mut expanded {
                            if flip {
                                *c = -c.clone();
                                slots.push(s.neg());
                            } else {
                                slots.push(s.clone());
                            }
                        }
                    }
                }
            }
            for (c, v) in expanded {
                if c.is_zero() {
                    continue;
                }
                let key: Vec<SlotKey> = v
                    .iter()
                    .map(|s| match s {
                        Scalar::Rat(_) => SlotKey::Mono(Vec::new()),
                        Scalar::Poly(p) => {
                            SlotKey::Mono(p.terms.keys().next().cloned().unwrap_or_default())
                        }
                        Scalar::Germ { value, .. } => {
                            SlotKey::Germ(quantize(value.re), quantize(value.im))
                        }
                    })
                    .collect();
                match merged.get_mut(&key) {
                    Some((acc, _)) => *acc += c,
                    None => {
                        merged.insert(key, (c, v));
                    }
                }
            }
        }
        let terms = merged.into_values().filter(|(c, _)| !c.is_zero()).collect();
        ScalarTensor { arity: self.arity, terms }
    }

    pub fn is_zero_normalized(&self) -> bool {
        self.normalize().terms.is_empty()
    }

    /// Swaps the two factors of an arity-2 tensor.
    pub fn swap(&self) -> Self {
        assert_eq!(self.arity, 2);
        ScalarTensor {
            arity: 2,
            terms: self
                .terms
                .iter()
                .map(|(c, s)| (c.clone(), vec![s[1].clone(), s[0].clone()]))
                .collect(),
        }
    }

    /// Converts to an additive tensor `FormalSum` (numeric slots only).
    pub fn to_formal_sum(&self) -> FormalSum {
        let mut out = FormalSum::tensor(self.arity, 0, 0);
        for (c, slots) in &self.terms {
            out.push(c.clone(), slots.iter().map(|s| s.to_atom()).collect());
        }
        out
    }

    /// Largest absolute leftover coefficient when compared numerically.
    pub fn numeric_residual(&self) -> f64 {
        let n = self.normalize();
        let mut worst = 0.0f64;
        for (c, slots) in &n.terms {
            let mut mag = crate::qnum::q_to_f64(c).abs();
            for s in slots {
                mag *= s.value().norm();
            }
            worst = worst.max(mag);
        }
        worst
    }
}

// ---------------------------------------------------------------------------
// the big period maps
// ---------------------------------------------------------------------------

/// `⟨f^n | M ⊗ M⁻¹ | v_0⟩ ∈ C ⊗_Q C`, Q-linear in the framing.
pub fn big_period_prime(frame: &FramedMatrix) -> ScalarTensor {
    let m = &frame.matrix;
    let inv = m.inverse();
    let mut out = ScalarTensor::zero(2);
    for k in 0..m.size() {
        let a = &m.entries[frame.row][k];
        let b = &inv.entries[k][frame.col];
        if !a.is_zero() && !b.is_zero() {
            out.push(Q::one(), vec![a.clone(), b.clone()]);
        }
    }
    out
}

/// The big period: composes the prime map with
/// `a ⊗ b ↦ exp(2πi·a) ⊗ 2πi·b ⊗ (2πi)^{n−2}`.
/// Terms whose first factor exponentiates to the unit are dropped.
pub fn big_period(frame: &FramedMatrix) -> Result<FormalSum, PeriodError> {
    let n = frame.weight() as i64;
    let prime = big_period_prime(frame);
    let mut out = FormalSum::tensor(2, n - 2, 1);
    'terms: for (c, slots) in &prime.terms {
        let a = &slots[0];
        let b = &slots[1];
        let first = match a {
            Scalar::Rat(q) => {
                if q.denom().is_one() {
                    continue 'terms; // exp(2πi·integer) is the unit
                }
                let v = (Complex64::new(0.0, 2.0 * PI) * crate::qnum::q_to_f64(q)).exp();
                Atom::germ(&format!("exp(2πi·{})", crate::qnum::format_q(q)), v)
            }
            Scalar::Poly(_) => return Err(PeriodError::Symbolic("big period".into())),
            Scalar::Germ { tag, value, func } => {
                let v = (Complex64::new(0.0, 2.0 * PI) * value).exp();
                if (v - Complex64::new(1.0, 0.0)).norm() < 1e-12 {
                    continue 'terms;
                }
                let tag = format!("exp(2πi·{tag})");
                match func {
                    Some(f) => {
                        let f = f.clone();
                        Atom::germ_fn(&tag, v, Rc::new(move |p: &[Complex64]| {
                            (Complex64::new(0.0, 2.0 * PI) * f(p)).exp()
                        }))
                    }
                    None => Atom::germ(&tag, v),
                }
            }
        };
        let second = match b {
            Scalar::Rat(q) => Atom::TwoPiI(q.clone()),
            Scalar::Poly(_) => return Err(PeriodError::Symbolic("big period".into())),
            Scalar::Germ { tag, value, func } => {
                let v = Complex64::new(0.0, 2.0 * PI) * value;
                let tag = format!("2πi·{tag}");
                match func {
                    Some(f) => {
                        let f = f.clone();
                        Atom::germ_fn(&tag, v, Rc::new(move |p: &[Complex64]| {
                            Complex64::new(0.0, 2.0 * PI) * f(p)
                        }))
                    }
                    None => Atom::germ(&tag, v),
                }
            }
        };
        out.push(c.clone(), vec![first, second]);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// cobar words and the coproduct
// ---------------------------------------------------------------------------

/// A word in the reduced cobar complex: factors with matching intermediate
/// frames and positive weights.
pub type CobarWord = Vec<FramedMatrix>;

/// A Q-combination of cobar words.
#[derive(Clone, Debug, Default)]
pub struct WordSum {
    pub terms: Vec<(Q, CobarWord)>,
}

impl WordSum {
    pub fn single(word: CobarWord) -> Self {
        WordSum { terms: vec![(Q::one(), word)] }
    }

    pub fn push(&mut self, coeff: Q, word: CobarWord) {
        self.terms.push((coeff, word));
    }

    /// Collects words by (matrix identity, frame indices); exact.
    pub fn normalize(&self) -> Self {
        let mut merged: BTreeMap<Vec<(usize, usize, usize)>, (Q, CobarWord)> = BTreeMap::new();
        for (c, word) in &self.terms {
            let key: Vec<(usize, usize, usize)> = word
                .iter()
                .map(|f| (Rc::as_ptr(&f.matrix) as usize, f.row, f.col))
                .collect();
            match merged.get_mut(&key) {
                Some((acc, _)) => *acc += c,
                None => {
                    merged.insert(key, (c.clone(), word.clone()));
                }
            }
        }
        WordSum { terms: merged.into_values().filter(|(c, _)| !c.is_zero()).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.normalize().terms.is_empty()
    }
}

/// The reduced coproduct of a framed matrix: all two-factor splits through
/// strictly intermediate levels, summing over the coordinate basis of each
/// level block.
pub fn coproduct(frame: &FramedMatrix) -> Vec<(FramedMatrix, FramedMatrix)> {
    let m = &frame.matrix;
    let top = m.levels[frame.row];
    let bot = m.levels[frame.col];
    let mut out = Vec::new();
    for mid in 0..m.size() {
        let lvl = m.levels[mid];
        if lvl > bot && lvl < top {
            let left = FramedMatrix { matrix: frame.matrix.clone(), row: frame.row, col: mid };
            let right = FramedMatrix { matrix: frame.matrix.clone(), row: mid, col: frame.col };
            out.push((left, right));
        }
    }
    out
}

/// The cobar differential `Δ'(a_1⊗…⊗a_m) = Σ_j (−1)^j a_1⊗…⊗Δ'(a_j)⊗…⊗a_m`
/// (1-based signs), extended Q-linearly.
pub fn cobar_differential(words: &WordSum) -> WordSum {
    let mut out = WordSum::default();
    for (c, word) in &words.terms {
        for (j, factor) in word.iter().enumerate() {
            let sign = if (j + 1) % 2 == 0 { Q::one() } else { -Q::one() };
            for (left, right) in coproduct(factor) {
                let mut new_word: CobarWord = word[..j].to_vec();
                new_word.push(left);
                new_word.push(right);
                new_word.extend(word[j + 1..].iter().cloned());
                out.push(c * &sign, new_word);
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// the maps P_n^k into the exponential complex
// ---------------------------------------------------------------------------

fn word_weight(word: &CobarWord) -> u32 {
    word.iter().map(|f| f.weight()).sum()
}

/// `P'^k_n` on a word: the merge-star of the factors' prime periods.
pub fn big_period_prime_word(word: &CobarWord) -> ScalarTensor {
    let mut acc: Option<ScalarTensor> = None;
    for f in word {
        let p = big_period_prime(f);
        acc = Some(match acc {
            None => p,
            Some(prev) => prev.merge_star(&p),
        });
    }
    acc.unwrap_or_else(|| ScalarTensor::zero(1))
}

/// `P_n^k`: for `k = n` the identity onto `⊗^n O*`; otherwise
/// `(2πi)^{⊗(n−k−1)} ⊗ (Exp^{(k)} ⊗ 2πi·Id) ∘ P'^k_n`.
pub fn p_n_k(word: &CobarWord, n: u32, k: usize) -> Result<FormalSum, PeriodError> {
    if word.len() != k {
        return Err(PeriodError::WeightMismatch(format!(
            "word length {} does not match k = {k}",
            word.len()
        )));
    }
    if word_weight(word) != n {
        return Err(PeriodError::WeightMismatch(format!(
            "word weight {} does not match n = {n}",
            word_weight(word)
        )));
    }
    if k as u32 == n {
        // every factor has weight 1; the word is already in ⊗^n O*
        let mut out = FormalSum::tensor(k, 0, k);
        let mut slots = Vec::with_capacity(k);
        for f in word {
            let p = &f.matrix.entries[f.row][f.col];
            let atom = match p {
                Scalar::Rat(q) => {
                    if q.denom().is_one() {
                        return Ok(out); // the unit: empty sum
                    }
                    let v = (Complex64::new(0.0, 2.0 * PI) * crate::qnum::q_to_f64(q)).exp();
                    Atom::germ(&format!("exp(2πi·{})", crate::qnum::format_q(q)), v)
                }
                Scalar::Poly(_) => return Err(PeriodError::Symbolic("p_n_k".into())),
                Scalar::Germ { tag, value, func } => {
                    let v = (Complex64::new(0.0, 2.0 * PI) * value).exp();
                    let tag = format!("exp(2πi·{tag})");
                    match func {
                        Some(fc) => {
                            let fc = fc.clone();
                            Atom::germ_fn(&tag, v, Rc::new(move |p: &[Complex64]| {
                                (Complex64::new(0.0, 2.0 * PI) * fc(p)).exp()
                            }))
                        }
                        None => Atom::germ(&tag, v),
                    }
                }
            };
            slots.push(atom);
        }
        out.push(Q::one(), slots);
        return Ok(out);
    }
    let chain = big_period_prime_word(word);
    let twist = n as i64 - k as i64 - 1;
    let mut out = FormalSum::tensor(k + 1, twist, k);
    'terms: for (c, slots) in &chain.terms {
        let mut atoms = Vec::with_capacity(k + 1);
        for a in &slots[..k] {
            match a {
                Scalar::Rat(q) => {
                    if q.denom().is_one() {
                        continue 'terms;
                    }
                    let v = (Complex64::new(0.0, 2.0 * PI) * crate::qnum::q_to_f64(q)).exp();
                    atoms.push(Atom::germ(&format!("exp(2πi·{})", crate::qnum::format_q(q)), v));
                }
                Scalar::Poly(_) => return Err(PeriodError::Symbolic("p_n_k".into())),
                Scalar::Germ { tag, value, func } => {
                    let v = (Complex64::new(0.0, 2.0 * PI) * value).exp();
                    if (v - Complex64::new(1.0, 0.0)).norm() < 1e-12 {
                        continue 'terms;
                    }
                    let tag = format!("exp(2πi·{tag})");
                    match func {
                        Some(fc) => {
                            let fc = fc.clone();
                            atoms.push(Atom::germ_fn(&tag, v, Rc::new(move |p: &[Complex64]| {
                                (Complex64::new(0.0, 2.0 * PI) * fc(p)).exp()
                            })));
                        }
                        None => atoms.push(Atom::germ(&tag, v)),
                    }
                }
            }
        }
        // the O-slot takes 2πi · b
        match &slots[k] {
            Scalar::Rat(q) => atoms.push(Atom::TwoPiI(q.clone())),
            Scalar::Poly(_) => return Err(PeriodError::Symbolic("p_n_k".into())),
            Scalar::Germ { tag, value, func } => {
                let v = Complex64::new(0.0, 2.0 * PI) * value;
                let tag = format!("2πi·{tag}");
                match func {
                    Some(fc) => {
                        let fc = fc.clone();
                        atoms.push(Atom::germ_fn(&tag, v, Rc::new(move |p: &[Complex64]| {
                            Complex64::new(0.0, 2.0 * PI) * fc(p)
                        })));
                    }
                    None => atoms.push(Atom::germ(&tag, v)),
                }
            }
        }
        out.push(c.clone(), atoms);
    }
    Ok(out)
}

/// Q-linear extension of `p_n_k` to word sums.
pub fn p_n_k_sum(words: &WordSum, n: u32, k: usize) -> Result<FormalSum, PeriodError> {
    let mut acc: Option<FormalSum> = None;
    for (c, word) in &words.terms {
        let f = p_n_k(word, n, k)?.scale(c);
        acc = Some(match acc {
            None => f,
            Some(prev) => prev.add(&f),
        });
    }
    Ok(acc.unwrap_or_else(|| FormalSum::tensor(k + 1, n as i64 - k as i64 - 1, k)))
}

// ---------------------------------------------------------------------------
// Griffiths transversality
// ---------------------------------------------------------------------------

/// Residual report for a parametrized variation.
#[derive(Debug, Clone, Default)]
pub struct GriffithsReport {
    /// worst amplitude-≥2 entry of the connection dM·M⁻¹
    pub connection_residual: f64,
    /// worst residual of the first-order equations
    /// `d m_{r,c} = Σ_{level(k)=level(r)−1} d m_{r,k} · m_{k,c}`
    pub differential_equation_residual: f64,
}

/// Checks Griffiths transversality of a variation at the given parameter
/// points by fourth-order finite differences along each coordinate.
pub fn griffiths_check(
    matrix: &PeriodMatrix,
    samples: &[Vec<Complex64>],
    h: f64,
) -> GriffithsReport {
    let n = matrix.size();
    let mut report = GriffithsReport::default();
    for point in samples {
        let dims = point.len();
        for dir in 0..dims {
            let mut tangent = vec![Complex64::new(0.0, 0.0); dims];
            tangent[dir] = Complex64::new(1.0, 0.0);
            // dM in this direction
            let dm: Vec<Vec<Complex64>> = matrix
                .entries
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|e| match e {
                            Scalar::Germ { func: Some(f), .. } => {
                                crate::wedge::directional_derivative(&**f, point, &tangent, h)
                            }
                            _ => Complex64::new(0.0, 0.0),
                        })
                        .collect()
                })
                .collect();
            let m = matrix.eval(point);
            let minv = numeric_unipotent_inverse(&m);
            // connection dM·M⁻¹
            for r in 0..n {
                for c in 0..n {
                    if matrix.levels[r] >= matrix.levels[c] + 2 {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for k in 0..n {
                            acc += dm[r][k] * minv[k][c];
                        }
                        report.connection_residual = report.connection_residual.max(acc.norm());
                        // first-order equation
                        let mut rhs = Complex64::new(0.0, 0.0);
                        for k in 0..n {
                            if matrix.levels[k] + 1 == matrix.levels[r] {
                                rhs += dm[r][k] * m[k][c];
                            }
                        }
                        report.differential_equation_residual = report
                            .differential_equation_residual
                            .max((dm[r][c] - rhs).norm());
                    }
                }
            }
        }
    }
    report
}

fn numeric_unipotent_inverse(m: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let n = m.len();
    let mut nil = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                nil[i][j] = m[i][j];
            }
        }
    }
    let mut inv = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    let mut power = nil.clone();
    let mut sign = -1.0;
    for _ in 0..n {
        let mut all_zero = true;
        for i in 0..n {
            for j in 0..n {
                if power[i][j].norm() != 0.0 {
                    all_zero = false;
                    inv[i][j] += sign * power[i][j];
                }
            }
        }
        if all_zero {
            break;
        }
        let mut next = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    next[i][j] += power[i][k] * nil[k][j];
                }
            }
        }
        power = next;
        sign = -sign;
    }
    inv
}

/// `Ω_n^{(k)} ∘ P_n^k` evaluated by finite differences; returns the max
/// residual over the sample points and frames.
pub fn omega_compose_check(
    word: &CobarWord,
    n: u32,
    k: usize,
    samples: &[Vec<Complex64>],
    h: f64,
) -> Result<f64, PeriodError> {
    assert!((k as u32) < n, "the top degree is excluded");
    let image = p_n_k(word, n, k)?;
    let form = crate::wedge::omega_tensor(&image, n as i64, h);
    let mut worst = 0.0f64;
    for point in samples {
        let dims = point.len();
        // k tangent frames from coordinate directions (cycled)
        let tangents: Vec<Vec<Complex64>> = (0..k)
            .map(|i| {
                let mut t = vec![Complex64::new(0.0, 0.0); dims];
                t[i % dims] = Complex64::new(1.0, 0.0);
                t
            })
            .collect();
        let v = form.eval(point, &tangents);
        worst = worst.max(v.norm());
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// the logarithm of the coproduct and the polylogarithm matrices
// ---------------------------------------------------------------------------

/// Words-with-coefficients meaning products of framed pieces.
pub type LieCombination = Vec<(Q, CobarWord)>;

/// `l(M) = Σ_{p≥1} (−1)^{p−1}/p · μ^{(p)} ∘ Δ'^{(p)}(M)`: the logarithm of a
/// framed matrix with respect to the reduced coproduct. The sum over chains
/// of strictly decreasing intermediate levels is finite by nilpotency
/// (`p ≤ weight`). Each term is a product (tensor) of framed pieces.
pub fn lie_l(frame: &FramedMatrix) -> LieCombination {
    let m = &frame.matrix;
    let mut out: LieCombination = Vec::new();
    // enumerate chains row = i_0, i_1, …, i_p = col with strictly
    // decreasing levels
    fn extend(
        m: &Rc<PeriodMatrix>,
        chain: &mut Vec<usize>,
        col: usize,
        out: &mut LieCombination,
    ) {
        let last = *chain.last().unwrap();
        // close the chain
        if m.levels[last] > m.levels[col] {
            let p = chain.len(); // number of factors once closed
            let mut word: CobarWord = Vec::with_capacity(p);
            for w in chain.windows(2) {
                word.push(FramedMatrix { matrix: m.clone(), row: w[0], col: w[1] });
            }
            word.push(FramedMatrix { matrix: m.clone(), row: last, col });
            let sign = if p % 2 == 1 { Q::one() } else { -Q::one() };
            out.push((sign / q_int(p as i64), word));
        }
        for mid in 0..m.size() {
            if m.levels[mid] < m.levels[last] && m.levels[mid] > m.levels[col] {
                chain.push(mid);
                extend(m, chain, col, out);
                chain.pop();
            }
        }
    }
    let mut chain = vec![frame.row];
    extend(&frame.matrix, &mut chain, frame.col, &mut out);
    let _ = m;
    out
}

/// The maximal period `⟨f^n| · |v_0⟩` of a combination of products, in the
/// de-normalized convention (the framing carries `(2πi)^n`).
pub fn maximal_period(combo: &LieCombination, n: u32) -> Complex64 {
    let tpi = Complex64::new(0.0, 2.0 * PI);
    let mut total = Complex64::new(0.0, 0.0);
    for (c, word) in combo {
        let mut prod = Complex64::new(1.0, 0.0);
        for f in word {
            prod *= f.matrix.entries[f.row][f.col].value();
        }
        total += crate::qnum::q_to_f64(c) * prod;
    }
    total * tpi.powi(n as i32)
}

/// `P'` of a combination of products, using multiplicativity.
pub fn big_period_prime_combo(combo: &LieCombination) -> ScalarTensor {
    let mut total = ScalarTensor::zero(2);
    for (c, word) in combo {
        let mut prod: Option<ScalarTensor> = None;
        for f in word {
            let p = big_period_prime(f);
            prod = Some(match prod {
                None => p,
                Some(prev) => prev.ring_mul(&p),
            });
        }
        if let Some(p) = prod {
            for (pc, slots) in p.terms {
                total.push(c * &pc, slots);
            }
        }
    }
    total
}

/// The series `S(x) = Σ_{p≥1} (−1)^{p−1}/p (e^x−1)^{p−1}` multiplied by
/// `e^x − 1`, truncated exactly; equals `x` when the logarithm inverts the
/// exponential.
pub fn log_exp_series_identity(order: usize) -> crate::qnum::SeriesQ {
    let y = crate::qnum::SeriesQ::exp_minus_one(order);
    let mut acc = crate::qnum::SeriesQ::zero(order);
    let mut ypow = y.clone(); // y^p
    for p in 1..=order {
        let sign = if p % 2 == 1 { Q::one() } else { -Q::one() };
        acc = acc.add(&ypow.scale(&(sign / q_int(p as i64))));
        ypow = ypow.mul(&y);
    }
    acc
}

/// The normalized period matrix of the weight-`n` polylogarithm local
/// system: first column `−Li_k/(2πi)^k`, log-power subdiagonals.
pub fn polylog_matrix(n: usize, state: &crate::multival::BranchState) -> PeriodMatrix {
    let tpi = Complex64::new(0.0, 2.0 * PI);
    let levels: Vec<u32> = (0..=n as u32).collect();
    let mut entries: Vec<Vec<Scalar>> =
        (0..=n).map(|_| (0..=n).map(|_| Scalar::zero()).collect()).collect();
    let base = Rc::new(state.clone());
    for (i, row) in entries.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            if i == j {
                *e = Scalar::one();
            } else if j == 0 && i >= 1 {
                let value = -state.li_m(i) / tpi.powi(i as i32);
                let s = base.clone();
                let m = i;
                *e = Scalar::germ_fn(
                    &format!("-Li{m}/(2πi)^{m}"),
                    value,
                    Rc::new(move |p: &[Complex64]| {
                        let st = s.extend_to(p[0]).expect("germ continuation");
                        -st.li_m(m) / tpi.powi(m as i32)
                    }),
                );
            } else if j >= 1 && i > j {
                let k = i - j;
                let mut fact = 1.0;
                for t in 1..=k {
                    fact *= t as f64;
                }
                let value = state.log_z.powi(k as i32) / (fact * tpi.powi(k as i32));
                let s = base.clone();
                *e = Scalar::germ_fn(
                    &format!("log^{k}z/({k}!(2πi)^{k})"),
                    value,
                    Rc::new(move |p: &[Complex64]| {
                        let st = s.extend_to(p[0]).expect("germ continuation");
                        st.log_z.powi(k as i32) / (fact * tpi.powi(k as i32))
                    }),
                );
            }
        }
    }
    PeriodMatrix { levels, entries }
}
