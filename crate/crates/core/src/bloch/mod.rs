//! The Bloch complex and the explicit maps from polylogarithmic complexes
//! of weight ≤ 4 into Lie-exponential complexes.
//!
//! Cross-ratios and five-term relations are exact over Q; the ladder maps
//! are built in the symbolic wedge algebra of [`symalg`], where the square
//! identities and branch invariance are decidable, and lowered to numeric
//! sums only for the differential-form checks.

pub mod symalg;
pub mod units;

use crate::multival::{l2_with_torsion_constant, BranchState, MonodromyLoop};
use crate::qnum::{q, q_int, Q};
use crate::wedge::{FormalSum, GermFn};
use num::complex::Complex64;
use num::traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::rc::Rc;
use symalg::{sym_star, LExpr, SymSum, SymTable};

#[derive(Debug, thiserror::Error)]
pub enum BlochError {
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("point lies in {{0, 1}}")]
    BadPoint,
    #[error(transparent)]
    Units(#[from] units::UnitsError),
    #[error(transparent)]
    Multival(#[from] crate::multival::MultivalError),
}

/// A point of the projective line over Q, as a nonzero vector `[a : b]`.
pub type ProjPoint = [Q; 2];

pub fn affine(x: Q) -> ProjPoint {
    [x, Q::one()]
}

pub fn infinity() -> ProjPoint {
    [Q::one(), Q::zero()]
}

fn det2(a: &ProjPoint, b: &ProjPoint) -> Q {
    &a[0] * &b[1] - &a[1] * &b[0]
}

/// The cross-ratio `Δ(s₁,s₄)Δ(s₂,s₃) / (Δ(s₁,s₃)Δ(s₂,s₄))`, invariant
/// under `GL₂` and under rescaling each vector.
pub fn cross_ratio(s: &[ProjPoint; 4]) -> Result<Q, BlochError> {
    let d14 = det2(&s[0], &s[3]);
    let d23 = det2(&s[1], &s[2]);
    let d13 = det2(&s[0], &s[2]);
    let d24 = det2(&s[1], &s[3]);
    if d13.is_zero() || d24.is_zero() {
        return Err(BlochError::Degenerate("proportional pair in a cross-ratio".into()));
    }
    Ok(d14 * d23 / (d13 * d24))
}

/// Q-combination of points of `F − {0, 1}`.
pub type FormalPoints = Vec<(i64, Q)>;

/// `Σ_{i=1}^5 (−1)^i {r(…, ŝ_i, …)}` for five pairwise distinct points.
pub fn five_term(pts: &[ProjPoint; 5]) -> Result<FormalPoints, BlochError> {
    for i in 0..5 {
        for j in (i + 1)..5 {
            if det2(&pts[i], &pts[j]).is_zero() {
                return Err(BlochError::Degenerate(format!("points {i} and {j} coincide")));
            }
        }
    }
    let mut out = Vec::with_capacity(5);
    for i in 0..5 {
        let rest: Vec<ProjPoint> = (0..5).filter(|j| *j != i).map(|j| pts[j].clone()).collect();
        let r = cross_ratio(&[rest[0].clone(), rest[1].clone(), rest[2].clone(), rest[3].clone()])?;
        if r.is_zero() || r.is_one() {
            return Err(BlochError::Degenerate("cross-ratio degenerates to 0 or 1".into()));
        }
        let sign = if (i + 1) % 2 == 0 { 1 } else { -1 };
        out.push((sign, r));
    }
    Ok(out)
}

/// `δ: Z[F* − {1}] → Λ²F*`, `{x} ↦ (1−x) ∧ x`, exactly over Q.
pub fn delta_points(points: &FormalPoints) -> Result<units::WedgeOfUnits, BlochError> {
    let mut total = units::WedgeOfUnits::zero();
    for (n, x) in points {
        total = total.add(&units::steinberg(x)?.scale(*n));
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// symbols of a branch-tracked point
// ---------------------------------------------------------------------------

/// Symbol ids for the branch values at one point.
#[derive(Debug, Clone)]
pub struct PointSyms {
    /// `li[m−1]` is the symbol of `Li_m`
    pub li: Vec<usize>,
    pub log_x: usize,
    pub log_1mx: usize,
}

/// Registers the values of a state (with germ closures in parameter slot
/// `param`) under the given name prefix.
pub fn register_point(
    table: &mut SymTable,
    state: &BranchState,
    prefix: &str,
    param: Option<usize>,
) -> PointSyms {
    let base = Rc::new(state.clone());
    let mk = |table: &mut SymTable, name: String, value: Complex64, read: Rc<dyn Fn(&BranchState) -> Complex64>| {
        let func: Option<GermFn> = param.map(|idx| -> GermFn {
            let base = base.clone();
            let read = read.clone();
            Rc::new(move |p: &[Complex64]| {
                let st = base.extend_to(p[idx]).expect("germ continuation");
                read(&st)
            })
        });
        table.add_fn(&name, value, func)
    };
    let li = (1..=state.depth())
        .map(|m| {
            mk(
                table,
                format!("Li{m}({prefix})"),
                state.li_m(m),
                Rc::new(move |s: &BranchState| s.li_m(m)),
            )
        })
        .collect();
    let log_x = mk(
        table,
        format!("log({prefix})"),
        state.log_z,
        Rc::new(|s: &BranchState| s.log_z),
    );
    let log_1mx = mk(
        table,
        format!("log(1-{prefix})"),
        state.log_1mz,
        Rc::new(|s: &BranchState| s.log_1mz),
    );
    PointSyms { li, log_x, log_1mx }
}

/// Substitution rules realizing a branch shift on the point's symbols.
pub fn monodromy_rules(syms: &PointSyms, loop_: MonodromyLoop) -> BTreeMap<usize, LExpr> {
    let mut rules = BTreeMap::new();
    let tpi = |q_: Q| LExpr::two_pi_i_pow(1, q_);
    match loop_ {
        MonodromyLoop::Gamma0 | MonodromyLoop::Gamma0Inv => {
            let sign = if loop_ == MonodromyLoop::Gamma0 { Q::one() } else { -Q::one() };
            rules.insert(syms.log_x, LExpr::sym(syms.log_x).add(&tpi(sign)));
        }
        MonodromyLoop::Gamma1 | MonodromyLoop::Gamma1Inv => {
            let sign = if loop_ == MonodromyLoop::Gamma1 { Q::one() } else { -Q::one() };
            rules.insert(syms.log_1mx, LExpr::sym(syms.log_1mx).add(&tpi(sign.clone())));
            let mut fact = Q::one();
            let mut logpow = LExpr::constant(Q::one());
            for m in 1..=syms.li.len() {
                // Li_m ↦ Li_m − 2πi · log^{m−1}x / (m−1)!
                let shift = logpow
                    .scale(&(-sign.clone() / fact.clone()))
                    .mul(&tpi(Q::one()));
                rules.insert(syms.li[m - 1], LExpr::sym(syms.li[m - 1]).add(&shift));
                logpow = logpow.mul(&LExpr::sym(syms.log_x));
                fact *= q_int(m as i64);
            }
        }
    }
    rules
}

/// `L_n` as a symbolic expression: `Σ β_k Li_{n−k} log^k x`.
pub fn l_n_expr(syms: &PointSyms, n: usize) -> LExpr {
    let table = crate::multival::BernoulliTable::new(n);
    let mut total = LExpr::zero();
    let mut logpow = LExpr::constant(Q::one());
    for k in 0..n {
        let term = LExpr::sym(syms.li[n - k - 1]).mul(&logpow).scale(&table.beta(k));
        total = total.add(&term);
        logpow = logpow.mul(&LExpr::sym(syms.log_x));
    }
    total
}

// ---------------------------------------------------------------------------
// p₂ and the weight-two map
// ---------------------------------------------------------------------------

/// `p₂({x}₂) = ½ log(1−x) ∧ log x + 2πi ∧ (1/2πi)(Li₂ + ½log(1−x)log x + (2πi)²/24)`.
pub fn p2_sym(syms: &PointSyms) -> SymSum {
    let lgx = LExpr::sym(syms.log_x);
    let lg1mx = LExpr::sym(syms.log_1mx);
    let li2 = LExpr::sym(syms.li[1]);
    let l2_over_tpi = li2
        .add(&lg1mx.mul(&lgx).scale(&q(1, 2)))
        .mul_two_pi_i_pow(-1)
        .add(&LExpr::two_pi_i_pow(1, q(1, 24)));
    SymSum::zero(2, 0)
        .term(q(1, 2), vec![lg1mx, lgx.clone()])
        .term(Q::one(), vec![LExpr::two_pi_i_pow(1, Q::one()), l2_over_tpi])
}

/// `p₂` of a branch state, with the table of symbol values.
pub fn p2(state: &BranchState) -> (SymSum, SymTable, PointSyms) {
    let mut table = SymTable::new();
    let syms = register_point(&mut table, state, "x", Some(0));
    (p2_sym(&syms), table, syms)
}

/// The five-term image of `p₂` for a real configuration with all
/// cross-ratios in `(0, 1)`: logarithms decompose exactly over the
/// pairwise differences, the dilogarithm values remain symbols, and the
/// whole sum normalizes into the torsion class.
pub fn p2_five_term(points: &[Q; 5]) -> Result<(SymSum, SymTable), BlochError> {
    let proj: [ProjPoint; 5] = [
        affine(points[0].clone()),
        affine(points[1].clone()),
        affine(points[2].clone()),
        affine(points[3].clone()),
        affine(points[4].clone()),
    ];
    let terms = five_term(&proj)?;
    let mut table = SymTable::new();
    // symbols for log|x_j − x_k|
    let mut diff_sym: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for j in 0..5 {
        for k in (j + 1)..5 {
            let d = &points[j] - &points[k];
            if d.is_zero() {
                return Err(BlochError::Degenerate("repeated point".into()));
            }
            let v = crate::qnum::q_to_f64(&d).abs().ln();
            let id = table.add(&format!("log|x{j}-x{k}|"), Complex64::new(v, 0.0));
            diff_sym.insert((j, k), id);
        }
    }
    let diff_expr = |j: usize, k: usize| -> LExpr {
        let (a, b) = if j < k { (j, k) } else { (k, j) };
        LExpr::sym(diff_sym[&(a, b)])
    };
    let mut total = SymSum::zero(2, 0);
    for (idx, (sign, r)) in terms.iter().enumerate() {
        let rf = crate::qnum::q_to_f64(r);
        if !(0.0 < rf && rf < 1.0) {
            return Err(BlochError::Degenerate(format!("cross-ratio {rf} outside (0,1)")));
        }
        // the four retained points, in order
        let kept: Vec<usize> = (0..5).filter(|j| *j != idx).collect();
        let (a, b, c, d) = (kept[0], kept[1], kept[2], kept[3]);
        // r = (a−d)(b−c)/((a−c)(b−d)), 1−r = (a−b)(c−d)/((a−c)(b−d))
        let log_r = diff_expr(a, d)
            .add(&diff_expr(b, c))
            .sub(&diff_expr(a, c))
            .sub(&diff_expr(b, d));
        let log_1mr = diff_expr(a, b)
            .add(&diff_expr(c, d))
            .sub(&diff_expr(a, c))
            .sub(&diff_expr(b, d));
        // Li₂ at the cross-ratio stays a symbol
        let path = crate::multival::PathSpec::new(0.5, vec![Complex64::new(rf, 0.0)])
            .with_margin(1e-7);
        let st = crate::multival::continue_along(&path, 2)?;
        let li2 = table.add(&format!("Li2(r{idx})"), st.li_m(2));
        let l2_over_tpi = LExpr::sym(li2)
            .add(&log_1mr.mul(&log_r).scale(&q(1, 2)))
            .mul_two_pi_i_pow(-1)
            .add(&LExpr::two_pi_i_pow(1, q(1, 24)));
        let part = SymSum::zero(2, 0)
            .term(q(1, 2), vec![log_1mr, log_r])
            .term(Q::one(), vec![LExpr::two_pi_i_pow(1, Q::one()), l2_over_tpi]);
        total = total.add(&part.scale(&q_int(*sign)));
    }
    Ok((total, table))
}

// ---------------------------------------------------------------------------
// the ladder maps of weights ≤ 4
// ---------------------------------------------------------------------------

/// `(1/2πi)·L₂` as a slot expression.
fn l2_over_tpi(syms: &PointSyms) -> LExpr {
    l_n_expr(syms, 2).mul_two_pi_i_pow(-1)
}

/// `E(x) = 2πi ∧ (1/2πi)L₂(x) − ½ Li₁(x) ∧ log x`, the value of the
/// weight-two map on `½{x}₂`.
pub fn e2(syms: &PointSyms) -> SymSum {
    SymSum::zero(2, 0)
        .term(Q::one(), vec![LExpr::two_pi_i_pow(1, Q::one()), l2_over_tpi(syms)])
        .term(-q(1, 2), vec![LExpr::sym(syms.li[0]), LExpr::sym(syms.log_x)])
}

/// `𝕃₂({x}₂) = 2·E(x)`.
pub fn l2_bold(syms: &PointSyms) -> SymSum {
    e2(syms).scale(&q_int(2))
}

/// `l_n^{n−1}({x}₂ ⊗ y₁∧…∧y_{n−2}) = E(x) ∗ (2πi ∧ log y₁ ∧ … ∧ log y_{n−2})`.
pub fn l_n_top(syms: &PointSyms, log_y: &[usize]) -> SymSum {
    let mut slots = vec![LExpr::two_pi_i_pow(1, Q::one())];
    slots.extend(log_y.iter().map(|id| LExpr::sym(*id)));
    let y_part = SymSum::zero(slots.len(), 0).term(Q::one(), slots);
    sym_star(&e2(syms), &y_part)
}

/// `𝕃₃({x}₃) = −6·[2πi ∧ (1/(2πi)²)L₃ − ½(1/2πi)L₂ ∧ log x − (1/12)(Li₁ ∧ log x) ∗ log x]`.
pub fn l3_bold(syms: &PointSyms) -> SymSum {
    let lgx = LExpr::sym(syms.log_x);
    let core = SymSum::zero(2, 1)
        .term(Q::one(), vec![
            LExpr::two_pi_i_pow(1, Q::one()),
            l_n_expr(syms, 3).mul_two_pi_i_pow(-2),
        ])
        .term(-q(1, 2), vec![l2_over_tpi(syms), lgx.clone()]);
    let star_part = sym_star(
        &SymSum::zero(2, 1).term(Q::one(), vec![LExpr::sym(syms.li[0]), lgx.clone()]),
        &SymSum::zero(1, 0).term(Q::one(), vec![lgx]),
    );
    core.add(&star_part.scale(&-q(1, 12))).scale(&q_int(-6))
}

/// `l₃²({x}₂ ⊗ y) = E(x) ∗ (2πi ∧ log y)`.
pub fn l3_2(syms: &PointSyms, log_y: usize) -> SymSum {
    l_n_top(syms, &[log_y])
}

/// `𝕃₄({x}₄)`, normalized on the generator.
pub fn l4_bold(syms: &PointSyms) -> SymSum {
    let lgx = LExpr::sym(syms.log_x);
    let li1 = LExpr::sym(syms.li[0]);
    let core = SymSum::zero(2, 2)
        .term(Q::one(), vec![
            LExpr::two_pi_i_pow(1, Q::one()),
            l_n_expr(syms, 4).mul_two_pi_i_pow(-3),
        ])
        .term(-q(1, 2), vec![l_n_expr(syms, 3).mul_two_pi_i_pow(-2), lgx.clone()])
        .term(-q(1, 24), vec![
            li1.mul(&lgx).mul_two_pi_i_pow(-1),
            lgx.mul(&lgx),
        ]);
    let star_part = sym_star(
        &SymSum::zero(2, 2).term(Q::one(), vec![l2_over_tpi(syms), lgx.clone()]),
        &SymSum::zero(1, 0).term(Q::one(), vec![lgx]),
    );
    core.add(&star_part.scale(&-q(1, 12))).scale(&q_int(24))
}

/// `l₄²({x}₃ ⊗ y)`.
pub fn l4_2(syms: &PointSyms, log_y: usize) -> SymSum {
    let lgx = LExpr::sym(syms.log_x);
    let lgy = LExpr::sym(log_y);
    let li1 = LExpr::sym(syms.li[0]);
    let l2t = l2_over_tpi(syms);
    let l3t = l_n_expr(syms, 3).mul_two_pi_i_pow(-2);

    // inner Λ²-part, to be prefixed with 2πi∧
    let mut inner = SymSum::zero(2, 1)
        .term(-q_int(12), vec![l3t, lgy.clone()])
        .term(-q(1, 2), vec![li1.mul(&lgx).mul_two_pi_i_pow(-1), lgx.mul(&lgy)])
        .term(-q(1, 2), vec![li1.mul(&lgy).mul_two_pi_i_pow(-1), lgx.mul(&lgx)]);
    inner = inner.add(
        &sym_star(
            &SymSum::zero(2, 1).term(Q::one(), vec![l2t.clone(), lgx.clone()]),
            &SymSum::zero(1, 0).term(Q::one(), vec![lgy.clone()]),
        )
        .scale(&-q_int(2)),
    );
    let mut out = SymSum::zero(3, 1);
    for (c, slots) in &inner.terms {
        let mut s = vec![LExpr::two_pi_i_pow(1, Q::one())];
        s.extend(slots.iter().cloned());
        out.push(c.clone(), s);
    }
    out = out.add(&SymSum::zero(3, 1).term(q_int(4), vec![l2t, lgx.clone(), lgy.clone()]));
    out.add(
        &sym_star(
            &SymSum::zero(2, 1).term(Q::one(), vec![li1, lgx.clone()]),
            &SymSum::zero(2, 0).term(Q::one(), vec![lgx, lgy]),
        )
        .scale(&q(1, 2)),
    )
}

/// `l₄³({x}₂ ⊗ y₁∧y₂) = E(x) ∗ (2πi ∧ log y₁ ∧ log y₂)`.
pub fn l4_3(syms: &PointSyms, log_y1: usize, log_y2: usize) -> SymSum {
    l_n_top(syms, &[log_y1, log_y2])
}

/// The multiplicative image `δ({x}₂ ⊗ y⃗) = (1−x) ∧ x ∧ y₁ ∧ …` as a
/// value-keyed sum.
pub fn delta_b2_image(x: Complex64, ys: &[Complex64]) -> FormalSum {
    let arity = 2 + ys.len();
    let mut out = FormalSum::zero(arity, crate::wedge::Symmetry::Wedge, 0, arity);
    let mut slots = vec![
        crate::wedge::Atom::germ("1-x", Complex64::new(1.0, 0.0) - x),
        crate::wedge::Atom::germ("x", x),
    ];
    for (i, y) in ys.iter().enumerate() {
        slots.push(crate::wedge::Atom::germ(&format!("y{i}"), *y));
    }
    out.push(Q::one(), slots);
    out
}

// ---------------------------------------------------------------------------
// the weight-two map to the Deligne-type complex
// ---------------------------------------------------------------------------

/// The `Λ²O`-valued component of the map: `p₂` itself; the map has
/// components `(p₂, Id, 0)`, so all that remains to verify numerically is
/// that `ω ∘ p₂ = 0` along parameter paths (the dilogarithm differential
/// equation) — `omega_half` evaluates `ω(f∧g) = ½(f dg − g df)`.
pub fn omega_half(sum: &FormalSum, point: &[Complex64], tangent: &[Complex64], h: f64) -> Complex64 {
    let mut total = Complex64::new(0.0, 0.0);
    for t in &sum.terms {
        let f = &t.slots[0];
        let g = &t.slots[1];
        let fv = f.eval(point);
        let gv = g.eval(point);
        let df = crate::wedge::directional_derivative(&|p: &[Complex64]| f.eval(p), point, tangent, h);
        let dg = crate::wedge::directional_derivative(&|p: &[Complex64]| g.eval(p), point, tangent, h);
        total += crate::qnum::q_to_f64(&t.coeff) * 0.5 * (fv * dg - gv * df);
    }
    total * Complex64::new(0.0, 2.0 * PI).powi(sum.twist as i32)
}

/// `b(x) = p₂({x}₂ + {1−x}₂)`: returns the symbolic sum over shared
/// symbols; it normalizes into the torsion class.
pub fn euler_reflection_sum(x: f64) -> Result<(SymSum, SymTable), BlochError> {
    let sx = crate::multival::continue_along(
        &crate::multival::PathSpec::new(0.5, vec![Complex64::new(x, 0.0)]),
        2,
    )?;
    let s1mx = crate::multival::continue_along(
        &crate::multival::PathSpec::new(0.5, vec![Complex64::new(1.0 - x, 0.0)]),
        2,
    )?;
    let mut table = SymTable::new();
    // shared symbols: the two points swap log x and log(1−x)
    let lgx = table.add("log x", sx.log_z);
    let lg1mx = table.add("log(1-x)", sx.log_1mz);
    let li2x = table.add("Li2(x)", sx.li_m(2));
    let li2c = table.add("Li2(1-x)", s1mx.li_m(2));
    let build = |li2: usize, lgx: usize, lg1mx: usize| -> SymSum {
        let l2_over = LExpr::sym(li2)
            .add(&LExpr::sym(lg1mx).mul(&LExpr::sym(lgx)).scale(&q(1, 2)))
            .mul_two_pi_i_pow(-1)
            .add(&LExpr::two_pi_i_pow(1, q(1, 24)));
        SymSum::zero(2, 0)
            .term(q(1, 2), vec![LExpr::sym(lg1mx), LExpr::sym(lgx)])
            .term(Q::one(), vec![LExpr::two_pi_i_pow(1, Q::one()), l2_over])
    };
    let total = build(li2x, lgx, lg1mx).add(&build(li2c, lg1mx, lgx));
    Ok((total, table))
}

/// p₂ evaluated with value-keyed atoms; used by `chern2` and the form
/// checks, taking the branch data straight from a state.
pub fn p2_formal(state: &BranchState) -> Result<FormalSum, BlochError> {
    let (sum, table, _) = p2(state);
    Ok(sum.to_formal_sum(&table))
}

/// The full weight-two dilogarithm value `(1/2πi)L₂(x)` used by the Cech
/// pipeline.
pub fn l2_value_over_tpi(state: &BranchState) -> Result<Complex64, BlochError> {
    Ok(l2_with_torsion_constant(state)? / Complex64::new(0.0, 2.0 * PI))
}

#[cfg(test)]
mod tests;
