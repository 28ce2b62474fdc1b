use polyperiod::bloch::symalg::*;
use polyperiod::bloch::*;
use polyperiod::multival::{continue_along, PathSpec};
use polyperiod::qnum::format_q;
use polyperiod::Complex64;
use num::traits::One;
type Q = polyperiod::qnum::Q;

fn main() {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let xs = continue_along(&PathSpec::new(0.4, vec![c(0.35, 0.3)]), 4).unwrap();
    let ys = continue_along(&PathSpec::new(0.5, vec![c(0.7, 0.4)]), 1).unwrap();
    let mut table = SymTable::new();
    let syms = register_point(&mut table, &xs, "x", None);
    let y = table.add("log(y)", ys.log_z);

    let v3 = l3_bold(&syms);
    let tpi_y = SymSum::zero(2, 0).term(Q::one(), vec![
        LExpr::two_pi_i_pow(1, Q::one()),
        LExpr::sym(y),
    ]);
    let cand = sym_star(&v3, &tpi_y);
    let lhs = cand.lie_differential();
    let rhs = l4_3(&syms, syms.log_x, y);
    let d = lhs.sub(&rhs);
    for (keys, coeff) in d.normalize() {
        let desc: Vec<String> = keys.iter().map(|k| {
            let mut e = LExpr::zero();
            e.terms.insert(k.clone(), Q::one());
            e.describe(&table)
        }).collect();
        println!("{} * [{}]", format_q(&coeff), desc.join(" ^ "));
    }
}
