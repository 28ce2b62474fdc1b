use super::*;
use crate::multival::{continue_along, monodromy, PathSpec};
use crate::qnum::q_to_f64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rand_q(rng: &mut StdRng) -> Q {
    q(rng.random_range(-12..13), rng.random_range(1..9))
}

#[test]
fn cross_ratio_basics() {
    // s₁=(1,0), s₂=(0,1), s₃=(1,1), s₄=(1,z) → … the standard affine chart
    let z = q(3, 7);
    let s = [
        [Q::one(), Q::zero()],
        [Q::zero(), Q::one()],
        [Q::one(), Q::one()],
        [Q::one(), z.clone()],
    ];
    let r = cross_ratio(&s).unwrap();
    // direct determinant evaluation
    let want = det2(&s[0], &s[3]) * det2(&s[1], &s[2]) / (det2(&s[0], &s[2]) * det2(&s[1], &s[3]));
    assert_eq!(r, want);

    // GL₂ invariance and rescaling, 50 random cases
    let mut rng = StdRng::seed_from_u64(17);
    for _ in 0..50 {
        let pts: Vec<ProjPoint> = (0..4).map(|_| [rand_q(&mut rng), rand_q(&mut rng)]).collect();
        let s: [ProjPoint; 4] = [pts[0].clone(), pts[1].clone(), pts[2].clone(), pts[3].clone()];
        let Ok(r) = cross_ratio(&s) else { continue };
        let (a, b, cc, d) = (rand_q(&mut rng), rand_q(&mut rng), rand_q(&mut rng), rand_q(&mut rng));
        if (&a * &d - &b * &cc).is_zero() {
            continue;
        }
        let txf = |p: &ProjPoint| -> ProjPoint {
            [&a * &p[0] + &b * &p[1], &cc * &p[0] + &d * &p[1]]
        };
        let scaled: [ProjPoint; 4] = [txf(&s[0]), txf(&s[1]), txf(&s[2]), txf(&s[3])];
        assert_eq!(cross_ratio(&scaled).unwrap(), r);
    }

    // switching the last two points inverts the ratio
    let s2 = [s[0].clone(), s[1].clone(), s[3].clone(), s[2].clone()];
    let r2 = cross_ratio(&s2).unwrap();
    assert!( (cross_ratio(&s).unwrap() * r2).is_one() );
}

#[test]
fn five_term_is_killed_by_delta() {
    let mut rng = StdRng::seed_from_u64(7);
    let mut done = 0;
    while done < 50 {
        let pts: Vec<ProjPoint> = (0..5).map(|_| affine(rand_q(&mut rng))).collect();
        let arr: [ProjPoint; 5] =
            [pts[0].clone(), pts[1].clone(), pts[2].clone(), pts[3].clone(), pts[4].clone()];
        let Ok(ft) = five_term(&arr) else { continue };
        let Ok(total) = delta_points(&ft) else { continue };
        assert!(total.is_zero(), "δ(five-term) ≠ 0 for {arr:?}");
        done += 1;
    }
}

#[test]
fn degenerate_five_term_rejected() {
    let pts = [affine(q(1, 2)), affine(q(1, 2)), affine(q(1, 3)), affine(q(2, 3)), infinity()];
    assert!(five_term(&pts).is_err());
}

fn ordered_config(rng: &mut StdRng) -> Option<[Q; 5]> {
    // ordered rationals tend to produce all cross-ratios in (0,1)
    let mut xs: Vec<Q> = (0..5).map(|_| rand_q(rng)).collect();
    xs.sort();
    xs.dedup();
    if xs.len() < 5 {
        return None;
    }
    Some([xs[0].clone(), xs[1].clone(), xs[2].clone(), xs[3].clone(), xs[4].clone()])
}

#[test]
fn p2_kills_five_term_relations() {
    let mut rng = StdRng::seed_from_u64(3);
    let mut done = 0;
    while done < 20 {
        let Some(cfg) = ordered_config(&mut rng) else { continue };
        match p2_five_term(&cfg) {
            Ok((sum, table)) => {
                assert!(
                    sum.vanishes_mod_torsion(&table, 10_000, 1e-9),
                    "five-term p₂ leftover for {cfg:?}"
                );
                done += 1;
            }
            Err(BlochError::Degenerate(_)) => continue,
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn p2_is_monodromy_invariant() {
    let state = continue_along(&PathSpec::new(0.4, vec![c(0.3, 0.35)]), 2).unwrap();
    let (sum, _table, syms) = p2(&state);
    for loop_ in [
        MonodromyLoop::Gamma0,
        MonodromyLoop::Gamma1,
        MonodromyLoop::Gamma0Inv,
        MonodromyLoop::Gamma1Inv,
    ] {
        let shifted = sum.substitute(&monodromy_rules(&syms, loop_));
        assert!(shifted.sub(&sum).is_zero_exact(), "p₂ moved under {loop_:?}");
    }
}

#[test]
fn euler_reflection_is_torsion() {
    for x in [0.2, 0.45, 0.7] {
        let (sum, table) = euler_reflection_sum(x).unwrap();
        assert!(!sum.is_zero_exact());
        assert!(sum.vanishes_mod_torsion(&table, 24, 1e-9), "b({x}) not torsion");
    }
}

fn point_with_y(depth: usize) -> (SymTable, PointSyms, Vec<usize>, crate::multival::BranchState) {
    let xs = continue_along(&PathSpec::new(0.4, vec![c(0.35, 0.3)]), depth).unwrap();
    let ys1 = continue_along(&PathSpec::new(0.5, vec![c(0.7, 0.4)]), 1).unwrap();
    let ys2 = continue_along(&PathSpec::new(0.5, vec![c(1.3, -0.6)]), 1).unwrap();
    let mut table = SymTable::new();
    let syms = register_point(&mut table, &xs, "x", Some(0));
    let y1 = {
        let base = Rc::new(ys1.clone());
        table.add_fn(
            "log(y1)",
            ys1.log_z,
            Some(Rc::new(move |p: &[Complex64]| base.extend_to(p[1]).unwrap().log_z)),
        )
    };
    let y2 = {
        let base = Rc::new(ys2.clone());
        table.add_fn(
            "log(y2)",
            ys2.log_z,
            Some(Rc::new(move |p: &[Complex64]| base.extend_to(p[2]).unwrap().log_z)),
        )
    };
    (table, syms, vec![y1, y2], xs)
}

#[test]
fn ladder_squares_commute_exactly() {
    let (_table, syms, ys, _xs) = point_with_y(4);

    // n = 3 first square: d(𝕃₃({x}₃)) = l₃²({x}₂ ⊗ x)
    let lhs = l3_bold(&syms).lie_differential().scale(&-q(1, 6));
    let rhs = l3_2(&syms, syms.log_x).scale(&-q(1, 6));
    assert!(lhs.sub(&rhs).is_zero_exact(), "weight-3 first square");

    // n = 4 first square: d(𝕃₄({x}₄)) = l₄²({x}₃ ⊗ x)
    let lhs = l4_bold(&syms).lie_differential().scale(&q(1, 24));
    let rhs = l4_2(&syms, syms.log_x).scale(&q(1, 24));
    assert!(lhs.sub(&rhs).is_zero_exact(), "weight-4 first square");

    // n = 4 middle square: d(l₄²({x}₃ ⊗ y)) = l₄³({x}₂ ⊗ x∧y)
    let lhs = l4_2(&syms, ys[0]).lie_differential();
    let rhs = l4_3(&syms, syms.log_x, ys[0]);
    assert!(lhs.sub(&rhs).is_zero_exact(), "weight-4 middle square");
}

#[test]
fn ladder_top_squares_commute_multiplicatively() {
    let (table, syms, ys, xs) = point_with_y(2);
    let y1 = table.value(ys[0]).exp();
    let y2 = table.value(ys[1]).exp();

    // n = 2: exp(𝕃₂({x}₂)) = (1−x) ∧ x
    let got = l2_bold(&syms).exp_boundary(&table);
    let want = delta_b2_image(xs.z, &[]);
    assert!(got.residual_against(&want) < 1e-9, "weight-2 square");

    // n = 3: exp(l₃²({x}₂⊗y)) = (1−x) ∧ x ∧ y
    let got = l3_2(&syms, ys[0]).exp_boundary(&table);
    let want = delta_b2_image(xs.z, &[y1]);
    assert!(got.residual_against(&want) < 1e-9, "weight-3 top square");

    // n = 4: exp(l₄³({x}₂⊗y₁∧y₂)) = (1−x) ∧ x ∧ y₁ ∧ y₂
    let got = l4_3(&syms, ys[0], ys[1]).exp_boundary(&table);
    let want = delta_b2_image(xs.z, &[y1, y2]);
    assert!(got.residual_against(&want) < 1e-9, "weight-4 top square");
}

#[test]
fn ladder_maps_are_branch_independent() {
    let (_table, syms, ys, _xs) = point_with_y(4);
    let maps: Vec<(&str, SymSum)> = vec![
        ("L2", l2_bold(&syms)),
        ("L3", l3_bold(&syms)),
        ("L4", l4_bold(&syms)),
        ("l32", l3_2(&syms, ys[0])),
        ("l42", l4_2(&syms, ys[0])),
        ("l43", l4_3(&syms, ys[0], ys[1])),
    ];
    for (name, sum) in &maps {
        for loop_ in [MonodromyLoop::Gamma0, MonodromyLoop::Gamma1] {
            let shifted = sum.substitute(&monodromy_rules(&syms, loop_));
            assert!(shifted.sub(sum).is_zero_exact(), "{name} moved under {loop_:?}");
        }
        // shifting a log y occurrence by 2πi is invisible as well
        for y in &ys {
            let mut rules = BTreeMap::new();
            rules.insert(*y, LExpr::sym(*y).add(&LExpr::two_pi_i_pow(1, Q::one())));
            let shifted = sum.substitute(&rules);
            assert!(shifted.sub(sum).is_zero_exact(), "{name} moved under a log y shift");
        }
    }
}

#[test]
fn omega_kills_the_ladder_images() {
    // ω ∘ l = 0 along parameter paths, by finite differences
    let (table, syms, ys, _xs) = point_with_y(4);
    let h = 1e-3;
    let base = [c(0.35, 0.3), c(0.7, 0.4), c(1.3, -0.6)];
    let points = [
        base,
        [c(0.3, 0.25), c(0.75, 0.35), c(1.25, -0.55)],
        [c(0.4, 0.33), c(0.66, 0.45), c(1.35, -0.64)],
    ];
    let frames: Vec<Vec<Complex64>> = vec![
        vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
    ];
    let checks: Vec<(&str, SymSum, i64, usize)> = vec![
        ("L2", l2_bold(&syms), 2, 1),
        ("l32", l3_2(&syms, ys[0]), 3, 2),
        ("L3", l3_bold(&syms), 3, 1),
        ("l43", l4_3(&syms, ys[0], ys[1]), 4, 3),
        ("l42", l4_2(&syms, ys[0]), 4, 2),
        ("L4", l4_bold(&syms), 4, 1),
    ];
    for (name, sum, n, degree) in &checks {
        let formal = sum.to_formal_sum(&table);
        let form = crate::wedge::omega_wedge(&formal, *n, h);
        for p in &points {
            let tangents: Vec<Vec<Complex64>> = frames[..*degree].to_vec();
            let v = form.eval(p, &tangents);
            assert!(v.norm() < 1e-6, "ω∘{name} = {v} at {p:?}");
        }
    }
}

#[test]
fn omega_kills_p2() {
    // the dilogarithm differential equation, as ω(p₂) = 0
    let state = continue_along(&PathSpec::new(0.4, vec![c(0.35, 0.2)]), 2).unwrap();
    let formal = p2_formal(&state).unwrap();
    let p = [c(0.35, 0.2)];
    let t = [c(1.0, 0.0)];
    let v = omega_half(&formal, &p, &t, 1e-4);
    assert!(v.norm() < 1e-6, "ω(p₂) = {v}");
}

#[test]
fn kernel_elements_land_in_the_torsion_slot() {
    // p₂({x}₂ + {1−x}₂) has every leftover term against a bare 2πi slot
    let (sum, _table) = euler_reflection_sum(0.3).unwrap();
    for (keys, _) in sum.normalize() {
        assert!(
            keys.iter().any(|(m, p)| m.is_empty() && *p == 1),
            "a term escapes the 2πi∧C slot"
        );
    }
}
