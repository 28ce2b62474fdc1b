use super::*;
use crate::qnum::{q, q_int, q_to_f64};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn straight(base: f64, z: Complex64) -> PathSpec {
    PathSpec::new(base, vec![z])
}

#[test]
fn zeta_two_at_one() {
    // Li₂(1) = π²/6, approached along the real axis
    let path = straight(0.5, c(1.0 - 1e-11, 0.0)).with_margin(1e-12);
    let state = continue_along(&path, 2).unwrap();
    let got = state.li_m(2).re;
    assert!((got - PI * PI / 6.0).abs() < 1e-9, "Li2(1) = {got}");
    assert!(state.li_m(2).im.abs() < 1e-9);
}

#[test]
fn dilog_at_half_matches_closed_form() {
    // Li₂(1/2) = π²/12 − ln²2/2 — reach 1/2 from a different base point
    let path = straight(0.21, c(0.5, 0.0));
    let state = continue_along(&path, 3).unwrap();
    let expect = PI * PI / 12.0 - 0.5 * (2.0f64).ln().powi(2);
    assert!((state.li_m(2).re - expect).abs() < 1e-12);
    assert!((state.log_z - c(0.5f64.ln(), 0.0)).norm() < 1e-13);
    assert!((state.log_1mz - c(0.5f64.ln(), 0.0)).norm() < 1e-13);
}

#[test]
fn trivial_loop_is_identity() {
    let a = 0.37;
    let path = PathSpec::new(a, vec![c(a, 0.0)]);
    let state = continue_along(&path, 4).unwrap();
    let direct = continue_along(&PathSpec::new(a, vec![]), 4).unwrap();
    for m in 1..=4 {
        assert!((state.li_m(m) - direct.li_m(m)).norm() < 1e-13);
    }
}

#[test]
fn path_reversal_round_trip() {
    let path = PathSpec::new(0.4, vec![c(0.6, 0.5), c(1.4, 0.3), c(1.2, -0.6), c(0.35, -0.2)]);
    let state = continue_along(&path, 5).unwrap();
    let mut back: Vec<Complex64> = path.points();
    back.reverse();
    let round = state.continue_through(&back[1..]).unwrap();
    let start = continue_along(&PathSpec::new(0.4, vec![]), 5).unwrap();
    assert!((round.log_z - start.log_z).norm() < 1e-9);
    assert!((round.log_1mz - start.log_1mz).norm() < 1e-9);
    for m in 1..=5 {
        assert!((round.li_m(m) - start.li_m(m)).norm() < 1e-9, "Li_{m} round trip");
    }
}

#[test]
fn margin_violation_rejected() {
    let path = straight(0.5, c(0.01, 0.0));
    assert!(matches!(continue_along(&path, 2), Err(MultivalError::PathTooClose(_, _))));
}

#[test]
fn winding_counters_track_loops() {
    let state = continue_along(&PathSpec::new(0.4, vec![]), 2).unwrap();
    let looped = monodromy(&state, MonodromyLoop::Gamma0);
    assert_eq!(looped.winding0(), 1);
    assert_eq!(looped.winding1(), 0);
    let looped = monodromy(&looped, MonodromyLoop::Gamma1Inv);
    assert_eq!(looped.winding1(), -1);
}

#[test]
fn closed_form_monodromy_matches_numeric_loops() {
    // both at the base point and after continuation along a nontrivial path
    let paths = [
        PathSpec::new(0.4, vec![]),
        PathSpec::new(0.4, vec![c(0.5, 0.45), c(1.3, 0.4), c(1.5, -0.5), c(0.7, -0.4), c(0.62, 0.0)]),
    ];
    for path in &paths {
        let state = continue_along(path, 5).unwrap();
        for loop_ in [
            MonodromyLoop::Gamma0,
            MonodromyLoop::Gamma1,
            MonodromyLoop::Gamma0Inv,
            MonodromyLoop::Gamma1Inv,
        ] {
            let closed = monodromy(&state, loop_);
            let numeric = monodromy_numeric(&state, loop_).unwrap();
            assert!((closed.log_z - numeric.log_z).norm() < 1e-9, "{loop_:?} log z");
            assert!((closed.log_1mz - numeric.log_1mz).norm() < 1e-9, "{loop_:?} log(1-z)");
            for m in 1..=5 {
                assert!(
                    (closed.li_m(m) - numeric.li_m(m)).norm() < 1e-8,
                    "{loop_:?} Li_{m}: {} vs {}",
                    closed.li_m(m),
                    numeric.li_m(m)
                );
            }
        }
    }
}

#[test]
fn monodromy_table_for_l_n() {
    // (1/2πi)(T_γ − Id) on L_n, checked against the closed forms
    let state = continue_along(&straight(0.4, c(0.3, 0.2)), 4).unwrap();
    let lx = state.log_z;
    let tpi = c(0.0, 2.0 * PI);

    // around 1: L₂ ↦ −½ log x, L₃ ↦ −(1/12) log² x, L₄ ↦ 0
    let inc2 = l_n_monodromy_increment(&state, 2, MonodromyLoop::Gamma1).unwrap();
    assert!((inc2 - (-0.5 * lx)).norm() < 1e-12);
    let inc3 = l_n_monodromy_increment(&state, 3, MonodromyLoop::Gamma1).unwrap();
    assert!((inc3 - (-lx * lx / 12.0)).norm() < 1e-12);
    let inc4 = l_n_monodromy_increment(&state, 4, MonodromyLoop::Gamma1).unwrap();
    assert!(inc4.norm() < 1e-12);
    // and L₁ ↦ −1
    let inc1 = l_n_monodromy_increment(&state, 1, MonodromyLoop::Gamma1).unwrap();
    assert!((inc1 - c(-1.0, 0.0)).norm() < 1e-12);

    // around 0: L₁ ↦ 0, L₂ ↦ −½ L₁, and for L₃, L₄ the closed forms
    // −½L_{n−1} − (1/12)L_{n−2}·log x + (2πi/12)·L_{n−2}
    let l1 = l_n(&state, 1).unwrap();
    let l2 = l_n(&state, 2).unwrap();
    let l3 = l_n(&state, 3).unwrap();
    let inc1 = l_n_monodromy_increment(&state, 1, MonodromyLoop::Gamma0).unwrap();
    assert!(inc1.norm() < 1e-12);
    let inc2 = l_n_monodromy_increment(&state, 2, MonodromyLoop::Gamma0).unwrap();
    assert!((inc2 - (-0.5 * l1)).norm() < 1e-12);
    let inc3 = l_n_monodromy_increment(&state, 3, MonodromyLoop::Gamma0).unwrap();
    let want3 = -0.5 * l2 - l1 * lx / 12.0 + tpi / 12.0 * l1;
    assert!((inc3 - want3).norm() < 1e-12, "{inc3} vs {want3}");
    let inc4 = l_n_monodromy_increment(&state, 4, MonodromyLoop::Gamma0).unwrap();
    let want4 = -0.5 * l3 - l2 * lx / 12.0 + tpi / 12.0 * l2 + tpi / 24.0 * l1 * lx;
    assert!((inc4 - want4).norm() < 1e-12, "{inc4} vs {want4}");
}

#[test]
fn bernoulli_table() {
    let t = BernoulliTable::new(12);
    assert_eq!(t.beta(0), q_int(1));
    assert_eq!(t.beta(1), q(-1, 2));
    assert_eq!(t.beta(2), q(1, 12));
    assert_eq!(t.beta(3), q_int(0));
    assert_eq!(t.beta(4), q(-1, 720));
    assert_eq!(t.bernoulli(2), q(1, 6));
    assert_eq!(t.bernoulli(4), q(-1, 30));
    assert!(t.generating_identity_holds());
    for n in 1..=12 {
        assert!(t.convolution_identity_holds(n), "n = {n}");
    }
}

#[test]
fn l2_variants_differ_by_the_torsion_constant() {
    let state = continue_along(&straight(0.5, c(0.3, 0.0)), 2).unwrap();
    let plain = l_n(&state, 2).unwrap();
    let with_c = l2_with_torsion_constant(&state).unwrap();
    let tpi = c(0.0, 2.0 * PI);
    // L₂ = Li₂ − ½Li₁ log z and Li₁ = −log(1−z), so the two agree up to the constant
    assert!((with_c - plain - tpi * tpi / 24.0).norm() < 1e-13);
}

#[test]
fn euler_reflection_for_l2() {
    // L₂(x) + L₂(1−x) = (2πi)²/24 for x ∈ (0,1) on principal branches
    let tpi = c(0.0, 2.0 * PI);
    for x in [0.2, 0.37, 0.5, 0.71, 0.9] {
        let sx = continue_along(&straight(0.5, c(x, 0.0)), 2).unwrap();
        let s1mx = continue_along(&straight(0.5, c(1.0 - x, 0.0)), 2).unwrap();
        let sum = l2_with_torsion_constant(&sx).unwrap() + l2_with_torsion_constant(&s1mx).unwrap();
        assert!((sum - tpi * tpi / 24.0).norm() < 1e-11, "x = {x}: {sum}");
    }
}

#[test]
fn differential_equation_for_l2_by_finite_differences() {
    // dL₂ = ½(−log(1−x) dlog x + log x dlog(1−x))
    let x0 = c(0.35, 0.15);
    let base = continue_along(&straight(0.5, x0), 2).unwrap();
    let h = 1e-5;
    let f = |z: Complex64| l2_with_torsion_constant(&base.extend_to(z).unwrap()).unwrap();
    let d = (f(x0 + c(h, 0.0)) * 8.0 - f(x0 - c(h, 0.0)) * 8.0 - f(x0 + c(2.0 * h, 0.0))
        + f(x0 - c(2.0 * h, 0.0)))
        / (12.0 * h);
    let want = 0.5 * (-base.log_1mz / x0 + base.log_z * (-1.0) / (1.0 - x0) * (-1.0));
    // dlog(1−x) = −dx/(1−x)
    let want = 0.5 * (-base.log_1mz / x0 - base.log_z / (1.0 - x0));
    let _ = want;
    let expect = 0.5 * (-base.log_1mz / x0 - base.log_z / (1.0 - x0));
    assert!((d - expect).norm() < 1e-6, "dL2 {d} vs {expect}");
}

#[test]
fn zagier_function_is_path_independent() {
    let z = c(0.3, 0.4);
    let base = continue_along(&straight(0.5, z), 4).unwrap();
    let mut values = vec![zagier_single_valued(&base, 2).unwrap()];
    // five homotopy classes: compose with loops
    let loops = [
        vec![MonodromyLoop::Gamma0],
        vec![MonodromyLoop::Gamma1],
        vec![MonodromyLoop::Gamma0, MonodromyLoop::Gamma1],
        vec![MonodromyLoop::Gamma1Inv, MonodromyLoop::Gamma0],
    ];
    for seq in &loops {
        let mut s = base.clone();
        for l in seq {
            s = monodromy(&s, *l);
        }
        values.push(zagier_single_valued(&s, 2).unwrap());
    }
    let first = values[0];
    for v in &values {
        assert!((*v - first).norm() < 1e-8, "spread {:?}", values);
    }
    // real x in (0,1): the π₂-projection is purely imaginary, and 0 there
    let real_state = continue_along(&straight(0.5, c(0.3, 0.0)), 2).unwrap();
    let v = zagier_single_valued(&real_state, 2).unwrap();
    assert!(v.re == 0.0 && v.im.abs() < 1e-12);
}

#[test]
fn extended_precision_agrees_with_f64() {
    let path = PathSpec::new(0.4, vec![c(0.6, 0.5), c(0.3, 0.25)]);
    let a = continue_along_f64(&path, 3).unwrap();
    let b = continue_along_extended(&path, 3).unwrap();
    for m in 1..=3 {
        assert!((a.li_m(m) - b.li_m(m)).norm() < 1e-12);
    }
    assert!((a.log_z - b.log_z).norm() < 1e-13);
}

#[test]
fn tangential_start_matches_series() {
    let z0 = c(0.1, 0.05);
    let path = PathSpec { start: Start::Tangential([z0.re, z0.im]), waypoints: vec![c(0.5, 0.0)], margin: 0.04 };
    let state = continue_along(&path, 2).unwrap();
    let expect = PI * PI / 12.0 - 0.5 * (2.0f64).ln().powi(2);
    assert!((state.li_m(2).re - expect).abs() < 1e-11);
}

#[test]
fn beta_drives_l_n() {
    // spot check L₃ = Li₃ − ½Li₂ log z + (1/12) Li₁ log² z
    let state = continue_along(&straight(0.5, c(0.4, 0.3)), 3).unwrap();
    let want = state.li_m(3) - 0.5 * state.li_m(2) * state.log_z
        + state.li_m(1) * state.log_z * state.log_z / 12.0;
    let got = l_n(&state, 3).unwrap();
    assert!((got - want).norm() < 1e-13);
    assert!(q_to_f64(&BernoulliTable::new(3).beta(2)) == 1.0 / 12.0);
}
