//! Operator-law tests: cyclic operators, difference-raising operators,
//! internal relations, invariances.

use crate::exact::{parse_expr, MMode, RatExpr, Var, Weight};
use crate::hfamily::{self, Ctx};
use crate::ops::*;
use crate::spectral::{Atom, Node, SpectralExpr};

fn p(src: &str) -> RatExpr {
    parse_expr(src).unwrap()
}

#[test]
fn sigma_on_h31() {
    // sigma_{-m/2-1}(H_{3,1}) = (1-z) H_{1,3}, then reduced
    let ctx = Ctx::symbolic();
    let j = Weight::minus_half_m_plus(-1);
    let s = sigma_one(&ctx, &j, &SpectralExpr::atom(Atom::h1(3, 1))).unwrap();
    let want = hfamily::reduce_one_var(
        &ctx,
        &SpectralExpr::term(Atom::h1(1, 3), p("1-z")),
    )
    .unwrap();
    assert_eq!(s, want);
}

#[test]
fn sigma_g_invariance() {
    // sigma_{-m/2-1}(G) = G, and closed_form(sigma(G) - G) = 0
    let ctx = Ctx::symbolic();
    let j = Weight::minus_half_m_plus(-1);
    let g = SpectralExpr::atom(Atom::G { node: Node::Z });
    let s = sigma_one(&ctx, &j, &g).unwrap();
    assert_eq!(s, g);
    assert!(hfamily::is_zero_both(&ctx, &s.sub(&g)).unwrap());
}

#[test]
fn sigma_order_two_on_one_variable() {
    // sigma_j^2 = id on one-variable expressions
    let ctx = Ctx::symbolic();
    for j in [Weight::minus_half_m_plus(-1), Weight::minus_half_m_plus(1)] {
        for e in [
            SpectralExpr::atom(Atom::h1(2, 1)),
            SpectralExpr::term(Atom::h1(3, 2), p("(z^2-3)/(1-z)")),
            SpectralExpr::atom(Atom::G { node: Node::Z }),
        ] {
            let reduced = hfamily::reduce_one_var(&ctx, &e).unwrap();
            let s2 = sigma_one(&ctx, &j, &sigma_one(&ctx, &j, &reduced).unwrap()).unwrap();
            let diff = s2.sub(&reduced);
            assert!(
                hfamily::is_zero_both(&ctx, &diff).unwrap(),
                "sigma^2 != id for {:?} at {:?}",
                e,
                j
            );
        }
    }
}

#[test]
fn sigma_order_three_on_two_variables() {
    // sigma_j^3 = id on two-variable expressions
    let ctx = Ctx::symbolic();
    let j = Weight::minus_half_m_plus(-2);
    for e in [
        SpectralExpr::atom(Atom::h2(2, 1, 1)),
        SpectralExpr::term(Atom::h2(1, 2, 1), p("(z1-z2)/(1-z2)")),
    ] {
        let reduced = hfamily::reduce_two_var(&ctx, &e).unwrap();
        let s1 = sigma_two(&ctx, &j, &reduced).unwrap();
        let s2 = sigma_two(&ctx, &j, &s1).unwrap();
        let s3 = sigma_two(&ctx, &j, &s2).unwrap();
        assert_eq!(s3, reduced, "sigma^3 != id for {:?}", e);
    }
}

#[test]
fn sigma0_permutes_indices_fixed_even_m() {
    // closed_form(sigma_0(H_{a,b}) - (1-z)^{a+b+m/2-2} H_{b,a}) = 0 at
    // m in {2, 4, 6}
    for m in [2i64, 4, 6] {
        let ctx = Ctx::fixed(m);
        for (a, b) in [(1u32, 2u32), (2, 1), (2, 2), (3, 1)] {
            let j = Weight::from_ints(0, 0);
            let s = sigma_one(&ctx, &j, &SpectralExpr::atom(Atom::h1(a, b))).unwrap();
            let k = (a + b) as i64 - 2 + m / 2;
            let target = hfamily::reduce_one_var(
                &ctx,
                &SpectralExpr::term(
                    Atom::h1(b, a),
                    crate::exact::one_minus_pow(Var::Z, k),
                ),
            )
            .unwrap();
            let diff = s.sub(&target);
            assert!(
                hfamily::is_zero_both(&ctx, &diff).unwrap(),
                "sigma0 H[{},{}] at m={}",
                a,
                b,
                m
            );
        }
    }
}

#[test]
fn sigma0_permutation_numeric_noninteger_m() {
    // numeric check at m = 3 and a non-integer m
    let cfg = crate::numeric::QuadratureConfig::default();
    for m in [3.0, 3.7] {
        for (a, b) in [(1u32, 2u32), (2, 1), (3, 2)] {
            for z in [0.3, -0.5] {
                let lhs = crate::numeric::eval_h1(a, b, z / (z - 1.0), m, &cfg).unwrap();
                let rhs = (1.0 - z).powf((a + b) as f64 + m / 2.0 - 2.0)
                    * crate::numeric::eval_h1(b, a, z, m, &cfg).unwrap();
                assert!(
                    (lhs - rhs).abs() < 1e-9 * lhs.abs().max(1.0),
                    "sigma0 numeric H[{},{}] m={} z={}: {} vs {}",
                    a, b, m, z, lhs, rhs
                );
            }
        }
    }
}

#[test]
fn illegal_weight_rejected() {
    // q != -1 on H-atoms in symbolic mode is rejected
    let ctx = Ctx::symbolic();
    let j = Weight::from_ints(-2, 0); // plain -2, no m/2 part
    let err = sigma_one(&ctx, &j, &SpectralExpr::atom(Atom::h1(2, 1))).unwrap_err();
    assert!(matches!(err, crate::error::EngineError::IllegalWeight(_)));
    // but fine at fixed even m
    let ctx = Ctx::fixed(4);
    assert!(sigma_one(&ctx, &j, &SpectralExpr::atom(Atom::h1(2, 1))).is_ok());
    // and rejected at fixed odd m when the exponent is fractional
    let ctx = Ctx::fixed(3);
    assert!(sigma_one(&ctx, &j, &SpectralExpr::atom(Atom::h1(2, 1))).is_err());
}

#[test]
fn eta_on_curvature_pair() {
    // eta(H_{a,b,c}) = H_{a+c,b}; one-variable eta gives the z = 0 value
    let ctx = Ctx::symbolic();
    let e = SpectralExpr::term(Atom::h2(2, 1, 1), p("(1-z1)"));
    let r = eta(&ctx, &e, Arity::Two).unwrap();
    assert_eq!(r, SpectralExpr::term(Atom::h1(3, 1), p("1-z")));
    // constants pass through
    let c = SpectralExpr::constant(p("7/3"));
    assert_eq!(eta(&ctx, &c, Arity::Two).unwrap(), c);
    // one-variable: K at z=0 is gamma(4-m)/12 (checked in geometry)
    let one = SpectralExpr::term(Atom::h1(1, 1), p("3"));
    let v = eta(&ctx, &one, Arity::One).unwrap();
    assert_eq!(v, SpectralExpr::constant(p("3").mul(&RatExpr::gamma())));
}

#[test]
fn eta_pole_detection() {
    let ctx = Ctx::symbolic();
    let e = SpectralExpr::term(Atom::h2(1, 1, 1), p("(1)/(z2)"));
    assert!(matches!(
        eta(&ctx, &e, Arity::Two),
        Err(crate::error::EngineError::PoleAtContraction(_))
    ));
}

#[test]
fn internal_relation_exact_rational() {
    // (bsq0_j - bsq-)(f) = (sigma_{j-1} . bsq+ . sigma_j)(f) exactly for
    // rational f; f(y) = y^2 is z^2-2z+1... in z-coordinates f = (1-z)^2.
    let mode = MMode::Symbolic;
    for jj in [3i64, 1, -2] {
        let j = Weight::from_ints(jj, 0);
        for f in [p("(1-z)^2"), p("(1)/(2-z)"), p("z^3-4*z"), p("(3-z)/(5+z)")] {
            let r = internal_relation_residual_rat(&mode, &j, &f).unwrap();
            assert!(r.is_zero(), "internal relation j={} f={}", jj, f);
        }
    }
}

#[test]
fn internal_relation_h_atom_fixed_even_m() {
    // f = H_{2,1} at fixed m = 4 is the rational function 1/(1-z)
    let ctx = Ctx::fixed(4);
    let nf = hfamily::closed_form(&ctx, &SpectralExpr::atom(Atom::h1(2, 1))).unwrap();
    let f = nf.coeffs[&hfamily::CfAtom::One].clone();
    assert_eq!(f, p("(1)/(1-z)"));
    let j = Weight::from_ints(-3, 0);
    let r = internal_relation_residual_rat(ctx.mode(), &j, &f).unwrap();
    assert!(r.is_zero());
}

#[test]
fn internal_relation_numeric_closures() {
    // numeric path with exp-composite closures, j = 1/2
    let j = 0.5;
    let f = fn1(|x: f64| (0.3 * x).exp() / (1.5 + x.sin()));
    let lhs1 = tri_zero(j, &f);
    let lhs2 = tri_minus(&f);
    let t1 = tau1(j, &f);
    let inner = tri_plus(&t1);
    let rhs = tau2(j, &inner);
    for (u, v) in [(0.3, 0.9), (1.1, -0.4), (-0.6, -0.2), (0.01, 1.3)] {
        let r = (lhs1(u, v) - lhs2(u, v) - rhs(u, v)).abs();
        assert!(r < 1e-10, "btri-to-tau at ({}, {}): {}", u, v, r);
    }
}

#[test]
fn tau_orders_numeric() {
    let f2 = fn2(|x1: f64, x2: f64| (0.4 * x1).sin() + x2 * x2 / (3.0 + x1 * x1));
    let j = -0.5;
    let t = tau2(j, &tau2(j, &tau2(j, &f2)));
    for (u, v) in [(0.3, -0.7), (1.2, 0.4)] {
        assert!((t(u, v) - f2(u, v)).abs() < 1e-12, "tau^3 != id");
    }
    let f1 = fn1(|x: f64| x.cos() + 0.2 * x);
    let t = tau1(j, &tau1(j, &f1));
    for x in [0.5, -1.3] {
        assert!((t(x) - f1(x)).abs() < 1e-12, "tau^2 != id");
    }
    // tau_0(f)(x) = f(-x)
    let t = tau1(0.0, &f1);
    assert!((t(0.7) - f1(-0.7)).abs() < 1e-15);
}

#[test]
fn tau_invariance_of_exp_kernel() {
    // tau_j(G_exp^{(1)}(.;j)) = G_exp^{(1)}(.;j)
    for j in [0.37, -1.2, 2.0] {
        let g = fn1(move |x: f64| crate::numeric::exp_divdiff(j, &[0.0, x]));
        let t = tau1(j, &g);
        for x in [0.4, -0.9, 2.1] {
            assert!((t(x) - g(x)).abs() < 1e-13);
        }
    }
}

#[test]
fn gpow_invariance_exact() {
    // sigma_{j-1}(z^j[1,y]) = z^j[1,y] as rational identities, j in -3..=3.
    // In z-coordinates z^j[1,y] = ((1-z)^j - 1)/(-z).
    let mode = MMode::Symbolic;
    for jj in -3i64..=3 {
        let g = crate::exact::one_minus_pow(Var::Z, jj)
            .sub(&RatExpr::one())
            .div(&RatExpr::var(Var::Z).neg())
            .unwrap();
        let j = Weight::from_ints(jj - 1, 0);
        let s = sigma_one_rat(&mode, &j, &g).unwrap();
        assert!(s.sub(&g).is_zero(), "Gpow invariance j={}", jj);
    }
}

#[test]
fn grad_composition_agreement() {
    // (sigma_{j-1}^2 . bsq+ . (1+sigma_j))(f) agrees with the term-by-term
    // expansion on rational test functions: equals
    // bsq+(K)(y1,y2) pulled back by sigma twice where K = (1+sigma_j)f.
    let mode = MMode::Symbolic;
    for jj in [2i64, -1] {
        let j = Weight::from_ints(jj, 0);
        let jm1 = j.shift_p(-1);
        for f in [p("(1-z)^2"), p("(2)/(3-z)")] {
            let k = f.add(&sigma_one_rat(&mode, &j, &f).unwrap());
            let b = sq_plus_rat(&k).unwrap();
            let s1 = sigma_two_rat(&mode, &jm1, &b).unwrap();
            let s2 = sigma_two_rat(&mode, &jm1, &s1).unwrap();
            // remark form: sigma_{j-1}^2(bsq+ K)(y1,y2) = y1^{j-1} K[y2, 1/y1]
            // numeric spot-check of the composed expression
            let pt = |e: &RatExpr, z1v: f64, z2v: f64| {
                e.eval_f64(
                    &crate::exact::FPoint { z: 0.0, z1: z1v, z2: z2v, m: 0.0 },
                    1.0,
                )
                .unwrap()
            };
            let (z1v, z2v): (f64, f64) = (0.3, -0.4);
            let (y1, y2) = (1.0 - z1v, (1.0 - z2v) / (1.0 - z1v));
            let kf = |y: f64| {
                let zz = 1.0 - y;
                let fv = f
                    .eval_f64(&crate::exact::FPoint { z: zz, z1: 0.0, z2: 0.0, m: 0.0 }, 1.0)
                    .unwrap();
                let fz = f
                    .eval_f64(
                        &crate::exact::FPoint { z: 1.0 - 1.0 / y, z1: 0.0, z2: 0.0, m: 0.0 },
                        1.0,
                    )
                    .unwrap();
                fv + y.powi(jj as i32) * fz
            };
            let expect = y1.powi(jj as i32 - 1) * (kf(y2) - kf(1.0 / y1)) / (y2 - 1.0 / y1);
            let got = pt(&s2, z1v, z2v);
            assert!(
                (got - expect).abs() < 1e-10,
                "grad composition j={} f={}: {} vs {}",
                jj, f, got, expect
            );
        }
    }
}

#[test]
fn bsq_tri_bridges_numeric() {
    // comparison bridges between the square and triangle families
    let f = fn1(|y: f64| 1.0 / (1.0 + y));
    let fe = fn1(|x: f64| 1.0 / (1.0 + x.exp()));
    let (x1, x2): (f64, f64) = (0.4, 0.9);
    let (y1, y2) = (x1.exp(), x2.exp());
    let bp = bsq_plus_num(&f);
    let tp = tri_plus(&fe);
    let e0 = |x: f64| crate::numeric::exp_divdiff(1.0, &[0.0, x]);
    assert!((bp(y1, y2) - tp(x1, x2) / (x1.exp() * e0(x2))).abs() < 1e-12);
    let bm = bsq_minus_num(&f);
    let tm = tri_minus(&fe);
    assert!((bm(y1, y2) - tm(x1, x2) / e0(x1)).abs() < 1e-12);
    let j = 2.0;
    let b0 = bsq_zero_num(j, &f);
    let t0 = tri_zero(j, &fe);
    assert!((b0(y1, y2) - t0(x1, x2) / e0(x1)).abs() < 1e-12);
}

#[test]
fn variational_k_odd_function_vanishes() {
    // (1+sigma_j)(f) = 0 makes the variational K vanish: take
    // f = g - sigma_j(g) which is sigma_j-odd by order two.
    let ctx = Ctx::symbolic();
    let j = Weight::minus_half_m_plus(-1);
    let g = hfamily::reduce_one_var(&ctx, &SpectralExpr::atom(Atom::h1(2, 1))).unwrap();
    let f = g.sub(&sigma_one(&ctx, &j, &g).unwrap());
    let k = variational_k(&ctx, &j, &f).unwrap();
    assert!(hfamily::is_zero_both(&ctx, &k).unwrap());
}
