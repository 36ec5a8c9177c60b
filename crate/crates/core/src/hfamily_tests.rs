//! Reduction-engine tests: the paper's displayed recurrence instances, the
//! initial values, the normal-form backends and their agreement.

use crate::exact::{parse_expr, RatExpr, Var};
use crate::hfamily::*;
use crate::numeric::{self, QuadratureConfig};
use crate::spectral::{Atom, Node, SpectralExpr};

fn p(src: &str) -> RatExpr {
    parse_expr(src).unwrap()
}

fn h1(a: u32, b: u32) -> SpectralExpr {
    SpectralExpr::atom(Atom::h1(a, b))
}

fn h2(a: u32, b: u32, c: u32) -> SpectralExpr {
    SpectralExpr::atom(Atom::h2(a, b, c))
}

fn expr(terms: &[(Atom, &str)]) -> SpectralExpr {
    let mut out = SpectralExpr::zero();
    for (a, c) in terms {
        out = out.add_term(a.clone(), p(c));
    }
    out
}

#[test]
fn reduce_h21_matches_lemma() {
    let ctx = Ctx::symbolic();
    let r = reduce_one_var(&ctx, &h1(2, 1)).unwrap();
    // H_{2,1} = (m/2) H_{1,1} + (z-1) H_{1,2}
    let want = expr(&[(Atom::h1(1, 1), "(m)/(2)"), (Atom::h1(1, 2), "z-1")]);
    assert_eq!(r, want);
}

#[test]
fn reduce_h13_matches_lemma() {
    let ctx = Ctx::symbolic();
    let r = reduce_one_var(&ctx, &h1(1, 3)).unwrap();
    // H_{1,3} = -(H_{1,2}((m+4)z-4) + m H_{1,1}) / (4(z-1)z)
    let want = expr(&[
        (Atom::h1(1, 1), "(-m)/(4*z*(z-1))"),
        (Atom::h1(1, 2), "(-((m+4)*z-4))/(4*(z-1)*z)"),
    ]);
    assert_eq!(r, want);
}

#[test]
fn reduce_h31_via_chain() {
    // H_{3,1} = (1/4)((m+2) H_{2,1} + 2(z-1) H_{2,2}), all chained down
    let ctx = Ctx::symbolic();
    let lemma = expr(&[(Atom::h1(2, 1), "(m+2)/(4)"), (Atom::h1(2, 2), "(z-1)/(2)")]);
    let lhs = reduce_one_var(&ctx, &h1(3, 1)).unwrap();
    let rhs = reduce_one_var(&ctx, &lemma).unwrap();
    assert_eq!(lhs, rhs);
}

#[test]
fn reduce_h22_h32_h14_h23_consistent_with_lemma() {
    let ctx = Ctx::symbolic();
    // H_{2,2} = (m/2+1) H_{1,2} + 2(z-1) H_{1,3}
    let lhs = reduce_one_var(&ctx, &h1(2, 2)).unwrap();
    let rhs = reduce_one_var(
        &ctx,
        &expr(&[(Atom::h1(1, 2), "(m+2)/(2)"), (Atom::h1(1, 3), "2*(z-1)")]),
    )
    .unwrap();
    assert_eq!(lhs, rhs);
    // H_{3,2} = (m/4+1) H_{2,2} + (z-1) H_{2,3}
    let lhs = reduce_one_var(&ctx, &h1(3, 2)).unwrap();
    let rhs = reduce_one_var(
        &ctx,
        &expr(&[(Atom::h1(2, 2), "(m+4)/(4)"), (Atom::h1(2, 3), "z-1")]),
    )
    .unwrap();
    assert_eq!(lhs, rhs);
    // H_{1,4} = -(H_{1,3}((m+8)z-6) + (m+2) H_{1,2}) / (6(z-1)z)
    let lhs = reduce_one_var(&ctx, &h1(1, 4)).unwrap();
    let rhs = reduce_one_var(
        &ctx,
        &expr(&[
            (Atom::h1(1, 3), "(-((m+8)*z-6))/(6*(z-1)*z)"),
            (Atom::h1(1, 2), "(-(m+2))/(6*(z-1)*z)"),
        ]),
    )
    .unwrap();
    assert_eq!(lhs, rhs);
    // H_{2,3} = -(H_{2,2}((m+6)z-6) + (m+2) H_{2,1}) / (4(z-1)z)
    let lhs = reduce_one_var(&ctx, &h1(2, 3)).unwrap();
    let rhs = reduce_one_var(
        &ctx,
        &expr(&[
            (Atom::h1(2, 2), "(-((m+6)*z-6))/(4*(z-1)*z)"),
            (Atom::h1(2, 1), "(-(m+2))/(4*(z-1)*z)"),
        ]),
    )
    .unwrap();
    assert_eq!(lhs, rhs);
}

#[test]
fn reduce_identity_on_basis() {
    let ctx = Ctx::symbolic();
    assert_eq!(reduce_one_var(&ctx, &h1(1, 1)).unwrap(), h1(1, 1));
    assert_eq!(reduce_two_var(&ctx, &h2(1, 1, 1)).unwrap(), h2(1, 1, 1));
}

#[test]
fn reduce_two_var_lemma_instances() {
    let ctx = Ctx::symbolic();
    // H_{2,1,1} = ((m+2)/2) H_{1,1,1} + (z2-1) H_{1,1,2} + (z1-1) H_{1,2,1}
    let r = reduce_two_var(&ctx, &h2(2, 1, 1)).unwrap();
    let want = expr(&[
        (Atom::h2(1, 1, 1), "(m+2)/(2)"),
        (Atom::h2(1, 1, 2), "z2-1"),
        (Atom::h2(1, 2, 1), "z1-1"),
    ]);
    assert_eq!(r, want);
    // H_{1,2,2} = (H_{1,2,1} - H_{1,1,2})/(z1-z2)
    let r = reduce_two_var(&ctx, &h2(1, 2, 2)).unwrap();
    let want = expr(&[
        (Atom::h2(1, 2, 1), "(1)/(z1-z2)"),
        (Atom::h2(1, 1, 2), "(-1)/(z1-z2)"),
    ]);
    assert_eq!(r, want);
    // H_{3,1,1} = (1/4)((m+4) H_{2,1,1} + 2(z2-1) H_{2,1,2} + 2(z1-1) H_{2,2,1})
    let lhs = reduce_two_var(&ctx, &h2(3, 1, 1)).unwrap();
    let rhs = reduce_two_var(
        &ctx,
        &expr(&[
            (Atom::h2(2, 1, 1), "(m+4)/(4)"),
            (Atom::h2(2, 1, 2), "(z2-1)/(2)"),
            (Atom::h2(2, 2, 1), "(z1-1)/(2)"),
        ]),
    )
    .unwrap();
    assert_eq!(lhs, rhs);
    // H_{2,1,2} = ((m+4)/2) H_{1,1,2} + 2(z2-1) H_{1,1,3} + (z1-1) H_{1,2,2}
    let lhs = reduce_two_var(&ctx, &h2(2, 1, 2)).unwrap();
    let rhs = reduce_two_var(
        &ctx,
        &expr(&[
            (Atom::h2(1, 1, 2), "(m+4)/(2)"),
            (Atom::h2(1, 1, 3), "2*(z2-1)"),
            (Atom::h2(1, 2, 2), "z1-1"),
        ]),
    )
    .unwrap();
    assert_eq!(lhs, rhs);
}

#[test]
fn ode_residual_reduces_to_zero() {
    // B2 H_{a,b+2} + B1 H_{a,b+1} + B0 H_{a,b} -> 0 for a, b <= 4
    let ctx = Ctx::symbolic();
    for a in 1..=4u32 {
        for b in 1..=4u32 {
            let z = RatExpr::var(Var::Z);
            let m = RatExpr::var(Var::M);
            let bb = b as i64;
            let b2 = RatExpr::from_int(bb * (bb + 1))
                .mul(&RatExpr::one().sub(&z))
                .mul(&z);
            let b1 = RatExpr::from_int(bb).mul(
                &RatExpr::from_int(a as i64 + bb).sub(
                    &m.mul(&RatExpr::from_ratio(1, 2))
                        .add(&RatExpr::from_int(a as i64 + 2 * bb - 1))
                        .mul(&z),
                ),
            );
            let b0 = RatExpr::from_int(bb)
                .mul(
                    &m.mul(&RatExpr::from_ratio(1, 2))
                        .add(&RatExpr::from_int(a as i64 + bb as i64 - 2)),
                )
                .neg();
            let e = SpectralExpr::term(Atom::h1(a, b + 2), b2)
                .add_term(Atom::h1(a, b + 1), b1)
                .add_term(Atom::h1(a, b), b0);
            let r = reduce_one_var(&ctx, &e).unwrap();
            assert!(r.is_empty(), "ODE residual a={} b={}: {:?}", a, b, r);
        }
    }
}

#[test]
fn pde_residuals_reduce_to_zero() {
    let ctx = Ctx::symbolic();
    let z1 = RatExpr::var(Var::Z1);
    let z2 = RatExpr::var(Var::Z2);
    let m = RatExpr::var(Var::M);
    let half_m = m.mul(&RatExpr::from_ratio(1, 2));
    for a in 1..=3u32 {
        for b in 1..=3u32 {
            for c in 1..=3u32 {
                let (ai, bi, ci) = (a as i64, b as i64, c as i64);
                // PDE-1
                let c20 = RatExpr::from_int(bi * (bi + 1))
                    .mul(&RatExpr::one().sub(&z1))
                    .mul(&z1);
                let c11 = RatExpr::from_int(bi * ci)
                    .mul(&RatExpr::one().sub(&z1))
                    .mul(&z2);
                let c10 = RatExpr::from_int(bi).mul(
                    &RatExpr::from_int(ai + bi + ci).sub(
                        &half_m
                            .add(&RatExpr::from_int(ai + 2 * bi + ci - 1))
                            .mul(&z1),
                    ),
                );
                let c01 = RatExpr::from_int(-bi * ci).mul(&z2);
                let c00 = RatExpr::from_int(bi)
                    .mul(&half_m.add(&RatExpr::from_int(ai + bi + ci - 2)))
                    .neg();
                let e = SpectralExpr::term(Atom::h2(a, b + 2, c), c20)
                    .add_term(Atom::h2(a, b + 1, c + 1), c11)
                    .add_term(Atom::h2(a, b + 1, c), c10)
                    .add_term(Atom::h2(a, b, c + 1), c01)
                    .add_term(Atom::h2(a, b, c), c00);
                let r = reduce_two_var(&ctx, &e).unwrap();
                assert!(r.is_empty(), "PDE-1 residual ({},{},{}): {:?}", a, b, c, r);
                // PDE-2 (the b<->c, z1<->z2 mirror)
                let c02 = RatExpr::from_int(ci * (ci + 1))
                    .mul(&RatExpr::one().sub(&z2))
                    .mul(&z2);
                let c11 = RatExpr::from_int(bi * ci)
                    .mul(&RatExpr::one().sub(&z2))
                    .mul(&z1);
                let c01 = RatExpr::from_int(ci).mul(
                    &RatExpr::from_int(ai + bi + ci).sub(
                        &half_m
                            .add(&RatExpr::from_int(ai + bi + 2 * ci - 1))
                            .mul(&z2),
                    ),
                );
                let c10 = RatExpr::from_int(-bi * ci).mul(&z1);
                let c00 = RatExpr::from_int(ci)
                    .mul(&half_m.add(&RatExpr::from_int(ai + bi + ci - 2)))
                    .neg();
                let e = SpectralExpr::term(Atom::h2(a, b, c + 2), c02)
                    .add_term(Atom::h2(a, b + 1, c + 1), c11)
                    .add_term(Atom::h2(a, b, c + 1), c01)
                    .add_term(Atom::h2(a, b + 1, c), c10)
                    .add_term(Atom::h2(a, b, c), c00);
                let r = reduce_two_var(&ctx, &e).unwrap();
                assert!(r.is_empty(), "PDE-2 residual ({},{},{}): {:?}", a, b, c, r);
            }
        }
    }
}

#[test]
fn value_at_zero_examples() {
    let ctx = Ctx::symbolic();
    // (1,1) -> gamma
    assert_eq!(value_at_zero(&ctx, 1, 1).unwrap(), RatExpr::gamma());
    // (2,1) -> (m/4) gamma
    assert_eq!(
        value_at_zero(&ctx, 2, 1).unwrap(),
        p("(m)/(4)").mul(&RatExpr::gamma())
    );
    // sanity composite: -H_{2,1}(0) + (4/m) H_{3,1}(0) = gamma (4-m)/12
    let v21 = value_at_zero(&ctx, 2, 1).unwrap();
    let v31 = value_at_zero(&ctx, 3, 1).unwrap();
    let combo = v31.mul(&p("(4)/(m)")).sub(&v21);
    assert_eq!(combo, p("(4-m)/(12)").mul(&RatExpr::gamma()));
}

#[test]
fn nonreducible_atoms_rejected() {
    let ctx = Ctx::symbolic();
    assert!(reduce_one_var(&ctx, &h1(0, 3)).is_err());
    assert!(reduce_two_var(&ctx, &h2(0, 1, 1)).is_err());
    assert!(reduce_two_var(&ctx, &h2(1, 0, 2)).is_err());
}

#[test]
fn closed_form_h11_fixed_m4() {
    // H_{1,1}(z;4) = 1/(1-z)
    let ctx = Ctx::fixed(4);
    let nf = closed_form(&ctx, &h1(1, 1)).unwrap();
    assert_eq!(nf.coeffs.len(), 1);
    assert_eq!(nf.coeffs[&CfAtom::One], p("(1)/(1-z)"));
}

#[test]
fn closed_form_initial_relation_symbolic() {
    // m H_{1,1} + 2z H_{1,2} - 2G -> 0 (symbolic m)
    let ctx = Ctx::symbolic();
    let e = expr(&[
        (Atom::h1(1, 1), "m"),
        (Atom::h1(1, 2), "2*z"),
        (Atom::G { node: Node::Z }, "-2"),
    ]);
    assert!(closed_form(&ctx, &e).unwrap().is_zero());
    assert!(is_zero_rewrite(&ctx, &e).unwrap());
    assert!(is_zero_both(&ctx, &e).unwrap());
}

#[test]
fn closed_form_h21_relation() {
    // z H_{1,2} - H_{0,2} + H_{1,1} -> 0 in every mode
    for ctx in [Ctx::symbolic(), Ctx::fixed(2), Ctx::fixed(3), Ctx::fixed(4)] {
        let e = expr(&[
            (Atom::h1(1, 2), "z"),
            (Atom::H02 { node: Node::Z }, "-1"),
            (Atom::h1(1, 1), "1"),
        ]);
        assert!(is_zero_both(&ctx, &e).unwrap(), "mode {:?}", ctx.mode());
    }
}

#[test]
fn backend_agreement_on_random_combinations() {
    // Random rational combinations of reduced atoms: both backends agree
    // on zero/nonzero over one- and two-variable corpora.
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let ctx = Ctx::symbolic();
    for trial in 0..60 {
        let a = rng.gen_range(1..=4u32);
        let b = rng.gen_range(1..=4u32);
        let e = h1(a, b);
        let red = reduce_one_var(&ctx, &e).unwrap();
        let diff = red.sub(&e);
        // reduction is sound: reduced - original is zero
        assert!(is_zero_both(&ctx, &diff).unwrap(), "trial {}", trial);
        // and adding gamma breaks it
        let skew = diff.add(&SpectralExpr::constant(RatExpr::gamma()));
        assert!(!is_zero_both(&ctx, &skew).unwrap());
    }
}

#[test]
fn dimension_shift_symbolic() {
    // H_{a,b}(.; m+2) = a H_{a+1,b} + b H_{a,b+1}: compare the closed form
    // of the shift against the m -> m+2 substitution of the closed form
    // (T -> T/(1-z), gamma -> (m/2) gamma).
    let ctx = Ctx::symbolic();
    for (a, b) in [(1u32, 1u32), (2, 1), (1, 2), (2, 2)] {
        let shifted = dimension_shift(&Atom::h1(a, b)).unwrap();
        let nf_shift = closed_form(&ctx, &shifted).unwrap();
        let nf_orig = closed_form(&ctx, &h1(a, b)).unwrap();
        // substitute m -> m+2 in coefficients; T and gamma transform
        let m_plus_2 = RatExpr::var(Var::M).add(&RatExpr::from_int(2));
        let half_m = RatExpr::var(Var::M).mul(&RatExpr::from_ratio(1, 2));
        let mut transformed = NormalForm::zero();
        for (atom, c) in &nf_orig.coeffs {
            let cs = c.subst_one(Var::M, &m_plus_2).unwrap();
            // gamma_{m+2} = (m/2) gamma_m: a factor (m/2) for the gamma part
            let cs = split_gamma_rescale(&cs, &half_m);
            match atom {
                CfAtom::One => {
                    transformed = transformed.add(&nf_term(CfAtom::One, cs));
                }
                CfAtom::T(node) => {
                    // T_{m+2} = (1-z)^{-1} T_m
                    let inv = RatExpr::one()
                        .div(&RatExpr::one().sub(&node.expr()))
                        .unwrap();
                    transformed = transformed.add(&nf_term(CfAtom::T(*node), cs.mul(&inv)));
                }
                CfAtom::L(_) => unreachable!("symbolic mode has no log branch"),
            }
        }
        let diff = nf_shift.sub(&transformed);
        assert!(diff.is_zero(), "dimension shift ({},{}) mismatch: {:?}", a, b, diff);
    }
}

fn nf_term(atom: CfAtom, c: RatExpr) -> NormalForm {
    let mut nf = NormalForm::zero();
    nf.coeffs.insert(atom, c);
    nf
}

/// Rescale the gamma part of a coefficient by `factor` (gamma_{m+2} =
/// (m/2) gamma_m when substituting the dimension shift).
fn split_gamma_rescale(c: &RatExpr, factor: &RatExpr) -> RatExpr {
    let den = RatExpr::from_poly(c.den_poly().clone());
    let free = RatExpr::from_poly(c.num_gamma_free().clone()).div(&den).unwrap();
    let gpart = RatExpr::from_poly(c.num_gamma().clone()).div(&den).unwrap();
    free.add(&gpart.mul(factor).mul(&RatExpr::gamma()))
}

#[test]
fn reduction_matches_quadrature() {
    // evaluate(reduce(e)) = evaluate(e) through the numeric oracle
    let ctx = Ctx::symbolic();
    let cfg = QuadratureConfig::default();
    for (a, b) in [(2u32, 1u32), (3, 1), (4, 1), (2, 3), (3, 2), (1, 4)] {
        let red = reduce_one_var(&ctx, &h1(a, b)).unwrap();
        for (z, m) in [(0.3, 3.0), (1.0 / 3.0, 5.0), (-0.7, 2.6), (0.6, 4.0)] {
            let direct = numeric::eval_h1(a, b, z, m, &cfg).unwrap();
            let via = numeric::eval_spectral(&ctx, &red, z, 0.0, 0.0, m, &cfg).unwrap();
            assert!(
                (direct - via).abs() <= 1e-9 * direct.abs().max(1.0),
                "H[{},{}] at z={} m={}: {} vs {}",
                a, b, z, m, direct, via
            );
        }
    }
    for (a, b, c) in [(2u32, 1u32, 1u32), (3, 1, 1), (2, 2, 1), (2, 1, 2), (1, 2, 2)] {
        let red = reduce_two_var(&ctx, &h2(a, b, c)).unwrap();
        let dd = expand_to_divdiff(&ctx, &red).unwrap();
        for (z1, z2, m) in [(0.2, 0.45, 3.7), (0.25, 0.5, 3.0), (-0.4, 0.3, 5.0)] {
            let direct = numeric::eval_h2(a, b, c, z1, z2, m, &cfg).unwrap();
            let via = numeric::eval_spectral(&ctx, &red, 0.0, z1, z2, m, &cfg).unwrap();
            let via_dd = numeric::eval_spectral(&ctx, &dd, 0.0, z1, z2, m, &cfg).unwrap();
            assert!(
                (direct - via).abs() <= 1e-8 * direct.abs().max(1.0),
                "H[{},{},{}] at ({},{};{}): {} vs {}",
                a, b, c, z1, z2, m, direct, via
            );
            assert!(
                (direct - via_dd).abs() <= 1e-8 * direct.abs().max(1.0),
                "dd-expansion H[{},{},{}] at ({},{};{}): {} vs {}",
                a, b, c, z1, z2, m, direct, via_dd
            );
        }
    }
}

#[test]
fn expand_to_divdiff_h111() {
    // H_{1,1,1} -> (z H_{2,1})[z1,z2]; numeric agreement plus the exact
    // eta-boundary H_{a,b,c}(z,0) = H_{a+c,b}(z) elsewhere.
    let ctx = Ctx::symbolic();
    let e = expand_to_divdiff(&ctx, &h2(1, 1, 1)).unwrap();
    // the expansion lives on one-variable atoms at z1, z2
    assert!(e
        .atoms()
        .all(|a| matches!(a, Atom::One | Atom::H1 { node: Node::Z1 | Node::Z2, .. })));
    let cfg = QuadratureConfig::default();
    let direct = numeric::eval_h2(1, 1, 1, 0.2, 0.5, 3.0, &cfg).unwrap();
    let via = numeric::eval_spectral(&ctx, &e, 0.0, 0.2, 0.5, 3.0, &cfg).unwrap();
    assert!((direct - via).abs() < 1e-9);
}

#[test]
fn m2_pole_detection() {
    let ctx = Ctx::symbolic();
    let nf = closed_form(&ctx, &h1(1, 1)).unwrap();
    assert!(nf.has_m2_pole());
    let nf = closed_form(&ctx, &SpectralExpr::atom(Atom::H02 { node: Node::Z })).unwrap();
    assert!(!nf.has_m2_pole());
}
