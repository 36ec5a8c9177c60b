//! The concrete spectral functions of the second heat coefficient on
//! noncommutative m-tori (curvature densities K, H, the geometric-action
//! densities T and the dimension-two OPS density) and the machine
//! verification of the functional relations connecting them.
//!
//! z-coordinates are used throughout the symbolic layer: z = 1-y,
//! z1 = 1-y1, z2 = 1-y1y2. The overall constant Vol(S^{m-2})/2 is omitted
//! everywhere; it scales both sides of every verified relation.

use crate::divdiff;
use crate::error::{EngineError, EngineResult};
use crate::exact::{MMode, RatExpr, Var, Weight};
use crate::hfamily::{self, Ctx};
use crate::numeric::{self, QuadratureConfig};
use crate::ops::{self, Arity, Fn1, Fn2};
use crate::report::{Mode, VerificationReport};
use crate::spectral::{Atom, Node, SpectralExpr};
use std::time::Instant;

/// K and H densities of R_{Delta_k} as spectral expressions.
#[derive(Clone, Debug)]
pub struct CurvaturePair {
    pub k: SpectralExpr,
    pub h: SpectralExpr,
}

fn m_inv(ctx: &Ctx) -> EngineResult<RatExpr> {
    Ok(RatExpr::one().div(&ctx.mode().m_expr())?)
}

/// K_{Delta_k} = (4/m) H_{3,1} - H_{2,1}.
pub fn build_k(ctx: &Ctx) -> EngineResult<SpectralExpr> {
    let four_over_m = RatExpr::from_int(4).mul(&m_inv(ctx)?);
    Ok(SpectralExpr::term(Atom::h1(3, 1), four_over_m)
        .add_term(Atom::h1(2, 1), RatExpr::from_int(-1)))
}

/// H_{Delta_k} = (4/m+2) H_{2,1,1} - (4(1-z1)/m) H_{2,2,1} - (8/m) H_{3,1,1}.
pub fn build_h(ctx: &Ctx) -> EngineResult<SpectralExpr> {
    let inv_m = m_inv(ctx)?;
    let c1 = RatExpr::from_int(4).mul(&inv_m).add(&RatExpr::from_int(2));
    let c2 = RatExpr::from_int(-4)
        .mul(&inv_m)
        .mul(&RatExpr::one().sub(&RatExpr::var(Var::Z1)));
    let c3 = RatExpr::from_int(-8).mul(&inv_m);
    Ok(SpectralExpr::term(Atom::h2(2, 1, 1), c1)
        .add_term(Atom::h2(2, 2, 1), c2)
        .add_term(Atom::h2(3, 1, 1), c3))
}

pub fn build_curvature(ctx: &Ctx) -> EngineResult<CurvaturePair> {
    Ok(CurvaturePair { k: build_k(ctx)?, h: build_h(ctx)? })
}

/// T_{Delta_k} = ((4-m)/12) G + (4/m+2) H_{3,1} - (4(1-z)/m) H_{3,2}
///             - (8/m) H_{4,1}.
pub fn build_t(ctx: &Ctx) -> EngineResult<SpectralExpr> {
    let m = ctx.mode().m_expr();
    let inv_m = m_inv(ctx)?;
    let c_g = RatExpr::from_int(4)
        .sub(&m)
        .mul(&RatExpr::from_ratio(1, 12));
    let c1 = RatExpr::from_int(4).mul(&inv_m).add(&RatExpr::from_int(2));
    let c2 = RatExpr::from_int(-4)
        .mul(&inv_m)
        .mul(&RatExpr::one().sub(&RatExpr::var(Var::Z)));
    let c3 = RatExpr::from_int(-8).mul(&inv_m);
    Ok(SpectralExpr::term(Atom::G { node: Node::Z }, c_g)
        .add_term(Atom::h1(3, 1), c1)
        .add_term(Atom::h1(3, 2), c2)
        .add_term(Atom::h1(4, 1), c3))
}

/// The alternative assembly of T: -eta(K) z^{-m/2}[1,y] + eta(H_{Delta_k}),
/// which must agree with `build_t` after reduction.
pub fn build_t_via_eta(ctx: &Ctx) -> EngineResult<SpectralExpr> {
    let h = build_h(ctx)?;
    let eta_h = ops::eta(ctx, &h, Arity::Two)?;
    // eta(K) = K(1;m) = Gamma(m/2)(4-m)/12 and
    // -eta(K) u^{-m/2}[1,y] = ((4-m)/12) G in z-coordinates.
    let m = ctx.mode().m_expr();
    let c_g = RatExpr::from_int(4)
        .sub(&m)
        .mul(&RatExpr::from_ratio(1, 12));
    Ok(eta_h.add(&SpectralExpr::term(Atom::G { node: Node::Z }, c_g)))
}

// ---------------------------------------------------------------------------
// Numeric closures.
// ---------------------------------------------------------------------------

/// Numeric K_{Delta_k}(y; m) through the one-variable oracle.
pub fn k_num(m: f64, cfg: QuadratureConfig) -> Fn1 {
    ops::fn1(move |y| {
        let z = 1.0 - y;
        let h31 = numeric::eval_h1(3, 1, z, m, &cfg).expect("H31");
        let h21 = numeric::eval_h1(2, 1, z, m, &cfg).expect("H21");
        4.0 / m * h31 - h21
    })
}

/// Numeric T_{Delta_k}(y; m).
pub fn t_num(m: f64, cfg: QuadratureConfig) -> Fn1 {
    ops::fn1(move |y| {
        let z = 1.0 - y;
        let g = numeric::gamma(m / 2.0);
        let gg = if z.abs() > 1e-7 {
            (g * (1.0 - z).powf(-m / 2.0) - g) / z
        } else {
            g * m / 2.0
        };
        let h31 = numeric::eval_h1(3, 1, z, m, &cfg).expect("H31");
        let h32 = numeric::eval_h1(3, 2, z, m, &cfg).expect("H32");
        let h41 = numeric::eval_h1(4, 1, z, m, &cfg).expect("H41");
        (4.0 - m) / 12.0 * gg + (4.0 / m + 2.0) * h31 - 4.0 * (1.0 - z) / m * h32 - 8.0 / m * h41
    })
}

/// Numeric H_{Delta_k}(y1, y2; m): simplex quadrature near the contraction
/// loci, the (fast) one-variable eta-form on z2 ~ 0, and the
/// divided-difference expansion elsewhere.
pub fn h_num(m: f64, cfg: QuadratureConfig) -> Fn2 {
    ops::fn2(move |y1, y2| {
        let z1 = 1.0 - y1;
        let z2 = 1.0 - y1 * y2;
        h_num_z(z1, z2, m, &cfg)
    })
}

fn h_num_z(z1: f64, z2: f64, m: f64, cfg: &QuadratureConfig) -> f64 {
    let e = |a: u32, b: u32, z: f64| numeric::eval_h1(a, b, z, m, cfg).expect("H1");
    if z2.abs() < 1e-7 {
        // eta-contracted form: H(z, 0) = (4/m+2) H31 - (4(1-z1)/m) H32 - (8/m) H41
        return (4.0 / m + 2.0) * e(3, 1, z1) - 4.0 * (1.0 - z1) / m * e(3, 2, z1)
            - 8.0 / m * e(4, 1, z1);
    }
    if (z1 - z2).abs() < 1e-5 {
        let q = |a: u32, b: u32, c: u32| numeric::eval_h2(a, b, c, z1, z2, m, cfg).expect("H2");
        return (4.0 / m + 2.0) * q(2, 1, 1) - 4.0 * (1.0 - z1) / m * q(2, 2, 1) - 8.0 / m * q(3, 1, 1);
    }
    // divided-difference expansion of the reduced form, evaluated with the
    // fast one-variable oracle:
    // H111 = (g(z1)-g(z2))/(z1-z2), g(z) = z H_{2,1}(z)
    // H121 = (g'(z1) - H111)/(z1-z2), H112 = (H111 - g'(z2))/(z1-z2)
    let g = |z: f64| z * e(2, 1, z);
    let gp = |z: f64| e(2, 1, z) + z * 2.0 * e(2, 2, z) / 2.0; // g' = H21 + z H22
    let h111 = (g(z1) - g(z2)) / (z1 - z2);
    let h121 = (gp(z1) - h111) / (z1 - z2);
    let h112 = (h111 - gp(z2)) / (z1 - z2);
    // reduced coefficients: H_dk = -2(m+2)/(m z2) H111 - 4(z1-1)/(m z2) H121
    //                              - 8(z2-1)/(m z2) H112
    -2.0 * (m + 2.0) / (m * z2) * h111 - 4.0 * (z1 - 1.0) / (m * z2) * h121
        - 8.0 * (z2 - 1.0) / (m * z2) * h112
}

/// h-side kernels of Thm. CM-KDel-HDel:
/// KS(x) = (exp[0,x])^2 K(e^x), HS(x1,x2) = exp[0,x1+x2] Htilde(x1,x2).
pub fn ks_num(m: f64, cfg: QuadratureConfig) -> Fn1 {
    let k = k_num(m, cfg);
    ops::fn1(move |x| {
        let e0x = numeric::exp_divdiff(1.0, &[0.0, x]);
        e0x * e0x * k(x.exp())
    })
}

/// Htilde(x1,x2) = 2 K(e^{x1+x2}) exp[0,x1,x1+x2]
///               + H(e^{x1}, e^{x2}) exp[0,x1] exp[x1,x1+x2].
pub fn htilde_num(m: f64, cfg: QuadratureConfig) -> Fn2 {
    let k = k_num(m, cfg);
    let h = h_num(m, cfg);
    ops::fn2(move |x1, x2| {
        let dd3 = numeric::exp_divdiff(1.0, &[0.0, x1, x1 + x2]);
        let e01 = numeric::exp_divdiff(1.0, &[0.0, x1]);
        let e12 = numeric::exp_divdiff(1.0, &[x1, x1 + x2]);
        2.0 * k((x1 + x2).exp()) * dd3 + h(x1.exp(), x2.exp()) * e01 * e12
    })
}

pub fn hs_num(m: f64, cfg: QuadratureConfig) -> Fn2 {
    let ht = htilde_num(m, cfg);
    ops::fn2(move |x1, x2| numeric::exp_divdiff(1.0, &[0.0, x1 + x2]) * ht(x1, x2))
}

/// Ttilde(x; m) = -Ktilde(0) e^{(-m/2+1)z}[0,x] + Htilde(x, -x).
pub fn ttilde_num(m: f64, cfg: QuadratureConfig) -> Fn1 {
    let ht = htilde_num(m, cfg);
    ops::fn1(move |x| {
        let j = -m / 2.0 + 1.0;
        let kt0 = numeric::gamma(m / 2.0) * (4.0 - m) / 12.0;
        -kt0 * numeric::exp_divdiff(j, &[0.0, x]) + ht(x, -x)
    })
}

// ---------------------------------------------------------------------------
// Verification pipelines.
// ---------------------------------------------------------------------------

fn mode_tag(mode: &MMode) -> Mode {
    match mode {
        MMode::Symbolic => Mode::SymbolicM,
        MMode::Fixed(q) => Mode::FixedM { m: q.to_string() },
    }
}

fn assert_zero_both(
    ctx: &Ctx,
    relation: &str,
    e: &SpectralExpr,
    report: &mut VerificationReport,
) -> EngineResult<()> {
    let rewrite = hfamily::eliminate_initial_relations(ctx, e)?;
    let closed = hfamily::closed_form(ctx, e)?;
    let rz = rewrite.is_empty();
    let cz = closed.is_zero();
    if rz != cz {
        return Err(EngineError::BackendMismatch(format!(
            "{}: rewrite={} closed-form={}",
            relation, rz, cz
        )));
    }
    if rz {
        report
            .notes
            .push(format!("{}: exact zero on both backends", relation));
    } else {
        report.status = crate::report::Status::Failed;
        report.residual = crate::report::Residual::Exact {
            witness: format!("{:?}", rewrite),
        };
        report
            .notes
            .push(format!("{}: NONZERO residual {:?}", relation, rewrite));
    }
    Ok(())
}

/// The inner one-variable expression of Prop. varification-CM:
/// w(z) = m z H11 + 2 z^2 H12 - 2 z H12 - 2 H11.
fn inner_expression(ctx: &Ctx) -> SpectralExpr {
    let m = ctx.mode().m_expr();
    let z = RatExpr::var(Var::Z);
    let c11 = m.mul(&z).sub(&RatExpr::from_int(2));
    let c12 = RatExpr::from_int(2).mul(&z).mul(&z.sub(&RatExpr::one()));
    SpectralExpr::term(Atom::h1(1, 1), c11).add_term(Atom::h1(1, 2), c12)
}

/// verify-t-k: (1 + sigma_{-m/2-1})(T_{Delta_k}) - ((m-2)/2) K_{Delta_k}
/// reduces to exact zero; the intermediate residual is exhibited in the
/// form ((m-4)/12)(m H11 + 2z H12 - 2G). At fixed m = 2 the relation
/// becomes (1 + sigma_{-2})(T) = 0.
pub fn verify_t_vs_k(ctx: &Ctx) -> EngineResult<VerificationReport> {
    let start = Instant::now();
    let mut report = VerificationReport::exact_zero("verify-t-k", mode_tag(ctx.mode()), 0);
    let t = build_t(ctx)?;
    let k = build_k(ctx)?;
    let j = Weight::minus_half_m_plus(-1);
    let sigma_t = ops::sigma_one(ctx, &j, &t)?;
    let sum = hfamily::reduce_one_var(ctx, &t.add(&sigma_t))?;
    let m = ctx.mode().m_expr();
    let half = m.sub(&RatExpr::from_int(2)).mul(&RatExpr::from_ratio(1, 2));
    let resid = hfamily::reduce_one_var(ctx, &sum.sub(&k.scale(&half)))?;
    report.reduction_trace_len = resid.terms().len() + sum.terms().len();

    // Exhibit the intermediate form.
    let m4 = m.sub(&RatExpr::from_int(4)).mul(&RatExpr::from_ratio(1, 12));
    let target = SpectralExpr::term(Atom::h1(1, 1), m4.mul(&m))
        .add_term(
            Atom::h1(1, 2),
            m4.mul(&RatExpr::from_int(2)).mul(&RatExpr::var(Var::Z)),
        )
        .add_term(Atom::G { node: Node::Z }, m4.mul(&RatExpr::from_int(-2)));
    if resid == target {
        report.notes.push(
            "intermediate residual = ((m-4)/12)(m H[1,1] + 2z H[1,2] - 2G), as in the reduction proof"
                .into(),
        );
    } else if ctx.mode().is_fixed_two() {
        // At m = 2 the prefactor is (m-4)/12 = -1/6 and the displayed
        // paper form uses H02 in place of G; both agree modulo the
        // initial relations.
        let diff = resid.sub(&target);
        if hfamily::is_zero_both(ctx, &diff)? {
            report
                .notes
                .push("m=2 intermediate agrees with ((m-4)/12)-form modulo initial relations".into());
        } else {
            return Err(EngineError::BackendMismatch(
                "m=2 intermediate residual mismatch".into(),
            ));
        }
    } else {
        report.status = crate::report::Status::Failed;
        report
            .notes
            .push(format!("unexpected intermediate residual {:?}", resid));
    }

    assert_zero_both(ctx, "(1+sigma_{-m/2-1})(T) - ((m-2)/2) K", &resid, &mut report)?;

    // Sanity: the eta-assembled T agrees with the closed formula.
    let t2 = build_t_via_eta(ctx)?;
    let t_diff = hfamily::reduce_one_var(ctx, &t.sub(&t2))?;
    assert_zero_both(ctx, "T assembly (eta route)", &t_diff, &mut report)?;

    report.wall = start.elapsed();
    Ok(report)
}

/// Numeric spot check of verify-t-k at fixed m and z.
pub fn verify_t_vs_k_numeric(m: f64, z: f64, cfg: QuadratureConfig) -> f64 {
    let t = t_num(m, cfg);
    let k = k_num(m, cfg);
    let y = 1.0 - z;
    let j = -m / 2.0 - 1.0;
    let lhs = t(y) + y.powf(j) * t(1.0 / y);
    let rhs = (m - 2.0) / 2.0 * k(y);
    (lhs - rhs).abs()
}

/// verify-cm-k: the functional relation of Thm. CM-KDel-HDel. The engine
/// checks the equivalent two-term form
///     (1/2)(1 + sigma_{-m/2-2}^2)(H_{Delta_k}) = bsq+(K_{Delta_k})
/// exactly (sigma^2 = sigma^{-1}; note (1+sigma)(1+sigma-sigma^2) = 2 sigma,
/// so the first-power form displayed in the paper's "equivalent version"
/// differs from the theorem by one cyclic step), exhibits the inner
/// expression m z H11 + 2z^2 H12 - 2z H12 - 2 H11 as the constant
/// -2 Gamma(m/2) before divided differencing, and matches the displayed
/// reduced form of the paper's proof coefficient by coefficient.
pub fn verify_h_vs_k(ctx: &Ctx) -> EngineResult<VerificationReport> {
    let start = Instant::now();
    let mut report = VerificationReport::exact_zero("verify-cm-k", mode_tag(ctx.mode()), 0);
    let h = build_h(ctx)?;
    let k = build_k(ctx)?;
    let j = Weight::minus_half_m_plus(-2);
    let h_red = hfamily::reduce_two_var(ctx, &h)?;
    let s1 = ops::sigma_two(ctx, &j, &h_red)?;
    let s2 = ops::sigma_two(ctx, &j, &s1)?;
    let one_plus_s2 = h_red.add(&s2);
    report.reduction_trace_len = one_plus_s2.terms().len();

    // Exhibit 1: the displayed reduced form of the proof,
    // -2[(m+2)(z1+z2) H111 + 2(z2-1)(2z1+z2) H112 + 2(z1-1)(z1+2z2) H121]
    //   / (m z1 z2).
    let m = ctx.mode().m_expr();
    let z1 = RatExpr::var(Var::Z1);
    let z2 = RatExpr::var(Var::Z2);
    let denom = m.mul(&z1).mul(&z2);
    let c111 = RatExpr::from_int(-2)
        .mul(&m.add(&RatExpr::from_int(2)))
        .mul(&z1.add(&z2))
        .div(&denom)?;
    let c112 = RatExpr::from_int(-4)
        .mul(&z2.sub(&RatExpr::one()))
        .mul(&z1.mul(&RatExpr::from_int(2)).add(&z2))
        .div(&denom)?;
    let c121 = RatExpr::from_int(-4)
        .mul(&z1.sub(&RatExpr::one()))
        .mul(&z1.add(&z2.mul(&RatExpr::from_int(2))))
        .div(&denom)?;
    let display = SpectralExpr::term(Atom::h2(1, 1, 1), c111)
        .add_term(Atom::h2(1, 1, 2), c112)
        .add_term(Atom::h2(1, 2, 1), c121);
    if one_plus_s2 == display {
        report
            .notes
            .push("(1+sigma^2)(H) matches the displayed reduced form".into());
    } else {
        report.status = crate::report::Status::Failed;
        report
            .notes
            .push(format!("reduced (1+sigma^2)(H) = {:?}", one_plus_s2));
    }

    // Exhibit 2: the inner expression is constant before divided
    // differencing: w(z) = -2 Gamma(m/2).
    let w = inner_expression(ctx);
    let w_elim = hfamily::eliminate_initial_relations(ctx, &w)?;
    let minus_two_gamma = SpectralExpr::constant(
        ctx.mode().gamma_expr().mul(&RatExpr::from_int(-2)),
    );
    if w_elim == minus_two_gamma {
        report.notes.push(
            "inner expression m z H11 + 2z^2 H12 - 2z H12 - 2 H11 = -2 Gamma(m/2), constant in z"
                .into(),
        );
    } else {
        report.status = crate::report::Status::Failed;
        report
            .notes
            .push(format!("inner expression reduced to {:?}", w_elim));
    }

    // Exhibit 3 (pre-relation structure): (1/2)(1+sigma^2)(H) - bsq+(K)
    // equals -((z1+z2)/(2 z1 z2)) (w)[z1,z2] coefficient-wise over the
    // divided-difference atoms.
    let lhs_dd = hfamily::expand_to_divdiff(ctx, &one_plus_s2)?
        .scale(&RatExpr::from_ratio(1, 2));
    let k_red = hfamily::reduce_one_var(ctx, &k)?;
    let bsq_k = ops::sq_plus(ctx, &k_red)?;
    let diff = lhs_dd.sub(&bsq_k);
    let w_dd = divdiff::divided_difference(ctx, &w, &[Node::Z1, Node::Z2])?;
    let pre = z1
        .add(&z2)
        .div(&RatExpr::from_int(2).mul(&z1).mul(&z2))?
        .neg();
    let structure = w_dd.scale(&pre);
    if diff == structure {
        report.notes.push(
            "(1/2)(1+sigma^2)(H) - bsq+(K) = -((z1+z2)/(2 z1 z2)) w[z1,z2] before initial relations"
                .into(),
        );
    } else {
        report.status = crate::report::Status::Failed;
        report.notes.push("pre-relation structure mismatch".into());
    }

    // Final: exact zero through both backends.
    assert_zero_both(ctx, "(1/2)(1+sigma^2)(H) - bsq+(K)", &diff, &mut report)?;

    report.wall = start.elapsed();
    Ok(report)
}

/// Numeric check of the paper's three-term form
/// H = (1 + sigma_{-m/2-2} - sigma_{-m/2-2}^2) bsq+(K) at a sample point
/// (in y-coordinates).
pub fn verify_h_vs_k_numeric(m: f64, z1: f64, z2: f64, cfg: QuadratureConfig) -> f64 {
    let k = k_num(m, cfg);
    let h = h_num(m, cfg);
    let j = -m / 2.0 - 2.0;
    let b = ops::bsq_plus_num(&k);
    let s1 = ops::sigma2_num(j, &b);
    let s2 = ops::sigma2_num(j, &s1);
    let y1 = 1.0 - z1;
    let y2 = (1.0 - z2) / (1.0 - z1);
    let rhs = b(y1, y2) + s1(y1, y2) - s2(y1, y2);
    (h(y1, y2) - rhs).abs()
}

/// verify-ops (m = 2): the differentiated identity of
/// Prop. KDelk-TOPS-tobechecked,
///   T(z) + (1-z) z^{-1} (2 + z d/dz)(K(z) - eta(K)(1-z)^{-1}) = 0
/// reduces to exact zero, with the intermediate
/// ((z-1)H11 + (z-1)z H12 + 1)/(3z) exhibited modulo the initial
/// relations, and the boundary value at y = 1 equal to 1/6 on both sides.
pub fn verify_ops() -> EngineResult<VerificationReport> {
    let start = Instant::now();
    let ctx = Ctx::fixed(2);
    let mut report =
        VerificationReport::exact_zero("verify-ops", mode_tag(ctx.mode()), 0);
    let t = build_t(&ctx)?;
    let k = build_k(&ctx)?;
    let z = RatExpr::var(Var::Z);
    let one_minus_z = RatExpr::one().sub(&z);
    // eta(K) = K(1) = 1/6 at m = 2 (exact boundary check).
    let k_at_one = divdiff::eval_at_node(&ctx, &k, Node::Zero)?;
    let sixth = SpectralExpr::constant(RatExpr::from_ratio(1, 6));
    if k_at_one == sixth {
        report.notes.push("boundary: K(1;2) = eta(K) = 1/6 exactly".into());
    } else {
        report.status = crate::report::Status::Failed;
        report.notes.push(format!("K(1;2) = {:?}", k_at_one));
    }
    // inner = K - (1/6)(1-z)^{-1}
    let inner = k.add(&SpectralExpr::constant(
        RatExpr::from_ratio(1, 6).div(&one_minus_z)?.neg(),
    ));
    let d_inner = divdiff::derive(&ctx, &inner, Var::Z)?;
    let op = inner
        .scale(&RatExpr::from_int(2))
        .add(&d_inner.scale(&z));
    let e = t.add(&op.scale(&one_minus_z.div(&z)?));
    let reduced = hfamily::reduce_one_var(&ctx, &e)?;
    report.reduction_trace_len = reduced.terms().len();

    // Paper's displayed intermediate ((z-1)H11 + (z-1)z H12 + 1)/(3z);
    // the engine's honest pre-elimination residual differs by a combination
    // of the initial relations, so equality is checked modulo them.
    let three_z = RatExpr::from_int(3).mul(&z);
    let paper = SpectralExpr::term(Atom::h1(1, 1), z.sub(&RatExpr::one()).div(&three_z)?)
        .add_term(
            Atom::h1(1, 2),
            z.sub(&RatExpr::one()).mul(&z).div(&three_z)?,
        )
        .add_term(Atom::One, RatExpr::one().div(&three_z)?);
    let diff = reduced.sub(&paper);
    if hfamily::is_zero_both(&ctx, &diff)? {
        report.notes.push(
            "intermediate = ((z-1)H11 + (z-1)z H12 + 1)/(3z) modulo initial relations".into(),
        );
    } else {
        report.status = crate::report::Status::Failed;
        report.notes.push(format!("intermediate mismatch: {:?}", reduced));
    }

    assert_zero_both(&ctx, "D-of-KDelk-TOPS", &reduced, &mut report)?;
    report.wall = start.elapsed();
    Ok(report)
}

/// Numeric side of verify-ops: the OPS density via its raw s-integrals.
/// Returns (residual of Lemma 1+sigmaTOPS, residual of the integral form
/// against K, residual of the closed I-kernel, differentiated-identity
/// residual at z).
pub fn verify_ops_numeric(y: f64, z_spot: f64, cfg: QuadratureConfig) -> EngineResult<[f64; 4]> {
    let m = 2.0;
    let t = t_num(m, cfg);
    let k = k_num(m, cfg);
    let eta_k = 1.0 / 6.0;
    // T_OPS(y) = I(y) + II(y)
    let t_ops = |yy: f64| -> EngineResult<f64> {
        let ln_y = yy.ln();
        let i_term = {
            let dd_ln = ln_y / (yy - 1.0);
            let integrand = |s: f64| (yy.powf(-s) - 1.0) / (1.0 - yy);
            eta_k * dd_ln * numeric::integrate(&integrand, 0.0, 1.0, &cfg)?
        };
        let ii_term = {
            let integrand = |s: f64| {
                let dd = (yy.powf(s) - 1.0) / (yy - 1.0);
                dd * dd * t(yy.powf(s)) * ln_y
            };
            0.5 * numeric::integrate(&integrand, 0.0, 1.0, &cfg)?
        };
        Ok(i_term + ii_term)
    };
    // Lemma 1+sigmaTOPS: (1+sigma_{-2})(T_OPS)(y)
    //   = eta(K)/y + (y-1)^{-2} int_1^y (u-1)^2 T(u)/u du
    let lhs = t_ops(y)? + y.powf(-2.0) * t_ops(1.0 / y)?;
    let integral = numeric::integrate(&|u: f64| (u - 1.0).powi(2) * t(u) / u, 1.0, y, &cfg)?;
    let rhs = eta_k / y + integral / (y - 1.0).powi(2);
    let r1 = (lhs - rhs).abs();
    // Prop. KDelk-TOPS: the integral form equals K.
    let r2 = (rhs - k(y)).abs();
    // Lemma 1term: the I-kernel equals (-y + y ln y + 1)/((y-1)^2 y).
    let l_closed = (-y + y * y.ln() + 1.0) / ((y - 1.0).powi(2) * y);
    let dd_ln = y.ln() / (y - 1.0);
    let l_num = dd_ln * numeric::integrate(&|s: f64| (y.powf(-s) - 1.0) / (1.0 - y), 0.0, 1.0, &cfg)?;
    let r3 = (l_num - l_closed).abs();
    // Differentiated identity at a spot z.
    let zz = z_spot;
    let h = 1e-5;
    let kk = |z: f64| k(1.0 - z);
    let dk = (kk(zz + h) - kk(zz - h)) / (2.0 * h);
    let boundary = |z: f64| eta_k / (1.0 - z);
    let dbound = (boundary(zz + h) - boundary(zz - h)) / (2.0 * h);
    let e = t(1.0 - zz)
        + (1.0 - zz) / zz * (2.0 * (kk(zz) - boundary(zz)) + zz * (dk - dbound));
    let r4 = e.abs();
    Ok([r1, r2, r3, r4])
}

/// verify-gauss-bonnet (m = 2): K_EH = -(1+sigma_{-2})(T) = 0 exactly,
/// hence H_EH = (1+sigma_{-3}-sigma_{-3}^2) bsq+(K_EH) = 0 exactly by
/// linearity; numerically (1+tau_0)(Ttilde) = 0 on a grid.
pub fn verify_gauss_bonnet(grid: &[f64], tol: f64, cfg: QuadratureConfig) -> EngineResult<VerificationReport> {
    let start = Instant::now();
    let ctx = Ctx::fixed(2);
    let mut report =
        VerificationReport::exact_zero("verify-gauss-bonnet", mode_tag(ctx.mode()), 0);
    let t = build_t(&ctx)?;
    let j = Weight::minus_half_m_plus(-1); // -m/2-1 = -2 at m=2
    let k_eh = ops::variational_k(&ctx, &j, &t)?;
    assert_zero_both(&ctx, "K_EH = -(1+sigma_{-2})(T)", &k_eh, &mut report)?;
    report.notes.push(
        "H_EH = (1+sigma_{-3}-sigma_{-3}^2) bsq+(K_EH) = 0 exactly since K_EH = 0".into(),
    );
    // (m-2)/2 prefactor at m = 2 vanishes.
    report.notes.push("(m-2)/2 = 0 at m = 2".into());

    // Numeric oddness of Ttilde.
    let tt = ttilde_num(2.0, cfg);
    let mut max_err: f64 = 0.0;
    for &x in grid {
        let r = (tt(x) + tt(-x)).abs();
        max_err = max_err.max(r);
    }
    if max_err > tol {
        report.status = crate::report::Status::Failed;
    }
    report.notes.push(format!(
        "numeric (1+tau_0)(Ttilde) over {} grid points: max |residual| = {:.3e} (tol {:.1e})",
        grid.len(),
        max_err,
        tol
    ));
    report.wall = start.elapsed();
    Ok(report)
}

/// verify-cm-h: numeric h-side functional relation
/// |HS - (1 + tau_{-m/2+1} - tau^2_{-m/2+1}) tri+(KS)| over a grid,
/// for each m in `ms`. Also checks the auxiliary invariances
/// f_H = tau_3^2(f_H) and Q^II = tau^2_{-m/2+1}(Q^I).
pub fn verify_cm_h(
    ms: &[f64],
    grid: &[f64],
    tol: f64,
    cfg: QuadratureConfig,
) -> EngineResult<VerificationReport> {
    let start = Instant::now();
    let mut report = VerificationReport::numeric("verify-cm-h", Mode::Numeric, 0.0, tol);
    let mut max_err: f64 = 0.0;
    for &m in ms {
        let ks = ks_num(m, cfg);
        let hs = hs_num(m, cfg);
        let j = -m / 2.0 + 1.0;
        let rhs = ops::variational_h_tau_num(j, &ks);
        let mut m_err: f64 = 0.0;
        for &x1 in grid {
            for &x2 in grid {
                let r = (hs(x1, x2) - rhs(x1, x2)).abs();
                m_err = m_err.max(r);
            }
        }
        report
            .notes
            .push(format!("m = {}: max |HS - (1+tau-tau^2) tri+(KS)| = {:.3e}", m, m_err));
        max_err = max_err.max(m_err);
    }
    // Auxiliary invariances at a couple of points.
    let e0 = |x: f64| numeric::exp_divdiff(1.0, &[0.0, x]);
    let f_h = ops::fn2(move |x1: f64, x2: f64| {
        e0(x1) * numeric::exp_divdiff(1.0, &[x1, x1 + x2]) * e0(x1 + x2)
    });
    let t2_fh = ops::tau2(3.0, &ops::tau2(3.0, &f_h));
    let mut aux: f64 = 0.0;
    for &(u, v) in &[(0.4, -0.7), (0.9, 0.3), (-1.1, 0.6)] {
        aux = aux.max((f_h(u, v) - t2_fh(u, v)).abs());
    }
    report.notes.push(format!("f_H = tau_3^2(f_H): max residual {:.3e}", aux));
    max_err = max_err.max(aux);
    for &m in ms {
        let k = k_num(m, cfg);
        let kq = k.clone();
        let q1 = ops::fn2(move |u: f64, v: f64| {
            numeric::exp_divdiff(1.0, &[0.0, u, u + v])
                * numeric::exp_divdiff(1.0, &[0.0, u + v])
                * k((u + v).exp())
        });
        let q2 = ops::fn2(move |u: f64, v: f64| {
            numeric::exp_divdiff(1.0, &[0.0, u])
                * numeric::exp_divdiff(1.0, &[0.0, u, u + v])
                * kq(u.exp())
        });
        let t2_q1 = ops::tau2(-m / 2.0 + 1.0, &ops::tau2(-m / 2.0 + 1.0, &q1));
        let mut aux2: f64 = 0.0;
        for &(u, v) in &[(0.4, -0.7), (0.9, 0.3)] {
            aux2 = aux2.max((q2(u, v) - t2_q1(u, v)).abs());
        }
        report
            .notes
            .push(format!("m = {}: Q^II = tau^2(Q^I) max residual {:.3e}", m, aux2));
        max_err = max_err.max(aux2);
    }
    report.residual = crate::report::Residual::MaxAbsError { value: max_err, tolerance: tol };
    if max_err > tol {
        report.status = crate::report::Status::Failed;
    }
    report.wall = start.elapsed();
    Ok(report)
}

/// Gradient consistency: K_EH = variational_K(T, -m/2-1) equals
/// ((2-m)/2) K_{Delta_k} exactly (symbolic m), and the H-side transfers
/// through the scaled verify-cm-k pipeline.
pub fn gradient_consistency(ctx: &Ctx) -> EngineResult<bool> {
    let t = build_t(ctx)?;
    let k = build_k(ctx)?;
    let j = Weight::minus_half_m_plus(-1);
    let k_eh = ops::variational_k(ctx, &j, &t)?;
    let m = ctx.mode().m_expr();
    let scale = RatExpr::from_int(2)
        .sub(&m)
        .mul(&RatExpr::from_ratio(1, 2));
    let target = hfamily::reduce_one_var(ctx, &k.scale(&scale))?;
    let diff = k_eh.sub(&target);
    hfamily::is_zero_both(ctx, &diff)
}

// ---------------------------------------------------------------------------
// The OPS action density at m = 2.
// ---------------------------------------------------------------------------

/// The dimension-two OPS density T_OPS, carried through the paper's
/// simplified symmetrization: the raw s-integral representation is kept as
/// a numeric cross-check, the symmetrized integral-free pieces feed the
/// exact verification in `verify_ops`.
pub struct TOps {
    cfg: QuadratureConfig,
    t: Fn1,
}

impl TOps {
    pub fn new(cfg: QuadratureConfig) -> TOps {
        TOps { cfg, t: t_num(2.0, cfg) }
    }

    /// eta(K) = K(1) = 1/6.
    pub fn eta_k(&self) -> f64 {
        1.0 / 6.0
    }

    /// The closed I-part kernel L(y) = (-y + y ln y + 1)/((y-1)^2 y).
    pub fn i_kernel(&self, y: f64) -> f64 {
        (-y + y * y.ln() + 1.0) / ((y - 1.0).powi(2) * y)
    }

    /// Raw T_OPS(y) via the two s-integrals.
    pub fn raw(&self, y: f64) -> EngineResult<f64> {
        let ln_y = y.ln();
        let i_term = {
            let dd_ln = ln_y / (y - 1.0);
            let integrand = |s: f64| (y.powf(-s) - 1.0) / (1.0 - y);
            self.eta_k() * dd_ln * numeric::integrate(&integrand, 0.0, 1.0, &self.cfg)?
        };
        let t = self.t.clone();
        let integrand = |s: f64| {
            let dd = (y.powf(s) - 1.0) / (y - 1.0);
            dd * dd * t(y.powf(s)) * ln_y
        };
        let ii_term = 0.5 * numeric::integrate(&integrand, 0.0, 1.0, &self.cfg)?;
        Ok(i_term + ii_term)
    }

    /// The symmetrization (1 + sigma_{-2})(T_OPS)(y) in its integral-free
    /// boundary form eta(K)/y plus the u-integral.
    pub fn symmetrized(&self, y: f64) -> EngineResult<f64> {
        if (y - 1.0).abs() < 1e-9 {
            return Ok(self.eta_k());
        }
        let t = self.t.clone();
        let integral =
            numeric::integrate(&|u: f64| (u - 1.0).powi(2) * t(u) / u, 1.0, y, &self.cfg)?;
        Ok(self.eta_k() / y + integral / (y - 1.0).powi(2))
    }
}
