//! Transformation operators of the variational calculus acting on spectral
//! expressions: the contractions eta/iota, the cyclic operators sigma_j and
//! tau_j, the difference-raising operators (square and triangle families),
//! the variational constructors and the internal-relation checks.
//!
//! k-side operators are symbolic-first: they close over the H-family in
//! z-coordinates (z = 1-y, z1 = 1-y1, z2 = 1-y1y2). h-side operators are
//! numeric-first: exponential atoms are not closed under the rational
//! normal form, so tau and the triangle operators act on closures.

use crate::divdiff;
use crate::error::{EngineError, EngineResult};
use crate::exact::{MMode, RatExpr, Var, Weight, NVARS};
use crate::hfamily::{self, Ctx};
use crate::spectral::{Atom, Node, SpectralExpr};
use std::sync::Arc;

/// Number of spectral-function arguments an expression is used with.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arity {
    One,
    Two,
}

// ---------------------------------------------------------------------------
// sigma_j on symbolic expressions (k-side).
// ---------------------------------------------------------------------------

/// The Moebius substitution of sigma on one-variable coefficients:
/// z -> z/(z-1).
fn sigma_subst_one(c: &RatExpr) -> EngineResult<RatExpr> {
    let z = RatExpr::var(Var::Z);
    let by = z.div(&z.sub(&RatExpr::one()))?;
    Ok(c.subst_one(Var::Z, &by)?)
}

/// The simultaneous substitution of sigma on two-variable coefficients:
/// z1 -> z2/(z2-1), z2 -> (z2-z1)/(z2-1).
fn sigma_subst_two(c: &RatExpr) -> EngineResult<RatExpr> {
    let z1 = RatExpr::var(Var::Z1);
    let z2 = RatExpr::var(Var::Z2);
    let d = z2.sub(&RatExpr::one());
    let b1 = z2.div(&d)?;
    let b2 = z2.sub(&z1).div(&d)?;
    let mut bindings: [Option<&RatExpr>; NVARS] = [None; NVARS];
    bindings[Var::Z1 as usize] = Some(&b1);
    bindings[Var::Z2 as usize] = Some(&b2);
    Ok(c.substitute(&bindings)?)
}

/// Exponent legality: j + shift + q_extra*(m/2) must be a plain integer in
/// the current mode.
fn legal_exponent(mode: &MMode, j: &Weight, shift: i64, q_extra: i64) -> EngineResult<i64> {
    let w = Weight {
        p: &j.p + num_rational::BigRational::from_integer(shift.into()),
        q: &j.q + num_rational::BigRational::from_integer(q_extra.into()),
    };
    w.as_integer(mode).ok_or_else(|| {
        EngineError::IllegalWeight(format!(
            "exponent {:?}+{}+{}(m/2) is not an integer in mode {:?}",
            j, shift, q_extra, mode
        ))
    })
}

/// sigma_j on a one-variable expression in z-coordinates:
/// sigma_j(f)(y) = y^j f(1/y); on atoms
/// sigma_j(H_{a,b}) = (1-z)^{j+a+b+m/2-2} H_{b,a}, G is carried with
/// exponent j+m/2+1 (so sigma_{-m/2-1}(G) = G), H02 maps to
/// Gamma(m/2) (1-z)^{j+m/2}. The result is re-reduced to the atom basis.
pub fn sigma_one(ctx: &Ctx, j: &Weight, e: &SpectralExpr) -> EngineResult<SpectralExpr> {
    let mode = ctx.mode();
    let mut out = SpectralExpr::zero();
    for (atom, coeff) in e.terms() {
        let cs = sigma_subst_one(coeff)?;
        let term = match atom {
            Atom::One => {
                let k = legal_exponent(mode, j, 0, 0)?;
                SpectralExpr::term(Atom::One, crate::exact::one_minus_pow(Var::Z, k))
            }
            Atom::H1 { a, b, node: Node::Z } => {
                let k = legal_exponent(mode, j, (*a + *b) as i64 - 2, 1)?;
                SpectralExpr::term(
                    Atom::H1 { a: *b, b: *a, node: Node::Z },
                    crate::exact::one_minus_pow(Var::Z, k),
                )
            }
            Atom::H02 { node: Node::Z } => {
                let k = legal_exponent(mode, j, 0, 1)?;
                SpectralExpr::term(
                    Atom::One,
                    mode.gamma_expr().mul(&crate::exact::one_minus_pow(Var::Z, k)),
                )
            }
            Atom::G { node: Node::Z } => {
                let k = legal_exponent(mode, j, 1, 1)?;
                SpectralExpr::term(Atom::G { node: Node::Z }, crate::exact::one_minus_pow(Var::Z, k))
            }
            other => {
                return Err(EngineError::UnsupportedAtom(format!(
                    "sigma on {}",
                    other.label()
                )))
            }
        };
        out = out.add(&term.scale(&cs));
    }
    hfamily::reduce_one_var(ctx, &out)
}

/// sigma_j on a two-variable expression over H_{a,b,c} atoms:
/// sigma_j(f)(y1,y2) = (y1 y2)^j f((y1 y2)^{-1}, y1); on atoms
/// sigma_j(H_{a,b,c}) = (1-z2)^{j+a+b+c+m/2-2} H_{b,c,a}.
pub fn sigma_two(ctx: &Ctx, j: &Weight, e: &SpectralExpr) -> EngineResult<SpectralExpr> {
    let mode = ctx.mode();
    let mut out = SpectralExpr::zero();
    for (atom, coeff) in e.terms() {
        let cs = sigma_subst_two(coeff)?;
        let term = match atom {
            Atom::One => {
                let k = legal_exponent(mode, j, 0, 0)?;
                SpectralExpr::term(Atom::One, crate::exact::one_minus_pow(Var::Z2, k))
            }
            Atom::H2 { a, b, c } => {
                let k = legal_exponent(mode, j, (*a + *b + *c) as i64 - 2, 1)?;
                SpectralExpr::term(
                    Atom::H2 { a: *b, b: *c, c: *a },
                    crate::exact::one_minus_pow(Var::Z2, k),
                )
            }
            other => {
                return Err(EngineError::UnsupportedAtom(format!(
                    "two-variable sigma on {}",
                    other.label()
                )))
            }
        };
        out = out.add(&term.scale(&cs));
    }
    hfamily::reduce_two_var(ctx, &out)
}

/// sigma_j on a plain rational function of one variable (stored in z).
pub fn sigma_one_rat(mode: &MMode, j: &Weight, f: &RatExpr) -> EngineResult<RatExpr> {
    let k = legal_exponent(mode, j, 0, 0)?;
    let s = sigma_subst_one(f)?;
    Ok(crate::exact::one_minus_pow(Var::Z, k).mul(&s))
}

/// sigma_j on a plain rational function of two variables (in z1, z2).
pub fn sigma_two_rat(mode: &MMode, j: &Weight, f: &RatExpr) -> EngineResult<RatExpr> {
    let k = legal_exponent(mode, j, 0, 0)?;
    let s = sigma_subst_two(f)?;
    Ok(crate::exact::one_minus_pow(Var::Z2, k).mul(&s))
}

// ---------------------------------------------------------------------------
// Contractions.
// ---------------------------------------------------------------------------

/// eta: two-variable -> one-variable, the substitution y2 = 1/y1,
/// i.e. z2 -> 0 and z1 -> z; on atoms H_{a,b,c}(z,0) = H_{a+c,b}(z).
/// One-variable input contracts to the value at y = 1 (z = 0).
pub fn eta(ctx: &Ctx, e: &SpectralExpr, arity: Arity) -> EngineResult<SpectralExpr> {
    match arity {
        Arity::Two => {
            let mut out = SpectralExpr::zero();
            for (atom, coeff) in e.terms() {
                // z2 -> 0 first, then rename z1 -> z.
                let c0 = coeff
                    .subst_one(Var::Z2, &RatExpr::zero())
                    .map_err(|e| EngineError::PoleAtContraction(e.to_string()))?;
                let c = c0.rename_var(Var::Z1, Var::Z);
                let term = match atom {
                    Atom::One => SpectralExpr::term(Atom::One, RatExpr::one()),
                    Atom::H2 { a, b, c: cc } => {
                        SpectralExpr::atom(Atom::H1 { a: a + cc, b: *b, node: Node::Z })
                    }
                    Atom::H1 { a, b, node } => match node {
                        Node::Z1 => SpectralExpr::atom(Atom::H1 { a: *a, b: *b, node: Node::Z }),
                        Node::Z2 => {
                            SpectralExpr::constant(hfamily::value_at_zero(ctx, *a, *b)?)
                        }
                        _ => {
                            return Err(EngineError::UnsupportedAtom(
                                "eta on one-variable atom at node z".into(),
                            ))
                        }
                    },
                    Atom::H02 { node } => match node {
                        Node::Z1 => SpectralExpr::atom(Atom::H02 { node: Node::Z }),
                        Node::Z2 => SpectralExpr::constant(ctx.mode().gamma_expr()),
                        _ => return Err(EngineError::UnsupportedAtom("eta on H02(z)".into())),
                    },
                    Atom::G { node } => match node {
                        Node::Z1 => SpectralExpr::atom(Atom::G { node: Node::Z }),
                        Node::Z2 => SpectralExpr::constant(
                            ctx.mode()
                                .gamma_expr()
                                .mul(&ctx.mode().m_expr())
                                .mul(&RatExpr::from_ratio(1, 2)),
                        ),
                        _ => return Err(EngineError::UnsupportedAtom("eta on G(z)".into())),
                    },
                    other => {
                        return Err(EngineError::UnsupportedAtom(format!(
                            "eta on {}",
                            other.label()
                        )))
                    }
                };
                out = out.add(&term.scale(&c));
            }
            Ok(out)
        }
        Arity::One => divdiff::eval_at_node(ctx, e, Node::Zero),
    }
}

// ---------------------------------------------------------------------------
// Square (difference-raising) operators in z-coordinates.
// ---------------------------------------------------------------------------

/// bsq+ : one-variable -> two-variable, f[y1, y1 y2] = -f[z1, z2].
pub fn sq_plus(ctx: &Ctx, e: &SpectralExpr) -> EngineResult<SpectralExpr> {
    let dd = divdiff::divided_difference(ctx, e, &[Node::Z1, Node::Z2])?;
    Ok(dd.neg())
}

/// bsq+ on a plain rational function of z.
pub fn sq_plus_rat(f: &RatExpr) -> EngineResult<RatExpr> {
    let f1 = f.rename_var(Var::Z, Var::Z1);
    let f2 = f.rename_var(Var::Z, Var::Z2);
    let d = RatExpr::var(Var::Z1).sub(&RatExpr::var(Var::Z2));
    Ok(f1.sub(&f2).div(&d)?.neg())
}

/// bsq- on a plain rational function: y2 (f[y2, y1 y2]); the node y2
/// corresponds to w = (z2-z1)/(1-z1).
pub fn sq_minus_rat(f: &RatExpr) -> EngineResult<RatExpr> {
    let z1 = RatExpr::var(Var::Z1);
    let z2 = RatExpr::var(Var::Z2);
    let w = z2.sub(&z1).div(&RatExpr::one().sub(&z1))?;
    let f_w = f.subst_one(Var::Z, &w)?;
    let f_2 = f.rename_var(Var::Z, Var::Z2);
    // bsq-(f) = (f(y1y2) - f(y2))/(y1 - 1) = (f_z(z2) - f_z(w))/(-z1)
    Ok(f_2.sub(&f_w).div(&z1.neg())?)
}

/// bsq+_{0,j} on a plain rational function: f(y2) z^j[1,y1]
/// = f_z(w) ((1-z1)^j - 1)/(-z1); needs integer j.
pub fn sq_zero_rat(mode: &MMode, j: &Weight, f: &RatExpr) -> EngineResult<RatExpr> {
    let k = legal_exponent(mode, j, 0, 0)?;
    let z1 = RatExpr::var(Var::Z1);
    let z2 = RatExpr::var(Var::Z2);
    let w = z2.sub(&z1).div(&RatExpr::one().sub(&z1))?;
    let f_w = f.subst_one(Var::Z, &w)?;
    let pow = crate::exact::one_minus_pow(Var::Z1, k);
    Ok(f_w.mul(&pow.sub(&RatExpr::one()).div(&z1.neg())?))
}

/// Internal relation Eq. (bsq-to-tau) on rational test functions:
/// (bsq+_{0,j} - bsq-)(f) - (sigma_{j-1} . bsq+ . sigma_j)(f); the result
/// is exactly zero for every f.
pub fn internal_relation_residual_rat(
    mode: &MMode,
    j: &Weight,
    f: &RatExpr,
) -> EngineResult<RatExpr> {
    let lhs = sq_zero_rat(mode, j, f)?.sub(&sq_minus_rat(f)?);
    let sj = sigma_one_rat(mode, j, f)?;
    let b = sq_plus_rat(&sj)?;
    let jm1 = j.shift_p(-1);
    let rhs = sigma_two_rat(mode, &jm1, &b)?;
    Ok(lhs.sub(&rhs))
}

// ---------------------------------------------------------------------------
// Numeric closures (h-side and generic numeric paths).
// ---------------------------------------------------------------------------

pub type Fn1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type Fn2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

pub fn fn1(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Fn1 {
    Arc::new(f)
}

pub fn fn2(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Fn2 {
    Arc::new(f)
}

/// tau_j(f)(x) = e^{jx} f(-x).
pub fn tau1(j: f64, f: &Fn1) -> Fn1 {
    let f = f.clone();
    fn1(move |x| (j * x).exp() * f(-x))
}

/// tau_j(F)(x1,x2) = e^{j(x1+x2)} F(-x1-x2, x1).
pub fn tau2(j: f64, f: &Fn2) -> Fn2 {
    let f = f.clone();
    fn2(move |x1, x2| (j * (x1 + x2)).exp() * f(-x1 - x2, x1))
}

/// sigma_j(f)(y) = y^j f(1/y) on closures.
pub fn sigma1_num(j: f64, f: &Fn1) -> Fn1 {
    let f = f.clone();
    fn1(move |y| y.powf(j) * f(1.0 / y))
}

/// sigma_j(F)(y1,y2) = (y1 y2)^j F(1/(y1 y2), y1) on closures.
pub fn sigma2_num(j: f64, f: &Fn2) -> Fn2 {
    let f = f.clone();
    fn2(move |y1, y2| (y1 * y2).powf(j) * f(1.0 / (y1 * y2), y1))
}

/// Stable two-node divided difference of a closure, switching to a
/// five-point derivative stencil when the nodes collide.
pub fn dd2_num(f: &Fn1, u: f64, v: f64) -> f64 {
    let scale = u.abs().max(v.abs()).max(1.0);
    if (u - v).abs() > 1e-6 * scale {
        (f(u) - f(v)) / (u - v)
    } else {
        let x = 0.5 * (u + v);
        let h = 1e-3 * scale.max(1e-3);
        (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
    }
}

/// tri+(f)(x1,x2) = f[x1, x1+x2].
pub fn tri_plus(f: &Fn1) -> Fn2 {
    let f = f.clone();
    fn2(move |x1, x2| dd2_num(&f, x1, x1 + x2))
}

/// tri-(f)(x1,x2) = f[x2, x1+x2].
pub fn tri_minus(f: &Fn1) -> Fn2 {
    let f = f.clone();
    fn2(move |x1, x2| dd2_num(&f, x2, x1 + x2))
}

/// tri+_{0,j}(f)(x1,x2) = e^{jz}[0,x1] f(x2).
pub fn tri_zero(j: f64, f: &Fn1) -> Fn2 {
    let f = f.clone();
    fn2(move |x1, x2| crate::numeric::exp_divdiff(j, &[0.0, x1]) * f(x2))
}

/// Multiplicative siblings on closures in y-coordinates.
pub fn bsq_plus_num(f: &Fn1) -> Fn2 {
    let f = f.clone();
    fn2(move |y1, y2| dd2_num(&f, y1, y1 * y2))
}

pub fn bsq_minus_num(f: &Fn1) -> Fn2 {
    let f = f.clone();
    fn2(move |y1, y2| y2 * dd2_num(&f, y2, y1 * y2))
}

pub fn bsq_zero_num(j: f64, f: &Fn1) -> Fn2 {
    let f = f.clone();
    fn2(move |y1, y2| f(y2) * crate::numeric::pow_divdiff(j, 1.0, y1))
}

// ---------------------------------------------------------------------------
// Variational constructors.
// ---------------------------------------------------------------------------

/// k-side variational one-variable function: K_f = -(1 + sigma_j)(f).
pub fn variational_k(ctx: &Ctx, j: &Weight, f: &SpectralExpr) -> EngineResult<SpectralExpr> {
    let s = sigma_one(ctx, j, f)?;
    Ok(f.add(&s).neg())
}

/// h-side variational K on closures: K_f = -(1 + tau_j)(f).
pub fn variational_k_num(j: f64, f: &Fn1) -> Fn1 {
    let t = tau1(j, f);
    let f = f.clone();
    fn1(move |x| -(f(x) + t(x)))
}

/// k-side variational two-variable function on closures (in y):
/// H = (1 + sigma_{j-1} - sigma_{j-1}^2) bsq+(K).
pub fn variational_h_num(j: f64, k_fn: &Fn1) -> Fn2 {
    let b = bsq_plus_num(k_fn);
    let s1 = sigma2_num(j - 1.0, &b);
    let s2 = sigma2_num(j - 1.0, &s1);
    fn2(move |y1, y2| b(y1, y2) + s1(y1, y2) - s2(y1, y2))
}

/// h-side variational two-variable function on closures (in x):
/// H = (1 + tau_j - tau_j^2) tri+(K).
pub fn variational_h_tau_num(j: f64, k_fn: &Fn1) -> Fn2 {
    let b = tri_plus(k_fn);
    let t1 = tau2(j, &b);
    let t2 = tau2(j, &t1);
    fn2(move |x1, x2| b(x1, x2) + t1(x1, x2) - t2(x1, x2))
}

/// iota on closures: n=2 restricts to the hyperplane x2 = -x1; n=1 is the
/// value at 0.
pub fn iota2_num(f: &Fn2) -> Fn1 {
    let f = f.clone();
    fn1(move |x| f(x, -x))
}

pub fn iota1_num(f: &Fn1) -> f64 {
    f(0.0)
}

/// eta on closures: n=2 restricts to y2 = 1/y1; n=1 is the value at 1.
pub fn eta2_num(f: &Fn2) -> Fn1 {
    let f = f.clone();
    fn1(move |y| f(y, 1.0 / y))
}

// ---------------------------------------------------------------------------
// Operator-law suite (exact + numeric), exposed for the CLI.
// ---------------------------------------------------------------------------

/// Run the operator-law checks: Leibniz, composition and confluent
/// divided-difference rules, sigma/tau cyclic orders, and the internal
/// relations on rational test functions and numeric closures.
pub fn operator_law_suite() -> EngineResult<crate::report::VerificationReport> {
    use crate::report::{Mode, Residual, Status, VerificationReport};
    let start = std::time::Instant::now();
    let ctx = Ctx::symbolic();
    let mut report = VerificationReport::exact_zero("verify-operators", Mode::SymbolicM, 0);
    let p = |s: &str| crate::exact::parse_expr(s).expect("test expression");

    // Leibniz split against the direct product difference.
    let f = SpectralExpr::constant(p("z"));
    let g = SpectralExpr::atom(Atom::h1(2, 1));
    let split = divdiff::leibniz_split(&ctx, &f, &g, &[Node::Z1, Node::Z2])?;
    let direct = divdiff::divided_difference(
        &ctx,
        &SpectralExpr::term(Atom::h1(2, 1), p("z")),
        &[Node::Z1, Node::Z2],
    )?;
    let mut exact_ok = split == direct;
    report.notes.push(format!("Leibniz rule: {}", if exact_ok { "exact" } else { "FAILED" }));

    // Composition rule.
    let body = SpectralExpr::constant(p("z^6-2*z^4+z"));
    let nested = SpectralExpr::atom(Atom::Dd { body: Box::new(body.clone()), nodes: vec![Node::Zero, Node::Z] });
    let lhs = divdiff::divided_difference(&ctx, &nested, &[Node::Z1, Node::Z2])?;
    let rhs = divdiff::divided_difference(&ctx, &body, &[Node::Zero, Node::Z1, Node::Z2])?;
    let comp_ok = lhs == rhs;
    exact_ok &= comp_ok;
    report.notes.push(format!("composition rule: {}", if comp_ok { "exact" } else { "FAILED" }));

    // Confluent rule.
    let conf = divdiff::divided_difference(&ctx, &SpectralExpr::atom(Atom::h1(1, 1)), &[Node::Z1, Node::Z1])?;
    let conf_ok = conf == SpectralExpr::atom(Atom::H1 { a: 1, b: 2, node: Node::Z1 });
    exact_ok &= conf_ok;
    report.notes.push(format!("confluent rule: {}", if conf_ok { "exact" } else { "FAILED" }));

    // sigma orders.
    let j = Weight::minus_half_m_plus(-1);
    let e = hfamily::reduce_one_var(&ctx, &SpectralExpr::atom(Atom::h1(2, 1)))?;
    let s2 = sigma_one(&ctx, &j, &sigma_one(&ctx, &j, &e)?)?;
    let o2 = hfamily::is_zero_both(&ctx, &s2.sub(&e))?;
    let j2 = Weight::minus_half_m_plus(-2);
    let e2 = hfamily::reduce_two_var(&ctx, &SpectralExpr::atom(Atom::h2(2, 1, 1)))?;
    let s3 = sigma_two(&ctx, &j2, &sigma_two(&ctx, &j2, &sigma_two(&ctx, &j2, &e2)?)?)?;
    let o3 = s3 == e2;
    exact_ok &= o2 && o3;
    report.notes.push(format!(
        "sigma_j^2 = id (one variable): {}; sigma_j^3 = id (two variables): {}",
        if o2 { "exact" } else { "FAILED" },
        if o3 { "exact" } else { "FAILED" }
    ));

    // internal relations on a corpus of rational functions, exact.
    let corpus = [
        "(1-z)^2", "(1)/(2-z)", "z^3-4*z", "(3-z)/(5+z)", "(1-z)^3",
        "(z^2)/(1-z)", "(2*z-1)/(z^2+3)", "(1)/((2-z)*(3-z))", "z", "z^4",
    ];
    let mut internal_ok = true;
    for jj in -3i64..=3 {
        let j = Weight::from_ints(jj, 0);
        for src in corpus {
            internal_ok &= internal_relation_residual_rat(ctx.mode(), &j, &p(src))?.is_zero();
        }
    }
    exact_ok &= internal_ok;
    report.notes.push(format!(
        "internal relations (bsq-to-tau) on {} rational functions x 7 weights: {}",
        corpus.len(),
        if internal_ok { "exact" } else { "FAILED" }
    ));

    // numeric closures: tau orders, btri-to-tau, invariances.
    let mut worst: f64 = 0.0;
    let closures: Vec<Fn1> = vec![
        fn1(|x: f64| (0.3 * x).exp() / (1.5 + x.sin())),
        fn1(|x: f64| x.cos() + 0.2 * x),
        fn1(|x: f64| 1.0 / (2.0 + x * x)),
        fn1(|x: f64| (0.5 * x).sinh() + 1.0),
    ];
    for (i, f) in closures.iter().enumerate() {
        let j = 0.3 + 0.4 * i as f64;
        let t2 = tau1(j, &tau1(j, f));
        for x in [0.5, -1.1, 2.0] {
            worst = worst.max((t2(x) - f(x)).abs());
        }
        let lhs1 = tri_zero(j, f);
        let lhs2 = tri_minus(f);
        let rhs = tau2(j, &tri_plus(&tau1(j, f)));
        for (u, v) in [(0.3, 0.9), (1.1, -0.4), (-0.6, -0.2)] {
            worst = worst.max((lhs1(u, v) - lhs2(u, v) - rhs(u, v)).abs());
        }
        let f2 = {
            let f = f.clone();
            fn2(move |x1: f64, x2: f64| f(x1) * (0.7 * x2).cos())
        };
        let t3 = tau2(j, &tau2(j, &tau2(j, &f2)));
        for (u, v) in [(0.4, -0.8), (1.3, 0.2)] {
            worst = worst.max((t3(u, v) - f2(u, v)).abs());
        }
    }
    report.notes.push(format!("numeric closures: max residual {:.3e}", worst));
    let tol = 1e-10;
    if !exact_ok || worst > tol {
        report.status = Status::Failed;
        report.residual = Residual::MaxAbsError { value: worst, tolerance: tol };
    }
    report.wall = start.elapsed();
    Ok(report)
}
