//! Divided-difference calculus on symbolic spectral expressions.
//!
//! Node lists come from the fixed set {0, z, z1, z2}; repeated nodes take
//! the confluent (derivative) meaning, resolved symbolically through the
//! derivation table of the atom basis, never by numeric limits.

use crate::error::{EngineError, EngineResult};
use crate::exact::{RatExpr, Var};
use crate::hfamily::Ctx;
use crate::spectral::{Atom, Node, SpectralExpr};

/// d/dvar on a spectral expression; linear and Leibniz over
/// coefficient * atom.
pub fn derive(ctx: &Ctx, e: &SpectralExpr, var: Var) -> EngineResult<SpectralExpr> {
    let mut out = SpectralExpr::zero();
    for (atom, c) in e.terms() {
        out = out.add(&SpectralExpr::term(atom.clone(), c.derivative(var)));
        let da = atom_derivative(ctx, atom, var)?;
        out = out.add(&da.scale(c));
    }
    Ok(out)
}

fn atom_derivative(ctx: &Ctx, atom: &Atom, var: Var) -> EngineResult<SpectralExpr> {
    let m = ctx.mode().m_expr();
    Ok(match atom {
        Atom::One => SpectralExpr::zero(),
        Atom::H1 { a, b, node } => {
            if node.var() != Some(var) {
                SpectralExpr::zero()
            } else {
                SpectralExpr::term(
                    Atom::H1 { a: *a, b: b + 1, node: *node },
                    RatExpr::from_int(*b as i64),
                )
            }
        }
        Atom::H2 { a, b, c } => match var {
            Var::Z1 => SpectralExpr::term(Atom::H2 { a: *a, b: b + 1, c: *c }, RatExpr::from_int(*b as i64)),
            Var::Z2 => SpectralExpr::term(Atom::H2 { a: *a, b: *b, c: c + 1 }, RatExpr::from_int(*c as i64)),
            _ => SpectralExpr::zero(),
        },
        Atom::H02 { node } => {
            if node.var() != Some(var) {
                SpectralExpr::zero()
            } else {
                // H02' = (m/2) (1-z)^{-1} H02
                let zn = node.expr();
                let coeff = m
                    .mul(&RatExpr::from_ratio(1, 2))
                    .div(&RatExpr::one().sub(&zn))?;
                SpectralExpr::term(Atom::H02 { node: *node }, coeff)
            }
        }
        Atom::G { node } => {
            if node.var() != Some(var) {
                SpectralExpr::zero()
            } else {
                // G' = m/(2(1-z)z) H02 - (1/z) G
                let zn = node.expr();
                let c1 = m.mul(&RatExpr::from_ratio(1, 2)).div(
                    &RatExpr::one().sub(&zn).mul(&zn),
                )?;
                let c2 = RatExpr::one().div(&zn)?.neg();
                SpectralExpr::term(Atom::H02 { node: *node }, c1)
                    .add_term(Atom::G { node: *node }, c2)
            }
        }
        Atom::Dd { body, nodes } => {
            let k = nodes.iter().filter(|n| n.var() == Some(var)).count();
            if k == 0 {
                SpectralExpr::zero()
            } else {
                let extra = nodes
                    .iter()
                    .copied()
                    .find(|n| n.var() == Some(var))
                    .expect("occurrence counted");
                let mut nodes2 = nodes.clone();
                nodes2.push(extra);
                SpectralExpr::term(
                    Atom::Dd { body: body.clone(), nodes: nodes2 },
                    RatExpr::from_int(k as i64),
                )
            }
        }
    })
}

/// Evaluate a one-variable expression (atoms at node z) at a node.
pub fn eval_at_node(ctx: &Ctx, e: &SpectralExpr, node: Node) -> EngineResult<SpectralExpr> {
    let mut out = SpectralExpr::zero();
    for (atom, c) in e.terms() {
        let c_at = match node {
            Node::Z => c.clone(),
            Node::Zero => c.subst_one(Var::Z, &RatExpr::zero())?,
            Node::Z1 => c.rename_var(Var::Z, Var::Z1),
            Node::Z2 => c.rename_var(Var::Z, Var::Z2),
        };
        let atom_at: SpectralExpr = match atom {
            Atom::One => SpectralExpr::atom(Atom::One),
            Atom::H1 { a, b, node: Node::Z } => {
                if node == Node::Zero {
                    SpectralExpr::constant(crate::hfamily::value_at_zero(ctx, *a, *b)?)
                } else {
                    SpectralExpr::atom(Atom::H1 { a: *a, b: *b, node })
                }
            }
            Atom::H02 { node: Node::Z } => {
                if node == Node::Zero {
                    SpectralExpr::constant(ctx.mode().gamma_expr())
                } else {
                    SpectralExpr::atom(Atom::H02 { node })
                }
            }
            Atom::G { node: Node::Z } => {
                if node == Node::Zero {
                    // G(0) = H02'(0) = (m/2) Gamma(m/2)
                    SpectralExpr::constant(
                        ctx.mode().gamma_expr().mul(&ctx.mode().m_expr()).mul(&RatExpr::from_ratio(1, 2)),
                    )
                } else {
                    SpectralExpr::atom(Atom::G { node })
                }
            }
            Atom::Dd { body, nodes } => {
                let nodes2: Vec<Node> = nodes.iter().map(|n| if *n == Node::Z { node } else { *n }).collect();
                divided_difference_nodes(ctx, body, &nodes2)?
            }
            other => {
                return Err(EngineError::UnsupportedAtom(format!(
                    "eval_at_node on non-canonical atom {}",
                    other.label()
                )))
            }
        };
        out = out.add(&atom_at.scale(&c_at));
    }
    Ok(out)
}

/// Divided difference of a one-variable body over the given nodes, expanded
/// into atoms evaluated at the nodes. Confluent repeats go through the
/// derivation table. Bodies whose atoms have no derivation rule are kept
/// opaque as a `Dd` atom.
pub fn divided_difference(ctx: &Ctx, body: &SpectralExpr, nodes: &[Node]) -> EngineResult<SpectralExpr> {
    if nodes.is_empty() {
        return Err(EngineError::Arity("divided difference needs at least one node".into()));
    }
    // Composition rule: a pure dd body with the default node z in its list
    // flattens into a single node list.
    if let Some(flat) = try_flatten(body, nodes) {
        return divided_difference_nodes(ctx, &flat.0, &flat.1);
    }
    divided_difference_nodes(ctx, body, nodes)
}

fn try_flatten(body: &SpectralExpr, outer: &[Node]) -> Option<(SpectralExpr, Vec<Node>)> {
    let terms = body.terms();
    if terms.len() != 1 {
        return None;
    }
    let (atom, c) = &terms[0];
    if !c.is_one() {
        return None;
    }
    if let Atom::Dd { body: inner, nodes } = atom {
        if nodes.iter().filter(|n| **n == Node::Z).count() == 1 {
            let mut flat: Vec<Node> = nodes.iter().copied().filter(|n| *n != Node::Z).collect();
            flat.extend_from_slice(outer);
            return Some(((**inner).clone(), flat));
        }
    }
    None
}

fn divided_difference_nodes(ctx: &Ctx, body: &SpectralExpr, nodes: &[Node]) -> EngineResult<SpectralExpr> {
    let mut sorted = nodes.to_vec();
    sorted.sort();
    dd_rec(ctx, body, &sorted)
}

fn dd_rec(ctx: &Ctx, body: &SpectralExpr, nodes: &[Node]) -> EngineResult<SpectralExpr> {
    let n = nodes.len();
    if n == 1 {
        return eval_at_node(ctx, body, nodes[0]);
    }
    if nodes[0] == nodes[n - 1] {
        // all nodes equal: f[x,...,x] = f^{(n-1)}(x)/(n-1)!
        let mut d = body.clone();
        let mut fact = 1i64;
        for k in 1..n {
            d = derive(ctx, &d, Var::Z)?;
            fact *= k as i64;
        }
        let v = eval_at_node(ctx, &d, nodes[0])?;
        return Ok(v.scale(&RatExpr::from_ratio(1, fact)));
    }
    let hi = dd_rec(ctx, body, &nodes[..n - 1])?;
    let lo = dd_rec(ctx, body, &nodes[1..])?;
    let denom = nodes[0].expr().sub(&nodes[n - 1].expr());
    let inv = RatExpr::one().div(&denom)?;
    Ok(hi.sub(&lo).scale(&inv))
}

/// Binary Leibniz split f(x0) g[x0,x1] + f[x0,x1] g(x1); the first operand
/// must be a plain rational function of z (coefficient times the unit atom).
pub fn leibniz_split(
    ctx: &Ctx,
    f: &SpectralExpr,
    g: &SpectralExpr,
    nodes: &[Node; 2],
) -> EngineResult<SpectralExpr> {
    let f_rational = f.terms().iter().all(|(a, _)| matches!(a, Atom::One));
    if !f_rational {
        return Err(EngineError::UnsupportedAtom(
            "leibniz_split needs a rational first operand".into(),
        ));
    }
    let f_at_0 = eval_at_node(ctx, f, nodes[0])?;
    let f_dd = divided_difference(ctx, f, nodes)?;
    let g_dd = divided_difference(ctx, g, nodes)?;
    let g_at_1 = eval_at_node(ctx, g, nodes[1])?;
    let c0 = f_at_0.coeff_of(&Atom::One);
    let c1 = f_dd.coeff_of(&Atom::One);
    Ok(g_dd.scale(&c0).add(&g_at_1.scale(&c1)))
}
