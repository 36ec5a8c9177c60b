//! Formal spectral expressions: finite sums of rational-function
//! coefficients times symbolic atoms from the hypergeometric family.
//!
//! One-variable atoms carry the node they are evaluated at (z, z1 or z2),
//! which is how two-variable divided-difference expansions are represented.

use crate::exact::{RatExpr, Var};
use std::fmt;

/// Evaluation node for one-variable atoms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Zero,
    Z,
    Z1,
    Z2,
}

impl Node {
    pub fn var(self) -> Option<Var> {
        match self {
            Node::Zero => None,
            Node::Z => Some(Var::Z),
            Node::Z1 => Some(Var::Z1),
            Node::Z2 => Some(Var::Z2),
        }
    }

    pub fn expr(self) -> RatExpr {
        match self.var() {
            Some(v) => RatExpr::var(v),
            None => RatExpr::zero(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Node::Zero => "0",
            Node::Z => "z",
            Node::Z1 => "z1",
            Node::Z2 => "z2",
        }
    }
}

/// Ordered node list of a divided difference; repeats encode confluent
/// (derivative) limits.
pub type NodeList = Vec<Node>;

/// Symbolic atom. `H1`/`H02`/`G` are one-variable kernels evaluated at a
/// node; `H2` is the two-variable kernel at (z1, z2); `Dd` is an opaque
/// divided-difference wrapper kept for bodies outside the expandable span.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    One,
    H1 { a: u32, b: u32, node: Node },
    H2 { a: u32, b: u32, c: u32 },
    H02 { node: Node },
    G { node: Node },
    Dd { body: Box<SpectralExpr>, nodes: NodeList },
}

impl Atom {
    pub fn h1(a: u32, b: u32) -> Atom {
        Atom::H1 { a, b, node: Node::Z }
    }

    pub fn h2(a: u32, b: u32, c: u32) -> Atom {
        Atom::H2 { a, b, c }
    }

    pub fn label(&self) -> String {
        match self {
            Atom::One => "1".into(),
            Atom::H1 { a, b, node } => format!("H[{},{}]({})", a, b, node.name()),
            Atom::H2 { a, b, c } => format!("H[{},{},{}](z1,z2)", a, b, c),
            Atom::H02 { node } => format!("H[0,2]({})", node.name()),
            Atom::G { node } => format!("G({})", node.name()),
            Atom::Dd { nodes, .. } => {
                let ns: Vec<&str> = nodes.iter().map(|n| n.name()).collect();
                format!("dd[{}]", ns.join(","))
            }
        }
    }
}

/// Normalized formal sum of coefficient * atom, sorted by atom.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SpectralExpr {
    terms: Vec<(Atom, RatExpr)>,
}

impl SpectralExpr {
    pub fn zero() -> SpectralExpr {
        SpectralExpr { terms: Vec::new() }
    }

    pub fn term(atom: Atom, coeff: RatExpr) -> SpectralExpr {
        if coeff.is_zero() {
            return SpectralExpr::zero();
        }
        SpectralExpr { terms: vec![(atom, coeff)] }
    }

    pub fn atom(atom: Atom) -> SpectralExpr {
        SpectralExpr::term(atom, RatExpr::one())
    }

    pub fn constant(c: RatExpr) -> SpectralExpr {
        SpectralExpr::term(Atom::One, c)
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(Atom, RatExpr)] {
        &self.terms
    }

    pub fn coeff_of(&self, atom: &Atom) -> RatExpr {
        self.terms
            .iter()
            .find(|(a, _)| a == atom)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(RatExpr::zero)
    }

    pub fn add(&self, other: &SpectralExpr) -> SpectralExpr {
        let mut out = self.terms.clone();
        out.extend(other.terms.iter().cloned());
        SpectralExpr::from_unsorted(out)
    }

    pub fn add_term(&self, atom: Atom, coeff: RatExpr) -> SpectralExpr {
        self.add(&SpectralExpr::term(atom, coeff))
    }

    pub fn neg(&self) -> SpectralExpr {
        SpectralExpr { terms: self.terms.iter().map(|(a, c)| (a.clone(), c.neg())).collect() }
    }

    pub fn sub(&self, other: &SpectralExpr) -> SpectralExpr {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &RatExpr) -> SpectralExpr {
        if c.is_zero() {
            return SpectralExpr::zero();
        }
        SpectralExpr {
            terms: self.terms.iter().map(|(a, k)| (a.clone(), k.mul(c))).collect(),
        }
    }

    pub fn map_coeffs<F>(&self, f: F) -> SpectralExpr
    where
        F: Fn(&RatExpr) -> RatExpr,
    {
        SpectralExpr::from_unsorted(self.terms.iter().map(|(a, c)| (a.clone(), f(c))).collect())
    }

    fn from_unsorted(mut terms: Vec<(Atom, RatExpr)>) -> SpectralExpr {
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(Atom, RatExpr)> = Vec::with_capacity(terms.len());
        for (a, c) in terms {
            if let Some(last) = out.last_mut() {
                if last.0 == a {
                    last.1 = last.1.add(&c);
                    if last.1.is_zero() {
                        out.pop();
                    }
                    continue;
                }
            }
            if !c.is_zero() {
                out.push((a, c));
            }
        }
        SpectralExpr { terms: out }
    }

    /// List of atoms (without coefficients).
    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.terms.iter().map(|(a, _)| a)
    }
}

impl fmt::Debug for SpectralExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(a, c)| format!("{} * {}", c, a.label()))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}
