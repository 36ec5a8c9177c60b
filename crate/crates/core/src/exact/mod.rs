//! Exact arithmetic: arbitrary-precision rational functions in the variables
//! (z, z1, z2) over the field Q(m), extended linearly by the formal scalar
//! g = Gamma(m/2).
//!
//! Every value is canonically normalized on construction (gcd-reduced,
//! denominator sign-normalized), so equality of rational functions is
//! structural equality and `is_zero` decides the word problem for the field
//! operations. Values are immutable and freely shareable across threads.

mod expr;
mod mpoly;
mod parse;

pub use expr::{half_m, m_poly, ExactError, ExactResult, FPoint, QPoint, RatExpr};
pub use mpoly::{gcd, MPoly, Var, ALL_VARS, NVARS};
pub use parse::{format_poly, parse_expr};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Dimension mode: the symbol m stays formal, or is pinned to an exact
/// rational value from the start.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MMode {
    Symbolic,
    Fixed(BigRational),
}

impl MMode {
    pub fn fixed_int(m: i64) -> MMode {
        MMode::Fixed(BigRational::from_integer(BigInt::from(m)))
    }

    pub fn fixed_ratio(num: i64, den: i64) -> MMode {
        MMode::Fixed(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// The value of m as an expression: the variable itself in symbolic
    /// mode, a constant in fixed mode.
    pub fn m_expr(&self) -> RatExpr {
        match self {
            MMode::Symbolic => RatExpr::var(Var::M),
            MMode::Fixed(q) => RatExpr::from_big_ratio(q),
        }
    }

    pub fn m_value(&self) -> Option<&BigRational> {
        match self {
            MMode::Symbolic => None,
            MMode::Fixed(q) => Some(q),
        }
    }

    pub fn is_fixed_two(&self) -> bool {
        matches!(self, MMode::Fixed(q) if *q == BigRational::from_integer(BigInt::from(2)))
    }

    /// Gamma(m/2) as an exact rational when m is a fixed even integer >= 2.
    pub fn gamma_rational(&self) -> Option<BigRational> {
        let q = self.m_value()?;
        let half = q / BigRational::from_integer(BigInt::from(2));
        if !half.is_integer() {
            return None;
        }
        let n = half.to_integer().to_i64()?;
        if n < 1 {
            return None;
        }
        let mut acc = BigInt::one();
        for k in 2..n {
            acc *= BigInt::from(k);
        }
        Some(BigRational::from_integer(acc))
    }

    /// The scalar Gamma(m/2) in this mode: the formal g, or its exact value
    /// at fixed even m.
    pub fn gamma_expr(&self) -> RatExpr {
        match self.gamma_rational() {
            Some(q) => RatExpr::from_big_ratio(&q),
            None => RatExpr::gamma(),
        }
    }

    /// j = p + q*(m/2) as an expression in this mode.
    pub fn weight_expr(&self, w: &Weight) -> RatExpr {
        let half_m = self.m_expr().mul(&RatExpr::from_ratio(1, 2));
        RatExpr::from_big_ratio(&w.p).add(&RatExpr::from_big_ratio(&w.q).mul(&half_m))
    }
}

/// Modular weight j = p + q*(m/2) with exact rational p, q.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Weight {
    pub p: BigRational,
    pub q: BigRational,
}

impl Weight {
    pub fn new(p: BigRational, q: BigRational) -> Weight {
        Weight { p, q }
    }

    pub fn from_ints(p: i64, q: i64) -> Weight {
        Weight {
            p: BigRational::from_integer(BigInt::from(p)),
            q: BigRational::from_integer(BigInt::from(q)),
        }
    }

    /// The weight -m/2 + c.
    pub fn minus_half_m_plus(c: i64) -> Weight {
        Weight::from_ints(c, -1)
    }

    pub fn shift_p(&self, delta: i64) -> Weight {
        Weight {
            p: &self.p + BigRational::from_integer(BigInt::from(delta)),
            q: self.q.clone(),
        }
    }

    /// Evaluate j at a mode; integer result required by the callers that
    /// exponentiate (1-z).
    pub fn as_integer(&self, mode: &MMode) -> Option<i64> {
        let val = match mode {
            MMode::Symbolic => {
                if !self.q.is_zero() {
                    return None;
                }
                self.p.clone()
            }
            MMode::Fixed(m) => &self.p + &self.q * m / BigRational::from_integer(BigInt::from(2)),
        };
        if val.is_integer() {
            val.to_integer().to_i64()
        } else {
            None
        }
    }

    pub fn to_f64(&self, m: f64) -> f64 {
        rational_to_f64(&self.p) + rational_to_f64(&self.q) * m / 2.0
    }
}

pub fn rational_to_f64(q: &BigRational) -> f64 {
    q.numer().to_f64().unwrap_or(f64::NAN) / q.denom().to_f64().unwrap_or(f64::NAN)
}

/// (1-z)^k for the node variable `v`, any integer k.
pub fn one_minus_pow(v: Var, k: i64) -> RatExpr {
    let base = RatExpr::one().sub(&RatExpr::var(v));
    base.pow_i64(k).expect("1-z is invertible")
}
