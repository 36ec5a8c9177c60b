//! Canonically normalized rational expressions with an optional formal
//! factor g = Gamma(m/2) of degree at most one.
//!
//! An expression is (n0 + n1*g)/den with n0, n1, den integer polynomials in
//! (z1, z2, z, m), gcd(n0, n1, den) = 1, den nonzero and g-free, and the
//! leading coefficient of den positive. Scalars of the coefficient field
//! Q(m)[g] are the same type restricted to the variable m.

use super::mpoly::{gcd, MPoly, Var, ALL_VARS, NVARS};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExactError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("evaluation point hits a pole")]
    PoleAtPoint,
    #[error("gamma would appear with degree >= 2")]
    GammaOverflow,
    #[error("division by an expression containing gamma")]
    GammaDivision,
    #[error("parse error: {0}")]
    Parse(String),
}

pub type ExactResult<T> = Result<T, ExactError>;

/// Rational expression in (z, z1, z2) over Q(m) extended linearly by g.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RatExpr {
    pub(crate) n0: MPoly,
    pub(crate) n1: MPoly,
    pub(crate) den: MPoly,
}

impl RatExpr {
    fn make(n0: MPoly, n1: MPoly, den: MPoly) -> ExactResult<RatExpr> {
        if den.is_zero() {
            return Err(ExactError::ZeroDenominator);
        }
        if n0.is_zero() && n1.is_zero() {
            return Ok(RatExpr { n0, n1, den: MPoly::one() });
        }
        let g = gcd(&gcd(&n0, &n1), &den);
        let (mut n0, mut n1, mut den) = if g.is_one() {
            (n0, n1, den)
        } else {
            (
                n0.div_exact(&g).unwrap(),
                n1.div_exact(&g).unwrap(),
                den.div_exact(&g).unwrap(),
            )
        };
        if let Some((_, lc)) = den.leading() {
            if lc.is_negative() {
                n0 = n0.neg();
                n1 = n1.neg();
                den = den.neg();
            }
        }
        Ok(RatExpr { n0, n1, den })
    }

    pub fn zero() -> RatExpr {
        RatExpr { n0: MPoly::zero(), n1: MPoly::zero(), den: MPoly::one() }
    }

    pub fn one() -> RatExpr {
        RatExpr { n0: MPoly::one(), n1: MPoly::zero(), den: MPoly::one() }
    }

    pub fn from_int(k: i64) -> RatExpr {
        RatExpr { n0: MPoly::constant(BigInt::from(k)), n1: MPoly::zero(), den: MPoly::one() }
    }

    pub fn from_ratio(num: i64, den: i64) -> RatExpr {
        assert!(den != 0);
        Self::make(MPoly::constant(BigInt::from(num)), MPoly::zero(), MPoly::constant(BigInt::from(den))).unwrap()
    }

    pub fn from_big_ratio(q: &BigRational) -> RatExpr {
        Self::make(MPoly::constant(q.numer().clone()), MPoly::zero(), MPoly::constant(q.denom().clone())).unwrap()
    }

    pub fn var(v: Var) -> RatExpr {
        RatExpr { n0: MPoly::var(v), n1: MPoly::zero(), den: MPoly::one() }
    }

    /// The formal transcendental g = Gamma(m/2).
    pub fn gamma() -> RatExpr {
        RatExpr { n0: MPoly::zero(), n1: MPoly::one(), den: MPoly::one() }
    }

    /// Normalized gamma-free quotient of two polynomials.
    pub fn from_num_den(num: MPoly, den: MPoly) -> ExactResult<RatExpr> {
        RatExpr::make(num, MPoly::zero(), den)
    }

    pub fn from_poly(p: MPoly) -> RatExpr {
        RatExpr { n0: p, n1: MPoly::zero(), den: MPoly::one() }
    }

    pub fn is_zero(&self) -> bool {
        self.n0.is_zero() && self.n1.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.n0.is_one() && self.n1.is_zero() && self.den.is_one()
    }

    pub fn has_gamma(&self) -> bool {
        !self.n1.is_zero()
    }

    pub fn uses_var(&self, v: Var) -> bool {
        self.n0.uses_var(v) || self.n1.uses_var(v) || self.den.uses_var(v)
    }

    pub fn num_gamma_free(&self) -> &MPoly {
        &self.n0
    }

    pub fn num_gamma(&self) -> &MPoly {
        &self.n1
    }

    pub fn den_poly(&self) -> &MPoly {
        &self.den
    }

    pub fn add(&self, other: &RatExpr) -> RatExpr {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.den == other.den {
            let n0 = self.n0.add(&other.n0);
            let n1 = self.n1.add(&other.n1);
            return RatExpr::make(n0, n1, self.den.clone()).expect("denominator nonzero");
        }
        // a/d1 + b/d2 = (a d2/g + b d1/g) / (d1 d2 / g), g = gcd(d1, d2)
        let g = gcd(&self.den, &other.den);
        let (da, db) = if g.is_one() {
            (self.den.clone(), other.den.clone())
        } else {
            (
                self.den.div_exact(&g).unwrap(),
                other.den.div_exact(&g).unwrap(),
            )
        };
        let n0 = self.n0.mul(&db).add(&other.n0.mul(&da));
        let n1 = self.n1.mul(&db).add(&other.n1.mul(&da));
        RatExpr::make(n0, n1, da.mul(&other.den)).expect("denominators nonzero")
    }

    pub fn neg(&self) -> RatExpr {
        RatExpr { n0: self.n0.neg(), n1: self.n1.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, other: &RatExpr) -> RatExpr {
        self.add(&other.neg())
    }

    pub fn try_mul(&self, other: &RatExpr) -> ExactResult<RatExpr> {
        if self.is_zero() || other.is_zero() {
            return Ok(RatExpr::zero());
        }
        if !self.n1.is_zero() && !other.n1.is_zero() {
            return Err(ExactError::GammaOverflow);
        }
        // cross-cancel to keep the products small
        let ga = gcd(&gcd(&self.n0, &self.n1), &other.den);
        let gb = gcd(&gcd(&other.n0, &other.n1), &self.den);
        let (a0, a1, db) = if ga.is_one() {
            (self.n0.clone(), self.n1.clone(), other.den.clone())
        } else {
            (
                self.n0.div_exact(&ga).unwrap(),
                self.n1.div_exact(&ga).unwrap(),
                other.den.div_exact(&ga).unwrap(),
            )
        };
        let (b0, b1, da) = if gb.is_one() {
            (other.n0.clone(), other.n1.clone(), self.den.clone())
        } else {
            (
                other.n0.div_exact(&gb).unwrap(),
                other.n1.div_exact(&gb).unwrap(),
                self.den.div_exact(&gb).unwrap(),
            )
        };
        let n0 = a0.mul(&b0);
        let n1 = a0.mul(&b1).add(&a1.mul(&b0));
        RatExpr::make(n0, n1, da.mul(&db))
    }

    pub fn mul(&self, other: &RatExpr) -> RatExpr {
        self.try_mul(other).expect("gamma degree overflow")
    }

    pub fn inv(&self) -> ExactResult<RatExpr> {
        if self.is_zero() {
            return Err(ExactError::ZeroDenominator);
        }
        if self.n1.is_zero() {
            return RatExpr::make(self.den.clone(), MPoly::zero(), self.n0.clone());
        }
        if self.n0.is_zero() {
            // (c*g)^{-1} only as a helper for g-cancelling quotients.
            return Err(ExactError::GammaDivision);
        }
        Err(ExactError::GammaDivision)
    }

    pub fn div(&self, other: &RatExpr) -> ExactResult<RatExpr> {
        if other.is_zero() {
            return Err(ExactError::ZeroDenominator);
        }
        if other.n1.is_zero() {
            let inv = RatExpr::make(other.den.clone(), MPoly::zero(), other.n0.clone())?;
            self.try_mul(&inv)
        } else if other.n0.is_zero() && self.n0.is_zero() {
            // (a*g)/(b*g) = a/b
            RatExpr::make(self.n1.mul(&other.den), MPoly::zero(), self.den.mul(&other.n1))
        } else {
            Err(ExactError::GammaDivision)
        }
    }

    pub fn pow_i64(&self, e: i64) -> ExactResult<RatExpr> {
        if e == 0 {
            return Ok(RatExpr::one());
        }
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut out = RatExpr::one();
        for _ in 0..e.unsigned_abs() {
            out = out.try_mul(&base)?;
        }
        Ok(out)
    }

    pub fn derivative(&self, v: Var) -> RatExpr {
        // ((n0 + n1 g)/d)' = ((n0' + n1' g) d - (n0 + n1 g) d') / d^2
        let dp = self.den.derivative(v);
        let n0 = self.n0.derivative(v).mul(&self.den).sub(&self.n0.mul(&dp));
        let n1 = self.n1.derivative(v).mul(&self.den).sub(&self.n1.mul(&dp));
        RatExpr::make(n0, n1, self.den.mul(&self.den)).expect("denominator nonzero")
    }

    /// Simultaneous substitution of variables by rational expressions.
    /// Unbound variables stay fixed. Bindings must be gamma-free.
    pub fn substitute(&self, bindings: &[Option<&RatExpr>; NVARS]) -> ExactResult<RatExpr> {
        for b in bindings.iter().flatten() {
            if b.has_gamma() {
                return Err(ExactError::GammaOverflow);
            }
            if b.is_zero() && b.den.is_zero() {
                return Err(ExactError::ZeroDenominator);
            }
        }
        let (num0, den0) = subst_poly(&self.n0, bindings);
        let (num1, den1) = subst_poly(&self.n1, bindings);
        let (numd, dend) = subst_poly(&self.den, bindings);
        if numd.is_zero() {
            return Err(ExactError::ZeroDenominator);
        }
        // (num0/den0 + (num1/den1) g) / (numd/dend)
        // = (num0 den1 + num1 den0 g) * dend / (den0 den1 numd)
        let n0 = num0.mul(&den1).mul(&dend);
        let n1 = num1.mul(&den0).mul(&dend);
        let den = den0.mul(&den1).mul(&numd);
        RatExpr::make(n0, n1, den)
    }

    pub fn subst_one(&self, v: Var, by: &RatExpr) -> ExactResult<RatExpr> {
        let mut b: [Option<&RatExpr>; NVARS] = [None, None, None, None];
        b[v as usize] = Some(by);
        self.substitute(&b)
    }

    /// Rename a variable; the target must be unused.
    pub fn rename_var(&self, from: Var, to: Var) -> RatExpr {
        RatExpr {
            n0: self.n0.rename_var(from, to),
            n1: self.n1.rename_var(from, to),
            den: self.den.rename_var(from, to),
        }
    }

    /// Exact evaluation: returns (a, b) with value a + b*Gamma(m/2).
    pub fn eval_q(&self, point: &QPoint) -> ExactResult<(BigRational, BigRational)> {
        let pt = point.as_pairs();
        let (dn, dd) = self.den.eval_q(&pt);
        if dn.is_zero() {
            return Err(ExactError::PoleAtPoint);
        }
        let den = BigRational::new(dn, dd);
        let (a_n, a_d) = self.n0.eval_q(&pt);
        let (b_n, b_d) = self.n1.eval_q(&pt);
        Ok((BigRational::new_raw(a_n, a_d).reduced() / &den, BigRational::new_raw(b_n, b_d).reduced() / &den))
    }

    /// Float evaluation with a caller-supplied value for Gamma(m/2).
    pub fn eval_f64(&self, point: &FPoint, gamma: f64) -> ExactResult<f64> {
        let pt = point.as_array();
        let d = self.den.eval_f64(&pt);
        if d == 0.0 {
            return Err(ExactError::PoleAtPoint);
        }
        Ok((self.n0.eval_f64(&pt) + gamma * self.n1.eval_f64(&pt)) / d)
    }
}

fn subst_poly(p: &MPoly, bindings: &[Option<&RatExpr>; NVARS]) -> (MPoly, MPoly) {
    if p.is_zero() {
        return (MPoly::zero(), MPoly::one());
    }
    let degs: Vec<u16> = (0..NVARS).map(|i| p.degree(ALL_VARS[i])).collect();
    // Power tables for numerators and denominators of the bindings.
    let mut num_pow: Vec<Vec<MPoly>> = Vec::with_capacity(NVARS);
    let mut den_pow: Vec<Vec<MPoly>> = Vec::with_capacity(NVARS);
    for i in 0..NVARS {
        let d = degs[i] as usize;
        let (bn, bd) = match bindings[i] {
            Some(b) => (b.n0.clone(), b.den.clone()),
            None => (MPoly::var(ALL_VARS[i]), MPoly::one()),
        };
        let mut np = Vec::with_capacity(d + 1);
        let mut dp = Vec::with_capacity(d + 1);
        np.push(MPoly::one());
        dp.push(MPoly::one());
        for k in 1..=d {
            np.push(np[k - 1].mul(&bn));
            dp.push(dp[k - 1].mul(&bd));
        }
        num_pow.push(np);
        den_pow.push(dp);
    }
    let mut acc = MPoly::zero();
    for (mo, c) in &p.terms {
        let mut t = MPoly::constant(c.clone());
        for i in 0..NVARS {
            let k = mo[i] as usize;
            t = t.mul(&num_pow[i][k]);
            t = t.mul(&den_pow[i][degs[i] as usize - k]);
        }
        acc = acc.add(&t);
    }
    let mut den = MPoly::one();
    for i in 0..NVARS {
        den = den.mul(&den_pow[i][degs[i] as usize]);
    }
    (acc, den)
}

/// Exact rational evaluation point; `None` leaves a variable untouched only
/// in float form, so all four slots are required here.
#[derive(Clone, Debug)]
pub struct QPoint {
    pub z1: BigRational,
    pub z2: BigRational,
    pub z: BigRational,
    pub m: BigRational,
}

impl QPoint {
    pub fn new(z: BigRational, z1: BigRational, z2: BigRational, m: BigRational) -> QPoint {
        QPoint { z1, z2, z, m }
    }

    fn as_pairs(&self) -> [(BigInt, BigInt); NVARS] {
        [
            (self.z1.numer().clone(), self.z1.denom().clone()),
            (self.z2.numer().clone(), self.z2.denom().clone()),
            (self.z.numer().clone(), self.z.denom().clone()),
            (self.m.numer().clone(), self.m.denom().clone()),
        ]
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FPoint {
    pub z1: f64,
    pub z2: f64,
    pub z: f64,
    pub m: f64,
}

impl FPoint {
    fn as_array(&self) -> [f64; NVARS] {
        [self.z1, self.z2, self.z, self.m]
    }
}

impl fmt::Debug for RatExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}


/// Convenience constructors for coefficients that show up all over the
/// recurrence tables: polynomials in m with rational coefficients.
pub fn m_poly(c0: i64, c1: i64) -> RatExpr {
    // c0 + c1*m
    RatExpr::from_int(c0).add(&RatExpr::from_int(c1).mul(&RatExpr::var(Var::M)))
}

pub fn half_m() -> RatExpr {
    RatExpr::var(Var::M).mul(&RatExpr::from_ratio(1, 2))
}
