//! Sparse multivariate polynomials over the integers in the fixed variable
//! set (z1, z2, z, m), with the lexicographic order z1 > z2 > z > m.
//!
//! These are the raw building blocks of the rational-function layer; all
//! coefficient arithmetic is arbitrary precision.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::fmt;

pub const NVARS: usize = 4;

/// Variable indices. The ordering of the discriminants fixes the monomial
/// order: lexicographic with z1 > z2 > z > m.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    Z1 = 0,
    Z2 = 1,
    Z = 2,
    M = 3,
}

pub const ALL_VARS: [Var; NVARS] = [Var::Z1, Var::Z2, Var::Z, Var::M];

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::Z1 => "z1",
            Var::Z2 => "z2",
            Var::Z => "z",
            Var::M => "m",
        }
    }
}

pub type Mono = [u16; NVARS];

fn mono_cmp(a: &Mono, b: &Mono) -> Ordering {
    for i in 0..NVARS {
        match a[i].cmp(&b[i]) {
            Ordering::Equal => continue,
            ord => return ord,
        }
    }
    Ordering::Equal
}

fn mono_mul(a: &Mono, b: &Mono) -> Mono {
    let mut out = [0u16; NVARS];
    for i in 0..NVARS {
        out[i] = a[i].checked_add(b[i]).expect("monomial exponent overflow");
    }
    out
}

fn mono_divides(d: &Mono, n: &Mono) -> bool {
    (0..NVARS).all(|i| d[i] <= n[i])
}

fn mono_div(n: &Mono, d: &Mono) -> Mono {
    let mut out = [0u16; NVARS];
    for i in 0..NVARS {
        out[i] = n[i] - d[i];
    }
    out
}

/// Integer-coefficient sparse polynomial. Terms are kept sorted in strictly
/// descending monomial order with nonzero coefficients.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MPoly {
    pub terms: Vec<(Mono, BigInt)>,
}

impl MPoly {
    pub fn zero() -> Self {
        MPoly { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            MPoly { terms: vec![([0; NVARS], c)] }
        }
    }

    pub fn var(v: Var) -> Self {
        let mut mono = [0u16; NVARS];
        mono[v as usize] = 1;
        MPoly { terms: vec![(mono, BigInt::one())] }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0 == [0; NVARS] && self.terms[0].1.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0 == [0; NVARS])
    }

    pub fn as_constant(&self) -> Option<BigInt> {
        if self.is_zero() {
            Some(BigInt::zero())
        } else if self.is_constant() {
            Some(self.terms[0].1.clone())
        } else {
            None
        }
    }

    pub fn degree(&self, v: Var) -> u16 {
        self.terms.iter().map(|(mo, _)| mo[v as usize]).max().unwrap_or(0)
    }

    pub fn uses_var(&self, v: Var) -> bool {
        self.degree(v) > 0
    }

    fn from_unsorted(mut terms: Vec<(Mono, BigInt)>) -> Self {
        terms.sort_by(|a, b| mono_cmp(&b.0, &a.0));
        let mut out: Vec<(Mono, BigInt)> = Vec::with_capacity(terms.len());
        for (mo, c) in terms {
            if let Some(last) = out.last_mut() {
                if last.0 == mo {
                    last.1 += c;
                    if last.1.is_zero() {
                        out.pop();
                    }
                    continue;
                }
            }
            if !c.is_zero() {
                out.push((mo, c));
            }
        }
        MPoly { terms: out }
    }

    pub fn add(&self, other: &MPoly) -> MPoly {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < other.terms.len() {
            match mono_cmp(&self.terms[i].0, &other.terms[j].0) {
                Ordering::Greater => {
                    out.push(self.terms[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    out.push(other.terms[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let c = &self.terms[i].1 + &other.terms[j].1;
                    if !c.is_zero() {
                        out.push((self.terms[i].0, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[i..]);
        out.extend_from_slice(&other.terms[j..]);
        MPoly { terms: out }
    }

    pub fn neg(&self) -> MPoly {
        MPoly { terms: self.terms.iter().map(|(mo, c)| (*mo, -c)).collect() }
    }

    pub fn sub(&self, other: &MPoly) -> MPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &MPoly) -> MPoly {
        if self.is_zero() || other.is_zero() {
            return MPoly::zero();
        }
        if self.is_one() {
            return other.clone();
        }
        if other.is_one() {
            return self.clone();
        }
        let mut acc: Vec<(Mono, BigInt)> = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                acc.push((mono_mul(ma, mb), ca * cb));
            }
        }
        MPoly::from_unsorted(acc)
    }

    pub fn mul_int(&self, c: &BigInt) -> MPoly {
        if c.is_zero() {
            return MPoly::zero();
        }
        MPoly { terms: self.terms.iter().map(|(mo, k)| (*mo, k * c)).collect() }
    }

    pub fn mul_mono(&self, mono: &Mono, c: &BigInt) -> MPoly {
        if c.is_zero() {
            return MPoly::zero();
        }
        MPoly { terms: self.terms.iter().map(|(mo, k)| (mono_mul(mo, mono), k * c)).collect() }
    }

    pub fn pow(&self, n: u32) -> MPoly {
        let mut out = MPoly::one();
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Leading (maximal) monomial and coefficient in the global lex order.
    pub fn leading(&self) -> Option<(&Mono, &BigInt)> {
        self.terms.first().map(|(mo, c)| (mo, c))
    }

    /// gcd of all integer coefficients (non-negative).
    pub fn int_content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for (_, c) in &self.terms {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    pub fn div_int_exact(&self, d: &BigInt) -> MPoly {
        if d.is_one() {
            return self.clone();
        }
        MPoly {
            terms: self
                .terms
                .iter()
                .map(|(mo, c)| {
                    let (q, r) = c.div_rem(d);
                    debug_assert!(r.is_zero());
                    (*mo, q)
                })
                .collect(),
        }
    }

    /// Exact multivariate division; `None` when `den` does not divide `self`.
    pub fn div_exact(&self, den: &MPoly) -> Option<MPoly> {
        if den.is_zero() {
            return None;
        }
        if den.is_one() {
            return Some(self.clone());
        }
        let (lm_d, lc_d) = den.leading().unwrap();
        let lm_d = *lm_d;
        let lc_d = lc_d.clone();
        let mut rem = self.clone();
        let mut out: Vec<(Mono, BigInt)> = Vec::new();
        while !rem.is_zero() {
            let (lm_r, lc_r) = rem.leading().unwrap();
            if !mono_divides(&lm_d, lm_r) {
                return None;
            }
            let (q, r) = lc_r.div_rem(&lc_d);
            if !r.is_zero() {
                return None;
            }
            let qm = mono_div(lm_r, &lm_d);
            rem = rem.sub(&den.mul_mono(&qm, &q));
            out.push((qm, q));
        }
        Some(MPoly::from_unsorted(out))
    }

    /// Coefficients with respect to `v`, index = power of `v`.
    pub fn coeffs_wrt(&self, v: Var) -> Vec<MPoly> {
        let d = self.degree(v) as usize;
        let mut out = vec![MPoly::zero(); d + 1];
        for (mo, c) in &self.terms {
            let k = mo[v as usize] as usize;
            let mut rest = *mo;
            rest[v as usize] = 0;
            out[k] = out[k].add(&MPoly { terms: vec![(rest, c.clone())] });
        }
        out
    }

    pub fn from_coeffs_wrt(v: Var, coeffs: &[MPoly]) -> MPoly {
        let mut acc = MPoly::zero();
        for (k, c) in coeffs.iter().enumerate() {
            let mut mono = [0u16; NVARS];
            mono[v as usize] = k as u16;
            acc = acc.add(&c.mul_mono(&mono, &BigInt::one()));
        }
        acc
    }

    pub fn derivative(&self, v: Var) -> MPoly {
        let mut out = Vec::new();
        for (mo, c) in &self.terms {
            let k = mo[v as usize];
            if k > 0 {
                let mut mo2 = *mo;
                mo2[v as usize] = k - 1;
                out.push((mo2, c * BigInt::from(k)));
            }
        }
        MPoly::from_unsorted(out)
    }

    /// Rename a variable (the target variable must be absent).
    pub fn rename_var(&self, from: Var, to: Var) -> MPoly {
        debug_assert!(!self.uses_var(to) || from == to);
        if from == to {
            return self.clone();
        }
        let terms = self
            .terms
            .iter()
            .map(|(mo, c)| {
                let mut m2 = *mo;
                m2[to as usize] = mo[from as usize];
                m2[from as usize] = 0;
                (m2, c.clone())
            })
            .collect();
        MPoly::from_unsorted(terms)
    }

    pub fn eval_f64(&self, point: &[f64; NVARS]) -> f64 {
        let mut acc = 0.0;
        for (mo, c) in &self.terms {
            let mut t = bigint_to_f64(c);
            for i in 0..NVARS {
                for _ in 0..mo[i] {
                    t *= point[i];
                }
            }
            acc += t;
        }
        acc
    }

    /// Evaluate at exact rational points given as (num, den) pairs.
    pub fn eval_q(&self, point: &[(BigInt, BigInt); NVARS]) -> (BigInt, BigInt) {
        // Common denominator: prod den_i^deg_i.
        let degs: Vec<u16> = (0..NVARS).map(|i| self.degree(ALL_VARS[i])).collect();
        let mut num = BigInt::zero();
        for (mo, c) in &self.terms {
            let mut t = c.clone();
            for i in 0..NVARS {
                for _ in 0..mo[i] {
                    t *= &point[i].0;
                }
                for _ in 0..(degs[i] - mo[i]) {
                    t *= &point[i].1;
                }
            }
            num += t;
        }
        let mut den = BigInt::one();
        for i in 0..NVARS {
            for _ in 0..degs[i] {
                den *= &point[i].1;
            }
        }
        (num, den)
    }

    /// Content w.r.t. `v`: gcd of the coefficient polynomials.
    fn content_wrt(&self, v: Var) -> MPoly {
        let coeffs = self.coeffs_wrt(v);
        let mut g = MPoly::zero();
        for c in coeffs.iter().filter(|c| !c.is_zero()) {
            g = gcd(&g, c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// Pseudo-remainder of `self` by `div` as univariate polynomials in `v`.
    fn prem(&self, div: &MPoly, v: Var) -> MPoly {
        let mut r = self.coeffs_wrt(v);
        let d = div.coeffs_wrt(v);
        let dd = d.len() - 1;
        let lc_d = d[dd].clone();
        loop {
            while r.last().map(|c| c.is_zero()).unwrap_or(false) {
                r.pop();
            }
            if r.is_empty() || r.len() - 1 < dd {
                break;
            }
            let dr = r.len() - 1;
            let lc_r = r[dr].clone();
            // r := lc_d * r - lc_r * x^(dr-dd) * d
            for c in r.iter_mut() {
                *c = c.mul(&lc_d);
            }
            for k in 0..=dd {
                r[dr - dd + k] = r[dr - dd + k].sub(&d[k].mul(&lc_r));
            }
            debug_assert!(r[dr].is_zero());
        }
        MPoly::from_coeffs_wrt(v, &r)
    }
}

fn bigint_to_f64(c: &BigInt) -> f64 {
    use num_traits::ToPrimitive;
    c.to_f64().unwrap_or(f64::NAN)
}

/// Polynomial gcd over Z[z1,z2,z,m]: the heuristic evaluation gcd
/// (verified by exact division) with a primitive-PRS fallback, normalized
/// with a positive leading coefficient.
pub fn gcd(a: &MPoly, b: &MPoly) -> MPoly {
    let g = match heuristic_gcd(a, b) {
        Some(g) => g,
        None => gcd_inner(a, b),
    };
    match g.leading() {
        Some((_, c)) if c.is_negative() => g.neg(),
        _ => g,
    }
}

/// Evaluation-reconstruction gcd: substitute a large integer for the most
/// significant variable, take the gcd one level down, lift back through
/// balanced base-xi digits, and verify by exact division. Unsound guesses
/// are rejected by the verification, so a `Some` answer is always correct.
fn heuristic_gcd(a: &MPoly, b: &MPoly) -> Option<MPoly> {
    heu_rec(a, b, 0)
}

fn max_abs_coeff(p: &MPoly) -> BigInt {
    let mut best = BigInt::zero();
    for (_, c) in &p.terms {
        let a = c.abs();
        if a > best {
            best = a;
        }
    }
    best
}

fn eval_var_int(p: &MPoly, v: Var, xi: &BigInt) -> MPoly {
    // substitute v = xi, keeping the remaining variables
    let mut pow_cache: Vec<BigInt> = vec![BigInt::one()];
    let d = p.degree(v) as usize;
    for k in 1..=d {
        let next = &pow_cache[k - 1] * xi;
        pow_cache.push(next);
    }
    let mut terms = Vec::with_capacity(p.terms.len());
    for (mo, c) in &p.terms {
        let k = mo[v as usize] as usize;
        let mut m2 = *mo;
        m2[v as usize] = 0;
        terms.push((m2, c * &pow_cache[k]));
    }
    MPoly::from_unsorted(terms)
}

fn balanced_mod(c: &BigInt, xi: &BigInt) -> BigInt {
    let mut r = c.mod_floor(xi);
    if &r * 2 > *xi {
        r -= xi;
    }
    r
}

/// Reconstruct a polynomial in `v` from its value at xi by balanced
/// base-xi digits (digit coefficients are polynomials one level down).
fn reconstruct(ge: &MPoly, v: Var, xi: &BigInt) -> Option<MPoly> {
    let mut rest = ge.clone();
    let mut out: Vec<(Mono, BigInt)> = Vec::new();
    let mut power: u16 = 0;
    while !rest.is_zero() {
        if power > 400 {
            return None;
        }
        let digit = MPoly {
            terms: rest
                .terms
                .iter()
                .map(|(mo, c)| (*mo, balanced_mod(c, xi)))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        };
        for (mo, c) in &digit.terms {
            let mut m2 = *mo;
            m2[v as usize] = m2[v as usize].checked_add(power)?;
            out.push((m2, c.clone()));
        }
        let reduced = rest.sub(&digit);
        let mut next_terms = Vec::with_capacity(reduced.terms.len());
        for (mo, c) in &reduced.terms {
            let (q, r) = c.div_rem(xi);
            if !r.is_zero() {
                return None;
            }
            next_terms.push((*mo, q));
        }
        rest = MPoly::from_unsorted(next_terms);
        power += 1;
    }
    Some(MPoly::from_unsorted(out))
}

/// Recursive heuristic gcd; the integer content is split off and
/// reattached at every level, which is what keeps evaluation-image
/// factors (powers of xi standing for outer variables) from being lost.
fn heu_rec(a: &MPoly, b: &MPoly, depth: u32) -> Option<MPoly> {
    if depth > 16 {
        return None;
    }
    if a.is_zero() {
        return Some(b.clone());
    }
    if b.is_zero() {
        return Some(a.clone());
    }
    let ica = a.int_content();
    let icb = b.int_content();
    let ic = ica.gcd(&icb);
    let pa = a.div_int_exact(&ica);
    let pb = b.div_int_exact(&icb);
    Some(heu_primitive(&pa, &pb, depth)?.mul_int(&ic))
}

/// Heuristic gcd of integer-primitive polynomials.
fn heu_primitive(a: &MPoly, b: &MPoly, depth: u32) -> Option<MPoly> {
    if let (Some(ca), Some(cb)) = (a.as_constant(), b.as_constant()) {
        return Some(MPoly::constant(ca.gcd(&cb)));
    }
    if a.is_constant() || b.is_constant() {
        // integer-primitive constants are units
        return Some(MPoly::one());
    }
    if a == b {
        return Some(a.clone());
    }
    let v = ALL_VARS
        .iter()
        .copied()
        .find(|&v| a.uses_var(v) || b.uses_var(v))?;
    if !a.uses_var(v) || !b.uses_var(v) {
        // one operand is v-free: gcd(a, b) = gcd(v-free one, cont_v(other))
        let (free, mixed) = if a.uses_var(v) { (b, a) } else { (a, b) };
        let mut g = free.clone();
        for c in mixed.coeffs_wrt(v) {
            if c.is_zero() {
                continue;
            }
            if g.is_one() {
                break;
            }
            g = heu_rec(&g, &c, depth + 1)?;
        }
        return Some(g);
    }
    let bound = max_abs_coeff(a).max(max_abs_coeff(b));
    let mut xi: BigInt = bound * 2 + BigInt::from(29);
    for _ in 0..6 {
        let ae = eval_var_int(a, v, &xi);
        let be = eval_var_int(b, v, &xi);
        if !ae.is_zero() && !be.is_zero() {
            if let Some(ge) = heu_rec(&ae, &be, depth + 1) {
                if let Some(g) = reconstruct(&ge, v, &xi) {
                    if !g.is_zero() {
                        // inputs are integer-primitive, so the true gcd is
                        // too; junk integer content from the evaluation
                        // point is safe to strip.
                        let gc = g.int_content();
                        let g = g.div_int_exact(&gc);
                        if a.div_exact(&g).is_some() && b.div_exact(&g).is_some() {
                            return Some(g);
                        }
                    }
                }
            }
        }
        xi = &xi * BigInt::from(73794u32) / BigInt::from(27011u32) + BigInt::from(17);
    }
    None
}

fn gcd_inner(a: &MPoly, b: &MPoly) -> MPoly {
    if a.is_zero() {
        return b.clone();
    }
    if b.is_zero() {
        return a.clone();
    }
    // Fast paths: constants and equal polys.
    if a == b {
        return a.clone();
    }
    if let (Some(ca), Some(cb)) = (a.as_constant(), b.as_constant()) {
        return MPoly::constant(ca.gcd(&cb));
    }
    let ica = a.int_content();
    let icb = b.int_content();
    let ic = ica.gcd(&icb);
    let pa = a.div_int_exact(&ica);
    let pb = b.div_int_exact(&icb);
    if pa.is_constant() || pb.is_constant() {
        return MPoly::constant(ic);
    }
    // One cheap divisibility check short-circuits the common case.
    if pa.div_exact(&pb).is_some() {
        return pb.mul_int(&ic);
    }
    if pb.div_exact(&pa).is_some() {
        return pa.mul_int(&ic);
    }
    // Main variable: the most significant variable used by either.
    let v = ALL_VARS
        .iter()
        .copied()
        .find(|&v| pa.uses_var(v) || pb.uses_var(v))
        .expect("non-constant polynomial uses some variable");
    if !pa.uses_var(v) {
        // pa is free of v: gcd(pa, cont_v(pb))
        return gcd_inner(&pa, &pb.content_wrt(v)).mul_int(&ic);
    }
    if !pb.uses_var(v) {
        return gcd_inner(&pb, &pa.content_wrt(v)).mul_int(&ic);
    }
    let cont_a = pa.content_wrt(v);
    let cont_b = pb.content_wrt(v);
    let cont_g = gcd_inner(&cont_a, &cont_b);
    let mut p = pa.div_exact(&cont_a).unwrap();
    let mut q = pb.div_exact(&cont_b).unwrap();
    if p.degree(v) < q.degree(v) {
        std::mem::swap(&mut p, &mut q);
    }
    loop {
        if q.is_zero() {
            break;
        }
        let r = p.prem(&q, v);
        p = q;
        q = if r.is_zero() {
            MPoly::zero()
        } else {
            let c = r.content_wrt(v);
            r.div_exact(&c).unwrap()
        };
        if p.degree(v) == 0 {
            // coprime in v
            p = MPoly::one();
            break;
        }
    }
    let pc = p.content_wrt(v);
    let g = p.div_exact(&pc).unwrap();
    cont_g.mul(&g).mul_int(&ic)
}

impl fmt::Debug for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::exact::format_poly(self))
    }
}
