//! The truncated coefficient ring `Z_p[u^{±1}][[v_1, …, v_{n-1}]]`.
//!
//! Elements are finite sums of monomials `c · u^a · v^b` with `c` a
//! [`PadicScaled`]. Two truncations apply to every result: p-adic digits at or
//! beyond `p^precision` are dropped, and so is any monomial whose total
//! v-degree exceeds `vdeg`. The generator `v_n` is never stored; it is the
//! unit `u^{p^n - 1}`.

mod padic;

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

pub use padic::{max_digits, pad_arith, PadicOp, PadicScaled};

use crate::error::{Error, Result};

/// Maximum number of power-series generators `v_1 … v_{n-1}`.
pub const MAX_V: usize = 4;

/// Exponent vector of the v-generators.
pub type VMono = [u8; MAX_V];

/// Truncation data shared by every element of one coefficient ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CoeffParams {
    pub p: u32,
    pub n: u32,
    /// Absolute p-adic precision cap `N`.
    pub precision: u32,
    /// Total v-degree cap `D`.
    pub vdeg: u32,
    /// Bit `i-1` set means `v_i` is specialised to zero.
    pub killed: u8,
}

impl CoeffParams {
    pub fn new(p: u32, n: u32, precision: u32, vdeg: u32) -> Result<Self> {
        if p < 2 || !(2..p).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d)) {
            return Err(Error::Config(format!("{p} is not prime")));
        }
        if n == 0 || n as usize > MAX_V + 1 {
            return Err(Error::Config(format!("height n={n} must lie in 1..={}", MAX_V + 1)));
        }
        if precision == 0 || precision > max_digits(p) {
            return Err(Error::Config(format!(
                "precision {precision} must lie in 1..={} for p={p}",
                max_digits(p)
            )));
        }
        Ok(CoeffParams { p, n, precision, vdeg, killed: 0 })
    }

    pub fn num_v(&self) -> usize {
        self.n as usize - 1
    }

    pub fn with_precision(self, precision: u32) -> Self {
        CoeffParams { precision, ..self }
    }

    pub fn with_vdeg(self, vdeg: u32) -> Self {
        CoeffParams { vdeg, ..self }
    }

    /// Specialises `v_1 … v_j` to zero.
    pub fn kill_below(self, j: usize) -> Self {
        let mask = if j == 0 { 0 } else { ((1u16 << j) - 1) as u8 };
        CoeffParams { killed: self.killed | mask, ..self }
    }

    pub fn is_killed(&self, i: usize) -> bool {
        i >= 1 && self.killed & (1 << (i - 1)) != 0
    }

    /// Internal degree of a monomial, with `|u| = -2` and `|v_i| = -2(p^i - 1)`.
    pub fn degree_of(&self, key: &Key) -> i64 {
        let mut d = -2 * key.u as i64;
        for (i, &e) in key.v.iter().enumerate().take(self.num_v()) {
            d -= 2 * ((self.p as i64).pow(i as u32 + 1) - 1) * e as i64;
        }
        d
    }
}

/// A monomial `u^u · v^v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Key {
    pub v: VMono,
    pub u: i32,
}

impl Key {
    pub fn unit_u(u: i32) -> Self {
        Key { v: [0; MAX_V], u }
    }

    pub fn vdeg(&self) -> u32 {
        self.v.iter().map(|&e| e as u32).sum()
    }

    fn combine(&self, other: &Key) -> Key {
        let mut v = [0u8; MAX_V];
        for (i, slot) in v.iter_mut().enumerate() {
            *slot = self.v[i].saturating_add(other.v[i]);
        }
        Key { v, u: self.u + other.u }
    }
}

type Terms = SmallVec<[(Key, PadicScaled); 2]>;

/// An element of the truncated coefficient ring.
#[derive(Clone)]
pub struct CoeffElem {
    params: CoeffParams,
    terms: Terms,
    truncated: bool,
}

/// Operation selector for [`coeff_arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoeffOp {
    Add,
    Mul,
}

/// Parameter-checked ring operation.
pub fn coeff_arith(a: &CoeffElem, b: &CoeffElem, op: CoeffOp) -> Result<CoeffElem> {
    if a.params != b.params {
        return Err(Error::ParamMismatch(format!("{:?} vs {:?}", a.params, b.params)));
    }
    Ok(match op {
        CoeffOp::Add => a + b,
        CoeffOp::Mul => a * b,
    })
}

impl CoeffElem {
    pub fn zero(params: CoeffParams) -> Self {
        CoeffElem { params, terms: SmallVec::new(), truncated: false }
    }

    pub fn one(params: CoeffParams) -> Self {
        Self::from_int(params, 1)
    }

    pub fn from_int(params: CoeffParams, x: i128) -> Self {
        Self::from_padic(params, PadicScaled::from_i128(params.p, x, params.precision))
    }

    pub fn from_padic(params: CoeffParams, c: PadicScaled) -> Self {
        Self::monomial(params, c, Key::unit_u(0))
    }

    pub fn monomial(params: CoeffParams, c: PadicScaled, key: Key) -> Self {
        let mut out = Self::zero(params);
        if key.vdeg() > params.vdeg {
            out.truncated = true;
            return out;
        }
        if (0..params.num_v()).any(|i| key.v[i] > 0 && params.is_killed(i + 1))
            || key.v[params.num_v()..].iter().any(|&e| e > 0)
        {
            return out;
        }
        let c = c.truncate_abs(params.precision as i64);
        if !c.is_zero() {
            out.terms.push((key, c));
        }
        out
    }

    /// `u^k`.
    pub fn u_pow(params: CoeffParams, k: i32) -> Self {
        Self::monomial(params, PadicScaled::one(params.p, params.precision), Key::unit_u(k))
    }

    /// The generator `v_i` with the conventions `v_0 = p`, `v_n = u^{p^n-1}`, `v_i = 0` for `i > n`.
    pub fn v(params: CoeffParams, i: usize) -> Self {
        let n = params.n as usize;
        if i == 0 {
            return Self::from_int(params, params.p as i128);
        }
        if i == n {
            return Self::u_pow(params, (params.p as i32).pow(n as u32) - 1);
        }
        if i > n {
            return Self::zero(params);
        }
        let mut key = Key::unit_u(0);
        key.v[i - 1] = 1;
        Self::monomial(params, PadicScaled::one(params.p, params.precision), key)
    }

    pub fn params(&self) -> CoeffParams {
        self.params
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Key, &PadicScaled)> {
        self.terms.iter().map(|(k, c)| (k, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Whether some v-term was discarded by the degree cap while producing this value.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    /// Coefficient of one monomial.
    pub fn coefficient(&self, key: &Key) -> PadicScaled {
        self.terms
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, c)| *c)
            .unwrap_or_else(|| PadicScaled::zero(self.params.p))
    }

    fn from_unsorted(params: CoeffParams, mut raw: Vec<(Key, PadicScaled)>, truncated: bool) -> Self {
        raw.sort_by_key(|a| a.0);
        let mut terms: Terms = SmallVec::with_capacity(raw.len());
        for (k, c) in raw {
            match terms.last_mut() {
                Some((lk, lc)) if *lk == k => *lc = lc.add(&c),
                _ => terms.push((k, c)),
            }
        }
        let cap = params.precision as i64;
        let terms = terms
            .into_iter()
            .filter_map(|(k, c)| {
                let c = c.truncate_abs(cap);
                (!c.is_zero()).then_some((k, c))
            })
            .collect();
        CoeffElem { params, terms, truncated }
    }

    fn merge(&self, other: &Self, negate_other: bool) -> Self {
        debug_assert_eq!(self.params, other.params, "coefficient parameter mismatch");
        let cap = self.params.precision as i64;
        let mut terms: Terms = SmallVec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let fix = |c: PadicScaled| if negate_other { c.neg() } else { c };
        while i < self.terms.len() || j < other.terms.len() {
            let ord = match (self.terms.get(i), other.terms.get(j)) {
                (Some(a), Some(b)) => a.0.cmp(&b.0),
                (Some(_), None) => Ordering::Less,
                _ => Ordering::Greater,
            };
            match ord {
                Ordering::Less => {
                    terms.push(self.terms[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    let (k, c) = other.terms[j];
                    terms.push((k, fix(c)));
                    j += 1;
                }
                Ordering::Equal => {
                    let s = self.terms[i].1.add(&fix(other.terms[j].1)).truncate_abs(cap);
                    if !s.is_zero() {
                        terms.push((self.terms[i].0, s));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        CoeffElem { params: self.params, terms, truncated: self.truncated || other.truncated }
    }

    fn product(&self, other: &Self) -> Self {
        debug_assert_eq!(self.params, other.params, "coefficient parameter mismatch");
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.params);
        }
        let mut truncated = self.truncated || other.truncated;
        let dcap = self.params.vdeg;
        if self.terms.len() == 1 && other.terms.len() == 1 {
            let (ka, ca) = self.terms[0];
            let (kb, cb) = other.terms[0];
            let key = ka.combine(&kb);
            if key.vdeg() > dcap {
                let mut z = Self::zero(self.params);
                z.truncated = true;
                return z;
            }
            let c = ca.mul(&cb).truncate_abs(self.params.precision as i64);
            let mut out = Self::zero(self.params);
            out.truncated = truncated;
            if !c.is_zero() {
                out.terms.push((key, c));
            }
            return out;
        }
        let mut raw = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let key = ka.combine(kb);
                if key.vdeg() > dcap {
                    truncated = true;
                    continue;
                }
                raw.push((key, ca.mul(cb)));
            }
        }
        Self::from_unsorted(self.params, raw, truncated)
    }

    pub fn scale(&self, c: &PadicScaled) -> Self {
        let raw = self.terms.iter().map(|(k, x)| (*k, x.mul(c))).collect();
        Self::from_unsorted(self.params, raw, self.truncated)
    }

    /// Multiplies by `u^k`.
    pub fn mul_u(&self, k: i32) -> Self {
        let mut out = self.clone();
        for (key, _) in out.terms.iter_mut() {
            key.u += k;
        }
        out
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.params);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Least p-adic valuation among the terms.
    pub fn min_valuation(&self) -> Option<i32> {
        self.terms.iter().filter_map(|(_, c)| c.valuation()).min()
    }

    /// Least absolute precision among the terms.
    pub fn min_abs_precision(&self) -> Option<i64> {
        self.terms.iter().filter_map(|(_, c)| c.abs_precision()).min()
    }

    /// Image in the residue ring `F_p[u^{±1}]`, i.e. modulo `(p, v_1, …, v_{n-1})`,
    /// as a map from u-exponent to a nonzero residue. Requires integral coefficients.
    pub fn reduce_mod_maximal(&self) -> Result<Vec<(i32, u32)>> {
        let mut out = Vec::new();
        for (k, c) in &self.terms {
            if k.vdeg() > 0 {
                continue;
            }
            let r = c
                .residue_mod_p()
                .ok_or_else(|| Error::Unsupported("reduction of a non-integral coefficient".into()))?;
            if r != 0 {
                out.push((k.u, r));
            }
        }
        Ok(out)
    }

    /// Whether the value is a unit. Coefficients with negative valuation are
    /// read in the ring with `p` inverted.
    pub fn is_unit(&self) -> bool {
        self.unit_leading().is_some()
    }

    /// `(v0, key, c)` with `self = p^{v0} · c · u^k · (1 + ε)` and `ε` topologically nilpotent.
    fn unit_leading(&self) -> Option<(i32, Key, PadicScaled)> {
        let v0 = self.min_valuation()?;
        if v0 > 0 {
            return None;
        }
        let mut lead = None;
        for (k, c) in &self.terms {
            if k.vdeg() == 0 && c.valuation() == Some(v0) {
                if lead.is_some() {
                    return None;
                }
                lead = Some((*k, *c));
            }
        }
        lead.map(|(k, c)| (v0, k, c))
    }

    /// Multiplicative inverse via a geometric series in the maximal ideal.
    pub fn invert(&self) -> Result<Self> {
        let (_v0, key, c) = self.unit_leading().ok_or_else(|| Error::NotUnit(self.to_string()))?;
        let lead_inv = CoeffElem::monomial(self.params, c.invert()?, Key { v: [0; MAX_V], u: -key.u });
        // self = lead · (1 + eps)
        let normalized = &lead_inv * self;
        let eps = &normalized - &CoeffElem::one(self.params);
        let mut sum = CoeffElem::one(self.params);
        let mut term = CoeffElem::one(self.params);
        let limit = 4 * (self.params.precision + self.params.vdeg) as usize + 64;
        for _ in 0..limit {
            term = -(&term * &eps);
            if term.is_zero() {
                let mut out = &sum * &lead_inv;
                out.truncated |= self.truncated;
                return Ok(out);
            }
            sum = &sum + &term;
        }
        Err(Error::Precision(format!("geometric series for the inverse of {self} did not terminate")))
    }

    /// Re-expresses the value under different truncation parameters.
    pub fn with_params(&self, params: CoeffParams) -> Self {
        let raw: Vec<_> = self
            .terms
            .iter()
            .filter(|(k, _)| {
                k.vdeg() <= params.vdeg
                    && (0..params.num_v()).all(|i| k.v[i] == 0 || !params.is_killed(i + 1))
            })
            .map(|(k, c)| (*k, *c))
            .collect();
        Self::from_unsorted(params, raw, self.truncated)
    }

    /// `Some(d)` when every term has internal degree `d`; zero is homogeneous of every degree.
    pub fn homogeneous_degree(&self) -> Option<Option<i64>> {
        let mut degs = self.terms.iter().map(|(k, _)| self.params.degree_of(k));
        let first = match degs.next() {
            None => return Some(None),
            Some(d) => d,
        };
        degs.all(|d| d == first).then_some(Some(first))
    }

    pub fn is_homogeneous(&self) -> bool {
        self.homogeneous_degree().is_some()
    }
}

impl PartialEq for CoeffElem {
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params && (self - other).is_zero()
    }
}

impl<'a> Add<&'a CoeffElem> for &'a CoeffElem {
    type Output = CoeffElem;
    fn add(self, rhs: &'a CoeffElem) -> CoeffElem {
        self.merge(rhs, false)
    }
}

impl<'a> Sub<&'a CoeffElem> for &'a CoeffElem {
    type Output = CoeffElem;
    fn sub(self, rhs: &'a CoeffElem) -> CoeffElem {
        self.merge(rhs, true)
    }
}

impl<'a> Mul<&'a CoeffElem> for &'a CoeffElem {
    type Output = CoeffElem;
    fn mul(self, rhs: &'a CoeffElem) -> CoeffElem {
        self.product(rhs)
    }
}

impl Neg for &CoeffElem {
    type Output = CoeffElem;
    fn neg(self) -> CoeffElem {
        let mut out = self.clone();
        for (_, c) in out.terms.iter_mut() {
            *c = c.neg();
        }
        out
    }
}

impl Neg for CoeffElem {
    type Output = CoeffElem;
    fn neg(self) -> CoeffElem {
        -&self
    }
}

impl fmt::Debug for CoeffElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for CoeffElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (k, c)) in self.terms.iter().enumerate() {
            if idx > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            if k.u != 0 {
                write!(f, "*u^{}", k.u)?;
            }
            for (i, &e) in k.v.iter().enumerate() {
                if e > 0 {
                    write!(f, "*v{}^{}", i + 1, e)?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(p: u32, n: u32) -> CoeffParams {
        CoeffParams::new(p, n, 16, 8).unwrap()
    }

    #[test]
    fn multiplicative_identity_and_laurent_unit() {
        let pr = params(2, 2);
        let a = &CoeffElem::v(pr, 1) + &CoeffElem::u_pow(pr, 3);
        assert_eq!(&a * &CoeffElem::one(pr), a);
        assert_eq!(&CoeffElem::u_pow(pr, 1) * &CoeffElem::u_pow(pr, -1), CoeffElem::one(pr));
    }

    #[test]
    fn v1_squared() {
        let pr = params(2, 2);
        let v1 = CoeffElem::v(pr, 1);
        let sq = &v1 * &v1;
        let mut key = Key::unit_u(0);
        key.v[0] = 2;
        assert_eq!(sq.num_terms(), 1);
        assert_eq!(sq.coefficient(&key).unit(), 1);
    }

    #[test]
    fn vdeg_cap_sets_truncation_flag() {
        let pr = CoeffParams::new(2, 2, 16, 2).unwrap();
        let v1 = CoeffElem::v(pr, 1);
        let cube = &(&v1 * &v1) * &v1;
        assert!(cube.is_zero());
        assert!(cube.truncated());
    }

    #[test]
    fn unit_detection() {
        let pr = params(3, 2);
        assert!(CoeffElem::u_pow(pr, 3).is_unit());
        assert!(!CoeffElem::from_int(pr, 3).is_unit());
        assert!((&CoeffElem::u_pow(pr, 1) + &CoeffElem::v(pr, 1)).is_unit());
        assert!(!(&CoeffElem::one(pr) + &CoeffElem::u_pow(pr, 1)).is_unit());
    }

    #[test]
    fn invert_u_plus_v1() {
        let pr = params(2, 2);
        let a = &CoeffElem::u_pow(pr, 1) + &CoeffElem::v(pr, 1);
        let inv = a.invert().unwrap();
        assert_eq!(&a * &inv, CoeffElem::one(pr));
        // leading terms u^{-1} - v1 u^{-2}
        let mut k = Key::unit_u(-2);
        k.v[0] = 1;
        assert_eq!(inv.coefficient(&Key::unit_u(-1)).unit(), 1);
        assert_eq!(inv.coefficient(&k), PadicScaled::from_i128(2, -1, 16));
    }

    #[test]
    fn invert_one_plus_v1_is_alternating() {
        let pr = params(3, 2);
        let a = &CoeffElem::one(pr) + &CoeffElem::v(pr, 1);
        let inv = a.invert().unwrap();
        for d in 0..=8u8 {
            let mut k = Key::unit_u(0);
            k.v[0] = d;
            let expect = if d % 2 == 0 { 1 } else { -1 };
            assert_eq!(inv.coefficient(&k), PadicScaled::from_i128(3, expect, 16));
        }
        assert_eq!(inv.num_terms(), 9);
    }

    #[test]
    fn invert_non_unit_fails() {
        let pr = params(2, 1);
        assert!(matches!(CoeffElem::from_int(pr, 2).invert(), Err(Error::NotUnit(_))));
    }

    #[test]
    fn vn_is_substituted() {
        let pr = params(2, 2);
        assert_eq!(CoeffElem::v(pr, 2), CoeffElem::u_pow(pr, 3));
        assert_eq!(CoeffElem::v(pr, 0), CoeffElem::from_int(pr, 2));
        assert!(CoeffElem::v(pr, 3).is_zero());
    }

    #[test]
    fn mismatch_is_an_error() {
        let a = CoeffElem::one(params(2, 2));
        let b = CoeffElem::one(params(3, 2));
        assert!(coeff_arith(&a, &b, CoeffOp::Add).is_err());
    }

    #[test]
    fn homogeneity() {
        let pr = params(2, 2);
        // |v1| = -2, |u| = -2
        let a = &CoeffElem::u_pow(pr, 1) + &CoeffElem::v(pr, 1);
        assert_eq!(a.homogeneous_degree(), Some(Some(-2)));
        let b = &CoeffElem::u_pow(pr, 2) + &CoeffElem::v(pr, 1);
        assert!(!b.is_homogeneous());
        assert_eq!((&a * &a).homogeneous_degree(), Some(Some(-4)));
    }

    fn arb_unit(pr: CoeffParams) -> impl Strategy<Value = CoeffElem> {
        (
            1i128..50,
            -3i32..4,
            proptest::collection::vec((-20i128..20, -3i32..3, 0u8..4), 0..5),
        )
            .prop_map(move |(c, u, rest)| {
                let c = if c % pr.p as i128 == 0 { c + 1 } else { c };
                let mut a = CoeffElem::from_int(pr, c).mul_u(u);
                for (x, du, dv) in rest {
                    let mut key = Key::unit_u(u + du);
                    key.v[0] = dv;
                    // pure u-terms must lie in the maximal ideal
                    let x = if dv == 0 { x * pr.p as i128 } else { x };
                    let t = CoeffElem::monomial(pr, PadicScaled::from_i128(pr.p, x, pr.precision), key);
                    a = &a + &t;
                }
                a
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn inverse_times_unit_is_one(a in arb_unit(CoeffParams::new(3, 2, 12, 6).unwrap())) {
            prop_assert!(a.is_unit());
            let inv = a.invert().unwrap();
            prop_assert_eq!(&a * &inv, CoeffElem::one(a.params()));
        }
    }
}
