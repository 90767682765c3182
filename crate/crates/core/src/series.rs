//! Truncated power series over the coefficient ring.
//!
//! [`YSeries`] is dense in one variable and keeps every coefficient up to its
//! order `M`, zeros included. [`MultiSeries`] is sparse in `r` variables with
//! per-variable caps and an optional cap on total degree.

use std::collections::BTreeMap;

use smallvec::SmallVec;

use crate::coeff::{CoeffElem, CoeffParams};
use crate::error::{Error, Result};

/// A commutative algebra over the coefficient ring, given as a context that
/// knows how to combine its elements. Formal group law evaluation is written
/// against this trait so it runs unchanged on series and on cohomology rings.
pub trait Algebra {
    type Elem: Clone;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn scale(&self, a: &Self::Elem, c: &CoeffElem) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn params(&self) -> CoeffParams;
}

/// Operation selector for [`ser_arith`] and [`multi_arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesOp {
    Add,
    Mul,
}

/// A power series `Σ_{i ≤ M} c_i y^i`.
#[derive(Clone)]
pub struct YSeries {
    params: CoeffParams,
    coeffs: Vec<CoeffElem>,
    truncated: bool,
}

/// Equality of values; the truncation flag is ignored.
impl PartialEq for YSeries {
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params && self.coeffs == other.coeffs
    }
}

pub fn ser_arith(a: &YSeries, b: &YSeries, op: SeriesOp) -> Result<YSeries> {
    if a.params != b.params || a.order() != b.order() {
        return Err(Error::ParamMismatch(format!(
            "series of order {} and {} over {:?} / {:?}",
            a.order(),
            b.order(),
            a.params,
            b.params
        )));
    }
    Ok(match op {
        SeriesOp::Add => a.add(b),
        SeriesOp::Mul => a.mul(b),
    })
}

impl YSeries {
    pub fn zero(params: CoeffParams, order: usize) -> Self {
        YSeries { params, coeffs: vec![CoeffElem::zero(params); order + 1], truncated: false }
    }

    pub fn one(params: CoeffParams, order: usize) -> Self {
        Self::monomial(CoeffElem::one(params), 0, order)
    }

    /// The series `y`.
    pub fn y(params: CoeffParams, order: usize) -> Self {
        Self::monomial(CoeffElem::one(params), 1, order)
    }

    /// `c · y^k`, which is zero with the truncation flag set when `k > order`.
    pub fn monomial(c: CoeffElem, k: usize, order: usize) -> Self {
        let mut s = Self::zero(c.params(), order);
        if k <= order {
            s.coeffs[k] = c;
        } else {
            s.truncated = !c.is_zero();
        }
        s
    }

    /// Builds a series of order `coeffs.len() - 1`.
    pub fn from_coeffs(params: CoeffParams, coeffs: Vec<CoeffElem>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least a constant term");
        YSeries { params, coeffs, truncated: false }
    }

    pub fn params(&self) -> CoeffParams {
        self.params
    }

    /// The truncation order `M`.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, i: usize) -> &CoeffElem {
        &self.coeffs[i]
    }

    pub fn coeffs(&self) -> &[CoeffElem] {
        &self.coeffs
    }

    pub fn set_coeff(&mut self, i: usize, c: CoeffElem) {
        self.coeffs[i] = c;
    }

    pub fn truncated(&self) -> bool {
        self.truncated || self.coeffs.iter().any(CoeffElem::truncated)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(CoeffElem::is_zero)
    }

    /// Index of the lowest nonzero coefficient.
    pub fn low_degree(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    /// Index of the highest nonzero coefficient.
    pub fn high_degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero())
    }

    /// Re-truncates (or zero-pads) to order `m`. Padding asserts that the
    /// higher coefficients are zero, so use it only for polynomials.
    pub fn with_order(&self, m: usize) -> Self {
        let mut coeffs: Vec<CoeffElem> = self.coeffs.iter().take(m + 1).cloned().collect();
        let dropped = self.coeffs.iter().skip(m + 1).any(|c| !c.is_zero());
        coeffs.resize(m + 1, CoeffElem::zero(self.params));
        YSeries { params: self.params, coeffs, truncated: self.truncated || dropped }
    }

    pub fn with_params(&self, params: CoeffParams) -> Self {
        YSeries {
            params,
            coeffs: self.coeffs.iter().map(|c| c.with_params(params)).collect(),
            truncated: self.truncated,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let m = self.order().min(other.order());
        let coeffs = (0..=m).map(|i| &self.coeffs[i] + &other.coeffs[i]).collect();
        YSeries { params: self.params, coeffs, truncated: self.truncated || other.truncated }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let m = self.order().min(other.order());
        let coeffs = (0..=m).map(|i| &self.coeffs[i] - &other.coeffs[i]).collect();
        YSeries { params: self.params, coeffs, truncated: self.truncated || other.truncated }
    }

    pub fn neg(&self) -> Self {
        YSeries {
            params: self.params,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            truncated: self.truncated,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let m = self.order().min(other.order());
        let mut coeffs = vec![CoeffElem::zero(self.params); m + 1];
        let mut dropped = false;
        let hi_a = self.high_degree();
        let hi_b = other.high_degree();
        if let (Some(ha), Some(hb)) = (hi_a, hi_b) {
            for i in 0..=ha.min(m) {
                let a = &self.coeffs[i];
                if a.is_zero() {
                    continue;
                }
                if i + hb > m {
                    dropped = true;
                }
                for j in 0..=hb.min(m - i) {
                    let b = &other.coeffs[j];
                    if !b.is_zero() {
                        coeffs[i + j] = &coeffs[i + j] + &(a * b);
                    }
                }
            }
        }
        YSeries {
            params: self.params,
            coeffs,
            truncated: self.truncated || other.truncated || dropped,
        }
    }

    pub fn scale(&self, c: &CoeffElem) -> Self {
        YSeries {
            params: self.params,
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
            truncated: self.truncated,
        }
    }

    /// Multiplies by `y^k`, keeping the order.
    pub fn shift_up(&self, k: usize) -> Self {
        let m = self.order();
        let mut out = Self::zero(self.params, m);
        for i in 0..=m {
            if i + k <= m {
                out.coeffs[i + k] = self.coeffs[i].clone();
            } else if !self.coeffs[i].is_zero() {
                out.truncated = true;
            }
        }
        out.truncated |= self.truncated;
        out
    }

    /// Drops the first `k` coefficients: `Σ c_{i+k} y^i`, of order `M - k`.
    pub fn shift_down(&self, k: usize) -> Self {
        let coeffs = self.coeffs[k.min(self.order())..].to_vec();
        let coeffs = if k > self.order() { vec![CoeffElem::zero(self.params)] } else { coeffs };
        YSeries { params: self.params, coeffs, truncated: self.truncated }
    }

    /// Exact division by `y^k`; fails when a dropped coefficient is nonzero.
    pub fn div_y_pow(&self, k: usize) -> Result<Self> {
        if self.coeffs.iter().take(k).any(|c| !c.is_zero()) {
            return Err(Error::Unsupported(format!("series is not divisible by y^{k}")));
        }
        Ok(self.shift_down(k))
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.params, self.order());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        let m = self.order();
        let mut coeffs: Vec<CoeffElem> = (1..=m)
            .map(|i| &self.coeffs[i] * &CoeffElem::from_int(self.params, i as i128))
            .collect();
        coeffs.push(CoeffElem::zero(self.params));
        YSeries { params: self.params, coeffs, truncated: self.truncated }
    }

    /// `f(g(y))`; `g` must have zero constant term.
    pub fn compose(&self, g: &YSeries) -> Result<YSeries> {
        if !g.coeffs[0].is_zero() {
            return Err(Error::NonZeroConstant);
        }
        let m = self.order().min(g.order());
        let g = g.with_order(m);
        let top = self.high_degree().unwrap_or(0).min(m);
        let mut acc = YSeries::monomial(self.coeffs[top].clone(), 0, m);
        for i in (0..top).rev() {
            acc = acc.mul(&g);
            acc.coeffs[0] = &acc.coeffs[0] + &self.coeffs[i];
        }
        acc.truncated = false;
        Ok(acc)
    }

    /// Multiplicative inverse of a series whose constant term is a unit.
    pub fn invert_unit(&self) -> Result<YSeries> {
        let c0inv = self.coeffs[0].invert()?;
        let m = self.order();
        let mut out: Vec<CoeffElem> = Vec::with_capacity(m + 1);
        out.push(c0inv.clone());
        let neg = -&c0inv;
        for k in 1..=m {
            let mut s = CoeffElem::zero(self.params);
            for i in 1..=k {
                let a = &self.coeffs[i];
                if !a.is_zero() && !out[k - i].is_zero() {
                    s = &s + &(a * &out[k - i]);
                }
            }
            out.push(&s * &neg);
        }
        Ok(YSeries { params: self.params, coeffs: out, truncated: false })
    }

    /// Compositional inverse of a series `a_1 y + a_2 y^2 + …` with `a_1` a unit.
    pub fn reversion(&self) -> Result<YSeries> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::NonZeroConstant);
        }
        let m = self.order();
        let a1inv = self.coeffs.get(1).ok_or_else(|| Error::NotUnit("0".into()))?.invert()?;
        // Newton: r <- r - (f(r) - y) / f'(r), doubling the correct order each step
        let mut r = YSeries::monomial(a1inv, 1, m);
        let fp = self.derivative();
        let y = YSeries::y(self.params, m);
        let mut good = 1usize;
        while good < m {
            good = (2 * good + 1).min(m);
            let resid = self.compose(&r)?.sub(&y);
            let slope = fp.compose(&r)?.invert_unit()?;
            r = r.sub(&resid.mul(&slope));
        }
        Ok(r)
    }

    /// Weierstrass degree: the first index whose coefficient is a unit.
    pub fn weierstrass_degree(&self) -> Option<usize> {
        self.coeffs.iter().position(CoeffElem::is_unit)
    }
}

impl std::fmt::Debug for YSeries {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self}")
    }
}

impl std::fmt::Display for YSeries {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})*y^{i}")?;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(y^{})", self.order() + 1)
    }
}

/// Algebra context for [`YSeries`] of a fixed order.
#[derive(Clone, Copy, Debug)]
pub struct YSeriesAlg {
    pub params: CoeffParams,
    pub order: usize,
}

impl Algebra for YSeriesAlg {
    type Elem = YSeries;
    fn params(&self) -> CoeffParams {
        self.params
    }
    fn zero(&self) -> YSeries {
        YSeries::zero(self.params, self.order)
    }
    fn one(&self) -> YSeries {
        YSeries::one(self.params, self.order)
    }
    fn add(&self, a: &YSeries, b: &YSeries) -> YSeries {
        a.add(b)
    }
    fn mul(&self, a: &YSeries, b: &YSeries) -> YSeries {
        a.mul(b)
    }
    fn scale(&self, a: &YSeries, c: &CoeffElem) -> YSeries {
        a.scale(c)
    }
    fn is_zero(&self, a: &YSeries) -> bool {
        a.is_zero()
    }
}

/// Output of [`weierstrass_prepare`]: `f = unit · poly`.
#[derive(Clone, Debug)]
pub struct Weierstrass {
    /// The unit factor, reliable to order `M - d`.
    pub unit: YSeries,
    /// Monic polynomial of degree `d`, coefficients `poly[0..=d]` with `poly[d] = 1`.
    pub poly: Vec<CoeffElem>,
    pub degree: usize,
    /// Number of division iterations until the fixpoint.
    pub iterations: usize,
}

impl Weierstrass {
    /// The polynomial as a series of the given order.
    pub fn poly_series(&self, order: usize) -> YSeries {
        let params = self.poly[0].params();
        let mut coeffs = self.poly.clone();
        coeffs.resize(order.max(self.degree) + 1, CoeffElem::zero(params));
        YSeries::from_coeffs(params, coeffs).with_order(order)
    }
}

/// Factors `f = U · g` with `U` a unit series and `g` monic of degree `d`
/// whose lower coefficients lie in the maximal ideal.
///
/// Writing `f = P + y^d V` with `deg P < d`, the multiplier `q = U^{-1}`
/// satisfies `q = V^{-1}(1 - (qP) div y^d)`, a contraction in the maximal
/// ideal; iterate to the fixpoint and read off `g = y^d + (qP) mod y^d`.
pub fn weierstrass_prepare(f: &YSeries) -> Result<Weierstrass> {
    let params = f.params();
    if f.coeffs.iter().any(|c| c.min_valuation().is_some_and(|v| v < 0)) {
        return Err(Error::Unsupported("Weierstrass preparation of a non-integral series".into()));
    }
    let m = f.order();
    let d = f.weierstrass_degree().ok_or(Error::NoWeierstrassDegree(m))?;
    let l = m - d;
    let p_low = YSeries::from_coeffs(params, f.coeffs[..d].to_vec()).with_order(l.max(d));
    let vinv = f.shift_down(d).invert_unit()?;
    let one = YSeries::one(params, l);
    let cap = 2 * (params.precision + params.vdeg) as usize + 16;
    let mut q = vinv.clone();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let qp = q.with_order(l + d).mul(&p_low.with_order(l + d));
        let hi = qp.shift_down(d).with_order(l);
        let next = vinv.mul(&one.sub(&hi));
        if next == q {
            break;
        }
        if iterations > cap {
            return Err(Error::Precision(format!(
                "Weierstrass division did not reach a fixpoint in {cap} iterations"
            )));
        }
        q = next;
    }
    let qp = q.with_order(d).mul(&p_low.with_order(d));
    let mut poly: Vec<CoeffElem> = qp.coeffs[..d].to_vec();
    poly.push(CoeffElem::one(params));
    let unit = q.invert_unit()?;
    Ok(Weierstrass { unit, poly, degree: d, iterations })
}

/// Reduces a polynomial (given as a series) modulo the monic `poly`, returning
/// the `d` remainder coefficients.
pub fn poly_rem(f: &YSeries, poly: &[CoeffElem]) -> Vec<CoeffElem> {
    let d = poly.len() - 1;
    let mut work: Vec<CoeffElem> = f.coeffs.clone();
    for top in (d..work.len()).rev() {
        let t = std::mem::replace(&mut work[top], CoeffElem::zero(f.params()));
        if t.is_zero() {
            continue;
        }
        for i in 0..d {
            if !poly[i].is_zero() {
                work[top - d + i] = &work[top - d + i] - &(&t * &poly[i]);
            }
        }
    }
    work.truncate(d);
    work.resize(d, CoeffElem::zero(f.params()));
    work
}

/// Least `j` with `y^j = 0` in `E[y]/(poly)`, searching up to `limit`.
pub fn nilpotency_index(poly: &[CoeffElem], limit: usize) -> Option<usize> {
    let d = poly.len() - 1;
    let params = poly[0].params();
    if d == 0 {
        return Some(0);
    }
    let mut cur = vec![CoeffElem::zero(params); d];
    cur[0] = CoeffElem::one(params);
    for j in 1..=limit {
        let t = cur.pop().expect("nonempty");
        cur.insert(0, CoeffElem::zero(params));
        if !t.is_zero() {
            for i in 0..d {
                if !poly[i].is_zero() {
                    cur[i] = &cur[i] - &(&t * &poly[i]);
                }
            }
        }
        if cur.iter().all(CoeffElem::is_zero) {
            return Some(j);
        }
    }
    None
}

/// Exponent tuple of a [`MultiSeries`] monomial.
pub type Exps = SmallVec<[u16; 4]>;

/// A sparse power series in `r` variables.
#[derive(Clone, Debug)]
pub struct MultiSeries {
    params: CoeffParams,
    caps: Vec<u16>,
    total_cap: Option<u32>,
    terms: BTreeMap<Exps, CoeffElem>,
    truncated: bool,
}

impl PartialEq for MultiSeries {
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params && self.terms == other.terms
    }
}

pub fn multi_arith(a: &MultiSeries, b: &MultiSeries, op: SeriesOp) -> Result<MultiSeries> {
    if a.params != b.params || a.caps != b.caps || a.total_cap != b.total_cap {
        return Err(Error::ParamMismatch("multivariate series with different truncations".into()));
    }
    Ok(match op {
        SeriesOp::Add => a.add(b),
        SeriesOp::Mul => a.mul(b),
    })
}

impl MultiSeries {
    pub fn zero(params: CoeffParams, caps: Vec<u16>, total_cap: Option<u32>) -> Self {
        MultiSeries { params, caps, total_cap, terms: BTreeMap::new(), truncated: false }
    }

    pub fn one(params: CoeffParams, caps: Vec<u16>, total_cap: Option<u32>) -> Self {
        let r = caps.len();
        let mut s = Self::zero(params, caps, total_cap);
        s.insert(SmallVec::from_elem(0, r), CoeffElem::one(params));
        s
    }

    /// The `i`-th variable.
    pub fn var(params: CoeffParams, caps: Vec<u16>, total_cap: Option<u32>, i: usize) -> Self {
        let r = caps.len();
        let mut s = Self::zero(params, caps, total_cap);
        let mut e: Exps = SmallVec::from_elem(0, r);
        e[i] = 1;
        s.insert(e, CoeffElem::one(params));
        s
    }

    pub fn params(&self) -> CoeffParams {
        self.params
    }

    pub fn caps(&self) -> &[u16] {
        &self.caps
    }

    pub fn total_cap(&self) -> Option<u32> {
        self.total_cap
    }

    pub fn num_vars(&self) -> usize {
        self.caps.len()
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exps, &CoeffElem)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, e: &[u16]) -> CoeffElem {
        self.terms.get(e).cloned().unwrap_or_else(|| CoeffElem::zero(self.params))
    }

    fn admits(&self, e: &[u16]) -> bool {
        e.iter().zip(&self.caps).all(|(a, c)| a <= c)
            && self.total_cap.is_none_or(|t| e.iter().map(|&a| a as u32).sum::<u32>() <= t)
    }

    /// Adds `c · x^e` into the series, discarding it when out of range.
    pub fn insert(&mut self, e: Exps, c: CoeffElem) {
        if c.is_zero() {
            return;
        }
        if !self.admits(&e) {
            self.truncated = true;
            return;
        }
        match self.terms.get_mut(&e) {
            Some(x) => {
                let s = &*x + &c;
                if s.is_zero() {
                    self.terms.remove(&e);
                } else {
                    *x = s;
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.truncated |= other.truncated;
        for (e, c) in &other.terms {
            out.insert(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -&*c;
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.params, self.caps.clone(), self.total_cap);
        out.truncated = self.truncated || other.truncated;
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Exps = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                if !out.admits(&e) {
                    out.truncated = true;
                    continue;
                }
                out.insert(e, ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &CoeffElem) -> Self {
        let mut out = Self::zero(self.params, self.caps.clone(), self.total_cap);
        out.truncated = self.truncated;
        for (e, x) in &self.terms {
            out.insert(e.clone(), x * c);
        }
        out
    }

    /// Whether every monomial has positive total degree.
    pub fn has_zero_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().any(|&a| a > 0))
    }
}

/// Algebra context for [`MultiSeries`] with fixed truncation.
#[derive(Clone, Debug)]
pub struct MultiAlg {
    pub params: CoeffParams,
    pub caps: Vec<u16>,
    pub total_cap: Option<u32>,
}

impl Algebra for MultiAlg {
    type Elem = MultiSeries;
    fn params(&self) -> CoeffParams {
        self.params
    }
    fn zero(&self) -> MultiSeries {
        MultiSeries::zero(self.params, self.caps.clone(), self.total_cap)
    }
    fn one(&self) -> MultiSeries {
        MultiSeries::one(self.params, self.caps.clone(), self.total_cap)
    }
    fn add(&self, a: &MultiSeries, b: &MultiSeries) -> MultiSeries {
        a.add(b)
    }
    fn mul(&self, a: &MultiSeries, b: &MultiSeries) -> MultiSeries {
        a.mul(b)
    }
    fn scale(&self, a: &MultiSeries, c: &CoeffElem) -> MultiSeries {
        a.scale(c)
    }
    fn is_zero(&self, a: &MultiSeries) -> bool {
        a.is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pr() -> CoeffParams {
        CoeffParams::new(2, 2, 16, 8).unwrap()
    }

    fn int_series(params: CoeffParams, xs: &[i128], order: usize) -> YSeries {
        let mut s = YSeries::zero(params, order);
        for (i, &x) in xs.iter().enumerate() {
            s.set_coeff(i, CoeffElem::from_int(params, x));
        }
        s
    }

    #[test]
    fn difference_of_squares() {
        let p = pr();
        let a = int_series(p, &[1, 1], 6);
        let b = int_series(p, &[1, -1], 6);
        assert_eq!(a.mul(&b), int_series(p, &[1, 0, -1], 6));
        assert!(a.mul(&YSeries::zero(p, 6)).is_zero());
    }

    #[test]
    fn top_degree_overflow_sets_flag() {
        let p = pr();
        let top = YSeries::monomial(CoeffElem::one(p), 6, 6);
        let prod = top.mul(&YSeries::y(p, 6));
        assert!(prod.is_zero());
        assert!(prod.truncated());
    }

    #[test]
    fn mismatched_orders_rejected() {
        let p = pr();
        assert!(ser_arith(&YSeries::one(p, 3), &YSeries::one(p, 4), SeriesOp::Add).is_err());
    }

    #[test]
    fn composition_examples() {
        let p = pr();
        let f = int_series(p, &[0, 1, 1], 8);
        assert_eq!(f.compose(&YSeries::y(p, 8)).unwrap(), f);
        let sq = int_series(p, &[0, 0, 1], 8);
        let two_y = int_series(p, &[0, 2], 8);
        assert_eq!(sq.compose(&two_y).unwrap(), int_series(p, &[0, 0, 4], 8));
        assert_eq!(f.compose(&f).unwrap(), int_series(p, &[0, 1, 2, 2, 1], 8));
        assert!(matches!(f.compose(&YSeries::one(p, 8)), Err(Error::NonZeroConstant)));
    }

    #[test]
    fn unit_inverse_examples() {
        let p = pr();
        let one_minus_y = int_series(p, &[1, -1], 10);
        assert_eq!(one_minus_y.invert_unit().unwrap(), int_series(p, &[1; 11], 10));
        let u_plus_y = &YSeries::monomial(CoeffElem::u_pow(p, 1), 0, 10).add(&YSeries::y(p, 10));
        let inv = u_plus_y.invert_unit().unwrap();
        assert_eq!(inv.mul(u_plus_y), YSeries::one(p, 10));
        assert_eq!(*inv.coeff(2), CoeffElem::u_pow(p, -3));
        assert!(int_series(p, &[2, 1], 4).invert_unit().is_err());
    }

    #[test]
    fn reversion_inverts_composition() {
        let p = CoeffParams::new(3, 1, 16, 0).unwrap();
        let f = int_series(p, &[0, 1, 3, -2, 5, 7], 12);
        let r = f.reversion().unwrap();
        assert_eq!(f.compose(&r).unwrap(), YSeries::y(p, 12));
        assert_eq!(r.compose(&f).unwrap(), YSeries::y(p, 12));
    }

    #[test]
    fn prepare_already_monic() {
        let p = pr();
        let f = int_series(p, &[2, 1], 10);
        let w = weierstrass_prepare(&f).unwrap();
        assert_eq!(w.degree, 1);
        assert_eq!(w.poly, vec![CoeffElem::from_int(p, 2), CoeffElem::one(p)]);
        assert_eq!(w.unit, YSeries::one(p, 9));
    }

    #[test]
    fn prepare_recomposes() {
        let p = pr();
        // 2 + v1 y + 4 y^2 + (1+v1) y^3 + y^5
        let v1 = CoeffElem::v(p, 1);
        let mut f = int_series(p, &[2, 0, 4, 1, 0, 1], 40);
        f.set_coeff(1, v1.clone());
        f.set_coeff(3, &CoeffElem::one(p) + &v1);
        let w = weierstrass_prepare(&f).unwrap();
        assert_eq!(w.degree, 3);
        let m = w.unit.order();
        let back = w.unit.mul(&w.poly_series(m));
        assert_eq!(back, f.with_order(m));
        assert!(w.poly[..3].iter().all(|c| !c.is_unit()));
    }

    #[test]
    fn no_weierstrass_degree() {
        let p = pr();
        let f = int_series(p, &[2, 4, 6], 5);
        assert!(matches!(weierstrass_prepare(&f), Err(Error::NoWeierstrassDegree(5))));
    }

    #[test]
    fn remainder_and_nilpotency() {
        let p = CoeffParams::new(2, 1, 3, 0).unwrap();
        // y^2 + 2 over Z/8: y^2 = -2, y^6 = -8 = 0
        let poly = vec![CoeffElem::from_int(p, 2), CoeffElem::zero(p), CoeffElem::one(p)];
        assert_eq!(nilpotency_index(&poly, 50), Some(6));
        let y4 = YSeries::monomial(CoeffElem::one(p), 4, 4);
        assert_eq!(poly_rem(&y4, &poly), vec![CoeffElem::from_int(p, 4), CoeffElem::zero(p)]);
    }

    #[test]
    fn multiseries_caps() {
        let p = pr();
        let x = MultiSeries::var(p, vec![3, 3], Some(4), 0);
        let y = MultiSeries::var(p, vec![3, 3], Some(4), 1);
        let s = x.add(&y);
        let sq = s.mul(&s);
        assert_eq!(sq.coefficient(&[1, 1]), CoeffElem::from_int(p, 2));
        let big = sq.mul(&sq).mul(&s);
        assert!(big.truncated());
        assert!(big.is_zero());
        assert!(multi_arith(&x, &MultiSeries::one(p, vec![3], None), SeriesOp::Add).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn unit_series_inverse(xs in proptest::collection::vec(-50i128..50, 1..12), c0 in 0i128..40) {
            let p = CoeffParams::new(3, 2, 12, 4).unwrap();
            let mut s = int_series(p, &xs, 14);
            s.set_coeff(0, CoeffElem::from_int(p, 3 * c0 + 1));
            s.set_coeff(1, &CoeffElem::v(p, 1) + s.coeff(1));
            let inv = s.invert_unit().unwrap();
            prop_assert_eq!(inv.mul(&s), YSeries::one(p, 14));
        }

    }

    proptest! {
        // non-homogeneous inputs spread over many u-exponents, so keep these small
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn weierstrass_recomposition(xs in proptest::collection::vec(-20i128..20, 6), d in 1usize..5) {
            let p = CoeffParams::new(2, 2, 10, 4).unwrap();
            let mut s = int_series(p, &[], 18);
            for (i, x) in xs.iter().enumerate() {
                let c = if i < d { CoeffElem::from_int(p, 2 * x) } else { CoeffElem::from_int(p, *x) };
                let c = if i < d && i % 2 == 1 { &c + &CoeffElem::v(p, 1) } else { c };
                s.set_coeff(i, c);
            }
            s.set_coeff(d, CoeffElem::u_pow(p, 1));
            let w = weierstrass_prepare(&s).unwrap();
            prop_assert_eq!(w.degree, d);
            let m = w.unit.order();
            prop_assert_eq!(w.unit.mul(&w.poly_series(m)), s.with_order(m));
        }
    }
}
