//! The p-typical formal group law with Araki generators.
//!
//! The logarithm `Σ ℓ_k y^{p^k}` satisfies `ℓ_k (p - p^{p^k}) = Σ_{i<k} ℓ_i v_{k-i}^{p^i}`
//! with `ℓ_0 = 1`, and `F(x, y) = exp(log x + log y)`. Logarithm and exponential
//! have negative valuations, so both are computed at a raised working precision
//! and `F`, which is integral, is truncated back afterwards.
//!
//! `F` is stored to total degree `T`: coefficients `c[a][b]` with `a + b ≤ T`.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock, RwLock};

use rayon::prelude::*;

use crate::coeff::{max_digits, CoeffElem, CoeffParams, PadicScaled};
use crate::error::{Error, Result};
use crate::series::{Algebra, YSeries, YSeriesAlg};

/// Extra working digits beyond the predicted loss.
const SLACK: u32 = 3;

pub struct FormalGroupLaw {
    params: CoeffParams,
    degree: usize,
    working_precision: u32,
    coeffs: Vec<Vec<CoeffElem>>,
    log: YSeries,
    exp: OnceLock<YSeries>,
    m_cache: RwLock<BTreeMap<i64, Arc<YSeries>>>,
    min_abs_precision: i64,
}

impl std::fmt::Debug for FormalGroupLaw {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FormalGroupLaw")
            .field("params", &self.params)
            .field("degree", &self.degree)
            .field("working_precision", &self.working_precision)
            .finish()
    }
}

/// Working precision predicted to absorb the denominators up to degree `t`.
///
/// The exponential loses about `t / (p^n - 1)` digits on its pure `u`-part
/// (where `v_n = u^{p^n-1}` first enters at degree `p^n`); the v-terms up to
/// degree `D` and the logarithm add a little more.
pub fn predicted_working_precision(params: CoeffParams, t: usize) -> u32 {
    let p = params.p;
    let t = t as u32;
    let top = p.saturating_pow(params.n) - 1;
    let exp_loss = t.div_ceil(top);
    let v_loss = if params.n > 1 { params.vdeg } else { 0 };
    let log_loss = {
        let (mut k, mut q) = (0u32, 1u32);
        while q.saturating_mul(p) <= t.max(1) {
            q *= p;
            k += 1;
        }
        k
    };
    params.precision + exp_loss + v_loss + log_loss + SLACK
}

/// Largest FGL degree whose predicted working precision fits the residue capacity.
pub fn max_degree_for(params: CoeffParams) -> usize {
    let cap = max_digits(params.p);
    let mut t = 2;
    while predicted_working_precision(params, t + 1) <= cap && t < 4096 {
        t += 1;
    }
    t
}

/// The logarithm coefficients `ℓ_0 … ℓ_K` with `p^K ≤ t`, under `params`.
pub fn araki_log_coeffs(params: CoeffParams, t: usize) -> Result<Vec<CoeffElem>> {
    let p = params.p;
    let mut ell = vec![CoeffElem::one(params)];
    let mut k = 1u32;
    while (p as u128).pow(k) <= t as u128 {
        let mut s = CoeffElem::zero(params);
        for i in 0..k {
            let vi = CoeffElem::v(params, (k - i) as usize).pow(p.pow(i));
            s = &s + &(&ell[i as usize] * &vi);
        }
        // p - p^{p^k} = p (1 - p^{p^k - 1})
        let ppk = p.pow(k) - 1;
        let one = PadicScaled::one(p, params.precision);
        let tail = if ppk as u64 >= params.precision as u64 + 64 {
            one
        } else {
            one.sub(&one.shift(ppk as i32))
        };
        let denom = tail.shift(1).invert()?;
        ell.push(s.scale(&denom));
        k += 1;
    }
    Ok(ell)
}

fn log_series(params: CoeffParams, t: usize) -> Result<YSeries> {
    let ell = araki_log_coeffs(params, t)?;
    let mut s = YSeries::zero(params, t);
    let mut q = 1usize;
    for c in ell {
        s.set_coeff(q, c);
        q *= params.p as usize;
    }
    Ok(s)
}

fn binomial_rows(params: CoeffParams, top: usize) -> Vec<Vec<PadicScaled>> {
    let p = params.p;
    let w = params.precision as i64;
    let mut rows: Vec<Vec<PadicScaled>> = vec![vec![PadicScaled::one(p, params.precision)]];
    for j in 1..=top {
        let prev = &rows[j - 1];
        let mut row = Vec::with_capacity(j + 1);
        row.push(PadicScaled::one(p, params.precision));
        for i in 1..j {
            row.push(prev[i - 1].add(&prev[i]).truncate_abs(w));
        }
        row.push(PadicScaled::one(p, params.precision));
        rows.push(row);
    }
    rows
}

fn min_opt(a: i64, b: Option<i64>) -> i64 {
    b.map_or(a, |b| a.min(b))
}

impl FormalGroupLaw {
    /// Builds `F` to total degree `degree`, choosing the working precision automatically.
    pub fn build(params: CoeffParams, degree: usize) -> Result<Self> {
        if degree < 2 {
            return Err(Error::Config("formal group law degree must be at least 2".into()));
        }
        let cap = max_digits(params.p);
        let predicted = predicted_working_precision(params, degree);
        if predicted > cap + 8 {
            return Err(Error::Precision(format!(
                "degree {degree} at p={} needs about {predicted} working digits, above the capacity {cap}; \
                 at precision {} the largest feasible degree is {}",
                params.p,
                params.precision,
                max_degree_for(params)
            )));
        }
        // the prediction may overshoot slightly; the measured floor is what counts
        let mut w = predicted.min(cap);
        loop {
            let f = Self::build_at(params, degree, w)?;
            if f.min_abs_precision >= params.precision as i64 {
                return Ok(f);
            }
            if w == cap {
                return Err(Error::Precision(format!(
                    "only {} of {} digits of F are reliable at the maximal working precision {cap}; \
                     lower the precision to {} or the degree to {}",
                    f.min_abs_precision.max(0),
                    params.precision,
                    f.min_abs_precision.max(1),
                    max_degree_for(params)
                )));
            }
            w = (w + 8).min(cap);
        }
    }

    /// Builds at an explicit working precision without the reliability retry.
    pub fn build_at(params: CoeffParams, degree: usize, working: u32) -> Result<Self> {
        let t = degree;
        let wp = params.with_precision(working);
        let log = log_series(wp, t)?;
        let exp = log.reversion()?;

        let mut powers = Vec::with_capacity(t + 1);
        powers.push(YSeries::one(wp, t));
        for i in 1..=t {
            let next = powers[i - 1].mul(&log);
            powers.push(next);
        }
        let binom = binomial_rows(wp, t);
        // mid[i][k] = e_{i+k} C(i+k, i)
        let mid: Vec<Vec<CoeffElem>> = (0..=t)
            .map(|i| (0..=t - i).map(|k| exp.coeff(i + k).scale(&binom[i + k][i])).collect())
            .collect();

        let rows: Vec<(Vec<CoeffElem>, i64)> = (0..=t)
            .into_par_iter()
            .map(|a| {
                let mut floor = i64::MAX;
                let x: Vec<CoeffElem> = (0..=t - a)
                    .map(|k| {
                        let mut s = CoeffElem::zero(wp);
                        for i in 0..=a {
                            let l = powers[i].coeff(a);
                            let m = &mid[i][k];
                            if l.is_zero() || m.is_zero() {
                                continue;
                            }
                            let term = l * m;
                            floor = min_opt(floor, term.min_abs_precision());
                            s = &s + &term;
                        }
                        s
                    })
                    .collect();
                let row = (0..=t - a)
                    .map(|b| {
                        let mut s = CoeffElem::zero(wp);
                        for (k, xk) in x.iter().enumerate().take(b + 1) {
                            let l = powers[k].coeff(b);
                            if l.is_zero() || xk.is_zero() {
                                continue;
                            }
                            let term = xk * l;
                            floor = min_opt(floor, term.min_abs_precision());
                            s = &s + &term;
                        }
                        floor = min_opt(floor, s.min_abs_precision());
                        s.with_params(params)
                    })
                    .collect();
                (row, floor)
            })
            .collect();

        let min_abs_precision = rows.iter().map(|r| r.1).min().unwrap_or(i64::MAX);
        let coeffs: Vec<Vec<CoeffElem>> = rows.into_iter().map(|r| r.0).collect();
        for (a, row) in coeffs.iter().enumerate() {
            for (b, c) in row.iter().enumerate() {
                if c.min_valuation().is_some_and(|v| v < 0) {
                    return Err(Error::Precision(format!(
                        "coefficient of x^{a} y^{b} is not integral: {c}"
                    )));
                }
            }
        }
        let f = FormalGroupLaw {
            params,
            degree,
            working_precision: working,
            coeffs,
            log,
            exp: OnceLock::new(),
            m_cache: RwLock::new(BTreeMap::new()),
            min_abs_precision,
        };
        let _ = f.exp.set(exp);
        Ok(f)
    }

    /// Reassembles a law from stored coefficients (e.g. a cache file).
    pub fn from_coefficients(params: CoeffParams, coeffs: Vec<Vec<CoeffElem>>) -> Result<Self> {
        let degree = coeffs.len().checked_sub(1).ok_or_else(|| Error::Config("empty coefficient table".into()))?;
        for (a, row) in coeffs.iter().enumerate() {
            if row.len() != degree - a + 1 {
                return Err(Error::Config(format!("row {a} of the coefficient table has the wrong length")));
            }
        }
        let working = predicted_working_precision(params, degree).min(max_digits(params.p));
        let log = log_series(params.with_precision(working), degree)?;
        Ok(FormalGroupLaw {
            params,
            degree,
            working_precision: working,
            coeffs,
            log,
            exp: OnceLock::new(),
            m_cache: RwLock::new(BTreeMap::new()),
            min_abs_precision: params.precision as i64,
        })
    }

    pub fn params(&self) -> CoeffParams {
        self.params
    }

    /// Total-degree truncation `T`.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn working_precision(&self) -> u32 {
        self.working_precision
    }

    /// Digits lost between the working precision and the least reliable coefficient.
    pub fn precision_loss(&self) -> i64 {
        self.working_precision as i64 - self.min_abs_precision.min(self.working_precision as i64)
    }

    /// Coefficient of `x^a y^b`; zero beyond the truncation.
    pub fn coefficient(&self, a: usize, b: usize) -> CoeffElem {
        self.coeffs
            .get(a)
            .and_then(|row| row.get(b))
            .cloned()
            .unwrap_or_else(|| CoeffElem::zero(self.params))
    }

    pub fn coefficients(&self) -> &[Vec<CoeffElem>] {
        &self.coeffs
    }

    /// The logarithm at working precision.
    pub fn log(&self) -> &YSeries {
        &self.log
    }

    /// The exponential at working precision.
    pub fn exp(&self) -> &YSeries {
        self.exp.get_or_init(|| self.log.reversion().expect("logarithm has unit linear term"))
    }

    fn series_alg(&self) -> YSeriesAlg {
        YSeriesAlg { params: self.params, order: self.degree }
    }

    /// `F(a, b)` in any algebra where monomials of total degree above `T` in `a, b` vanish.
    pub fn eval<A: Algebra>(&self, alg: &A, a: &A::Elem, b: &A::Elem) -> A::Elem {
        eval_table(alg, &self.coeffs, a, b)
    }

    /// Left-associated formal sum; the empty sum is zero.
    pub fn formal_sum<A: Algebra>(&self, alg: &A, terms: &[A::Elem]) -> A::Elem {
        let mut it = terms.iter();
        let Some(first) = it.next() else {
            return alg.zero();
        };
        let mut acc = first.clone();
        for t in it {
            if alg.is_zero(t) {
                continue;
            }
            acc = if alg.is_zero(&acc) { t.clone() } else { self.eval(alg, &acc, t) };
        }
        acc
    }

    /// Formal sum of y-series, checking that constant terms vanish.
    pub fn formal_sum_series(&self, terms: &[YSeries]) -> Result<YSeries> {
        if terms.iter().any(|t| !t.coeff(0).is_zero()) {
            return Err(Error::NonZeroConstant);
        }
        let alg = self.series_alg();
        let terms: Vec<YSeries> = terms.iter().map(|t| t.with_order(self.degree)).collect();
        Ok(self.formal_sum(&alg, &terms))
    }

    fn cached(&self, m: i64) -> Option<Arc<YSeries>> {
        self.m_cache.read().expect("cache lock").get(&m).cloned()
    }

    fn store(&self, m: i64, s: YSeries) -> Arc<YSeries> {
        let s = Arc::new(s);
        self.m_cache.write().expect("cache lock").entry(m).or_insert_with(|| s.clone()).clone()
    }

    /// The m-series `[m](y)` to order `T`.
    pub fn m_series(&self, m: i64) -> Arc<YSeries> {
        if let Some(s) = self.cached(m) {
            return s;
        }
        let t = self.degree;
        let alg = self.series_alg();
        let s = match m {
            0 => YSeries::zero(self.params, t),
            1 => YSeries::y(self.params, t),
            -1 => self.inverse_series(),
            m if m < 0 => {
                let iota = self.m_series(-1);
                iota.compose(&self.m_series(-m)).expect("m-series has zero constant term")
            }
            m => {
                let half = self.m_series(m / 2);
                let double = self.eval(&alg, &half, &half);
                if m % 2 == 1 {
                    self.eval(&alg, &double, &YSeries::y(self.params, t))
                } else {
                    double
                }
            }
        };
        self.store(m, s)
    }

    /// `[-1](y)` by Newton iteration on `F(y, ι) = 0`, using `∂F/∂y(y, ι)` as the unit slope.
    fn inverse_series(&self) -> YSeries {
        let t = self.degree;
        let alg = self.series_alg();
        let y = YSeries::y(self.params, t);
        let partial: Vec<Vec<CoeffElem>> = self
            .coeffs
            .iter()
            .map(|row| {
                let mut d: Vec<CoeffElem> = row
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(b, c)| c * &CoeffElem::from_int(self.params, b as i128))
                    .collect();
                if d.is_empty() {
                    d.push(CoeffElem::zero(self.params));
                }
                d
            })
            .collect();
        // Newton doubles the correct order, so work at order 2, 4, 8, … up to T
        let mut iota = y.neg();
        let mut order = 1usize;
        let mut settled = 0;
        while settled < 2 {
            order = (2 * order).min(t);
            let alg = YSeriesAlg { params: self.params, order };
            let y = y.with_order(order);
            let cur = iota.with_order(order);
            let r = eval_table(&alg, &truncate_table(&self.coeffs, order), &y, &cur);
            if order == t {
                settled += 1;
                if r.is_zero() {
                    iota = cur;
                    break;
                }
            }
            let slope = eval_table(&alg, &truncate_table(&partial, order), &y, &cur);
            let step = r.mul(&slope.invert_unit().expect("slope has constant term 1"));
            iota = cur.sub(&step);
        }
        debug_assert!(self.eval(&alg, &YSeries::y(self.params, t), &iota).is_zero());
        iota
    }

    /// `[p^k](y)`, the `k`-fold composite of the p-series.
    pub fn pk_series(&self, k: u32) -> Result<Arc<YSeries>> {
        let p = self.params.p as i64;
        let n = self.params.n;
        let need = (self.params.p as u128).pow(n * k);
        if need > self.degree as u128 {
            return Err(Error::Truncation(format!(
                "[p^{k}] needs y-degree {need} but F is truncated at {}",
                self.degree
            )));
        }
        let key = p.pow(k);
        if let Some(s) = self.cached(key) {
            return Ok(s);
        }
        let mut acc = YSeries::y(self.params, self.degree);
        let ps = self.m_series(p);
        for _ in 0..k {
            acc = ps.compose(&acc)?;
        }
        Ok(self.store(key, acc))
    }

    /// Checks `[p^k](y) ≡ u^{p^{nk}-1} y^{p^{nk}}` modulo `(p, v_1, …, v_{n-1}, y^{p^{nk}+1})`.
    pub fn check_congruence(&self, k: u32) -> Result<CongruenceReport> {
        let s = self.pk_series(k)?;
        let d = (self.params.p as usize).pow(self.params.n * k);
        let mut residual = Vec::new();
        for i in 0..=d {
            let red = s.coeff(i).reduce_mod_maximal()?;
            let expect: Vec<(i32, u32)> = if i == d { vec![(d as i32 - 1, 1)] } else { vec![] };
            if red != expect {
                residual.push((i, red));
            }
        }
        Ok(CongruenceReport { k, degree: d, residual })
    }

    /// The Araki sum `py +_F v_1 y^p +_F … +_F v_n y^{p^n}` to order `T`.
    pub fn araki_sum(&self) -> YSeries {
        let t = self.degree;
        let p = self.params.p as usize;
        let mut terms = Vec::new();
        let mut q = 1usize;
        for i in 0..=self.params.n as usize {
            if q > t {
                break;
            }
            terms.push(YSeries::monomial(CoeffElem::v(self.params, i), q, t));
            q *= p;
        }
        self.formal_sum(&self.series_alg(), &terms)
    }

    /// Unitality, commutativity, associativity and integrality to total degree `cap`.
    pub fn check_axioms(&self, cap: usize) -> AxiomReport {
        let cap = cap.min(self.degree);
        let params = self.params;
        let unital = (0..=cap).all(|a| {
            let expect = if a == 1 { CoeffElem::one(params) } else { CoeffElem::zero(params) };
            self.coefficient(a, 0) == expect && self.coefficient(0, a) == expect
        });
        let commutative =
            (0..=cap).all(|a| (0..=cap - a).all(|b| self.coefficient(a, b) == self.coefficient(b, a)));
        let integral = self
            .coeffs
            .iter()
            .flatten()
            .all(|c| c.min_valuation().is_none_or(|v| v >= 0));
        let associative = self.check_associativity(cap);
        AxiomReport { cap, unital, commutative, associative, integral }
    }

    /// Compares `F(F(x,y),z)` with `F(x,F(y,z))` coefficientwise. Both sides are
    /// read off the powers `F(s,t)^i` in two variables: the left side is
    /// `Σ c_{ij} F(x,y)^i z^j`, the right side `Σ c_{ij} x^i F(y,z)^j`.
    fn check_associativity(&self, cap: usize) -> bool {
        let params = self.params;
        let tri = |f: &dyn Fn(usize, usize) -> CoeffElem| -> Vec<Vec<CoeffElem>> {
            (0..=cap).map(|a| (0..=cap - a).map(|b| f(a, b)).collect()).collect()
        };
        let base = tri(&|a, b| self.coefficient(a, b));
        let mut powers = vec![tri(&|a, b| {
            if a == 0 && b == 0 {
                CoeffElem::one(params)
            } else {
                CoeffElem::zero(params)
            }
        })];
        for i in 1..=cap {
            let prev = &powers[i - 1];
            let next: Vec<Vec<CoeffElem>> = (0..=cap)
                .into_par_iter()
                .map(|a| {
                    (0..=cap - a)
                        .map(|b| {
                            let mut s = CoeffElem::zero(params);
                            for a1 in 0..=a {
                                for b1 in 0..=b {
                                    let x = &prev[a1][b1];
                                    let y = &base[a - a1][b - b1];
                                    if !x.is_zero() && !y.is_zero() {
                                        s = &s + &(x * y);
                                    }
                                }
                            }
                            s
                        })
                        .collect()
                })
                .collect();
            powers.push(next);
        }
        (0..=cap).into_par_iter().all(|a| {
            for b in 0..=cap - a {
                for c in 0..=cap - a - b {
                    // left: coefficient of x^a y^b z^c in Σ_i c_{i,c} F(x,y)^i
                    let mut left = CoeffElem::zero(params);
                    for (i, pw) in powers.iter().enumerate().take(a + b + 1) {
                        let k = self.coefficient(i, c);
                        if !k.is_zero() && !pw[a][b].is_zero() {
                            left = &left + &(&k * &pw[a][b]);
                        }
                    }
                    let mut right = CoeffElem::zero(params);
                    for (j, pw) in powers.iter().enumerate().take(b + c + 1) {
                        let k = self.coefficient(a, j);
                        if !k.is_zero() && !pw[b][c].is_zero() {
                            right = &right + &(&k * &pw[b][c]);
                        }
                    }
                    if left != right {
                        return false;
                    }
                }
            }
            true
        })
    }
}

fn truncate_table(table: &[Vec<CoeffElem>], order: usize) -> Vec<Vec<CoeffElem>> {
    table
        .iter()
        .take(order + 1)
        .enumerate()
        .map(|(a, row)| row.iter().take(order - a + 1).cloned().collect())
        .collect()
}

/// Evaluates `Σ c[i][j] a^i b^j` by Horner's rule in `a`.
pub fn eval_table<A: Algebra>(alg: &A, table: &[Vec<CoeffElem>], a: &A::Elem, b: &A::Elem) -> A::Elem {
    let width = table.iter().map(Vec::len).max().unwrap_or(0);
    let mut bpow: Vec<A::Elem> = Vec::with_capacity(width);
    bpow.push(alg.one());
    for j in 1..width {
        let next = alg.mul(&bpow[j - 1], b);
        let stop = alg.is_zero(&next);
        bpow.push(next);
        if stop {
            break;
        }
    }
    let row_value = |row: &Vec<CoeffElem>| -> A::Elem {
        let mut s = alg.zero();
        for (j, c) in row.iter().enumerate() {
            if j >= bpow.len() {
                break;
            }
            if !c.is_zero() && !alg.is_zero(&bpow[j]) {
                s = alg.add(&s, &alg.scale(&bpow[j], c));
            }
        }
        s
    };
    let mut acc = alg.zero();
    for row in table.iter().rev() {
        if !alg.is_zero(&acc) {
            acc = alg.mul(&acc, a);
        }
        acc = alg.add(&acc, &row_value(row));
    }
    acc
}

/// Result of [`FormalGroupLaw::check_congruence`].
#[derive(Clone, Debug, serde::Serialize)]
pub struct CongruenceReport {
    pub k: u32,
    pub degree: usize,
    /// Coefficients whose reduction disagrees, as `(y-degree, reduction)`.
    pub residual: Vec<(usize, Vec<(i32, u32)>)>,
}

impl CongruenceReport {
    pub fn holds(&self) -> bool {
        self.residual.is_empty()
    }
}

/// Result of [`FormalGroupLaw::check_axioms`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct AxiomReport {
    pub cap: usize,
    pub unital: bool,
    pub commutative: bool,
    pub associative: bool,
    pub integral: bool,
}

impl AxiomReport {
    pub fn holds(&self) -> bool {
        self.unital && self.commutative && self.associative && self.integral
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fgl(p: u32, n: u32, t: usize) -> FormalGroupLaw {
        FormalGroupLaw::build(CoeffParams::new(p, n, 16, 8).unwrap(), t).unwrap()
    }

    #[test]
    fn first_log_coefficient_at_two() {
        let params = CoeffParams::new(2, 1, 16, 0).unwrap();
        let ell = araki_log_coeffs(params, 4).unwrap();
        // ℓ_1 = v_1 / (2 - 4) = -u / 2
        let expect = CoeffElem::u_pow(params, 1).scale(&PadicScaled::from_ratio(2, -1, 2, 16).unwrap());
        assert_eq!(ell[1], expect);
    }

    #[test]
    fn cross_term_at_two_is_u() {
        let f = fgl(2, 1, 8);
        assert_eq!(f.coefficient(1, 1), CoeffElem::u_pow(f.params(), 1));
        assert_eq!(f.coefficient(1, 0), CoeffElem::one(f.params()));
    }

    #[test]
    fn no_cross_term_at_three() {
        for n in 1..=2 {
            let f = fgl(3, n, 8);
            assert!(f.coefficient(1, 1).is_zero());
            assert_eq!(f.coefficient(0, 1), CoeffElem::one(f.params()));
        }
    }

    #[test]
    fn inverse_series_low_terms() {
        let f = fgl(2, 1, 10);
        let iota = f.m_series(-1);
        let pr = f.params();
        assert_eq!(*iota.coeff(1), CoeffElem::from_int(pr, -1));
        assert_eq!(*iota.coeff(2), CoeffElem::u_pow(pr, 1));
        let alg = YSeriesAlg { params: pr, order: 10 };
        assert!(f.eval(&alg, &YSeries::y(pr, 10), &iota).is_zero());
    }

    #[test]
    fn doubling_matches_araki_sum_prefix() {
        let f = fgl(2, 1, 12);
        let pr = f.params();
        let two = f.m_series(2);
        let low = f
            .formal_sum_series(&[
                YSeries::monomial(CoeffElem::from_int(pr, 2), 1, 12),
                YSeries::monomial(CoeffElem::u_pow(pr, 1), 2, 12),
            ])
            .unwrap();
        assert_eq!(*two, low);
        assert_eq!(*two.coeff(3), CoeffElem::u_pow(pr, 2).scale(&PadicScaled::from_i128(2, 2, 16)));
    }

    #[test]
    fn log_exp_are_inverse() {
        let f = fgl(3, 2, 20);
        let y = YSeries::y(f.log().params(), 20);
        assert_eq!(f.log().compose(f.exp()).unwrap(), y);
        assert_eq!(f.exp().compose(f.log()).unwrap(), y);
    }

    #[test]
    fn m_series_linear_term_and_inverse() {
        let f = fgl(3, 1, 12);
        let pr = f.params();
        let alg = YSeriesAlg { params: pr, order: 12 };
        for m in -4i64..=5 {
            let s = f.m_series(m);
            assert_eq!(*s.coeff(1), CoeffElem::from_int(pr, m as i128));
            let neg = f.m_series(-m);
            assert!(f.eval(&alg, &s, &neg).is_zero(), "m={m}");
        }
    }

    #[test]
    fn composition_of_m_series() {
        let f = fgl(2, 2, 12);
        for a in [-3i64, 2, 3] {
            for b in [-2i64, 3, 5] {
                let lhs = f.m_series(a).compose(&f.m_series(b)).unwrap();
                assert_eq!(lhs, *f.m_series(a * b), "a={a} b={b}");
            }
        }
    }

    #[test]
    fn p_series_congruences() {
        let f = fgl(2, 1, 16);
        assert!(f.check_congruence(0).unwrap().holds());
        assert!(f.check_congruence(1).unwrap().holds());
        assert!(f.check_congruence(2).unwrap().holds());
        assert!(matches!(f.check_congruence(5), Err(Error::Truncation(_))));
    }

    #[test]
    fn araki_form_of_p_series() {
        for (p, n) in [(2, 1), (2, 2), (3, 1), (3, 2)] {
            let f = fgl(p, n, 20);
            assert_eq!(f.araki_sum(), *f.m_series(p as i64), "p={p} n={n}");
        }
    }

    #[test]
    fn axioms_small() {
        let f = fgl(2, 2, 12);
        let r = f.check_axioms(12);
        assert!(r.holds(), "{r:?}");
    }

    #[test]
    fn capacity_is_reported() {
        let params = CoeffParams::new(5, 1, 16, 0).unwrap();
        let err = FormalGroupLaw::build(params, 400).unwrap_err();
        assert!(matches!(err, Error::Precision(_)));
    }

    #[test]
    fn empty_formal_sum_is_zero() {
        let f = fgl(2, 1, 6);
        assert!(f.formal_sum_series(&[]).unwrap().is_zero());
        let y = YSeries::y(f.params(), 6);
        assert_eq!(f.formal_sum_series(std::slice::from_ref(&y)).unwrap(), y);
        assert_eq!(f.formal_sum_series(&[y.clone(), YSeries::zero(f.params(), 6)]).unwrap(), y);
        assert!(f.formal_sum_series(&[YSeries::one(f.params(), 6)]).is_err());
    }
}
