//! Localizations `e^{-1}R` as fractions over a fixed class `e`, and the
//! ring-level checks that certain classes become units there.
//!
//! At a finite truncation every class in the augmentation ideal is nilpotent,
//! so the literal localization of the truncated ring is zero. Equality is the
//! saturated relation `e^{m+t} x = e^{m+s} z`, accepted only while `e^{m+min(s,t)}`
//! is still nonzero; once that power dies the verdict is indeterminate.

use std::sync::Mutex;

use serde::Serialize;

use crate::coeff::{CoeffElem, CoeffParams};
use crate::error::{Error, Result};
use crate::euler::{euler_classes, quotient_by_x, Character};
use crate::golden::FglCache;
use crate::groupcoh::{inv_mod_p, pullback, verify_free_over_subring, AbelianPGroup, CohRing, FreenessReport, GroupHom, RingElem};
use crate::series::{nilpotency_index, poly_rem, weierstrass_prepare, Algebra, YSeries};

/// `num / e^t`.
#[derive(Clone, Debug)]
pub struct Fraction<E> {
    pub num: E,
    pub t: u32,
}

/// Outcome of a saturated equality test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Equality {
    /// `e^{m+t} x = e^{m+s} z` with `e^{m+min(s,t)} ≠ 0`.
    Equal { m: u32 },
    Indeterminate { searched: u32, reason: String },
}

impl Equality {
    pub fn is_equal(&self) -> bool {
        matches!(self, Equality::Equal { .. })
    }

    pub fn m(&self) -> Option<u32> {
        match self {
            Equality::Equal { m } => Some(*m),
            _ => None,
        }
    }
}

/// The ring `e^{-1}R` for one inverted class.
pub struct Localization<'a, A: Algebra> {
    alg: &'a A,
    e: A::Elem,
    bound: u32,
    powers: Mutex<Vec<A::Elem>>,
}

pub fn frac_arith<A: Algebra>(
    loc: &Localization<'_, A>,
    a: &Fraction<A::Elem>,
    b: &Fraction<A::Elem>,
    op: crate::series::SeriesOp,
) -> Fraction<A::Elem>
where
    A::Elem: PartialEq,
{
    match op {
        crate::series::SeriesOp::Add => loc.add(a, b),
        crate::series::SeriesOp::Mul => loc.mul(a, b),
    }
}

impl<'a, A: Algebra> Localization<'a, A>
where
    A::Elem: PartialEq,
{
    /// `bound` caps the saturation exponent `m`.
    pub fn new(alg: &'a A, e: A::Elem, bound: u32) -> Self {
        let one = alg.one();
        Localization { alg, e, bound, powers: Mutex::new(vec![one]) }
    }

    pub fn bound(&self) -> u32 {
        self.bound
    }

    pub fn e(&self) -> &A::Elem {
        &self.e
    }

    pub fn e_pow(&self, k: u32) -> A::Elem {
        let mut p = self.powers.lock().expect("power cache");
        while p.len() <= k as usize {
            let next = self.alg.mul(p.last().expect("nonempty"), &self.e);
            p.push(next);
        }
        p[k as usize].clone()
    }

    pub fn from_elem(&self, x: A::Elem) -> Fraction<A::Elem> {
        Fraction { num: x, t: 0 }
    }

    pub fn one(&self) -> Fraction<A::Elem> {
        self.from_elem(self.alg.one())
    }

    pub fn add(&self, a: &Fraction<A::Elem>, b: &Fraction<A::Elem>) -> Fraction<A::Elem> {
        let t = a.t.max(b.t);
        let x = self.alg.mul(&a.num, &self.e_pow(t - a.t));
        let y = self.alg.mul(&b.num, &self.e_pow(t - b.t));
        Fraction { num: self.alg.add(&x, &y), t }
    }

    pub fn mul(&self, a: &Fraction<A::Elem>, b: &Fraction<A::Elem>) -> Fraction<A::Elem> {
        Fraction { num: self.alg.mul(&a.num, &b.num), t: a.t + b.t }
    }

    pub fn neg(&self, a: &Fraction<A::Elem>) -> Fraction<A::Elem> {
        let minus = CoeffElem::from_int(self.alg.params(), -1);
        Fraction { num: self.alg.scale(&a.num, &minus), t: a.t }
    }

    /// Least `m ≤ bound` certifying `a = b`.
    pub fn equal(&self, a: &Fraction<A::Elem>, b: &Fraction<A::Elem>) -> Equality {
        let minus = CoeffElem::from_int(self.alg.params(), -1);
        let lhs = self.alg.mul(&a.num, &self.e_pow(b.t));
        let rhs = self.alg.mul(&b.num, &self.e_pow(a.t));
        let mut diff = self.alg.add(&lhs, &self.alg.scale(&rhs, &minus));
        let base = a.t.min(b.t);
        for m in 0..=self.bound {
            if self.alg.is_zero(&self.e_pow(m + base)) {
                return Equality::Indeterminate {
                    searched: m,
                    reason: format!("e^{} vanishes at this truncation", m + base),
                };
            }
            if self.alg.is_zero(&diff) {
                return Equality::Equal { m };
            }
            diff = self.alg.mul(&diff, &self.e);
        }
        Equality::Indeterminate { searched: self.bound, reason: "saturation bound reached".into() }
    }
}

/// `E[y]/(g)` for a monic polynomial `g`; elements are coefficient vectors.
#[derive(Clone, Debug)]
pub struct PolyQuotient {
    params: CoeffParams,
    poly: Vec<CoeffElem>,
}

impl PolyQuotient {
    pub fn new(poly: Vec<CoeffElem>) -> Result<Self> {
        let params = poly.last().ok_or_else(|| Error::Config("empty polynomial".into()))?.params();
        if poly.last() != Some(&CoeffElem::one(params)) {
            return Err(Error::Config("quotient polynomial must be monic".into()));
        }
        Ok(PolyQuotient { params, poly })
    }

    pub fn degree(&self) -> usize {
        self.poly.len() - 1
    }

    pub fn poly(&self) -> &[CoeffElem] {
        &self.poly
    }

    pub fn y(&self) -> Vec<CoeffElem> {
        let mut v = Algebra::zero(self);
        if self.degree() > 1 {
            v[1] = CoeffElem::one(self.params);
        } else {
            // y = -g_0 when g is linear
            v[0] = -&self.poly[0];
        }
        v
    }

    pub fn from_series(&self, s: &YSeries) -> Vec<CoeffElem> {
        poly_rem(s, &self.poly)
    }

    fn reduce(&self, mut raw: Vec<CoeffElem>) -> Vec<CoeffElem> {
        let d = self.degree();
        for top in (d..raw.len()).rev() {
            let t = std::mem::replace(&mut raw[top], CoeffElem::zero(self.params));
            if t.is_zero() {
                continue;
            }
            for j in 0..d {
                if !self.poly[j].is_zero() {
                    raw[top - d + j] = &raw[top - d + j] - &(&t * &self.poly[j]);
                }
            }
        }
        raw.truncate(d);
        raw.resize(d, CoeffElem::zero(self.params));
        raw
    }

    /// Determinant of multiplication by `y`: `(-1)^d g(0)`.
    pub fn det_of_y(&self) -> CoeffElem {
        let g0 = self.poly[0].clone();
        if self.degree().is_multiple_of(2) {
            g0
        } else {
            -&g0
        }
    }
}

impl Algebra for PolyQuotient {
    type Elem = Vec<CoeffElem>;
    fn params(&self) -> CoeffParams {
        self.params
    }
    fn zero(&self) -> Vec<CoeffElem> {
        vec![CoeffElem::zero(self.params); self.degree()]
    }
    fn one(&self) -> Vec<CoeffElem> {
        let mut v = Algebra::zero(self);
        v[0] = CoeffElem::one(self.params);
        v
    }
    fn add(&self, a: &Vec<CoeffElem>, b: &Vec<CoeffElem>) -> Vec<CoeffElem> {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }
    fn mul(&self, a: &Vec<CoeffElem>, b: &Vec<CoeffElem>) -> Vec<CoeffElem> {
        let d = self.degree();
        let mut raw = vec![CoeffElem::zero(self.params); 2 * d.max(1)];
        for (i, x) in a.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            for (j, y) in b.iter().enumerate().filter(|(_, y)| !y.is_zero()) {
                raw[i + j] = &raw[i + j] + &(x * y);
            }
        }
        self.reduce(raw)
    }
    fn scale(&self, a: &Vec<CoeffElem>, c: &CoeffElem) -> Vec<CoeffElem> {
        a.iter().map(|x| x * c).collect()
    }
    fn is_zero(&self, a: &Vec<CoeffElem>) -> bool {
        a.iter().all(CoeffElem::is_zero)
    }
}

fn loss_of(target: u32, elems: &[&RingElem]) -> i64 {
    let have = elems.iter().filter_map(|e| e.min_abs_precision()).min();
    have.map_or(0, |h| target as i64 - h)
}

fn loss_of_coeffs(target: u32, cs: &[CoeffElem]) -> i64 {
    cs.iter().filter_map(CoeffElem::min_abs_precision).min().map_or(0, |h| target as i64 - h)
}

// ---------------------------------------------------------------------------
// Euler class against reduced Euler class

#[derive(Clone, Debug, Serialize)]
pub struct OrbitWitness {
    pub beta: Vec<u32>,
    pub alpha: Vec<u32>,
    pub m: u32,
    pub s: u32,
    /// `e(β) = e(α) · h_m(e(α))` with `h_m(x) = [m](x)/x`.
    pub alpha_divides_beta: bool,
    /// `e(α) = e(β) · h_s(e(β))`.
    pub beta_divides_alpha: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct EulerLocalizationReport {
    pub group: String,
    pub witnesses: Vec<OrbitWitness>,
    /// `e(A) = ē(A)^{p-1} · U` with `U = Π h_m(e(α))`.
    pub factorization_holds: bool,
    /// `U` is a unit with verified inverse.
    pub unit_inverted: bool,
    /// `ē · (ē^{p-2} U / e) = 1` in `e^{-1}R`.
    pub reduced_inverted_in_total: Equality,
    /// `e · (U^{-1} / ē^{p-1}) = 1` in `ē^{-1}R`.
    pub total_inverted_in_reduced: Equality,
    pub total_equals_reduced: bool,
}

impl EulerLocalizationReport {
    pub fn holds(&self) -> bool {
        self.witnesses.iter().all(|w| w.alpha_divides_beta && w.beta_divides_alpha)
            && self.factorization_holds
            && self.unit_inverted
            && self.reduced_inverted_in_total.is_equal()
            && self.total_inverted_in_reduced.is_equal()
    }
}

/// Certificates that inverting `e(A)` and inverting `ē(A)` give the same ring.
pub fn verify_euler_localizations_agree(ring: &CohRing) -> Result<EulerLocalizationReport> {
    let p = ring.group().p();
    let classes = euler_classes(ring)?;
    let mut witnesses = Vec::new();
    let mut unit = ring.one();
    let mut h_cache: std::collections::BTreeMap<u32, Vec<CoeffElem>> = Default::default();
    let mut h = |k: u32| -> Result<Vec<CoeffElem>> {
        if let Some(v) = h_cache.get(&k) {
            return Ok(v.clone());
        }
        let v = quotient_by_x(ring, k as i64)?;
        h_cache.insert(k, v.clone());
        Ok(v)
    };
    for (beta, e_beta) in classes.characters.iter().zip(&classes.per_character) {
        let (alpha, m) = beta.orbit_rep();
        if m == 1 {
            continue;
        }
        let e_alpha = classes.of(&alpha).expect("representatives are nontrivial");
        let s = inv_mod_p(m as u64, p as u64) as u32;
        let hm = ring.eval_poly(&h(m)?, e_alpha);
        let hs = ring.eval_poly(&h(s)?, e_beta);
        unit = ring.mul(&unit, &hm);
        witnesses.push(OrbitWitness {
            beta: beta.values().to_vec(),
            alpha: alpha.values().to_vec(),
            m,
            s,
            alpha_divides_beta: ring.mul(e_alpha, &hm) == *e_beta,
            beta_divides_alpha: ring.mul(e_beta, &hs) == *e_alpha,
        });
    }
    let reduced_pow = ring.pow(&classes.reduced, p - 1);
    let factorization_holds = ring.mul(&reduced_pow, &unit) == classes.total;
    let unit_inv = ring.invert_unit(&unit)?;
    let unit_inverted = ring.mul(&unit, &unit_inv) == ring.one();
    let bound = ring.rank() as u32;

    let loc_e = Localization::new(ring, classes.total.clone(), bound);
    let cand = Fraction { num: ring.mul(&ring.pow(&classes.reduced, p - 2), &unit), t: 1 };
    let prod = loc_e.mul(&loc_e.from_elem(classes.reduced.clone()), &cand);
    let reduced_inverted_in_total = loc_e.equal(&prod, &loc_e.one());

    let loc_r = Localization::new(ring, classes.reduced.clone(), bound);
    let cand = Fraction { num: unit_inv, t: p - 1 };
    let prod = loc_r.mul(&loc_r.from_elem(classes.total.clone()), &cand);
    let total_inverted_in_reduced = loc_r.equal(&prod, &loc_r.one());

    Ok(EulerLocalizationReport {
        group: ring.group().to_string(),
        witnesses,
        factorization_holds,
        unit_inverted,
        reduced_inverted_in_total,
        total_inverted_in_reduced,
        total_equals_reduced: classes.total == classes.reduced,
    })
}

// ---------------------------------------------------------------------------
// v_{n-1} becomes a unit after inverting y, modulo I = (p, v_1, …, v_{n-2})

#[derive(Clone, Debug, Serialize)]
pub struct PeriodicityReport {
    pub p: u32,
    pub n: u32,
    pub precision: u32,
    pub vdeg: u32,
    /// `[p](y) ≡ F(v_{n-1} y^{p^{n-1}}, v_n y^{p^n})` mod I, through this y-degree.
    pub two_term_identity: bool,
    pub series_order: usize,
    /// `v_n = u^{p^n - 1}`.
    pub top_generator_is_u_power: bool,
    /// `ε(0) ≡ 1` mod I, reading "monic" as unit constant term.
    pub epsilon_constant_is_one: bool,
    pub epsilon_leading: Vec<String>,
    /// The inverse of `v_{n-1}` is `num / y^t`.
    pub inverse_denominator_exponent: u32,
    pub inverse_check: Equality,
    /// Least `j` with `y^j = 0` in the truncated quotient ring.
    pub y_nilpotency: usize,
    pub quotient_rank: usize,
    pub precision_loss: i64,
    pub note: String,
}

impl PeriodicityReport {
    pub fn holds(&self) -> bool {
        self.two_term_identity
            && self.top_generator_is_u_power
            && self.epsilon_constant_is_one
            && self.inverse_check.is_equal()
    }
}

fn vanishes_mod_p(c: &CoeffElem) -> bool {
    c.is_zero() || c.min_valuation().is_some_and(|v| v >= 1)
}

/// For `n ≥ 2`: the p-series collapses to two terms mod I, the resulting unit
/// series ε has constant term 1, and `v_{n-1}` is invertible once `y` is.
pub fn verify_periodicity(p: u32, n: u32, precision: u32, vdeg: u32, cache: &FglCache) -> Result<PeriodicityReport> {
    if n < 2 {
        return Err(Error::Config("this check needs height at least 2; use the n = 1 variant".into()));
    }
    let full = CoeffParams::new(p, n, precision, vdeg)?.kill_below(n as usize - 2);
    let modp = full.with_precision(1);
    let cp = AbelianPGroup::cyclic(p, 1)?;
    let ring = CohRing::build(&cp, modp, cache, 0)?;
    let pn = (p as usize).pow(n);
    let pn1 = pn / p as usize;
    let order = (2 * pn + pn1).max(pn + ring.certificate().ideal_degree + 1);
    let fgl = cache.get(full, order)?;
    let order = fgl.degree();

    // (1) two-term identity modulo p
    let lhs = fgl.m_series(p as i64);
    let a = YSeries::monomial(CoeffElem::v(full, n as usize - 1), pn1, order);
    let b = YSeries::monomial(CoeffElem::v(full, n as usize), pn, order);
    let rhs = fgl.formal_sum_series(&[a, b.clone()])?;
    let diff = lhs.sub(&rhs);
    let two_term_identity = diff.coeffs().iter().all(vanishes_mod_p);
    let top_generator_is_u_power = CoeffElem::v(full, n as usize) == CoeffElem::u_pow(full, pn as i32 - 1);

    // (2) [-1](v_n y^{p^n}) = -v_n y^{p^n} ε(y)
    let iota = fgl.m_series(-1);
    let iz = iota.compose(&b)?;
    let minus_vn_inv = -&CoeffElem::v(full, n as usize).invert()?;
    let eps = iz.div_y_pow(pn)?.scale(&minus_vn_inv);
    let epsilon_constant_is_one = vanishes_mod_p(&(eps.coeff(0) - &CoeffElem::one(full)));
    let epsilon_leading = eps.coeffs().iter().take(6).map(|c| c.to_string()).collect();

    // (3) v_{n-1} · (-u^{-(p^n-1)} ε^{-1}(y)) / y^{p^n - p^{n-1}} = 1 after inverting y
    let eps_bar = eps.with_params(modp);
    let eps_inv = eps_bar.invert_unit()?;
    let coef = -&CoeffElem::u_pow(modp, -(pn as i32 - 1));
    let num = ring.scale(&ring.from_factor_series(0, &eps_inv), &coef);
    let t = (pn - pn1) as u32;
    let loc = Localization::new(&ring, ring.gen(0), ring.rank() as u32);
    let v = loc.from_elem(ring.constant(CoeffElem::v(modp, n as usize - 1)));
    let prod = loc.mul(&v, &Fraction { num, t });
    let inverse_check = loc.equal(&prod, &loc.one());

    let precision_loss = loss_of_coeffs(precision, eps.coeffs()).max(loss_of_coeffs(precision, lhs.coeffs()));
    Ok(PeriodicityReport {
        p,
        n,
        precision,
        vdeg,
        two_term_identity,
        series_order: order,
        top_generator_is_u_power,
        epsilon_constant_is_one,
        epsilon_leading,
        inverse_denominator_exponent: t,
        inverse_check,
        y_nilpotency: ring.factors()[0].nilpotency,
        quotient_rank: ring.rank(),
        precision_loss,
        note: "the monic series ε is read as a series with constant term 1".into(),
    })
}

// ---------------------------------------------------------------------------
// Height one: p becomes a unit after inverting y

#[derive(Clone, Debug, Serialize)]
pub struct HeightOneReport {
    pub p: u32,
    pub precision: u32,
    /// `F(py, v_1 y^p) = [p](y)` as series.
    pub rewriting_identity: bool,
    /// `p y = [-1](v_1 y^p)` in `E^*(BC_p)`.
    pub relation_in_ring: bool,
    pub weierstrass_degree: usize,
    /// `φ/y` lies in the ideal of the polynomial, and `y` is nilpotent modulo it.
    pub certified: bool,
    pub basis: Vec<String>,
    /// Multiplication by `y` has determinant `p · unit`.
    pub y_nonzerodivisor: bool,
    pub det_valuation: Option<i32>,
    pub inverse_denominator_exponent: u32,
    pub inverse_check: Equality,
    pub series_order: usize,
    pub precision_loss: i64,
}

impl HeightOneReport {
    pub fn holds(&self) -> bool {
        self.rewriting_identity
            && self.relation_in_ring
            && self.weierstrass_degree + 1 == self.p as usize
            && self.certified
            && self.y_nonzerodivisor
            && self.inverse_check.is_equal()
    }
}

pub fn verify_height_one(p: u32, precision: u32, cache: &FglCache) -> Result<HeightOneReport> {
    let params = CoeffParams::new(p, 1, precision, 0)?;
    let mut order = (p as usize - 1) * precision as usize + 2 * p as usize + 2;
    for _ in 0..6 {
        let fgl = cache.get(params, order)?;
        let t = fgl.degree();
        let py = YSeries::monomial(CoeffElem::from_int(params, p as i128), 1, t);
        let v1yp = YSeries::monomial(CoeffElem::v(params, 1), p as usize, t);
        let rewriting_identity = fgl.formal_sum_series(&[py.clone(), v1yp.clone()])? == *fgl.m_series(p as i64);
        let iz = fgl.m_series(-1).compose(&v1yp)?;

        let cp = AbelianPGroup::cyclic(p, 1)?;
        let ring = CohRing::build(&cp, params, cache, t)?;
        let lhs = ring.scale(&ring.gen(0), &CoeffElem::from_int(params, p as i128));
        let rhs = ring.m_series_at(-1, &ring.monomial(&[p as usize], CoeffElem::v(params, 1)));
        let relation_in_ring = lhs == rhs;

        let phi = py.sub(&iz);
        let q = phi.div_y_pow(1)?;
        let w = weierstrass_prepare(&q)?;
        let idx = nilpotency_index(&w.poly, 4 * t + 64);
        let fits = idx.is_some_and(|i| i <= q.order() + 1);
        let rem_zero = poly_rem(&q, &w.poly).iter().all(CoeffElem::is_zero);
        // ε from [-1](v_1 y^p) = -v_1 y^p ε(y), known through order t - p
        let eps = iz.div_y_pow(p as usize)?.scale(&-&CoeffElem::v(params, 1).invert()?);
        let need = idx.unwrap_or(usize::MAX);
        if !fits || !rem_zero || eps.order() + 1 < need {
            order = need.saturating_add(p as usize + 2).max(t + t / 2);
            continue;
        }
        let quot = PolyQuotient::new(w.poly.clone())?;
        let det = quot.det_of_y();
        let det_valuation = det.min_valuation();
        let p_inv = crate::coeff::PadicScaled::from_parts(p, -1, 1, precision)?;
        let y_nonzerodivisor = det_valuation == Some(1) && det.scale(&p_inv).is_unit();
        let eps_inv = eps.invert_unit()?;
        let num = quot.scale(&quot.from_series(&eps_inv), &-&CoeffElem::v(params, 1).invert()?);
        let loc = Localization::new(&quot, quot.y(), quot.degree() as u32);
        let pf = loc.from_elem(quot.scale(&Algebra::one(&quot), &CoeffElem::from_int(params, p as i128)));
        let tden = p - 1;
        let prod = loc.mul(&pf, &Fraction { num: num.clone(), t: tden });
        let inverse_check = loc.equal(&prod, &loc.one());
        let basis = (0..w.degree).map(|i| if i == 0 { "1".to_string() } else if i == 1 { "y".into() } else { format!("y^{i}") }).collect();
        let precision_loss = loss_of_coeffs(precision, &num).max(loss_of_coeffs(precision, &w.poly));
        return Ok(HeightOneReport {
            p,
            precision,
            rewriting_identity,
            relation_in_ring,
            weierstrass_degree: w.degree,
            certified: fits && rem_zero,
            basis,
            y_nonzerodivisor,
            det_valuation,
            inverse_denominator_exponent: tden,
            inverse_check,
            series_order: t,
            precision_loss,
        });
    }
    Err(Error::Truncation(format!("no certified height-one model at p={p}")))
}

// ---------------------------------------------------------------------------
// Non-nilpotence of e(C_p^r)

#[derive(Clone, Debug, Serialize)]
pub struct PowerReport {
    pub p: u32,
    pub r: usize,
    pub n: u32,
    pub powers_checked: u32,
    /// `e^t ≠ 0` for `t = 1..=powers_checked`.
    pub nonzero: Vec<bool>,
    /// Least `t` with `e^t = 0`, searched up to the truncation's reach.
    pub nilpotency: Option<u32>,
    pub search_limit: u32,
    pub rank: usize,
}

impl PowerReport {
    pub fn all_nonzero(&self) -> bool {
        self.nonzero.iter().all(|&b| b)
    }
}

/// Powers of the total Euler class of `C_p^r`, given its ring.
pub fn euler_powers(ring: &CohRing, powers: u32) -> Result<PowerReport> {
    let g = ring.group();
    if g.exps().iter().any(|&k| k != 1) {
        return Err(Error::InvalidGroup("powers are checked for elementary abelian groups".into()));
    }
    let e = euler_classes(ring)?.total;
    let limit = (ring.certificate().ideal_degree as u32 + 2).max(powers);
    let mut nonzero = Vec::new();
    let mut cur = ring.one();
    let mut nilpotency = None;
    for t in 1..=limit {
        cur = ring.mul(&cur, &e);
        let nz = !cur.is_zero();
        if t <= powers {
            nonzero.push(nz);
        }
        if !nz {
            nilpotency = Some(t);
            break;
        }
    }
    while nonzero.len() < powers as usize {
        nonzero.push(false);
    }
    Ok(PowerReport {
        p: g.p(),
        r: g.rank(),
        n: ring.params().n,
        powers_checked: powers,
        nonzero,
        nilpotency,
        search_limit: limit,
        rank: ring.rank(),
    })
}

// ---------------------------------------------------------------------------
// Pulling back along the maximal elementary quotient

#[derive(Clone, Debug, Serialize)]
pub struct ElementaryQuotientReport {
    pub group: String,
    pub quotient: String,
    /// Composition with q is a bijection on characters.
    pub character_bijection: bool,
    pub characters: usize,
    /// `q^*(e(C_p^r)) = e(A)`.
    pub euler_pullback: bool,
    pub freeness: FreenessReport,
}

impl ElementaryQuotientReport {
    pub fn holds(&self) -> bool {
        self.character_bijection && self.euler_pullback && self.freeness.holds()
    }
}

pub fn verify_elementary_quotient(ring: &CohRing, cache: &FglCache) -> Result<ElementaryQuotientReport> {
    let a = ring.group();
    let q = GroupHom::elementary_quotient(a);
    let ring_e = CohRing::build(q.target(), ring.params(), cache, ring.fgl().degree())?;
    let mut pulled: Vec<Character> = Character::all_nontrivial(q.target())
        .iter()
        .map(|c| c.compose(&q))
        .collect::<Result<_>>()?;
    let n_before = pulled.len();
    pulled.sort();
    pulled.dedup();
    let mut ours = Character::all_nontrivial(a);
    ours.sort();
    let character_bijection = pulled.len() == n_before && pulled == ours;
    let map = pullback(&q, &ring_e, ring)?;
    let e_bar = euler_classes(&ring_e)?.total;
    let e_a = euler_classes(ring)?.total;
    let euler_pullback = map.apply(&e_bar) == e_a;
    let freeness = verify_free_over_subring(&q, ring, &ring_e)?;
    Ok(ElementaryQuotientReport {
        group: a.to_string(),
        quotient: q.target().to_string(),
        character_bijection,
        characters: n_before,
        euler_pullback,
        freeness,
    })
}

pub(crate) fn ring_loss(ring: &CohRing, elems: &[&RingElem]) -> i64 {
    loss_of(ring.params().precision, elems)
}
