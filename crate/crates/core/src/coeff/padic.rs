//! Floating-precision p-adic scalars.
//!
//! A nonzero value is `p^valuation * unit` where `unit` is a residue modulo
//! `p^precision` coprime to `p`. Zero is a distinguished value rather than
//! valuation infinity, so every arithmetic operation is total.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;

use crate::error::{Error, Result};

/// Largest exponent `e` with `p^e < 2^127`, so sums of two residues fit in a `u128`.
pub fn max_digits(p: u32) -> u32 {
    let limit: u128 = 1 << 127;
    let mut e = 0;
    let mut acc: u128 = 1;
    while let Some(next) = acc.checked_mul(p as u128) {
        if next >= limit {
            break;
        }
        acc = next;
        e += 1;
    }
    e
}

#[inline]
pub(crate) fn pow_u128(p: u32, e: u32) -> u128 {
    if p == 2 {
        return 1u128 << e;
    }
    (p as u128).pow(e)
}

#[inline]
fn mulmod(a: u128, b: u128, m: u128, p: u32) -> u128 {
    if p == 2 {
        a.wrapping_mul(b) & (m - 1)
    } else if m <= u64::MAX as u128 {
        (a * b) % m
    } else {
        let r = (BigUint::from(a) * BigUint::from(b)) % BigUint::from(m);
        r.iter_u64_digits()
            .enumerate()
            .fold(0u128, |acc, (i, d)| acc | ((d as u128) << (64 * i)))
    }
}

fn modinv_unit(a: u128, p: u32, prec: u32) -> u128 {
    let m = pow_u128(p, prec);
    // inverse modulo p first, then Newton lifting x <- x(2 - a x)
    let a_p = (a % p as u128) as u64;
    let mut x: u128 = if p == 2 {
        1
    } else {
        let mut r: u64 = 1;
        let mut base = a_p;
        let mut e = p as u64 - 2;
        while e > 0 {
            if e & 1 == 1 {
                r = r * base % p as u64;
            }
            base = base * base % p as u64;
            e >>= 1;
        }
        r as u128
    };
    let mut known = 1u32;
    while known < prec {
        known = (known * 2).min(prec);
        let ax = mulmod(a % m, x, m, p);
        let two_minus = (2 + m - ax) % m;
        x = mulmod(x, two_minus, m, p);
    }
    x % m
}

/// A p-adic number at floating precision.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PadicScaled {
    p: u32,
    valuation: i32,
    /// Residue modulo `p^precision`; zero iff the value is the zero element.
    unit: u128,
    precision: u32,
}

impl PadicScaled {
    pub fn zero(p: u32) -> Self {
        PadicScaled { p, valuation: 0, unit: 0, precision: 0 }
    }

    pub fn one(p: u32, precision: u32) -> Self {
        Self::from_i128(p, 1, precision)
    }

    /// Builds `p^valuation * unit` from a residue that must be coprime to `p`.
    pub fn from_parts(p: u32, valuation: i32, unit: u128, precision: u32) -> Result<Self> {
        if precision == 0 || precision > max_digits(p) {
            return Err(Error::Precision(format!(
                "relative precision {precision} outside 1..={} for p={p}",
                max_digits(p)
            )));
        }
        let m = pow_u128(p, precision);
        let unit = unit % m;
        if unit.is_multiple_of(p as u128) {
            return Err(Error::Precision(format!("unit {unit} is divisible by {p}")));
        }
        Ok(PadicScaled { p, valuation, unit, precision })
    }

    pub fn from_i128(p: u32, x: i128, precision: u32) -> Self {
        if x == 0 {
            return Self::zero(p);
        }
        let mut mag = x.unsigned_abs();
        let mut v = 0;
        while mag.is_multiple_of(p as u128) {
            mag /= p as u128;
            v += 1;
        }
        let m = pow_u128(p, precision);
        let mut unit = mag % m;
        if x < 0 {
            unit = (m - unit) % m;
        }
        PadicScaled { p, valuation: v, unit, precision }
    }

    /// `num / den` as a p-adic number; `den` must be nonzero.
    pub fn from_ratio(p: u32, num: i128, den: i128, precision: u32) -> Result<Self> {
        let n = Self::from_i128(p, num, precision);
        let d = Self::from_i128(p, den, precision);
        Ok(n.mul(&d.invert()?))
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.unit == 0
    }

    /// Valuation; `None` for zero.
    pub fn valuation(&self) -> Option<i32> {
        (!self.is_zero()).then_some(self.valuation)
    }

    pub fn unit(&self) -> u128 {
        self.unit
    }

    /// Count of reliable digits of the unit part.
    pub fn known_precision(&self) -> u32 {
        self.precision
    }

    /// Exponent of the first unknown digit, `valuation + precision`.
    pub fn abs_precision(&self) -> Option<i64> {
        (!self.is_zero()).then(|| self.valuation as i64 + self.precision as i64)
    }

    pub fn is_unit(&self) -> bool {
        !self.is_zero() && self.valuation == 0
    }

    pub fn neg(&self) -> Self {
        if self.is_zero() {
            return *self;
        }
        let m = pow_u128(self.p, self.precision);
        PadicScaled { unit: m - self.unit, ..*self }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.p, other.p);
        if self.is_zero() {
            return *other;
        }
        if other.is_zero() {
            return *self;
        }
        let p = self.p;
        let v = self.valuation.min(other.valuation);
        let abs = (self.valuation as i64 + self.precision as i64)
            .min(other.valuation as i64 + other.precision as i64);
        let rel = abs - v as i64;
        if rel <= 0 {
            return Self::zero(p);
        }
        let rel = rel as u32;
        let m = pow_u128(p, rel);
        let shifted = |x: &Self| -> u128 {
            let s = (x.valuation - v) as u32;
            if s >= rel {
                0
            } else {
                mulmod(x.unit % m, pow_u128(p, s), m, p)
            }
        };
        let mut s = (shifted(self) + shifted(other)) % m;
        if s == 0 {
            return Self::zero(p);
        }
        let mut t = 0u32;
        while s.is_multiple_of(p as u128) {
            s /= p as u128;
            t += 1;
        }
        let prec = rel - t;
        PadicScaled { p, valuation: v + t as i32, unit: s % pow_u128(p, prec), precision: prec }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.p, other.p);
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.p);
        }
        let prec = self.precision.min(other.precision);
        let m = pow_u128(self.p, prec);
        PadicScaled {
            p: self.p,
            valuation: self.valuation + other.valuation,
            unit: mulmod(self.unit % m, other.unit % m, m, self.p),
            precision: prec,
        }
    }

    pub fn invert(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::InvertZero);
        }
        Ok(PadicScaled {
            p: self.p,
            valuation: -self.valuation,
            unit: modinv_unit(self.unit, self.p, self.precision),
            precision: self.precision,
        })
    }

    /// Multiplies by `p^k`.
    pub fn shift(&self, k: i32) -> Self {
        if self.is_zero() {
            return *self;
        }
        PadicScaled { valuation: self.valuation + k, ..*self }
    }

    /// Forgets every digit at or beyond `p^cap`.
    pub fn truncate_abs(&self, cap: i64) -> Self {
        if self.is_zero() {
            return *self;
        }
        let room = cap - self.valuation as i64;
        if room <= 0 {
            return Self::zero(self.p);
        }
        if (room as u32) >= self.precision {
            return *self;
        }
        let prec = room as u32;
        PadicScaled { unit: self.unit % pow_u128(self.p, prec), precision: prec, ..*self }
    }

    /// Residue modulo `p` of an integral value (0 when the valuation is positive).
    pub fn residue_mod_p(&self) -> Option<u32> {
        match self.valuation() {
            None => Some(0),
            Some(v) if v > 0 => Some(0),
            Some(0) => Some((self.unit % self.p as u128) as u32),
            Some(_) => None,
        }
    }

    /// Equality of the known digits, i.e. `self - other` is zero at tracked precision.
    pub fn agrees_with(&self, other: &Self) -> bool {
        self.sub(other).is_zero()
    }

    /// The value as a signed integer when it is integral and small; for display.
    pub fn to_signed_residue(&self) -> Option<i128> {
        let v = self.valuation()?;
        if v < 0 {
            return None;
        }
        let m = pow_u128(self.p, self.precision);
        let signed = if self.unit > m / 2 { self.unit as i128 - m as i128 } else { self.unit as i128 };
        let scale = (self.p as i128).checked_pow(v as u32)?;
        signed.checked_mul(scale)
    }
}

impl PartialOrd for PadicScaled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PadicScaled {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.valuation, self.unit, self.precision).cmp(&(other.valuation, other.unit, other.precision))
    }
}

impl fmt::Debug for PadicScaled {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        write!(f, "{}^{}*{}(+O({}))", self.p, self.valuation, self.unit, self.precision)
    }
}

impl fmt::Display for PadicScaled {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_signed_residue() {
            Some(x) => write!(f, "{x}"),
            None if self.is_zero() => write!(f, "0"),
            None => write!(f, "{}^{}*{}", self.p, self.valuation, self.unit),
        }
    }
}

/// Operation selector for [`pad_arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PadicOp {
    Add,
    Mul,
    Negate,
    Invert,
}

/// Checked scalar arithmetic. Fails when the result's absolute precision falls
/// below `floor` digits and below that of its inputs.
pub fn pad_arith(a: &PadicScaled, b: &PadicScaled, op: PadicOp, floor: u32) -> Result<PadicScaled> {
    let r = match op {
        PadicOp::Add => a.add(b),
        PadicOp::Mul => a.mul(b),
        PadicOp::Negate => a.neg(),
        PadicOp::Invert => a.invert()?,
    };
    let inputs: Vec<i64> = match op {
        PadicOp::Add | PadicOp::Mul => [a, b].iter().filter_map(|x| x.abs_precision()).collect(),
        _ => a.abs_precision().into_iter().collect(),
    };
    if let (Some(out), Some(&inp)) = (r.abs_precision(), inputs.iter().min()) {
        if out < floor as i64 && out < inp {
            return Err(Error::PrecisionFloor { have: out, floor });
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn one_plus_one_at_two() {
        let one = PadicScaled::one(2, 16);
        let two = one.add(&one);
        assert_eq!(two.valuation(), Some(1));
        assert_eq!(two.unit(), 1);
    }

    #[test]
    fn invert_three_mod_32() {
        let three = PadicScaled::from_i128(2, 3, 5);
        let inv = three.invert().unwrap();
        assert_eq!(inv.valuation(), Some(0));
        assert_eq!(inv.unit(), 11);
        assert_eq!((3 * 11) % 32, 1);
    }

    #[test]
    fn exact_cancellation_is_zero() {
        let x = PadicScaled::from_i128(5, 1234, 16);
        let z = pad_arith(&x, &x.neg(), PadicOp::Add, 8).unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn invert_zero_errors() {
        assert!(matches!(PadicScaled::zero(3).invert(), Err(Error::InvertZero)));
    }

    #[test]
    fn floor_violation_reported() {
        // 2^-5 known to 10 relative digits has 5 absolute digits; its square keeps none
        let x = PadicScaled::from_i128(2, 32, 10).invert().unwrap();
        assert_eq!(x.abs_precision(), Some(5));
        assert!(matches!(pad_arith(&x, &x, PadicOp::Mul, 8), Err(Error::PrecisionFloor { .. })));
        // no loss relative to the inputs, so no error even though below the floor
        let one = PadicScaled::one(2, 10);
        assert!(pad_arith(&x, &one, PadicOp::Mul, 8).is_ok());
    }

    #[test]
    fn cancellation_loses_digits() {
        let a = PadicScaled::from_i128(3, 1 + 3i128.pow(6), 10);
        let b = PadicScaled::from_i128(3, -1, 10);
        let s = a.add(&b);
        assert_eq!(s.valuation(), Some(6));
        assert_eq!(s.known_precision(), 4);
    }

    #[test]
    fn wide_modulus_odd_prime() {
        // 5^50 exceeds 64 bits, exercising the slow multiplication path
        let x = PadicScaled::from_i128(5, 123456789, 50);
        let y = x.invert().unwrap();
        assert_eq!(x.mul(&y), PadicScaled::one(5, 50));
    }

    #[test]
    fn ratio_roundtrip() {
        let q = PadicScaled::from_ratio(2, -1, 2, 16).unwrap();
        assert_eq!(q.valuation(), Some(-1));
        assert_eq!(q.mul(&PadicScaled::from_i128(2, -2, 16)), PadicScaled::one(2, 16));
    }

    fn arb(p: u32) -> impl Strategy<Value = PadicScaled> {
        (-3i32..6, 1u64..1_000_000).prop_map(move |(v, u)| {
            let u = if u % p as u64 == 0 { u + 1 } else { u };
            PadicScaled::from_parts(p, v, u as u128, 12).unwrap()
        })
    }

    proptest! {
        #[test]
        fn valuation_laws(a in arb(3), b in arb(3)) {
            let prod = a.mul(&b);
            prop_assert_eq!(prod.valuation(), Some(a.valuation().unwrap() + b.valuation().unwrap()));
            let s = a.add(&b);
            let (va, vb) = (a.valuation().unwrap(), b.valuation().unwrap());
            if let Some(vs) = s.valuation() {
                prop_assert!(vs >= va.min(vb));
                if va != vb {
                    prop_assert_eq!(vs, va.min(vb));
                }
            }
        }

        #[test]
        fn inverse_multiplies_to_one(a in arb(5)) {
            let inv = a.invert().unwrap();
            prop_assert_eq!(a.mul(&inv), PadicScaled::one(5, 12));
        }
    }
}
