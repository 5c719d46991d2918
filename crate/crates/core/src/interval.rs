//! Exact rational arithmetic helpers and the [`RatInterval`] enclosure type.
//!
//! Every irrational quantity the library reports (a distance `‖qα‖`, an
//! orbit point, a logarithm) is carried as a closed interval with exact
//! rational endpoints that provably contains the true value.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: impl Into<BigInt>) -> Rat {
    Rat::from_integer(n.into())
}

/// Parses `"p/q"`, `"p"` or a plain decimal like `"0.04"` / `"1e-6"` into an exact rational.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rat::new(n, d));
    }
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i64>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (ip, fp) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if ip.is_empty() && fp.is_empty() {
        return Err(bad());
    }
    let digits = format!("{ip}{fp}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let n = BigInt::from_str(&digits).map_err(|_| bad())?;
    let scale = exp - fp.len() as i64;
    let ten = BigInt::from(10);
    let mut r = if scale >= 0 {
        Rat::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        Rat::new(n, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        r = -r;
    }
    Ok(r)
}

pub fn fmt_rat(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    // Shift both parts down to 1000 significant bits so huge values convert.
    let (n, d) = (r.numer(), r.denom());
    let nb = n.bits() as i64;
    let db = d.bits() as i64;
    let shift_n = (nb - 1000).max(0);
    let shift_d = (db - 1000).max(0);
    let nf = (n >> shift_n as usize).to_f64().unwrap_or(f64::NAN);
    let df = (d >> shift_d as usize).to_f64().unwrap_or(f64::NAN);
    nf / df * 2f64.powi((shift_n - shift_d) as i32)
}

/// Exact conversion of a finite `f64` into a rational.
pub fn f64_to_rat(x: f64) -> Rat {
    Rat::from_float(x).expect("finite float")
}

pub fn floor(r: &Rat) -> BigInt {
    r.numer().div_floor(r.denom())
}

pub fn ceil(r: &Rat) -> BigInt {
    -((-r.numer()).div_floor(r.denom()))
}

/// Fractional part in `[0, 1)`.
pub fn frac(r: &Rat) -> Rat {
    r - int(floor(r))
}

/// Distance to the nearest integer.
pub fn dist_to_int(r: &Rat) -> Rat {
    let f = frac(r);
    let g = Rat::one() - &f;
    if f <= g {
        f
    } else {
        g
    }
}

pub fn pow_rat(r: &Rat, e: u32) -> Rat {
    num_traits::pow(r.clone(), e as usize)
}

/// Enclosure of `r^(1/n)` for `r ≥ 0` with width at most `2^-bits`.
pub fn nth_root_enclosure(r: &Rat, n: u32, bits: u32) -> RatInterval {
    assert!(!r.is_negative() && n >= 1);
    let scale = BigInt::one() << (bits as usize * n as usize);
    let lo_n = floor(&(r * int(scale)));
    let root = lo_n.nth_root(n);
    let den = BigInt::one() << bits as usize;
    let lo = Rat::new(root.clone(), den.clone());
    let hi = if lo_n == num_traits::pow(root.clone(), n as usize) && int(lo_n.clone()) == r * int(BigInt::one() << (bits as usize * n as usize)) {
        lo.clone()
    } else {
        Rat::new(root + 1u32, den)
    };
    RatInterval::new(lo, hi)
}

/// The rational with the smallest denominator in `[lo, hi]`.
pub fn simplest_between(lo: &Rat, hi: &Rat) -> Rat {
    assert!(lo <= hi);
    let fl = floor(lo);
    if int(fl.clone()) == *lo {
        return lo.clone();
    }
    if int(&fl + 1u32) <= *hi {
        return int(fl + 1u32);
    }
    // both in (fl, fl+1): recurse on reciprocals of the fractional parts
    let f = int(fl.clone());
    let inner = simplest_between(&(hi - &f).recip(), &(lo - &f).recip());
    f + inner.recip()
}

/// Closest rational to `r` with denominator at most `max_den`, among the
/// convergents of its continued fraction.
pub fn best_approx_bounded(r: &Rat, max_den: &BigInt) -> Rat {
    let (mut p0, mut q0, mut p1, mut q1) = (BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::zero());
    let mut x = r.clone();
    loop {
        let a = floor(&x);
        let q2 = &a * &q1 + &q0;
        if &q2 > max_den {
            break;
        }
        let p2 = &a * &p1 + &p0;
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        let f = &x - int(a);
        if f.is_zero() {
            break;
        }
        x = f.recip();
    }
    Rat::new(p1, q1)
}

/// Closed interval `[lo, hi]` with exact rational endpoints.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatInterval {
    pub lo: Rat,
    pub hi: Rat,
}

impl RatInterval {
    pub fn new(lo: Rat, hi: Rat) -> Self {
        debug_assert!(lo <= hi, "inverted interval");
        RatInterval { lo, hi }
    }

    pub fn point(x: Rat) -> Self {
        RatInterval {
            lo: x.clone(),
            hi: x,
        }
    }

    /// Interval spanned by two endpoints in either order.
    pub fn hull(a: Rat, b: Rat) -> Self {
        if a <= b {
            RatInterval { lo: a, hi: b }
        } else {
            RatInterval { lo: b, hi: a }
        }
    }

    pub fn width(&self) -> Rat {
        &self.hi - &self.lo
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &Rat) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_interval(&self, other: &RatInterval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn midpoint(&self) -> Rat {
        (&self.lo + &self.hi) / int(2)
    }

    /// Certified ordering: `Some(Less)` iff every point of `self` is below every
    /// point of `other`; `Some(Equal)` only for identical degenerate points.
    pub fn certified_cmp(&self, other: &RatInterval) -> Option<Ordering> {
        if self.hi < other.lo {
            Some(Ordering::Less)
        } else if other.hi < self.lo {
            Some(Ordering::Greater)
        } else if self.is_point() && other.is_point() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    /// Certified comparison against a single rational.
    pub fn cmp_rat(&self, x: &Rat) -> Option<Ordering> {
        self.certified_cmp(&RatInterval::point(x.clone()))
    }

    pub fn certainly_lt(&self, x: &Rat) -> bool {
        &self.hi < x
    }

    pub fn certainly_gt(&self, x: &Rat) -> bool {
        &self.lo > x
    }

    pub fn add(&self, o: &RatInterval) -> RatInterval {
        RatInterval::new(&self.lo + &o.lo, &self.hi + &o.hi)
    }

    pub fn sub(&self, o: &RatInterval) -> RatInterval {
        RatInterval::new(&self.lo - &o.hi, &self.hi - &o.lo)
    }

    pub fn neg(&self) -> RatInterval {
        RatInterval::new(-&self.hi, -&self.lo)
    }

    pub fn shift(&self, x: &Rat) -> RatInterval {
        RatInterval::new(&self.lo + x, &self.hi + x)
    }

    pub fn scale(&self, k: &Rat) -> RatInterval {
        RatInterval::hull(&self.lo * k, &self.hi * k)
    }

    pub fn scale_int(&self, k: &BigInt) -> RatInterval {
        self.scale(&Rat::from_integer(k.clone()))
    }

    pub fn mul(&self, o: &RatInterval) -> RatInterval {
        let c = [
            &self.lo * &o.lo,
            &self.lo * &o.hi,
            &self.hi * &o.lo,
            &self.hi * &o.hi,
        ];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        RatInterval::new(lo, hi)
    }

    /// Division by an interval that excludes zero.
    pub fn div(&self, o: &RatInterval) -> Result<RatInterval> {
        if o.contains(&Rat::zero()) {
            return Err(Error::Precision("division by an interval containing 0".into()));
        }
        let inv = RatInterval::hull(o.lo.recip(), o.hi.recip());
        Ok(self.mul(&inv))
    }

    pub fn abs(&self) -> RatInterval {
        if self.lo >= Rat::zero() {
            self.clone()
        } else if self.hi <= Rat::zero() {
            self.neg()
        } else {
            let hi = if -&self.lo > self.hi {
                -&self.lo
            } else {
                self.hi.clone()
            };
            RatInterval::new(Rat::zero(), hi)
        }
    }

    pub fn max(&self, o: &RatInterval) -> RatInterval {
        RatInterval::new(
            std::cmp::max(&self.lo, &o.lo).clone(),
            std::cmp::max(&self.hi, &o.hi).clone(),
        )
    }

    pub fn min(&self, o: &RatInterval) -> RatInterval {
        RatInterval::new(
            std::cmp::min(&self.lo, &o.lo).clone(),
            std::cmp::min(&self.hi, &o.hi).clone(),
        )
    }

    pub fn pow(&self, e: u32) -> RatInterval {
        // Only used on non-negative intervals.
        debug_assert!(self.lo >= Rat::zero());
        RatInterval::new(pow_rat(&self.lo, e), pow_rat(&self.hi, e))
    }

    /// Enclosure of `‖x‖` for every `x` in the interval. The map is
    /// 1-Lipschitz, so the enclosure is valid even across half-integers.
    pub fn dist_to_int(&self) -> RatInterval {
        let half = rat(1, 2);
        if self.width() >= Rat::one() {
            return RatInterval::new(Rat::zero(), half);
        }
        let has_int = int(ceil(&self.lo)) <= self.hi;
        let has_half = int(ceil(&(&self.lo - &half))) <= &self.hi - &half;
        let da = dist_to_int(&self.lo);
        let db = dist_to_int(&self.hi);
        let lo = if has_int { Rat::zero() } else { std::cmp::min(&da, &db).clone() };
        let hi = if has_half { half } else { std::cmp::max(da, db) };
        RatInterval::new(lo, hi)
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (rat_to_f64(&self.lo), rat_to_f64(&self.hi))
    }

    pub fn mid_f64(&self) -> f64 {
        rat_to_f64(&self.midpoint())
    }
}

impl fmt::Display for RatInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.to_f64_pair();
        write!(f, "[{a:.12e}, {b:.12e}]")
    }
}

/// Serialized as `{"lo": "p/q", "hi": "p/q"}`.
impl Serialize for RatInterval {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("RatInterval", 2)?;
        st.serialize_field("lo", &fmt_rat(&self.lo))?;
        st.serialize_field("hi", &fmt_rat(&self.hi))?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for RatInterval {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            lo: String,
            hi: String,
        }
        let raw = Raw::deserialize(d)?;
        let lo = parse_rat(&raw.lo).map_err(serde::de::Error::custom)?;
        let hi = parse_rat(&raw.hi).map_err(serde::de::Error::custom)?;
        if lo > hi {
            return Err(serde::de::Error::custom("lo > hi"));
        }
        Ok(RatInterval { lo, hi })
    }
}

/// serde adapter: rationals as `"p/q"` strings.
pub mod rat_str {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rat(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        parse_rat(&s).map_err(serde::de::Error::custom)
    }
}

/// serde adapter: big integers as decimal strings.
pub mod bigint_str {
    use super::*;

    pub fn serialize<S: Serializer>(r: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigInt, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            S(String),
            I(i64),
        }
        match Raw::deserialize(d)? {
            Raw::S(s) => BigInt::from_str(&s).map_err(serde::de::Error::custom),
            Raw::I(i) => Ok(BigInt::from(i)),
        }
    }
}

/// Floor of the integer square root.
pub fn isqrt(n: &BigInt) -> BigInt {
    assert!(n.sign() != Sign::Minus);
    n.sqrt()
}

/// Enclosure of `√r` for `r ≥ 0` with width at most `2^-bits`.
pub fn sqrt_enclosure(r: &Rat, bits: u32) -> RatInterval {
    assert!(!r.is_negative());
    if r.is_zero() {
        return RatInterval::point(Rat::zero());
    }
    // √(n/d) = √(n·d·4^b) / (d·2^b)
    let scale = BigInt::one() << bits as usize;
    let (n, d) = (r.numer(), r.denom());
    let radicand = n * d * &scale * &scale;
    let s = isqrt(&radicand);
    let den = d * &scale;
    let lo = Rat::new(s.clone(), den.clone());
    if &s * &s == radicand {
        return RatInterval::point(lo);
    }
    RatInterval::new(lo, Rat::new(s + 1, den))
}

/// Largest integer `e` with `2^e ≤ r` for a positive rational.
pub fn floor_log2(r: &Rat) -> i64 {
    assert!(r.is_positive());
    let (n, d) = (r.numer(), r.denom());
    let mut e = n.bits() as i64 - d.bits() as i64;
    // Adjust so that 2^e ≤ n/d < 2^(e+1).
    loop {
        let le = if e >= 0 {
            (d << e as usize) <= *n
        } else {
            d <= &(n << (-e) as usize)
        };
        if le {
            let le_next = if e + 1 >= 0 {
                (d << (e + 1) as usize) <= *n
            } else {
                d <= &(n << (-(e + 1)) as usize)
            };
            if le_next {
                e += 1;
                continue;
            }
            return e;
        }
        e -= 1;
    }
}

/// `2^e` as a rational for any integer exponent.
pub fn pow2(e: i64) -> Rat {
    if e >= 0 {
        int(BigInt::one() << e as usize)
    } else {
        Rat::new(BigInt::one(), BigInt::one() << (-e) as usize)
    }
}

/// Certified enclosure of `ln(r)` for a positive rational.
///
/// The top 64 bits of numerator and denominator are evaluated in `f64`; the
/// truncation error is below `2^-60` relative and the libm error is a few ulp,
/// both covered by the padding.
pub fn ln_enclosure(r: &Rat) -> RatInterval {
    assert!(r.is_positive(), "log of non-positive value");
    let ln_big = |n: &BigInt| -> (f64, f64) {
        let bits = n.bits() as i64;
        let shift = (bits - 64).max(0);
        let top = (n >> shift as usize).to_f64().unwrap();
        let v = top.ln() + shift as f64 * std::f64::consts::LN_2;
        // Truncating to 64 bits changes the value by a factor in [1, 1 + 2^-63).
        let trunc = if shift > 0 { 2f64.powi(-62) } else { 0.0 };
        (v, trunc)
    };
    let (a, ta) = ln_big(r.numer());
    let (b, tb) = ln_big(r.denom());
    let v = a - b;
    let pad = (a.abs() + b.abs()) * 1e-14 + ta + tb + 1e-300;
    RatInterval::new(f64_to_rat(v - pad), f64_to_rat(v + pad))
}

pub fn ln_int_enclosure(n: &BigInt) -> RatInterval {
    ln_enclosure(&Rat::from_integer(n.clone()))
}
