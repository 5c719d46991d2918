//! Real numbers given by their partial quotients, convergents, and certified
//! enclosures of `qα`, `‖qα‖` and orbit points `{mα}`.
//!
//! Indexing follows the standard convention `p_{-1} = 1, q_{-1} = 0,
//! p_0 = a_0, q_0 = 1`, so `q_{k-1}` is defined at `k = 0`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};
use crate::interval::{bigint_str, dist_to_int, floor, frac, int, Rat, RatInterval};

pub const DEFAULT_MAX_DEPTH: usize = 500;
pub const DEPTH_ENV: &str = "DIOLAB_MAX_DEPTH";

/// Expansion depth: `DIOLAB_MAX_DEPTH` when set to an integer ≥ 2, else [`DEFAULT_MAX_DEPTH`].
pub fn default_depth() -> usize {
    std::env::var(DEPTH_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&d| d >= 2)
        .unwrap_or(DEFAULT_MAX_DEPTH)
}

/// Rules from the fixed catalogue that generate `a_k` for `k ≥ 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Rule {
    /// `a_k = value`.
    Constant { value: u64 },
    /// `a_k = offset + slope·k`.
    Linear { offset: i64, slope: i64 },
    /// `a_k = base^k` when `k` is a power of two, else `default`.
    PowerOfTwoSupport { base: u64, default: u64 },
    /// `a_k = 2^(2^min(k, cap))`.
    DoublyExponential { cap: u32 },
}

impl Rule {
    pub fn term(&self, k: usize) -> Result<BigInt> {
        debug_assert!(k >= 1);
        let v = match *self {
            Rule::Constant { value } => BigInt::from(value),
            Rule::Linear { offset, slope } => BigInt::from(offset) + BigInt::from(slope) * k,
            Rule::PowerOfTwoSupport { base, default } => {
                if k.is_power_of_two() {
                    num_traits::pow(BigInt::from(base), k)
                } else {
                    BigInt::from(default)
                }
            }
            Rule::DoublyExponential { cap } => {
                let e = k.min(cap as usize);
                BigInt::one() << (1usize << e)
            }
        };
        if v < BigInt::one() {
            return Err(Error::Precondition(format!(
                "rule {self:?} produced a_{k} = {v} < 1"
            )));
        }
        Ok(v)
    }
}

/// Symbolic description of a real number α.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RealNumberSpec {
    Rational {
        #[serde(with = "bigint_str")]
        p: BigInt,
        #[serde(with = "bigint_str")]
        q: BigInt,
    },
    /// `[preperiod; period, period, …]`; the first entry overall is `a_0`.
    Quadratic { preperiod: Vec<i64>, period: Vec<u64> },
    Rule {
        #[serde(default)]
        a0: i64,
        rule: Rule,
    },
}

impl RealNumberSpec {
    pub fn quadratic(preperiod: &[i64], period: &[u64]) -> Self {
        RealNumberSpec::Quadratic {
            preperiod: preperiod.to_vec(),
            period: period.to_vec(),
        }
    }

    pub fn rational(p: i64, q: i64) -> Self {
        RealNumberSpec::Rational {
            p: p.into(),
            q: q.into(),
        }
    }

    pub fn rule(a0: i64, rule: Rule) -> Self {
        RealNumberSpec::Rule { a0, rule }
    }

    pub fn is_irrational(&self) -> bool {
        !matches!(self, RealNumberSpec::Rational { .. })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RealNumberSpec::Rational { p, q } => {
                if !q.is_positive() {
                    return precondition("rational denominator must be positive");
                }
                if !p.gcd(q).is_one() {
                    return precondition(format!("{p}/{q} is not in lowest terms"));
                }
            }
            RealNumberSpec::Quadratic { preperiod, period } => {
                if period.is_empty() {
                    return precondition("quadratic irrational needs a non-empty period");
                }
                if preperiod.iter().skip(1).any(|&a| a < 1) || period.iter().any(|&a| a < 1) {
                    return precondition("partial quotients a_k (k ≥ 1) must be ≥ 1");
                }
                if preperiod.is_empty() && period[0] < 1 {
                    return precondition("a_0 taken from the period must be ≥ 1");
                }
            }
            RealNumberSpec::Rule { rule, .. } => {
                rule.term(1)?;
                if let Rule::Linear { slope, .. } = rule {
                    if *slope < 0 {
                        return precondition("linear rule needs a non-negative slope");
                    }
                }
            }
        }
        Ok(())
    }

    /// Partial quotient `a_k`, or `None` past the end of a rational expansion.
    fn term(&self, k: usize, rational_terms: &[BigInt]) -> Result<Option<BigInt>> {
        Ok(match self {
            RealNumberSpec::Rational { .. } => rational_terms.get(k).cloned(),
            RealNumberSpec::Quadratic { preperiod, period } => {
                let v = if k < preperiod.len() {
                    preperiod[k]
                } else {
                    period[(k - preperiod.len()) % period.len()] as i64
                };
                Some(BigInt::from(v))
            }
            RealNumberSpec::Rule { a0, rule } => {
                if k == 0 {
                    Some(BigInt::from(*a0))
                } else {
                    Some(rule.term(k)?)
                }
            }
        })
    }
}

fn rational_expansion(p: &BigInt, q: &BigInt) -> Vec<BigInt> {
    let (mut n, mut d) = (p.clone(), q.clone());
    let mut out = Vec::new();
    while !d.is_zero() {
        let (a, r) = n.div_mod_floor(&d);
        out.push(a);
        n = d;
        d = r;
    }
    out
}

/// Partial quotients `a_0..a_K` with convergents `p_k/q_k` for `k = -1..K`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvergentSeq {
    a: Vec<BigInt>,
    p: Vec<BigInt>,
    q: Vec<BigInt>,
    /// Set when a rational expansion ended before the requested depth.
    pub terminated: bool,
}

impl ConvergentSeq {
    /// Index of the last computed convergent.
    pub fn last(&self) -> usize {
        self.a.len() - 1
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn a(&self, k: usize) -> &BigInt {
        &self.a[k]
    }

    /// `p_k` for `k ≥ -1`.
    pub fn p(&self, k: isize) -> &BigInt {
        &self.p[(k + 1) as usize]
    }

    /// `q_k` for `k ≥ -1`.
    pub fn q(&self, k: isize) -> &BigInt {
        &self.q[(k + 1) as usize]
    }

    pub fn qu(&self, k: usize) -> &BigInt {
        &self.q[k + 1]
    }

    pub fn partial_quotients(&self) -> &[BigInt] {
        &self.a
    }

    /// Denominators `q_0..q_K`.
    pub fn denominators(&self) -> &[BigInt] {
        &self.q[1..]
    }

    pub fn numerators(&self) -> &[BigInt] {
        &self.p[1..]
    }

    pub fn convergent(&self, k: usize) -> Rat {
        Rat::new(self.p[k + 1].clone(), self.q[k + 1].clone())
    }

    /// Checks the recurrence, determinant and growth identities exactly.
    pub fn check_invariants(&self) -> Result<()> {
        for k in 0..self.a.len() {
            let ki = k as isize;
            if k > 0 {
                let qn = self.a(k) * self.q(ki - 1) + self.q(ki - 2);
                let pn = self.a(k) * self.p(ki - 1) + self.p(ki - 2);
                if &qn != self.q(ki) || &pn != self.p(ki) {
                    return Err(Error::Invariant(format!("recurrence fails at k = {k}")));
                }
            }
            let det = self.p(ki) * self.q(ki - 1) - self.p(ki - 1) * self.q(ki);
            let expect = if k % 2 == 0 { BigInt::from(-1) } else { BigInt::one() };
            if det != expect {
                return Err(Error::Invariant(format!("determinant fails at k = {k}")));
            }
            if k >= 2 && self.q(ki) <= self.q(ki - 1) {
                return Err(Error::Invariant(format!("q not increasing at k = {k}")));
            }
            if k >= 2 && self.q(ki) < &(self.q(ki - 2) * 2u32) {
                return Err(Error::Invariant(format!("q_k ≥ 2 q_(k-2) fails at k = {k}")));
            }
        }
        Ok(())
    }

    /// Largest `k` with `q_k ≤ x` (or `None` if `x < 1`).
    pub fn index_at_most(&self, x: &BigInt) -> Option<usize> {
        let qs = self.denominators();
        match qs.partition_point(|q| q <= x) {
            0 => None,
            n => Some(n - 1),
        }
    }
}

/// Expands α to `a_0..a_K`. Rational inputs stop early with `terminated` set.
pub fn expand_cf(x: &RealNumberSpec, k_max: usize) -> Result<ConvergentSeq> {
    x.validate()?;
    let rational_terms = match x {
        RealNumberSpec::Rational { p, q } => rational_expansion(p, q),
        _ => Vec::new(),
    };
    let mut a = Vec::with_capacity(k_max + 1);
    let mut p = vec![BigInt::one()];
    let mut q = vec![BigInt::zero()];
    let mut terminated = false;
    for k in 0..=k_max {
        let Some(ak) = x.term(k, &rational_terms)? else {
            terminated = true;
            break;
        };
        let (pk, qk) = if k == 0 {
            (ak.clone(), BigInt::one())
        } else {
            (&ak * &p[k] + &p[k - 1], &ak * &q[k] + &q[k - 1])
        };
        a.push(ak);
        p.push(pk);
        q.push(qk);
    }
    Ok(ConvergentSeq { a, p, q, terminated })
}

/// A real number together with its precomputed convergents.
#[derive(Clone, Debug)]
pub struct Alpha {
    pub spec: RealNumberSpec,
    conv: ConvergentSeq,
}

impl Alpha {
    pub fn new(spec: RealNumberSpec) -> Result<Self> {
        Self::with_depth(spec, default_depth())
    }

    pub fn with_depth(spec: RealNumberSpec, depth: usize) -> Result<Self> {
        let conv = expand_cf(&spec, depth)?;
        Ok(Alpha { spec, conv })
    }

    pub fn conv(&self) -> &ConvergentSeq {
        &self.conv
    }

    pub fn is_irrational(&self) -> bool {
        self.spec.is_irrational()
    }

    pub fn require_irrational(&self) -> Result<()> {
        if self.is_irrational() {
            Ok(())
        } else {
            precondition("this analysis requires an irrational α")
        }
    }

    pub fn max_depth(&self) -> usize {
        self.conv.last()
    }

    pub fn q(&self, k: usize) -> &BigInt {
        self.conv.qu(k)
    }

    pub fn a(&self, k: usize) -> &BigInt {
        self.conv.a(k)
    }

    /// Exact value when α is rational and fully expanded.
    pub fn exact(&self) -> Option<Rat> {
        if self.conv.terminated {
            Some(self.conv.convergent(self.conv.last()))
        } else {
            None
        }
    }

    /// Enclosure of α between the convergents of index `k` and `k + 1`.
    /// Width is `1/(q_k q_{k+1})`.
    pub fn enclosure_at(&self, k: usize) -> RatInterval {
        if let Some(x) = self.exact() {
            if k >= self.conv.last() {
                return RatInterval::point(x);
            }
        }
        let k = k.min(self.conv.last() - 1);
        RatInterval::hull(self.conv.convergent(k), self.conv.convergent(k + 1))
    }

    /// Smallest depth at which `m·α` is enclosed with width ≤ `budget`.
    pub fn depth_for(&self, m: &BigInt, budget: &Rat) -> Result<usize> {
        if !budget.is_positive() {
            return precondition("width budget must be positive");
        }
        let last = self.conv.last();
        if self.exact().is_some() {
            // Exact enclosure always fits.
            return Ok(last);
        }
        let m_abs = m.abs();
        // width = |m| / (q_k q_{k+1}) ≤ budget  ⇔  q_k q_{k+1} · budget ≥ |m|
        let fits = |k: usize| {
            let prod = Rat::from_integer(self.q(k) * self.q(k + 1));
            prod * budget >= Rat::from_integer(m_abs.clone())
        };
        if last == 0 || !fits(last - 1) {
            return Err(Error::Precision(format!(
                "budget {budget} unreachable for m = {m} within depth {last}"
            )));
        }
        let (mut lo, mut hi) = (0usize, last - 1);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if fits(mid) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Ok(lo)
    }

    /// Enclosure of `m·α` with width ≤ `budget`.
    pub fn times(&self, m: &BigInt, budget: &Rat) -> Result<RatInterval> {
        let k = self.depth_for(m, budget)?;
        Ok(self.enclosure_at(k).scale_int(m))
    }

    /// Enclosure of `m·α + c` with width ≤ `budget`.
    pub fn affine(&self, m: &BigInt, c: &Rat, budget: &Rat) -> Result<RatInterval> {
        Ok(self.times(m, budget)?.shift(c))
    }
}

/// Enclosure of `‖qα‖` of width ≤ `budget`.
pub fn qdist(alpha: &Alpha, q: &BigInt, budget: &Rat) -> Result<RatInterval> {
    if !q.is_positive() {
        return precondition("qdist needs q > 0");
    }
    Ok(alpha.times(q, budget)?.dist_to_int())
}

/// Enclosure of the fractional part of `mα`, inside `[0, 1)`.
///
/// When the enclosure of `mα` straddles an integer the depth is increased
/// until it no longer does; for irrational α this always terminates before
/// the maximum depth unless `mα` is astronomically close to an integer.
pub fn orbit_point(alpha: &Alpha, m: &BigInt, budget: &Rat) -> Result<RatInterval> {
    if !m.is_positive() {
        return precondition("orbit_point needs m > 0");
    }
    let mut b = budget.clone();
    for _ in 0..64 {
        let e = alpha.times(m, &b)?;
        let fl = floor(&e.lo);
        if floor(&e.hi) == fl {
            return Ok(e.shift(&-int(fl)));
        }
        if e.is_point() {
            return Ok(RatInterval::point(frac(&e.lo)));
        }
        b = b / int(1u64 << 32);
    }
    Err(Error::Precision(format!("orbit point of m = {m} stays on the wrap")))
}

/// Enclosure of the signed gap `D_k = |q_k α − p_k|` for `k ≥ -1`.
/// `D_{-1} = 1`, and `D_k = ‖q_k α‖` whenever `p_k` is the nearest integer.
pub fn signed_gap(alpha: &Alpha, k: isize, budget: &Rat) -> Result<RatInterval> {
    if k < 0 {
        return Ok(RatInterval::point(Rat::one()));
    }
    let c = alpha.conv();
    let q = c.q(k).clone();
    let p = Rat::from_integer(c.p(k).clone());
    Ok(alpha.times(&q, budget)?.shift(&-p).abs())
}

/// Distance from the exact rational `x` to the nearest integer.
pub fn norm_exact(x: &Rat) -> Rat {
    dist_to_int(x)
}

pub fn fixture_golden() -> RealNumberSpec {
    RealNumberSpec::rule(0, Rule::Constant { value: 1 })
}

pub fn fixture_sqrt2m1() -> RealNumberSpec {
    RealNumberSpec::quadratic(&[0], &[2])
}

pub fn fixture_growing() -> RealNumberSpec {
    RealNumberSpec::rule(0, Rule::Linear { offset: 0, slope: 1 })
}

pub fn fixture_superexp() -> RealNumberSpec {
    RealNumberSpec::rule(0, Rule::DoublyExponential { cap: 6 })
}

pub fn fixture_nonheavy_bounded() -> RealNumberSpec {
    RealNumberSpec::rule(0, Rule::PowerOfTwoSupport { base: 3, default: 1 })
}

/// The named reference numbers used throughout tests and the CLI.
pub fn fixtures() -> Vec<(&'static str, RealNumberSpec)> {
    vec![
        ("golden", fixture_golden()),
        ("sqrt2m1", fixture_sqrt2m1()),
        ("growing", fixture_growing()),
        ("superexp", fixture_superexp()),
        ("nonheavy_bounded", fixture_nonheavy_bounded()),
        ("sqrt3m1", RealNumberSpec::quadratic(&[0], &[1, 2])),
        ("sqrt5m2", RealNumberSpec::quadratic(&[0], &[4])),
        ("sqrt7m2", RealNumberSpec::quadratic(&[0], &[1, 1, 1, 4])),
        ("silver3", RealNumberSpec::quadratic(&[0], &[3])),
        ("odd_linear", RealNumberSpec::rule(0, Rule::Linear { offset: 1, slope: 2 })),
    ]
}

pub fn fixture(name: &str) -> Result<RealNumberSpec> {
    fixtures()
        .into_iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| s)
        .ok_or_else(|| Error::Parse(format!("unknown fixture {name:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::{rat, sqrt_enclosure};

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn sqrt2m1_denominators() {
        let c = expand_cf(&fixture_sqrt2m1(), 4).unwrap();
        assert_eq!(c.partial_quotients(), &big(&[0, 2, 2, 2, 2])[..]);
        assert_eq!(c.denominators(), &big(&[1, 2, 5, 12, 29])[..]);
    }

    #[test]
    fn rational_terminates() {
        let c = expand_cf(&RealNumberSpec::rational(1, 2), 5).unwrap();
        assert!(c.terminated);
        assert_eq!(c.partial_quotients(), &big(&[0, 2])[..]);
        assert!(expand_cf(&RealNumberSpec::rational(2, 4), 5).is_err());
    }

    #[test]
    fn golden_is_fibonacci() {
        let c = expand_cf(&fixture_golden(), 6).unwrap();
        assert_eq!(c.denominators(), &big(&[1, 1, 2, 3, 5, 8, 13])[..]);
    }

    #[test]
    fn nonheavy_terms() {
        let c = expand_cf(&fixture_nonheavy_bounded(), 8).unwrap();
        assert_eq!(
            c.partial_quotients(),
            &big(&[0, 3, 9, 1, 81, 1, 1, 1, 6561])[..]
        );
    }

    #[test]
    fn growing_dominates_factorial() {
        let c = expand_cf(&fixture_growing(), 30).unwrap();
        let mut fact = BigInt::one();
        for k in 1..=30usize {
            fact *= k;
            assert!(c.qu(k) >= &fact);
        }
    }

    #[test]
    fn invariants_on_fixtures() {
        for (name, spec) in fixtures() {
            let c = expand_cf(&spec, 200).unwrap();
            c.check_invariants().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn qdist_sqrt2m1() {
        let a = Alpha::new(fixture_sqrt2m1()).unwrap();
        let budget = rat(1, 1_000_000);
        let e = qdist(&a, &BigInt::from(5), &budget).unwrap();
        assert!(e.width() <= budget);
        // oracle: 5√2 − 7 from an independent square-root enclosure
        let s = sqrt_enclosure(&rat(50, 1), 80);
        let oracle = s.shift(&rat(-7, 1));
        assert!(e.lo <= oracle.lo && oracle.hi <= e.hi);
        assert!((e.mid_f64() - 0.0710678118654752).abs() < 1e-6);
    }

    #[test]
    fn qdist_golden_one() {
        let a = Alpha::new(fixture_golden()).unwrap();
        let e = qdist(&a, &BigInt::one(), &rat(1, 1000)).unwrap();
        // 1 − g = g² = (3 − √5)/2
        let s5 = sqrt_enclosure(&rat(5, 1), 80);
        let oracle = s5.neg().shift(&rat(3, 1)).scale(&rat(1, 2));
        assert!(e.lo <= oracle.lo && oracle.hi <= e.hi);
        assert!((e.mid_f64() - 0.381966).abs() < 1e-3);
    }

    #[test]
    fn qdist_at_convergent_respects_bound() {
        for (_, spec) in fixtures() {
            let a = Alpha::new(spec).unwrap();
            for k in 1..25 {
                let q1 = Rat::from_integer(a.q(k + 1).clone());
                // the upper margin is about q_k/(a_{k+2} q_{k+1}^2)
                let q2 = Rat::from_integer(a.q(k + 2).clone());
                let budget = (q1.clone() * q1.clone() * q2 * int(16)).recip();
                let e = qdist(&a, a.q(k), &budget).unwrap();
                assert!(e.lo > (q1.clone() * int(2)).recip());
                assert!(e.hi < q1.recip());
            }
        }
    }

    #[test]
    fn orbit_points() {
        let a = Alpha::new(fixture_sqrt2m1()).unwrap();
        let b = rat(1, 1_000_000);
        let e = orbit_point(&a, &BigInt::from(2), &b).unwrap();
        assert!((e.mid_f64() - 0.828427).abs() < 1e-6);
        let g = Alpha::new(fixture_golden()).unwrap();
        let e = orbit_point(&g, &BigInt::from(3), &b).unwrap();
        assert!((e.mid_f64() - 0.854102).abs() < 1e-6);
        let r = Alpha::new(RealNumberSpec::rational(1, 3)).unwrap();
        let e = orbit_point(&r, &BigInt::from(3), &b).unwrap();
        assert_eq!(e, RatInterval::point(Rat::zero()));
    }

    #[test]
    fn signed_gaps_sum_to_one() {
        // q_k D_{k-1} + q_{k-1} D_k = 1
        let a = Alpha::new(fixture_golden()).unwrap();
        let b = rat(1, 1_000_000_000_000_000);
        for k in 0..20isize {
            let dk1 = signed_gap(&a, k - 1, &b).unwrap();
            let dk = signed_gap(&a, k, &b).unwrap();
            let s = dk1
                .scale_int(a.conv().q(k))
                .add(&dk.scale_int(a.conv().q(k - 1)));
            assert!(s.contains(&Rat::one()), "k = {k}: {s}");
        }
    }

    #[test]
    fn spec_json_roundtrip() {
        let s: RealNumberSpec =
            serde_json::from_str(r#"{"kind":"quadratic","preperiod":[0],"period":[2]}"#).unwrap();
        assert_eq!(s, fixture_sqrt2m1());
        let r: RealNumberSpec = serde_json::from_str(r#"{"kind":"rational","p":"1","q":"3"}"#).unwrap();
        assert_eq!(r, RealNumberSpec::rational(1, 3));
        let g: RealNumberSpec =
            serde_json::from_str(r#"{"kind":"rule","rule":{"type":"constant","value":1}}"#).unwrap();
        assert_eq!(g, fixture_golden());
    }

    #[test]
    fn invalid_specs() {
        assert!(RealNumberSpec::quadratic(&[0], &[]).validate().is_err());
        assert!(RealNumberSpec::quadratic(&[0, 0], &[1]).validate().is_err());
        assert!(RealNumberSpec::rule(0, Rule::Linear { offset: 0, slope: -1 }).validate().is_err());
    }
}
