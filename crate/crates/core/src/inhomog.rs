//! Inhomogeneous approximation: scans of `|q|·‖qα − x‖`, membership tests for
//! the sets of badly approximable targets, the nested one-sided construction,
//! and the descent showing emptiness above `1/4`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cf::Alpha;
use crate::error::{precondition, Error, Result};
use crate::interval::{
    best_approx_bounded, bigint_str, ceil, floor, fmt_rat, int, ln_enclosure, rat, rat_to_f64,
    simplest_between, sqrt_enclosure, Rat,
    RatInterval,
};
use crate::partition::{level_of, locate_descent, locate_path, offset, Ladder, Target};

/// Segments up to this many `q` are scanned one by one.
pub const BRUTE_LIMIT: u64 = 1 << 24;

const CHUNK: u64 = 1 << 15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Both signs of `q`: `‖qα − x‖` and `‖qα + x‖`.
    TwoSided,
    /// `q > 0` only.
    Positive,
}

/// The value `|q|·‖qα − x‖` for a signed `q`, with width at most `budget`.
pub fn value(alpha: &Alpha, q: &BigInt, x: &Target, budget: &Rat) -> Result<RatInterval> {
    let qa = q.abs();
    if qa.is_zero() {
        return precondition("q must be non-zero");
    }
    let b = budget / int(qa.clone());
    let e = match x {
        Target::Rational(r) => alpha.times(q, &b)?.shift(&-r.clone()),
        Target::Orbit(m) => {
            let d = q - m;
            if d.is_zero() {
                return Ok(RatInterval::point(Rat::zero()));
            }
            alpha.times(&d, &b)?
        }
    };
    Ok(e.dist_to_int().scale_int(&qa))
}

fn negate_target(x: &Target) -> Target {
    match x {
        Target::Rational(r) => Target::Rational(crate::interval::frac(&-r.clone())),
        Target::Orbit(m) => Target::Orbit(-m),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TracePoint {
    #[serde(with = "bigint_str")]
    pub q: BigInt,
    pub lo: String,
    pub hi: String,
}

/// Result of [`liminf_scan`].
#[derive(Clone, Debug)]
pub struct LiminfScan {
    pub mode: Mode,
    pub q_lo: BigInt,
    pub q_hi: BigInt,
    pub min_value: RatInterval,
    /// Signed: a negative argmin means the `‖|q|α + x‖` branch.
    pub argmin: BigInt,
    pub trace: Vec<(BigInt, RatInterval)>,
    /// Full blocks `(q_k, q_{k+1}]` handled through the partition rather than one by one.
    pub structured_blocks: Vec<usize>,
}

#[derive(Serialize)]
pub struct ScanReport {
    pub mode: Mode,
    pub q_lo: String,
    pub q_hi: String,
    pub min_lo: String,
    pub min_hi: String,
    pub argmin: String,
    pub below_threshold: Vec<TracePoint>,
}

impl LiminfScan {
    pub fn report(&self) -> ScanReport {
        ScanReport {
            mode: self.mode,
            q_lo: self.q_lo.to_string(),
            q_hi: self.q_hi.to_string(),
            min_lo: fmt_rat(&self.min_value.lo),
            min_hi: fmt_rat(&self.min_value.hi),
            argmin: self.argmin.to_string(),
            below_threshold: self
                .trace
                .iter()
                .map(|(q, v)| TracePoint {
                    q: q.clone(),
                    lo: fmt_rat(&v.lo),
                    hi: fmt_rat(&v.hi),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScanOptions {
    /// Values below this are collected into the trace, and the minimum is
    /// resolved far enough to be ordered against it.
    pub threshold: Option<Rat>,
    pub budget: Rat,
    pub trace_cap: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            threshold: None,
            budget: rat(1, 1_000_000_000_000),
            trace_cap: 10_000,
        }
    }
}

/// Residue arithmetic for the one-by-one scan: `qα − x` is replaced by
/// `(q·p·b − s)/(Q·b)` where `p/Q` is a deep convergent and `x = s/(Q·b)`.
struct FastScan {
    modulus: i128,
    step: i128,
    shift: BigInt,
    shift_neg: BigInt,
    p_b: BigInt,
    m_big: BigInt,
    err: f64,
}

impl FastScan {
    fn new(alpha: &Alpha, x: &Target, q_hi: &BigInt) -> Result<FastScan> {
        let m_abs = match x {
            Target::Rational(_) => BigInt::zero(),
            Target::Orbit(m) => m.abs(),
        };
        let need = q_hi * (q_hi + &m_abs) * (BigInt::one() << 40usize);
        let conv = alpha.conv();
        let mut k = 0;
        while alpha.q(k) * alpha.q(k + 1) < need {
            k += 1;
            if k + 1 > conv.last() {
                return Err(Error::Precision("scan range beyond computed convergents".into()));
            }
        }
        let qk = alpha.q(k).clone();
        if qk.bits() > 80 {
            return Err(Error::Precision(format!("scan needs q_K of {} bits", qk.bits())));
        }
        let pk = conv.p(k as isize).mod_floor(&qk);
        // a target with a long denominator is replaced by a nearby proxy; the
        // prefilter margin absorbs |q|·|x − x'| and survivors are re-evaluated exactly
        let mut proxy_err = 0.0;
        let x = match x {
            Target::Rational(r) => {
                let room = BigInt::one() << (120 - qk.bits() as usize);
                if r.denom() > &room {
                    let p = best_approx_bounded(r, &room);
                    proxy_err = rat_to_f64(&(&p - r).abs()) * 2.0 * q_hi.to_f64().unwrap_or(f64::MAX);
                    Target::Rational(p)
                } else {
                    x.clone()
                }
            }
            Target::Orbit(_) => x.clone(),
        };
        let b = match &x {
            Target::Rational(r) => r.denom().clone(),
            Target::Orbit(_) => BigInt::one(),
        };
        let m_big = &qk * &b;
        let (shift, shift_neg) = match &x {
            Target::Rational(r) => {
                let s = r.numer() * &qk;
                (s.clone(), -s)
            }
            Target::Orbit(m) => {
                let s = m * &pk;
                (s.clone(), -s)
            }
        };
        let p_b = (&pk * &b).mod_floor(&m_big);
        let err = rat_to_f64(&Rat::new(need.clone(), alpha.q(k) * alpha.q(k + 1))) * 2f64.powi(-40) + proxy_err;
        Ok(FastScan {
            modulus: m_big.to_i128().unwrap(),
            step: p_b.to_i128().unwrap(),
            shift,
            shift_neg,
            p_b,
            m_big,
            err,
        })
    }

    fn residue(&self, q: u64, neg: bool) -> i128 {
        let s = if neg { &self.shift_neg } else { &self.shift };
        (BigInt::from(q) * &self.p_b - s)
            .mod_floor(&self.m_big)
            .to_i128()
            .unwrap()
    }
}

#[derive(Default)]
struct SegmentResult {
    best: f64,
    near: Vec<(f64, i64)>,
    below: Vec<i64>,
}

fn brute_segment(
    fs: &FastScan,
    lo: u64,
    hi: u64,
    mode: Mode,
    threshold: Option<f64>,
    trace_cap: usize,
) -> SegmentResult {
    let margin = |best: f64| 1e-9 + 1e-12 * best.abs() + 4.0 * fs.err;
    let chunks: Vec<(u64, u64)> = (lo..=hi)
        .step_by(CHUNK as usize)
        .map(|s| (s, (s + CHUNK - 1).min(hi)))
        .collect();
    let parts: Vec<SegmentResult> = chunks
        .par_iter()
        .map(|&(s, e)| {
            let mut out = SegmentResult {
                best: f64::INFINITY,
                ..Default::default()
            };
            let m = fs.modulus;
            let mf = m as f64;
            let branches: &[bool] = if mode == Mode::TwoSided { &[false, true] } else { &[false] };
            for &neg in branches {
                let mut r = fs.residue(s, neg);
                for q in s..=e {
                    let d = r.min(m - r);
                    let v = q as f64 * (d as f64 / mf);
                    if v <= out.best + margin(out.best) {
                        if v < out.best {
                            out.best = v;
                        }
                        out.near.push((v, if neg { -(q as i64) } else { q as i64 }));
                        if out.near.len() > 256 {
                            let cut = out.best + margin(out.best);
                            out.near.retain(|p| p.0 <= cut);
                        }
                    }
                    if let Some(t) = threshold {
                        if v < t + margin(t) && out.below.len() < trace_cap {
                            out.below.push(if neg { -(q as i64) } else { q as i64 });
                        }
                    }
                    r += fs.step;
                    if r >= m {
                        r -= m;
                    }
                }
            }
            out
        })
        .collect();
    let best = parts.iter().map(|p| p.best).fold(f64::INFINITY, f64::min);
    let cut = best + margin(best);
    let mut near = Vec::new();
    let mut below = Vec::new();
    for p in parts {
        near.extend(p.near.into_iter().filter(|v| v.0 <= cut));
        below.extend(p.below);
    }
    below.truncate(trace_cap);
    SegmentResult { best, near, below }
}

/// Candidates for the minimum of `q·‖qα − x‖` over a full block `(q_k, q_{k+1}]`.
///
/// Every `q` in the block is `n + q_{k-1} + c q_k` and sits at offset
/// `D_{k-1} − c D_k` inside `I_n^(k)`. Along one interval the value is concave
/// in `c` before the target and increasing after it, so the range ends and the
/// indices around the crossing are the only candidates. Intervals are visited
/// outward from the one containing `x` until they are farther than `r`.
fn block_candidates(alpha: &Alpha, ladder: &Ladder, k: usize, x: &Target, r: &Rat) -> Result<Vec<BigInt>> {
    let lv = ladder.level(k);
    let q_lo = &lv.q + 1u32;
    let q_hi = alpha.q(k + 1).clone();
    let n_x = match locate_descent(alpha, ladder, x, k) {
        Ok(l) => l.n,
        Err(Error::EndpointHit { index }) => index,
        Err(e) => return Err(e),
    };
    let q_next = Rat::from_integer(q_hi.clone());
    let budget = (q_next * int(1u64 << 24)).recip();
    let half = rat(1, 2);
    let signed_offset = |n: &BigInt| -> Result<RatInterval> {
        match offset(alpha, x, n, lv.orient, &budget, k) {
            Ok(t) => Ok(if t.lo > half { t.shift(&-Rat::one()) } else { t }),
            Err(Error::EndpointHit { .. }) => Ok(RatInterval::point(Rat::zero())),
            Err(e) => Err(e),
        }
    };
    let mut out = Vec::new();
    let limit = lv.q.to_u64().unwrap_or(u64::MAX).min(1 << 20);
    let mut visit = |n: &BigInt, t: &RatInterval| {
        let ty = lv.type_of(n);
        let base = n + &lv.q_prev;
        let c_first = if ty == 1 { BigInt::one() } else { BigInt::zero() };
        let c_min = std::cmp::max(c_first, ceil(&Rat::new(&q_lo - &base, lv.q.clone())));
        let c_max = std::cmp::min(
            &lv.a_next - 1u32,
            floor(&Rat::new(&q_hi - &base, lv.q.clone())),
        );
        if c_min > c_max {
            return;
        }
        let cs = floor(&((lv.d_prev.midpoint() - t.midpoint()) / lv.d.midpoint()));
        let mut cs_set = vec![c_min.clone(), &c_min + 1u32, &c_max - 1u32, c_max.clone()];
        for d in -2i32..=3 {
            cs_set.push(&cs + d);
        }
        for c in cs_set {
            if c >= c_min && c <= c_max {
                out.push(&base + c * &lv.q);
            }
        }
    };
    let dist_lo = |n: &BigInt, t: &RatInterval| -> Rat {
        let len = lv.length(lv.type_of(n));
        let a = -t.hi.clone();
        let b = &t.lo - &len.hi;
        std::cmp::max(Rat::zero(), std::cmp::max(a, b))
    };
    let t0 = signed_offset(&n_x)?;
    visit(&n_x, &t0);
    // forward in direction s_{k-1}: successor is the partner
    let mut n = lv.partner(&n_x);
    let mut steps = 1u64;
    while n != n_x && steps < limit {
        let t = signed_offset(&n)?;
        if dist_lo(&n, &t) > *r {
            break;
        }
        visit(&n, &t);
        n = lv.partner(&n);
        steps += 1;
    }
    if steps >= limit && n != n_x {
        return Err(Error::Budget(format!("block {k}: search radius covers too many intervals")));
    }
    let mut n = crate::partition::mod_q(&(&n_x - &lv.q_prev), &lv.q);
    let mut steps = 1u64;
    while n != n_x && steps < limit {
        let t = signed_offset(&n)?;
        if dist_lo(&n, &t) > *r {
            break;
        }
        visit(&n, &t);
        n = crate::partition::mod_q(&(&n - &lv.q_prev), &lv.q);
        steps += 1;
    }
    out.sort();
    out.dedup();
    Ok(out)
}

fn block_min(alpha: &Alpha, ladder: &Ladder, k: usize, x: &Target, budget: &Rat) -> Result<Vec<(BigInt, RatInterval)>> {
    let lo_q = Rat::from_integer(alpha.q(k) + 1u32);
    let mut radius = int(4) / &lo_q;
    loop {
        let cands = block_candidates(alpha, ladder, k, x, &radius)?;
        let vals = cands
            .par_iter()
            .map(|q| Ok((q.clone(), value(alpha, q, x, budget)?)))
            .collect::<Result<Vec<_>>>()?;
        let best = vals.iter().map(|v| v.1.hi.clone()).min();
        match best {
            Some(b) if &b / &lo_q <= radius => return Ok(vals),
            Some(b) => radius = &b / &lo_q,
            None => radius = &radius * int(4),
        }
        if radius > rat(1, 2) {
            radius = rat(1, 2);
        }
    }
}

/// Scans `|q|·‖qα − x‖` over `q_lo ≤ q ≤ q_hi` (and over `−q` in two-sided
/// mode) and returns the certified minimum.
///
/// Segments of at most [`BRUTE_LIMIT`] values are scanned one by one with
/// exact residues and a floating prefilter; complete blocks `(q_k, q_{k+1}]`
/// beyond that go through the partition. Candidates from either path are
/// re-evaluated as exact enclosures before the minimum is decided.
pub fn liminf_scan(alpha: &Alpha, x: &Target, q_lo: &BigInt, q_hi: &BigInt, mode: Mode, opts: &ScanOptions) -> Result<LiminfScan> {
    alpha.require_irrational()?;
    if !q_lo.is_positive() || q_lo > q_hi {
        return precondition("scan needs 1 ≤ q_lo ≤ q_hi");
    }
    if let Target::Rational(r) = x {
        if r.is_negative() || r >= &Rat::one() {
            return precondition("x must lie in [0, 1)");
        }
    }
    let conv = alpha.conv();
    let mut candidates: Vec<(BigInt, Option<RatInterval>)> = Vec::new();
    let mut below: Vec<BigInt> = Vec::new();
    let mut structured = Vec::new();
    let thr_f = opts.threshold.as_ref().map(rat_to_f64);
    let mut ladder: Option<Ladder> = None;
    let neg_x = negate_target(x);

    let mut cur = q_lo.clone();
    while &cur <= q_hi {
        let remaining = q_hi - &cur + 1u32;
        let (seg_end, structured_k) = if remaining <= BigInt::from(BRUTE_LIMIT) {
            (q_hi.clone(), None)
        } else {
            let j = level_of(conv, &cur).ok_or_else(|| Error::Precondition("empty range".into()))?;
            let blk_end = alpha.q(j + 1).clone();
            if &blk_end - &cur + 1u32 <= BigInt::from(BRUTE_LIMIT) {
                (blk_end, None)
            } else if cur == alpha.q(j) + 1u32 && &blk_end <= q_hi {
                (blk_end, Some(j))
            } else {
                return Err(Error::Budget(format!(
                    "partial block ({cur}..{}) too long to scan; align q_lo/q_hi with convergent denominators",
                    std::cmp::min(&blk_end, q_hi)
                )));
            }
        };
        match structured_k {
            None => {
                let lo = cur.to_u64().unwrap();
                let hi = seg_end.to_u64().ok_or_else(|| Error::Budget("segment too long".into()))?;
                let fs = FastScan::new(alpha, x, &seg_end)?;
                let res = brute_segment(&fs, lo, hi, mode, thr_f, opts.trace_cap);
                candidates.extend(res.near.into_iter().map(|(_, q)| (BigInt::from(q), None)));
                below.extend(res.below.into_iter().map(BigInt::from));
            }
            Some(j) => {
                if ladder.as_ref().map_or(true, |l| l.top() < j) {
                    ladder = Some(Ladder::new(alpha, j)?);
                }
                let lad = ladder.as_ref().unwrap();
                structured.push(j);
                for (q, v) in block_min(alpha, lad, j, x, &opts.budget)? {
                    candidates.push((q, Some(v)));
                }
                if mode == Mode::TwoSided {
                    for (q, v) in block_min(alpha, lad, j, &neg_x, &opts.budget)? {
                        candidates.push((-q, Some(v)));
                    }
                }
            }
        }
        cur = seg_end + 1u32;
    }

    let symmetric = match x {
        Target::Rational(r) => (r * int(2)).is_integer(),
        Target::Orbit(_) => false,
    };
    if symmetric {
        for c in candidates.iter_mut() {
            c.0 = c.0.abs();
        }
        below.iter_mut().for_each(|q| *q = q.abs());
    }
    candidates.sort_by(|a, b| a.0.cmp(&b.0));
    candidates.dedup_by(|a, b| a.0 == b.0);

    let (argmin, min_value) = certify_min(alpha, x, candidates, opts)?;
    below.sort();
    below.dedup();
    let mut trace = Vec::new();
    if let Some(t) = &opts.threshold {
        let vals = below
            .par_iter()
            .map(|q| Ok((q.clone(), value(alpha, q, x, &opts.budget)?)))
            .collect::<Result<Vec<_>>>()?;
        trace = vals.into_iter().filter(|(_, v)| v.lo < *t).collect();
        for (q, v) in candidates_below(&structured, &argmin, &min_value, t) {
            if !trace.iter().any(|(p, _)| p == &q) {
                trace.push((q, v));
            }
        }
    }
    Ok(LiminfScan {
        mode,
        q_lo: q_lo.clone(),
        q_hi: q_hi.clone(),
        min_value,
        argmin,
        trace,
        structured_blocks: structured,
    })
}

fn candidates_below(structured: &[usize], q: &BigInt, v: &RatInterval, t: &Rat) -> Vec<(BigInt, RatInterval)> {
    if !structured.is_empty() && v.lo < *t {
        vec![(q.clone(), v.clone())]
    } else {
        Vec::new()
    }
}

fn certify_min(
    alpha: &Alpha,
    x: &Target,
    candidates: Vec<(BigInt, Option<RatInterval>)>,
    opts: &ScanOptions,
) -> Result<(BigInt, RatInterval)> {
    let mut budget = opts.budget.clone();
    let mut vals = candidates
        .par_iter()
        .map(|(q, v)| match v {
            Some(v) if v.width() <= budget => Ok((q.clone(), v.clone())),
            _ => Ok((q.clone(), value(alpha, q, x, &budget)?)),
        })
        .collect::<Result<Vec<_>>>()?;
    if vals.is_empty() {
        return Err(Error::Invariant("scan produced no candidates".into()));
    }
    for _ in 0..8 {
        vals.sort_by(|a, b| a.1.lo.cmp(&b.1.lo).then(a.0.abs().cmp(&b.0.abs())));
        let best = vals[0].clone();
        let clash: Vec<usize> = (1..vals.len())
            .filter(|&i| vals[i].1.lo <= best.1.hi)
            .collect();
        let thr_ok = opts
            .threshold
            .as_ref()
            .map_or(true, |t| !best.1.contains(t) || best.1.is_point());
        if clash.is_empty() && thr_ok {
            return Ok(best);
        }
        if best.1.is_point() && clash.iter().all(|&i| vals[i].1 == best.1) {
            // exact ties (orbit hits): smallest |q| wins
            let mut tied: Vec<_> = std::iter::once(0).chain(clash).map(|i| vals[i].clone()).collect();
            tied.sort_by(|a, b| a.0.abs().cmp(&b.0.abs()));
            return Ok(tied.swap_remove(0));
        }
        budget /= int(1u64 << 40);
        let mut idx = vec![0];
        idx.extend(clash);
        for i in idx {
            let q = vals[i].0.clone();
            vals[i].1 = value(alpha, &q, x, &budget)?;
        }
    }
    let best_hi = vals[0].1.hi.clone();
    Err(Error::NearTie {
        tied: vals
            .iter()
            .filter(|v| v.1.lo <= best_hi)
            .map(|v| v.0.clone())
            .collect(),
    })
}

/// Outcome of [`bad_membership`].
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Membership {
    /// A `q` with `|q|·‖qα − x‖ < ε` was found (a certified violation).
    CertifiedOut {
        #[serde(with = "bigint_str")]
        q_witness: BigInt,
    },
    /// No violation up to the scale `Q`; this is not a proof of membership.
    TentativelyIn {
        #[serde(with = "bigint_str")]
        scale: BigInt,
    },
}

/// Tests `|q|·‖qα − x‖ ≥ ε` for `q_K ≤ |q| ≤ Q`.
pub fn bad_membership(alpha: &Alpha, x: &Target, eps: &Rat, k: usize, big_q: &BigInt, mode: Mode, budget: &Rat) -> Result<Membership> {
    if !eps.is_positive() {
        return precondition("ε must be positive");
    }
    let qk = alpha.q(k).clone();
    if big_q < &qk {
        return precondition("Q must be at least q_K");
    }
    let opts = ScanOptions {
        threshold: Some(eps.clone()),
        budget: budget.clone(),
        trace_cap: 1,
    };
    let scan = liminf_scan(alpha, x, &qk, big_q, mode, &opts)?;
    if scan.min_value.hi < *eps {
        let witness = scan
            .trace
            .iter()
            .filter(|(_, v)| v.hi < *eps)
            .map(|(q, _)| q.clone())
            .min_by_key(|q| q.abs())
            .unwrap_or(scan.argmin);
        Ok(Membership::CertifiedOut { q_witness: witness })
    } else if scan.min_value.lo >= *eps {
        Ok(Membership::TentativelyIn { scale: big_q.clone() })
    } else {
        Err(Error::NearTie { tied: vec![scan.argmin] })
    }
}

/// The schedule `k ↦ γ_k` of the one-sided construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum GammaRule {
    /// `γ_k = 1/log(a_k + shift)`.
    InvLog { shift: u32 },
    /// A constant `γ`.
    Constant {
        #[serde(with = "crate::interval::rat_str")]
        value: Rat,
    },
}

impl Default for GammaRule {
    fn default() -> Self {
        GammaRule::InvLog { shift: 2 }
    }
}

impl GammaRule {
    pub fn gamma(&self, alpha: &Alpha, k: usize) -> Result<RatInterval> {
        match self {
            GammaRule::InvLog { shift } => {
                let l = ln_enclosure(&Rat::from_integer(alpha.a(k) + *shift));
                RatInterval::point(Rat::one()).div(&l)
            }
            GammaRule::Constant { value } => Ok(RatInterval::point(value.clone())),
        }
    }
}

/// One level of the one-sided chain.
#[derive(Clone, Debug, Serialize)]
pub struct Generation {
    pub k: usize,
    /// Inclusive integer bounds certified to satisfy the strict range inequalities.
    #[serde(with = "bigint_str")]
    pub n_min: BigInt,
    #[serde(with = "bigint_str")]
    pub n_max: BigInt,
    #[serde(with = "bigint_str")]
    pub n: BigInt,
    /// `n = n_prev + q_{k-2} + b q_{k-1}` relative to the previous level.
    pub b: Option<String>,
    pub gamma: RatInterval,
    #[serde(with = "crate::interval::rat_str")]
    pub delta: Rat,
}

/// A finite-depth realization of the nested one-sided target set.
#[derive(Clone, Debug, Serialize)]
pub struct OneSidedTargetSet {
    #[serde(with = "crate::interval::rat_str")]
    pub epsilon: Rat,
    pub gamma_rule: GammaRule,
    pub start: usize,
    pub generations: Vec<Generation>,
    /// A rational point inside the deepest chosen interval.
    #[serde(with = "crate::interval::rat_str")]
    pub point: Rat,
}

impl OneSidedTargetSet {
    pub fn generation(&self, k: usize) -> Option<&Generation> {
        self.generations.iter().find(|g| g.k == k)
    }

    pub fn last_level(&self) -> usize {
        self.generations.last().map(|g| g.k).unwrap_or(self.start)
    }
}

fn delta(alpha: &Alpha, k: usize) -> Rat {
    Rat::new(alpha.conv().q(k as isize - 1).clone(), alpha.q(k).clone())
}

fn n_range(alpha: &Alpha, k: usize, s: &RatInterval, g: &RatInterval) -> (BigInt, BigInt) {
    let qk = int(alpha.q(k).clone());
    let qp = int(alpha.conv().q(k as isize - 1).clone());
    let lo = floor(&(&s.hi * &qk + &qp)) + 1u32;
    let hi = ceil(&((&s.lo + &g.lo) * &qk + &qp)) - 1u32;
    (lo, hi)
}

/// Builds the chain `n_K, n_{K+1}, …` with `I_{n_{k+1}}^(k+1) ⊂ I_{n_k}^(k)` and
/// `ε^{1/2}q_k + q_{k-1} < n_k < (ε^{1/2} + γ_k)q_k + q_{k-1}`, picking the
/// smallest admissible index at every level.
pub fn one_sided_build(alpha: &Alpha, eps: &Rat, k_start: usize, depth: usize, gamma: &GammaRule) -> Result<OneSidedTargetSet> {
    alpha.require_irrational()?;
    if !(eps.is_positive() && eps < &rat(1, 4)) {
        return precondition("one-sided construction needs 0 < ε < 1/4");
    }
    if depth == 0 || k_start < 1 {
        return precondition("need depth ≥ 1 and K ≥ 1");
    }
    let s = sqrt_enclosure(eps, 128);
    let bound = Rat::one() - &s.hi * int(2);
    let mut gens: Vec<Generation> = Vec::with_capacity(depth);
    for k in k_start..k_start + depth {
        let g = gamma.gamma(alpha, k)?;
        let d = delta(alpha, k);
        let lhs = &g.hi + &d * int(2);
        if lhs >= bound {
            return Err(Error::HypothesisFail {
                level: k,
                detail: format!(
                    "γ_k + 2δ_k ≈ {:.4} is not below 1 − 2ε^(1/2) ≈ {:.4}",
                    rat_to_f64(&lhs),
                    rat_to_f64(&bound)
                ),
            });
        }
        let (n_min, n_max) = n_range(alpha, k, &s, &g);
        if n_min > n_max {
            return Err(Error::NoAdmissibleIndex { level: k });
        }
        let (n, b) = match gens.last() {
            None => (n_min.clone(), None),
            Some(prev) => {
                let qp = alpha.conv().q(k as isize - 2).clone();
                let qk1 = alpha.q(k - 1).clone();
                let base = &prev.n + &qp;
                let b = std::cmp::max(BigInt::zero(), ceil(&Rat::new(&n_min - &base, qk1.clone())));
                let n = &base + &b * &qk1;
                if n > n_max || b > alpha.a(k) - 1u32 {
                    return Err(Error::NoAdmissibleIndex { level: k });
                }
                (n, Some(b.to_string()))
            }
        };
        gens.push(Generation {
            k,
            n_min,
            n_max,
            n,
            b,
            gamma: g,
            delta: d,
        });
    }
    let last = gens.last().unwrap();
    let point = interior_point(alpha, last.k, &last.n)?;
    Ok(OneSidedTargetSet {
        epsilon: eps.clone(),
        gamma_rule: gamma.clone(),
        start: k_start,
        generations: gens,
        point,
    })
}

/// A rational strictly inside `I_n^(k)`, verified by locating it.
pub fn interior_point(alpha: &Alpha, k: usize, n: &BigInt) -> Result<Rat> {
    let ladder = Ladder::new(alpha, k)?;
    let lv = ladder.level(k);
    let len = lv.length(lv.type_of(n));
    let budget = &len.lo / int(1u64 << 20);
    let start = alpha.times(n, &budget)?;
    let quarter = &len.lo / int(4);
    let (a, b) = if lv.orient > 0 {
        (&start.hi + &quarter, &start.lo + &quarter * int(3))
    } else {
        (&start.hi - &quarter * int(3), &start.lo - &quarter)
    };
    let x = crate::interval::frac(&simplest_between(&a, &b));
    let found = locate_descent(alpha, &ladder, &Target::Rational(x.clone()), k)?.n;
    if &found != n {
        return Err(Error::Invariant(format!("interior point of {n} located in {found}")));
    }
    Ok(x)
}

/// Margins of the disjointness and containment inequalities at one level.
#[derive(Clone, Debug, Serialize)]
pub struct LemmaReport {
    pub k: usize,
    pub n1: String,
    pub n2: String,
    pub b: String,
    /// Whether `n_1`, `n_2` satisfy the range conditions and nest.
    pub admissible: bool,
    /// Distance from the child interval to `n_1 α` minus `ε/n_1`.
    pub margin_start: RatInterval,
    /// Distance to `(n_1 + q_{k-1})α` minus `ε/(n_1 + q_{k-1})`.
    pub margin_partner: RatInterval,
    /// Worst margin over the new points inside `I_{n_1}^(k)` other than the child's endpoints.
    pub margin_inside: Option<RatInterval>,
    /// Worst margin over the new points outside `I_{n_1}^(k)`.
    pub margin_outside: RatInterval,
    /// `ε_k/(n_1 + q_{k-1})` minus the farthest distance from the child to `(n_1 + q_{k-1})α`.
    pub margin_containment: RatInterval,
    pub eps_k: RatInterval,
    /// Number of interior points checked one by one (all of them when `a_{k+1}` is moderate).
    pub inside_checked: String,
    pub all_positive: bool,
}

/// `ε_k = (ε^{1/2} + γ_k + 2δ_k)(ε^{1/2} + γ_{k+1} + 2δ_{k+1})`.
pub fn eps_k(alpha: &Alpha, eps: &Rat, k: usize, gamma: &GammaRule) -> Result<RatInterval> {
    let s = sqrt_enclosure(eps, 128);
    let f = |j: usize| -> Result<RatInterval> {
        Ok(s.add(&gamma.gamma(alpha, j)?).shift(&(delta(alpha, j) * int(2))))
    };
    Ok(f(k)?.mul(&f(k + 1)?))
}

/// Checks both one-sided lemmas for the pair `(n_1, n_2)` at levels `k, k+1`.
///
/// New points `q_k < n ≤ q_{k+1}` inside `I_{n_1}^(k)` are `n_1 + q_{k-1} + j q_k`
/// at offsets `o_j = D_{k-1} − j D_k`; the child `I_{n_2}^(k+1)` with
/// `n_2 = n_1 + q_{k-1} + b q_k` spans `[o_{b+1}, o_b]`. All of them are
/// checked when `a_{k+1} ≤ 10^6`; otherwise the concave/monotone shape of the
/// margin in `j` reduces the check to `j ∈ {1, b−1, b+2}`.
pub fn check_lemmas_pair(alpha: &Alpha, eps: &Rat, gamma: &GammaRule, k: usize, n1: &BigInt, n2: &BigInt) -> Result<LemmaReport> {
    let ladder_lv = crate::partition::Level::new(alpha, k)?;
    let lv = &ladder_lv;
    let s = sqrt_enclosure(eps, 128);
    let base = n1 + &lv.q_prev;
    let diff = n2 - &base;
    let (b, rem) = diff.div_mod_floor(&lv.q);
    let a = lv.a_next.clone();
    let nested = rem.is_zero() && b >= BigInt::zero() && b < a && lv.type_of(n1) == 1;
    let g1 = gamma.gamma(alpha, k)?;
    let g2 = gamma.gamma(alpha, k + 1)?;
    let (lo1, hi1) = n_range(alpha, k, &s, &g1);
    let (lo2, hi2) = n_range(alpha, k + 1, &s, &g2);
    let admissible = nested && n1 >= &lo1 && n1 <= &hi1 && n2 >= &lo2 && n2 <= &hi2;

    let epsi = RatInterval::point(eps.clone());
    let over = |n: &BigInt| epsi.scale(&Rat::new(BigInt::one(), n.clone()));
    let o = |j: &BigInt| lv.child_offset(j);
    let b1 = &b + 1u32;
    let margin_start = o(&b1).sub(&over(n1));
    let margin_partner = lv.d.scale_int(&b).sub(&over(&base));
    let near = margin_start
        .add(&over(n1))
        .min(&margin_partner.add(&over(&base)));
    let margin_outside = near.sub(&over(&(&lv.q + 1u32)));
    let e_k = eps_k(alpha, eps, k, gamma)?;
    let margin_containment = e_k
        .scale(&Rat::new(BigInt::one(), base.clone()))
        .sub(&lv.d.scale_int(&b1));

    let inside_margin = |j: &BigInt| -> RatInterval {
        let n = &base + j * &lv.q;
        let dist = if j < &b {
            lv.d.scale_int(&(&b - j))
        } else {
            lv.d.scale_int(&(j - &b1))
        };
        dist.sub(&over(&n))
    };
    let mut js: Vec<BigInt> = Vec::new();
    let exhaustive = a <= BigInt::from(1_000_000u32);
    if exhaustive {
        let a_u = a.to_u64().unwrap();
        js.extend((1..a_u).map(BigInt::from).filter(|j| j != &b && j != &b1));
    } else {
        for j in [BigInt::one(), &b - 1u32, &b + 2u32] {
            if j >= BigInt::one() && j < a && j != b && j != b1 {
                js.push(j);
            }
        }
    }
    let margin_inside = js
        .par_iter()
        .map(inside_margin)
        .reduce_with(|x, y| if x.lo <= y.lo { x } else { y });
    let mut all = vec![&margin_start, &margin_partner, &margin_outside, &margin_containment];
    if let Some(m) = &margin_inside {
        all.push(m);
    }
    let all_positive = admissible && all.iter().all(|m| m.lo.is_positive());
    Ok(LemmaReport {
        k,
        n1: n1.to_string(),
        n2: n2.to_string(),
        b: b.to_string(),
        admissible,
        margin_start,
        margin_partner,
        margin_inside,
        margin_outside,
        margin_containment,
        eps_k: e_k,
        inside_checked: js.len().to_string(),
        all_positive,
    })
}

/// [`check_lemmas_pair`] for consecutive generations of a built chain.
pub fn check_onesided_lemmas(alpha: &Alpha, ots: &OneSidedTargetSet, k: usize) -> Result<LemmaReport> {
    let g1 = ots
        .generation(k)
        .ok_or_else(|| Error::Precondition(format!("no generation at level {k}")))?;
    let g2 = ots
        .generation(k + 1)
        .ok_or_else(|| Error::Precondition(format!("no generation at level {}", k + 1)))?;
    check_lemmas_pair(alpha, &ots.epsilon, &ots.gamma_rule, k, &g1.n, &g2.n)
}

/// Point-by-point check of the disjointness lemma over every `q_k < n ≤ q_{k+1}`
/// (desk scale): `B(nα, ε/n)` must miss `I_{n_2}^(k+1)` unless `nα` is one of
/// its endpoints. Returns the number of `n` checked.
pub fn check_disjointness_exhaustive(alpha: &Alpha, eps: &Rat, k: usize, n2: &BigInt, cap: u64) -> Result<u64> {
    let ladder = Ladder::new(alpha, k + 1)?;
    let lv = ladder.level(k + 1);
    let qk = lv.q_prev.to_u64().ok_or_else(|| Error::Budget("q_k too large".into()))?;
    let qk1 = lv.q.to_u64().filter(|&q| q - qk <= cap).ok_or_else(|| Error::Budget("block too long".into()))?;
    let len = lv.length(lv.type_of(n2));
    let partner = lv.partner(n2);
    let q_next = Rat::from_integer(alpha.q(k + 2).clone());
    let budget = (q_next * int(1u64 << 24)).recip();
    let half = rat(1, 2);
    (qk + 1..=qk1).into_par_iter().try_for_each(|n| -> Result<()> {
        let nb = BigInt::from(n);
        if &nb == n2 || nb == partner {
            return Ok(());
        }
        // offset of nα from n2·α in the child's direction, in (−1/2, 1/2]
        let t = offset(alpha, &Target::Orbit(nb.clone()), n2, lv.orient, &budget, k + 1)?;
        let t = if t.lo > half { t.shift(&-Rat::one()) } else { t };
        let d_lo = std::cmp::max(-t.hi.clone(), &t.lo - &len.hi);
        if d_lo <= eps / int(nb.clone()) {
            return Err(Error::Invariant(format!(
                "level {k}: B({n}α, ε/{n}) meets I_{n2}^({})",
                k + 1
            )));
        }
        Ok(())
    })?;
    Ok(qk1 - qk)
}

/// How a descent ended.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DescentOutcome {
    /// `q > q_K` with `q‖qα − x‖ < ε − δ`.
    Witness {
        #[serde(with = "bigint_str")]
        q: BigInt,
        level: usize,
    },
    /// The ratio bound forces `n_k/q_k ≤ 0` at this level.
    Contradiction { level: usize },
    /// Neither happened within the step bound.
    Undecided,
}

#[derive(Clone, Debug, Serialize)]
pub struct DescentStep {
    pub k: usize,
    pub n: String,
    pub ratio: f64,
    pub value: RatInterval,
    pub ball_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DescentTrace {
    pub start: usize,
    pub step_bound: u64,
    pub steps: Vec<DescentStep>,
    pub outcome: DescentOutcome,
}

/// Smallest `K ≥ from` such that `δ_{k+1} + δ_{k+1}^2 < δ` for `K ≤ k ≤ K + span`.
pub fn descent_start(alpha: &Alpha, delta_small: &Rat, from: usize, span: usize) -> Result<usize> {
    let ok = |k: usize| {
        let d = delta(alpha, k + 1);
        &d + &d * &d < *delta_small
    };
    let mut k = from;
    while k + span + 3 < alpha.max_depth() {
        if (k..=k + span).all(ok) {
            return Ok(k);
        }
        k += 1;
    }
    Err(Error::Budget("no admissible descent start within computed depth".into()))
}

/// Follows `n_k`, the index of the level-`k` interval containing `x`, from
/// level `K`. While `n_k‖n_k α − x‖ ≥ ε − δ` each step must lower `n_k/q_k` by
/// at least `ε − 2δ − 1/4`, which cannot continue for more than
/// `⌈(n_K/q_K)/(ε − 2δ − 1/4)⌉` steps; the first `n_k > q_K` where the ball
/// condition fails refutes `x`.
pub fn emptiness_descent(alpha: &Alpha, eps: &Rat, x: &Rat, k_start: usize, delta_small: &Rat) -> Result<DescentTrace> {
    alpha.require_irrational()?;
    let gap = eps - delta_small * int(2) - rat(1, 4);
    if !gap.is_positive() || !delta_small.is_positive() {
        return precondition("emptiness descent needs δ > 0 and ε − 2δ > 1/4");
    }
    if x.is_negative() || x >= &Rat::one() {
        return precondition("x must lie in [0, 1)");
    }
    let target = Target::Rational(x.clone());
    let first = locate_path(alpha, &Ladder::new(alpha, k_start)?, &target, k_start)?;
    let n_k = first[k_start].clone();
    let r_k = Rat::new(n_k.clone(), alpha.q(k_start).clone());
    let bound = ceil(&(&r_k / &gap)).to_u64().unwrap_or(u64::MAX);
    let last = k_start + bound as usize + 1;
    for k in k_start..last {
        let d = delta(alpha, k + 1);
        if &d + &d * &d >= *delta_small {
            return precondition(format!("δ_(k+1) + δ_(k+1)^2 < δ fails at k = {k}"));
        }
    }
    let ladder = Ladder::new(alpha, last)?;
    let path = locate_path(alpha, &ladder, &target, last)?;
    let thr = eps - delta_small;
    let qk_start = alpha.q(k_start).clone();
    let mut steps = Vec::new();
    let mut outcome = DescentOutcome::Undecided;
    for k in k_start..last {
        let n = &path[k];
        let budget = rat(1, 1 << 30) * &gap;
        let v = {
            let mut b = budget;
            let mut v = value(alpha, n, &target, &b)?;
            let mut tries = 0;
            while v.contains(&thr) && !v.is_point() && tries < 8 {
                b /= int(1u64 << 40);
                v = value(alpha, n, &target, &b)?;
                tries += 1;
            }
            if v.contains(&thr) {
                return Err(Error::NearTie { tied: vec![n.clone()] });
            }
            v
        };
        let ball_ok = v.lo >= thr;
        let ratio = Rat::new(n.clone(), alpha.q(k).clone());
        steps.push(DescentStep {
            k,
            n: n.to_string(),
            ratio: rat_to_f64(&ratio),
            value: v,
            ball_ok,
        });
        if !ball_ok && n > &qk_start {
            outcome = DescentOutcome::Witness { q: n.clone(), level: k };
            break;
        }
        if ball_ok {
            let next = Rat::new(path[k + 1].clone(), alpha.q(k + 1).clone());
            if &ratio - &next < gap {
                return Err(Error::Invariant(format!(
                    "descent step at level {k} lowers n_k/q_k by less than ε − 2δ − 1/4"
                )));
            }
        }
        if (k - k_start) as u64 >= bound {
            outcome = DescentOutcome::Contradiction { level: k };
            break;
        }
    }
    Ok(DescentTrace {
        start: k_start,
        step_bound: bound,
        steps,
        outcome,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cf::{fixture, Alpha};

    fn alpha(name: &str) -> Alpha {
        Alpha::with_depth(fixture(name).unwrap(), 120).unwrap()
    }

    /// Direct f64-free oracle: exact enclosure for every q.
    fn oracle_min(a: &Alpha, x: &Target, lo: u64, hi: u64, mode: Mode) -> (BigInt, f64) {
        let mut best = (BigInt::zero(), f64::INFINITY);
        for q in lo..=hi {
            let mut qs = vec![BigInt::from(q)];
            if mode == Mode::TwoSided {
                qs.push(-BigInt::from(q));
            }
            for q in qs {
                let v = value(a, &q, x, &rat(1, 1 << 50)).unwrap().mid_f64();
                if v < best.1 {
                    best = (q, v);
                }
            }
        }
        best
    }

    #[test]
    fn golden_half_two_sided_below_quarter() {
        let a = alpha("golden");
        let x = Target::Rational(rat(1, 2));
        let s = liminf_scan(&a, &x, &BigInt::one(), &BigInt::from(10_000), Mode::TwoSided, &ScanOptions::default()).unwrap();
        assert!(s.min_value.hi < rat(1, 4));
    }

    #[test]
    fn orbit_target_hits_zero() {
        let a = alpha("sqrt2m1");
        let x = Target::Orbit(BigInt::from(3));
        let s = liminf_scan(&a, &x, &BigInt::one(), &BigInt::from(10), Mode::TwoSided, &ScanOptions::default()).unwrap();
        assert_eq!(s.min_value, RatInterval::point(Rat::zero()));
        assert_eq!(s.argmin, BigInt::from(3));
    }

    #[test]
    fn brute_matches_oracle() {
        for name in ["golden", "sqrt2m1", "growing"] {
            let a = alpha(name);
            for (p, q) in [(1, 3), (2, 7), (5, 11), (1, 2)] {
                let x = Target::Rational(rat(p, q));
                for mode in [Mode::Positive, Mode::TwoSided] {
                    let s = liminf_scan(&a, &x, &BigInt::from(3), &BigInt::from(400), mode, &ScanOptions::default()).unwrap();
                    let (_, v) = oracle_min(&a, &x, 3, 400, mode);
                    assert!((s.min_value.mid_f64() - v).abs() < 1e-12, "{name} {p}/{q} {mode:?}");
                }
            }
        }
    }

    #[test]
    fn block_matches_brute() {
        // full blocks scanned structurally agree with the one-by-one scan
        for name in ["golden", "sqrt2m1", "growing", "sqrt7m2", "nonheavy_bounded"] {
            let a = alpha(name);
            let mut lad = None;
            for k in 3..9 {
                let qk = a.q(k).clone();
                let qk1 = a.q(k + 1).clone();
                if qk1.to_u64().unwrap() > 3_000_000 {
                    break;
                }
                if lad.as_ref().map_or(true, |l: &Ladder| l.top() < k) {
                    lad = Some(Ladder::new(&a, k + 2).unwrap());
                }
                for (p, q) in [(1, 3), (7, 19), (1, 2)] {
                    let x = Target::Rational(rat(p, q));
                    let vals = block_min(&a, lad.as_ref().unwrap(), k, &x, &rat(1, 1 << 50)).unwrap();
                    let best = vals.iter().map(|v| v.1.mid_f64()).fold(f64::INFINITY, f64::min);
                    let s = liminf_scan(&a, &x, &(&qk + 1u32), &qk1, Mode::Positive, &ScanOptions::default()).unwrap();
                    assert!((s.min_value.mid_f64() - best).abs() < 1e-12, "{name} k={k} {p}/{q}: {best} vs {}", s.min_value.mid_f64());
                }
            }
        }
    }

    #[test]
    fn khintchine_witness_golden() {
        let a = alpha("golden");
        let x = Target::Rational(rat(1, 2));
        let thr = rat(1, 100) + f64_rat(1.0 / 5f64.sqrt());
        let s = liminf_scan(&a, &x, &BigInt::one(), &BigInt::from(1_000_000), Mode::Positive, &ScanOptions { threshold: Some(thr.clone()), ..Default::default() }).unwrap();
        assert!(!s.trace.is_empty());
        assert!(s.trace.iter().all(|(_, v)| v.hi < thr || v.lo < thr));
    }

    fn f64_rat(v: f64) -> Rat {
        crate::interval::f64_to_rat(v)
    }

    #[test]
    fn membership_examples() {
        let a = alpha("sqrt2m1");
        let out = bad_membership(&a, &Target::Orbit(BigInt::from(5)), &rat(1, 100), 1, &BigInt::from(10), Mode::TwoSided, &rat(1, 1 << 40)).unwrap();
        assert_eq!(out, Membership::CertifiedOut { q_witness: BigInt::from(5) });
        let g = alpha("golden");
        let out = bad_membership(&g, &Target::Rational(rat(1, 2)), &rat(26, 100), 1, &BigInt::from(10_000), Mode::TwoSided, &rat(1, 1 << 40)).unwrap();
        assert!(matches!(out, Membership::CertifiedOut { .. }));
    }

    #[test]
    fn golden_has_no_one_sided_chain() {
        let g = alpha("golden");
        let r = one_sided_build(&g, &rat(1, 25), 5, 3, &GammaRule::default());
        assert!(matches!(r, Err(Error::HypothesisFail { .. }) | Err(Error::NoAdmissibleIndex { .. })));
    }

    #[test]
    fn small_chain_lemmas_and_scan() {
        // ε = 10^-4 allows an early start on the growing fixture, so the
        // guarantees can be confronted with a direct scan.
        let a = alpha("growing");
        let eps = rat(1, 10_000);
        let ots = one_sided_build(&a, &eps, 6, 5, &GammaRule::default()).unwrap();
        for k in 6..10 {
            let r = check_onesided_lemmas(&a, &ots, k).unwrap();
            assert!(r.all_positive, "{r:?}");
        }
        for k in 6..8 {
            let n2 = &ots.generation(k + 1).unwrap().n;
            check_disjointness_exhaustive(&a, &eps, k, n2, 1_000_000).unwrap();
        }
        let x = Target::Rational(ots.point.clone());
        let lo = a.q(6) + 1u32;
        let hi = a.q(8).clone();
        let s = liminf_scan(&a, &x, &lo, &hi, Mode::Positive, &ScanOptions::default()).unwrap();
        assert!(s.min_value.lo >= eps, "min {}", s.min_value);
    }

    #[test]
    fn misuse_is_detected() {
        let a = alpha("growing");
        let eps = rat(1, 25);
        let ots = one_sided_build(&a, &eps, 40, 2, &GammaRule::default()).unwrap();
        let g1 = ots.generation(40).unwrap();
        let lv = crate::partition::Level::new(&a, 40).unwrap();
        // the last-but-one child hugs the start of the parent
        let b = &lv.a_next - 2u32;
        let n2 = &g1.n + &lv.q_prev + b * &lv.q;
        let r = check_lemmas_pair(&a, &eps, &GammaRule::default(), 40, &g1.n, &n2).unwrap();
        assert!(!r.admissible);
        assert!(!r.all_positive);
    }

    #[test]
    fn descent_rejects_quarter() {
        let a = alpha("growing");
        assert!(emptiness_descent(&a, &rat(1, 4), &rat(1, 2), 10, &rat(1, 100)).is_err());
    }

    #[test]
    fn descent_terminates() {
        let a = alpha("growing");
        let delta_small = rat(1, 50);
        let k = descent_start(&a, &delta_small, 2, 20).unwrap();
        for x in [rat(1, 2), rat(1, 3), rat(5, 17), rat(123, 1000)] {
            let t = emptiness_descent(&a, &rat(35, 100), &x, k, &delta_small).unwrap();
            assert_ne!(t.outcome, DescentOutcome::Undecided, "{x}");
            if let DescentOutcome::Witness { q, .. } = &t.outcome {
                let v = value(&a, q, &Target::Rational(x.clone()), &rat(1, 1 << 40)).unwrap();
                assert!(v.hi < rat(35, 100));
            }
        }
    }

    #[test]
    fn transfer_inequality_samples() {
        // ‖yx‖ ≤ |y|·‖αk − x‖ + |k|·‖αy‖
        use rand::{Rng, SeedableRng};
        let a = alpha("sqrt2m1");
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let y: i64 = rng.gen_range(-500..=500);
            let k: i64 = rng.gen_range(-500..=500);
            if y == 0 {
                continue;
            }
            let x = rat(rng.gen_range(0..997), 997);
            let lhs = crate::interval::dist_to_int(&(&x * int(y)));
            let b = rat(1, 1 << 60);
            let t1 = a.times(&BigInt::from(k), &b).unwrap().shift(&-x.clone()).dist_to_int().scale_int(&BigInt::from(y.abs()));
            let t2 = if k == 0 {
                RatInterval::point(Rat::zero())
            } else {
                a.times(&BigInt::from(y), &b).unwrap().dist_to_int().scale_int(&BigInt::from(k.abs()))
            };
            assert!(lhs <= t1.add(&t2).hi);
        }
    }
}
