//! Nested interval covers and dimension bounds: Erdős–Taylor covers with the
//! mass-distribution lower bound, survivor counts for the upper bound, and a
//! box-counting estimator used as an empirical cross-check.

use std::collections::HashMap;
use std::io::Write;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::cf::{Alpha, ConvergentSeq};
use crate::error::{precondition, Error, Result};
use crate::interval::{ceil, floor, fmt_rat, int, rat, Rat, RatInterval};

pub const DEFAULT_INTERVAL_CAP: usize = 1_000_000;

/// `ln` of a positive rational, without overflowing on huge parts.
pub fn ln_rat(r: &Rat) -> f64 {
    assert!(r.is_positive());
    ln_big(r.numer()) - ln_big(r.denom())
}

pub fn ln_big(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits < 1000 {
        return n.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    (n >> shift as usize).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

#[derive(Clone, Debug, Serialize)]
pub struct CoverStats {
    /// Fewest children in a parent of the previous generation.
    pub m_gen: u64,
    #[serde(with = "crate::interval::rat_str")]
    pub gap_gen: Rat,
    #[serde(with = "crate::interval::rat_str")]
    pub len_max: Rat,
}

/// One generation of a nested cover of `[0, 1]`.
#[derive(Clone, Debug, Serialize)]
pub struct IntervalCover {
    pub generation: usize,
    pub intervals: Vec<RatInterval>,
    pub stats: CoverStats,
    /// Set when the generation hit the interval cap and was cut short.
    pub truncated: bool,
}

impl IntervalCover {
    /// Builds a generation from sorted intervals and per-parent child counts.
    pub fn from_parts(generation: usize, intervals: Vec<RatInterval>, min_children: u64, truncated: bool) -> Result<Self> {
        for w in intervals.windows(2) {
            if w[0].hi >= w[1].lo {
                return Err(Error::Invariant(format!("generation {generation}: overlapping intervals")));
            }
        }
        let gap = intervals
            .windows(2)
            .map(|w| &w[1].lo - &w[0].hi)
            .min()
            .unwrap_or_else(Rat::one);
        let len_max = intervals.iter().map(|i| i.width()).max().unwrap_or_else(Rat::zero);
        Ok(IntervalCover {
            generation,
            intervals,
            stats: CoverStats {
                m_gen: min_children,
                gap_gen: gap,
                len_max,
            },
            truncated,
        })
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Checks that every interval lies in one interval of `parent`.
    pub fn check_nested(&self, parent: &IntervalCover) -> Result<()> {
        let ps = &parent.intervals;
        for iv in &self.intervals {
            let i = ps.partition_point(|p| p.lo <= iv.lo);
            if i == 0 || !ps[i - 1].contains_interval(iv) {
                return Err(Error::Invariant(format!(
                    "generation {}: interval {iv} escapes its parent",
                    self.generation
                )));
            }
        }
        Ok(())
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for iv in &self.intervals {
            writeln!(
                w,
                "{}",
                serde_json::json!({"gen": self.generation, "lo": fmt_rat(&iv.lo), "hi": fmt_rat(&iv.hi)})
            )?;
        }
        Ok(())
    }
}

/// Per-generation stats as CSV: `gen,count,m,gap_num,gap_den,lenmax_num,lenmax_den`.
pub fn write_stats_csv<W: Write>(covers: &[IntervalCover], header: bool, mut w: W) -> Result<()> {
    if header {
        writeln!(w, "gen,count,m,gap_num,gap_den,lenmax_num,lenmax_den")?;
    }
    for c in covers {
        let s = &c.stats;
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            c.generation,
            c.len(),
            s.m_gen,
            s.gap_gen.numer(),
            s.gap_gen.denom(),
            s.len_max.numer(),
            s.len_max.denom()
        )?;
    }
    Ok(())
}

/// Generations `1..=depth` of the Cantor set `⋂ E_k`, where `E_k` is the union
/// of `[(j+δ)/n_k, (j+1−δ)/n_k]`. Each generation keeps the `E_g` intervals
/// that lie wholly inside a surviving interval of the previous one.
pub fn erdos_taylor_cover(n_seq: &[BigInt], delta: &Rat, depth: usize, cap: usize) -> Result<Vec<IntervalCover>> {
    if !(delta.is_positive() && delta < &rat(1, 2)) {
        return precondition("δ must lie in (0, 1/2)");
    }
    if depth == 0 || n_seq.len() < depth {
        return precondition(format!("need {depth} terms of n_k, got {}", n_seq.len()));
    }
    if !n_seq[0].is_positive() {
        return precondition("n_1 must be positive");
    }
    let one_m = Rat::one() - delta * int(2);
    let ratio = int(4) / &one_m;
    for (k, w) in n_seq[..depth].windows(2).enumerate() {
        if Rat::new(w[1].clone(), w[0].clone()) < ratio {
            return Err(Error::HypothesisFail {
                level: k + 2,
                detail: format!("n_(k+1)/n_k = {}/{} is below 4/(1−2δ) = {}", w[1], w[0], ratio),
            });
        }
    }
    let mut covers: Vec<IntervalCover> = Vec::with_capacity(depth);
    let mut parents = vec![RatInterval::new(Rat::zero(), Rat::one())];
    for g in 0..depth {
        let n = &n_seq[g];
        let nr = int(n.clone());
        let per_parent: Vec<Vec<RatInterval>> = parents
            .par_iter()
            .map(|p| {
                let j_lo = std::cmp::max(BigInt::zero(), ceil(&(&p.lo * &nr - delta)));
                let j_hi = std::cmp::min(n - 1u32, floor(&(&p.hi * &nr - Rat::one() + delta)));
                let mut out = Vec::new();
                let mut j = j_lo;
                while j <= j_hi && out.len() <= cap {
                    let jr = int(j.clone());
                    out.push(RatInterval::new((&jr + delta) / &nr, (&jr + Rat::one() - delta) / &nr));
                    j += 1u32;
                }
                out
            })
            .collect();
        let m = per_parent.iter().map(|c| c.len() as u64).min().unwrap_or(0);
        let mut all: Vec<RatInterval> = Vec::new();
        let mut truncated = covers.last().map_or(false, |c| c.truncated);
        for c in per_parent {
            if all.len() + c.len() > cap {
                truncated = true;
                break;
            }
            all.extend(c);
        }
        let cover = IntervalCover::from_parts(g + 1, all, m, truncated)?;
        // exact checks of the counting and spacing claims
        if g > 0 {
            let lower = Rat::new(n.clone(), n_seq[g - 1].clone()) * &one_m - int(2);
            if int(m) < lower {
                return Err(Error::Invariant(format!(
                    "generation {}: {m} children, fewer than (1−2δ)n_k/n_(k-1) − 2",
                    g + 1
                )));
            }
            cover.check_nested(&covers[g - 1])?;
        }
        if cover.len() > 1 && cover.stats.gap_gen < delta * int(2) / &nr {
            return Err(Error::Invariant(format!("generation {}: gap below 2δ/n_k", g + 1)));
        }
        parents = cover.intervals.clone();
        covers.push(cover);
        if parents.is_empty() {
            break;
        }
    }
    Ok(covers)
}

/// `log(m_1 ⋯ m_{G−1}) / (−log(m_G ε_G))` evaluated at `G = m.len()`.
pub fn mass_dist_formula(m: &[u64], gaps: &[Rat]) -> Result<f64> {
    if m.len() < 3 || m.len() != gaps.len() {
        return precondition("mass distribution needs at least 3 generations of stats");
    }
    if let Some(i) = m.iter().position(|&x| x < 2) {
        return precondition(format!("m_{} = {} < 2", i + 1, m[i]));
    }
    let g = m.len();
    let num: f64 = m[..g - 1].iter().map(|&x| (x as f64).ln()).sum();
    let den = -((m[g - 1] as f64).ln() + ln_rat(&gaps[g - 1]));
    if den <= 0.0 {
        return Err(Error::Invariant("m_G ε_G ≥ 1".into()));
    }
    Ok(num / den)
}

#[derive(Clone, Debug, Serialize)]
pub struct DimBounds {
    pub lower: f64,
    /// Finite-depth values at the last three generations, oldest first.
    pub lower_trend: Vec<f64>,
    pub upper: Option<f64>,
    pub boxcount: Option<BoxEstimate>,
}

/// Mass-distribution bound at the deepest generation, as a finite proxy for the liminf.
pub fn mass_dist_lower_bound(covers: &[IntervalCover]) -> Result<DimBounds> {
    let m: Vec<u64> = covers.iter().map(|c| c.stats.m_gen).collect();
    let gaps: Vec<Rat> = covers.iter().map(|c| c.stats.gap_gen.clone()).collect();
    let lower = mass_dist_formula(&m, &gaps)?;
    let mut trend = Vec::new();
    for g in (3..=covers.len()).rev().take(3) {
        trend.push(mass_dist_formula(&m[..g], &gaps[..g])?);
    }
    trend.reverse();
    Ok(DimBounds {
        lower: lower.clamp(0.0, 1.0),
        lower_trend: trend,
        upper: None,
        boxcount: None,
    })
}

/// Greedy sparse levels: `k_0 = K`, `k_{i+1}` the least index with
/// `q_{k_i}/q_{k_{i+1}} < ε/12`. Returns the levels and the largest gap,
/// checked against the bound implied by `q_{k+2} ≥ 2q_k`.
pub fn sparse_times(conv: &ConvergentSeq, eps: &Rat, k0: usize, count: usize) -> Result<(Vec<usize>, usize)> {
    let r = eps / int(12);
    if !(eps.is_positive() && r < Rat::one()) {
        return precondition("need 0 < ε and ε/12 < 1");
    }
    if k0 > conv.last() {
        return precondition("K beyond computed convergents");
    }
    let mut ks = vec![k0];
    let mut gap = 0;
    while ks.len() <= count {
        let cur = *ks.last().unwrap();
        let qc = conv.qu(cur);
        let mut k = cur + 1;
        loop {
            if k > conv.last() {
                return Err(Error::Budget(format!(
                    "sparse level {} needs convergents beyond index {}",
                    ks.len(),
                    conv.last()
                )));
            }
            if int(qc.clone()) < &r * int(conv.qu(k).clone()) {
                break;
            }
            k += 1;
        }
        gap = gap.max(k - cur);
        ks.push(k);
    }
    // 2^j > 12/ε forces a hit within 2j steps
    let mut j = 0usize;
    while int(BigInt::one() << j) <= Rat::one() / &r {
        j += 1;
    }
    if gap > 2 * j {
        return Err(Error::Invariant(format!("sparse gap {gap} exceeds 2⌈log2(12/ε)⌉ = {}", 2 * j)));
    }
    Ok((ks, gap))
}

/// The index map φ with `q_{φ(i)} ≥ R q_{φ(i−1)}` and `q_{φ(i−1)+1} ≥ q_{φ(i)}/R`,
/// built by jumping to the next index of `J_0 = {j : q_{j+1} ≥ R q_j}` and
/// filling backwards. Only complete rounds inside the computed range are kept.
pub fn phi_subsequence(conv: &ConvergentSeq, r: &Rat) -> Result<Vec<usize>> {
    if r <= &Rat::one() {
        return precondition("R must exceed 1");
    }
    let q = |k: usize| int(conv.qu(k).clone());
    let last = conv.last();
    let in_j0 = |j: usize| j + 1 <= last && q(j + 1) >= r * q(j);
    let j0: Vec<usize> = (1..last).filter(|&j| in_j0(j)).collect();
    let Some(&first) = j0.first() else {
        return Err(Error::HypothesisFail {
            level: last,
            detail: format!("no j ≤ {last} with q_(j+1) ≥ R q_j"),
        });
    };
    let mut phi = vec![first];
    for &next in j0.iter().skip(1) {
        let prev = *phi.last().unwrap();
        let mut back = vec![next];
        loop {
            let top = *back.last().unwrap();
            let t = (prev + 1..top).rev().find(|&t| q(top) >= r * q(t));
            match t {
                Some(t) => back.push(t),
                None => break,
            }
        }
        back.reverse();
        phi.extend(back);
    }
    for i in 1..phi.len() {
        let (a, b) = (phi[i - 1], phi[i]);
        if q(b) < r * q(a) || q(a + 1) * r < q(b) {
            return Err(Error::Invariant(format!("φ fails at i = {}", i + 1)));
        }
    }
    Ok(phi)
}

/// Result of [`survivor_cover`].
#[derive(Clone, Debug, Serialize)]
pub struct SurvivorCover {
    #[serde(with = "crate::interval::rat_str")]
    pub epsilon: Rat,
    /// `k_0 = K, k_1, …`.
    pub levels: Vec<usize>,
    pub c_eps: usize,
    /// Number of level-`k_i` intervals outside every removed interval of generations `1..=i`.
    pub counts: Vec<String>,
    /// `q_{k_i}(1 − ε/32)^i`, as exact rationals.
    pub bounds: Vec<String>,
    pub m: String,
    /// Generations `i ≥ 1` with `q_{k_i} ≤ M^i`.
    pub applicable: Vec<usize>,
    pub upper_bound: f64,
    #[serde(skip)]
    counts_big: Vec<BigInt>,
    #[serde(skip)]
    q_levels: Vec<BigInt>,
}

impl SurvivorCover {
    pub fn count(&self, i: usize) -> &BigInt {
        &self.counts_big[i]
    }

    pub fn bound(&self, i: usize) -> Rat {
        let f = Rat::one() - &self.epsilon / int(32);
        int(self.q_levels[i].clone()) * crate::interval::pow_rat(&f, i as u32)
    }

    /// `Σ |I|^s` over generation `i`, with `|I| ≤ 2/q_{k_i}`.
    pub fn s_cost(&self, i: usize, s: f64) -> f64 {
        let c = ln_big(&self.counts_big[i].clone().max(BigInt::one()));
        (c + s * (2f64.ln() - ln_big(&self.q_levels[i]))).exp()
    }
}

/// Removed range `[lo, hi)` of interval indices at one level, as per-level digits.
struct Bound {
    digits: Vec<BigInt>,
}

/// Digits of an index `x ∈ [1, q_top]`: entry 0 is the level-`base` index,
/// entry `k − base` the child slot `c` at level `k`, with
/// `n_k = n_{k−1} + q_{k−2} + c q_{k−1}`.
fn index_digits(conv: &ConvergentSeq, base: usize, top: usize, x: &BigInt) -> Bound {
    let mut digits = vec![BigInt::zero(); top - base + 1];
    let mut v = x.clone();
    for k in (base + 1..=top).rev() {
        let qp = conv.q(k as isize - 1);
        let qpp = conv.q(k as isize - 2);
        let c = (&v - qpp - 1u32).div_floor(qp);
        v = &v - qpp - &c * qp;
        digits[k - base] = c;
    }
    digits[0] = v;
    Bound { digits }
}

const LT: u8 = 0;
const EQ: u8 = 1;
const GT: u8 = 2;
const DONE: u8 = 3;

fn cmp_digit(d: &BigInt, b: &BigInt, old: u8) -> u8 {
    match d.cmp(b) {
        std::cmp::Ordering::Less => LT,
        std::cmp::Ordering::Greater => GT,
        std::cmp::Ordering::Equal => old,
    }
}

/// Splits `[lo, hi]` into runs on which comparisons with every cut point agree.
fn pieces(lo: &BigInt, hi: &BigInt, cuts: &[&BigInt]) -> Vec<(BigInt, BigInt)> {
    if lo > hi {
        return Vec::new();
    }
    let mut pts: Vec<BigInt> = vec![lo.clone(), hi + 1u32];
    for c in cuts {
        for p in [(*c).clone(), *c + 1u32] {
            if &p > lo && p <= *hi {
                pts.push(p);
            }
        }
    }
    pts.sort();
    pts.dedup();
    pts.windows(2).map(|w| (w[0].clone(), &w[1] - 1u32)).collect()
}

/// Exact count of level-`levels[i]` intervals none of whose ancestors at the
/// levels `levels[g]`, `1 ≤ g ≤ i`, has its index in `removed[g−1] = [lo, hi)`.
///
/// An index at level `k` has a unique digit string (base index, then one
/// child slot per level), indices at one level are ordered like these strings
/// read from the top digit, and a slot equal to `a_k − 1` marks a type-2
/// interval. Reading digits bottom-up, each constraint only needs its current
/// comparison with `lo` and `hi`, so the count runs over a small state space.
pub fn count_survivors(conv: &ConvergentSeq, levels: &[usize], removed: &[(BigInt, BigInt)], i: usize) -> Result<BigInt> {
    let base = levels[0];
    let top = levels[i];
    if base < 1 || top > conv.last() {
        return precondition("survivor levels out of range");
    }
    let bounds: Vec<(Bound, Bound, usize)> = (1..=i)
        .map(|g| {
            let (lo, hi) = &removed[g - 1];
            (
                index_digits(conv, base, levels[g], lo),
                index_digits(conv, base, levels[g], hi),
                levels[g],
            )
        })
        .collect();
    type State = (Vec<u8>, bool);
    let mut states: HashMap<State, BigInt> = HashMap::new();
    let qb = conv.qu(base).clone();
    let t1 = &qb - conv.q(base as isize - 1);
    {
        let mut cuts: Vec<&BigInt> = Vec::new();
        for b in &bounds {
            cuts.push(&b.0.digits[0]);
            cuts.push(&b.1.digits[0]);
        }
        cuts.push(&t1);
        for (s, e) in pieces(&BigInt::one(), &qb, &cuts) {
            let st: Vec<u8> = bounds
                .iter()
                .flat_map(|b| [cmp_digit(&s, &b.0.digits[0], EQ), cmp_digit(&s, &b.1.digits[0], EQ)])
                .collect();
            *states.entry((st, s > t1)).or_insert_with(BigInt::zero) += &e - &s + 1u32;
        }
    }
    for k in base + 1..=top {
        let a = conv.a(k).clone();
        let last = &a - 1u32;
        let mut next: HashMap<State, BigInt> = HashMap::new();
        for ((st, type2), cnt) in states {
            let lo = if type2 { BigInt::from(-1) } else { BigInt::zero() };
            let mut cuts: Vec<&BigInt> = vec![&last];
            for (g, b) in bounds.iter().enumerate() {
                if st[2 * g] != DONE {
                    cuts.push(&b.0.digits[k - base]);
                    cuts.push(&b.1.digits[k - base]);
                }
            }
            for (s, e) in pieces(&lo, &last, &cuts) {
                let mut ns = st.clone();
                let mut dead = false;
                for (g, b) in bounds.iter().enumerate() {
                    if ns[2 * g] == DONE {
                        continue;
                    }
                    ns[2 * g] = cmp_digit(&s, &b.0.digits[k - base], ns[2 * g]);
                    ns[2 * g + 1] = cmp_digit(&s, &b.1.digits[k - base], ns[2 * g + 1]);
                    if b.2 == k {
                        if ns[2 * g] != LT && ns[2 * g + 1] == LT {
                            dead = true;
                        }
                        ns[2 * g] = DONE;
                        ns[2 * g + 1] = DONE;
                    }
                }
                if dead {
                    continue;
                }
                let w = &cnt * (&e - &s + 1u32);
                *next.entry((ns, s == last)).or_insert_with(BigInt::zero) += w;
            }
        }
        states = next;
    }
    Ok(states.values().sum())
}

/// Survivor counts for the nested sets obtained by deleting, at each sparse
/// level `k_{i+1}`, the intervals `I_n^(k_{i+1})` with `q_{k_i} ≤ n < (ε/2)q_{k_{i+1}}`.
///
/// With `m = None` the smallest integer `M` with `q_{k_d} ≤ M^d` at the deepest
/// generation is used.
pub fn survivor_cover(alpha: &Alpha, eps: &Rat, k0: usize, depth: usize, m: Option<&BigInt>) -> Result<SurvivorCover> {
    alpha.require_irrational()?;
    if !(eps.is_positive() && eps < &rat(1, 2)) {
        return precondition("ε must lie in (0, 1/2)");
    }
    if k0 < 1 || depth == 0 {
        return precondition("need K ≥ 1 and depth ≥ 1");
    }
    let conv = alpha.conv();
    let (levels, c_eps) = sparse_times(conv, eps, k0, depth)?;
    let q_levels: Vec<BigInt> = levels.iter().map(|&k| conv.qu(k).clone()).collect();
    let removed: Vec<(BigInt, BigInt)> = (1..=depth)
        .map(|g| (q_levels[g - 1].clone(), ceil(&(eps * int(q_levels[g].clone()) / int(2)))))
        .collect();
    let counts_big = (0..=depth)
        .into_par_iter()
        .map(|i| {
            if i == 0 {
                Ok(q_levels[0].clone())
            } else {
                count_survivors(conv, &levels, &removed, i)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let m_val = match m {
        Some(m) => m.clone(),
        None => {
            // least M with M^depth ≥ q_{k_depth}
            let mut lo = BigInt::from(2);
            let mut hi = lo.clone();
            while num_traits::pow(hi.clone(), depth) < q_levels[depth] {
                hi *= 2u32;
            }
            while lo < hi {
                let mid: BigInt = (&lo + &hi) / 2u32;
                if num_traits::pow(mid.clone(), depth) >= q_levels[depth] {
                    hi = mid;
                } else {
                    lo = mid + 1u32;
                }
            }
            lo
        }
    };
    if m_val < BigInt::from(2) {
        return precondition("M must be at least 2");
    }
    let applicable: Vec<usize> = (1..=depth)
        .filter(|&i| q_levels[i] <= num_traits::pow(m_val.clone(), i))
        .collect();
    if applicable.is_empty() {
        return Err(Error::HypothesisFail {
            level: levels[depth],
            detail: format!("q_(k_i) ≤ M^i fails for every generation with M = {m_val}"),
        });
    }
    let upper_bound = 1.0 + (1.0 - crate::interval::rat_to_f64(eps) / 32.0).ln() / ln_big(&m_val);
    let f = Rat::one() - eps / int(32);
    let bounds: Vec<String> = (0..=depth)
        .map(|i| fmt_rat(&(int(q_levels[i].clone()) * crate::interval::pow_rat(&f, i as u32))))
        .collect();
    Ok(SurvivorCover {
        epsilon: eps.clone(),
        levels,
        c_eps,
        counts: counts_big.iter().map(|c| c.to_string()).collect(),
        bounds,
        m: m_val.to_string(),
        applicable,
        upper_bound,
        counts_big,
        q_levels,
    })
}

/// Least-squares fit of `log N(ε)` against `−log ε` over dyadic scales.
#[derive(Clone, Debug, Serialize)]
pub struct BoxEstimate {
    pub slope: f64,
    pub intercept: f64,
    pub rms_residual: f64,
    /// Exponents `e` of the scales `2^-e`.
    pub scales: Vec<u32>,
    pub counts: Vec<u64>,
}

/// Number of boxes `[j2^-e, (j+1)2^-e)` meeting sorted disjoint intervals.
pub fn box_count(intervals: &[RatInterval], e: u32) -> u64 {
    let s = int(BigInt::one() << e as usize);
    let mut n = 0u64;
    let mut last: Option<BigInt> = None;
    for iv in intervals {
        let a = floor(&(&iv.lo * &s));
        let b = std::cmp::max(a.clone(), ceil(&(&iv.hi * &s)) - 1u32);
        let start = match &last {
            Some(l) if l >= &a => l + 1u32,
            _ => a,
        };
        if start <= b {
            n += (&b - &start + 1u32).to_u64().unwrap_or(u64::MAX);
            last = Some(b);
        }
    }
    n
}

pub fn box_dimension_estimate(intervals: &[RatInterval], exps: &[u32]) -> Result<BoxEstimate> {
    if exps.len() < 4 {
        return precondition("need at least 4 scales");
    }
    let (emin, emax) = (*exps.iter().min().unwrap(), *exps.iter().max().unwrap());
    // two decades: 2^7 = 128 ≥ 100
    if emax - emin < 7 {
        return precondition("scales must span at least two decades");
    }
    let mut sorted = intervals.to_vec();
    sorted.sort_by(|a, b| a.lo.cmp(&b.lo));
    let counts: Vec<u64> = exps.par_iter().map(|&e| box_count(&sorted, e)).collect();
    if counts.iter().all(|&c| c <= 1) {
        return precondition("degenerate set: a single box at every scale");
    }
    let xs: Vec<f64> = exps.iter().map(|&e| e as f64 * std::f64::consts::LN_2).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(BoxEstimate {
        slope,
        intercept,
        rms_residual: rms,
        scales: exps.to_vec(),
        counts,
    })
}

/// Generation `g` of the middle-thirds Cantor set.
pub fn cantor_generation(g: u32) -> Vec<RatInterval> {
    let mut ivs = vec![RatInterval::new(Rat::zero(), Rat::one())];
    for _ in 0..g {
        ivs = ivs
            .iter()
            .flat_map(|iv| {
                let w = iv.width() / int(3);
                [
                    RatInterval::new(iv.lo.clone(), &iv.lo + &w),
                    RatInterval::new(&iv.hi - &w, iv.hi.clone()),
                ]
            })
            .collect();
    }
    ivs
}
