//! Dirichlet solvability at dyadic scales, the density of solvable scales,
//! and the growth/heaviness statistics of the partial quotients.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::cf::{qdist, Alpha, ConvergentSeq};
use crate::error::{precondition, Error, Result};
use crate::interval::{fmt_rat, int, ln_enclosure, ln_int_enclosure, pow2, rat, Rat, RatInterval};

/// Largest `k` with `q_k ≤ 2^ℓ`, or an error when `q_{k+1}` is not computed.
pub fn block_of(conv: &ConvergentSeq, ell: u32) -> Result<usize> {
    let x = BigInt::one() << ell as usize;
    let k = conv.index_at_most(&x).unwrap_or(0);
    if k + 1 > conv.last() {
        return Err(Error::Budget(format!("ℓ = {ell} needs convergents beyond index {}", conv.last())));
    }
    Ok(k)
}

/// Certified `‖q_k α‖ ≤ t` for irrational α, tightening the enclosure on ambiguity.
fn qdist_le(alpha: &Alpha, q: &BigInt, t: &Rat) -> Result<bool> {
    let mut budget = t / int(1u64 << 20);
    for _ in 0..12 {
        let d = qdist(alpha, q, &budget)?;
        if d.hi <= *t {
            return Ok(true);
        }
        if d.lo > *t {
            return Ok(false);
        }
        budget /= int(1u64 << 32);
    }
    Err(Error::Precision(format!("‖{q}α‖ too close to the threshold {}", fmt_rat(t))))
}

/// Whether some `0 < q ≤ 2^ℓ` has `‖qα‖ ≤ c 2^-ℓ`. Only `q_k` with
/// `q_k ≤ 2^ℓ < q_{k+1}` is tested, since it minimizes `‖nα‖` over `0 < n < q_{k+1}`.
pub fn dirichlet_solvable(alpha: &Alpha, c: &Rat, ell: u32) -> Result<bool> {
    alpha.require_irrational()?;
    if !c.is_positive() || ell < 1 {
        return precondition("need c > 0 and ℓ ≥ 1");
    }
    let t = c * pow2(-(ell as i64));
    if t >= rat(1, 2) {
        return Ok(true);
    }
    let k = block_of(alpha.conv(), ell)?;
    qdist_le(alpha, alpha.q(k), &t)
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockInfo {
    pub k: usize,
    /// Scales `ℓ` in `1..=N` with `q_k ≤ 2^ℓ < q_{k+1}`.
    pub ells: Vec<u32>,
    pub unsolvable: Vec<u32>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityReport {
    #[serde(with = "crate::interval::rat_str")]
    pub c: Rat,
    #[serde(rename = "N")]
    pub n: u32,
    pub solvable_count: u32,
    #[serde(with = "crate::interval::rat_str")]
    pub density: Rat,
    pub bad_ell: Vec<u32>,
    pub blocks: Vec<BlockInfo>,
}

impl DensityReport {
    pub fn density_f64(&self) -> f64 {
        crate::interval::rat_to_f64(&self.density)
    }

    /// Rows `ℓ,solvable,block_k`.
    pub fn rows(&self) -> Vec<(u32, bool, usize)> {
        let mut out: Vec<_> = self
            .blocks
            .iter()
            .flat_map(|b| b.ells.iter().map(move |&l| (l, !b.unsolvable.contains(&l), b.k)))
            .collect();
        out.sort();
        out
    }
}

/// Exact count of solvable scales `ℓ = 1..N`, grouped by convergent block.
///
/// Inside a block the unsolvable scales must form a final segment and number
/// at most `log2(1/c) + 1`; both are checked.
pub fn singular_average_density(alpha: &Alpha, c: &Rat, n: u32) -> Result<DensityReport> {
    alpha.require_irrational()?;
    if n < 1 || !c.is_positive() {
        return precondition("need N ≥ 1 and c > 0");
    }
    let conv = alpha.conv();
    let solv = (1..=n)
        .into_par_iter()
        .map(|l| Ok((l, block_of(conv, l)?, dirichlet_solvable(alpha, c, l)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut blocks: Vec<BlockInfo> = Vec::new();
    for (l, k, ok) in &solv {
        if blocks.last().map_or(true, |b| b.k != *k) {
            blocks.push(BlockInfo {
                k: *k,
                ells: Vec::new(),
                unsolvable: Vec::new(),
            });
        }
        let b = blocks.last_mut().unwrap();
        b.ells.push(*l);
        if !ok {
            b.unsolvable.push(*l);
        }
    }
    for b in &blocks {
        if let Some(&first) = b.unsolvable.first() {
            let tail: Vec<u32> = b.ells.iter().copied().filter(|&l| l >= first).collect();
            if tail != b.unsolvable {
                return Err(Error::Invariant(format!("block {}: unsolvable scales are not a final segment", b.k)));
            }
            // count ≤ log2(1/c) + 1  ⇔  c·2^(count−1) ≤ 1
            if c * pow2(b.unsolvable.len() as i64 - 1) > Rat::one() {
                return Err(Error::Invariant(format!(
                    "block {}: {} unsolvable scales exceed log2(1/c) + 1",
                    b.k,
                    b.unsolvable.len()
                )));
            }
        }
    }
    let bad_ell: Vec<u32> = solv.iter().filter(|s| !s.2).map(|s| s.0).collect();
    let solvable_count = n - bad_ell.len() as u32;
    Ok(DensityReport {
        c: c.clone(),
        n,
        solvable_count,
        density: Rat::new(BigInt::from(solvable_count), BigInt::from(n)),
        bad_ell,
        blocks,
    })
}

/// Scales `ℓ ≥ 1` with `q/2 ≤ 2^ℓ < q`; with `c = 1/4` these are never solvable
/// when `q = q_{k+1}`.
pub fn forced_unsolvable(q: &BigInt) -> Option<u32> {
    if q < &BigInt::from(3) {
        return None;
    }
    let l = (q - 1u32).bits() as u32 - 1;
    (l >= 1).then_some(l)
}

/// For each `k ≤ k_max` a scale `X = q_{k+1} − 1` at which `‖qα‖ ≤ c/X`,
/// `0 < q ≤ X` has no solution, certifying that α is not singular.
pub fn non_singular_witnesses(alpha: &Alpha, c: &Rat, k_max: usize) -> Result<Vec<(usize, BigInt)>> {
    alpha.require_irrational()?;
    if c > &rat(1, 4) {
        return precondition("witnesses are certified for c ≤ 1/4");
    }
    (1..=k_max)
        .map(|k| {
            let x = alpha.q(k + 1) - 1u32;
            if x < *alpha.q(k) {
                return Ok(None);
            }
            let t = c / int(x.clone());
            if qdist_le(alpha, alpha.q(k), &t)? {
                return Err(Error::Invariant(format!("‖q_{k}α‖ ≤ c/(q_(k+1) − 1)")));
            }
            Ok(Some((k, x)))
        })
        .filter_map(|r| r.transpose())
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthStats {
    /// `(1/k) log q_k` for `k = 1..=K`.
    pub log_qk_over_k: Vec<RatInterval>,
    /// `(1/k) Σ_{i ≤ k} log a_i`.
    pub avg_log_a: Vec<RatInterval>,
}

/// Growth statistics, with `Π a_i ≤ q_k ≤ Π (a_i + 1)` checked exactly.
pub fn growth_stats(conv: &ConvergentSeq, k_max: usize) -> Result<GrowthStats> {
    if k_max < 2 || k_max > conv.last() {
        return precondition("need 2 ≤ K ≤ computed depth");
    }
    let mut prod = BigInt::one();
    let mut prod1 = BigInt::one();
    let mut lq = Vec::with_capacity(k_max);
    let mut la = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        prod *= conv.a(k);
        prod1 *= conv.a(k) + 1u32;
        let q = conv.qu(k);
        if q < &prod || q > &prod1 {
            return Err(Error::Invariant(format!("Π a_i ≤ q_k ≤ Π (a_i+1) fails at k = {k}")));
        }
        let inv = Rat::new(BigInt::one(), BigInt::from(k));
        lq.push(ln_int_enclosure(q).scale(&inv));
        la.push(ln_int_enclosure(&prod).scale(&inv));
    }
    Ok(GrowthStats {
        log_qk_over_k: lq,
        avg_log_a: la,
    })
}

/// `(1/N) Σ_{k=1}^N max{log(η a_k), 0}`.
pub fn heaviness_stat(conv: &ConvergentSeq, eta: &Rat, n: usize) -> Result<RatInterval> {
    if !eta.is_positive() || n < 1 || n > conv.last() {
        return precondition("need η > 0 and 1 ≤ N ≤ computed depth");
    }
    let mut acc = RatInterval::point(Rat::zero());
    for k in 1..=n {
        let v = eta * int(conv.a(k).clone());
        if v > Rat::one() {
            acc = acc.add(&ln_enclosure(&v));
        }
    }
    Ok(acc.scale(&Rat::new(BigInt::one(), BigInt::from(n))))
}

/// Heaviness sweep: for each `η`, whether the statistic at scale `N` is at most `δ`.
pub fn heaviness_sweep(conv: &ConvergentSeq, delta: &Rat, etas: &[Rat], n: usize) -> Result<Vec<(Rat, RatInterval, Option<bool>)>> {
    etas.iter()
        .map(|eta| {
            let v = heaviness_stat(conv, eta, n)?;
            let verdict = if v.hi <= *delta {
                Some(true)
            } else if v.lo > *delta {
                Some(false)
            } else {
                None
            };
            Ok((eta.clone(), v, verdict))
        })
        .collect()
}

/// Brute-force solvability over every `0 < q ≤ 2^ℓ` (small `ℓ` only).
pub fn dirichlet_solvable_brute(alpha: &Alpha, c: &Rat, ell: u32) -> Result<bool> {
    if ell > 20 {
        return precondition("brute force is limited to ℓ ≤ 20");
    }
    let t = c * pow2(-(ell as i64));
    let hits = (1u64..=1 << ell)
        .into_par_iter()
        .map(|q| qdist_le(alpha, &BigInt::from(q), &t))
        .collect::<Result<Vec<bool>>>()?;
    Ok(hits.into_iter().any(|h| h))
}
