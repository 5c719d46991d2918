//! The three-distance partition `P^(k)` of the circle cut at `α, 2α, …, q_k α`.
//!
//! Interval `I_n^(k)` starts at `nα` and runs in direction `s_{k-1} = (-1)^{k-1}`
//! to its partner `|n + q_{k-1}|_{q_k}·α`. Lengths are the signed gaps
//! `D_j = |q_j α − p_j|`: `D_{k-1}` for type 1 and `D_{k-1} + D_k` for type 2.
//! Small levels are materialized and checked point by point; large levels
//! are handled in closed form, and points are located by descending the
//! refinement tree from level 0.

use std::io::Write;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cf::{orbit_point, signed_gap, Alpha};
use crate::error::{precondition, Error, Result};
use crate::interval::{bigint_str, floor, fmt_rat, int, Rat, RatInterval};

/// Levels with at most this many intervals are materialized and sorted.
pub const MATERIALIZE_CAP: u64 = 1 << 18;

const ESCALATIONS: usize = 8;

/// `(-1)^k` for any integer `k`.
pub fn sign_of(k: isize) -> i32 {
    if k.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// `|x|_q`: the representative of `x mod q` in `[1, q]`.
pub fn mod_q(x: &BigInt, q: &BigInt) -> BigInt {
    let r = x.mod_floor(q);
    if r.is_zero() {
        q.clone()
    } else {
        r
    }
}

/// A point to be placed on the circle: an exact rational or an orbit point `mα`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Target {
    Rational(Rat),
    Orbit(BigInt),
}

/// Per-level constants of `P^(k)`.
#[derive(Clone, Debug)]
pub struct Level {
    pub k: usize,
    pub q: BigInt,
    pub q_prev: BigInt,
    /// `a_{k+1}`, the refinement factor towards level `k + 1`.
    pub a_next: BigInt,
    /// Enclosure of `D_{k-1}` (type-1 length).
    pub d_prev: RatInterval,
    /// Enclosure of `D_k`.
    pub d: RatInterval,
    /// Direction `s_{k-1}` in which intervals run from their left index.
    pub orient: i32,
}

impl Level {
    pub fn new(alpha: &Alpha, k: usize) -> Result<Level> {
        if k + 3 > alpha.max_depth() {
            return Err(Error::Budget(format!(
                "level {k} needs more than {} partial quotients",
                alpha.max_depth()
            )));
        }
        let c = alpha.conv();
        let q_next = Rat::from_integer(alpha.q(k + 1).clone());
        // relative precision well below 1/a_{k+1} keeps child selection exact
        let budget = (q_next.clone() * q_next * int(1u64 << 24)).recip();
        Ok(Level {
            k,
            q: alpha.q(k).clone(),
            q_prev: c.q(k as isize - 1).clone(),
            a_next: alpha.a(k + 1).clone(),
            d_prev: signed_gap(alpha, k as isize - 1, &budget)?,
            d: signed_gap(alpha, k as isize, &budget)?,
            orient: sign_of(k as isize - 1),
        })
    }

    /// Last index of type 1: `q_k − q_{k-1}`.
    pub fn type1_max(&self) -> BigInt {
        &self.q - &self.q_prev
    }

    pub fn type_of(&self, n: &BigInt) -> u8 {
        if n <= &self.type1_max() {
            1
        } else {
            2
        }
    }

    pub fn partner(&self, n: &BigInt) -> BigInt {
        mod_q(&(n + &self.q_prev), &self.q)
    }

    pub fn length(&self, ty: u8) -> RatInterval {
        if ty == 1 {
            self.d_prev.clone()
        } else {
            self.d_prev.add(&self.d)
        }
    }

    /// Parent at this level of the level-`k+1` interval with left index `m`.
    pub fn parent_of(&self, m: &BigInt) -> BigInt {
        mod_q(&(m - &self.q_prev), &self.q)
    }

    /// Offset `o_j = D_{k-1} − j D_k` of the `j`-th refinement point inside a parent.
    pub fn child_offset(&self, j: &BigInt) -> RatInterval {
        self.d_prev.sub(&self.d.scale_int(j))
    }

    /// First child slot: 0 for type 1, −1 for type 2.
    pub fn first_slot(&self, ty: u8) -> BigInt {
        if ty == 1 {
            BigInt::zero()
        } else {
            BigInt::from(-1)
        }
    }

    /// Left index `n + q_{k-1} + j q_k` of the child starting at slot `j`.
    pub fn child_start(&self, n: &BigInt, j: &BigInt) -> BigInt {
        n + &self.q_prev + j * &self.q
    }

    /// Number of level-`k+1` intervals inside `I_n^(k)`.
    pub fn child_count(&self, n: &BigInt) -> BigInt {
        &self.a_next - self.first_slot(self.type_of(n))
    }

    /// Children of `I_n^(k)` as `(left index, type at level k+1)`, in the
    /// order they appear going from `nα` towards the partner.
    pub fn children(&self, n: &BigInt) -> Vec<(BigInt, u8)> {
        let ty = self.type_of(n);
        let count = self.child_count(n).to_usize().expect("child count fits in memory");
        let j0 = self.first_slot(ty);
        let last = &self.a_next - 1u32;
        let mut out = Vec::with_capacity(count);
        out.push((self.child_start(n, &last), 2));
        let mut j = &last - 1u32;
        while j >= j0 {
            out.push((self.child_start(n, &j), 1));
            j -= 1u32;
        }
        out
    }
}

/// Levels `0..=k` of one α, shared by descent-based location.
#[derive(Clone, Debug)]
pub struct Ladder {
    levels: Vec<Level>,
}

impl Ladder {
    pub fn new(alpha: &Alpha, k: usize) -> Result<Ladder> {
        let levels = (0..=k)
            .into_par_iter()
            .map(|i| Level::new(alpha, i))
            .collect::<Result<Vec<_>>>()?;
        Ok(Ladder { levels })
    }

    pub fn level(&self, k: usize) -> &Level {
        &self.levels[k]
    }

    pub fn top(&self) -> usize {
        self.levels.len() - 1
    }

    /// Ancestor at level `k` of the level-`j` interval `m` (`j ≥ k`).
    pub fn ancestor(&self, j: usize, m: &BigInt, k: usize) -> BigInt {
        let mut m = m.clone();
        for i in (k..j).rev() {
            m = self.levels[i].parent_of(&m);
        }
        m
    }
}

/// Enclosure of `t = s·(x − nα) mod 1`, the distance travelled from `nα`
/// to the target in direction `s`.
pub fn offset(
    alpha: &Alpha,
    target: &Target,
    n: &BigInt,
    orient: i32,
    budget: &Rat,
    level: usize,
) -> Result<RatInterval> {
    let mut b = budget.clone();
    for _ in 0..ESCALATIONS {
        let e = match target {
            Target::Rational(x) => alpha.times(n, &b)?.neg().shift(x),
            Target::Orbit(m) => {
                let d = m - n;
                if d.is_zero() {
                    return Err(Error::EndpointHit { index: n.clone() });
                }
                alpha.times(&d, &b)?
            }
        };
        let e = if orient < 0 { e.neg() } else { e };
        let fl = floor(&e.lo);
        if e.is_point() && e.lo == int(fl.clone()) {
            return Err(Error::EndpointHit { index: n.clone() });
        }
        if floor(&e.hi) == fl && e.lo != int(fl.clone()) {
            return Ok(e.shift(&-int(fl)));
        }
        b /= int(1u64 << 32);
    }
    Err(Error::Ambiguous { level })
}

/// Result of locating a point in `P^(k)`.
#[derive(Clone, Debug)]
pub struct Located {
    pub n: BigInt,
    /// Enclosure of the distance from `nα` to the point, inside `(0, length)`.
    pub offset: RatInterval,
}

/// Descends the refinement tree from `P^(0)` to `P^(k)`.
pub fn locate_descent(alpha: &Alpha, ladder: &Ladder, target: &Target, k: usize) -> Result<Located> {
    let path = locate_path(alpha, ladder, target, k)?;
    let n = path[k].clone();
    let lv = ladder.level(k);
    let q_next = Rat::from_integer(alpha.q(k + 1).clone());
    let t = offset(alpha, target, &n, lv.orient, &(q_next * int(1u64 << 24)).recip(), k)?;
    let len = lv.length(lv.type_of(&n));
    if !(t.lo.is_positive() && t.hi < len.lo) {
        return Err(Error::Invariant(format!("located offset {t} outside interval at level {k}")));
    }
    Ok(Located { n, offset: t })
}

/// Indices of the intervals containing `target` at every level `0..=k`.
pub fn locate_path(alpha: &Alpha, ladder: &Ladder, target: &Target, k: usize) -> Result<Vec<BigInt>> {
    if k > ladder.top() {
        return precondition(format!("ladder only reaches level {}", ladder.top()));
    }
    if let Target::Orbit(m) = target {
        let q = &ladder.level(k).q;
        if m.is_positive() && m <= q {
            return Err(Error::EndpointHit { index: m.clone() });
        }
    }
    let mut path = Vec::with_capacity(k + 1);
    let mut n = BigInt::one();
    path.push(n.clone());
    for i in 0..k {
        let lv = ladder.level(i);
        let ty = lv.type_of(&n);
        let q_next = Rat::from_integer(ladder.level(i + 1).q.clone());
        let mut b = (q_next * int(1u64 << 24)).recip();
        let mut chosen = None;
        // an orbit target can sit exactly on a slot boundary o_j; beyond the
        // last slot that point is not an endpoint of level i+1
        if let Target::Orbit(m) = target {
            let (j, r) = (m - &n - &lv.q_prev).div_mod_floor(&lv.q);
            if r.is_zero() && j >= lv.first_slot(ty) && j <= lv.a_next {
                if j < lv.a_next {
                    return Err(Error::EndpointHit { index: m.clone() });
                }
                chosen = Some(lv.a_next.clone());
            }
        }
        // the level's stored gaps are only good to ~1/q_{i+1}^2; a target that
        // close to a slot boundary needs them refined along with the offset
        let (mut dp, mut dd) = (lv.d_prev.clone(), lv.d.clone());
        for step in 0..ESCALATIONS {
            if chosen.is_some() {
                break;
            }
            if step > 0 {
                dp = signed_gap(alpha, i as isize - 1, &b)?;
                dd = signed_gap(alpha, i as isize, &b)?;
            }
            let t = offset(alpha, target, &n, lv.orient, &b, i)?;
            let v = dp.sub(&t).div(&dd)?;
            let (fl, fh) = (floor(&v.lo), floor(&v.hi));
            if fl == fh && v.lo != int(fl.clone()) {
                chosen = Some(fl + 1u32);
                break;
            }
            b /= int(1u64 << 32);
        }
        let j = chosen.ok_or(Error::Ambiguous { level: i })?;
        if j <= lv.first_slot(ty) {
            return Err(Error::Invariant(format!(
                "descent left the parent interval at level {i}"
            )));
        }
        n = if j >= lv.a_next {
            lv.child_start(&n, &(&lv.a_next - 1u32))
        } else {
            lv.child_start(&n, &(j - 1u32))
        };
        path.push(n.clone());
    }
    Ok(path)
}

/// One interval of a partition with its certified data.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PartitionInterval {
    #[serde(with = "bigint_str")]
    pub n: BigInt,
    #[serde(with = "bigint_str")]
    pub partner: BigInt,
    pub type_tag: u8,
    pub length: RatInterval,
    pub endpoints: (RatInterval, RatInterval),
}

#[derive(Clone, Debug)]
struct SortedPoint {
    pos: RatInterval,
    n: BigInt,
}

/// The partition `P^(k)`. Intervals are produced on demand; levels with at
/// most [`MATERIALIZE_CAP`] intervals also keep the sorted orbit points.
#[derive(Clone, Debug)]
pub struct CirclePartition {
    pub level: Level,
    pub ladder: Ladder,
    pub budget: Rat,
    sorted: Option<Vec<SortedPoint>>,
    /// Number of type-2 intervals, counted point by point when materialized.
    pub type2_count: BigInt,
}

impl CirclePartition {
    pub fn k(&self) -> usize {
        self.level.k
    }

    pub fn len(&self) -> &BigInt {
        &self.level.q
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_materialized(&self) -> bool {
        self.sorted.is_some()
    }

    /// Interval `I_n^(k)` with endpoint enclosures.
    pub fn interval(&self, alpha: &Alpha, n: &BigInt) -> Result<PartitionInterval> {
        if !n.is_positive() || n > &self.level.q {
            return precondition(format!("n = {n} outside [1, q_k]"));
        }
        let partner = self.level.partner(n);
        let ty = self.level.type_of(n);
        Ok(PartitionInterval {
            n: n.clone(),
            partner: partner.clone(),
            type_tag: ty,
            length: self.level.length(ty),
            endpoints: (
                orbit_point(alpha, n, &self.budget)?,
                orbit_point(alpha, &partner, &self.budget)?,
            ),
        })
    }

    /// All intervals in index order (only for materialized levels).
    pub fn intervals(&self, alpha: &Alpha) -> Result<Vec<PartitionInterval>> {
        let q = self.materialized_size()?;
        (1..=q)
            .into_par_iter()
            .map(|n| self.interval(alpha, &BigInt::from(n)))
            .collect()
    }

    fn materialized_size(&self) -> Result<u64> {
        match (&self.sorted, self.level.q.to_u64()) {
            (Some(_), Some(q)) => Ok(q),
            _ => Err(Error::Budget(format!(
                "level {} has {} intervals, above the materialization cap",
                self.k(),
                self.level.q
            ))),
        }
    }

    /// Index of the interval containing `target`.
    pub fn locate(&self, alpha: &Alpha, target: &Target) -> Result<BigInt> {
        if let Target::Rational(x) = target {
            if x.is_negative() || x >= &Rat::one() {
                return precondition("x must lie in [0, 1)");
            }
        }
        match &self.sorted {
            Some(points) => self.locate_sorted(alpha, points, target),
            None => Ok(locate_descent(alpha, &self.ladder, target, self.k())?.n),
        }
    }

    fn locate_sorted(&self, alpha: &Alpha, points: &[SortedPoint], target: &Target) -> Result<BigInt> {
        if let Target::Orbit(m) = target {
            if m.is_positive() && m <= &self.level.q {
                return Err(Error::EndpointHit { index: m.clone() });
            }
        }
        let mut b = self.budget.clone();
        for _ in 0..ESCALATIONS {
            let x = match target {
                Target::Rational(x) => RatInterval::point(x.clone()),
                Target::Orbit(m) => orbit_point(alpha, m, &b)?,
            };
            let xm = x.midpoint();
            let i = points.partition_point(|p| p.pos.midpoint() < xm);
            let below = if i == 0 { points.len() - 1 } else { i - 1 };
            let above = if i == points.len() { 0 } else { i };
            let pb = refine_point(alpha, &points[below], &b)?;
            let pa = refine_point(alpha, &points[above], &b)?;
            let below_ok = i == 0 || pb.hi < x.lo;
            let above_ok = i == points.len() || x.hi < pa.lo;
            if below_ok && above_ok {
                let p = if self.level.orient > 0 { below } else { above };
                return Ok(points[p].n.clone());
            }
            b /= int(1u64 << 32);
        }
        Err(Error::Ambiguous { level: self.k() })
    }

    /// Checks the closed-form length bounds `1/(2q_k) < L < 2/q_k` for both types.
    pub fn check_length_bounds(&self) -> Result<()> {
        let q = Rat::from_integer(self.level.q.clone());
        let lo = (q.clone() * int(2)).recip();
        let hi = int(2) / q;
        for ty in [1u8, 2] {
            let len = self.level.length(ty);
            if !(len.lo > lo && len.hi < hi) {
                return Err(Error::Invariant(format!(
                    "level {} type {ty} length {len} outside (1/(2q_k), 2/q_k)",
                    self.k()
                )));
            }
        }
        Ok(())
    }

    /// Certified total length: must enclose 1.
    pub fn total_length(&self) -> RatInterval {
        let t1 = self.level.type1_max();
        let t2 = &self.level.q - &t1;
        self.level.length(1).scale_int(&t1).add(&self.level.length(2).scale_int(&t2))
    }

    /// Writes one JSON line per interval (materialized levels only).
    pub fn dump_jsonl<W: Write>(&self, alpha: &Alpha, mut w: W) -> Result<()> {
        #[derive(Serialize)]
        struct Row {
            level: usize,
            n: String,
            partner: String,
            #[serde(rename = "type")]
            ty: u8,
            len_lo: String,
            len_hi: String,
        }
        for iv in self.intervals(alpha)? {
            let row = Row {
                level: self.k(),
                n: iv.n.to_string(),
                partner: iv.partner.to_string(),
                ty: iv.type_tag,
                len_lo: fmt_rat(&iv.length.lo),
                len_hi: fmt_rat(&iv.length.hi),
            };
            serde_json::to_writer(&mut w, &row)?;
            writeln!(w)?;
        }
        Ok(())
    }
}

fn refine_point(alpha: &Alpha, p: &SortedPoint, budget: &Rat) -> Result<RatInterval> {
    if p.pos.width() <= *budget {
        Ok(p.pos.clone())
    } else {
        orbit_point(alpha, &p.n, budget)
    }
}

/// Builds `P^(k)`. Levels up to [`MATERIALIZE_CAP`] intervals are verified
/// geometrically: the orbit points are sorted by certified enclosures, each
/// point's neighbour in direction `s_{k-1}` must be its partner, and the gap
/// must match the length of its type and exclude the other type's length.
pub fn build_partition(alpha: &Alpha, k: usize, width_budget: &Rat) -> Result<CirclePartition> {
    alpha.require_irrational()?;
    if k < 1 {
        return precondition("partition level must be ≥ 1");
    }
    let ladder = Ladder::new(alpha, k)?;
    let level = ladder.level(k).clone();
    let q_next = Rat::from_integer(alpha.q(k + 1).clone());
    let auto = (q_next * int(1u64 << 20)).recip();
    let budget = std::cmp::min(width_budget.clone(), auto);
    let type2_closed = &level.q - level.type1_max();
    let mut part = CirclePartition {
        level,
        ladder,
        budget,
        sorted: None,
        type2_count: type2_closed,
    };
    if let Some(q) = part.level.q.to_u64().filter(|&q| q <= MATERIALIZE_CAP) {
        let (sorted, type2) = materialize(alpha, &part, q)?;
        part.sorted = Some(sorted);
        part.type2_count = BigInt::from(type2);
    }
    Ok(part)
}

/// Orbit points `mα mod 1` for `m ≤ q` as integer numerators over one common
/// denominator `D = q_j q_{j+1}`, from the bracket `α ∈ (p_j/q_j, p_{j+1}/q_{j+1})`.
/// Returns `None` when the expansion is too short for the budget.
struct ScaledOrbit {
    d: BigInt,
    pts: Vec<(BigInt, BigInt, u64)>,
}

fn scaled_orbit(alpha: &Alpha, q: u64, budget: &Rat) -> Result<Option<ScaledOrbit>> {
    let c = alpha.conv();
    // width of m·bracket is m/D; need q/D ≤ budget
    let need = Rat::from_integer(BigInt::from(q)) / budget;
    let Some(j) = (0..c.last()).find(|&j| Rat::from_integer(c.qu(j) * c.qu(j + 1)) >= need) else {
        return Ok(None);
    };
    let (pj, qj, pk, qk) = (c.p(j as isize), c.qu(j), c.p(j as isize + 1), c.qu(j + 1));
    let d = qj * qk;
    let (a, b) = (pj * qk, pk * qj);
    let pts = (1..=q)
        .into_par_iter()
        .map(|m| {
            let (x, y) = (&a * m, &b * m);
            let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
            let (fl, lo) = lo.div_mod_floor(&d);
            let hi = hi - &fl * &d;
            if hi >= d {
                return Err(Error::Precision(format!("orbit point of {m} straddles 0")));
            }
            Ok((lo, hi, m))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Some(ScaledOrbit { d, pts }))
}

fn materialize(alpha: &Alpha, part: &CirclePartition, q: u64) -> Result<(Vec<SortedPoint>, u64)> {
    let lv = &part.level;
    let Some(ScaledOrbit { d, mut pts }) = scaled_orbit(alpha, q, &part.budget)? else {
        return Err(Error::Budget(format!("expansion too short to materialize level {}", lv.k)));
    };
    pts.par_sort_by(|a, b| a.0.cmp(&b.0));
    for w in pts.windows(2) {
        if w[0].1 >= w[1].0 {
            return Err(Error::Precision(format!(
                "orbit points {} and {} not separated at level {}",
                w[0].2, w[1].2, lv.k
            )));
        }
    }
    let dr = Rat::from_integer(d.clone());
    // integer gap g overlaps [l.lo, l.hi]·D iff g.lo ≤ ⌊l.hi D⌋ and ⌈l.lo D⌉ ≤ g.hi
    let scaled = |l: RatInterval| (crate::interval::ceil(&(&l.lo * &dr)), floor(&(&l.hi * &dr)));
    let len1 = scaled(lv.length(1));
    let len2 = scaled(lv.length(2));
    let total = pts.len();
    let type2 = (0..total)
        .into_par_iter()
        .map(|i| {
            let here = &pts[i];
            let (nb, g_lo, g_hi) = if lv.orient > 0 {
                let j = (i + 1) % total;
                let wrap = if j == 0 { d.clone() } else { BigInt::zero() };
                (j, &pts[j].0 - &here.1 + &wrap, &pts[j].1 - &here.0 + wrap)
            } else {
                let j = (i + total - 1) % total;
                let wrap = if i == 0 { d.clone() } else { BigInt::zero() };
                (j, &here.0 - &pts[j].1 + &wrap, &here.1 - &pts[j].0 + wrap)
            };
            let n = BigInt::from(here.2);
            let expect = lv.partner(&n);
            if BigInt::from(pts[nb].2) != expect {
                return Err(Error::Invariant(format!(
                    "level {}: neighbour of {} is {}, partner rule says {}",
                    lv.k, n, pts[nb].2, expect
                )));
            }
            let overlaps = |l: &(BigInt, BigInt)| g_lo <= l.1 && l.0 <= g_hi;
            let realized = match (overlaps(&len1), overlaps(&len2)) {
                (true, false) => 1u8,
                (false, true) => 2u8,
                _ => {
                    return Err(Error::Precision(format!("gap after {n} does not single out a length type")))
                }
            };
            if realized != lv.type_of(&n) {
                return Err(Error::Invariant(format!(
                    "level {}: interval {} realizes type {realized}",
                    lv.k, n
                )));
            }
            Ok(u64::from(realized == 2))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    let sorted = pts
        .into_par_iter()
        .map(|(lo, hi, m)| SortedPoint {
            pos: RatInterval::new(Rat::new(lo, d.clone()), Rat::new(hi, d.clone())),
            n: BigInt::from(m),
        })
        .collect();
    Ok((sorted, type2))
}

/// Eq. (n, c) decomposition `m = n + q_{k-1} + c q_k` for `q_k < m ≤ q_{k+1}`.
pub fn orbit_membership(conv: &crate::cf::ConvergentSeq, k: usize, m: &BigInt) -> Result<(BigInt, BigInt)> {
    if k + 1 > conv.last() {
        return Err(Error::Budget(format!("level {k} beyond computed convergents")));
    }
    let qk = conv.qu(k);
    let qk1 = conv.qu(k + 1);
    let qp = conv.q(k as isize - 1);
    if m <= qk || m > qk1 {
        return Err(Error::NotInLevel {
            level: k,
            m: m.clone(),
            lo: qk.clone(),
            hi: qk1.clone(),
        });
    }
    let c = (m - qp - 1u32).div_floor(qk);
    let n = m - qp - &c * qk;
    Ok((n, c))
}

/// Level `j` with `q_j < m ≤ q_{j+1}`.
pub fn level_of(conv: &crate::cf::ConvergentSeq, m: &BigInt) -> Option<usize> {
    let j = conv.index_at_most(&(m - 1))?;
    // q_0 = q_1 is possible; pick the largest j with q_j < m
    Some(j)
}

/// Index at level `k` of the interval containing `mα`, for `m > q_k`,
/// by the decomposition at m's own level followed by the ancestor map.
pub fn orbit_interval(ladder: &Ladder, conv: &crate::cf::ConvergentSeq, k: usize, m: &BigInt) -> Result<BigInt> {
    let j = level_of(conv, m).ok_or_else(|| Error::Precondition("m must be ≥ 2".into()))?;
    if j < k {
        return precondition(format!("m = {m} is an endpoint of level {k}"));
    }
    let (n, _) = orbit_membership(conv, j, m)?;
    if j > ladder.top() {
        return Err(Error::Budget(format!("m = {m} needs level {j} of the ladder")));
    }
    Ok(ladder.ancestor(j, &n, k))
}

/// Exact count of `q_k < m ≤ Q` with `mα ∈ I_n^(k)`; asserts the bound `count ≥ Q/(4q_k)`.
pub fn orbit_count_lower(alpha: &Alpha, k: usize, n: &BigInt, big_q: &BigInt) -> Result<u64> {
    let qk = alpha.q(k).clone();
    if big_q < &(&qk * 6u32) {
        return precondition("orbit_count_lower needs Q ≥ 6 q_k");
    }
    if !n.is_positive() || n > &qk {
        return precondition("n outside [1, q_k]");
    }
    let conv = alpha.conv();
    let top = conv.index_at_most(big_q).unwrap_or(0);
    let ladder = Ladder::new(alpha, top)?;
    let lo = (&qk + 1u32).to_u64().ok_or_else(|| Error::Budget("q_k too large".into()))?;
    let hi = big_q.to_u64().ok_or_else(|| Error::Budget("Q too large to enumerate".into()))?;
    let count = (lo..=hi)
        .into_par_iter()
        .map(|m| -> Result<u64> {
            let idx = orbit_interval(&ladder, conv, k, &BigInt::from(m))?;
            Ok(u64::from(&idx == n))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    if BigInt::from(count) * 4u32 * &qk < *big_q {
        return Err(Error::Invariant(format!(
            "orbit count {count} below Q/(4q_k) for k = {k}, n = {n}, Q = {big_q}"
        )));
    }
    Ok(count)
}

/// Outcome of [`check_refinement`].
#[derive(Clone, Debug, Serialize)]
pub struct RefinementReport {
    pub k: usize,
    /// True when every interval and every `m` was checked individually.
    pub exhaustive: bool,
    pub parents_checked: String,
    pub members_checked: String,
    pub sampled_locates: usize,
}

/// Verifies the refinement `P^(k) → P^(k+1)` and the decomposition of every
/// `q_k < m ≤ q_{k+1}` against geometric location.
///
/// When `q_{k+1} ≤ exhaustive_cap` all points up to `q_{k+1}` are sorted once
/// and every new `m` is placed geometrically and checked. Otherwise the check is
/// structural: the child count of each index follows from residue counting
/// over the ancestor map, and `mα − nα = s_{k-1}·o_c` holds exactly for every
/// `m` in class `(type, c)`, so verifying `0 < o_c < L_type` for each class
/// covers all `m`; a deterministic sample is additionally located by descent.
pub fn check_refinement(alpha: &Alpha, k: usize, exhaustive_cap: u64, samples: usize, seed: u64) -> Result<RefinementReport> {
    alpha.require_irrational()?;
    if k < 1 {
        return precondition("refinement is checked from level 1");
    }
    let ladder = Ladder::new(alpha, k + 1)?;
    let lv = ladder.level(k).clone();
    let conv = alpha.conv();
    let q_next = alpha.q(k + 1).clone();
    let a = lv.a_next.clone();
    let small = q_next.to_u64().filter(|&q| q <= exhaustive_cap);
    let ones = lv.type1_max();

    // Children per parent from the ancestor map.
    if let Some(qn) = small {
        let qk = lv.q.to_u64().unwrap() as usize;
        let mut counts = vec![0u64; qk + 1];
        for m in 1..=qn {
            let p = lv.parent_of(&BigInt::from(m)).to_usize().unwrap();
            counts[p] += 1;
        }
        for n in 1..=qk {
            let expect = lv.child_count(&BigInt::from(n));
            if BigInt::from(counts[n]) != expect || (BigInt::from(counts[n]) != a && BigInt::from(counts[n]) != &a + 1) {
                return Err(Error::Invariant(format!("level {k}: interval {n} has {} children", counts[n])));
            }
        }
    } else {
        // Residues m ≡ n + q_{k-1} (mod q_k) over [1, q_{k+1}] with q_{k+1} = a q_k + q_{k-1}:
        // classes 1..=q_{k-1} occur a+1 times, the rest a times.
        let q_check = &a * &lv.q + &lv.q_prev;
        if q_check != q_next {
            return Err(Error::Invariant(format!("q_{} recurrence", k + 1)));
        }
        // n is in the first group iff n + q_{k-1} > q_k, i.e. n is type 2.
        let t2 = lv.child_count(&(&ones + 1));
        let t1 = lv.child_count(&ones);
        if t1 != a || t2 != &a + 1 {
            return Err(Error::Invariant(format!("level {k}: child counts {t1}, {t2}")));
        }
    }

    // Geometric position of every new point, from one certified sort.
    let mut exhaustive = false;
    let mut geo_parent = Vec::new();
    if let Some(qn) = small {
        let qk = lv.q.to_u64().unwrap();
        let budget = (Rat::from_integer(alpha.q(k + 2).clone()) * int(1u64 << 20)).recip();
        if let Some(so) = scaled_orbit(alpha, qn, &budget)? {
            geo_parent = sweep_parents(so, qk, lv.orient, k)?;
            exhaustive = true;
        }
    }

    // Offsets per class (type, c).
    let c_max = &a - 1u32;
    for ty in [1u8, 2] {
        let len = lv.length(ty);
        let c_lo = if ty == 1 { BigInt::one() } else { BigInt::zero() };
        for c in [c_lo.clone(), c_max.clone()] {
            if c < c_lo {
                continue;
            }
            let o = lv.child_offset(&c);
            if !(o.lo.is_positive() && o.hi < len.lo) {
                return Err(Error::Invariant(format!(
                    "level {k}: offset o_{c} = {o} outside type-{ty} interval"
                )));
            }
        }
        // o_c is decreasing in c, so the two extremes bound every class.
    }

    let members_checked;
    let mut sampled = 0usize;
    if exhaustive {
        let qk = lv.q.to_u64().unwrap();
        let range: Vec<u64> = ((qk + 1)..=small.unwrap()).collect();
        range.par_iter().try_for_each(|&m| -> Result<()> {
            let geo = BigInt::from(geo_parent[(m - qk - 1) as usize]);
            let m = BigInt::from(m);
            let (n, c) = orbit_membership(conv, k, &m)?;
            if geo != n || lv.parent_of(&m) != n || c < BigInt::zero() || c >= a {
                return Err(Error::Invariant(format!("m = {m}: decomposition ({n}, {c}), geometric parent {geo}")));
            }
            Ok(())
        })?;
        members_checked = range.len().to_string();
    } else {
        members_checked = (&q_next - &lv.q).to_string();
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ k as u64);
        let span = &q_next - &lv.q;
        let mut ms = vec![&lv.q + 1u32, q_next.clone(), &lv.q + &lv.q_prev, &lv.q + &lv.q_prev + 1u32];
        use num_bigint::RandBigInt;
        while ms.len() < samples {
            ms.push(&lv.q + 1u32 + rng.gen_bigint_range(&BigInt::zero(), &span));
        }
        ms.retain(|m| m > &lv.q && m <= &q_next);
        ms.par_iter().try_for_each(|m| -> Result<()> {
            let (n, _) = orbit_membership(conv, k, m)?;
            let geo = locate_descent(alpha, &ladder, &Target::Orbit(m.clone()), k)?.n;
            if geo != n {
                return Err(Error::Invariant(format!("m = {m}: decomposition {n}, descent {geo}")));
            }
            Ok(())
        })?;
        sampled = ms.len();
    }
    let parents = lv.q.to_string();
    Ok(RefinementReport {
        k,
        exhaustive,
        parents_checked: parents,
        members_checked,
        sampled_locates: sampled,
    })
}

/// For each `q_k < m ≤ q_{k+1}`, the level-`k` interval containing `mα`:
/// the nearest point `n ≤ q_k` behind `mα` against the orientation.
fn sweep_parents(so: ScaledOrbit, qk: u64, orient: i32, k: usize) -> Result<Vec<u64>> {
    let ScaledOrbit { mut pts, .. } = so;
    pts.par_sort_by(|a, b| a.0.cmp(&b.0));
    for w in pts.windows(2) {
        if w[0].1 >= w[1].0 {
            return Err(Error::Precision(format!("orbit points {} and {} not separated", w[0].2, w[1].2)));
        }
    }
    let order: Vec<u64> = if orient > 0 {
        pts.iter().map(|p| p.2).collect()
    } else {
        pts.iter().rev().map(|p| p.2).collect()
    };
    // start the walk from the last old point so the wrap is handled
    let last_old = order.iter().rposition(|&m| m <= qk).ok_or_else(|| Error::Invariant(format!("level {k} has no points")))?;
    let total = order.len();
    let mut out = vec![0u64; total - qk as usize];
    let mut cur = order[last_old];
    for i in 1..=total {
        let m = order[(last_old + i) % total];
        if m <= qk {
            cur = m;
        } else {
            out[(m - qk - 1) as usize] = cur;
        }
    }
    Ok(out)
}
