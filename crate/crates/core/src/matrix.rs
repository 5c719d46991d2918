//! Matrices `A` of size `n×m`: best approximation vectors, Dirichlet
//! solvability at dyadic scales, the ball grid on which a form `y·x` stays
//! away from the integers, and the transference lower bound.
//!
//! Rows give the forms `L_i(x) = Σ_j α_ij x_j` on `Z^m`, columns give
//! `M_j(y) = Σ_i α_ij y_i` on `Z^n`. Best approximations use the sup norm, the
//! grid balls use the Euclidean norm.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cf::{Alpha, RealNumberSpec};
use crate::error::{precondition, Error, Result};
use crate::interval::{
    dist_to_int, f64_to_rat, fmt_rat, frac, int, nth_root_enclosure, pow2, pow_rat, rat, simplest_between, Rat,
    RatInterval,
};
use crate::singular::DensityReport;

/// Largest `n + m` accepted.
pub const MAX_DIM_SUM: usize = 5;
/// Cap on enumerated lattice points.
pub const ENUM_CAP: f64 = (1u64 << 27) as f64;

const BASE_BITS: i64 = 80;
const MAX_BITS: i64 = 1280;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixSpec {
    pub n: usize,
    pub m: usize,
    pub entries: Vec<Vec<RealNumberSpec>>,
    /// Caller-declared `rk_Z(A Z^m + Z^n) = m + n`. Never trusted: it can only be falsified.
    #[serde(default)]
    pub rank_assumption: bool,
}

/// A validated matrix with its entries expanded.
#[derive(Clone, Debug)]
pub struct Matrix {
    pub spec: MatrixSpec,
    alpha: Vec<Vec<Alpha>>,
    approx: Vec<Vec<f64>>,
}

impl Matrix {
    pub fn new(spec: MatrixSpec) -> Result<Self> {
        let (n, m) = (spec.n, spec.m);
        if n == 0 || m == 0 || n + m > MAX_DIM_SUM {
            return precondition(format!("need n, m ≥ 1 and n + m ≤ {MAX_DIM_SUM}, got {n}×{m}"));
        }
        if spec.entries.len() != n || spec.entries.iter().any(|r| r.len() != m) {
            return precondition(format!("entries must form an {n}×{m} array"));
        }
        let alpha = spec
            .entries
            .iter()
            .map(|row| row.iter().map(|e| Alpha::new(e.clone())).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let one = BigInt::one();
        let approx = alpha
            .iter()
            .map(|row: &Vec<Alpha>| {
                row.iter()
                    .map(|a| Ok(a.times(&one, &pow2(-80))?.mid_f64()))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Matrix { spec, alpha, approx })
    }

    /// The `1×1` matrix `(α)`.
    pub fn single(x: RealNumberSpec, rank_assumption: bool) -> Result<Self> {
        Self::new(MatrixSpec {
            n: 1,
            m: 1,
            entries: vec![vec![x]],
            rank_assumption,
        })
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn m(&self) -> usize {
        self.spec.m
    }

    pub fn entry(&self, i: usize, j: usize) -> &Alpha {
        &self.alpha[i][j]
    }

    fn combo<'a>(&self, terms: impl Iterator<Item = (&'a Alpha, &'a BigInt)>, budget: &Rat) -> Result<RatInterval> {
        let per = budget / int(MAX_DIM_SUM as u32);
        let mut acc = RatInterval::point(Rat::zero());
        for (a, c) in terms {
            if !c.is_zero() {
                acc = acc.add(&a.times(c, &per)?);
            }
        }
        Ok(acc)
    }

    /// `M_j(y) = Σ_i α_ij y_i`.
    pub fn column_form(&self, j: usize, y: &[BigInt], budget: &Rat) -> Result<RatInterval> {
        self.combo((0..self.n()).map(|i| (&self.alpha[i][j], &y[i])), budget)
    }

    /// `L_i(x) = Σ_j α_ij x_j`.
    pub fn row_form(&self, i: usize, x: &[BigInt], budget: &Rat) -> Result<RatInterval> {
        self.combo((0..self.m()).map(|j| (&self.alpha[i][j], &x[j])), budget)
    }

    fn row_dist_f64(&self, x: &[i64]) -> f64 {
        self.approx
            .iter()
            .map(|row| {
                let s: f64 = row.iter().zip(x).map(|(a, &c)| a * c as f64).sum();
                (s - s.round()).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Float `max_j ‖M_j(y)‖`.
    fn col_dist_f64(&self, y: &[i64]) -> f64 {
        (0..self.m())
            .map(|j| {
                let s: f64 = (0..self.n()).map(|i| self.approx[i][j] * y[i] as f64).sum();
                (s - s.round()).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Bound on the error of [`Self::col_dist_f64`] for `|y| ≤ r`.
    fn col_err_f64(&self, r: i64) -> f64 {
        let amax = self.approx.iter().flatten().fold(1.0f64, |m, a| m.max(a.abs()));
        self.n() as f64 * (amax + 1.0) * r as f64 * 2f64.powi(-48) + 1e-14
    }
}

fn big(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&c| BigInt::from(c)).collect()
}

fn sup_norm(v: &[BigInt]) -> BigInt {
    v.iter().map(|c| c.abs()).max().unwrap_or_default()
}

fn tight() -> Rat {
    Rat::new(BigInt::one(), num_traits::pow(BigInt::from(10), 30))
}

/// Enclosure of `M(y) = max_j ‖M_j(y)‖` of width ≤ `budget`.
///
/// An enclosure that reaches 0 with width below `10^-30`, or an exact zero
/// under a declared rank assumption, raises `RankSuspect`.
pub fn form_dist(a: &Matrix, y: &[BigInt], budget: &Rat) -> Result<RatInterval> {
    if y.len() != a.n() || y.iter().all(|c| c.is_zero()) {
        return precondition(format!("y must be a nonzero {}-vector", a.n()));
    }
    let mut best: Option<RatInterval> = None;
    for j in 0..a.m() {
        let d = a.column_form(j, y, budget)?.dist_to_int();
        best = Some(match best {
            None => d,
            Some(b) => b.max(&d),
        });
    }
    let v = best.unwrap();
    if v.lo.is_zero() && ((v.is_point() && a.spec.rank_assumption) || (!v.is_point() && v.width() < tight())) {
        return Err(Error::RankSuspect(y.to_vec()));
    }
    Ok(v)
}

/// Enclosure of `‖Ax − t‖ = max_i ‖L_i(x) − t_i‖` of width ≤ `budget`.
pub fn lin_dist(a: &Matrix, x: &[BigInt], t: &[Rat], budget: &Rat) -> Result<RatInterval> {
    if x.len() != a.m() || t.len() != a.n() {
        return precondition(format!("need x in Z^{} and a target in R^{}", a.m(), a.n()));
    }
    let mut best = RatInterval::point(Rat::zero());
    for (i, ti) in t.iter().enumerate() {
        let d = a.row_form(i, x, budget)?.shift(&-ti.clone()).dist_to_int();
        best = best.max(&d);
    }
    Ok(best)
}

/// Integer vectors of sup norm exactly `r ≥ 1` whose first nonzero coordinate
/// is positive, in lexicographic order.
pub fn shell(dim: usize, r: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    // p = first coordinate of absolute value r
    for p in 0..dim {
        let vals: Vec<Vec<i64>> = (0..dim)
            .map(|i| match i.cmp(&p) {
                Ordering::Less => (1 - r..r).collect(),
                Ordering::Equal => vec![-r, r],
                Ordering::Greater => (-r..=r).collect(),
            })
            .collect();
        if vals.iter().any(|v| v.is_empty()) {
            continue;
        }
        let mut idx = vec![0usize; dim];
        'odo: loop {
            let cur: Vec<i64> = idx.iter().zip(&vals).map(|(&k, v)| v[k]).collect();
            if cur.iter().find(|c| **c != 0).map_or(false, |c| *c > 0) {
                out.push(cur);
            }
            for i in (0..dim).rev() {
                idx[i] += 1;
                if idx[i] < vals[i].len() {
                    continue 'odo;
                }
                idx[i] = 0;
            }
            break;
        }
    }
    out.sort();
    out
}

/// Number of points enumerated by shells `1..=r` in dimension `dim`.
fn enum_size(dim: usize, r: f64) -> f64 {
    ((2.0 * r + 1.0).powi(dim as i32) - 1.0) / 2.0
}

fn m_at(a: &Matrix, y: &[i64], bits: i64) -> Result<RatInterval> {
    form_dist(a, &big(y), &pow2(-bits))
}

/// Certified order of `M(u)` and `M(v)`, escalating precision; `Equal` only for exact ties.
fn cmp_m(a: &Matrix, u: &[i64], v: &[i64]) -> Result<Ordering> {
    let mut bits = BASE_BITS;
    while bits <= MAX_BITS {
        let (eu, ev) = (m_at(a, u, bits)?, m_at(a, v, bits)?);
        if let Some(o) = eu.certified_cmp(&ev) {
            return Ok(o);
        }
        bits *= 2;
    }
    Err(Error::Precision(format!("M{u:?} and M{v:?} could not be separated")))
}

#[derive(Clone, Debug, Serialize)]
pub struct BestApprox {
    pub y: Vec<i64>,
    #[serde(rename = "Y")]
    pub norm: i64,
    #[serde(rename = "M")]
    pub m: RatInterval,
}

#[derive(Clone, Debug, Serialize)]
pub struct BestApproxSeq {
    pub n: usize,
    pub m: usize,
    pub rank_assumption: bool,
    pub y_max: i64,
    pub items: Vec<BestApprox>,
}

impl BestApproxSeq {
    pub fn norms(&self) -> Vec<i64> {
        self.items.iter().map(|b| b.norm).collect()
    }

    /// Checks `Y_{i+3^{m+n}} ≥ 2Y_{i+1}` (1-based `i ≥ 1`) wherever both exist.
    pub fn check_doubling(&self) -> Result<usize> {
        let step = 3usize.pow((self.m + self.n) as u32);
        let ys = self.norms();
        let mut checked = 0;
        for i in 1..ys.len() {
            if i - 1 + step < ys.len() {
                if ys[i - 1 + step] < 2 * ys[i] {
                    return Err(Error::Invariant(format!("doubling fails at i = {i}")));
                }
                checked += 1;
            }
        }
        Ok(checked)
    }
}

/// Lexicographic minimizer of `M` over `pts`, given their base enclosures.
fn shell_min(a: &Matrix, pts: Vec<(Vec<i64>, RatInterval)>) -> Result<(Vec<i64>, RatInterval)> {
    let mut it = pts.into_iter();
    let mut best = it.next().expect("nonempty shell");
    for cand in it {
        let o = match cand.1.certified_cmp(&best.1) {
            Some(o) => o,
            None => cmp_m(a, &cand.0, &best.0)?,
        };
        if o == Ordering::Less {
            best = cand;
        }
    }
    Ok(best)
}

/// Best approximation vectors with `Y ≤ y_max`, built shell by shell.
///
/// Every nonzero `z` with `|z| ≤ y_max` is compared against the current
/// record, so minimality is checked exhaustively along the way. A float
/// pass with a safe margin discards points that cannot beat the record.
pub fn best_approx_sequence(a: &Matrix, y_max: i64) -> Result<BestApproxSeq> {
    let n = a.n();
    if y_max < 1 {
        return precondition("Y_max must be ≥ 1");
    }
    if enum_size(n, y_max as f64) > ENUM_CAP {
        return Err(Error::Budget(format!("(2·{y_max}+1)^{n} points exceed the enumeration cap")));
    }
    let shell_m = |r: i64| -> Result<Vec<(Vec<i64>, RatInterval)>> {
        shell(n, r)
            .into_par_iter()
            .map(|y| {
                let e = m_at(a, &y, BASE_BITS)?;
                Ok((y, e))
            })
            .collect()
    };
    let (y1, m1) = shell_min(a, shell_m(1)?)?;
    let mut items = vec![BestApprox { y: y1, norm: 1, m: m1 }];
    for r in 2..=y_max {
        let cur = items.last().unwrap().clone();
        // float pass: points clearly worse than the record never get an exact enclosure
        let cut = a.col_dist_f64(&cur.y) + 2.0 * a.col_err_f64(r);
        let near: Vec<Vec<i64>> = shell(n, r).into_iter().filter(|y| a.col_dist_f64(y) <= cut).collect();
        let better = near
            .into_par_iter()
            .map(|y| {
                let e = m_at(a, &y, BASE_BITS)?;
                Ok((y, e))
            })
            .collect::<Result<Vec<_>>>()?
            .into_par_iter()
            .filter_map(|(y, e)| {
                let o = match e.certified_cmp(&cur.m) {
                    Some(o) => Ok(o),
                    None => cmp_m(a, &y, &cur.y),
                };
                match o {
                    Ok(Ordering::Less) => Some(Ok((y, e))),
                    Ok(_) => None,
                    Err(e) => Some(Err(e)),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        if better.is_empty() {
            continue;
        }
        let (y, mut e) = shell_min(a, better)?;
        let mut prev = cur.m.clone();
        let mut bits = BASE_BITS;
        while e.hi >= prev.lo {
            bits *= 2;
            e = m_at(a, &y, bits)?;
            prev = m_at(a, &cur.y, bits)?;
        }
        items.last_mut().unwrap().m = prev;
        items.push(BestApprox { y, norm: r, m: e });
    }
    let seq = BestApproxSeq {
        n,
        m: a.m(),
        rank_assumption: a.spec.rank_assumption,
        y_max,
        items,
    };
    seq.check_doubling()?;
    Ok(seq)
}

#[derive(Clone, Debug, Serialize)]
pub struct MatrixDensityReport {
    pub rank_assumption: bool,
    pub requested_n: u32,
    /// Set when the enumeration cap cut the scales short; the report covers `1..=N`.
    pub truncated: bool,
    #[serde(flatten)]
    pub report: DensityReport,
}

/// Certified `‖Ax‖^n ≤ thr`.
fn row_pow_le(a: &Matrix, x: &[i64], thr: &Rat) -> Result<bool> {
    let xb = big(x);
    let zero = vec![Rat::zero(); a.n()];
    let mut bits = BASE_BITS;
    while bits <= MAX_BITS {
        let v = lin_dist(a, &xb, &zero, &pow2(-bits))?.pow(a.n() as u32);
        if v.hi <= *thr {
            return Ok(true);
        }
        if v.lo > *thr {
            return Ok(false);
        }
        bits *= 2;
    }
    Err(Error::Precision(format!("‖A{x:?}‖ too close to the threshold")))
}

/// For `ℓ = 1..N`, whether `‖Ax‖ ≤ c 2^(-ℓm/n)` has a solution `0 < |x| ≤ 2^ℓ`.
///
/// A float pass keeps, per shell, the points within a safe margin of the
/// shell minimum; only those are decided exactly, by comparing `‖Ax‖^n`
/// with `c^n 2^(-ℓm)`.
pub fn matrix_dirichlet_density(a: &Matrix, c: &Rat, n_req: u32) -> Result<MatrixDensityReport> {
    if n_req < 1 || !c.is_positive() {
        return precondition("need N ≥ 1 and c > 0");
    }
    let (n, m) = (a.n(), a.m());
    let mut big_n = n_req.min(40);
    while big_n >= 1 && enum_size(m, (1u64 << big_n) as f64) > ENUM_CAP {
        big_n -= 1;
    }
    if big_n == 0 {
        return Err(Error::Budget("no scale fits the enumeration cap".into()));
    }
    let rmax = 1i64 << big_n;
    let err = m as f64 * rmax as f64 * 2f64.powi(-48) + 1e-14;
    let margin = 4.0 * err;
    let shells: Vec<Vec<(Vec<i64>, f64)>> = (1..=rmax)
        .into_par_iter()
        .map(|r| {
            let vals: Vec<_> = shell(m, r).into_iter().map(|x| (a.row_dist_f64(&x), x)).collect();
            let fmin = vals.iter().map(|v| v.0).fold(f64::INFINITY, f64::min);
            vals.into_iter()
                .filter(|v| v.0 <= fmin + 2.0 * margin)
                .map(|(f, x)| (x, f))
                .collect()
        })
        .collect();
    let c_f = crate::interval::rat_to_f64(c);
    let cn = pow_rat(c, n as u32);
    let half_n = pow2(-(n as i64));
    let solv = (1..=big_n)
        .into_par_iter()
        .map(|ell| {
            let thr = &cn * pow2(-(ell as i64) * m as i64);
            if thr >= half_n {
                return Ok(true);
            }
            let thr_f = c_f * 2f64.powf(-(ell as f64) * m as f64 / n as f64);
            for sh in &shells[..1usize << ell] {
                for (x, f) in sh {
                    if *f <= thr_f + err && row_pow_le(a, x, &thr)? {
                        return Ok(true);
                    }
                }
            }
            Ok(false)
        })
        .collect::<Result<Vec<bool>>>()?;
    let bad_ell: Vec<u32> = (1..=big_n).filter(|l| !solv[*l as usize - 1]).collect();
    let solvable_count = big_n - bad_ell.len() as u32;
    Ok(MatrixDensityReport {
        rank_assumption: a.spec.rank_assumption,
        requested_n: n_req,
        truncated: big_n < n_req,
        report: DensityReport {
            c: c.clone(),
            n: big_n,
            solvable_count,
            density: Rat::new(BigInt::from(solvable_count), BigInt::from(big_n)),
            bad_ell,
            blocks: Vec::new(),
        },
    })
}

/// Disjoint balls around the points `w(j)` where `‖y·w‖ = 1/2`; on each
/// ball `‖y·x‖ > δ`.
#[derive(Clone, Debug)]
pub struct GridSet {
    pub y: Vec<i64>,
    /// Index of the first coordinate of largest absolute value.
    pub h: usize,
    pub delta: Rat,
    /// Centers in odometer order of `j ∈ [0, |y_h|)^n`.
    pub centers: Vec<Vec<Rat>>,
    /// Squared Euclidean radius `((1 − 2δ) / (2|y|₂))²`.
    pub radius_sq: Rat,
}

impl GridSet {
    pub fn side(&self) -> i64 {
        self.y[self.h].abs()
    }

    pub fn radius_f64(&self) -> f64 {
        crate::interval::rat_to_f64(&self.radius_sq).sqrt()
    }
}

fn dot(y: &[i64], w: &[Rat]) -> Rat {
    y.iter().zip(w).map(|(&a, b)| b * int(a)).sum()
}

fn dist_sq(u: &[Rat], v: &[Rat]) -> Rat {
    u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum()
}

pub const GRID_CAP: usize = 1_000_000;

pub fn grid_set(y: &[i64], delta: &Rat) -> Result<GridSet> {
    let n = y.len();
    if n == 0 || y.iter().all(|c| *c == 0) {
        return precondition("y must be nonzero");
    }
    if !delta.is_positive() || *delta >= rat(1, 2) {
        return precondition("need 0 < δ < 1/2");
    }
    let side = y.iter().map(|c| c.abs()).max().unwrap();
    let h = y.iter().position(|c| c.abs() == side).unwrap();
    if (side as f64).powi(n as i32) > GRID_CAP as f64 {
        return Err(Error::Budget(format!("{side}^{n} centers exceed the grid cap")));
    }
    let s_int = int(side);
    let half = rat(1, 2);
    let count = (side as usize).pow(n as u32);
    let mut centers = Vec::with_capacity(count);
    let mut j = vec![0i64; n];
    for _ in 0..count {
        let mut w: Vec<Rat> = j.iter().map(|&ji| Rat::new(ji.into(), side.into())).collect();
        let rest: Rat = (0..n).filter(|&i| i != h).map(|i| &w[i] * int(y[i])).sum();
        // y_h t ≡ 1/2 − rest (mod 1) with 0 ≤ t < 1/|y_h|
        let s = frac(&(&half - rest));
        let t = if y[h] > 0 { s / &s_int } else { frac(&-s) / &s_int };
        w[h] += t;
        centers.push(w);
        for i in (0..n).rev() {
            j[i] += 1;
            if j[i] < side {
                break;
            }
            j[i] = 0;
        }
    }
    let norm_sq: i64 = y.iter().map(|c| c * c).sum();
    let r = Rat::one() - delta * int(2);
    let radius_sq = &r * &r / int(4 * norm_sq);
    Ok(GridSet {
        y: y.to_vec(),
        h,
        delta: delta.clone(),
        centers,
        radius_sq,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GridCheck {
    pub centers: usize,
    pub pairs_checked: usize,
    pub samples: usize,
}

/// Exact checks of a grid: `‖y·w‖ = 1/2` at every center, center distances
/// `≥ 1/|y_h|` (all pairs for small grids, grid neighbours otherwise), and
/// `‖y·(w+v)‖ > δ` at `samples` random points `v` of the ball, pushed toward
/// its boundary.
pub fn verify_grid(g: &GridSet, samples: usize, seed: u64) -> Result<GridCheck> {
    let n = g.y.len();
    let side = g.side();
    let half = rat(1, 2);
    for w in &g.centers {
        if dist_to_int(&dot(&g.y, w)) != half {
            return Err(Error::Invariant(format!("‖y·w‖ ≠ 1/2 at {:?}", w.iter().map(fmt_rat).collect::<Vec<_>>())));
        }
    }
    let min_sq = Rat::new(BigInt::one(), BigInt::from(side * side));
    let mut pairs = 0;
    let check = |a: &[Rat], b: &[Rat]| -> Result<()> {
        if dist_sq(a, b) < min_sq {
            return Err(Error::Invariant("two grid centers closer than 1/|y_h|".into()));
        }
        Ok(())
    };
    let total = g.centers.len();
    if total <= 400 {
        for i in 0..total {
            for k in i + 1..total {
                check(&g.centers[i], &g.centers[k])?;
                pairs += 1;
            }
        }
    } else {
        let strides: Vec<usize> = (0..n).map(|i| (side as usize).pow((n - 1 - i) as u32)).collect();
        for (idx, w) in g.centers.iter().enumerate() {
            let j: Vec<usize> = strides.iter().map(|s| idx / s % side as usize).collect();
            // forward neighbours with offsets in {-1, 0, 1}^n
            for code in 0..3usize.pow(n as u32) {
                let off: Vec<i64> = (0..n).map(|i| (code / 3usize.pow(i as u32) % 3) as i64 - 1).collect();
                let mut other = 0usize;
                let mut ok = true;
                for i in 0..n {
                    let ji = j[i] as i64 + off[i];
                    if ji < 0 || ji >= side {
                        ok = false;
                        break;
                    }
                    other += ji as usize * strides[i];
                }
                if ok && other > idx {
                    check(w, &g.centers[other])?;
                    pairs += 1;
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = g.radius_f64();
    let bound = &half - &g.delta;
    for _ in 0..samples {
        let w = &g.centers[rng.gen_range(0..total)];
        let v = loop {
            let dir: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let len = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
            if len < 1e-3 || len > 1.0 {
                continue;
            }
            let scale = r * (1.0 - rng.gen_range(0.0..1.0f64).powi(4) * 0.5 - 1e-9) / len;
            let v: Vec<Rat> = dir.iter().map(|d| f64_to_rat(d * scale)).collect();
            let zero = vec![Rat::zero(); n];
            if dist_sq(&v, &zero) < g.radius_sq {
                break v;
            }
        };
        if dot(&g.y, &v).abs() >= bound {
            return Err(Error::Invariant("|y·v| ≥ 1/2 − δ inside the ball".into()));
        }
        let x: Vec<Rat> = w.iter().zip(&v).map(|(a, b)| a + b).collect();
        if dist_to_int(&dot(&g.y, &x)) <= g.delta {
            return Err(Error::Invariant("‖y·x‖ ≤ δ inside a grid ball".into()));
        }
    }
    Ok(GridCheck {
        centers: total,
        pairs_checked: pairs,
        samples,
    })
}

/// The set `{x ∈ [0,1] : ‖y x‖ ≥ δ for every y in ys}` as sorted closed intervals.
pub fn bad_set_1d(ys: &[BigInt], delta: &Rat) -> Result<Vec<(Rat, Rat)>> {
    if !delta.is_positive() || *delta >= rat(1, 2) {
        return precondition("need 0 < δ < 1/2");
    }
    let mut set = vec![(Rat::zero(), Rat::one())];
    for y in ys {
        let y = y.abs();
        if y.is_zero() {
            return precondition("y must be nonzero");
        }
        let yr = int(y.clone());
        let mut next = Vec::new();
        for (a, b) in &set {
            let j0 = crate::interval::floor(&(a * &yr)) - 1u32;
            let j1 = crate::interval::ceil(&(b * &yr));
            let mut j = j0;
            while j <= j1 {
                let lo = (int(j.clone()) + delta) / &yr;
                let hi = (int(j.clone()) + Rat::one() - delta) / &yr;
                let lo = if &lo > a { lo } else { a.clone() };
                let hi = if &hi < b { hi } else { b.clone() };
                if lo <= hi {
                    next.push((lo, hi));
                }
                j += 1u32;
            }
            if next.len() > GRID_CAP {
                return Err(Error::Budget("bad set has too many components".into()));
            }
        }
        set = next;
        if set.is_empty() {
            break;
        }
    }
    Ok(set)
}

/// A simple rational in the middle third of the longest component of the bad set.
pub fn bad_point_1d(ys: &[BigInt], delta: &Rat) -> Result<Rat> {
    let set = bad_set_1d(ys, delta)?;
    let (a, b) = set
        .iter()
        .max_by(|u, v| (&u.1 - &u.0).cmp(&(&v.1 - &v.0)))
        .ok_or_else(|| Error::HypothesisFail {
            level: ys.len(),
            detail: format!("no x has ‖yx‖ ≥ {} for all listed y", fmt_rat(delta)),
        })?;
    let third = (b - a) / int(3);
    Ok(simplest_between(&(a + &third), &(b - &third)))
}

/// `coef · base^(-m/n)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertConstant {
    #[serde(with = "crate::interval::rat_str")]
    pub coef: Rat,
    #[serde(with = "crate::interval::rat_str")]
    pub base: Rat,
    pub m: u32,
    pub n: u32,
}

fn exact_root(r: &Rat, n: u32) -> Option<Rat> {
    let (p, q) = (r.numer(), r.denom());
    if p.is_negative() {
        return None;
    }
    let (rp, rq) = (p.nth_root(n), q.nth_root(n));
    (num_traits::pow(rp.clone(), n as usize) == *p && num_traits::pow(rq.clone(), n as usize) == *q)
        .then(|| Rat::new(rp, rq))
}

impl CertConstant {
    /// Exact value when `base^m` is a perfect `n`-th power.
    pub fn exact(&self) -> Option<Rat> {
        exact_root(&pow_rat(&self.base, self.m), self.n).map(|r| &self.coef / r)
    }

    pub fn enclosure(&self, bits: u32) -> RatInterval {
        if let Some(v) = self.exact() {
            return RatInterval::point(v);
        }
        let root = nth_root_enclosure(&pow_rat(&self.base, self.m), self.n, bits);
        RatInterval::new(&self.coef / &root.hi, &self.coef / &root.lo)
    }

    pub fn symbolic(&self) -> String {
        match self.exact() {
            Some(v) => fmt_rat(&v),
            None => format!("({})·({})^(-{}/{})", fmt_rat(&self.coef), fmt_rat(&self.base), self.m, self.n),
        }
    }
}

/// `δ / (2n (2m/δ)^(m/n))`; at `δ = 1/2` this is `(4n)^-1 (4m)^(-m/n)`.
pub fn certificate_constant(n: usize, m: usize, delta: &Rat) -> CertConstant {
    CertConstant {
        coef: delta / int(2 * n as u64),
        base: int(2 * m as u64) / delta,
        m: m as u32,
        n: n as u32,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TransferenceCertificate {
    /// 1-based index of the selected best approximation.
    pub k: usize,
    #[serde(rename = "Y_k")]
    pub y_norm: i64,
    #[serde(rename = "Y_k1")]
    pub next_norm: i64,
    pub constant: CertConstant,
    /// Rational lower bound for the constant.
    #[serde(with = "crate::interval::rat_str")]
    pub lower_bound: Rat,
    /// `|q|^(m/n) ‖Aq − x‖`.
    pub value: RatInterval,
    /// `value − constant`.
    pub slack: RatInterval,
    /// `M(y_k) ≤ Y_{k+1}^(-n/m)`; `None` when the enclosures cannot decide it.
    pub minkowski: Option<bool>,
}

fn minkowski_check(a: &Matrix, b: &BestApprox, next: i64) -> Result<Option<bool>> {
    // M^m Y^n ≤ 1
    let scale = int(num_traits::pow(BigInt::from(next), a.n()));
    let mut bits = BASE_BITS;
    while bits <= MAX_BITS {
        let v = m_at(a, &b.y, bits)?.pow(a.m() as u32).scale(&scale);
        if v.hi <= Rat::one() {
            return Ok(Some(true));
        }
        if v.lo > Rat::one() {
            return Ok(Some(false));
        }
        bits *= 2;
    }
    Ok(None)
}

/// Lower bound `|q|^(m/n) ‖Aq − x‖ ≥ δ / (2n (2m/δ)^(m/n))` for a target `x`
/// with `‖y_k·x‖ ≥ δ`, where `Y_k ≤ (2m/δ)^(m/n) |q|^(m/n) < Y_{k+1}`.
pub fn transference_certificate(
    a: &Matrix,
    bas: &BestApproxSeq,
    delta: &Rat,
    q: &[BigInt],
    x: &[Rat],
) -> Result<TransferenceCertificate> {
    let (n, m) = (a.n(), a.m());
    if q.len() != m || x.len() != n || q.iter().all(|c| c.is_zero()) {
        return precondition(format!("need nonzero q in Z^{m} and x in R^{n}"));
    }
    if !delta.is_positive() || *delta >= rat(1, 2) {
        return precondition("need 0 < δ < 1/2");
    }
    if bas.n != n || bas.m != m {
        return precondition("best approximations belong to a different shape");
    }
    let qn = sup_norm(q);
    // Y_k^n ≤ (2m/δ)^m |q|^m
    let target = pow_rat(&(int(2 * m as u64) / delta), m as u32) * int(num_traits::pow(qn.clone(), m));
    let fits = |y: i64| int(num_traits::pow(BigInt::from(y), n)) <= target;
    let k0 = bas.items.iter().rposition(|b| fits(b.norm)).expect("Y_1 = 1 always fits");
    if k0 + 1 >= bas.items.len() {
        return Err(Error::Budget(format!(
            "|q| = {qn} needs best approximations beyond Y = {}",
            bas.items.last().unwrap().norm
        )));
    }
    let (b, next) = (&bas.items[k0], bas.items[k0 + 1].norm);
    let yx = dist_to_int(&dot(&b.y, x));
    if yx < *delta {
        return Err(Error::HypothesisFail {
            level: k0 + 1,
            detail: format!("‖y_k·x‖ = {} < δ", fmt_rat(&yx)),
        });
    }
    let minkowski = minkowski_check(a, b, next)?;
    let constant = certificate_constant(n, m, delta);
    let qpow = nth_root_enclosure(&int(num_traits::pow(qn, m)), n as u32, 128);
    let mut bits = 128u32;
    loop {
        let c = constant.enclosure(bits);
        let value = lin_dist(a, q, x, &pow2(-(bits as i64)))?.mul(&qpow);
        let slack = value.sub(&c);
        if slack.lo >= Rat::zero() || bits >= 512 {
            if slack.hi < Rat::zero() && minkowski == Some(true) {
                return Err(Error::Invariant(format!("transference bound fails for q = {q:?}")));
            }
            return Ok(TransferenceCertificate {
                k: k0 + 1,
                y_norm: b.norm,
                next_norm: next,
                lower_bound: c.lo.clone(),
                constant,
                value,
                slack,
                minkowski,
            });
        }
        bits *= 2;
    }
}

/// `‖y·x‖ ≤ n|y| ‖Aq − x‖ + m|q| M(y)`; returns both sides once the
/// comparison is certified.
pub fn transference_inequality(a: &Matrix, y: &[BigInt], q: &[BigInt], x: &[Rat]) -> Result<(Rat, RatInterval)> {
    let (n, m) = (a.n(), a.m());
    if y.len() != n {
        return precondition(format!("y must lie in Z^{n}"));
    }
    let lhs = dist_to_int(&y.iter().zip(x).map(|(a, b)| b * int(a.clone())).sum::<Rat>());
    let mut bits = BASE_BITS;
    while bits <= MAX_BITS {
        let budget = pow2(-bits);
        let rhs = lin_dist(a, q, x, &budget)?
            .scale(&int(sup_norm(y) * n))
            .add(&form_dist(a, y, &budget)?.scale(&int(sup_norm(q) * m)));
        if lhs <= rhs.lo {
            return Ok((lhs, rhs));
        }
        if lhs > rhs.hi {
            return Err(Error::Invariant(format!("transference inequality fails for y = {y:?}, q = {q:?}")));
        }
        bits *= 2;
    }
    Err(Error::Precision("transference inequality undecided".into()))
}

/// `|q|` as an `f64`, for reports.
pub fn sup_norm_f64(v: &[BigInt]) -> f64 {
    sup_norm(v).to_f64().unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cf::fixture;

    fn col(a: &str, b: &str) -> Matrix {
        Matrix::new(MatrixSpec {
            n: 2,
            m: 1,
            entries: vec![vec![fixture(a).unwrap()], vec![fixture(b).unwrap()]],
            rank_assumption: true,
        })
        .unwrap()
    }

    fn row(a: &str, b: &str) -> Matrix {
        Matrix::new(MatrixSpec {
            n: 1,
            m: 2,
            entries: vec![vec![fixture(a).unwrap(), fixture(b).unwrap()]],
            rank_assumption: true,
        })
        .unwrap()
    }

    fn bigv(v: &[i64]) -> Vec<BigInt> {
        big(v)
    }

    fn fd(a: &Matrix, y: &[i64]) -> f64 {
        form_dist(a, &bigv(y), &pow2(-60)).unwrap().mid_f64()
    }

    fn nd(x: f64) -> f64 {
        (x - x.round()).abs()
    }

    const S2: f64 = std::f64::consts::SQRT_2 - 1.0;

    fn s3() -> f64 {
        3f64.sqrt() - 1.0
    }

    #[test]
    fn form_dist_examples() {
        let a = Matrix::single(fixture("sqrt2m1").unwrap(), true).unwrap();
        assert!((fd(&a, &[5]) - nd(5.0 * S2)).abs() < 1e-14);
        let h = Matrix::single(RealNumberSpec::rational(1, 2), false).unwrap();
        assert_eq!(form_dist(&h, &bigv(&[1]), &pow2(-10)).unwrap(), RatInterval::point(rat(1, 2)));
        let c = col("sqrt2m1", "sqrt3m1");
        assert!((fd(&c, &[1, 1]) - nd(S2 + s3())).abs() < 1e-14);
        let r = row("sqrt2m1", "sqrt3m1");
        assert!((fd(&r, &[1]) - nd(S2).max(nd(s3()))).abs() < 1e-14);
        assert!(form_dist(&c, &bigv(&[0, 0]), &pow2(-10)).is_err());
    }

    #[test]
    fn rank_suspect() {
        let g = fixture("golden").unwrap();
        let a = Matrix::new(MatrixSpec {
            n: 2,
            m: 1,
            entries: vec![vec![g.clone()], vec![g]],
            rank_assumption: true,
        })
        .unwrap();
        assert!(matches!(form_dist(&a, &bigv(&[1, -1]), &pow2(-200)), Err(Error::RankSuspect(_))));
        assert!(matches!(best_approx_sequence(&a, 3), Err(Error::RankSuspect(_))));
    }

    #[test]
    fn shells() {
        assert_eq!(shell(1, 3), vec![vec![3]]);
        assert_eq!(shell(2, 1), vec![vec![0, 1], vec![1, -1], vec![1, 0], vec![1, 1]]);
        for r in 1..6 {
            let s = shell(3, r);
            let brute: Vec<Vec<i64>> = {
                let mut v = Vec::new();
                for a in -r..=r {
                    for b in -r..=r {
                        for c in -r..=r {
                            let x = vec![a, b, c];
                            let top = x.iter().map(|t| t.abs()).max().unwrap();
                            if top == r && x.iter().find(|t| **t != 0).unwrap() > &0 {
                                v.push(x);
                            }
                        }
                    }
                }
                v
            };
            assert_eq!(s, brute);
        }
    }

    #[test]
    fn one_dim_sequences() {
        let a = Matrix::single(fixture("sqrt2m1").unwrap(), true).unwrap();
        assert_eq!(best_approx_sequence(&a, 100).unwrap().norms(), vec![1, 2, 5, 12, 29, 70]);
        let g = Matrix::single(fixture("golden").unwrap(), true).unwrap();
        assert_eq!(best_approx_sequence(&g, 60).unwrap().norms(), vec![1, 2, 3, 5, 8, 13, 21, 34, 55]);
    }

    /// Float oracle: `Y` is a record iff the shell minimum beats every smaller shell.
    fn oracle(f: impl Fn(&[i64]) -> f64, n: usize, y_max: i64) -> Vec<i64> {
        let mut out = Vec::new();
        let mut best = f64::INFINITY;
        for r in 1..=y_max {
            let mut v: Vec<i64> = vec![0; n];
            let mut shell_min = f64::INFINITY;
            let total = (2 * r + 1).pow(n as u32);
            for code in 0..total {
                let mut c = code;
                for slot in v.iter_mut() {
                    *slot = c % (2 * r + 1) - r;
                    c /= 2 * r + 1;
                }
                if v.iter().map(|t| t.abs()).max().unwrap() == r {
                    shell_min = shell_min.min(f(&v));
                }
            }
            if shell_min < best - 1e-12 {
                out.push(r);
                best = shell_min;
            }
        }
        out
    }

    #[test]
    fn two_dim_sequences_match_enumeration() {
        let c = col("sqrt2m1", "sqrt3m1");
        let seq = best_approx_sequence(&c, 50).unwrap();
        let want = oracle(|y| nd(y[0] as f64 * S2 + y[1] as f64 * s3()), 2, 50);
        assert_eq!(seq.norms(), want);
        assert!(seq.items.windows(2).all(|w| w[1].m.hi < w[0].m.lo));
        let r = row("sqrt2m1", "sqrt3m1");
        let seq = best_approx_sequence(&r, 50).unwrap();
        let want = oracle(|y| nd(y[0] as f64 * S2).max(nd(y[0] as f64 * s3())), 1, 50);
        assert_eq!(seq.norms(), want);
    }

    #[test]
    fn density_matches_one_dim() {
        let spec = fixture("sqrt2m1").unwrap();
        let a = Matrix::single(spec.clone(), true).unwrap();
        let al = Alpha::new(spec).unwrap();
        let rep = matrix_dirichlet_density(&a, &rat(1, 4), 12).unwrap();
        assert!(!rep.truncated);
        for l in 1..=12 {
            let s = crate::singular::dirichlet_solvable(&al, &rat(1, 4), l).unwrap();
            assert_eq!(!rep.report.bad_ell.contains(&l), s, "ℓ = {l}");
        }
        let big_c = matrix_dirichlet_density(&a, &rat(1, 1), 6).unwrap();
        assert!(big_c.report.bad_ell.is_empty());
    }

    #[test]
    fn row_density_against_enumeration() {
        let a = row("sqrt2m1", "sqrt3m1");
        let rep = matrix_dirichlet_density(&a, &rat(1, 2), 8).unwrap();
        for l in 1..=8u32 {
            let x_max = 1i64 << l;
            let thr = 0.5 * 2f64.powi(-2 * l as i32);
            let mut best = f64::INFINITY;
            for x0 in -x_max..=x_max {
                for x1 in -x_max..=x_max {
                    if x0 == 0 && x1 == 0 {
                        continue;
                    }
                    best = best.min(nd(x0 as f64 * S2 + x1 as f64 * s3()));
                }
            }
            assert_eq!(!rep.report.bad_ell.contains(&l), best <= thr, "ℓ = {l}");
        }
    }

    #[test]
    fn grid_examples() {
        let g = grid_set(&[1, 0], &rat(1, 4)).unwrap();
        assert_eq!(g.centers, vec![vec![rat(1, 2), Rat::zero()]]);
        assert_eq!(g.radius_sq, rat(1, 16));
        let g = grid_set(&[2, 1], &rat(1, 4)).unwrap();
        assert_eq!(g.centers.len(), 4);
        assert_eq!(g.centers[0], vec![rat(1, 4), Rat::zero()]);
        verify_grid(&g, 500, 1).unwrap();
        let g = grid_set(&[3, -2], &rat(3, 10)).unwrap();
        assert_eq!(g.centers.len(), 9);
        let c = verify_grid(&g, 500, 2).unwrap();
        assert_eq!(c.pairs_checked, 36);
        let g = grid_set(&[-7, 30, 11], &rat(2, 5)).unwrap();
        assert_eq!(g.h, 1);
        verify_grid(&g, 200, 3).unwrap();
    }

    #[test]
    fn bad_points() {
        let ys: Vec<BigInt> = [1, 2, 5, 12, 29, 70, 169].iter().map(|&y| BigInt::from(y)).collect();
        let x = bad_point_1d(&ys, &rat(1, 4)).unwrap();
        for y in &ys {
            assert!(dist_to_int(&(&x * int(y.clone()))) >= rat(1, 4));
        }
        assert!(bad_point_1d(&ys, &rat(2, 5)).is_err());
    }

    #[test]
    fn constants() {
        let c = certificate_constant(1, 1, &rat(1, 2));
        assert_eq!(c.exact(), Some(rat(1, 16)));
        assert_eq!(certificate_constant(1, 1, &rat(1, 3)).exact(), Some(rat(1, 36)));
        for (n, m) in [(1usize, 2usize), (2, 1), (2, 2)] {
            let c = certificate_constant(n, m, &rat(1, 2));
            assert_eq!(c.coef, Rat::new(1.into(), BigInt::from(4 * n)));
            assert_eq!(c.base, int(4 * m as u64));
            let want = (4.0 * n as f64).recip() * (4.0 * m as f64).powf(-(m as f64) / n as f64);
            assert!((c.enclosure(64).mid_f64() - want).abs() < 1e-15);
        }
    }

    #[test]
    fn certificate_example_q7() {
        let a = Matrix::single(fixture("sqrt2m1").unwrap(), true).unwrap();
        let bas = best_approx_sequence(&a, 200).unwrap();
        let x = bad_point_1d(&[BigInt::from(29)], &rat(1, 3)).unwrap();
        let cert = transference_certificate(&a, &bas, &rat(1, 3), &bigv(&[7]), &[x.clone()]).unwrap();
        assert_eq!((cert.k, cert.y_norm, cert.next_norm), (5, 29, 70));
        assert_eq!(cert.lower_bound, rat(1, 36));
        assert_eq!(cert.minkowski, Some(true));
        let direct = nd(7.0 * S2 - crate::interval::rat_to_f64(&x)) * 7.0;
        assert!(direct >= 1.0 / 36.0);
        assert!((cert.value.mid_f64() - direct).abs() < 1e-12);
    }

    #[test]
    fn certificates_sqrt2_sampled() {
        let a = Matrix::single(fixture("sqrt2m1").unwrap(), true).unwrap();
        let bas = best_approx_sequence(&a, 20_000).unwrap();
        let ys: Vec<BigInt> = bas.items.iter().map(|b| BigInt::from(b.norm)).collect();
        let d = rat(1, 4);
        let x = bad_point_1d(&ys, &d).unwrap();
        let xf = crate::interval::rat_to_f64(&x);
        for q in 1..=1000i64 {
            let cert = transference_certificate(&a, &bas, &d, &bigv(&[q]), &[x.clone()]).unwrap();
            assert!(cert.slack.lo >= Rat::zero(), "q = {q}");
            let direct = nd(q as f64 * S2 - xf) * q as f64;
            assert!(direct >= crate::interval::rat_to_f64(&cert.lower_bound));
        }
    }

    #[test]
    fn certificates_two_dim_grid_centers() {
        let a = col("sqrt2m1", "sqrt3m1");
        let bas = best_approx_sequence(&a, 60).unwrap();
        let d = rat(2, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut done = 0;
        for _ in 0..60 {
            let q: i64 = rng.gen_range(1..=120);
            let target = pow_rat(&(int(2) / &d), 1) * int(q);
            let k0 = bas.items.iter().rposition(|b| int(b.norm * b.norm) <= target).unwrap();
            if k0 + 1 >= bas.items.len() {
                continue;
            }
            let g = grid_set(&bas.items[k0].y, &d).unwrap();
            let x = g.centers[rng.gen_range(0..g.centers.len())].clone();
            let cert = transference_certificate(&a, &bas, &d, &bigv(&[q]), &x).unwrap();
            assert!(cert.slack.lo >= Rat::zero());
            done += 1;
        }
        assert!(done > 20);
    }

    #[test]
    fn inequality_samples() {
        let a = col("sqrt2m1", "sqrt3m1");
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..300 {
            let y = bigv(&[rng.gen_range(-30..=30), rng.gen_range(1..=30)]);
            let q = bigv(&[rng.gen_range(1..=500)]);
            let x = vec![rat(rng.gen_range(0..97), 97), rat(rng.gen_range(0..89), 89)];
            transference_inequality(&a, &y, &q, &x).unwrap();
        }
    }

    #[test]
    fn hypothesis_is_checked() {
        let a = Matrix::single(fixture("sqrt2m1").unwrap(), true).unwrap();
        let bas = best_approx_sequence(&a, 200).unwrap();
        let r = transference_certificate(&a, &bas, &rat(1, 3), &bigv(&[7]), &[Rat::zero()]);
        assert!(matches!(r, Err(Error::HypothesisFail { level: 5, .. })));
        let r = transference_certificate(&a, &bas, &rat(1, 3), &bigv(&[100]), &[Rat::zero()]);
        assert!(matches!(r, Err(Error::Budget(_))));
    }
}
