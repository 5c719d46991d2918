//! The `diolab` command line: one subcommand per analysis, key=value config
//! files, JSON/CSV reports and plot series.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde::Serialize;

use crate::cf::{fixture, Alpha, RealNumberSpec};
use crate::error::{precondition, Error, Result};
use crate::fractal::{self, IntervalCover};
use crate::inhomog::{self, GammaRule, Mode, ScanOptions};
use crate::interval::{fmt_rat, parse_rat};
use crate::matrix::{self, Matrix, MatrixSpec};
use crate::partition::{build_partition, Target};
use crate::report::{emit_plotdata, f, write_csv, write_json, Meta, PlotKind, PlotSource, Table};
use crate::singular;

#[derive(Parser, Debug)]
#[command(name = "diolab", version, about = "Exact experiments in inhomogeneous Diophantine approximation", args_override_self = true)]
pub struct Cli {
    /// key=value file; its entries act as flags placed before the command-line ones.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (default: stdout).
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Drop the generator line.
    #[arg(long, global = true)]
    pub no_header: bool,
    /// Also write the command's plot series as CSV to this path.
    #[arg(long, global = true)]
    pub plot: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    /// JSON lines (partition and cover dumps).
    Jsonl,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Partial quotients and convergents.
    #[command(args_override_self = true)]
    Cf(CfArgs),
    /// The three-distance partition at level k.
    #[command(args_override_self = true)]
    Gaps(GapsArgs),
    /// Minimum of |q|·‖qα − x‖ over a range of q.
    #[command(args_override_self = true)]
    Scan(ScanArgs),
    /// One-sided target chain, or the emptiness descent for a point x.
    #[command(args_override_self = true)]
    Onesided(OnesidedArgs),
    /// Cantor-type covers and their dimension bounds.
    #[command(args_override_self = true)]
    Dims(DimsArgs),
    /// Dirichlet solvability at dyadic scales.
    #[command(args_override_self = true)]
    Singular(SingularArgs),
    /// Best approximations of a matrix.
    #[command(args_override_self = true)]
    Matrix(MatrixArgs),
}

const COMMANDS: [&str; 7] = ["cf", "gaps", "scan", "onesided", "dims", "singular", "matrix"];

#[derive(Args, Debug)]
pub struct CfArgs {
    /// Fixture name, JSON file or inline JSON.
    #[arg(long)]
    pub alpha: String,
    #[arg(long, short = 'k', alias = "K")]
    pub k: usize,
}

#[derive(Args, Debug)]
pub struct GapsArgs {
    #[arg(long)]
    pub alpha: String,
    #[arg(long, short = 'k')]
    pub k: usize,
    /// Width budget for the length enclosures.
    #[arg(long, default_value = "1/1000000000000")]
    pub budget: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    TwoSided,
    Positive,
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    #[arg(long)]
    pub alpha: String,
    /// Rational target p/q.
    #[arg(long, conflicts_with = "orbit")]
    pub x: Option<String>,
    /// Orbit-point target mα.
    #[arg(long)]
    pub orbit: Option<String>,
    #[arg(long, default_value = "1")]
    pub q_lo: String,
    #[arg(long)]
    pub q_hi: String,
    #[arg(long, value_enum, default_value = "two-sided")]
    pub mode: ModeArg,
    #[arg(long)]
    pub threshold: Option<String>,
}

#[derive(Args, Debug)]
pub struct OnesidedArgs {
    #[arg(long)]
    pub alpha: String,
    #[arg(long)]
    pub eps: String,
    #[arg(long, default_value_t = 1)]
    pub k_start: usize,
    #[arg(long, default_value_t = 6)]
    pub depth: usize,
    /// Constant γ; the default is γ_k = 1/log(a_k + 2).
    #[arg(long)]
    pub gamma: Option<String>,
    /// Run the emptiness descent for this point instead of building a chain.
    #[arg(long)]
    pub x: Option<String>,
    #[arg(long, default_value = "1/100")]
    pub delta_small: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Construction {
    /// E_k built from n_k = scale·base^k.
    Geometric,
    /// E_k built from n_k = q_φ(k) with ratio R.
    Phi,
    /// Survivors after deleting short-return intervals.
    Survivor,
    /// Middle-thirds Cantor set, box counting only.
    Cantor,
}

#[derive(Args, Debug)]
pub struct DimsArgs {
    #[arg(long, value_enum)]
    pub construction: Construction,
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long, default_value = "1/4")]
    pub delta: String,
    #[arg(long, default_value = "1/10")]
    pub eps: String,
    #[arg(long, default_value_t = 2)]
    pub k0: usize,
    #[arg(long, default_value_t = 6)]
    pub depth: usize,
    /// Survivor cover base M (default: smallest with q_(k_d) ≤ M^d).
    #[arg(long)]
    pub m: Option<String>,
    #[arg(long, default_value_t = 8)]
    pub base: u64,
    #[arg(long, default_value_t = 2)]
    pub scale: u64,
    /// Ratio R for the φ subsequence.
    #[arg(long, default_value = "72")]
    pub r: String,
    #[arg(long, default_value_t = fractal::DEFAULT_INTERVAL_CAP)]
    pub cap: usize,
    /// Write every cover generation as JSON lines to this path.
    #[arg(long)]
    pub cover_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SingularArgs {
    #[arg(long)]
    pub alpha: String,
    #[arg(long)]
    pub c: String,
    #[arg(long = "N", alias = "n")]
    pub n: u32,
}

#[derive(Args, Debug)]
pub struct MatrixArgs {
    /// MatrixSpec JSON file or inline JSON.
    #[arg(long)]
    pub matrix: String,
    #[arg(long, default_value_t = 100)]
    pub ymax: i64,
    /// Adds the transference constant for this δ.
    #[arg(long)]
    pub delta: Option<String>,
    /// With --N, adds the dyadic Dirichlet density for this c.
    #[arg(long, requires = "n")]
    pub c: Option<String>,
    #[arg(long = "N", requires = "c")]
    pub n: Option<u32>,
}

/// Splices `key=value` lines of the `--config` file in as flags right after
/// the subcommand, so later command-line flags win.
pub fn expand_config(args: Vec<String>) -> Result<Vec<String>> {
    let mut path = None;
    for (i, a) in args.iter().enumerate() {
        if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else if a == "--config" {
            path = args.get(i + 1).cloned();
        }
    }
    let Some(path) = path else { return Ok(args) };
    let text = std::fs::read_to_string(&path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
    let mut extra = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("{path}:{}: expected key=value", ln + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k == "config" {
            continue;
        }
        match v {
            "true" => extra.push(format!("--{k}")),
            "false" => {}
            _ => {
                extra.push(format!("--{k}"));
                extra.push(v.to_string());
            }
        }
    }
    let pos = args
        .iter()
        .position(|a| COMMANDS.contains(&a.as_str()))
        .ok_or_else(|| Error::Precondition("no subcommand given".into()))?;
    let mut out = args[..=pos].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}

pub fn load_alpha(s: &str) -> Result<Alpha> {
    let spec: RealNumberSpec = if s.trim_start().starts_with('{') {
        serde_json::from_str(s)?
    } else if Path::new(s).is_file() {
        serde_json::from_str(&std::fs::read_to_string(s)?)?
    } else {
        fixture(s)?
    };
    spec.validate()?;
    Alpha::new(spec)
}

pub fn load_matrix(s: &str) -> Result<Matrix> {
    let text = if s.trim_start().starts_with('{') {
        s.to_string()
    } else {
        std::fs::read_to_string(s)?
    };
    let spec: MatrixSpec = serde_json::from_str(&text)?;
    Matrix::new(spec)
}

fn big(s: &str) -> Result<BigInt> {
    s.trim().parse().map_err(|_| Error::Parse(format!("not an integer: {s:?}")))
}

/// What a command produced, ready to be written.
pub struct Output {
    pub meta: Meta,
    pub json: serde_json::Value,
    pub table: Table,
    /// Raw JSON lines for `--format jsonl`.
    pub lines: Option<Vec<u8>>,
    pub plot: Option<Table>,
    pub default_format: Format,
}

fn to_value<T: Serialize>(t: &T) -> Result<serde_json::Value> {
    Ok(serde_json::to_value(t)?)
}

fn cf_cmd(a: &CfArgs) -> Result<Output> {
    let alpha = load_alpha(&a.alpha)?;
    let c = alpha.conv();
    if a.k > c.last() {
        return precondition(format!("K = {} exceeds the expanded depth {}", a.k, c.last()));
    }
    let mut t = Table::new(&["k", "a_k", "p_k", "q_k"]);
    #[derive(Serialize)]
    struct Row {
        k: usize,
        a: String,
        p: String,
        q: String,
    }
    let mut rows = Vec::new();
    for k in 0..=a.k {
        let r = Row {
            k,
            a: c.a(k).to_string(),
            p: c.p(k as isize).to_string(),
            q: c.q(k as isize).to_string(),
        };
        t.push(vec![k.to_string(), r.a.clone(), r.p.clone(), r.q.clone()]);
        rows.push(r);
    }
    let plot = if a.k >= 2 && alpha.is_irrational() {
        let g = singular::growth_stats(c, a.k)?;
        Some(emit_plotdata(&PlotSource::Growth(&g), PlotKind::Growth)?)
    } else {
        None
    };
    Ok(Output {
        meta: Meta::new("cf", format!("convergents:K={}", a.k))
            .param("alpha", &a.alpha)
            .param("K", a.k),
        json: serde_json::json!({ "alpha": to_value(&alpha.spec)?, "rows": to_value(&rows)? }),
        table: t,
        lines: None,
        plot,
        default_format: Format::Csv,
    })
}

fn gaps_cmd(a: &GapsArgs) -> Result<Output> {
    let alpha = load_alpha(&a.alpha)?;
    let budget = parse_rat(&a.budget)?;
    let p = build_partition(&alpha, a.k, &budget)?;
    p.check_length_bounds()?;
    let mut lines = Vec::new();
    p.dump_jsonl(&alpha, &mut lines)?;
    let mut t = Table::new(&["level", "n", "partner", "type", "len_lo", "len_hi"]);
    let mut rows = Vec::new();
    for l in lines.split(|b| *b == b'\n').filter(|l| !l.is_empty()) {
        let v: serde_json::Value = serde_json::from_slice(l)?;
        let s = |k: &str| match &v[k] {
            serde_json::Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        t.push(vec![s("level"), s("n"), s("partner"), s("type"), s("len_lo"), s("len_hi")]);
        rows.push(v);
    }
    Ok(Output {
        meta: Meta::new("gaps", format!("three-gap:k={}", a.k))
            .param("alpha", &a.alpha)
            .param("k", a.k)
            .param("budget", fmt_rat(&budget)),
        json: serde_json::json!({
            "level": a.k,
            "intervals": p.len().to_string(),
            "type2": p.type2_count.to_string(),
            "rows": rows,
        }),
        table: t,
        lines: Some(lines),
        plot: None,
        default_format: Format::Csv,
    })
}

fn scan_cmd(a: &ScanArgs) -> Result<Output> {
    let alpha = load_alpha(&a.alpha)?;
    let target = match (&a.x, &a.orbit) {
        (Some(x), None) => Target::Rational(parse_rat(x)?),
        (None, Some(m)) => Target::Orbit(big(m)?),
        _ => return precondition("give exactly one of --x or --orbit"),
    };
    let mode = match a.mode {
        ModeArg::TwoSided => Mode::TwoSided,
        ModeArg::Positive => Mode::Positive,
    };
    let opts = ScanOptions {
        threshold: a.threshold.as_deref().map(parse_rat).transpose()?,
        ..ScanOptions::default()
    };
    let (lo, hi) = (big(&a.q_lo)?, big(&a.q_hi)?);
    let scan = inhomog::liminf_scan(&alpha, &target, &lo, &hi, mode, &opts)?;
    let rep = scan.report();
    let mut t = Table::new(&["kind", "q", "lo", "hi"]);
    t.push(vec!["min".into(), rep.argmin.clone(), rep.min_lo.clone(), rep.min_hi.clone()]);
    for p in &rep.below_threshold {
        t.push(vec!["below".into(), p.q.to_string(), p.lo.clone(), p.hi.clone()]);
    }
    let tname = match &target {
        Target::Rational(r) => fmt_rat(r),
        Target::Orbit(m) => format!("{m}α"),
    };
    let mut meta = Meta::new("scan", format!("liminf-scan:mode={:?}", mode))
        .param("alpha", &a.alpha)
        .param("x", tname)
        .param("q_lo", &a.q_lo)
        .param("q_hi", &a.q_hi);
    if let Some(th) = &opts.threshold {
        meta = meta.param("threshold", fmt_rat(th));
    }
    Ok(Output {
        meta,
        json: to_value(&rep)?,
        table: t,
        lines: None,
        plot: None,
        default_format: Format::Json,
    })
}

fn onesided_cmd(a: &OnesidedArgs) -> Result<Output> {
    let alpha = load_alpha(&a.alpha)?;
    let eps = parse_rat(&a.eps)?;
    if let Some(x) = &a.x {
        let x = parse_rat(x)?;
        let ds = parse_rat(&a.delta_small)?;
        let tr = inhomog::emptiness_descent(&alpha, &eps, &x, a.k_start, &ds)?;
        let mut t = Table::new(&["k", "n", "ratio", "value_lo", "value_hi", "ball_ok"]);
        for s in &tr.steps {
            t.push(vec![
                s.k.to_string(),
                s.n.clone(),
                f(s.ratio),
                fmt_rat(&s.value.lo),
                fmt_rat(&s.value.hi),
                s.ball_ok.to_string(),
            ]);
        }
        return Ok(Output {
            meta: Meta::new("onesided", format!("emptiness-descent:eps={},delta={}", fmt_rat(&eps), fmt_rat(&ds)))
                .param("alpha", &a.alpha)
                .param("eps", fmt_rat(&eps))
                .param("x", fmt_rat(&x))
                .param("k_start", a.k_start)
                .param("delta_small", fmt_rat(&ds)),
            json: to_value(&tr)?,
            table: t,
            lines: None,
            plot: None,
            default_format: Format::Json,
        });
    }
    let gamma = match &a.gamma {
        Some(g) => GammaRule::Constant { value: parse_rat(g)? },
        None => GammaRule::default(),
    };
    let ots = inhomog::one_sided_build(&alpha, &eps, a.k_start, a.depth, &gamma)?;
    let lemmas = ots
        .generations
        .iter()
        .filter(|g| ots.generation(g.k + 1).is_some())
        .map(|g| inhomog::check_onesided_lemmas(&alpha, &ots, g.k))
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(&["k", "n_min", "n_max", "n", "gamma_lo", "gamma_hi", "delta"]);
    for g in &ots.generations {
        t.push(vec![
            g.k.to_string(),
            g.n_min.to_string(),
            g.n_max.to_string(),
            g.n.to_string(),
            fmt_rat(&g.gamma.lo),
            fmt_rat(&g.gamma.hi),
            fmt_rat(&g.delta),
        ]);
    }
    let gname = match &gamma {
        GammaRule::InvLog { shift } => format!("invlog({shift})"),
        GammaRule::Constant { value } => fmt_rat(value),
    };
    Ok(Output {
        meta: Meta::new("onesided", format!("onesided-chain:eps={},gamma={gname}", fmt_rat(&eps)))
            .param("alpha", &a.alpha)
            .param("eps", fmt_rat(&eps))
            .param("k_start", a.k_start)
            .param("depth", a.depth),
        json: serde_json::json!({ "set": to_value(&ots)?, "lemmas": to_value(&lemmas)? }),
        table: t,
        lines: None,
        plot: None,
        default_format: Format::Json,
    })
}

fn cover_table(covers: &[IntervalCover]) -> Result<Table> {
    let mut t = Table::new(&["gen", "count", "m", "gap_num", "gap_den", "lenmax_num", "lenmax_den"]);
    for c in covers {
        t.push(vec![
            c.generation.to_string(),
            c.len().to_string(),
            c.stats.m_gen.to_string(),
            c.stats.gap_gen.numer().to_string(),
            c.stats.gap_gen.denom().to_string(),
            c.stats.len_max.numer().to_string(),
            c.stats.len_max.denom().to_string(),
        ]);
    }
    Ok(t)
}

fn dims_cmd(a: &DimsArgs) -> Result<Output> {
    let delta = parse_rat(&a.delta)?;
    let need_alpha = || {
        a.alpha
            .as_deref()
            .ok_or_else(|| Error::Precondition("this construction needs --alpha".into()))
            .and_then(load_alpha)
    };
    let covers_out = |covers: &[IntervalCover]| -> Result<()> {
        if let Some(p) = &a.cover_out {
            let mut w = BufWriter::new(File::create(p)?);
            for c in covers {
                c.write_jsonl(&mut w)?;
            }
            w.flush()?;
        }
        Ok(())
    };
    match a.construction {
        Construction::Geometric | Construction::Phi => {
            let (seq, meta) = if a.construction == Construction::Geometric {
                if a.base < 2 || a.scale < 1 {
                    return precondition("need base ≥ 2 and scale ≥ 1");
                }
                let seq: Vec<BigInt> = (1..=a.depth as u32)
                    .map(|k| BigInt::from(a.scale) * num_traits::pow(BigInt::from(a.base), k as usize))
                    .collect();
                let id = format!("geometric-cover:n_k={}*{}^k,delta={}", a.scale, a.base, fmt_rat(&delta));
                (seq, Meta::new("dims", id).param("base", a.base).param("scale", a.scale))
            } else {
                let alpha = need_alpha()?;
                let r = parse_rat(&a.r)?;
                let phi = fractal::phi_subsequence(alpha.conv(), &r)?;
                let seq: Vec<BigInt> = phi.iter().map(|&k| alpha.q(k).clone()).collect();
                let id = format!("phi-cover:delta={},R={}", fmt_rat(&delta), fmt_rat(&r));
                (seq, Meta::new("dims", id).param("alpha", a.alpha.as_deref().unwrap()).param("R", fmt_rat(&r)))
            };
            let depth = a.depth.min(seq.len());
            let covers = fractal::erdos_taylor_cover(&seq, &delta, depth, a.cap)?;
            if covers.first().map_or(true, |c| c.truncated && c.is_empty()) {
                return Err(Error::Budget(format!("generation 1 alone exceeds {} intervals", a.cap)));
            }
            covers_out(&covers)?;
            let bounds = if covers.len() >= 3 {
                Some(fractal::mass_dist_lower_bound(&covers)?)
            } else {
                None
            };
            let plot = emit_plotdata(&PlotSource::Covers(&covers), PlotKind::DimBound)?;
            let stats: Vec<_> = covers
                .iter()
                .map(|c| serde_json::json!({"gen": c.generation, "count": c.len(), "truncated": c.truncated, "stats": c.stats}))
                .collect();
            Ok(Output {
                meta: meta.param("delta", fmt_rat(&delta)).param("depth", depth).param("cap", a.cap),
                json: serde_json::json!({ "generations": stats, "bounds": to_value(&bounds)? }),
                table: cover_table(&covers)?,
                lines: None,
                plot: Some(plot),
                default_format: Format::Json,
            })
        }
        Construction::Survivor => {
            let alpha = need_alpha()?;
            let eps = parse_rat(&a.eps)?;
            let m = a.m.as_deref().map(big).transpose()?;
            let sc = fractal::survivor_cover(&alpha, &eps, a.k0, a.depth, m.as_ref())?;
            let mut t = Table::new(&["generation", "level", "count", "bound"]);
            for i in 0..sc.levels.len() {
                t.push(vec![i.to_string(), sc.levels[i].to_string(), sc.counts[i].clone(), sc.bounds[i].clone()]);
            }
            let plot = emit_plotdata(&PlotSource::Survivor(&sc), PlotKind::Survivor)?;
            Ok(Output {
                meta: Meta::new("dims", format!("survivor-cover:eps={},K={},M={}", fmt_rat(&eps), a.k0, sc.m))
                    .param("alpha", a.alpha.as_deref().unwrap())
                    .param("eps", fmt_rat(&eps))
                    .param("K", a.k0)
                    .param("depth", a.depth),
                json: to_value(&sc)?,
                table: t,
                lines: None,
                plot: Some(plot),
                default_format: Format::Json,
            })
        }
        Construction::Cantor => {
            let g = a.depth as u32;
            let iv = fractal::cantor_generation(g);
            let exps: Vec<u32> = (1..=(g * 8 / 5).max(8)).collect();
            let est = fractal::box_dimension_estimate(&iv, &exps)?;
            let mut t = Table::new(&["e", "count"]);
            for (e, c) in est.scales.iter().zip(&est.counts) {
                t.push(vec![e.to_string(), c.to_string()]);
            }
            Ok(Output {
                meta: Meta::new("dims", format!("cantor-boxcount:generation={g}")).param("depth", g),
                json: to_value(&est)?,
                table: t,
                lines: None,
                plot: None,
                default_format: Format::Json,
            })
        }
    }
}

fn singular_cmd(a: &SingularArgs) -> Result<Output> {
    let alpha = load_alpha(&a.alpha)?;
    let c = parse_rat(&a.c)?;
    let rep = singular::singular_average_density(&alpha, &c, a.n)?;
    let mut t = Table::new(&["ell", "solvable", "block_k"]);
    for (l, ok, k) in rep.rows() {
        t.push(vec![l.to_string(), (ok as u8).to_string(), k.to_string()]);
    }
    let plot = emit_plotdata(&PlotSource::Density(&rep), PlotKind::Density)?;
    Ok(Output {
        meta: Meta::new("singular", format!("dyadic-dirichlet:c={},N={}", fmt_rat(&c), a.n))
            .param("alpha", &a.alpha)
            .param("c", fmt_rat(&c))
            .param("N", a.n),
        json: to_value(&rep)?,
        table: t,
        lines: None,
        plot: Some(plot),
        default_format: Format::Csv,
    })
}

fn matrix_cmd(a: &MatrixArgs) -> Result<Output> {
    let mx = load_matrix(&a.matrix)?;
    let seq = matrix::best_approx_sequence(&mx, a.ymax)?;
    let mut cols = vec!["i".to_string(), "Y_i".to_string()];
    cols.extend((1..=mx.n()).map(|j| format!("y{j}")));
    cols.extend(["M_lo".to_string(), "M_hi".to_string()]);
    let mut t = Table {
        columns: cols,
        rows: Vec::new(),
    };
    for (i, b) in seq.items.iter().enumerate() {
        let mut row = vec![(i + 1).to_string(), b.norm.to_string()];
        row.extend(b.y.iter().map(|c| c.to_string()));
        row.extend([fmt_rat(&b.m.lo), fmt_rat(&b.m.hi)]);
        t.push(row);
    }
    let mut meta = Meta::new("matrix", format!("best-approx:sup-norm,ymax={}", a.ymax))
        .param("matrix", &a.matrix)
        .param("ymax", a.ymax)
        .param("rank_assumption", mx.spec.rank_assumption);
    let mut json = serde_json::json!({ "sequence": to_value(&seq)? });
    if let Some(d) = &a.delta {
        let d = parse_rat(d)?;
        let c = matrix::certificate_constant(mx.n(), mx.m(), &d);
        json["certificate_constant"] = serde_json::json!({
            "symbolic": c.symbolic(),
            "value": c.enclosure(64).mid_f64(),
            "terms": to_value(&c)?,
        });
        meta = meta.param("delta", fmt_rat(&d));
    }
    if let (Some(c), Some(n)) = (&a.c, a.n) {
        let c = parse_rat(c)?;
        json["density"] = to_value(&matrix::matrix_dirichlet_density(&mx, &c, n)?)?;
        meta = meta.param("c", fmt_rat(&c)).param("N", n);
    }
    Ok(Output {
        meta,
        json,
        table: t,
        lines: None,
        plot: None,
        default_format: Format::Csv,
    })
}

pub fn execute(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::Cf(a) => cf_cmd(a),
        Command::Gaps(a) => gaps_cmd(a),
        Command::Scan(a) => scan_cmd(a),
        Command::Onesided(a) => onesided_cmd(a),
        Command::Dims(a) => dims_cmd(a),
        Command::Singular(a) => singular_cmd(a),
        Command::Matrix(a) => matrix_cmd(a),
    }
}

/// Writes the report in the chosen format, plus the plot series when asked.
pub fn write_output<W: Write>(cli: &Cli, out: &Output, w: W) -> Result<()> {
    let header = !cli.no_header;
    let meta = out.meta.clone().param("seed", cli.seed);
    match cli.format.unwrap_or(out.default_format) {
        Format::Json => write_json(w, header, &meta, &out.json)?,
        Format::Csv => write_csv(w, header, Some(&meta), &out.table)?,
        Format::Jsonl => {
            let Some(lines) = &out.lines else {
                return precondition(format!("{} has no JSON lines output", meta.command));
            };
            let mut w = w;
            w.write_all(lines)?;
        }
    }
    if let Some(p) = &cli.plot {
        let t = out
            .plot
            .as_ref()
            .ok_or_else(|| Error::Precondition(format!("{} has no plot series", meta.command)))?;
        write_csv(BufWriter::new(File::create(p)?), header, Some(&meta), t)?;
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return precondition("--threads must be positive");
        }
        // a pool may already exist when called twice in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let out = execute(cli)?;
    match &cli.out {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            write_output(cli, &out, &mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            write_output(cli, &out, &mut w)?;
        }
    }
    Ok(())
}

/// Full entry point; returns the process exit status.
pub fn main_with_args(args: Vec<OsString>) -> i32 {
    let args: Vec<String> = args.into_iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("diolab: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("diolab: {e}");
            e.exit_code()
        }
    }
}
