//! Report envelopes, CSV tables and plot series.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::error::{precondition, Error, Result};
use crate::fractal::{mass_dist_formula, IntervalCover, SurvivorCover};
use crate::interval::{fmt_rat, rat_to_f64};
use crate::singular::{DensityReport, GrowthStats};

/// Bumped whenever a JSON layout under `docs/schemas` changes.
pub const SCHEMA_VERSION: u32 = 1;

pub fn generator() -> String {
    format!("diolab {}", env!("CARGO_PKG_VERSION"))
}

/// Parameters and construction identifier carried by every report.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Meta {
    pub command: String,
    pub params: BTreeMap<String, String>,
    pub construction: String,
}

impl Meta {
    pub fn new(command: &str, construction: impl Into<String>) -> Self {
        Meta {
            command: command.into(),
            params: BTreeMap::new(),
            construction: construction.into(),
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.into(), value.to_string());
        self
    }

    fn params_line(&self) -> String {
        let kv: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("# {} {} [{}]", self.command, kv.join(" "), self.construction)
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    #[serde(skip_serializing_if = "Option::is_none")]
    generator: Option<String>,
    schema_version: u32,
    #[serde(flatten)]
    meta: &'a Meta,
    result: &'a T,
}

/// Pretty JSON report; the generator field is dropped when `header` is false.
pub fn write_json<T: Serialize, W: Write>(mut w: W, header: bool, meta: &Meta, result: &T) -> Result<()> {
    let env = Envelope {
        generator: header.then(generator),
        schema_version: SCHEMA_VERSION,
        meta,
        result,
    };
    serde_json::to_writer_pretty(&mut w, &env)?;
    writeln!(w)?;
    Ok(())
}

/// A CSV table with named columns.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Comment lines (generator when `header`, then parameters), the column header, then rows.
pub fn write_csv<W: Write>(mut w: W, header: bool, meta: Option<&Meta>, table: &Table) -> Result<()> {
    if header {
        writeln!(w, "# {}", generator())?;
    }
    if let Some(m) = meta {
        writeln!(w, "{}", m.params_line())?;
    }
    let mut cw = csv::Writer::from_writer(w);
    cw.write_record(&table.columns).map_err(csv_err)?;
    for r in &table.rows {
        cw.write_record(r).map_err(csv_err)?;
    }
    cw.flush()?;
    Ok(())
}

pub fn f(x: f64) -> String {
    format!("{x:.12}")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    /// Running density of solvable scales against `N`.
    Density,
    /// `(1/k) log q_k` against `k`.
    Growth,
    /// Mass-distribution bound against generation.
    DimBound,
    /// Survivor count against generation.
    Survivor,
}

impl std::str::FromStr for PlotKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "density" => Ok(PlotKind::Density),
            "growth" => Ok(PlotKind::Growth),
            "dim-bound" | "dim_bound" => Ok(PlotKind::DimBound),
            "survivor" => Ok(PlotKind::Survivor),
            _ => Err(Error::Parse(format!("unknown plot kind {s:?}"))),
        }
    }
}

pub enum PlotSource<'a> {
    Density(&'a DensityReport),
    Growth(&'a GrowthStats),
    Covers(&'a [IntervalCover]),
    Survivor(&'a SurvivorCover),
}

impl PlotSource<'_> {
    fn kind(&self) -> PlotKind {
        match self {
            PlotSource::Density(_) => PlotKind::Density,
            PlotSource::Growth(_) => PlotKind::Growth,
            PlotSource::Covers(_) => PlotKind::DimBound,
            PlotSource::Survivor(_) => PlotKind::Survivor,
        }
    }
}

/// x/y series for plotting; an empty report yields a header-only table.
pub fn emit_plotdata(src: &PlotSource, kind: PlotKind) -> Result<Table> {
    if src.kind() != kind {
        return precondition(format!("plot kind {kind:?} does not match a {:?} report", src.kind()));
    }
    let t = match src {
        PlotSource::Density(r) => {
            let mut t = Table::new(&["N", "density"]);
            let mut good = 0u32;
            for (l, ok, _) in r.rows() {
                good += ok as u32;
                t.push(vec![l.to_string(), f(good as f64 / l as f64)]);
            }
            t
        }
        PlotSource::Growth(g) => {
            let mut t = Table::new(&["k", "log_qk_over_k", "lo", "hi"]);
            for (i, v) in g.log_qk_over_k.iter().enumerate() {
                t.push(vec![(i + 1).to_string(), f(v.mid_f64()), fmt_rat(&v.lo), fmt_rat(&v.hi)]);
            }
            t
        }
        PlotSource::Covers(c) => {
            let mut t = Table::new(&["generation", "lower_bound"]);
            let m: Vec<u64> = c.iter().map(|g| g.stats.m_gen).collect();
            let gaps: Vec<_> = c.iter().map(|g| g.stats.gap_gen.clone()).collect();
            for g in 3..=c.len() {
                if let Ok(v) = mass_dist_formula(&m[..g], &gaps[..g]) {
                    t.push(vec![g.to_string(), f(v)]);
                }
            }
            t
        }
        PlotSource::Survivor(s) => {
            let mut t = Table::new(&["generation", "count", "bound"]);
            for i in 0..s.levels.len() {
                t.push(vec![i.to_string(), s.count(i).to_string(), f(rat_to_f64(&s.bound(i)))]);
            }
            t
        }
    };
    Ok(t)
}
