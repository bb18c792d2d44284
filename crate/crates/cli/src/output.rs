//! CSV and JSON serialization. Floats are written with six decimals so that
//! identical runs produce identical bytes.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use stochtopo::geometry::Point2D;
use stochtopo::placement::{PlacementResult, RingHierarchy};
use stochtopo::process::{BaseStation, CellGeneration};

use crate::CliError;

pub const BS_HEADER: [&str; 4] = ["id", "x1_km", "x2_km", "cell"];
pub const POP_HEADER: [&str; 4] = ["id", "x1_km", "x2_km", "ring"];
pub const ASSIGNMENT_HEADER: [&str; 4] = ["bs_id", "pop_id", "distance_km", "rtt_ms"];

pub fn fmt6(v: f64) -> String {
    let s = format!("{v:.6}");
    // never write "-0.000000"
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// Rounds to the precision the CSV files keep, so that a written and
/// re-read station list equals the in-memory one.
pub fn quantize(v: f64) -> f64 {
    fmt6(v).parse().expect("formatted float parses")
}

fn table<const N: usize>(header: [&str; N], rows: impl Iterator<Item = [String; N]>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

pub fn bs_csv(bss: &[BaseStation<f64>]) -> String {
    table(
        BS_HEADER,
        bss.iter().map(|b| [b.id.to_string(), fmt6(b.location.x1), fmt6(b.location.x2), b.cell_index.to_string()]),
    )
}

pub fn pops_csv(result: &PlacementResult<f64>) -> String {
    table(
        POP_HEADER,
        result.pops.iter().map(|p| [p.id.to_string(), fmt6(p.location.x1), fmt6(p.location.x2), p.ring.name.clone()]),
    )
}

pub fn assignments_csv(result: &PlacementResult<f64>) -> String {
    table(
        ASSIGNMENT_HEADER,
        result
            .assignments
            .iter()
            .map(|a| [a.bs_id.to_string(), a.pop_id.to_string(), fmt6(a.distance_km), fmt6(a.rtt_ms)]),
    )
}

fn read_table(text: &str, source: &str, header: [&str; 4]) -> Result<Vec<(u64, csv::StringRecord)>, CliError> {
    let bad = |message: String| CliError::Input(format!("{source}: {message}"));
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let found = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(bad(format!(
            "row 1: expected header {:?}, found {:?}",
            header.join(","),
            found.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| match e.position() {
            Some(p) => bad(format!("row {}: {e}", p.line())),
            None => bad(e.to_string()),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        rows.push((line, record));
    }
    Ok(rows)
}

fn field<V: std::str::FromStr>(
    record: &csv::StringRecord,
    line: u64,
    col: usize,
    header: &[&str],
    source: &str,
) -> Result<V, CliError>
where
    V::Err: std::fmt::Display,
{
    let raw = record.get(col).unwrap_or("");
    raw.parse().map_err(|e| {
        CliError::Input(format!(
            "{source}: row {line}, column {} ({}): cannot parse {raw:?}: {e}",
            col + 1,
            header[col]
        ))
    })
}

/// Parses a `bs.csv`. Errors name the offending row (1 = header) and column.
pub fn parse_bs_csv(text: &str, source: &str) -> Result<Vec<BaseStation<f64>>, CliError> {
    let mut seen = BTreeMap::new();
    let mut out = Vec::new();
    for (line, rec) in read_table(text, source, BS_HEADER)? {
        let id: usize = field(&rec, line, 0, &BS_HEADER, source)?;
        let x1: f64 = field(&rec, line, 1, &BS_HEADER, source)?;
        let x2: f64 = field(&rec, line, 2, &BS_HEADER, source)?;
        let cell: usize = field(&rec, line, 3, &BS_HEADER, source)?;
        for (col, v) in [(1, x1), (2, x2)] {
            if !v.is_finite() {
                return Err(CliError::Input(format!(
                    "{source}: row {line}, column {} ({}): not finite",
                    col + 1,
                    BS_HEADER[col]
                )));
            }
        }
        if let Some(first) = seen.insert(id, line) {
            return Err(CliError::Input(format!(
                "{source}: row {line}, column 1 (id): id {id} already used on row {first}"
            )));
        }
        out.push(BaseStation { id, location: Point2D::new(x1, x2), cell_index: cell });
    }
    Ok(out)
}

/// A PoP as stored in `pops.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct PopRow {
    pub id: usize,
    pub location: Point2D<f64>,
    pub ring: String,
}

pub fn parse_pops_csv(text: &str, source: &str) -> Result<Vec<PopRow>, CliError> {
    read_table(text, source, POP_HEADER)?
        .into_iter()
        .map(|(line, rec)| {
            Ok(PopRow {
                id: field(&rec, line, 0, &POP_HEADER, source)?,
                location: Point2D::new(
                    field(&rec, line, 1, &POP_HEADER, source)?,
                    field(&rec, line, 2, &POP_HEADER, source)?,
                ),
                ring: rec.get(3).unwrap_or("").to_string(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub cell: usize,
    pub target: u32,
    pub k: f64,
    pub radius_km: f64,
    pub raw_count: usize,
    pub survivors: usize,
}

impl From<&CellGeneration<f64>> for CellSummary {
    fn from(c: &CellGeneration<f64>) -> Self {
        Self {
            cell: c.cell_index,
            target: c.target,
            k: c.k,
            radius_km: c.radius,
            raw_count: c.raw_count,
            survivors: c.survivors.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub seed: u64,
    pub bs_count: usize,
    pub pop_count: usize,
    pub assigned_count: usize,
    pub pops_per_ring: BTreeMap<String, usize>,
    pub ring_reach_km: BTreeMap<String, Option<f64>>,
    pub max_rtt_ms: Option<f64>,
    pub mean_rtt_ms: Option<f64>,
    pub unassignable: Vec<usize>,
    pub cells: Vec<CellSummary>,
}

impl Summary {
    pub fn new(
        seed: u64,
        bs_count: usize,
        rings: &RingHierarchy<f64>,
        reach: &[Option<f64>],
        result: &PlacementResult<f64>,
        cells: &[CellGeneration<f64>],
    ) -> Self {
        let mut pops_per_ring: BTreeMap<String, usize> = rings.rings().iter().map(|r| (r.name.clone(), 0)).collect();
        for p in &result.pops {
            *pops_per_ring.entry(p.ring.name.clone()).or_default() += 1;
        }
        let rtts: Vec<f64> = result.assignments.iter().map(|a| quantize(a.rtt_ms)).collect();
        let max_rtt_ms = rtts.iter().copied().reduce(f64::max);
        let mean_rtt_ms = (!rtts.is_empty()).then(|| quantize(rtts.iter().sum::<f64>() / rtts.len() as f64));
        Self {
            seed,
            bs_count,
            pop_count: result.pops.len(),
            assigned_count: result.assignments.len(),
            pops_per_ring,
            ring_reach_km: rings.rings().iter().zip(reach).map(|(r, m)| (r.name.clone(), m.map(quantize))).collect(),
            max_rtt_ms,
            mean_rtt_ms,
            unassignable: result.unassignable.clone(),
            cells: cells.iter().map(CellSummary::from).collect(),
        }
    }
}

pub fn to_json<S: Serialize>(value: &S) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("summary serializes");
    s.push('\n');
    s
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
