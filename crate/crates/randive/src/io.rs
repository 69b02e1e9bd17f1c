//! CSV and JSON files: traces, per-chain tables, summaries and price data.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use randive_core::shareprice::PriceSeries;
use randive_core::Trace;
use serde::Serialize;

use crate::error::{HarnessError, Result};
use crate::result::ChainRecord;

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| HarnessError::io(path, e))
}

/// Default column names for a `dim`-dimensional state.
pub fn state_columns(dim: usize) -> Vec<String> {
    if dim == 1 {
        vec!["state".to_string()]
    } else {
        (1..=dim).map(|j| format!("state{j}")).collect()
    }
}

/// Writes `iter,<columns>,accepted`, one row per recorded state. `iter` is
/// the number of steps taken when the state was recorded; `accepted` is
/// whether that step moved. Values are printed in shortest round-trip form.
pub fn write_trace_csv(path: &Path, trace: &Trace, columns: &[String]) -> Result<()> {
    if columns.len() != trace.dim {
        return Err(HarnessError::Config(format!(
            "{} column names for a {}-dimensional trace",
            columns.len(),
            trace.dim
        )));
    }
    let io = |e| HarnessError::io(path, e);
    let mut w = create(path)?;
    writeln!(w, "iter,{},accepted", columns.join(",")).map_err(io)?;
    let (burn_in, thin) = (trace.config.burn_in, trace.config.thin);
    for (k, state) in trace.iter_states().enumerate() {
        let step = burn_in + k * thin;
        write!(w, "{}", step + 1).map_err(io)?;
        for v in state {
            write!(w, ",{v}").map_err(io)?;
        }
        writeln!(w, ",{}", u8::from(trace.accepted[step])).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// A trace CSV read back.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceTable {
    pub columns: Vec<String>,
    pub iters: Vec<u64>,
    /// Row-major, `columns.len()` values per row.
    pub states: Vec<f64>,
    pub accepted: Vec<bool>,
}

impl TraceTable {
    pub fn len(&self) -> usize {
        self.iters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iters.is_empty()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.states.chunks_exact(self.columns.len()).map(|s| s[j]).collect()
    }
}

fn csv_err(path: &Path, e: csv::Error) -> HarnessError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    HarnessError::Parse { path: path.into(), line, msg: e.to_string() }
}

pub fn read_trace_csv(path: &Path) -> Result<TraceTable> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = r.headers().map_err(|e| csv_err(path, e))?.clone();
    let n = header.len();
    if n < 3 || &header[0] != "iter" || &header[n - 1] != "accepted" {
        return Err(HarnessError::Parse { path: path.into(), line: 1, msg: "expected iter,...,accepted".into() });
    }
    let mut t = TraceTable {
        columns: header.iter().skip(1).take(n - 2).map(String::from).collect(),
        iters: Vec::new(),
        states: Vec::new(),
        accepted: Vec::new(),
    };
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let bad = |msg: String| HarnessError::Parse { path: path.into(), line, msg };
        t.iters.push(rec[0].parse().map_err(|_| bad(format!("bad iter {:?}", &rec[0])))?);
        for field in rec.iter().skip(1).take(n - 2) {
            t.states.push(field.parse().map_err(|_| bad(format!("bad value {field:?}")))?);
        }
        t.accepted.push(match &rec[n - 1] {
            "1" => true,
            "0" => false,
            other => return Err(bad(format!("bad accepted flag {other:?}"))),
        });
    }
    Ok(t)
}

/// `chains.csv`: one row per chain with the values the group aggregates
/// are computed from. Study-specific extras follow as further columns,
/// empty where a chain lacks them.
pub fn write_chains_csv(path: &Path, chains: &[ChainRecord]) -> Result<()> {
    let io = |e| HarnessError::io(path, e);
    let mut w = create(path)?;
    let extras: BTreeSet<&str> = chains.iter().flat_map(|c| c.extras.keys().map(String::as_str)).collect();
    write!(w, "chain,group,replicate,estimate,acceptance_rate,ergodic_mean,ks_stat,ks_pvalue").map_err(io)?;
    for k in &extras {
        write!(w, ",{k}").map_err(io)?;
    }
    writeln!(w).map_err(io)?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
    for c in chains {
        write!(
            w,
            "{},{},{},{},{},{},{},{}",
            c.chain,
            c.group,
            c.replicate,
            c.estimate,
            c.report.acceptance_rate,
            c.report.ergodic_mean,
            opt(c.report.ks_stat),
            opt(c.report.ks_pvalue)
        )
        .map_err(io)?;
        for k in &extras {
            write!(w, ",{}", opt(c.extras.get(*k).copied())).map_err(io)?;
        }
        writeln!(w).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

/// Reads share prices: either one positive number per line, or a CSV with
/// a `price` column. Blank lines are skipped.
pub fn load_prices(path: &Path) -> Result<PriceSeries> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    let is_header = first.chars().any(|c| c.is_ascii_alphabetic() && c != 'e' && c != 'E');
    let prices = if is_header { prices_from_csv(path, &text)? } else { prices_from_lines(path, &text)? };
    if prices.len() < 2 {
        return Err(HarnessError::Parse {
            path: path.into(),
            line: 0,
            msg: format!("need at least 2 prices, found {}", prices.len()),
        });
    }
    Ok(PriceSeries::new(prices)?)
}

fn parse_price(path: &Path, line: usize, field: &str) -> Result<f64> {
    let bad = |msg: String| HarnessError::Parse { path: path.into(), line, msg };
    let v: f64 = field.trim().parse().map_err(|_| bad(format!("not a number: {:?}", field.trim())))?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(bad(format!("price must be positive, got {v}")));
    }
    Ok(v)
}

fn prices_from_lines(path: &Path, text: &str) -> Result<Vec<f64>> {
    text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()).map(|(i, l)| parse_price(path, i + 1, l)).collect()
}

fn prices_from_csv(path: &Path, text: &str) -> Result<Vec<f64>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| csv_err(path, e))?.clone();
    let col = header.iter().position(|h| h.eq_ignore_ascii_case("price")).ok_or_else(|| HarnessError::Parse {
        path: path.into(),
        line: 1,
        msg: "no \"price\" column".into(),
    })?;
    let mut prices = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        prices.push(parse_price(path, line, rec.get(col).unwrap_or(""))?);
    }
    Ok(prices)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_names() {
        assert_eq!(state_columns(1), ["state"]);
        assert_eq!(state_columns(3), ["state1", "state2", "state3"]);
    }

    #[test]
    fn header_sniffing_allows_exponents() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("p.txt");
        std::fs::write(&p, "1e2\n1.02E2\n").unwrap();
        let s = load_prices(&p).unwrap();
        assert_eq!(s.prices(), &[100.0, 102.0]);
    }
}
