//! File formats: digit JSON, chain CSV, report and verification JSON,
//! Schneider ledger CSV.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::constructors::SchneiderState;
use crate::error::{Error, Result};
use crate::exponents::ExponentReport;
use crate::lattice::{BestApproxChain, Norm};
use crate::padic::{ApproxPair, PAdicNumber, Valuation};
use crate::verify::CheckResult;

pub const DIGITS_FORMAT: &str = "padic-digits-v1";
pub const CHAIN_HEADER: &str = "k,x,y,valuation,valuation_exact,height_sup,height_mult_sq";
pub const LEDGER_HEADER: &str = "n,p_n,q_n,g_n,H_n,v_L_n";

#[derive(Serialize, Deserialize)]
struct DigitFile {
    format: String,
    p: u64,
    precision: usize,
    digits: Vec<u32>,
}

pub fn digits_to_json(xi: &PAdicNumber) -> String {
    let file = DigitFile {
        format: DIGITS_FORMAT.into(),
        p: xi.p() as u64,
        precision: xi.precision(),
        digits: xi.digits().to_vec(),
    };
    let mut s = serde_json::to_string(&file).expect("plain data");
    s.push('\n');
    s
}

pub fn digits_from_json(text: &str) -> Result<PAdicNumber> {
    let file: DigitFile =
        serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
    if file.format != DIGITS_FORMAT {
        return Err(Error::Malformed(format!(
            "unknown format `{}`",
            file.format
        )));
    }
    if file.precision != file.digits.len() {
        return Err(Error::Malformed(format!(
            "precision {} but {} digits",
            file.precision,
            file.digits.len()
        )));
    }
    PAdicNumber::from_digits(file.p, file.digits)
}

pub fn chain_to_csv(chain: &BestApproxChain) -> String {
    let mut out = String::from(CHAIN_HEADER);
    out.push('\n');
    for (k, e) in chain.entries.iter().enumerate() {
        out.push_str(&format!(
            "{k},{},{},{},{},{},{}\n",
            e.x,
            e.y,
            e.val.value(),
            e.val.is_exact(),
            e.height_sup,
            e.height_mult_sq
        ));
    }
    out
}

fn field<T: std::str::FromStr>(s: &str, line: usize, what: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Malformed(format!("line {line}: bad {what} `{s}`")))
}

/// Parses a chain CSV. Heights are recomputed and must match the file.
pub fn chain_from_csv(text: &str, norm: Norm, p: u32, precision: usize) -> Result<BestApproxChain> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CHAIN_HEADER => {}
        _ => return Err(Error::Malformed("missing chain header".into())),
    }
    let mut entries = Vec::new();
    for (i, line) in lines {
        let n = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 7 {
            return Err(Error::Malformed(format!("line {n}: expected 7 columns")));
        }
        let k: usize = field(cols[0], n, "index")?;
        if k != entries.len() {
            return Err(Error::Malformed(format!(
                "line {n}: index {k} out of order"
            )));
        }
        let x: BigInt = field(cols[1], n, "x")?;
        let y: BigInt = field(cols[2], n, "y")?;
        let v: u64 = field(cols[3], n, "valuation")?;
        let exact: bool = field(cols[4], n, "valuation_exact")?;
        let val = if exact {
            Valuation::Exact(v)
        } else {
            Valuation::AtLeast(v)
        };
        let pair = ApproxPair::with_valuation(x, y, val);
        if pair.height_sup.to_string() != cols[5].trim()
            || pair.height_mult_sq.to_string() != cols[6].trim()
        {
            return Err(Error::Malformed(format!(
                "line {n}: heights do not match x, y"
            )));
        }
        entries.push(pair);
    }
    let ceiling = entries.last().map_or(0, |e: &ApproxPair| e.val.value());
    Ok(BestApproxChain {
        norm,
        p,
        precision,
        precision_ceiling: ceiling,
        entries,
    })
}

pub fn report_to_json(report: &ExponentReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("plain data");
    s.push('\n');
    s
}

pub fn report_from_json(text: &str) -> Result<ExponentReport> {
    serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))
}

pub fn checks_to_json(checks: &[CheckResult]) -> String {
    let mut s = serde_json::to_string_pretty(checks).expect("plain data");
    s.push('\n');
    s
}

/// Rows `n = 1..=last`; `v_L_n` is empty where `g_{n+1}` is not yet known.
pub fn ledger_to_csv(state: &SchneiderState) -> String {
    let mut out = String::from(LEDGER_HEADER);
    out.push('\n');
    for n in 1..=state.last() as i64 {
        let (a, b) = state.pair(n);
        let l = state
            .ledger_at(n)
            .map(|v| v.to_string())
            .unwrap_or_default();
        out.push_str(&format!(
            "{n},{a},{b},{},{},{l}\n",
            state.g[(n - 1) as usize],
            state.height(n)
        ));
    }
    out
}
