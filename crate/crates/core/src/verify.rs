//! Inequalities between the four exponents, checked on reports and chains.
//!
//! Float checks compare estimates with a tolerance; the gap checks on
//! chains (`check_padicle`, `check_korollar`) are exact integer comparisons.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exponents::ExponentReport;
use crate::lattice::{BestApproxChain, Norm};
use crate::padic::{ln_biguint, p_pow, ApproxPair};

/// Default tolerance for checks on float estimates.
pub const DEFAULT_TOLERANCE: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Slack of the inequality; negative means violated (before tolerance).
    pub margin: f64,
    pub inputs: BTreeMap<String, Value>,
    /// Diagnostic checks never fail a verification run.
    #[serde(default)]
    pub diagnostic: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckResult {
    fn new(name: &str, margin: f64, tol: f64, inputs: BTreeMap<String, Value>) -> Self {
        CheckResult {
            name: name.to_string(),
            passed: margin >= -tol,
            margin,
            inputs,
            diagnostic: false,
            note: None,
        }
    }

    fn skipped(name: &str, note: &str, inputs: BTreeMap<String, Value>) -> Self {
        CheckResult {
            name: name.to_string(),
            passed: true,
            margin: f64::NAN,
            inputs,
            diagnostic: false,
            note: Some(note.to_string()),
        }
    }
}

fn inputs(pairs: &[(&str, Option<f64>)]) -> BTreeMap<String, Value> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), json!(v)))
        .collect()
}

fn need(v: Option<f64>, what: &str) -> std::result::Result<f64, String> {
    v.ok_or_else(|| format!("{what} not estimated"))
}

/// `2 ≤ μ`, `μ ≤ μ× ≤ 2μ`, `μ̂ = 2`, `μ̂× ≤ 4`.
pub fn check_chain_bounds(report: &ExponentReport, tol: f64) -> Vec<CheckResult> {
    let r = report;
    let all = inputs(&[
        ("mu", r.mu),
        ("mu_times", r.mu_times),
        ("hat_mu", r.hat_mu),
        ("hat_mu_times", r.hat_mu_times),
    ]);
    let mut out = Vec::new();
    let mut push = |name: &str, margin: std::result::Result<f64, String>| match margin {
        Ok(m) => out.push(CheckResult::new(name, m, tol, all.clone())),
        Err(note) => out.push(CheckResult::skipped(name, &note, all.clone())),
    };
    push("mu_at_least_two", need(r.mu, "mu").map(|mu| mu - 2.0));
    push(
        "mu_at_most_mu_times",
        need(r.mu, "mu").and_then(|mu| need(r.mu_times, "mu_times").map(|mt| mt - mu)),
    );
    push(
        "mu_times_at_most_twice_mu",
        need(r.mu, "mu").and_then(|mu| need(r.mu_times, "mu_times").map(|mt| 2.0 * mu - mt)),
    );
    push(
        "hat_mu_equals_two",
        need(r.hat_mu, "hat_mu").map(|h| -(h - 2.0).abs()),
    );
    push(
        "hat_mu_times_at_most_four",
        need(r.hat_mu_times, "hat_mu_times").map(|h| 4.0 - h),
    );
    out
}

/// The three bounds on `μ̂×`: `μ̂× ≤ 3 + 2/(μ× − 2)`,
/// `μ× ≥ μ̂×² − 3μ̂× + 3` and `μ̂× ≤ (5 + √5)/2`.
pub fn check_endlich(report: &ExponentReport, tol: f64) -> Vec<CheckResult> {
    let all = inputs(&[
        ("mu_times", report.mu_times),
        ("hat_mu_times", report.hat_mu_times),
    ]);
    let (Some(mt), Some(h)) = (report.mu_times, report.hat_mu_times) else {
        return [
            "hat_mu_times_vs_mu_times",
            "mu_times_quadratic_floor",
            "hat_mu_times_golden_bound",
        ]
        .iter()
        .map(|n| CheckResult::skipped(n, "multiplicative estimates missing", all.clone()))
        .collect();
    };
    let first = if mt <= 2.0 {
        CheckResult::skipped(
            "hat_mu_times_vs_mu_times",
            "mu_times ≤ 2, bound undefined",
            all.clone(),
        )
    } else {
        CheckResult::new(
            "hat_mu_times_vs_mu_times",
            3.0 + 2.0 / (mt - 2.0) - h,
            tol,
            all.clone(),
        )
    };
    vec![
        first,
        CheckResult::new(
            "mu_times_quadratic_floor",
            mt - (h * h - 3.0 * h + 3.0),
            tol,
            all.clone(),
        ),
        CheckResult::new(
            "hat_mu_times_golden_bound",
            (5.0 + 5f64.sqrt()) / 2.0 - h,
            tol,
            all,
        ),
    ]
}

/// Bounds on `μ̂×` for a lacunary number with gap ratios `c ≤ d`:
/// `3 − 1/c ≤ μ̂× ≤ 3 + 1/(d − 1)`. Infinite `c`, `d` give the bound 3.
pub fn lacunary_bounds(c: f64, d: f64) -> Result<(f64, f64)> {
    if d <= 1.0 {
        return Err(Error::InvalidSpec("d must exceed 1".into()));
    }
    let lower = if c.is_infinite() { 3.0 } else { 3.0 - 1.0 / c };
    let upper = if d.is_infinite() {
        3.0
    } else {
        3.0 + 1.0 / (d - 1.0)
    };
    Ok((lower, upper))
}

pub fn check_lacunary_sandwich(
    report: &ExponentReport,
    c: f64,
    d: f64,
    tol: f64,
) -> Result<CheckResult> {
    let (lower, upper) = lacunary_bounds(c, d)?;
    let mut all = inputs(&[
        ("c", Some(c)),
        ("d", Some(d)),
        ("lower", Some(lower)),
        ("upper", Some(upper)),
    ]);
    let Some(h) = report.hat_mu_times else {
        return Ok(CheckResult::skipped(
            "lacunary_sandwich",
            "hat_mu_times not estimated",
            all,
        ));
    };
    all.insert("hat_mu_times".into(), json!(h));
    // distance from the conjectured value 3 − 1/c
    all.insert("conjecture_gap".into(), json!(h - lower));
    Ok(CheckResult::new(
        "lacunary_sandwich",
        (h - lower).min(upper - h),
        tol,
        all,
    ))
}

fn ln_p_units(n: &BigUint, p: u32) -> f64 {
    ln_biguint(n) / (p as f64).ln()
}

/// No two linearly independent pairs with `|x| ≤ X₁`, `|y| ≤ X₂` both have
/// `|yξ − x|_p < 1/(2 X₁ X₂)`. For every independent pair of pairs the box
/// is the smallest one containing both; exact comparison `2X₁X₂ ≥ p^v`
/// with `v` the smaller valuation (censored valuations count as their lower
/// bound).
pub fn check_padicle(pairs: &[ApproxPair], p: u32) -> CheckResult {
    let mut margin = f64::INFINITY;
    let mut worst: Option<(usize, usize)> = None;
    let mut passed = true;
    let mut checked = 0u64;
    let coprime: Vec<bool> = pairs.iter().map(|q| q.is_coprime()).collect();
    for i in 0..pairs.len() {
        for j in i + 1..pairs.len() {
            let (a, b) = (&pairs[i], &pairs[j]);
            // coprime pairs are dependent only when equal up to sign
            let dependent = if coprime[i] && coprime[j] {
                a.x.magnitude() == b.x.magnitude()
                    && a.y.magnitude() == b.y.magnitude()
                    && (&a.x * &b.y - &b.x * &a.y).is_zero()
            } else {
                (&a.x * &b.y - &b.x * &a.y).is_zero()
            };
            if dependent {
                continue;
            }
            checked += 1;
            let x1 = a.x.magnitude().max(b.x.magnitude());
            let x2 = a.y.magnitude().max(b.y.magnitude());
            let v = a.val.value().min(b.val.value());
            // 2·X₁·X₂ ≥ 2^{bits₁ + bits₂ − 1}; skip the product when that
            // already clears p^v with room to spare
            let floor_bits = x1.bits() + x2.bits() - 1;
            let need_bits = (v as f64 * (p as f64).log2()).ceil() as u64 + 1;
            if floor_bits > need_bits + 1 {
                let m = (floor_bits as f64 - 1.0) / (p as f64).log2() - v as f64;
                margin = margin.min(m);
                continue;
            }
            let bound: BigUint = 2u32 * x1 * x2;
            let ok = bound >= p_pow(p, v);
            let m = ln_p_units(&bound, p) - v as f64;
            if !ok {
                passed = false;
            }
            if m < margin || (!ok && worst.is_none()) {
                margin = m;
                worst = Some((i, j));
            }
        }
    }
    let mut all = BTreeMap::new();
    all.insert("pairs".into(), json!(pairs.len()));
    all.insert("independent_pairs_checked".into(), json!(checked));
    all.insert("tightest".into(), json!(worst));
    CheckResult {
        name: "no_two_independent_small_solutions".into(),
        passed,
        margin: if margin.is_finite() { margin } else { 0.0 },
        inputs: all,
        diagnostic: false,
        note: None,
    }
}

/// Consecutive sup-chain entries against the window
/// `½ p^{v_k}/H_k ≤ H_{k+1} ≤ (p + 1) p^{v_k}/H_k` (exact integers).
/// Returns the lower side and the upper side as separate checks. The upper
/// side can fail on coprime chains: the short vectors of the level-`v_k + 1`
/// lattice may all be `p`-power multiples of earlier entries, in which case
/// the next coprime entry comes later than the window allows. It is
/// reported as a diagnostic.
pub fn check_korollar(chain: &BestApproxChain) -> Result<Vec<CheckResult>> {
    if chain.norm != Norm::Sup {
        return Err(Error::InvalidSpec(
            "gap check needs a sup-height chain".into(),
        ));
    }
    if chain.entries.len() < 2 {
        return Err(Error::InsufficientData("chain shorter than 2".into()));
    }
    let p = chain.p;
    let ln2 = ln_p_units(&BigUint::from(2u32), p);
    let ln_p1 = ln_p_units(&BigUint::from(p + 1), p);
    let mut sides = [(f64::INFINITY, Vec::new()), (f64::INFINITY, Vec::new())];
    for k in 0..chain.entries.len() - 1 {
        let (a, b) = (&chain.entries[k], &chain.entries[k + 1]);
        if !a.val.is_exact() {
            break;
        }
        let pv = p_pow(p, a.val.value());
        let prod = &a.height_sup * &b.height_sup;
        let lp = ln_p_units(&prod, p);
        let v = a.val.value() as f64;
        sides[0].0 = f64::min(sides[0].0, lp + ln2 - v);
        if pv > 2u32 * &prod {
            sides[0].1.push(k);
        }
        sides[1].0 = f64::min(sides[1].0, v + ln_p1 - lp);
        if prod > (p + 1) * &pv {
            sides[1].1.push(k);
        }
    }
    let names = ["consecutive_height_lower", "consecutive_height_upper"];
    Ok(sides
        .into_iter()
        .zip(names)
        .map(|((margin, failures), name)| {
            let mut all = BTreeMap::new();
            all.insert("entries".into(), json!(chain.entries.len()));
            all.insert("failing_k".into(), json!(failures));
            let upper = name == names[1];
            CheckResult {
                name: name.into(),
                passed: failures.is_empty(),
                margin: if margin.is_finite() { margin } else { 0.0 },
                inputs: all,
                diagnostic: upper,
                note: (upper && !failures.is_empty()).then(|| {
                    "next coprime entry lies beyond the window; p-power multiples fill it".into()
                }),
            }
        })
        .collect())
}

/// Which coordinate dominates an entry of a multiplicative chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `|x| ≥ |y|`.
    X,
    /// `|x| < |y|`.
    Y,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeuDiagnosis {
    /// `ln(|x_k| / |y_k|)` per entry.
    pub log_ratios: Vec<f64>,
    pub sides: Vec<Side>,
    /// Tail indices `k` where entries `k` and `k + 1` lie on the same side.
    pub same_side_x: Vec<usize>,
    pub same_side_y: Vec<usize>,
    pub hat_mu_times: Option<f64>,
    /// Consecutive same-side entries occur in the tail while `μ̂× > 3 + tol`.
    pub anomaly: bool,
}

/// Balance of the multiplicative chain against the two same-side
/// hypotheses under which `μ̂× ≤ 3`.
pub fn diagnose_neu(
    chain: &BestApproxChain,
    hat_mu_times: Option<f64>,
    burn_in: usize,
    tol: f64,
) -> NeuDiagnosis {
    let log_ratios: Vec<f64> = chain
        .entries
        .iter()
        .map(|e| {
            let (x, y) = (e.x.abs(), e.y.abs());
            ln_bigint(&x) - ln_bigint(&y)
        })
        .collect();
    let sides: Vec<Side> = chain
        .entries
        .iter()
        .map(|e| {
            if e.x.magnitude() >= e.y.magnitude() {
                Side::X
            } else {
                Side::Y
            }
        })
        .collect();
    let mut same_side_x = Vec::new();
    let mut same_side_y = Vec::new();
    for k in burn_in..sides.len().saturating_sub(1) {
        match (sides[k], sides[k + 1]) {
            (Side::X, Side::X) => same_side_x.push(k),
            (Side::Y, Side::Y) => same_side_y.push(k),
            _ => {}
        }
    }
    let hypothesis = !same_side_x.is_empty() || !same_side_y.is_empty();
    let anomaly = hypothesis && hat_mu_times.is_some_and(|h| h > 3.0 + tol);
    NeuDiagnosis {
        log_ratios,
        sides,
        same_side_x,
        same_side_y,
        hat_mu_times,
        anomaly,
    }
}

fn ln_bigint(n: &BigInt) -> f64 {
    ln_biguint(n.magnitude())
}

/// The diagnosis as a check entry that never fails a run.
pub fn neu_check(d: &NeuDiagnosis) -> CheckResult {
    let mut all = BTreeMap::new();
    all.insert("same_side_x".into(), json!(d.same_side_x.len()));
    all.insert("same_side_y".into(), json!(d.same_side_y.len()));
    all.insert("hat_mu_times".into(), json!(d.hat_mu_times));
    all.insert("anomaly".into(), json!(d.anomaly));
    CheckResult {
        name: "same_side_balance".into(),
        passed: !d.anomaly,
        margin: d.hat_mu_times.map_or(f64::NAN, |h| 3.0 - h),
        inputs: all,
        diagnostic: true,
        note: None,
    }
}

/// True when every non-diagnostic check passed.
pub fn all_passed(checks: &[CheckResult]) -> bool {
    checks.iter().filter(|c| !c.diagnostic).all(|c| c.passed)
}
