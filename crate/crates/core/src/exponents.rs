//! Exponent estimates from best-approximation chains.
//!
//! For a chain with heights `H_k` (sup height, or `√|xy|` for the
//! multiplicative chain) and valuations `v_k`:
//!
//! * `τ_k = v_k ln p / ln H_k`, and the classical exponent is the tail max;
//! * `uniform_term_k = max_{j ≤ k}(v_j ln p − ln H_j) / ln H_{k+1}`, and the
//!   uniform exponent is one plus the tail min.
//!
//! Just below `H_{k+1}` the best pair of height `≤ X` is a p-power multiple
//! `M·(x_j, y_j)` of some earlier entry, worth `v_j ln p + ln(X / H_j)`. The
//! maximizing `j` is usually `k`, but not always: after a very good entry
//! (a lacunary truncation, say) its multiples can beat several later
//! coprime entries, so the maximum runs over the whole prefix.
//!
//! Only entries with exact valuations contribute a `τ_k`; a censored last
//! entry still supplies `H_{k+1}` for the preceding uniform term.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{
    uniform_minimum, uniform_minimum_direct, BestApproxChain, Norm, DIRECT_UNIFORM_LIMIT,
};
use crate::padic::{PAdicNumber, Valuation};

/// Default fraction of the chain discarded before tail statistics.
pub const DEFAULT_BURN_IN: f64 = 0.2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointwiseExponent {
    pub k: usize,
    pub tau: f64,
    pub uniform_term: Option<f64>,
}

fn ln_heights(chain: &BestApproxChain) -> Vec<f64> {
    chain
        .entries
        .iter()
        .map(|e| chain.norm.ln_height(e))
        .collect()
}

/// Pointwise exponents over the exact prefix. Entries of height 1 have no
/// finite `τ` and are left out.
pub fn pointwise(chain: &BestApproxChain) -> Result<Vec<PointwiseExponent>> {
    let exact = chain.exact_entries().len();
    if exact < 2 {
        return Err(Error::InsufficientData(format!(
            "chain has {exact} exact entries, need at least 2"
        )));
    }
    let ln_p = (chain.p as f64).ln();
    let ln_h = ln_heights(chain);
    let mut out = Vec::with_capacity(exact);
    let mut best_excess = f64::NEG_INFINITY;
    for k in 0..exact {
        let v = chain.entries[k].val.value() as f64;
        best_excess = best_excess.max(v * ln_p - ln_h[k]);
        if ln_h[k] <= 0.0 {
            continue;
        }
        let uniform_term = ln_h.get(k + 1).map(|next| best_excess / next);
        out.push(PointwiseExponent {
            k,
            tau: v * ln_p / ln_h[k],
            uniform_term,
        });
    }
    Ok(out)
}

/// `max(2, ⌊fraction · len⌋)`.
pub fn burn_in_index(len: usize, fraction: f64) -> usize {
    ((fraction * len as f64).floor() as usize).max(2)
}

/// Tail maximum of `τ` and one plus tail minimum of the uniform term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub limsup: f64,
    pub liminf: f64,
    pub burn_in: usize,
    pub precision_limited: bool,
}

fn tail_estimate(chain: &BestApproxChain, fraction: f64) -> Result<TailEstimate> {
    let pw = pointwise(chain)?;
    let burn_in = burn_in_index(chain.exact_entries().len(), fraction);
    let tail: Vec<&PointwiseExponent> = pw.iter().filter(|e| e.k >= burn_in).collect();
    let limsup = tail.iter().map(|e| e.tau).fold(f64::NEG_INFINITY, f64::max);
    let liminf = tail
        .iter()
        .filter_map(|e| e.uniform_term)
        .fold(f64::INFINITY, f64::min);
    if !limsup.is_finite() || !liminf.is_finite() {
        return Err(Error::InsufficientData(format!(
            "no usable entries after burn-in {burn_in} ({} exact entries)",
            chain.exact_entries().len()
        )));
    }
    Ok(TailEstimate {
        limsup,
        liminf: 1.0 + liminf,
        burn_in,
        precision_limited: chain.is_censored(),
    })
}

/// `(μ, μ̂)` from a sup-height chain.
pub fn estimate_classical(chain_sup: &BestApproxChain, burn_in: f64) -> Result<TailEstimate> {
    if chain_sup.norm != Norm::Sup {
        return Err(Error::InvalidSpec("expected a sup-height chain".into()));
    }
    tail_estimate(chain_sup, burn_in)
}

/// `(μ×, μ̂×)` from a multiplicative chain.
pub fn estimate_multiplicative(chain_mult: &BestApproxChain, burn_in: f64) -> Result<TailEstimate> {
    if chain_mult.norm != Norm::Mult {
        return Err(Error::InvalidSpec("expected a multiplicative chain".into()));
    }
    tail_estimate(chain_mult, burn_in)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub mu: Option<f64>,
    pub mu_times: Option<f64>,
    pub hat_mu: Option<f64>,
    pub hat_mu_times: Option<f64>,
    pub burn_in: usize,
    pub precision_limited: bool,
    pub pointwise: Vec<PointwiseExponent>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pointwise_mult: Vec<PointwiseExponent>,
}

/// Report from either chain or both. `pointwise` holds the sup chain when
/// present, otherwise the multiplicative one.
pub fn report(
    sup: Option<&BestApproxChain>,
    mult: Option<&BestApproxChain>,
    burn_in: f64,
) -> Result<ExponentReport> {
    if sup.is_none() && mult.is_none() {
        return Err(Error::InsufficientData("no chain given".into()));
    }
    let mut r = ExponentReport {
        mu: None,
        mu_times: None,
        hat_mu: None,
        hat_mu_times: None,
        burn_in: 0,
        precision_limited: false,
        pointwise: Vec::new(),
        pointwise_mult: Vec::new(),
    };
    if let Some(c) = sup {
        let e = estimate_classical(c, burn_in)?;
        r.mu = Some(e.limsup);
        r.hat_mu = Some(e.liminf);
        r.burn_in = e.burn_in;
        r.precision_limited |= e.precision_limited;
        r.pointwise = pointwise(c)?;
    }
    if let Some(c) = mult {
        let e = estimate_multiplicative(c, burn_in)?;
        r.mu_times = Some(e.limsup);
        r.hat_mu_times = Some(e.liminf);
        r.burn_in = r.burn_in.max(e.burn_in);
        r.precision_limited |= e.precision_limited;
        let pw = pointwise(c)?;
        if sup.is_some() {
            r.pointwise_mult = pw;
        } else {
            r.pointwise = pw;
        }
    }
    Ok(r)
}

/// One sampled `X` of [`cross_check_uniform`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformSample {
    pub k: usize,
    pub x_bound: u64,
    /// `X` is the height of entry `k` itself rather than just below entry
    /// `k + 1`.
    pub at_entry: bool,
    pub formula_val: u64,
    pub direct_val: u64,
    pub formula_exponent: f64,
    pub direct_exponent: f64,
    /// `1 + uniform_term_k`, the continuous-multiplier value at `X → H_{k+1}`.
    pub one_plus_uniform_term: Option<f64>,
    pub censored: bool,
    pub discrepancy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformCrossCheck {
    pub samples: Vec<UniformSample>,
    pub skipped: Vec<String>,
    pub max_discrepancy: f64,
}

/// Smallest integer `X` whose height bound admits the entry.
fn reach(norm: Norm, e: &crate::padic::ApproxPair) -> BigUint {
    match norm {
        Norm::Sup => e.height_sup.clone(),
        Norm::Mult => {
            let r = e.height_mult_sq.sqrt();
            if &r * &r == e.height_mult_sq {
                r
            } else {
                r + 1u32
            }
        }
    }
}

/// Largest integer `X` whose height bound excludes entry `k + 1`.
fn sample_bound(norm: Norm, next: &crate::padic::ApproxPair) -> BigUint {
    match norm {
        Norm::Sup => &next.height_sup - 1u32,
        Norm::Mult => {
            // largest X with X² < |xy|
            let m = &next.height_mult_sq - 1u32;
            m.sqrt()
        }
    }
}

fn direct_limit(norm: Norm) -> u64 {
    match norm {
        Norm::Sup => DIRECT_UNIFORM_LIMIT,
        Norm::Mult => 300,
    }
}

/// Compares the chain-based uniform minimum with direct enumeration. The
/// sampled `X` are the entry heights and the values just below them; the
/// largest `sample_count` within the enumeration budget are used.
pub fn cross_check_uniform(
    xi: &PAdicNumber,
    chain: &BestApproxChain,
    sample_count: usize,
) -> Result<UniformCrossCheck> {
    let mut candidates = Vec::new();
    let mut skipped = Vec::new();
    let limit = direct_limit(chain.norm);
    let pw = pointwise(chain).unwrap_or_default();
    for k in 0..chain.entries.len() {
        let mut xs = vec![(reach(chain.norm, &chain.entries[k]), true)];
        if k + 1 < chain.entries.len() {
            xs.push((sample_bound(chain.norm, &chain.entries[k + 1]), false));
        }
        for (x, at_entry) in xs {
            match x.to_u64() {
                Some(x) if (2..=limit).contains(&x) => candidates.push((k, x, at_entry)),
                Some(x) if x < 2 => {}
                _ => skipped.push(format!("k={k}: X={x} beyond the enumeration budget")),
            }
        }
    }
    candidates.sort_by_key(|c| c.1);
    candidates.dedup_by_key(|c| c.1);
    let start = candidates.len().saturating_sub(sample_count);
    let mut samples = Vec::new();
    for &(k, x, at_entry) in &candidates[start..] {
        let xb = BigUint::from(x);
        let fast = uniform_minimum(xi, chain, &xb)?;
        let slow = match uniform_minimum_direct(xi, chain.norm, x) {
            Ok(s) => s,
            Err(Error::Budget(msg)) => {
                skipped.push(format!("k={k}: {msg}"));
                continue;
            }
            Err(e) => return Err(e),
        };
        let fv = fast.pair.val;
        let dv = slow.pair.val;
        let censored = matches!(fv, Valuation::AtLeast(_)) || matches!(dv, Valuation::AtLeast(_));
        let discrepancy = if fv.value() == dv.value() {
            (fast.exponent - slow.exponent).abs()
        } else {
            f64::INFINITY
        };
        samples.push(UniformSample {
            k,
            x_bound: x,
            at_entry,
            formula_val: fv.value(),
            direct_val: dv.value(),
            formula_exponent: fast.exponent,
            direct_exponent: slow.exponent,
            one_plus_uniform_term: pw
                .iter()
                .find(|e| e.k == k && !at_entry)
                .and_then(|e| e.uniform_term)
                .map(|t| 1.0 + t),
            censored,
            discrepancy,
        });
    }
    let max_discrepancy = samples.iter().map(|s| s.discrepancy).fold(0.0, f64::max);
    Ok(UniformCrossCheck {
        samples,
        skipped,
        max_discrepancy,
    })
}

/// `ln Q_{k+1} / ln Q_k` for consecutive tail entries with `Q_k > 1`.
pub fn growth_ratios(chain: &BestApproxChain, burn_in: usize) -> Vec<f64> {
    let ln_h = ln_heights(chain);
    (burn_in..ln_h.len().saturating_sub(1))
        .filter(|&k| ln_h[k] > 0.0 && !chain.entries[k].height_sup.is_zero())
        .map(|k| ln_h[k + 1] / ln_h[k])
        .collect()
}
