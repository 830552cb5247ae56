//! Relay-count solvers and error-probability bounds for large symmetric networks.

use std::f64::consts::LN_2;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mi::symmetric_equivocation;
use crate::model::{EffectiveChannel, RelaySet};
use crate::numerics::{ln_choose, log_sum_exp, softplus};

/// Upper limit on the incremental relay-count scan.
pub const MAX_SCAN_RELAYS: u64 = 100_000;

/// A minimal relay count together with what it certifies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelayCountResult {
    pub count: u64,
    /// The rate (or error bound) reached at `count`.
    pub achieved_value: f64,
    /// The requested gap `ζ` or error probability `ε`.
    pub target: f64,
}

impl RelayCountResult {
    /// Checks that `holds(count)` is true and `holds(count - 1)` is false.
    fn certified(count: u64, target: f64, achieved_value: f64, holds: impl Fn(u64) -> bool) -> Result<Self> {
        if count == 0 || !holds(count) {
            return Err(Error::Certificate(format!(
                "relay count {count} does not meet target {target}"
            )));
        }
        if count > 1 && holds(count - 1) {
            return Err(Error::Certificate(format!(
                "relay count {count} is not minimal for target {target}"
            )));
        }
        Ok(Self {
            count,
            achieved_value,
            target,
        })
    }
}

/// Smallest `K` whose symmetric forwarding rate is within `zeta` bits of 1.
///
/// The test is done on the equivocation `1 - R = H(U|Ȳ) <= ζ`, which is the
/// same inequality but stays meaningful for `ζ` below machine epsilon.
pub fn min_relays_within(p: f64, zeta: f64) -> Result<RelayCountResult> {
    if !(p > 0.0 && p < 0.5) {
        return Err(Error::Domain(format!(
            "cross-over {p} outside (0, 1/2); no finite relay count exists at 1/2"
        )));
    }
    if zeta.is_nan() || zeta <= 0.0 {
        return Err(Error::Domain(format!("gap {zeta} must be positive")));
    }
    let gap = |k: u64| symmetric_equivocation(k as usize, p).expect("validated");
    let holds = |k: u64| gap(k) <= zeta;
    // The rate is nondecreasing in K, so the first hit is the minimum.
    let count = (1..=MAX_SCAN_RELAYS).find(|&k| holds(k)).ok_or_else(|| {
        Error::Infeasible(format!(
            "more than {MAX_SCAN_RELAYS} relays needed for p = {p}, zeta = {zeta}"
        ))
    })?;
    RelayCountResult::certified(count, zeta, 1.0 - gap(count), holds)
}

/// `exp(-2K(1/2 - p)²)`, the Hoeffding bound on the majority decoder's error.
pub fn hoeffding_pe_bound(k: u64, p: f64) -> f64 {
    let margin = 0.5 - p;
    (-2.0 * k as f64 * margin * margin).exp()
}

/// Relays sufficient for the Hoeffding bound to reach `epsilon`:
/// `ceil(ln(1/ε) / (2(1/2 - p)²))`.
pub fn relays_for_error(p: f64, epsilon: f64) -> Result<RelayCountResult> {
    if !(0.0..0.5).contains(&p) {
        return Err(Error::Domain(format!(
            "cross-over {p} outside [0, 1/2); no finite relay count exists at 1/2"
        )));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("error target {epsilon} outside (0, 1)")));
    }
    let delta = 2.0 * (0.5 - p) * (0.5 - p);
    let need = (1.0 / epsilon).ln();
    let holds = |k: u64| k as f64 * delta >= need;
    let mut count = ((need / delta).ceil() as u64).max(1);
    // Settle any rounding at an exact integer boundary.
    while !holds(count) {
        count += 1;
    }
    while count > 1 && holds(count - 1) {
        count -= 1;
    }
    RelayCountResult::certified(count, epsilon, hoeffding_pe_bound(count, p), holds)
}

/// `relays_for_error` over a grid: one row per `epsilon`, one column per `p`.
pub fn relay_table(ps: &[f64], epsilons: &[f64]) -> Result<Vec<Vec<RelayCountResult>>> {
    epsilons
        .iter()
        .map(|&e| ps.iter().map(|&p| relays_for_error(p, e)).collect())
        .collect()
}

/// `ln Pr{Bin(K, p) >= from}`.
fn ln_upper_tail(k: u64, p: f64, from: u64) -> f64 {
    if from > k {
        return f64::NEG_INFINITY;
    }
    if p == 0.0 {
        return if from == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    let (ln_p, ln_q) = (p.ln(), (-p).ln_1p());
    log_sum_exp((from..=k).map(|j| ln_choose(k, j) + j as f64 * ln_p + (k - j) as f64 * ln_q))
}

/// Exact average error probability of the tie-to-zero majority decoder over
/// `K` i.i.d. BSC(p) observations of a uniform bit.
///
/// Odd `K`: `Pr{Bin(K,p) >= ⌈K/2⌉}`. Even `K`: a transmitted 0 is lost only if
/// more than half the bits flip, a transmitted 1 already at exactly half, so
/// the average is `½[Pr{Bin > K/2} + Pr{Bin >= K/2}]`.
pub fn exact_majority_pe(k: u64, p: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("K must be at least 1".into()));
    }
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::Domain(format!("cross-over {p} outside [0, 1/2]")));
    }
    let pe = if k % 2 == 1 {
        ln_upper_tail(k, p, k / 2 + 1).exp()
    } else {
        0.5 * (ln_upper_tail(k, p, k / 2 + 1).exp() + ln_upper_tail(k, p, k / 2).exp())
    };
    Ok(pe.clamp(0.0, 1.0))
}

/// Closed-form large-`K` approximation `1 - log2(1 + (p/q)^{K(1-2p)})` of the
/// forwarding rate. Tends to 1 as `K` grows for any `p < 1/2`.
pub fn asymptotic_rate_approx(k: u64, p: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("K must be at least 1".into()));
    }
    if !(p > 0.0 && p <= 0.5) {
        return Err(Error::Domain(format!("cross-over {p} outside (0, 1/2]")));
    }
    let exponent = k as f64 * (1.0 - 2.0 * p) * (p.ln() - (1.0 - p).ln());
    Ok(1.0 - softplus(exponent) / LN_2)
}

/// `|S|·(1/2 - p_MAX(S))²`; uncoded forwarding over `S` is asymptotically
/// reliable along a growth sequence where this diverges.
pub fn uncoded_condition_value(net: &EffectiveChannel, subset: &RelaySet) -> Result<f64> {
    let margin = 0.5 - net.p_max(subset)?;
    Ok(subset.len() as f64 * margin * margin)
}
