//! Mutual information `I(U; Y_1..Y_K)` between a uniform bit and its
//! observations through `K` independent binary symmetric channels.
//!
//! Three routes are provided: exhaustive enumeration of the `2^K` outputs,
//! a closed form for identical channels, and a likelihood-ratio Monte Carlo
//! estimator for large non-identical sets.

use std::f64::consts::LN_2;

use rand::distributions::{Bernoulli, Distribution};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{entropy_unchecked, xlog2x, EffectiveChannel, RelaySet};
use crate::numerics::{ln_choose, softplus};
use crate::parallel::{self, ChunkPlan};

/// Largest `K` accepted by [`mi_enumerate`] (2^24 ≈ 16.7M outcomes).
pub const DEFAULT_ENUM_CAP: usize = 24;

/// Samples per Monte Carlo chunk; each chunk owns one RNG substream.
pub const MI_CHUNK_SIZE: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MiMethod {
    Enumeration,
    ClosedForm,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MiResult {
    pub value: f64,
    pub method: MiMethod,
    /// Half-width of the 95% confidence interval; zero for exact methods.
    pub ci_half_width: f64,
}

/// Equivocation `H(U | Y_1..Y_K)` for `K` identical channels with cross-over `p`.
///
/// Outputs are grouped by their number of zeros `l`. Each group has weight
/// `C(K,l)·½(q^l p^{K-l} + p^l q^{K-l})` and the posterior of the minority
/// hypothesis is `r/(1+r)` with `r = (p/q)^{|K-2l|}`, so every term is
/// positive and the sum keeps full relative precision even when it is far
/// below machine epsilon.
pub fn symmetric_equivocation(k: usize, p: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("K must be at least 1".into()));
    }
    if !(0.0..0.5).contains(&p) {
        return Err(Error::Domain(format!("cross-over {p} outside [0, 1/2)")));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    let q = 1.0 - p;
    let (ln_p, ln_q) = (p.ln(), q.ln());
    let ln_ratio = ln_p - ln_q;
    let k64 = k as u64;
    let mut total = 0.0;
    for l in 0..=k64 {
        let minority = l.min(k64 - l) as f64;
        let d = (k64 as i64 - 2 * l as i64).unsigned_abs() as f64;
        let ln_r = d * ln_ratio;
        let r = ln_r.exp();
        // ln of C(K,l)·½·(pq)^m·q^d·(1 + r)
        let ln_weight = ln_choose(k64, l) - LN_2 + minority * (ln_p + ln_q) + d * ln_q + r.ln_1p();
        // H(r/(1+r)) in nats: ln(1+r) - r ln r/(1+r)
        let h_nats = r.ln_1p() - if r > 0.0 { r * ln_r / (1.0 + r) } else { 0.0 };
        total += ln_weight.exp() * h_nats;
    }
    Ok((total / LN_2).max(0.0))
}

/// Forwarding rate of `K` identical effective channels with cross-over `p`.
///
/// Equal to `1 + Kp log p + Kq log q - Σ_l C(K-1,l)(q^l p^{K-l} + q^{K-l}p^l) log(...)`,
/// evaluated as `1 - H(U|Ȳ)` (see [`symmetric_equivocation`]).
pub fn mi_symmetric_forwarding(k: usize, p: f64) -> Result<f64> {
    Ok((1.0 - symmetric_equivocation(k, p)?).clamp(0.0, 1.0))
}

/// Exact `I(U; Ȳ)` by enumerating every output pattern, with the default cap.
pub fn mi_enumerate(p: &[f64]) -> Result<f64> {
    mi_enumerate_capped(p, DEFAULT_ENUM_CAP)
}

/// Exact `I(U; Ȳ) = H(Ȳ) - Σ H(p_i)`, refusing inputs with more than `cap` channels.
pub fn mi_enumerate_capped(p: &[f64], cap: usize) -> Result<f64> {
    check_channels(p)?;
    if p.len() > cap {
        return Err(Error::Infeasible(format!(
            "exact enumeration over {} relays exceeds the cap of {cap}; \
             use mi_monte_carlo or subset_degraded_bound instead",
            p.len()
        )));
    }
    let h_out = output_entropy(p, 0.5);
    let h_noise: f64 = p.iter().map(|&x| entropy_unchecked(x)).sum();
    Ok((h_out - h_noise).clamp(0.0, 1.0))
}

fn check_channels(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::Domain("need at least one channel".into()));
    }
    if let Some(bad) = p.iter().find(|x| !(0.0..=0.5).contains(*x)) {
        return Err(Error::Domain(format!("cross-over {bad} outside [0, 1/2]")));
    }
    Ok(())
}

/// `H(Ȳ)` in bits when `Pr{U = 1} = bias`.
fn output_entropy(p: &[f64], bias: f64) -> f64 {
    // Depth-first over outputs carrying P(ȳ|U=0) and P(ȳ|U=1) for the prefix.
    fn walk(p: &[f64], given0: f64, given1: f64, bias: f64) -> f64 {
        match p.split_first() {
            None => xlog2x((1.0 - bias) * given0 + bias * given1),
            Some((&pi, rest)) => {
                let qi = 1.0 - pi;
                let mut h = 0.0;
                for (a, b) in [(qi, pi), (pi, qi)] {
                    let (g0, g1) = (given0 * a, given1 * b);
                    if g0 > 0.0 || g1 > 0.0 {
                        h += walk(rest, g0, g1, bias);
                    }
                }
                h
            }
        }
    }
    walk(p, 1.0, 1.0, bias)
}

/// `I(U; Ȳ)` for a non-uniform input, used to check that the uniform input is optimal.
#[cfg(test)]
pub(crate) fn mi_enumerate_biased(p: &[f64], bias: f64) -> f64 {
    output_entropy(p, bias) - p.iter().map(|&x| entropy_unchecked(x)).sum::<f64>()
}

/// Monte Carlo estimate of `I(U; Ȳ)` from the per-sample log-likelihood ratio
/// `log2(P(ȳ|u)/P(ȳ))`.
///
/// Samples are split into fixed chunks, each drawn from its own counter-derived
/// substream of `seed`, so the estimate does not depend on the worker count.
pub fn mi_monte_carlo(p: &[f64], samples: u64, seed: u64) -> Result<MiResult> {
    check_channels(p)?;
    if samples == 0 {
        return Err(Error::Domain("samples must be at least 1".into()));
    }
    let channels: Vec<(Bernoulli, f64)> = p
        .iter()
        .map(|&x| {
            let flip = Bernoulli::new(x).expect("validated probability");
            // ln(q/p): +inf for a noiseless channel
            (flip, (1.0 - x).ln() - x.ln())
        })
        .collect();

    let plan = ChunkPlan::new(samples, MI_CHUNK_SIZE);
    let chunks: Vec<Moments> = (0..plan.chunks())
        .into_par_iter()
        .map(|c| {
            let mut rng = parallel::substream(seed, c);
            let mut m = Moments::default();
            for _ in 0..plan.len_of(c) {
                m.push(sample_information(&channels, &mut rng));
            }
            m
        })
        .collect();
    let total = chunks.into_iter().fold(Moments::default(), Moments::merge);

    let half = if total.n > 1 {
        1.96 * (total.m2 / (total.n - 1) as f64).sqrt() / (total.n as f64).sqrt()
    } else {
        0.0
    };
    Ok(MiResult {
        // The estimator can stray slightly below zero for nearly useless channels.
        value: total.mean.clamp(0.0, 1.0),
        method: MiMethod::MonteCarlo,
        ci_half_width: half,
    })
}

fn sample_information<R: Rng>(channels: &[(Bernoulli, f64)], rng: &mut R) -> f64 {
    // u itself is irrelevant: only which channels flipped matters.
    let _u: bool = rng.gen();
    // d = ln P(ȳ | 1-u) - ln P(ȳ | u)
    let mut d = 0.0;
    for (flip, llr) in channels {
        if flip.sample(rng) {
            d += llr;
        } else {
            d -= llr;
        }
    }
    if d == f64::NEG_INFINITY {
        1.0
    } else {
        1.0 - softplus(d) / LN_2
    }
}

/// Running mean and sum of squared deviations (Welford / Chan merge).
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Self) -> Self {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let wb = other.n as f64 / n as f64;
        Self {
            n,
            mean: self.mean + delta * wb,
            m2: self.m2 + other.m2 + delta * delta * self.n as f64 * wb,
        }
    }
}

/// Rate of the network degraded so that every relay in `subset` has cross-over
/// `p_MAX(subset)`; a lower bound on the exact rate over `subset`.
pub fn subset_degraded_bound(net: &EffectiveChannel, subset: &RelaySet) -> Result<f64> {
    let p_max = net.p_max(subset)?;
    if p_max >= 0.5 {
        return Ok(0.0);
    }
    mi_symmetric_forwarding(subset.len(), p_max)
}

/// Best degraded-network bound over the prefixes of the relays sorted by
/// cross-over (ties by index). Returns the maximizing prefix.
pub fn best_forwarding_subset(net: &EffectiveChannel) -> (RelaySet, f64) {
    let p = net.probabilities();
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| p[a].total_cmp(&p[b]).then(a.cmp(&b)));

    let mut best = (RelaySet::new(), f64::NEG_INFINITY);
    let mut prefix = RelaySet::new();
    for (n, &i) in order.iter().enumerate() {
        prefix.insert(i);
        let p_max = p[i];
        let value = if p_max >= 0.5 {
            0.0
        } else {
            mi_symmetric_forwarding(n + 1, p_max).expect("validated cross-over")
        };
        // At a fixed p_MAX more relays never hurt, so equal values go to the larger prefix.
        if value >= best.1 {
            best = (prefix.clone(), value);
        }
    }
    best
}
