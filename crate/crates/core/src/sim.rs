//! Bit-level Monte Carlo simulation of uncoded transmission through forwarding relays.
//!
//! Each trial sends one uniform bit `W`. Relay `i` delivers `Y_i = W ⊕ N_i` where
//! `N_i ~ Bernoulli(p_i)` is the combined noise of both hops; sampling the
//! composed channel directly gives the same error probability as running the
//! two hops. The one-use relay delay only shows up in the rate `n/(n+1)`.

use std::fmt;
use std::str::FromStr;

use rand::distributions::{Bernoulli, Distribution};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{NetworkSpec, RelaySet};
use crate::parallel::{self, ChunkPlan};

pub const DEFAULT_CHUNK_SIZE: u64 = 1 << 16;

/// Destination decision rules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecoderKind {
    Majority,
    WeightedLlr,
    /// Equalize the subset to its worst channel with synthetic noise, then vote.
    DegradedMajority(RelaySet),
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Majority => write!(f, "majority"),
            Self::WeightedLlr => write!(f, "weighted-llr"),
            Self::DegradedMajority(s) => {
                let idx: Vec<String> = s.to_one_based().iter().map(usize::to_string).collect();
                write!(f, "degraded-majority:{}", idx.join(","))
            }
        }
    }
}

impl FromStr for DecoderKind {
    type Err = Error;

    /// `majority`, `weighted-llr`, or `degraded-majority:1,3,4` (one-based indices).
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "majority" => Ok(Self::Majority),
            "weighted-llr" => Ok(Self::WeightedLlr),
            _ => {
                let list = s.strip_prefix("degraded-majority:").ok_or_else(|| {
                    Error::Domain(format!(
                        "unknown decoder {s:?}; expected majority, weighted-llr or degraded-majority:I,J,..."
                    ))
                })?;
                let idx = list
                    .split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<usize>()
                            .map_err(|_| Error::Domain(format!("bad relay index {t:?}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Self::DegradedMajority(RelaySet::from_one_based(idx)?))
            }
        }
    }
}

impl Serialize for DecoderKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub net: NetworkSpec,
    pub trials: u64,
    pub seed: u64,
    pub decoder: DecoderKind,
    pub chunk_size: u64,
}

impl SimConfig {
    pub fn new(net: NetworkSpec, trials: u64, seed: u64, decoder: DecoderKind) -> Self {
        Self {
            net,
            trials,
            seed,
            decoder,
            chunk_size: DEFAULT_CHUNK_SIZE,
        }
    }

    pub fn with_chunk_size(mut self, chunk_size: u64) -> Self {
        self.chunk_size = chunk_size;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Domain("trials must be at least 1".into()));
        }
        if self.chunk_size == 0 {
            return Err(Error::Domain("chunk size must be positive".into()));
        }
        validate_decoder(&self.net, &self.decoder)
    }
}

fn validate_decoder(net: &NetworkSpec, decoder: &DecoderKind) -> Result<()> {
    if let DecoderKind::DegradedMajority(subset) = decoder {
        let p_max = net.effective().p_max(subset)?;
        if p_max >= 0.5 {
            return Err(Error::Domain(format!(
                "degraded-majority subset {subset} has p_MAX = {p_max}; it must be below 1/2"
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub decoder: DecoderKind,
    pub trials: u64,
    pub errors: u64,
    pub pe_hat: f64,
    pub ci95_half_width: f64,
    pub seed: u64,
    pub chunk_size: u64,
    /// `n/(n+1)` bits per network use for `n` bits sent through one relay delay.
    pub rate: f64,
}

impl SimResult {
    fn from_counts(decoder: DecoderKind, trials: u64, errors: u64, seed: u64, chunk_size: u64) -> Self {
        let n = trials as f64;
        let pe_hat = errors as f64 / n;
        Self {
            decoder,
            trials,
            errors,
            pe_hat,
            ci95_half_width: 1.96 * (pe_hat * (1.0 - pe_hat) / n).sqrt(),
            seed,
            chunk_size,
            rate: n / (n + 1.0),
        }
    }
}

/// 0 iff at least half of the bits are 0 (ties decode to 0).
pub fn decode_majority(ybar: &[bool]) -> bool {
    let ones = ybar.iter().filter(|&&y| y).count();
    let zeros = ybar.len() - ones;
    2 * zeros < ybar.len()
}

/// Maximum-likelihood decision for unequal channels: 0 iff
/// `Σ (1 - 2y_i) log2((1-p_i)/p_i) >= 0`.
///
/// A relay with `p_i = 1/2` carries no weight. Noiseless relays (`p_i = 0`) are
/// decisive; if any are present they alone are voted on.
pub fn decode_weighted_llr(ybar: &[bool], p: &[f64]) -> Result<bool> {
    if ybar.len() != p.len() {
        return Err(Error::Domain(format!(
            "{} observations but {} cross-overs",
            ybar.len(),
            p.len()
        )));
    }
    if let Some(bad) = p.iter().find(|x| !(0.0..=0.5).contains(*x)) {
        return Err(Error::Domain(format!("cross-over {bad} outside [0, 1/2]")));
    }
    Ok(weighted_decision(ybar, p))
}

fn weighted_decision(ybar: &[bool], p: &[f64]) -> bool {
    let certain: Vec<bool> = ybar
        .iter()
        .zip(p)
        .filter(|(_, &pi)| pi == 0.0)
        .map(|(&y, _)| y)
        .collect();
    if !certain.is_empty() {
        return decode_majority(&certain);
    }
    // Summing each side separately keeps equal-weight ties exact.
    let (mut for_zero, mut for_one) = (0.0, 0.0);
    for (&y, &pi) in ybar.iter().zip(p) {
        let w = ((1.0 - pi) / pi).log2();
        if y {
            for_one += w;
        } else {
            for_zero += w;
        }
    }
    for_zero < for_one
}

/// Flip each subset observation with probability `(p_MAX - p_i)/(1 - 2p_i)` so
/// every subset channel looks like BSC(p_MAX), then take the majority.
pub fn decode_degraded_majority<R: Rng>(
    ybar: &[bool],
    p: &[f64],
    subset: &RelaySet,
    rng: &mut R,
) -> Result<bool> {
    if ybar.len() != p.len() {
        return Err(Error::Domain(format!(
            "{} observations but {} cross-overs",
            ybar.len(),
            p.len()
        )));
    }
    let flips = equalizing_flips(p, subset)?;
    let mut buf = Vec::with_capacity(subset.len());
    Ok(degraded_decision(ybar, subset, &flips, &mut buf, rng))
}

/// Synthetic flip probabilities `(p_MAX - p_i)/(1 - 2p_i)` for the subset, in index order.
pub fn equalizing_flip_probabilities(p: &[f64], subset: &RelaySet) -> Result<Vec<f64>> {
    if subset.is_empty() {
        return Err(Error::Domain("degraded-majority subset must be nonempty".into()));
    }
    if let Some(i) = subset.iter().find(|&i| i >= p.len()) {
        return Err(Error::Domain(format!("relay index {} out of range", i + 1)));
    }
    let p_max = subset.iter().map(|i| p[i]).fold(0.0, f64::max);
    if p_max >= 0.5 {
        return Err(Error::Domain(format!("p_MAX = {p_max} must be below 1/2")));
    }
    Ok(subset
        .iter()
        .map(|i| ((p_max - p[i]) / (1.0 - 2.0 * p[i])).clamp(0.0, 1.0))
        .collect())
}

fn equalizing_flips(p: &[f64], subset: &RelaySet) -> Result<Vec<Bernoulli>> {
    equalizing_flip_probabilities(p, subset)?
        .into_iter()
        .map(|prob| Bernoulli::new(prob).map_err(|e| Error::Domain(e.to_string())))
        .collect()
}

fn degraded_decision<R: Rng>(
    ybar: &[bool],
    subset: &RelaySet,
    flips: &[Bernoulli],
    buf: &mut Vec<bool>,
    rng: &mut R,
) -> bool {
    buf.clear();
    buf.extend(
        subset
            .iter()
            .zip(flips)
            .map(|(i, flip)| ybar[i] ^ flip.sample(rng)),
    );
    decode_majority(buf)
}

/// A decoder with its per-network state precomputed.
enum Prepared<'a> {
    Majority,
    WeightedLlr(&'a [f64]),
    Degraded(&'a RelaySet, Vec<Bernoulli>),
}

impl<'a> Prepared<'a> {
    fn new(kind: &'a DecoderKind, p: &'a [f64]) -> Result<Self> {
        Ok(match kind {
            DecoderKind::Majority => Self::Majority,
            DecoderKind::WeightedLlr => Self::WeightedLlr(p),
            DecoderKind::DegradedMajority(s) => Self::Degraded(s, equalizing_flips(p, s)?),
        })
    }

    fn decide<R: Rng>(&self, ybar: &[bool], buf: &mut Vec<bool>, rng: &mut R) -> bool {
        match self {
            Self::Majority => decode_majority(ybar),
            Self::WeightedLlr(p) => weighted_decision(ybar, p),
            Self::Degraded(s, flips) => degraded_decision(ybar, s, flips, buf, rng),
        }
    }
}

/// Simulates `cfg.trials` uncoded transmissions and counts decoding errors.
///
/// The result depends only on `(net, trials, seed, decoder, chunk_size)`; the
/// number of worker threads never changes it.
pub fn simulate_uncoded(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let mut out = simulate_paired(&cfg.net, cfg.trials, cfg.seed, cfg.chunk_size, std::slice::from_ref(&cfg.decoder))?;
    Ok(out.remove(0))
}

/// Runs several decoders on the same noise realizations, trial by trial.
///
/// Per trial the stream yields `W`, then the `K` noise bits, then whatever
/// synthetic randomness the decoders consume, in decoder order.
pub fn simulate_paired(
    net: &NetworkSpec,
    trials: u64,
    seed: u64,
    chunk_size: u64,
    decoders: &[DecoderKind],
) -> Result<Vec<SimResult>> {
    if trials == 0 {
        return Err(Error::Domain("trials must be at least 1".into()));
    }
    if chunk_size == 0 {
        return Err(Error::Domain("chunk size must be positive".into()));
    }
    for d in decoders {
        validate_decoder(net, d)?;
    }
    let eff = net.effective();
    let p = eff.probabilities();
    let noise: Vec<Bernoulli> = p
        .iter()
        .map(|&x| Bernoulli::new(x).expect("validated cross-over"))
        .collect();
    let prepared = decoders
        .iter()
        .map(|d| Prepared::new(d, p))
        .collect::<Result<Vec<_>>>()?;

    let plan = ChunkPlan::new(trials, chunk_size);
    let per_chunk: Vec<Vec<u64>> = (0..plan.chunks())
        .into_par_iter()
        .map(|c| {
            let mut rng = parallel::substream(seed, c);
            let mut errors = vec![0u64; prepared.len()];
            let mut ybar = vec![false; noise.len()];
            let mut buf = Vec::new();
            for _ in 0..plan.len_of(c) {
                let w: bool = rng.gen();
                for (y, n) in ybar.iter_mut().zip(&noise) {
                    *y = w ^ n.sample(&mut rng);
                }
                for (e, dec) in errors.iter_mut().zip(&prepared) {
                    if dec.decide(&ybar, &mut buf, &mut rng) != w {
                        *e += 1;
                    }
                }
            }
            errors
        })
        .collect();

    Ok(decoders
        .iter()
        .enumerate()
        .map(|(j, d)| {
            let errors = per_chunk.iter().map(|e| e[j]).sum();
            SimResult::from_counts(d.clone(), trials, errors, seed, chunk_size)
        })
        .collect())
}
