//! Scheme rates and capacity bounds: cut-set, forwarding, decoding, hybrid,
//! per-relay decode ceilings and the finite-`K` capacity certificates.
//!
//! Relay indices in this module are zero-based.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mi::{self, best_forwarding_subset, mi_enumerate, mi_symmetric_forwarding, DEFAULT_ENUM_CAP};
use crate::model::{
    entropy_unchecked, EffectiveChannel, Exactness, NetworkSpec, RateReport, RelayPartition,
    RelaySet, Scheme, SymmetricSpec,
};

/// Largest `K` for the exhaustive searches.
pub const EXHAUSTIVE_CAP: usize = 16;

/// Rates closer than this are treated as tied by the searches.
pub const RATE_TIE_EPS: f64 = 1e-12;

/// `I(U; Ȳ)` over the listed cross-overs, exact when possible.
///
/// Identical cross-overs use the closed form at any size; distinct ones are
/// enumerated up to the cap. Returns `None` beyond that.
fn exact_information(p: &[f64]) -> Option<f64> {
    let first = p[0];
    if p.iter().all(|&x| x == first) {
        return Some(if first >= 0.5 {
            0.0
        } else {
            mi_symmetric_forwarding(p.len(), first).expect("validated cross-over")
        });
    }
    if p.len() <= DEFAULT_ENUM_CAP {
        return Some(mi_enumerate(p).expect("validated cross-overs"));
    }
    None
}

/// `min{ I(U;V̄), K - Σ H(p_{i,d}), 1 }` with product inputs.
///
/// When the source-side information cannot be computed exactly it is replaced
/// by its 1-bit cap, so the report never understates the bound.
pub fn cut_set_bound(net: &NetworkSpec) -> RateReport {
    let k = net.len() as f64;
    let dest_cut = k - net
        .relays()
        .iter()
        .map(|r| entropy_unchecked(r.p_d))
        .sum::<f64>();
    let (source_cut, exactness) = match exact_information(&net.source_crossovers()) {
        Some(v) => (v, Exactness::Exact),
        None => (1.0, Exactness::UpperBoundCapped),
    };
    let mut value = 1.0;
    let mut binding = "unit-cap";
    if exactness == Exactness::Exact && source_cut <= value {
        value = source_cut;
        binding = "source-cut";
    }
    if dest_cut < value {
        value = dest_cut;
        binding = "destination-cut";
    }
    RateReport::new(Scheme::CutSet, value.max(0.0), binding, exactness)
}

/// Coded transmission with every relay forwarding.
///
/// Exact for identical effective channels or `K` within the enumeration cap;
/// otherwise the best degraded-prefix lower bound.
pub fn forwarding_rate(net: &NetworkSpec) -> RateReport {
    let eff = net.effective();
    match exact_information(eff.probabilities()) {
        Some(v) => RateReport::new(Scheme::Forwarding, v, "forwarding-information", Exactness::Exact)
            .with_relays(RelaySet::all(net.len())),
        None => {
            let (subset, v) = best_forwarding_subset(&eff);
            RateReport::new(Scheme::Forwarding, v, "degraded-prefix", Exactness::LowerBound)
                .with_relays(subset)
        }
    }
}

/// Per-term breakdown of a decoding-relay rate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecodingSearchResult {
    pub subset: RelaySet,
    pub rate: f64,
    /// `(relay, 1 - H(p_{s,relay}))` for each decoding relay, one-based in output.
    pub relay_constraints: Vec<(usize, f64)>,
    /// `|M| - Σ_{m∈M} H(p_{m,d})`
    pub sum_term: f64,
}

impl DecodingSearchResult {
    fn evaluate(net: &NetworkSpec, subset: RelaySet) -> Self {
        let relays = net.relays();
        let relay_constraints: Vec<(usize, f64)> = subset
            .iter()
            .map(|m| (m + 1, 1.0 - entropy_unchecked(relays[m].p_s)))
            .collect();
        let sum_term: f64 = subset
            .iter()
            .map(|m| 1.0 - entropy_unchecked(relays[m].p_d))
            .sum();
        let rate = relay_constraints
            .iter()
            .map(|&(_, c)| c)
            .fold(sum_term, f64::min);
        Self {
            subset,
            rate,
            relay_constraints,
            sum_term,
        }
    }

    /// Which family of constraints is active.
    pub fn binding(&self) -> &'static str {
        if self.relay_constraints.iter().any(|&(_, c)| c <= self.sum_term) {
            "relay-decoding"
        } else {
            "destination-sum"
        }
    }

    pub fn report(&self) -> RateReport {
        RateReport::new(Scheme::Decoding, self.rate, self.binding(), Exactness::Exact)
            .with_relays(self.subset.clone())
    }
}

fn check_subset(net: &NetworkSpec, subset: &RelaySet) -> Result<()> {
    if subset.is_empty() {
        return Err(Error::Domain("decoding set must be nonempty".into()));
    }
    RelayPartition::new(net.len(), subset.clone()).map(|_| ())
}

/// Decode-and-forward rate with decoding relays `subset`:
/// `min{ min_m (1 - H(p_{s,m})), |M| - Σ H(p_{m,d}) }`.
pub fn decoding_rate(net: &NetworkSpec, subset: &RelaySet) -> Result<f64> {
    check_subset(net, subset)?;
    Ok(DecodingSearchResult::evaluate(net, subset.clone()).rate)
}

/// Relay indices sorted by source cross-over, ties by index.
fn by_source_crossover(net: &NetworkSpec) -> Vec<usize> {
    let relays = net.relays();
    let mut order: Vec<usize> = (0..relays.len()).collect();
    order.sort_by(|&a, &b| relays[a].p_s.total_cmp(&relays[b].p_s).then(a.cmp(&b)));
    order
}

/// `true` if `(rate, set)` should replace the current best under the search tie rule:
/// higher rate, then fewer decoding relays, then lexicographically smaller indices.
fn improves(rate: f64, set: &RelaySet, best_rate: f64, best_set: &RelaySet) -> bool {
    if rate > best_rate + RATE_TIE_EPS {
        return true;
    }
    if rate < best_rate - RATE_TIE_EPS {
        return false;
    }
    (set.len(), set.to_one_based()) < (best_set.len(), best_set.to_one_based())
}

/// Optimal decoding set in `O(K log K)`.
///
/// For a threshold `t`, every relay with `p_s <= t` can join without tightening
/// the per-relay constraints while only growing the sum term, so the optimum is
/// one of the threshold sets.
pub fn best_decoding_set(net: &NetworkSpec) -> DecodingSearchResult {
    let relays = net.relays();
    let order = by_source_crossover(net);
    let mut best: Option<DecodingSearchResult> = None;
    let mut j = 0;
    while j < order.len() {
        let t = relays[order[j]].p_s;
        while j < order.len() && relays[order[j]].p_s == t {
            j += 1;
        }
        let cand = DecodingSearchResult::evaluate(net, order[..j].iter().copied().collect());
        // Thresholds grow, so a tie keeps the earlier, smaller set.
        let better = match &best {
            None => true,
            Some(b) => cand.rate > b.rate + RATE_TIE_EPS,
        };
        if better {
            best = Some(cand);
        }
    }
    best.expect("K >= 1")
}

/// Brute-force optimum of [`decoding_rate`] over all `2^K - 1` nonempty sets.
pub fn best_decoding_set_exhaustive(net: &NetworkSpec) -> Result<DecodingSearchResult> {
    let k = net.len();
    if k > EXHAUSTIVE_CAP {
        return Err(Error::Infeasible(format!(
            "exhaustive decoding-set search over {k} relays exceeds the cap of {EXHAUSTIVE_CAP}"
        )));
    }
    let candidates: Vec<DecodingSearchResult> = (1u64..1 << k)
        .into_par_iter()
        .map(|mask| DecodingSearchResult::evaluate(net, RelaySet::from_mask(mask, k)))
        .collect();
    let mut iter = candidates.into_iter();
    let mut best = iter.next().expect("K >= 1");
    for cand in iter {
        if improves(cand.rate, &cand.subset, best.rate, &best.subset) {
            best = cand;
        }
    }
    Ok(best)
}

/// Hybrid scheme rate:
/// `min{ 1 - H(max_{i∈M} p_{s,i}), I(U; Y_F) + Σ_{i∈M} (1 - H(p_{i,d})) }`,
/// the first term absent when `M` is empty.
///
/// `I(U; Y_F)` uses the effective channels of the forwarding relays. A large
/// non-identical `F` falls back to the degraded-prefix bound and the report is
/// flagged as a lower bound.
pub fn hybrid_rate(net: &NetworkSpec, part: &RelayPartition) -> Result<RateReport> {
    if part.relay_count() != net.len() {
        return Err(Error::Domain(format!(
            "partition covers {} relays but the network has {}",
            part.relay_count(),
            net.len()
        )));
    }
    let relays = net.relays();
    let decoding = part.decoding();
    let forwarding = part.forwarding();

    let (forward_info, exactness) = if forwarding.is_empty() {
        (0.0, Exactness::Exact)
    } else {
        let eff: Vec<f64> = forwarding.iter().map(|i| relays[i].effective()).collect();
        match exact_information(&eff) {
            Some(v) => (v, Exactness::Exact),
            None => {
                let ch = EffectiveChannel::new(eff).expect("validated cross-overs");
                (best_forwarding_subset(&ch).1, Exactness::LowerBound)
            }
        }
    };
    let sum_term = forward_info
        + decoding
            .iter()
            .map(|i| 1.0 - entropy_unchecked(relays[i].p_d))
            .sum::<f64>();

    let (value, binding) = match decoding.iter().map(|i| relays[i].p_s).reduce(f64::max) {
        Some(worst) if 1.0 - entropy_unchecked(worst) <= sum_term => {
            (1.0 - entropy_unchecked(worst), "relay-decoding")
        }
        _ => (sum_term, "destination-sum"),
    };
    Ok(RateReport::new(Scheme::Hybrid, value, binding, exactness).with_relays(decoding.clone()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HybridMode {
    /// Every one of the `2^K` partitions.
    Exhaustive,
    /// Decoding sets that are prefixes of the relays sorted by `p_s`.
    Prefix,
}

impl std::str::FromStr for HybridMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(Self::Exhaustive),
            "prefix" => Ok(Self::Prefix),
            other => Err(Error::Domain(format!("unknown hybrid mode {other:?}"))),
        }
    }
}

/// The prefix sweep: hybrid rate with the `j` lowest-`p_s` relays decoding, `j = 0..=K`.
pub fn hybrid_prefix_sweep(net: &NetworkSpec) -> Vec<(RelayPartition, RateReport)> {
    let order = by_source_crossover(net);
    (0..=net.len())
        .map(|j| {
            let part = RelayPartition::new(net.len(), order[..j].iter().copied().collect())
                .expect("indices in range");
            let report = hybrid_rate(net, &part).expect("matching partition");
            (part, report)
        })
        .collect()
}

/// Best hybrid partition under `mode`. Ties go to fewer decoding relays, then
/// lexicographically smaller index sets.
pub fn hybrid_search(net: &NetworkSpec, mode: HybridMode) -> Result<(RelayPartition, RateReport)> {
    let k = net.len();
    let candidates = match mode {
        HybridMode::Prefix => hybrid_prefix_sweep(net),
        HybridMode::Exhaustive => {
            if k > EXHAUSTIVE_CAP {
                return Err(Error::Infeasible(format!(
                    "exhaustive hybrid search over {k} relays exceeds the cap of {EXHAUSTIVE_CAP}"
                )));
            }
            (0u64..1 << k)
                .into_par_iter()
                .map(|mask| {
                    let part = RelayPartition::new(k, RelaySet::from_mask(mask, k))
                        .expect("indices in range");
                    let report = hybrid_rate(net, &part).expect("matching partition");
                    (part, report)
                })
                .collect()
        }
    };
    let mut iter = candidates.into_iter();
    let mut best = iter.next().expect("at least the empty decoding set");
    for cand in iter {
        if improves(cand.1.value, cand.0.decoding(), best.1.value, best.0.decoding()) {
            best = cand;
        }
    }
    Ok(best)
}

/// `1 - H(p_{s,i})`: no scheme can beat what relay `i` could decode on its own
/// when it must decode.
pub fn relay_decode_ceiling(net: &NetworkSpec, i: usize) -> Result<f64> {
    let relay = net.relays().get(i).ok_or_else(|| {
        Error::Domain(format!("relay index {} out of range 1..={}", i + 1, net.len()))
    })?;
    Ok(1.0 - entropy_unchecked(relay.p_s))
}

/// The exact capacity when one of the finite-`K` conditions holds:
///
/// * `K = 1`: `C = 1 - max{H(p_s), H(p_d)}`;
/// * `K - Σ H(p_{j,d}) <= 1 - H(p_{s,i})` for every `i`: `C = K - Σ H(p_{j,d})`.
pub fn capacity_known(net: &NetworkSpec) -> Option<f64> {
    let relays = net.relays();
    if let [r] = relays {
        return Some(1.0 - entropy_unchecked(r.p_s).max(entropy_unchecked(r.p_d)));
    }
    let sum_term = relays.len() as f64 - relays.iter().map(|r| entropy_unchecked(r.p_d)).sum::<f64>();
    relays
        .iter()
        .all(|r| sum_term <= 1.0 - entropy_unchecked(r.p_s))
        .then_some(sum_term)
}

/// `K'(p_s, p_d) = max{1, (1 - H(p_s)) / (1 - H(p_d))}`: decoding relays achieve
/// capacity in the symmetric network for every `K <= K'`.
pub fn capacity_threshold(spec: &SymmetricSpec) -> f64 {
    let num = 1.0 - entropy_unchecked(spec.p_s);
    let den = 1.0 - entropy_unchecked(spec.p_d);
    (num / den).max(1.0)
}

/// Forwarding rate for `K` identical relays, used by figure sweeps past the enumeration cap.
pub fn symmetric_forwarding_rate(spec: &SymmetricSpec) -> f64 {
    mi::mi_symmetric_forwarding(spec.k, spec.effective()).expect("p < 1/2 on both hops")
}
