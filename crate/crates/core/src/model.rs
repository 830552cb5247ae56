//! Network instances, effective channels, relay partitions and the
//! binary-entropy arithmetic every other module builds on.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Base-2 binary entropy `H(p) = -p log p - (1-p) log(1-p)`, with `H(0) = H(1) = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("probability {p} outside [0, 1]")));
    }
    Ok(entropy_unchecked(p))
}

/// `H(p)` without the domain check; callers guarantee `p` is a probability.
pub(crate) fn entropy_unchecked(p: f64) -> f64 {
    xlog2x(p) + xlog2x(1.0 - p)
}

/// `-x log2 x` with the `0 log 0 = 0` convention.
#[inline]
pub(crate) fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.log2()
    }
}

/// Cross-over probability of the two-hop BSC through a forwarding relay.
pub fn effective_crossover(p_s: f64, p_d: f64) -> Result<f64> {
    check_half("p_s", p_s)?;
    check_half("p_d", p_d)?;
    Ok(compose(p_s, p_d))
}

#[inline]
pub(crate) fn compose(a: f64, b: f64) -> f64 {
    a * (1.0 - b) + (1.0 - a) * b
}

fn check_half(name: &str, p: f64) -> Result<()> {
    if (0.0..=0.5).contains(&p) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {p} outside [0, 1/2]")))
    }
}

/// One relay: the source-to-relay and relay-to-destination cross-overs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelayLink {
    #[serde(rename = "ps")]
    pub p_s: f64,
    #[serde(rename = "pd")]
    pub p_d: f64,
}

impl RelayLink {
    pub fn new(p_s: f64, p_d: f64) -> Result<Self> {
        check_half("p_s", p_s)?;
        check_half("p_d", p_d)?;
        Ok(Self { p_s, p_d })
    }

    pub fn effective(&self) -> f64 {
        compose(self.p_s, self.p_d)
    }
}

/// A validated network: `K >= 1` relays, all cross-overs in `[0, 1/2]`.
///
/// Values above one half are rejected instead of being flipped.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    relays: Vec<RelayLink>,
}

impl NetworkSpec {
    pub fn new(relays: Vec<RelayLink>) -> Result<Self> {
        if relays.is_empty() {
            return Err(Error::Domain("a network needs at least one relay".into()));
        }
        for (i, r) in relays.iter().enumerate() {
            check_half(&format!("relay {} p_s", i + 1), r.p_s)?;
            check_half(&format!("relay {} p_d", i + 1), r.p_d)?;
        }
        Ok(Self { relays })
    }

    /// Builds a network from parallel slices of cross-overs.
    pub fn from_pairs(p_s: &[f64], p_d: &[f64]) -> Result<Self> {
        if p_s.len() != p_d.len() {
            return Err(Error::Domain(format!(
                "{} source cross-overs but {} destination cross-overs",
                p_s.len(),
                p_d.len()
            )));
        }
        Self::new(
            p_s.iter()
                .zip(p_d)
                .map(|(&s, &d)| RelayLink { p_s: s, p_d: d })
                .collect(),
        )
    }

    pub fn relays(&self) -> &[RelayLink] {
        &self.relays
    }

    pub fn len(&self) -> usize {
        self.relays.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn source_crossovers(&self) -> Vec<f64> {
        self.relays.iter().map(|r| r.p_s).collect()
    }

    pub fn destination_crossovers(&self) -> Vec<f64> {
        self.relays.iter().map(|r| r.p_d).collect()
    }

    pub fn effective(&self) -> EffectiveChannel {
        EffectiveChannel {
            p: self.relays.iter().map(RelayLink::effective).collect(),
        }
    }

    /// The symmetric description of this network, if every relay is identical.
    pub fn as_symmetric(&self) -> Option<SymmetricSpec> {
        let first = self.relays[0];
        self.relays
            .iter()
            .all(|r| *r == first)
            .then(|| SymmetricSpec::new(self.len(), first.p_s, first.p_d).ok())
            .flatten()
    }
}

/// `K` identical relays with `p_s, p_d < 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetricSpec {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "ps")]
    pub p_s: f64,
    #[serde(rename = "pd")]
    pub p_d: f64,
}

impl SymmetricSpec {
    pub fn new(k: usize, p_s: f64, p_d: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("K must be at least 1".into()));
        }
        for (name, p) in [("p_s", p_s), ("p_d", p_d)] {
            if !(0.0..0.5).contains(&p) {
                return Err(Error::Domain(format!(
                    "symmetric {name} = {p} outside [0, 1/2)"
                )));
            }
        }
        Ok(Self { k, p_s, p_d })
    }

    pub fn effective(&self) -> f64 {
        compose(self.p_s, self.p_d)
    }

    pub fn to_network(&self) -> NetworkSpec {
        NetworkSpec {
            relays: vec![
                RelayLink {
                    p_s: self.p_s,
                    p_d: self.p_d
                };
                self.k
            ],
        }
    }
}

impl From<SymmetricSpec> for NetworkSpec {
    fn from(s: SymmetricSpec) -> Self {
        s.to_network()
    }
}

/// End-to-end cross-overs `p_i` seen by the destination when every relay forwards.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChannel {
    p: Vec<f64>,
}

impl EffectiveChannel {
    /// Wraps already-composed cross-overs. Each must lie in `[0, 1/2]`.
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::Domain("an effective channel needs at least one relay".into()));
        }
        for (i, &x) in p.iter().enumerate() {
            check_half(&format!("effective p_{}", i + 1), x)?;
        }
        Ok(Self { p })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    /// The cross-overs of the relays in `subset`, in index order.
    pub fn restrict(&self, subset: &RelaySet) -> Result<Vec<f64>> {
        subset.check_within(self.len())?;
        Ok(subset.iter().map(|i| self.p[i]).collect())
    }

    /// Largest cross-over among `subset`.
    pub fn p_max(&self, subset: &RelaySet) -> Result<f64> {
        if subset.is_empty() {
            return Err(Error::Domain("empty relay subset".into()));
        }
        Ok(self.restrict(subset)?.into_iter().fold(0.0, f64::max))
    }
}

/// A set of relay indices, zero-based internally and one-based when displayed or serialized.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct RelaySet(BTreeSet<usize>);

impl RelaySet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn all(k: usize) -> Self {
        Self((0..k).collect())
    }

    /// From one-based indices as used in files and on the command line.
    pub fn from_one_based<I: IntoIterator<Item = usize>>(indices: I) -> Result<Self> {
        indices
            .into_iter()
            .map(|i| {
                i.checked_sub(1)
                    .ok_or_else(|| Error::Domain("relay indices are 1-based".into()))
            })
            .collect::<Result<BTreeSet<_>>>()
            .map(Self)
    }

    pub fn from_mask(mask: u64, k: usize) -> Self {
        Self((0..k).filter(|i| mask >> i & 1 == 1).collect())
    }

    pub fn insert(&mut self, i: usize) -> bool {
        self.0.insert(i)
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.contains(&i)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.iter().map(|i| i + 1).collect()
    }

    fn check_within(&self, k: usize) -> Result<()> {
        match self.0.iter().next_back() {
            Some(&i) if i >= k => Err(Error::Domain(format!(
                "relay index {} out of range 1..={k}",
                i + 1
            ))),
            _ => Ok(()),
        }
    }
}

impl FromIterator<usize> for RelaySet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl fmt::Display for RelaySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, i) in self.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}

impl Serialize for RelaySet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.iter().map(|i| i + 1))
    }
}

/// Split of the relays into a decoding set and the forwarding remainder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelayPartition {
    k: usize,
    decoding: RelaySet,
}

impl RelayPartition {
    pub fn new(k: usize, decoding: RelaySet) -> Result<Self> {
        decoding.check_within(k)?;
        Ok(Self { k, decoding })
    }

    pub fn all_forwarding(k: usize) -> Self {
        Self {
            k,
            decoding: RelaySet::new(),
        }
    }

    pub fn all_decoding(k: usize) -> Self {
        Self {
            k,
            decoding: RelaySet::all(k),
        }
    }

    pub fn relay_count(&self) -> usize {
        self.k
    }

    pub fn decoding(&self) -> &RelaySet {
        &self.decoding
    }

    pub fn forwarding(&self) -> RelaySet {
        (0..self.k).filter(|&i| !self.decoding.contains(i)).collect()
    }
}

impl Serialize for RelayPartition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("RelayPartition", 2)?;
        st.serialize_field("decoding", &self.decoding)?;
        st.serialize_field("forwarding", &self.forwarding())?;
        st.end()
    }
}

/// Which rate or bound a report describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    CutSet,
    Forwarding,
    Decoding,
    Hybrid,
    DecodeCeiling,
    Capacity,
    Trivial,
}

/// How much a reported value can be trusted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Exactness {
    Exact,
    LowerBound,
    /// An upper bound whose mutual-information term was replaced by the 1-bit cap.
    UpperBoundCapped,
    Estimate { ci95_half_width: f64 },
}

/// A computed rate or bound, in bits per network use.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub scheme: Scheme,
    pub value: f64,
    /// The term of the minimum that was active.
    pub binding: String,
    pub exactness: Exactness,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relays: Option<RelaySet>,
}

impl RateReport {
    pub fn new(scheme: Scheme, value: f64, binding: impl Into<String>, exactness: Exactness) -> Self {
        Self {
            scheme,
            value,
            binding: binding.into(),
            exactness,
            relays: None,
        }
    }

    pub fn with_relays(mut self, relays: RelaySet) -> Self {
        self.relays = Some(relays);
        self
    }
}
