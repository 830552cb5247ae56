//! Capacity bounds, achievable rates and uncoded-transmission simulation for
//! binary-symmetric parallel-relay (BSPR) networks: one source, `K` relays and
//! one destination, every hop a binary symmetric channel.

pub mod asymptotics;
pub mod error;
pub mod mi;
pub mod model;
pub mod numerics;
pub mod parallel;
pub mod rates;
pub mod sim;

pub use error::{Error, Result};
pub use model::{
    binary_entropy, effective_crossover, EffectiveChannel, Exactness, NetworkSpec, RateReport,
    RelayLink, RelayPartition, RelaySet, Scheme, SymmetricSpec,
};
