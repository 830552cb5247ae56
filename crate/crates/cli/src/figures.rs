//! CSV data behind the figures and the relay-count table.
//!
//! Output is deterministic: fixed column order, LF line endings and
//! shortest round-trip float formatting.

use std::fmt::Write as _;

use bspr::asymptotics::{min_relays_within, relay_table};
use bspr::rates::{cut_set_bound, decoding_rate, hybrid_prefix_sweep, symmetric_forwarding_rate};
use bspr::{NetworkSpec, RelaySet, SymmetricSpec};

use crate::CliError;

/// Cross-overs used by the large-`K` sweeps and the relay table.
pub const SWEEP_CROSSOVERS: [f64; 4] = [0.1, 0.2, 0.3, 0.4];

/// Error targets of the relay table rows.
pub const TABLE_TARGETS: [f64; 3] = [1e-5, 1e-10, 1e-50];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig3,
    Fig4,
    Fig5a,
    Fig5b,
    Table1,
}

impl Figure {
    pub const ALL: [Figure; 5] = [Self::Fig3, Self::Fig4, Self::Fig5a, Self::Fig5b, Self::Table1];

    pub fn name(self) -> &'static str {
        match self {
            Self::Fig3 => "fig3",
            Self::Fig4 => "fig4",
            Self::Fig5a => "fig5a",
            Self::Fig5b => "fig5b",
            Self::Table1 => "table1",
        }
    }

    pub fn parse(s: &str) -> Result<Self, CliError> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| CliError::Usage(format!("unknown figure {s:?}; expected fig3, fig4, fig5a, fig5b or table1")))
    }

    pub fn csv(self) -> Result<String, CliError> {
        match self {
            Self::Fig3 => fig3(),
            Self::Fig4 => fig4(),
            Self::Fig5a => fig5(SymmetricSpec::new(1, 0.1, 0.1)?, 20),
            Self::Fig5b => fig5(SymmetricSpec::new(1, 0.05, 0.3)?, 100),
            Self::Table1 => table1(),
        }
    }
}

/// Shortest round-trip text for `x`, switching to exponent form for very small
/// or very large magnitudes.
pub fn fmt_num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && !(1e-4..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// The eight-relay network with `p_{s,i} = 0.1 i / 8` and `p_{i,d} = 0.3`.
pub fn graded_network() -> NetworkSpec {
    let ps: Vec<f64> = (1..=8).map(|i| 0.1 * i as f64 / 8.0).collect();
    NetworkSpec::from_pairs(&ps, &[0.3; 8]).expect("valid cross-overs")
}

/// Best decoding rate over all decoding sets of exactly `size` relays.
fn best_decoding_of_size(net: &NetworkSpec, size: usize) -> f64 {
    let k = net.len();
    (1u64..1 << k)
        .filter(|m| m.count_ones() as usize == size)
        .map(|m| decoding_rate(net, &RelaySet::from_mask(m, k)).expect("nonempty subset"))
        .fold(0.0, f64::max)
}

fn fig3() -> Result<String, CliError> {
    let net = graded_network();
    let sweep = hybrid_prefix_sweep(&net);
    let forwarding_all = sweep[0].1.value;
    let ub = cut_set_bound(&net).value;
    let mut out = String::from("num_decoding,r_hybrid,r_forwarding_all,r_decoding_best,cut_set_ub\n");
    for (part, report) in &sweep {
        let j = part.decoding().len();
        let decoding = if j == 0 { 0.0 } else { best_decoding_of_size(&net, j) };
        writeln!(
            out,
            "{j},{},{},{},{}",
            fmt_num(report.value),
            fmt_num(forwarding_all),
            fmt_num(decoding),
            fmt_num(ub)
        )
        .unwrap();
    }
    Ok(out)
}

fn fig4() -> Result<String, CliError> {
    let mut out = String::from("p,log10_zeta,k\n");
    for p in SWEEP_CROSSOVERS {
        for e in 1..=16 {
            let zeta = 10f64.powi(-e);
            let r = min_relays_within(p, zeta)?;
            writeln!(out, "{},{},{}", fmt_num(p), -e, r.count).unwrap();
        }
    }
    Ok(out)
}

fn fig5(base: SymmetricSpec, max_k: usize) -> Result<String, CliError> {
    let mut out = String::from("K,r_forwarding,r_decoding,cut_set_ub\n");
    for k in 1..=max_k {
        let spec = SymmetricSpec::new(k, base.p_s, base.p_d)?;
        let net = spec.to_network();
        let forwarding = symmetric_forwarding_rate(&spec);
        let decoding = decoding_rate(&net, &RelaySet::all(k))?;
        let ub = cut_set_bound(&net).value;
        writeln!(out, "{k},{},{},{}", fmt_num(forwarding), fmt_num(decoding), fmt_num(ub)).unwrap();
    }
    Ok(out)
}

fn table1() -> Result<String, CliError> {
    let grid = relay_table(&SWEEP_CROSSOVERS, &TABLE_TARGETS)?;
    let mut out = String::from("pe_up");
    for p in SWEEP_CROSSOVERS {
        write!(out, ",p_{}", fmt_num(p)).unwrap();
    }
    out.push('\n');
    for (eps, row) in TABLE_TARGETS.iter().zip(&grid) {
        out.push_str(&fmt_num(*eps));
        for cell in row {
            write!(out, ",{}", cell.count).unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}
