//! Command-line front end: reads network files, dispatches to the `bspr`
//! library and writes JSON results or figure CSVs.

pub mod figures;
pub mod netfile;

use std::io::Write;
use std::path::PathBuf;

use bspr::asymptotics::{min_relays_within, relay_table};
use bspr::rates::{
    best_decoding_set, capacity_known, capacity_threshold, cut_set_bound, forwarding_rate,
    hybrid_search, relay_decode_ceiling, HybridMode,
};
use bspr::sim::{simulate_uncoded, DecoderKind, SimConfig, DEFAULT_CHUNK_SIZE};
use bspr::{Exactness, RateReport, RelaySet, Scheme};
use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use thiserror::Error;

use crate::figures::Figure;
use crate::netfile::NetworkFile;

#[derive(Debug, Error)]
pub enum CliError {
    /// `--help` or `--version` output; not a failure.
    #[error("{0}")]
    Help(String),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Compute(#[from] bspr::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Help(_) | Self::Usage(_) => "usage",
            Self::Input(_) => "input",
            Self::Compute(bspr::Error::Domain(_)) => "domain",
            Self::Compute(bspr::Error::Infeasible(_)) => "infeasible",
            Self::Compute(bspr::Error::Certificate(_)) => "certificate",
            Self::Io(_) => "io",
        }
    }

    /// One-line JSON for the diagnostic stream.
    pub fn to_json_line(&self) -> String {
        json!({ "error": self.kind(), "message": self.to_string() }).to_string()
    }
}

#[derive(Debug, Parser)]
#[command(name = "bspr", version, about = "Rates, bounds and simulations for binary-symmetric parallel-relay networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Forwarding rate, best decoding set, decode ceilings and known capacity.
    Rates {
        #[arg(long)]
        net: PathBuf,
    },
    /// Cut-set upper bound.
    Bounds {
        #[arg(long)]
        net: PathBuf,
    },
    /// Best split into decoding and forwarding relays.
    HybridSearch {
        #[arg(long)]
        net: PathBuf,
        #[arg(long, default_value = "prefix")]
        mode: String,
    },
    /// Smallest K whose forwarding rate is within zeta bits of 1.
    MinRelays {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        zeta: f64,
    },
    /// Relays sufficient for uncoded majority decoding to reach each error target.
    RelayTable {
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
    },
    /// Monte Carlo simulation of uncoded transmission.
    Simulate {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        /// majority | weighted-llr | degraded-majority:I,J,...
        #[arg(long)]
        decoder: String,
        #[arg(long, default_value_t = DEFAULT_CHUNK_SIZE)]
        chunk: u64,
    },
    /// Write figure data as CSV.
    Figure {
        /// fig3 | fig4 | fig5a | fig5b | table1
        name: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

/// Parses `args` (including the program name) and runs the command, writing results to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
            CliError::Help(e.to_string())
        }
        _ => {
            let text = e.to_string();
            let msg: Vec<&str> = text
                .lines()
                .map(str::trim)
                .take_while(|l| !l.starts_with("Usage:"))
                .filter(|l| !l.is_empty())
                .collect();
            CliError::Usage(msg.join(" "))
        }
    })?;
    execute(cli.command, out)
}

pub fn execute(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    let value = match command {
        Command::Rates { net } => rates(&NetworkFile::load(&net)?),
        Command::Bounds { net } => to_value(&cut_set_bound(&NetworkFile::load(&net)?.network())),
        Command::HybridSearch { net, mode } => {
            let mode: HybridMode = mode.parse()?;
            let (part, report) = hybrid_search(&NetworkFile::load(&net)?.network(), mode)?;
            json!({ "partition": part, "report": report })
        }
        Command::MinRelays { p, zeta } => to_value(&min_relays_within(p, zeta)?),
        Command::RelayTable { p, eps } => {
            let grid = relay_table(&p, &eps)?;
            let counts: Vec<Vec<u64>> = grid.iter().map(|row| row.iter().map(|c| c.count).collect()).collect();
            json!({ "p": p, "eps": eps, "counts": counts, "cells": grid })
        }
        Command::Simulate {
            net,
            trials,
            seed,
            decoder,
            chunk,
        } => {
            let decoder: DecoderKind = decoder.parse()?;
            let cfg = SimConfig::new(NetworkFile::load(&net)?.network(), trials, seed, decoder).with_chunk_size(chunk);
            to_value(&simulate_uncoded(&cfg)?)
        }
        Command::Figure { name, out: dir } => {
            let fig = Figure::parse(&name)?;
            let csv = fig.csv()?;
            std::fs::create_dir_all(&dir)?;
            let path = dir.join(format!("{}.csv", fig.name()));
            std::fs::write(&path, csv)?;
            json!({ "figure": fig.name(), "path": path.display().to_string() })
        }
    };
    serde_json::to_writer_pretty(&mut *out, &value).map_err(|e| CliError::Io(e.into()))?;
    writeln!(out)?;
    Ok(())
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data serializes")
}

fn rates(file: &NetworkFile) -> Value {
    let net = file.network();
    let mut reports: Vec<Value> = vec![
        to_value(&forwarding_rate(&net)),
        to_value(&best_decoding_set(&net).report()),
    ];
    for i in 0..net.len() {
        let v = relay_decode_ceiling(&net, i).expect("index in range");
        let report = RateReport::new(Scheme::DecodeCeiling, v, "relay-source-link", Exactness::Exact)
            .with_relays(std::iter::once(i).collect::<RelaySet>());
        reports.push(to_value(&report));
    }
    let capacity = capacity_known(&net);
    let mut entry = json!({
        "scheme": Scheme::Capacity,
        "value": capacity,
        "binding": match (capacity, net.len()) {
            (None, _) => "not-certified",
            (Some(_), 1) => "single-relay",
            (Some(_), _) => "destination-sum",
        },
        "exactness": Exactness::Exact,
    });
    if let Some(sym) = file.symmetric() {
        entry["k_prime"] = json!(capacity_threshold(&sym));
    }
    reports.push(entry);
    Value::Array(reports)
}

/// Applies `BSPR_THREADS` to the global worker pool.
pub fn configure_threads() {
    if let Some(n) = bspr::parallel::workers_from_env() {
        // A pool that already exists keeps its size; results do not depend on it.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}
