//! Command-line front end.
//!
//! Exit status: 0 on success, 1 on usage or domain errors (and on a
//! verification that ran but failed), 2 when a verification is inconclusive
//! because the truncation budget cannot be met.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde::Serialize;

use crate::channel::{BroadcastChannelSpec, SplitOrdering};
use crate::error::{check_nonnegative, Error, Result};
use crate::fock::{verify_conditional_entropies_with, TruncationBudget};
use crate::format::{fmt_sig, precision_from_env, to_rounded_json};
use crate::region::{
    asymptotic_bound, capacity_region, inner_bound_finite, Bound, CapacityRegion, Energy, ReceiverSet,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// All subset constraints of the region.
    Region,
    /// Upper-right boundary of a two-receiver region, for plotting.
    Boundary,
    /// Extreme points of the region.
    Vertices,
    /// Finite-energy bounds approaching the unconstrained ones.
    Convergence,
    /// Cross-check entropies against the truncated Fock-space oracle.
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Rates are combined entanglement + secret-key rates per receiver, in bits
/// per channel use.
#[derive(Debug, Clone, Parser)]
#[command(name = "bbc-capacity", version, about = "Capacity regions of the pure-loss bosonic broadcast channel")]
pub struct RunConfig {
    #[arg(value_enum)]
    pub command: Command,

    /// Receiver transmittances, comma separated (e.g. 0.2,0.3).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub etas: Vec<f64>,

    /// Mean input photon number, or `inf` for the unconstrained region.
    #[arg(long)]
    pub ns: Option<String>,

    /// Split ordering for the beam-splitter network, e.g. E,B1,B2.
    #[arg(long)]
    pub ordering: Option<String>,

    /// Fock-space photon-number cutoff for `verify`.
    #[arg(long)]
    pub cutoff: Option<usize>,

    /// Number of boundary samples.
    #[arg(long, default_value_t = 200)]
    pub points: usize,

    /// N_S grid for `convergence`, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,

    /// Write to this file instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

/// What a successful [`execute`] produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub text: String,
    /// False only for a verification whose checks did not all pass.
    pub passed: bool,
}

/// One row of the convergence table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub ns: f64,
    pub subset: ReceiverSet,
    pub inner_bits: f64,
    pub asymptotic_bits: f64,
    pub gap_bits: f64,
}

#[derive(Serialize)]
struct ConvergenceRowRepr {
    ns: f64,
    subset: Vec<usize>,
    inner_bits: f64,
    asymptotic_bits: f64,
    gap_bits: f64,
}

pub const DEFAULT_GRID: [f64; 5] = [1.0, 10.0, 100.0, 1e3, 1e4];

/// Finite-energy bound, unconstrained bound and their gap for every subset at
/// every grid point. Rows are grouped by grid point, subsets in mask order.
pub fn convergence_table(spec: &BroadcastChannelSpec, grid: &[f64]) -> Result<Vec<ConvergenceRow>> {
    let m = spec.m();
    let limits = (1..1u32 << m)
        .map(|mask| {
            let t = ReceiverSet::from_mask(mask);
            match asymptotic_bound(spec, t)? {
                Bound::Finite(b) => Ok((t, b)),
                Bound::Unbounded => Err(Error::UnboundedRegion),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(grid.len() * limits.len());
    for &ns in grid {
        check_nonnegative("N_S", ns)?;
        for &(subset, asymptotic_bits) in &limits {
            let inner_bits = inner_bound_finite(spec, ns, subset)?;
            rows.push(ConvergenceRow {
                ns,
                subset,
                inner_bits,
                asymptotic_bits,
                gap_bits: asymptotic_bits - inner_bits,
            });
        }
    }
    Ok(rows)
}

/// True when, for every subset, the gap never grows along the table.
pub fn gaps_monotone(rows: &[ConvergenceRow]) -> bool {
    let mut last: std::collections::HashMap<ReceiverSet, f64> = Default::default();
    rows.iter().all(|r| {
        let ok = last.get(&r.subset).is_none_or(|&prev| r.gap_bits <= prev);
        last.insert(r.subset, r.gap_bits);
        ok
    })
}

fn require_energy(config: &RunConfig) -> Result<Energy> {
    match &config.ns {
        Some(text) => Energy::parse(text),
        None => Err(Error::InvalidChannel(format!(
            "--ns is required for `{}` (a number, or `inf`)",
            command_name(config.command)
        ))),
    }
}

fn command_name(c: Command) -> String {
    c.to_possible_value().map(|v| v.get_name().to_owned()).unwrap_or_default()
}

fn subset_csv(t: ReceiverSet) -> String {
    t.indices().iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
}

fn json<T: Serialize>(value: &T, digits: usize) -> String {
    to_rounded_json(value, digits).expect("output types serialize to JSON")
}

/// Runs one command and renders its output.
pub fn execute(config: &RunConfig, digits: usize) -> Result<Output> {
    let spec = BroadcastChannelSpec::new(config.etas.clone())?;
    let text = match config.command {
        Command::Region => render_region(&capacity_region(&spec, require_energy(config)?)?, config.format, digits),
        Command::Boundary => {
            // A boundary plot without --ns is the unconstrained region.
            let energy = match &config.ns {
                Some(text) => Energy::parse(text)?,
                None => Energy::Unconstrained,
            };
            let region = capacity_region(&spec, energy)?;
            let points = region.boundary_2d(config.points)?;
            match config.format {
                Format::Csv => {
                    let mut s = String::from("r1_bits,r2_bits\n");
                    for p in &points {
                        let _ = writeln!(s, "{},{}", fmt_sig(p.rates[0], digits), fmt_sig(p.rates[1], digits));
                    }
                    s
                }
                Format::Json => {
                    let pts: Vec<[f64; 2]> = points.iter().map(|p| [p.rates[0], p.rates[1]]).collect();
                    json(&serde_json::json!({"etas": spec.etas(), "energy": region.energy(), "points": pts}), digits)
                }
            }
        }
        Command::Vertices => {
            let region = capacity_region(&spec, require_energy(config)?)?;
            let vertices = region.vertices()?;
            match config.format {
                Format::Csv => {
                    let header: Vec<String> = (1..=spec.m()).map(|i| format!("r{i}_bits")).collect();
                    let mut s = header.join(",") + "\n";
                    for v in &vertices {
                        let cells: Vec<String> = v.rates.iter().map(|&r| fmt_sig(r, digits)).collect();
                        s += &(cells.join(",") + "\n");
                    }
                    s
                }
                Format::Json => {
                    let vs: Vec<&Vec<f64>> = vertices.iter().map(|v| &v.rates).collect();
                    json(&serde_json::json!({"etas": spec.etas(), "energy": region.energy(), "vertices": vs}), digits)
                }
            }
        }
        Command::Convergence => {
            let grid = config.grid.clone().unwrap_or_else(|| DEFAULT_GRID.to_vec());
            let rows = convergence_table(&spec, &grid)?;
            match config.format {
                Format::Csv => {
                    let mut s = String::from("ns,subset,inner_bits,asymptotic_bits,gap_bits\n");
                    for r in &rows {
                        let _ = writeln!(
                            s,
                            "{},{},{},{},{}",
                            fmt_sig(r.ns, digits),
                            subset_csv(r.subset),
                            fmt_sig(r.inner_bits, digits),
                            fmt_sig(r.asymptotic_bits, digits),
                            fmt_sig(r.gap_bits, digits)
                        );
                    }
                    s
                }
                Format::Json => {
                    let repr: Vec<ConvergenceRowRepr> = rows
                        .iter()
                        .map(|r| ConvergenceRowRepr {
                            ns: r.ns,
                            subset: r.subset.indices(),
                            inner_bits: r.inner_bits,
                            asymptotic_bits: r.asymptotic_bits,
                            gap_bits: r.gap_bits,
                        })
                        .collect();
                    json(
                        &serde_json::json!({"etas": spec.etas(), "gaps_monotone": gaps_monotone(&rows), "rows": repr}),
                        digits,
                    )
                }
            }
        }
        Command::Verify => {
            let ns = match require_energy(config)? {
                Energy::Finite(ns) => ns,
                Energy::Unconstrained => {
                    return Err(Error::InvalidChannel(
                        "`verify` needs a finite --ns; truncated Fock space cannot represent infinite energy".into(),
                    ))
                }
            };
            let cutoff = match config.cutoff {
                Some(c) => c,
                None => TruncationBudget::choose(ns)?.cutoff,
            };
            let ordering = match &config.ordering {
                Some(text) => SplitOrdering::parse(text, spec.m())?,
                None => SplitOrdering::fallback_for(&spec),
            };
            let report = verify_conditional_entropies_with(&spec, &ordering, ns, cutoff)?;
            let text = match config.format {
                Format::Json => json(&report, digits),
                Format::Csv => {
                    let mut s = String::from("case,gaussian_bits,fock_bits,closed_form_bits,abs_dev,tail_mass,pass\n");
                    for c in &report.cases {
                        let _ = writeln!(
                            s,
                            "\"{}\",{},{},{},{},{},{}",
                            c.case,
                            fmt_sig(c.gaussian_bits, digits),
                            fmt_sig(c.fock_bits, digits),
                            fmt_sig(c.closed_form_bits, digits),
                            fmt_sig(c.abs_dev, digits),
                            fmt_sig(c.tail_mass, digits),
                            c.pass
                        );
                    }
                    s
                }
            };
            return Ok(Output { text, passed: report.pass });
        }
    };
    Ok(Output { text, passed: true })
}

fn render_region(region: &CapacityRegion, format: Format, digits: usize) -> String {
    match format {
        Format::Json => json(region, digits),
        Format::Csv => {
            let mut s = String::from("subset,bound_bits\n");
            for c in region.constraints() {
                let bound = match c.bound {
                    Bound::Finite(b) => fmt_sig(b, digits),
                    Bound::Unbounded => "unbounded".to_owned(),
                };
                let _ = writeln!(s, "{},{}", subset_csv(c.subset), bound);
            }
            s
        }
    }
}

/// Parses `args`, runs the command and maps the outcome to an exit status.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let digits = match precision_from_env() {
        Ok(d) => d,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    match execute(&config, digits) {
        Ok(out) => {
            let written = match &config.output {
                Some(path) => std::fs::write(path, out.text.as_bytes()),
                None => std::io::stdout().write_all(out.text.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(1);
            }
            if out.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("error: verification failed");
                ExitCode::from(1)
            }
        }
        Err(e @ Error::Inconclusive(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
