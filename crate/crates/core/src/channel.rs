//! The 1-to-m pure-loss broadcast channel as a cascade of beam splitters.
//!
//! The input arm is split `m` times. Each stage splits one output off the
//! arm with vacuum entering the other port; whatever is left after the last
//! stage goes to the final output of the ordering. Any ordering of the `m + 1`
//! outputs (receivers and environment) realizes the same channel.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_nonnegative, Error, Result};
use crate::gaussian::{beam_splitter, tmsv, CovarianceState, ModeLabel};

/// Transmittances must sum to at most `1 + ETA_TOL`.
pub const ETA_TOL: f64 = 1e-12;
/// Largest receiver count for network construction.
pub const MAX_RECEIVERS: usize = 12;
/// Largest receiver count for sweeps over all `(m + 1)!` orderings.
pub const MAX_SWEEP_RECEIVERS: usize = 8;

/// Label of the sender's retained mode in channel outputs.
pub const SENDER_MODE: &str = "A";
/// Label of the channel input arm.
pub const INPUT_MODE: &str = "A'";

/// Per-receiver transmittances `(eta_1, ..., eta_m)`; the environment gets
/// `1 - sum eta_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct BroadcastChannelSpec {
    etas: Vec<f64>,
}

#[derive(Deserialize)]
struct RawSpec {
    etas: Vec<f64>,
}

impl TryFrom<RawSpec> for BroadcastChannelSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        BroadcastChannelSpec::new(raw.etas)
    }
}

impl BroadcastChannelSpec {
    pub fn new(etas: Vec<f64>) -> Result<Self> {
        if etas.is_empty() {
            return Err(Error::InvalidChannel("at least one receiver is required".into()));
        }
        if let Some(&bad) = etas.iter().find(|e| !(0.0..=1.0).contains(*e)) {
            return Err(Error::TransmittanceRange(bad));
        }
        let total: f64 = etas.iter().sum();
        if total > 1.0 + ETA_TOL {
            return Err(Error::InvalidChannel(format!("transmittances sum to {total} > 1")));
        }
        Ok(BroadcastChannelSpec { etas })
    }

    pub fn m(&self) -> usize {
        self.etas.len()
    }

    pub fn etas(&self) -> &[f64] {
        &self.etas
    }

    /// Total transmittance to the receivers.
    pub fn total(&self) -> f64 {
        self.etas.iter().sum()
    }

    pub fn eta_env(&self) -> f64 {
        (1.0 - self.total()).max(0.0)
    }

    pub fn eta_of(&self, output: OutputLabel) -> f64 {
        match output {
            OutputLabel::Receiver(i) => self.etas[i],
            OutputLabel::Environment => self.eta_env(),
        }
    }

    /// Labels of the channel output modes in canonical order `(B1, ..., Bm, E)`.
    pub fn output_labels(&self) -> Vec<OutputLabel> {
        (0..self.m()).map(OutputLabel::Receiver).chain(std::iter::once(OutputLabel::Environment)).collect()
    }
}

/// One output of the channel. Receivers are zero-based internally and
/// displayed as `B1..Bm`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OutputLabel {
    Receiver(usize),
    Environment,
}

impl OutputLabel {
    pub fn mode(self) -> ModeLabel {
        ModeLabel::new(self.to_string())
    }
}

impl fmt::Display for OutputLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutputLabel::Receiver(i) => write!(f, "B{}", i + 1),
            OutputLabel::Environment => f.write_str("E"),
        }
    }
}

impl FromStr for OutputLabel {
    type Err = Error;

    /// Accepts `E`, `B<k>` with `k >= 1`, and the two-receiver shorthands
    /// `B` and `C` for `B1` and `B2`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "E" | "e" => Ok(OutputLabel::Environment),
            "B" | "b" => Ok(OutputLabel::Receiver(0)),
            "C" | "c" => Ok(OutputLabel::Receiver(1)),
            other => other
                .strip_prefix(['B', 'b'])
                .and_then(|k| k.parse::<usize>().ok())
                .filter(|&k| k >= 1)
                .map(|k| OutputLabel::Receiver(k - 1))
                .ok_or_else(|| Error::InvalidOrdering(format!("unrecognized output label `{other}`"))),
        }
    }
}

/// Order in which the outputs are split off the input arm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitOrdering(Vec<OutputLabel>);

impl SplitOrdering {
    /// Validates that `sequence` is a permutation of `B1..Bm, E`.
    pub fn new(sequence: Vec<OutputLabel>, m: usize) -> Result<Self> {
        if sequence.len() != m + 1 {
            return Err(Error::InvalidOrdering(format!("expected {} labels, got {}", m + 1, sequence.len())));
        }
        let mut seen = vec![false; m + 1];
        for &label in &sequence {
            let slot = match label {
                OutputLabel::Receiver(i) if i < m => i,
                OutputLabel::Receiver(_) => {
                    return Err(Error::InvalidOrdering(format!("{label} is not a receiver of this channel")))
                }
                OutputLabel::Environment => m,
            };
            if std::mem::replace(&mut seen[slot], true) {
                return Err(Error::InvalidOrdering(format!("{label} appears twice")));
            }
        }
        Ok(SplitOrdering(sequence))
    }

    /// Parses a comma-separated list such as `E,B1,B2`.
    pub fn parse(text: &str, m: usize) -> Result<Self> {
        let labels = text.split(',').map(str::parse).collect::<Result<Vec<_>>>()?;
        Self::new(labels, m)
    }

    /// Environment first, then receivers in index order.
    pub fn env_first(m: usize) -> Self {
        let mut seq = vec![OutputLabel::Environment];
        seq.extend((0..m).map(OutputLabel::Receiver));
        SplitOrdering(seq)
    }

    /// An ordering that never splits an exhausted arm: zero-weight outputs are
    /// split off first, and a positive-weight output always ends the chain.
    pub fn fallback_for(spec: &BroadcastChannelSpec) -> Self {
        let (zero, positive): (Vec<_>, Vec<_>) =
            spec.output_labels().into_iter().partition(|&l| spec.eta_of(l) <= ETA_TOL);
        SplitOrdering(zero.into_iter().chain(positive).collect())
    }

    /// All `(m + 1)!` orderings in lexicographic order of label position.
    pub fn all(m: usize) -> Result<Vec<Self>> {
        if m > MAX_SWEEP_RECEIVERS {
            return Err(Error::TooManyReceivers { what: "ordering sweep", m, max: MAX_SWEEP_RECEIVERS });
        }
        let labels: Vec<OutputLabel> =
            (0..m).map(OutputLabel::Receiver).chain(std::iter::once(OutputLabel::Environment)).collect();
        let mut out = Vec::new();
        permute(&labels, &mut Vec::with_capacity(m + 1), &mut vec![false; m + 1], &mut out);
        Ok(out.into_iter().map(SplitOrdering).collect())
    }

    pub fn labels(&self) -> &[OutputLabel] {
        &self.0
    }
}

fn permute(items: &[OutputLabel], prefix: &mut Vec<OutputLabel>, used: &mut [bool], out: &mut Vec<Vec<OutputLabel>>) {
    if prefix.len() == items.len() {
        out.push(prefix.clone());
        return;
    }
    for i in 0..items.len() {
        if !used[i] {
            used[i] = true;
            prefix.push(items[i]);
            permute(items, prefix, used, out);
            prefix.pop();
            used[i] = false;
        }
    }
}

impl fmt::Display for SplitOrdering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// One beam splitter of the cascade.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    /// Fraction of the arm's power that stays on the arm.
    pub transmittance: f64,
    /// Fraction split off to `output`, `1 - transmittance`.
    pub split_fraction: f64,
    /// The arm being split, always the input mode.
    pub source: ModeLabel,
    pub output: OutputLabel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamSplitterNetwork {
    stages: Vec<Stage>,
    final_output: OutputLabel,
}

impl BeamSplitterNetwork {
    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    /// Output that receives the arm after the last stage.
    pub fn final_output(&self) -> OutputLabel {
        self.final_output
    }

    /// Recovers each output's overall transmittance by telescoping the stage
    /// transmittances.
    pub fn reconstructed_etas(&self) -> Vec<(OutputLabel, f64)> {
        let mut remaining = 1.0;
        let mut out = Vec::with_capacity(self.stages.len() + 1);
        for stage in &self.stages {
            out.push((stage.output, remaining * stage.split_fraction));
            remaining *= stage.transmittance;
        }
        out.push((self.final_output, remaining));
        out
    }
}

/// Builds the cascade for `ordering`. Stage `j` keeps
/// `(1 - sum_{k<=j} eta_k) / (1 - sum_{l<j} eta_l)` of the arm.
pub fn build_network(spec: &BroadcastChannelSpec, ordering: &SplitOrdering) -> Result<BeamSplitterNetwork> {
    let m = spec.m();
    if m > MAX_RECEIVERS {
        return Err(Error::TooManyReceivers { what: "network construction", m, max: MAX_RECEIVERS });
    }
    let ordering = SplitOrdering::new(ordering.0.clone(), m)?;
    let labels = ordering.labels();
    let mut consumed = 0.0;
    let mut stages = Vec::with_capacity(m);
    for (j, &label) in labels[..m].iter().enumerate() {
        let remaining = 1.0 - consumed;
        if remaining <= ETA_TOL {
            return Err(Error::DegenerateSplit { stage: j + 1, label: label.to_string() });
        }
        let eta = spec.eta_of(label);
        let split_fraction = (eta / remaining).clamp(0.0, 1.0);
        stages.push(Stage {
            transmittance: 1.0 - split_fraction,
            split_fraction,
            source: ModeLabel::from(INPUT_MODE),
            output: label,
        });
        consumed += eta;
    }
    Ok(BeamSplitterNetwork { stages, final_output: labels[m] })
}

/// Sends the second mode of a two-mode `input` through the channel.
///
/// The result is on modes `(A, B1, ..., Bm, E)` in that order whatever the
/// ordering, where `A` keeps the label of the first input mode.
pub fn apply_channel(
    spec: &BroadcastChannelSpec,
    ordering: &SplitOrdering,
    input: &CovarianceState,
) -> Result<CovarianceState> {
    if input.n_modes() != 2 {
        return Err(Error::Dimension { expected: 2, found: input.n_modes() });
    }
    let network = build_network(spec, ordering)?;
    let m = spec.m();
    let ancillas: Vec<ModeLabel> = (0..m).map(|j| ModeLabel::new(format!("#vac{j}"))).collect();
    let mut state = input.tensor(&CovarianceState::vacuum(ancillas)?)?;
    let n_modes = m + 2;
    // The ancilla goes into the first port, so the split-off output gets
    // `+sqrt(1 - t)` of the arm and the arm keeps `+sqrt(t)`: every output
    // carries a positive amplitude of the input whatever the ordering.
    for (j, stage) in network.stages().iter().enumerate() {
        state = state.apply(&beam_splitter(stage.transmittance, 2 + j, 1, n_modes)?)?;
    }
    let mut labels = vec![input.labels()[0].clone(), network.final_output().mode()];
    labels.extend(network.stages().iter().map(|s| s.output.mode()));
    let state = state.relabel(labels)?;
    let mut canonical = vec![input.labels()[0].clone()];
    canonical.extend(spec.output_labels().into_iter().map(OutputLabel::mode));
    state.reduce(&canonical)
}

/// TMSV input on `(A, A')` followed by the channel, keeping `E`.
pub fn output_state_tmsv(spec: &BroadcastChannelSpec, ns: f64, ordering: &SplitOrdering) -> Result<CovarianceState> {
    check_nonnegative("N_S", ns)?;
    let input = tmsv(ns, ModeLabel::from(SENDER_MODE), ModeLabel::from(INPUT_MODE))?;
    apply_channel(spec, ordering, &input)
}

/// Outcome of comparing several physical implementations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equivalence {
    pub equivalent: bool,
    pub max_deviation: f64,
}

pub const EQUIVALENCE_TOL: f64 = 1e-12;

/// Compares the reduced `(A, B1, ..., Bm)` covariance matrices produced by
/// each ordering of the same channel.
pub fn implementations_equivalent(
    spec: &BroadcastChannelSpec,
    orderings: &[SplitOrdering],
    ns: f64,
) -> Result<Equivalence> {
    let pairs: Vec<(&BroadcastChannelSpec, &SplitOrdering)> = orderings.iter().map(|o| (spec, o)).collect();
    compare_implementations(&pairs, ns)
}

/// Like [`implementations_equivalent`], but each implementation may carry its
/// own transmittances. All specs must have the same receiver count.
pub fn compare_implementations(
    implementations: &[(&BroadcastChannelSpec, &SplitOrdering)],
    ns: f64,
) -> Result<Equivalence> {
    if implementations.len() < 2 {
        return Err(Error::InvalidOrdering("at least two implementations are needed".into()));
    }
    let m = implementations[0].0.m();
    let mut keep = vec![ModeLabel::from(SENDER_MODE)];
    keep.extend((0..m).map(|i| OutputLabel::Receiver(i).mode()));
    let reduced = implementations
        .iter()
        .map(|(spec, ordering)| {
            if spec.m() != m {
                return Err(Error::Dimension { expected: m, found: spec.m() });
            }
            output_state_tmsv(spec, ns, ordering)?.reduce(&keep)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut max_deviation: f64 = 0.0;
    for (i, a) in reduced.iter().enumerate() {
        for b in &reduced[i + 1..] {
            max_deviation = max_deviation.max((a.cov() - b.cov()).amax());
        }
    }
    Ok(Equivalence { equivalent: max_deviation < EQUIVALENCE_TOL, max_deviation })
}
