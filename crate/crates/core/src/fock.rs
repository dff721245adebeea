//! Brute-force check of the Gaussian entropies in a truncated number basis.
//!
//! The TMSV `sum_n sqrt(lambda_n) |n, n>` is cut off at `n <= M` and pushed
//! through the beam-splitter cascade photon by photon. Every stage mixes the
//! arm with vacuum, so only the binomial map
//! `|n>|0> -> sum_k sqrt(C(n, k) eta^k (1 - eta)^(n - k)) |k>|n - k>`
//! is needed. All amplitudes are nonnegative, the same convention as the
//! covariance-matrix cascade in [`crate::channel::apply_channel`]. Reduced states are assembled in
//! factored form `rho = V V^T` per photon-number block, so their spectra come
//! from whichever of `V V^T` and `V^T V` is smaller.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::channel::{
    build_network, output_state_tmsv, BroadcastChannelSpec, OutputLabel, SplitOrdering, INPUT_MODE, SENDER_MODE,
};
use crate::error::{check_nonnegative, Error, Result};
use crate::gaussian::{g_unchecked, ModeLabel};
use crate::region::{inner_bound_finite, ReceiverSet};

/// Truncation tail that a verification run must stay under.
pub const MAX_TAIL_MASS: f64 = 1e-10;
/// Largest cutoff the oracle will use.
pub const MAX_CUTOFF: usize = 60;
/// Largest receiver count the oracle handles.
pub const MAX_ORACLE_RECEIVERS: usize = 3;
/// Pass threshold for oracle-vs-Gaussian entropy agreement.
pub const ENTROPY_MATCH_TOL: f64 = 1e-6;
/// Pass threshold for Schmidt coefficients.
pub const SCHMIDT_TOL: f64 = 1e-8;

const NEGATIVE_EIGEN_ERROR: f64 = -1e-8;

/// Geometric weight `N^n / (N + 1)^(n + 1)` of the TMSV Schmidt spectrum.
pub fn schmidt_weight(ns: f64, n: usize) -> f64 {
    (ns / (ns + 1.0)).powi(n as i32) / (ns + 1.0)
}

/// Cutoff bookkeeping for a TMSV with mean photon number `ns`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationBudget {
    pub cutoff: usize,
    /// Probability weight beyond the cutoff, `(N / (N + 1))^(M + 1)`.
    pub tail_mass: f64,
    /// Tolerance for oracle entropies, `max(1e-6, 50 tail M)`.
    pub entropy_tolerance: f64,
}

impl TruncationBudget {
    pub fn new(ns: f64, cutoff: usize) -> Result<Self> {
        check_nonnegative("N_S", ns)?;
        let tail_mass = (ns / (ns + 1.0)).powi(cutoff as i32 + 1);
        Ok(TruncationBudget {
            cutoff,
            tail_mass,
            entropy_tolerance: ENTROPY_MATCH_TOL.max(50.0 * tail_mass * cutoff as f64),
        })
    }

    /// Smallest cutoff with tail below [`MAX_TAIL_MASS`].
    pub fn choose(ns: f64) -> Result<Self> {
        for cutoff in 0..=MAX_CUTOFF {
            let b = Self::new(ns, cutoff)?;
            if b.tail_mass < MAX_TAIL_MASS {
                return Ok(b);
            }
        }
        Err(Error::Inconclusive(format!(
            "N_S = {ns} needs a cutoff above {MAX_CUTOFF} for tail mass < {MAX_TAIL_MASS:e}"
        )))
    }

    fn require_within(&self) -> Result<()> {
        if self.cutoff > MAX_CUTOFF {
            return Err(Error::Inconclusive(format!("cutoff {} exceeds {MAX_CUTOFF}", self.cutoff)));
        }
        if self.tail_mass >= MAX_TAIL_MASS {
            return Err(Error::Inconclusive(format!(
                "tail mass {:e} at cutoff {} is not below {MAX_TAIL_MASS:e}",
                self.tail_mass, self.cutoff
            )));
        }
        Ok(())
    }
}

/// Truncated pure state with real amplitudes over occupation tuples.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    labels: Vec<ModeLabel>,
    cutoff: usize,
    tail_budget: f64,
    amps: BTreeMap<Vec<u32>, f64>,
}

/// TMSV on `(A, A')` truncated at `n <= cutoff`.
pub fn tmsv_fock(ns: f64, cutoff: usize) -> Result<FockState> {
    let budget = TruncationBudget::new(ns, cutoff)?;
    let mut amps = BTreeMap::new();
    for n in 0..=cutoff {
        let w = schmidt_weight(ns, n);
        if w > 0.0 {
            amps.insert(vec![n as u32, n as u32], w.sqrt());
        }
    }
    Ok(FockState {
        labels: vec![ModeLabel::from(SENDER_MODE), ModeLabel::from(INPUT_MODE)],
        cutoff,
        tail_budget: budget.tail_mass,
        amps,
    })
}

fn ln_binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

fn split_amplitude(n: u32, k: u32, eta: f64) -> f64 {
    if eta == 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    if eta == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let ln = ln_binomial(n, k) + k as f64 * eta.ln() + (n - k) as f64 * (-eta).ln_1p();
    (0.5 * ln).exp()
}

impl FockState {
    pub fn labels(&self) -> &[ModeLabel] {
        &self.labels
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn tail_budget(&self) -> f64 {
        self.tail_budget
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitude(&self, occupation: &[u32]) -> f64 {
        self.amps.get(occupation).copied().unwrap_or(0.0)
    }

    pub fn amplitudes(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.amps.iter().map(|(k, &v)| (k.as_slice(), v))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a * a).sum()
    }

    fn index_of(&self, label: &ModeLabel) -> Result<usize> {
        self.labels.iter().position(|l| l == label).ok_or_else(|| Error::UnknownMode(label.to_string()))
    }

    /// Largest violation of `n_A = sum of the other occupations` over the
    /// support; zero for states built from a TMSV and vacuum splits.
    pub fn photon_balance_violation(&self) -> u32 {
        self.amps
            .keys()
            .map(|occ| {
                let rest: u32 = occ[1..].iter().sum();
                occ[0].abs_diff(rest)
            })
            .max()
            .unwrap_or(0)
    }

    /// Mixes `source` with a fresh vacuum mode `new_label`; `source` keeps
    /// the fraction `eta` of its photons on average.
    pub fn split_with_vacuum(&self, source: &ModeLabel, eta: f64, new_label: ModeLabel) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::TransmittanceRange(eta));
        }
        let src = self.index_of(source)?;
        if self.labels.contains(&new_label) {
            return Err(Error::DuplicateMode(new_label.to_string()));
        }
        let mut amps = BTreeMap::new();
        for (occ, &amp) in &self.amps {
            let n = occ[src];
            for k in 0..=n {
                let c = split_amplitude(n, k, eta);
                if c == 0.0 {
                    continue;
                }
                let mut next = occ.clone();
                next[src] = k;
                next.push(n - k);
                *amps.entry(next).or_insert(0.0) += amp * c;
            }
        }
        let mut labels = self.labels.clone();
        labels.push(new_label);
        Ok(FockState { labels, cutoff: self.cutoff, tail_budget: self.tail_budget, amps })
    }

    pub fn relabel(&self, from: &ModeLabel, to: ModeLabel) -> Result<Self> {
        let i = self.index_of(from)?;
        if &to != from && self.labels.contains(&to) {
            return Err(Error::DuplicateMode(to.to_string()));
        }
        let mut out = self.clone();
        out.labels[i] = to;
        Ok(out)
    }

    /// Reorders the modes to `order`, which must be a permutation of the labels.
    pub fn permute(&self, order: &[ModeLabel]) -> Result<Self> {
        if order.len() != self.labels.len() {
            return Err(Error::Dimension { expected: self.labels.len(), found: order.len() });
        }
        let idx = order.iter().map(|l| self.index_of(l)).collect::<Result<Vec<_>>>()?;
        let amps = self.amps.iter().map(|(occ, &a)| (idx.iter().map(|&i| occ[i]).collect(), a)).collect();
        Ok(FockState { labels: order.to_vec(), cutoff: self.cutoff, tail_budget: self.tail_budget, amps })
    }

    /// Partial trace onto `keep` (in the given order).
    pub fn reduce_density(&self, keep: &[ModeLabel]) -> Result<DensityMatrix> {
        if keep.is_empty() {
            return Err(Error::EmptySubset);
        }
        let kept = keep.iter().map(|l| self.index_of(l)).collect::<Result<Vec<_>>>()?;
        for (i, k) in kept.iter().enumerate() {
            if kept[..i].contains(k) {
                return Err(Error::DuplicateMode(keep[i].to_string()));
            }
        }
        let traced: Vec<usize> = (0..self.labels.len()).filter(|i| !kept.contains(i)).collect();

        let mut basis_index: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
        for occ in self.amps.keys() {
            let k: Vec<u32> = kept.iter().map(|&i| occ[i]).collect();
            let next = basis_index.len();
            basis_index.entry(k).or_insert(next);
        }
        // Renumber so the basis is in lexicographic order.
        let basis: Vec<Vec<u32>> = basis_index.keys().cloned().collect();
        for (i, v) in basis_index.values_mut().enumerate() {
            *v = i;
        }

        let mut groups: BTreeMap<Vec<u32>, Vec<(usize, f64)>> = BTreeMap::new();
        for (occ, &a) in &self.amps {
            let env: Vec<u32> = traced.iter().map(|&i| occ[i]).collect();
            let k: Vec<u32> = kept.iter().map(|&i| occ[i]).collect();
            groups.entry(env).or_default().push((basis_index[&k], a));
        }

        let mut uf = UnionFind::new(basis.len());
        for members in groups.values() {
            for w in members.windows(2) {
                uf.union(w[0].0, w[1].0);
            }
        }
        let mut comp_rows: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..basis.len() {
            comp_rows.entry(uf.find(i)).or_default().push(i);
        }
        let mut comp_groups: BTreeMap<usize, Vec<&Vec<(usize, f64)>>> = BTreeMap::new();
        for members in groups.values() {
            comp_groups.entry(uf.find(members[0].0)).or_default().push(members);
        }
        let blocks = comp_rows
            .into_iter()
            .map(|(root, rows)| {
                let local: BTreeMap<usize, usize> = rows.iter().enumerate().map(|(r, &g)| (g, r)).collect();
                let cols = &comp_groups[&root];
                let mut factor = DMatrix::zeros(rows.len(), cols.len());
                for (c, members) in cols.iter().enumerate() {
                    for &(g, a) in members.iter() {
                        factor[(local[&g], c)] += a;
                    }
                }
                Block { rows, factor }
            })
            .collect();

        let mut rho = DensityMatrix { labels: keep.to_vec(), basis, blocks, trace_deficit: 0.0 };
        rho.trace_deficit = (1.0 - rho.trace()).max(0.0);
        Ok(rho)
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// One diagonal block of a reduced state, `rho_block = factor * factor^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    /// Basis indices spanned by the block.
    pub rows: Vec<usize>,
    pub factor: DMatrix<f64>,
}

impl Block {
    /// Nonzero part of the block spectrum (plus zeros up to the smaller
    /// factor dimension).
    fn eigenvalues(&self) -> Vec<f64> {
        let v = &self.factor;
        let gram = if v.nrows() <= v.ncols() { v * v.transpose() } else { v.transpose() * v };
        gram.symmetric_eigenvalues().iter().copied().collect()
    }
}

/// Reduced density operator on a truncated occupation basis, stored as
/// photon-number blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    labels: Vec<ModeLabel>,
    basis: Vec<Vec<u32>>,
    blocks: Vec<Block>,
    trace_deficit: f64,
}

impl DensityMatrix {
    pub fn labels(&self) -> &[ModeLabel] {
        &self.labels
    }

    pub fn basis(&self) -> &[Vec<u32>] {
        &self.basis
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn trace(&self) -> f64 {
        self.blocks.iter().map(|b| b.factor.norm_squared()).sum()
    }

    /// `1 - tr(rho)`, the weight lost to truncation.
    pub fn trace_deficit(&self) -> f64 {
        self.trace_deficit
    }

    /// Full spectrum, sorted descending, of length [`Self::dim`].
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.blocks.iter().flat_map(Block::eigenvalues).collect();
        ev.resize(self.dim().max(ev.len()), 0.0);
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    /// Dense matrix; only sensible for small bases.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for b in &self.blocks {
            let local = &b.factor * b.factor.transpose();
            for (i, &gi) in b.rows.iter().enumerate() {
                for (j, &gj) in b.rows.iter().enumerate() {
                    m[(gi, gj)] = local[(i, j)];
                }
            }
        }
        m
    }
}

/// Spectral entropy of a truncated state with its truncation uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockEntropy {
    pub bits: f64,
    /// Fannes-Audenaert bound `T log2(d - 1) + h2(T)` for trace deficit `T`.
    pub uncertainty: f64,
}

pub fn entropy_fock(rho: &DensityMatrix) -> Result<FockEntropy> {
    let ev = rho.eigenvalues();
    if let Some(&lo) = ev.last() {
        if lo < NEGATIVE_EIGEN_ERROR {
            return Err(Error::NegativeEigenvalue(lo));
        }
    }
    let bits = ev.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum();
    let t = rho.trace_deficit().min(1.0);
    let h2 = if t > 0.0 && t < 1.0 { -t * t.log2() - (1.0 - t) * (1.0 - t).log2() } else { 0.0 };
    let d = rho.dim().max(2) as f64;
    Ok(FockEntropy { bits, uncertainty: t * (d - 1.0).log2() + h2 })
}

/// TMSV through the channel, on modes `(A, B1, ..., Bm, E)`.
pub fn channel_output_fock(
    spec: &BroadcastChannelSpec,
    ordering: &SplitOrdering,
    ns: f64,
    cutoff: usize,
) -> Result<FockState> {
    let m = spec.m();
    if m > MAX_ORACLE_RECEIVERS {
        return Err(Error::TooManyReceivers { what: "Fock oracle", m, max: MAX_ORACLE_RECEIVERS });
    }
    let network = build_network(spec, ordering)?;
    let arm = ModeLabel::from(INPUT_MODE);
    let mut state = tmsv_fock(ns, cutoff)?;
    for stage in network.stages() {
        state = state.split_with_vacuum(&arm, stage.transmittance, stage.output.mode())?;
    }
    let state = state.relabel(&arm, network.final_output().mode())?;
    let mut order = vec![ModeLabel::from(SENDER_MODE)];
    order.extend(spec.output_labels().into_iter().map(OutputLabel::mode));
    state.permute(&order)
}

/// One line of a verification report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseReport {
    pub case: String,
    pub gaussian_bits: f64,
    pub fock_bits: f64,
    pub closed_form_bits: f64,
    pub abs_dev: f64,
    pub tail_mass: f64,
    pub pass: bool,
}

impl CaseReport {
    fn new(case: String, gaussian_bits: f64, fock_bits: f64, closed_form_bits: f64, tail_mass: f64) -> Self {
        let abs_dev = (gaussian_bits - fock_bits)
            .abs()
            .max((fock_bits - closed_form_bits).abs())
            .max((gaussian_bits - closed_form_bits).abs());
        CaseReport {
            case,
            gaussian_bits,
            fock_bits,
            closed_form_bits,
            abs_dev,
            tail_mass,
            pass: abs_dev < ENTROPY_MATCH_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub etas: Vec<f64>,
    pub ns: f64,
    pub cutoff: usize,
    pub tail_mass: f64,
    pub max_abs_dev: f64,
    pub pass: bool,
    pub cases: Vec<CaseReport>,
}

/// Compares `-H(T | A Tc)` for every nonempty `T`, the single-mode marginals
/// and the global purity identity `H(A B1..Bm) = H(E)` across the Fock
/// oracle, the Gaussian computation and the closed forms.
pub fn verify_conditional_entropies(spec: &BroadcastChannelSpec, ns: f64, cutoff: usize) -> Result<VerificationReport> {
    verify_conditional_entropies_with(spec, &SplitOrdering::fallback_for(spec), ns, cutoff)
}

pub fn verify_conditional_entropies_with(
    spec: &BroadcastChannelSpec,
    ordering: &SplitOrdering,
    ns: f64,
    cutoff: usize,
) -> Result<VerificationReport> {
    let budget = TruncationBudget::new(ns, cutoff)?;
    budget.require_within()?;
    let m = spec.m();
    let fock = channel_output_fock(spec, ordering, ns, cutoff)?;
    let gauss = output_state_tmsv(spec, ns, ordering)?;
    let fock_h = |modes: &[ModeLabel]| -> Result<f64> {
        if modes.is_empty() {
            Ok(0.0)
        } else {
            Ok(entropy_fock(&fock.reduce_density(modes)?)?.bits)
        }
    };
    let sender = ModeLabel::from(SENDER_MODE);
    let tail = budget.tail_mass;
    let mut cases = Vec::new();

    for mask in 1..1u32 << m {
        let t = ReceiverSet::from_mask(mask);
        let mut cond = vec![sender.clone()];
        cond.extend(t.complement(m).modes());
        let mut joint = cond.clone();
        joint.extend(t.modes());
        let gaussian = -gauss.conditional_entropy(&t.modes(), &cond)?;
        let oracle = fock_h(&cond)? - fock_h(&joint)?;
        let closed = inner_bound_finite(spec, ns, t)?;
        cases.push(CaseReport::new(format!("-H(T|A Tc) T={t}"), gaussian, oracle, closed, tail));
    }

    for out in spec.output_labels() {
        let mode = [out.mode()];
        cases.push(CaseReport::new(
            format!("H({out})"),
            gauss.entropy_of(&mode)?,
            fock_h(&mode)?,
            g_unchecked(spec.eta_of(out) * ns),
            tail,
        ));
    }

    let mut sender_side = vec![sender];
    sender_side.extend(ReceiverSet::all(m).modes());
    cases.push(CaseReport::new(
        format!("purity H(A,B1..B{m}) = H(E)"),
        gauss.entropy_of(&[OutputLabel::Environment.mode()])?,
        fock_h(&sender_side)?,
        g_unchecked(spec.eta_env() * ns),
        tail,
    ));

    let max_abs_dev = cases.iter().map(|c| c.abs_dev).fold(0.0, f64::max);
    Ok(VerificationReport {
        etas: spec.etas().to_vec(),
        ns,
        cutoff,
        tail_mass: tail,
        max_abs_dev,
        pass: cases.iter().all(|c| c.pass),
        cases,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchmidtReport {
    pub eta_b: f64,
    pub ns: f64,
    pub cutoff: usize,
    pub tail_mass: f64,
    /// Spectrum of the reduced `(A, B)` state, descending.
    pub eigenvalues: Vec<f64>,
    /// `lambda_k((1 - eta_B) N_S)` for the same indices.
    pub expected: Vec<f64>,
    pub max_abs_dev: f64,
    /// Largest relative deviation of consecutive eigenvalue ratios from
    /// `N' / (N' + 1)`, over eigenvalues above `1e-6`.
    pub max_ratio_dev: f64,
    pub pass: bool,
}

/// Splits `B` off a TMSV arm with a single `1 - eta_B` beam splitter and
/// checks that the `(A, B)` spectrum is the thermal one with
/// `(1 - eta_B) N_S` photons, i.e. the Schmidt coefficients against the
/// remaining arm.
pub fn schmidt_spectrum_check(eta_b: f64, ns: f64, cutoff: usize) -> Result<SchmidtReport> {
    if !(0.0..=1.0).contains(&eta_b) {
        return Err(Error::TransmittanceRange(eta_b));
    }
    let budget = TruncationBudget::new(ns, cutoff)?;
    budget.require_within()?;
    let arm = ModeLabel::from(INPUT_MODE);
    let state = tmsv_fock(ns, cutoff)?.split_with_vacuum(&arm, 1.0 - eta_b, ModeLabel::from("B"))?;
    let rho = state.reduce_density(&[ModeLabel::from(SENDER_MODE), ModeLabel::from("B")])?;
    let eigenvalues = rho.eigenvalues();
    let reduced = (1.0 - eta_b) * ns;
    let expected: Vec<f64> = (0..eigenvalues.len()).map(|k| schmidt_weight(reduced, k)).collect();
    let max_abs_dev = eigenvalues.iter().zip(&expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let ratio = reduced / (reduced + 1.0);
    let max_ratio_dev = eigenvalues
        .windows(2)
        .filter(|w| w[1] > 1e-6)
        .map(|w| (w[1] / w[0] - ratio).abs() / ratio.max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    Ok(SchmidtReport {
        eta_b,
        ns,
        cutoff,
        tail_mass: budget.tail_mass,
        eigenvalues,
        expected,
        max_abs_dev,
        max_ratio_dev,
        pass: max_abs_dev < SCHMIDT_TOL,
    })
}
