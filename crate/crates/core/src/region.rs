//! Rate regions of the broadcast channel.
//!
//! Each receiver gets one coordinate, the combined entanglement plus secret
//! key rate (an ebit can always be turned into a key bit). The region is the
//! polymatroid `{ r >= 0 : sum_{i in T} r_i <= f(T) for all nonempty T }`
//! where, with `eta_B` the total receiver transmittance and `eta_Tc` the
//! transmittance to the receivers outside `T`,
//!
//! * at finite input energy `N_S`: `f(T) = g((1 - eta_Tc) N_S) - g((1 - eta_B) N_S)`,
//! * without an energy constraint: `f(T) = log2((1 - eta_Tc) / (1 - eta_B))`.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::channel::{output_state_tmsv, BroadcastChannelSpec, OutputLabel, SplitOrdering, ETA_TOL, SENDER_MODE};
use crate::error::{check_nonnegative, Error, Result};
use crate::gaussian::{g_unchecked, ModeLabel};

/// Receiver count above which a region is not materialized (`2^m - 1` constraints).
pub const MAX_REGION_RECEIVERS: usize = 20;
/// Receiver count above which vertices are not enumerated.
pub const MAX_VERTEX_RECEIVERS: usize = 8;
/// Slack for membership tests against closed-form bounds.
pub const CONTAINS_TOL: f64 = 1e-12;
/// Vertices closer than this in every coordinate are merged.
pub const VERTEX_DEDUP_TOL: f64 = 1e-10;

/// A nonempty set of receivers, stored as a bitmask over zero-based indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ReceiverSet(u32);

impl ReceiverSet {
    pub fn from_mask(mask: u32) -> Self {
        ReceiverSet(mask)
    }

    /// From one-based receiver indices.
    pub fn from_indices(indices: &[usize], m: usize) -> Result<Self> {
        let mut mask = 0u32;
        for &i in indices {
            if i == 0 || i > m {
                return Err(Error::InvalidSubset(format!("receiver {i} is not in 1..={m}")));
            }
            mask |= 1 << (i - 1);
        }
        Ok(ReceiverSet(mask))
    }

    pub fn all(m: usize) -> Self {
        ReceiverSet(((1u64 << m) - 1) as u32)
    }

    pub fn empty() -> Self {
        ReceiverSet(0)
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn union(self, other: Self) -> Self {
        ReceiverSet(self.0 | other.0)
    }

    pub fn intersects(self, other: Self) -> bool {
        self.0 & other.0 != 0
    }

    pub fn with(self, i: usize) -> Self {
        ReceiverSet(self.0 | 1 << i)
    }

    pub fn complement(self, m: usize) -> Self {
        ReceiverSet(!self.0 & Self::all(m).0)
    }

    /// Zero-based members in increasing order.
    pub fn members(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&i| self.contains(i))
    }

    /// One-based members, as used in serialized output.
    pub fn indices(self) -> Vec<usize> {
        self.members().map(|i| i + 1).collect()
    }

    fn check_within(self, m: usize) -> Result<()> {
        if self.0 & !Self::all(m).0 != 0 {
            return Err(Error::InvalidSubset(format!("{self} has receivers beyond {m}")));
        }
        Ok(())
    }

    pub fn modes(self) -> Vec<ModeLabel> {
        self.members().map(|i| OutputLabel::Receiver(i).mode()).collect()
    }

    pub fn eta(self, spec: &BroadcastChannelSpec) -> f64 {
        self.members().map(|i| spec.etas()[i]).sum()
    }
}

impl fmt::Display for ReceiverSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.members().map(|i| OutputLabel::Receiver(i).to_string()).collect();
        write!(f, "{{{}}}", names.join(","))
    }
}

/// Right-hand side of a rate constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Finite(f64),
    /// No constraint: the receivers are connected losslessly in aggregate.
    Unbounded,
}

impl Bound {
    pub fn finite(self) -> Option<f64> {
        match self {
            Bound::Finite(v) => Some(v),
            Bound::Unbounded => None,
        }
    }

    fn as_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

/// Input-energy regime of a region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Energy {
    Unconstrained,
    /// Mean photon number `N_S` of the TMSV input.
    Finite(f64),
}

impl Energy {
    /// Parses `inf` or a nonnegative number.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t.eq_ignore_ascii_case("inf") {
            return Ok(Energy::Unconstrained);
        }
        let ns: f64 = t.parse().map_err(|_| Error::Parse(t.to_owned()))?;
        check_nonnegative("N_S", ns)?;
        Ok(Energy::Finite(ns))
    }
}

impl fmt::Display for Energy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Energy::Unconstrained => f.write_str("inf"),
            Energy::Finite(ns) => write!(f, "{ns}"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum EnergyRepr {
    Tag(String),
    Ns { ns: f64 },
}

impl Serialize for Energy {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            Energy::Unconstrained => EnergyRepr::Tag("unconstrained".into()),
            Energy::Finite(ns) => EnergyRepr::Ns { ns },
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Energy {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match EnergyRepr::deserialize(d)? {
            EnergyRepr::Tag(t) if t == "unconstrained" => Ok(Energy::Unconstrained),
            EnergyRepr::Tag(t) => Err(serde::de::Error::custom(format!("unknown energy tag `{t}`"))),
            EnergyRepr::Ns { ns } => Ok(Energy::Finite(ns)),
        }
    }
}

/// `sum_{i in subset} r_i <= bound`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateConstraint {
    pub subset: ReceiverSet,
    pub bound: Bound,
}

#[derive(Serialize, Deserialize)]
struct ConstraintRepr {
    subset: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bound_bits: Option<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    unbounded: bool,
}

/// A combined entanglement-plus-key rate for each receiver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub rates: Vec<f64>,
}

impl RatePoint {
    pub fn new(rates: Vec<f64>) -> Self {
        RatePoint { rates }
    }
}

/// The region cut out by one constraint per nonempty receiver subset.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityRegion {
    m: usize,
    energy: Energy,
    /// Indexed by `mask - 1`.
    constraints: Vec<RateConstraint>,
}

#[derive(Serialize, Deserialize)]
struct RegionRepr {
    m: usize,
    energy: Energy,
    constraints: Vec<ConstraintRepr>,
}

impl Serialize for CapacityRegion {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RegionRepr {
            m: self.m,
            energy: self.energy,
            constraints: self
                .constraints
                .iter()
                .map(|c| ConstraintRepr {
                    subset: c.subset.indices(),
                    bound_bits: c.bound.finite(),
                    unbounded: c.bound == Bound::Unbounded,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CapacityRegion {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = RegionRepr::deserialize(d)?;
        if repr.m == 0 || repr.m > MAX_REGION_RECEIVERS {
            return Err(D::Error::custom(format!("receiver count {} out of range", repr.m)));
        }
        let n = (1usize << repr.m) - 1;
        let mut slots: Vec<Option<RateConstraint>> = vec![None; n];
        for c in repr.constraints {
            let subset = ReceiverSet::from_indices(&c.subset, repr.m).map_err(D::Error::custom)?;
            if subset.is_empty() {
                return Err(D::Error::custom("empty constraint subset"));
            }
            let bound = match (c.bound_bits, c.unbounded) {
                (Some(b), false) if b >= 0.0 => Bound::Finite(b),
                (None, true) => Bound::Unbounded,
                _ => return Err(D::Error::custom(format!("bad bound for subset {subset}"))),
            };
            slots[subset.mask() as usize - 1] = Some(RateConstraint { subset, bound });
        }
        let constraints = slots
            .into_iter()
            .enumerate()
            .map(|(k, c)| c.ok_or_else(|| D::Error::custom(format!("missing constraint #{}", k + 1))))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(CapacityRegion { m: repr.m, energy: repr.energy, constraints })
    }
}

fn check_subset(spec: &BroadcastChannelSpec, t: ReceiverSet) -> Result<()> {
    if t.is_empty() {
        return Err(Error::InvalidSubset("subset must be nonempty".into()));
    }
    t.check_within(spec.m())
}

/// Finite-energy achievable bound `g((1 - eta_Tc) N_S) - g((1 - eta_B) N_S)`,
/// the coherent information `-H(T | A Tc)` of the channel output.
pub fn inner_bound_finite(spec: &BroadcastChannelSpec, ns: f64, t: ReceiverSet) -> Result<f64> {
    check_nonnegative("N_S", ns)?;
    check_subset(spec, t)?;
    let eta_tc = t.complement(spec.m()).eta(spec);
    let eta_b = spec.total();
    let hi = ((1.0 - eta_tc) * ns).max(0.0);
    let lo = ((1.0 - eta_b) * ns).max(0.0);
    Ok((g_unchecked(hi) - g_unchecked(lo)).max(0.0))
}

/// The same quantity as [`inner_bound_finite`], computed directly as
/// `-H(T | A Tc)` on the Gaussian output state.
pub fn inner_bound_gaussian(spec: &BroadcastChannelSpec, ns: f64, t: ReceiverSet) -> Result<f64> {
    check_nonnegative("N_S", ns)?;
    check_subset(spec, t)?;
    let out = output_state_tmsv(spec, ns, &SplitOrdering::fallback_for(spec))?;
    let mut cond = vec![ModeLabel::from(SENDER_MODE)];
    cond.extend(t.complement(spec.m()).modes());
    Ok(-out.conditional_entropy(&t.modes(), &cond)?)
}

/// Unconstrained bound `log2((1 - eta_Tc) / (1 - eta_B))`.
///
/// When the receivers collect all the light (`eta_B = 1`) and `T` has positive
/// transmittance the bound is [`Bound::Unbounded`].
pub fn asymptotic_bound(spec: &BroadcastChannelSpec, t: ReceiverSet) -> Result<Bound> {
    check_subset(spec, t)?;
    let eta_t = t.eta(spec);
    if eta_t <= 0.0 {
        return Ok(Bound::Finite(0.0));
    }
    let loss = 1.0 - spec.total();
    if loss <= ETA_TOL {
        return Ok(Bound::Unbounded);
    }
    let eta_tc = t.complement(spec.m()).eta(spec);
    Ok(Bound::Finite(((1.0 - eta_tc) / loss).log2().max(0.0)))
}

/// Builds all `2^m - 1` constraints and checks that they form a polymatroid.
pub fn capacity_region(spec: &BroadcastChannelSpec, energy: Energy) -> Result<CapacityRegion> {
    let m = spec.m();
    if m > MAX_REGION_RECEIVERS {
        return Err(Error::TooManyReceivers { what: "capacity region", m, max: MAX_REGION_RECEIVERS });
    }
    let constraints = (1..1u32 << m)
        .map(|mask| {
            let subset = ReceiverSet(mask);
            let bound = match energy {
                Energy::Unconstrained => asymptotic_bound(spec, subset)?,
                Energy::Finite(ns) => Bound::Finite(inner_bound_finite(spec, ns, subset)?),
            };
            Ok(RateConstraint { subset, bound })
        })
        .collect::<Result<Vec<_>>>()?;
    let region = CapacityRegion { m, energy, constraints };
    region.check_polymatroid()?;
    Ok(region)
}

impl CapacityRegion {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn energy(&self) -> Energy {
        self.energy
    }

    pub fn constraints(&self) -> &[RateConstraint] {
        &self.constraints
    }

    /// Bound for `t`; `f(empty) = 0`.
    pub fn bound(&self, t: ReceiverSet) -> Bound {
        if t.is_empty() {
            Bound::Finite(0.0)
        } else {
            self.constraints[t.mask() as usize - 1].bound
        }
    }

    fn rank(&self, t: ReceiverSet) -> f64 {
        self.bound(t).as_f64()
    }

    pub fn is_bounded(&self) -> bool {
        self.constraints.iter().all(|c| c.bound != Bound::Unbounded)
    }

    /// Checks monotonicity (always) and submodularity (for up to eight
    /// receivers) of the bound function.
    pub fn check_polymatroid(&self) -> Result<()> {
        let m = self.m;
        for mask in 0..1u32 << m {
            let t = ReceiverSet(mask);
            let ft = self.rank(t);
            for j in (0..m).filter(|&j| !t.contains(j)) {
                let fj = self.rank(t.with(j));
                if fj < ft - CONTAINS_TOL {
                    return Err(Error::NotPolymatroid(format!("f({}) < f({t})", t.with(j))));
                }
                if m > MAX_VERTEX_RECEIVERS || !ft.is_finite() {
                    continue;
                }
                for k in (j + 1..m).filter(|&k| !t.contains(k)) {
                    let lhs = fj + self.rank(t.with(k));
                    let rhs = self.rank(t.with(j).with(k)) + ft;
                    if lhs.is_finite() && lhs < rhs - 1e-12 * rhs.abs().max(1.0) {
                        return Err(Error::NotPolymatroid(format!("submodularity fails at {t} + {{{j},{k}}}")));
                    }
                }
            }
        }
        Ok(())
    }

    fn check_point(&self, p: &RatePoint) -> Result<()> {
        if p.rates.len() != self.m {
            return Err(Error::Dimension { expected: self.m, found: p.rates.len() });
        }
        Ok(())
    }

    /// Membership with slack [`CONTAINS_TOL`]. Negative rates are outside.
    pub fn contains(&self, p: &RatePoint) -> Result<bool> {
        self.check_point(p)?;
        if p.rates.iter().any(|&r| r < -CONTAINS_TOL) {
            return Ok(false);
        }
        Ok(self.constraints.iter().all(|c| match c.bound {
            Bound::Unbounded => true,
            Bound::Finite(b) => c.subset.members().map(|i| p.rates[i]).sum::<f64>() <= b + CONTAINS_TOL,
        }))
    }

    /// Constraints satisfied with equality (within `tol`).
    pub fn tight_constraints(&self, p: &RatePoint, tol: f64) -> Result<Vec<ReceiverSet>> {
        self.check_point(p)?;
        Ok(self
            .constraints
            .iter()
            .filter_map(|c| {
                let b = c.bound.finite()?;
                let s: f64 = c.subset.members().map(|i| p.rates[i]).sum();
                ((s - b).abs() <= tol).then_some(c.subset)
            })
            .collect())
    }

    /// Extreme points of the region.
    ///
    /// Every vertex of a polymatroid is a greedy point: pick receivers in some
    /// order `pi(1), ..., pi(k)` and give `pi(j)` the marginal gain
    /// `f({pi(1..j)}) - f({pi(1..j-1)})`, all others zero. Enumerating every
    /// prefix of every ordering yields the dominant corners (`k = m`) and the
    /// faces on the coordinate hyperplanes. Sorted lexicographically.
    pub fn vertices(&self) -> Result<Vec<RatePoint>> {
        if self.m > MAX_VERTEX_RECEIVERS {
            return Err(Error::TooManyReceivers { what: "vertex enumeration", m: self.m, max: MAX_VERTEX_RECEIVERS });
        }
        if !self.is_bounded() {
            return Err(Error::UnboundedRegion);
        }
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        let mut rates = vec![0.0; self.m];
        self.greedy_prefixes(ReceiverSet::empty(), &mut rates, &mut seen, &mut out);
        out.sort_by(|a: &RatePoint, b: &RatePoint| {
            a.rates
                .iter()
                .zip(&b.rates)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        Ok(out)
    }

    fn greedy_prefixes(
        &self,
        chosen: ReceiverSet,
        rates: &mut Vec<f64>,
        seen: &mut HashSet<Vec<i64>>,
        out: &mut Vec<RatePoint>,
    ) {
        let key: Vec<i64> = rates.iter().map(|r| (r / VERTEX_DEDUP_TOL).round() as i64).collect();
        if seen.insert(key) {
            out.push(RatePoint::new(rates.clone()));
        }
        let base = self.rank(chosen);
        for j in (0..self.m).filter(|&j| !chosen.contains(j)) {
            let next = chosen.with(j);
            let gain = self.rank(next) - base;
            rates[j] = if gain.abs() < CONTAINS_TOL { 0.0 } else { gain.max(0.0) };
            self.greedy_prefixes(next, rates, seen, out);
            rates[j] = 0.0;
        }
    }

    /// Upper-right boundary of a two-receiver region, from the `r2` axis
    /// intercept to the `r1` axis intercept.
    ///
    /// `n_points` samples are spread evenly by arc length and merged with the
    /// corner points, so the polyline always passes through the corners.
    pub fn boundary_2d(&self, n_points: usize) -> Result<Vec<RatePoint>> {
        if self.m != 2 {
            return Err(Error::Dimension { expected: 2, found: self.m });
        }
        if n_points < 2 {
            return Err(Error::InvalidSubset(format!("need at least 2 boundary points, got {n_points}")));
        }
        if !self.is_bounded() {
            return Err(Error::UnboundedRegion);
        }
        let f1 = self.rank(ReceiverSet(1));
        let f2 = self.rank(ReceiverSet(2));
        let f12 = self.rank(ReceiverSet(3));
        let corners = [[0.0, f2], [(f12 - f2).max(0.0), f2], [f1, (f12 - f1).max(0.0)], [f1, 0.0]];
        let seg_len: Vec<f64> =
            corners.windows(2).map(|w| ((w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2)).sqrt()).collect();
        let total: f64 = seg_len.iter().sum();

        // (arc length, point) pairs; corners first so they win ties.
        let mut samples: Vec<(f64, [f64; 2])> = Vec::with_capacity(n_points + 4);
        let mut acc = 0.0;
        for (k, c) in corners.iter().enumerate() {
            samples.push((acc, *c));
            if k < seg_len.len() {
                acc += seg_len[k];
            }
        }
        for i in 0..n_points {
            let s = total * i as f64 / (n_points - 1) as f64;
            samples.push((s, point_at(&corners, &seg_len, s)));
        }
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<RatePoint> = Vec::with_capacity(samples.len());
        for (_, p) in samples {
            let dup = out.last().is_some_and(|q| {
                (q.rates[0] - p[0]).abs() <= VERTEX_DEDUP_TOL && (q.rates[1] - p[1]).abs() <= VERTEX_DEDUP_TOL
            });
            if !dup {
                out.push(RatePoint::new(p.to_vec()));
            }
        }
        Ok(out)
    }
}

fn point_at(corners: &[[f64; 2]; 4], seg_len: &[f64], s: f64) -> [f64; 2] {
    let mut rest = s;
    for (k, &len) in seg_len.iter().enumerate() {
        if rest <= len || k == seg_len.len() - 1 {
            let t = if len > 0.0 { (rest / len).clamp(0.0, 1.0) } else { 0.0 };
            let (a, b) = (corners[k], corners[k + 1]);
            return [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
        }
        rest -= len;
    }
    corners[3]
}

/// Entanglement gained by one state-merging step, `-H(S1 | A S2)`, computed
/// two ways.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergingGain {
    /// Conditional entropy on the receivers' and sender's modes (E traced out).
    pub direct: f64,
    /// `H(complement of S2) - H(complement of S1 S2)`, complements taken among
    /// the channel outputs including E.
    pub complement: f64,
    /// `g((1 - eta_S2) N_S) - g((1 - eta_S1 - eta_S2) N_S)`.
    pub closed_form: f64,
}

impl MergingGain {
    pub fn bits(&self) -> f64 {
        self.direct
    }

    pub fn discrepancy(&self) -> f64 {
        (self.direct - self.complement).abs()
    }
}

pub fn merging_gain(spec: &BroadcastChannelSpec, ns: f64, s1: ReceiverSet, s2: ReceiverSet) -> Result<MergingGain> {
    check_nonnegative("N_S", ns)?;
    check_subset(spec, s1)?;
    s2.check_within(spec.m())?;
    if s1.intersects(s2) {
        return Err(Error::InvalidSubset(format!("{s1} and {s2} overlap")));
    }
    let m = spec.m();
    let out = output_state_tmsv(spec, ns, &SplitOrdering::fallback_for(spec))?;

    let mut cond = vec![ModeLabel::from(SENDER_MODE)];
    cond.extend(s2.modes());
    let direct = -out.conditional_entropy(&s1.modes(), &cond)?;

    let env = OutputLabel::Environment.mode();
    let mut not_s2 = s2.complement(m).modes();
    not_s2.push(env.clone());
    let mut not_s12 = s1.union(s2).complement(m).modes();
    not_s12.push(env);
    let complement = out.entropy_of(&not_s2)? - out.entropy_of(&not_s12)?;

    let closed_form = g_unchecked((1.0 - s2.eta(spec)).max(0.0) * ns)
        - g_unchecked((1.0 - s1.eta(spec) - s2.eta(spec)).max(0.0) * ns);
    Ok(MergingGain { direct, complement, closed_form })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn spec(etas: &[f64]) -> BroadcastChannelSpec {
        BroadcastChannelSpec::new(etas.to_vec()).unwrap()
    }

    fn set(idx: &[usize], m: usize) -> ReceiverSet {
        ReceiverSet::from_indices(idx, m).unwrap()
    }

    #[test]
    fn receiver_set_basics() {
        let t = set(&[1, 3], 3);
        assert_eq!(t.mask(), 0b101);
        assert_eq!(t.indices(), vec![1, 3]);
        assert_eq!(t.complement(3), set(&[2], 3));
        assert_eq!(t.to_string(), "{B1,B3}");
        assert!(ReceiverSet::from_indices(&[0], 3).is_err());
        assert!(ReceiverSet::from_indices(&[4], 3).is_err());
    }

    #[test]
    fn inner_bound_values() {
        let s = spec(&[0.2, 0.3]);
        for mask in 1..4 {
            assert_eq!(inner_bound_finite(&s, 0.0, ReceiverSet(mask)).unwrap(), 0.0);
        }
        // g(0.7) - g(0.5)
        assert_abs_diff_eq!(inner_bound_finite(&s, 1.0, set(&[1], 2)).unwrap(), 0.284_166_538_716_157, epsilon = 1e-12);
        assert!(inner_bound_finite(&s, 1.0, ReceiverSet::empty()).is_err());
        assert!(inner_bound_finite(&s, 1.0, set(&[1, 2], 2).with(5)).is_err());
        assert!(inner_bound_finite(&s, -1.0, set(&[1], 2)).is_err());
    }

    #[test]
    fn inner_bound_two_routes_agree() {
        let s = spec(&[0.2, 0.3]);
        for &ns in &[0.1, 1.0, 7.5, 100.0] {
            for mask in 1..4 {
                let t = ReceiverSet(mask);
                let a = inner_bound_finite(&s, ns, t).unwrap();
                let b = inner_bound_gaussian(&s, ns, t).unwrap();
                assert_abs_diff_eq!(a, b, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn asymptotic_values() {
        let s = spec(&[0.2, 0.3]);
        assert_abs_diff_eq!(
            asymptotic_bound(&s, set(&[1], 2)).unwrap().finite().unwrap(),
            1.4f64.log2(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            asymptotic_bound(&s, set(&[2], 2)).unwrap().finite().unwrap(),
            1.6f64.log2(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(asymptotic_bound(&s, set(&[1, 2], 2)).unwrap().finite().unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(asymptotic_bound(&spec(&[0.5]), set(&[1], 1)).unwrap(), Bound::Finite(1.0));
    }

    #[test]
    fn asymptotic_unbounded_edge() {
        let s = spec(&[0.6, 0.4, 0.0]);
        assert_eq!(asymptotic_bound(&s, set(&[1], 3)).unwrap(), Bound::Unbounded);
        assert_eq!(asymptotic_bound(&s, set(&[3], 3)).unwrap(), Bound::Finite(0.0));
        let region = capacity_region(&s, Energy::Unconstrained).unwrap();
        assert!(!region.is_bounded());
        assert!(region.contains(&RatePoint::new(vec![1e6, 1e6, 0.0])).unwrap());
        assert!(!region.contains(&RatePoint::new(vec![1.0, 1.0, 0.1])).unwrap());
        assert_eq!(region.vertices().unwrap_err(), Error::UnboundedRegion);
    }

    #[test]
    fn point_to_point_reduction() {
        let eta = 0.37;
        let s = spec(&[eta, 0.0, 0.0]);
        let region = capacity_region(&s, Energy::Unconstrained).unwrap();
        for c in region.constraints() {
            let expect = if c.subset.contains(0) { -(1.0 - eta).log2() } else { 0.0 };
            assert_abs_diff_eq!(c.bound.finite().unwrap(), expect, epsilon = 1e-15);
        }
    }

    #[test]
    fn finite_region_strictly_inside() {
        let s = spec(&[0.2, 0.3, 0.1]);
        let inf = capacity_region(&s, Energy::Unconstrained).unwrap();
        let fin = capacity_region(&s, Energy::Finite(5.0)).unwrap();
        for (a, b) in fin.constraints().iter().zip(inf.constraints()) {
            assert!(a.bound.finite().unwrap() < b.bound.finite().unwrap());
        }
    }

    #[test]
    fn region_size_guard() {
        let s = spec(&[0.01; 21]);
        assert!(matches!(capacity_region(&s, Energy::Unconstrained), Err(Error::TooManyReceivers { .. })));
    }

    #[test]
    fn membership() {
        let r = capacity_region(&spec(&[0.2, 0.3]), Energy::Unconstrained).unwrap();
        assert!(r.contains(&RatePoint::new(vec![0.0, 0.0])).unwrap());
        assert!(r.contains(&RatePoint::new(vec![1.4f64.log2(), 1.0 - 1.4f64.log2()])).unwrap());
        assert!(!r.contains(&RatePoint::new(vec![0.5, 0.6])).unwrap());
        assert!(!r.contains(&RatePoint::new(vec![-0.1, 0.0])).unwrap());
        assert!(r.contains(&RatePoint::new(vec![0.1])).is_err());
    }

    #[test]
    fn pentagon_vertices() {
        let r = capacity_region(&spec(&[0.2, 0.3]), Energy::Unconstrained).unwrap();
        let v = r.vertices().unwrap();
        let (f1, f2) = (1.4f64.log2(), 1.6f64.log2());
        let expect = [[0.0, 0.0], [0.0, f2], [1.0 - f2, f2], [f1, 0.0], [f1, 1.0 - f1]];
        assert_eq!(v.len(), 5);
        for (got, want) in v.iter().zip(expect) {
            assert_abs_diff_eq!(got.rates[0], want[0], epsilon = 1e-15);
            assert_abs_diff_eq!(got.rates[1], want[1], epsilon = 1e-15);
            assert!(r.contains(got).unwrap());
        }
        for p in &v[1..] {
            assert!(!r.tight_constraints(p, 1e-12).unwrap().is_empty());
        }
    }

    #[test]
    fn segment_vertices() {
        let r = capacity_region(&spec(&[0.5]), Energy::Unconstrained).unwrap();
        let v = r.vertices().unwrap();
        assert_eq!(v, vec![RatePoint::new(vec![0.0]), RatePoint::new(vec![1.0])]);
    }

    #[test]
    fn boundary_pentagon() {
        let r = capacity_region(&spec(&[0.2, 0.3]), Energy::Unconstrained).unwrap();
        let b = r.boundary_2d(50).unwrap();
        let (f1, f2) = (1.4f64.log2(), 1.6f64.log2());
        assert_eq!(b.first().unwrap().rates, vec![0.0, f2]);
        assert_eq!(b.last().unwrap().rates, vec![f1, 0.0]);
        for corner in [[1.0 - f2, f2], [f1, 1.0 - f1]] {
            assert!(b.iter().any(|p| (p.rates[0] - corner[0]).abs() < 1e-15 && (p.rates[1] - corner[1]).abs() < 1e-15));
        }
        for w in b.windows(2) {
            assert!(w[1].rates[0] >= w[0].rates[0]);
        }
        for p in &b {
            assert!(r.contains(p).unwrap());
            assert!(!r.tight_constraints(p, 1e-12).unwrap().is_empty());
        }
        assert!(r.boundary_2d(1).is_err());
        let r3 = capacity_region(&spec(&[0.2, 0.3, 0.1]), Energy::Unconstrained).unwrap();
        assert!(r3.boundary_2d(10).is_err());
    }

    #[test]
    fn boundary_without_sum_face() {
        let r = capacity_region(&spec(&[0.3, 0.0]), Energy::Unconstrained).unwrap();
        let b = r.boundary_2d(10).unwrap();
        let f1 = -(0.7f64).log2();
        assert!(b.iter().all(|p| p.rates[1] == 0.0));
        assert_abs_diff_eq!(b.last().unwrap().rates[0], f1, epsilon = 1e-15);
    }

    #[test]
    fn merging_gain_cases() {
        let s = spec(&[0.2, 0.3]);
        let g = merging_gain(&s, 1.0, set(&[2], 2), set(&[1], 2)).unwrap();
        // g(0.8) - g(0.5)
        assert_abs_diff_eq!(g.closed_form, 0.406_493_156_627_066, epsilon = 1e-12);
        assert_abs_diff_eq!(g.direct, g.closed_form, epsilon = 1e-9);
        assert!(g.discrepancy() < 1e-9);

        let all = merging_gain(&s, 1.0, ReceiverSet::all(2), ReceiverSet::empty()).unwrap();
        assert_abs_diff_eq!(all.bits(), inner_bound_finite(&s, 1.0, ReceiverSet::all(2)).unwrap(), epsilon = 1e-9);

        let zero = merging_gain(&s, 0.0, set(&[1], 2), ReceiverSet::empty()).unwrap();
        assert_abs_diff_eq!(zero.bits(), 0.0, epsilon = 1e-12);

        assert!(merging_gain(&s, 1.0, set(&[1], 2), set(&[1], 2)).is_err());
        assert!(merging_gain(&s, 1.0, ReceiverSet::empty(), set(&[1], 2)).is_err());
    }

    #[test]
    fn region_json_shape() {
        let r = capacity_region(&spec(&[0.2, 0.3]), Energy::Unconstrained).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["m"], 2);
        assert_eq!(v["energy"], "unconstrained");
        assert_eq!(v["constraints"][2]["subset"], serde_json::json!([1, 2]));
        assert_eq!(v["constraints"][2]["bound_bits"], 1.0);
        let back: CapacityRegion = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);

        let fin = capacity_region(&spec(&[0.2, 0.3]), Energy::Finite(0.5)).unwrap();
        let text = serde_json::to_string(&fin).unwrap();
        assert!(text.contains(r#""energy":{"ns":0.5}"#));

        let unb = capacity_region(&spec(&[0.6, 0.4]), Energy::Unconstrained).unwrap();
        let text = serde_json::to_string(&unb).unwrap();
        assert!(text.contains(r#""unbounded":true"#));
        assert!(!text.contains("inf"));
        assert_eq!(serde_json::from_str::<CapacityRegion>(&text).unwrap(), unb);

        assert!(serde_json::from_str::<CapacityRegion>(r#"{"m":1,"energy":"unconstrained","constraints":[]}"#).is_err());
    }

    #[test]
    fn energy_parsing() {
        assert_eq!(Energy::parse("inf").unwrap(), Energy::Unconstrained);
        assert_eq!(Energy::parse("0.5").unwrap(), Energy::Finite(0.5));
        assert!(Energy::parse("-1").is_err());
        assert!(Energy::parse("abc").is_err());
    }
}
