//! LOCC-assisted entanglement and secret-key capacity regions of the 1-to-m
//! pure-loss bosonic broadcast channel.
//!
//! * [`gaussian`]: covariance-matrix states, beam splitters and entropies
//!   (vacuum covariance = identity).
//! * [`channel`]: the channel as a cascade of beam splitters, in any split
//!   ordering.
//! * [`region`]: finite-energy inner bounds, the unconstrained region, its
//!   vertices and 2-D boundary.
//! * [`fock`]: an independent truncated number-basis oracle for the entropies.
//! * [`cli`]: the `bbc-capacity` command line.

pub mod channel;
pub mod cli;
pub mod error;
pub mod fock;
pub mod format;
pub mod gaussian;
pub mod region;

pub use channel::{
    apply_channel, build_network, compare_implementations, implementations_equivalent, output_state_tmsv,
    BeamSplitterNetwork, BroadcastChannelSpec, Equivalence, OutputLabel, SplitOrdering, Stage,
};
pub use error::{Error, Result};
pub use fock::{
    channel_output_fock, entropy_fock, schmidt_spectrum_check, tmsv_fock, verify_conditional_entropies,
    verify_conditional_entropies_with, DensityMatrix, FockState, TruncationBudget,
};
pub use gaussian::{beam_splitter, entropy_g, thermal_state, tmsv, CovarianceState, ModeLabel, SymplecticTransform};
pub use region::{
    asymptotic_bound, capacity_region, inner_bound_finite, inner_bound_gaussian, merging_gain, Bound, CapacityRegion,
    Energy, MergingGain, RateConstraint, RatePoint, ReceiverSet,
};
