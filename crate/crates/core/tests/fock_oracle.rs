mod common;

use bbc_capacity::fock::{schmidt_weight, TruncationBudget};
use bbc_capacity::{
    channel_output_fock, entropy_fock, output_state_tmsv, tmsv_fock, verify_conditional_entropies,
    verify_conditional_entropies_with, BroadcastChannelSpec, Error, ModeLabel, SplitOrdering,
};
use common::{g_direct, random_spec};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

#[test]
fn random_mode_splits_agree_with_covariance_entropies() {
    let mut rng = StdRng::seed_from_u64(21);
    for _ in 0..12 {
        let m = rng.gen_range(1..=3);
        let spec = random_spec(&mut rng, m, 0.02, 0.6, 0.95);
        let ns = rng.gen_range(0.05..1.0);
        let budget = TruncationBudget::choose(ns).unwrap();
        let orderings = SplitOrdering::all(m).unwrap();
        let ordering = &orderings[rng.gen_range(0..orderings.len())];
        let fock = channel_output_fock(&spec, ordering, ns, budget.cutoff).unwrap();
        let gauss = output_state_tmsv(&spec, ns, ordering).unwrap();
        let labels = gauss.labels().to_vec();
        for mask in 1u32..(1 << labels.len()) - 1 {
            let part: Vec<ModeLabel> =
                (0..labels.len()).filter(|i| mask >> i & 1 == 1).map(|i| labels[i].clone()).collect();
            let rho = fock.reduce_density(&part).unwrap();
            let hf = entropy_fock(&rho).unwrap();
            let hg = gauss.entropy_of(&part).unwrap();
            assert!((hf.bits - hg).abs() < 1e-6, "{:?} ns={ns} {part:?}: {} vs {hg}", spec.etas(), hf.bits);
            assert!(hf.uncertainty < 1e-6);
        }
    }
}

#[test]
fn splitting_conserves_norm_and_photons() {
    let mut state = tmsv_fock(0.6, 24).unwrap();
    let before = state.norm_sqr();
    for (j, eta) in [0.7, 0.4, 0.9].into_iter().enumerate() {
        state = state.split_with_vacuum(&"A'".into(), eta, ModeLabel::new(format!("X{j}"))).unwrap();
        assert!((state.norm_sqr() - before).abs() < 1e-13);
        assert_eq!(state.photon_balance_violation(), 0);
    }
    assert!((1.0 - before) < 1e-10);
}

#[test]
fn single_photon_split_amplitudes() {
    // |1> on A' split with eta = 0.5: sqrt(0.5) stays, sqrt(0.5) moves over.
    let state = tmsv_fock(0.3, 1).unwrap().split_with_vacuum(&"A'".into(), 0.5, "B".into()).unwrap();
    let a1 = state.amplitude(&[1, 1, 0]);
    let b1 = state.amplitude(&[1, 0, 1]);
    assert!((a1 - b1).abs() < 1e-15);
    assert!(a1 > 0.0);
}

#[test]
fn thermal_marginal_spectrum() {
    let ns = 0.8;
    let state = tmsv_fock(ns, 40).unwrap();
    let rho = state.reduce_density(&["A".into()]).unwrap();
    for (k, &v) in rho.eigenvalues().iter().take(10).enumerate() {
        assert!((v - schmidt_weight(ns, k)).abs() < 1e-12);
    }
    assert!((entropy_fock(&rho).unwrap().bits - g_direct(ns)).abs() < 1e-8);
}

#[test]
fn verification_reports_pass_for_all_orderings() {
    let spec = BroadcastChannelSpec::new(vec![0.2, 0.3]).unwrap();
    let cutoff = TruncationBudget::choose(0.5).unwrap().cutoff;
    for ordering in SplitOrdering::all(2).unwrap() {
        let report = verify_conditional_entropies_with(&spec, &ordering, 0.5, cutoff).unwrap();
        assert!(report.pass, "{ordering}");
        assert!(report.max_abs_dev < 1e-6);
    }
    let json = serde_json::to_value(verify_conditional_entropies(&spec, 0.5, 25).unwrap()).unwrap();
    let case = &json["cases"][0];
    for key in ["case", "gaussian_bits", "fock_bits", "closed_form_bits", "abs_dev", "tail_mass", "pass"] {
        assert!(!case[key].is_null(), "missing {key}");
    }
}

#[test]
fn small_cutoff_is_inconclusive() {
    let spec = BroadcastChannelSpec::new(vec![0.2, 0.3]).unwrap();
    assert!(matches!(verify_conditional_entropies(&spec, 1.0, 10), Err(Error::Inconclusive(_))));
    assert!(matches!(TruncationBudget::choose(50.0), Err(Error::Inconclusive(_))));
}

#[test]
fn oracle_refuses_many_receivers() {
    let spec = BroadcastChannelSpec::new(vec![0.1; 4]).unwrap();
    assert!(matches!(
        channel_output_fock(&spec, &SplitOrdering::env_first(4), 0.2, 10),
        Err(Error::TooManyReceivers { .. })
    ));
}
