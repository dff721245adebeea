mod common;

use bbc_capacity::{
    asymptotic_bound, capacity_region, inner_bound_finite, inner_bound_gaussian, Bound, BroadcastChannelSpec,
    CapacityRegion, Energy, RatePoint, ReceiverSet,
};
use common::{all_subsets, brute_force_vertices, random_spec, region_halfspaces, same_point_sets};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn log_grid(lo_exp: i32, hi_exp: i32, per_decade: usize) -> Vec<f64> {
    let steps = (hi_exp - lo_exp) as usize * per_decade;
    (0..=steps).map(|k| 10f64.powf(lo_exp as f64 + k as f64 / per_decade as f64)).collect()
}

#[test]
fn inner_bounds_grow_with_energy() {
    let mut rng = StdRng::seed_from_u64(11);
    let grid = log_grid(-3, 6, 4);
    for _ in 0..30 {
        let m = rng.gen_range(1..=5);
        let spec = random_spec(&mut rng, m, 0.01, 0.6, 0.97);
        for t in all_subsets(m) {
            let values: Vec<f64> = grid.iter().map(|&ns| inner_bound_finite(&spec, ns, t).unwrap()).collect();
            assert!(values.windows(2).all(|w| w[1] >= w[0]), "{:?} {t}", spec.etas());
            let limit = asymptotic_bound(&spec, t).unwrap().finite().unwrap();
            assert!(values.iter().all(|&v| v <= limit + 1e-12));
        }
    }
}

#[test]
fn gap_to_unconstrained_bound_shrinks_on_log_grid() {
    let mut rng = StdRng::seed_from_u64(12);
    let grid = log_grid(0, 6, 1);
    for _ in 0..30 {
        let spec = random_spec(&mut rng, 3, 0.02, 0.4, 0.9);
        for t in all_subsets(3) {
            let limit = asymptotic_bound(&spec, t).unwrap().finite().unwrap();
            let gaps: Vec<f64> = grid.iter().map(|&ns| limit - inner_bound_finite(&spec, ns, t).unwrap()).collect();
            assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
            assert!(gaps.iter().all(|&g| g > 0.0));
            assert!(gaps[4] < 1e-3, "gap at 1e4 is {}", gaps[4]);
        }
    }
}

#[test]
fn closed_form_matches_covariance_entropies() {
    let mut rng = StdRng::seed_from_u64(13);
    for _ in 0..40 {
        let m = rng.gen_range(1..=4);
        let spec = random_spec(&mut rng, m, 0.0, 0.5, 0.95);
        let ns = 10f64.powf(rng.gen_range(-2.0..3.0));
        for t in all_subsets(m) {
            let closed = inner_bound_finite(&spec, ns, t).unwrap();
            let direct = inner_bound_gaussian(&spec, ns, t).unwrap();
            assert!((closed - direct).abs() < 1e-9, "{closed} vs {direct}");
        }
    }
}

fn assert_submodular(region: &CapacityRegion) {
    let m = region.m();
    let rank = |s: ReceiverSet| if s.is_empty() { 0.0 } else { region.bound(s).finite().unwrap() };
    for a in 0..1u32 << m {
        for b in 0..1u32 << m {
            let (sa, sb) = (ReceiverSet::from_mask(a), ReceiverSet::from_mask(b));
            let lhs = rank(sa) + rank(sb);
            let rhs = rank(sa.union(sb)) + rank(ReceiverSet::from_mask(a & b));
            assert!(lhs >= rhs - 1e-10, "f({sa}) + f({sb}) < f(union) + f(intersection)");
        }
    }
}

#[test]
fn bounds_are_monotone_and_submodular() {
    let mut rng = StdRng::seed_from_u64(14);
    for _ in 0..25 {
        let m = rng.gen_range(1..=8);
        let spec = random_spec(&mut rng, m, 0.0, 0.3, 0.98);
        let ns = 10f64.powf(rng.gen_range(-1.0..3.0));
        for energy in [Energy::Finite(ns), Energy::Unconstrained] {
            let region = capacity_region(&spec, energy).unwrap();
            region.check_polymatroid().unwrap();
            assert_submodular(&region);
        }
    }
}

#[test]
fn greedy_vertices_match_brute_force() {
    let mut rng = StdRng::seed_from_u64(15);
    for m in [2, 3] {
        for _ in 0..30 {
            let spec = random_spec(&mut rng, m, 0.0, 0.5, 0.95);
            let energy =
                if rng.gen_bool(0.5) { Energy::Unconstrained } else { Energy::Finite(rng.gen_range(0.1..50.0)) };
            let region = capacity_region(&spec, energy).unwrap();
            let greedy: Vec<Vec<f64>> = region.vertices().unwrap().into_iter().map(|p| p.rates).collect();
            let (a, b) = region_halfspaces(&region);
            let brute = brute_force_vertices(&a, &b, 1e-10);
            assert!(same_point_sets(&greedy, &brute, 1e-9), "{:?}\n{greedy:?}\n{brute:?}", spec.etas());
            for v in &greedy {
                assert!(region.contains(&RatePoint::new(v.clone())).unwrap());
            }
        }
    }
}

#[test]
fn two_receiver_example_vertices() {
    let spec = BroadcastChannelSpec::new(vec![0.2, 0.3]).unwrap();
    let region = capacity_region(&spec, Energy::Unconstrained).unwrap();
    let vs: Vec<Vec<f64>> = region.vertices().unwrap().into_iter().map(|p| p.rates).collect();
    let (c1, c2) = (1.4f64.log2(), 1.6f64.log2());
    let expect = vec![vec![0.0, 0.0], vec![c1, 0.0], vec![0.0, c2], vec![c1, 1.0 - c1], vec![1.0 - c2, c2]];
    assert!(same_point_sets(&vs, &expect, 1e-12), "{vs:?}");
}

#[test]
fn boundary_passes_through_corners_in_order() {
    let spec = BroadcastChannelSpec::new(vec![0.2, 0.3]).unwrap();
    let region = capacity_region(&spec, Energy::Unconstrained).unwrap();
    let pts = region.boundary_2d(200).unwrap();
    assert!(pts.len() >= 200);
    let (c1, c2) = (1.4f64.log2(), 1.6f64.log2());
    for corner in [[0.0, c2], [1.0 - c2, c2], [c1, 1.0 - c1], [c1, 0.0]] {
        assert!(pts.iter().any(|p| (p.rates[0] - corner[0]).abs() < 1e-12 && (p.rates[1] - corner[1]).abs() < 1e-12));
    }
    assert!(pts.windows(2).all(|w| w[1].rates[0] >= w[0].rates[0] - 1e-15 && w[1].rates[1] <= w[0].rates[1] + 1e-15));
    for p in &pts {
        assert!(region.contains(p).unwrap());
        assert!(!region.tight_constraints(p, 1e-9).unwrap().is_empty());
    }
}

#[test]
fn unbounded_and_degenerate_regions() {
    let spec = BroadcastChannelSpec::new(vec![0.4, 0.6]).unwrap();
    let region = capacity_region(&spec, Energy::Unconstrained).unwrap();
    assert!(!region.is_bounded());
    // With no loss to the environment every subset's bound diverges.
    for t in all_subsets(2) {
        assert_eq!(region.bound(t), Bound::Unbounded);
    }
    assert!(region.vertices().is_err());

    let zero = BroadcastChannelSpec::new(vec![0.0, 0.5]).unwrap();
    let region = capacity_region(&zero, Energy::Unconstrained).unwrap();
    assert_eq!(region.bound(ReceiverSet::from_mask(1)), Bound::Finite(0.0));
    assert!(capacity_region(&spec, Energy::Finite(0.0)).unwrap().contains(&RatePoint::new(vec![0.0, 0.0])).unwrap());
}

#[test]
fn json_round_trip_keeps_membership() {
    let mut rng = StdRng::seed_from_u64(16);
    for _ in 0..20 {
        let m = rng.gen_range(1..=4);
        let spec = random_spec(&mut rng, m, 0.01, 0.5, 0.95);
        let region = capacity_region(&spec, Energy::Finite(rng.gen_range(0.1..10.0))).unwrap();
        let back: CapacityRegion = serde_json::from_str(&serde_json::to_string(&region).unwrap()).unwrap();
        assert_eq!(back, region);
        for _ in 0..50 {
            let p = RatePoint::new((0..m).map(|_| rng.gen_range(0.0..1.5)).collect());
            assert_eq!(back.contains(&p).unwrap(), region.contains(&p).unwrap());
        }
    }
}
