mod common;

use bridgegraph_core::hetgraph::{ClosureMask, HeteroGraph};
use bridgegraph_core::scoring::{
    composite_score, green_space_score, hospital_access_score, isolation_risk_score, score_all,
    supply_chain_score, transit_desert_score, IndicatorParams, ScoringContext, WeightVector,
};
use common::{oracle, toy};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 7;

fn single(h: &HeteroGraph) -> usize {
    assert_eq!(h.bridges.len(), 1);
    assert!(!h.bridges[0].snap_failed());
    0
}

#[test]
fn transit_toy_counts_one_affected_residence() {
    let h = toy::transit_toy();
    let b = single(&h);
    let p = IndicatorParams::default();
    // r1 detours +600 m (> 500), r2 +100 m: one of N_norm = 500.
    assert!((transit_desert_score(&h, b, &p, SEED) - 0.2).abs() < 1e-9);
}

#[test]
fn hospital_toy_detour() {
    let h = toy::hospital_toy();
    let b = single(&h);
    let p = IndicatorParams::default();
    // (500 - 100) / (1 residence * 1000 m) * 100.
    assert!((hospital_access_score(&h, b, &p, SEED) - 40.0).abs() < 1e-9);
}

#[test]
fn isolation_toy_population_share() {
    let h = toy::isolation_toy();
    let b = single(&h);
    let p = IndicatorParams::default();
    assert!((isolation_risk_score(&h, b, &p, SEED) - 10.0).abs() < 1e-9);
}

#[test]
fn supply_toy_food_and_base_weights() {
    let p = IndicatorParams::default();
    let food = toy::supply_toy("supermarket");
    let other = toy::supply_toy("clothes");
    // 200 m detour over 1000 m, weighted 1.5 or 1.0.
    assert!((supply_chain_score(&food, single(&food), &p, SEED) - 30.0).abs() < 1e-9);
    assert!((supply_chain_score(&other, single(&other), &p, SEED) - 20.0).abs() < 1e-9);
}

#[test]
fn green_toy_rank_weighted() {
    let h = toy::green_toy();
    let b = single(&h);
    let p = IndicatorParams::default();
    // (100 / 1 + 200 / 2) / 1000 * 100.
    assert!((green_space_score(&h, b, &p, SEED) - 20.0).abs() < 1e-9);
}

#[test]
fn toys_agree_with_oracle() {
    let p = IndicatorParams::default();
    for h in [
        toy::transit_toy(),
        toy::hospital_toy(),
        toy::isolation_toy(),
        toy::supply_toy("supermarket"),
        toy::green_toy(),
    ] {
        let mask = h.closure_mask(0).unwrap();
        let ctx = ScoringContext::new(&h, &p, SEED);
        let got = ctx.indicators(0, &mask);
        let want = oracle::indicators(&h, 0, &mask, &p);
        for i in 0..5 {
            assert!((got[i] - want[i]).abs() < 1e-9, "indicator {i}: {} vs {}", got[i], want[i]);
        }
    }
}

#[test]
fn composite_of_reported_means() {
    let c = composite_score([8.72, 4.38, 17.24, 0.65, 4.19], &WeightVector::equal());
    assert!((c - 7.036).abs() < 0.005);
}

#[test]
fn empty_mask_scores_zero() {
    let p = oracle::small_params();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let n = rng.gen_range(4..25);
        let h = oracle::random_hetero(&mut rng, n);
        let ctx = ScoringContext::new(&h, &p, SEED);
        for b in 0..h.bridges.len() {
            assert_eq!(ctx.indicators(b, &ClosureMask::empty()), [0.0; 5]);
        }
    }
}

#[test]
fn scores_stay_in_range() {
    // Tiny normalizers push raw values far past 100.
    let mut p = oracle::small_params();
    p.transit.n_norm = 0.5;
    p.hospital.d_norm_m = 1.0;
    p.supply.d_norm_m = 1.0;
    p.green.d_norm_m = 1.0;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let n = rng.gen_range(4..25);
        let h = oracle::random_hetero(&mut rng, n);
        let report = score_all(&h, &p, &WeightVector::equal(), SEED);
        for card in &report.cards {
            for s in card.indicators().into_iter().chain([card.composite]) {
                assert!((0.0..=100.0).contains(&s), "{s}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matches_floyd_warshall_oracle(seed in any::<u64>(), n in 3usize..26) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = oracle::random_hetero(&mut rng, n);
        let p = oracle::small_params();
        let ctx = ScoringContext::new(&h, &p, SEED);
        for b in 0..h.bridges.len() {
            let mask = h.closure_mask(b).unwrap();
            let got = ctx.indicators(b, &mask);
            let want = oracle::indicators(&h, b, &mask, &p);
            for i in 0..5 {
                prop_assert!((got[i] - want[i]).abs() < 1e-9, "bridge {} indicator {}: {} vs {}", b, i, got[i], want[i]);
            }
        }
        // Arbitrary masks exercise paths that do not touch a bridge.
        let mask = ClosureMask::from_edges(oracle::random_mask(&mut rng, &h, 0.2));
        let got = ctx.indicators(0, &mask);
        let want = oracle::indicators(&h, 0, &mask, &p);
        for i in 0..5 {
            prop_assert!((got[i] - want[i]).abs() < 1e-9, "random mask indicator {}: {} vs {}", i, got[i], want[i]);
        }
    }

    #[test]
    fn closing_more_never_lowers_a_score(seed in any::<u64>(), n in 3usize..26, p1 in 0.0f64..0.3, p2 in 0.0f64..0.3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = oracle::random_hetero(&mut rng, n);
        let p = oracle::small_params();
        let ctx = ScoringContext::new(&h, &p, SEED);
        let small = oracle::random_mask(&mut rng, &h, p1);
        let extra = oracle::random_mask(&mut rng, &h, p2);
        let m = ClosureMask::from_edges(small.clone());
        let m2 = ClosureMask::from_edges(small.into_iter().chain(extra));
        prop_assert!(m.is_subset_of(&m2));
        let b = rng.gen_range(0..h.bridges.len());
        let lo = ctx.indicators(b, &m);
        let hi = ctx.indicators(b, &m2);
        for i in 0..5 {
            prop_assert!(hi[i] >= lo[i] - 1e-12, "indicator {}: {} then {}", i, lo[i], hi[i]);
        }
    }
}

#[test]
fn random_graphs_exercise_every_indicator() {
    let p = oracle::small_params();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut nonzero = [0usize; 5];
    for _ in 0..60 {
        let n = rng.gen_range(3..26);
        let h = oracle::random_hetero(&mut rng, n);
        let ctx = ScoringContext::new(&h, &p, SEED);
        for b in 0..h.bridges.len() {
            let s = ctx.indicators(b, &h.closure_mask(b).unwrap());
            for i in 0..5 {
                nonzero[i] += (s[i] > 0.0) as usize;
            }
        }
    }
    assert!(nonzero.iter().all(|&c| c > 0), "{nonzero:?}");
}
