use pcoh::correlations::{correlated_coherence, discord_estimate, gcc, pure_cc};
use pcoh::metrics::{distance, overlap, Kind};
use pcoh::partialcoh::{
    affinity_partial_coherence, fidelity_partial_coherence, partial_coherence, skew_information_sum,
};
use pcoh::qsdstate::{build_qsd_state, qsd_state_roundtrip};
use pcoh::states::{is_partial_incoherent, random_density, random_pure_with, seeded_rng};
use pcoh::{BipartiteState64, DensityMatrix64, Ensemble64, Exactness};
use proptest::prelude::*;

fn bipartite(n_a: usize, n_b: usize, seed: u64) -> BipartiteState64 {
    BipartiteState64::new(random_density(n_a * n_b, n_a * n_b, seed).unwrap(), n_a, n_b).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn distances_symmetric_and_ordered(d in 1usize..=6, r1 in 1usize..=6, r2 in 1usize..=6, seed in any::<u64>()) {
        let a = random_density::<f64>(d, r1.min(d), seed).unwrap();
        let b = random_density::<f64>(d, r2.min(d), seed ^ 3).unwrap();
        for kind in Kind::ALL {
            prop_assert!((distance(&a, &b, kind).unwrap() - distance(&b, &a, kind).unwrap()).abs() <= 1e-10);
        }
        prop_assert!(overlap(Kind::Affinity, &a, &b).unwrap() <= overlap(Kind::Fidelity, &a, &b).unwrap() + 1e-9);
    }

    #[test]
    fn coherence_ordering_and_cpis(n_b in 1usize..=3, seed in any::<u64>()) {
        let rho = bipartite(2, n_b, seed);
        let f = fidelity_partial_coherence(&rho).unwrap();
        let a = affinity_partial_coherence(&rho).unwrap();
        prop_assert!(f.value <= a.value + 1e-9);
        prop_assert_eq!(f.exactness, Exactness::Exact);
        for rep in [&f, &a] {
            prop_assert!(is_partial_incoherent(&rho.with_state(rep.cpis.clone()).unwrap(), 1e-8));
            prop_assert!((rep.witness_distance - rep.value).abs() <= 1e-8);
        }
        prop_assert!((a.value - skew_information_sum(&rho).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn embedding_is_a_state(n in 1usize..=4, m in 1usize..=4, seed in any::<u64>()) {
        let rng = &mut seeded_rng(seed);
        let w: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
        let s: f64 = w.iter().sum();
        let members = w.iter().map(|x| (x / s, pcoh::states::random_density_with(m, 1 + (seed as usize) % m, rng).unwrap())).collect();
        let e = Ensemble64::new(members).unwrap();
        let rho = build_qsd_state(&e).unwrap();
        prop_assert!((rho.matrix().trace_re() - 1.0).abs() <= 1e-10);
        prop_assert!(qsd_state_roundtrip(&e).unwrap().passed);
    }
}

#[test]
fn correlated_coherence_bounds() {
    for seed in 0..6 {
        let rho = bipartite(2, 2, seed);
        for kind in Kind::ALL {
            let cc = correlated_coherence(&rho, kind, 4, seed).unwrap();
            let dis = discord_estimate(&rho, kind, 4, seed).unwrap();
            assert!(dis.value <= cc.value + 1e-12);
            assert!(gcc(&rho, kind).unwrap() >= -1e-7);
        }
    }
}

#[test]
fn pure_states_match_closed_forms() {
    for seed in 0..5 {
        let psi = random_pure_with::<f64, _>(6, &mut seeded_rng(seed));
        let rho = BipartiteState64::from_pure(&psi, 2, 3).unwrap();
        for kind in Kind::ALL {
            let closed = pure_cc(&psi, 2, 3, kind).unwrap();
            let searched = correlated_coherence(&rho, kind, 4, seed).unwrap().value;
            assert!((closed - searched).abs() <= 1e-5, "{kind:?}: {closed} vs {searched}");
        }
    }
}

#[test]
fn incoherent_states_score_zero() {
    let rho = DensityMatrix64::maximally_mixed(6);
    let b = BipartiteState64::new(rho, 3, 2).unwrap();
    for kind in Kind::ALL {
        assert!(partial_coherence(&b, kind).unwrap().value.abs() <= 1e-9);
    }
}
