mod oracles;

use proptest::prelude::*;
use voxanchor_core::audio::RegionOfAnalysis;
use voxanchor_core::features::{featurize_roa, temporal_order, N_FEATURES, TEMPORAL_ORDER};
use voxanchor_core::gaze::extract_saccades;
use voxanchor_core::layout::PageLayout;

fn run(fx: &oracles::FeatureFixture, layout: &PageLayout) -> Vec<voxanchor_core::features::PassageFeatureVector> {
    let roa = RegionOfAnalysis { note_id: 0, roa_start: fx.roa_start, roa_end: fx.roa_end };
    featurize_roa(&roa, fx.note_start, &fx.fixations, &extract_saccades(&fx.fixations), layout, &fx.candidates).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn matches_reference_calculator(seed in any::<u64>()) {
        let fx = oracles::random_feature_fixture(&mut oracles::rng(seed));
        let got = run(&fx, &fx.layout);
        let want = oracles::features_reference(&fx);
        prop_assert_eq!(got.len(), want.len());
        for v in &got {
            let w = &want[&v.passage_id];
            for k in 0..N_FEATURES {
                prop_assert!(oracles::close_rel(v.features[k], w[k], 1e-9), "passage {} feature {}: {} vs {}", v.passage_id, k, v.features[k], w[k]);
            }
        }
    }

    #[test]
    fn vectors_are_well_formed(seed in any::<u64>()) {
        let fx = oracles::random_feature_fixture(&mut oracles::rng(seed));
        for v in run(&fx, &fx.layout) {
            prop_assert!(v.features.iter().all(|f| f.is_finite() && *f >= 0.0));
            for base in [1, 4, 7, 10] {
                let [max, min, avg] = [v.features[base], v.features[base + 1], v.features[base + 2]];
                prop_assert!(min <= avg && avg <= max);
            }
            prop_assert!((0.0..=1.0).contains(&v.features[TEMPORAL_ORDER]));
        }
    }

    #[test]
    fn density_features_scale_inversely_with_area(seed in any::<u64>()) {
        let fx = oracles::random_feature_fixture(&mut oracles::rng(seed));
        let before = run(&fx, &fx.layout);
        // doubling every width doubles every area; no fixation changes passage
        let mut wide = fx.layout.clone();
        for page in &mut wide.pages {
            page.w *= 3.0;
            for p in &mut page.passages {
                p.w *= 2.0;
            }
        }
        let after = run(&fx, &wide);
        for (b, a) in before.iter().zip(&after) {
            for k in [0, 13] {
                prop_assert!(oracles::close_rel(a.features[k] * 2.0, b.features[k], 1e-12));
            }
        }
    }

    #[test]
    fn temporal_order_endpoints(starts in prop::collection::btree_map(0u32..20, prop::collection::vec(0i64..100_000, 0..8), 1..8)) {
        let mut starts = starts;
        for v in starts.values_mut() {
            v.sort();
        }
        let out = temporal_order(&starts, 50_000);
        prop_assert!(out.values().all(|v| (0.0..=1.0).contains(v)));
        let with: Vec<u32> = starts.iter().filter(|(_, s)| !s.is_empty()).map(|(k, _)| *k).collect();
        if !with.is_empty() {
            prop_assert!(with.iter().any(|k| out[k] == 0.0));
        }
        for (k, s) in &starts {
            if s.is_empty() {
                prop_assert_eq!(out[k], 1.0);
            }
        }
    }
}
