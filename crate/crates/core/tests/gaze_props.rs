mod oracles;

use proptest::prelude::*;
use voxanchor_core::gaze::{assign_to_passages, detect_fixations, extract_saccades, IdtConfig};
use voxanchor_core::layout::{DocGazeSample, Page, PageLayout, Passage};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn idt_matches_reference(seed in any::<u64>(), strict in any::<bool>()) {
        let trace = oracles::random_trace(&mut oracles::rng(seed), 200);
        let cfg = if strict { IdtConfig::BASELINE } else { IdtConfig::PIPELINE };
        let got = detect_fixations(&trace, &cfg);
        let want = oracles::idt_reference(&trace, cfg.dispersion_threshold, cfg.duration_threshold);
        prop_assert_eq!(oracles::same_fixations(&got, &want, 1e-9), Ok(()));
    }

    #[test]
    fn fixations_are_ordered_and_within_limits(seed in any::<u64>()) {
        let trace = oracles::random_trace(&mut oracles::rng(seed), 200);
        let cfg = IdtConfig::PIPELINE;
        let f = detect_fixations(&trace, &cfg);
        for w in f.windows(2) {
            prop_assert!(w[0].end <= w[1].start);
        }
        for fix in &f {
            prop_assert!(fix.duration() >= cfg.duration_threshold);
        }
        let s = extract_saccades(&f);
        prop_assert_eq!(s.len(), f.len().saturating_sub(1));
        for sac in &s {
            prop_assert!(sac.duration >= 1 && sac.length >= 0.0 && sac.velocity >= 0.0);
        }
    }

    #[test]
    fn assignment_picks_a_nearest_passage(cx in -100.0..1100.0f64, cy in -100.0..1400.0f64) {
        let layout = PageLayout::new(vec![Page {
            page: 1,
            w: 960.0,
            h: 1280.0,
            passages: vec![
                Passage { id: 5, page: 1, x: 80.0, y: 80.0, w: 500.0, h: 112.0 },
                Passage { id: 2, page: 1, x: 100.0, y: 240.0, w: 700.0, h: 56.0 },
                Passage { id: 9, page: 1, x: 80.0, y: 340.0, w: 400.0, h: 140.0 },
            ],
        }]).unwrap();
        let fix = voxanchor_core::gaze::Fixation { start: 0, end: 100, cx, cy, page: 1, passage_id: None, samples: 10 };
        let got = assign_to_passages(&[fix], &layout).unwrap()[0].passage_id.unwrap();
        let d = |id: u32| layout.passage(id).unwrap().distance_to(cx, cy);
        for p in layout.passages() {
            prop_assert!(d(got) <= d(p.id));
        }
    }
}

#[test]
fn reference_agrees_on_hand_trace() {
    let s: Vec<DocGazeSample> = (0..30)
        .map(|i| DocGazeSample { t: i * 10, page: 1, x: if i < 15 { 5.0 } else { 100.0 }, y: 0.0, on_screen: true })
        .collect();
    let want = oracles::idt_reference(&s, 25.0, 100);
    assert_eq!(want.len(), 2);
    assert_eq!(oracles::same_fixations(&detect_fixations(&s, &IdtConfig::PIPELINE), &want, 0.0), Ok(()));
}
