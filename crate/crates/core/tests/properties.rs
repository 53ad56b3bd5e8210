//! Property tests for the stochastic-process invariants.

use proptest::prelude::*;

use bootperc_core::analytic::{
    log_prob_diagonal, log_prob_schedule, AnalyticContext, LogProb,
};
use bootperc_core::dynamics::{closure, infection_times, infection_times_dijkstra, ModelKind};
use bootperc_core::events::{
    enumerate_good_schedules, reconstruct_schedule, witness_configuration, FamilySpec,
    Placement,
};
use bootperc_core::lattice::{is_occupied, Configuration, Rect, SampleSpec, Site};

fn arb_model() -> impl Strategy<Value = ModelKind> {
    prop_oneof![Just(ModelKind::Modified), Just(ModelKind::Classical)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sampling_is_deterministic_and_restricts(
        seed in any::<u64>(),
        p in 0.0f64..=1.0,
    ) {
        let region = Rect::new(-3, -2, 8, 7).unwrap();
        let spec = SampleSpec::new(p, seed, region).unwrap();
        let full = Configuration::sample(&spec);
        prop_assert_eq!(&full, &Configuration::sample(&spec));

        let sub_rect = Rect::new(0, 0, 5, 4).unwrap();
        let sub = Configuration::sample(&SampleSpec::new(p, seed, sub_rect).unwrap());
        for s in sub_rect.iter() {
            prop_assert_eq!(sub.contains(s), full.contains(s));
        }
    }

    #[test]
    fn closure_laws(seed in any::<u64>(), p in 0.05f64..0.35, model in arb_model()) {
        let domain = Rect::new(0, 0, 14, 14).unwrap();
        let cfg = Configuration::sample(&SampleSpec::new(p, seed, domain).unwrap());
        let closed = closure(&cfg, model);
        prop_assert!(cfg.is_subset_of(&closed));
        prop_assert_eq!(closure(&closed, model), closed.clone());

        // Monotone in the seed set.
        let extra = Configuration::sample(
            &SampleSpec::new(0.1, seed ^ 0xABCD, domain).unwrap(),
        );
        let mut bigger = cfg.clone();
        for s in extra.iter_infected() {
            bigger.insert(s);
        }
        prop_assert!(closed.is_subset_of(&closure(&bigger, model)));

        // Modified is dominated by classical.
        prop_assert!(
            closure(&cfg, ModelKind::Modified).is_subset_of(&closure(&cfg, ModelKind::Classical))
        );
    }

    #[test]
    fn occupancy_is_monotone(seed in any::<u64>(), x in 0i32..10, y in 0i32..10) {
        let domain = Rect::new(0, 0, 9, 9).unwrap();
        let mut cfg = Configuration::sample(&SampleSpec::new(0.2, seed, domain).unwrap());
        let rects: Vec<Rect> = (0..8)
            .map(|i| Rect::new(i, 0, i + 1, 9).unwrap())
            .collect();
        let before: Vec<bool> = rects.iter().map(|r| is_occupied(&cfg, r).unwrap()).collect();
        cfg.insert(Site::new(x, y));
        for (rect, was) in rects.iter().zip(before) {
            if was {
                prop_assert!(is_occupied(&cfg, rect).unwrap());
            }
        }
    }

    #[test]
    fn round_and_queue_infection_times_agree(
        seed in any::<u64>(),
        p in 0.05f64..0.4,
        model in arb_model(),
    ) {
        let domain = Rect::new(0, 0, 11, 11).unwrap();
        let cfg = Configuration::sample(&SampleSpec::new(p, seed, domain).unwrap());
        prop_assert!(infection_times(&cfg, model) == infection_times_dijkstra(&cfg, model));
    }

    #[test]
    fn diagonal_additivity(
        p in 0.05f64..0.95,
        a in 1u32..20,
        gap1 in 0u32..15,
        gap2 in 0u32..15,
    ) {
        let ctx = AnalyticContext::new(p).unwrap();
        let b = a + gap1;
        let d = b + gap2;
        let split = log_prob_diagonal(&ctx, a, b).unwrap()
            .and(log_prob_diagonal(&ctx, b, d).unwrap());
        let whole = log_prob_diagonal(&ctx, a, d).unwrap();
        prop_assert!(
            (split.value() - whole.value()).abs() <= 1e-9 * (1.0 + whole.value().abs())
        );
    }

    #[test]
    fn schedule_roundtrip_and_probability_decomposition(
        seed in any::<u64>(),
        p in 0.1f64..0.6,
    ) {
        let spec = FamilySpec::new(vec![2, 5, 10], 2, None, 100_000).unwrap();
        let family = enumerate_good_schedules(&spec).unwrap();
        let schedule = family.schedule_at((seed as u128) % family.count());

        // Witness reconstruction returns exactly this schedule.
        let witness = witness_configuration(&schedule, Placement::Seeded(seed));
        prop_assert_eq!(
            reconstruct_schedule(&witness, schedule.start(), schedule.end()),
            Some(schedule.clone())
        );

        // Its log-probability is the sum over its sideways/diagonal parts.
        let ctx = AnalyticContext::new(p).unwrap();
        let total = log_prob_schedule(&ctx, &schedule).unwrap();
        let mut sum = LogProb::ONE;
        let points = schedule.points();
        for w in points.windows(2).enumerate() {
            let (i, pair) = w;
            let part = if i % 2 == 0 {
                bootperc_core::analytic::log_prob_sideways(&ctx, pair[0], pair[1]).unwrap()
            } else {
                log_prob_diagonal(&ctx, pair[0], pair[1]).unwrap()
            };
            sum = sum.and(part);
        }
        prop_assert!((total.value() - sum.value()).abs() < 1e-12);
    }
}
