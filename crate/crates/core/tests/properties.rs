//! Property tests over the public API.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use linkrec::features::{link_value, utility, ValueConfig};
use linkrec::graph::{neighborhood_counts, snapshot, TemporalGraph};
use linkrec::inference::{rec_probability, top_k_indices};
use linkrec::io::{format_records, load_records, write_atomic};
use linkrec::model::{fit, posterior_density, ClassParams, EmConfig, Theta};
use linkrec::numeric::{ln_unit_exp_mass, unit_exp_mean};
use linkrec::proximity::{adamic_adar, common_neighbors, jaccard_sorted, katz, KatzConfig};
use linkrec::sampling::RecordSampler;
use linkrec::FeatureRecord;

fn rate() -> impl Strategy<Value = f64> {
    (-1.5f64..1.5).prop_map(f64::exp)
}

fn class() -> impl Strategy<Value = ClassParams> {
    prop::array::uniform8(rate()).prop_map(ClassParams::from_rates)
}

fn theta() -> impl Strategy<Value = Theta> {
    (0.05f64..0.95, class(), class()).prop_map(|(p1, a, b)| Theta {
        p: [1.0 - p1, p1],
        class: [a, b],
    })
}

/// Up to 10 users (ids `10 * i`) registered in month 1 with edges in months 1..=2.
fn graph() -> impl Strategy<Value = TemporalGraph> {
    (2usize..10).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n, 1u32..=2), 0..3 * n).prop_map(move |raw| {
            let users = (0..n).map(|i| (10 * i as i64, 1)).collect();
            let mut seen = std::collections::HashSet::new();
            let edges = raw
                .into_iter()
                .filter(|&(a, b, _)| a != b && seen.insert((a.min(b), a.max(b))))
                .map(|(a, b, t)| (10 * a as i64, 10 * b as i64, t))
                .collect();
            TemporalGraph::new(users, edges).expect("valid graph")
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn proximity_scores_are_symmetric(g in graph(), beta in 0.01f64..0.5, k_max in 2usize..6) {
        let view = snapshot(&g, g.last_month()).unwrap();
        let cfg = KatzConfig::new(beta, k_max).unwrap();
        let ids = g.user_ids().to_vec();
        for &a in &ids {
            for &b in &ids {
                if a >= b {
                    continue;
                }
                prop_assert_eq!(common_neighbors(&view, a, b).unwrap(), common_neighbors(&view, b, a).unwrap());
                prop_assert_eq!(adamic_adar(&view, a, b).unwrap(), adamic_adar(&view, b, a).unwrap());
                let (ab, ba) = (katz(&view, a, b, &cfg).unwrap(), katz(&view, b, a, &cfg).unwrap());
                prop_assert!((ab - ba).abs() <= 1e-12 * ab.abs().max(1.0));
                prop_assert!(ab >= 0.0);
            }
        }
    }

    #[test]
    fn jaccard_is_a_bounded_similarity(
        a in prop::collection::btree_set(0u32..30, 0..12),
        b in prop::collection::btree_set(0u32..30, 0..12),
    ) {
        let (a, b): (Vec<u32>, Vec<u32>) = (a.into_iter().collect(), b.into_iter().collect());
        let j = jaccard_sorted(&a, &b);
        prop_assert_eq!(j, jaccard_sorted(&b, &a));
        prop_assert!((0.0..=1.0).contains(&j));
        if !a.is_empty() {
            prop_assert_eq!(jaccard_sorted(&a, &a), 1.0);
        }
    }

    #[test]
    fn neighborhoods_partition_reachable_users(g in graph(), x in 1usize..6) {
        let view = snapshot(&g, g.last_month()).unwrap();
        for &u in g.user_ids() {
            let counts = neighborhood_counts(&view, u, x).unwrap();
            prop_assert!(counts.total() < view.num_present());
            prop_assert_eq!(counts.at(1), view.degree(view.locate(u).unwrap()));
        }
    }

    #[test]
    fn adding_a_link_never_lowers_value(g in graph(), alpha in 0.05f64..0.95, x in 1usize..5) {
        let view = snapshot(&g, g.last_month()).unwrap();
        let cfg = ValueConfig::new(alpha, x).unwrap();
        let ids = g.user_ids().to_vec();
        for (i, &a) in ids.iter().enumerate() {
            for &b in &ids[i + 1..] {
                let (ia, ib) = (view.locate(a).unwrap(), view.locate(b).unwrap());
                if !view.is_adjacent(ia, ib) {
                    prop_assert!(link_value(&view, (a, b), &cfg).unwrap() > 0.0);
                }
            }
        }
    }

    #[test]
    fn utility_signs(v in 0.0f64..100.0, c in 0.0f64..100.0) {
        prop_assert_eq!(utility(v, c, true), v);
        prop_assert_eq!(utility(v, c, false), -c);
    }

    #[test]
    fn top_k_is_sorted_and_breaks_ties_by_pair(
        scores in prop::collection::vec(prop::sample::select(vec![0.0, 0.5, 1.0, 2.0]), 0..40),
        k in 0usize..50,
    ) {
        let pairs: Vec<(i64, i64)> = (0..scores.len() as i64).map(|i| ((i * 7) % 11, i)).collect();
        let top = top_k_indices(&pairs, &scores, k);
        prop_assert_eq!(top.len(), k.min(scores.len()));
        for w in top.windows(2) {
            let (a, b) = (w[0], w[1]);
            prop_assert!(scores[a] > scores[b] || (scores[a] == scores[b] && pairs[a] < pairs[b]));
        }
        // Nothing left out beats the last entry.
        if let Some(&last) = top.last() {
            for i in (0..scores.len()).filter(|i| !top.contains(i)) {
                prop_assert!(scores[i] < scores[last] || (scores[i] == scores[last] && pairs[i] > pairs[last]));
            }
        }
    }

    #[test]
    fn theta_text_round_trips_bitwise(t in theta()) {
        let back = Theta::from_text(&t.to_text(), "mem").unwrap();
        prop_assert_eq!(t.to_array().map(f64::to_bits), back.to_array().map(f64::to_bits));
    }

    #[test]
    fn posterior_is_a_density(t in theta(), s in 0.01f64..5.0, n in 0.01f64..5.0, label: bool) {
        let post = posterior_density(s, n, label, &t, 0).unwrap();
        for (a, b) in post.intervals() {
            if a < b && b.is_finite() {
                for i in 0..=8 {
                    let l = a + (b - a) * i as f64 / 8.0;
                    let f = post.eval(l);
                    prop_assert!(f.is_finite() && f >= 0.0);
                }
            }
        }
        prop_assert_eq!(post.eval(-1.0), 0.0);
    }

    #[test]
    fn recommendation_probability_is_a_probability(t in theta(), v in 0.01f64..5.0, c in 0.01f64..5.0, s in 0.01f64..5.0, n in 0.01f64..5.0) {
        let rec = FeatureRecord::floored((1, 2), v, c, s, n);
        let p = rec_probability(&rec, &t).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn unit_exp_helpers_are_continuous_at_zero(t in -1e-3f64..1e-3) {
        let (inner, outer) = (t * 0.999_999, 1e-3 * t.signum() * 1.000_001);
        prop_assert!((ln_unit_exp_mass(inner) - ln_unit_exp_mass(t)).abs() < 1e-8);
        let edge = 1e-3 * t.signum();
        prop_assert!((ln_unit_exp_mass(outer) - ln_unit_exp_mass(edge)).abs() < 1e-8);
        prop_assert!((unit_exp_mean(outer) - unit_exp_mean(edge)).abs() < 1e-8);
        prop_assert!(unit_exp_mean(t) > 0.0 && unit_exp_mean(t) < 1.0);
    }
}

#[test]
fn records_round_trip_through_csv() {
    let theta = Theta {
        p: [0.6, 0.4],
        class: [
            ClassParams::from_rates([1.0; 8]),
            ClassParams::from_rates([2.0; 8]),
        ],
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut records = RecordSampler::new(&theta)
        .unwrap()
        .sample_many(50, &mut rng)
        .unwrap();
    records[0].label = None;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("records.csv");
    write_atomic(&path, format_records(&records).as_bytes()).unwrap();
    assert_eq!(load_records(&path).unwrap(), records);
}

#[test]
fn em_never_decreases_loglik_on_small_data() {
    let theta = Theta {
        p: [0.5, 0.5],
        class: [
            ClassParams::from_rates([1.0, 0.5, 2.0, 1.0, 1.5, 0.8, 1.2, 0.7]),
            ClassParams::from_rates([0.4, 1.5, 0.8, 2.0, 0.6, 1.6, 0.5, 1.5]),
        ],
    };
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let records = RecordSampler::new(&theta)
        .unwrap()
        .sample_many(300, &mut rng)
        .unwrap();
    let res = fit(
        &records,
        &EmConfig {
            seed: 4,
            ..EmConfig::default()
        },
    )
    .unwrap();
    for trace in res.traces.iter().flatten() {
        for w in trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "{} -> {}", w[0], w[1]);
        }
    }
}
