//! Property tests over the data-path modules: normalization, encoding,
//! cipher, and key handling.

use proptest::prelude::*;
use qscada_core::cipher::{expand_key, transform, transform_slice, Key};
use qscada_core::dataset::{column_stats, load_dataset, normalize_row, write_dataset, TrafficRow};
use qscada_core::encoding::{encode_features, FeatureVector};

fn feature_vector() -> impl Strategy<Value = FeatureVector> {
    prop::array::uniform6(0.0f64..=1.0).prop_map(|v| FeatureVector::new(v).unwrap())
}

fn key6() -> impl Strategy<Value = Key> {
    prop::collection::vec(any::<bool>(), 6).prop_map(|bits| Key::new(bits).unwrap())
}

fn traffic_rows() -> impl Strategy<Value = Vec<TrafficRow>> {
    prop::collection::vec(
        (
            0u64..=65535,
            0u64..=10_000,
            0u64..=1_000_000,
            0u64..=5_000,
            0u64..=5_000,
            0u64..=500_000,
        ),
        1..20,
    )
    .prop_map(|tuples| {
        tuples
            .into_iter()
            .map(
                |(sport, tot_pkts, tot_bytes, src_pkts, dst_pkts, src_bytes)| TrafficRow {
                    sport,
                    tot_pkts,
                    tot_bytes,
                    src_pkts,
                    dst_pkts,
                    src_bytes,
                },
            )
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn cipher_round_trip_is_tight(fv in feature_vector(), key in key6()) {
        let round = transform(&transform(&fv, &key).unwrap(), &key).unwrap();
        for (r, o) in round.values().iter().zip(fv.values().iter()) {
            prop_assert!((r - o).abs() <= 1e-15);
        }
    }

    #[test]
    fn cipher_output_stays_in_unit_interval(fv in feature_vector(), key in key6()) {
        let out = transform(&fv, &key).unwrap();
        for v in out.values() {
            prop_assert!((0.0..=1.0).contains(v));
        }
    }

    #[test]
    fn expanded_key_cycles(bits in prop::collection::vec(any::<bool>(), 1..12), n in 1usize..64) {
        let key = Key::new(bits.clone()).unwrap();
        let expanded = expand_key(&key, n).unwrap();
        prop_assert_eq!(expanded.len(), n);
        for (i, bit) in expanded.bits().iter().enumerate() {
            prop_assert_eq!(*bit, bits[i % bits.len()]);
        }
    }

    #[test]
    fn transform_slice_agrees_with_vector_form(fv in feature_vector(), key in key6()) {
        let a = transform(&fv, &key).unwrap();
        let b = transform_slice(fv.values(), &key).unwrap();
        prop_assert_eq!(a.values().as_slice(), b.as_slice());
    }

    #[test]
    fn encoding_preserves_norm(fv in feature_vector(), theta in 0.001f64..1.5) {
        let state = encode_features(&fv, theta).unwrap();
        let total: f64 = state.probabilities().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn normalization_lands_in_unit_interval(rows in traffic_rows()) {
        let stats = column_stats(&rows).unwrap();
        for row in &rows {
            for v in normalize_row(row, &stats).values() {
                prop_assert!((0.0..=1.0).contains(v));
            }
        }
    }

    #[test]
    fn normalization_is_monotone_per_column(rows in traffic_rows()) {
        let stats = column_stats(&rows).unwrap();
        let normalized: Vec<_> = rows.iter().map(|r| normalize_row(r, &stats)).collect();
        for i in 0..rows.len() {
            for j in 0..rows.len() {
                for f in 0..6 {
                    if rows[i].features()[f] <= rows[j].features()[f] {
                        prop_assert!(normalized[i].values()[f] <= normalized[j].values()[f]);
                    }
                }
            }
        }
    }

    #[test]
    fn dataset_round_trips_through_csv(rows in traffic_rows()) {
        let file = tempfile::NamedTempFile::new().unwrap();
        write_dataset(file.path(), &rows).unwrap();
        let back = load_dataset(file.path()).unwrap();
        prop_assert_eq!(back.rows, rows);
    }
}
