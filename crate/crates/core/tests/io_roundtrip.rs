use discern_core::io::{format_realization, parse_realization, read_batch, write_batch};
use discern_core::simulate::{simulate_ssi, SsiParams};
use discern_core::summarize::feature_vector;
use discern_core::{Point2, Realization, Window};
use proptest::prelude::*;

fn arb_realization() -> impl Strategy<Value = Realization> {
    (1.0f64..100.0, prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 0..40), any::<u64>()).prop_map(
        |(side, pts, seed)| {
            let w = Window::new(-side, 0.5, side, 0.5 + side).unwrap();
            let points = pts
                .into_iter()
                .map(|(u, v)| Point2::new(-side + 2.0 * side * u, 0.5 + side * v))
                .collect();
            Realization::new(points, w).with_seed(seed)
        },
    )
}

proptest! {
    #[test]
    fn text_format_round_trips_exactly(r in arb_realization(), labelled in any::<bool>()) {
        let r = if labelled { r.with_label("dg") } else { r };
        prop_assert_eq!(parse_realization(&format_realization(&r)).unwrap(), r);
    }
}

#[test]
fn features_survive_a_disk_round_trip() {
    let w = Window::square(44.0).unwrap();
    let inner = Window::new(2.5, 2.5, 41.5, 41.5).unwrap();
    let p = SsiParams {
        hardcore: 2.0,
        target_n: 254,
        max_attempts: 10_000,
    };
    let batch: Vec<Realization> = (0..4)
        .map(|s| {
            simulate_ssi(&w, &p, s)
                .unwrap()
                .realization
                .clipped(&inner)
                .with_label("ssi")
                .with_seed(s)
        })
        .collect();
    let dir = tempfile::tempdir().unwrap();
    write_batch(dir.path(), "ssi", &batch).unwrap();
    let back = read_batch(dir.path()).unwrap();
    assert_eq!(back.len(), batch.len());
    for (a, b) in batch.iter().zip(&back) {
        assert_eq!(a, b);
        assert_eq!(feature_vector(a).unwrap(), feature_vector(b).unwrap());
    }
}
