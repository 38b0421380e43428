use proptest::prelude::*;

use papi::data::{make_blobs, mix_with, uniform_candidates, Example, PllDataset};
use papi::eval::accuracy;
use papi::model::{init_prototypes, Prototypes};
use papi::numerics::{kl_divergence, l2_normalize_rows, softmax_row, RealMatrix};
use papi::papi::{disambiguate, update_prototypes, update_pseudo_target};

fn distribution(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, len).prop_map(|w| {
        let total: f64 = w.iter().sum();
        w.into_iter().map(|v| v / total).collect()
    })
}

/// A sorted nonempty subset of `0..k`.
fn candidates(k: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::btree_set(0..k, 1..=k).prop_map(|s| s.into_iter().collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn softmax_is_shift_invariant(logits in prop::collection::vec(-30.0f64..30.0, 1..8), shift in -50.0f64..50.0) {
        let a = softmax_row(&logits);
        let shifted: Vec<f64> = logits.iter().map(|v| v + shift).collect();
        let b = softmax_row(&shifted);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        prop_assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kl_is_non_negative_and_zero_on_itself((p, s) in (2usize..8).prop_flat_map(|k| (distribution(k), distribution(k)))) {
        prop_assert!(kl_divergence(&p, &s).unwrap() >= 0.0);
        prop_assert!(kl_divergence(&p, &p).unwrap().abs() < 1e-12);
    }

    #[test]
    fn normalize_gives_unit_rows_and_is_idempotent(rows in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 3), 1..6)) {
        prop_assume!(rows.iter().all(|r| r.iter().map(|v| v * v).sum::<f64>() > 1e-6));
        let m = RealMatrix::from_rows(&rows).unwrap();
        let once = l2_normalize_rows(&m).unwrap();
        let twice = l2_normalize_rows(&once).unwrap();
        for r in once.rows_iter() {
            prop_assert!((r.iter().map(|v| v * v).sum::<f64>().sqrt() - 1.0).abs() < 1e-9);
        }
        for (a, b) in once.as_slice().iter().zip(twice.as_slice()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn mixup_stays_in_the_segment_between_partners(
        rows in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 4), 2..7),
        coeff in 0.0f64..=1.0,
        seed in any::<u64>(),
    ) {
        let m = RealMatrix::from_rows(&rows).unwrap();
        let mut partner: Vec<usize> = (0..rows.len()).collect();
        partner.rotate_left((seed % rows.len() as u64) as usize);
        let mix = mix_with(&m, coeff, partner.clone()).unwrap();
        for i in 0..rows.len() {
            for j in 0..4 {
                let (a, b) = (m.get(i, j), m.get(partner[i], j));
                let v = mix.mixed_features.get(i, j);
                prop_assert!(v >= a.min(b) - 1e-12 && v <= a.max(b) + 1e-12);
                prop_assert!((v - (coeff * a + (1.0 - coeff) * b)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn uniform_generator_always_keeps_the_true_label(q in 0.0f64..=1.0, seed in any::<u64>()) {
        let clean = make_blobs(5, 6, 3, 2.0, seed).unwrap();
        let ds = uniform_candidates(&clean, q, seed ^ 1).unwrap();
        prop_assert!(ds.examples().iter().all(|e| e.is_candidate(e.true_label)));
        prop_assert!(ds.examples().iter().all(|e| e.candidates.windows(2).all(|w| w[0] < w[1])));
    }

    #[test]
    fn accuracy_is_permutation_invariant(pairs in prop::collection::vec((0usize..4, 0usize..4), 1..40), rot in 0usize..40) {
        let (pred, labels): (Vec<usize>, Vec<usize>) = pairs.iter().copied().unzip();
        let a = accuracy(&pred, &labels).unwrap();
        let r = rot % pairs.len();
        let mut pp = pred.clone();
        let mut ll = labels.clone();
        pp.rotate_left(r);
        ll.rotate_left(r);
        prop_assert_eq!(a, accuracy(&pp, &ll).unwrap());
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn disambiguated_targets_are_distributions_on_candidates(
        (r, cands, old_w) in (2usize..7).prop_flat_map(|k| (distribution(k), candidates(k), distribution(k))),
        lambda in 0.0f64..=1.0,
    ) {
        let k = r.len();
        let u = disambiguate(&r, &cands).unwrap();
        prop_assert!((u.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        // an old row that already lives on the candidates
        let mut old = vec![0.0; k];
        let mass: f64 = cands.iter().map(|&j| old_w[j]).sum();
        for &j in &cands {
            old[j] = old_w[j] / mass;
        }
        let p = update_pseudo_target(&old, &u, lambda, &cands).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        for j in 0..k {
            prop_assert!(p[j] >= 0.0);
            if !cands.contains(&j) {
                prop_assert_eq!(p[j], 0.0);
            }
        }
    }

    #[test]
    fn prototype_updates_keep_unit_norm(seed in any::<u64>(), gamma in 0.0f64..0.999, labels in prop::collection::vec(0usize..3, 1..6)) {
        let mut protos: Prototypes = init_prototypes(3, 4, seed).unwrap();
        let b = labels.len();
        let raw: Vec<Vec<f64>> = (0..b).map(|i| (0..4).map(|j| ((i * 7 + j * 3) as f64 + 1.0).sin() + 1.5).collect()).collect();
        let z = l2_normalize_rows(&RealMatrix::from_rows(&raw).unwrap()).unwrap();
        update_prototypes(&mut protos, &z, &z, &labels, gamma).unwrap();
        for k in 0..3 {
            let n = protos.row(k).iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assert!((n - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn dataset_rejects_candidates_without_true_label() {
    assert!(Example::new(vec![0.0], 1, vec![0, 2]).is_err());
    let e = Example::new(vec![0.0], 1, vec![2, 1]).unwrap();
    assert_eq!(e.candidates, vec![1, 2]);
    assert!(PllDataset::new(vec![e], 3).is_ok());
}
