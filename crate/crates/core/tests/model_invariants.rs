mod support;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use turkpos::nn::{deserialize, serialize, NnError};
use turkpos::vocab::{EncodedSentence, PAD_TAG_ID};
use turkpos::{BlstmModel, BlstmModelF32};

#[test]
fn padding_does_not_change_predictions() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let model = support::random_model(&mut rng);
        let len = rng.random_range(1..=8);
        let words = support::random_ids(&mut rng, &model, len);
        let alone = model.tag_probs(&words).unwrap();

        let stored = EncodedSentence {
            tag_ids: vec![PAD_TAG_ID + 1; len],
            word_ids: words,
            true_length: len,
        };
        let max_len = len + rng.random_range(0..12);
        let batch = vec![stored.padded(max_len).unwrap(), stored.padded(len + 20).unwrap()];
        for probs in model.tag_probs_batch(&batch).unwrap() {
            assert_eq!(probs, alone);
        }
    }
}

#[test]
fn swapping_directions_mirrors_the_output() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let model = support::random_model(&mut rng);
        let len = rng.random_range(1..=10);
        let words = support::random_ids(&mut rng, &model, len);
        let probs = model.tag_probs(&words).unwrap();

        let mirrored = BlstmModel::new(model.params().with_directions_swapped(), model.vocab().clone()).unwrap();
        let reversed: Vec<usize> = words.iter().rev().copied().collect();
        let mirrored_probs = mirrored.tag_probs(&reversed).unwrap();
        for t in 0..len {
            for (a, b) in probs.row(t).iter().zip(mirrored_probs.row(len - 1 - t)) {
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn serialization_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..50 {
        let model = support::random_model(&mut rng);
        let bytes = serialize(&model);
        let back: BlstmModel = deserialize(&bytes).unwrap();
        for (a, b) in model.params().tensors().iter().zip(back.params().tensors()) {
            let bits = |m: &turkpos::Matrix<f64>| m.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(a), bits(b));
        }
        assert_eq!(back.vocab(), model.vocab());
        let len = rng.random_range(1..8);
        let words = support::random_ids(&mut rng, &model, len);
        assert_eq!(model.tag_probs(&words).unwrap(), back.tag_probs(&words).unwrap());
        assert_eq!(serialize(&back), bytes);
    }
}

#[test]
fn truncated_files_are_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let bytes = serialize(&support::random_model(&mut rng));
    for cut in [0, 5, 8, 9, 12, bytes.len() / 2, bytes.len() - 8, bytes.len() - 1] {
        assert!(
            deserialize::<f64>(&bytes[..cut]).is_err(),
            "prefix of {cut} bytes accepted"
        );
    }
    let mut bad = bytes.clone();
    bad[8] = 0x02;
    assert!(matches!(
        deserialize::<f64>(&bad),
        Err(NnError::FormatVersionMismatch { found: 2, .. })
    ));
}

#[test]
fn single_precision_tracks_double() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let model = support::random_model(&mut rng);
    let narrow: BlstmModelF32 = deserialize(&serialize(&model)).unwrap();
    let words = support::random_ids(&mut rng, &model, 6);
    let wide = model.tag_probs(&words).unwrap();
    let low = narrow.tag_probs(&words).unwrap();
    for (a, b) in wide.as_slice().iter().zip(low.as_slice()) {
        assert!((a - f64::from(*b)).abs() < 1e-5);
    }
}
