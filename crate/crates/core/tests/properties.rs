mod support;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use turkpos::hmm::HmmModel;
use turkpos::nn::softmax;
use turkpos::preprocess::{normalize_case, preprocess_document};
use turkpos::vocab::{one_hot, OOV_WORD_ID};
use turkpos::{LabeledCorpus, LabeledSentence, Vocabulary};

fn turkish_text() -> impl Strategy<Value = String> {
    prop::collection::vec(
        prop_oneof![
            Just("İ".to_string()),
            Just("I".to_string()),
            Just("ı".to_string()),
            Just("i̇".to_string()),
            Just(" ".to_string()),
            Just(". ".to_string()),
            "[a-zA-ZçğöşüÇĞÖŞÜ0-9,;:!?'\"()-]{1,6}",
            any::<char>().prop_map(String::from),
        ],
        0..24,
    )
    .prop_map(|parts| parts.concat())
}

proptest! {
    #[test]
    fn case_folding_is_idempotent(s in turkish_text()) {
        let once = normalize_case(&s);
        prop_assert_eq!(normalize_case(&once), once);
    }

    #[test]
    fn case_folding_is_idempotent_on_any_string(s in ".*") {
        let once = normalize_case(&s);
        prop_assert_eq!(normalize_case(&once), once);
    }

    #[test]
    fn cleaned_sentences_are_fixed_points(s in turkish_text()) {
        for sentence in preprocess_document(&s) {
            prop_assert!(!sentence.is_empty());
            let joined = sentence.tokens().join(" ");
            let again = preprocess_document(&joined);
            prop_assert_eq!(again.len(), 1);
            prop_assert_eq!(again[0].tokens(), sentence.tokens());
        }
    }

    #[test]
    fn vocabulary_round_trips(words in prop::collection::vec("[a-zçğıöşü]{1,5}", 1..20)) {
        let corpus = LabeledCorpus::new(vec![LabeledSentence::from_pairs(words.iter().map(|w| (w.as_str(), "NOUN")))]);
        let vocab = Vocabulary::build(&corpus).unwrap();
        let ids = vocab.encode_tokens(&words);
        for (w, &id) in words.iter().zip(&ids) {
            prop_assert_ne!(id, OOV_WORD_ID);
            prop_assert_eq!(vocab.word(id), Some(w.as_str()));
        }
        let json = serde_json::to_string(&vocab).unwrap();
        prop_assert_eq!(serde_json::from_str::<Vocabulary>(&json).unwrap(), vocab);
    }

    #[test]
    fn one_hot_rows_sum_to_one(ids in prop::collection::vec(0usize..6, 0..12)) {
        let m = one_hot::<f64>(&ids, 6).unwrap();
        for (row, &id) in m.iter_rows().zip(&ids) {
            prop_assert_eq!(row.iter().sum::<f64>(), 1.0);
            prop_assert_eq!(row[id], 1.0);
        }
    }

    #[test]
    fn softmax_is_a_distribution(z in prop::collection::vec(-800.0f64..800.0, 1..12)) {
        let p = softmax(&z);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(p.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn hmm_distributions_are_normalized(seed in any::<u64>(), n_tags in 1usize..6, k in 0.001f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let corpus = support::random_corpus(&mut rng, n_tags, 8, 6, 6);
        let hmm = HmmModel::train(&corpus, k).unwrap();
        let n = hmm.tagset().len();
        let contexts = (0..=n).map(|i| (i < n).then_some(i));
        for p2 in contexts.clone() {
            for p1 in contexts.clone() {
                let total: f64 = (0..n).map(|t| hmm.transition_prob(p2, p1, t)).sum();
                prop_assert!((total - 1.0).abs() < 1e-9);
            }
        }
        for t in 0..n {
            let total: f64 = hmm.seen_emissions(t).map(|(_, p)| p).sum::<f64>() + hmm.unseen_prob(t);
            prop_assert!((total - 1.0).abs() < 1e-9);
        }
    }
}
