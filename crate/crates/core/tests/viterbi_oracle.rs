mod support;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use turkpos::hmm::{HmmError, HmmModel};
use turkpos::{LabeledCorpus, LabeledSentence};

#[test]
fn matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..200 {
        let n_tags = rng.random_range(2..=5);
        let n_sentences = rng.random_range(1..8);
        let corpus = support::random_corpus(&mut rng, n_tags, 6, n_sentences, 5);
        let k = [0.01, 0.5, 1.0][case % 3];
        let hmm = HmmModel::train(&corpus, k).unwrap();
        let len = rng.random_range(1..=5);
        // w6..w8 never occur in training
        let tokens: Vec<String> = (0..len).map(|_| format!("w{}", rng.random_range(0..9))).collect();
        let (tags, log_prob) = hmm.viterbi_indices(&tokens).unwrap();
        let (oracle_tags, oracle_log_prob) = support::brute_force_viterbi(&hmm, &tokens);
        assert_eq!(tags, oracle_tags, "case {case}: {tokens:?}");
        assert!((log_prob - oracle_log_prob).abs() < 1e-9, "case {case}");
    }
}

#[test]
fn exact_ties_resolve_to_smallest_tag() {
    // Two tags with mirror-image statistics: every unseen word is a tie.
    let corpus = LabeledCorpus::new(vec![
        LabeledSentence::from_pairs([("a", "B"), ("b", "A")]),
        LabeledSentence::from_pairs([("b", "A"), ("a", "B")]),
        LabeledSentence::from_pairs([("c", "A")]),
        LabeledSentence::from_pairs([("c", "B")]),
    ]);
    let hmm = HmmModel::train(&corpus, 1.0).unwrap();
    let tokens = vec!["z".to_string()];
    assert_eq!(hmm.viterbi(&tokens).unwrap(), ["A"]);
    assert_eq!(support::brute_force_viterbi(&hmm, &tokens).0, [0]);
}

#[test]
fn empty_sentence_is_rejected() {
    let hmm = HmmModel::train(&LabeledCorpus::sample(), 0.01).unwrap();
    assert_eq!(hmm.viterbi::<String>(&[]), Err(HmmError::EmptySentence));
}
