use turkpos::corpus::{self, SAMPLE_RAW_TEXT};
use turkpos::hmm::{bootstrap_label, HmmError, HmmModel, DEFAULT_K};
use turkpos::preprocess::preprocess_document;
use turkpos::LabeledCorpus;

#[test]
fn raw_text_becomes_a_trainable_corpus() {
    let seed = LabeledCorpus::sample();
    let hmm = HmmModel::train(&seed, DEFAULT_K).unwrap();
    let labeled = bootstrap_label(&[SAMPLE_RAW_TEXT], &hmm).unwrap();

    let cleaned = preprocess_document(SAMPLE_RAW_TEXT);
    assert_eq!(labeled.len(), cleaned.len());
    for (s, c) in labeled.sentences().iter().zip(&cleaned) {
        assert_eq!(s.tokens(), c.tokens());
        assert!(s.tags().iter().all(|t| hmm.tagset().contains(t)));
    }

    let text = corpus::to_string(&labeled);
    assert_eq!(corpus::parse(&text).unwrap(), labeled);
}

#[test]
fn known_sentences_get_their_training_tags() {
    let seed = LabeledCorpus::sample();
    let hmm = HmmModel::train(&seed, DEFAULT_K).unwrap();
    for s in seed.sentences() {
        assert_eq!(hmm.viterbi(s.tokens()).unwrap(), s.tags());
    }
}

#[test]
fn unusable_inputs() {
    let hmm = HmmModel::train(&LabeledCorpus::sample(), DEFAULT_K).unwrap();
    assert!(bootstrap_label(&["!!! 42"], &hmm).unwrap().is_empty());
    assert_eq!(
        HmmModel::train(&LabeledCorpus::default(), 0.1),
        Err(HmmError::EmptyCorpus)
    );
    assert_eq!(
        HmmModel::train(&LabeledCorpus::sample(), 0.0),
        Err(HmmError::InvalidSmoothing(0.0))
    );
}
