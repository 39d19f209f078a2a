//! Random fixtures and brute-force references shared by integration tests.
#![allow(dead_code)]

use rand::seq::IndexedRandom;
use rand::Rng;
use turkpos::hmm::HmmModel;
use turkpos::nn::fill_uniform;
use turkpos::{Blstm, LabeledCorpus, LabeledSentence, Vocabulary};

const TAG_POOL: [&str; 6] = ["ADJ", "ADV", "NOUN", "PRON", "VERB", "X"];

pub fn random_corpus<R: Rng>(
    rng: &mut R,
    n_tags: usize,
    n_words: usize,
    n_sentences: usize,
    max_len: usize,
) -> LabeledCorpus {
    let tags = &TAG_POOL[..n_tags];
    (0..n_sentences)
        .map(|_| {
            let len = rng.random_range(1..=max_len);
            LabeledSentence::from_pairs((0..len).map(|_| {
                let w = format!("w{}", rng.random_range(0..n_words));
                (w, *tags.choose(rng).unwrap())
            }))
        })
        .collect()
}

/// Random vocabulary and dimensions, all weights uniform in ±1.
pub fn random_model<R: Rng>(rng: &mut R) -> Blstm<f64> {
    let n_tags = rng.random_range(2..=5);
    let n_words = rng.random_range(3..12);
    let corpus = random_corpus(rng, n_tags, n_words, 6, 6);
    let vocab = Vocabulary::build(&corpus).unwrap();
    let embed = rng.random_range(1..=6);
    let hidden = rng.random_range(1..=6);
    let mut model = Blstm::<f64>::init(vocab, embed, hidden, rng);
    for t in model.params_mut().tensors_mut() {
        fill_uniform(t, 1.0, rng);
    }
    model
}

/// Ids drawn from the whole id range, PAD and OOV included.
pub fn random_ids<R: Rng>(rng: &mut R, model: &Blstm<f64>, len: usize) -> Vec<usize> {
    let n = model.vocab().word_count();
    (0..len).map(|_| rng.random_range(0..n)).collect()
}

/// Exhaustive search over every tag sequence, enumerated in lexicographic
/// order so the first strict maximum is the lexicographically smallest.
pub fn brute_force_viterbi(hmm: &HmmModel, tokens: &[String]) -> (Vec<usize>, f64) {
    let n = hmm.tagset().len();
    let len = tokens.len();
    let mut best: Option<(Vec<usize>, f64)> = None;
    for code in 0..n.pow(len as u32) {
        let mut seq = vec![0; len];
        let mut c = code;
        for slot in seq.iter_mut().rev() {
            *slot = c % n;
            c /= n;
        }
        let mut score = 0.0;
        let (mut p2, mut p1) = (None, None);
        for (w, &t) in tokens.iter().zip(&seq) {
            score += hmm.transition_prob(p2, p1, t).ln() + hmm.emission_prob(w, t).ln();
            (p2, p1) = (p1, Some(t));
        }
        if best.as_ref().is_none_or(|(_, b)| score > *b + 1e-10) {
            best = Some((seq, score));
        }
    }
    best.unwrap()
}
