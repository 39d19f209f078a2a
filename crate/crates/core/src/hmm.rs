//! Trigram hidden Markov model tagger with add-k smoothing, used to
//! bootstrap labels for raw text.
//!
//! Sentences start from two synthetic START tags and have no STOP
//! transition. The tagset is kept in lexicographic order, so comparing tag
//! indices compares tag strings.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::corpus::{LabeledCorpus, LabeledSentence};
use crate::preprocess::{preprocess_document, TokenizedSentence};

/// Default smoothing constant.
pub const DEFAULT_K: f64 = 0.01;

/// Log-scores this close are treated as tied.
const TIE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum HmmError {
    #[error("corpus contains no tagged tokens")]
    EmptyCorpus,
    #[error("smoothing constant must be positive and finite, got {0}")]
    InvalidSmoothing(f64),
    #[error("cannot decode an empty sentence")]
    EmptySentence,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HmmModel {
    tagset: Vec<String>,
    k: f64,
    vocab_size: usize,
    /// Row-major `[(prev2, prev1), tag]`, with `START == tagset.len()`.
    transition: Vec<f64>,
    /// Per word: probability under each tag.
    emission: HashMap<String, Vec<f64>>,
    /// Per tag: probability of any word unseen in training.
    unseen: Vec<f64>,
}

impl HmmModel {
    /// Add-k maximum likelihood estimates.
    pub fn train(corpus: &LabeledCorpus, k: f64) -> Result<Self, HmmError> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(HmmError::InvalidSmoothing(k));
        }
        if corpus.token_count() == 0 {
            return Err(HmmError::EmptyCorpus);
        }
        let mut tagset: Vec<String> = corpus
            .sentences()
            .iter()
            .flat_map(|s| s.tags().iter().cloned())
            .collect();
        tagset.sort_unstable();
        tagset.dedup();
        let index: HashMap<&str, usize> = tagset.iter().map(String::as_str).zip(0..).collect();
        let n = tagset.len();
        let start = n;

        let mut trigram = vec![0u64; (n + 1) * (n + 1) * n];
        let mut context = vec![0u64; (n + 1) * (n + 1)];
        let mut word_tag: HashMap<&str, Vec<u64>> = HashMap::new();
        let mut tag_total = vec![0u64; n];
        for sentence in corpus.sentences() {
            let (mut p2, mut p1) = (start, start);
            for (w, t) in sentence.pairs() {
                let ti = index[t];
                trigram[(p2 * (n + 1) + p1) * n + ti] += 1;
                context[p2 * (n + 1) + p1] += 1;
                word_tag.entry(w).or_insert_with(|| vec![0; n])[ti] += 1;
                tag_total[ti] += 1;
                (p2, p1) = (p1, ti);
            }
        }

        let kn = k * n as f64;
        let transition = trigram
            .iter()
            .enumerate()
            .map(|(i, &c)| (c as f64 + k) / (context[i / n] as f64 + kn))
            .collect();

        let vocab_size = word_tag.len() + 1;
        let denom: Vec<f64> = tag_total.iter().map(|&c| c as f64 + k * vocab_size as f64).collect();
        let emission = word_tag
            .into_iter()
            .map(|(w, counts)| {
                let probs = counts.iter().zip(&denom).map(|(&c, d)| (c as f64 + k) / d).collect();
                (w.to_string(), probs)
            })
            .collect();
        let unseen = denom.iter().map(|d| k / d).collect();

        Ok(Self {
            tagset,
            k,
            vocab_size,
            transition,
            emission,
            unseen,
        })
    }

    pub fn tagset(&self) -> &[String] {
        &self.tagset
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Distinct training words plus one slot for unseen words.
    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    /// `P(tag | prev2, prev1)`; `None` stands for START.
    pub fn transition_prob(&self, prev2: Option<usize>, prev1: Option<usize>, tag: usize) -> f64 {
        let n = self.tagset.len();
        let p2 = prev2.unwrap_or(n);
        let p1 = prev1.unwrap_or(n);
        self.transition[(p2 * (n + 1) + p1) * n + tag]
    }

    pub fn emission_prob(&self, word: &str, tag: usize) -> f64 {
        self.emission.get(word).map_or(self.unseen[tag], |p| p[tag])
    }

    /// Probability mass given to each word unseen in training.
    pub fn unseen_prob(&self, tag: usize) -> f64 {
        self.unseen[tag]
    }

    /// Emission probabilities of every training word under `tag`.
    pub fn seen_emissions(&self, tag: usize) -> impl Iterator<Item = (&str, f64)> {
        self.emission.iter().map(move |(w, p)| (w.as_str(), p[tag]))
    }

    fn transition_row(&self, p2: usize, p1: usize) -> &[f64] {
        let n = self.tagset.len();
        let at = (p2 * (n + 1) + p1) * n;
        &self.transition[at..at + n]
    }

    /// Most probable tag indices and their joint log-probability. Among
    /// tied sequences the lexicographically smallest wins.
    ///
    /// A backward pass over `(t_{i-1}, t_i)` pair states computes the best
    /// suffix score of every state; the forward sweep then commits to the
    /// smallest tag that still reaches the optimum, which realizes the
    /// tie-break exactly.
    pub fn viterbi_indices<S: AsRef<str>>(&self, tokens: &[S]) -> Result<(Vec<usize>, f64), HmmError> {
        if tokens.is_empty() {
            return Err(HmmError::EmptySentence);
        }
        let n = self.tagset.len();
        let states = (n + 1) * (n + 1);
        let len = tokens.len();
        let log_emit: Vec<Vec<f64>> = tokens
            .iter()
            .map(|w| (0..n).map(|t| self.emission_prob(w.as_ref(), t).ln()).collect())
            .collect();
        let log_trans: Vec<f64> = self.transition.iter().map(|p| p.ln()).collect();
        let lt = |p2: usize, p1: usize, t: usize| log_trans[(p2 * (n + 1) + p1) * n + t];

        // suffix[i][(p, q)]: best score of positions i+1.. given t_{i-1}=p, t_i=q.
        let mut suffix = vec![vec![0.0f64; states]; len];
        for i in (0..len - 1).rev() {
            for p in 0..=n {
                for q in 0..n {
                    let best = (0..n)
                        .map(|r| lt(p, q, r) + log_emit[i + 1][r] + suffix[i + 1][q * (n + 1) + r])
                        .fold(f64::NEG_INFINITY, f64::max);
                    suffix[i][p * (n + 1) + q] = best;
                }
            }
        }

        let mut tags = Vec::with_capacity(len);
        let (mut p2, mut p1) = (n, n);
        let mut log_prob = 0.0;
        for i in 0..len {
            let scores: Vec<f64> = (0..n)
                .map(|r| lt(p2, p1, r) + log_emit[i][r] + suffix[i][p1 * (n + 1) + r])
                .collect();
            let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let r = scores
                .iter()
                .position(|&s| s >= best - TIE_TOLERANCE)
                .expect("some tag reaches the maximum");
            log_prob += lt(p2, p1, r) + log_emit[i][r];
            tags.push(r);
            (p2, p1) = (p1, r);
        }
        Ok((tags, log_prob))
    }

    pub fn viterbi<S: AsRef<str>>(&self, tokens: &[S]) -> Result<Vec<String>, HmmError> {
        let (idx, _) = self.viterbi_indices(tokens)?;
        Ok(idx.into_iter().map(|i| self.tagset[i].clone()).collect())
    }

    /// Tables as structured text, for inspection.
    pub fn dump(&self) -> String {
        #[derive(Serialize)]
        struct Dump<'a> {
            tagset: &'a [String],
            k: f64,
            vocab_size: usize,
            transition: BTreeMap<String, BTreeMap<&'a str, f64>>,
            emission: BTreeMap<&'a str, BTreeMap<&'a str, f64>>,
            unseen: BTreeMap<&'a str, f64>,
        }
        let n = self.tagset.len();
        let name = |i: usize| if i == n { "<START>" } else { self.tagset[i].as_str() };
        let mut transition = BTreeMap::new();
        for p2 in 0..=n {
            for p1 in 0..=n {
                if p2 != n && p1 == n {
                    continue;
                }
                let row = self.transition_row(p2, p1);
                let probs = self
                    .tagset
                    .iter()
                    .map(String::as_str)
                    .zip(row.iter().copied())
                    .collect();
                transition.insert(format!("{} {}", name(p2), name(p1)), probs);
            }
        }
        let mut emission: BTreeMap<&str, BTreeMap<&str, f64>> = BTreeMap::new();
        for (w, probs) in &self.emission {
            for (t, &p) in self.tagset.iter().zip(probs) {
                emission.entry(t.as_str()).or_default().insert(w.as_str(), p);
            }
        }
        let dump = Dump {
            tagset: &self.tagset,
            k: self.k,
            vocab_size: self.vocab_size,
            transition,
            emission,
            unseen: self
                .tagset
                .iter()
                .map(String::as_str)
                .zip(self.unseen.iter().copied())
                .collect(),
        };
        serde_json::to_string_pretty(&dump).expect("dump is serializable")
    }
}

/// Cleans each raw text and tags every resulting sentence. Texts that clean
/// down to nothing contribute no sentences.
pub fn bootstrap_label<S: AsRef<str>>(raw_texts: &[S], hmm: &HmmModel) -> Result<LabeledCorpus, HmmError> {
    let mut corpus = LabeledCorpus::default();
    for text in raw_texts {
        for sentence in preprocess_document(text.as_ref()) {
            corpus.push(label_sentence(sentence, hmm)?);
        }
    }
    Ok(corpus)
}

fn label_sentence(sentence: TokenizedSentence, hmm: &HmmModel) -> Result<LabeledSentence, HmmError> {
    let tags = hmm.viterbi(sentence.tokens())?;
    Ok(LabeledSentence::new(sentence.into_tokens(), tags).expect("viterbi returns one tag per token"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> LabeledCorpus {
        LabeledCorpus::new(vec![LabeledSentence::from_pairs([("a", "N"), ("b", "V")])])
    }

    #[test]
    fn hand_counted_start_transition() {
        let hmm = HmmModel::train(&ab(), 1.0).unwrap();
        assert_eq!(hmm.tagset(), ["N", "V"]);
        assert!((hmm.transition_prob(None, None, 0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((hmm.transition_prob(None, None, 1) - 1.0 / 3.0).abs() < 1e-15);
        // (START, N) → V seen once: (1 + 1) / (1 + 2)
        assert!((hmm.transition_prob(None, Some(0), 1) - 2.0 / 3.0).abs() < 1e-15);
        // never-seen context is uniform
        assert_eq!(hmm.transition_prob(Some(1), Some(1), 0), 0.5);
        // emission: vocab_size 3, count(N) = 1 → P(a|N) = 2/4, unseen 1/4
        assert_eq!(hmm.vocab_size(), 3);
        assert_eq!(hmm.emission_prob("a", 0), 0.5);
        assert_eq!(hmm.emission_prob("zzz", 0), 0.25);
    }

    #[test]
    fn invalid_inputs() {
        assert_eq!(HmmModel::train(&ab(), 0.0), Err(HmmError::InvalidSmoothing(0.0)));
        assert!(HmmModel::train(&ab(), -1.0).is_err());
        assert_eq!(
            HmmModel::train(&LabeledCorpus::default(), 0.1),
            Err(HmmError::EmptyCorpus)
        );
        let hmm = HmmModel::train(&ab(), 0.1).unwrap();
        assert_eq!(hmm.viterbi::<&str>(&[]), Err(HmmError::EmptySentence));
    }

    #[test]
    fn single_token_reduces_to_one_step() {
        let corpus = LabeledCorpus::new(vec![
            LabeledSentence::from_pairs([("a", "N"), ("b", "V")]),
            LabeledSentence::from_pairs([("b", "V"), ("a", "N")]),
            LabeledSentence::from_pairs([("b", "N")]),
        ]);
        let hmm = HmmModel::train(&corpus, 0.5).unwrap();
        for w in ["a", "b", "unknown"] {
            let expected = (0..2)
                .max_by(|&x, &y| {
                    let sx = hmm.transition_prob(None, None, x) * hmm.emission_prob(w, x);
                    let sy = hmm.transition_prob(None, None, y) * hmm.emission_prob(w, y);
                    sx.partial_cmp(&sy).unwrap().then(y.cmp(&x))
                })
                .unwrap();
            assert_eq!(hmm.viterbi_indices(&[w]).unwrap().0, [expected], "{w}");
        }
    }

    #[test]
    fn ties_pick_lexicographically_smallest() {
        // Perfectly symmetric model: every sequence is equally likely.
        let corpus = LabeledCorpus::new(vec![
            LabeledSentence::from_pairs([("x", "B")]),
            LabeledSentence::from_pairs([("x", "A")]),
        ]);
        let hmm = HmmModel::train(&corpus, 1.0).unwrap();
        assert_eq!(hmm.viterbi(&["x", "x", "x"]).unwrap(), ["A", "A", "A"]);
    }

    #[test]
    fn bootstrap_pipeline_shape() {
        let hmm = HmmModel::train(&ab(), DEFAULT_K).unwrap();
        let c = bootstrap_label(&["A b.", "!!! 42", ""], &hmm).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.sentences()[0].tokens(), ["a", "b"]);
        assert_eq!(c.sentences()[0].tags(), ["N", "V"]);
    }

    #[test]
    fn dump_is_structured() {
        let hmm = HmmModel::train(&ab(), 1.0).unwrap();
        let v: serde_json::Value = serde_json::from_str(&hmm.dump()).unwrap();
        assert_eq!(v["tagset"], serde_json::json!(["N", "V"]));
        assert!(v["transition"]["<START> <START>"]["N"].as_f64().unwrap() > 0.6);
    }
}
