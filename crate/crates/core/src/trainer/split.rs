use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::TrainError;
use crate::corpus::LabeledCorpus;

/// Seeded shuffle, then the first `⌊ratio·N⌋` sentences train and the rest test.
pub fn train_test_split(
    corpus: &LabeledCorpus,
    ratio: f64,
    seed: u64,
) -> Result<(LabeledCorpus, LabeledCorpus), TrainError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(TrainError::InvalidConfig(
            "split ratio must lie strictly between 0 and 1".into(),
        ));
    }
    let n = corpus.len();
    let n_train = (ratio * n as f64).floor() as usize;
    if n_train == 0 || n_train == n {
        return Err(TrainError::TooSmall {
            train: n_train,
            test: n - n_train,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let pick = |idx: &[usize]| idx.iter().map(|&i| corpus.sentences()[i].clone()).collect();
    Ok((pick(&order[..n_train]), pick(&order[n_train..])))
}
