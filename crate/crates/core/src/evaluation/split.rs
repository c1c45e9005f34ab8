use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::signal::Label;

/// Row indices of one train/test partition, each ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

fn train_count(fraction: f64, size: usize, what: &str) -> Result<usize> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Split(format!("train fraction {fraction} outside (0, 1)")));
    }
    if size < 2 {
        return Err(Error::Split(format!(
            "{what} has {size} member(s); need at least one for train and one for test"
        )));
    }
    let n = (fraction * size as f64 + 0.5).floor() as usize;
    Ok(n.clamp(1, size - 1))
}

/// Random split keeping `round(fraction * size)` members of each class in
/// the training part (halves round up), clamped so that both parts hold at
/// least one member of each class.
pub fn stratified_split(labels: &[Label], fraction: f64, seed: u64) -> Result<Split> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for label in [Label::Skilled, Label::Novice] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == label).collect();
        let n = train_count(fraction, members.len(), label.as_str())?;
        members.shuffle(&mut rng);
        train.extend_from_slice(&members[..n]);
        test.extend_from_slice(&members[n..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split { train, test })
}

/// Unstratified variant: `round(fraction * n)` rows drawn from the whole
/// set, so a part may miss a class entirely.
pub fn random_split(n: usize, fraction: f64, seed: u64) -> Result<Split> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = train_count(fraction, n, "dataset")?;
    let mut rows: Vec<usize> = (0..n).collect();
    rows.shuffle(&mut rng);
    let mut train = rows[..k].to_vec();
    let mut test = rows[k..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split { train, test })
}
