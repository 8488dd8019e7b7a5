use serde::{Deserialize, Serialize};

use super::BurnClass;
use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Stratified k-fold partition of `labels`.
///
/// Members of each class are shuffled with `Rng::derive(seed, [severity])`
/// and dealt round-robin across folds, continuing the deal where the previous
/// class stopped so fold sizes differ by at most one. Index lists are sorted.
pub fn kfold_split(labels: &[BurnClass], k: usize, seed: u64) -> Result<Vec<Fold>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("k must be at least 2, got {k}")));
    }
    let mut classes: Vec<BurnClass> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    for &c in &classes {
        let n = labels.iter().filter(|&&l| l == c).count();
        if n < k {
            return Err(Error::Data(format!(
                "class {c} has {n} samples, fewer than the {k} folds requested"
            )));
        }
    }
    let mut assignment = vec![0usize; labels.len()];
    let mut dealt = 0usize;
    for &c in &classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        Rng::derive(seed, &[c.severity() as u64]).shuffle(&mut members);
        for idx in members {
            assignment[idx] = dealt % k;
            dealt += 1;
        }
    }
    Ok((0..k)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) =
                (0..labels.len()).partition(|&i| assignment[i] == f);
            Fold { train, test }
        })
        .collect())
}
