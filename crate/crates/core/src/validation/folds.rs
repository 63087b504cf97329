use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ValidationError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FoldMode {
    RandomKFold,
    LeaveOneBlastOut,
}

impl FoldMode {
    pub fn as_str(self) -> &'static str {
        match self {
            FoldMode::RandomKFold => "random",
            FoldMode::LeaveOneBlastOut => "spatial",
        }
    }
}

/// Assignment of every hole to exactly one test fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub mode: FoldMode,
    /// Number of folds (the number of blasts in spatial mode).
    pub k: usize,
    pub seed: u64,
    pub hole_ids: Vec<String>,
    pub assignments: Vec<usize>,
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }
}

/// Builds a fold plan over `(hole_id, blast_id)` pairs.
///
/// Random mode shuffles the holes with the seed and deals them round-robin
/// into `k` folds, so sizes differ by at most one. Spatial mode ignores `k`
/// and makes one fold per blast, numbered in sorted blast-id order.
pub fn make_folds(
    holes: &[(String, String)],
    mode: FoldMode,
    k: usize,
    seed: u64,
) -> Result<FoldPlan, ValidationError> {
    let n = holes.len();
    let hole_ids = holes.iter().map(|h| h.0.clone()).collect();
    match mode {
        FoldMode::RandomKFold => {
            if k < 2 || n < k {
                return Err(ValidationError::TooFewHoles { k, n });
            }
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let mut assignments = vec![0; n];
            for (pos, &i) in order.iter().enumerate() {
                assignments[i] = pos % k;
            }
            Ok(FoldPlan {
                mode,
                k,
                seed,
                hole_ids,
                assignments,
            })
        }
        FoldMode::LeaveOneBlastOut => {
            let blasts: BTreeMap<&str, usize> = holes
                .iter()
                .map(|h| (h.1.as_str(), 0))
                .collect::<BTreeMap<_, _>>()
                .into_keys()
                .enumerate()
                .map(|(i, b)| (b, i))
                .collect();
            if blasts.len() < 2 {
                return Err(ValidationError::TooFewBlasts(blasts.len()));
            }
            let assignments = holes.iter().map(|h| blasts[h.1.as_str()]).collect();
            Ok(FoldPlan {
                mode,
                k: blasts.len(),
                seed,
                hole_ids,
                assignments,
            })
        }
    }
}
