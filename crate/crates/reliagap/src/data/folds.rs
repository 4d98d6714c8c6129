//! Seeded cross-validation fold assignment.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::seed;

/// Partition of row indices into folds of near-equal size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    fold_of: Vec<u32>,
    n_folds: usize,
}

impl FoldAssignment {
    pub fn n_folds(&self) -> usize {
        self.n_folds
    }

    pub fn n_rows(&self) -> usize {
        self.fold_of.len()
    }

    pub fn fold_of(&self, row: usize) -> usize {
        self.fold_of[row] as usize
    }

    /// Rows held out by the given fold, in row order.
    pub fn test_rows(&self, fold: usize) -> Vec<usize> {
        assert!(fold < self.n_folds, "fold {fold} out of range");
        (0..self.fold_of.len()).filter(|&r| self.fold_of[r] as usize == fold).collect()
    }

    /// Rows used for training when the given fold is held out.
    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        assert!(fold < self.n_folds, "fold {fold} out of range");
        (0..self.fold_of.len()).filter(|&r| self.fold_of[r] as usize != fold).collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_folds];
        for &f in &self.fold_of {
            sizes[f as usize] += 1;
        }
        sizes
    }
}

/// Assigns rows to folds by a seeded shuffle.
///
/// Unstratified by default: the shuffled rows are dealt into folds whose sizes
/// differ by at most one. With `stratify` set, the deal happens within each
/// label class so fold label rates match the overall rate up to rounding;
/// sizes still differ by at most one.
pub fn assign_folds(labels: &[u8], n_folds: usize, fold_seed: u64, stratify: bool) -> Result<FoldAssignment> {
    let n = labels.len();
    if n_folds < 2 {
        return Err(Error::invalid("need at least two folds"));
    }
    if n < n_folds {
        return Err(Error::invalid(format!("{n} rows cannot fill {n_folds} folds")));
    }

    let mut rng = seed::stream(fold_seed, "folds", &[n_folds as u64]);
    let mut fold_of = vec![0u32; n];
    if stratify {
        // Deal each class round-robin, continuing the fold cursor across
        // classes so overall fold sizes stay balanced.
        let mut cursor = 0usize;
        for class in [0u8, 1] {
            let mut rows: Vec<usize> = (0..n).filter(|&r| labels[r] == class).collect();
            rows.shuffle(&mut rng);
            for row in rows {
                fold_of[row] = (cursor % n_folds) as u32;
                cursor += 1;
            }
        }
    } else {
        let mut rows: Vec<usize> = (0..n).collect();
        rows.shuffle(&mut rng);
        // First n % n_folds folds take the extra row.
        let base = n / n_folds;
        let extra = n % n_folds;
        let mut at = 0usize;
        for fold in 0..n_folds {
            let size = base + usize::from(fold < extra);
            for &row in &rows[at..at + size] {
                fold_of[row] = fold as u32;
            }
            at += size;
        }
    }
    Ok(FoldAssignment { fold_of, n_folds })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_differ_by_at_most_one() {
        let labels = vec![0u8; 6167];
        let f = assign_folds(&labels, 5, 42, false).unwrap();
        let mut sizes = f.fold_sizes();
        sizes.sort_unstable();
        assert_eq!(sizes, [1233, 1233, 1233, 1234, 1234]);
    }

    #[test]
    fn partition_is_exact() {
        let labels = vec![0u8; 103];
        let f = assign_folds(&labels, 5, 9, false).unwrap();
        let mut seen = vec![false; 103];
        for fold in 0..5 {
            let test = f.test_rows(fold);
            let train = f.train_rows(fold);
            assert_eq!(test.len() + train.len(), 103);
            for r in test {
                assert!(!seen[r]);
                seen[r] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn deterministic_per_seed() {
        let labels = vec![0u8; 50];
        let a = assign_folds(&labels, 5, 7, false).unwrap();
        let b = assign_folds(&labels, 5, 7, false).unwrap();
        let c = assign_folds(&labels, 5, 8, false).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn stratified_balances_label_rates() {
        let mut labels = vec![0u8; 100];
        for l in labels.iter_mut().take(30) {
            *l = 1;
        }
        let f = assign_folds(&labels, 5, 3, true).unwrap();
        for fold in 0..5 {
            let test = f.test_rows(fold);
            assert_eq!(test.len(), 20);
            let positives = test.iter().filter(|&&r| labels[r] == 1).count();
            assert_eq!(positives, 6);
        }
    }

    #[test]
    fn rejects_degenerate_requests() {
        assert!(assign_folds(&[0, 1], 1, 0, false).is_err());
        assert!(assign_folds(&[0, 1, 0], 5, 0, false).is_err());
    }
}
