use alloc::vec;
use alloc::vec::Vec;

use crate::numerics::RngStream;
use crate::{Error, Result};

/// Assignment of `n` observations to `k` folds whose sizes differ by at most one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    pub n: usize,
    pub k: usize,
    pub fold_of: Vec<usize>,
}

impl FoldAssignment {
    pub fn rows_in(&self, fold: usize) -> Vec<usize> {
        (0..self.n).filter(|&i| self.fold_of[i] == fold).collect()
    }

    pub fn rows_outside(&self, fold: usize) -> Vec<usize> {
        (0..self.n).filter(|&i| self.fold_of[i] != fold).collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &f in &self.fold_of {
            s[f] += 1;
        }
        s
    }
}

/// Shuffles `0..n` (Fisher–Yates) and cuts the permutation into `k`
/// contiguous chunks; the first `n mod k` chunks get one extra row.
pub fn make_folds(n: usize, k: usize, rng: &mut RngStream) -> Result<FoldAssignment> {
    if k < 2 || k > n {
        return Err(Error::InvalidInput(alloc::format!(
            "fold count {k} must lie in 2..={n}"
        )));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.below(i + 1);
        perm.swap(i, j);
    }
    let base = n / k;
    let extra = n % k;
    let mut fold_of = vec![0; n];
    let mut pos = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        for &row in &perm[pos..pos + size] {
            fold_of[row] = fold;
        }
        pos += size;
    }
    Ok(FoldAssignment { n, k, fold_of })
}
