//! Permutations of a small number of tensor copies.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// A permutation of `{0, .., t-1}` stored by images: `σ(k) = images[k]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || seen[i] {
                return Err(Error::InvalidPermutation(images));
            }
            seen[i] = true;
        }
        Ok(Self(images))
    }

    pub fn identity(t: usize) -> Self {
        Self((0..t).collect())
    }

    /// Exchanges `i` and `j`.
    pub fn transposition(t: usize, i: usize, j: usize) -> Self {
        let mut images: Vec<usize> = (0..t).collect();
        images.swap(i, j);
        Self(images)
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn apply(&self, k: usize) -> usize {
        self.0[k]
    }

    /// `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation(other.0.iter().map(|&k| self.0[k]).collect())
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.0.len()];
        for (k, &img) in self.0.iter().enumerate() {
            inv[img] = k;
        }
        Permutation(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(k, &i)| k == i)
    }

    pub fn cycle_count(&self) -> usize {
        self.cycle_type().len()
    }

    /// Cycle lengths in nonincreasing order.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut seen = vec![false; self.0.len()];
        let mut lengths = Vec::new();
        for start in 0..self.0.len() {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut k = start;
            while !seen[k] {
                seen[k] = true;
                k = self.0[k];
                len += 1;
            }
            lengths.push(len);
        }
        lengths.sort_unstable_by(|a, b| b.cmp(a));
        lengths
    }

    /// All `t!` permutations in lexicographic order of their image lists.
    pub fn all(t: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut cur: Vec<usize> = (0..t).collect();
        loop {
            out.push(Permutation(cur.clone()));
            // next lexicographic permutation
            let Some(i) = (1..t).rev().find(|&i| cur[i - 1] < cur[i]) else {
                break;
            };
            let j = (i..t).rev().find(|&j| cur[j] > cur[i - 1]).expect("pivot exists");
            cur.swap(i - 1, j);
            cur[i..].reverse();
        }
        out
    }
}

/// The symmetric group on `t` letters with index lookup.
#[derive(Clone, Debug)]
pub struct SymmetricGroup {
    elements: Vec<Permutation>,
    index: HashMap<Permutation, usize>,
}

impl SymmetricGroup {
    pub fn new(t: usize) -> Self {
        let elements = Permutation::all(t);
        let index = elements.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        Self { elements, index }
    }

    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn index_of(&self, p: &Permutation) -> usize {
        self.index[p]
    }
}

pub fn factorial(n: usize) -> usize {
    (1..=n).product()
}
