use std::collections::HashMap;

use nalgebra::DMatrix;

use super::sample::PhaseMode;
use crate::copyspace::{CopyLabels, CopySpace};
use crate::error::{Error, Result};
use crate::registers::C64;

/// Invariant of a copy-space index under the phase group: per region, the
/// sorted label multiset (continuous) or the set of labels occurring an odd
/// number of times (binary).
fn phase_keys(labels: &CopyLabels, mode: PhaseMode) -> Vec<u32> {
    let mut ids: HashMap<Vec<u32>, u32> = HashMap::new();
    let mut key = Vec::new();
    (0..labels.total_dim())
        .map(|i| {
            key.clear();
            for r in 0..labels.n_regions() {
                let mut part = labels.labels(i, r).to_vec();
                part.sort_unstable();
                if mode == PhaseMode::Binary {
                    let mut odd = Vec::with_capacity(part.len());
                    for chunk in part.chunk_by(|a, b| a == b) {
                        if chunk.len() % 2 == 1 {
                            odd.push(chunk[0]);
                        }
                    }
                    part = odd;
                }
                key.extend_from_slice(&part);
                key.push(u32::MAX);
            }
            let next = ids.len() as u32;
            *ids.entry(key.clone()).or_insert(next)
        })
        .collect()
}

/// Average over independent diagonal phase unitaries on each region: zeroes
/// every entry whose row and column keys differ.
pub fn phase_twirl_in_place(rho: &mut DMatrix<C64>, labels: &CopyLabels, mode: PhaseMode) -> Result<()> {
    let dim = labels.total_dim();
    if rho.nrows() != dim || rho.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: rho.nrows() });
    }
    let keys = phase_keys(labels, mode);
    for (j, mut col) in rho.column_iter_mut().enumerate() {
        for (i, x) in col.iter_mut().enumerate() {
            if keys[i] != keys[j] {
                *x = C64::default();
            }
        }
    }
    Ok(())
}

pub fn phase_twirl_labels(rho: &DMatrix<C64>, labels: &CopyLabels, mode: PhaseMode) -> Result<DMatrix<C64>> {
    let mut out = rho.clone();
    phase_twirl_in_place(&mut out, labels, mode)?;
    Ok(out)
}

/// Continuous phase twirl on `(C^N)^{⊗t}`: keeps entries whose row and
/// column label multisets coincide.
pub fn phase_twirl(rho: &DMatrix<C64>, n: usize, t: usize) -> Result<DMatrix<C64>> {
    let space = CopySpace::new(n, t)?;
    if rho.nrows() != space.total_dim() || rho.ncols() != space.total_dim() {
        return Err(Error::DimensionMismatch { expected: space.total_dim(), got: rho.nrows() });
    }
    if n == 1 {
        return Ok(rho.clone());
    }
    phase_twirl_labels(rho, &CopyLabels::single(n, t)?, PhaseMode::Continuous)
}
