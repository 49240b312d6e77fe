use nalgebra::DMatrix;

use super::weingarten::WeingartenTable;
use crate::copyspace::{permutation_map, CopySpace, MomentOperator, RegionBlockLayout};
use crate::error::{Error, Result};
use crate::linalg::hermitize;
use crate::registers::{Partition, QuditRegister, C64};

/// `Φ(X) = Σ_{σ,τ} Wg(σ⁻¹τ, d) tr(P_σ† X) P_τ` on one `d^t`-dimensional block.
struct BlockTwirl {
    maps: Vec<Vec<usize>>,
    /// `kernel[τ][σ] = Wg(σ⁻¹τ)`
    kernel: Vec<Vec<f64>>,
}

impl BlockTwirl {
    fn new(t: usize, d: usize) -> Result<Self> {
        let table = WeingartenTable::new(t, d)?;
        let space = CopySpace::new(d, t)?;
        let el = table.group().elements();
        let maps = el.iter().map(|s| permutation_map(s, space)).collect::<Result<Vec<_>>>()?;
        let kernel = el
            .iter()
            .map(|tau| el.iter().map(|sigma| table.value(&sigma.inverse().compose(tau))).collect())
            .collect();
        Ok(Self { maps, kernel })
    }

    fn block_dim(&self) -> usize {
        self.maps[0].len()
    }

    /// Twirls every `m × m` block `{(positions[o·m + a], positions[o'·m + a'])}` in place.
    fn apply(&self, matrix: &mut DMatrix<C64>, positions: &[usize]) {
        let m = self.block_dim();
        let dim = matrix.nrows();
        let outer = positions.len() / m;
        let data = matrix.as_mut_slice();
        let mut traces = vec![C64::default(); self.maps.len()];
        for oc in 0..outer {
            let cols = &positions[oc * m..(oc + 1) * m];
            for or in 0..outer {
                let rows = &positions[or * m..(or + 1) * m];
                // tr(P_σ† X) = Σ_a X[σ(a), a]
                for (tr, map) in traces.iter_mut().zip(&self.maps) {
                    *tr = (0..m).map(|a| data[cols[a] * dim + rows[map[a]]]).sum();
                }
                for &c in cols {
                    for &r in rows {
                        data[c * dim + r] = C64::default();
                    }
                }
                for (map, weights) in self.maps.iter().zip(&self.kernel) {
                    let coeff: C64 = weights.iter().zip(&traces).map(|(w, tr)| tr * *w).sum();
                    for a in 0..m {
                        data[cols[a] * dim + rows[map[a]]] += coeff;
                    }
                }
            }
        }
    }
}

/// Exact Haar twirl of an operator on `(C^d)^{⊗t}`.
pub fn exact_haar_twirl(x: &DMatrix<C64>, t: usize, d: usize) -> Result<DMatrix<C64>> {
    let space = CopySpace::new(d, t)?;
    if x.nrows() != space.total_dim() || x.ncols() != space.total_dim() {
        return Err(Error::DimensionMismatch { expected: space.total_dim(), got: x.nrows() });
    }
    let twirl = BlockTwirl::new(t, d)?;
    let mut out = x.clone();
    let positions: Vec<usize> = (0..space.total_dim()).collect();
    twirl.apply(&mut out, &positions);
    Ok(out)
}

/// Independent exact Haar twirls on each region's copy block, in place.
pub fn local_twirl_in_place(
    matrix: &mut DMatrix<C64>,
    register: &QuditRegister,
    partition: &Partition,
    t: usize,
) -> Result<()> {
    let layout = RegionBlockLayout::new(register, partition, t)?;
    if matrix.nrows() != layout.total_dim() || matrix.ncols() != layout.total_dim() {
        return Err(Error::DimensionMismatch { expected: layout.total_dim(), got: matrix.nrows() });
    }
    for (i, d) in partition.region_dims(register).into_iter().enumerate() {
        BlockTwirl::new(t, d)?.apply(matrix, &layout.block_positions(i));
    }
    Ok(())
}

/// `⊗_i Φ_{A_i}` applied to a copy-space operator.
pub fn exact_local_twirl(
    rho_t: &DMatrix<C64>,
    register: &QuditRegister,
    partition: &Partition,
    t: usize,
) -> Result<MomentOperator> {
    let space = CopySpace::new(register.total_dim(), t)?;
    let mut out = rho_t.clone();
    local_twirl_in_place(&mut out, register, partition, t)?;
    MomentOperator::new(space, hermitize(&out), "local-twirl")
}
