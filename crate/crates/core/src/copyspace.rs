//! Operators on the t-copy space `(C^N)^{⊗t}`, copy 1 most significant.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::layout::{axis_permutation_map, invert_map, mixed_radix_digits, relabel_matrix, relabel_vector};
use crate::linalg::{hermitian_eigenvalues, hermiticity_deviation, trace};
use crate::perm::{factorial, Permutation, SymmetricGroup};
use crate::registers::{Partition, QuditRegister, C64};

/// Largest dense copy-space dimension.
pub const MAX_COPY_DIM: usize = 8192;
/// Largest copy count for which `S_t` is enumerated.
pub const MAX_SYM_COPIES: usize = 6;
/// Hermiticity, trace and positivity tolerance for moment operators.
pub const MOMENT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CopySpace {
    base_dim: usize,
    copies: usize,
    total_dim: usize,
}

impl CopySpace {
    pub fn new(base_dim: usize, copies: usize) -> Result<Self> {
        if base_dim == 0 || copies == 0 {
            return Err(Error::InvalidArgument(format!(
                "copy space needs N ≥ 1 and t ≥ 1, got N={base_dim}, t={copies}"
            )));
        }
        let total_dim = u32::try_from(copies)
            .ok()
            .and_then(|t| base_dim.checked_pow(t))
            .filter(|&d| d <= MAX_COPY_DIM)
            .ok_or(Error::SizeCap {
                what: "copy-space dimension",
                size: base_dim.saturating_pow(copies.min(64) as u32),
                cap: MAX_COPY_DIM,
            })?;
        Ok(Self { base_dim, copies, total_dim })
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    /// Dimension of the symmetric subspace, `binom(N+t-1, t)`.
    pub fn symmetric_dim(&self) -> usize {
        binomial(self.base_dim + self.copies - 1, self.copies)
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// A Hermitian, unit-trace operator on a copy space.
#[derive(Clone, Debug)]
pub struct MomentOperator {
    space: CopySpace,
    matrix: DMatrix<C64>,
    label: String,
}

impl MomentOperator {
    /// Validates Hermiticity and unit trace. Positivity costs a full
    /// eigendecomposition and is checked separately by [`Self::check_psd`].
    pub fn new(space: CopySpace, matrix: DMatrix<C64>, label: impl Into<String>) -> Result<Self> {
        let dim = space.total_dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: matrix.nrows() });
        }
        let deviation = hermiticity_deviation(&matrix);
        if deviation > MOMENT_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let tr = trace(&matrix);
        if (tr - C64::new(1.0, 0.0)).norm() > MOMENT_TOL {
            return Err(Error::Numerical(format!("moment operator has trace {tr}")));
        }
        Ok(Self { space, matrix, label: label.into() })
    }

    pub fn space(&self) -> CopySpace {
        self.space
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(hermitian_eigenvalues(&self.matrix)?.first().copied().unwrap_or(0.0))
    }

    pub fn check_psd(&self) -> Result<()> {
        let min = self.min_eigenvalue()?;
        if min < -MOMENT_TOL {
            return Err(Error::Numerical(format!("moment operator has eigenvalue {min}")));
        }
        Ok(())
    }
}

/// Index map of `P_σ`: `P_σ |x⟩ = |map[x]⟩`.
pub fn permutation_map(sigma: &Permutation, space: CopySpace) -> Result<Vec<usize>> {
    if sigma.degree() != space.copies() {
        return Err(Error::InvalidPermutation(sigma.images().to_vec()));
    }
    // new axis k carries old axis σ⁻¹(k)
    let order = sigma.inverse().images().to_vec();
    Ok(axis_permutation_map(&vec![space.base_dim(); space.copies()], &order))
}

/// `P_σ |x_1..x_t⟩ = |x_{σ⁻¹(1)}..x_{σ⁻¹(t)}⟩`.
pub fn permutation_operator(sigma: &Permutation, space: CopySpace) -> Result<DMatrix<C64>> {
    let map = permutation_map(sigma, space)?;
    let dim = space.total_dim();
    let mut p = DMatrix::zeros(dim, dim);
    for (x, &y) in map.iter().enumerate() {
        p[(y, x)] = C64::new(1.0, 0.0);
    }
    Ok(p)
}

/// `(1/t!) Σ_σ P_σ`.
pub fn symmetric_projector(space: CopySpace) -> Result<DMatrix<C64>> {
    if space.copies() > MAX_SYM_COPIES {
        return Err(Error::SizeCap { what: "copies for S_t enumeration", size: space.copies(), cap: MAX_SYM_COPIES });
    }
    let group = SymmetricGroup::new(space.copies());
    let weight = C64::new(1.0 / factorial(space.copies()) as f64, 0.0);
    let dim = space.total_dim();
    let mut proj = DMatrix::zeros(dim, dim);
    for sigma in group.elements() {
        for (x, y) in permutation_map(sigma, space)?.into_iter().enumerate() {
            proj[(y, x)] += weight;
        }
    }
    Ok(proj)
}

/// `Π_sym / binom(N+t-1, t)`.
pub fn haar_moment(space: CopySpace) -> Result<MomentOperator> {
    let proj = symmetric_projector(space)?;
    let scale = C64::new(1.0 / space.symmetric_dim() as f64, 0.0);
    MomentOperator::new(space, proj * scale, "haar")
}

/// `|ψ⟩⟨ψ|^{⊗t}` for a vector on the copy space.
pub fn pure_moment(space: CopySpace, copies_vector: &DVector<C64>, label: &str) -> Result<MomentOperator> {
    MomentOperator::new(space, copies_vector * copies_vector.adjoint(), label)
}

/// Probability that `t` indices drawn i.i.d. from `weights` are pairwise
/// distinct: `t!·e_t(q)`.
pub fn p_dist(weights: &[f64], t: usize) -> Result<f64> {
    if t == 0 {
        return Err(Error::InvalidArgument("p_dist needs t ≥ 1".into()));
    }
    if weights.iter().any(|&q| q < 0.0 || !q.is_finite()) {
        return Err(Error::InvalidDistribution("negative or non-finite weight".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > crate::entropy::DIST_TOL {
        return Err(Error::InvalidDistribution(format!("weights sum to {total}")));
    }
    // e[k] = k-th elementary symmetric polynomial of the prefix seen so far
    let mut e = vec![0.0; t + 1];
    e[0] = 1.0;
    for (seen, &q) in weights.iter().enumerate() {
        for k in (1..=t.min(seen + 1)).rev() {
            e[k] += q * e[k - 1];
        }
    }
    Ok((factorial(t) as f64 * e[t]).clamp(0.0, 1.0))
}

/// `½(1 - p²)`.
pub fn pure_overlap_trace_distance(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("probability {p} outside [0, 1]")));
    }
    Ok(0.5 * (1.0 - p * p))
}

/// Relabeling of the copy space of a partitioned register into
/// `H_{A_1}^{⊗t} ⊗ … ⊗ H_{A_l}^{⊗t}`, each block copy-major.
#[derive(Clone, Debug)]
pub struct RegionBlockLayout {
    block_dims: Vec<usize>,
    map: Vec<usize>,
    inverse: Vec<usize>,
}

impl RegionBlockLayout {
    pub fn new(register: &QuditRegister, partition: &Partition, t: usize) -> Result<Self> {
        Partition::new(partition.regions().to_vec(), register)?;
        let space = CopySpace::new(register.total_dim(), t)?;
        let n = register.n_sites();
        let dims: Vec<usize> = (0..t).flat_map(|_| register.site_dims().iter().copied()).collect();
        let order: Vec<usize> = partition
            .regions()
            .iter()
            .flat_map(|r| (0..t).flat_map(move |c| r.sites().iter().map(move |&s| c * n + s)))
            .collect();
        let map = axis_permutation_map(&dims, &order);
        debug_assert_eq!(map.len(), space.total_dim());
        let inverse = invert_map(&map);
        let block_dims = partition
            .region_dims(register)
            .into_iter()
            .map(|d| d.pow(t as u32))
            .collect();
        Ok(Self { block_dims, map, inverse })
    }

    /// `d_{A_i}^t` for each region.
    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn total_dim(&self) -> usize {
        self.map.len()
    }

    /// `map[original] = reordered`.
    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn reorder_matrix(&self, m: &DMatrix<C64>) -> Result<DMatrix<C64>> {
        self.check(m.nrows(), m.ncols())?;
        Ok(relabel_matrix(m, &self.map))
    }

    pub fn restore_matrix(&self, m: &DMatrix<C64>) -> Result<DMatrix<C64>> {
        self.check(m.nrows(), m.ncols())?;
        Ok(relabel_matrix(m, &self.inverse))
    }

    pub fn reorder_vector(&self, v: &DVector<C64>) -> Result<DVector<C64>> {
        self.check(v.len(), v.len())?;
        Ok(relabel_vector(v, &self.map))
    }

    pub fn restore_vector(&self, v: &DVector<C64>) -> Result<DVector<C64>> {
        self.check(v.len(), v.len())?;
        Ok(relabel_vector(v, &self.inverse))
    }

    /// Original indices of block `i` entries: `positions[o * m + a]` is the
    /// original index whose reordered form has local index `a` in block `i`
    /// and outer index `o` (the remaining blocks, in order).
    pub fn block_positions(&self, i: usize) -> Vec<usize> {
        let m = self.block_dims[i];
        let right: usize = self.block_dims[i + 1..].iter().product();
        let outer = self.total_dim() / m;
        let mut positions = vec![0; self.total_dim()];
        for o in 0..outer {
            let (l, r) = (o / right, o % right);
            for a in 0..m {
                positions[o * m + a] = self.inverse[(l * m + a) * right + r];
            }
        }
        positions
    }

    fn check(&self, rows: usize, cols: usize) -> Result<()> {
        let dim = self.total_dim();
        if rows != dim || cols != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: rows.max(cols) });
        }
        Ok(())
    }
}

/// Per-region basis labels of every copy-space index.
///
/// Entry `(i, r, c)` is the local index on region `r` of copy `c` in
/// copy-space index `i`.
#[derive(Clone, Debug)]
pub struct CopyLabels {
    region_dims: Vec<usize>,
    copies: usize,
    labels: Vec<u32>,
    /// `contributions[r][c][label]` is the copy-space index offset of that label.
    contributions: Vec<Vec<Vec<usize>>>,
}

impl CopyLabels {
    pub fn new(register: &QuditRegister, partition: &Partition, t: usize) -> Result<Self> {
        Partition::new(partition.regions().to_vec(), register)?;
        let space = CopySpace::new(register.total_dim(), t)?;
        let n = register.n_sites();
        let site_dims = register.site_dims();
        let dims: Vec<usize> = (0..t).flat_map(|_| site_dims.iter().copied()).collect();
        let mut stride = vec![1usize; t * n];
        for a in (0..t * n - 1).rev() {
            stride[a] = stride[a + 1] * dims[a + 1];
        }
        let regions = partition.regions();
        let region_dims = partition.region_dims(register);
        let width = regions.len() * t;
        let mut labels = vec![0u32; space.total_dim() * width];
        for i in 0..space.total_dim() {
            let digits = mixed_radix_digits(i, &dims);
            for (r, region) in regions.iter().enumerate() {
                for c in 0..t {
                    let label = region.sites().iter().fold(0usize, |acc, &s| acc * site_dims[s] + digits[c * n + s]);
                    labels[i * width + r * t + c] = label as u32;
                }
            }
        }
        let contributions = regions
            .iter()
            .zip(&region_dims)
            .map(|(region, &dim)| {
                let local_dims = region.dims(register);
                (0..t)
                    .map(|c| {
                        (0..dim)
                            .map(|label| {
                                mixed_radix_digits(label, &local_dims)
                                    .iter()
                                    .zip(region.sites())
                                    .map(|(&d, &s)| d * stride[c * n + s])
                                    .sum()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Ok(Self { region_dims, copies: t, labels, contributions })
    }

    /// Labels for the plain copy space over one `N`-dimensional system.
    pub fn single(base_dim: usize, t: usize) -> Result<Self> {
        let register = QuditRegister::new(vec![base_dim])?;
        Self::new(&register, &Partition::whole(&register), t)
    }

    pub fn region_dims(&self) -> &[usize] {
        &self.region_dims
    }

    pub fn n_regions(&self) -> usize {
        self.region_dims.len()
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn total_dim(&self) -> usize {
        self.labels.len() / (self.n_regions() * self.copies)
    }

    /// The `t` labels of region `r` in index `i`.
    pub fn labels(&self, i: usize, r: usize) -> &[u32] {
        let width = self.n_regions() * self.copies;
        let start = i * width + r * self.copies;
        &self.labels[start..start + self.copies]
    }

    /// Copy-space index with every region label relabeled by `perms[r]`.
    pub fn permuted_index(&self, i: usize, perms: &[Vec<usize>]) -> usize {
        let mut out = 0;
        for (r, p) in perms.iter().enumerate() {
            for (c, &label) in self.labels(i, r).iter().enumerate() {
                out += self.contributions[r][c][p[label as usize]];
            }
        }
        out
    }
}

/// Orthonormal basis of the symmetric subspace, one vector per multiset of
/// `t` labels: the normalized sum over its distinct orderings.
#[derive(Clone, Debug)]
pub struct SymmetricBasis {
    space: CopySpace,
    supports: Vec<Vec<usize>>,
    coefficients: Vec<f64>,
}

impl SymmetricBasis {
    pub fn new(space: CopySpace) -> Self {
        let (n, t) = (space.base_dim(), space.copies());
        let mut supports = Vec::with_capacity(space.symmetric_dim());
        let mut tuple = vec![0usize; t];
        loop {
            let mut orderings: Vec<usize> = Permutation::all(t)
                .iter()
                .map(|p| (0..t).fold(0, |acc, k| acc * n + tuple[p.apply(k)]))
                .collect();
            orderings.sort_unstable();
            orderings.dedup();
            supports.push(orderings);
            // next nondecreasing tuple
            let Some(k) = (0..t).rev().find(|&k| tuple[k] + 1 < n) else { break };
            let v = tuple[k] + 1;
            tuple[k..].iter_mut().for_each(|x| *x = v);
        }
        let coefficients = supports.iter().map(|s| 1.0 / (s.len() as f64).sqrt()).collect();
        Self { space, supports, coefficients }
    }

    pub fn len(&self) -> usize {
        self.supports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.supports.is_empty()
    }

    /// `‖M - B C Bᵀ‖_F` for `C = B† M B`: the part of `M` outside the
    /// symmetric block.
    pub fn reconstruction_residual(&self, m: &DMatrix<C64>, compressed: &DMatrix<C64>) -> f64 {
        let dim = self.space.total_dim();
        let mut class = vec![0usize; dim];
        for (a, support) in self.supports.iter().enumerate() {
            for &i in support {
                class[i] = a;
            }
        }
        let mut total = 0.0;
        for j in 0..dim {
            let b = class[j];
            for i in 0..dim {
                let a = class[i];
                let rebuilt = compressed[(a, b)] * (self.coefficients[a] * self.coefficients[b]);
                total += (m[(i, j)] - rebuilt).norm_sqr();
            }
        }
        total.sqrt()
    }

    /// `B† M B` where the columns of `B` are the basis vectors.
    pub fn compress(&self, m: &DMatrix<C64>) -> Result<DMatrix<C64>> {
        let dim = self.space.total_dim();
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: m.nrows() });
        }
        let k = self.len();
        let mut mb = DMatrix::<C64>::zeros(dim, k);
        for (b, (support, &cb)) in self.supports.iter().zip(&self.coefficients).enumerate() {
            let mut col = mb.column_mut(b);
            for &j in support {
                col += m.column(j);
            }
            col *= C64::new(cb, 0.0);
        }
        Ok(DMatrix::from_fn(k, k, |a, b| {
            let s: C64 = self.supports[a].iter().map(|&i| mb[(i, b)]).sum();
            s * self.coefficients[a]
        }))
    }
}
