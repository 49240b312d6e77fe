//! Qudit registers, pure states, regions and partitions, and the resource
//! states every ensemble is built from.
//!
//! Basis indices are mixed-radix with site 0 most significant. A region's
//! local index uses the same convention over the region's own sites, in
//! increasing site order.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::{axis_permutation_map, mixed_radix_digits};

pub type C64 = Complex64;

/// Tolerance on ‖ψ‖ for a state to be accepted as normalized.
pub const NORM_TOL: f64 = 1e-10;
/// Tolerance on max |U†U − I| for a matrix to be accepted as unitary.
pub const UNITARY_TOL: f64 = 1e-10;

/// An ordered list of sites with local dimensions ≥ 2.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct QuditRegister {
    site_dims: Vec<usize>,
    total_dim: usize,
}

impl QuditRegister {
    pub fn new(site_dims: Vec<usize>) -> Result<Self> {
        if site_dims.is_empty() {
            return Err(Error::InvalidRegister("register has no sites".into()));
        }
        if let Some(d) = site_dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidRegister(format!("site dimension {d} < 2")));
        }
        let total_dim = site_dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::InvalidRegister("total dimension overflows".into()))?;
        Ok(Self { site_dims, total_dim })
    }

    pub fn qubits(n: usize) -> Result<Self> {
        Self::new(vec![2; n])
    }

    pub fn site_dims(&self) -> &[usize] {
        &self.site_dims
    }

    pub fn n_sites(&self) -> usize {
        self.site_dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn is_qubits(&self) -> bool {
        self.site_dims.iter().all(|&d| d == 2)
    }

    /// Per-site digits of a basis index.
    pub fn digits(&self, index: usize) -> Vec<usize> {
        mixed_radix_digits(index, &self.site_dims)
    }
}

impl TryFrom<Vec<usize>> for QuditRegister {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<QuditRegister> for Vec<usize> {
    fn from(r: QuditRegister) -> Self {
        r.site_dims
    }
}

/// A set of sites, stored in strictly increasing order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Region {
    sites: Vec<usize>,
}

impl Region {
    /// Builds a region from site indices in any order; duplicates are rejected.
    pub fn new(mut sites: Vec<usize>) -> Result<Self> {
        sites.sort_unstable();
        if sites.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidRegion(format!("duplicate site in {sites:?}")));
        }
        Ok(Self { sites })
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn validate(&self, register: &QuditRegister) -> Result<()> {
        if let Some(&s) = self.sites.iter().find(|&&s| s >= register.n_sites()) {
            return Err(Error::InvalidRegion(format!(
                "site {s} out of range for {} sites",
                register.n_sites()
            )));
        }
        Ok(())
    }

    pub fn dims(&self, register: &QuditRegister) -> Vec<usize> {
        self.sites.iter().map(|&s| register.site_dims()[s]).collect()
    }

    pub fn dim(&self, register: &QuditRegister) -> usize {
        self.dims(register).iter().product()
    }

    pub fn complement(&self, register: &QuditRegister) -> Region {
        let sites = (0..register.n_sites())
            .filter(|s| self.sites.binary_search(s).is_err())
            .collect();
        Region { sites }
    }

    /// Maps each global basis index to `r * dim(complement) + c`, where `r`
    /// and `c` are the local indices on this region and on its complement.
    pub fn split_map(&self, register: &QuditRegister) -> Vec<usize> {
        let order: Vec<usize> = self
            .sites
            .iter()
            .copied()
            .chain(self.complement(register).sites)
            .collect();
        axis_permutation_map(register.site_dims(), &order)
    }
}

impl TryFrom<Vec<usize>> for Region {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Region> for Vec<usize> {
    fn from(r: Region) -> Self {
        r.sites
    }
}

/// Pairwise-disjoint regions covering every site of a register.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(into = "Vec<Region>")]
pub struct Partition {
    regions: Vec<Region>,
}

impl Partition {
    pub fn new(regions: Vec<Region>, register: &QuditRegister) -> Result<Self> {
        if regions.is_empty() {
            return Err(Error::InvalidPartition("no regions".into()));
        }
        let mut seen = vec![false; register.n_sites()];
        for region in &regions {
            region.validate(register)?;
            if region.is_empty() {
                return Err(Error::InvalidPartition("empty region".into()));
            }
            for &s in region.sites() {
                if seen[s] {
                    return Err(Error::InvalidPartition(format!("site {s} in two regions")));
                }
                seen[s] = true;
            }
        }
        if let Some(s) = seen.iter().position(|&b| !b) {
            return Err(Error::InvalidPartition(format!("site {s} not covered")));
        }
        Ok(Self { regions })
    }

    pub fn from_sites(regions: Vec<Vec<usize>>, register: &QuditRegister) -> Result<Self> {
        let regions = regions.into_iter().map(Region::new).collect::<Result<Vec<_>>>()?;
        Self::new(regions, register)
    }

    /// The single-region partition.
    pub fn whole(register: &QuditRegister) -> Self {
        Self {
            regions: vec![Region { sites: (0..register.n_sites()).collect() }],
        }
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn region_dims(&self, register: &QuditRegister) -> Vec<usize> {
        self.regions.iter().map(|r| r.dim(register)).collect()
    }

    /// Union of the first `i + 1` regions: the left side of cut `i`.
    pub fn cumulative_union(&self, i: usize) -> Region {
        let sites = self.regions[..=i].iter().flat_map(|r| r.sites.iter().copied()).collect();
        Region::new(sites).expect("regions are disjoint")
    }

    /// Sites in region order: every site of region 0, then region 1, ...
    pub fn site_order(&self) -> Vec<usize> {
        self.regions.iter().flat_map(|r| r.sites.iter().copied()).collect()
    }

    /// Global basis index from one local index per region.
    pub fn compose_index(&self, register: &QuditRegister, locals: &[usize]) -> usize {
        let mut digits = vec![0usize; register.n_sites()];
        for (region, &local) in self.regions.iter().zip(locals) {
            let dims = region.dims(register);
            for (&site, d) in region.sites.iter().zip(mixed_radix_digits(local, &dims)) {
                digits[site] = d;
            }
        }
        digits
            .iter()
            .zip(register.site_dims())
            .fold(0, |acc, (&d, &dim)| acc * dim + d)
    }
}

impl From<Partition> for Vec<Region> {
    fn from(p: Partition) -> Self {
        p.regions
    }
}

/// A normalized pure state on a qudit register.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    register: QuditRegister,
    amplitudes: DVector<C64>,
}

impl PureState {
    pub fn new(register: QuditRegister, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != register.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: register.total_dim(),
                got: amplitudes.len(),
            });
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::InvalidState("non-finite amplitude".into()));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("norm {norm} is not 1")));
        }
        Ok(Self { register, amplitudes })
    }

    /// Rescales to unit norm before validating.
    pub fn normalized(register: QuditRegister, amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite vector".into()));
        }
        Self::new(register, amplitudes / C64::from(norm))
    }

    pub fn register(&self) -> &QuditRegister {
        &self.register
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// Amplitudes arranged as a (region) × (complement) matrix.
    pub fn split_matrix(&self, region: &Region) -> Result<DMatrix<C64>> {
        region.validate(&self.register)?;
        let rows = region.dim(&self.register);
        let cols = self.dim() / rows;
        let map = region.split_map(&self.register);
        let mut m = DMatrix::zeros(rows, cols);
        for (g, &k) in map.iter().enumerate() {
            m[(k / cols, k % cols)] = self.amplitudes[g];
        }
        Ok(m)
    }

    /// Returns `(U ⊗ I_rest)|ψ⟩` with `U` acting on `region`.
    pub fn apply_local_unitary(&self, region: &Region, u: &DMatrix<C64>) -> Result<PureState> {
        region.validate(&self.register)?;
        let rows = region.dim(&self.register);
        if u.nrows() != rows || u.ncols() != rows {
            return Err(Error::DimensionMismatch { expected: rows, got: u.nrows().max(u.ncols()) });
        }
        check_unitary(u)?;
        let m = self.split_matrix(region)?;
        let cols = m.ncols();
        let um = u * m;
        let map = region.split_map(&self.register);
        let amplitudes = DVector::from_iterator(
            self.dim(),
            map.iter().map(|&k| um[(k / cols, k % cols)]),
        );
        Ok(PureState { register: self.register.clone(), amplitudes })
    }

    /// Applies a unitary on the whole register.
    pub fn apply_unitary(&self, u: &DMatrix<C64>) -> Result<PureState> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: u.nrows() });
        }
        check_unitary(u)?;
        Ok(PureState { register: self.register.clone(), amplitudes: u * &self.amplitudes })
    }

    /// `⟨self|other⟩`, conjugating `self`.
    pub fn overlap(&self, other: &PureState) -> Result<C64> {
        if self.register != other.register {
            return Err(Error::InvalidArgument("overlap of states on different registers".into()));
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// `|ψ⟩^{⊗t}` with copy 1 most significant.
    pub fn tensor_power(&self, t: usize) -> DVector<C64> {
        let mut v = DVector::from_element(1, C64::new(1.0, 0.0));
        for _ in 0..t {
            v = v.kronecker(&self.amplitudes);
        }
        v
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Max elementwise deviation of `U†U` from the identity; errors above [`UNITARY_TOL`].
pub fn check_unitary(u: &DMatrix<C64>) -> Result<()> {
    let deviation = unitarity_deviation(u);
    if deviation > UNITARY_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(())
}

pub fn unitarity_deviation(u: &DMatrix<C64>) -> f64 {
    let p = u.adjoint() * u;
    let mut worst = 0.0f64;
    for i in 0..p.nrows() {
        for j in 0..p.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((p[(i, j)] - target).norm());
        }
    }
    worst
}

#[derive(Serialize, Deserialize)]
struct RawState {
    site_dims: Vec<usize>,
    amplitudes: Vec<[f64; 2]>,
}

impl Serialize for PureState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawState {
            site_dims: self.register.site_dims().to_vec(),
            amplitudes: self.amplitudes.iter().map(|a| [a.re, a.im]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PureState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawState::deserialize(d)?;
        let register = QuditRegister::new(raw.site_dims).map_err(serde::de::Error::custom)?;
        let amplitudes = DVector::from_iterator(
            raw.amplitudes.len(),
            raw.amplitudes.iter().map(|&[re, im]| C64::new(re, im)),
        );
        PureState::new(register, amplitudes).map_err(serde::de::Error::custom)
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        // Coverage can only be checked against a register; see `Partition::new`.
        let regions = Vec::<Region>::deserialize(d)?;
        Ok(Partition { regions })
    }
}

pub fn basis_state(register: &QuditRegister, index: usize) -> Result<PureState> {
    if index >= register.total_dim() {
        return Err(Error::IndexOutOfRange { index, dim: register.total_dim() });
    }
    let mut amplitudes = DVector::zeros(register.total_dim());
    amplitudes[index] = C64::new(1.0, 0.0);
    PureState::new(register.clone(), amplitudes)
}

/// Equal superposition of the first `support` basis states.
pub fn uniform_superposition(register: &QuditRegister, support: usize) -> Result<PureState> {
    if support == 0 || support > register.total_dim() {
        return Err(Error::InvalidArgument(format!(
            "support {support} not in 1..={}",
            register.total_dim()
        )));
    }
    let a = C64::new(1.0 / (support as f64).sqrt(), 0.0);
    let amplitudes = DVector::from_fn(register.total_dim(), |i, _| if i < support { a } else { C64::default() });
    PureState::normalized(register.clone(), amplitudes)
}

fn two_region_partition(register: &QuditRegister, a: &Region, b: &Region) -> Result<Partition> {
    Partition::new(vec![a.clone(), b.clone()], register)
}

/// `(1/√K) Σ_{z<K} |z⟩_A |z⟩_B`.
pub fn max_entangled_state(
    register: &QuditRegister,
    bipartition: (&Region, &Region),
    rank: usize,
) -> Result<PureState> {
    let partition = two_region_partition(register, bipartition.0, bipartition.1)?;
    let dims = partition.region_dims(register);
    if rank == 0 || rank > dims[0].min(dims[1]) {
        return Err(Error::Capacity(format!(
            "rank {rank} exceeds region dimensions {dims:?}"
        )));
    }
    let a = C64::new(1.0 / (rank as f64).sqrt(), 0.0);
    let mut amplitudes = DVector::zeros(register.total_dim());
    for z in 0..rank {
        amplitudes[partition.compose_index(register, &[z, z])] = a;
    }
    PureState::normalized(register.clone(), amplitudes)
}

/// Chain of maximally entangled pairs, rank `ranks[i]` across cut `i`.
///
/// Region `i` stores its left partner index `zl` and right partner index `zr`
/// as local index `zl * ranks[i] + zr`.
pub fn bell_chain_state(
    register: &QuditRegister,
    partition: &Partition,
    ranks: &[usize],
) -> Result<PureState> {
    let l = partition.len();
    if l < 2 || ranks.len() != l - 1 {
        return Err(Error::InvalidArgument(format!(
            "{l} regions need {} interface ranks, got {}",
            l.saturating_sub(1),
            ranks.len()
        )));
    }
    if ranks.contains(&0) {
        return Err(Error::InvalidArgument("interface rank 0".into()));
    }
    let dims = partition.region_dims(register);
    for i in 0..l {
        let left = if i > 0 { ranks[i - 1] } else { 1 };
        let right = if i + 1 < l { ranks[i] } else { 1 };
        if dims[i] < left * right {
            return Err(Error::Capacity(format!(
                "region {i} has dimension {} < {left}·{right}",
                dims[i]
            )));
        }
    }
    let total: usize = ranks.iter().product();
    let a = C64::new(1.0 / (total as f64).sqrt(), 0.0);
    let mut amplitudes = DVector::zeros(register.total_dim());
    let mut z = vec![0usize; l - 1];
    let mut locals = vec![0usize; l];
    for _ in 0..total {
        for i in 0..l {
            let left = if i > 0 { z[i - 1] } else { 0 };
            let (right, right_rank) = if i + 1 < l { (z[i], ranks[i]) } else { (0, 1) };
            locals[i] = left * right_rank + right;
        }
        amplitudes[partition.compose_index(register, &locals)] = a;
        // odometer over interface labels
        for k in (0..l - 1).rev() {
            z[k] += 1;
            if z[k] < ranks[k] {
                break;
            }
            z[k] = 0;
        }
    }
    PureState::normalized(register.clone(), amplitudes)
}

/// `(1/√d) Σ_{x<d} ⊗_i |x⟩_{A_i}`.
pub fn ghz_state(register: &QuditRegister, partition: &Partition, level: usize) -> Result<PureState> {
    if partition.len() < 2 {
        return Err(Error::InvalidArgument("GHZ state needs at least two regions".into()));
    }
    let min_dim = partition.region_dims(register).into_iter().min().unwrap_or(0);
    if level == 0 || level > min_dim {
        return Err(Error::Capacity(format!(
            "level {level} exceeds smallest region dimension {min_dim}"
        )));
    }
    let a = C64::new(1.0 / (level as f64).sqrt(), 0.0);
    let mut amplitudes = DVector::zeros(register.total_dim());
    for x in 0..level {
        let locals = vec![x; partition.len()];
        amplitudes[partition.compose_index(register, &locals)] = a;
    }
    PureState::normalized(register.clone(), amplitudes)
}
