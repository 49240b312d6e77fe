//! Resource-orbit ensembles: declarative specs, samplers and exact moments.

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{weighted::WeightedIndex, Distribution};
use serde::{Deserialize, Serialize};

use crate::copyspace::{CopyLabels, CopySpace, MomentOperator};
use crate::entropy::DIST_TOL;
use crate::error::{Error, Result};
use crate::perm::{factorial, Permutation};
use crate::registers::{
    basis_state, bell_chain_state, check_unitary, ghz_state, max_entangled_state, uniform_superposition, Partition,
    PureState, QuditRegister, Region, C64,
};
use crate::twirl::{
    local_twirl_in_place, permutation_twirl_in_place, phase_twirl_in_place, sample_haar_unitary, sample_permutation,
    sample_phase_unitary, PhaseMode, MAX_EXACT_PERMUTATION_COPIES,
};

/// Largest basis size for which the full permutation group is enumerated.
pub const MAX_PERMUTATION_GROUP_DIM: usize = 6;
/// Largest qubit count for which the Pauli group is enumerated.
pub const MAX_PAULI_GROUP_QUBITS: usize = 4;

/// An ensemble of pure states generated from a resource state.
#[derive(Clone, Debug)]
pub enum EnsembleSpec {
    /// Independent Haar unitaries on each region.
    EntOrbit { state: PureState, partition: Partition },
    /// A uniform basis permutation followed by uniform phases on the full register.
    CohOrbit { state: PureState },
    /// Entanglement orbit of the `level`-level GHZ state.
    GhzOrbit { register: QuditRegister, partition: Partition, level: usize },
    /// Entanglement orbit of the Bell chain with the given interface ranks.
    MarkovOrbit { register: QuditRegister, partition: Partition, ranks: Vec<usize> },
    /// Independent permutation and phase unitaries on each side of a rank-`rank`
    /// maximally entangled state.
    EcOrbit { register: QuditRegister, bipartition: Partition, rank: usize, phase_mode: PhaseMode },
    /// `elements[k]` applied to the base orbit's state with probability `weights[k]`.
    WeightedOrbit { base: Box<EnsembleSpec>, elements: Vec<DMatrix<C64>>, weights: Vec<f64> },
}

impl EnsembleSpec {
    pub fn variant_name(&self) -> &'static str {
        match self {
            EnsembleSpec::EntOrbit { .. } => "EntOrbit",
            EnsembleSpec::CohOrbit { .. } => "CohOrbit",
            EnsembleSpec::GhzOrbit { .. } => "GhzOrbit",
            EnsembleSpec::MarkovOrbit { .. } => "MarkovOrbit",
            EnsembleSpec::EcOrbit { .. } => "EcOrbit",
            EnsembleSpec::WeightedOrbit { .. } => "WeightedOrbit",
        }
    }

    pub fn register(&self) -> &QuditRegister {
        match self {
            EnsembleSpec::EntOrbit { state, .. } | EnsembleSpec::CohOrbit { state } => state.register(),
            EnsembleSpec::GhzOrbit { register, .. }
            | EnsembleSpec::MarkovOrbit { register, .. }
            | EnsembleSpec::EcOrbit { register, .. } => register,
            EnsembleSpec::WeightedOrbit { base, .. } => base.register(),
        }
    }

    /// Regions on which the orbit's group acts independently.
    pub fn partition(&self) -> Partition {
        match self {
            EnsembleSpec::EntOrbit { partition, .. }
            | EnsembleSpec::GhzOrbit { partition, .. }
            | EnsembleSpec::MarkovOrbit { partition, .. } => partition.clone(),
            EnsembleSpec::EcOrbit { bipartition, .. } => bipartition.clone(),
            EnsembleSpec::CohOrbit { state } => Partition::whole(state.register()),
            EnsembleSpec::WeightedOrbit { base, .. } => base.partition(),
        }
    }

    /// The resource state the orbit is generated from.
    pub fn base_state(&self) -> Result<PureState> {
        match self {
            EnsembleSpec::EntOrbit { state, .. } | EnsembleSpec::CohOrbit { state } => Ok(state.clone()),
            EnsembleSpec::GhzOrbit { register, partition, level } => ghz_state(register, partition, *level),
            EnsembleSpec::MarkovOrbit { register, partition, ranks } => bell_chain_state(register, partition, ranks),
            EnsembleSpec::EcOrbit { register, bipartition, rank, .. } => {
                let r = bipartition.regions();
                max_entangled_state(register, (&r[0], &r[1]), *rank)
            }
            EnsembleSpec::WeightedOrbit { base, .. } => base.base_state(),
        }
    }

    /// Cuts `(𝒜_i, 𝒜_i^c)` across which entanglement is reported, as the `𝒜_i`.
    pub fn entanglement_cuts(&self) -> Vec<Region> {
        match self {
            EnsembleSpec::CohOrbit { .. } => Vec::new(),
            EnsembleSpec::WeightedOrbit { base, .. } => base.entanglement_cuts(),
            _ => {
                let p = self.partition();
                (0..p.len().saturating_sub(1)).map(|i| p.cumulative_union(i)).collect()
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let register = self.register();
        Partition::new(self.partition().regions().to_vec(), register)?;
        match self {
            EnsembleSpec::EcOrbit { bipartition, .. } if bipartition.len() != 2 => {
                return Err(Error::InvalidPartition("EcOrbit needs exactly two regions".into()));
            }
            EnsembleSpec::WeightedOrbit { base, elements, weights } => {
                if matches!(**base, EnsembleSpec::WeightedOrbit { .. }) {
                    return Err(Error::InvalidArgument("nested weighted orbits".into()));
                }
                base.validate()?;
                if elements.is_empty() || elements.len() != weights.len() {
                    return Err(Error::InvalidArgument(format!(
                        "{} elements with {} weights",
                        elements.len(),
                        weights.len()
                    )));
                }
                validate_weights(weights)?;
                let dim = register.total_dim();
                for u in elements {
                    if u.nrows() != dim || u.ncols() != dim {
                        return Err(Error::DimensionMismatch { expected: dim, got: u.nrows() });
                    }
                    check_unitary(u)?;
                }
            }
            _ => {}
        }
        self.base_state().map(|_| ())
    }

    /// Whether [`Self::exact_moment`] supports `t`.
    pub fn has_exact_route(&self, t: usize) -> bool {
        match self {
            EnsembleSpec::CohOrbit { .. } | EnsembleSpec::EcOrbit { .. } => t <= MAX_EXACT_PERMUTATION_COPIES,
            _ => true,
        }
    }

    /// One draw from the ensemble.
    pub fn sample_state<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PureState> {
        match self {
            EnsembleSpec::EntOrbit { .. } | EnsembleSpec::GhzOrbit { .. } | EnsembleSpec::MarkovOrbit { .. } => {
                let register = self.register();
                let mut state = self.base_state()?;
                for region in self.partition().regions() {
                    let u = sample_haar_unitary(region.dim(register), rng)?;
                    state = state.apply_local_unitary(region, &u)?;
                }
                Ok(state)
            }
            EnsembleSpec::CohOrbit { .. } => sample_monomial(&self.base_state()?, &self.partition(), PhaseMode::Continuous, rng),
            EnsembleSpec::EcOrbit { phase_mode, .. } => {
                sample_monomial(&self.base_state()?, &self.partition(), *phase_mode, rng)
            }
            EnsembleSpec::WeightedOrbit { base, elements, weights } => {
                let index = WeightedIndex::new(weights)
                    .map_err(|e| Error::InvalidDistribution(e.to_string()))?
                    .sample(rng);
                base.base_state()?.apply_unitary(&elements[index])
            }
        }
    }

    /// One element of the orbit's group as a dense unitary on the full register.
    pub fn sample_group_element<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<DMatrix<C64>> {
        let register = self.register();
        let partition = self.partition();
        match self {
            EnsembleSpec::EntOrbit { .. } | EnsembleSpec::GhzOrbit { .. } | EnsembleSpec::MarkovOrbit { .. } => {
                let mut u = DMatrix::identity(register.total_dim(), register.total_dim());
                for region in partition.regions() {
                    let local = sample_haar_unitary(region.dim(register), rng)?;
                    u = embed_local(register, region, &local) * u;
                }
                Ok(u)
            }
            EnsembleSpec::CohOrbit { .. } | EnsembleSpec::EcOrbit { .. } => {
                let mode = match self {
                    EnsembleSpec::EcOrbit { phase_mode, .. } => *phase_mode,
                    _ => PhaseMode::Continuous,
                };
                let dim = register.total_dim();
                let mut u = DMatrix::zeros(dim, dim);
                let labels = CopyLabels::new(register, &partition, 1)?;
                let (perms, phases) = sample_monomial_parts(&labels, mode, rng);
                for i in 0..dim {
                    let (j, phase) = monomial_image(&labels, i, &perms, &phases);
                    u[(j, i)] = phase;
                }
                Ok(u)
            }
            EnsembleSpec::WeightedOrbit { base, .. } => base.sample_group_element(rng),
        }
    }

    /// The exact `t`-th moment `E[|φ⟩⟨φ|^{⊗t}]`.
    pub fn exact_moment(&self, t: usize) -> Result<MomentOperator> {
        self.validate()?;
        let register = self.register();
        let space = CopySpace::new(register.total_dim(), t)?;
        if !self.has_exact_route(t) {
            return Err(Error::Unsupported(format!(
                "{} has no exact route at t = {t} (needs t ≤ {MAX_EXACT_PERMUTATION_COPIES})",
                self.variant_name()
            )));
        }
        let label = format!("exact:{}", self.variant_name());
        match self {
            EnsembleSpec::WeightedOrbit { base, elements, weights } => {
                let psi = base.base_state()?;
                let mut rho = DMatrix::<C64>::zeros(space.total_dim(), space.total_dim());
                for (u, &w) in elements.iter().zip(weights) {
                    if w == 0.0 {
                        continue;
                    }
                    let v = psi.apply_unitary(u)?.tensor_power(t);
                    rho.gerc(C64::new(w, 0.0), &v, &v, C64::new(1.0, 0.0));
                }
                MomentOperator::new(space, rho, label)
            }
            _ => {
                let v = self.base_state()?.tensor_power(t);
                let mut rho = &v * v.adjoint();
                let partition = self.partition();
                match self {
                    EnsembleSpec::CohOrbit { .. } | EnsembleSpec::EcOrbit { .. } => {
                        let mode = match self {
                            EnsembleSpec::EcOrbit { phase_mode, .. } => *phase_mode,
                            _ => PhaseMode::Continuous,
                        };
                        let labels = CopyLabels::new(register, &partition, t)?;
                        phase_twirl_in_place(&mut rho, &labels, mode)?;
                        permutation_twirl_in_place(&mut rho, &labels)?;
                    }
                    _ => local_twirl_in_place(&mut rho, register, &partition, t)?,
                }
                MomentOperator::new(space, rho, label)
            }
        }
    }
}

fn validate_weights(weights: &[f64]) -> Result<()> {
    if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
        return Err(Error::InvalidDistribution("negative or non-finite weight".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > DIST_TOL {
        return Err(Error::InvalidDistribution(format!("weights sum to {total}")));
    }
    Ok(())
}

type MonomialParts = (Vec<Vec<usize>>, Vec<DVector<C64>>);

fn sample_monomial_parts<R: Rng + ?Sized>(labels: &CopyLabels, mode: PhaseMode, rng: &mut R) -> MonomialParts {
    labels
        .region_dims()
        .iter()
        .map(|&n| (sample_permutation(n, rng), sample_phase_unitary(n, mode, rng)))
        .unzip()
}

/// Image of basis index `i` under `⊗_r F_r P_r`.
fn monomial_image(labels: &CopyLabels, i: usize, perms: &[Vec<usize>], phases: &[DVector<C64>]) -> (usize, C64) {
    let j = labels.permuted_index(i, perms);
    let phase = (0..labels.n_regions())
        .map(|r| phases[r][perms[r][labels.labels(i, r)[0] as usize]])
        .product();
    (j, phase)
}

fn sample_monomial<R: Rng + ?Sized>(
    state: &PureState,
    partition: &Partition,
    mode: PhaseMode,
    rng: &mut R,
) -> Result<PureState> {
    let labels = CopyLabels::new(state.register(), partition, 1)?;
    let (perms, phases) = sample_monomial_parts(&labels, mode, rng);
    let mut out = DVector::zeros(state.dim());
    for (i, &a) in state.amplitudes().iter().enumerate() {
        let (j, phase) = monomial_image(&labels, i, &perms, &phases);
        out[j] = phase * a;
    }
    PureState::new(state.register().clone(), out)
}

/// `U ⊗ I_rest` as a matrix on the full register.
pub fn embed_local(register: &QuditRegister, region: &Region, u: &DMatrix<C64>) -> DMatrix<C64> {
    let dim = register.total_dim();
    let cols = dim / region.dim(register);
    let map = region.split_map(register);
    DMatrix::from_fn(dim, dim, |i, j| {
        let (ki, kj) = (map[i], map[j]);
        if ki % cols == kj % cols {
            u[(ki / cols, kj / cols)]
        } else {
            C64::default()
        }
    })
}

/// All `4ⁿ` Pauli strings `X^x Z^z` on a qubit register, phases dropped.
pub fn pauli_group(register: &QuditRegister) -> Result<Vec<DMatrix<C64>>> {
    if !register.is_qubits() {
        return Err(Error::NonQubit(register.site_dims().to_vec()));
    }
    let n = register.n_sites();
    if n > MAX_PAULI_GROUP_QUBITS {
        return Err(Error::SizeCap { what: "qubits for Pauli group", size: n, cap: MAX_PAULI_GROUP_QUBITS });
    }
    let dim = register.total_dim();
    Ok((0..dim * dim)
        .map(|s| {
            let (x, z) = (s / dim, s % dim);
            let mut p = DMatrix::zeros(dim, dim);
            for j in 0..dim {
                let sign = if (j & z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                p[(j ^ x, j)] = C64::new(sign, 0.0);
            }
            p
        })
        .collect())
}

/// All `N!` permutation matrices of the computational basis.
pub fn permutation_group(register: &QuditRegister) -> Result<Vec<DMatrix<C64>>> {
    let dim = register.total_dim();
    if dim > MAX_PERMUTATION_GROUP_DIM {
        return Err(Error::SizeCap { what: "basis size for permutation group", size: dim, cap: MAX_PERMUTATION_GROUP_DIM });
    }
    debug_assert_eq!(Permutation::all(dim).len(), factorial(dim));
    Ok(Permutation::all(dim)
        .into_iter()
        .map(|p| {
            let mut m = DMatrix::zeros(dim, dim);
            for x in 0..dim {
                m[(p.apply(x), x)] = C64::new(1.0, 0.0);
            }
            m
        })
        .collect())
}

/// JSON reference to a state.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StateRef {
    Inline(PureState),
    /// Path to a state file, relative to the document's directory.
    Path(PathBuf),
    Basis { index: usize },
    /// Rank-`rank` maximally entangled state across the first two regions.
    MaxEntangled { rank: usize },
    UniformSuperposition { support: usize },
}

/// JSON description of a group element set.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ElementSetDoc {
    PauliGroup,
    PermutationGroup,
    /// `count` elements drawn from the base orbit's group.
    Sampled { count: usize, seed: u64 },
    /// Dense unitaries as rows of `[re, im]` pairs.
    Explicit { matrices: Vec<Vec<Vec<[f64; 2]>>> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightsDoc {
    /// `"uniform"`.
    Named(String),
    List(Vec<f64>),
}

/// Serialized form of [`EnsembleSpec`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum EnsembleDoc {
    EntOrbit {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        register: Option<Vec<usize>>,
        state: StateRef,
        partition: Vec<Vec<usize>>,
    },
    CohOrbit {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        register: Option<Vec<usize>>,
        state: StateRef,
    },
    GhzOrbit { register: Vec<usize>, partition: Vec<Vec<usize>>, level: usize },
    MarkovOrbit { register: Vec<usize>, partition: Vec<Vec<usize>>, ranks: Vec<usize> },
    EcOrbit {
        register: Vec<usize>,
        bipartition: [Vec<usize>; 2],
        rank: usize,
        #[serde(default)]
        phase_mode: PhaseMode,
    },
    WeightedOrbit { base: Box<EnsembleDoc>, elements: ElementSetDoc, weights: WeightsDoc },
}

fn resolve_state(
    state: &StateRef,
    register: Option<&[usize]>,
    partition: Option<&[Vec<usize>]>,
    base_dir: &Path,
) -> Result<PureState> {
    let need_register = || -> Result<QuditRegister> {
        let dims = register.ok_or_else(|| Error::Config("generated states need a \"register\" field".into()))?;
        QuditRegister::new(dims.to_vec())
    };
    let psi = match state {
        StateRef::Inline(psi) => psi.clone(),
        StateRef::Path(path) => {
            let full = base_dir.join(path);
            let text = std::fs::read_to_string(&full)
                .map_err(|e| Error::Config(format!("cannot read state file {}: {e}", full.display())))?;
            PureState::from_json(&text).map_err(|e| Error::Config(format!("state file {}: {e}", full.display())))?
        }
        StateRef::Basis { index } => basis_state(&need_register()?, *index)?,
        StateRef::UniformSuperposition { support } => uniform_superposition(&need_register()?, *support)?,
        StateRef::MaxEntangled { rank } => {
            let register = need_register()?;
            let regions = partition.filter(|p| p.len() == 2).ok_or_else(|| {
                Error::Config("max_entangled state needs a two-region partition".into())
            })?;
            let a = Region::new(regions[0].clone())?;
            let b = Region::new(regions[1].clone())?;
            max_entangled_state(&register, (&a, &b), *rank)?
        }
    };
    if let Some(dims) = register {
        if psi.register().site_dims() != dims {
            return Err(Error::Config(format!(
                "state has site dimensions {:?} but the register is {dims:?}",
                psi.register().site_dims()
            )));
        }
    }
    Ok(psi)
}

fn matrix_from_rows(rows: &[Vec<[f64; 2]>]) -> Result<DMatrix<C64>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Config("explicit element is not square".into()));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
}

fn matrix_to_rows(m: &DMatrix<C64>) -> Vec<Vec<[f64; 2]>> {
    m.row_iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect()
}

fn regions_of(p: &Partition) -> Vec<Vec<usize>> {
    p.regions().iter().map(|r| r.sites().to_vec()).collect()
}

impl EnsembleDoc {
    /// Builds the spec; state paths are resolved against `base_dir`.
    pub fn resolve(&self, base_dir: &Path) -> Result<EnsembleSpec> {
        let spec = match self {
            EnsembleDoc::EntOrbit { register, state, partition } => {
                let state = resolve_state(state, register.as_deref(), Some(partition), base_dir)?;
                let partition = Partition::from_sites(partition.clone(), state.register())?;
                EnsembleSpec::EntOrbit { state, partition }
            }
            EnsembleDoc::CohOrbit { register, state } => EnsembleSpec::CohOrbit {
                state: resolve_state(state, register.as_deref(), None, base_dir)?,
            },
            EnsembleDoc::GhzOrbit { register, partition, level } => {
                let register = QuditRegister::new(register.clone())?;
                let partition = Partition::from_sites(partition.clone(), &register)?;
                EnsembleSpec::GhzOrbit { register, partition, level: *level }
            }
            EnsembleDoc::MarkovOrbit { register, partition, ranks } => {
                let register = QuditRegister::new(register.clone())?;
                let partition = Partition::from_sites(partition.clone(), &register)?;
                EnsembleSpec::MarkovOrbit { register, partition, ranks: ranks.clone() }
            }
            EnsembleDoc::EcOrbit { register, bipartition, rank, phase_mode } => {
                let register = QuditRegister::new(register.clone())?;
                let bipartition = Partition::from_sites(bipartition.to_vec(), &register)?;
                EnsembleSpec::EcOrbit { register, bipartition, rank: *rank, phase_mode: *phase_mode }
            }
            EnsembleDoc::WeightedOrbit { base, elements, weights } => {
                let base = base.resolve(base_dir)?;
                let register = base.register().clone();
                let elements = match elements {
                    ElementSetDoc::PauliGroup => pauli_group(&register)?,
                    ElementSetDoc::PermutationGroup => permutation_group(&register)?,
                    ElementSetDoc::Sampled { count, seed } => {
                        let mut rng = crate::twirl::RandomStream::new(*seed).rng();
                        (0..*count).map(|_| base.sample_group_element(&mut rng)).collect::<Result<_>>()?
                    }
                    ElementSetDoc::Explicit { matrices } => {
                        matrices.iter().map(|m| matrix_from_rows(m)).collect::<Result<_>>()?
                    }
                };
                let weights = match weights {
                    WeightsDoc::Named(name) if name == "uniform" => vec![1.0 / elements.len() as f64; elements.len()],
                    WeightsDoc::Named(name) => {
                        return Err(Error::Config(format!("unknown weights \"{name}\" (expected \"uniform\" or a list)")))
                    }
                    WeightsDoc::List(w) => w.clone(),
                };
                EnsembleSpec::WeightedOrbit { base: Box::new(base), elements, weights }
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl From<&EnsembleSpec> for EnsembleDoc {
    fn from(spec: &EnsembleSpec) -> Self {
        match spec {
            EnsembleSpec::EntOrbit { state, partition } => EnsembleDoc::EntOrbit {
                register: None,
                state: StateRef::Inline(state.clone()),
                partition: regions_of(partition),
            },
            EnsembleSpec::CohOrbit { state } => {
                EnsembleDoc::CohOrbit { register: None, state: StateRef::Inline(state.clone()) }
            }
            EnsembleSpec::GhzOrbit { register, partition, level } => EnsembleDoc::GhzOrbit {
                register: register.site_dims().to_vec(),
                partition: regions_of(partition),
                level: *level,
            },
            EnsembleSpec::MarkovOrbit { register, partition, ranks } => EnsembleDoc::MarkovOrbit {
                register: register.site_dims().to_vec(),
                partition: regions_of(partition),
                ranks: ranks.clone(),
            },
            EnsembleSpec::EcOrbit { register, bipartition, rank, phase_mode } => {
                let r = regions_of(bipartition);
                EnsembleDoc::EcOrbit {
                    register: register.site_dims().to_vec(),
                    bipartition: [r[0].clone(), r[1].clone()],
                    rank: *rank,
                    phase_mode: *phase_mode,
                }
            }
            EnsembleSpec::WeightedOrbit { base, elements, weights } => EnsembleDoc::WeightedOrbit {
                base: Box::new(EnsembleDoc::from(&**base)),
                elements: ElementSetDoc::Explicit { matrices: elements.iter().map(matrix_to_rows).collect() },
                weights: WeightsDoc::List(weights.clone()),
            },
        }
    }
}
