//! Design errors, theoretical bounds and the uniform-weighting comparator.

use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::copyspace::{haar_moment, CopySpace, MomentOperator, SymmetricBasis};
use crate::ensembles::EnsembleSpec;
use crate::entropy::{renyi2_coherence, renyi2_entanglement};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, hermiticity_deviation, pairwise_sum};
use crate::registers::{Region, C64};
use crate::twirl::{mc_moment_streaming, RandomStream};

/// Inputs more asymmetric than this are rejected by [`trace_distance`].
pub const HERMITIAN_INPUT_TOL: f64 = 1e-6;
/// Largest tolerated trace-distance change from dropping the part of a
/// moment outside the symmetric subspace.
pub const COMPRESSION_TOL: f64 = 1e-10;
/// Slack in the uniform-optimality comparison.
pub const UNIFORM_SLACK: f64 = 1e-9;

fn check_square(m: &DMatrix<C64>, dim: usize) -> Result<()> {
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: m.nrows().max(m.ncols()) });
    }
    Ok(())
}

/// `½ Σ |λ|` over the eigenvalues of the Hermitized difference.
pub fn trace_distance(rho: &DMatrix<C64>, sigma: &DMatrix<C64>) -> Result<f64> {
    check_square(rho, rho.nrows())?;
    check_square(sigma, rho.nrows())?;
    for m in [rho, sigma] {
        let deviation = hermiticity_deviation(m);
        if deviation > HERMITIAN_INPUT_TOL {
            return Err(Error::NotHermitian { deviation });
        }
    }
    let n = rho.nrows();
    let diff = DMatrix::from_fn(n, n, |i, j| {
        let d = rho[(i, j)] - sigma[(i, j)];
        let dt = rho[(j, i)] - sigma[(j, i)];
        (d + dt.conj()) * 0.5
    });
    let ev = hermitian_eigenvalues(&diff)?;
    let abs: Vec<f64> = ev.iter().map(|x| x.abs()).collect();
    Ok((0.5 * pairwise_sum(&abs)).max(0.0))
}

/// How the distance to the Haar moment was evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceRoute {
    /// Eigenvalues of the moment restricted to the symmetric subspace.
    SymmetricSubspace,
    /// Eigenvalues of the full copy-space difference.
    Dense,
}

/// Trace distance from a moment to the Haar moment.
///
/// When the moment lies in the symmetric subspace (checked through the
/// Frobenius norm of its off-block part, which bounds the induced error by
/// `½√D‖·‖_F`) the problem is solved on that subspace, where the Haar moment
/// is `I / binom(N+t-1, t)`.
pub fn distance_to_haar(moment: &MomentOperator) -> Result<(f64, DistanceRoute)> {
    let space = moment.space();
    let basis = SymmetricBasis::new(space);
    let compressed = basis.compress(moment.matrix())?;
    let residual = basis.reconstruction_residual(moment.matrix(), &compressed);
    let bound = 0.5 * (space.total_dim() as f64).sqrt() * residual;
    if bound <= COMPRESSION_TOL {
        let k = basis.len();
        let haar = DMatrix::<C64>::identity(k, k) / C64::new(k as f64, 0.0);
        Ok((trace_distance(&compressed, &haar)?, DistanceRoute::SymmetricSubspace))
    } else {
        let haar = haar_moment(space)?;
        Ok((trace_distance(moment.matrix(), haar.matrix())?, DistanceRoute::Dense))
    }
}

/// `N₂` across one cut, in nats.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CutEntropy {
    pub region: Vec<usize>,
    pub nats: f64,
}

/// Resource entropies of an orbit's base state.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Entropies {
    pub n2: Vec<CutEntropy>,
    pub c2: Option<f64>,
}

impl Entropies {
    pub fn of(spec: &EnsembleSpec) -> Result<Self> {
        let psi = spec.base_state()?;
        let n2 = spec
            .entanglement_cuts()
            .iter()
            .map(|cut| {
                Ok(CutEntropy { region: cut.sites().to_vec(), nats: renyi2_entanglement(&psi, cut)? })
            })
            .collect::<Result<_>>()?;
        Ok(Self { n2, c2: Some(renyi2_coherence(&psi)) })
    }

    pub fn n2_for(&self, cut: &Region) -> Option<f64> {
        self.n2.iter().find(|c| c.region == cut.sites()).map(|c| c.nats)
    }
}

/// Leading-term bound values keyed by result tag, plus the residual scale
/// the bounds omit.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Bounds {
    pub values: BTreeMap<String, f64>,
    pub residual_scale: Option<f64>,
}

impl Bounds {
    pub fn get(&self, tag: &str) -> Option<f64> {
        self.values.get(tag).copied()
    }
}

fn required_n2(entropies: &Entropies, cut: &Region) -> Result<f64> {
    entropies
        .n2_for(cut)
        .ok_or_else(|| Error::MissingEntropy(format!("N₂ across cut {:?}", cut.sites())))
}

/// Leading terms of the design-error bounds that apply to `spec`:
///
/// - `thm1`: `(3/4) t² e^{-N₂}` for bipartite entanglement orbits,
/// - `thm2`: `t² Σ_i e^{-N₂(𝒜_i)}` for Markov-chain orbits,
/// - `thm3`: `t² / d` for GHZ orbits,
/// - `lem4`: `t² e^{-C₂}` for coherence orbits,
/// - `thm8`: `t² e^{-N₂}` for entanglement-and-coherence orbits.
///
/// The residual scale is `t²` over the smallest region dimension
/// (the full dimension for coherence orbits).
pub fn bound_evaluate(spec: &EnsembleSpec, t: usize, entropies: &Entropies) -> Result<Bounds> {
    let t2 = (t * t) as f64;
    let register = spec.register();
    let partition = spec.partition();
    let cuts = spec.entanglement_cuts();
    let mut values = BTreeMap::new();
    let min_region = partition.region_dims(register).into_iter().min().unwrap_or(1) as f64;
    let residual_scale = match spec {
        EnsembleSpec::WeightedOrbit { .. } => None,
        EnsembleSpec::CohOrbit { .. } => Some(t2 / register.total_dim() as f64),
        _ => Some(t2 / min_region),
    };
    match spec {
        EnsembleSpec::EntOrbit { .. } | EnsembleSpec::MarkovOrbit { .. } => {
            if cuts.len() == 1 {
                values.insert("thm1".into(), 0.75 * t2 * (-required_n2(entropies, &cuts[0])?).exp());
            }
            // a multi-region entanglement orbit is only covered when its state is a chain
            if matches!(spec, EnsembleSpec::MarkovOrbit { .. }) || cuts.len() == 1 {
                let sum = cuts
                    .iter()
                    .map(|c| Ok((-required_n2(entropies, c)?).exp()))
                    .collect::<Result<Vec<f64>>>()?;
                values.insert("thm2".into(), t2 * sum.iter().sum::<f64>());
            }
        }
        EnsembleSpec::GhzOrbit { level, .. } => {
            values.insert("thm3".into(), t2 / *level as f64);
        }
        EnsembleSpec::CohOrbit { .. } => {
            let c2 = entropies.c2.ok_or_else(|| Error::MissingEntropy("C₂".into()))?;
            values.insert("lem4".into(), t2 * (-c2).exp());
        }
        EnsembleSpec::EcOrbit { .. } => {
            values.insert("thm8".into(), t2 * (-required_n2(entropies, &cuts[0])?).exp());
        }
        EnsembleSpec::WeightedOrbit { .. } => {}
    }
    Ok(Bounds { values, residual_scale })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    Exact,
    MonteCarlo {
        samples: usize,
        batches: usize,
        /// Sample standard deviation of the per-batch distances.
        dispersion: f64,
        batch_errors: Vec<f64>,
        /// The estimate is biased upward while samples are few compared with
        /// the symmetric-subspace dimension.
        small_sample_bias: bool,
    },
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::MonteCarlo { .. } => "mc",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DesignErrorReport {
    pub variant: String,
    pub site_dims: Vec<usize>,
    pub regions: Vec<Vec<usize>>,
    pub t: usize,
    pub error: f64,
    pub method: Method,
    pub distance_route: DistanceRoute,
    pub bounds: Bounds,
    pub entropies: Entropies,
    pub seconds: f64,
}

fn report(spec: &EnsembleSpec, t: usize, error: f64, method: Method, route: DistanceRoute, start: Instant) -> Result<DesignErrorReport> {
    let entropies = Entropies::of(spec)?;
    let bounds = bound_evaluate(spec, t, &entropies)?;
    Ok(DesignErrorReport {
        variant: spec.variant_name().into(),
        site_dims: spec.register().site_dims().to_vec(),
        regions: spec.partition().regions().iter().map(|r| r.sites().to_vec()).collect(),
        t,
        error,
        method,
        distance_route: route,
        bounds,
        entropies,
        seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn design_error_exact(spec: &EnsembleSpec, t: usize) -> Result<DesignErrorReport> {
    let start = Instant::now();
    let moment = spec.exact_moment(t)?;
    let (error, route) = distance_to_haar(&moment)?;
    report(spec, t, error, Method::Exact, route, start)
}

pub fn design_error_mc(
    spec: &EnsembleSpec,
    t: usize,
    samples: usize,
    batches: usize,
    stream: RandomStream,
) -> Result<DesignErrorReport> {
    let start = Instant::now();
    spec.validate()?;
    let space = CopySpace::new(spec.register().total_dim(), t)?;
    let mut batch_errors = Vec::with_capacity(batches);
    let moment = mc_moment_streaming(
        space.base_dim(),
        t,
        samples,
        batches,
        stream,
        |rng| spec.sample_state(rng),
        |_, mean| {
            let m = MomentOperator::new(space, mean.clone(), "monte-carlo batch")?;
            batch_errors.push(distance_to_haar(&m)?.0);
            Ok(())
        },
    )?;
    let (error, route) = distance_to_haar(&moment)?;
    let mean = batch_errors.iter().sum::<f64>() / batch_errors.len() as f64;
    let var = batch_errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (batch_errors.len() - 1) as f64;
    let method = Method::MonteCarlo {
        samples,
        batches,
        dispersion: var.sqrt(),
        batch_errors,
        small_sample_bias: samples < 10 * space.symmetric_dim(),
    };
    report(spec, t, error, method, route, start)
}

/// Design errors of the uniform and of each weighted distribution over one
/// finite element set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UniformComparison {
    pub uniform_error: f64,
    pub weighted_errors: Vec<f64>,
    /// `uniform_error ≤ weighted + UNIFORM_SLACK` for every weighting.
    pub holds: bool,
}

pub fn uniform_vs_weighted(
    base: &EnsembleSpec,
    elements: &[DMatrix<C64>],
    weightings: &[Vec<f64>],
    t: usize,
) -> Result<UniformComparison> {
    let error_for = |weights: &[f64]| -> Result<f64> {
        if weights.len() != elements.len() {
            return Err(Error::InvalidArgument(format!(
                "weighting over {} elements for a set of {}",
                weights.len(),
                elements.len()
            )));
        }
        let spec = EnsembleSpec::WeightedOrbit {
            base: Box::new(base.clone()),
            elements: elements.to_vec(),
            weights: weights.to_vec(),
        };
        Ok(distance_to_haar(&spec.exact_moment(t)?)?.0)
    };
    let uniform_error = error_for(&vec![1.0 / elements.len() as f64; elements.len()])?;
    let weighted_errors = weightings.iter().map(|w| error_for(w)).collect::<Result<Vec<_>>>()?;
    let holds = weighted_errors.iter().all(|&e| uniform_error <= e + UNIFORM_SLACK);
    Ok(UniformComparison { uniform_error, weighted_errors, holds })
}
