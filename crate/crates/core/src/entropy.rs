//! Schmidt spectra and Rényi resource measures. All entropies are in nats.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{pairwise_sum, singular_values};
use crate::registers::{PureState, Region};

/// Singular values below this are treated as exact zeros.
pub const SCHMIDT_CLAMP: f64 = 1e-12;
/// Normalization tolerance for Schmidt spectra and distributions.
pub const DIST_TOL: f64 = 1e-9;
/// Largest qubit count accepted by [`renyi2_stabilizer`].
pub const MAX_STABILIZER_QUBITS: usize = 8;

/// Descending Schmidt coefficients of a state across `(region, complement)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SchmidtSpectrum {
    pub coefficients: Vec<f64>,
    pub region: Region,
    pub complement: Region,
}

impl SchmidtSpectrum {
    /// Squared coefficients, a probability distribution.
    pub fn weights(&self) -> Vec<f64> {
        self.coefficients.iter().map(|l| l * l).collect()
    }

    /// Number of coefficients above [`SCHMIDT_CLAMP`].
    pub fn rank(&self) -> usize {
        self.coefficients.iter().filter(|&&l| l > 0.0).count()
    }
}

pub fn schmidt_spectrum(state: &PureState, region: &Region) -> Result<SchmidtSpectrum> {
    let register = state.register();
    region.validate(register)?;
    if region.is_empty() || region.len() == register.n_sites() {
        return Err(Error::InvalidRegion(
            "Schmidt cut needs a nonempty proper subset of sites".into(),
        ));
    }
    let m = state.split_matrix(region)?;
    let mut coefficients = singular_values(&m);
    for l in coefficients.iter_mut() {
        if *l < SCHMIDT_CLAMP {
            *l = 0.0;
        }
    }
    let total: f64 = coefficients.iter().map(|l| l * l).sum();
    if (total - 1.0).abs() > DIST_TOL {
        return Err(Error::Numerical(format!("Schmidt weights sum to {total}")));
    }
    Ok(SchmidtSpectrum {
        coefficients,
        region: region.clone(),
        complement: region.complement(register),
    })
}

/// `-ln Σ q²` for a weight vector.
pub fn renyi2_of_weights(weights: &[f64]) -> f64 {
    let purity: f64 = weights.iter().map(|q| q * q).sum();
    (-purity.ln()).max(0.0)
}

/// Second Rényi entanglement entropy `N₂ = -ln Σ λ⁴` across `region`.
pub fn renyi2_entanglement(state: &PureState, region: &Region) -> Result<f64> {
    let spectrum = schmidt_spectrum(state, region)?;
    Ok(renyi2_of_weights(&spectrum.weights()))
}

/// Second Rényi coherence entropy `C₂ = -ln Σ |c_x|⁴`.
pub fn renyi2_coherence(state: &PureState) -> f64 {
    let weights: Vec<f64> = state.amplitudes().iter().map(|c| c.norm_sqr()).collect();
    renyi2_of_weights(&weights)
}

/// Second stabilizer Rényi entropy `M₂ = -ln Σ_P w_P² - ln N` with
/// `w_P = |⟨ψ|P|ψ⟩|² / N` over all `4ⁿ` Pauli strings.
///
/// Strings are enumerated as `X^x Z^z`; the missing phase of `Y` does not
/// affect `|⟨P⟩|²`.
pub fn renyi2_stabilizer(state: &PureState) -> Result<f64> {
    let register = state.register();
    if !register.is_qubits() {
        return Err(Error::NonQubit(register.site_dims().to_vec()));
    }
    let n = register.n_sites();
    if n > MAX_STABILIZER_QUBITS {
        return Err(Error::SizeCap { what: "qubits for stabilizer entropy", size: n, cap: MAX_STABILIZER_QUBITS });
    }
    let dim = register.total_dim();
    let psi = state.amplitudes().as_slice();
    let squares: Vec<f64> = (0..dim * dim)
        .into_par_iter()
        .map(|string| {
            let (x, z) = (string / dim, string % dim);
            let expectation: num_complex::Complex64 = (0..dim)
                .map(|j| {
                    let term = psi[j ^ x].conj() * psi[j];
                    if (j & z).count_ones() % 2 == 0 {
                        term
                    } else {
                        -term
                    }
                })
                .sum();
            let w = expectation.norm_sqr() / dim as f64;
            w * w
        })
        .collect();
    let total = pairwise_sum(&squares);
    Ok((-total.ln() - (dim as f64).ln()).max(0.0))
}

/// A finite probability distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbDist {
    probabilities: Vec<f64>,
}

impl ProbDist {
    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(Error::InvalidDistribution("empty".into()));
        }
        if probabilities.iter().any(|&p| p < 0.0 || !p.is_finite()) {
            return Err(Error::InvalidDistribution("negative or non-finite entry".into()));
        }
        let total = pairwise_sum(&probabilities);
        if (total - 1.0).abs() > DIST_TOL {
            return Err(Error::InvalidDistribution(format!("sums to {total}")));
        }
        Ok(Self { probabilities })
    }

    pub fn uniform(len: usize) -> Result<Self> {
        Self::new(vec![1.0 / len as f64; len])
    }

    pub fn point_mass(len: usize, at: usize) -> Result<Self> {
        let mut p = vec![0.0; len];
        *p.get_mut(at).ok_or(Error::IndexOutOfRange { index: at, dim: len })? = 1.0;
        Self::new(p)
    }

    /// `{1 - δ, δ/(L-1), ..., δ/(L-1)}` over `L` outcomes.
    pub fn spiked(len: usize, delta: f64) -> Result<Self> {
        if len < 2 || !(0.0..=1.0).contains(&delta) {
            return Err(Error::InvalidDistribution(format!("spiked(L={len}, δ={delta})")));
        }
        let mut p = vec![delta / (len - 1) as f64; len];
        p[0] = 1.0 - delta;
        Self::new(p)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }
}

/// Rényi-α entropy; the Shannon entropy at `α = 1` with `0 ln 0 = 0`.
pub fn renyi_alpha(dist: &ProbDist, alpha: f64) -> Result<f64> {
    if alpha <= 0.0 || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("Rényi order {alpha} must be positive")));
    }
    let p = dist.probabilities();
    let value = if alpha == 1.0 {
        let terms: Vec<f64> = p.iter().map(|&x| if x > 0.0 { -x * x.ln() } else { 0.0 }).collect();
        pairwise_sum(&terms)
    } else {
        let terms: Vec<f64> = p.iter().map(|&x| if x > 0.0 { x.powf(alpha) } else { 0.0 }).collect();
        pairwise_sum(&terms).ln() / (1.0 - alpha)
    };
    Ok(value.max(0.0))
}
