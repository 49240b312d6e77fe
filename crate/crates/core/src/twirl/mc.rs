use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use super::rng::RandomStream;
use crate::copyspace::{CopySpace, MomentOperator};
use crate::ensembles::EnsembleSpec;
use crate::error::{Error, Result};
use crate::registers::{PureState, C64};

pub const DEFAULT_BATCHES: usize = 10;
/// Samples drawn in parallel before each sequential accumulation step.
const CHUNK: usize = 64;

/// Empirical moment with per-batch sub-means.
#[derive(Clone, Debug)]
pub struct McMoment {
    pub moment: MomentOperator,
    pub batch_means: Vec<DMatrix<C64>>,
    pub batch_sizes: Vec<usize>,
}

impl McMoment {
    /// Sample standard deviation of the batch means around the overall mean,
    /// in Frobenius norm.
    pub fn dispersion(&self) -> f64 {
        let b = self.batch_means.len();
        let total: f64 = self
            .batch_means
            .iter()
            .map(|m| (m - self.moment.matrix()).norm_squared())
            .sum();
        (total / (b - 1) as f64).sqrt()
    }
}

/// Splits `samples` into `batches` near-equal batches, larger ones first.
pub fn batch_sizes(samples: usize, batches: usize) -> Result<Vec<usize>> {
    if samples < 2 {
        return Err(Error::InvalidArgument(format!("Monte Carlo needs at least 2 samples, got {samples}")));
    }
    if batches < 2 || samples < batches {
        return Err(Error::InvalidArgument(format!("{samples} samples cannot fill {batches} batches")));
    }
    Ok((0..batches).map(|b| samples / batches + usize::from(b < samples % batches)).collect())
}

/// Adds `Σ v v†` to the lower triangle of `acc`.
fn accumulate_lower(acc: &mut DMatrix<C64>, vectors: &[DVector<C64>]) {
    let dim = acc.nrows();
    acc.as_mut_slice().par_chunks_mut(dim).enumerate().for_each(|(j, col)| {
        for v in vectors {
            let vj = v[j].conj();
            for i in j..dim {
                col[i] += v[i] * vj;
            }
        }
    });
}

fn mirror_lower(m: &mut DMatrix<C64>) {
    let dim = m.nrows();
    for j in 0..dim {
        for i in j + 1..dim {
            m[(j, i)] = m[(i, j)].conj();
        }
    }
}

/// Empirical `t`-th moment of states drawn by `sampler`, sample `i` using
/// stream `stream.derive(i)`. `visit` sees each batch mean as soon as the
/// batch is complete, so batch matrices need not be stored.
#[allow(clippy::too_many_arguments)]
pub fn mc_moment_streaming<S, V>(
    base_dim: usize,
    t: usize,
    samples: usize,
    batches: usize,
    stream: RandomStream,
    sampler: S,
    mut visit: V,
) -> Result<MomentOperator>
where
    S: Fn(&mut ChaCha12Rng) -> Result<PureState> + Sync,
    V: FnMut(usize, &DMatrix<C64>) -> Result<()>,
{
    let space = CopySpace::new(base_dim, t)?;
    let sizes = batch_sizes(samples, batches)?;
    let dim = space.total_dim();
    let mut total = DMatrix::<C64>::zeros(dim, dim);
    let mut acc = DMatrix::<C64>::zeros(dim, dim);
    let mut next = 0usize;
    for (b, &size) in sizes.iter().enumerate() {
        acc.fill(C64::default());
        let end = next + size;
        while next < end {
            let stop = (next + CHUNK).min(end);
            let vectors = (next..stop)
                .into_par_iter()
                .map(|i| {
                    let state = sampler(&mut stream.derive(i as u64).rng())?;
                    if state.dim() != base_dim {
                        return Err(Error::DimensionMismatch { expected: base_dim, got: state.dim() });
                    }
                    Ok(state.tensor_power(t))
                })
                .collect::<Result<Vec<_>>>()?;
            accumulate_lower(&mut acc, &vectors);
            next = stop;
        }
        mirror_lower(&mut acc);
        total += &acc;
        visit(b, &(&acc / C64::new(size as f64, 0.0)))?;
    }
    total /= C64::new(samples as f64, 0.0);
    MomentOperator::new(space, total, "monte-carlo")
}

/// Monte Carlo moment of an ensemble with [`DEFAULT_BATCHES`] batches.
pub fn mc_moment(spec: &EnsembleSpec, t: usize, samples: usize, stream: RandomStream) -> Result<McMoment> {
    mc_moment_batched(spec, t, samples, DEFAULT_BATCHES, stream)
}

pub fn mc_moment_batched(
    spec: &EnsembleSpec,
    t: usize,
    samples: usize,
    batches: usize,
    stream: RandomStream,
) -> Result<McMoment> {
    spec.validate()?;
    let mut batch_means = Vec::with_capacity(batches);
    let moment = mc_moment_streaming(
        spec.register().total_dim(),
        t,
        samples,
        batches,
        stream,
        |rng| spec.sample_state(rng),
        |_, mean| {
            batch_means.push(mean.clone());
            Ok(())
        },
    )?;
    Ok(McMoment { moment, batch_means, batch_sizes: batch_sizes(samples, batches)? })
}
