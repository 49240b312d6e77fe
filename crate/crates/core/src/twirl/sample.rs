use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::registers::{PureState, QuditRegister, C64};

/// Distribution of the diagonal phases.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseMode {
    /// `e^{iθ}` with `θ` uniform on `[0, 2π)`.
    Continuous,
    /// Uniform `±1`.
    #[default]
    Binary,
}

fn ginibre<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-distributed unitary: QR of a Ginibre matrix, with column `j` of
/// `Q` multiplied by `r_jj / |r_jj|`.
pub fn sample_haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<DMatrix<C64>> {
    if dim == 0 {
        return Err(Error::InvalidArgument("unitary of dimension 0".into()));
    }
    let z = DMatrix::from_fn(dim, dim, |_, _| ginibre(rng));
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let rjj = r[(j, j)];
        let norm = rjj.norm();
        if norm > 0.0 {
            let phase = rjj / norm;
            for x in q.column_mut(j).iter_mut() {
                *x *= phase;
            }
        }
    }
    Ok(q)
}

/// Haar-random pure state: a normalized Gaussian vector.
pub fn sample_haar_state<R: Rng + ?Sized>(register: &QuditRegister, rng: &mut R) -> Result<PureState> {
    let v = DVector::from_fn(register.total_dim(), |_, _| ginibre(rng));
    PureState::normalized(register.clone(), v)
}

/// Diagonal of a random phase unitary.
pub fn sample_phase_unitary<R: Rng + ?Sized>(n: usize, mode: PhaseMode, rng: &mut R) -> DVector<C64> {
    DVector::from_fn(n, |_, _| match mode {
        PhaseMode::Continuous => C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU)),
        PhaseMode::Binary => C64::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0),
    })
}

/// Uniform permutation of `0..n` as an image list (Fisher–Yates).
pub fn sample_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registers::unitarity_deviation;
    use crate::twirl::RandomStream;

    #[test]
    fn haar_unitaries_are_unitary_and_reproducible() {
        let stream = RandomStream::with_id(7, 3);
        for dim in [1, 2, 3, 8, 17] {
            let u = sample_haar_unitary(dim, &mut stream.rng()).unwrap();
            assert!(unitarity_deviation(&u) <= 1e-10);
            assert_eq!(u, sample_haar_unitary(dim, &mut stream.rng()).unwrap());
        }
        assert!(sample_haar_unitary(0, &mut stream.rng()).is_err());
    }

    #[test]
    fn haar_first_and_trace_moments() {
        let mut rng = RandomStream::new(11).rng();
        let draws = 100_000;
        let (mut corner, mut tr2) = (0.0, 0.0);
        for _ in 0..draws {
            let u = sample_haar_unitary(2, &mut rng).unwrap();
            corner += u[(0, 0)].norm_sqr();
            tr2 += u.trace().norm_sqr();
        }
        assert!((corner / draws as f64 - 0.5).abs() < 0.01);
        // E|tr U|² = 1 holds only for the phase-corrected QR
        assert!((tr2 / draws as f64 - 1.0).abs() < 0.02);
    }

    #[test]
    fn phase_unitary_statistics() {
        let stream = RandomStream::new(5);
        for mode in [PhaseMode::Continuous, PhaseMode::Binary] {
            let mut rng = stream.rng();
            let mut mean = C64::default();
            let draws = 100_000;
            for _ in 0..draws {
                let d = sample_phase_unitary(1, mode, &mut rng);
                assert!((d[0].norm() - 1.0).abs() < 1e-12);
                mean += d[0];
            }
            assert!((mean / draws as f64).norm() < 0.02);
            assert_eq!(sample_phase_unitary(6, mode, &mut stream.rng()), sample_phase_unitary(6, mode, &mut stream.rng()));
        }
    }

    #[test]
    fn permutations_are_uniform() {
        let mut rng = RandomStream::new(9).rng();
        let mut counts = std::collections::HashMap::new();
        let draws = 60_000;
        for _ in 0..draws {
            *counts.entry(sample_permutation(3, &mut rng)).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 6);
        for &c in counts.values() {
            assert!((c as f64 / draws as f64 - 1.0 / 6.0).abs() < 0.01);
        }
    }
}
