use std::collections::HashMap;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::rng::RandomStream;
use super::sample::sample_permutation;
use crate::copyspace::{CopyLabels, CopySpace};
use crate::error::{Error, Result};
use crate::layout::invert_map;
use crate::registers::C64;

/// Largest copy count accepted by the exact permutation twirl.
pub const MAX_EXACT_PERMUTATION_COPIES: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PermutationTwirlMode {
    Exact,
    MonteCarlo { samples: usize, stream: RandomStream },
}

/// Restricted-growth code of a label sequence (first occurrences numbered
/// 0, 1, ..), packed `bits` per symbol, plus the number of distinct labels.
fn collision_pattern(row: &[u32], col: &[u32], bits: u32) -> (u128, usize) {
    let mut seen = [u32::MAX; 2 * MAX_EXACT_PERMUTATION_COPIES];
    let mut distinct = 0usize;
    let mut code = 0u128;
    for &label in row.iter().chain(col) {
        let class = match seen[..distinct].iter().position(|&s| s == label) {
            Some(c) => c,
            None => {
                seen[distinct] = label;
                distinct += 1;
                distinct - 1
            }
        };
        code = (code << bits) | class as u128;
    }
    (code, distinct)
}

fn falling_factorial(n: usize, k: usize) -> f64 {
    (0..k).map(|i| (n - i) as f64).product()
}

/// Exact average of `P^{⊗t} ρ P^{†⊗t}` over independent uniform label
/// permutations on each region: each entry becomes the mean of its joint
/// collision-pattern class.
fn exact_in_place(rho: &mut DMatrix<C64>, labels: &CopyLabels) -> Result<()> {
    let t = labels.copies();
    if t > MAX_EXACT_PERMUTATION_COPIES {
        return Err(Error::Unsupported(format!(
            "exact permutation twirl needs t ≤ {MAX_EXACT_PERMUTATION_COPIES}, got {t}"
        )));
    }
    let bits = usize::BITS - (2 * t - 1).leading_zeros();
    let regions = labels.n_regions();
    if regions as u32 * 2 * t as u32 * bits > 128 {
        return Err(Error::Unsupported(format!("{regions} regions exceed the collision-pattern key width")));
    }
    let dim = labels.total_dim();
    let pattern = |i: usize, j: usize| {
        let mut key = 0u128;
        let mut size = 1.0;
        for r in 0..regions {
            let (code, k) = collision_pattern(labels.labels(i, r), labels.labels(j, r), bits);
            key = (key << (2 * t as u32 * bits)) | code;
            size *= falling_factorial(labels.region_dims()[r], k);
        }
        (key, size)
    };
    let mut classes: HashMap<u128, usize> = HashMap::new();
    let mut sums: Vec<C64> = Vec::new();
    let mut sizes: Vec<f64> = Vec::new();
    let mut class_of = vec![0u32; dim * dim];
    for j in 0..dim {
        for i in 0..dim {
            let (key, size) = pattern(i, j);
            let c = *classes.entry(key).or_insert_with(|| {
                sums.push(C64::default());
                sizes.push(size);
                sums.len() - 1
            });
            sums[c] += rho[(i, j)];
            class_of[j * dim + i] = c as u32;
        }
    }
    let means: Vec<C64> = sums.iter().zip(&sizes).map(|(s, n)| s / n).collect();
    for (x, &c) in rho.as_mut_slice().iter_mut().zip(&class_of) {
        *x = means[c as usize];
    }
    Ok(())
}

fn monte_carlo(rho: &DMatrix<C64>, labels: &CopyLabels, samples: usize, stream: RandomStream) -> Result<DMatrix<C64>> {
    if samples == 0 {
        return Err(Error::InvalidArgument("permutation twirl needs at least one sample".into()));
    }
    let dim = labels.total_dim();
    let maps: Vec<(Vec<usize>, Vec<usize>)> = (0..samples as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream.derive(k).rng();
            let perms: Vec<Vec<usize>> =
                labels.region_dims().iter().map(|&n| sample_permutation(n, &mut rng)).collect();
            let map: Vec<usize> = (0..dim).map(|i| labels.permuted_index(i, &perms)).collect();
            let inverse = invert_map(&map);
            (map, inverse)
        })
        .collect();
    let weight = 1.0 / samples as f64;
    let mut out = DMatrix::<C64>::zeros(dim, dim);
    out.as_mut_slice().par_chunks_mut(dim).enumerate().for_each(|(pj, col)| {
        // column pj of the output collects ρ[i, j] with map(j) = pj
        for (map, inverse) in &maps {
            let j = inverse[pj];
            for i in 0..dim {
                col[map[i]] += rho[(i, j)] * weight;
            }
        }
    });
    Ok(out)
}

pub fn permutation_twirl_labels(
    rho: &DMatrix<C64>,
    labels: &CopyLabels,
    mode: PermutationTwirlMode,
) -> Result<DMatrix<C64>> {
    let dim = labels.total_dim();
    if rho.nrows() != dim || rho.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: rho.nrows() });
    }
    match mode {
        PermutationTwirlMode::Exact => {
            let mut out = rho.clone();
            exact_in_place(&mut out, labels)?;
            Ok(out)
        }
        PermutationTwirlMode::MonteCarlo { samples, stream } => monte_carlo(rho, labels, samples, stream),
    }
}

pub fn permutation_twirl_in_place(rho: &mut DMatrix<C64>, labels: &CopyLabels) -> Result<()> {
    let dim = labels.total_dim();
    if rho.nrows() != dim || rho.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: rho.nrows() });
    }
    exact_in_place(rho, labels)
}

/// Average of `(P_p)^{⊗t} ρ (P_p†)^{⊗t}` over permutations `p` of `[N]`.
pub fn permutation_twirl(rho: &DMatrix<C64>, n: usize, t: usize, mode: PermutationTwirlMode) -> Result<DMatrix<C64>> {
    let space = CopySpace::new(n, t)?;
    if rho.nrows() != space.total_dim() || rho.ncols() != space.total_dim() {
        return Err(Error::DimensionMismatch { expected: space.total_dim(), got: rho.nrows() });
    }
    if n == 1 {
        return Ok(rho.clone());
    }
    permutation_twirl_labels(rho, &CopyLabels::single(n, t)?, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::Permutation;
    use crate::registers::{Partition, QuditRegister};
    use rand::Rng;

    fn random_matrix(dim: usize, seed: u64) -> DMatrix<C64> {
        let mut rng = RandomStream::new(seed).rng();
        DMatrix::from_fn(dim, dim, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    /// Average over all `N!` relabelings of each copy.
    fn brute_force(rho: &DMatrix<C64>, n: usize, t: usize) -> DMatrix<C64> {
        let dim = n.pow(t as u32);
        let all = Permutation::all(n);
        let mut out = DMatrix::zeros(dim, dim);
        for p in &all {
            let map: Vec<usize> = (0..dim)
                .map(|x| {
                    let d = crate::layout::mixed_radix_digits(x, &vec![n; t]);
                    d.iter().fold(0, |acc, &k| acc * n + p.apply(k))
                })
                .collect();
            for j in 0..dim {
                for i in 0..dim {
                    out[(map[i], map[j])] += rho[(i, j)];
                }
            }
        }
        out / C64::new(all.len() as f64, 0.0)
    }

    fn max_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn trivial_system_is_identity_channel() {
        let m = random_matrix(1, 0);
        assert_eq!(permutation_twirl(&m, 1, 3, PermutationTwirlMode::Exact).unwrap(), m);
    }

    #[test]
    fn exact_matches_enumeration() {
        for n in 2..=5 {
            let rho = random_matrix(n * n, n as u64);
            let exact = permutation_twirl(&rho, n, 2, PermutationTwirlMode::Exact).unwrap();
            assert!(max_diff(&exact, &brute_force(&rho, n, 2)) <= 1e-10, "N = {n}");
        }
        let rho = random_matrix(27, 9);
        let exact = permutation_twirl(&rho, 3, 3, PermutationTwirlMode::Exact).unwrap();
        assert!(max_diff(&exact, &brute_force(&rho, 3, 3)) <= 1e-10);
    }

    #[test]
    fn exact_matches_monte_carlo() {
        let rho = random_matrix(64, 4);
        let exact = permutation_twirl(&rho, 8, 2, PermutationTwirlMode::Exact).unwrap();
        let mode = PermutationTwirlMode::MonteCarlo { samples: 100_000, stream: RandomStream::new(12) };
        let mc = permutation_twirl(&rho, 8, 2, mode).unwrap();
        assert!(max_diff(&exact, &mc) <= 0.01);
    }

    #[test]
    fn refuses_large_t() {
        let rho = DMatrix::<C64>::zeros(32, 32);
        assert!(matches!(
            permutation_twirl(&rho, 2, 5, PermutationTwirlMode::Exact),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn independent_regions() {
        // two qubit regions: average over S_2 × S_2 enumerated directly
        let register = QuditRegister::qubits(2).unwrap();
        let partition = Partition::from_sites(vec![vec![0], vec![1]], &register).unwrap();
        let labels = CopyLabels::new(&register, &partition, 2).unwrap();
        let rho = random_matrix(16, 5);
        let exact = permutation_twirl_labels(&rho, &labels, PermutationTwirlMode::Exact).unwrap();
        let mut expected = DMatrix::<C64>::zeros(16, 16);
        for a in Permutation::all(2) {
            for b in Permutation::all(2) {
                let perms = vec![a.images().to_vec(), b.images().to_vec()];
                let map: Vec<usize> = (0..16).map(|i| labels.permuted_index(i, &perms)).collect();
                for j in 0..16 {
                    for i in 0..16 {
                        expected[(map[i], map[j])] += rho[(i, j)] / C64::new(4.0, 0.0);
                    }
                }
            }
        }
        assert!(max_diff(&exact, &expected) <= 1e-12);
    }
}
