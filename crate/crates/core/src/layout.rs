//! Index arithmetic for mixed-radix tensor layouts.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Digits of `index` in mixed radix `dims`, most significant first.
pub fn mixed_radix_digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut digits = vec![0; dims.len()];
    for (d, &dim) in digits.iter_mut().zip(dims).rev() {
        *d = index % dim;
        index /= dim;
    }
    digits
}

/// Relabeling produced by reordering tensor axes.
///
/// `dims[a]` is the dimension of old axis `a`; new axis `k` is old axis
/// `order[k]`. Returns `map` with `map[old_index] = new_index`.
pub fn axis_permutation_map(dims: &[usize], order: &[usize]) -> Vec<usize> {
    let n = dims.len();
    debug_assert_eq!(order.len(), n);
    let mut new_stride = vec![0usize; n];
    let mut total = 1usize;
    for k in (0..n).rev() {
        new_stride[k] = total;
        total *= dims[order[k]];
    }
    let mut stride_of_old = vec![0usize; n];
    for (k, &a) in order.iter().enumerate() {
        stride_of_old[a] = new_stride[k];
    }
    let mut map = Vec::with_capacity(total);
    let mut digits = vec![0usize; n];
    let mut cur = 0usize;
    for _ in 0..total {
        map.push(cur);
        for a in (0..n).rev() {
            digits[a] += 1;
            cur += stride_of_old[a];
            if digits[a] < dims[a] {
                break;
            }
            cur -= digits[a] * stride_of_old[a];
            digits[a] = 0;
        }
    }
    map
}

pub fn invert_map(map: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; map.len()];
    for (i, &j) in map.iter().enumerate() {
        inv[j] = i;
    }
    inv
}

/// `out[map[i]] = v[i]`.
pub fn relabel_vector(v: &DVector<Complex64>, map: &[usize]) -> DVector<Complex64> {
    let mut out = DVector::zeros(v.len());
    for (i, &j) in map.iter().enumerate() {
        out[j] = v[i];
    }
    out
}

/// `out[(map[i], map[j])] = m[(i, j)]`, i.e. `P M Pᵀ` for the permutation matrix of `map`.
pub fn relabel_matrix(m: &DMatrix<Complex64>, map: &[usize]) -> DMatrix<Complex64> {
    let n = m.nrows();
    let mut out = DMatrix::zeros(n, n);
    for j in 0..n {
        let col = m.column(j);
        let mut dst = out.column_mut(map[j]);
        for i in 0..n {
            dst[map[i]] = col[i];
        }
    }
    out
}
