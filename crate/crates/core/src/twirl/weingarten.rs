use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::perm::{Permutation, SymmetricGroup};

/// Largest copy count for which Weingarten tables are built.
pub const MAX_WEINGARTEN_COPIES: usize = 5;

/// Weingarten function `Wg(σ, d)` on `S_t`, from the inverse (or
/// pseudo-inverse when `d < t`) of the Gram matrix `d^{#cycles(σ⁻¹τ)}`.
#[derive(Clone, Debug)]
pub struct WeingartenTable {
    t: usize,
    d: usize,
    group: SymmetricGroup,
    values: Vec<f64>,
    pseudo_inverse: bool,
}

impl WeingartenTable {
    pub fn new(t: usize, d: usize) -> Result<Self> {
        if t == 0 || t > MAX_WEINGARTEN_COPIES {
            return Err(Error::InvalidArgument(format!(
                "Weingarten table needs 1 ≤ t ≤ {MAX_WEINGARTEN_COPIES}, got {t}"
            )));
        }
        if d == 0 {
            return Err(Error::InvalidArgument("Weingarten table needs d ≥ 1".into()));
        }
        let group = SymmetricGroup::new(t);
        let gram = gram_matrix(&group, d);
        let pseudo_inverse = d < t;
        let inverse = if pseudo_inverse {
            gram.pseudo_inverse(1e-12).map_err(|e| Error::Numerical(e.to_string()))?
        } else {
            gram.try_inverse()
                .ok_or_else(|| Error::Numerical(format!("singular Gram matrix at t={t}, d={d}")))?
        };
        let e = group.index_of(&Permutation::identity(t));
        let values = inverse.row(e).iter().copied().collect();
        Ok(Self { t, d, group, values, pseudo_inverse })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn group(&self) -> &SymmetricGroup {
        &self.group
    }

    /// True when the Gram matrix was singular (`d < t`).
    pub fn is_pseudo_inverse(&self) -> bool {
        self.pseudo_inverse
    }

    pub fn value(&self, sigma: &Permutation) -> f64 {
        self.values[self.group.index_of(sigma)]
    }

    /// Values indexed like `group().elements()`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

pub fn gram_matrix(group: &SymmetricGroup, d: usize) -> DMatrix<f64> {
    let el = group.elements();
    DMatrix::from_fn(el.len(), el.len(), |i, j| {
        (d as f64).powi(el[i].inverse().compose(&el[j]).cycle_count() as i32)
    })
}
