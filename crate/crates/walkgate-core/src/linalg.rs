//! Dense Hermitian linear algebra helpers shared by the propagators.
//!
//! Unitaries are always produced through full eigendecomposition of the
//! Hermitian generator; truncated series expansions lose unitarity far too
//! quickly to be usable in long walks.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};

use crate::error::{Error, Result};
use crate::C64;

/// Maximum absolute deviation from Hermiticity, `max |H - H^dag|`.
pub fn hermiticity_deviation(h: &Array2<C64>) -> f64 {
    let n = h.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((h[[i, j]] - h[[j, i]].conj()).norm());
        }
    }
    dev
}

/// Max-abs deviation of `U^dag U` from the identity.
pub fn unitarity_deviation(u: &Array2<C64>) -> f64 {
    let n = u.nrows();
    let gram = u.t().mapv(|z| z.conj()).dot(u);
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            };
            dev = dev.max((gram[[i, j]] - target).norm());
        }
    }
    dev
}

pub fn frobenius_norm(a: &Array2<C64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Eigendecomposition of a Hermitian matrix, with the input symmetrized to
/// kill rounding noise before it reaches LAPACK.
pub struct HermitianEigen {
    pub values: Array1<f64>,
    pub vectors: Array2<C64>,
}

impl HermitianEigen {
    pub fn new(h: &Array2<C64>) -> Result<Self> {
        let n = h.nrows();
        if n != h.ncols() {
            return Err(Error::DimensionMismatch(n, h.ncols()));
        }
        let mut sym = Array2::<C64>::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                sym[[i, j]] = 0.5 * (h[[i, j]] + h[[j, i]].conj());
            }
        }
        let (values, vectors) = sym.eigh(UPLO::Lower)?;
        Ok(HermitianEigen { values, vectors })
    }

    /// `exp(-i s H) v` without forming the full exponential.
    pub fn apply_exp(&self, s: f64, v: &Array1<C64>) -> Array1<C64> {
        let coeffs = self.vectors.t().mapv(|z| z.conj()).dot(v);
        let rotated = &coeffs * &self.values.mapv(|e| (-C64::i() * s * e).exp());
        self.vectors.dot(&rotated)
    }

    /// The full unitary `exp(-i s H)`.
    pub fn exp_matrix(&self, s: f64) -> Array2<C64> {
        let n = self.values.len();
        let mut scaled = Array2::<C64>::zeros((n, n));
        for (j, col) in self.vectors.columns().into_iter().enumerate() {
            let phase = (-C64::i() * s * self.values[j]).exp();
            for i in 0..n {
                scaled[[i, j]] = col[i] * phase;
            }
        }
        scaled.dot(&self.vectors.t().mapv(|z| z.conj()))
    }
}

/// `exp(-i s H)` for Hermitian `H`, via full eigendecomposition.
///
/// Errors if `H` deviates from Hermiticity by more than `1e-12` relative to
/// its largest entry.
pub fn expm_hermitian(h: &Array2<C64>, s: f64) -> Result<Array2<C64>> {
    let scale = h.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
    let dev = hermiticity_deviation(h);
    if dev > 1e-12 * scale {
        return Err(Error::NotHermitian { deviation: dev });
    }
    Ok(HermitianEigen::new(h)?.exp_matrix(s))
}

/// Sorted eigenvalues of a Hermitian matrix.
pub fn eigvalsh(h: &Array2<C64>) -> Result<Vec<f64>> {
    let eig = HermitianEigen::new(h)?;
    let mut vals: Vec<f64> = eig.values.to_vec();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(vals)
}
