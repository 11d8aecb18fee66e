//! Decoders from the physical space back to the `K`-dimensional logical space.
use num_complex::Complex64;

use super::channel::KrausSet;
use crate::error::{Error, Result};
use crate::linalg::{herm_eigen, op_norm, CMatrix, CVector};

/// Eigenvalue floor for `N(P)^{−1/2}`.
pub const PETZ_FLOOR: f64 = 1e-12;

/// A recovery map written directly as a decoder: Kraus operators `B_j`
/// (`K × dim`) supported on the recovered subspace with orthonormal basis
/// `range`, plus a completion sending the orthogonal complement to logical
/// `|0⟩`.
#[derive(Clone, Debug)]
pub struct Recovery {
    pub kraus: Vec<CMatrix>,
    pub range: CMatrix,
    pub completeness_deficiency: f64,
}

impl Recovery {
    fn finish(kraus: Vec<CMatrix>, range: CMatrix) -> Self {
        // every B_j vanishes off `range`, so completeness reduces to Q†(ΣB†B)Q = I
        let r = range.ncols();
        let mut sum = -CMatrix::identity(r, r);
        for b in &kraus {
            let bq = b * &range;
            sum += bq.adjoint() * bq;
        }
        let deficiency = op_norm(&sum);
        Self { kraus, range, completeness_deficiency: deficiency }
    }

    /// `‖Π⊥ x‖²` with `Π⊥` the projector off the recovered subspace.
    pub fn outside_norm_sqr(&self, x: &CVector) -> f64 {
        (x.norm_squared() - (self.range.adjoint() * x).norm_squared()).max(0.0)
    }

    /// Logical Kraus operators of the completion applied after `x` (`dim × K`):
    /// `|0⟩u†` over a factorization `Σ uu† = x†Π⊥x`.
    pub fn completion_ops(&self, x: &CMatrix) -> Vec<CMatrix> {
        let k = x.ncols();
        let qx = self.range.adjoint() * x;
        let g = x.adjoint() * x - qx.adjoint() * qx;
        let (vals, vecs) = herm_eigen(&g);
        (0..k)
            .filter(|&j| vals[j] > 0.0)
            .map(|j| {
                let mut m = CMatrix::zeros(k, k);
                for c in 0..k {
                    m[(0, c)] = vecs[(c, j)].conj() * vals[j].sqrt();
                }
                m
            })
            .collect()
    }
}

/// Petz (transpose) recovery with respect to `P = VV†`:
/// `B_ℓ = (E_ℓ V)† N(P)^{−1/2}`, with `N(P) = Σ_ℓ E_ℓ P E_ℓ† = WW†` for
/// `W = [E_0V | E_1V | …]`. The inverse square root is taken on the range of
/// `W` through the eigendecomposition of the small matrix `W†W`.
pub fn transpose_recovery(v: &CMatrix, channel: &dyn KrausSet) -> Result<Recovery> {
    let dim = v.nrows();
    if channel.space().dim() != dim {
        return Err(Error::DimensionMismatch { expected: channel.space().dim(), found: dim });
    }
    let images = noise_images(v, channel);
    let k = v.ncols();
    let mut w = CMatrix::zeros(dim, k * images.len());
    for (i, img) in images.iter().enumerate() {
        w.view_mut((0, i * k), (dim, k)).copy_from(img);
    }
    let (vals, vecs) = herm_eigen(&(w.adjoint() * &w));
    if vals.iter().all(|&x| x <= PETZ_FLOOR) {
        return Err(Error::ZeroNoiseImage);
    }
    let kept: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > PETZ_FLOOR).collect();
    // Q = W U Σ⁻¹ spans range(W); N(P)^{−1/2} = Q Σ⁻¹ Q†
    let mut q = CMatrix::zeros(dim, kept.len());
    let mut q_scaled = CMatrix::zeros(dim, kept.len());
    for (c, &i) in kept.iter().enumerate() {
        let sigma = vals[i].sqrt();
        let col = &w * vecs.column(i) / Complex64::new(sigma, 0.0);
        q_scaled.set_column(c, &(&col / Complex64::new(sigma, 0.0)));
        q.set_column(c, &col);
    }
    let inv = &q_scaled * q.adjoint();
    let kraus = images.iter().map(|img| img.adjoint() * &inv).collect();
    Ok(Recovery::finish(kraus, q))
}

/// Projects onto the codespace and reads out in the codeword basis; the
/// orthogonal complement goes to `|0⟩`.
pub fn projector_recovery(v: &CMatrix) -> Recovery {
    Recovery::finish(vec![v.adjoint()], v.clone())
}

/// `E_ℓ V` for every Kraus operator.
pub fn noise_images(v: &CMatrix, channel: &dyn KrausSet) -> Vec<CMatrix> {
    (0..channel.len())
        .map(|i| {
            let mut w = CMatrix::zeros(v.nrows(), v.ncols());
            for c in 0..v.ncols() {
                w.set_column(c, &channel.apply(i, &v.column(c).into_owned()));
            }
            w
        })
        .collect()
}
