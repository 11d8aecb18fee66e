//! Kraus channels on the truncated Fock space.

use num_complex::Complex64;

use super::FockSpace;
use crate::error::{Error, Result};
use crate::linalg::{op_norm, CMatrix, CVector};

/// Target completeness deficiency for the automatic loss `l_max`.
pub const COMPLETENESS_TOL: f64 = 1e-10;
/// Largest number of complex entries a materialized Kraus list may hold.
const MATERIALIZE_LIMIT: usize = 1 << 26;

/// Anything that can apply its Kraus operators to state vectors.
pub trait KrausSet {
    fn space(&self) -> FockSpace;
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    fn apply(&self, i: usize, v: &CVector) -> CVector;
    /// `‖Σ K†K − I‖` in operator norm.
    fn completeness_deficiency(&self) -> f64;
}

/// Dense Kraus operators.
#[derive(Clone, Debug)]
pub struct KrausChannel {
    pub space: FockSpace,
    pub kraus: Vec<CMatrix>,
    pub completeness_deficiency: f64,
}

impl KrausChannel {
    /// Validates completeness to `tol`.
    pub fn new(space: FockSpace, kraus: Vec<CMatrix>, tol: f64) -> Result<Self> {
        let dim = space.dim();
        if kraus.is_empty() {
            return Err(Error::InvalidParameter("Kraus list is empty".into()));
        }
        for k in &kraus {
            if k.shape() != (dim, dim) {
                return Err(Error::DimensionMismatch { expected: dim, found: k.nrows().max(k.ncols()) });
            }
        }
        let mut sum = -CMatrix::identity(dim, dim);
        for k in &kraus {
            sum += k.adjoint() * k;
        }
        let deficiency = op_norm(&sum);
        if deficiency > tol {
            return Err(Error::Incomplete(deficiency));
        }
        Ok(Self { space, kraus, completeness_deficiency: deficiency })
    }
}

impl KrausSet for KrausChannel {
    fn space(&self) -> FockSpace {
        self.space
    }

    fn len(&self) -> usize {
        self.kraus.len()
    }

    fn apply(&self, i: usize, v: &CVector) -> CVector {
        &self.kraus[i] * v
    }

    fn completeness_deficiency(&self) -> f64 {
        self.completeness_deficiency
    }
}

/// Pure loss with probability `γ`, stored as per-mode shift coefficients
/// `⟨n−ℓ|E_ℓ|n⟩ = √C(n,ℓ) γ^{ℓ/2} (1−γ)^{(n−ℓ)/2}` and applied lazily as
/// tensor products over modes.
#[derive(Clone, Debug)]
pub struct LossChannel {
    pub gamma: f64,
    pub space: FockSpace,
    pub l_max: usize,
    coeffs: Vec<Vec<f64>>,
    deficiency: f64,
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for i in 1..=n {
        out[i] = out[i - 1] + (i as f64).ln();
    }
    out
}

fn amplitude_with(lf: &[f64], gamma: f64, n: usize, l: usize) -> f64 {
    if l > n {
        return 0.0;
    }
    if gamma == 0.0 {
        return if l == 0 { 1.0 } else { 0.0 };
    }
    (0.5 * (lf[n] - lf[l] - lf[n - l] + l as f64 * gamma.ln() + (n - l) as f64 * (-gamma).ln_1p())).exp()
}

/// `√C(n,ℓ) γ^{ℓ/2} (1−γ)^{(n−ℓ)/2}`.
pub fn loss_amplitude(gamma: f64, n: usize, l: usize) -> f64 {
    amplitude_with(&ln_factorials(n), gamma, n, l)
}

/// `D[L] = max_n P(Binom(n, γ) > L)` over the levels of one mode, for every `L`.
fn single_mode_deficiencies(gamma: f64, cutoff: usize) -> Vec<f64> {
    let lf = ln_factorials(cutoff);
    let mut out = vec![0.0f64; cutoff];
    for n in 0..cutoff {
        let mut tail = 0.0;
        for l in (1..=n).rev() {
            tail += amplitude_with(&lf, gamma, n, l).powi(2);
            out[l - 1] = out[l - 1].max(tail);
        }
    }
    out
}

fn multimode_deficiency(single: f64, modes: usize) -> f64 {
    -(modes as f64 * (-single).ln_1p()).exp_m1()
}

impl LossChannel {
    /// `l_max = None` picks the smallest `L` whose completeness deficiency is
    /// below `1e−10` over the whole truncated space.
    pub fn new(gamma: f64, space: FockSpace, l_max: Option<usize>) -> Result<Self> {
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::InvalidGamma(gamma));
        }
        let top = space.cutoff() - 1;
        let single = single_mode_deficiencies(gamma, space.cutoff());
        let multi = |l: usize| multimode_deficiency(single[l], space.modes());
        let l_max = match l_max {
            Some(l) => l.min(top),
            None => (0..=top).find(|&l| multi(l) < COMPLETENESS_TOL).unwrap_or(top),
        };
        let lf = ln_factorials(space.cutoff());
        let coeffs = (0..=l_max)
            .map(|l| (0..space.cutoff()).map(|n| amplitude_with(&lf, gamma, n, l)).collect())
            .collect();
        let deficiency = multi(l_max);
        Ok(Self { gamma, space, l_max, coeffs, deficiency })
    }

    /// Per-mode loss counts of Kraus operator `i`, mode 0 most significant.
    pub fn losses(&self, mut i: usize) -> Vec<usize> {
        let base = self.l_max + 1;
        let mut out = vec![0; self.space.modes()];
        for j in (0..out.len()).rev() {
            out[j] = i % base;
            i /= base;
        }
        out
    }

    pub fn to_dense(&self) -> Result<KrausChannel> {
        let dim = self.space.dim();
        let entries = self.len().saturating_mul(dim).saturating_mul(dim);
        if entries > MATERIALIZE_LIMIT {
            return Err(Error::DimensionBudget { dim: entries, budget: MATERIALIZE_LIMIT });
        }
        let kraus = (0..self.len())
            .map(|i| {
                let mut m = CMatrix::zeros(dim, dim);
                for col in 0..dim {
                    let mut e = CVector::zeros(dim);
                    e[col] = Complex64::new(1.0, 0.0);
                    m.set_column(col, &self.apply(i, &e));
                }
                m
            })
            .collect();
        Ok(KrausChannel { space: self.space, kraus, completeness_deficiency: self.deficiency })
    }
}

impl KrausSet for LossChannel {
    fn space(&self) -> FockSpace {
        self.space
    }

    fn len(&self) -> usize {
        (self.l_max + 1).pow(self.space.modes() as u32)
    }

    fn apply(&self, i: usize, v: &CVector) -> CVector {
        let ls = self.losses(i);
        let mut out = CVector::zeros(v.len());
        let mut target = vec![0; ls.len()];
        for (src, z) in v.iter().enumerate() {
            if *z == Complex64::new(0.0, 0.0) {
                continue;
            }
            let levels = self.space.levels(src);
            let mut coef = 1.0;
            let mut ok = true;
            for (j, (&n, &l)) in levels.iter().zip(&ls).enumerate() {
                if n < l {
                    ok = false;
                    break;
                }
                coef *= self.coeffs[l][n];
                target[j] = n - l;
            }
            if ok {
                out[self.space.index(&target)] += z * coef;
            }
        }
        out
    }

    fn completeness_deficiency(&self) -> f64 {
        self.deficiency
    }
}

/// Dense pure-loss Kraus operators.
pub fn loss_kraus(gamma: f64, space: &FockSpace, l_max: Option<usize>) -> Result<KrausChannel> {
    LossChannel::new(gamma, *space, l_max)?.to_dense()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::AmplitudePoint;
    use crate::fock::coherent_fock;

    #[test]
    fn gamma_zero_is_identity() {
        let s = FockSpace::new(1, 12).unwrap();
        let ch = loss_kraus(0.0, &s, None).unwrap();
        assert_eq!(ch.kraus.len(), 1);
        assert!((&ch.kraus[0] - CMatrix::identity(12, 12)).norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_gamma() {
        let s = FockSpace::new(1, 12).unwrap();
        assert!(matches!(LossChannel::new(1.0, s, None), Err(Error::InvalidGamma(_))));
        assert!(matches!(LossChannel::new(-0.1, s, None), Err(Error::InvalidGamma(_))));
    }

    #[test]
    fn auto_lmax_completeness() {
        let s = FockSpace::new(1, 40).unwrap();
        let lazy = LossChannel::new(0.1, s, None).unwrap();
        assert!(lazy.completeness_deficiency() < 1e-10);
        let dense = lazy.to_dense().unwrap();
        let mut sum = -CMatrix::identity(40, 40);
        for k in &dense.kraus {
            sum += k.adjoint() * k;
        }
        assert!(op_norm(&sum) < 1e-10);
        assert!(KrausChannel::new(s, dense.kraus.clone(), 1e-10).is_ok());
    }

    #[test]
    fn coherent_state_maps_to_damped_coherent_state() {
        let s = FockSpace::new(1, 40).unwrap();
        let gamma: f64 = 0.2;
        let alpha = num_complex::Complex64::new(1.2, -0.7);
        let ch = LossChannel::new(gamma, s, None).unwrap();
        let v = coherent_fock(&AmplitudePoint::new(vec![alpha]).unwrap(), &s).unwrap().vector;
        let damped = coherent_fock(&AmplitudePoint::new(vec![alpha * (1.0 - gamma).sqrt()]).unwrap(), &s).unwrap().vector;
        let x = gamma * alpha.norm_sqr();
        let mut fact = 1.0;
        for l in 0..6 {
            if l > 0 {
                fact *= l as f64;
            }
            let out = ch.apply(l, &v);
            let c = damped.dotc(&out);
            // out is parallel to the damped state
            assert!((out.clone() - &damped * c).norm() < 1e-9);
            let expected = (-x).exp() * x.powi(l as i32) / fact;
            assert!((c.norm_sqr() - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn multimode_is_tensor_product() {
        let s = FockSpace::new(2, 6).unwrap();
        let one = FockSpace::new(1, 6).unwrap();
        let ch2 = LossChannel::new(0.3, s, Some(2)).unwrap();
        let ch1 = LossChannel::new(0.3, one, Some(2)).unwrap().to_dense().unwrap();
        let dense = ch2.to_dense().unwrap();
        assert_eq!(dense.kraus.len(), 9);
        for i in 0..9 {
            let ls = ch2.losses(i);
            let kron = ch1.kraus[ls[0]].kronecker(&ch1.kraus[ls[1]]);
            assert!((&dense.kraus[i] - kron).norm() < 1e-14);
        }
    }
}
