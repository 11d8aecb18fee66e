//! Truncated multimode Fock space: coherent states, encoding, the pure-loss
//! channel, recovery and entanglement fidelity.
//!
//! Basis states `|n_0, …, n_{k−1}⟩` are indexed in mixed radix with mode 0
//! most significant.

pub mod channel;
pub mod fidelity;
pub mod recovery;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::constellation::{AmplitudePoint, CodeSpec};
use crate::error::{Error, Result};
use crate::klcheck::lowdin;
use crate::linalg::{CMatrix, CVector};
use crate::moments::MultiIndex;

pub use channel::{loss_kraus, KrausChannel, KrausSet, LossChannel};
pub use fidelity::{
    channel_fidelity, entanglement_fidelity, evaluate_point, linear_grid, optimal_scale, BenchPoint, ScaleOptimum,
};
pub use recovery::{projector_recovery, transpose_recovery, Recovery};

pub const DEFAULT_DIM_BUDGET: usize = 4096;
/// Tail mass above which a state carries a cutoff warning.
pub const TAIL_WARN: f64 = 1e-6;
/// Tail mass allowed for encoded codewords.
pub const TAIL_ENCODE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FockSpace {
    modes: usize,
    cutoff: usize,
}

impl FockSpace {
    pub fn new(modes: usize, cutoff: usize) -> Result<Self> {
        Self::with_budget(modes, cutoff, DEFAULT_DIM_BUDGET)
    }

    pub fn with_budget(modes: usize, cutoff: usize, budget: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidParameter("Fock space needs at least one mode".into()));
        }
        if cutoff < 2 {
            return Err(Error::InvalidParameter(format!("cutoff {cutoff} must be at least 2")));
        }
        let dim = (0..modes).try_fold(1usize, |acc, _| acc.checked_mul(cutoff));
        match dim {
            Some(d) if d <= budget => Ok(Self { modes, cutoff }),
            Some(d) => Err(Error::DimensionBudget { dim: d, budget }),
            None => Err(Error::DimensionBudget { dim: usize::MAX, budget }),
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Per-mode cutoff `N_c` (levels `0..N_c−1`).
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.cutoff.pow(self.modes as u32)
    }

    pub fn index(&self, levels: &[usize]) -> usize {
        levels.iter().fold(0, |acc, &n| acc * self.cutoff + n)
    }

    pub fn levels(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.modes];
        for j in (0..self.modes).rev() {
            out[j] = idx % self.cutoff;
            idx /= self.cutoff;
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct FockState {
    pub space: FockSpace,
    pub vector: CVector,
    /// Probability that the untruncated state lies outside the space.
    pub tail_mass: f64,
    pub cutoff_warning: bool,
}

/// `e^{−|α|²/2} αᵏ/√k!` for `k < cutoff`.
fn coherent_mode(alpha: Complex64, cutoff: usize) -> Vec<Complex64> {
    let mut v = Vec::with_capacity(cutoff);
    let mut c = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for k in 0..cutoff {
        if k > 0 {
            c = c * alpha / (k as f64).sqrt();
        }
        v.push(c);
    }
    v
}

/// `Σ_{k ≥ N} e^{−x} x^k/k!`, summed upward from the first omitted level.
pub fn poisson_tail(x: f64, n: usize) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let ln_fact: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
    let mut term = (-x + n as f64 * x.ln() - ln_fact).exp();
    let mut total = 0.0;
    let mut k = n;
    while term > 0.0 {
        total += term;
        k += 1;
        term *= x / k as f64;
        if term < total * 1e-17 && k as f64 > x {
            break;
        }
    }
    total.min(1.0)
}

/// Tail mass of a coherent state `|α⟩` in `space`.
pub fn coherent_tail(a: &AmplitudePoint, space: &FockSpace) -> f64 {
    let inside: f64 = a
        .coords()
        .iter()
        .map(|z| (-poisson_tail(z.norm_sqr(), space.cutoff())).ln_1p())
        .sum();
    -inside.exp_m1()
}

pub fn coherent_fock(a: &AmplitudePoint, space: &FockSpace) -> Result<FockState> {
    if a.modes() != space.modes() {
        return Err(Error::DimensionMismatch { expected: space.modes(), found: a.modes() });
    }
    let per_mode: Vec<Vec<Complex64>> = a.coords().iter().map(|&z| coherent_mode(z, space.cutoff())).collect();
    let dim = space.dim();
    let mut v = CVector::zeros(dim);
    for (idx, slot) in v.iter_mut().enumerate() {
        let levels = space.levels(idx);
        *slot = levels.iter().enumerate().map(|(j, &n)| per_mode[j][n]).product();
    }
    let tail = coherent_tail(a, space);
    Ok(FockState { space: *space, vector: v, tail_mass: tail, cutoff_warning: tail > TAIL_WARN })
}

/// Unnormalized codeword vectors `Σ √w |λα⟩` as columns, with the largest
/// component tail mass.
pub fn codeword_vectors(code: &CodeSpec, scale: f64, space: &FockSpace) -> Result<(CMatrix, f64)> {
    if code.modes() != space.modes() {
        return Err(Error::DimensionMismatch { expected: space.modes(), found: code.modes() });
    }
    let mut m = CMatrix::zeros(space.dim(), code.dimension());
    let mut tail = 0.0f64;
    for (k, c) in code.logicals().iter().enumerate() {
        for (p, w) in c.iter() {
            let s = coherent_fock(&p.scaled(scale), space)?;
            tail = tail.max(s.tail_mass);
            let mut col = m.column_mut(k);
            col.axpy(Complex64::new(w.sqrt(), 0.0), &s.vector, Complex64::new(1.0, 0.0));
        }
    }
    Ok((m, tail))
}

/// Encoding isometry with its diagnostics.
#[derive(Clone, Debug)]
pub struct Encoding {
    /// `dim × K`, orthonormal columns.
    pub v: CMatrix,
    /// Gram matrix of the unnormalized truncated codewords.
    pub raw_gram: CMatrix,
    pub tail_mass: f64,
    pub scale: f64,
    pub space: FockSpace,
}

/// Löwdin-orthonormalized codewords of the code scaled by `scale`.
pub fn encode(code: &CodeSpec, scale: f64, space: &FockSpace) -> Result<Encoding> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::InvalidParameter(format!("scale {scale} must be positive")));
    }
    let (c, tail) = codeword_vectors(code, scale, space)?;
    if tail > TAIL_ENCODE {
        return Err(Error::CutoffTooSmall { cutoff: space.cutoff(), tail, limit: TAIL_ENCODE });
    }
    let gram = c.adjoint() * &c;
    let s = lowdin(&gram)?;
    Ok(Encoding { v: &c * s, raw_gram: gram, tail_mass: tail, scale, space: *space })
}

/// `a^u v` on the truncated space.
pub fn apply_annihilation(space: &FockSpace, u: &MultiIndex, v: &CVector) -> CVector {
    let mut out = CVector::zeros(v.len());
    for (idx, slot) in out.iter_mut().enumerate() {
        let levels = space.levels(idx);
        let mut src = Vec::with_capacity(levels.len());
        let mut coef = 1.0;
        let mut inside = true;
        for (n, &k) in levels.iter().zip(u.entries()) {
            let m = n + k as usize;
            if m >= space.cutoff() {
                inside = false;
                break;
            }
            coef *= ((n + 1)..=m).map(|x| (x as f64).sqrt()).product::<f64>();
            src.push(m);
        }
        if inside {
            *slot = v[space.index(&src)] * coef;
        }
    }
    out
}

/// `exp(i Σ_j φ_j n̂_j) v`.
pub fn apply_phases(space: &FockSpace, phases: &[f64], v: &CVector) -> CVector {
    DVector::from_iterator(
        v.len(),
        v.iter().enumerate().map(|(idx, z)| {
            let theta: f64 = space.levels(idx).iter().zip(phases).map(|(&n, phi)| n as f64 * phi).sum();
            z * Complex64::from_polar(1.0, theta)
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::catalog;
    use crate::klcheck::{coherent_overlap, ladder_matrix_element};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pt(z: &[(f64, f64)]) -> AmplitudePoint {
        AmplitudePoint::new(z.iter().map(|&(re, im)| Complex64::new(re, im)).collect()).unwrap()
    }

    #[test]
    fn indexing_round_trip() {
        let s = FockSpace::new(3, 5).unwrap();
        for i in 0..s.dim() {
            assert_eq!(s.index(&s.levels(i)), i);
        }
        assert_eq!(s.index(&[1, 0, 0]), 25);
    }

    #[test]
    fn budget_enforced() {
        assert!(matches!(FockSpace::new(3, 20), Err(Error::DimensionBudget { dim: 8000, .. })));
        assert!(FockSpace::with_budget(3, 20, 10_000).is_ok());
        assert!(FockSpace::new(1, 1).is_err());
    }

    #[test]
    fn vacuum_and_normalization() {
        let s = FockSpace::new(1, 40).unwrap();
        let vac = coherent_fock(&pt(&[(0.0, 0.0)]), &s).unwrap();
        assert_eq!(vac.vector[0], Complex64::new(1.0, 0.0));
        assert!(vac.vector.iter().skip(1).all(|z| *z == Complex64::new(0.0, 0.0)));
        let two = coherent_fock(&pt(&[(2.0, 0.0)]), &s).unwrap();
        assert!((two.vector.norm() - 1.0).abs() < 1e-12);
        assert!(!two.cutoff_warning);
    }

    #[test]
    fn tail_matches_direct_sum() {
        let s = FockSpace::new(1, 10).unwrap();
        let st = coherent_fock(&pt(&[(2.0, 1.0)]), &s).unwrap();
        let inside = st.vector.norm_squared();
        assert!((st.tail_mass - (1.0 - inside)).abs() < 1e-14);
        assert!(st.cutoff_warning);
    }

    #[test]
    fn overlaps_match_closed_form() {
        let s = FockSpace::new(1, 40).unwrap();
        let a = pt(&[(1.0, 0.0)]);
        let b = pt(&[(0.0, 1.0)]);
        let fa = coherent_fock(&a, &s).unwrap();
        let fb = coherent_fock(&b, &s).unwrap();
        let num = fa.vector.dotc(&fb.vector);
        assert!((num - coherent_overlap(&a, &b).unwrap()).norm() < 1e-10);
    }

    #[test]
    fn ladder_matches_fock() {
        let s = FockSpace::new(1, 40).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let a = pt(&[(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5))]);
            let b = pt(&[(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5))]);
            let fa = coherent_fock(&a, &s).unwrap().vector;
            let fb = coherent_fock(&b, &s).unwrap().vector;
            // ⟨a|(a†)² a|b⟩ = ⟨a² a|... written as (a² |a⟩)† (a |b⟩)
            let left = apply_annihilation(&s, &MultiIndex::new(vec![2]), &fa);
            let right = apply_annihilation(&s, &MultiIndex::new(vec![1]), &fb);
            let exact = ladder_matrix_element(&a, &b, &MultiIndex::new(vec![2]), &MultiIndex::new(vec![1])).unwrap();
            assert!((left.dotc(&right) - exact).norm() < 1e-9);
        }
    }

    #[test]
    fn encoding_is_isometry_and_overlap_matches() {
        let s = FockSpace::new(1, 40).unwrap();
        let code = catalog::cat(2, 2).unwrap();
        let enc = encode(&code, 2.0, &s).unwrap();
        let vv = enc.v.adjoint() * &enc.v;
        for i in 0..2 {
            assert!((enc.v.column(i).norm() - 1.0).abs() < 1e-12);
            for j in 0..2 {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((vv[(i, j)] - Complex64::new(target, 0.0)).norm() < 1e-10);
            }
        }
        // four cross terms ½⟨±2|±2i⟩
        let mut analytic = Complex64::new(0.0, 0.0);
        for x in [2.0, -2.0] {
            for y in [2.0, -2.0] {
                analytic += 0.5 * coherent_overlap(&pt(&[(x, 0.0)]), &pt(&[(0.0, y)])).unwrap();
            }
        }
        assert!((enc.raw_gram[(0, 1)].norm() - analytic.norm()).abs() < 1e-10);
    }

    #[test]
    fn encode_rejects_small_cutoff() {
        let s = FockSpace::new(1, 10).unwrap();
        let code = catalog::cat(2, 2).unwrap();
        assert!(matches!(encode(&code, 3.0, &s), Err(Error::CutoffTooSmall { .. })));
    }

    #[test]
    fn phase_rotation_of_coherent_state() {
        let s = FockSpace::new(2, 20).unwrap();
        let a = pt(&[(0.8, 0.1), (-0.3, 0.5)]);
        let rotated = pt(&[(0.8 * 0.0 - 0.1, 0.8), (-0.3 * (-1.0), -0.5)]);
        let v = apply_phases(&s, &[std::f64::consts::FRAC_PI_2, std::f64::consts::PI], &coherent_fock(&a, &s).unwrap().vector);
        let w = coherent_fock(&rotated, &s).unwrap().vector;
        assert!((v - w).norm() < 1e-12);
    }
}
