//! Knill–Laflamme conditions: exact finite-energy matrix elements and the
//! asymptotic parameter triple from moment matching.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::constellation::{resolution, AmplitudePoint, CodeParams, CodeSpec};
use crate::error::{Error, Result};
use crate::linalg::{herm_eigen, hermitize, inv_sqrt_psd, CMatrix};
use crate::moments::{indices_up_to, MomentMatcher, MultiIndex};

/// Default search ceiling for the parameter triple.
pub const DEFAULT_CEILING: u32 = 24;
/// Relative Gram eigenvalue below which codewords count as indistinct.
pub const GRAM_FLOOR: f64 = 1e-12;

fn same_modes(a: &AmplitudePoint, b: &AmplitudePoint) -> Result<()> {
    if a.modes() != b.modes() {
        return Err(Error::DimensionMismatch { expected: a.modes(), found: b.modes() });
    }
    Ok(())
}

/// `⟨a|b⟩ = exp(−½‖a‖² − ½‖b‖² + Σ_j a_j* b_j)`.
pub fn coherent_overlap(a: &AmplitudePoint, b: &AmplitudePoint) -> Result<Complex64> {
    same_modes(a, b)?;
    Ok(overlap_unchecked(a, b))
}

fn overlap_unchecked(a: &AmplitudePoint, b: &AmplitudePoint) -> Complex64 {
    let cross: Complex64 = a.coords().iter().zip(b.coords()).map(|(x, y)| x.conj() * y).sum();
    (cross - 0.5 * (a.norm_sqr() + b.norm_sqr())).exp()
}

/// `⟨a| Π_j (a_j†)^{p_j} a_j^{q_j} |b⟩ = Π_j (a_j*)^{p_j} b_j^{q_j} · ⟨a|b⟩`.
pub fn ladder_matrix_element(a: &AmplitudePoint, b: &AmplitudePoint, p: &MultiIndex, q: &MultiIndex) -> Result<Complex64> {
    same_modes(a, b)?;
    for u in [p, q] {
        if u.len() != a.modes() {
            return Err(Error::DimensionMismatch { expected: a.modes(), found: u.len() });
        }
    }
    Ok(ladder_unchecked(a, b, p, q))
}

fn ladder_unchecked(a: &AmplitudePoint, b: &AmplitudePoint, p: &MultiIndex, q: &MultiIndex) -> Complex64 {
    let mono: Complex64 = a
        .coords()
        .iter()
        .zip(b.coords())
        .zip(p.entries().iter().zip(q.entries()))
        .map(|((x, y), (&pj, &qj))| x.conj().powu(pj) * y.powu(qj))
        .product();
    mono * overlap_unchecked(a, b)
}

/// `K×K` matrix `Σ_{α∈V_k, β∈V_l} √w_α √w_β ⟨α|(a†)^p a^q|β⟩` on the
/// unnormalized codewords `Σ √w |α⟩`.
pub fn codeword_matrix(code: &CodeSpec, p: &MultiIndex, q: &MultiIndex) -> CMatrix {
    let k = code.dimension();
    let mut m = CMatrix::zeros(k, k);
    for (i, ci) in code.logicals().iter().enumerate() {
        for (j, cj) in code.logicals().iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (a, wa) in ci.iter() {
                for (b, wb) in cj.iter() {
                    acc += ladder_unchecked(a, b, p, q) * (wa * wb).sqrt();
                }
            }
            m[(i, j)] = acc;
        }
    }
    m
}

/// Unnormalized codeword Gram matrix.
pub fn gram_matrix(code: &CodeSpec) -> CMatrix {
    let z = MultiIndex::zeros(code.modes());
    codeword_matrix(code, &z, &z)
}

/// `G^{−1/2}`, rejecting numerically singular Gram matrices.
pub(crate) fn lowdin(gram: &CMatrix) -> Result<CMatrix> {
    let (vals, _) = herm_eigen(gram);
    let max = vals.iter().fold(0.0f64, |a, &b| a.max(b));
    let min = vals.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if !(min > GRAM_FLOOR * max.max(1e-300)) {
        return Err(Error::DegenerateCodewords(min / max.max(1e-300)));
    }
    Ok(inv_sqrt_psd(gram, 0.0).0)
}

/// Knill–Laflamme blocks `⟨C_k|E_μ† E_ν|C_l⟩` for pure-loss errors
/// `E_μ = a^μ`, `|μ| ≤ max_loss`, in the Löwdin-orthonormalized codeword basis.
#[derive(Clone, Debug)]
pub struct KLReport {
    pub error_set_label: String,
    pub errors: Vec<MultiIndex>,
    /// Keyed by positions `(μ, ν)` into `errors`.
    pub matrices: BTreeMap<(usize, usize), CMatrix>,
    /// Largest normalized off-diagonal magnitude over all blocks.
    pub off_diag_max: f64,
    /// Largest normalized spread of diagonal entries across codewords.
    pub diag_spread_max: f64,
    /// Same spread without normalization.
    pub diag_spread_raw: f64,
    pub scale: f64,
}

impl KLReport {
    pub fn block(&self, mu: usize, nu: usize) -> &CMatrix {
        &self.matrices[&(mu, nu)]
    }
}

/// Blocks are normalized by `sqrt(n_μ n_ν)` with `n_μ` the mean diagonal
/// magnitude of block `(μ, μ)`, so all error pairs are compared on one scale
/// even where a diagonal vanishes by symmetry.
pub fn kl_report(code: &CodeSpec, max_loss: u32, scale: f64) -> Result<KLReport> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::InvalidParameter(format!("scale {scale} must be positive")));
    }
    let scaled = code.scaled(scale);
    let k = code.dimension();
    let s = lowdin(&gram_matrix(&scaled))?;
    let errors = indices_up_to(code.modes(), max_loss);
    let mut matrices = BTreeMap::new();
    for (mu, em) in errors.iter().enumerate() {
        for (nu, en) in errors.iter().enumerate().skip(mu) {
            let block = &s * codeword_matrix(&scaled, em, en) * &s;
            if mu == nu {
                matrices.insert((mu, mu), hermitize(&block));
            } else {
                matrices.insert((nu, mu), block.adjoint());
                matrices.insert((mu, nu), block);
            }
        }
    }
    let norms: Vec<f64> = (0..errors.len())
        .map(|mu| {
            let b = &matrices[&(mu, mu)];
            (0..k).map(|i| b[(i, i)].norm()).sum::<f64>() / k as f64
        })
        .collect();
    let (mut off, mut spread, mut raw_spread) = (0.0f64, 0.0f64, 0.0f64);
    for (&(mu, nu), b) in &matrices {
        let n = (norms[mu] * norms[nu]).sqrt().max(f64::MIN_POSITIVE);
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    off = off.max(b[(i, j)].norm() / n);
                } else {
                    for l in 0..k {
                        let d = (b[(i, i)] - b[(l, l)]).norm();
                        raw_spread = raw_spread.max(d);
                        spread = spread.max(d / n);
                    }
                }
            }
        }
    }
    Ok(KLReport {
        error_set_label: format!("pure loss a^q, |q| <= {max_loss}"),
        errors,
        matrices,
        off_diag_max: off,
        diag_spread_max: spread,
        diag_spread_raw: raw_spread,
        scale,
    })
}

/// `⟨t↓, d↕, d↓⟩` with the ceiling used in the search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParamTriple {
    pub t_down: u32,
    pub d_updown: u32,
    pub d_down: u32,
    pub search_ceiling: u32,
}

impl std::fmt::Display for ParamTriple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "⟨{},{},{}⟩", self.t_down, self.d_updown, self.d_down)
    }
}

/// Asymptotic parameters from moment matching across codewords.
pub fn code_parameters(code: &CodeSpec, ceiling: u32, tol: f64) -> Result<ParamTriple> {
    if ceiling == 0 {
        return Err(Error::InvalidParameter("ceiling must be at least 1".into()));
    }
    let m = MomentMatcher::new(code, ceiling, tol)?;
    Ok(ParamTriple {
        t_down: m.box_degree_bound(ceiling),
        d_updown: m.total_degree_bound(ceiling),
        d_down: m.loss_degree_bound(ceiling),
        search_ceiling: ceiling,
    })
}

/// Full `((n, K, d_E, ⟨t↓,d↕,d↓⟩))`.
pub fn code_params(code: &CodeSpec, ceiling: u32, tol: f64) -> Result<CodeParams> {
    let t = code_parameters(code, ceiling, tol)?;
    Ok(CodeParams {
        modes: code.modes(),
        dimension: code.dimension(),
        resolution: resolution(code)?,
        t_down: t.t_down,
        d_updown: t.d_updown,
        d_down: t.d_down,
    })
}
