//! Z-type (polynomial annihilation) and X-type (passive symmetry) stabilizer
//! checks on codewords.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Deserialize;

use crate::constellation::catalog::{phase_symmetry_order, preserves};
use crate::constellation::{distinct_radii, AmplitudePoint, CodeSpec, Rotation, GEOM_TOL, POINT_EPS};
use crate::error::{Error, Result};
use crate::fock::{apply_annihilation, apply_phases, codeword_vectors, encode, FockSpace};
use crate::klcheck::gram_matrix;
use crate::linalg::CVector;
use crate::moments::MultiIndex;

/// `P(α) = Σ_u c_u Π_j α_j^{u_j}`, inducing `F = P(a)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AnnihilationPolynomial {
    terms: Vec<(MultiIndex, Complex64)>,
}

impl AnnihilationPolynomial {
    /// Merges repeated exponents and drops exact zeros.
    pub fn new(terms: Vec<(MultiIndex, Complex64)>) -> Result<Self> {
        let n = terms.first().map(|(u, _)| u.len()).ok_or_else(|| Error::InvalidParameter("polynomial has no terms".into()))?;
        let mut merged: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
        for (u, c) in terms {
            if u.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: u.len() });
            }
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::InvalidParameter("non-finite polynomial coefficient".into()));
            }
            *merged.entry(u).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        let terms: Vec<_> = merged.into_iter().filter(|(_, c)| c.norm() > 0.0).collect();
        if terms.is_empty() {
            return Err(Error::InvalidParameter("polynomial has no nonzero coefficient".into()));
        }
        Ok(Self { terms })
    }

    /// Univariate polynomial in mode `j` of `n` from ascending coefficients.
    pub fn univariate(n: usize, j: usize, coeffs: &[Complex64]) -> Result<Self> {
        Self::new(coeffs.iter().enumerate().map(|(d, &c)| (MultiIndex::unit(n, j, d as u32), c)).collect())
    }

    pub fn terms(&self) -> &[(MultiIndex, Complex64)] {
        &self.terms
    }

    pub fn modes(&self) -> usize {
        self.terms[0].0.len()
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|(u, _)| u.degree()).max().unwrap_or(0)
    }

    pub fn eval(&self, a: &AmplitudePoint) -> Complex64 {
        self.terms
            .iter()
            .map(|(u, c)| c * a.coords().iter().zip(u.entries()).map(|(z, &e)| z.powu(e)).product::<Complex64>())
            .sum()
    }

    /// `P(a / scale) v`.
    pub fn apply(&self, space: &FockSpace, scale: f64, v: &CVector) -> CVector {
        let mut out = CVector::zeros(v.len());
        for (u, c) in &self.terms {
            let k = c * scale.powi(-(u.degree() as i32));
            out.axpy(k, &apply_annihilation(space, u, v), Complex64::new(1.0, 0.0));
        }
        out
    }
}

impl std::fmt::Display for AnnihilationPolynomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|(u, c)| format!("({:.6}{:+.6}i)·a^{}", c.re, c.im, u))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FileTerm {
    u: Vec<u32>,
    re: f64,
    #[serde(default)]
    im: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FilePoly {
    terms: Vec<FileTerm>,
}

/// Reads `[{"terms": [{"u": [..], "re": .., "im": ..}, ...]}, ...]`.
pub fn parse_polynomials(text: &str) -> Result<Vec<AnnihilationPolynomial>> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: Vec<FilePoly> = serde_path_to_error::deserialize(de)
        .map_err(|e| Error::Format { path: e.path().to_string(), message: e.inner().to_string() })?;
    if raw.is_empty() {
        return Err(Error::Format { path: "$".into(), message: "no polynomials".into() });
    }
    raw.into_iter()
        .enumerate()
        .map(|(i, p)| {
            AnnihilationPolynomial::new(
                p.terms.into_iter().map(|t| (MultiIndex::new(t.u), Complex64::new(t.re, t.im))).collect(),
            )
            .map_err(|e| Error::Format { path: format!("[{i}].terms"), message: e.to_string() })
        })
        .collect()
}

fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn horner(p: &[Complex64], z: Complex64) -> Complex64 {
    p.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
}

/// Ascending coefficients of a univariate polynomial whose roots are exactly
/// `zs`. Each shell that is a regular `M`-gon contributes
/// `(α/r)^M − (z/r)^M`; other shells contribute `Π (α − z)/r`.
///
/// The product is divided by the square root of the largest cofactor on
/// `zs`, which keeps both the rounding noise at the roots and the values
/// off the roots of order one for several shells at different radii.
fn univariate_annihilator(zs: &[Complex64]) -> Vec<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let radii = distinct_radii(zs.iter().map(|z| z.norm()));
    let mut factors: Vec<Vec<Complex64>> = Vec::new();
    for r in radii {
        let shell: Vec<Complex64> = zs.iter().copied().filter(|z| (z.norm() - r).abs() <= GEOM_TOL).collect();
        if r <= GEOM_TOL {
            factors.push(vec![zero, one]);
            continue;
        }
        let m = shell.len();
        let c = (shell[0] / r).powu(m as u32);
        let regular = shell.iter().all(|z| ((z / r).powu(m as u32) - c).norm() <= 1e-9);
        if regular {
            let mut f = vec![zero; m + 1];
            f[0] = -c;
            f[m] = Complex64::new(r.powi(-(m as i32)), 0.0);
            factors.push(f);
        } else {
            factors.extend(shell.iter().map(|z| vec![-z / r, Complex64::new(1.0 / r, 0.0)]));
        }
    }
    let cofactor = zs
        .iter()
        .map(|&z| {
            let mut v: Vec<f64> = factors.iter().map(|f| horner(f, z).norm()).collect();
            v.sort_by(f64::total_cmp);
            v[1..].iter().product::<f64>()
        })
        .fold(1.0f64, f64::max);
    let mut poly = vec![Complex64::new(1.0 / cofactor.sqrt(), 0.0)];
    for f in &factors {
        poly = poly_mul(&poly, f);
    }
    poly
}

fn dedup(zs: impl Iterator<Item = Complex64>) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = Vec::new();
    for z in zs {
        if !out.iter().any(|w| (w - z).norm_sqr() <= POINT_EPS) {
            out.push(z);
        }
    }
    out
}

/// Polynomials whose common zero set is exactly `S = ∪_k V_k`.
///
/// Single-mode codes get one polynomial built shell by shell. Multimode codes
/// whose union is a Cartesian product of per-mode sets get one univariate
/// polynomial per mode. Anything else has no rule.
pub fn ztype_polynomials(code: &CodeSpec) -> Result<Vec<AnnihilationPolynomial>> {
    let union = code.union_points();
    let n = code.modes();
    let per_mode: Vec<Vec<Complex64>> = (0..n).map(|j| dedup(union.iter().map(|p| p.coords()[j]))).collect();
    if n > 1 {
        let product: usize = per_mode.iter().map(|s| s.len()).product();
        if product != union.len() {
            return Err(Error::NoGeneratorRule(code.name().to_string()));
        }
    }
    per_mode
        .iter()
        .enumerate()
        .map(|(j, zs)| AnnihilationPolynomial::univariate(n, j, &univariate_annihilator(zs)))
        .collect()
}

#[derive(Clone, Debug)]
pub struct ZReport {
    /// `[polynomial][codeword]` residual `‖F_i |C_k⟩‖` on normalized codewords.
    pub residuals: Vec<Vec<f64>>,
    pub max_residual: f64,
    pub warnings: Vec<String>,
}

fn normalized_codewords(code: &CodeSpec, scale: f64, space: &FockSpace) -> Result<Vec<CVector>> {
    let (m, _) = codeword_vectors(code, scale, space)?;
    Ok((0..m.ncols())
        .map(|k| {
            let c = m.column(k).into_owned();
            let n = c.norm();
            c / Complex64::new(n, 0.0)
        })
        .collect())
}

/// Applies `F_i = P_i(a/scale)` to every codeword of the code scaled by `scale`.
pub fn verify_ztype(code: &CodeSpec, polys: &[AnnihilationPolynomial], scale: f64, space: &FockSpace) -> Result<ZReport> {
    if !(scale > 0.0) {
        return Err(Error::InvalidParameter(format!("scale {scale} must be positive")));
    }
    if let Some(p) = polys.iter().find(|p| p.modes() != code.modes()) {
        return Err(Error::DimensionMismatch { expected: code.modes(), found: p.modes() });
    }
    let words = normalized_codewords(code, scale, space)?;
    let mut warnings = Vec::new();
    let rmax = code.max_radius() * scale;
    let strain = polys.iter().map(|p| p.degree()).max().unwrap_or(0) as f64 + 3.0 * rmax * rmax;
    if strain > space.cutoff() as f64 {
        warnings.push(format!(
            "cutoff {} is small for degree {} at amplitude {:.3}; residuals include truncation",
            space.cutoff(),
            polys.iter().map(|p| p.degree()).max().unwrap_or(0),
            rmax
        ));
    }
    let residuals: Vec<Vec<f64>> = polys
        .iter()
        .map(|p| words.iter().map(|w| p.apply(space, scale, w).norm()).collect())
        .collect();
    let max_residual = residuals.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
    Ok(ZReport { residuals, max_residual, warnings })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum XMethod {
    /// Phase rotations built as diagonal Fock-space unitaries.
    Fock,
    /// Passive unitaries checked by re-summing coherent components.
    Analytic,
}

#[derive(Clone, Debug)]
pub struct XReport {
    /// `‖U|C_k⟩ − |C_k⟩‖` per normalized codeword.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub method: XMethod,
}

/// `‖√w₁|a⟩ − √w₂|b⟩‖`, accurate when the two are nearly equal.
fn component_distance(w1: f64, a: &AmplitudePoint, w2: f64, b: &AmplitudePoint) -> f64 {
    let x = -0.5 * a.dist_sqr(b);
    let theta: f64 = a.coords().iter().zip(b.coords()).map(|(p, q)| (p.conj() * q).im).sum();
    // 1 − Re⟨a|b⟩ = 1 − e^x cos θ
    let one_minus = -x.exp_m1() * theta.cos() + 2.0 * (0.5 * theta).sin().powi(2);
    let d2 = (w1.sqrt() - w2.sqrt()).powi(2) + 2.0 * (w1 * w2).sqrt() * one_minus;
    d2.max(0.0).sqrt()
}

/// Checks that `symmetry` permutes each weighted constellation, then measures
/// the codeword invariance `‖U|C_k⟩ − |C_k⟩‖`.
pub fn verify_xtype(code: &CodeSpec, symmetry: &Rotation, scale: f64, space: &FockSpace) -> Result<XReport> {
    if symmetry.dim() != 2 * code.modes() {
        return Err(Error::DimensionMismatch { expected: 2 * code.modes(), found: symmetry.dim() });
    }
    for (k, c) in code.logicals().iter().enumerate() {
        if !preserves(c, symmetry) {
            return Err(Error::SymmetryMismatch(k));
        }
    }
    if let Some(phases) = symmetry.as_phases() {
        let words = normalized_codewords(code, scale, space)?;
        let residuals: Vec<f64> = words.iter().map(|w| (apply_phases(space, &phases, w) - w).norm()).collect();
        let max_residual = residuals.iter().fold(0.0f64, |a, &b| a.max(b));
        return Ok(XReport { residuals, max_residual, method: XMethod::Fock });
    }
    symmetry.to_unitary()?;
    let scaled = code.scaled(scale);
    let gram = gram_matrix(&scaled);
    let mut residuals = Vec::with_capacity(code.dimension());
    for (k, c) in scaled.logicals().iter().enumerate() {
        let mut total = 0.0;
        for (p, w) in c.iter() {
            let q = symmetry.apply_point(p)?;
            let j = c.find_point(&q, GEOM_TOL * scale * scale).ok_or(Error::SymmetryMismatch(k))?;
            total += component_distance(w, &q, c.weights()[j], &c.points()[j]);
        }
        residuals.push(total / gram[(k, k)].re.sqrt());
    }
    let max_residual = residuals.iter().fold(0.0f64, |a, &b| a.max(b));
    Ok(XReport { residuals, max_residual, method: XMethod::Analytic })
}

/// A state satisfying every Z- and X-check that lies outside the codespace.
#[derive(Clone, Debug)]
pub struct Witness {
    pub state: CVector,
    pub z_residual: f64,
    pub x_residual: f64,
    /// `‖(I − VV†)ψ‖` for normalized `ψ`.
    pub outside_norm: f64,
    pub symmetry_order: usize,
}

/// Flips the sign of the outer-shell amplitudes of codeword 0. The support and
/// the shell-wise weights, hence every stabilizer check, are unchanged.
pub fn containment_witness(code: &CodeSpec, scale: f64, space: &FockSpace) -> Result<Witness> {
    let c0 = &code.logicals()[0];
    let radii = c0.shell_radii();
    if radii.len() < 2 {
        return Err(Error::NoWitness("codeword 0 lies on a single shell".into()));
    }
    let polys = ztype_polynomials(code)?;
    let mut psi = CVector::zeros(space.dim());
    for (p, w) in c0.iter() {
        let sign = if (p.norm() - radii[0]).abs() <= GEOM_TOL { 1.0 } else { -1.0 };
        let v = crate::fock::coherent_fock(&p.scaled(scale), space)?.vector;
        psi.axpy(Complex64::new(sign * w.sqrt(), 0.0), &v, Complex64::new(1.0, 0.0));
    }
    let nrm = psi.norm();
    psi /= Complex64::new(nrm, 0.0);
    let z_residual = polys.iter().map(|p| p.apply(space, scale, &psi).norm()).fold(0.0f64, f64::max);
    let order = phase_symmetry_order(c0);
    let phases = vec![2.0 * PI / order as f64; code.modes()];
    let x_residual = (apply_phases(space, &phases, &psi) - &psi).norm();
    let enc = encode(code, scale, space)?;
    let inside = &enc.v * (enc.v.adjoint() * &psi);
    let outside_norm = (&psi - inside).norm();
    if outside_norm <= 1e-3 {
        return Err(Error::NoWitness(format!("perturbed state is within {outside_norm:e} of the codespace")));
    }
    Ok(Witness { state: psi, z_residual, x_residual, outside_norm, symmetry_order: order })
}
