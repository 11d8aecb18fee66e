//! Entanglement fidelity of `R ∘ N_γ ∘ E` and its optimization over the
//! coherent amplitude scale.

use super::channel::{KrausSet, LossChannel};
use super::recovery::{noise_images, transpose_recovery, Recovery};
use super::{encode, FockSpace};
use crate::constellation::CodeSpec;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// `F = (1/K²) Σ |tr A|²` over the logical Kraus operators `A = B_j E_ℓ V`
/// and those of the completion.
pub fn channel_fidelity(v: &CMatrix, channel: &dyn KrausSet, rec: &Recovery) -> f64 {
    let k = v.ncols() as f64;
    let mut total = 0.0;
    for w in noise_images(v, channel) {
        for b in &rec.kraus {
            total += (b * &w).trace().norm_sqr();
        }
        // completion Kraus |0⟩⟨ψ_i| contributes |⟨ψ_i|E_ℓ V|0⟩|²
        total += rec.outside_norm_sqr(&w.column(0).into_owned());
    }
    total / (k * k)
}

/// One benchmark evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchPoint {
    pub gamma: f64,
    pub scale: f64,
    pub nbar: f64,
    pub fidelity: f64,
    pub cutoff: usize,
    pub tail_mass: f64,
    pub kraus_lmax: usize,
}

impl BenchPoint {
    pub fn infidelity(&self) -> f64 {
        1.0 - self.fidelity
    }
}

/// Encodes at `scale`, applies pure loss `γ` (automatic `l_max`) and decodes
/// with the transpose recovery.
pub fn evaluate_point(code: &CodeSpec, gamma: f64, scale: f64, space: &FockSpace) -> Result<BenchPoint> {
    let enc = encode(code, scale, space)?;
    let ch = LossChannel::new(gamma, *space, None)?;
    let rec = transpose_recovery(&enc.v, &ch)?;
    let nbar = code.logicals()[0].mean_photon_number() * scale * scale;
    Ok(BenchPoint {
        gamma,
        scale,
        nbar,
        fidelity: channel_fidelity(&enc.v, &ch, &rec),
        cutoff: space.cutoff(),
        tail_mass: enc.tail_mass,
        kraus_lmax: ch.l_max,
    })
}

pub fn entanglement_fidelity(code: &CodeSpec, gamma: f64, scale: f64, space: &FockSpace) -> Result<f64> {
    evaluate_point(code, gamma, scale, space).map(|p| p.fidelity)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScaleOptimum {
    pub scale: f64,
    pub fidelity: f64,
    /// Admissible grid evaluations, in grid order.
    pub grid: Vec<BenchPoint>,
}

fn admissible(r: Result<BenchPoint>) -> Result<Option<BenchPoint>> {
    match r {
        Ok(p) => Ok(Some(p)),
        Err(Error::CutoffTooSmall { .. }) | Err(Error::DegenerateCodewords(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

const GOLDEN_ITERS: usize = 40;

/// Grid scan, then golden-section refinement inside the bracket around the
/// best grid point. Scales that do not fit the cutoff or leave the codewords
/// indistinct are skipped.
pub fn optimal_scale(code: &CodeSpec, gamma: f64, space: &FockSpace, grid: &[f64]) -> Result<ScaleOptimum> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("scale grid is empty".into()));
    }
    if let Some(s) = grid.iter().find(|s| !(**s > 0.0) || !s.is_finite()) {
        return Err(Error::InvalidParameter(format!("grid scale {s} must be positive")));
    }
    let mut evaluated = Vec::new();
    let mut best: Option<(usize, f64)> = None;
    for (i, &s) in grid.iter().enumerate() {
        if let Some(p) = admissible(evaluate_point(code, gamma, s, space))? {
            if best.map_or(true, |(_, f)| p.fidelity > f) {
                best = Some((i, p.fidelity));
            }
            evaluated.push(p);
        }
    }
    let (bi, bf) = best.ok_or(Error::NoAdmissibleScale)?;
    let mut best_scale = grid[bi];
    let mut best_f = bf;
    let lo = grid[bi.saturating_sub(1)];
    let hi = grid[(bi + 1).min(grid.len() - 1)];
    if hi > lo {
        let f = |s: f64| -> Result<f64> {
            Ok(match admissible(evaluate_point(code, gamma, s, space))? {
                Some(p) => p.fidelity,
                None => f64::NEG_INFINITY,
            })
        };
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (lo, hi);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (f(c)?, f(d)?);
        for _ in 0..GOLDEN_ITERS {
            if fc >= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = f(c)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = f(d)?;
            }
        }
        for (s, fs) in [(c, fc), (d, fd)] {
            if fs > best_f {
                best_f = fs;
                best_scale = s;
            }
        }
    }
    Ok(ScaleOptimum { scale: best_scale, fidelity: best_f, grid: evaluated })
}

/// Evenly spaced grid `a, …, b` with `n` points.
pub fn linear_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}
