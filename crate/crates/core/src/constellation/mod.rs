//! Weighted coherent-state constellations and the codes built from them.
//!
//! A code is a list of `K` weighted constellations `(V_k, W_k)` over `n`
//! bosonic modes. Logical state `k` is the superposition
//! `|C_k> ∝ Σ_{α ∈ V_k} sqrt(w_α) |α>`. Weights are stored as
//! probabilities (they sum to one), not as amplitudes.

pub mod catalog;
pub mod file;
pub mod rotation;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use catalog::{build_catalog_code, catalog_names, Params};
pub use rotation::{
    apply_rotation, optimize_codeword_rotation, GlobalPhaseFamily, IsoclinicFamily, Rotation,
    RotationFamily, RotationSearch, SearchResult,
};

/// Points closer than this (squared distance) are the same point.
pub const POINT_EPS: f64 = 1e-12;
/// Tolerance for geometric equalities such as shell membership.
pub const GEOM_TOL: f64 = 1e-9;
/// Tolerance on the weight normalization.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// A coherent amplitude vector `α ∈ ℂⁿ`.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudePoint(Vec<Complex64>);

impl AmplitudePoint {
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidParameter("amplitude point needs at least one mode".into()));
        }
        if coords.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite(0));
        }
        Ok(Self(coords))
    }

    pub(crate) fn from_vec_unchecked(coords: Vec<Complex64>) -> Self {
        Self(coords)
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn dist_sqr(&self, other: &Self) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).norm_sqr()).sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self(self.0.iter().map(|z| z * s).collect())
    }

    /// Inverse of the complex embedding: `(x₁+ix₂, …) ↦ (x₁, x₂, …)`.
    pub fn to_real(&self) -> Vec<f64> {
        self.0.iter().flat_map(|z| [z.re, z.im]).collect()
    }
}

/// The standard complex embedding `(x₁,…,x_D) ↦ (x₁+ix₂, …, x_{D−1}+ix_D)`.
pub fn embed_real_to_complex(points: &[Vec<f64>]) -> Result<Vec<AmplitudePoint>> {
    points.iter().map(|p| embed_one(p)).collect()
}

pub(crate) fn embed_one(x: &[f64]) -> Result<AmplitudePoint> {
    if x.len() % 2 != 0 {
        return Err(Error::OddRealDimension(x.len()));
    }
    if x.is_empty() {
        return Err(Error::InvalidParameter("empty real vector".into()));
    }
    AmplitudePoint::new(x.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect())
}

/// One logical codeword's support: points with positive weights summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedConstellation {
    points: Vec<AmplitudePoint>,
    weights: Vec<f64>,
}

impl WeightedConstellation {
    /// Validates every invariant: equal mode counts, positive weights that
    /// sum to one, and pairwise distinct points.
    pub fn new(points: Vec<AmplitudePoint>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::TooFewPoints { needed: 1, found: 0 });
        }
        if points.len() != weights.len() {
            return Err(Error::DimensionMismatch { expected: points.len(), found: weights.len() });
        }
        let n = points[0].modes();
        for (i, p) in points.iter().enumerate() {
            if p.modes() != n {
                return Err(Error::DimensionMismatch { expected: n, found: p.modes() });
            }
            if p.coords().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite(i));
            }
        }
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !(**w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidWeights(format!("weight {i} is {w}, must be positive")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidWeights(format!("weights sum to {total}, expected 1")));
        }
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                let d = points[i].dist_sqr(&points[j]);
                if d <= POINT_EPS {
                    return Err(Error::DuplicatePoints(i, j, d));
                }
            }
        }
        Ok(Self { points, weights })
    }

    /// Normalizes positive weights to sum to one, then validates.
    pub fn from_unnormalized(points: Vec<AmplitudePoint>, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidWeights(format!("weights sum to {total}")));
        }
        let mut weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
        // absorb the last rounding ulp so the sum check is tight
        let drift: f64 = 1.0 - weights.iter().sum::<f64>();
        if let Some(w) = weights.iter_mut().max_by(|a, b| a.total_cmp(b)) {
            *w += drift;
        }
        Self::new(points, weights)
    }

    /// Uniform weights over the given points.
    pub fn uniform(points: Vec<AmplitudePoint>) -> Result<Self> {
        let n = points.len();
        Self::from_unnormalized(points, vec![1.0; n])
    }

    pub fn points(&self) -> &[AmplitudePoint] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn modes(&self) -> usize {
        self.points[0].modes()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AmplitudePoint, f64)> {
        self.points.iter().zip(self.weights.iter().copied())
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { points: self.points.iter().map(|p| p.scaled(s)).collect(), weights: self.weights.clone() }
    }

    /// Mean photon number `n̄ = Σ w‖α‖² / Σ w`.
    pub fn mean_photon_number(&self) -> f64 {
        let num: f64 = self.iter().map(|(p, w)| w * p.norm_sqr()).sum();
        let den: f64 = self.weights.iter().sum();
        num / den
    }

    /// Distinct point norms, ascending, merged within `GEOM_TOL`.
    pub fn shell_radii(&self) -> Vec<f64> {
        distinct_radii(self.points.iter().map(|p| p.norm()))
    }

    /// Total weight on each shell of `shell_radii()`.
    pub fn shell_masses(&self) -> Vec<(f64, f64)> {
        let radii = self.shell_radii();
        let mut masses = vec![0.0; radii.len()];
        for (p, w) in self.iter() {
            let r = p.norm();
            let s = radii.iter().position(|x| (x - r).abs() <= GEOM_TOL).unwrap_or(0);
            masses[s] += w;
        }
        radii.into_iter().zip(masses).collect()
    }

    /// Finds `j` with `points[j] ≈ p` (squared distance within `tol`).
    pub fn find_point(&self, p: &AmplitudePoint, tol: f64) -> Option<usize> {
        self.points.iter().position(|q| q.dist_sqr(p) <= tol)
    }
}

pub(crate) fn distinct_radii(norms: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut radii: Vec<f64> = norms.collect();
    radii.sort_by(|a, b| a.total_cmp(b));
    let mut out: Vec<f64> = Vec::new();
    for r in radii {
        match out.last() {
            Some(last) if (r - last).abs() <= GEOM_TOL => {}
            _ => out.push(r),
        }
    }
    out
}

/// A code: `K` weighted constellations on a common number of modes, plus metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct CodeSpec {
    name: String,
    modes: usize,
    logicals: Vec<WeightedConstellation>,
    shells: Vec<f64>,
    claimed_degree: Option<u32>,
    /// Non-fatal remarks raised during construction.
    pub warnings: Vec<String>,
    /// Reference parameter string `((n, K, d_E, <t,d,d>))` for known constructions.
    pub reference: Option<String>,
}

impl CodeSpec {
    pub fn new(
        name: impl Into<String>,
        logicals: Vec<WeightedConstellation>,
        shells: Vec<f64>,
        claimed_degree: Option<u32>,
    ) -> Result<Self> {
        let first = logicals.first().ok_or(Error::TooFewCodewords { needed: 1, found: 0 })?;
        let modes = first.modes();
        for c in &logicals {
            if c.modes() != modes {
                return Err(Error::DimensionMismatch { expected: modes, found: c.modes() });
            }
        }
        if let Some(r) = shells.iter().find(|r| !(**r >= 0.0) || !r.is_finite()) {
            return Err(Error::InvalidParameter(format!("shell radius {r} must be non-negative")));
        }
        if !shells.is_empty() {
            for (k, c) in logicals.iter().enumerate() {
                for (i, p) in c.points().iter().enumerate() {
                    let r = p.norm();
                    if !shells.iter().any(|s| (s - r).abs() <= GEOM_TOL) {
                        return Err(Error::InvalidParameter(format!(
                            "point {i} of codeword {k} has norm {r}, not on any declared shell"
                        )));
                    }
                }
            }
        }
        Ok(Self {
            name: name.into(),
            modes,
            logicals,
            shells,
            claimed_degree,
            warnings: Vec::new(),
            reference: None,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Number of logical states `K`.
    pub fn dimension(&self) -> usize {
        self.logicals.len()
    }

    pub fn logicals(&self) -> &[WeightedConstellation] {
        &self.logicals
    }

    pub fn shells(&self) -> &[f64] {
        &self.shells
    }

    pub fn claimed_degree(&self) -> Option<u32> {
        self.claimed_degree
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub(crate) fn with_logicals(&self, logicals: Vec<WeightedConstellation>) -> Result<Self> {
        let mut out = Self::new(self.name.clone(), logicals, Vec::new(), self.claimed_degree)?;
        out.shells = out.union_radii();
        out.warnings = self.warnings.clone();
        out.reference = self.reference.clone();
        Ok(out)
    }

    /// All points scaled by `s`; shells scale along.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            name: self.name.clone(),
            modes: self.modes,
            logicals: self.logicals.iter().map(|c| c.scaled(s)).collect(),
            shells: self.shells.iter().map(|r| r * s).collect(),
            claimed_degree: self.claimed_degree,
            warnings: self.warnings.clone(),
            reference: self.reference.clone(),
        }
    }

    /// Distinct points of `S = ∪_k V_k`.
    pub fn union_points(&self) -> Vec<AmplitudePoint> {
        let mut out: Vec<AmplitudePoint> = Vec::new();
        for p in self.logicals.iter().flat_map(|c| c.points()) {
            if !out.iter().any(|q| q.dist_sqr(p) <= POINT_EPS) {
                out.push(p.clone());
            }
        }
        out
    }

    pub fn union_radii(&self) -> Vec<f64> {
        distinct_radii(self.logicals.iter().flat_map(|c| c.points()).map(|p| p.norm()))
    }

    pub fn is_single_shell(&self) -> bool {
        self.union_radii().len() == 1
    }

    pub fn max_radius(&self) -> f64 {
        self.logicals
            .iter()
            .flat_map(|c| c.points())
            .map(|p| p.norm())
            .fold(0.0, f64::max)
    }
}

/// Code parameters `((n, K, d_E, <t↓, d↕, d↓>))`.
#[derive(Clone, Debug, PartialEq)]
pub struct CodeParams {
    pub modes: usize,
    pub dimension: usize,
    pub resolution: f64,
    pub t_down: u32,
    pub d_updown: u32,
    pub d_down: u32,
}

impl std::fmt::Display for CodeParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "(({}, {}, {:.6}, ⟨{},{},{}⟩))",
            self.modes, self.dimension, self.resolution, self.t_down, self.d_updown, self.d_down
        )
    }
}

pub fn mean_photon_number(c: &WeightedConstellation) -> f64 {
    c.mean_photon_number()
}

/// Rescales all points by one global `λ` so every codeword has mean photon
/// number `target`. Returns the scaled code and `λ`.
pub fn normalize_energy(code: &CodeSpec, target: f64) -> Result<(CodeSpec, f64)> {
    if !(target > 0.0) || !target.is_finite() {
        return Err(Error::InvalidParameter(format!("target energy {target} must be positive")));
    }
    let energies: Vec<f64> = code.logicals().iter().map(|c| c.mean_photon_number()).collect();
    let nbar = energies[0];
    if let Some(e) = energies.iter().find(|e| (**e - nbar).abs() > GEOM_TOL) {
        return Err(Error::UnequalEnergy(nbar, *e));
    }
    if !(nbar > 0.0) {
        return Err(Error::ZeroEnergy);
    }
    let lambda = (target / nbar).sqrt();
    Ok((code.scaled(lambda), lambda))
}

/// Resolution `d_E`: minimum squared distance over distinct points of `∪_k V_k`.
pub fn resolution(code: &CodeSpec) -> Result<f64> {
    let pts = code.union_points();
    min_pairwise_dist_sqr(&pts).ok_or(Error::TooFewPoints { needed: 2, found: pts.len() })
}

pub(crate) fn min_pairwise_dist_sqr(pts: &[AmplitudePoint]) -> Option<f64> {
    let mut best: Option<f64> = None;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let d = pts[i].dist_sqr(&pts[j]);
            if d > POINT_EPS {
                best = Some(best.map_or(d, |b: f64| b.min(d)));
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn embedding_examples() {
        let e = embed_real_to_complex(&[vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(e[0].coords(), &[c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(e[1].coords(), &[c(0.0, 1.0)]);
        assert!(matches!(embed_one(&[1.0, 2.0, 3.0]), Err(Error::OddRealDimension(3))));
    }

    #[test]
    fn duplicate_points_rejected() {
        let p = AmplitudePoint::new(vec![c(1.0, 0.0)]).unwrap();
        let err = WeightedConstellation::uniform(vec![p.clone(), p]).unwrap_err();
        assert!(matches!(err, Error::DuplicatePoints(0, 1, _)));
    }

    #[test]
    fn weights_must_be_positive_and_normalized() {
        let a = AmplitudePoint::new(vec![c(1.0, 0.0)]).unwrap();
        let b = AmplitudePoint::new(vec![c(-1.0, 0.0)]).unwrap();
        assert!(WeightedConstellation::new(vec![a.clone(), b.clone()], vec![0.5, 0.6]).is_err());
        assert!(WeightedConstellation::new(vec![a.clone(), b.clone()], vec![1.5, -0.5]).is_err());
        assert!(WeightedConstellation::new(vec![a, b], vec![0.5, 0.5]).is_ok());
    }

    #[test]
    fn resolution_needs_two_points() {
        let a = AmplitudePoint::new(vec![c(1.0, 0.0)]).unwrap();
        let w = WeightedConstellation::uniform(vec![a]).unwrap();
        let code = CodeSpec::new("single", vec![w], vec![], None).unwrap();
        assert!(matches!(resolution(&code), Err(Error::TooFewPoints { .. })));
    }

    #[test]
    fn unequal_energy_rejected() {
        let a = AmplitudePoint::new(vec![c(1.0, 0.0)]).unwrap();
        let b = AmplitudePoint::new(vec![c(0.0, 2.0)]).unwrap();
        let code = CodeSpec::new(
            "lopsided",
            vec![WeightedConstellation::uniform(vec![a]).unwrap(), WeightedConstellation::uniform(vec![b]).unwrap()],
            vec![],
            None,
        )
        .unwrap();
        assert!(matches!(normalize_energy(&code, 1.0), Err(Error::UnequalEnergy(..))));
    }

    #[test]
    fn zero_energy_rejected() {
        let o = AmplitudePoint::new(vec![c(0.0, 0.0)]).unwrap();
        let code = CodeSpec::new("vacuum", vec![WeightedConstellation::uniform(vec![o]).unwrap()], vec![], None).unwrap();
        assert!(matches!(normalize_energy(&code, 1.0), Err(Error::ZeroEnergy)));
    }

    #[test]
    fn off_shell_point_rejected() {
        let a = AmplitudePoint::new(vec![c(1.0, 0.0)]).unwrap();
        let w = WeightedConstellation::uniform(vec![a]).unwrap();
        assert!(CodeSpec::new("bad", vec![w], vec![2.0], None).is_err());
    }
}
