//! Real orthogonal rotations of the embedded amplitude space, and a search
//! over rotation families for the second codeword of a `K = 2` code.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{min_pairwise_dist_sqr, resolution, AmplitudePoint, CodeSpec, WeightedConstellation, POINT_EPS};
use crate::error::{Error, Result};

/// Orthogonality tolerance for `RᵀR = I` and `|det R| = 1`.
pub const ORTHO_TOL: f64 = 1e-10;

/// A real orthogonal `D × D` matrix acting on the real embedding (`D = 2n`).
#[derive(Clone, Debug, PartialEq)]
pub struct Rotation(DMatrix<f64>);

impl Rotation {
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
        }
        let d = m.nrows();
        let dev = (m.transpose() * &m - DMatrix::<f64>::identity(d, d)).abs().max();
        if dev > ORTHO_TOL {
            return Err(Error::NotOrthogonal(dev));
        }
        let det = m.determinant();
        if (det.abs() - 1.0).abs() > ORTHO_TOL {
            return Err(Error::NotOrthogonal((det.abs() - 1.0).abs()));
        }
        Ok(Self(m))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    /// Per-mode phase rotation `α_j ↦ e^{iφ_j} α_j`.
    pub fn phases(angles: &[f64]) -> Self {
        let d = 2 * angles.len();
        let mut m = DMatrix::zeros(d, d);
        for (j, &phi) in angles.iter().enumerate() {
            let (s, c) = phi.sin_cos();
            m[(2 * j, 2 * j)] = c;
            m[(2 * j, 2 * j + 1)] = -s;
            m[(2 * j + 1, 2 * j)] = s;
            m[(2 * j + 1, 2 * j + 1)] = c;
        }
        Self(m)
    }

    /// Global phase `α ↦ e^{iφ} α` on `modes` modes.
    pub fn global_phase(modes: usize, phi: f64) -> Self {
        Self::phases(&vec![phi; modes])
    }

    /// Left multiplication `x ↦ q x` by a unit quaternion `q = (a, b, c, d)`
    /// on `ℝ⁴ ≅ ℍ`, with `x = x₁ + x₂i + x₃j + x₄k`.
    pub fn left_isoclinic(q: [f64; 4]) -> Self {
        let [a, b, c, d] = q;
        Self(DMatrix::from_row_slice(4, 4, &[
            a, -b, -c, -d, //
            b, a, -d, c, //
            c, d, a, -b, //
            d, -c, b, a,
        ]))
    }

    /// Right multiplication `x ↦ x q`.
    pub fn right_isoclinic(q: [f64; 4]) -> Self {
        let [a, b, c, d] = q;
        Self(DMatrix::from_row_slice(4, 4, &[
            a, -b, -c, -d, //
            b, a, d, -c, //
            c, -d, a, b, //
            d, c, -b, a,
        ]))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn compose(&self, other: &Rotation) -> Result<Rotation> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(Rotation(&self.0 * &other.0))
    }

    pub fn apply_point(&self, p: &AmplitudePoint) -> Result<AmplitudePoint> {
        let x = p.to_real();
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.len() });
        }
        let y = &self.0 * DVector::from_vec(x);
        Ok(AmplitudePoint::from_vec_unchecked(
            y.as_slice().chunks(2).map(|c| Complex64::new(c[0], c[1])).collect(),
        ))
    }

    /// Largest deviation from commuting with the complex structure `J`; zero
    /// exactly when the rotation is a unitary on `ℂⁿ` (passive linear optics).
    pub fn complex_linearity_defect(&self) -> f64 {
        let d = self.dim();
        let mut j = DMatrix::zeros(d, d);
        for k in 0..d / 2 {
            j[(2 * k, 2 * k + 1)] = -1.0;
            j[(2 * k + 1, 2 * k)] = 1.0;
        }
        (&self.0 * &j - &j * &self.0).abs().max()
    }

    /// The `n × n` unitary represented by this rotation, if it is complex linear.
    pub fn to_unitary(&self) -> Result<DMatrix<Complex64>> {
        let defect = self.complex_linearity_defect();
        if defect > ORTHO_TOL {
            return Err(Error::NotPassive(defect));
        }
        let n = self.dim() / 2;
        Ok(DMatrix::from_fn(n, n, |r, c| {
            Complex64::new(self.0[(2 * r, 2 * c)], self.0[(2 * r + 1, 2 * c)])
        }))
    }

    /// Per-mode phases if the rotation is diagonal in the mode basis.
    pub fn as_phases(&self) -> Option<Vec<f64>> {
        let u = self.to_unitary().ok()?;
        let n = u.nrows();
        for r in 0..n {
            for c in 0..n {
                if r != c && u[(r, c)].norm() > ORTHO_TOL {
                    return None;
                }
            }
        }
        Some((0..n).map(|j| u[(j, j)].arg()).collect())
    }
}

/// Rotates every point through the real embedding; weights are unchanged.
pub fn apply_rotation(c: &WeightedConstellation, r: &Rotation) -> Result<WeightedConstellation> {
    let points = c.points().iter().map(|p| r.apply_point(p)).collect::<Result<Vec<_>>>()?;
    WeightedConstellation::new(points, c.weights().to_vec())
}

/// A parameterized family of rotations on a bounded box.
pub trait RotationFamily {
    fn real_dim(&self) -> usize;
    /// Parameter box; an empty box means the family has no members.
    fn bounds(&self) -> Vec<(f64, f64)>;
    fn rotation(&self, params: &[f64]) -> Rotation;
    /// Whether continuous local refinement makes sense.
    fn continuous(&self) -> bool {
        true
    }
}

/// `α ↦ e^{iφ} α`, `φ ∈ [0, 2π]`.
#[derive(Clone, Debug)]
pub struct GlobalPhaseFamily {
    pub modes: usize,
}

impl RotationFamily for GlobalPhaseFamily {
    fn real_dim(&self) -> usize {
        2 * self.modes
    }
    fn bounds(&self) -> Vec<(f64, f64)> {
        vec![(0.0, 2.0 * std::f64::consts::PI)]
    }
    fn rotation(&self, params: &[f64]) -> Rotation {
        Rotation::global_phase(self.modes, params[0])
    }
}

/// Isoclinic rotations of `ℝ⁴` by a unit quaternion `exp(v)`, `v ∈ [−π, π]³`.
#[derive(Clone, Debug)]
pub struct IsoclinicFamily {
    pub left: bool,
}

impl IsoclinicFamily {
    pub fn quaternion(v: &[f64]) -> [f64; 4] {
        let theta = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if theta < 1e-300 {
            return [1.0, 0.0, 0.0, 0.0];
        }
        let s = theta.sin() / theta;
        [theta.cos(), s * v[0], s * v[1], s * v[2]]
    }
}

impl RotationFamily for IsoclinicFamily {
    fn real_dim(&self) -> usize {
        4
    }
    fn bounds(&self) -> Vec<(f64, f64)> {
        vec![(-std::f64::consts::PI, std::f64::consts::PI); 3]
    }
    fn rotation(&self, params: &[f64]) -> Rotation {
        let q = Self::quaternion(params);
        if self.left {
            Rotation::left_isoclinic(q)
        } else {
            Rotation::right_isoclinic(q)
        }
    }
}

/// A finite list of rotations.
#[derive(Clone, Debug)]
pub struct RotationSet(pub Vec<Rotation>);

impl RotationFamily for RotationSet {
    fn real_dim(&self) -> usize {
        self.0.first().map_or(0, Rotation::dim)
    }
    fn bounds(&self) -> Vec<(f64, f64)> {
        if self.0.is_empty() {
            Vec::new()
        } else {
            vec![(0.0, (self.0.len() - 1) as f64)]
        }
    }
    fn rotation(&self, params: &[f64]) -> Rotation {
        let i = params[0].round().clamp(0.0, (self.0.len() - 1) as f64) as usize;
        self.0[i].clone()
    }
    fn continuous(&self) -> bool {
        false
    }
}

/// Search settings: a full grid with `steps` points per axis, `samples`
/// seeded uniform draws, then compass refinement of the best few.
#[derive(Clone, Debug)]
pub struct RotationSearch {
    pub steps: usize,
    pub samples: usize,
    pub seed: u64,
    pub refine_top: usize,
    pub min_step: f64,
}

impl Default for RotationSearch {
    fn default() -> Self {
        Self { steps: 17, samples: 0, seed: 0, refine_top: 4, min_step: 1e-10 }
    }
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub rotation: Rotation,
    pub params: Vec<f64>,
    /// Resolution of the code with codeword 2 replaced by the rotated codeword 1.
    pub resolution: f64,
    /// False when every member made the two codewords share a point.
    pub feasible: bool,
    pub code: CodeSpec,
    pub evaluated: usize,
}

struct Objective<'a> {
    base: &'a WeightedConstellation,
    family: &'a dyn RotationFamily,
    intra: f64,
}

impl Objective<'_> {
    /// `(feasible, resolution)`; candidates whose rotated codeword touches the
    /// original one are infeasible and ranked by deduplicated resolution.
    fn eval(&self, params: &[f64]) -> (bool, f64) {
        let r = self.family.rotation(params);
        let rotated: Vec<AmplitudePoint> =
            self.base.points().iter().map(|p| r.apply_point(p).expect("dimension checked")).collect();
        let mut cross = f64::INFINITY;
        let mut touching = false;
        for a in self.base.points() {
            for b in &rotated {
                let d = a.dist_sqr(b);
                if d <= POINT_EPS {
                    touching = true;
                } else {
                    cross = cross.min(d);
                }
            }
        }
        (!touching, self.intra.min(cross))
    }
}

fn better(a: (bool, f64), b: (bool, f64)) -> bool {
    match (a.0, b.0) {
        (true, false) => true,
        (false, true) => false,
        _ => a.1 > b.1 + 1e-15,
    }
}

/// Maximizes the resolution of the code whose second codeword is `R` applied
/// to the first one, over `R` in `family`.
pub fn optimize_codeword_rotation(
    code: &CodeSpec,
    family: &dyn RotationFamily,
    search: &RotationSearch,
) -> Result<SearchResult> {
    if code.dimension() != 2 {
        return Err(Error::InvalidParameter(format!(
            "rotation search needs K = 2, code has K = {}",
            code.dimension()
        )));
    }
    let bounds = family.bounds();
    if bounds.is_empty() || search.steps == 0 && search.samples == 0 {
        return Err(Error::EmptyFamily);
    }
    let base = &code.logicals()[0];
    if family.real_dim() != 2 * base.modes() {
        return Err(Error::DimensionMismatch { expected: 2 * base.modes(), found: family.real_dim() });
    }
    let intra = min_pairwise_dist_sqr(base.points()).unwrap_or(f64::INFINITY);
    let objective = Objective { base, family, intra };

    let mut candidates = grid(&bounds, search.steps);
    let mut rng = ChaCha8Rng::seed_from_u64(search.seed);
    for _ in 0..search.samples {
        candidates.push(bounds.iter().map(|&(lo, hi)| rng.gen_range(lo..=hi)).collect());
    }
    let mut scored: Vec<(Vec<f64>, (bool, f64))> =
        candidates.into_iter().map(|p| { let v = objective.eval(&p); (p, v) }).collect();
    let mut evaluated = scored.len();
    // stable: ties keep grid order
    scored.sort_by(|a, b| {
        if better(a.1, b.1) {
            std::cmp::Ordering::Less
        } else if better(b.1, a.1) {
            std::cmp::Ordering::Greater
        } else {
            std::cmp::Ordering::Equal
        }
    });

    let mut best = scored[0].clone();
    if family.continuous() {
        let spacing: Vec<f64> = bounds
            .iter()
            .map(|&(lo, hi)| if search.steps > 1 { (hi - lo) / (search.steps - 1) as f64 } else { hi - lo })
            .collect();
        for (start, value) in scored.iter().take(search.refine_top.max(1)) {
            let (p, v, n) = compass_refine(&objective, &bounds, start.clone(), *value, &spacing, search.min_step);
            evaluated += n;
            if better(v, best.1) {
                best = (p, v);
            }
        }
    }

    let rotation = family.rotation(&best.0);
    let second = super::rotation::apply_rotation(base, &rotation)?;
    let out = code.with_logicals(vec![base.clone(), second])?;
    let resolution = resolution(&out)?;
    Ok(SearchResult { rotation, params: best.0, resolution, feasible: best.1 .0, code: out, evaluated })
}

fn grid(bounds: &[(f64, f64)], steps: usize) -> Vec<Vec<f64>> {
    if steps == 0 {
        return Vec::new();
    }
    let axes: Vec<Vec<f64>> = bounds
        .iter()
        .map(|&(lo, hi)| {
            if steps == 1 {
                vec![lo]
            } else {
                (0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect()
            }
        })
        .collect();
    let mut out = vec![Vec::new()];
    for axis in &axes {
        out = out
            .into_iter()
            .flat_map(|prefix| axis.iter().map(move |&x| {
                let mut p = prefix.clone();
                p.push(x);
                p
            }))
            .collect();
    }
    out
}

/// Compass search over axis and pairwise-diagonal directions, halving the
/// step whenever no direction improves.
fn compass_refine(
    objective: &Objective<'_>,
    bounds: &[(f64, f64)],
    mut x: Vec<f64>,
    mut fx: (bool, f64),
    spacing: &[f64],
    min_step: f64,
) -> (Vec<f64>, (bool, f64), usize) {
    let dim = x.len();
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for i in 0..dim {
        for s in [1.0, -1.0] {
            let mut d = vec![0.0; dim];
            d[i] = s;
            dirs.push(d);
        }
        for j in (i + 1)..dim {
            for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let mut d = vec![0.0; dim];
                d[i] = si;
                d[j] = sj;
                dirs.push(d);
            }
        }
    }
    let mut scale = 0.5;
    let mut evals = 0;
    let mut iters = 0;
    while scale * spacing.iter().cloned().fold(0.0, f64::max) > min_step && iters < 20_000 {
        iters += 1;
        let mut improved = false;
        for d in &dirs {
            let trial: Vec<f64> = (0..dim)
                .map(|i| (x[i] + scale * spacing[i] * d[i]).clamp(bounds[i].0, bounds[i].1))
                .collect();
            let ft = objective.eval(&trial);
            evals += 1;
            if better(ft, fx) {
                x = trial;
                fx = ft;
                improved = true;
                break;
            }
        }
        if !improved {
            scale *= 0.5;
        }
    }
    (x, fx, evals)
}
