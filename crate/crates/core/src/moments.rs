//! Weighted monomial moments, moment matching across codewords, exact sphere
//! integrals and constellation-size bounds.

use num_complex::Complex64;

use crate::constellation::{CodeSpec, WeightedConstellation, GEOM_TOL};
use crate::error::{Error, Result};

/// Default tolerance for moment comparisons on exact constructions.
pub const MOMENT_TOL: f64 = 1e-9;

/// A multi-index `u ∈ ℕⁿ`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        Self(entries)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0; n])
    }

    /// `u = d·e_j` in `n` modes.
    pub fn unit(n: usize, j: usize, d: u32) -> Self {
        let mut v = vec![0; n];
        v[j] = d;
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    /// `∏ u_j!` as a float.
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&u| (1..=u).map(f64::from).product::<f64>()).product()
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|u| u.to_string()).collect();
        write!(f, "({})", parts.join(" "))
    }
}

/// All multi-indices in `n` variables of total degree exactly `d`, in
/// lexicographically decreasing order.
pub fn indices_of_degree(n: usize, d: u32) -> Vec<MultiIndex> {
    fn rec(n: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if prefix.len() + 1 == n {
            prefix.push(d);
            out.push(MultiIndex(prefix.clone()));
            prefix.pop();
            return;
        }
        for first in (0..=d).rev() {
            prefix.push(first);
            rec(n, d - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    rec(n, d, &mut Vec::with_capacity(n), &mut out);
    out
}

/// All multi-indices of total degree at most `d`, ordered by degree.
pub fn indices_up_to(n: usize, d: u32) -> Vec<MultiIndex> {
    (0..=d).flat_map(|k| indices_of_degree(n, k)).collect()
}

fn check_len(c: &WeightedConstellation, u: &MultiIndex) -> Result<()> {
    if u.len() != c.modes() {
        return Err(Error::DimensionMismatch { expected: c.modes(), found: u.len() });
    }
    Ok(())
}

/// `Σ_α w_α ∏_j (α_j*)^{p_j} α_j^{q_j}`.
pub fn weighted_moment(c: &WeightedConstellation, p: &MultiIndex, q: &MultiIndex) -> Result<Complex64> {
    check_len(c, p)?;
    check_len(c, q)?;
    Ok(c.iter()
        .map(|(pt, w)| {
            let mono: Complex64 = pt
                .coords()
                .iter()
                .zip(p.entries().iter().zip(q.entries()))
                .map(|(z, (&a, &b))| z.conj().powu(a) * z.powu(b))
                .product();
            mono * w
        })
        .sum())
}

/// Cached powers for evaluating many moments of one constellation.
struct PowerTable {
    weights: Vec<f64>,
    // [point][mode][e] = α^e
    pows: Vec<Vec<Vec<Complex64>>>,
}

impl PowerTable {
    fn new(c: &WeightedConstellation, scale: f64, max_e: u32) -> Self {
        let pows = c
            .points()
            .iter()
            .map(|p| {
                p.coords()
                    .iter()
                    .map(|z| {
                        let z = z * scale;
                        let mut v = Vec::with_capacity(max_e as usize + 1);
                        let mut acc = Complex64::new(1.0, 0.0);
                        for _ in 0..=max_e {
                            v.push(acc);
                            acc *= z;
                        }
                        v
                    })
                    .collect()
            })
            .collect();
        Self { weights: c.weights().to_vec(), pows }
    }

    fn moment(&self, p: &MultiIndex, q: &MultiIndex) -> Complex64 {
        self.pows
            .iter()
            .zip(&self.weights)
            .map(|(modes, &w)| {
                let mono: Complex64 = modes
                    .iter()
                    .zip(p.entries().iter().zip(q.entries()))
                    .map(|(pw, (&a, &b))| pw[a as usize].conj() * pw[b as usize])
                    .product();
                mono * w
            })
            .sum()
    }
}

/// Compares moments across all codewords of a code. The code is rescaled to
/// unit maximal radius first: matching is scale invariant, and this keeps an
/// absolute tolerance meaningful for high-degree monomials.
pub struct MomentMatcher {
    modes: usize,
    tables: Vec<PowerTable>,
    tol: f64,
}

impl MomentMatcher {
    pub fn new(code: &CodeSpec, max_degree: u32, tol: f64) -> Result<Self> {
        if code.dimension() < 2 {
            return Err(Error::TooFewCodewords { needed: 2, found: code.dimension() });
        }
        let r = code.max_radius();
        let s = if r > 0.0 { 1.0 / r } else { 1.0 };
        Ok(Self {
            modes: code.modes(),
            tables: code.logicals().iter().map(|c| PowerTable::new(c, s, max_degree)).collect(),
            tol,
        })
    }

    /// Moments of every codeword for `(p, q)`, on the rescaled code.
    pub fn moments(&self, p: &MultiIndex, q: &MultiIndex) -> Vec<Complex64> {
        self.tables.iter().map(|t| t.moment(p, q)).collect()
    }

    /// `max_k |m_k − m_0|`.
    pub fn deviation(&self, p: &MultiIndex, q: &MultiIndex) -> f64 {
        let m = self.moments(p, q);
        m.iter().map(|z| (z - m[0]).norm()).fold(0.0, f64::max)
    }

    pub fn matches(&self, p: &MultiIndex, q: &MultiIndex) -> bool {
        self.deviation(p, q) <= self.tol
    }

    /// Largest `d ≤ ceiling` with all pairs `|p|+|q| ≤ d−1` matching.
    pub fn total_degree_bound(&self, ceiling: u32) -> u32 {
        for level in 0..ceiling {
            for a in 0..=level {
                let ps = indices_of_degree(self.modes, a);
                let qs = indices_of_degree(self.modes, level - a);
                if ps.iter().any(|p| qs.iter().any(|q| !self.matches(p, q))) {
                    return level;
                }
            }
        }
        ceiling
    }

    /// Largest `k ≤ ceiling` with all pairs `|p|,|q| ≤ k−1` matching.
    pub fn box_degree_bound(&self, ceiling: u32) -> u32 {
        for level in 0..ceiling {
            let edge = indices_of_degree(self.modes, level);
            let inner = indices_up_to(self.modes, level);
            let bad = edge.iter().any(|p| inner.iter().any(|q| !self.matches(p, q) || !self.matches(q, p)));
            if bad {
                return level;
            }
        }
        ceiling
    }

    /// Largest `d ≤ ceiling` with all pure-loss pairs `(0, q)`, `|q| ≤ d−1`, matching.
    pub fn loss_degree_bound(&self, ceiling: u32) -> u32 {
        let zero = MultiIndex::zeros(self.modes);
        for level in 0..ceiling {
            if indices_of_degree(self.modes, level).iter().any(|q| !self.matches(&zero, q)) {
                return level;
            }
        }
        ceiling
    }
}

/// Largest `t ≤ t_max` such that all `(p, q)` with `|p|+|q| ≤ t` match
/// across codewords within `tol`.
pub fn moment_match_degree(code: &CodeSpec, t_max: u32, tol: f64) -> Result<u32> {
    let m = MomentMatcher::new(code, t_max, tol)?;
    Ok(m.total_degree_bound(t_max + 1).saturating_sub(1).min(t_max))
}

/// `(n−1)!/(n−1+k)!` without overflow.
fn falling_ratio(n: usize, k: u32) -> f64 {
    (0..k).map(|i| 1.0 / (n as f64 + i as f64)).product()
}

/// `∫ z̄^p z^q dσ` over the unit sphere `S^{2n−1} ⊂ ℂⁿ`, normalized measure:
/// `δ_{pq} · p! (n−1)! / (n−1+|p|)!`.
pub fn complex_sphere_moment(p: &MultiIndex, q: &MultiIndex) -> f64 {
    if p != q {
        return 0.0;
    }
    p.factorial() * falling_ratio(p.len(), p.degree())
}

/// Exact integral of `z̄^p z^q` against the rotation-invariant measure with
/// the same radial shell masses as `c`.
pub fn shell_integral(c: &WeightedConstellation, p: &MultiIndex, q: &MultiIndex) -> Result<f64> {
    check_len(c, p)?;
    check_len(c, q)?;
    let base = complex_sphere_moment(p, q);
    if base == 0.0 {
        return Ok(0.0);
    }
    let deg = (p.degree() + q.degree()) as i32;
    Ok(c.shell_masses().iter().map(|(r, m)| m * r.powi(deg)).sum::<f64>() * base)
}

/// Normalized surface integral of `x^u` over `S^{D−1}`:
///
/// `∫ x^u dσ = Π_j (u_j − 1)!! / Π_{i=0}^{|u|/2−1} (D + 2i)`
///
/// when every `u_j` is even and zero otherwise. This is the usual ratio
/// `Γ(D/2) Π Γ((u_j+1)/2) / (π^{D/2} Γ((D+|u|)/2))` with the Gamma functions
/// cancelled into double factorials.
pub fn sphere_monomial_integral(d: usize, u: &[u32]) -> f64 {
    if u.iter().any(|e| e % 2 == 1) {
        return 0.0;
    }
    let num: f64 = u
        .iter()
        .map(|&e| (1..e).step_by(2).map(f64::from).product::<f64>())
        .product();
    let half: u32 = u.iter().sum::<u32>() / 2;
    let den: f64 = (0..half).map(|i| (d + 2 * i as usize) as f64).product();
    num / den
}

fn single_radius(c: &WeightedConstellation) -> Result<f64> {
    let radii = c.shell_radii();
    if radii.len() != 1 {
        return Err(Error::InvalidParameter(format!(
            "spherical design check needs a single shell, found {} radii",
            radii.len()
        )));
    }
    if radii[0] <= GEOM_TOL {
        return Err(Error::ZeroEnergy);
    }
    Ok(radii[0])
}

/// Whether the radius-normalized real-embedded points integrate every real
/// monomial of degree `≤ t` exactly, within `tol`.
pub fn is_spherical_design(c: &WeightedConstellation, t: u32, tol: f64) -> Result<bool> {
    let r = single_radius(c)?;
    let d = 2 * c.modes();
    let pts: Vec<Vec<f64>> = c.points().iter().map(|p| p.scaled(1.0 / r).to_real()).collect();
    for u in indices_up_to(d, t) {
        let sum: f64 = pts
            .iter()
            .zip(c.weights())
            .map(|(x, w)| w * x.iter().zip(u.entries()).map(|(xi, &e)| xi.powi(e as i32)).product::<f64>())
            .sum();
        if (sum - sphere_monomial_integral(d, u.entries())).abs() > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Euclidean design check: every complex moment of total degree `≤ t`
/// equals the rotation-invariant integral with the constellation's own shell
/// masses. Compared after rescaling to unit maximal radius.
pub fn is_euclidean_design(c: &WeightedConstellation, t: u32, tol: f64) -> Result<bool> {
    let rmax = c.shell_radii().last().copied().unwrap_or(0.0);
    if rmax <= GEOM_TOL {
        return Err(Error::ZeroEnergy);
    }
    let unit = c.scaled(1.0 / rmax);
    let table = PowerTable::new(&unit, 1.0, t);
    let n = c.modes();
    for level in 0..=t {
        for a in 0..=level {
            for p in indices_of_degree(n, a) {
                for q in indices_of_degree(n, level - a) {
                    let exact = shell_integral(&unit, &p, &q)?;
                    if (table.moment(&p, &q) - Complex64::new(exact, 0.0)).norm() > tol {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Largest `t ≤ t_max` for which `is_euclidean_design` holds.
pub fn design_degree(c: &WeightedConstellation, t_max: u32, tol: f64) -> Result<u32> {
    let mut best = 0;
    for t in 1..=t_max {
        if !is_euclidean_design(c, t, tol)? {
            break;
        }
        best = t;
    }
    Ok(best)
}

/// Integration domain for the size bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    /// Unit sphere `S^{D−1}`.
    Sphere(usize),
    /// All of `ℝ^D`, used for multi-shell supports.
    Space(usize),
}

impl std::fmt::Display for Domain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Domain::Sphere(d) => write!(f, "sphere({d})"),
            Domain::Space(d) => write!(f, "space({d})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundsReport {
    pub domain: Domain,
    pub t: u32,
    /// Lower bound `dim P_{⌊t/2⌋}(Ω)`.
    pub fisher_min: u128,
    /// Strengthened lower bound for odd `t`.
    pub moller_min: Option<u128>,
    /// Existence upper bound `dim P_t(Ω)`.
    pub tchakaloff_max: u128,
    pub actual: u128,
    pub tight: bool,
    /// Set for multi-shell supports, where only the `space(D)` bounds apply.
    pub conservative: bool,
}

impl BoundsReport {
    pub fn lower_bound(&self) -> u128 {
        self.moller_min.unwrap_or(self.fisher_min)
    }
}

/// Exact binomial coefficient; zero outside `0 ≤ k ≤ n`.
pub fn binomial(n: i64, k: i64) -> Result<u128> {
    if n < 0 || k < 0 || k > n {
        return Ok(0);
    }
    let k = k.min(n - k) as u128;
    let n = n as u128;
    let mut r: u128 = 1;
    for i in 0..k {
        // r * (n - i) is divisible by (i + 1) after the multiplication
        r = r.checked_mul(n - i).ok_or(Error::Overflow("binomial coefficient"))? / (i + 1);
    }
    Ok(r)
}

fn add(a: u128, b: u128) -> Result<u128> {
    a.checked_add(b).ok_or(Error::Overflow("polynomial space dimension"))
}

/// `dim P_e(S^{D−1}) = C(D+e−1, e) + C(D+e−2, e−1)`.
pub fn sphere_poly_dim(d: usize, e: u32) -> Result<u128> {
    let (d, e) = (d as i64, e as i64);
    add(binomial(d + e - 1, e)?, binomial(d + e - 2, e - 1)?)
}

/// `dim P_e(ℝ^D) = C(D+e, e)`.
pub fn space_poly_dim(d: usize, e: u32) -> Result<u128> {
    binomial(d as i64 + e as i64, e as i64)
}

/// Dimension of the polynomials of degree `≤ e` with the parity of `e`:
/// `Σ_i C(D+e−2i−1, e−2i)`.
fn space_parity_dim(d: usize, e: u32) -> Result<u128> {
    let mut total = 0;
    let mut k = e as i64;
    while k >= 0 {
        total = add(total, binomial(d as i64 + k - 1, k)?)?;
        k -= 2;
    }
    Ok(total)
}

/// Fisher-type, Möller and Tchakaloff bounds on the size of a degree-`t`
/// cubature formula, compared against `actual`.
pub fn size_bounds(domain: Domain, t: u32, excludes_origin: bool, actual: u128) -> Result<BoundsReport> {
    let e = t / 2;
    let odd = t % 2 == 1;
    let (fisher_min, moller_min, tchakaloff_max) = match domain {
        Domain::Sphere(d) => {
            if d == 0 {
                return Err(Error::InvalidParameter("sphere dimension must be at least 1".into()));
            }
            let moller = if odd {
                Some(binomial(d as i64 + e as i64 - 1, e as i64)?.checked_mul(2).ok_or(Error::Overflow("Möller bound"))?)
            } else {
                None
            };
            (sphere_poly_dim(d, e)?, moller, sphere_poly_dim(d, t)?)
        }
        Domain::Space(d) => {
            if d == 0 {
                return Err(Error::InvalidParameter("space dimension must be at least 1".into()));
            }
            let moller = if odd {
                let twice = space_parity_dim(d, e)?.checked_mul(2).ok_or(Error::Overflow("Möller bound"))?;
                Some(if e % 2 == 0 && !excludes_origin { twice - 1 } else { twice })
            } else {
                None
            };
            (space_poly_dim(d, e)?, moller, space_poly_dim(d, t)?)
        }
    };
    let lower = moller_min.unwrap_or(fisher_min);
    Ok(BoundsReport {
        domain,
        t,
        fisher_min,
        moller_min,
        tchakaloff_max,
        actual,
        tight: actual == lower,
        conservative: matches!(domain, Domain::Space(_)),
    })
}

/// Bounds for every codeword of a code, at the claimed degree when present
/// and at the numerically verified Euclidean design degree otherwise.
pub fn code_bounds(code: &CodeSpec, tol: f64) -> Result<Vec<BoundsReport>> {
    let d = 2 * code.modes();
    code.logicals()
        .iter()
        .map(|c| {
            let t = match code.claimed_degree() {
                Some(t) => t,
                None => design_degree(c, 24, tol)?,
            };
            let single = c.shell_radii().len() == 1;
            let domain = if single { Domain::Sphere(d) } else { Domain::Space(d) };
            let origin = c.points().iter().any(|p| p.norm_sqr() <= GEOM_TOL);
            size_bounds(domain, t, !origin, c.len() as u128)
        })
        .collect()
}
