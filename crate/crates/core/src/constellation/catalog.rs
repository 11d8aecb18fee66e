//! Generated catalog constructions.
//!
//! Every entry is built from its parameters; nothing is a hard-coded point
//! list. Unless stated otherwise the codewords of a `K`-dimensional code are
//! copies of one base constellation rotated by the global phase
//! `2πk/(K·M)`, where `M` is the order of the base's own phase symmetry.
//! For a cat code this is the usual `π/2` between the two antipodal pairs;
//! for the two-shell codes in `ℂ²` it is the `π/4` phase that turns a
//! 24-cell into its dual.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use super::rotation::{apply_rotation, Rotation};
use super::{embed_one, AmplitudePoint, CodeSpec, WeightedConstellation, GEOM_TOL};
use crate::error::{Error, Result};

/// Named numeric parameters. Scalars are stored as one-element lists.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Params(BTreeMap<String, Vec<f64>>);

impl Params {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(mut self, key: &str, value: f64) -> Self {
        self.0.insert(key.to_string(), vec![value]);
        self
    }

    pub fn set_list(mut self, key: &str, values: &[f64]) -> Self {
        self.0.insert(key.to_string(), values.to_vec());
        self
    }

    pub fn insert(&mut self, key: &str, values: Vec<f64>) {
        self.0.insert(key.to_string(), values);
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Vec<f64>)> {
        self.0.iter()
    }

    fn lookup(&self, keys: &[&str]) -> Option<&Vec<f64>> {
        keys.iter().find_map(|k| self.0.get(*k))
    }

    fn float(&self, keys: &[&str], default: Option<f64>) -> Result<f64> {
        match self.lookup(keys) {
            Some(v) if v.len() == 1 => Ok(v[0]),
            Some(v) => Err(Error::InvalidParameter(format!("{} expects one value, got {}", keys[0], v.len()))),
            None => default.ok_or_else(|| Error::InvalidParameter(format!("missing parameter {}", keys[0]))),
        }
    }

    fn int(&self, keys: &[&str], default: Option<usize>) -> Result<usize> {
        let x = self.float(keys, default.map(|d| d as f64))?;
        if x < 0.0 || x.fract() != 0.0 || !x.is_finite() {
            return Err(Error::InvalidParameter(format!("{} must be a non-negative integer, got {x}", keys[0])));
        }
        Ok(x as usize)
    }

    fn list(&self, keys: &[&str]) -> Option<&Vec<f64>> {
        self.lookup(keys)
    }
}

/// `(name, parameter summary)` for every catalog entry and alias.
pub fn catalog_names() -> Vec<(&'static str, &'static str)> {
    vec![
        ("cat", "m-gon cat code: m (default 2), K (default 2)"),
        ("polygon_shells", "concentric m-gons: m, radii (strictly increasing), p (optional), K (default 2)"),
        ("hypercube", "D-cube: D (even, default 4), K (default 2)"),
        ("orthoplex", "D-orthoplex: D (even, default 4), K (default 2)"),
        ("cube_orthoplex", "weighted D-cube ∪ D-orthoplex: D (even, default 4), K (default 2)"),
        ("cell16_qutrit", "three 16-cells forming a 24-cell; no parameters"),
        ("cell8_cell16_qubit", "16-cell and 8-cell codewords; no parameters"),
        ("twoshell_8_16", "8-cell at r1 with 16-cell at r2: r1 (default 1), r2 (default 2)"),
        ("twoshell_24cell", "24-cell and dual 24-cell on radii 1 and tau: tau (default 2)"),
        ("qsc8", "alias: cat m=8"),
        ("qcc8", "alias: polygon_shells m=4 radii=1,2"),
        ("qsc12", "alias: cat m=12"),
        ("qcc12", "alias: polygon_shells m=4 radii=1,2,3"),
        ("qsc24", "alias: cube_orthoplex D=4"),
        ("qcc24", "alias: twoshell_8_16 r1=1 r2=2"),
        ("cat16", "alias: cat m=8 (16-leg cat)"),
        ("gon12", "alias: cat m=12 (12-gon code)"),
        ("hexagon", "alias: polygon_shells m=6 radii=1,tau (tau default 2)"),
        ("square3", "alias: polygon_shells m=4 radii=1,2,3"),
        ("cell24", "alias: cube_orthoplex D=4 (24-cell code)"),
    ]
}

/// Builds a catalog code by name.
pub fn build_catalog_code(name: &str, params: &Params) -> Result<CodeSpec> {
    let k = params.int(&["K", "k"], Some(2))?;
    match name {
        "cat" => cat(params.int(&["m"], Some(2))?, k),
        "polygon_shells" => {
            let m = params.int(&["m"], None)?;
            let radii = params
                .list(&["radii"])
                .ok_or_else(|| Error::InvalidParameter("missing parameter radii".into()))?
                .clone();
            if let Some(p) = params.list(&["p"]) {
                if p.len() != 1 || p[0] != radii.len() as f64 {
                    return Err(Error::InvalidParameter(format!(
                        "p = {:?} does not match {} radii",
                        p,
                        radii.len()
                    )));
                }
            }
            polygon_shells(m, &radii, k)
        }
        "hypercube" => hypercube(params.int(&["D", "d"], Some(4))?, k),
        "orthoplex" => orthoplex(params.int(&["D", "d"], Some(4))?, k),
        "cube_orthoplex" => cube_orthoplex(params.int(&["D", "d"], Some(4))?, k),
        "cell16_qutrit" => cell16_qutrit(),
        "cell8_cell16_qubit" => cell8_cell16_qubit(),
        "twoshell_8_16" => twoshell_8_16(params.float(&["r1"], Some(1.0))?, params.float(&["r2"], Some(2.0))?),
        "twoshell_24cell" => twoshell_24cell(params.float(&["tau"], Some(2.0))?),
        "qsc8" => cat(8, 2).map(|c| c.with_name("qsc8")),
        "qcc8" => polygon_shells(4, &[1.0, 2.0], 2).map(|c| c.with_name("qcc8")),
        "qsc12" => cat(12, 2).map(|c| c.with_name("qsc12")),
        "qcc12" => polygon_shells(4, &[1.0, 2.0, 3.0], 2).map(|c| c.with_name("qcc12")),
        "qsc24" => cube_orthoplex(4, 2).map(|c| c.with_name("qsc24")),
        "qcc24" => twoshell_8_16(1.0, 2.0).map(|c| c.with_name("qcc24")),
        "cat16" => cat(8, 2).map(|c| c.with_name("cat16")),
        "gon12" => cat(12, 2).map(|c| c.with_name("gon12")),
        "hexagon" => {
            let tau = params.float(&["tau"], Some(2.0))?;
            polygon_shells(6, &[1.0, tau], 2).map(|c| c.with_name("hexagon"))
        }
        "square3" => polygon_shells(4, &[1.0, 2.0, 3.0], 2).map(|c| c.with_name("square3")),
        "cell24" => cube_orthoplex(4, 2).map(|c| c.with_name("cell24")),
        _ => Err(Error::UnknownCode {
            name: name.to_string(),
            available: catalog_names().iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", "),
        }),
    }
}

fn polar(r: f64, theta: f64) -> AmplitudePoint {
    AmplitudePoint::from_vec_unchecked(vec![Complex64::from_polar(r, theta)])
}

/// Order `M` of the largest cyclic group of global phases `e^{2πi/M}`
/// mapping the weighted constellation onto itself.
pub fn phase_symmetry_order(c: &WeightedConstellation) -> usize {
    (1..=c.len())
        .rev()
        .find(|&m| preserves(c, &Rotation::global_phase(c.modes(), 2.0 * PI / m as f64)))
        .unwrap_or(1)
}

pub(crate) fn preserves(c: &WeightedConstellation, r: &Rotation) -> bool {
    c.iter().all(|(p, w)| {
        let q = match r.apply_point(p) {
            Ok(q) => q,
            Err(_) => return false,
        };
        match c.find_point(&q, GEOM_TOL) {
            Some(j) => (c.weights()[j] - w).abs() <= GEOM_TOL,
            None => false,
        }
    })
}

fn rotated_copies(base: WeightedConstellation, k: usize) -> Result<Vec<WeightedConstellation>> {
    if k == 0 {
        return Err(Error::InvalidParameter("K must be at least 1".into()));
    }
    let m = phase_symmetry_order(&base);
    let modes = base.modes();
    (0..k)
        .map(|j| apply_rotation(&base, &Rotation::global_phase(modes, 2.0 * PI * j as f64 / (k * m) as f64)))
        .collect()
}

fn finish(name: String, logicals: Vec<WeightedConstellation>, degree: u32, reference: Option<String>) -> Result<CodeSpec> {
    let mut code = CodeSpec::new(name, logicals, Vec::new(), Some(degree))?;
    let shells = code.union_radii();
    code = CodeSpec::new(code.name().to_string(), code.logicals().to_vec(), shells, Some(degree))?;
    code.reference = reference;
    Ok(code)
}

/// `m`-gon cat code: base points `e^{2πij/m}`, codeword `k` rotated by `2πk/(Km)`.
pub fn cat(m: usize, k: usize) -> Result<CodeSpec> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("cat needs m >= 2, got {m}")));
    }
    let base = WeightedConstellation::uniform((0..m).map(|j| polar(1.0, 2.0 * PI * j as f64 / m as f64)).collect())?;
    let reference = match (m, k) {
        (2, 2) => Some("((1, 2, 2, ⟨2,2,2⟩))".to_string()),
        (8, 2) => Some("((1, 2, 4sin²(π/16), ⟨8,8,8⟩))".to_string()),
        (12, 2) => Some("((1, 2, ≈0.07, ⟨12,12,12⟩))".to_string()),
        _ => None,
    };
    finish(format!("cat(m={m},K={k})"), rotated_copies(base, k)?, (m - 1) as u32, reference)
}

/// Squared-amplitude shell weights of the tight planar Euclidean designs,
/// before normalization: `1/r₁^m` on the first shell and
/// `(−1)^s / r_s^m · Π_{2≤l≤p, l≠s} (r₁²−r_l²)/(r_s²−r_l²)` on shell `s ≥ 2`.
pub fn polygon_shell_weights(m: usize, radii: &[f64]) -> Vec<f64> {
    let p = radii.len();
    (1..=p)
        .map(|s| {
            let rs = radii[s - 1];
            if s == 1 {
                return rs.powi(-(m as i32));
            }
            let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
            let prod: f64 = (2..=p)
                .filter(|&l| l != s)
                .map(|l| {
                    let rl = radii[l - 1];
                    (radii[0] * radii[0] - rl * rl) / (rs * rs - rl * rl)
                })
                .product();
            sign * rs.powi(-(m as i32)) * prod
        })
        .collect()
}

/// Concentric regular `m`-gons: shell `s` holds `r_s e^{i(2j+s)π/m}`, `j = 1..m`.
pub fn polygon_shells(m: usize, radii: &[f64], k: usize) -> Result<CodeSpec> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("polygon_shells needs m >= 2, got {m}")));
    }
    if radii.is_empty() {
        return Err(Error::InvalidParameter("polygon_shells needs at least one radius".into()));
    }
    if radii[0] <= 0.0 || radii.windows(2).any(|w| !(w[1] > w[0])) || radii.iter().any(|r| !r.is_finite()) {
        return Err(Error::InvalidParameter(format!("radii must be positive and strictly increasing, got {radii:?}")));
    }
    let p = radii.len();
    let shell_w = polygon_shell_weights(m, radii);
    if let Some((s, w)) = shell_w.iter().enumerate().find(|(_, w)| !(**w > 0.0)) {
        return Err(Error::InvalidParameter(format!("shell {} weight {w} is not positive", s + 1)));
    }
    let mut points = Vec::with_capacity(m * p);
    let mut weights = Vec::with_capacity(m * p);
    for s in 1..=p {
        for j in 1..=m {
            points.push(polar(radii[s - 1], (2 * j + s) as f64 * PI / m as f64));
            weights.push(shell_w[s - 1]);
        }
    }
    let base = WeightedConstellation::from_unnormalized(points, weights)?;
    let t = m + 2 * p - 3;
    let ratios: Vec<f64> = radii.iter().map(|r| r / radii[0]).collect();
    let close = |a: &[f64]| a.len() == ratios.len() && a.iter().zip(&ratios).all(|(x, y)| (x - y).abs() < 1e-12);
    let reference = match m {
        6 if close(&[1.0, 2.0]) => Some("((1, 2, ≈0.26, ⟨7,8,18⟩))".to_string()),
        4 if close(&[1.0, 2.0, 3.0]) => Some("((1, 2, ≈0.44, ⟨6,8,12⟩))".to_string()),
        _ => None,
    };
    let mut code = finish(
        format!("polygon_shells(m={m},radii={radii:?},K={k})"),
        rotated_copies(base, k)?,
        t as u32,
        reference.filter(|_| k == 2),
    )?;
    if p > (t + 5) / 4 {
        code.warnings.push(format!(
            "p = {p} exceeds floor((t+5)/4) = {} for degree t = {t}; no tight design is known",
            (t + 5) / 4
        ));
    }
    Ok(code)
}

fn even_dim(d: usize) -> Result<()> {
    if d == 0 || d % 2 != 0 {
        return Err(Error::OddRealDimension(d));
    }
    Ok(())
}

/// Unit-norm vertices of the `D`-cube, `(±1,…,±1)/√D`.
fn cube_vertices(d: usize) -> Vec<Vec<f64>> {
    let s = 1.0 / (d as f64).sqrt();
    (0..(1usize << d))
        .map(|bits| (0..d).map(|i| if bits >> i & 1 == 1 { -s } else { s }).collect())
        .collect()
}

/// `±e_i`.
fn orthoplex_vertices(d: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(2 * d);
    for i in 0..d {
        for s in [1.0, -1.0] {
            let mut v = vec![0.0; d];
            v[i] = s;
            out.push(v);
        }
    }
    out
}

fn embed_all(v: &[Vec<f64>], r: f64) -> Result<Vec<AmplitudePoint>> {
    v.iter().map(|x| embed_one(x).map(|p| p.scaled(r))).collect()
}

pub fn hypercube(d: usize, k: usize) -> Result<CodeSpec> {
    even_dim(d)?;
    let base = WeightedConstellation::uniform(embed_all(&cube_vertices(d), 1.0)?)?;
    finish(format!("hypercube(D={d},K={k})"), rotated_copies(base, k)?, 3, None)
}

pub fn orthoplex(d: usize, k: usize) -> Result<CodeSpec> {
    even_dim(d)?;
    let base = WeightedConstellation::uniform(embed_all(&orthoplex_vertices(d), 1.0)?)?;
    finish(format!("orthoplex(D={d},K={k})"), rotated_copies(base, k)?, 3, None)
}

/// `D`-cube ∪ `D`-orthoplex with weights `D/(2^D(D+2))` and `1/(D(D+2))`.
pub fn cube_orthoplex(d: usize, k: usize) -> Result<CodeSpec> {
    even_dim(d)?;
    let df = d as f64;
    let wc = df / (2f64.powi(d as i32) * (df + 2.0));
    let wo = 1.0 / (df * (df + 2.0));
    let mut points = embed_all(&cube_vertices(d), 1.0)?;
    let mut weights = vec![wc; points.len()];
    let orth = embed_all(&orthoplex_vertices(d), 1.0)?;
    weights.extend(std::iter::repeat(wo).take(orth.len()));
    points.extend(orth);
    let base = WeightedConstellation::from_unnormalized(points, weights)?;
    let reference = match (d, k) {
        (2, 2) => Some("((1, 2, 4sin²(π/16), ⟨8,8,8⟩))".to_string()),
        (4, 2) => Some("((2, 2, 2−√2, ⟨5,6,12⟩))".to_string()),
        (6, 2) => Some("((3, 2, 2−√2, ⟨5,6,12⟩))".to_string()),
        _ => None,
    };
    finish(format!("cube_orthoplex(D={d},K={k})"), rotated_copies(base, k)?, 5, reference)
}

/// The 16 vertices `(±½,±½,±½,±½)` split by the parity of minus signs.
fn demitesseract(parity: u32) -> Vec<Vec<f64>> {
    (0..16u32)
        .filter(|bits| bits.count_ones() % 2 == parity)
        .map(|bits| (0..4).map(|i| if bits >> i & 1 == 1 { -0.5 } else { 0.5 }).collect())
        .collect()
}

/// Qutrit from the three disjoint 16-cells inside a unit 24-cell.
pub fn cell16_qutrit() -> Result<CodeSpec> {
    let logicals = vec![
        WeightedConstellation::uniform(embed_all(&orthoplex_vertices(4), 1.0)?)?,
        WeightedConstellation::uniform(embed_all(&demitesseract(0), 1.0)?)?,
        WeightedConstellation::uniform(embed_all(&demitesseract(1), 1.0)?)?,
    ];
    finish("cell16_qutrit".into(), logicals, 3, Some("((2, 3, 1, ⟨2,4,4⟩))".into()))
}

/// Qubit with a unit 16-cell and a unit 8-cell as its two codewords.
pub fn cell8_cell16_qubit() -> Result<CodeSpec> {
    let logicals = vec![
        WeightedConstellation::uniform(embed_all(&orthoplex_vertices(4), 1.0)?)?,
        WeightedConstellation::uniform(embed_all(&cube_vertices(4), 1.0)?)?,
    ];
    finish("cell8_cell16_qubit".into(), logicals, 3, Some("((2, 2, 1, ⟨2,4,4⟩))".into()))
}

/// 8-cell on radius `r1` with a 16-cell on radius `r2`, per-point weight
/// ratio `w₁₆/w₈ = (r1/r2)⁴`.
pub fn twoshell_8_16(r1: f64, r2: f64) -> Result<CodeSpec> {
    if !(r1 > 0.0 && r2 > 0.0) || !r1.is_finite() || !r2.is_finite() {
        return Err(Error::InvalidParameter(format!("radii must be positive, got r1={r1}, r2={r2}")));
    }
    let mut points = embed_all(&cube_vertices(4), r1)?;
    let mut weights = vec![1.0; points.len()];
    let orth = embed_all(&orthoplex_vertices(4), r2)?;
    weights.extend(std::iter::repeat((r1 / r2).powi(4)).take(orth.len()));
    points.extend(orth);
    let base = WeightedConstellation::from_unnormalized(points, weights)?;
    let reference = Some(format!("((2, 2, {:.6}, ⟨5,6,12⟩))", (2.0 - 2f64.sqrt()) * r1.min(r2).powi(2)));
    finish(format!("twoshell_8_16(r1={r1},r2={r2})"), rotated_copies(base, 2)?, 5, reference)
}

/// Unit 24-cell on the inner shell and the dual 24-cell (the `π/4` phase
/// image) on radius `tau`, per-point weights `1` and `τ⁻⁶`.
pub fn twoshell_24cell(tau: f64) -> Result<CodeSpec> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidParameter(format!("tau must be positive, got {tau}")));
    }
    if (tau - 1.0).abs() <= GEOM_TOL {
        return Err(Error::InvalidParameter(
            "tau = 1 puts both shells on one sphere; use cube_orthoplex for the single-shell code".into(),
        ));
    }
    let mut cell24: Vec<Vec<f64>> = orthoplex_vertices(4);
    cell24.extend(cube_vertices(4));
    let inner = embed_all(&cell24, 1.0)?;
    let dual = Rotation::global_phase(2, PI / 4.0);
    let outer = embed_all(&cell24, tau)?
        .iter()
        .map(|p| dual.apply_point(p))
        .collect::<Result<Vec<_>>>()?;
    let mut weights = vec![1.0; inner.len()];
    weights.extend(std::iter::repeat(tau.powi(-6)).take(outer.len()));
    let points = inner.into_iter().chain(outer).collect();
    let base = WeightedConstellation::from_unnormalized(points, weights)?;
    let reference = ((tau - 2.0).abs() < 1e-12).then(|| "((2, 2, ≈0.56, ⟨6,8,12⟩))".to_string());
    finish(format!("twoshell_24cell(tau={tau})"), rotated_copies(base, 2)?, 7, reference)
}
