//! JSON code-definition files.
//!
//! ```json
//! {
//!   "name": "cat2",
//!   "modes": 1,
//!   "shells": [1.0],
//!   "logicals": [
//!     [{"point": [[1.0, 0.0]], "weight": 0.5}, {"point": [[-1.0, 0.0]], "weight": 0.5}],
//!     [{"point": [[0.0, 1.0]], "weight": 0.5}, {"point": [[0.0, -1.0]], "weight": 0.5}]
//!   ],
//!   "claimed_degree": 1
//! }
//! ```
//!
//! Each point is a list of `[re, im]` pairs, one per mode. Weights are
//! probabilities and must already sum to one. The first violated invariant
//! is reported with its field path, e.g. `logicals[0][1].weight`.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{AmplitudePoint, CodeSpec, WeightedConstellation, GEOM_TOL, POINT_EPS, WEIGHT_SUM_TOL};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileEntry {
    point: Vec<[f64; 2]>,
    weight: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileCode {
    name: String,
    modes: usize,
    #[serde(default)]
    shells: Vec<f64>,
    logicals: Vec<Vec<FileEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    claimed_degree: Option<u32>,
}

fn fail(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Format { path: path.into(), message: message.into() }
}

/// Parses and validates a code definition from JSON text.
pub fn parse_code(text: &str) -> Result<CodeSpec> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: FileCode = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        fail(if path == "." { "$".to_string() } else { path }, e.inner().to_string())
    })?;
    validate(raw)
}

pub fn read_code(path: &Path) -> Result<CodeSpec> {
    let text = std::fs::read_to_string(path)?;
    parse_code(&text)
}

fn validate(raw: FileCode) -> Result<CodeSpec> {
    if raw.modes == 0 {
        return Err(fail("modes", "must be at least 1"));
    }
    if raw.logicals.is_empty() {
        return Err(fail("logicals", "need at least one codeword"));
    }
    for (i, r) in raw.shells.iter().enumerate() {
        if !(r.is_finite() && *r >= 0.0) {
            return Err(fail(format!("shells[{i}]"), format!("radius {r} must be finite and non-negative")));
        }
    }
    let mut logicals = Vec::with_capacity(raw.logicals.len());
    for (k, entries) in raw.logicals.iter().enumerate() {
        if entries.is_empty() {
            return Err(fail(format!("logicals[{k}]"), "codeword has no points"));
        }
        let mut points = Vec::with_capacity(entries.len());
        let mut weights = Vec::with_capacity(entries.len());
        for (j, e) in entries.iter().enumerate() {
            let here = format!("logicals[{k}][{j}]");
            if e.point.len() != raw.modes {
                return Err(fail(
                    format!("{here}.point"),
                    format!("expected {} modes, found {}", raw.modes, e.point.len()),
                ));
            }
            if let Some(m) = e.point.iter().position(|z| !z[0].is_finite() || !z[1].is_finite()) {
                return Err(fail(format!("{here}.point[{m}]"), "non-finite amplitude"));
            }
            if !(e.weight > 0.0 && e.weight.is_finite()) {
                return Err(fail(format!("{here}.weight"), format!("weight {} must be positive", e.weight)));
            }
            let p = AmplitudePoint::from_vec_unchecked(e.point.iter().map(|z| Complex64::new(z[0], z[1])).collect());
            if !raw.shells.is_empty() {
                let r = p.norm();
                if !raw.shells.iter().any(|s| (s - r).abs() <= GEOM_TOL) {
                    return Err(fail(format!("{here}.point"), format!("norm {r} is not on any declared shell")));
                }
            }
            if let Some(prev) = points.iter().position(|q: &AmplitudePoint| q.dist_sqr(&p) <= POINT_EPS) {
                return Err(fail(format!("{here}.point"), format!("duplicates logicals[{k}][{prev}]")));
            }
            points.push(p);
            weights.push(e.weight);
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(fail(format!("logicals[{k}]"), format!("weights sum to {total}, expected 1")));
        }
        logicals.push(WeightedConstellation::new(points, weights)?);
    }
    CodeSpec::new(raw.name, logicals, raw.shells, raw.claimed_degree)
}

/// Serializes a code to the JSON file format.
pub fn to_json(code: &CodeSpec) -> String {
    let raw = FileCode {
        name: code.name().to_string(),
        modes: code.modes(),
        shells: code.shells().to_vec(),
        logicals: code
            .logicals()
            .iter()
            .map(|c| {
                c.iter()
                    .map(|(p, w)| FileEntry { point: p.coords().iter().map(|z| [z.re, z.im]).collect(), weight: w })
                    .collect()
            })
            .collect(),
        claimed_degree: code.claimed_degree(),
    };
    serde_json::to_string_pretty(&raw).expect("code serialization cannot fail")
}

pub fn write_code(code: &CodeSpec, path: &Path) -> Result<()> {
    std::fs::write(path, to_json(code))?;
    Ok(())
}
