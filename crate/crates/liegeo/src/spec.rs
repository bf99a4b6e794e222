//! JSON analysis specifications: algebra and metric sources plus task
//! parameters, with validation and canonical re-serialization.

use nalgebra::DMatrix;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::algebra::{semidirect_product, LieAlgebra};
use crate::catalog;
use crate::error::{Error, Result};
use crate::growth::SemidirectDecl;
use crate::metric::MetricForm;

/// Task parameters with their defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub t_max: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub seed: u64,
    pub restarts: usize,
    pub probes: usize,
    pub tol: f64,
    /// Growth scan grid `(t0, t1, n)`, log-spaced.
    pub t_grid: (f64, f64, usize),
}

impl Default for Params {
    fn default() -> Self {
        Params {
            t_max: 10.0,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            seed: 0,
            restarts: 64,
            probes: 16,
            tol: 1e-10,
            t_grid: (0.1, 1e3, 48),
        }
    }
}

/// A parsed and validated analysis specification.
#[derive(Debug, Clone)]
pub struct AnalysisSpec {
    pub algebra: LieAlgebra,
    pub metric: MetricForm,
    /// Declared semidirect decomposition when the algebra came from one.
    pub semidirect: Option<SemidirectDecl>,
    pub params: Params,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    algebra: RawAlgebra,
    metric: RawMetric,
    #[serde(default)]
    params: RawParams,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAlgebra {
    #[serde(default)]
    builtin: Option<String>,
    #[serde(default)]
    dim: Option<usize>,
    #[serde(default)]
    brackets: Option<Vec<RawBracket>>,
    #[serde(default)]
    labels: Option<Vec<String>>,
    #[serde(default)]
    semidirect: Option<RawSemidirect>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBracket {
    i: usize,
    j: usize,
    coeffs: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSemidirect {
    k: Box<RawAlgebra>,
    rep: Vec<Vec<Vec<f64>>>,
    m: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMetric {
    #[serde(default)]
    preset: Option<String>,
    #[serde(default)]
    matrix: Option<Vec<Vec<f64>>>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawParams {
    tmax: Option<f64>,
    rel_tol: Option<f64>,
    abs_tol: Option<f64>,
    seed: Option<u64>,
    restarts: Option<usize>,
    probes: Option<usize>,
    tol: Option<f64>,
    tgrid: Option<String>,
}

fn resolve_algebra(raw: &RawAlgebra, path: &str) -> Result<(LieAlgebra, Option<SemidirectDecl>)> {
    let sources = [
        raw.builtin.is_some(),
        raw.dim.is_some(),
        raw.semidirect.is_some(),
    ];
    if sources.iter().filter(|&&s| s).count() != 1 {
        return Err(Error::spec(
            path,
            "exactly one of 'builtin', 'dim'+'brackets', or 'semidirect' must be given",
        ));
    }
    if let Some(name) = &raw.builtin {
        let entry = catalog::load_builtin(name)?;
        return Ok((entry.algebra, None));
    }
    if let Some(sd) = &raw.semidirect {
        let (k, _) = resolve_algebra(&sd.k, &format!("{path}.semidirect.k"))?;
        let mut rep = Vec::with_capacity(sd.rep.len());
        for (idx, rows) in sd.rep.iter().enumerate() {
            rep.push(parse_matrix(
                rows,
                sd.m,
                &format!("{path}.semidirect.rep[{idx}]"),
            )?);
        }
        let algebra = semidirect_product(&k, &rep, sd.m)?;
        let decl = SemidirectDecl { k, rep, m: sd.m };
        return Ok((algebra, Some(decl)));
    }
    let dim = raw.dim.unwrap();
    let brackets = raw.brackets.as_deref().unwrap_or(&[]);
    let mut table = Vec::with_capacity(brackets.len());
    let mut seen = std::collections::HashSet::new();
    for (idx, b) in brackets.iter().enumerate() {
        let p = format!("{path}.brackets[{idx}]");
        if b.i == 0 || b.j == 0 || b.i > dim || b.j > dim {
            return Err(Error::spec(
                &p,
                format!("indices are 1-based and at most {dim}"),
            ));
        }
        if b.i >= b.j {
            return Err(Error::spec(&p, "bracket entries must have i < j"));
        }
        if !seen.insert((b.i, b.j)) {
            return Err(Error::spec(
                &p,
                format!("duplicate bracket ({}, {})", b.i, b.j),
            ));
        }
        if b.coeffs.len() != dim {
            return Err(Error::spec(
                format!("{p}.coeffs"),
                format!("expected {dim} coefficients, got {}", b.coeffs.len()),
            ));
        }
        table.push((b.i - 1, b.j - 1, b.coeffs.clone()));
    }
    let mut algebra = LieAlgebra::from_bracket_table(dim, &table)?;
    if let Some(labels) = &raw.labels {
        algebra.set_labels(labels.clone())?;
    }
    Ok((algebra, None))
}

fn parse_matrix(rows: &[Vec<f64>], expected: usize, path: &str) -> Result<DMatrix<f64>> {
    if rows.len() != expected || rows.iter().any(|r| r.len() != expected) {
        return Err(Error::spec(
            path,
            format!("expected a {expected}x{expected} matrix"),
        ));
    }
    Ok(DMatrix::from_fn(expected, expected, |i, j| rows[i][j]))
}

fn resolve_metric(
    raw: &RawMetric,
    algebra_dim: usize,
    builtin: Option<&str>,
) -> Result<MetricForm> {
    match (&raw.preset, &raw.matrix) {
        (Some(_), Some(_)) | (None, None) => Err(Error::spec(
            "metric",
            "exactly one of 'preset' or 'matrix' must be given",
        )),
        (Some(name), None) => {
            let Some(builtin) = builtin else {
                return Err(Error::spec(
                    "metric.preset",
                    "presets are only available for builtin algebras",
                ));
            };
            let entry = catalog::load_builtin(builtin)?;
            entry.preset(name).cloned().ok_or_else(|| {
                let names: Vec<&str> = entry.presets.iter().map(|(n, _)| n.as_str()).collect();
                Error::spec(
                    "metric.preset",
                    format!("unknown preset '{name}', available: {}", names.join(", ")),
                )
            })
        }
        (None, Some(rows)) => {
            if rows.len() != algebra_dim {
                return Err(Error::spec(
                    "metric.matrix",
                    format!(
                        "metric dimension {} does not match algebra dimension {algebra_dim}",
                        rows.len()
                    ),
                ));
            }
            let m = parse_matrix(rows, algebra_dim, "metric.matrix")?;
            MetricForm::new(m)
        }
    }
}

fn parse_tgrid(text: &str) -> Result<(f64, f64, usize)> {
    let body = text
        .strip_prefix("log:")
        .ok_or_else(|| Error::spec("params.tgrid", "expected format 'log:t0,t1,N'"))?;
    let parts: Vec<&str> = body.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::spec("params.tgrid", "expected format 'log:t0,t1,N'"));
    }
    let t0: f64 = parts[0]
        .parse()
        .map_err(|_| Error::spec("params.tgrid", "bad t0"))?;
    let t1: f64 = parts[1]
        .parse()
        .map_err(|_| Error::spec("params.tgrid", "bad t1"))?;
    let n: usize = parts[2]
        .parse()
        .map_err(|_| Error::spec("params.tgrid", "bad N"))?;
    if !(t0 > 0.0 && t1 > t0 && n >= 2) {
        return Err(Error::spec("params.tgrid", "need 0 < t0 < t1 and N >= 2"));
    }
    Ok((t0, t1, n))
}

/// Parses and validates a JSON analysis spec, filling defaults.
pub fn parse_spec(text: &str) -> Result<AnalysisSpec> {
    let raw: RawSpec = serde_json::from_str(text).map_err(|e| Error::spec("$", e.to_string()))?;
    let (algebra, semidirect) = resolve_algebra(&raw.algebra, "algebra")?;
    let metric = resolve_metric(&raw.metric, algebra.dim(), raw.algebra.builtin.as_deref())?;
    let mut params = Params::default();
    if let Some(v) = raw.params.tmax {
        if v <= 0.0 || v.is_nan() {
            return Err(Error::spec("params.tmax", "must be positive"));
        }
        params.t_max = v;
    }
    if let Some(v) = raw.params.rel_tol {
        params.rel_tol = v;
    }
    if let Some(v) = raw.params.abs_tol {
        params.abs_tol = v;
    }
    if let Some(v) = raw.params.seed {
        params.seed = v;
    }
    if let Some(v) = raw.params.restarts {
        params.restarts = v;
    }
    if let Some(v) = raw.params.probes {
        params.probes = v;
    }
    if let Some(v) = raw.params.tol {
        params.tol = v;
    }
    if let Some(v) = &raw.params.tgrid {
        params.t_grid = parse_tgrid(v)?;
    }
    Ok(AnalysisSpec {
        algebra,
        metric,
        semidirect,
        params,
    })
}

impl AnalysisSpec {
    /// Canonical JSON form: explicit structure constants (`i < j`
    /// brackets, 1-based), explicit metric matrix, all parameters filled.
    /// Reparsing yields a field-by-field identical spec.
    pub fn to_canonical_json(&self) -> Value {
        let n = self.algebra.dim();
        let mut brackets = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let coeffs: Vec<f64> = (0..n).map(|k| self.algebra.c(i, j, k)).collect();
                if coeffs.iter().any(|&c| c != 0.0) {
                    brackets.push(json!({"i": i + 1, "j": j + 1, "coeffs": coeffs}));
                }
            }
        }
        let metric_rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| self.metric.matrix()[(i, j)]).collect())
            .collect();
        json!({
            "algebra": {
                "dim": n,
                "brackets": brackets,
                "labels": self.algebra.labels(),
            },
            "metric": {"matrix": metric_rows},
            "params": {
                "tmax": self.params.t_max,
                "rel_tol": self.params.rel_tol,
                "abs_tol": self.params.abs_tol,
                "seed": self.params.seed,
                "restarts": self.params.restarts,
                "probes": self.params.probes,
                "tol": self.params.tol,
                "tgrid": format!("log:{},{},{}", self.params.t_grid.0, self.params.t_grid.1, self.params.t_grid.2),
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_builtin_with_preset() {
        let spec =
            parse_spec(r#"{"algebra":{"builtin":"aff"},"metric":{"preset":"g-1"}}"#).unwrap();
        assert_eq!(spec.algebra.dim(), 2);
        assert_eq!(spec.metric.matrix()[(1, 1)], -1.0);
        assert_eq!(spec.params, Params::default());
    }

    #[test]
    fn parse_inline_algebra() {
        let spec = parse_spec(
            r#"{"algebra":{"dim":2,"brackets":[{"i":1,"j":2,"coeffs":[0,1]}]},
                "metric":{"matrix":[[1,0],[0,1]]}}"#,
        )
        .unwrap();
        // Explicit form of the affine builtin.
        let aff = catalog::load_builtin("aff").unwrap().algebra;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    assert_eq!(spec.algebra.c(i, j, k), aff.c(i, j, k));
                }
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_reported_with_path() {
        let err = parse_spec(
            r#"{"algebra":{"dim":2,"brackets":[{"i":1,"j":2,"coeffs":[0,1]}]},
                "metric":{"matrix":[[1,0,0],[0,1,0],[0,0,1]]}}"#,
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("metric.matrix"), "{msg}");
        assert!(msg.contains("does not match"), "{msg}");
    }

    #[test]
    fn rejects_i_ge_j_and_duplicates() {
        assert!(parse_spec(
            r#"{"algebra":{"dim":2,"brackets":[{"i":2,"j":1,"coeffs":[0,1]}]},
                "metric":{"matrix":[[1,0],[0,1]]}}"#,
        )
        .is_err());
        assert!(parse_spec(
            r#"{"algebra":{"dim":2,"brackets":[{"i":1,"j":2,"coeffs":[0,1]},
                                                 {"i":1,"j":2,"coeffs":[0,2]}]},
                "metric":{"matrix":[[1,0],[0,1]]}}"#,
        )
        .is_err());
    }

    #[test]
    fn parse_semidirect() {
        let spec = parse_spec(
            r#"{"algebra":{"semidirect":{"k":{"builtin":"abelian:1"},
                                          "rep":[[[0,-1],[1,0]]],"m":2}},
                "metric":{"matrix":[[1,0,0],[0,1,0],[0,0,-1]]}}"#,
        )
        .unwrap();
        assert_eq!(spec.algebra.dim(), 3);
        assert!(spec.semidirect.is_some());
        let e2 = catalog::load_builtin("e2").unwrap().algebra;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    assert_eq!(spec.algebra.c(i, j, k), e2.c(i, j, k));
                }
            }
        }
    }

    #[test]
    fn round_trip_catalog_specs() {
        // Every builtin with every preset survives
        // serialize-then-reparse field by field.
        for name in ["abelian:3", "aff", "heis3", "n4", "so3", "sl2", "e2"] {
            let entry = catalog::load_builtin(name).unwrap();
            for (preset, _) in &entry.presets {
                let text = format!(
                    r#"{{"algebra":{{"builtin":"{name}"}},"metric":{{"preset":"{preset}"}},"params":{{"tmax":5.0,"seed":7}}}}"#
                );
                let spec = parse_spec(&text).unwrap();
                let canonical = spec.to_canonical_json().to_string();
                let respec = parse_spec(&canonical).unwrap();
                assert_eq!(spec.algebra, respec.algebra, "{name}/{preset}");
                assert_eq!(spec.metric, respec.metric, "{name}/{preset}");
                assert_eq!(spec.params, respec.params, "{name}/{preset}");
            }
        }
    }

    #[test]
    fn tgrid_parsing() {
        let spec = parse_spec(
            r#"{"algebra":{"builtin":"aff"},"metric":{"preset":"g1"},
                "params":{"tgrid":"log:0.5,200,33"}}"#,
        )
        .unwrap();
        assert_eq!(spec.params.t_grid, (0.5, 200.0, 33));
        assert!(parse_spec(
            r#"{"algebra":{"builtin":"aff"},"metric":{"preset":"g1"},
                "params":{"tgrid":"lin:1,2,3"}}"#,
        )
        .is_err());
    }
}
