//! Built-in algebras, metric presets, the affine-group chart adapter and
//! its closed-form references used as regression oracles.

use nalgebra::{DMatrix, DVector};

use crate::algebra::{semidirect_product, LieAlgebra};
use crate::clairaut::{AnalyticCurve, Chart, Curve};
use crate::error::{Error, Result};
use crate::metric::MetricForm;

/// A built-in algebra with its named metric presets and, for the affine
/// group, the chart adapter.
pub struct BuiltinEntry {
    pub name: String,
    pub algebra: LieAlgebra,
    pub presets: Vec<(String, MetricForm)>,
    pub chart: Option<AffChart>,
}

impl BuiltinEntry {
    pub fn preset(&self, name: &str) -> Option<&MetricForm> {
        self.presets.iter().find(|(n, _)| n == name).map(|(_, m)| m)
    }
}

const BUILTIN_NAMES: &str = "abelian:n, aff, heis3, n4, so3, sl2, e2";

/// Loads a built-in algebra by name. `abelian:n` takes the dimension after
/// the colon.
pub fn load_builtin(name: &str) -> Result<BuiltinEntry> {
    let unknown = || Error::UnknownBuiltin {
        name: name.into(),
        available: BUILTIN_NAMES.into(),
    };
    if let Some(dim) = name.strip_prefix("abelian:") {
        let n: usize = dim.parse().map_err(|_| unknown())?;
        if n == 0 || n > 64 {
            return Err(Error::Domain(format!("abelian dimension {n} out of range")));
        }
        let algebra = LieAlgebra::abelian(n);
        let presets = vec![("euclid".to_string(), MetricForm::identity(n))];
        return Ok(BuiltinEntry {
            name: name.into(),
            algebra,
            presets,
            chart: None,
        });
    }
    match name {
        "aff" => {
            let algebra = LieAlgebra::from_bracket_table(2, &[(0, 1, vec![0.0, 1.0])])?;
            let presets = vec![
                ("g1".to_string(), MetricForm::from_diagonal(&[1.0, 1.0])?),
                ("g-1".to_string(), MetricForm::from_diagonal(&[1.0, -1.0])?),
                (
                    "g0".to_string(),
                    MetricForm::new(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]))?,
                ),
            ];
            Ok(BuiltinEntry {
                name: name.into(),
                algebra,
                presets,
                chart: Some(AffChart),
            })
        }
        "heis3" => {
            let algebra = LieAlgebra::from_bracket_table(3, &[(0, 1, vec![0.0, 0.0, 1.0])])?;
            let presets = vec![
                ("euclid".to_string(), MetricForm::identity(3)),
                (
                    "lorentz".to_string(),
                    MetricForm::from_diagonal(&[1.0, 1.0, -1.0])?,
                ),
            ];
            Ok(BuiltinEntry {
                name: name.into(),
                algebra,
                presets,
                chart: None,
            })
        }
        "n4" => {
            // Filiform: [e1,e2] = e3, [e1,e3] = e4.
            let algebra = LieAlgebra::from_bracket_table(
                4,
                &[
                    (0, 1, vec![0.0, 0.0, 1.0, 0.0]),
                    (0, 2, vec![0.0, 0.0, 0.0, 1.0]),
                ],
            )?;
            let presets = vec![
                ("euclid".to_string(), MetricForm::identity(4)),
                (
                    "lorentz".to_string(),
                    MetricForm::from_diagonal(&[1.0, 1.0, 1.0, -1.0])?,
                ),
            ];
            Ok(BuiltinEntry {
                name: name.into(),
                algebra,
                presets,
                chart: None,
            })
        }
        "so3" => {
            // Cyclic brackets [e1,e2] = e3, [e2,e3] = e1, [e3,e1] = e2.
            let algebra = LieAlgebra::from_bracket_table(
                3,
                &[
                    (0, 1, vec![0.0, 0.0, 1.0]),
                    (1, 2, vec![1.0, 0.0, 0.0]),
                    (0, 2, vec![0.0, -1.0, 0.0]),
                ],
            )?;
            let presets = vec![
                ("euclid".to_string(), MetricForm::identity(3)),
                (
                    "minus-killing".to_string(),
                    MetricForm::from_diagonal(&[2.0, 2.0, 2.0])?,
                ),
                (
                    "rigid-body".to_string(),
                    MetricForm::from_diagonal(&[1.0, 2.0, 3.0])?,
                ),
                (
                    "lorentz".to_string(),
                    MetricForm::from_diagonal(&[1.0, 1.0, -1.0])?,
                ),
            ];
            Ok(BuiltinEntry {
                name: name.into(),
                algebra,
                presets,
                chart: None,
            })
        }
        "sl2" => {
            // Basis (e, f, h): [e,f] = h, [h,e] = 2e, [h,f] = -2f.
            let algebra = LieAlgebra::from_bracket_table(
                3,
                &[
                    (0, 1, vec![0.0, 0.0, 1.0]),
                    (0, 2, vec![-2.0, 0.0, 0.0]),
                    (1, 2, vec![0.0, 2.0, 0.0]),
                ],
            )?;
            let presets = vec![
                ("euclid".to_string(), MetricForm::identity(3)),
                (
                    "killing".to_string(),
                    MetricForm::new(algebra.killing_form())?,
                ),
            ];
            Ok(BuiltinEntry {
                name: name.into(),
                algebra,
                presets,
                chart: None,
            })
        }
        "e2" => {
            let so2 = LieAlgebra::abelian(1);
            let rot = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
            let algebra = semidirect_product(&so2, &[rot], 2)?;
            let presets = vec![
                ("euclid".to_string(), MetricForm::identity(3)),
                (
                    "lorentz".to_string(),
                    MetricForm::from_diagonal(&[1.0, 1.0, -1.0])?,
                ),
            ];
            Ok(BuiltinEntry {
                name: name.into(),
                algebra,
                presets,
                chart: None,
            })
        }
        _ => Err(unknown()),
    }
}

/// Derived representation of e(2) = so(2) ⋉ ℝ²: the rotation generator.
pub fn e2_semidirect_data() -> (LieAlgebra, Vec<DMatrix<f64>>, usize) {
    (
        LieAlgebra::abelian(1),
        vec![DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])],
        2,
    )
}

/// Global chart `(x, y)`, `x > 0`, of the orientation-preserving affine
/// group of the line, with `[e1, e2] = e2`.
pub struct AffChart;

impl AffChart {
    fn check(&self, p: &DVector<f64>) -> Result<(f64, f64)> {
        if p.len() != 2 {
            return Err(Error::Dimension {
                expected: 2,
                got: p.len(),
            });
        }
        let (x, y) = (p[0], p[1]);
        if x <= 0.0 || x.is_nan() {
            return Err(Error::Domain(format!("chart requires x > 0, got {x}")));
        }
        Ok((x, y))
    }
}

impl Chart for AffChart {
    fn dim(&self) -> usize {
        2
    }

    /// `Ad_{p^-1} = [[1, 0], [y/x, 1/x]]` for `p = (x, y)`.
    fn ad_inv(&self, p: &DVector<f64>) -> Result<DMatrix<f64>> {
        let (x, y) = self.check(p)?;
        Ok(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, y / x, 1.0 / x]))
    }

    /// Left-invariant frame `p.e1 = x d/dx`, `p.e2 = x d/dy`.
    fn frame(&self, p: &DVector<f64>) -> Result<DMatrix<f64>> {
        let (x, _) = self.check(p)?;
        Ok(DMatrix::from_diagonal(&DVector::from_vec(vec![x, x])))
    }
}

/// Closed forms of the affine-group Clairaut metric `h^(eps)` in the
/// chart frame at `(x, y)`.
#[derive(Debug, Clone)]
pub struct AffReference {
    /// Coordinate-frame matrix `(1/x^4) [[x^2, eps x y], [eps x y, 1 + y^2]]`.
    pub h_coord: DMatrix<f64>,
    /// `eps^2 / x^6`.
    pub det: f64,
    /// Closed-form eigenvalues (min, max) of `h_coord`.
    pub evl: (f64, f64),
}

/// Reference evaluation for `eps = ±1` at `x > 0`.
pub fn aff_reference(x: f64, y: f64, eps: f64) -> Result<AffReference> {
    if x <= 0.0 || x.is_nan() {
        return Err(Error::Domain(format!(
            "aff_reference requires x > 0, got {x}"
        )));
    }
    if eps != 1.0 && eps != -1.0 {
        return Err(Error::Domain(format!("eps must be ±1, got {eps}")));
    }
    let x4 = x.powi(4);
    let h_coord = DMatrix::from_row_slice(
        2,
        2,
        &[
            x * x / x4,
            eps * x * y / x4,
            eps * x * y / x4,
            (1.0 + y * y) / x4,
        ],
    );
    let det = (eps * eps) / x.powi(6);
    let s = x * x + eps * eps * (1.0 + y * y);
    let disc = (s * s - 4.0 * eps * eps * x * x).max(0.0).sqrt();
    let evl = ((s - disc) / (2.0 * x4), (s + disc) / (2.0 * x4));
    Ok(AffReference { h_coord, det, evl })
}

/// A named witness curve with analytic tangents.
pub struct NamedCurve {
    pub name: &'static str,
    pub curve: Box<dyn Curve>,
    /// Natural parameter domain (end may be the suggested truncation of an
    /// infinite ray).
    pub domain: (f64, f64),
}

/// The witness curves of the affine-group example: the incomplete
/// geodesics of `g^(-1)` and `g^(0)`, the finite-length diverging curve of
/// `h^(-1)` and the finite-length ray of `h^(0)`.
pub fn aff_witness_curves() -> Vec<NamedCurve> {
    vec![
        NamedCurve {
            name: "g-1-incomplete-geodesic",
            curve: Box::new(AnalyticCurve {
                f: |t: f64| {
                    let f = 1.0 / (1.0 - t);
                    (
                        DVector::from_vec(vec![f, f]),
                        DVector::from_vec(vec![f * f, f * f]),
                    )
                },
            }),
            domain: (0.0, 0.999),
        },
        NamedCurve {
            name: "h-1-finite-length",
            curve: Box::new(AnalyticCurve {
                f: |t: f64| {
                    (
                        DVector::from_vec(vec![t.cosh(), t.sinh()]),
                        DVector::from_vec(vec![t.sinh(), t.cosh()]),
                    )
                },
            }),
            domain: (0.0, 40.0),
        },
        NamedCurve {
            name: "h0-finite-ray",
            curve: Box::new(AnalyticCurve {
                f: |t: f64| {
                    (
                        DVector::from_vec(vec![t, 0.0]),
                        DVector::from_vec(vec![1.0, 0.0]),
                    )
                },
            }),
            domain: (1.0, 1e6),
        },
        NamedCurve {
            name: "g0-incomplete-geodesic",
            curve: Box::new(AnalyticCurve {
                f: |t: f64| {
                    let f = 1.0 / (1.0 - t);
                    (
                        DVector::from_vec(vec![f, 0.0]),
                        DVector::from_vec(vec![f * f, 0.0]),
                    )
                },
            }),
            domain: (0.0, 0.999),
        },
    ]
}
