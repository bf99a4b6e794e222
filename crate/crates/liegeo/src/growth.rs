//! Adjoint-representation growth along one-parameter subgroups, idempotent
//! search, structural linear-growth certificates, primary bounds and the
//! completeness verdict.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::algebra::{LieAlgebra, Nilpotency};
use crate::clairaut::linear_fit;
use crate::error::{Error, Result};
use crate::flow::{self, FlowOptions, FlowStatus};
use crate::metric::{metric_adjoint, signature_decompose, MetricForm};

/// Operator norm `lambda_+` of `a` with respect to the positive definite
/// form `g_tilde`: the largest singular value of `L^T A L^-T` for the
/// Cholesky factor `L` of `g_tilde`.
pub fn ad_operator_norm(a: &DMatrix<f64>, g_tilde: &DMatrix<f64>) -> f64 {
    let chol = g_tilde
        .clone()
        .cholesky()
        .expect("g_tilde must be positive definite");
    let lt = chol.l().transpose();
    let lt_inv = lt.clone().try_inverse().expect("triangular factor");
    let reduced = &lt * a * &lt_inv;
    reduced.singular_values().max()
}

/// Smallest singular value `lambda_-` of `a` with respect to `g_tilde`;
/// `1/lambda_-(A)` is the operator norm of `A^-1`.
pub fn lambda_minus(a: &DMatrix<f64>, g_tilde: &DMatrix<f64>) -> f64 {
    let chol = g_tilde
        .clone()
        .cholesky()
        .expect("g_tilde must be positive definite");
    let lt = chol.l().transpose();
    let lt_inv = lt.clone().try_inverse().expect("triangular factor");
    let reduced = &lt * a * &lt_inv;
    reduced
        .singular_values()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Growth class fitted to `t -> |Ad_{exp(ta)}|` samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GrowthClass {
    Bounded,
    Linear,
    Polynomial(u32),
    Exponential { rate: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthFit {
    pub class: GrowthClass,
    /// R^2 of the winning regression.
    pub r_squared: f64,
}

/// Norm samples along one one-parameter subgroup.
#[derive(Debug, Clone)]
pub struct GrowthReport {
    /// Unit direction (with respect to the scan's `g_tilde`).
    pub direction: DVector<f64>,
    /// `(t, |Ad_{exp(ta)}|)` pairs.
    pub samples: Vec<(f64, f64)>,
    /// Grid was cut short because the exponential overflowed.
    pub truncated: bool,
    pub fit: Option<GrowthFit>,
    pub fit_error: Option<String>,
}

/// Log-spaced grid `[t0, t1]` with `n` points.
pub fn log_grid(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    assert!(t0 > 0.0 && t1 > t0 && n >= 2);
    let (l0, l1) = (t0.ln(), t1.ln());
    (0..n)
        .map(|i| (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Samples `|Ad_{exp(ta)}| = |exp(t ad_a)|` (scaling-and-squaring matrix
/// exponential) over a positive increasing grid, after normalizing `a` to
/// unit `g_tilde`-length.
#[allow(clippy::type_complexity)]
pub fn one_param_growth_scan(
    alg: &LieAlgebra,
    a: &DVector<f64>,
    g_tilde: &DMatrix<f64>,
    t_grid: &[f64],
) -> Result<(DVector<f64>, Vec<(f64, f64)>, bool)> {
    let n = alg.dim();
    if a.len() != n || g_tilde.nrows() != n {
        return Err(Error::Dimension {
            expected: n,
            got: a.len(),
        });
    }
    if t_grid.is_empty() || t_grid[0] <= 0.0 || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain(
            "t grid must be positive and increasing".into(),
        ));
    }
    let norm_a = (a.transpose() * g_tilde * a)[(0, 0)].sqrt();
    if norm_a <= 0.0 {
        return Err(Error::Domain("scan direction must be nonzero".into()));
    }
    let unit = a / norm_a;
    let ad = alg.ad_matrix(&unit);
    let mut samples = Vec::with_capacity(t_grid.len());
    let mut truncated = false;
    for &t in t_grid {
        let m = (t * &ad).exp();
        if m.iter().any(|v| !v.is_finite()) {
            truncated = true;
            break;
        }
        let norm = ad_operator_norm(&m, g_tilde);
        if !norm.is_finite() {
            truncated = true;
            break;
        }
        samples.push((t, norm));
    }
    Ok((unit, samples, truncated))
}

/// Fits a growth class on the trailing half of the samples: exponential
/// when the `log norm` vs `t` slope is at least 0.1 with R^2 >= 0.999,
/// otherwise by the rounded log-log slope (`d >= 2` polynomial, `d = 1`
/// linear), with `Bounded` for slope < 0.1 and norm range below 1.5x.
pub fn growth_classify(samples: &[(f64, f64)]) -> Result<GrowthFit> {
    let clean: Vec<(f64, f64)> = samples
        .iter()
        .cloned()
        .filter(|(t, v)| t.is_finite() && v.is_finite() && *t > 0.0 && *v > 0.0)
        .collect();
    if clean.len() < 20 || clean.last().unwrap().0 / clean[0].0 < 100.0 {
        return Err(Error::Numerical(
            "growth fit needs at least 20 samples spanning two decades".into(),
        ));
    }
    let tail = &clean[clean.len() / 2..];
    let ts: Vec<f64> = tail.iter().map(|(t, _)| *t).collect();
    let log_ts: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let log_ns: Vec<f64> = tail.iter().map(|(_, v)| v.ln()).collect();
    let (slope_exp, r2_exp) = linear_fit(&ts, &log_ns);
    let (slope_pow, r2_pow) = linear_fit(&log_ts, &log_ns);
    if slope_exp >= 0.1 && r2_exp >= 0.999 {
        return Ok(GrowthFit {
            class: GrowthClass::Exponential { rate: slope_exp },
            r_squared: r2_exp,
        });
    }
    let d = slope_pow.round();
    if d >= 2.0 {
        return Ok(GrowthFit {
            class: GrowthClass::Polynomial(d as u32),
            r_squared: r2_pow,
        });
    }
    if d == 1.0 {
        return Ok(GrowthFit {
            class: GrowthClass::Linear,
            r_squared: r2_pow,
        });
    }
    let lo = tail.iter().map(|(_, v)| *v).fold(f64::INFINITY, f64::min);
    let hi = tail.iter().map(|(_, v)| *v).fold(0.0, f64::max);
    if slope_pow < 0.1 && hi / lo < 1.5 {
        return Ok(GrowthFit {
            class: GrowthClass::Bounded,
            r_squared: r2_pow,
        });
    }
    Err(Error::Numerical(format!(
        "growth fit ambiguous: log-log slope {slope_pow:.3}, range x{:.3}",
        hi / lo
    )))
}

/// Scan plus classification in one report.
pub fn growth_report(
    alg: &LieAlgebra,
    a: &DVector<f64>,
    g_tilde: &DMatrix<f64>,
    t_grid: &[f64],
) -> Result<GrowthReport> {
    let (direction, samples, truncated) = one_param_growth_scan(alg, a, g_tilde, t_grid)?;
    let (fit, fit_error) = match growth_classify(&samples) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(GrowthReport {
        direction,
        samples,
        truncated,
        fit,
        fit_error,
    })
}

impl GrowthReport {
    pub fn to_json(&self) -> Value {
        let fit = match &self.fit {
            Some(GrowthFit { class, r_squared }) => match class {
                GrowthClass::Bounded => json!({"class": "Bounded", "rSquared": r_squared}),
                GrowthClass::Linear => json!({"class": "Linear", "rSquared": r_squared}),
                GrowthClass::Polynomial(d) => {
                    json!({"class": "Polynomial", "degree": d, "rSquared": r_squared})
                }
                GrowthClass::Exponential { rate } => {
                    json!({"class": "Exponential", "rate": rate, "rSquared": r_squared})
                }
            },
            None => Value::Null,
        };
        json!({
            "direction": self.direction.iter().cloned().collect::<Vec<f64>>(),
            "samples": self.samples.iter().map(|(t, v)| json!([t, v])).collect::<Vec<_>>(),
            "truncated": self.truncated,
            "fit": fit,
            "fitError": self.fit_error,
        })
    }
}

/// Newton search for idempotents `ad_x† x = x` of the Euler-Arnold field.
///
/// Definite metrics return an empty list immediately: any idempotent is a
/// null vector, since `g(x0, x0) = g(x0, [x0, x0]) = 0`. Roots are
/// deduplicated at distance `1e-6` and sorted lexicographically.
pub fn idempotent_search(
    alg: &LieAlgebra,
    g: &MetricForm,
    restarts: usize,
    tol: f64,
    seed: u64,
) -> Vec<DVector<f64>> {
    let n = alg.dim();
    if g.is_definite() {
        return Vec::new();
    }
    // D_i = ad_{e_i}† so that ad_x† = sum_i x_i D_i.
    let d: Vec<DMatrix<f64>> = (0..n)
        .map(|i| metric_adjoint(&alg.ad_basis(i), g))
        .collect();
    let f = |x: &DVector<f64>| -> DVector<f64> {
        let mut adx = DMatrix::zeros(n, n);
        for i in 0..n {
            adx += x[i] * &d[i];
        }
        adx * x - x
    };
    let jac = |x: &DVector<f64>| -> DMatrix<f64> {
        let mut j = DMatrix::zeros(n, n);
        for col in 0..n {
            let mut v = &d[col] * x;
            for i in 0..n {
                v += x[i] * d[i].column(col);
            }
            v[col] -= 1.0;
            j.set_column(col, &v);
        }
        j
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut roots: Vec<DVector<f64>> = Vec::new();
    for _ in 0..restarts {
        let mut x = crate::sample::random_unit(&mut rng, n);
        let mut converged = false;
        for _ in 0..100 {
            let fx = f(&x);
            if fx.norm() <= tol {
                converged = true;
                break;
            }
            let Some(lu_inv) = jac(&x).lu().solve(&fx) else {
                break;
            };
            x -= lu_inv;
            if !x.iter().all(|v| v.is_finite()) || x.norm() > 1e8 {
                break;
            }
        }
        if converged
            && x.norm() > 1e-6
            && f(&x).norm() <= tol
            && !roots.iter().any(|r| (r - &x).norm() <= 1e-6)
        {
            roots.push(x);
        }
    }
    roots.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .find_map(|(x, y)| x.partial_cmp(y).filter(|o| o.is_ne()))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    roots
}

/// Solves `R^T S + S R = 0` (all `R` in `reps`) for symmetric `S` and
/// maximizes the minimum eigenvalue over the unit Frobenius sphere of the
/// solution space by projected gradient ascent with 32 restarts.
///
/// Returns the maximizer rescaled to unit spectral radius when its minimum
/// eigenvalue exceeds `tol`, `None` otherwise.
pub fn invariant_pd_form(
    reps: &[DMatrix<f64>],
    m: usize,
    tol: f64,
    seed: u64,
) -> Option<DMatrix<f64>> {
    // Orthonormal basis of symmetric matrices under the Frobenius product.
    let mut basis: Vec<DMatrix<f64>> = Vec::new();
    for i in 0..m {
        for j in i..m {
            let mut b = DMatrix::zeros(m, m);
            if i == j {
                b[(i, i)] = 1.0;
            } else {
                let v = 1.0 / 2.0f64.sqrt();
                b[(i, j)] = v;
                b[(j, i)] = v;
            }
            basis.push(b);
        }
    }
    let k = basis.len();

    // Nullspace of the stacked constraints in basis coordinates.
    let directions: Vec<DMatrix<f64>> = if reps.is_empty() {
        basis.clone()
    } else {
        let rows = reps.len() * m * m;
        let mut cmat = DMatrix::zeros(rows, k);
        for (ri, r) in reps.iter().enumerate() {
            assert_eq!(r.nrows(), m, "representation matrix size");
            for (bi, b) in basis.iter().enumerate() {
                let c = r.transpose() * b + b * r;
                for a in 0..m {
                    for bb in 0..m {
                        cmat[(ri * m * m + a * m + bb, bi)] = c[(a, bb)];
                    }
                }
            }
        }
        let svd = cmat.svd(false, true);
        let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
        let v_t = svd.v_t.expect("svd with v^t");
        let mut null_dirs = Vec::new();
        for row in 0..v_t.nrows() {
            let sv = if row < svd.singular_values.len() {
                svd.singular_values[row]
            } else {
                0.0
            };
            if smax == 0.0 || sv <= 1e-10 * smax.max(1.0) {
                let coeffs = v_t.row(row);
                let mut dir = DMatrix::zeros(m, m);
                for (bi, b) in basis.iter().enumerate() {
                    dir += coeffs[bi] * b;
                }
                null_dirs.push(dir);
            }
        }
        // v_t has min(rows, k) rows; coefficients beyond the stored rows
        // span nothing extra only when rows >= k, which holds here.
        null_dirs
    };
    if directions.is_empty() {
        return None;
    }

    let lam_min = |s: &DMatrix<f64>| -> (f64, DVector<f64>) {
        let eig = s.clone().symmetric_eigen();
        let mut idx = 0;
        for i in 1..eig.eigenvalues.len() {
            if eig.eigenvalues[i] < eig.eigenvalues[idx] {
                idx = i;
            }
        }
        (
            eig.eigenvalues[idx],
            eig.eigenvectors.column(idx).into_owned(),
        )
    };
    let assemble = |c: &DVector<f64>| -> DMatrix<f64> {
        let mut s = DMatrix::zeros(m, m);
        for (i, dir) in directions.iter().enumerate() {
            s += c[i] * dir;
        }
        s
    };

    let kd = directions.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, DMatrix<f64>)> = None;
    for _ in 0..32 {
        let mut c = crate::sample::random_unit(&mut rng, kd);
        let mut s = assemble(&c);
        let (mut val, mut vmin) = lam_min(&s);
        let mut eta = 0.5;
        for _ in 0..300 {
            // Gradient of lambda_min in coefficient space.
            let grad = DVector::from_fn(kd, |i, _| {
                (vmin.transpose() * &directions[i] * &vmin)[(0, 0)]
            });
            let mut stepped = false;
            for _ in 0..20 {
                let cand = {
                    let raw = &c + eta * &grad;
                    let norm = raw.norm();
                    if norm <= 1e-12 {
                        break;
                    }
                    raw / norm
                };
                let s_cand = assemble(&cand);
                let (v_cand, vec_cand) = lam_min(&s_cand);
                if v_cand > val + 1e-15 {
                    c = cand;
                    s = s_cand;
                    val = v_cand;
                    vmin = vec_cand;
                    stepped = true;
                    break;
                }
                eta *= 0.5;
            }
            if !stepped || eta < 1e-12 {
                break;
            }
        }
        if best.as_ref().is_none_or(|(b, _)| val > *b) {
            best = Some((val, s));
        }
    }

    let (val, s) = best?;
    if val <= tol {
        return None;
    }
    let spectral = s.clone().symmetric_eigen().eigenvalues.amax();
    Some(s / spectral)
}

/// Families of primarily complete bounding functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundFamily {
    /// `phi(r) = a + b r`.
    Affine { a: f64, b: f64 },
    /// `phi(r) = r log r` for large `r`.
    RLogR,
    /// `phi(r) = r^q`.
    Power { q: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum PrimaryBound {
    PrimarilyComplete,
    NotPrimarilyComplete,
}

/// Divergence of `int^inf dr / phi(r)`, decided analytically per family.
pub fn primary_bound_check(family: &BoundFamily) -> Result<PrimaryBound> {
    match family {
        BoundFamily::Affine { a, b } => {
            if *a < 0.0 || *b < 0.0 || a + b <= 0.0 {
                return Err(Error::Domain(
                    "affine bound needs a, b >= 0, a + b > 0".into(),
                ));
            }
            Ok(PrimaryBound::PrimarilyComplete)
        }
        BoundFamily::RLogR => Ok(PrimaryBound::PrimarilyComplete),
        BoundFamily::Power { q } => {
            if *q <= 1.0 {
                Ok(PrimaryBound::PrimarilyComplete)
            } else {
                Ok(PrimaryBound::NotPrimarilyComplete)
            }
        }
    }
}

/// Declared semidirect decomposition `k ⋉ ℝ^m` of the input algebra.
#[derive(Debug, Clone)]
pub struct SemidirectDecl {
    pub k: LieAlgebra,
    pub rep: Vec<DMatrix<f64>>,
    pub m: usize,
}

#[derive(Debug, Clone)]
pub struct VerdictOptions {
    pub semidirect: Option<SemidirectDecl>,
    /// Random geodesic probes (each fired from ±x0) used by the numerical
    /// incompleteness rule.
    pub probe_budget: usize,
    pub probe_t_max: f64,
    pub seed: u64,
    pub restarts: usize,
    pub tol: f64,
}

impl Default for VerdictOptions {
    fn default() -> Self {
        VerdictOptions {
            semidirect: None,
            probe_budget: 16,
            probe_t_max: 10.0,
            seed: 0,
            restarts: 64,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictKind {
    CompleteCertified,
    IncompleteCertified,
    NumericallyIncomplete,
    Undetermined,
}

impl VerdictKind {
    pub fn tag(&self) -> &'static str {
        match self {
            VerdictKind::CompleteCertified => "CompleteCertified",
            VerdictKind::IncompleteCertified => "IncompleteCertified",
            VerdictKind::NumericallyIncomplete => "NumericallyIncomplete",
            VerdictKind::Undetermined => "Undetermined",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certificate {
    Definite,
    BiInvariant,
    Abelian,
    TwoStepNilpotent,
    CompactType,
    PseudoCompactSemidirect,
}

impl Certificate {
    pub fn tag(&self) -> &'static str {
        match self {
            Certificate::Definite => "definite",
            Certificate::BiInvariant => "bi-invariant",
            Certificate::Abelian => "abelian",
            Certificate::TwoStepNilpotent => "2-step-nilpotent",
            Certificate::CompactType => "compact-type",
            Certificate::PseudoCompactSemidirect => "pseudo-compact-semidirect",
        }
    }
}

#[derive(Debug, Clone)]
pub enum Witness {
    Idempotent(DVector<f64>),
    BlowupProbe {
        x0: DVector<f64>,
        t_low: f64,
        t_high: f64,
    },
}

#[derive(Debug, Clone)]
pub struct ProbeRecord {
    pub x0: DVector<f64>,
    pub status: String,
    pub bracket: Option<(f64, f64)>,
}

/// Completeness verdict with a certificate or a witness, plus the growth
/// reports and probe records gathered on the way.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub certificate: Option<Certificate>,
    pub witness: Option<Witness>,
    pub growth_reports: Vec<GrowthReport>,
    pub probes: Vec<ProbeRecord>,
}

impl Verdict {
    fn certified(c: Certificate) -> Self {
        Verdict {
            kind: VerdictKind::CompleteCertified,
            certificate: Some(c),
            witness: None,
            growth_reports: Vec::new(),
            probes: Vec::new(),
        }
    }

    pub fn to_json(&self) -> Value {
        let witness = match &self.witness {
            Some(Witness::Idempotent(x)) => json!({
                "type": "idempotent",
                "x0": x.iter().cloned().collect::<Vec<f64>>(),
            }),
            Some(Witness::BlowupProbe { x0, t_low, t_high }) => json!({
                "type": "blowup-probe",
                "x0": x0.iter().cloned().collect::<Vec<f64>>(),
                "tLow": t_low,
                "tHigh": t_high,
            }),
            None => Value::Null,
        };
        json!({
            "verdict": self.kind.tag(),
            "certificate": self.certificate.map(|c| c.tag()),
            "witness": witness,
            "growthReports": self.growth_reports.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
            "probes": self.probes.iter().map(|p| json!({
                "x0": p.x0.iter().cloned().collect::<Vec<f64>>(),
                "status": p.status,
                "bracket": p.bracket.map(|(lo, hi)| json!([lo, hi])),
            })).collect::<Vec<_>>(),
        })
    }
}

/// All basis `ad` maps skew-adjoint with respect to `g`.
pub fn is_bi_invariant(alg: &LieAlgebra, g: &MetricForm, tol: f64) -> bool {
    let n = alg.dim();
    let gm = g.matrix();
    let scale = gm.amax() * alg.c_scale().max(1.0);
    for i in 0..n {
        let ad = alg.ad_basis(i);
        let defect = ad.transpose() * gm + gm * ad;
        if defect.amax() > tol * scale.max(1.0) {
            return false;
        }
    }
    true
}

/// Killing form negative definite within tolerance.
pub fn killing_negative_definite(alg: &LieAlgebra, tol: f64) -> bool {
    let k = alg.killing_form();
    let scale = k.amax();
    if scale == 0.0 {
        return false;
    }
    k.symmetric_eigen()
        .eigenvalues
        .iter()
        .all(|&l| l < -tol * scale)
}

/// Algebra-level pseudo-compactness: the algebra splits as
/// `center ⊕ [g, g]` with the Killing form negative definite on the
/// derived part (compact-type), covering products of abelian and
/// compact-type algebras.
pub fn is_pseudo_compact_algebra(alg: &LieAlgebra, tol: f64) -> bool {
    let n = alg.dim();
    if alg.is_abelian(tol) {
        return true;
    }
    // Center: kernel of a -> ad_a.
    let mut stacked = DMatrix::zeros(n * n, n);
    for i in 0..n {
        let ad = alg.ad_basis(i);
        for r in 0..n {
            for c in 0..n {
                stacked[(r * n + c, i)] = ad[(r, c)];
            }
        }
    }
    let svd = stacked.svd(false, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let v_t = svd.v_t.expect("svd with v^t");
    let mut center_cols: Vec<DVector<f64>> = Vec::new();
    for row in 0..n {
        let sv = if row < svd.singular_values.len() {
            svd.singular_values[row]
        } else {
            0.0
        };
        if sv <= 1e-9 * smax.max(1.0) {
            center_cols.push(v_t.row(row).transpose());
        }
    }
    // Derived subalgebra: span of all brackets.
    let mut bracket_cols: Vec<DVector<f64>> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            bracket_cols.push(DVector::from_fn(n, |k, _| alg.c(i, j, k)));
        }
    }
    let derived = DMatrix::from_columns(&bracket_cols);
    let dsvd = derived.clone().svd(true, false);
    let dmax = dsvd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let mut derived_basis: Vec<DVector<f64>> = Vec::new();
    if dmax > 0.0 {
        let u = dsvd.u.expect("svd with u");
        for i in 0..dsvd.singular_values.len() {
            if dsvd.singular_values[i] > 1e-9 * dmax {
                derived_basis.push(u.column(i).into_owned());
            }
        }
    }
    if center_cols.len() + derived_basis.len() != n {
        return false;
    }
    // Direct sum: the combined system must have full rank.
    let mut all = center_cols.clone();
    all.extend(derived_basis.iter().cloned());
    let combined = DMatrix::from_columns(&all);
    if combined.svd(false, false).rank(1e-9) != n {
        return false;
    }
    if derived_basis.is_empty() {
        return true;
    }
    // Killing form restricted to the derived part must be negative definite.
    let d = DMatrix::from_columns(&derived_basis);
    let k_restricted = d.transpose() * alg.killing_form() * &d;
    let scale = k_restricted.amax().max(1.0);
    k_restricted
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .all(|&l| l < -1e-10 * scale)
}

fn semidirect_certificate(alg: &LieAlgebra, decl: &SemidirectDecl, tol: f64, seed: u64) -> bool {
    // The declaration must actually reconstruct the input algebra.
    let Ok(rebuilt) = crate::algebra::semidirect_product(&decl.k, &decl.rep, decl.m) else {
        return false;
    };
    if rebuilt.dim() != alg.dim() {
        return false;
    }
    let n = alg.dim();
    let scale = alg.c_scale().max(1.0);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if (rebuilt.c(i, j, k) - alg.c(i, j, k)).abs() > 1e-12 * scale {
                    return false;
                }
            }
        }
    }
    if !is_pseudo_compact_algebra(&decl.k, tol) {
        return false;
    }
    invariant_pd_form(&decl.rep, decl.m, 1e-9, seed).is_some()
}

/// Decision ladder for completeness, first match wins: bi-invariant,
/// definite, abelian, 2-step nilpotent, compact-type, declared
/// pseudo-compact semidirect, idempotent witness, blowup probes,
/// undetermined (with growth reports attached).
pub fn completeness_verdict(
    alg: &LieAlgebra,
    g: &MetricForm,
    opts: &VerdictOptions,
) -> Result<Verdict> {
    let n = alg.dim();
    if g.dim() != n {
        return Err(Error::Dimension {
            expected: n,
            got: g.dim(),
        });
    }

    // Bi-invariant metrics are complete regardless of signature; checked
    // ahead of definiteness so the stronger certificate wins.
    if is_bi_invariant(alg, g, 1e-10) {
        return Ok(Verdict::certified(Certificate::BiInvariant));
    }
    if g.is_definite() {
        return Ok(Verdict::certified(Certificate::Definite));
    }
    if alg.is_abelian(1e-12 * alg.c_scale().max(1.0)) {
        return Ok(Verdict::certified(Certificate::Abelian));
    }
    if let Nilpotency::Step(m) = alg.nilpotency_step(1e-12).class {
        if m <= 2 {
            return Ok(Verdict::certified(Certificate::TwoStepNilpotent));
        }
    }
    if killing_negative_definite(alg, 1e-10) {
        return Ok(Verdict::certified(Certificate::CompactType));
    }
    if let Some(decl) = &opts.semidirect {
        if semidirect_certificate(alg, decl, 1e-10, opts.seed) {
            return Ok(Verdict::certified(Certificate::PseudoCompactSemidirect));
        }
    }

    let idempotents = idempotent_search(alg, g, opts.restarts, opts.tol, opts.seed);
    if let Some(x0) = idempotents.into_iter().next() {
        return Ok(Verdict {
            kind: VerdictKind::IncompleteCertified,
            certificate: None,
            witness: Some(Witness::Idempotent(x0)),
            growth_reports: Vec::new(),
            probes: Vec::new(),
        });
    }

    // Probe ensemble: random unit starts, fired forward from +x0 and -x0
    // (the latter covers the backward geodesic).
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(1));
    let mut probes = Vec::new();
    let flow_opts = FlowOptions {
        store_stride: 64,
        ..FlowOptions::default()
    };
    let mut blowup: Option<Witness> = None;
    'outer: for _ in 0..opts.probe_budget {
        let x0 = crate::sample::random_unit(&mut rng, n);
        for sign in [1.0, -1.0] {
            let start = sign * &x0;
            let traj = flow::integrate_geodesic(alg, g, &start, opts.probe_t_max, &flow_opts)?;
            let (status, bracket) = match traj.status {
                FlowStatus::Completed(_) => ("Completed".to_string(), None),
                FlowStatus::Blowup { t_low, t_high } => {
                    ("Blowup".to_string(), Some((t_low, t_high)))
                }
                FlowStatus::ToleranceFailure(t) => (format!("ToleranceFailure at {t:.6}"), None),
            };
            probes.push(ProbeRecord {
                x0: start.clone(),
                status,
                bracket,
            });
            if let Some((t_low, t_high)) = bracket {
                blowup = Some(Witness::BlowupProbe {
                    x0: start,
                    t_low,
                    t_high,
                });
                break 'outer;
            }
        }
    }
    if let Some(w) = blowup {
        return Ok(Verdict {
            kind: VerdictKind::NumericallyIncomplete,
            certificate: None,
            witness: Some(w),
            growth_reports: Vec::new(),
            probes,
        });
    }

    // Undetermined: attach growth scans along the basis directions and a
    // few random ones.
    let g_tilde = signature_decompose(g, 1e-12)?.g_tilde;
    let grid = log_grid(0.1, 1e3, 40);
    let mut growth_reports = Vec::new();
    for i in 0..n {
        let mut e = DVector::zeros(n);
        e[i] = 1.0;
        growth_reports.push(growth_report(alg, &e, &g_tilde, &grid)?);
    }
    for _ in 0..4 {
        let a = crate::sample::random_unit(&mut rng, n);
        growth_reports.push(growth_report(alg, &a, &g_tilde, &grid)?);
    }
    Ok(Verdict {
        kind: VerdictKind::Undetermined,
        certificate: None,
        witness: None,
        growth_reports,
        probes,
    })
}
