//! Clairaut metric fields: evaluation at group points (through their
//! adjoint matrices), spectra relative to the Wick rotated Riemannian
//! form, curve lengths, and bi-Lipschitz probes between fields.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::metric::{MetricForm, WickFrame};

/// Clairaut form at the point with adjoint matrix `a_inv = Ad_{p^-1}`,
/// expressed in the body frame, built from a `g`-orthonormal (Wick) basis.
///
/// With `M*` the `g_tilde`-adjoint, this is the symmetric matrix of
/// `(u, v) -> g_tilde(Ainv* psi u, Ainv* psi v)`; always positive definite.
pub fn clairaut_form_at(
    a_inv: &DMatrix<f64>,
    g: &MetricForm,
    w: &WickFrame,
) -> Result<DMatrix<f64>> {
    let n = g.dim();
    if a_inv.nrows() != n || a_inv.ncols() != n {
        return Err(Error::Dimension {
            expected: n,
            got: a_inv.nrows(),
        });
    }
    if a_inv.determinant().abs() == 0.0 {
        return Err(Error::Singular("adjoint matrix".into()));
    }
    let gt_inv = w
        .g_tilde
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("g_tilde".into()))?;
    // psi^T g_tilde = G, so the expression collapses to
    // G Ainv g_tilde^-1 Ainv^T G; kept in the adjoint form for clarity.
    let a_star = &gt_inv * a_inv.transpose() * &w.g_tilde;
    let m = &a_star * &w.psi;
    let h = m.transpose() * &w.g_tilde * &m;
    Ok(0.5 * (&h + h.transpose()))
}

/// Clairaut form in the body frame built from an arbitrary basis: columns
/// of `basis` are the basis vectors `e_i` entering `sum_i w^i (x) w^i`.
///
/// Equals `(G Ainv E)(G Ainv E)^T`; with the Wick orthonormal basis this
/// coincides with [`clairaut_form_at`].
pub fn clairaut_form_from_basis(
    a_inv: &DMatrix<f64>,
    g: &MetricForm,
    basis: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let n = g.dim();
    if a_inv.nrows() != n || basis.nrows() != n {
        return Err(Error::Dimension {
            expected: n,
            got: a_inv.nrows(),
        });
    }
    let m = g.matrix() * a_inv * basis;
    Ok(&m * m.transpose())
}

/// Smallest and largest generalized eigenvalues of the pencil
/// `(h, g_tilde)` with `g_tilde` positive definite.
///
/// For a Clairaut field these are `lambda_-(p^-1)^2` and
/// `lambda_+(p^-1)^2`.
pub fn clairaut_spectrum(h: &DMatrix<f64>, g_tilde: &DMatrix<f64>) -> Result<(f64, f64)> {
    let n = h.nrows();
    if g_tilde.nrows() != n || h.ncols() != n {
        return Err(Error::Dimension {
            expected: n,
            got: g_tilde.nrows(),
        });
    }
    let chol = g_tilde
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Degenerate("g_tilde is not positive definite".into()))?;
    let l_inv = chol
        .l()
        .try_inverse()
        .ok_or_else(|| Error::Singular("cholesky factor".into()))?;
    let reduced = &l_inv * h * l_inv.transpose();
    let sym = 0.5 * (&reduced + reduced.transpose());
    let ev = sym.symmetric_eigen().eigenvalues;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &l in ev.iter() {
        lo = lo.min(l);
        hi = hi.max(l);
    }
    Ok((lo, hi))
}

/// A Riemannian metric field evaluated at chart points.
pub trait MetricField: Sync {
    /// Dimension of the chart points and of the returned forms.
    fn dim(&self) -> usize;
    /// Symmetric positive definite form at the given chart point, in the
    /// chart's coordinate frame.
    fn form_at(&self, point: &DVector<f64>) -> Result<DMatrix<f64>>;
}

/// Chart adapter: maps chart points to adjoint matrices and to the frame
/// matrix expressing the left-invariant frame in chart coordinates.
pub trait Chart: Sync {
    fn dim(&self) -> usize;
    /// `Ad_{p^-1}` at the chart point.
    fn ad_inv(&self, point: &DVector<f64>) -> Result<DMatrix<f64>>;
    /// Columns are the left-invariant frame vectors `p.e_i` in chart
    /// coordinates.
    fn frame(&self, point: &DVector<f64>) -> Result<DMatrix<f64>>;
}

/// Clairaut field of `(g, chart)` in chart coordinates, built from the
/// Wick orthonormal basis (or from an explicit basis when `basis` is set).
pub struct ClairautField<'a> {
    chart: &'a dyn Chart,
    g: &'a MetricForm,
    wick: WickFrame,
    basis: Option<DMatrix<f64>>,
}

impl<'a> ClairautField<'a> {
    pub fn new(chart: &'a dyn Chart, g: &'a MetricForm, wick: WickFrame) -> Self {
        ClairautField {
            chart,
            g,
            wick,
            basis: None,
        }
    }

    /// Same field but built from the basis with the given column vectors.
    pub fn with_basis(
        chart: &'a dyn Chart,
        g: &'a MetricForm,
        wick: WickFrame,
        basis: DMatrix<f64>,
    ) -> Self {
        ClairautField {
            chart,
            g,
            wick,
            basis: Some(basis),
        }
    }

    /// Body-frame form at a chart point.
    pub fn body_form_at(&self, point: &DVector<f64>) -> Result<DMatrix<f64>> {
        let a_inv = self.chart.ad_inv(point)?;
        match &self.basis {
            Some(e) => clairaut_form_from_basis(&a_inv, self.g, e),
            None => clairaut_form_at(&a_inv, self.g, &self.wick),
        }
    }

    pub fn wick(&self) -> &WickFrame {
        &self.wick
    }
}

impl MetricField for ClairautField<'_> {
    fn dim(&self) -> usize {
        self.g.dim()
    }

    fn form_at(&self, point: &DVector<f64>) -> Result<DMatrix<f64>> {
        let body = self.body_form_at(point)?;
        let f = self.chart.frame(point)?;
        let f_inv = f
            .try_inverse()
            .ok_or_else(|| Error::Singular("chart frame".into()))?;
        Ok(f_inv.transpose() * body * f_inv)
    }
}

/// Field given by a closed-form matrix function, mostly for references
/// and tests.
pub struct ClosedFormField<F>
where
    F: Fn(&DVector<f64>) -> Result<DMatrix<f64>> + Sync,
{
    pub dim: usize,
    pub f: F,
}

impl<F> MetricField for ClosedFormField<F>
where
    F: Fn(&DVector<f64>) -> Result<DMatrix<f64>> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn form_at(&self, point: &DVector<f64>) -> Result<DMatrix<f64>> {
        (self.f)(point)
    }
}

/// A parameterized curve with tangents.
pub trait Curve: Sync {
    /// Point and tangent at parameter `t`.
    fn eval(&self, t: f64) -> (DVector<f64>, DVector<f64>);
}

/// Curve given by closures.
pub struct AnalyticCurve<F>
where
    F: Fn(f64) -> (DVector<f64>, DVector<f64>) + Sync,
{
    pub f: F,
}

impl<F> Curve for AnalyticCurve<F>
where
    F: Fn(f64) -> (DVector<f64>, DVector<f64>) + Sync,
{
    fn eval(&self, t: f64) -> (DVector<f64>, DVector<f64>) {
        (self.f)(t)
    }
}

/// Piecewise-linear curve through samples; tangents are supplied or
/// finite-differenced.
pub struct SampledCurve {
    params: Vec<f64>,
    points: Vec<DVector<f64>>,
    tangents: Vec<DVector<f64>>,
}

impl SampledCurve {
    pub fn new(
        params: Vec<f64>,
        points: Vec<DVector<f64>>,
        tangents: Option<Vec<DVector<f64>>>,
    ) -> Result<Self> {
        if params.len() < 2 || params.len() != points.len() {
            return Err(Error::Domain("need at least two curve samples".into()));
        }
        if params.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain(
                "curve parameters must be strictly increasing".into(),
            ));
        }
        let tangents = match tangents {
            Some(t) => {
                if t.len() != params.len() {
                    return Err(Error::Dimension {
                        expected: params.len(),
                        got: t.len(),
                    });
                }
                t
            }
            None => {
                // Central differences inside, one-sided at the ends.
                let m = params.len();
                (0..m)
                    .map(|i| {
                        let (lo, hi) = match i {
                            0 => (0, 1),
                            _ if i == m - 1 => (m - 2, m - 1),
                            _ => (i - 1, i + 1),
                        };
                        (&points[hi] - &points[lo]) / (params[hi] - params[lo])
                    })
                    .collect()
            }
        };
        Ok(SampledCurve {
            params,
            points,
            tangents,
        })
    }

    pub fn param_range(&self) -> (f64, f64) {
        (self.params[0], *self.params.last().unwrap())
    }
}

impl Curve for SampledCurve {
    fn eval(&self, t: f64) -> (DVector<f64>, DVector<f64>) {
        let idx = match self.params.binary_search_by(|p| p.partial_cmp(&t).unwrap()) {
            Ok(i) => return (self.points[i].clone(), self.tangents[i].clone()),
            Err(i) => i.clamp(1, self.params.len() - 1),
        };
        let (t0, t1) = (self.params[idx - 1], self.params[idx]);
        let s = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        let p = (1.0 - s) * &self.points[idx - 1] + s * &self.points[idx];
        let v = (1.0 - s) * &self.tangents[idx - 1] + s * &self.tangents[idx];
        (p, v)
    }
}

#[derive(Debug, Clone)]
pub struct LengthOptions {
    /// Refinement target: relative change of the total below this stops.
    pub rel_tol: f64,
    pub max_depth: usize,
    /// Hard cap on integrand evaluations per refinement pass; regions
    /// where the integrand is rounding noise cannot converge, so past the
    /// budget the remaining panels are accepted as they stand.
    pub max_evaluations: usize,
    /// Estimate the tail beyond the truncation point from the decay of the
    /// integrand (only reported when the trailing speed is monotone
    /// decreasing).
    pub estimate_tail: bool,
}

impl Default for LengthOptions {
    fn default() -> Self {
        LengthOptions {
            rel_tol: 1e-8,
            max_depth: 48,
            max_evaluations: 1_000_000,
            estimate_tail: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LengthResult {
    pub length: f64,
    pub evaluations: usize,
    /// Refinement ran into the evaluation budget, typically because the
    /// integrand is rounding-noise dominated somewhere along the curve.
    pub refinement_truncated: bool,
    /// Estimated tail beyond the truncation point, when requested and the
    /// integrand is monotone decreasing there; `None` otherwise.
    pub tail_estimate: Option<f64>,
    /// Set when a tail estimate was requested but the integrand was not
    /// monotone decreasing near the truncation point.
    pub tail_not_monotone: bool,
}

/// Length of `curve` on `[t0, t1]` under `field`, by adaptive composite
/// Simpson quadrature refined until the relative change falls below
/// `opts.rel_tol`.
pub fn curve_length(
    field: &dyn MetricField,
    curve: &dyn Curve,
    t0: f64,
    t1: f64,
    opts: &LengthOptions,
) -> Result<LengthResult> {
    if t1 <= t0 || t1.is_nan() || t0.is_nan() {
        return Err(Error::Domain("curve_length: need t1 > t0".into()));
    }
    let mut evaluations = 0usize;
    let mut speed = |t: f64| -> Result<f64> {
        evaluations += 1;
        let (p, v) = curve.eval(t);
        let h = field.form_at(&p)?;
        // Positive definite up to rounding: a noise-level negative
        // eigenvalue on a nearly singular form is not a degeneracy.
        let min_eig = h.clone().symmetric_eigen().eigenvalues.min();
        if min_eig < -1e-10 * h.amax() {
            return Err(Error::Degenerate(format!(
                "field not positive definite at parameter {t}"
            )));
        }
        let q = (v.transpose() * &h * &v)[(0, 0)];
        Ok(q.max(0.0).sqrt())
    };

    // First pass with an absolute target, then re-run with the target
    // scaled by the estimated total.
    let mut abs_tol = opts.rel_tol;
    let (mut value, mut truncated) = adaptive_simpson(
        &mut speed,
        t0,
        t1,
        abs_tol,
        opts.max_depth,
        opts.max_evaluations,
    )?;
    for _ in 0..3 {
        let scaled = opts.rel_tol * value.abs().max(f64::MIN_POSITIVE);
        if scaled >= abs_tol / 4.0 && scaled <= abs_tol * 4.0 {
            break;
        }
        abs_tol = scaled;
        let (v2, t2) = adaptive_simpson(
            &mut speed,
            t0,
            t1,
            abs_tol,
            opts.max_depth,
            opts.max_evaluations,
        )?;
        value = v2;
        truncated = t2;
    }

    let mut tail_estimate = None;
    let mut tail_not_monotone = false;
    if opts.estimate_tail {
        match estimate_tail(&mut speed, t0, t1)? {
            Some(t) => tail_estimate = Some(t),
            None => tail_not_monotone = true,
        }
    }
    Ok(LengthResult {
        length: value,
        evaluations,
        refinement_truncated: truncated,
        tail_estimate,
        tail_not_monotone,
    })
}

/// Globally adaptive composite Simpson: repeatedly splits the interval
/// with the largest error estimate until the error sum meets `abs_tol`,
/// the depth cap, or the evaluation budget. Returns the value and whether
/// refinement was cut short.
fn adaptive_simpson<F>(
    f: &mut F,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_depth: usize,
    max_evaluations: usize,
) -> Result<(f64, bool)>
where
    F: FnMut(f64) -> Result<f64>,
{
    use std::cmp::Ordering;
    use std::collections::BinaryHeap;

    struct Iv {
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        s: f64,
        err: f64,
        depth: usize,
    }
    impl PartialEq for Iv {
        fn eq(&self, other: &Self) -> bool {
            self.err == other.err
        }
    }
    impl Eq for Iv {}
    impl PartialOrd for Iv {
        fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for Iv {
        fn cmp(&self, other: &Self) -> Ordering {
            self.err.total_cmp(&other.err)
        }
    }

    let simpson = |a: f64, b: f64, fa: f64, fm: f64, fb: f64| (b - a) / 6.0 * (fa + 4.0 * fm + fb);

    let fa = f(a)?;
    let fm = f(0.5 * (a + b))?;
    let fb = f(b)?;
    let s = simpson(a, b, fa, fm, fb);
    let mut active: BinaryHeap<Iv> = BinaryHeap::new();
    active.push(Iv {
        a,
        b,
        fa,
        fm,
        fb,
        s,
        err: f64::INFINITY,
        depth: 0,
    });
    let mut settled: Vec<f64> = Vec::new();
    let mut err_sum = f64::INFINITY;
    let mut used = 3usize;
    let mut truncated = false;

    while let Some(top) = active.peek() {
        if err_sum <= abs_tol {
            break;
        }
        if used + 2 > max_evaluations {
            truncated = true;
            break;
        }
        if top.depth >= max_depth {
            truncated = true;
            let iv = active.pop().unwrap();
            settled.push(iv.s);
            if err_sum.is_finite() {
                err_sum -= iv.err;
            }
            continue;
        }
        let iv = active.pop().unwrap();
        let m = 0.5 * (iv.a + iv.b);
        let flm = f(0.5 * (iv.a + m))?;
        let frm = f(0.5 * (m + iv.b))?;
        used += 2;
        let left = simpson(iv.a, m, iv.fa, flm, iv.fm);
        let right = simpson(m, iv.b, iv.fm, frm, iv.fb);
        let delta = (left + right - iv.s).abs();
        let child_err = delta / 2.0;
        if err_sum.is_finite() {
            err_sum = err_sum - iv.err + delta;
        } else {
            err_sum = delta;
        }
        active.push(Iv {
            a: iv.a,
            b: m,
            fa: iv.fa,
            fm: flm,
            fb: iv.fm,
            s: left,
            err: child_err,
            depth: iv.depth + 1,
        });
        active.push(Iv {
            a: m,
            b: iv.b,
            fa: iv.fm,
            fm: frm,
            fb: iv.fb,
            s: right,
            err: child_err,
            depth: iv.depth + 1,
        });
    }

    let mut total: f64 = settled.iter().sum();
    for iv in active.iter() {
        total += iv.s;
    }
    Ok((total, truncated))
}

/// Power-law or exponential extrapolation of the integrand beyond `t1`,
/// from samples on the trailing stretch. `None` when not monotone
/// decreasing.
fn estimate_tail<F>(f: &mut F, t0: f64, t1: f64) -> Result<Option<f64>>
where
    F: FnMut(f64) -> Result<f64>,
{
    let lo = (0.5 * (t0 + t1)).max(t1 / 10.0).max(t0);
    // Uniform grid plus golden-ratio offsets, so periodic integrands do
    // not alias into a monotone-looking sequence.
    let mut ts: Vec<f64> = (0..17).map(|i| lo + (t1 - lo) * i as f64 / 16.0).collect();
    let phi = 0.618_033_988_749_894_9_f64;
    for k in 1..=8 {
        ts.push(lo + (t1 - lo) * ((k as f64 * phi) % 1.0));
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let mut vs = Vec::with_capacity(ts.len());
    for &t in &ts {
        vs.push(f(t)?);
    }
    if vs.windows(2).any(|w| w[1] > w[0]) || vs.iter().any(|&v| v <= 0.0) {
        return Ok(None);
    }
    // Fit log v against log t (power decay) and against t (exponential
    // decay); keep the better fit.
    let logs: Vec<f64> = vs.iter().map(|v| v.ln()).collect();
    let (alpha, r2_pow) = linear_fit(&ts.iter().map(|t| t.ln()).collect::<Vec<_>>(), &logs);
    let (lambda, r2_exp) = linear_fit(&ts, &logs);
    let s_end = *vs.last().unwrap();
    let tail = if r2_exp >= r2_pow && lambda < 0.0 {
        s_end / (-lambda)
    } else if alpha < -1.0 {
        s_end * t1 / (-alpha - 1.0)
    } else {
        return Ok(None);
    };
    Ok(Some(tail))
}

/// Least-squares slope and R^2 of `y` against `x`.
pub(crate) fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
        syy += (yi - my) * (yi - my);
    }
    if sxx == 0.0 {
        return (0.0, 1.0);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    (slope, r2)
}

/// Result of a bi-Lipschitz probe between two fields.
#[derive(Debug, Clone)]
pub struct BiLipschitzReport {
    pub ratio_min: f64,
    pub ratio_max: f64,
    /// Ratio along the declared ray moved monotonically toward 0 or
    /// infinity across at least two decades.
    pub divergent: bool,
}

/// Ratios `a(v,v) / b(v,v)` over the given (point, direction) samples,
/// with an optional ordered ray along which a divergence trend is tested.
pub fn bi_lipschitz_probe(
    a: &dyn MetricField,
    b: &dyn MetricField,
    samples: &[(DVector<f64>, DVector<f64>)],
    ray: Option<&[(DVector<f64>, DVector<f64>)]>,
) -> Result<BiLipschitzReport> {
    if samples.is_empty() {
        return Err(Error::Domain("bi_lipschitz_probe: no samples".into()));
    }
    let mut ratio_min = f64::INFINITY;
    let mut ratio_max = 0.0f64;
    let ratio_at = |p: &DVector<f64>, v: &DVector<f64>| -> Result<f64> {
        let ha = a.form_at(p)?;
        let hb = b.form_at(p)?;
        let qa = (v.transpose() * ha * v)[(0, 0)];
        let qb = (v.transpose() * hb * v)[(0, 0)];
        if qa <= 0.0 || qb <= 0.0 {
            return Err(Error::Degenerate(
                "field not positive on a probe direction".into(),
            ));
        }
        Ok(qa / qb)
    };
    for (p, v) in samples {
        let r = ratio_at(p, v)?;
        ratio_min = ratio_min.min(r);
        ratio_max = ratio_max.max(r);
    }
    let mut divergent = false;
    if let Some(ray) = ray {
        if ray.len() >= 3 {
            let ratios: Vec<f64> = ray
                .iter()
                .map(|(p, v)| ratio_at(p, v))
                .collect::<Result<_>>()?;
            let increasing = ratios.windows(2).all(|w| w[1] >= w[0]);
            let decreasing = ratios.windows(2).all(|w| w[1] <= w[0]);
            let span = ratios.last().unwrap() / ratios.first().unwrap();
            divergent = (increasing && span >= 100.0) || (decreasing && span <= 0.01);
        }
    }
    Ok(BiLipschitzReport {
        ratio_min,
        ratio_max,
        divergent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::signature_decompose;
    use crate::sample;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn form_at_identity_point_returns_g_tilde() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let g = sample::random_metric_any_signature(&mut rng, 4);
            let w = signature_decompose(&g, 1e-12).unwrap();
            let h = clairaut_form_at(&DMatrix::identity(4, 4), &g, &w).unwrap();
            assert!((h - &w.g_tilde).amax() <= 1e-10 * w.g_tilde.amax());
        }
    }

    #[test]
    fn wick_and_basis_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..50 {
            let g = sample::random_metric_any_signature(&mut rng, 3);
            let w = signature_decompose(&g, 1e-12).unwrap();
            let a_inv = sample::random_invertible(&mut rng, 3);
            let h1 = clairaut_form_at(&a_inv, &g, &w).unwrap();
            let h2 = clairaut_form_from_basis(&a_inv, &g, &w.b).unwrap();
            assert!((&h1 - &h2).amax() <= 1e-9 * h1.amax().max(1.0));
        }
    }

    #[test]
    fn positivity_at_random_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..1000 {
            let n = rng.gen_range(2..=5);
            let g = sample::random_metric_any_signature(&mut rng, n);
            let w = signature_decompose(&g, 1e-12).unwrap();
            let a_inv = sample::random_invertible(&mut rng, n);
            let h = clairaut_form_at(&a_inv, &g, &w).unwrap();
            let min_eig = h
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            assert!(min_eig > 0.0, "min eigenvalue {min_eig}");
        }
    }

    #[test]
    fn spectrum_of_g_tilde_is_unit() {
        let g = MetricForm::from_diagonal(&[2.0, 0.5]).unwrap();
        let w = signature_decompose(&g, 1e-12).unwrap();
        let (lo, hi) = clairaut_spectrum(&w.g_tilde, &w.g_tilde).unwrap();
        assert_relative_eq!(lo, 1.0, epsilon = 1e-12);
        assert_relative_eq!(hi, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn sharp_lower_bound_with_extremal_vector() {
        // min eigenvalue of (h, g_tilde) equals 1 / |Ainv^-1|^2 with the
        // operator norm taken w.r.t. g_tilde, attained on the matching
        // eigenvector mapped through psi.
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..200 {
            let n = rng.gen_range(2..=4);
            let g = sample::random_metric_any_signature(&mut rng, n);
            let w = signature_decompose(&g, 1e-12).unwrap();
            let a_inv = sample::random_invertible(&mut rng, n);
            let h = clairaut_form_at(&a_inv, &g, &w).unwrap();
            let (lo, _) = clairaut_spectrum(&h, &w.g_tilde).unwrap();
            let a = a_inv.clone().try_inverse().unwrap();
            let norm_a = crate::growth::ad_operator_norm(&a, &w.g_tilde);
            assert!(lo >= 1.0 / (norm_a * norm_a) - 1e-10);
            assert!(
                (lo - 1.0 / (norm_a * norm_a)).abs() <= 1e-8 * lo.max(1.0),
                "lo = {lo}, bound = {}",
                1.0 / (norm_a * norm_a)
            );
        }
    }

    #[test]
    fn basis_change_law() {
        // Fields from bases E and E M satisfy
        // h_EM = sum w^k (M^T M)^{kl} w^l pointwise.
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for _ in 0..50 {
            let n = 3;
            let g = sample::random_metric_any_signature(&mut rng, n);
            let a_inv = sample::random_invertible(&mut rng, n);
            let e = sample::random_invertible(&mut rng, n);
            let m = sample::random_invertible(&mut rng, n);
            let h_e = clairaut_form_from_basis(&a_inv, &g, &e).unwrap();
            let h_em = clairaut_form_from_basis(&a_inv, &g, &(&e * &m)).unwrap();
            // omega vector at a point: w = (G Ainv E)^T v for direction v;
            // h_em(v,v) = w^T (M M^T) w. Check on random directions.
            let base = g.matrix() * &a_inv * &e;
            for _ in 0..5 {
                let v = sample::random_unit(&mut rng, n);
                let wv = base.transpose() * &v;
                let lhs = (v.transpose() * &h_em * &v)[(0, 0)];
                let rhs = (wv.transpose() * (&m * m.transpose()) * &wv)[(0, 0)];
                assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0));
            }
            let _ = h_e;
        }
    }

    #[test]
    fn wick_restricted_uniqueness_block_orthogonal() {
        // Two G-orthonormal bases related by a block-orthogonal transition
        // (O(s) x O(n-s)) give the same Clairaut field.
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..50 {
            let n = 4;
            let s = 2;
            let g = sample::random_metric(&mut rng, n, s);
            let w = signature_decompose(&g, 1e-12).unwrap();
            // Block-orthogonal M: preserves the eps = -1 block and the
            // eps = +1 block separately.
            let q1 = sample::random_orthogonal(&mut rng, s);
            let q2 = sample::random_orthogonal(&mut rng, n - s);
            let mut m = DMatrix::zeros(n, n);
            m.view_mut((0, 0), (s, s)).copy_from(&q1);
            m.view_mut((s, s), (n - s, n - s)).copy_from(&q2);
            let a_inv = sample::random_invertible(&mut rng, n);
            let h1 = clairaut_form_from_basis(&a_inv, &g, &w.b).unwrap();
            let h2 = clairaut_form_from_basis(&a_inv, &g, &(&w.b * m)).unwrap();
            assert!((h1.clone() - h2).amax() <= 1e-10 * h1.amax().max(1.0));
        }
    }

    #[test]
    fn straight_segment_euclidean_length() {
        let field = ClosedFormField {
            dim: 2,
            f: |_: &DVector<f64>| Ok(DMatrix::identity(2, 2)),
        };
        let curve = AnalyticCurve {
            f: |t: f64| {
                (
                    DVector::from_vec(vec![1.0 + 3.0 * t, 2.0 - 4.0 * t]),
                    DVector::from_vec(vec![3.0, -4.0]),
                )
            },
        };
        let r = curve_length(&field, &curve, 0.0, 2.0, &LengthOptions::default()).unwrap();
        assert_relative_eq!(r.length, 10.0, epsilon = 1e-9);
    }

    #[test]
    fn curve_length_rejects_indefinite_field() {
        let field = ClosedFormField {
            dim: 2,
            f: |_: &DVector<f64>| Ok(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])),
        };
        let curve = AnalyticCurve {
            f: |t: f64| {
                (
                    DVector::from_vec(vec![t, 0.0]),
                    DVector::from_vec(vec![1.0, 0.0]),
                )
            },
        };
        assert!(curve_length(&field, &curve, 0.0, 1.0, &LengthOptions::default()).is_err());
    }

    #[test]
    fn sampled_curve_finite_differences() {
        let params: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        let points: Vec<DVector<f64>> = params
            .iter()
            .map(|&t| DVector::from_vec(vec![t, t * t]))
            .collect();
        let curve = SampledCurve::new(params, points, None).unwrap();
        let (p, v) = curve.eval(0.5);
        assert_relative_eq!(p[1], 0.25, epsilon = 1e-4);
        assert_relative_eq!(v[1], 1.0, epsilon = 1e-2);
        let field = ClosedFormField {
            dim: 2,
            f: |_: &DVector<f64>| Ok(DMatrix::identity(2, 2)),
        };
        let r = curve_length(&field, &curve, 0.0, 1.0, &LengthOptions::default()).unwrap();
        let exact = 1.478942857544597; // int_0^1 sqrt(1 + 4 t^2) dt
        assert_relative_eq!(r.length, exact, epsilon = 1e-4);
    }

    #[test]
    fn tail_estimate_on_decaying_ray_and_flag_on_oscillation() {
        // Speed 1/t^2 on [1, 1e3]: the true tail beyond the cutoff is 1e-3.
        let field = ClosedFormField {
            dim: 1,
            f: |p: &DVector<f64>| Ok(DMatrix::from_element(1, 1, 1.0 / p[0].powi(4))),
        };
        let ray = AnalyticCurve {
            f: |t: f64| (DVector::from_vec(vec![t]), DVector::from_vec(vec![1.0])),
        };
        let opts = LengthOptions {
            estimate_tail: true,
            ..LengthOptions::default()
        };
        let r = curve_length(&field, &ray, 1.0, 1e3, &opts).unwrap();
        assert_relative_eq!(r.length, 1.0 - 1e-3, epsilon = 1e-8);
        let tail = r.tail_estimate.expect("monotone decreasing speed");
        assert!((tail - 1e-3).abs() <= 0.3e-3, "tail estimate {tail}");
        assert!(!r.tail_not_monotone);

        // Oscillating speed: no estimate, flagged.
        let wavy = ClosedFormField {
            dim: 1,
            f: |p: &DVector<f64>| Ok(DMatrix::from_element(1, 1, 2.0 + (3.0 * p[0]).sin())),
        };
        let r = curve_length(&wavy, &ray, 1.0, 100.0, &opts).unwrap();
        assert!(r.tail_estimate.is_none());
        assert!(r.tail_not_monotone);
    }

    #[test]
    fn probe_identical_fields() {
        let a = ClosedFormField {
            dim: 2,
            f: |_: &DVector<f64>| Ok(DMatrix::identity(2, 2)),
        };
        let b = ClosedFormField {
            dim: 2,
            f: |_: &DVector<f64>| Ok(DMatrix::identity(2, 2)),
        };
        let samples: Vec<_> = (0..10)
            .map(|i| {
                (
                    DVector::from_vec(vec![i as f64, 0.0]),
                    DVector::from_vec(vec![1.0, 1.0]),
                )
            })
            .collect();
        let r = bi_lipschitz_probe(&a, &b, &samples, Some(&samples)).unwrap();
        assert_relative_eq!(r.ratio_min, 1.0);
        assert_relative_eq!(r.ratio_max, 1.0);
        assert!(!r.divergent);
    }
}
