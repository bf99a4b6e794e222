//! Symmetric bilinear forms on the algebra: signature decomposition,
//! Wick rotation, metric adjoints and pushforwards.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Default tolerance used by [`signature_decompose`] for degeneracy
/// decisions, relative to the largest absolute eigenvalue.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// A non-degenerate symmetric bilinear form `g_1` on the algebra, any
/// signature.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricForm {
    g: DMatrix<f64>,
}

impl MetricForm {
    /// Wraps a symmetric matrix, enforcing symmetry and the
    /// non-degeneracy gate `|det G| > 1e-12 * (max|G|)^n`.
    pub fn new(g: DMatrix<f64>) -> Result<Self> {
        let n = g.nrows();
        if n == 0 || g.ncols() != n {
            return Err(Error::Dimension {
                expected: n.max(1),
                got: g.ncols(),
            });
        }
        let scale = g.amax();
        if scale == 0.0 {
            return Err(Error::Degenerate("zero form".into()));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if (g[(i, j)] - g[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::Domain(format!("form is not symmetric at ({i},{j})")));
                }
            }
        }
        let det = g.determinant();
        if det.abs() <= 1e-12 * scale.powi(n as i32) {
            return Err(Error::Degenerate(format!("|det G| = {:.3e}", det.abs())));
        }
        Ok(MetricForm { g })
    }

    pub fn identity(n: usize) -> Self {
        MetricForm {
            g: DMatrix::identity(n, n),
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_vec(diag.to_vec())))
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.g
    }

    /// `g_1(u, v)`.
    pub fn inner(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        (u.transpose() * &self.g * v)[(0, 0)]
    }

    /// Eigenvalues of the matrix of the form (symmetric eigendecomposition).
    pub fn eigenvalues(&self) -> DVector<f64> {
        self.g.clone().symmetric_eigen().eigenvalues
    }

    /// Positive or negative definite.
    pub fn is_definite(&self) -> bool {
        let ev = self.eigenvalues();
        ev.iter().all(|&l| l > 0.0) || ev.iter().all(|&l| l < 0.0)
    }

    /// Number of negative and positive eigenvalues.
    pub fn signature(&self) -> (usize, usize) {
        let ev = self.eigenvalues();
        let neg = ev.iter().filter(|&&l| l < 0.0).count();
        (neg, ev.len() - neg)
    }
}

/// An orthonormal frame for an indefinite form together with its Wick
/// rotated Riemannian companion.
///
/// Columns of `b` satisfy `B^T G B = diag(eps)` with the `-1` entries of
/// `eps` first; `psi` is the involution with `psi(b_i) = eps_i b_i` and
/// `g_tilde` is the positive definite form for which the same columns are
/// orthonormal, so that `G = g_tilde . psi` as an operator identity.
#[derive(Debug, Clone)]
pub struct WickFrame {
    pub b: DMatrix<f64>,
    pub eps: Vec<f64>,
    pub psi: DMatrix<f64>,
    pub g_tilde: DMatrix<f64>,
}

impl WickFrame {
    /// Number of `-1` entries in `eps`.
    pub fn negative_count(&self) -> usize {
        self.eps.iter().filter(|&&e| e < 0.0).count()
    }
}

/// Orthonormalizes a non-degenerate form by symmetric eigendecomposition:
/// eigenvectors scaled by `1/sqrt(|lambda|)`, negative eigenvalues first.
///
/// Fails with a degeneracy error when some `|eigenvalue| < tol * max|eigenvalue|`.
pub fn signature_decompose(g: &MetricForm, tol: f64) -> Result<WickFrame> {
    let n = g.dim();
    let eig = g.matrix().clone().symmetric_eigen();
    let lmax = eig.eigenvalues.amax();
    let cutoff = tol.max(DEGENERACY_TOL) * lmax;
    // Order: negatives first, each group by increasing eigenvalue.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (la, lb) = (eig.eigenvalues[a], eig.eigenvalues[b]);
        (la >= 0.0)
            .cmp(&(lb >= 0.0))
            .then(la.partial_cmp(&lb).unwrap())
    });
    let mut b = DMatrix::zeros(n, n);
    let mut eps = Vec::with_capacity(n);
    for (slot, &idx) in order.iter().enumerate() {
        let lambda = eig.eigenvalues[idx];
        if lambda.abs() < cutoff {
            return Err(Error::Degenerate(format!(
                "eigenvalue {lambda:.3e} below tolerance"
            )));
        }
        let mut col = eig.eigenvectors.column(idx).into_owned();
        // Sign convention: largest-magnitude component positive.
        let lead = col
            .iter()
            .cloned()
            .fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        if lead < 0.0 {
            col = -col;
        }
        col /= lambda.abs().sqrt();
        b.set_column(slot, &col);
        eps.push(lambda.signum());
    }
    // g_tilde = Q |Lambda| Q^T and psi = Q sign(Lambda) Q^T, both assembled
    // from the same eigenvectors so G = g_tilde . psi holds to rounding.
    let q = &eig.eigenvectors;
    let abs_l = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::abs));
    let sgn_l = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::signum));
    let g_tilde = q * abs_l * q.transpose();
    let psi = q * sgn_l * q.transpose();
    Ok(WickFrame {
        b,
        eps,
        psi,
        g_tilde,
    })
}

/// Formal adjoint `M† = G^-1 M^T G`, the unique map with
/// `g_1(M u, v) = g_1(u, M† v)`.
pub fn metric_adjoint(m: &DMatrix<f64>, g: &MetricForm) -> DMatrix<f64> {
    let g_inv = g
        .matrix()
        .clone()
        .try_inverse()
        .expect("non-degenerate by construction");
    g_inv * m.transpose() * g.matrix()
}

/// Pushforward action `M^T B M` on symmetric forms.
pub fn transform_form(m: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if m.determinant().abs() == 0.0 {
        return Err(Error::Singular("transform_form".into()));
    }
    Ok(m.transpose() * b * m)
}

/// Orbit of a non-degenerate form `c_1 dx^2 + c_2 (dxdy+dydx) + c_3 dy^2`
/// on the affine algebra under its automorphism group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum AffOrbit {
    /// Positive or negative definite; all complete.
    Definite,
    /// Lorentzian with `e_2` non-isotropic (`c_3 != 0`).
    LorentzE2NonIsotropic,
    /// Lorentzian with `e_2` isotropic (`c_3 = 0`).
    LorentzE2Isotropic,
}

/// Classifies `(c_1, c_2, c_3)` by `sign(c_1 c_3 - c_2^2)` and by the
/// isotropy of `e_2`. Isotropy uses an absolute `1e-12` cutoff since the
/// coefficients are user-given exact-ish inputs.
pub fn aff_orbit_classify(c1: f64, c2: f64, c3: f64) -> Result<AffOrbit> {
    let det = c1 * c3 - c2 * c2;
    if det.abs() <= 1e-12 {
        return Err(Error::Degenerate(format!("c1*c3 - c2^2 = {det:.3e}")));
    }
    if det > 0.0 {
        Ok(AffOrbit::Definite)
    } else if c3.abs() <= 1e-12 {
        Ok(AffOrbit::LorentzE2Isotropic)
    } else {
        Ok(AffOrbit::LorentzE2NonIsotropic)
    }
}
