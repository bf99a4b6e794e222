//! Seeded random sampling of metrics, directions and frames, shared by the
//! probe ensembles and the test suites.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::metric::MetricForm;

/// Random orthogonal matrix (QR of a Gaussian-ish square matrix).
pub fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    loop {
        let raw = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0_f64));
        let q = raw.clone().qr().q();
        if q.determinant().abs() > 0.5 {
            return q;
        }
    }
}

/// Random non-degenerate form with exactly `negatives` negative
/// eigenvalues, eigenvalue magnitudes in `[0.3, 3]`.
pub fn random_metric(rng: &mut ChaCha8Rng, n: usize, negatives: usize) -> MetricForm {
    assert!(negatives <= n);
    loop {
        let q = random_orthogonal(rng, n);
        let mut diag = DVector::zeros(n);
        for i in 0..n {
            let mag = rng.gen_range(0.3..3.0);
            diag[i] = if i < negatives { -mag } else { mag };
        }
        let g = &q * DMatrix::from_diagonal(&diag) * q.transpose();
        let sym = 0.5 * (&g + g.transpose());
        if let Ok(form) = MetricForm::new(sym) {
            return form;
        }
    }
}

/// Random form with a uniformly chosen signature.
pub fn random_metric_any_signature(rng: &mut ChaCha8Rng, n: usize) -> MetricForm {
    let negatives = rng.gen_range(0..=n);
    random_metric(rng, n, negatives)
}

/// Random unit vector for the Euclidean norm.
pub fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0_f64));
        let norm = v.norm();
        if norm > 1e-3 {
            return v / norm;
        }
    }
}

/// Random invertible matrix with determinant bounded away from zero.
pub fn random_invertible(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    loop {
        let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.5..1.5_f64));
        if m.determinant().abs() > 0.05 {
            return m;
        }
    }
}
