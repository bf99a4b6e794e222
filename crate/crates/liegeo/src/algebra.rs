//! Finite-dimensional real Lie algebras given by structure constants.
//!
//! A [`LieAlgebra`] stores the dense rank-3 tensor `C[i][j][k]` with
//! `[e_i, e_j] = sum_k C[i][j][k] e_k`. All operations (bracket, adjoint
//! matrices, lower central series, Killing form, semidirect products) are
//! index-based; basis labels are cosmetic.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative singular-value cutoff for rank decisions in the lower central
/// series.
pub const RANK_TOL: f64 = 1e-9;

/// A real Lie algebra of dimension `n` presented by structure constants.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebra {
    dim: usize,
    /// Dense tensor, index `i * n * n + j * n + k`.
    c: Vec<f64>,
    labels: Vec<String>,
}

/// A single violated well-formedness condition found by [`LieAlgebra::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// `C[i][j][k] + C[j][i][k]` is not zero.
    Antisymmetry {
        i: usize,
        j: usize,
        k: usize,
        magnitude: f64,
    },
    /// The Jacobi cyclic sum over basis triple `(i, j, k)` is not zero.
    Jacobi {
        i: usize,
        j: usize,
        k: usize,
        magnitude: f64,
    },
}

impl Violation {
    pub fn magnitude(&self) -> f64 {
        match self {
            Violation::Antisymmetry { magnitude, .. } => *magnitude,
            Violation::Jacobi { magnitude, .. } => *magnitude,
        }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Antisymmetry { i, j, k, magnitude } => write!(
                f,
                "antisymmetry violated at (i={}, j={}, k={}): |C[i][j][k] + C[j][i][k]| = {magnitude:.3e}",
                i + 1,
                j + 1,
                k + 1
            ),
            Violation::Jacobi { i, j, k, magnitude } => write!(
                f,
                "Jacobi identity violated on basis triple ({}, {}, {}): defect {magnitude:.3e}",
                i + 1,
                j + 1,
                k + 1
            ),
        }
    }
}

/// Outcome of a nilpotency computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Nilpotency {
    /// Lower central series terminates; the value is the step `m`
    /// (smallest `m` with the `(m+1)`-st term zero).
    Step(usize),
    /// Series stabilizes at a nonzero subspace.
    NotNilpotent,
}

/// Nilpotency step together with a flag for rank decisions that fell close
/// to the cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct NilpotencyReport {
    pub class: Nilpotency,
    /// Some singular value landed within a factor of 10 of the rank cutoff.
    pub ambiguous_rank: bool,
}

impl LieAlgebra {
    /// Builds an algebra from a dense structure-constant tensor in
    /// `i * n * n + j * n + k` layout. Only shapes are checked here; use
    /// [`validate`](Self::validate) for antisymmetry and Jacobi.
    pub fn from_structure_constants(
        dim: usize,
        c: Vec<f64>,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("algebra dimension must be positive".into()));
        }
        if c.len() != dim * dim * dim {
            return Err(Error::Dimension {
                expected: dim * dim * dim,
                got: c.len(),
            });
        }
        let labels = match labels {
            Some(l) => {
                if l.len() != dim {
                    return Err(Error::Dimension {
                        expected: dim,
                        got: l.len(),
                    });
                }
                l
            }
            None => (1..=dim).map(|i| format!("e{i}")).collect(),
        };
        Ok(LieAlgebra { dim, c, labels })
    }

    /// Builds an algebra from a sparse bracket table. Each entry gives
    /// `[e_i, e_j]` (0-based, `i < j`) as a coefficient vector; the
    /// antisymmetric counterpart is filled in automatically.
    pub fn from_bracket_table(dim: usize, table: &[(usize, usize, Vec<f64>)]) -> Result<Self> {
        let mut c = vec![0.0; dim * dim * dim];
        for (i, j, coeffs) in table {
            if *i >= dim || *j >= dim {
                return Err(Error::Domain(format!(
                    "bracket index ({i},{j}) out of range for dimension {dim}"
                )));
            }
            if i >= j {
                return Err(Error::Domain(format!(
                    "bracket table entries must have i < j, got ({i},{j})"
                )));
            }
            if coeffs.len() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: coeffs.len(),
                });
            }
            for (k, &v) in coeffs.iter().enumerate() {
                c[i * dim * dim + j * dim + k] = v;
                c[j * dim * dim + i * dim + k] = -v;
            }
        }
        Self::from_structure_constants(dim, c, None)
    }

    /// Abelian algebra of the given dimension.
    pub fn abelian(dim: usize) -> Self {
        Self::from_structure_constants(dim, vec![0.0; dim * dim * dim], None)
            .expect("positive dimension")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn set_labels(&mut self, labels: Vec<String>) -> Result<()> {
        if labels.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: labels.len(),
            });
        }
        self.labels = labels;
        Ok(())
    }

    /// Structure constant `C[i][j][k]`.
    #[inline]
    pub fn c(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[i * self.dim * self.dim + j * self.dim + k]
    }

    /// Largest absolute structure constant.
    pub fn c_scale(&self) -> f64 {
        self.c.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Checks antisymmetry and the Jacobi identity within `tol`
    /// (an absolute tolerance on the defect, typically `1e-12 * max|C|`).
    pub fn validate(&self, tol: f64) -> Vec<Violation> {
        let n = self.dim;
        let mut violations = Vec::new();
        for i in 0..n {
            for j in i..n {
                for k in 0..n {
                    let defect = self.c(i, j, k) + self.c(j, i, k);
                    if defect.abs() > tol {
                        violations.push(Violation::Antisymmetry {
                            i,
                            j,
                            k,
                            magnitude: defect.abs(),
                        });
                    }
                }
            }
        }
        // Jacobi: [e_i,[e_j,e_k]] + [e_j,[e_k,e_i]] + [e_k,[e_i,e_j]] = 0,
        // component m of the cyclic sum.
        for i in 0..n {
            for j in (i + 1)..n {
                for k in (j + 1)..n {
                    let mut worst = 0.0f64;
                    for m in 0..n {
                        let mut s = 0.0;
                        for l in 0..n {
                            s += self.c(j, k, l) * self.c(i, l, m)
                                + self.c(k, i, l) * self.c(j, l, m)
                                + self.c(i, j, l) * self.c(k, l, m);
                        }
                        worst = worst.max(s.abs());
                    }
                    if worst > tol {
                        violations.push(Violation::Jacobi {
                            i,
                            j,
                            k,
                            magnitude: worst,
                        });
                    }
                }
            }
        }
        violations
    }

    /// Default well-formedness gate: `tol = 1e-12 * max(1, max|C|)`.
    pub fn is_valid(&self) -> bool {
        self.validate(1e-12 * self.c_scale().max(1.0)).is_empty()
    }

    /// `[a, b]` by tensor contraction.
    pub fn bracket(&self, a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
        let n = self.dim;
        assert_eq!(a.len(), n, "bracket: left operand dimension");
        assert_eq!(b.len(), n, "bracket: right operand dimension");
        let mut out = DVector::zeros(n);
        for i in 0..n {
            let ai = a[i];
            if ai == 0.0 {
                continue;
            }
            for j in 0..n {
                let bj = b[j];
                if bj == 0.0 {
                    continue;
                }
                for k in 0..n {
                    out[k] += self.c(i, j, k) * ai * bj;
                }
            }
        }
        out
    }

    /// Matrix of `ad_a = [a, .]`; column `j` is `[a, e_j]`.
    pub fn ad_matrix(&self, a: &DVector<f64>) -> DMatrix<f64> {
        let n = self.dim;
        assert_eq!(a.len(), n, "ad_matrix: operand dimension");
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            for k in 0..n {
                let mut s = 0.0;
                for i in 0..n {
                    s += a[i] * self.c(i, j, k);
                }
                m[(k, j)] = s;
            }
        }
        m
    }

    /// `ad` matrix of the `i`-th basis vector.
    pub fn ad_basis(&self, i: usize) -> DMatrix<f64> {
        let n = self.dim;
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            for k in 0..n {
                m[(k, j)] = self.c(i, j, k);
            }
        }
        m
    }

    /// True when all structure constants vanish within `tol`.
    pub fn is_abelian(&self, tol: f64) -> bool {
        self.c_scale() <= tol
    }

    /// Nilpotency step via the lower central series, with numerically
    /// ranked spans. Rank decisions use singular values against the cutoff
    /// `max(tol, RANK_TOL)` relative to the algebra's constant scale, so a
    /// bracket image that is pure roundoff counts as the zero space.
    pub fn nilpotency_step(&self, tol: f64) -> NilpotencyReport {
        let n = self.dim;
        let cutoff = tol.max(RANK_TOL) * self.c_scale().max(1.0) * (n as f64).sqrt();
        let mut ambiguous = false;
        // Current term of the series as an n x r column basis; starts at g.
        let mut current = DMatrix::<f64>::identity(n, n);
        let mut step = 1usize;
        loop {
            // Span of [g, current].
            let mut cols: Vec<DVector<f64>> = Vec::new();
            for i in 0..n {
                let ad_i = self.ad_basis(i);
                for j in 0..current.ncols() {
                    cols.push(&ad_i * current.column(j));
                }
            }
            let stacked = DMatrix::from_columns(&cols);
            let (basis, amb) = ranked_span(&stacked, cutoff);
            ambiguous |= amb;
            match basis {
                None => {
                    return NilpotencyReport {
                        class: Nilpotency::Step(step),
                        ambiguous_rank: ambiguous,
                    }
                }
                Some(next) => {
                    if next.ncols() >= current.ncols() {
                        // Series stopped shrinking at a nonzero space.
                        return NilpotencyReport {
                            class: Nilpotency::NotNilpotent,
                            ambiguous_rank: ambiguous,
                        };
                    }
                    current = next;
                    step += 1;
                }
            }
        }
    }

    /// Killing form `K(i, j) = trace(ad_{e_i} ad_{e_j})`.
    pub fn killing_form(&self) -> DMatrix<f64> {
        let n = self.dim;
        let ads: Vec<DMatrix<f64>> = (0..n).map(|i| self.ad_basis(i)).collect();
        let mut k = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let t = (&ads[i] * &ads[j]).trace();
                k[(i, j)] = t;
                k[(j, i)] = t;
            }
        }
        k
    }

    /// Structure constants in the basis `e'_j = sum_i M[i][j] e_i`.
    pub fn change_basis(&self, m: &DMatrix<f64>) -> Result<Self> {
        let n = self.dim;
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::Dimension {
                expected: n,
                got: m.nrows(),
            });
        }
        let m_inv = m
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Singular("basis change matrix".into()))?;
        let mut c = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                // [e'_i, e'_j] in the old basis, then re-expressed in the new one.
                let old = self.bracket(
                    &DVector::from(m.column(i).into_owned()),
                    &DVector::from(m.column(j).into_owned()),
                );
                let new = &m_inv * old;
                for k in 0..n {
                    c[i * n * n + j * n + k] = new[k];
                }
            }
        }
        Self::from_structure_constants(n, c, None)
    }
}

/// Orthonormal basis of the column span of `m`, or `None` for the zero
/// space, deciding rank by singular values against an absolute cutoff.
/// Also reports whether any singular value fell within a factor of 10 of
/// the cutoff.
fn ranked_span(m: &DMatrix<f64>, cutoff: f64) -> (Option<DMatrix<f64>>, bool) {
    let svd = m.clone().svd(true, false);
    let mut ambiguous = false;
    let mut rank = 0;
    for &s in svd.singular_values.iter() {
        if s > cutoff {
            rank += 1;
        }
        if s > cutoff / 10.0 && s < cutoff * 10.0 {
            ambiguous = true;
        }
    }
    if rank == 0 {
        return (None, ambiguous);
    }
    let u = svd.u.expect("svd with u");
    (Some(u.columns(0, rank).into_owned()), ambiguous)
}

/// Semidirect product `k ⋉ ℝ^m` for a derived representation given by one
/// `m x m` matrix per basis vector of `k`.
///
/// The bracket is `[(u1,w1),(u2,w2)] = ([u1,u2], rep(u1) w2 - rep(u2) w1)`;
/// the representation must be a Lie algebra homomorphism into `gl(m)`,
/// which is checked with a relative residual of `1e-10`.
pub fn semidirect_product(
    k_alg: &LieAlgebra,
    rep: &[DMatrix<f64>],
    m: usize,
) -> Result<LieAlgebra> {
    let nk = k_alg.dim();
    if rep.len() != nk {
        return Err(Error::Dimension {
            expected: nk,
            got: rep.len(),
        });
    }
    for r in rep {
        if r.nrows() != m || r.ncols() != m {
            return Err(Error::Dimension {
                expected: m,
                got: r.nrows(),
            });
        }
    }
    // Homomorphism check: rep([u_i,u_j]) = [rep(u_i), rep(u_j)].
    let scale = rep
        .iter()
        .map(|r| r.amax())
        .fold(k_alg.c_scale(), f64::max)
        .max(1.0);
    let mut residual = 0.0f64;
    for i in 0..nk {
        for j in (i + 1)..nk {
            let mut lhs = DMatrix::zeros(m, m);
            for (l, r) in rep.iter().enumerate() {
                lhs += k_alg.c(i, j, l) * r;
            }
            let rhs = &rep[i] * &rep[j] - &rep[j] * &rep[i];
            residual = residual.max((lhs - rhs).norm());
        }
    }
    if residual > 1e-10 * scale * scale {
        return Err(Error::NotHomomorphism { residual });
    }

    let n = nk + m;
    let mut c = vec![0.0; n * n * n];
    // k x k block keeps the k structure constants.
    for i in 0..nk {
        for j in 0..nk {
            for k in 0..nk {
                c[i * n * n + j * n + k] = k_alg.c(i, j, k);
            }
        }
    }
    // [u_i, w_b] = rep(u_i) w_b, and the antisymmetric counterpart.
    for i in 0..nk {
        for b in 0..m {
            for a in 0..m {
                let v = rep[i][(a, b)];
                c[i * n * n + (nk + b) * n + (nk + a)] = v;
                c[(nk + b) * n * n + i * n + (nk + a)] = -v;
            }
        }
    }
    let labels = k_alg
        .labels()
        .iter()
        .cloned()
        .chain((1..=m).map(|i| format!("w{i}")))
        .collect();
    LieAlgebra::from_structure_constants(n, c, Some(labels))
}
