//! Dense complex linear algebra on small square matrices.
//!
//! Everything in this crate lives in `n x n` complex matrices: Hamiltonians are
//! Hermitian, Lie algebra elements are skew-Hermitian and traceless, and
//! propagators are unitary. The helpers here validate those refinements and
//! provide the handful of primitives the rest of the crate is built from.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{QslError, Result};

/// Complex scalar.
pub type C64 = Complex64;

/// Dense square complex matrix.
pub type Mat = DMatrix<C64>;

/// Tolerance used for the Hermitian / skew-Hermitian refinement checks.
pub const STRUCTURE_TOL: f64 = 1e-12;

/// Trace component above which ingestion logs a warning before removing it.
pub const TRACE_WARN_TOL: f64 = 1e-8;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> Mat {
    Mat::identity(n, n)
}

/// Real diagonal matrix.
pub fn diag(values: &[f64]) -> Mat {
    let n = values.len();
    Mat::from_fn(n, n, |r, col| if r == col { c(values[r], 0.0) } else { C64::ZERO })
}

/// Pauli matrices.
pub fn sigma_x() -> Mat {
    Mat::from_row_slice(2, 2, &[C64::ZERO, C64::ONE, C64::ONE, C64::ZERO])
}

pub fn sigma_y() -> Mat {
    Mat::from_row_slice(2, 2, &[C64::ZERO, -I, I, C64::ZERO])
}

pub fn sigma_z() -> Mat {
    diag(&[1.0, -1.0])
}

/// The eight Gell-Mann matrices `lambda_1 .. lambda_8` (index 0 is `lambda_1`).
pub fn gell_mann() -> Vec<Mat> {
    let z = C64::ZERO;
    let o = C64::ONE;
    let s = 1.0 / 3f64.sqrt();
    vec![
        Mat::from_row_slice(3, 3, &[z, o, z, o, z, z, z, z, z]),
        Mat::from_row_slice(3, 3, &[z, -I, z, I, z, z, z, z, z]),
        Mat::from_row_slice(3, 3, &[o, z, z, z, -o, z, z, z, z]),
        Mat::from_row_slice(3, 3, &[z, z, o, z, z, z, o, z, z]),
        Mat::from_row_slice(3, 3, &[z, z, -I, z, z, z, I, z, z]),
        Mat::from_row_slice(3, 3, &[z, z, z, z, z, o, z, o, z]),
        Mat::from_row_slice(3, 3, &[z, z, z, z, z, -I, z, I, z]),
        Mat::from_row_slice(3, 3, &[c(s, 0.0), z, z, z, c(s, 0.0), z, z, z, c(-2.0 * s, 0.0)]),
    ]
}

pub fn frobenius(m: &Mat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace(m: &Mat) -> C64 {
    m.diagonal().iter().sum()
}

/// `Tr(AB)` without forming the product.
pub fn trace_of_product(a: &Mat, b: &Mat) -> C64 {
    let n = a.nrows();
    let mut acc = C64::ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

pub fn commutator(a: &Mat, b: &Mat) -> Mat {
    a * b - b * a
}

fn check_square(m: &Mat) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(QslError::Shape(format!("expected a non-empty square matrix, got {}x{}", m.nrows(), m.ncols())));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(QslError::NonFinite);
    }
    Ok(m.nrows())
}

fn check_same_dim(a: &Mat, b: &Mat) -> Result<usize> {
    let n = check_square(a)?;
    let m = check_square(b)?;
    if n != m {
        return Err(QslError::DimensionMismatch { expected: n, found: m });
    }
    Ok(n)
}

/// `||H - H^dagger||_F`.
pub fn hermitian_defect(m: &Mat) -> f64 {
    frobenius(&(m - m.adjoint()))
}

/// `||A + A^dagger||_F`.
pub fn skew_defect(m: &Mat) -> f64 {
    frobenius(&(m + m.adjoint()))
}

pub fn is_hermitian(m: &Mat, tol: f64) -> bool {
    m.is_square() && hermitian_defect(m) <= tol * frobenius(m).max(1.0)
}

pub fn is_skew_hermitian(m: &Mat, tol: f64) -> bool {
    m.is_square() && skew_defect(m) <= tol * frobenius(m).max(1.0)
}

pub fn is_unitary(m: &Mat, tol: f64) -> bool {
    m.is_square() && frobenius(&(m.adjoint() * m - identity(m.nrows()))) <= tol
}

/// Subtracts `(Tr M / n) 1`, warning when the removed part exceeds [`TRACE_WARN_TOL`].
pub fn remove_trace(m: &Mat, what: &str) -> Mat {
    let n = m.nrows();
    let shift = trace(m) / n as f64;
    if shift.norm() * (n as f64).sqrt() > TRACE_WARN_TOL {
        log::warn!("{what}: removing trace component of magnitude {:.3e}", shift.norm());
    }
    let mut out = m.clone();
    for i in 0..n {
        out[(i, i)] -= shift;
    }
    out
}

/// `<X, Y>_K = -2n Re Tr(XY)`, the Ad-invariant inner product on `su(n)`.
pub fn killing_inner(x: &Mat, y: &Mat) -> Result<f64> {
    let n = check_same_dim(x, y)?;
    Ok(killing_inner_unchecked(x, y, n))
}

pub(crate) fn killing_inner_unchecked(x: &Mat, y: &Mat, n: usize) -> f64 {
    -2.0 * n as f64 * trace_of_product(x, y).re
}

/// Norm induced by [`killing_inner`] on skew-Hermitian matrices.
pub fn killing_norm(x: &Mat) -> f64 {
    let n = x.nrows();
    killing_inner_unchecked(x, x, n).max(0.0).sqrt()
}

/// Spectrum and eigenvectors of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    /// Columns are the eigenvectors, in the order of `eigenvalues`.
    pub eigenvectors: Mat,
}

impl EigenSystem {
    /// `V diag(f(lambda)) V^dagger`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> C64) -> Mat {
        let v = &self.eigenvectors;
        let n = v.nrows();
        let mut scaled = v.clone();
        for (col, &lambda) in self.eigenvalues.iter().enumerate() {
            let fl = f(lambda);
            for r in 0..n {
                scaled[(r, col)] *= fl;
            }
        }
        scaled * v.adjoint()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0f64, |acc, l| acc.max(l.abs()))
    }
}

pub fn eig_hermitian(h: &Mat) -> Result<EigenSystem> {
    check_square(h)?;
    if !is_hermitian(h, STRUCTURE_TOL) {
        return Err(QslError::NotHermitian(hermitian_defect(h)));
    }
    Ok(eig_hermitian_unchecked(h))
}

/// Eigendecomposition without the refinement check. Only the lower triangle is read.
pub(crate) fn eig_hermitian_unchecked(h: &Mat) -> EigenSystem {
    let n = h.nrows();
    let eig = h.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = Mat::from_fn(n, n, |r, col| eig.eigenvectors[(r, order[col])]);
    EigenSystem { eigenvalues, eigenvectors }
}

/// `exp(A)` for skew-Hermitian `A`, through the spectrum of the Hermitian `-iA`.
pub fn expm_skew(a: &Mat) -> Result<Mat> {
    check_square(a)?;
    if !is_skew_hermitian(a, STRUCTURE_TOL) {
        return Err(QslError::NotSkewHermitian(skew_defect(a)));
    }
    let h = a.map(|z| -I * z);
    let h = (&h + h.adjoint()) * c(0.5, 0.0);
    Ok(eig_hermitian_unchecked(&h).map_spectrum(|l| C64::from_polar(1.0, l)))
}

/// `exp(-i H t)` for Hermitian `H`.
pub fn expm_hermitian(h: &Mat, t: f64) -> Result<Mat> {
    let es = eig_hermitian(h)?;
    Ok(es.map_spectrum(|l| C64::from_polar(1.0, -l * t)))
}

/// An orthonormal (under [`killing_inner`]) set of skew-Hermitian traceless matrices,
/// understood as a basis of its real span.
#[derive(Debug, Clone)]
pub struct LieBasis {
    n: usize,
    elements: Vec<Mat>,
}

impl LieBasis {
    pub fn empty(n: usize) -> Self {
        Self { n, elements: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Mat] {
        &self.elements
    }

    pub fn into_elements(self) -> Vec<Mat> {
        self.elements
    }

    /// Coordinates of `x` along each basis element.
    pub fn coordinates(&self, x: &Mat) -> Vec<f64> {
        self.elements.iter().map(|b| killing_inner_unchecked(b, x, self.n)).collect()
    }

    /// Orthogonal projection of `x` onto the span.
    pub fn project(&self, x: &Mat) -> Mat {
        let mut out = Mat::zeros(self.n, self.n);
        for b in &self.elements {
            let coef = killing_inner_unchecked(b, x, self.n);
            out += b * c(coef, 0.0);
        }
        out
    }

    /// Component of `x` orthogonal to the span, with a second pass for stability.
    pub fn residual(&self, x: &Mat) -> Mat {
        let mut r = x.clone();
        for _ in 0..2 {
            for b in &self.elements {
                let coef = killing_inner_unchecked(b, &r, self.n);
                r -= b * c(coef, 0.0);
            }
        }
        r
    }

    /// Whether `x` lies in the span up to `tol` relative to its own norm.
    pub fn contains(&self, x: &Mat, tol: f64) -> bool {
        killing_norm(&self.residual(x)) <= tol * killing_norm(x).max(1.0)
    }

    /// Adds `x` if its residual exceeds `tol * scale`; returns whether it was added.
    pub(crate) fn try_push(&mut self, x: &Mat, tol: f64, scale: f64) -> bool {
        let r = self.residual(x);
        let norm = killing_norm(&r);
        if norm <= tol * scale || norm == 0.0 {
            return false;
        }
        self.elements.push(r * c(1.0 / norm, 0.0));
        true
    }

    /// Gram matrix of the basis under [`killing_inner`].
    pub fn gram(&self) -> DMatrix<f64> {
        let k = self.len();
        DMatrix::from_fn(k, k, |a, b| killing_inner_unchecked(&self.elements[a], &self.elements[b], self.n))
    }

    /// Whether both bases span the same subspace.
    pub fn same_span(&self, other: &LieBasis, tol: f64) -> bool {
        self.len() == other.len() && other.elements.iter().all(|x| self.contains(x, tol))
    }

    /// Concatenation, assuming the two bases are mutually orthogonal.
    pub fn concat(&self, other: &LieBasis) -> LieBasis {
        let mut elements = self.elements.clone();
        elements.extend(other.elements.iter().cloned());
        LieBasis { n: self.n, elements }
    }
}

/// Real-span Gram-Schmidt under [`killing_inner`].
///
/// An input is discarded when the norm of what remains after projecting out the
/// current basis is at most `tol` times its original norm.
pub fn orthonormalize(vecs: &[Mat], n: usize, tol: f64) -> Result<LieBasis> {
    let mut basis = LieBasis::empty(n);
    for (idx, v) in vecs.iter().enumerate() {
        if check_square(v)? != n {
            return Err(QslError::DimensionMismatch { expected: n, found: v.nrows() });
        }
        if !is_skew_hermitian(v, STRUCTURE_TOL) {
            return Err(QslError::Invalid(format!("input {idx} is not skew-Hermitian")));
        }
        let norm = killing_norm(v);
        if norm > 0.0 {
            basis.try_push(v, tol, norm);
        }
    }
    Ok(basis)
}

/// Orthonormal basis of `su(n)` built from generalized Gell-Mann matrices:
/// symmetric, antisymmetric, then diagonal elements.
pub fn su_basis(n: usize) -> LieBasis {
    let mut raw = Vec::with_capacity(n * n - 1);
    for j in 0..n {
        for k in (j + 1)..n {
            let mut s = Mat::zeros(n, n);
            s[(j, k)] = I;
            s[(k, j)] = I;
            raw.push(s);
            let mut a = Mat::zeros(n, n);
            a[(j, k)] = C64::ONE;
            a[(k, j)] = -C64::ONE;
            raw.push(a);
        }
    }
    for l in 1..n {
        let mut d = Mat::zeros(n, n);
        for j in 0..l {
            d[(j, j)] = I;
        }
        d[(l, l)] = -I * l as f64;
        raw.push(d);
    }
    let elements = raw
        .into_iter()
        .map(|m| {
            let norm = killing_norm(&m);
            m * c(1.0 / norm, 0.0)
        })
        .collect();
    LieBasis { n, elements }
}
