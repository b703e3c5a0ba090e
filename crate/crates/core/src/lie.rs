//! Lie-algebraic analysis of a bilinear control system.
//!
//! The control system `H = H_d + sum_j f_j(t) H_j` is studied through the real
//! Lie algebras generated by `i H_d` and the `i H_j`: the dynamical algebra decides
//! controllability, the algebra `k` of the controls alone fixes the quotient
//! `G/K`, and its Killing-orthogonal complement `p` carries the drift.

use std::fmt;

use nalgebra::DMatrix;

use crate::error::{QslError, Result};
use crate::matrix::{
    self, c, commutator, frobenius, is_hermitian, killing_norm, orthonormalize, remove_trace, su_basis, LieBasis, Mat,
    C64, I,
};

/// Default relative tolerance for linear dependence in closures and spans.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Relative singular-value threshold for the centralizer kernel.
pub const CENTRALIZER_TOL: f64 = 1e-9;

/// Tolerance used when recognising standard subalgebras and Cartan inclusions.
pub const STRUCTURE_MATCH_TOL: f64 = 1e-9;

/// Drift `H_d` and controls `H_j` on an `n`-dimensional Hilbert space.
///
/// All matrices are Hermitian and traceless; a trace component is projected out
/// at construction.
#[derive(Debug, Clone)]
pub struct ControlSystem {
    n: usize,
    drift: Mat,
    controls: Vec<Mat>,
}

impl ControlSystem {
    pub fn new(drift: Mat, controls: Vec<Mat>) -> Result<Self> {
        let n = drift.nrows();
        if n == 0 || !drift.is_square() {
            return Err(QslError::Shape(format!("drift is {}x{}", drift.nrows(), drift.ncols())));
        }
        if controls.is_empty() {
            return Err(QslError::Invalid("at least one control Hamiltonian is required".into()));
        }
        let check = |m: &Mat, what: &str| -> Result<Mat> {
            if m.nrows() != n || m.ncols() != n {
                return Err(QslError::DimensionMismatch { expected: n, found: m.nrows() });
            }
            if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(QslError::NonFinite);
            }
            if !is_hermitian(m, matrix::STRUCTURE_TOL) {
                return Err(QslError::NotHermitian(matrix::hermitian_defect(m)));
            }
            Ok(remove_trace(m, what))
        };
        let drift = check(&drift, "drift")?;
        let controls =
            controls.iter().enumerate().map(|(j, h)| check(h, &format!("control {j}"))).collect::<Result<Vec<_>>>()?;
        Ok(Self { n, drift, controls })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn drift(&self) -> &Mat {
        &self.drift
    }

    pub fn controls(&self) -> &[Mat] {
        &self.controls
    }

    /// Same controls, different drift.
    pub fn with_drift(&self, drift: Mat) -> Result<Self> {
        Self::new(drift, self.controls.clone())
    }

    /// `{i H_d, i H_1, ..., i H_m}`.
    pub fn skew_generators(&self) -> Vec<Mat> {
        std::iter::once(&self.drift).chain(&self.controls).map(|h| h * I).collect()
    }

    /// The control algebra `k = {i H_1, ..., i H_m}_LA`.
    pub fn control_algebra(&self, tol: f64) -> Result<LieBasis> {
        let gens: Vec<Mat> = self.controls.iter().map(|h| h * I).collect();
        lie_closure(&gens, self.n, tol)
    }

    /// The dynamical algebra `{i H_d, i H_1, ..., i H_m}_LA`.
    pub fn dynamical_algebra(&self, tol: f64) -> Result<LieBasis> {
        lie_closure(&self.skew_generators(), self.n, tol)
    }
}

/// Control groups whose quotient `SU(n)/K` is a compact symmetric space, plus the
/// two degenerate outcomes of classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupKind {
    /// `SO(n)` inside `SU(n)`.
    So(usize),
    /// Compact symplectic `Sp(m)` inside `SU(2m)`.
    Sp(usize),
    /// `S(U(p) x U(q))` inside `SU(p + q)`, with `p <= q`.
    SuPq(usize, usize),
    /// The controls alone generate all of `su(n)`.
    FullSu(usize),
    Other,
}

impl GroupKind {
    /// Hilbert-space dimension implied by the parameters.
    pub fn hilbert_dim(&self) -> Option<usize> {
        match *self {
            GroupKind::So(n) | GroupKind::FullSu(n) => Some(n),
            GroupKind::Sp(m) => Some(2 * m),
            GroupKind::SuPq(p, q) => Some(p + q),
            GroupKind::Other => None,
        }
    }

    /// `dim k` for the standard form of the group.
    pub fn algebra_dim(&self) -> Option<usize> {
        match *self {
            GroupKind::So(n) => Some(n * (n - 1) / 2),
            GroupKind::Sp(m) => Some(m * (2 * m + 1)),
            GroupKind::SuPq(p, q) => Some(p * p + q * q - 1),
            GroupKind::FullSu(n) => Some(n * n - 1),
            GroupKind::Other => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(QslError::GroupParameters(msg));
        match *self {
            GroupKind::So(n) | GroupKind::FullSu(n) if n < 2 => bad(format!("{self} needs n >= 2")),
            GroupKind::Sp(0) => bad("Sp(m) needs m >= 1".into()),
            GroupKind::SuPq(p, q) if p == 0 || p > q => {
                bad(format!("S(U(p)xU(q)) needs 1 <= p <= q, got p={p}, q={q}"))
            }
            GroupKind::Other => bad("kind Other has no standard form".into()),
            _ => Ok(()),
        }
    }

    /// Checks the kind against a Hilbert-space dimension.
    pub fn validate_for(&self, n: usize) -> Result<()> {
        self.validate()?;
        match self.hilbert_dim() {
            Some(d) if d == n => Ok(()),
            Some(d) => Err(QslError::GroupParameters(format!("{self} acts on dimension {d}, not {n}"))),
            None => Ok(()),
        }
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GroupKind::So(n) => write!(f, "SO({n})"),
            GroupKind::Sp(m) => write!(f, "Sp({m})"),
            GroupKind::SuPq(p, q) => write!(f, "S(U({p})xU({q}))"),
            GroupKind::FullSu(n) => write!(f, "SU({n})"),
            GroupKind::Other => write!(f, "Other"),
        }
    }
}

/// Outcome of checking `[k,k] in k`, `[k,p] in p` and `[p,p] in k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartanReport {
    pub kk_in_k: bool,
    pub kp_in_p: bool,
    pub pp_in_k: bool,
    pub is_cartan: bool,
    pub max_residual: f64,
}

/// Orthonormal basis of the smallest real Lie algebra containing `generators`.
///
/// Commutators are formed breadth-first in insertion order (each new element
/// against all earlier ones), so the basis is reproducible. A commutator is
/// adjoined when its residual against the current span exceeds
/// `tol * max(1, |[a, b]|)`; basis elements are unit vectors, so the floor of 1
/// keeps round-off from vanishing brackets out of the basis.
pub fn lie_closure(generators: &[Mat], n: usize, tol: f64) -> Result<LieBasis> {
    let mut basis = orthonormalize(generators, n, tol)?;
    let max = n * n - 1;
    let mut i = 0;
    while i < basis.len() && basis.len() < max {
        for j in 0..i {
            let bracket = commutator(&basis.elements()[i], &basis.elements()[j]);
            let scale = killing_norm(&bracket).max(1.0);
            basis.try_push(&bracket, tol, scale);
            if basis.len() >= max {
                break;
            }
        }
        i += 1;
    }
    Ok(basis)
}

/// Controllable iff the dynamical algebra has dimension `n^2 - 1`.
pub fn is_controllable(sys: &ControlSystem, tol: f64) -> Result<bool> {
    Ok(sys.dynamical_algebra(tol)?.len() == sys.n() * sys.n() - 1)
}

fn unit(n: usize, entries: &[(usize, usize, C64)]) -> Mat {
    let mut m = Mat::zeros(n, n);
    for &(r, col, v) in entries {
        m[(r, col)] += v;
    }
    m
}

/// Orthonormal basis of the standard representation of a control algebra.
///
/// * `so(n)`: real antisymmetric `B_ij = |i><j| - |j><i|`.
/// * `sp(m)`: `[[L1, L2], [-conj(L2), conj(L1)]]` with `L1` skew-Hermitian, `L2` symmetric.
/// * `s(u(p) + u(q))`: block diagonal with opposite block traces, `p` block first.
pub fn standard_basis(kind: GroupKind) -> Result<LieBasis> {
    kind.validate()?;
    let one = C64::ONE;
    let raw: Vec<Mat> = match kind {
        GroupKind::So(n) => {
            let mut v = Vec::new();
            for i in 0..n {
                for j in (i + 1)..n {
                    v.push(unit(n, &[(i, j, one), (j, i, -one)]));
                }
            }
            v
        }
        GroupKind::Sp(m) => {
            let n = 2 * m;
            let mut v = Vec::new();
            // L1 in u(m), mirrored as conj(L1) in the lower block.
            for j in 0..m {
                v.push(unit(n, &[(j, j, I), (m + j, m + j, -I)]));
                for k in (j + 1)..m {
                    v.push(unit(n, &[(j, k, one), (k, j, -one), (m + j, m + k, one), (m + k, m + j, -one)]));
                    v.push(unit(n, &[(j, k, I), (k, j, I), (m + j, m + k, -I), (m + k, m + j, -I)]));
                }
            }
            // L2 symmetric, with -conj(L2) in the lower-left block.
            for j in 0..m {
                for k in j..m {
                    for z in [one, I] {
                        let mut e = vec![(j, m + k, z), (m + j, k, -z.conj())];
                        if j != k {
                            e.push((k, m + j, z));
                            e.push((m + k, j, -z.conj()));
                        }
                        v.push(unit(n, &e));
                    }
                }
            }
            v
        }
        GroupKind::SuPq(p, q) => {
            let n = p + q;
            let embed = |block: &Mat, offset: usize| {
                let mut m = Mat::zeros(n, n);
                m.view_mut((offset, offset), (block.nrows(), block.ncols())).copy_from(block);
                m
            };
            let mut v = Vec::new();
            if p > 1 {
                v.extend(su_basis(p).elements().iter().map(|b| embed(b, 0)));
            }
            if q > 1 {
                v.extend(su_basis(q).elements().iter().map(|b| embed(b, p)));
            }
            let mut d = Mat::zeros(n, n);
            for i in 0..n {
                d[(i, i)] = if i < p { I * q as f64 } else { -I * p as f64 };
            }
            v.push(d);
            v
        }
        GroupKind::FullSu(n) => return Ok(su_basis(n)),
        GroupKind::Other => unreachable!("rejected by validate"),
    };
    let n = kind.hilbert_dim().expect("validated kind");
    orthonormalize(&raw, n, DEFAULT_RANK_TOL)
}

/// Basis of the Killing-orthogonal complement of `span(k)` in `su(n)`.
pub fn orthogonal_complement(k: &LieBasis) -> LieBasis {
    let n = k.dim();
    let mut all = k.clone();
    let start = all.len();
    for e in su_basis(n).elements() {
        if all.len() == n * n - 1 {
            break;
        }
        all.try_push(e, DEFAULT_RANK_TOL, 1.0);
    }
    let elements = all.into_elements().split_off(start);
    orthonormalize(&elements, n, DEFAULT_RANK_TOL).expect("complement elements are skew-Hermitian")
}

/// Removes the component of `i H_d` lying in `span(k)`; returns the Hermitian remainder.
pub fn project_drift(drift: &Mat, k: &LieBasis) -> Result<Mat> {
    if drift.nrows() != k.dim() || !drift.is_square() {
        return Err(QslError::DimensionMismatch { expected: k.dim(), found: drift.nrows() });
    }
    let skew = drift * I;
    let rest = &skew - k.project(&skew);
    let h = rest * (-I);
    Ok((&h + h.adjoint()) * c(0.5, 0.0))
}

fn max_residual_outside(a: &LieBasis, b: &LieBasis, target: &LieBasis) -> f64 {
    let mut worst = 0.0f64;
    for (ia, x) in a.elements().iter().enumerate() {
        for (ib, y) in b.elements().iter().enumerate() {
            if std::ptr::eq(a, b) && ib <= ia {
                continue;
            }
            let bracket = commutator(x, y);
            let outside = &bracket - target.project(&bracket);
            worst = worst.max(killing_norm(&outside));
        }
    }
    worst
}

/// Checks the three symmetric-space inclusions for `su(n) = k + p`.
pub fn verify_cartan(k: &LieBasis, p: &LieBasis, tol: f64) -> CartanReport {
    let kk = max_residual_outside(k, k, k);
    let kp = max_residual_outside(k, p, p);
    let pp = max_residual_outside(p, p, k);
    let (kk_in_k, kp_in_p, pp_in_k) = (kk <= tol, kp <= tol, pp <= tol);
    CartanReport {
        kk_in_k,
        kp_in_p,
        pp_in_k,
        is_cartan: kk_in_k && kp_in_p && pp_in_k,
        max_residual: kk.max(kp).max(pp),
    }
}

/// Recognises the standard `so(n)`, `sp(n/2)` and `s(u(p) + u(q))` algebras.
///
/// Only the standard representations are matched; a conjugated copy `U k U^dagger`
/// comes back as [`GroupKind::Other`]. In `su(2)` every one-dimensional subalgebra
/// is conjugate to `so(2)` and all of them give the same quotient `S^2`, so any
/// one-dimensional `k` there is reported as `SO(2)`.
pub fn classify_control_group(k: &LieBasis, tol: f64) -> GroupKind {
    let n = k.dim();
    let d = k.len();
    if n >= 2 && d == n * n - 1 {
        return GroupKind::FullSu(n);
    }
    if n == 2 && d == 1 {
        return GroupKind::So(2);
    }
    let mut candidates = vec![GroupKind::So(n)];
    if n % 2 == 0 {
        candidates.push(GroupKind::Sp(n / 2));
    }
    candidates.extend((1..=n / 2).map(|p| GroupKind::SuPq(p, n - p)));
    for kind in candidates {
        if kind.algebra_dim() != Some(d) {
            continue;
        }
        let Ok(standard) = standard_basis(kind) else { continue };
        if !k.same_span(&standard, tol) {
            continue;
        }
        let p = orthogonal_complement(k);
        if verify_cartan(k, &p, tol).is_cartan {
            return kind;
        }
    }
    GroupKind::Other
}

fn commutator_coordinates(drift: &Mat, k: &LieBasis, target: &LieBasis) -> DMatrix<f64> {
    let skew = drift * I;
    let cols: Vec<Vec<f64>> = k.elements().iter().map(|b| target.coordinates(&commutator(&skew, b))).collect();
    DMatrix::from_fn(target.len(), cols.len(), |r, col| cols[col][r])
}

/// `dim {A in k : [H_d, A] = 0}`.
pub fn centralizer_dim(drift: &Mat, k: &LieBasis) -> Result<usize> {
    if drift.nrows() != k.dim() || !drift.is_square() {
        return Err(QslError::DimensionMismatch { expected: k.dim(), found: drift.nrows() });
    }
    if k.is_empty() {
        return Ok(0);
    }
    let map = commutator_coordinates(drift, k, &su_basis(k.dim()));
    let sv = map.singular_values();
    let scale = sv.iter().cloned().fold(frobenius(drift), f64::max);
    let rank = sv.iter().filter(|&&s| s > CENTRALIZER_TOL * scale).count();
    Ok(k.len() - rank)
}

/// `dim O(i H_d) = dim k - dim {A in k : [H_d, A] = 0}`.
pub fn adjoint_orbit_dim(drift: &Mat, k: &LieBasis) -> Result<usize> {
    Ok(k.len() - centralizer_dim(drift, k)?)
}

/// Whether the two candidates alone generate all of `span(k)`.
pub fn minimal_generators_check(k: &LieBasis, candidates: (&Mat, &Mat), tol: f64) -> Result<bool> {
    for x in [candidates.0, candidates.1] {
        if !k.contains(x, STRUCTURE_MATCH_TOL) {
            return Err(QslError::Invalid("candidate does not lie in the control algebra".into()));
        }
    }
    let closure = lie_closure(&[candidates.0.clone(), candidates.1.clone()], k.dim(), tol)?;
    Ok(closure.len() == k.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{diag, gell_mann, sigma_x, sigma_y, sigma_z};

    fn ix(m: &Mat) -> Mat {
        m * I
    }

    #[test]
    fn closure_examples() {
        let b = lie_closure(&[ix(&sigma_z()), ix(&sigma_x())], 2, 1e-10).unwrap();
        assert_eq!(b.len(), 3);
        assert_eq!(lie_closure(&[ix(&sigma_x())], 2, 1e-10).unwrap().len(), 1);
        let gm = gell_mann();
        assert_eq!(lie_closure(&[ix(&gm[1]), ix(&gm[4])], 3, 1e-10).unwrap().len(), 3);
    }

    #[test]
    fn controllability_examples() {
        let sys = ControlSystem::new(sigma_z(), vec![sigma_x()]).unwrap();
        assert!(is_controllable(&sys, 1e-10).unwrap());
        let sys = ControlSystem::new(sigma_z(), vec![sigma_z()]).unwrap();
        assert!(!is_controllable(&sys, 1e-10).unwrap());
        let gm = gell_mann();
        let sys =
            ControlSystem::new(diag(&[1.0, 0.0, -1.0]), vec![gm[1].clone(), gm[4].clone(), gm[6].clone()]).unwrap();
        assert!(is_controllable(&sys, 1e-10).unwrap());
    }

    #[test]
    fn control_system_rejects_bad_input() {
        assert!(ControlSystem::new(sigma_z(), vec![]).is_err());
        assert!(matches!(ControlSystem::new(sigma_z(), vec![ix(&sigma_x())]), Err(QslError::NotHermitian(_))));
        assert!(matches!(
            ControlSystem::new(sigma_z(), vec![diag(&[1.0, 0.0, -1.0])]),
            Err(QslError::DimensionMismatch { .. })
        ));
        let sys = ControlSystem::new(diag(&[3.0, 1.0]), vec![sigma_x()]).unwrap();
        assert!(frobenius(&(sys.drift() - sigma_z())) < 1e-15);
    }

    #[test]
    fn standard_basis_dimensions() {
        assert_eq!(standard_basis(GroupKind::So(3)).unwrap().len(), 3);
        assert_eq!(standard_basis(GroupKind::Sp(2)).unwrap().len(), 10);
        assert_eq!(standard_basis(GroupKind::SuPq(2, 3)).unwrap().len(), 12);
        assert!(matches!(standard_basis(GroupKind::SuPq(3, 2)), Err(QslError::GroupParameters(_))));
        assert!(matches!(standard_basis(GroupKind::Other), Err(QslError::GroupParameters(_))));
        assert!(GroupKind::Sp(2).validate_for(5).is_err());
    }

    #[test]
    fn complement_examples() {
        let k = orthonormalize(&[ix(&sigma_x())], 2, 1e-10).unwrap();
        let p = orthogonal_complement(&k);
        assert_eq!(p.len(), 2);
        let want = orthonormalize(&[ix(&sigma_y()), ix(&sigma_z())], 2, 1e-10).unwrap();
        assert!(p.same_span(&want, 1e-10));
        assert!(orthogonal_complement(&su_basis(2)).is_empty());
        assert_eq!(orthogonal_complement(&standard_basis(GroupKind::So(3)).unwrap()).len(), 5);
    }

    #[test]
    fn project_drift_examples() {
        let k = orthonormalize(&[ix(&sigma_x())], 2, 1e-10).unwrap();
        let h = project_drift(&sigma_z(), &k).unwrap();
        assert!(frobenius(&(h - sigma_z())) < 1e-14);
        let h = project_drift(&(sigma_x() + sigma_z()), &k).unwrap();
        assert!(frobenius(&(h - sigma_z())) < 1e-14);
    }

    #[test]
    fn cartan_examples() {
        let k = standard_basis(GroupKind::So(3)).unwrap();
        assert!(verify_cartan(&k, &orthogonal_complement(&k), 1e-9).is_cartan);
        let k = orthonormalize(&[ix(&sigma_x()), ix(&sigma_y())], 2, 1e-10).unwrap();
        let p = orthonormalize(&[ix(&sigma_z())], 2, 1e-10).unwrap();
        let rep = verify_cartan(&k, &p, 1e-9);
        assert!(!rep.kk_in_k && !rep.is_cartan);
        let k = standard_basis(GroupKind::SuPq(2, 3)).unwrap();
        let rep = verify_cartan(&k, &orthogonal_complement(&k), 1e-9);
        assert!(rep.is_cartan, "{rep:?}");
    }

    #[test]
    fn classification_examples() {
        let so3 = standard_basis(GroupKind::So(3)).unwrap();
        assert_eq!(classify_control_group(&so3, 1e-9), GroupKind::So(3));
        assert_eq!(classify_control_group(&su_basis(2), 1e-9), GroupKind::FullSu(2));
        let k = orthonormalize(&[ix(&sigma_x())], 2, 1e-10).unwrap();
        assert_eq!(classify_control_group(&k, 1e-9), GroupKind::So(2));
        for kind in [GroupKind::Sp(2), GroupKind::SuPq(1, 3), GroupKind::SuPq(2, 2), GroupKind::So(4)] {
            assert_eq!(classify_control_group(&standard_basis(kind).unwrap(), 1e-9), kind);
        }
        let gm = gell_mann();
        let k = orthonormalize(&[ix(&gm[0]), ix(&gm[3])], 3, 1e-10).unwrap();
        assert_eq!(classify_control_group(&k, 1e-9), GroupKind::Other);
    }

    #[test]
    fn centralizer_examples() {
        let so3 = standard_basis(GroupKind::So(3)).unwrap();
        assert_eq!(centralizer_dim(&diag(&[1.0, 0.0, -1.0]), &so3).unwrap(), 0);
        assert_eq!(centralizer_dim(&diag(&[1.0, -0.5, -0.5]), &so3).unwrap(), 1);
        assert_eq!(centralizer_dim(&Mat::zeros(3, 3), &so3).unwrap(), 3);
        assert_eq!(adjoint_orbit_dim(&diag(&[1.0, 0.0, -1.0]), &so3).unwrap(), 3);
        assert_eq!(adjoint_orbit_dim(&diag(&[1.0, -0.5, -0.5]), &so3).unwrap(), 2);
        assert_eq!(adjoint_orbit_dim(&Mat::zeros(3, 3), &so3).unwrap(), 0);
        // A drift in the centre of k commutes with all of it.
        let k = standard_basis(GroupKind::SuPq(1, 2)).unwrap();
        assert_eq!(centralizer_dim(&diag(&[2.0, -1.0, -1.0]), &k).unwrap(), k.len());
    }

    #[test]
    fn minimal_generator_examples() {
        let so3 = standard_basis(GroupKind::So(3)).unwrap();
        let b12 = so3.elements()[0].clone();
        let b23 = so3.elements()[2].clone();
        assert!(minimal_generators_check(&so3, (&b12, &b23), 1e-10).unwrap());
        assert!(!minimal_generators_check(&so3, (&b12, &b12), 1e-10).unwrap());
        let k1 = orthonormalize(&[ix(&sigma_x())], 2, 1e-10).unwrap();
        let x = k1.elements()[0].clone();
        assert!(minimal_generators_check(&k1, (&x, &x), 1e-10).unwrap());
        assert!(minimal_generators_check(&su_basis(2), (&ix(&sigma_x()), &ix(&sigma_y())), 1e-10).unwrap());
    }
}
