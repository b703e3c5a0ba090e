//! Is the analytic bound exact?
//!
//! Three diagnostics, from strongest to weakest:
//!
//! * the dimension count: the bound is exact when the adjoint orbit of the drift
//!   fills the unit sphere of `p`, i.e. `dim C_k(H_d) = 1 + dim k - dim p`;
//! * for `so(n)` controls, each degenerate eigenvalue pair of `H_d` removes one
//!   orbit direction;
//! * for `su(3)/so(3)`, a degenerate drift can never satisfy one of the two root
//!   conditions for reaching the cut locus.
//!
//! Only the first is a sufficient condition. The verdict stays
//! [`TightnessStatus::Indeterminate`] when none of them decides.

use std::fmt;

use serde::Serialize;

use crate::error::{QslError, Result};
use crate::lie::{centralizer_dim, ControlSystem, GroupKind};
use crate::matrix::{eig_hermitian, LieBasis, Mat};

/// Relative tolerance for calling two eigenvalues equal.
pub const DEGENERACY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TightnessStatus {
    TightGuaranteed,
    ExpectedNotTight,
    Indeterminate,
}

impl fmt::Display for TightnessStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TightnessStatus::TightGuaranteed => "TIGHT_GUARANTEED",
            TightnessStatus::ExpectedNotTight => "EXPECTED_NOT_TIGHT",
            TightnessStatus::Indeterminate => "INDETERMINATE",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DimensionCriterion {
    pub holds: bool,
    /// `dim {A in k : [H_d, A] = 0}`.
    pub lhs: i64,
    /// `1 + dim k - dim p`.
    pub rhs: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DegeneracyAnalysis {
    /// Number of unordered degenerate eigenvalue pairs.
    pub pairs: usize,
    pub orbit_dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootAnalysis {
    /// Descending, summing to zero.
    pub eigenvalues: [f64; 3],
    /// `lambda_1 + 2 lambda_2`.
    pub cond1_lhs: f64,
    /// `lambda_1 - lambda_2`.
    pub cond2_lhs: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "criterion", rename_all = "snake_case")]
pub enum Finding {
    DimensionCount(DimensionCriterion),
    SoDegeneracy(DegeneracyAnalysis),
    Su3Roots(RootAnalysis),
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::DimensionCount(d) => write!(
                f,
                "dimension count: dim centralizer = {} vs 1 + dim k - dim p = {} ({})",
                d.lhs,
                d.rhs,
                if d.holds { "equality, orbit fills every direction" } else { "strict inequality" }
            ),
            Finding::SoDegeneracy(d) => write!(
                f,
                "so(n) degeneracy: {} degenerate eigenvalue pair(s), adjoint orbit dimension {}",
                d.pairs, d.orbit_dim
            ),
            Finding::Su3Roots(r) => write!(
                f,
                "su(3) roots: eigenvalues ({:.6}, {:.6}, {:.6}), l1+2l2 = {:.6}, l1-l2 = {:.6}{}",
                r.eigenvalues[0],
                r.eigenvalues[1],
                r.eigenvalues[2],
                r.cond1_lhs,
                r.cond2_lhs,
                if r.degenerate { ", one cut-locus condition can never be met" } else { "" }
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TightnessVerdict {
    pub status: TightnessStatus,
    pub reasons: Vec<Finding>,
}

/// `dim {A in k : [H_d, A] = 0} >= 1 + dim k - dim p`, with equality meaning the bound is exact.
pub fn dimension_criterion(drift: &Mat, k: &LieBasis, p: &LieBasis) -> Result<DimensionCriterion> {
    let lhs = centralizer_dim(drift, k)? as i64;
    let rhs = 1 + k.len() as i64 - p.len() as i64;
    debug_assert!(lhs >= rhs, "dimension inequality violated: {lhs} < {rhs}");
    Ok(DimensionCriterion { holds: lhs == rhs, lhs, rhs })
}

fn is_degenerate(a: f64, b: f64, tol: f64, radius: f64) -> bool {
    (a - b).abs() <= tol * radius.max(1.0)
}

/// Degenerate pair count `M` and orbit dimension `n(n-1)/2 - M` for `so(n)` controls.
pub fn so_degeneracy_analysis(drift: &Mat, tol: f64) -> Result<DegeneracyAnalysis> {
    let es = eig_hermitian(drift)?;
    let radius = es.spectral_radius();
    let l = &es.eigenvalues;
    let n = l.len();
    let mut pairs = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            if is_degenerate(l[i], l[j], tol, radius) {
                pairs += 1;
            }
        }
    }
    Ok(DegeneracyAnalysis { pairs, orbit_dim: n * (n - 1) / 2 - pairs })
}

/// Root conditions for `su(3)/so(3)` with the spectrum in descending order.
///
/// Any permutation of the eigenvalues is reachable with the controls, so the
/// drift is flagged degenerate when some ordering zeroes a condition.
pub fn su3_root_analysis(drift: &Mat, tol: f64) -> Result<RootAnalysis> {
    if drift.nrows() != 3 {
        return Err(QslError::DimensionMismatch { expected: 3, found: drift.nrows() });
    }
    let es = eig_hermitian(drift)?;
    let radius = es.spectral_radius().max(1.0);
    let l = [es.eigenvalues[2], es.eigenvalues[1], es.eigenvalues[0]];
    let cond1 = |a: f64, b: f64| a + 2.0 * b;
    let cond2 = |a: f64, b: f64| a - b;
    const ORDERINGS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let degenerate = ORDERINGS.iter().any(|o| {
        let (a, b) = (l[o[0]], l[o[1]]);
        cond1(a, b).abs() <= tol * radius || cond2(a, b).abs() <= tol * radius
    });
    Ok(RootAnalysis { eigenvalues: l, cond1_lhs: cond1(l[0], l[1]), cond2_lhs: cond2(l[0], l[1]), degenerate })
}

/// Combines the diagnostics into a verdict.
///
/// The drift of `sys` should already lie in `p`.
pub fn classify_tightness(
    sys: &ControlSystem,
    kind: GroupKind,
    k: &LieBasis,
    p: &LieBasis,
    tol: f64,
) -> Result<TightnessVerdict> {
    let dims = dimension_criterion(sys.drift(), k, p)?;
    let mut reasons = vec![Finding::DimensionCount(dims)];
    if dims.holds {
        return Ok(TightnessVerdict { status: TightnessStatus::TightGuaranteed, reasons });
    }
    let mut status = TightnessStatus::Indeterminate;
    if let GroupKind::So(n) = kind {
        let deg = so_degeneracy_analysis(sys.drift(), tol)?;
        reasons.push(Finding::SoDegeneracy(deg));
        let mut degenerate = deg.pairs > 0;
        if n == 3 {
            let roots = su3_root_analysis(sys.drift(), tol)?;
            degenerate &= roots.degenerate;
            reasons.push(Finding::Su3Roots(roots));
        }
        if degenerate {
            status = TightnessStatus::ExpectedNotTight;
        }
    }
    Ok(TightnessVerdict { status, reasons })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{orthogonal_complement, standard_basis};
    use crate::matrix::{diag, gell_mann, orthonormalize, sigma_x, sigma_z, I};

    fn so3_system(drift: &[f64]) -> ControlSystem {
        let gm = gell_mann();
        ControlSystem::new(diag(drift), vec![gm[1].clone(), gm[4].clone(), gm[6].clone()]).unwrap()
    }

    #[test]
    fn dimension_criterion_examples() {
        let k = orthonormalize(&[sigma_x() * I], 2, 1e-10).unwrap();
        let p = orthogonal_complement(&k);
        let d = dimension_criterion(&sigma_z(), &k, &p).unwrap();
        assert_eq!((d.lhs, d.rhs, d.holds), (0, 0, true));

        let k = standard_basis(GroupKind::So(3)).unwrap();
        let p = orthogonal_complement(&k);
        let d = dimension_criterion(&diag(&[1.0, 0.0, -1.0]), &k, &p).unwrap();
        assert_eq!(d.rhs, -1);
        assert!(!d.holds);

        let k = standard_basis(GroupKind::Sp(2)).unwrap();
        let p = orthogonal_complement(&k);
        let d = dimension_criterion(&diag(&[1.0, -1.0, 1.0, -1.0]), &k, &p).unwrap();
        assert_eq!(d.rhs, 6);
        assert!(d.lhs >= d.rhs);
    }

    #[test]
    fn degeneracy_examples() {
        let d = so_degeneracy_analysis(&diag(&[1.0, 0.0, -1.0]), DEGENERACY_TOL).unwrap();
        assert_eq!((d.pairs, d.orbit_dim), (0, 3));
        let d = so_degeneracy_analysis(&diag(&[1.0, -0.5, -0.5]), DEGENERACY_TOL).unwrap();
        assert_eq!((d.pairs, d.orbit_dim), (1, 2));
        let d = so_degeneracy_analysis(&Mat::zeros(4, 4), DEGENERACY_TOL).unwrap();
        assert_eq!((d.pairs, d.orbit_dim), (6, 0));
    }

    #[test]
    fn root_examples() {
        let r = su3_root_analysis(&diag(&[1.0, 0.0, -1.0]), DEGENERACY_TOL).unwrap();
        assert!((r.cond1_lhs - 1.0).abs() < 1e-14 && (r.cond2_lhs - 1.0).abs() < 1e-14);
        assert!(!r.degenerate);
        let r = su3_root_analysis(&diag(&[1.0, -0.5, -0.5]), DEGENERACY_TOL).unwrap();
        assert!(r.degenerate);
        assert!(r.cond1_lhs.abs() < 1e-14);
        assert!(su3_root_analysis(&Mat::zeros(3, 3), DEGENERACY_TOL).unwrap().degenerate);
        assert!(su3_root_analysis(&sigma_z(), DEGENERACY_TOL).is_err());
    }

    #[test]
    fn verdict_examples() {
        let sys = ControlSystem::new(sigma_z(), vec![sigma_x()]).unwrap();
        let k = sys.control_algebra(1e-10).unwrap();
        let p = orthogonal_complement(&k);
        let v = classify_tightness(&sys, GroupKind::So(2), &k, &p, DEGENERACY_TOL).unwrap();
        assert_eq!(v.status, TightnessStatus::TightGuaranteed);

        let k = standard_basis(GroupKind::So(3)).unwrap();
        let p = orthogonal_complement(&k);
        let v = classify_tightness(&so3_system(&[1.0, -0.5, -0.5]), GroupKind::So(3), &k, &p, DEGENERACY_TOL).unwrap();
        assert_eq!(v.status, TightnessStatus::ExpectedNotTight);
        let v = classify_tightness(&so3_system(&[1.0, 0.0, -1.0]), GroupKind::So(3), &k, &p, DEGENERACY_TOL).unwrap();
        assert_eq!(v.status, TightnessStatus::Indeterminate);
        assert_eq!(v.reasons.len(), 3);
    }
}
