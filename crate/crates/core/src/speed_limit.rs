//! Analytic lower bounds on the quantum speed limit.
//!
//! Motion in `G/K` happens at the constant speed `v = sqrt(2n Tr(H_d^2))`, so the
//! time needed to reach every coset is at least `diam(G/K) / v`. For the three
//! symmetric quotients of `SU(n)` the diameters are known in closed form.

use std::f64::consts::{PI, SQRT_2};

use serde::Serialize;

use crate::error::{QslError, Result};
use crate::lie::{ControlSystem, GroupKind};
use crate::matrix::{trace_of_product, Mat};
use crate::tightness::TightnessVerdict;

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    #[serde(serialize_with = "display")]
    pub kind: GroupKind,
    pub n: usize,
    pub drift_speed: f64,
    pub diameter: f64,
    /// `diameter / drift_speed`.
    pub bound_theorem: f64,
    /// Closed-form specialisation of the bound as commonly quoted; see [`published_bound`].
    pub bound_published: Option<f64>,
    /// Embedding bound for single-control systems, when the system has one control.
    pub bound_single_control: Option<f64>,
    #[serde(skip)]
    pub tightness: Option<TightnessVerdict>,
}

fn display<S: serde::Serializer>(kind: &GroupKind, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(kind)
}

impl BoundReport {
    /// `bound_published / bound_theorem`, 1 whenever the two formulas agree.
    pub fn published_ratio(&self) -> Option<f64> {
        self.bound_published.map(|p| p / self.bound_theorem)
    }
}

/// `Tr(H^2)` for Hermitian `H`.
pub fn trace_square(h: &Mat) -> f64 {
    trace_of_product(h, h).re
}

/// `v = sqrt(2n Tr(H_d^2))`.
pub fn drift_speed(drift: &Mat) -> f64 {
    let n = drift.nrows() as f64;
    (2.0 * n * trace_square(drift)).max(0.0).sqrt()
}

/// Diameter of `SU(n)/K` under the Killing metric.
///
/// `Sp` is indexed by its own parameter `m` (the quotient is `SU(2m)/Sp(m)`).
pub fn diameter(kind: GroupKind) -> Result<f64> {
    match kind {
        GroupKind::FullSu(_) | GroupKind::Other => return Err(QslError::NoTabulatedDiameter(kind.to_string())),
        _ => kind.validate()?,
    }
    Ok(match kind {
        GroupKind::So(n) => {
            let n = n as f64;
            if kind_param_even(kind) {
                SQRT_2 / 2.0 * PI * n
            } else {
                SQRT_2 / 2.0 * PI * (n * n - 1.0).sqrt()
            }
        }
        GroupKind::Sp(m) => {
            let m = m as f64;
            if kind_param_even(kind) {
                PI * m
            } else {
                PI * (m * m - 1.0).sqrt()
            }
        }
        GroupKind::SuPq(p, q) => PI * (((p + q) * p) as f64).sqrt(),
        GroupKind::FullSu(_) | GroupKind::Other => unreachable!(),
    })
}

fn kind_param_even(kind: GroupKind) -> bool {
    match kind {
        GroupKind::So(n) => n % 2 == 0,
        GroupKind::Sp(m) => m % 2 == 0,
        _ => false,
    }
}

/// Lower bound from the diameter of `G/K` and the drift speed.
///
/// The drift is taken as is; project it onto `p` first (see
/// [`crate::lie::project_drift`]) so that no part of it is already undoable by the
/// controls.
pub fn qsl_bound(sys: &ControlSystem, kind: GroupKind) -> Result<BoundReport> {
    kind.validate_for(sys.n())?;
    let n = sys.n();
    let diameter = diameter(kind)?;
    let speed = drift_speed(sys.drift());
    if speed <= 0.0 {
        return Err(QslError::ZeroDrift);
    }
    let tr = trace_square(sys.drift());
    let single = if sys.controls().len() == 1 { Some(single_control_bound(sys.drift())?) } else { None };
    Ok(BoundReport {
        kind,
        n,
        drift_speed: speed,
        diameter,
        bound_theorem: diameter / speed,
        bound_published: Some(published_bound(kind, n, tr)?),
        bound_single_control: single,
        tightness: None,
    })
}

/// Specialised bound formulas, evaluated exactly as they are usually quoted.
///
/// For `SO(n)` and `S(U(p)xU(q))` these coincide with `diameter / drift_speed`.
/// For `Sp(m)` the quoted formula is larger than `diameter / drift_speed` by a
/// constant factor of `sqrt(2)`; both numbers are reported.
pub fn published_bound(kind: GroupKind, n: usize, trace_hd2: f64) -> Result<f64> {
    match kind {
        GroupKind::FullSu(_) | GroupKind::Other => return Err(QslError::NoTabulatedDiameter(kind.to_string())),
        _ => kind.validate_for(n)?,
    }
    if trace_hd2 <= 0.0 {
        return Err(QslError::ZeroDrift);
    }
    let nf = n as f64;
    Ok(match kind {
        GroupKind::So(_) if n % 2 == 0 => nf.sqrt() * PI / (2.0 * trace_hd2.sqrt()),
        GroupKind::So(_) => PI * (nf * nf - 1.0).sqrt() / (2.0 * (nf * trace_hd2).sqrt()),
        GroupKind::Sp(m) => {
            let m = m as f64;
            if kind_param_even(kind) {
                m.sqrt() * PI / (2.0 * trace_hd2).sqrt()
            } else {
                PI * (m * m - 1.0).sqrt() / (2.0 * m * trace_hd2).sqrt()
            }
        }
        GroupKind::SuPq(p, _) => (p as f64).sqrt() * PI / (2.0 * trace_hd2).sqrt(),
        GroupKind::FullSu(_) | GroupKind::Other => unreachable!(),
    })
}

/// Bound for a single control Hamiltonian, from embedding the control into
/// `s(u(p) + u(q))` with `p = floor(n/2)`. It does not depend on the control.
pub fn single_control_bound(drift: &Mat) -> Result<f64> {
    let tr = trace_square(drift);
    if tr <= 0.0 {
        return Err(QslError::ZeroDrift);
    }
    let p = (drift.nrows() / 2) as f64;
    Ok(p.sqrt() * PI / (2.0 * tr).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{c, diag, gell_mann, sigma_x, sigma_z, I};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    /// Drift used for the `SU(5)/S(U(2)xU(3))` experiment: `i` times a real
    /// antisymmetric matrix coupling levels 1-3 (weight 1) and 2-4 (weight 4).
    fn su5_drift() -> Mat {
        let mut a = Mat::zeros(5, 5);
        a[(0, 2)] = c(1.0, 0.0);
        a[(2, 0)] = c(-1.0, 0.0);
        a[(1, 3)] = c(4.0, 0.0);
        a[(3, 1)] = c(-4.0, 0.0);
        a * I
    }

    #[test]
    fn drift_speed_examples() {
        assert!(rel(drift_speed(&sigma_z()), 2.0 * SQRT_2) < 1e-15);
        assert_eq!(drift_speed(&Mat::zeros(2, 2)), 0.0);
        assert!(rel(drift_speed(&diag(&[1.0, 0.0, -1.0])), 12f64.sqrt()) < 1e-15);
    }

    #[test]
    fn diameter_examples() {
        assert!(rel(diameter(GroupKind::So(2)).unwrap(), SQRT_2 * PI) < 1e-15);
        assert!(rel(diameter(GroupKind::So(3)).unwrap(), 2.0 * PI) < 1e-15);
        assert!(rel(diameter(GroupKind::SuPq(2, 3)).unwrap(), PI * 10f64.sqrt()) < 1e-15);
        assert!(matches!(diameter(GroupKind::FullSu(3)), Err(QslError::NoTabulatedDiameter(_))));
        assert!(matches!(diameter(GroupKind::Other), Err(QslError::NoTabulatedDiameter(_))));
    }

    #[test]
    fn qsl_bound_examples() {
        let sys = ControlSystem::new(sigma_z(), vec![sigma_x()]).unwrap();
        let r = qsl_bound(&sys, GroupKind::So(2)).unwrap();
        assert!(rel(r.bound_theorem, PI / 2.0) < 1e-12);
        let gm = gell_mann();
        let so3 = vec![gm[1].clone(), gm[4].clone(), gm[6].clone()];
        let sys = ControlSystem::new(diag(&[1.0, 0.0, -1.0]), so3.clone()).unwrap();
        let r = qsl_bound(&sys, GroupKind::So(3)).unwrap();
        assert!(rel(r.bound_theorem, PI / 3f64.sqrt()) < 1e-12);
        let sys = ControlSystem::new(su5_drift(), vec![diag(&[3.0, 3.0, -2.0, -2.0, -2.0])]).unwrap();
        let r = qsl_bound(&sys, GroupKind::SuPq(2, 3)).unwrap();
        assert!(rel(r.bound_theorem, PI / 34f64.sqrt()) < 1e-12);
        let zero = ControlSystem::new(Mat::zeros(3, 3), so3).unwrap();
        assert!(matches!(qsl_bound(&zero, GroupKind::So(3)), Err(QslError::ZeroDrift)));
        assert!(matches!(qsl_bound(&sys, GroupKind::So(3)), Err(QslError::GroupParameters(_))));
    }

    #[test]
    fn published_examples() {
        let v = published_bound(GroupKind::So(3), 3, 2.0).unwrap();
        assert!(rel(v, PI / 3f64.sqrt()) < 1e-14);
        let v = published_bound(GroupKind::SuPq(2, 3), 5, 34.0).unwrap();
        assert!(rel(v, PI / 34f64.sqrt()) < 1e-14);
        let v = published_bound(GroupKind::Sp(2), 4, 4.0).unwrap();
        assert!(rel(v, PI / 2.0) < 1e-14);
    }

    #[test]
    fn single_control_examples() {
        assert!(rel(single_control_bound(&sigma_z()).unwrap(), PI / 2.0) < 1e-14);
        assert!(rel(single_control_bound(&su5_drift()).unwrap(), PI / 34f64.sqrt()) < 1e-14);
        assert!(rel(single_control_bound(&diag(&[1.0, -1.0, 1.0, -1.0])).unwrap(), PI / 2.0) < 1e-14);
        assert!(matches!(single_control_bound(&Mat::zeros(4, 4)), Err(QslError::ZeroDrift)));
    }

    #[test]
    fn theorem_matches_published_for_so_and_supq() {
        for n in 2..=12 {
            for tr in [0.5, 2.0, 34.0] {
                let speed = (2.0 * n as f64 * tr).sqrt();
                let so = diameter(GroupKind::So(n)).unwrap() / speed;
                assert!(rel(published_bound(GroupKind::So(n), n, tr).unwrap(), so) < 1e-12);
                for p in 1..=n / 2 {
                    let kind = GroupKind::SuPq(p, n - p);
                    let th = diameter(kind).unwrap() / speed;
                    assert!(rel(published_bound(kind, n, tr).unwrap(), th) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn sp_ratio_is_constant() {
        for m in 2..=6 {
            let n = 2 * m;
            let ratios: Vec<f64> = [0.3, 4.0, 17.0]
                .iter()
                .map(|&tr| {
                    let th = diameter(GroupKind::Sp(m)).unwrap() / (2.0 * n as f64 * tr).sqrt();
                    published_bound(GroupKind::Sp(m), n, tr).unwrap() / th
                })
                .collect();
            for r in &ratios {
                assert!(rel(*r, SQRT_2) < 1e-12, "m={m}: {r}");
            }
        }
    }

    #[test]
    fn supq_diameter_increases_with_p() {
        for n in 2..=12 {
            let d: Vec<f64> = (1..=n / 2).map(|p| diameter(GroupKind::SuPq(p, n - p)).unwrap()).collect();
            assert!(d.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn bound_scales_inversely_with_drift() {
        let gm = gell_mann();
        let so3 = vec![gm[1].clone(), gm[4].clone(), gm[6].clone()];
        let base = ControlSystem::new(diag(&[1.0, 0.0, -1.0]), so3.clone()).unwrap();
        let b0 = qsl_bound(&base, GroupKind::So(3)).unwrap().bound_theorem;
        for s in [0.1, 2.0, 7.5] {
            let sys = ControlSystem::new(diag(&[s, 0.0, -s]), so3.clone()).unwrap();
            assert!(rel(qsl_bound(&sys, GroupKind::So(3)).unwrap().bound_theorem, b0 / s) < 1e-12);
        }
    }
}
