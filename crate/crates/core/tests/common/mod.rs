//! Random instances and property checks shared by the property suite and the
//! acceptance harness.

#![allow(dead_code)]

use nalgebra::DMatrix;
use qsl::grape::{gradient, haar_random_su, propagate, schedule_error, ControlSchedule};
use qsl::lie::{lie_closure, orthogonal_complement, standard_basis, verify_cartan, ControlSystem, GroupKind};
use qsl::matrix::{c, commutator, frobenius, identity, killing_inner, trace_of_product, LieBasis, Mat, C64, I};
use qsl::tightness::{dimension_criterion, so_degeneracy_analysis, DEGENERACY_TOL};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn normal<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn random_hermitian<R: Rng>(rng: &mut R, n: usize) -> Mat {
    let g = Mat::from_fn(n, n, |_, _| c(normal(rng), normal(rng)));
    (&g + g.adjoint()) * c(0.5, 0.0)
}

pub fn random_traceless_hermitian<R: Rng>(rng: &mut R, n: usize) -> Mat {
    let h = random_hermitian(rng, n);
    let t = h.trace() / n as f64;
    h - identity(n) * t
}

/// Random element of `span(basis)` as a Hermitian matrix `-i X`.
pub fn random_in_span<R: Rng>(rng: &mut R, basis: &LieBasis) -> Mat {
    let mut x = Mat::zeros(basis.dim(), basis.dim());
    for b in basis.elements() {
        x += b * c(normal(rng), 0.0);
    }
    x * (-I)
}

/// Real orthogonal matrix from the QR factorisation of a Gaussian matrix.
pub fn random_orthogonal<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| normal(rng)).qr().q()
}

/// Real symmetric traceless drift whose spectrum is drawn from a small set, so
/// that degeneracies are common.
pub fn degenerate_prone_drift<R: Rng>(rng: &mut R, n: usize) -> Mat {
    const LEVELS: [f64; 4] = [-1.0, 0.0, 0.5, 1.5];
    let spectrum: Vec<f64> = (0..n).map(|_| LEVELS[rng.random_range(0..LEVELS.len())]).collect();
    let mean = spectrum.iter().sum::<f64>() / n as f64;
    let d = DMatrix::from_fn(n, n, |r, col| if r == col { spectrum[r] - mean } else { 0.0 });
    let o = random_orthogonal(rng, n);
    let h = &o * d * o.transpose();
    Mat::from_fn(n, n, |r, col| c(h[(r, col)], 0.0))
}

/// Relative change of the Killing norm under `X -> U X U^dagger`.
pub fn killing_conjugation_defect(x: &Mat, u: &Mat) -> f64 {
    let y = u * x * u.adjoint();
    let a = killing_inner(x, x).unwrap();
    let b = killing_inner(&y, &y).unwrap();
    (a - b).abs() / a.abs().max(1e-300)
}

/// Closure of a superset contains the closure, and closing a closed set changes nothing.
pub fn closure_is_monotone_and_idempotent(gens: &[Mat], extra: &Mat, n: usize) -> Result<(), String> {
    let tol = 1e-10;
    let small = lie_closure(gens, n, tol).map_err(|e| e.to_string())?;
    let mut more = gens.to_vec();
    more.push(extra.clone());
    let big = lie_closure(&more, n, tol).map_err(|e| e.to_string())?;
    if let Some(x) = small.elements().iter().find(|x| !big.contains(x, 1e-8)) {
        return Err(format!("closure not monotone: element of norm {} missing", frobenius(x)));
    }
    let again = lie_closure(small.elements(), n, tol).map_err(|e| e.to_string())?;
    if !again.same_span(&small, 1e-8) {
        return Err(format!("closure not idempotent: {} vs {}", again.len(), small.len()));
    }
    Ok(())
}

/// All standard decompositions with `n <= max_n`.
pub fn standard_kinds(max_n: usize) -> Vec<GroupKind> {
    let mut kinds = Vec::new();
    for n in 2..=max_n {
        kinds.push(GroupKind::So(n));
        if n % 2 == 0 {
            kinds.push(GroupKind::Sp(n / 2));
        }
        for p in 1..=n / 2 {
            kinds.push(GroupKind::SuPq(p, n - p));
        }
    }
    kinds
}

pub fn cartan_residual(kind: GroupKind) -> f64 {
    let k = standard_basis(kind).unwrap();
    let p = orthogonal_complement(&k);
    verify_cartan(&k, &p, 1e-9).max_residual
}

/// Rank of `A -> [A, i H]` on `k`, from raw matrix entries.
pub fn brute_force_orbit_dim(drift: &Mat, k: &LieBasis) -> usize {
    let ih = drift * I;
    let cols: Vec<Vec<f64>> =
        k.elements().iter().map(|b| commutator(b, &ih).iter().flat_map(|z| [z.re, z.im]).collect()).collect();
    let m = DMatrix::from_fn(cols[0].len(), cols.len(), |r, col| cols[col][r]);
    let sv = m.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > 1e-9 * max.max(1.0)).count()
}

/// Orbit dimension from the degeneracy count against the brute-force rank, for `so(n)`.
pub fn so_orbit_formula_matches(drift: &Mat) -> Result<(), String> {
    let n = drift.nrows();
    let k = standard_basis(GroupKind::So(n)).unwrap();
    let formula = so_degeneracy_analysis(drift, DEGENERACY_TOL).unwrap().orbit_dim;
    let brute = brute_force_orbit_dim(drift, &k);
    if formula == brute {
        Ok(())
    } else {
        Err(format!("n={n}: degeneracy formula {formula} vs brute-force rank {brute}"))
    }
}

/// Random standard kind with a random drift in `p`; returns `(lhs, rhs)` of the dimension inequality.
pub fn random_dimension_inequality<R: Rng>(rng: &mut R, max_n: usize) -> (GroupKind, i64, i64) {
    // Sp(1) is all of SU(2): the quotient is a point and the inequality is vacuous.
    let kinds: Vec<GroupKind> = standard_kinds(max_n).into_iter().filter(|k| *k != GroupKind::Sp(1)).collect();
    let kind = kinds[rng.random_range(0..kinds.len())];
    let k = standard_basis(kind).unwrap();
    let p = orthogonal_complement(&k);
    // Sparse drifts hit degenerate orbits more often than dense ones.
    let mut drift = Mat::zeros(k.dim(), k.dim());
    for b in p.elements() {
        if rng.random_bool(0.4) {
            drift += b * c(normal(rng), 0.0);
        }
    }
    let drift = drift * (-I);
    let d = dimension_criterion(&drift, &k, &p).unwrap();
    (kind, d.lhs, d.rhs)
}

/// `(dim k, dim p, 1 + dim k - dim p)` from the closed forms.
pub fn table_dimensions(kind: GroupKind) -> (i64, i64, i64) {
    match kind {
        GroupKind::So(n) => {
            let n = n as i64;
            (n * (n - 1) / 2, (n * n + n - 2) / 2, 2 - n)
        }
        GroupKind::Sp(m) => {
            let n = 2 * m as i64;
            (n / 2 * (n + 1), (n * n - n - 2) / 2, n + 2)
        }
        GroupKind::SuPq(p, q) => {
            let (p, q) = (p as i64, q as i64);
            (p * p + q * q - 1, 2 * p * q, (p - q) * (p - q))
        }
        _ => unreachable!("only symmetric quotients are tabulated"),
    }
}

pub fn computed_dimensions(kind: GroupKind) -> (i64, i64, i64) {
    let k = standard_basis(kind).unwrap();
    let p = orthogonal_complement(&k);
    let (dk, dp) = (k.len() as i64, p.len() as i64);
    (dk, dp, 1 + dk - dp)
}

/// Random system with `controls` random Hermitian controls.
pub fn random_system<R: Rng>(rng: &mut R, n: usize, controls: usize) -> ControlSystem {
    let drift = random_traceless_hermitian(rng, n);
    let cs = (0..controls).map(|_| random_traceless_hermitian(rng, n)).collect();
    ControlSystem::new(drift, cs).unwrap()
}

pub fn random_schedule<R: Rng>(
    rng: &mut R,
    controls: usize,
    slots: usize,
    horizon: f64,
    scale: f64,
) -> ControlSchedule {
    ControlSchedule::new(horizon, DMatrix::from_fn(controls, slots, |_, _| scale * normal(rng))).unwrap()
}

/// Largest componentwise relative gap between the exact gradient and central
/// differences with step `1e-6`. Components are compared against
/// `max(|fd|, 1e-3 * max |fd|)` so that near-zero entries do not dominate.
pub fn gradient_fd_gap(sys: &ControlSystem, sched: &ControlSchedule, target: &Mat) -> f64 {
    let h = 1e-6;
    let g = gradient(sys, sched, target).unwrap();
    let (m, slots) = g.shape();
    let mut fd = DMatrix::zeros(m, slots);
    for j in 0..m {
        for k in 0..slots {
            let mut plus = sched.amplitudes().clone();
            plus[(j, k)] += h;
            let mut minus = sched.amplitudes().clone();
            minus[(j, k)] -= h;
            let ep = schedule_error(sys, &ControlSchedule::new(sched.horizon(), plus).unwrap(), target).unwrap();
            let em = schedule_error(sys, &ControlSchedule::new(sched.horizon(), minus).unwrap(), target).unwrap();
            fd[(j, k)] = (ep - em) / (2.0 * h);
        }
    }
    let floor = 1e-3 * fd.amax();
    g.iter().zip(fd.iter()).map(|(a, b)| (a - b).abs() / b.abs().max(floor).max(1e-300)).fold(0.0, f64::max)
}

pub fn unitarity_defect(u: &Mat) -> f64 {
    frobenius(&(u.adjoint() * u - identity(u.nrows())))
}

pub fn propagate_defect(sys: &ControlSystem, sched: &ControlSchedule) -> f64 {
    unitarity_defect(&propagate(sys, sched).unwrap())
}

pub fn haar(n: usize, seed: u64) -> Mat {
    haar_random_su(n, seed)
}

pub fn scale(m: &Mat, s: f64) -> Mat {
    m * C64::new(s, 0.0)
}

/// Geodesic distance from the identity coset to `K u` in `SU(n)/SO(n)`, in units
/// of drift time, minimised over the central phases that leave the fidelity
/// unchanged. With real orthogonal controls no schedule reaches `u` faster.
pub fn so_coset_time(u: &Mat, drift: &Mat) -> f64 {
    let n = u.nrows();
    let tr = trace_of_product(drift, drift).re;
    let mut best = f64::INFINITY;
    for k in 0..n {
        let phase = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64);
        let v = u * phase;
        let w = v.transpose() * &v;
        // W is normal: a generic Hermitian combination of its parts shares its eigenvectors.
        let re = (&w + w.adjoint()) * c(0.5, 0.0);
        let im = (&w - w.adjoint()) * c(0.0, -0.5);
        let eig = (re + im * c(0.3719, 0.0)).symmetric_eigen();
        let mut theta: Vec<f64> = (0..n)
            .map(|j| {
                let x = eig.eigenvectors.column(j);
                (x.adjoint() * &w * x)[(0, 0)].arg()
            })
            .collect();
        theta.sort_by(|a, b| b.total_cmp(a));
        let wraps = (theta.iter().sum::<f64>() / (2.0 * std::f64::consts::PI)).round() as i64;
        // Moving the largest (or smallest) phases by one turn restores a traceless logarithm at least cost.
        if wraps > 0 {
            theta.iter_mut().take(wraps as usize).for_each(|t| *t -= 2.0 * std::f64::consts::PI);
        } else {
            theta.iter_mut().rev().take((-wraps) as usize).for_each(|t| *t += 2.0 * std::f64::consts::PI);
        }
        best = best.min(theta.iter().map(|t| t * t).sum::<f64>());
    }
    best.sqrt() / (2.0 * tr.sqrt())
}
