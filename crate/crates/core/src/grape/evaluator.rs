//! Propagation and exact gradients for piecewise-constant schedules.
//!
//! Generic over the nalgebra dimension so that small systems run on
//! stack-allocated matrices; [`with_evaluator`] picks the dimension at runtime.

use nalgebra::{
    allocator::Allocator, DefaultAllocator, Dim, DimDiff, DimSub, Dyn, OMatrix, OVector, U1, U2, U3, U4, U5, U6,
};

use crate::lie::ControlSystem;
use crate::matrix::{Mat, C64};

/// What the descent loop needs from an objective.
pub(crate) trait Objective {
    type Point;

    fn dim(&self) -> usize;
    fn evaluate(&self, x: &[f64]) -> Self::Point;
    fn error_of(&self, point: &Self::Point) -> f64;
    fn gradient_of(&self, point: &Self::Point, grad: &mut [f64]);
}

/// Runs `f` with an evaluator specialised to the system dimension.
pub(crate) fn with_evaluator<R>(
    sys: &ControlSystem,
    target: &Mat,
    horizon: f64,
    slots: usize,
    f: impl EvaluatorFn<R>,
) -> R {
    match sys.n() {
        2 => f.call(&Evaluator::<U2>::new(sys, target, horizon, slots)),
        3 => f.call(&Evaluator::<U3>::new(sys, target, horizon, slots)),
        4 => f.call(&Evaluator::<U4>::new(sys, target, horizon, slots)),
        5 => f.call(&Evaluator::<U5>::new(sys, target, horizon, slots)),
        6 => f.call(&Evaluator::<U6>::new(sys, target, horizon, slots)),
        _ => f.call(&Evaluator::<Dyn>::new(sys, target, horizon, slots)),
    }
}

/// A closure generic over the objective type.
pub(crate) trait EvaluatorFn<R> {
    fn call<O: Objective + Propagates>(self, ev: &O) -> R;
}

/// Access to the propagator of a point, as a dynamic matrix.
pub(crate) trait Propagates: Objective {
    fn propagator(&self, point: &Self::Point) -> Mat;
}

pub(crate) struct Evaluator<D: Dim>
where
    DefaultAllocator: Allocator<D, D>,
{
    dim: D,
    drift: OMatrix<C64, D, D>,
    controls: Vec<OMatrix<C64, D, D>>,
    target_adj: OMatrix<C64, D, D>,
    slots: usize,
    tau: f64,
}

pub(crate) struct Slot<D: Dim>
where
    DefaultAllocator: Allocator<D, D> + Allocator<D>,
{
    eigenvalues: OVector<f64, D>,
    eigenvectors: OMatrix<C64, D, D>,
    unitary: OMatrix<C64, D, D>,
}

/// Slot decompositions and the resulting propagator at one point.
pub(crate) struct Trajectory<D: Dim>
where
    DefaultAllocator: Allocator<D, D> + Allocator<D>,
{
    slots: Vec<Slot<D>>,
    propagator: OMatrix<C64, D, D>,
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

fn trace_of_product<D: Dim>(a: &OMatrix<C64, D, D>, b: &OMatrix<C64, D, D>) -> C64
where
    DefaultAllocator: Allocator<D, D>,
{
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

impl<D> Evaluator<D>
where
    D: Dim + DimSub<U1>,
    DefaultAllocator: Allocator<D, D> + Allocator<D> + Allocator<DimDiff<D, U1>>,
{
    pub(crate) fn new(sys: &ControlSystem, target: &Mat, horizon: f64, slots: usize) -> Self {
        let dim = D::from_usize(sys.n());
        let convert = |m: &Mat| OMatrix::<C64, D, D>::from_fn_generic(dim, dim, |r, c| m[(r, c)]);
        Self {
            dim,
            drift: convert(sys.drift()),
            controls: sys.controls().iter().map(convert).collect(),
            target_adj: convert(&target.adjoint()),
            slots,
            tau: horizon / slots as f64,
        }
    }

    fn identity(&self) -> OMatrix<C64, D, D> {
        OMatrix::<C64, D, D>::identity_generic(self.dim, self.dim)
    }

    fn slot(&self, x: &[f64], k: usize) -> Slot<D> {
        let mut h = self.drift.clone();
        for (j, hj) in self.controls.iter().enumerate() {
            let f = x[j * self.slots + k];
            if f != 0.0 {
                h.zip_apply(hj, |a, b| *a += b * f);
            }
        }
        let eig = h.symmetric_eigen();
        let v = eig.eigenvectors;
        let mut scaled = v.clone();
        for (col, &l) in eig.eigenvalues.iter().enumerate() {
            let ph = C64::from_polar(1.0, -l * self.tau);
            scaled.column_mut(col).iter_mut().for_each(|z| *z *= ph);
        }
        let unitary = scaled * v.adjoint();
        Slot { eigenvalues: eig.eigenvalues, eigenvectors: v, unitary }
    }
}

impl<D> Objective for Evaluator<D>
where
    D: Dim + DimSub<U1>,
    DefaultAllocator: Allocator<D, D> + Allocator<D> + Allocator<DimDiff<D, U1>>,
{
    type Point = Trajectory<D>;

    fn dim(&self) -> usize {
        self.controls.len() * self.slots
    }

    fn evaluate(&self, x: &[f64]) -> Trajectory<D> {
        let slots: Vec<Slot<D>> = (0..self.slots).map(|k| self.slot(x, k)).collect();
        let propagator = slots.iter().fold(self.identity(), |acc, s| &s.unitary * acc);
        Trajectory { slots, propagator }
    }

    fn error_of(&self, traj: &Trajectory<D>) -> f64 {
        let n = self.dim.value() as f64;
        1.0 - trace_of_product(&self.target_adj, &traj.propagator).norm() / n
    }

    /// Each slot exponential is differentiated through its spectral decomposition
    /// (divided differences of `exp(-i tau lambda)`), and the slot derivatives are
    /// chained with forward and backward partial products.
    fn gradient_of(&self, traj: &Trajectory<D>, grad: &mut [f64]) {
        let n = self.dim.value();
        let mut forward = Vec::with_capacity(self.slots + 1);
        forward.push(self.identity());
        for s in &traj.slots {
            let next = &s.unitary * forward.last().expect("non-empty");
            forward.push(next);
        }
        let z = trace_of_product(&self.target_adj, &traj.propagator);
        let abs = z.norm();
        let phase = if abs > 0.0 { z.conj() / abs } else { C64::ONE };
        let tau = self.tau;
        let scale = -1.0 / n as f64;

        // back = U_target^dagger U_{N-1} ... U_{k+1}
        let mut back = self.target_adj.clone();
        for k in (0..self.slots).rev() {
            let s = &traj.slots[k];
            let v = &s.eigenvectors;
            let lambda = &s.eigenvalues;
            let y = v.adjoint() * (&forward[k] * &back) * v;
            let zmat = OMatrix::<C64, D, D>::from_fn_generic(self.dim, self.dim, |a, b| {
                let mean = 0.5 * (lambda[a] + lambda[b]);
                let half_gap = 0.5 * tau * (lambda[a] - lambda[b]);
                let phi = C64::new(0.0, -tau) * C64::from_polar(sinc(half_gap), -tau * mean);
                phi * y[(b, a)]
            });
            let w = v.conjugate() * zmat * v.transpose();
            for (j, hj) in self.controls.iter().enumerate() {
                let dz: C64 = hj.iter().zip(w.iter()).map(|(h, w)| h * w).sum();
                grad[j * self.slots + k] = scale * (phase * dz).re;
            }
            back *= &s.unitary;
        }
    }
}

impl<D> Propagates for Evaluator<D>
where
    D: Dim + DimSub<U1>,
    DefaultAllocator: Allocator<D, D> + Allocator<D> + Allocator<DimDiff<D, U1>>,
{
    fn propagator(&self, traj: &Trajectory<D>) -> Mat {
        let p = &traj.propagator;
        Mat::from_fn(p.nrows(), p.ncols(), |r, c| p[(r, c)])
    }
}
