//! Piecewise-constant pulse optimisation (GRAPE) and the numerical speed-limit
//! estimate built on top of it.
//!
//! A schedule splits the horizon `T` into `N` equal slots with constant control
//! amplitudes. The propagator is the ordered product of the slot exponentials,
//! and the objective is the phase-insensitive fidelity error
//! `1 - |Tr(U_target^dagger U(T))| / n`. Gradients are exact: each slot
//! exponential is differentiated through its spectral decomposition.
//!
//! For a given target the horizon is swept upward over a grid until an
//! optimisation run reaches the cutoff; the speed-limit estimate is the largest
//! such minimal time over a sample of Haar-random targets.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QslError, Result};
use crate::lie::ControlSystem;
use crate::matrix::{identity, trace_of_product, Mat, C64};

mod descent;
mod evaluator;

use descent::{descend, Attempt};
use evaluator::{with_evaluator, EvaluatorFn, Objective, Propagates};

/// Piecewise-constant control amplitudes over a horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSchedule {
    horizon: f64,
    /// `m x N`: row `j` holds `f_j` on each slot.
    amplitudes: DMatrix<f64>,
}

impl ControlSchedule {
    pub fn new(horizon: f64, amplitudes: DMatrix<f64>) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(QslError::Invalid(format!("horizon must be positive, got {horizon}")));
        }
        if amplitudes.ncols() == 0 {
            return Err(QslError::Invalid("schedule needs at least one slot".into()));
        }
        if amplitudes.iter().any(|a| !a.is_finite()) {
            return Err(QslError::NonFinite);
        }
        Ok(Self { horizon, amplitudes })
    }

    pub fn zeros(horizon: f64, controls: usize, slots: usize) -> Result<Self> {
        Self::new(horizon, DMatrix::zeros(controls, slots))
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn slots(&self) -> usize {
        self.amplitudes.ncols()
    }

    pub fn slot_width(&self) -> f64 {
        self.horizon / self.slots() as f64
    }

    pub fn amplitudes(&self) -> &DMatrix<f64> {
        &self.amplitudes
    }

    /// Same pulse shape over a different horizon and slot count (nearest slot).
    pub fn resampled(&self, horizon: f64, slots: usize) -> Result<Self> {
        let old = self.slots();
        let m = self.amplitudes.nrows();
        let amps = DMatrix::from_fn(m, slots, |j, k| {
            let src = ((k as f64 + 0.5) * old as f64 / slots as f64).floor() as usize;
            self.amplitudes[(j, src.min(old - 1))]
        });
        Self::new(horizon, amps)
    }

    fn from_flat(horizon: f64, controls: usize, slots: usize, x: &[f64]) -> Self {
        Self { horizon, amplitudes: DMatrix::from_fn(controls, slots, |j, k| x[j * slots + k]) }
    }

    fn to_flat(&self) -> Vec<f64> {
        let (m, n) = self.amplitudes.shape();
        (0..m).flat_map(|j| (0..n).map(move |k| (j, k))).map(|(j, k)| self.amplitudes[(j, k)]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrapeConfig {
    pub slots: usize,
    pub restarts: usize,
    pub max_iterations: usize,
    /// Fidelity-error cutoff for calling a target reached.
    pub cutoff: f64,
    /// Standard deviation of the random initial amplitudes.
    pub init_scale: f64,
    /// First trial step of the line search; later searches start from twice the
    /// last step when it was accepted without backtracking, otherwise from that step.
    pub initial_step: f64,
    /// Step reduction per backtracking trial.
    pub backtrack_factor: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo_c1: f64,
    /// Stop a restart when the error improved by less than `stall_rel_improvement`
    /// (relative) over the last `stall_window` iterations.
    pub stall_window: usize,
    pub stall_rel_improvement: f64,
    pub amplitude_clamp: Option<f64>,
    /// Seed each grid point's first attempt from the previous grid point's best schedule.
    pub warm_start: bool,
    /// Skip remaining restarts once one of them reaches the cutoff.
    pub stop_on_convergence: bool,
    /// Keep optimising past the first converged grid point during a sweep.
    pub sweep_full_grid: bool,
    pub seed: u64,
}

impl Default for GrapeConfig {
    fn default() -> Self {
        Self {
            slots: 100,
            restarts: 20,
            max_iterations: 1000,
            cutoff: 1e-7,
            init_scale: 1.0,
            initial_step: 1.0,
            backtrack_factor: 0.5,
            armijo_c1: 1e-4,
            stall_window: 50,
            stall_rel_improvement: 1e-12,
            amplitude_clamp: None,
            warm_start: true,
            stop_on_convergence: true,
            sweep_full_grid: false,
            seed: 0,
        }
    }
}

impl GrapeConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(QslError::Invalid(format!("invalid GRAPE configuration: {what}")));
        if self.slots == 0 || self.restarts == 0 || self.max_iterations == 0 {
            return bad("slots, restarts and iterations must be positive");
        }
        if !(self.cutoff > 0.0 && self.cutoff < 1.0) {
            return bad("cutoff must lie in (0, 1)");
        }
        if !(self.init_scale >= 0.0) || !(self.initial_step > 0.0) {
            return bad("scales must be positive");
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return bad("backtrack factor must lie in (0, 1)");
        }
        if self.stall_window == 0 {
            return bad("stall window must be positive");
        }
        if matches!(self.amplitude_clamp, Some(c) if !(c > 0.0)) {
            return bad("amplitude clamp must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GrapeOutcome {
    /// Best fidelity error `1 - F` over all attempts.
    pub error: f64,
    pub schedule: ControlSchedule,
    pub converged: bool,
    /// Iterations of the attempt that produced `schedule`.
    pub iterations: usize,
    /// Fresh restart that produced `schedule`; `None` for the warm start.
    pub restart: Option<usize>,
    /// Number of attempts actually run.
    pub attempts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub horizon: f64,
    pub best_error: f64,
    pub converged: bool,
}

/// Result of sweeping one target over the time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub target_id: usize,
    pub grid: Vec<f64>,
    /// One entry per grid point actually optimised, in grid order.
    pub points: Vec<SweepPoint>,
    /// Smallest grid time whose best error is within the cutoff.
    pub min_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QslEstimate {
    /// Largest per-target minimal time; `None` when some target never converged on the grid.
    pub estimate: Option<f64>,
    pub records: Vec<SweepRecord>,
}

/// Derives an independent stream seed from the master seed and task coordinates.
pub fn stream_seed(master: u64, parts: &[u64]) -> u64 {
    fn splitmix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    parts.iter().fold(splitmix(master), |h, &p| splitmix(h ^ splitmix(p)))
}

const DOMAIN_TARGET: u64 = 0x7461_7267;
const DOMAIN_RESTART: u64 = 0x7273_7472;

/// Haar-random element of `SU(n)`.
///
/// A complex Ginibre matrix is QR-factorised, the phases of `R`'s diagonal are
/// moved into `Q` (which makes `Q` Haar on `U(n)`), and the result is divided by
/// the principal `n`-th root of its determinant.
pub fn haar_random_su(n: usize, seed: u64) -> Mat {
    assert!(n >= 1, "dimension must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let g = Mat::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * scale, im * scale)
    });
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for col in 0..n {
        let d = r[(col, col)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::ONE };
        for row in 0..n {
            q[(row, col)] *= phase;
        }
    }
    let det = q.determinant();
    let root = C64::from_polar(1.0, -det.arg() / n as f64);
    q * root
}

/// `|Tr(U_target^dagger U)| / n`.
pub fn fidelity(u: &Mat, target: &Mat) -> f64 {
    let n = u.nrows() as f64;
    (trace_of_product(&target.adjoint(), u).norm() / n).min(1.0)
}

/// `U(T) = prod_{k=N..1} exp(-i (H_d + sum_j f_{j,k} H_j) T/N)`, slot 1 applied first.
pub fn propagate(sys: &ControlSystem, sched: &ControlSchedule) -> Result<Mat> {
    check_schedule(sys, sched)?;
    struct Run<'x>(&'x [f64]);
    impl EvaluatorFn<Mat> for Run<'_> {
        fn call<O: Objective + Propagates>(self, ev: &O) -> Mat {
            ev.propagator(&ev.evaluate(self.0))
        }
    }
    let x = sched.to_flat();
    Ok(with_evaluator(sys, &identity(sys.n()), sched.horizon(), sched.slots(), Run(&x)))
}

/// Fidelity error and its gradient for a flattened schedule.
struct ErrorAndGradient<'x>(&'x [f64]);

impl EvaluatorFn<(f64, Vec<f64>)> for ErrorAndGradient<'_> {
    fn call<O: Objective + Propagates>(self, ev: &O) -> (f64, Vec<f64>) {
        let point = ev.evaluate(self.0);
        let mut g = vec![0.0; ev.dim()];
        ev.gradient_of(&point, &mut g);
        (ev.error_of(&point), g)
    }
}

/// `d(1 - F)/d f_{j,k}` as an `m x N` matrix.
pub fn gradient(sys: &ControlSystem, sched: &ControlSchedule, target: &Mat) -> Result<DMatrix<f64>> {
    check_schedule(sys, sched)?;
    check_target(sys, target)?;
    let x = sched.to_flat();
    let (_, g) = with_evaluator(sys, target, sched.horizon(), sched.slots(), ErrorAndGradient(&x));
    Ok(DMatrix::from_fn(sys.controls().len(), sched.slots(), |j, k| g[j * sched.slots() + k]))
}

/// Fidelity error `1 - F` of a schedule against a target.
pub fn schedule_error(sys: &ControlSystem, sched: &ControlSchedule, target: &Mat) -> Result<f64> {
    check_schedule(sys, sched)?;
    check_target(sys, target)?;
    let x = sched.to_flat();
    Ok(with_evaluator(sys, target, sched.horizon(), sched.slots(), ErrorAndGradient(&x)).0)
}

fn check_schedule(sys: &ControlSystem, sched: &ControlSchedule) -> Result<()> {
    if sched.amplitudes().nrows() != sys.controls().len() {
        return Err(QslError::DimensionMismatch { expected: sys.controls().len(), found: sched.amplitudes().nrows() });
    }
    Ok(())
}

fn check_target(sys: &ControlSystem, target: &Mat) -> Result<()> {
    if target.nrows() != sys.n() || target.ncols() != sys.n() {
        return Err(QslError::DimensionMismatch { expected: sys.n(), found: target.nrows() });
    }
    Ok(())
}

/// Multi-start optimisation of one target at one horizon.
pub fn optimize(sys: &ControlSystem, target: &Mat, horizon: f64, cfg: &GrapeConfig) -> Result<GrapeOutcome> {
    optimize_stream(sys, target, horizon, cfg, (0, 0), None)
}

/// As [`optimize`], drawing restart seeds from the stream `(target_id, grid_index)`
/// and trying `warm` (resampled to the slot count) before the fresh restarts.
pub fn optimize_stream(
    sys: &ControlSystem,
    target: &Mat,
    horizon: f64,
    cfg: &GrapeConfig,
    stream: (u64, u64),
    warm: Option<&ControlSchedule>,
) -> Result<GrapeOutcome> {
    cfg.validate()?;
    check_target(sys, target)?;
    if !(horizon > 0.0) {
        return Err(QslError::Invalid(format!("horizon must be positive, got {horizon}")));
    }
    let m = sys.controls().len();
    let mut starts: Vec<(Option<usize>, Vec<f64>)> = Vec::new();
    if let Some(w) = warm {
        if w.amplitudes().nrows() != m {
            return Err(QslError::DimensionMismatch { expected: m, found: w.amplitudes().nrows() });
        }
        starts.push((None, w.resampled(horizon, cfg.slots)?.to_flat()));
    }
    let run = MultiStart { cfg, stream, starts, controls: m };
    let (attempt, restart, attempts) = with_evaluator(sys, target, horizon, cfg.slots, run);
    Ok(GrapeOutcome {
        error: attempt.error.clamp(0.0, 1.0),
        converged: attempt.error <= cfg.cutoff,
        schedule: ControlSchedule::from_flat(horizon, m, cfg.slots, &attempt.x),
        iterations: attempt.iterations,
        restart,
        attempts,
    })
}

/// Warm start (if any) followed by seeded fresh restarts, keeping the best.
struct MultiStart<'c> {
    cfg: &'c GrapeConfig,
    stream: (u64, u64),
    starts: Vec<(Option<usize>, Vec<f64>)>,
    controls: usize,
}

impl EvaluatorFn<(Attempt, Option<usize>, usize)> for MultiStart<'_> {
    fn call<O: Objective + Propagates>(self, ev: &O) -> (Attempt, Option<usize>, usize) {
        let MultiStart { cfg, stream, starts, controls } = self;
        let fresh = (0..cfg.restarts).map(|r| {
            let seed = stream_seed(cfg.seed, &[DOMAIN_RESTART, stream.0, stream.1, r as u64]);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<f64> =
                (0..controls * cfg.slots).map(|_| cfg.init_scale * rng.sample::<f64, _>(StandardNormal)).collect();
            (Some(r), x)
        });
        let mut best: Option<(Attempt, Option<usize>)> = None;
        let mut attempts = 0;
        for (label, x0) in starts.into_iter().chain(fresh) {
            let attempt = descend(ev, x0, cfg);
            attempts += 1;
            if best.as_ref().is_none_or(|(b, _)| attempt.error < b.error) {
                best = Some((attempt, label));
            }
            if cfg.stop_on_convergence && best.as_ref().is_some_and(|(b, _)| b.error <= cfg.cutoff) {
                break;
            }
        }
        let (attempt, label) = best.expect("at least one attempt");
        (attempt, label, attempts)
    }
}

/// `n` evenly spaced points from `tmin` to `tmax` inclusive.
pub fn uniform_grid(tmin: f64, tmax: f64, points: usize) -> Result<Vec<f64>> {
    if !(tmin > 0.0 && tmax >= tmin) || points == 0 {
        return Err(QslError::Invalid(format!("bad time grid [{tmin}, {tmax}] with {points} points")));
    }
    if points == 1 {
        return Ok(vec![tmin]);
    }
    let span = tmax - tmin;
    // Rounded so that e.g. 0.1 + 7 * 0.1 prints as 0.8.
    let round = |t: f64| (t * 1e12).round() / 1e12;
    Ok((0..points).map(|i| round(tmin + span * i as f64 / (points - 1) as f64)).collect())
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid[0] <= 0.0 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(QslError::Invalid("time grid must be positive and strictly ascending".into()));
    }
    Ok(())
}

/// Sweeps the horizon upward over `grid` until the target is reached.
pub fn min_time_for_target(
    sys: &ControlSystem,
    target: &Mat,
    target_id: usize,
    grid: &[f64],
    cfg: &GrapeConfig,
) -> Result<SweepRecord> {
    check_grid(grid)?;
    let mut points = Vec::new();
    let mut min_time = None;
    let mut previous: Option<ControlSchedule> = None;
    for (idx, &t) in grid.iter().enumerate() {
        let warm = if cfg.warm_start { previous.as_ref() } else { None };
        let out = optimize_stream(sys, target, t, cfg, (target_id as u64, idx as u64), warm)?;
        log::debug!("target {target_id} T={t:.4}: error {:.3e} after {} attempt(s)", out.error, out.attempts);
        points.push(SweepPoint { horizon: t, best_error: out.error, converged: out.converged });
        if out.converged && min_time.is_none() {
            min_time = Some(t);
            if !cfg.sweep_full_grid {
                break;
            }
        }
        previous = Some(out.schedule);
    }
    Ok(SweepRecord { target_id, grid: grid.to_vec(), points, min_time })
}

/// Haar-random target `id` for a master seed.
pub fn target_unitary(n: usize, master_seed: u64, id: usize) -> Mat {
    haar_random_su(n, stream_seed(master_seed, &[DOMAIN_TARGET, id as u64]))
}

/// Numerical speed limit over `num_targets` Haar-random targets.
///
/// Targets are independent tasks and run on the current rayon pool; the result
/// does not depend on the number of threads.
pub fn estimate_qsl(sys: &ControlSystem, num_targets: usize, grid: &[f64], cfg: &GrapeConfig) -> Result<QslEstimate> {
    let targets: Vec<Mat> = (0..num_targets).map(|id| target_unitary(sys.n(), cfg.seed, id)).collect();
    estimate_qsl_for_targets(sys, &targets, grid, cfg)
}

/// As [`estimate_qsl`] with explicit targets; target ids are their indices.
pub fn estimate_qsl_for_targets(
    sys: &ControlSystem,
    targets: &[Mat],
    grid: &[f64],
    cfg: &GrapeConfig,
) -> Result<QslEstimate> {
    if targets.is_empty() {
        return Err(QslError::Invalid("at least one target is required".into()));
    }
    cfg.validate()?;
    check_grid(grid)?;
    let records = targets
        .par_iter()
        .enumerate()
        .map(|(id, u)| min_time_for_target(sys, u, id, grid, cfg))
        .collect::<Result<Vec<_>>>()?;
    let estimate = records.iter().map(|r| r.min_time).try_fold(0.0f64, |acc, t| t.map(|t| acc.max(t)));
    Ok(QslEstimate { estimate, records })
}
