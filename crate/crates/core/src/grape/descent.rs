//! Steepest descent on the fidelity error with Armijo backtracking.

use super::evaluator::Objective;
use super::GrapeConfig;

pub(crate) struct Attempt {
    pub(crate) x: Vec<f64>,
    pub(crate) error: f64,
    pub(crate) iterations: usize,
}

fn clamp(x: &mut [f64], limit: Option<f64>) {
    if let Some(c) = limit {
        x.iter_mut().for_each(|v| *v = v.clamp(-c, c));
    }
}

/// Longest run of halvings tried before a line search gives up.
const MAX_BACKTRACKS: usize = 60;

/// One descent run from `x`.
///
/// Stops at the cutoff, at the iteration cap, when the relative improvement over
/// the stall window drops below the configured threshold, or when no step along
/// the negative gradient decreases the error.
pub(crate) fn descend<O: Objective>(ev: &O, mut x: Vec<f64>, cfg: &GrapeConfig) -> Attempt {
    clamp(&mut x, cfg.amplitude_clamp);
    let dim = ev.dim();
    debug_assert_eq!(dim, x.len());
    let mut g = vec![0.0; dim];
    let start = ev.evaluate(&x);
    ev.gradient_of(&start, &mut g);
    let mut err = ev.error_of(&start);
    let mut trail = vec![err];
    let mut step_guess = cfg.initial_step;
    let mut iterations = 0;
    while iterations < cfg.max_iterations && err > cfg.cutoff {
        let slope = -g.iter().map(|v| v * v).sum::<f64>();
        if slope == 0.0 {
            break;
        }
        let mut step = step_guess;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let mut trial: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - step * gi).collect();
            clamp(&mut trial, cfg.amplitude_clamp);
            let point = ev.evaluate(&trial);
            let e = ev.error_of(&point);
            if e <= err + cfg.armijo_c1 * step * slope {
                accepted = Some((trial, point, e));
                break;
            }
            step *= cfg.backtrack_factor;
        }
        let Some((next, point, e_next)) = accepted else { break };
        // Grow the step only when the previous one was accepted outright.
        step_guess = if step == step_guess { 2.0 * step } else { step };
        ev.gradient_of(&point, &mut g);
        x = next;
        err = e_next;
        iterations += 1;
        trail.push(err);
        if trail.len() > cfg.stall_window {
            let old = trail[trail.len() - 1 - cfg.stall_window];
            if old - err < cfg.stall_rel_improvement * old {
                break;
            }
        }
    }
    Attempt { x, error: err, iterations }
}
