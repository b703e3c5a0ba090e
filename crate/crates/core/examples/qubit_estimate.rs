//! Numerical speed limit of the qubit from a handful of Haar targets.
//!
//! Each target is swept upward in time until a pulse reaches it; the largest
//! such time over the targets estimates the speed limit.

use qsl::grape::{estimate_qsl, uniform_grid, GrapeConfig};
use qsl::lie::ControlSystem;
use qsl::matrix::{sigma_x, sigma_z};

fn main() -> qsl::Result<()> {
    env_logger::init();
    let sys = ControlSystem::new(sigma_z(), vec![sigma_x()])?;
    let grid = uniform_grid(0.05, 2.0, 40)?;
    let cfg = GrapeConfig { restarts: 4, seed: 1, ..Default::default() };
    let est = estimate_qsl(&sys, 6, &grid, &cfg)?;
    for r in &est.records {
        let last = r.points.last().map_or(f64::NAN, |p| p.best_error);
        println!("target {}: min time {:?} (final error {last:.1e})", r.target_id, r.min_time);
    }
    println!("estimate {:?}, analytic limit {:.4}", est.estimate, std::f64::consts::FRAC_PI_2);
    Ok(())
}
