//! Lie closure of a few systems and what the controls alone generate.

use qsl::lie::{classify_control_group, is_controllable, ControlSystem, DEFAULT_RANK_TOL};
use qsl::matrix::{diag, gell_mann, sigma_x, sigma_z};

fn main() -> qsl::Result<()> {
    let gm = gell_mann();
    let systems = [
        ("qubit, x control", ControlSystem::new(sigma_z(), vec![sigma_x()])?),
        ("qubit, z control", ControlSystem::new(sigma_z(), vec![sigma_z()])?),
        (
            "qutrit, so(3) controls",
            ControlSystem::new(diag(&[1.0, 0.0, -1.0]), vec![gm[1].clone(), gm[4].clone(), gm[6].clone()])?,
        ),
        ("qutrit, one control", ControlSystem::new(diag(&[1.0, 0.0, -1.0]), vec![gm[0].clone()])?),
    ];
    for (name, sys) in &systems {
        let n = sys.n();
        let dynamical = sys.dynamical_algebra(DEFAULT_RANK_TOL)?;
        let k = sys.control_algebra(DEFAULT_RANK_TOL)?;
        println!(
            "{name:<24} dim {:>2} of {:>2}  controllable: {:<5}  controls generate {} (dim {})",
            dynamical.len(),
            n * n - 1,
            is_controllable(sys, DEFAULT_RANK_TOL)?,
            classify_control_group(&k, 1e-9),
            k.len()
        );
    }
    Ok(())
}
