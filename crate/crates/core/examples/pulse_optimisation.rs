//! Optimise a pulse for one Haar-random qutrit target at a fixed duration.

use qsl::grape::{fidelity, optimize, propagate, target_unitary, GrapeConfig};
use qsl::lie::ControlSystem;
use qsl::matrix::{diag, gell_mann};

fn main() -> qsl::Result<()> {
    let gm = gell_mann();
    let sys = ControlSystem::new(diag(&[1.0, 0.0, -1.0]), vec![gm[1].clone(), gm[4].clone(), gm[6].clone()])?;
    let target = target_unitary(3, 42, 0);
    let cfg = GrapeConfig { restarts: 4, ..Default::default() };
    for horizon in [0.5, 1.0, 1.9] {
        let out = optimize(&sys, &target, horizon, &cfg)?;
        let check = 1.0 - fidelity(&propagate(&sys, &out.schedule)?, &target);
        println!(
            "T = {horizon:.2}: error {:.3e} (recomputed {check:.3e}), converged {}, {} attempt(s), peak amplitude {:.1}",
            out.error,
            out.converged,
            out.attempts,
            out.schedule.amplitudes().amax()
        );
    }
    Ok(())
}
