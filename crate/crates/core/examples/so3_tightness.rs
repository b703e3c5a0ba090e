//! Two drifts for SU(3)/SO(3). A degenerate spectrum shrinks the set of
//! directions the drift can push in, and the bound stops being reachable.

use qsl::lie::{orthogonal_complement, standard_basis, ControlSystem, GroupKind};
use qsl::matrix::{diag, gell_mann};
use qsl::speed_limit::qsl_bound;
use qsl::tightness::{classify_tightness, DEGENERACY_TOL};

fn main() -> qsl::Result<()> {
    let gm = gell_mann();
    let controls = vec![gm[1].clone(), gm[4].clone(), gm[6].clone()];
    let kind = GroupKind::So(3);
    let k = standard_basis(kind)?;
    let p = orthogonal_complement(&k);
    for spectrum in [[1.0, 0.0, -1.0], [1.0, -0.5, -0.5]] {
        let sys = ControlSystem::new(diag(&spectrum), controls.clone())?;
        let bound = qsl_bound(&sys, kind)?.bound_theorem;
        let verdict = classify_tightness(&sys, kind, &k, &p, DEGENERACY_TOL)?;
        println!("drift diag{spectrum:?}: bound {bound:.6}, {}", verdict.status);
        for reason in &verdict.reasons {
            println!("    {reason}");
        }
    }
    Ok(())
}
