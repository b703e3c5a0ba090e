//! With one control the group it generates sits inside S(U(p) x U(q)), which
//! gives a bound that ignores the control entirely.

use qsl::matrix::{diag, sigma_z};
use qsl::speed_limit::single_control_bound;

fn main() -> qsl::Result<()> {
    println!("n = 2, sigma_z drift: {:.9}", single_control_bound(&sigma_z())?);
    for spectrum in [vec![1.0, -1.0, 1.0, -1.0], vec![3.0, 1.0, -1.0, -3.0], vec![1.0, 0.5, 0.0, -0.5, -1.0]] {
        println!("n = {}, drift diag{spectrum:?}: {:.9}", spectrum.len(), single_control_bound(&diag(&spectrum))?);
    }
    Ok(())
}
