//! The qubit with a sigma_z drift and one sigma_x control: the speed limit is pi/2.

use qsl::lie::{ControlSystem, GroupKind};
use qsl::matrix::{sigma_x, sigma_z};
use qsl::speed_limit::qsl_bound;

fn main() -> qsl::Result<()> {
    let sys = ControlSystem::new(sigma_z(), vec![sigma_x()])?;
    let report = qsl_bound(&sys, GroupKind::So(2))?;
    println!("drift speed   {:.12}", report.drift_speed);
    println!("diameter      {:.12}", report.diameter);
    println!("speed limit   {:.12}", report.bound_theorem);
    println!("pi/2          {:.12}", std::f64::consts::FRAC_PI_2);
    Ok(())
}
