//! SU(4)/Sp(2): the bound from the diameter and the drift speed, next to the
//! commonly quoted closed form, which is larger by sqrt(2).

use qsl::lie::{standard_basis, ControlSystem, GroupKind};
use qsl::matrix::{diag, I};
use qsl::speed_limit::qsl_bound;

fn main() -> qsl::Result<()> {
    let kind = GroupKind::Sp(2);
    let controls = standard_basis(kind)?.elements().iter().map(|x| x * (-I)).collect();
    let sys = ControlSystem::new(diag(&[1.0, -1.0, 1.0, -1.0]), controls)?;
    let r = qsl_bound(&sys, kind)?;
    println!("bound from the diameter  {:.9}", r.bound_theorem);
    println!("closed form              {:.9}", r.bound_published.unwrap_or(f64::NAN));
    println!("ratio                    {:.9}", r.published_ratio().unwrap_or(f64::NAN));
    Ok(())
}
