//! Standard control algebras, their complements and the dimension counts that
//! decide tightness.

use qsl::lie::{orthogonal_complement, standard_basis, verify_cartan, GroupKind};

fn main() -> qsl::Result<()> {
    println!("{:<20} {:>6} {:>6} {:>14} {:>10}", "quotient", "dim k", "dim p", "1+dim k-dim p", "residual");
    for n in 2..=6 {
        let mut kinds = vec![GroupKind::So(n)];
        if n % 2 == 0 {
            kinds.push(GroupKind::Sp(n / 2));
        }
        kinds.extend((1..=n / 2).map(|p| GroupKind::SuPq(p, n - p)));
        for kind in kinds {
            let k = standard_basis(kind)?;
            let p = orthogonal_complement(&k);
            let check = verify_cartan(&k, &p, 1e-9);
            let (dk, dp) = (k.len() as i64, p.len() as i64);
            println!(
                "{:<20} {dk:>6} {dp:>6} {:>14} {:>10.1e}",
                format!("SU({n})/{kind}"),
                1 + dk - dp,
                check.max_residual
            );
        }
    }
    Ok(())
}
