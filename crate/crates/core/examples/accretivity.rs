//! Lower bounds of the coupled symbol's quadratic forms at random points.

use nematic_kit::sampling::{frank_valid, leslie_valid, rng};
use nematic_kit::symbols::{accretivity_check, random_symbol_point, schur_complement};

fn main() -> nematic_kit::error::Result<()> {
    let mut r = rng(7);
    println!("{:>10} {:>10} {:>12} {:>12} {:>12}", "|lambda|", "|xi|", "tangential", "Schur", "unrestricted");
    for _ in 0..8 {
        let (f, l) = (frank_valid(&mut r), leslie_valid(&mut r));
        let p = random_symbol_point(&mut r, f, l);
        let rep = accretivity_check(&p, 200, &mut r)?;
        println!(
            "{:>10.4} {:>10.4} {:>12.3e} {:>12.3e} {:>12.3e}",
            p.lambda.norm(),
            p.xi.norm(),
            rep.min_tangential,
            rep.min_schur,
            rep.min_full
        );
        let m = schur_complement(&p)?;
        assert!(m.iter().all(|z| z.is_finite()));
    }
    Ok(())
}
