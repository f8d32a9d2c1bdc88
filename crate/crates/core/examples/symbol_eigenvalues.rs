//! Eigenvalues of the elastic symbol against the closed form.

use nematic_kit::coefficients::FrankCoefficients;
use nematic_kit::fields::Vec3;
use nematic_kit::symbols::symmetric_eigs;

fn main() -> nematic_kit::error::Result<()> {
    let c = FrankCoefficients::new(4.0, 1.0, 1.0, 0.5)?;
    let d = Vec3::z();
    println!("{:>6} {:>12} {:>12} {:>12}   closed form, sorted", "z", "l0", "l1", "l2");
    for i in 0..=8 {
        let z = i as f64 / 8.0;
        let xi = Vec3::new((1.0 - z * z).sqrt(), 0.0, z);
        let r = symmetric_eigs(&xi, &d, &c)?;
        let cf = r.closed_form.sorted();
        println!(
            "{z:>6.3} {:>12.6} {:>12.6} {:>12.6}   {:.6} {:.6} {:.6} {:?}",
            r.symmetric[0], r.symmetric[1], r.symmetric[2], cf[0], cf[1], cf[2], r.closed_form.case
        );
    }
    // the smallest eigenvalue over all directions, (9 k3 - k1) / 4, sits at z^2 = 3/4
    let z = 0.75f64.sqrt();
    let r = symmetric_eigs(&Vec3::new(0.5, 0.0, z), &d, &c)?;
    println!("z^2 = 3/4: {:.12} vs {:.12}", r.symmetric[0], (9.0 * c.k3 - c.k1) / 4.0);
    Ok(())
}
