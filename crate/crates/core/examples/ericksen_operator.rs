//! The projected Ericksen operator on a periodic director field.

use nematic_kit::coefficients::FrankCoefficients;
use nematic_kit::ericksen::{cross_nabla_terms, ericksen_apply};
use nematic_kit::fields::{DirectorField, Grid, Vec3, VectorField};

fn main() -> nematic_kit::error::Result<()> {
    let c = FrankCoefficients::new(1.3, 0.8, 1.0, 0.6)?;
    for n in [16, 32, 64] {
        let grid = Grid::periodic_cube(n)?;
        let d = DirectorField::normalized(VectorField::from_fn(&grid, |x| {
            Vec3::new(0.3 * x[1].sin(), 0.3 * x[2].cos(), 1.0 + 0.3 * x[0].sin())
        }))?;
        let out = ericksen_apply(&d, &c)?;
        let (a, b) = cross_nabla_terms(&d)?;
        println!(
            "{n:>3}^3: max |E(d)| = {:.5}, max |E(d) . d| = {:.1e}, cross terms {:.4} / {:.4}",
            out.value.max_abs(),
            out.tangency_residual,
            a.max_abs(),
            b.max_abs()
        );
    }
    Ok(())
}
