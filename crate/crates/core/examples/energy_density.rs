//! Oseen-Frank energy density and its derivatives at a point, then on a field.

use nematic_kit::coefficients::FrankCoefficients;
use nematic_kit::energy::{dpsi_dd, dpsi_dgradd, null_lagrangian_residual, psi, psi_tilde, total_energy};
use nematic_kit::fields::{DirectorField, Grid, Mat3, Vec3, VectorField};

fn main() -> nematic_kit::error::Result<()> {
    let c = FrankCoefficients::new(1.3, 0.8, 1.0, 0.6)?;
    let d = Vec3::new(0.0, 0.6, 0.8);
    // a gradient with d^T G = 0, as for any unit field
    let p = Mat3::identity() - d * d.transpose();
    let g = p * Mat3::new(0.3, -0.1, 0.2, 0.0, 0.4, -0.2, 0.1, 0.1, 0.5);

    let b = psi(&d, &g, &c)?;
    println!("splay {:.6} twist {:.6} bend {:.6} saddle-splay {:.6}", b.splay, b.twist, b.bend, b.saddle_splay);
    println!("psi = {:.6}, psi~ = {:.6}", b.total, psi_tilde(&d, &g, &c)?);
    println!("dpsi/dG =\n{:.4}", dpsi_dgradd(&d, &g, &c)?);
    println!("dpsi~/dd = {:.4}", dpsi_dd(&d, &g, &c)?.transpose());

    // a pure twist: d = (cos z, sin z, 0) carries energy k2 per unit volume
    let grid = Grid::periodic_cube(32)?;
    let twist = VectorField::from_fn(&grid, |x| Vec3::new(x[2].cos(), x[2].sin(), 0.0));
    let vol = (2.0 * std::f64::consts::PI).powi(3);
    println!("twist cell: int psi / volume = {:.6} (k2 = {})", total_energy(&twist, &c) / vol, c.k2);

    // the saddle-splay term integrates to zero; its discrete residual shrinks with h^2
    for n in [16, 32] {
        let grid = Grid::periodic_cube(n)?;
        let d = DirectorField::normalized(VectorField::from_fn(&grid, |x| {
            Vec3::new(0.2 * x[1].sin(), 0.2 * x[2].cos(), 1.0 + 0.2 * x[0].sin())
        }))?;
        println!("{n}^3: null Lagrangian residual {:.3e}", null_lagrangian_residual(&d)?);
    }
    Ok(())
}
