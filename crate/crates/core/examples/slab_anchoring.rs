//! A slab with nonlinear anchoring walls: compatibility check, then relaxation.

use nematic_kit::coefficients::{FrankCoefficients, LeslieCoefficients};
use nematic_kit::ericksen::{boundary_apply, compatibility_check, COMPATIBILITY_TOL};
use nematic_kit::fields::{Grid, VectorField};
use nematic_kit::simulator::{slab_director, BcMode, SimulationConfig, Simulator};

fn main() -> nematic_kit::error::Result<()> {
    let frank = FrankCoefficients::new(1.3, 0.8, 1.0, 0.6)?;
    let grid = Grid::slab([16, 16, 17], [6.0, 6.0, 2.0], 2)?;
    let d0 = slab_director(&grid, 0.4)?;
    let c = compatibility_check(&d0, &frank, COMPATIBILITY_TOL)?;
    println!("compatibility residual {:.2e} (tolerance {:.0e})", c.residual, c.tolerance);

    let mut cfg = SimulationConfig::new(grid, frank, LeslieCoefficients::newtonian(1.0));
    cfg.bc_mode = BcMode::SlabNonlinear;
    let sim = Simulator::new(cfg)?;
    let mut s = sim.initial_state(VectorField::zeros(&grid), d0.into_field())?;
    for k in 1..=150 {
        s = sim.step(&s)?;
        if k % 30 == 0 {
            let b = boundary_apply(&nematic_kit::fields::DirectorField::normalized(s.d.field().clone())?, &frank)?;
            println!(
                "t = {:6.3}  energy {:9.5}  drift {:.2e}  max |B(d)| on walls {:.2e}",
                s.t,
                s.diagnostics.energy,
                s.diagnostics.norm_drift,
                b.max_abs()
            );
        }
    }
    Ok(())
}
