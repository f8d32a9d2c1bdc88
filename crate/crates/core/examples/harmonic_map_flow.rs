//! Gradient flow of the Oseen-Frank energy without fluid motion.

use nematic_kit::coefficients::{FrankCoefficients, LeslieCoefficients};
use nematic_kit::fields::{Grid, VectorField};
use nematic_kit::simulator::{perturbed_director, run, DirectorEvolution, SimulationConfig};

fn main() -> nematic_kit::error::Result<()> {
    let grid = Grid::periodic_cube(16)?;
    let mut cfg = SimulationConfig::new(grid, FrankCoefficients::new(1.3, 0.8, 1.0, 0.6)?, LeslieCoefficients::newtonian(1.0));
    cfg.director_evolution = DirectorEvolution::GradientFlowOnly;
    cfg.dt = 0.5 * cfg.stability_bound();
    cfg.t_end = 100.0 * cfg.dt;
    cfg.diagnostic_every = 10;

    let out = run(&cfg, VectorField::zeros(&grid), perturbed_director(&grid, 0.5).into_field())?;
    for g in &out.log {
        println!("t = {:7.4}  energy {:10.6}  norm drift {:.2e}", g.t, g.energy, g.norm_drift);
    }
    Ok(())
}
