//! Stress tensor of a sheared nematic, split into its parts.

use nematic_kit::coefficients::{FrankCoefficients, LeslieCoefficients};
use nematic_kit::fields::{Mat3, Vec3};
use nematic_kit::leslie::{director_flux, kinematics, stress_breakdown_mu};

fn main() -> nematic_kit::error::Result<()> {
    let frank = FrankCoefficients::new(1.3, 0.8, 1.0, 0.6)?;
    let leslie = LeslieCoefficients {
        mu_s: 1.0,
        mu_v: 0.3,
        mu_d: -0.4,
        mu_p: 0.2,
        mu_l: 0.5,
        mu_0: 0.3,
        mu_b: 0.0,
        gamma: 1.0,
        rho: 1.0,
    };
    // simple shear u = (s y, 0, 0), director tilted in the shear plane
    let s = 0.5;
    let mut grad_u = Mat3::zeros();
    grad_u[(0, 1)] = s;
    let th: f64 = 0.3;
    let d = Vec3::new(th.cos(), th.sin(), 0.0);
    let grad_d = Mat3::zeros();
    let d_t = Vec3::zeros();

    let k = kinematics(&grad_u, &d, &d_t);
    println!("co-rotational derivative N = {:.4}", k.n.transpose());
    println!("director flux n = {:.4}", director_flux(&k, &d, &d_t, &leslie).transpose());

    let b = stress_breakdown_mu(&grad_u, &d, &grad_d, &d_t, &leslie, &frank)?;
    println!("newtonian{:.4}stretch{:.4}dissipative{:.4}total{:.4}", b.newtonian, b.stretch, b.dissipative, b.total);
    println!("shear stress S_xy = {:.6}, apparent viscosity {:.6}", b.total[(0, 1)], b.total[(0, 1)] / s);
    Ok(())
}
