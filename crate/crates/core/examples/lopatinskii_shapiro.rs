//! Lopatinskii-Shapiro check for the anchoring condition on a half space.

use nematic_kit::coefficients::{FrankCoefficients, LeslieCoefficients};
use nematic_kit::fields::Vec3;
use nematic_kit::lopatinskii::{director_ls_check, isotropic_decay, ls_sweep, HalfLineProblem, LsKind, TestSetSpec};
use num_complex::Complex64;

fn main() -> nematic_kit::error::Result<()> {
    let leslie = LeslieCoefficients::newtonian(1.0);

    // isotropic case: the boundary determinant is (2 k3 |omega|)^3
    let iso = FrankCoefficients::isotropic();
    let p = HalfLineProblem::new(Complex64::new(0.3, 0.2), Vec3::new(0.6, 0.0, 0.0), Vec3::z(), Vec3::x(), iso, leslie)?;
    let rep = director_ls_check(&p)?;
    let expect = (2.0 * iso.k3 * isotropic_decay(&p).norm()).powi(3);
    println!("isotropic: det {:.10} vs {:.10}, stable dim {}", rep.lopatinskii_det_modulus, expect, rep.stable_dimension);

    // a sweep over a small test set, both for the director and the coupled problem
    let frank = FrankCoefficients::new(1.3, 0.8, 1.0, 0.6)?;
    let spec = TestSetSpec { n_xi: 6, n_d: 6, ..TestSetSpec::default() };
    let points = spec.points();
    for kind in [LsKind::Director, LsKind::Coupled] {
        let rows = ls_sweep(&points, &frank, &leslie, kind);
        let worst = rows.iter().map(|r| r.min_sv).fold(f64::INFINITY, f64::min);
        let passed = rows.iter().filter(|r| r.pass).count();
        println!("{kind:?}: {passed}/{} points pass, smallest boundary singular value {worst:.4}", rows.len());
    }
    Ok(())
}
