//! Checks Frank and Leslie constants against the model assumptions.

use nematic_kit::coefficients::{
    validate_consistency, validate_ericksen_inequalities, validate_frank, validate_leslie, FrankCoefficients,
    LeslieCoefficients,
};

fn main() -> nematic_kit::error::Result<()> {
    // 5CB-like ratios, nondimensionalized by k3
    let frank = FrankCoefficients::new(0.8, 0.45, 1.0, 0.3)?;
    print!("{}", validate_frank(&frank)?);
    print!("{}", validate_ericksen_inequalities(&frank)?);

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
    print!("{}", validate_leslie(&leslie)?);
    print!("{}", validate_consistency(&leslie, 3)?);

    // a strongly splay-dominated material fails both disjuncts
    let stiff = FrankCoefficients::new(10.0, 1.0, 1.0, 0.5)?;
    let report = validate_frank(&stiff)?;
    for c in report.failed_clauses() {
        println!("violated: {}", c.name);
    }
    Ok(())
}
