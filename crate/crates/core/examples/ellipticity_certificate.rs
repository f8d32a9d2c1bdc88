//! Strong-ellipticity certificates and a scan across k1.

use nematic_kit::coefficients::FrankCoefficients;
use nematic_kit::symbols::{certify_strong_ellipticity, ellipticity_scan, AxisRange, SamplerConfig, ScanSpec};

fn main() -> nematic_kit::error::Result<()> {
    let sampler = SamplerConfig::default();
    for (k1, k2, k3) in [(1.3, 0.8, 1.0), (8.5, 1.0, 1.0), (10.0, 1.0, 1.0)] {
        let c = FrankCoefficients::new(k1, k2, k3, 0.5 * k2.min(k3))?;
        let cert = certify_strong_ellipticity(&c, &sampler)?;
        println!(
            "k = ({k1}, {k2}, {k3}): c_min {:+.6} at z = {:.4} ({} samples) -> {}",
            cert.c_min,
            cert.witness.z,
            cert.samples,
            if cert.passes { "elliptic" } else { "NOT elliptic" }
        );
    }

    let spec = ScanSpec {
        k1: AxisRange { min: 6.0, max: 12.0, n: 13 },
        k2: AxisRange::fixed(1.0),
        k3: AxisRange::fixed(1.0),
        alpha_fraction: 0.5,
    };
    let small = SamplerConfig { grid: 32, random: 1000, ..sampler };
    for row in ellipticity_scan(&spec, &small)? {
        println!("k1 = {:5.2}: c_min {:+.4} {}", row.k1, row.c_min, if row.pass { "" } else { "<- fails" });
    }
    Ok(())
}
