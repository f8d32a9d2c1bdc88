//! Seeded random draws shared by scans, checks and tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::coefficients::{FrankCoefficients, LeslieCoefficients};
use crate::fields::Vec3;

pub const DEFAULT_SEED: u64 = 42;

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point on the unit sphere.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::new(rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal));
        let n = v.norm();
        if n > 1e-6 {
            return v / n;
        }
    }
}

pub fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Log-uniform draw on `[lo, hi]`.
fn log_uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// Frank constants satisfying the positivity assumption, spread over two decades.
pub fn frank_valid<R: Rng + ?Sized>(rng: &mut R) -> FrankCoefficients {
    loop {
        let k1 = log_uniform(rng, 0.1, 10.0);
        let k2 = log_uniform(rng, 0.1, 10.0);
        let k3 = log_uniform(rng, 0.1, 10.0);
        if 9.0 * k3 <= k1 {
            continue;
        }
        let alpha = rng.gen_range(0.05..=1.0) * k1.min(k2).min(k3);
        return FrankCoefficients::new(k1, k2, k3, alpha).expect("positive draws");
    }
}

/// Viscous constants satisfying (P); the coupling constants take either sign.
pub fn leslie_valid<R: Rng + ?Sized>(rng: &mut R) -> LeslieCoefficients {
    LeslieCoefficients {
        mu_s: log_uniform(rng, 0.1, 5.0),
        mu_v: rng.gen_range(-2.0..2.0),
        mu_d: rng.gen_range(-2.0..2.0),
        mu_p: rng.gen_range(-2.0..2.0),
        mu_l: rng.gen_range(0.0..3.0),
        mu_0: rng.gen_range(0.0..3.0),
        mu_b: 0.0,
        gamma: log_uniform(rng, 0.2, 5.0),
        rho: log_uniform(rng, 0.2, 5.0),
    }
}
