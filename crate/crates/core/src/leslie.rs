//! Kinematics and stresses.
//!
//! Gradients follow the crate convention `(grad u)_ij = d_j u_i`, so
//! `D = (grad u + grad u^T)/2`, `V = (grad u - grad u^T)/2` and `(V d)_i`
//! is the rotation of `d` by the vorticity.
//!
//! The Ericksen stress is `S_E = -rho G^T (d psi / d G)` with `G = grad d`,
//! i.e. `(S_E)_ij = -rho d_i d_k . dpsi/d(d_j d_k)`. This is the form for which
//! `S_E : grad u` balances the transport of elastic energy; in the isotropic
//! case it is `-2 rho grad d (.) grad d` with entries `sum_k d_i d_k d_j d_k`.

use serde::Serialize;

use crate::coefficients::{ClassicalLeslieCoefficients, FrankCoefficients, LeslieCoefficients};
use crate::energy::{dpsi_dgradd_unchecked, UNIT_TOL};
use crate::error::{Error, Result};
use crate::fields::{Mat3, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KinematicState {
    /// Rate of strain, symmetric.
    pub d: Mat3,
    /// Vorticity tensor, skew.
    pub v: Mat3,
    /// Co-rotational derivative `D_t d - V d`.
    pub n: Vec3,
}

fn check_unit(d: &Vec3) -> Result<()> {
    if !((d.norm() - 1.0).abs() <= UNIT_TOL) {
        return Err(Error::Domain(format!("director has norm {} (expected 1)", d.norm())));
    }
    Ok(())
}

pub fn kinematics(grad_u: &Mat3, d: &Vec3, material_dt_d: &Vec3) -> KinematicState {
    let dm = (grad_u + grad_u.transpose()) * 0.5;
    let v = (grad_u - grad_u.transpose()) * 0.5;
    KinematicState { d: dm, v, n: material_dt_d - v * d }
}

/// `g = lambda1 N + lambda2 D d`
pub fn transport_g(n: &Vec3, dm: &Mat3, d: &Vec3, lambda1: f64, lambda2: f64) -> Vec3 {
    n * lambda1 + dm * d * lambda2
}

/// Leslie stress in the classical `alpha` parameterization.
pub fn leslie_stress_classical(dm: &Mat3, n: &Vec3, d: &Vec3, a: &ClassicalLeslieCoefficients) -> Result<Mat3> {
    check_unit(d)?;
    let dd = dm * d;
    Ok(d * d.transpose() * (a.alpha1 * d.dot(&dd))
        + n * d.transpose() * a.alpha2
        + d * n.transpose() * a.alpha3
        + dm * a.alpha4
        + dd * d.transpose() * a.alpha5
        + d * dd.transpose() * a.alpha6)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StressBreakdown {
    pub newtonian: Mat3,
    pub ericksen: Mat3,
    pub stretch: Mat3,
    pub dissipative: Mat3,
    pub total: Mat3,
}

/// `n = mu_V V d + mu_D P_d D d - gamma D_t d`
pub fn director_flux(k: &KinematicState, d: &Vec3, material_dt_d: &Vec3, l: &LeslieCoefficients) -> Vec3 {
    let dd = k.d * d;
    k.v * d * l.mu_v + (dd - d * d.dot(&dd)) * l.mu_d - material_dt_d * l.gamma
}

/// `-rho G^T dpsi/dG`
pub fn ericksen_stress(d: &Vec3, g: &Mat3, c: &FrankCoefficients, rho: f64) -> Mat3 {
    -(g.transpose() * dpsi_dgradd_unchecked(d, g, c)) * rho
}

pub(crate) fn leslie_parts(k: &KinematicState, d: &Vec3, nvec: &Vec3, l: &LeslieCoefficients) -> (Mat3, Mat3) {
    let g = l.gamma;
    let stretch =
        nvec * d.transpose() * ((l.mu_d + l.mu_v) / (2.0 * g)) + d * nvec.transpose() * ((l.mu_d - l.mu_v) / (2.0 * g));
    let dd = k.d * d;
    let pdd = dd - d * d.dot(&dd);
    let diss = (nvec * d.transpose() + d * nvec.transpose()) * (l.mu_p / g)
        + (pdd * d.transpose() + d * pdd.transpose()) * ((g * l.mu_l + l.mu_p * l.mu_p) / (2.0 * g))
        + d * d.transpose() * (l.mu_0 * dd.dot(d));
    (stretch, diss)
}

pub fn stress_breakdown_mu(
    grad_u: &Mat3,
    d: &Vec3,
    grad_d: &Mat3,
    material_dt_d: &Vec3,
    l: &LeslieCoefficients,
    c: &FrankCoefficients,
) -> Result<StressBreakdown> {
    check_unit(d)?;
    let k = kinematics(grad_u, d, material_dt_d);
    let newtonian = k.d * (2.0 * l.mu_s) + Mat3::identity() * (l.mu_b * grad_u.trace());
    let ericksen = ericksen_stress(d, grad_d, c, l.rho);
    let nvec = director_flux(&k, d, material_dt_d, l);
    let (stretch, dissipative) = leslie_parts(&k, d, &nvec, l);
    Ok(StressBreakdown { newtonian, ericksen, stretch, dissipative, total: newtonian + ericksen + stretch + dissipative })
}

/// `S = S_N + S_E + S_L` in the `mu` parameterization.
pub fn stress_total_mu(
    grad_u: &Mat3,
    d: &Vec3,
    grad_d: &Mat3,
    material_dt_d: &Vec3,
    l: &LeslieCoefficients,
    c: &FrankCoefficients,
) -> Result<Mat3> {
    Ok(stress_breakdown_mu(grad_u, d, grad_d, material_dt_d, l, c)?.total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn classical(a: [f64; 6]) -> ClassicalLeslieCoefficients {
        ClassicalLeslieCoefficients {
            alpha1: a[0],
            alpha2: a[1],
            alpha3: a[2],
            alpha4: a[3],
            alpha5: a[4],
            alpha6: a[5],
            lambda1: 0.0,
            lambda2: 0.0,
        }
    }

    fn leslie_all() -> LeslieCoefficients {
        LeslieCoefficients {
            mu_s: 0.7,
            mu_v: 0.4,
            mu_d: -0.3,
            mu_p: 0.25,
            mu_l: 0.6,
            mu_0: 0.9,
            mu_b: 0.0,
            gamma: 1.3,
            rho: 1.1,
        }
    }

    #[test]
    fn kinematics_examples() {
        let m = Vec3::new(0.1, 0.2, 0.3);
        let d = Vec3::z();
        let k = kinematics(&Mat3::zeros(), &d, &m);
        assert_eq!((k.d, k.v, k.n), (Mat3::zeros(), Mat3::zeros(), m));
        let k = kinematics(&Mat3::identity(), &d, &m);
        assert_eq!((k.d, k.v), (Mat3::identity(), Mat3::zeros()));
        let w = Mat3::new(0.0, 1.0, -2.0, -1.0, 0.0, 0.5, 2.0, -0.5, 0.0);
        let k = kinematics(&w, &d, &m);
        assert_eq!(k.d, Mat3::zeros());
        assert_eq!(k.v, w);
        assert_eq!(k.n, m - w * d);
    }

    #[test]
    fn transport_examples() {
        let n = Vec3::new(1.0, 2.0, 3.0);
        let dm = Mat3::new(1.0, 2.0, 0.0, 2.0, 0.5, 1.0, 0.0, 1.0, -1.0);
        assert_eq!(transport_g(&n, &dm, &Vec3::x(), 0.0, 0.0), Vec3::zeros());
        assert_eq!(transport_g(&n, &Mat3::zeros(), &Vec3::x(), 1.5, 3.0), n * 1.5);
        assert_eq!(transport_g(&Vec3::zeros(), &Mat3::identity(), &Vec3::x(), 0.7, 2.0), Vec3::new(2.0, 0.0, 0.0));
    }

    #[test]
    fn classical_examples() {
        let dm = Mat3::new(1.0, 2.0, 0.0, 2.0, 0.5, 1.0, 0.0, 1.0, -1.0);
        let d = Vec3::new(0.0, 0.6, 0.8);
        let s = leslie_stress_classical(&dm, &Vec3::new(3.0, 1.0, 2.0), &d, &classical([0.0, 0.0, 0.0, 2.5, 0.0, 0.0]));
        assert_eq!(s.unwrap(), dm * 2.5);
        let s = leslie_stress_classical(&Mat3::zeros(), &Vec3::x(), &Vec3::z(), &classical([0.0, 1.0, 0.0, 0.0, 0.0, 0.0]));
        let mut e13 = Mat3::zeros();
        e13[(0, 2)] = 1.0;
        assert_eq!(s.unwrap(), e13);
        let s = leslie_stress_classical(&Mat3::identity(), &Vec3::zeros(), &d, &classical([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]));
        assert!((s.unwrap() - d * d.transpose()).amax() < 1e-15);
        assert!(leslie_stress_classical(&dm, &Vec3::x(), &Vec3::new(1.0, 1.0, 0.0), &classical([1.0; 6])).is_err());
    }

    #[test]
    fn newtonian_only() {
        let l = LeslieCoefficients::newtonian(0.8);
        let gu = Mat3::new(0.1, 0.4, -0.2, 0.3, 0.0, 0.5, -0.7, 0.2, -0.1);
        let s = stress_total_mu(&gu, &Vec3::y(), &Mat3::zeros(), &Vec3::new(0.3, 0.0, -0.2), &l, &FrankCoefficients::isotropic());
        let dm = (gu + gu.transpose()) * 0.5;
        assert!((s.unwrap() - dm * 1.6).amax() < 1e-15);
    }

    #[test]
    fn isotropic_ericksen_stress() {
        let d = Vec3::new(0.0, 0.6, 0.8);
        let g = Mat3::new(0.3, -0.2, 0.5, 0.1, 0.4, -0.6, 0.2, 0.7, 0.0);
        let s = ericksen_stress(&d, &g, &FrankCoefficients::isotropic(), 1.7);
        let mut oracle = Mat3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    oracle[(i, j)] -= 2.0 * 1.7 * g[(k, i)] * g[(k, j)];
                }
            }
        }
        assert!((s - oracle).amax() < 1e-14);
    }

    #[test]
    fn zero_flux_kills_flux_terms() {
        let l = leslie_all();
        let d = Vec3::new(0.48, 0.6, 0.64);
        let gu = Mat3::new(0.1, 0.4, -0.2, 0.3, 0.0, 0.5, -0.7, 0.2, -0.1);
        let k = kinematics(&gu, &d, &Vec3::zeros());
        let dd = k.d * d;
        let ddt = (k.v * d * l.mu_v + (dd - d * d.dot(&dd)) * l.mu_d) / l.gamma;
        let b = stress_breakdown_mu(&gu, &d, &Mat3::zeros(), &ddt, &l, &FrankCoefficients::isotropic()).unwrap();
        assert!(b.stretch.amax() < 1e-15);
        let pdd = dd - d * d.dot(&dd);
        let rest = (pdd * d.transpose() + d * pdd.transpose()) * ((l.gamma * l.mu_l + l.mu_p * l.mu_p) / (2.0 * l.gamma))
            + d * d.transpose() * (l.mu_0 * dd.dot(&d));
        assert!((b.dissipative - rest).amax() < 1e-15);
    }

    #[test]
    fn flux_only_oracle() {
        let l = LeslieCoefficients { mu_v: 0.0, mu_d: 0.0, mu_p: 0.0, mu_l: 0.0, mu_0: 0.0, ..leslie_all() };
        let d = Vec3::new(0.0, 0.6, 0.8);
        let gu = Mat3::new(0.1, 0.4, -0.2, 0.3, 0.0, 0.5, -0.7, 0.2, -0.1);
        let ddt = Vec3::new(0.2, -0.4, 0.3);
        let b = stress_breakdown_mu(&gu, &d, &Mat3::zeros(), &ddt, &l, &FrankCoefficients::isotropic()).unwrap();
        // every n-weight carries mu_D, mu_V or mu_P
        assert!(b.stretch.amax() < 1e-15 && b.dissipative.amax() < 1e-15);
        let l2 = LeslieCoefficients { mu_v: 0.5, mu_d: 0.3, ..l };
        let k = kinematics(&gu, &d, &ddt);
        let nvec = k.v * d * 0.5 + {
            let dd = k.d * d;
            (dd - d * d.dot(&dd)) * 0.3
        } - ddt * l.gamma;
        let mut oracle = Mat3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                oracle[(i, j)] = (0.8 * nvec[i] * d[j] + (-0.2) * d[i] * nvec[j]) / (2.0 * l.gamma);
            }
        }
        let b2 = stress_breakdown_mu(&gu, &d, &Mat3::zeros(), &ddt, &l2, &FrankCoefficients::isotropic()).unwrap();
        assert!((b2.stretch - oracle).amax() < 1e-15);
        // mu_P alone puts the symmetric n-pair in the dissipative part
        let l3 = LeslieCoefficients { mu_p: 0.4, ..l };
        let b3 = stress_breakdown_mu(&gu, &d, &Mat3::zeros(), &ddt, &l3, &FrankCoefficients::isotropic()).unwrap();
        let n3 = -ddt * l.gamma;
        let k3 = kinematics(&gu, &d, &ddt);
        let dd = k3.d * d;
        let pdd = dd - d * d.dot(&dd);
        let oracle3 = (n3 * d.transpose() + d * n3.transpose()) * (0.4 / l.gamma)
            + (pdd * d.transpose() + d * pdd.transpose()) * (0.16 / (2.0 * l.gamma));
        assert!((b3.dissipative - oracle3).amax() < 1e-15);
    }

    #[test]
    fn stretch_power_matches_flux() {
        // S_stretch : grad u = (mu_V n.Vd + mu_D n.Dd) / gamma
        let l = leslie_all();
        let d = Vec3::new(0.48, 0.6, 0.64);
        let gu = Mat3::new(0.1, 0.4, -0.2, 0.3, 0.0, 0.5, -0.7, 0.2, -0.1);
        let ddt = Vec3::new(0.2, -0.4, 0.3);
        let b = stress_breakdown_mu(&gu, &d, &Mat3::zeros(), &ddt, &l, &FrankCoefficients::isotropic()).unwrap();
        let k = kinematics(&gu, &d, &ddt);
        let nvec = director_flux(&k, &d, &ddt, &l);
        let power = b.stretch.component_mul(&gu).sum();
        let expect = (l.mu_v * nvec.dot(&(k.v * d)) + l.mu_d * nvec.dot(&(k.d * d))) / l.gamma;
        assert!((power - expect).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn symmetric_skew_split(g in proptest::array::uniform9(-5.0f64..5.0)) {
            let g = Mat3::from_row_slice(&g);
            let k = kinematics(&g, &Vec3::z(), &Vec3::zeros());
            prop_assert!((k.d - k.d.transpose()).amax() <= 1e-15);
            prop_assert!((k.v + k.v.transpose()).amax() <= 1e-15);
            prop_assert!((k.d + k.v - g).amax() <= 1e-15);
        }

        #[test]
        fn newtonian_part_is_linear(s in -3.0f64..3.0, g in proptest::array::uniform9(-2.0f64..2.0)) {
            let l = LeslieCoefficients { mu_b: 0.3, ..leslie_all() };
            let g = Mat3::from_row_slice(&g);
            let d = Vec3::new(0.48, 0.6, 0.64);
            let gd = Mat3::new(0.1, 0.0, 0.2, -0.3, 0.1, 0.0, 0.0, 0.4, -0.1);
            let ddt = Vec3::new(0.2, -0.4, 0.3);
            let c = FrankCoefficients::new(1.0, 0.7, 1.3, 0.5).unwrap();
            let b1 = stress_breakdown_mu(&g, &d, &gd, &ddt, &l, &c).unwrap();
            let bs = stress_breakdown_mu(&(g * s), &d, &gd, &ddt, &l, &c).unwrap();
            prop_assert!((bs.newtonian - b1.newtonian * s).amax() <= 1e-13);
            prop_assert!((bs.ericksen - b1.ericksen).amax() == 0.0);
        }
    }
}
