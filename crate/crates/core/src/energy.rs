//! Oseen-Frank energy density and its derivatives.
//!
//! With `G = grad d` (so `div d = tr G`):
//!
//! ```text
//! psi       = k1 (div d)^2 + k2 (d . curl d)^2 + k3 |d x curl d|^2
//!             + (k2 + k4) [tr(G^2) - (div d)^2]
//! psi_tilde = k1 (div d)^2 + k3 |curl d|^2 + (k2 - k3) (d . curl d)^2
//! ```
//!
//! The two agree up to the saddle-splay null Lagrangian when `|d| = 1`.
//! `dpsi_dgradd` is the full matrix derivative (needed on walls); `dpsi_dd`
//! is taken from `psi_tilde` and is only meaningful on the unit sphere.

use serde::Serialize;

use crate::coefficients::FrankCoefficients;
use crate::error::{Error, Result};
use crate::fields::{curl_of_gradient, divergence, grad_div, gradient, DirectorField, Mat3, Vec3, VectorField};

/// Tolerance on `||d| - 1|` for pointwise evaluations.
pub const UNIT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyDensityBreakdown {
    /// `(div d)^2`
    pub splay: f64,
    /// `(d . curl d)^2`
    pub twist: f64,
    /// `|d x curl d|^2`
    pub bend: f64,
    /// `tr(G^2) - (div d)^2`
    pub saddle_splay: f64,
    pub total: f64,
}

fn check_unit(d: &Vec3) -> Result<()> {
    let e = (d.norm() - 1.0).abs();
    if !(e <= UNIT_TOL) {
        return Err(Error::Domain(format!("director has norm {} (expected 1)", d.norm())));
    }
    Ok(())
}

/// Skew matrix with `D(d) v = d x v`; its divergence is `-curl d`.
pub fn skew(d: &Vec3) -> Mat3 {
    Mat3::new(0.0, -d[2], d[1], d[2], 0.0, -d[0], -d[1], d[0], 0.0)
}

pub(crate) fn breakdown(d: &Vec3, g: &Mat3, c: &FrankCoefficients) -> EnergyDensityBreakdown {
    let div = g.trace();
    let cu = curl_of_gradient(g);
    let splay = div * div;
    let twist = d.dot(&cu).powi(2);
    let bend = d.cross(&cu).norm_squared();
    let saddle_splay = (g * g).trace() - splay;
    let total = c.k1 * splay + c.k2 * twist + c.k3 * bend + (c.k2 + c.k4) * saddle_splay;
    EnergyDensityBreakdown { splay, twist, bend, saddle_splay, total }
}

pub fn psi(d: &Vec3, g: &Mat3, c: &FrankCoefficients) -> Result<EnergyDensityBreakdown> {
    check_unit(d)?;
    Ok(breakdown(d, g, c))
}

pub(crate) fn psi_tilde_unchecked(d: &Vec3, g: &Mat3, c: &FrankCoefficients) -> f64 {
    let div = g.trace();
    let cu = curl_of_gradient(g);
    c.k1 * div * div + c.k3 * cu.norm_squared() + (c.k2 - c.k3) * d.dot(&cu).powi(2)
}

pub fn psi_tilde(d: &Vec3, g: &Mat3, c: &FrankCoefficients) -> Result<f64> {
    check_unit(d)?;
    Ok(psi_tilde_unchecked(d, g, c))
}

pub(crate) fn dpsi_dgradd_unchecked(d: &Vec3, g: &Mat3, c: &FrankCoefficients) -> Mat3 {
    let div = g.trace();
    let cu = curl_of_gradient(g);
    let id = Mat3::identity();
    id * (2.0 * c.k1 * div)
        + (g - g.transpose()) * (2.0 * c.k3)
        + skew(d) * (2.0 * (c.k2 - c.k3) * d.dot(&cu))
        + (g.transpose() - id * div) * (2.0 * (c.k2 + c.k4))
}

/// `d psi / d(grad d)`
pub fn dpsi_dgradd(d: &Vec3, g: &Mat3, c: &FrankCoefficients) -> Result<Mat3> {
    check_unit(d)?;
    Ok(dpsi_dgradd_unchecked(d, g, c))
}

pub(crate) fn dpsi_dd_unchecked(d: &Vec3, g: &Mat3, c: &FrankCoefficients) -> Vec3 {
    let cu = curl_of_gradient(g);
    cu * (2.0 * (c.k2 - c.k3) * d.dot(&cu))
}

/// `grad_d psi_tilde` at fixed `grad d`.
pub fn dpsi_dd(d: &Vec3, g: &Mat3, c: &FrankCoefficients) -> Result<Vec3> {
    check_unit(d)?;
    Ok(dpsi_dd_unchecked(d, g, c))
}

/// Max-norm of the discrete `div(2 G^T - 2 div d I)`.
///
/// The first part is the tensor divergence of `2 G^T`; the second is
/// `2 grad(div d)` with compact pure second derivatives, the form used by the
/// Ericksen operator. The difference is the discretization error between the
/// two routes and vanishes at second order.
pub fn null_lagrangian_residual(d: &DirectorField) -> Result<f64> {
    if !d.grid().is_periodic() {
        return Err(Error::Domain("null Lagrangian residual needs a periodic grid".into()));
    }
    let g = gradient(d.field());
    let a = divergence(&g.transpose());
    let b = grad_div(d.field());
    Ok(2.0 * a.lincomb(1.0, &b, -1.0).max_abs())
}

/// Discrete `int psi dx` (trapezoid weights on walls); no unit check.
pub fn total_energy(d: &VectorField, c: &FrankCoefficients) -> f64 {
    let g = gradient(d);
    let grid = d.grid();
    d.values()
        .iter()
        .zip(g.values())
        .enumerate()
        .map(|(i, (dv, gv))| breakdown(dv, gv, c).total * grid.weight(i))
        .sum()
}
