//! Projected Ericksen operator and the nonlinear boundary operator.
//!
//! For a unit director the elastic part of the director equation is
//!
//! ```text
//! P_d div(d psi / d grad d)
//!   = 2k3 P_d Lap d + 2(k1-k3) P_d grad div d
//!     + 2(k2-k3) [ ((d x grad) (x) curl d) . d + ((d x grad) (x) d) . curl d
//!                  - (d . curl d) P_d curl d ]
//! ```
//!
//! where `P_d = I - d (x) d` and `((d x grad) (x) a) . b = d x ((grad a)^T b)`.
//! The harmonic-map part is evaluated as `P_d Lap d`, which equals
//! `Lap d + |grad d|^2 d` on unit fields and keeps the discrete output
//! tangent to `d`.
//!
//! The boundary operator on a flat wall with outward normal `nu` is
//!
//! ```text
//! B(d) = 2k3 G nu + 2 P_d (k1 div d I - k3 G^T) nu + 2(k2-k3)(d . curl d)(d x nu)
//!        + 2(k2+k4) P_d (G^T - div d I) nu
//! ```

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64 as C64;

use crate::coefficients::FrankCoefficients;
use crate::error::{Error, Result};
use crate::fields::{
    curl_of_gradient, grad_div, gradient, laplacian, unit_defect, wall_nodes, DirectorField, Mat3, Vec3, VectorField,
};

pub const FIELD_UNIT_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct ProjectedOperatorOutput {
    pub value: VectorField,
    /// `max |value . d|`
    pub tangency_residual: f64,
}

fn check_field(d: &DirectorField) -> Result<()> {
    let e = unit_defect(d.field());
    if !(e <= FIELD_UNIT_TOL) {
        return Err(Error::Domain(format!("director field deviates from unit length by {e:e}")));
    }
    Ok(())
}

#[inline]
pub(crate) fn project(d: &Vec3, v: &Vec3) -> Vec3 {
    v - d * d.dot(v)
}

/// The two cross-gradient terms, `d x ((grad curl d)^T d)` and `d x ((grad d)^T curl d)`.
pub(crate) fn cross_terms_unchecked(d: &VectorField) -> (VectorField, VectorField) {
    let g = gradient(d);
    let cu = g.map(|m| curl_of_gradient(&m));
    let gc = gradient(&cu);
    let dv = d.values();
    let t1 = (0..dv.len()).map(|i| dv[i].cross(&(gc.values()[i].transpose() * dv[i]))).collect();
    let t2 = (0..dv.len()).map(|i| dv[i].cross(&(g.values()[i].transpose() * cu.values()[i]))).collect();
    (VectorField::from_vec(d.grid(), t1).unwrap(), VectorField::from_vec(d.grid(), t2).unwrap())
}

pub fn cross_nabla_terms(d: &DirectorField) -> Result<(VectorField, VectorField)> {
    check_field(d)?;
    Ok(cross_terms_unchecked(d.field()))
}

/// Ericksen operator without the unit check (used on drifting simulation states).
pub(crate) fn ericksen_unchecked(d: &VectorField, c: &FrankCoefficients) -> VectorField {
    let g = gradient(d);
    let lap = laplacian(d);
    let gd = grad_div(d);
    let (t1, t2) = cross_terms_unchecked(d);
    let dv = d.values();
    let out = (0..dv.len())
        .map(|i| {
            let di = &dv[i];
            let cu = curl_of_gradient(&g.values()[i]);
            project(di, &lap.values()[i]) * (2.0 * c.k3)
                + project(di, &gd.values()[i]) * (2.0 * (c.k1 - c.k3))
                + (t1.values()[i] + t2.values()[i] - project(di, &cu) * di.dot(&cu)) * (2.0 * (c.k2 - c.k3))
        })
        .collect();
    VectorField::from_vec(d.grid(), out).unwrap()
}

pub fn ericksen_apply(d: &DirectorField, c: &FrankCoefficients) -> Result<ProjectedOperatorOutput> {
    check_field(d)?;
    let value = ericksen_unchecked(d.field(), c);
    let tangency_residual = value.dot(d.field()).max_abs();
    Ok(ProjectedOperatorOutput { value, tangency_residual })
}

/// Principal part of the linearization at `d_ref`, applied to `d`.
pub fn linearized_principal(d_ref: &DirectorField, d: &VectorField, c: &FrankCoefficients) -> Result<VectorField> {
    check_field(d_ref)?;
    if d_ref.grid() != d.grid() {
        return Err(Error::InvalidInput("fields live on different grids".into()));
    }
    let lap = laplacian(d);
    let gd = grad_div(d);
    let cu = gradient(d).map(|m| curl_of_gradient(&m));
    let gc = gradient(&cu);
    let r = d_ref.values();
    let out = (0..r.len())
        .map(|i| {
            lap.values()[i] * (2.0 * c.k3)
                + project(&r[i], &gd.values()[i]) * (2.0 * (c.k1 - c.k3))
                + r[i].cross(&(gc.values()[i].transpose() * r[i])) * (2.0 * (c.k2 - c.k3))
        })
        .collect();
    Ok(VectorField::from_vec(d.grid(), out).unwrap())
}

/// Linearized boundary operator at reference `d_ref` acting on a gradient `g`.
pub fn linearized_boundary_pointwise(d_ref: &Vec3, g: &Mat3, nu: &Vec3, c: &FrankCoefficients) -> Vec3 {
    let div = g.trace();
    let cu = curl_of_gradient(g);
    let gt_nu = g.transpose() * nu;
    // grouped so the two projected terms cancel bitwise in the isotropic case
    let splay_saddle =
        project(d_ref, &(nu * (c.k1 * div) - gt_nu * c.k3)) * 2.0 + project(d_ref, &(gt_nu - nu * div)) * (2.0 * (c.k2 + c.k4));
    g * nu * (2.0 * c.k3) + splay_saddle + d_ref.cross(nu) * (2.0 * (c.k2 - c.k3) * d_ref.dot(&cu))
}

/// Nonlinear boundary operator at a sample `(d, grad d)`.
pub fn boundary_pointwise(d: &Vec3, g: &Mat3, nu: &Vec3, c: &FrankCoefficients) -> Vec3 {
    linearized_boundary_pointwise(d, g, nu, c)
}

/// Complex version of [`linearized_boundary_pointwise`], for symbol calculus.
pub fn linearized_boundary_complex(
    d_ref: &Vec3,
    g: &Matrix3<C64>,
    nu: &Vec3,
    c: &FrankCoefficients,
) -> Vector3<C64> {
    let dr = d_ref.map(|x| C64::new(x, 0.0));
    let nuc = nu.map(|x| C64::new(x, 0.0));
    let div = g.trace();
    let cu = Vector3::new(g[(2, 1)] - g[(1, 2)], g[(0, 2)] - g[(2, 0)], g[(1, 0)] - g[(0, 1)]);
    let gt_nu = g.transpose() * nuc;
    let proj = |v: Vector3<C64>| v - dr * dr.dot(&v);
    let dxn = d_ref.cross(nu).map(|x| C64::new(x, 0.0));
    let splay_saddle = proj(nuc * (div * c.k1) - gt_nu * C64::from(c.k3)) * C64::from(2.0)
        + proj(gt_nu - nuc * div) * C64::from(2.0 * (c.k2 + c.k4));
    g * nuc * C64::from(2.0 * c.k3) + splay_saddle + dxn * (dr.dot(&cu) * (2.0 * (c.k2 - c.k3)))
}

/// Boundary values on both walls of a slab.
#[derive(Debug, Clone)]
pub struct BoundaryField {
    pub wall_axis: usize,
    /// Outward normals of the low and high wall.
    pub normals: [Vec3; 2],
    /// Grid indices of the wall nodes, plane order.
    pub nodes: [Vec<usize>; 2],
    pub values: [Vec<Vec3>; 2],
}

impl BoundaryField {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().flatten().fold(0.0, |m, v| m.max(v.amax()))
    }
}

fn outward_normals(w: usize) -> [Vec3; 2] {
    let mut e = Vec3::zeros();
    e[w] = 1.0;
    [-e, e]
}

fn boundary_eval(
    d_ref: &DirectorField,
    d: &VectorField,
    c: &FrankCoefficients,
) -> Result<BoundaryField> {
    let grid = d_ref.grid();
    let w = grid
        .wall_axis()
        .ok_or_else(|| Error::Domain("boundary operator needs a grid with a wall axis".into()))?;
    let g = gradient(d);
    let normals = outward_normals(w);
    let nodes = [wall_nodes(grid, 0), wall_nodes(grid, 1)];
    let values = [0, 1].map(|s| {
        nodes[s]
            .iter()
            .map(|&i| linearized_boundary_pointwise(&d_ref.values()[i], &g.values()[i], &normals[s], c))
            .collect()
    });
    Ok(BoundaryField { wall_axis: w, normals, nodes, values })
}

/// `B(d)` on the walls, with one-sided normal derivatives.
pub fn boundary_apply(d: &DirectorField, c: &FrankCoefficients) -> Result<BoundaryField> {
    check_field(d)?;
    boundary_eval(d, d.field(), c)
}

pub fn linearized_boundary(d_ref: &DirectorField, d: &VectorField, c: &FrankCoefficients) -> Result<BoundaryField> {
    check_field(d_ref)?;
    boundary_eval(d_ref, d, c)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompatibilityReport {
    /// `max |B(d0) / 2|` over wall nodes.
    pub residual: f64,
    pub tolerance: f64,
    pub passes: bool,
}

pub const COMPATIBILITY_TOL: f64 = 1e-6;

/// Checks that the initial director satisfies the boundary condition.
pub fn compatibility_check(d0: &DirectorField, c: &FrankCoefficients, tol: f64) -> Result<CompatibilityReport> {
    let b = boundary_apply(d0, c)?;
    // the condition is stated for B/2
    let residual = 0.5 * b.max_abs();
    Ok(CompatibilityReport { residual, tolerance: tol, passes: residual <= tol })
}
