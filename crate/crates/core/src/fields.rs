//! Grid-sampled fields and second-order finite-difference operators.
//!
//! Grids are collocated. Every axis is either periodic (nodes `x_k = k h`,
//! `k = 0..n`, length `n h`) or bounded by walls (nodes on both walls,
//! length `(n-1) h`). At most one axis carries walls; that axis is the slab
//! normal. Storage is row-major with the last axis fastest.
//!
//! Convention: `(grad d)_{ij} = d_j d_i`, i.e. column `j` of the gradient is
//! the derivative along axis `j`; `(div A)_i = sum_j d_j A_{ij}`.
//!
//! # Stencils
//!
//! First derivatives are centered, `(f_{k+1} - f_{k-1}) / 2h`, with the
//! one-sided second-order formulas `(-3 f_0 + 4 f_1 - f_2) / 2h` (and its
//! mirror) on wall nodes. Second derivatives along one axis use the compact
//! three-point stencil, `(2 f_0 - 5 f_1 + 4 f_2 - f_3) / h^2` on walls.
//! Mixed derivatives compose two first derivatives.

use std::ops::{Add, Mul, Sub};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Periodic,
    Wall,
}

impl Topology {
    pub fn code(self) -> u8 {
        match self {
            Topology::Periodic => 0,
            Topology::Wall => 1,
        }
    }

    pub fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(Topology::Periodic),
            1 => Some(Topology::Wall),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: [usize; 3],
    h: [f64; 3],
    topo: [Topology; 3],
}

pub const MIN_EXTENT: usize = 4;

impl Grid {
    pub fn new(n: [usize; 3], h: [f64; 3], topo: [Topology; 3]) -> Result<Self> {
        for a in 0..3 {
            if n[a] < MIN_EXTENT {
                return Err(Error::InvalidInput(format!("extent {} on axis {a} is below {MIN_EXTENT}", n[a])));
            }
            if !(h[a] > 0.0 && h[a].is_finite()) {
                return Err(Error::InvalidInput(format!("spacing {} on axis {a} is not positive", h[a])));
            }
        }
        if topo.iter().filter(|t| **t == Topology::Wall).count() > 1 {
            return Err(Error::InvalidInput("at most one axis may carry walls".into()));
        }
        Ok(Self { n, h, topo })
    }

    /// Fully periodic box with side lengths `len`.
    pub fn periodic(n: [usize; 3], len: [f64; 3]) -> Result<Self> {
        let h = [len[0] / n[0] as f64, len[1] / n[1] as f64, len[2] / n[2] as f64];
        Self::new(n, h, [Topology::Periodic; 3])
    }

    /// Periodic cube `[0, 2 pi)^3` with `n` points per axis.
    pub fn periodic_cube(n: usize) -> Result<Self> {
        let l = 2.0 * std::f64::consts::PI;
        Self::periodic([n; 3], [l; 3])
    }

    /// Slab with walls at `x_wall = 0` and `x_wall = len[wall]`.
    pub fn slab(n: [usize; 3], len: [f64; 3], wall: usize) -> Result<Self> {
        let mut h = [len[0] / n[0] as f64, len[1] / n[1] as f64, len[2] / n[2] as f64];
        h[wall] = len[wall] / (n[wall] as f64 - 1.0);
        let mut topo = [Topology::Periodic; 3];
        topo[wall] = Topology::Wall;
        Self::new(n, h, topo)
    }

    pub fn extents(&self) -> [usize; 3] {
        self.n
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.h
    }

    pub fn topology(&self) -> [Topology; 3] {
        self.topo
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn stride(&self, axis: usize) -> usize {
        match axis {
            0 => self.n[1] * self.n[2],
            1 => self.n[2],
            _ => 1,
        }
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n[1] + j) * self.n[2] + k
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let k = idx % self.n[2];
        let r = idx / self.n[2];
        [r / self.n[1], r % self.n[1], k]
    }

    pub fn position(&self, idx: usize) -> Vec3 {
        let c = self.coords(idx);
        Vec3::new(c[0] as f64 * self.h[0], c[1] as f64 * self.h[1], c[2] as f64 * self.h[2])
    }

    /// Physical length along `axis`.
    pub fn length(&self, axis: usize) -> f64 {
        match self.topo[axis] {
            Topology::Periodic => self.n[axis] as f64 * self.h[axis],
            Topology::Wall => (self.n[axis] - 1) as f64 * self.h[axis],
        }
    }

    pub fn wall_axis(&self) -> Option<usize> {
        self.topo.iter().position(|t| *t == Topology::Wall)
    }

    pub fn is_periodic(&self) -> bool {
        self.wall_axis().is_none()
    }

    /// Whether `idx` lies on a wall plane.
    pub fn on_wall(&self, idx: usize) -> bool {
        match self.wall_axis() {
            Some(w) => {
                let a = self.coords(idx)[w];
                a == 0 || a + 1 == self.n[w]
            }
            None => false,
        }
    }

    pub fn h_min(&self) -> f64 {
        self.h[0].min(self.h[1]).min(self.h[2])
    }

    /// Quadrature weight of node `idx` (trapezoid on the wall axis).
    pub fn weight(&self, idx: usize) -> f64 {
        let w = self.h[0] * self.h[1] * self.h[2];
        if self.on_wall(idx) {
            0.5 * w
        } else {
            w
        }
    }

    /// Same grid with `extra` nodes appended on each side of the wall axis.
    pub(crate) fn padded(&self, extra: usize) -> Self {
        let mut g = *self;
        if let Some(w) = self.wall_axis() {
            g.n[w] += 2 * extra;
        }
        g
    }
}

/// Values stored on grid nodes.
pub trait FieldValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync {
    fn zero() -> Self;
    fn max_abs(&self) -> f64;
}

impl FieldValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn max_abs(&self) -> f64 {
        self.abs()
    }
}

impl FieldValue for Vec3 {
    fn zero() -> Self {
        Vec3::zeros()
    }
    fn max_abs(&self) -> f64 {
        self.amax()
    }
}

impl FieldValue for Mat3 {
    fn zero() -> Self {
        Mat3::zeros()
    }
    fn max_abs(&self) -> f64 {
        self.amax()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    grid: Grid,
    data: Vec<T>,
}

pub type ScalarField = Field<f64>;
pub type VectorField = Field<Vec3>;
pub type TensorField = Field<Mat3>;

impl<T: FieldValue> Field<T> {
    pub fn zeros(grid: &Grid) -> Self {
        Self { grid: *grid, data: vec![T::zero(); grid.len()] }
    }

    pub fn from_vec(grid: &Grid, data: Vec<T>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::InvalidInput(format!("{} values for a grid of {} nodes", data.len(), grid.len())));
        }
        Ok(Self { grid: *grid, data })
    }

    /// Samples `f` at node positions.
    pub fn from_fn(grid: &Grid, f: impl Fn(Vec3) -> T) -> Self {
        let data = (0..grid.len()).map(|i| f(grid.position(i))).collect();
        Self { grid: *grid, data }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_values(self) -> Vec<T> {
        self.data
    }

    pub fn map<U: FieldValue>(&self, f: impl Fn(T) -> U) -> Field<U> {
        Field { grid: self.grid, data: self.data.iter().map(|v| f(*v)).collect() }
    }

    pub fn zip_map<U: FieldValue, V: FieldValue>(&self, other: &Field<U>, f: impl Fn(T, U) -> V) -> Field<V> {
        debug_assert_eq!(self.grid, other.grid);
        Field {
            grid: self.grid,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect(),
        }
    }

    /// `a * self + b * other`
    pub fn lincomb(&self, a: f64, other: &Self, b: f64) -> Self {
        self.zip_map(other, |x, y| x * a + y * b)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.max_abs()))
    }

    /// Max-norm over nodes not lying on a wall.
    pub fn max_abs_interior(&self) -> f64 {
        self.data
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.grid.on_wall(*i))
            .fold(0.0, |m, (_, v)| m.max(v.max_abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.max_abs().is_finite())
    }
}

impl VectorField {
    pub fn component(&self, c: usize) -> ScalarField {
        self.map(|v| v[c])
    }

    pub fn from_components(x: &ScalarField, y: &ScalarField, z: &ScalarField) -> Self {
        let data = (0..x.data.len()).map(|i| Vec3::new(x.data[i], y.data[i], z.data[i])).collect();
        Self { grid: x.grid, data }
    }

    pub fn dot(&self, other: &Self) -> ScalarField {
        self.zip_map(other, |a, b| a.dot(&b))
    }
}

impl TensorField {
    pub fn column(&self, j: usize) -> VectorField {
        self.map(|m| m.column(j).into_owned())
    }

    pub fn transpose(&self) -> Self {
        self.map(|m| m.transpose())
    }
}

/// Unit-length director samples.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectorField(VectorField);

pub const DIRECTOR_TOL: f64 = 1e-10;

impl DirectorField {
    /// Checks `||d| - 1| <= tol` at every node.
    pub fn new(field: VectorField, tol: f64) -> Result<Self> {
        let worst = unit_defect(&field);
        if !(worst <= tol) {
            return Err(Error::Domain(format!("director deviates from unit length by {worst:e}")));
        }
        Ok(Self(field))
    }

    /// Normalizes every sample; fails on (near) zero vectors.
    pub fn normalized(field: VectorField) -> Result<Self> {
        let mut f = field;
        for v in f.values_mut() {
            let n = v.norm();
            if !(n > 1e-300) || !n.is_finite() {
                return Err(Error::Domain("cannot normalize a zero or non-finite vector".into()));
            }
            *v /= n;
        }
        Ok(Self(f))
    }

    pub fn uniform(grid: &Grid, d: Vec3) -> Result<Self> {
        Self::normalized(VectorField::from_fn(grid, |_| d))
    }

    /// Wraps without checking; for states mid-simulation whose norm drifts.
    pub(crate) fn unchecked(field: VectorField) -> Self {
        Self(field)
    }

    pub fn field(&self) -> &VectorField {
        &self.0
    }

    pub fn into_field(self) -> VectorField {
        self.0
    }

    pub fn grid(&self) -> &Grid {
        self.0.grid()
    }

    pub fn values(&self) -> &[Vec3] {
        self.0.values()
    }

    /// `max ||d|^2 - 1|`
    pub fn norm_drift(&self) -> f64 {
        self.0.values().iter().fold(0.0, |m, v| m.max((v.norm_squared() - 1.0).abs()))
    }
}

pub fn unit_defect(f: &VectorField) -> f64 {
    f.values().iter().fold(0.0_f64, |m, v| {
        let e = (v.norm() - 1.0).abs();
        if e.is_nan() {
            f64::INFINITY
        } else {
            m.max(e)
        }
    })
}

/// Incompressible velocity samples (vanishing on walls).
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField(VectorField);

pub const PROJECTION_TOL: f64 = 1e-10;

impl VelocityField {
    /// Checks the discrete divergence (relative to `|u| / h`) and the no-slip condition.
    pub fn new(field: VectorField, tol: f64) -> Result<Self> {
        let g = *field.grid();
        let scale = field.max_abs().max(1e-300) / g.h_min();
        let div = vector_divergence(&field).max_abs_interior();
        if div > tol * scale.max(1.0) {
            return Err(Error::Domain(format!("velocity divergence {div:e} exceeds tolerance")));
        }
        if g.wall_axis().is_some() {
            let slip = field
                .values()
                .iter()
                .enumerate()
                .filter(|(i, _)| g.on_wall(*i))
                .fold(0.0_f64, |m, (_, v)| m.max(v.amax()));
            if slip > 0.0 {
                return Err(Error::Domain(format!("velocity does not vanish on the walls ({slip:e})")));
            }
        }
        Ok(Self(field))
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self(VectorField::zeros(grid))
    }

    pub(crate) fn unchecked(field: VectorField) -> Self {
        Self(field)
    }

    pub fn field(&self) -> &VectorField {
        &self.0
    }

    pub fn into_field(self) -> VectorField {
        self.0
    }

    pub fn values(&self) -> &[Vec3] {
        self.0.values()
    }
}

// ---------------------------------------------------------------------------
// one-dimensional stencils

/// First derivative along `axis`.
pub fn partial<T: FieldValue>(f: &Field<T>, axis: usize) -> Field<T> {
    let g = &f.grid;
    let n = g.n[axis];
    let s = g.stride(axis);
    let h = g.h[axis];
    let inv2h = 0.5 / h;
    let d = &f.data;
    let mut out = Vec::with_capacity(d.len());
    match g.topo[axis] {
        Topology::Periodic => {
            for idx in 0..d.len() {
                let a = (idx / s) % n;
                let p = if a + 1 < n { idx + s } else { idx + s - n * s };
                let m = if a > 0 { idx - s } else { idx + (n - 1) * s };
                out.push((d[p] - d[m]) * inv2h);
            }
        }
        Topology::Wall => {
            for idx in 0..d.len() {
                let a = (idx / s) % n;
                let v = if a == 0 {
                    (d[idx + s] * 4.0 - d[idx] * 3.0 - d[idx + 2 * s]) * inv2h
                } else if a + 1 == n {
                    (d[idx] * 3.0 - d[idx - s] * 4.0 + d[idx - 2 * s]) * inv2h
                } else {
                    (d[idx + s] - d[idx - s]) * inv2h
                };
                out.push(v);
            }
        }
    }
    Field { grid: *g, data: out }
}

/// Second derivative along `axis` (compact stencil).
pub fn partial2<T: FieldValue>(f: &Field<T>, axis: usize) -> Field<T> {
    let g = &f.grid;
    let n = g.n[axis];
    let s = g.stride(axis);
    let h = g.h[axis];
    let ih2 = 1.0 / (h * h);
    let d = &f.data;
    let mut out = Vec::with_capacity(d.len());
    match g.topo[axis] {
        Topology::Periodic => {
            for idx in 0..d.len() {
                let a = (idx / s) % n;
                let p = if a + 1 < n { idx + s } else { idx + s - n * s };
                let m = if a > 0 { idx - s } else { idx + (n - 1) * s };
                out.push((d[p] + d[m] - d[idx] * 2.0) * ih2);
            }
        }
        Topology::Wall => {
            for idx in 0..d.len() {
                let a = (idx / s) % n;
                let v = if a == 0 {
                    (d[idx] * 2.0 - d[idx + s] * 5.0 + d[idx + 2 * s] * 4.0 - d[idx + 3 * s]) * ih2
                } else if a + 1 == n {
                    (d[idx] * 2.0 - d[idx - s] * 5.0 + d[idx - 2 * s] * 4.0 - d[idx - 3 * s]) * ih2
                } else {
                    (d[idx + s] + d[idx - s] - d[idx] * 2.0) * ih2
                };
                out.push(v);
            }
        }
    }
    Field { grid: *g, data: out }
}

// ---------------------------------------------------------------------------
// differential operators

/// `(grad v)_{ij} = d_j v_i`
pub fn gradient(v: &VectorField) -> TensorField {
    let p = [partial(v, 0), partial(v, 1), partial(v, 2)];
    let data = (0..v.data.len())
        .map(|i| Mat3::from_columns(&[p[0].data[i], p[1].data[i], p[2].data[i]]))
        .collect();
    Field { grid: v.grid, data }
}

/// `(div A)_i = sum_j d_j A_{ij}`
pub fn divergence(t: &TensorField) -> VectorField {
    let mut out = partial(&t.column(0), 0);
    for j in 1..3 {
        let p = partial(&t.column(j), j);
        for (o, q) in out.data.iter_mut().zip(&p.data) {
            *o += q;
        }
    }
    out
}

pub fn curl_of_gradient(g: &Mat3) -> Vec3 {
    Vec3::new(g[(2, 1)] - g[(1, 2)], g[(0, 2)] - g[(2, 0)], g[(1, 0)] - g[(0, 1)])
}

pub fn curl(v: &VectorField) -> VectorField {
    gradient(v).map(|g| curl_of_gradient(&g))
}

pub fn laplacian<T: FieldValue>(v: &Field<T>) -> Field<T> {
    let mut out = partial2(v, 0);
    for a in 1..3 {
        let p = partial2(v, a);
        for (o, q) in out.data.iter_mut().zip(&p.data) {
            *o = *o + *q;
        }
    }
    out
}

pub fn vector_divergence(v: &VectorField) -> ScalarField {
    let mut out = partial(&v.component(0), 0);
    for a in 1..3 {
        let p = partial(&v.component(a), a);
        for (o, q) in out.data.iter_mut().zip(&p.data) {
            *o += q;
        }
    }
    out
}

pub fn scalar_gradient(f: &ScalarField) -> VectorField {
    VectorField::from_components(&partial(f, 0), &partial(f, 1), &partial(f, 2))
}

/// `grad(div v)` with compact stencils for the pure second derivatives
/// `d_i d_i v_i` and composed first derivatives for the mixed ones.
pub fn grad_div(v: &VectorField) -> VectorField {
    let comps = [v.component(0), v.component(1), v.component(2)];
    let first: Vec<ScalarField> = (0..3).map(|j| partial(&comps[j], j)).collect();
    let mut out = [ScalarField::zeros(&v.grid), ScalarField::zeros(&v.grid), ScalarField::zeros(&v.grid)];
    for i in 0..3 {
        let mut acc = partial2(&comps[i], i);
        for (j, fj) in first.iter().enumerate() {
            if j != i {
                acc = acc.lincomb(1.0, &partial(fj, i), 1.0);
            }
        }
        out[i] = acc;
    }
    VectorField::from_components(&out[0], &out[1], &out[2])
}

/// Copy of `f` extended by one ghost plane on each side of the wall axis.
pub(crate) fn with_ghosts<T: FieldValue>(f: &Field<T>, lo: &[T], hi: &[T]) -> Field<T> {
    let g = f.grid;
    let w = g.wall_axis().expect("ghost layers need a wall axis");
    let big = g.padded(1);
    let mut data = vec![T::zero(); big.len()];
    for idx in 0..big.len() {
        let mut c = big.coords(idx);
        let a = c[w];
        data[idx] = if a == 0 {
            lo[plane_index(&g, w, c)]
        } else if a == big.n[w] - 1 {
            hi[plane_index(&g, w, c)]
        } else {
            c[w] -= 1;
            f.data[g.index(c[0], c[1], c[2])]
        };
    }
    Field { grid: big, data }
}

/// Drops the ghost planes added by [`with_ghosts`].
pub(crate) fn strip_ghosts<T: FieldValue>(f: &Field<T>, grid: &Grid) -> Field<T> {
    let w = grid.wall_axis().expect("wall axis");
    let data = (0..grid.len())
        .map(|idx| {
            let mut c = grid.coords(idx);
            c[w] += 1;
            f.data[f.grid.index(c[0], c[1], c[2])]
        })
        .collect();
    Field { grid: *grid, data }
}

/// Index of a node within the tangential plane orthogonal to `w`.
pub(crate) fn plane_index(g: &Grid, w: usize, c: [usize; 3]) -> usize {
    let (a, b) = tangential_axes(w);
    c[a] * g.n[b] + c[b]
}

pub(crate) fn tangential_axes(w: usize) -> (usize, usize) {
    match w {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

/// Node indices of the wall plane `side` (0 = low, 1 = high), in plane order.
pub fn wall_nodes(g: &Grid, side: usize) -> Vec<usize> {
    let w = g.wall_axis().expect("wall axis");
    let (a, b) = tangential_axes(w);
    let mut out = Vec::with_capacity(g.n[a] * g.n[b]);
    for ia in 0..g.n[a] {
        for ib in 0..g.n[b] {
            let mut c = [0; 3];
            c[a] = ia;
            c[b] = ib;
            c[w] = if side == 0 { 0 } else { g.n[w] - 1 };
            out.push(g.index(c[0], c[1], c[2]));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn cube(n: usize) -> Grid {
        Grid::periodic_cube(n).unwrap()
    }

    fn smooth(x: Vec3) -> Vec3 {
        Vec3::new(x[0].sin() * x[1].cos(), (x[1] + x[2]).sin(), (2.0 * x[0]).cos() * x[2].sin())
    }

    #[test]
    fn grid_rules() {
        assert!(Grid::new([3, 8, 8], [1.0; 3], [Topology::Periodic; 3]).is_err());
        assert!(Grid::new([8; 3], [1.0; 3], [Topology::Wall, Topology::Wall, Topology::Periodic]).is_err());
        let g = Grid::slab([8, 8, 9], [1.0, 1.0, 2.0], 2).unwrap();
        assert_eq!(g.wall_axis(), Some(2));
        assert!((g.length(2) - 2.0).abs() < 1e-15);
        let idx = g.index(3, 5, 7);
        assert_eq!(g.coords(idx), [3, 5, 7]);
    }

    #[test]
    fn constant_fields_have_zero_derivatives() {
        let g = cube(8);
        let c = VectorField::from_fn(&g, |_| Vec3::new(0.3, -1.0, 2.0));
        assert_eq!(gradient(&c).max_abs(), 0.0);
        assert_eq!(curl(&c).max_abs(), 0.0);
        let t = TensorField::from_fn(&g, |_| Mat3::new(1., 2., 3., 4., 5., 6., 7., 8., 9.));
        assert_eq!(divergence(&t).max_abs(), 0.0);
    }

    #[test]
    fn exact_on_linear_fields() {
        let g = Grid::slab([6, 6, 7], [1.0, 1.0, 1.0], 2).unwrap();
        // along the wall axis every stencil is exact on linears, including one-sided ones
        let f = VectorField::from_fn(&g, |x| Vec3::new(0.0, 0.0, x[2]));
        let gr = gradient(&f);
        for (i, m) in gr.values().iter().enumerate() {
            assert!((m[(2, 2)] - 1.0).abs() < 1e-12, "node {i}");
        }
        let f = VectorField::from_fn(&g, |x| Vec3::new(0.0, x[2], 0.0));
        let c = curl(&f);
        for v in c.values() {
            assert!((v - Vec3::new(-1.0, 0.0, 0.0)).amax() < 1e-12);
        }
        // periodic axis: interior points only
        let gp = cube(8);
        let f = VectorField::from_fn(&gp, |x| Vec3::new(x[1], 0.0, 0.0));
        let gr = gradient(&f);
        for idx in 0..gp.len() {
            let j = gp.coords(idx)[1];
            if j > 0 && j + 1 < 8 {
                assert!((gr.values()[idx][(0, 1)] - 1.0).abs() < 1e-12);
            }
        }
        let f = VectorField::from_fn(&gp, |x| Vec3::new(0.0, 0.0, x[0]));
        let c = curl(&f);
        for idx in 0..gp.len() {
            let i = gp.coords(idx)[0];
            if i > 0 && i + 1 < 8 {
                assert!((c.values()[idx] - Vec3::new(0.0, -1.0, 0.0)).amax() < 1e-12);
            }
        }
        let t = TensorField::from_fn(&g, |x| {
            let mut m = Mat3::zeros();
            m[(2, 2)] = x[2];
            m
        });
        for v in divergence(&t).values() {
            assert!((v - Vec3::new(0.0, 0.0, 1.0)).amax() < 1e-12);
        }
    }

    fn errors(n: usize) -> [f64; 4] {
        let g = cube(n);
        let d = VectorField::from_fn(&g, smooth);
        let grad_exact = TensorField::from_fn(&g, |x| {
            Mat3::new(
                x[0].cos() * x[1].cos(),
                -x[0].sin() * x[1].sin(),
                0.0,
                0.0,
                (x[1] + x[2]).cos(),
                (x[1] + x[2]).cos(),
                -2.0 * (2.0 * x[0]).sin() * x[2].sin(),
                0.0,
                (2.0 * x[0]).cos() * x[2].cos(),
            )
        });
        let lap_exact = VectorField::from_fn(&g, |x| {
            Vec3::new(-2.0 * x[0].sin() * x[1].cos(), -2.0 * (x[1] + x[2]).sin(), -5.0 * (2.0 * x[0]).cos() * x[2].sin())
        });
        let curl_exact = grad_exact.map(|m| curl_of_gradient(&m));
        let div_exact = VectorField::from_fn(&g, |x| {
            // div of the tensor grad_exact: laplacian
            Vec3::new(-2.0 * x[0].sin() * x[1].cos(), -2.0 * (x[1] + x[2]).sin(), -5.0 * (2.0 * x[0]).cos() * x[2].sin())
        });
        [
            gradient(&d).lincomb(1.0, &grad_exact, -1.0).max_abs(),
            laplacian(&d).lincomb(1.0, &lap_exact, -1.0).max_abs(),
            curl(&d).lincomb(1.0, &curl_exact, -1.0).max_abs(),
            divergence(&grad_exact).lincomb(1.0, &div_exact, -1.0).max_abs(),
        ]
    }

    #[test]
    fn second_order_convergence() {
        let (a, b) = (errors(16), errors(32));
        for k in 0..4 {
            assert!(a[k] / b[k] >= 3.5, "operator {k}: {} -> {}", a[k], b[k]);
        }
    }

    #[test]
    fn wall_stencils_converge() {
        let err = |n: usize| {
            let g = Grid::slab([4, 4, n], [1.0, 1.0, 1.0], 2).unwrap();
            let f = ScalarField::from_fn(&g, |x| (2.0 * x[2]).exp());
            let d1 = partial(&f, 2);
            let d2 = partial2(&f, 2);
            let e1 = ScalarField::from_fn(&g, |x| 2.0 * (2.0 * x[2]).exp());
            let e2 = ScalarField::from_fn(&g, |x| 4.0 * (2.0 * x[2]).exp());
            (d1.lincomb(1.0, &e1, -1.0).max_abs(), d2.lincomb(1.0, &e2, -1.0).max_abs())
        };
        let (a, b) = (err(17), err(33));
        assert!(a.0 / b.0 > 3.5 && a.1 / b.1 > 3.5, "{a:?} {b:?}");
    }

    #[test]
    fn sine_derivative_example() {
        let errs: Vec<f64> = [16, 32]
            .iter()
            .map(|&n| {
                let g = cube(n);
                let d = VectorField::from_fn(&g, |x| Vec3::new(x[0].sin(), 0.0, 0.0));
                let gr = gradient(&d);
                (0..g.len()).fold(0.0_f64, |m, i| m.max((gr.values()[i][(0, 0)] - g.position(i)[0].cos()).abs()))
            })
            .collect();
        assert!(errs[0] / errs[1] >= 3.5);
    }

    #[test]
    fn curl_of_gradient_field_small() {
        let res = |n: usize| {
            let g = cube(n);
            let phi = ScalarField::from_fn(&g, |x| x[0].sin() * (x[1] + 2.0 * x[2]).cos());
            curl(&scalar_gradient(&phi)).max_abs()
        };
        // commuting centered differences: the residual is pure rounding
        assert!(res(16) < 1e-12 && res(32) < 1e-12);
    }

    #[test]
    fn div_of_scalar_identity_matches_grad_of_div() {
        let err = |n: usize| {
            let g = cube(n);
            let d = VectorField::from_fn(&g, smooth);
            let dv = vector_divergence(&d);
            let a = divergence(&dv.map(|s| Mat3::identity() * s));
            a.lincomb(1.0, &scalar_gradient(&dv), -1.0).max_abs()
        };
        assert!(err(16) < 1e-12);
        let conv = |n: usize| {
            let g = cube(n);
            let d = VectorField::from_fn(&g, smooth);
            let exact = VectorField::from_fn(&g, |x| {
                // div smooth = cos x0 cos x1 + cos(x1+x2) + cos 2x0 cos x2
                Vec3::new(
                    -x[0].sin() * x[1].cos() - 2.0 * (2.0 * x[0]).sin() * x[2].cos(),
                    -x[0].cos() * x[1].sin() - (x[1] + x[2]).sin(),
                    -(x[1] + x[2]).sin() - (2.0 * x[0]).cos() * x[2].sin(),
                )
            });
            grad_div(&d).lincomb(1.0, &exact, -1.0).max_abs()
        };
        assert!(conv(16) / conv(32) >= 3.5);
    }

    #[test]
    fn ghost_roundtrip() {
        let g = Grid::slab([4, 5, 6], [1.0, 1.0, 1.0], 1).unwrap();
        let f = ScalarField::from_fn(&g, |x| x[0] + 10.0 * x[1] + 100.0 * x[2]);
        let n = 4 * 6;
        let e = with_ghosts(&f, &vec![-1.0; n], &vec![-2.0; n]);
        assert_eq!(e.grid().extents(), [4, 7, 6]);
        assert_eq!(strip_ghosts(&e, &g), f);
        assert_eq!(wall_nodes(&g, 1).len(), n);
    }

    proptest! {
        #[test]
        fn operators_are_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, p in 0.0f64..PI) {
            let g = Grid::slab([6, 5, 7], [2.0, 1.0, 1.5], 0).unwrap();
            let f1 = VectorField::from_fn(&g, smooth);
            let f2 = VectorField::from_fn(&g, |x| Vec3::new((x[2] + p).cos(), x[0] * x[1], (x[0] - p).sin()));
            let mix = f1.lincomb(a, &f2, b);
            let scale = 1.0 + a.abs() + b.abs();
            let ops: [fn(&VectorField) -> VectorField; 3] = [curl, laplacian, grad_div];
            for op in ops {
                let lhs = op(&mix);
                let rhs = op(&f1).lincomb(a, &op(&f2), b);
                prop_assert!(lhs.lincomb(1.0, &rhs, -1.0).max_abs() <= 1e-11 * scale * (1.0 + rhs.max_abs()));
            }
            let lhs = gradient(&mix);
            let rhs = gradient(&f1).lincomb(a, &gradient(&f2), b);
            prop_assert!(lhs.lincomb(1.0, &rhs, -1.0).max_abs() <= 1e-11 * scale * (1.0 + rhs.max_abs()));
        }

        #[test]
        fn dot_cross_identity(a in proptest::array::uniform3(-5.0f64..5.0), b in proptest::array::uniform3(-5.0f64..5.0)) {
            let (a, b) = (Vec3::from(a), Vec3::from(b));
            let lhs = a.dot(&b).powi(2) + a.cross(&b).norm_squared();
            let rhs = a.norm_squared() * b.norm_squared();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
        }
    }
}
