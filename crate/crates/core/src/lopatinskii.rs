//! Half-line boundary problems of the frozen-coefficient system.
//!
//! A frequency `xi` tangential to the wall and a normal `nu` turn the interior
//! operator into an ODE in the normal variable `y > 0` by `grad -> i xi + nu d/dy`.
//! Writing the symbol along the normal line as a quadratic polynomial
//!
//! ```text
//! L(xi + t nu) = L0 + t L1 + t^2 L2,     t -> -i d/dy
//! ```
//!
//! the ODE `L2 w'' + i L1 w' - L0 w = 0` becomes a first-order system for `(w, w')`.
//! Its stable subspace (spatial eigenvalues with negative real part) is taken
//! from an ordered complex Schur form, and the decaying solutions are
//! parameterized by their trace: `w'(0) = S w(0)`. The boundary rows applied to
//! `(w(0), S w(0))` give the Lopatinskii matrix whose singular values are
//! reported.
//!
//! The normal `nu` enters the boundary operator linearly, so the sign
//! convention (inner or outer normal) does not change the homogeneous condition.

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64 as C64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::coefficients::{FrankCoefficients, LeslieCoefficients};
use crate::energy::UNIT_TOL;
use crate::ericksen::linearized_boundary_complex;
use crate::error::{Error, Result};
use crate::fields::Vec3;
use crate::sampling;
use crate::symbols::{stokes_symbols, symbol_m_unchecked, CMat3, CVec3, SymbolPoint};

/// Spatial eigenvalues closer than this to the imaginary axis break the dichotomy.
pub const DICHOTOMY_TOL: f64 = 1e-10;
/// Largest accepted condition number of the trace block of the stable basis.
pub const BASIS_COND_LIMIT: f64 = 1e10;
/// Tangency tolerance between `xi` and `nu`.
pub const TANGENCY_TOL: f64 = 1e-12;
/// Relative floor on the smallest boundary singular value used for pass/fail.
pub const MIN_SV_FLOOR: f64 = 1e-10;

/// Frozen-coefficient half-line problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfLineProblem {
    pub lambda: C64,
    pub xi: Vec3,
    pub nu: Vec3,
    pub d: Vec3,
    pub frank: FrankCoefficients,
    pub leslie: LeslieCoefficients,
}

impl HalfLineProblem {
    pub fn new(
        lambda: C64,
        xi: Vec3,
        nu: Vec3,
        d: Vec3,
        frank: FrankCoefficients,
        leslie: LeslieCoefficients,
    ) -> Result<Self> {
        let p = Self { lambda, xi, nu, d, frank, leslie };
        p.check()?;
        Ok(p)
    }

    fn check(&self) -> Result<()> {
        if !(self.lambda.re.is_finite() && self.lambda.im.is_finite() && self.xi.iter().all(|x| x.is_finite())) {
            return Err(Error::InvalidInput("non-finite lambda or xi".into()));
        }
        if self.lambda.re < -1e-14 * self.lambda.norm() {
            return Err(Error::Domain(format!("Re lambda = {} < 0", self.lambda.re)));
        }
        if !((self.nu.norm() - 1.0).abs() <= UNIT_TOL) {
            return Err(Error::Domain(format!("normal has norm {}", self.nu.norm())));
        }
        if !((self.d.norm() - 1.0).abs() <= UNIT_TOL) {
            return Err(Error::Domain(format!("director has norm {}", self.d.norm())));
        }
        if self.xi.dot(&self.nu).abs() > TANGENCY_TOL * self.xi.norm().max(1.0) {
            return Err(Error::Domain(format!("xi . nu = {:e} is not zero", self.xi.dot(&self.nu))));
        }
        if self.lambda.norm() + self.xi.norm_squared() <= 1e-300 {
            return Err(Error::Domain("(lambda, xi) = (0, 0)".into()));
        }
        Ok(())
    }

    /// Rescales to `|lambda| + |xi|^2 = 1` along the parabolic scaling.
    pub fn normalized(&self) -> Self {
        let r = self.lambda.norm() + self.xi.norm_squared();
        Self { lambda: self.lambda / r, xi: self.xi / r.sqrt(), ..*self }
    }

    fn symbol_point(&self, xi: Vec3) -> SymbolPoint {
        SymbolPoint { lambda: self.lambda, xi, d: self.d, frank: self.frank, leslie: self.leslie }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LSReport {
    pub stable_dimension: usize,
    pub lopatinskii_det_modulus: f64,
    pub min_singular_value: f64,
    /// Smallest `|Re kappa|` over all spatial eigenvalues.
    pub dichotomy_gap: f64,
    /// Condition number of the trace block of the stable basis.
    pub basis_condition: f64,
}

impl LSReport {
    pub fn passes(&self, expected_dim: usize, scale: f64) -> bool {
        self.stable_dimension == expected_dim && self.min_singular_value > MIN_SV_FLOOR * scale
    }
}

fn to_dmat(m: &CMat3) -> DMatrix<C64> {
    DMatrix::from_fn(3, 3, |i, j| m[(i, j)])
}

/// Coefficients `(L0, L1, L2)` of `t -> f(xi + t nu)`, a matrix polynomial of degree two.
fn normal_polynomial(f: impl Fn(Vec3) -> DMatrix<C64>, xi: &Vec3, nu: &Vec3) -> [DMatrix<C64>; 3] {
    let l0 = f(*xi);
    let lp = f(xi + nu);
    let lm = f(xi - nu);
    let half = C64::from(0.5);
    let l1 = (&lp - &lm) * half;
    let l2 = (lp + lm) * half - &l0;
    [l0, l1, l2]
}

/// Swaps adjacent diagonal entries `k`, `k+1` of an upper-triangular `t`, updating `q`.
fn swap_adjacent(t: &mut DMatrix<C64>, q: &mut DMatrix<C64>, k: usize) {
    let (a, b, s) = (t[(k, k)], t[(k + 1, k + 1)], t[(k, k + 1)]);
    let (x0, x1) = (s, b - a);
    let r = (x0.norm_sqr() + x1.norm_sqr()).sqrt();
    if r == 0.0 {
        return;
    }
    let (c, sn) = (x0 / r, x1 / r);
    // columns (c, sn) and (-conj sn, conj c)
    let n = t.nrows();
    for j in 0..n {
        let (u, v) = (t[(k, j)], t[(k + 1, j)]);
        t[(k, j)] = c.conj() * u + sn.conj() * v;
        t[(k + 1, j)] = -sn * u + c * v;
    }
    for i in 0..n {
        let (u, v) = (t[(i, k)], t[(i, k + 1)]);
        t[(i, k)] = u * c + v * sn;
        t[(i, k + 1)] = -u * sn.conj() + v * c.conj();
        let (u, v) = (q[(i, k)], q[(i, k + 1)]);
        q[(i, k)] = u * c + v * sn;
        q[(i, k + 1)] = -u * sn.conj() + v * c.conj();
    }
    t[(k + 1, k)] = C64::from(0.0);
    t[(k, k)] = b;
    t[(k + 1, k + 1)] = a;
}

/// Unitary matrices used to retry a stalled Schur iteration.
fn retry_rotation(n: usize, attempt: usize) -> DMatrix<C64> {
    let mut r = sampling::rng(0x5c_0ab0 + attempt as u64);
    DMatrix::from_fn(n, n, |_, _| C64::new(sampling::normal(&mut r), sampling::normal(&mut r)))
        .qr()
        .q()
}

/// Complex Schur form `a = q t q^H`.
///
/// The shifted QR iteration can stall on exactly structured input such as
/// companion matrices with repeated roots; a unitary change of basis breaks
/// the structure without moving the spectrum.
fn complex_schur(a: DMatrix<C64>) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    let n = a.nrows();
    // healthy input converges in a few sweeps per eigenvalue; give up early otherwise
    if let Some(s) = Schur::try_new(a.clone(), f64::EPSILON, 30 * n) {
        return Ok(s.unpack());
    }
    for attempt in 0..4 {
        let u = retry_rotation(n, attempt);
        if let Some(s) = Schur::try_new(u.adjoint() * &a * &u, f64::EPSILON, 5_000) {
            let (q, t) = s.unpack();
            return Ok((u * q, t));
        }
    }
    Err(Error::Numerical { what: "complex Schur decomposition".into(), residual: f64::NAN })
}

/// Orthonormal basis of the stable invariant subspace of `a` and its dimension.
fn stable_subspace(a: DMatrix<C64>) -> Result<(DMatrix<C64>, usize, f64)> {
    let n = a.nrows();
    let (mut q, mut t) = complex_schur(a)?;
    for i in 0..n {
        for j in 0..i {
            t[(i, j)] = C64::from(0.0);
        }
    }
    let gap = (0..n).map(|i| t[(i, i)].re.abs()).fold(f64::INFINITY, f64::min);
    if gap < DICHOTOMY_TOL {
        return Err(Error::Degenerate(format!("spatial eigenvalue with |Re| = {gap:e} on the imaginary axis")));
    }
    let stable = |z: C64| z.re < 0.0;
    // bubble the stable eigenvalues to the top
    loop {
        let mut swapped = false;
        for k in 0..n - 1 {
            if !stable(t[(k, k)]) && stable(t[(k + 1, k + 1)]) {
                swap_adjacent(&mut t, &mut q, k);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }
    let dim = (0..n).filter(|&i| stable(t[(i, i)])).count();
    Ok((q.columns(0, dim).into_owned(), dim, gap))
}

/// Companion matrix of `L2 w'' + i L1 w' - L0 w = 0` in the variable `(w, w')`.
fn companion(l: &[DMatrix<C64>; 3]) -> Result<DMatrix<C64>> {
    let m = l[0].nrows();
    let inv = l[2]
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("leading normal coefficient is singular".into()))?;
    let i = C64::new(0.0, 1.0);
    let a0 = &inv * &l[0];
    let a1 = &inv * &l[1] * (-i);
    let mut c = DMatrix::zeros(2 * m, 2 * m);
    c.view_mut((0, m), (m, m)).fill_with_identity();
    c.view_mut((m, 0), (m, m)).copy_from(&a0);
    c.view_mut((m, m), (m, m)).copy_from(&a1);
    Ok(c)
}

/// Trace-to-derivative map `S` with `w'(0) = S w(0)` on decaying solutions.
pub(crate) fn dirichlet_to_neumann(l: &[DMatrix<C64>; 3]) -> Result<(DMatrix<C64>, usize, f64, f64)> {
    let m = l[0].nrows();
    let (basis, dim, gap) = stable_subspace(companion(l)?)?;
    if dim != m {
        return Err(Error::Structural { expected: m, found: dim });
    }
    let top = basis.rows(0, m).into_owned();
    let bot = basis.rows(m, m).into_owned();
    let sv = top.singular_values();
    let cond = sv.max() / sv.min();
    if !(cond <= BASIS_COND_LIMIT) {
        return Err(Error::Degenerate(format!("stable basis trace block has condition {cond:e}")));
    }
    let s = bot * top.try_inverse().ok_or_else(|| Error::Degenerate("singular trace block".into()))?;
    Ok((s, dim, gap, cond))
}

/// `m_d(xi - i nu d/dy)` coefficients of the elastic symbol alone.
pub(crate) fn elastic_polynomial(p: &HalfLineProblem) -> [DMatrix<C64>; 3] {
    normal_polynomial(
        |x| DMatrix::from_fn(3, 3, |i, j| C64::from(symbol_m_unchecked(&x, &p.d, &p.frank)[(i, j)])),
        &p.xi,
        &p.nu,
    )
}

fn director_polynomial(p: &HalfLineProblem) -> [DMatrix<C64>; 3] {
    let mut l = elastic_polynomial(p);
    for i in 0..3 {
        l[0][(i, i)] += p.lambda * p.leslie.gamma;
    }
    l
}

fn coupled_polynomial(p: &HalfLineProblem) -> Result<[DMatrix<C64>; 3]> {
    stokes_symbols(&p.symbol_point(p.xi))?;
    let i = C64::new(0.0, 1.0);
    Ok(normal_polynomial(
        |x| {
            let s = stokes_symbols(&p.symbol_point(x)).expect("director checked above");
            let mut b = DMatrix::zeros(6, 6);
            b.view_mut((0, 0), (3, 3)).copy_from(&to_dmat(&s.m_u));
            b.view_mut((0, 3), (3, 3)).copy_from(&to_dmat(&(s.r1.transpose() * (i * p.lambda))));
            b.view_mut((3, 0), (3, 3)).copy_from(&to_dmat(&(s.r0 * (-i))));
            b.view_mut((3, 3), (3, 3)).copy_from(&to_dmat(&s.m_d));
            b
        },
        &p.xi,
        &p.nu,
    ))
}

/// Director boundary rows at the trace `(eta, eta')`.
fn boundary_rows(p: &HalfLineProblem, eta: &CVec3, deta: &CVec3) -> CVec3 {
    let i = C64::new(0.0, 1.0);
    let xi = p.xi.map(C64::from) * i;
    let nu = p.nu.map(C64::from);
    let g = eta * xi.transpose() + deta * nu.transpose();
    linearized_boundary_complex(&p.d, &g, &p.nu, &p.frank)
}

fn report(b: &DMatrix<C64>, dim: usize, gap: f64, cond: f64) -> LSReport {
    let sv = b.clone().singular_values();
    LSReport {
        stable_dimension: dim,
        lopatinskii_det_modulus: b.clone().determinant().norm(),
        min_singular_value: sv.min(),
        dichotomy_gap: gap,
        basis_condition: cond,
    }
}

/// Boundary matrix of the director problem in the trace normalization, plus diagnostics.
pub fn director_boundary_matrix(p: &HalfLineProblem) -> Result<(DMatrix<C64>, LSReport)> {
    p.check()?;
    let (s, dim, gap, cond) = dirichlet_to_neumann(&director_polynomial(p))?;
    let mut b = DMatrix::zeros(3, 3);
    for j in 0..3 {
        let e = CVec3::from_fn(|i, _| C64::from(if i == j { 1.0 } else { 0.0 }));
        let de = CVec3::from_fn(|i, _| s[(i, j)]);
        b.set_column(j, &DVector::from_column_slice(boundary_rows(p, &e, &de).as_slice()));
    }
    let r = report(&b, dim, gap, cond);
    Ok((b, r))
}

/// Lopatinskii check for the director problem with the nonlinear-anchoring boundary rows.
pub fn director_ls_check(p: &HalfLineProblem) -> Result<LSReport> {
    director_boundary_matrix(p).map(|(_, r)| r)
}

/// Boundary matrix of the coupled problem: no-slip rows for `u`, anchoring rows for `d`.
pub fn coupled_boundary_matrix(p: &HalfLineProblem) -> Result<(DMatrix<C64>, LSReport)> {
    p.check()?;
    let (s, dim, gap, cond) = dirichlet_to_neumann(&coupled_polynomial(p)?)?;
    let mut b = DMatrix::zeros(6, 6);
    for j in 0..6 {
        for i in 0..3 {
            b[(i, j)] = C64::from(if i == j { 1.0 } else { 0.0 });
        }
        let e = CVec3::from_fn(|i, _| C64::from(if i + 3 == j { 1.0 } else { 0.0 }));
        let de = CVec3::from_fn(|i, _| s[(i + 3, j)]);
        let r = boundary_rows(p, &e, &de);
        for i in 0..3 {
            b[(i + 3, j)] = r[i];
        }
    }
    let r = report(&b, dim, gap, cond);
    Ok((b, r))
}

pub fn coupled_ls_check(p: &HalfLineProblem) -> Result<LSReport> {
    coupled_boundary_matrix(p).map(|(_, r)| r)
}

/// `2 k3 omega` with `omega = sqrt(|xi|^2 + gamma lambda / (2 k3))`, principal branch.
pub fn isotropic_decay(p: &HalfLineProblem) -> C64 {
    (C64::from(p.xi.norm_squared()) + p.lambda * p.leslie.gamma / (2.0 * p.frank.k3)).sqrt()
}

// ---------------------------------------------------------------------------
// Quadratic form on tangential test functions

/// Cubic Hermite function on a grid `0 = y_0 < ... < y_n = Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfLineFunction {
    pub nodes: Vec<f64>,
    pub values: Vec<CVec3>,
    pub slopes: Vec<CVec3>,
}

impl HalfLineFunction {
    pub fn zeros(length: f64, n: usize) -> Self {
        let nodes = (0..n).map(|j| length * j as f64 / (n - 1) as f64).collect();
        Self { nodes, values: vec![CVec3::zeros(); n], slopes: vec![CVec3::zeros(); n] }
    }

    fn check(&self) -> Result<()> {
        let n = self.nodes.len();
        if n < 2 || self.values.len() != n || self.slopes.len() != n {
            return Err(Error::InvalidInput("half-line function needs matching node, value and slope arrays".into()));
        }
        if self.nodes[0] != 0.0 || self.nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("nodes must start at 0 and increase".into()));
        }
        Ok(())
    }
}

// 4-point Gauss-Legendre on [0, 1]; exact for the degree-6 integrands of cubic data.
const GAUSS: [(f64, f64); 4] = [
    (0.069_431_844_202_973_71, 0.173_927_422_568_726_9),
    (0.330_009_478_207_571_9, 0.326_072_577_431_273_1),
    (0.669_990_521_792_428_1, 0.326_072_577_431_273_1),
    (0.930_568_155_797_026_3, 0.173_927_422_568_726_9),
];

/// `(eta, eta', eta'')` on element `j` at local coordinate `s`.
fn hermite_eval(f: &HalfLineFunction, j: usize, s: f64) -> [CVec3; 3] {
    let h = f.nodes[j + 1] - f.nodes[j];
    let (v0, m0, v1, m1) = (f.values[j], f.slopes[j] * C64::from(h), f.values[j + 1], f.slopes[j + 1] * C64::from(h));
    let b = [2.0 * s * s * s - 3.0 * s * s + 1.0, s * s * s - 2.0 * s * s + s, -2.0 * s * s * s + 3.0 * s * s, s * s * s - s * s];
    let db = [6.0 * s * s - 6.0 * s, 3.0 * s * s - 4.0 * s + 1.0, -6.0 * s * s + 6.0 * s, 3.0 * s * s - 2.0 * s];
    let ddb = [12.0 * s - 6.0, 6.0 * s - 4.0, -12.0 * s + 6.0, 6.0 * s - 2.0];
    let comb = |c: [f64; 4], sc: f64| (v0 * C64::from(c[0]) + m0 * C64::from(c[1]) + v1 * C64::from(c[2]) + m1 * C64::from(c[3])) * C64::from(sc);
    [comb(b, 1.0), comb(db, 1.0 / h), comb(ddb, 1.0 / (h * h))]
}

fn cdot(x: &CVec3, y: &CVec3) -> C64 {
    x.iter().zip(y.iter()).map(|(a, b)| a * b.conj()).sum()
}

/// `(||eta||^2, ||eta'||^2)` on the half-line.
pub fn half_line_norms(f: &HalfLineFunction) -> (f64, f64) {
    let (mut l2, mut h1) = (0.0, 0.0);
    for j in 0..f.nodes.len() - 1 {
        let h = f.nodes[j + 1] - f.nodes[j];
        for &(s, w) in &GAUSS {
            let [e, de, _] = hermite_eval(f, j, s);
            l2 += w * h * e.norm_squared();
            h1 += w * h * de.norm_squared();
        }
    }
    (l2, h1)
}

fn tangential_basis(d: &Vec3) -> (Vec3, Vec3) {
    let a = if d.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let t1 = (a - d * d.dot(&a)).normalize();
    (t1, d.cross(&t1))
}

/// Scale for tolerances on the boundary rows at a trace `(eta, eta')`.
fn row_scale(p: &HalfLineProblem, eta: &CVec3, deta: &CVec3) -> f64 {
    p.frank.scale().max(p.frank.alpha) * (p.xi.norm() * eta.norm() + deta.norm()).max(1e-300)
}

/// `-(A(i xi + nu d/dy) eta | eta) - alpha (|xi|^2 ||eta||^2 + ||eta'||^2)`, real part.
///
/// The function must be tangential to `d` and satisfy the boundary rows at `y = 0`.
pub fn director_quadratic_form(p: &HalfLineProblem, eta: &HalfLineFunction) -> Result<f64> {
    p.check()?;
    eta.check()?;
    let amp = eta.values.iter().chain(eta.slopes.iter()).map(|v| v.norm()).fold(0.0, f64::max);
    let dc = p.d.map(C64::from);
    let off = eta
        .values
        .iter()
        .chain(eta.slopes.iter())
        .map(|v| v.iter().zip(dc.iter()).map(|(a, b)| a * b).sum::<C64>().norm())
        .fold(0.0, f64::max);
    if off > 1e-10 * amp.max(1e-300) && amp > 0.0 {
        return Err(Error::Domain(format!("test function is not tangential (|d . eta| = {off:e})")));
    }
    let bc = boundary_rows(p, &eta.values[0], &eta.slopes[0]);
    if amp > 0.0 && bc.norm() > 1e-9 * row_scale(p, &eta.values[0], &eta.slopes[0]) {
        return Err(Error::Domain(format!("boundary rows violated (residual {:e})", bc.norm())));
    }
    let [c0, c1, c2] = elastic_polynomial(p);
    let to3 = |m: &DMatrix<C64>| CMat3::from_fn(|i, j| m[(i, j)]);
    let (c0, c1, c2) = (to3(&c0), to3(&c1), to3(&c2));
    let i = C64::new(0.0, 1.0);
    let mut form = C64::from(0.0);
    for j in 0..eta.nodes.len() - 1 {
        let h = eta.nodes[j + 1] - eta.nodes[j];
        for &(s, w) in &GAUSS {
            let [e, de, dde] = hermite_eval(eta, j, s);
            let ae = c0 * e - c1 * de * i - c2 * dde;
            form += cdot(&ae, &e) * (w * h);
        }
    }
    let (l2, h1) = half_line_norms(eta);
    Ok(form.re - p.frank.alpha * (p.xi.norm_squared() * l2 + h1))
}

/// Settings for random compliant test functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplineConfig {
    pub length: f64,
    pub nodes: usize,
    /// Number of damped oscillations summed into each sample.
    pub modes: usize,
}

impl Default for SplineConfig {
    fn default() -> Self {
        Self { length: 20.0, nodes: 400, modes: 4 }
    }
}

/// Random tangential Hermite function satisfying the boundary rows.
///
/// Draws a sum of damped oscillations, projects it onto the plane orthogonal
/// to `d`, vanishes it at the far end, then corrects the value and slope at
/// `y = 0` by the minimal-norm change that zeroes the boundary rows.
pub fn compliant_test_function<R: Rng + ?Sized>(
    p: &HalfLineProblem,
    cfg: &SplineConfig,
    rng: &mut R,
) -> Result<HalfLineFunction> {
    if cfg.nodes < 3 || !(cfg.length > 0.0) {
        return Err(Error::InvalidInput("spline needs at least 3 nodes and positive length".into()));
    }
    let mut f = HalfLineFunction::zeros(cfg.length, cfg.nodes);
    let (t1, t2) = tangential_basis(&p.d);
    let (t1c, t2c) = (t1.map(C64::from), t2.map(C64::from));
    let mut cnorm = || C64::new(sampling::normal(rng), sampling::normal(rng));
    let modes: Vec<(C64, C64, C64)> = (0..cfg.modes).map(|_| (cnorm(), cnorm(), C64::from(0.0))).collect();
    let rates: Vec<C64> = modes
        .iter()
        .map(|_| C64::new(rng.gen_range(0.3..3.0), rng.gen_range(-3.0..3.0)))
        .collect();
    for (j, &y) in f.nodes.clone().iter().enumerate() {
        let (mut v, mut dv) = (CVec3::zeros(), CVec3::zeros());
        for ((a, b, _), r) in modes.iter().zip(&rates) {
            let e = (-r * y).exp();
            let w = t1c * *a + t2c * *b;
            v += w * e;
            dv += w * (-r * e);
        }
        f.values[j] = v;
        f.slopes[j] = dv;
    }
    let n = cfg.nodes;
    f.values[n - 1] = CVec3::zeros();
    f.slopes[n - 1] = CVec3::zeros();

    // The rows map tangential data to tangential vectors, so in the basis
    // (t1, t2) they form a 2x4 system; take its minimal-norm solution.
    let basis = [(t1c, CVec3::zeros()), (t2c, CVec3::zeros()), (CVec3::zeros(), t1c), (CVec3::zeros(), t2c)];
    let tang = |v: &CVec3| [cdot(v, &t1c), cdot(v, &t2c)];
    let a = DMatrix::from_fn(2, 4, |i, k| tang(&boundary_rows(p, &basis[k].0, &basis[k].1))[i]);
    let r0 = tang(&boundary_rows(p, &f.values[0], &f.slopes[0]));
    let rhs = DVector::from_fn(2, |i, _| -r0[i]);
    let gram = &a * a.adjoint();
    let y = gram
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Degenerate("boundary rows are rank deficient on tangential data".into()))?;
    let delta = a.adjoint() * y;
    f.values[0] += t1c * delta[0] + t2c * delta[1];
    f.slopes[0] += t1c * delta[2] + t2c * delta[3];
    let res = boundary_rows(p, &f.values[0], &f.slopes[0]).norm();
    if res > 1e-10 * row_scale(p, &f.values[0], &f.slopes[0]) {
        return Err(Error::Numerical { what: "boundary correction".into(), residual: res });
    }
    Ok(f)
}

// ---------------------------------------------------------------------------
// Test sets and sweeps

/// Which half-line problem a sweep checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LsKind {
    Director,
    Coupled,
}

impl LsKind {
    pub fn stable_dimension(self) -> usize {
        match self {
            LsKind::Director => 3,
            LsKind::Coupled => 6,
        }
    }
}

/// Compact admissible set `{Re lambda >= 0, |lambda| + |xi|^2 = 1}` times director directions.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
#[serde(default)]
pub struct TestSetSpec {
    /// Values of `|lambda|`; `|xi| = sqrt(1 - |lambda|)`.
    pub lambda_moduli: Vec<f64>,
    /// Arguments of `lambda`, within `[-pi/2, pi/2]`.
    pub lambda_args: Vec<f64>,
    /// Directions of `xi` in the wall plane.
    pub n_xi: usize,
    /// Director directions (spherical Fibonacci lattice).
    pub n_d: usize,
    /// Wall axes; the normal is the corresponding unit vector.
    pub axes: Vec<usize>,
}

impl Default for TestSetSpec {
    fn default() -> Self {
        let h = std::f64::consts::FRAC_PI_2;
        Self {
            lambda_moduli: vec![0.1, 0.4, 0.7, 1.0],
            lambda_args: vec![-h, 0.0, h],
            n_xi: 24,
            n_d: 24,
            axes: vec![2],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestPoint {
    pub lambda: C64,
    pub xi: Vec3,
    pub nu: Vec3,
    pub d: Vec3,
}

/// `n` nearly uniform unit vectors.
pub fn fibonacci_sphere(n: usize) -> Vec<Vec3> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let z = 1.0 - (2.0 * k as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * k as f64;
            Vec3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

impl TestSetSpec {
    pub fn validate(&self) -> Result<()> {
        if self.lambda_moduli.iter().any(|&t| !(0.0..=1.0).contains(&t)) {
            return Err(Error::Config("lambda moduli must lie in [0, 1]".into()));
        }
        let h = std::f64::consts::FRAC_PI_2 + 1e-12;
        if self.lambda_args.iter().any(|a| !(a.abs() <= h)) {
            return Err(Error::Config("lambda arguments must lie in [-pi/2, pi/2]".into()));
        }
        if self.axes.iter().any(|&a| a > 2) {
            return Err(Error::Config("axes must be 0, 1 or 2".into()));
        }
        if self.lambda_moduli.contains(&0.0) && self.n_xi == 0 {
            return Err(Error::Config("empty frequency set".into()));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<TestPoint> {
        let ds = fibonacci_sphere(self.n_d);
        let mut out = Vec::with_capacity(self.len());
        for &axis in &self.axes {
            let mut nu = Vec3::zeros();
            nu[axis] = 1.0;
            let (a, b) = ((axis + 1) % 3, (axis + 2) % 3);
            for &t in &self.lambda_moduli {
                for &arg in &self.lambda_args {
                    let lambda = C64::from_polar(t, arg);
                    let lambda = C64::new(lambda.re.max(0.0), lambda.im);
                    for k in 0..self.n_xi {
                        let th = 2.0 * std::f64::consts::PI * k as f64 / self.n_xi as f64;
                        let mut xi = Vec3::zeros();
                        xi[a] = th.cos();
                        xi[b] = th.sin();
                        let xi = xi * (1.0 - t).max(0.0).sqrt();
                        for d in &ds {
                            out.push(TestPoint { lambda, xi, nu, d: *d });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.axes.len() * self.lambda_moduli.len() * self.lambda_args.len() * self.n_xi * self.n_d
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One row of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LsRow {
    #[serde(skip)]
    pub point: TestPoint,
    pub stable_dim: usize,
    pub det_modulus: f64,
    pub min_sv: f64,
    pub pass: bool,
}

/// Runs the check at every point in parallel. Failing points produce rows with `pass = false`.
pub fn ls_sweep(
    points: &[TestPoint],
    frank: &FrankCoefficients,
    leslie: &LeslieCoefficients,
    kind: LsKind,
) -> Vec<LsRow> {
    points
        .par_iter()
        .map(|pt| {
            let r = HalfLineProblem::new(pt.lambda, pt.xi, pt.nu, pt.d, *frank, *leslie).and_then(|p| match kind {
                LsKind::Director => director_ls_check(&p),
                LsKind::Coupled => coupled_ls_check(&p),
            });
            match r {
                Ok(r) => LsRow {
                    point: *pt,
                    stable_dim: r.stable_dimension,
                    det_modulus: r.lopatinskii_det_modulus,
                    min_sv: r.min_singular_value,
                    pass: r.passes(kind.stable_dimension(), frank.scale()),
                },
                Err(e) => LsRow {
                    point: *pt,
                    stable_dim: match e {
                        Error::Structural { found, .. } => found,
                        _ => 0,
                    },
                    det_modulus: f64::NAN,
                    min_sv: f64::NAN,
                    pass: false,
                },
            }
        })
        .collect()
}
