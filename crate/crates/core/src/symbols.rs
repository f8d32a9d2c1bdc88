//! Fourier symbols of the linearized director and flow operators.
//!
//! The elastic symbol is
//!
//! ```text
//! m_d(xi) = 2k3 |xi|^2 I + 2(k1-k3) P_d xi (x) xi + 2(k2-k3) (d x xi) (x) (d x xi)
//! ```
//!
//! Its symmetric part has, for a unit direction `zeta` with `z = d . zeta`
//! and `s = |d x zeta| = sqrt(1 - z^2)`, the eigenvalues
//!
//! ```text
//! transverse = 2k2 s^2 + 2k3 (1 - s^2)         (eigenvector d x zeta)
//! lambda_pm  = 2k3 + (k1-k3)(s^2 +- s)         (in span{zeta, d})
//! ```
//!
//! so the smallest value over all directions is `(9k3 - k1)/4` when
//! `k1 > k3`, reached at `z^2 = 3/4`.
//!
//! The coupled symbols follow the block form
//! `L0 = [[M_u, i lambda R1^T], [-i R0, M_d]]` acting on `(u, d)`.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use num_complex::Complex64 as C64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::{FrankCoefficients, LeslieCoefficients};
use crate::energy::UNIT_TOL;
use crate::error::{Error, Result};
use crate::fields::{Mat3, Vec3};
use crate::sampling::{self, DEFAULT_SEED};

pub type CMat3 = Matrix3<C64>;
pub type CVec3 = Vector3<C64>;

/// Relative margin for the strong-ellipticity certificate.
pub const CERTIFICATE_MARGIN: f64 = 1e-12;
/// Condition-number guard for inverting `M_d`.
pub const COND_LIMIT: f64 = 1e12;

const BRANCH_Z: f64 = 1e-10;
const BRANCH_K: f64 = 1e-12;

fn check_unit(d: &Vec3) -> Result<()> {
    if !((d.norm() - 1.0).abs() <= UNIT_TOL) {
        return Err(Error::Domain(format!("director has norm {} (expected 1)", d.norm())));
    }
    Ok(())
}

fn proj(d: &Vec3) -> Mat3 {
    Mat3::identity() - d * d.transpose()
}

pub(crate) fn symbol_m_unchecked(xi: &Vec3, d: &Vec3, c: &FrankCoefficients) -> Mat3 {
    let dx = d.cross(xi);
    Mat3::identity() * (2.0 * c.k3 * xi.norm_squared())
        + proj(d) * xi * xi.transpose() * (2.0 * (c.k1 - c.k3))
        + dx * dx.transpose() * (2.0 * (c.k2 - c.k3))
}

/// `m_d(xi)`
pub fn symbol_m(xi: &Vec3, d: &Vec3, c: &FrankCoefficients) -> Result<Mat3> {
    check_unit(d)?;
    Ok(symbol_m_unchecked(xi, d, c))
}

pub fn symbol_m_sym(xi: &Vec3, d: &Vec3, c: &FrankCoefficients) -> Result<Mat3> {
    let m = symbol_m(xi, d, c)?;
    Ok((m + m.transpose()) * 0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EigenCase {
    /// `d` parallel to `xi`: all three equal `2k3`.
    Parallel,
    /// `d` orthogonal to `xi`: `{2k1, 2k3, 2k2}`.
    Perpendicular,
    /// Oblique, `k1 != k3`.
    Oblique,
    /// `k1 = k3`: `xi` and `d` share the eigenvalue `2k3`.
    EqualSplayBend,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedForm {
    pub case: EigenCase,
    pub plus: f64,
    pub minus: f64,
    pub transverse: f64,
}

impl ClosedForm {
    pub fn sorted(&self) -> [f64; 3] {
        let mut v = [self.plus, self.minus, self.transverse];
        v.sort_by(f64::total_cmp);
        v
    }
}

/// Closed-form eigenvalues of the symmetric symbol for `|xi| = 1`.
///
/// `z = d . zeta`, `s = |d x zeta|`; passing `s` separately keeps accuracy
/// near `z^2 = 1` where `sqrt(1 - z^2)` cancels.
pub fn closed_form_unit(z: f64, s: f64, c: &FrankCoefficients) -> ClosedForm {
    let s2 = s * s;
    let transverse = 2.0 * c.k2 * s2 + 2.0 * c.k3 * (1.0 - s2);
    if (1.0 - z * z).abs() < BRANCH_Z || s < BRANCH_Z {
        return ClosedForm { case: EigenCase::Parallel, plus: 2.0 * c.k3, minus: 2.0 * c.k3, transverse: 2.0 * c.k3 };
    }
    if (c.k1 - c.k3).abs() < BRANCH_K {
        return ClosedForm { case: EigenCase::EqualSplayBend, plus: 2.0 * c.k3, minus: 2.0 * c.k3, transverse };
    }
    if z == 0.0 {
        return ClosedForm { case: EigenCase::Perpendicular, plus: 2.0 * c.k1, minus: 2.0 * c.k3, transverse };
    }
    ClosedForm {
        case: EigenCase::Oblique,
        plus: 2.0 * c.k3 + (c.k1 - c.k3) * (s2 + s),
        minus: 2.0 * c.k3 + (c.k1 - c.k3) * (s2 - s),
        transverse,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenReport {
    /// Eigenvalues of the full (non-symmetric) symbol, sorted by real part.
    #[serde(skip)]
    pub eigenvalues: [C64; 3],
    /// Eigenvalues of the symmetric part, ascending.
    pub symmetric: [f64; 3],
    /// Smallest eigenvalue of the symmetric part divided by `|xi|^2`.
    pub min_rayleigh: f64,
    /// Closed form scaled by `|xi|^2`.
    pub closed_form: ClosedForm,
    /// All eigenvalues of `m_d` real and positive (diagnostic only).
    pub normally_elliptic: bool,
}

fn sym_eigs(m: &Mat3) -> Result<[f64; 3]> {
    let e = SymmetricEigen::try_new(*m, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical { what: "symmetric eigensolver".into(), residual: f64::NAN })?;
    let mut v = [e.eigenvalues[0], e.eigenvalues[1], e.eigenvalues[2]];
    v.sort_by(f64::total_cmp);
    Ok(v)
}

pub fn symmetric_eigs(xi: &Vec3, d: &Vec3, c: &FrankCoefficients) -> Result<EigenReport> {
    check_unit(d)?;
    let r = xi.norm();
    if !(r > 0.0) {
        return Err(Error::InvalidInput("symmetric_eigs needs |xi| > 0".into()));
    }
    let m = symbol_m_unchecked(xi, d, c);
    let symmetric = sym_eigs(&((m + m.transpose()) * 0.5))?;
    let zeta = xi / r;
    let mut cf = closed_form_unit(d.dot(&zeta), d.cross(&zeta).norm(), c);
    let r2 = r * r;
    cf.plus *= r2;
    cf.minus *= r2;
    cf.transverse *= r2;
    let ev = m.complex_eigenvalues();
    let mut eigenvalues = [ev[0], ev[1], ev[2]];
    eigenvalues.sort_by(|a, b| a.re.total_cmp(&b.re));
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let normally_elliptic = eigenvalues.iter().all(|l| l.im.abs() <= 1e-10 * scale && l.re > 0.0);
    Ok(EigenReport { eigenvalues, symmetric, min_rayleigh: symmetric[0] / r2, closed_form: cf, normally_elliptic })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    /// Angular grid size per spherical angle.
    pub grid: usize,
    /// Number of random `(d, zeta)` pairs.
    pub random: usize,
    pub seed: u64,
    /// Golden-section refinement around the best sample.
    pub refine: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self { grid: 64, random: 10_000, seed: DEFAULT_SEED, refine: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub d: Vec3,
    pub zeta: Vec3,
    /// `d . zeta`
    pub z: f64,
    /// Polar angle of `zeta` about `d`.
    pub theta: f64,
    /// Smallest eigenvalue of the symmetric symbol at this sample.
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Certificate {
    pub c_min: f64,
    pub witness: Witness,
    pub passes: bool,
    pub samples: usize,
}

fn min_eig_at(d: &Vec3, zeta: &Vec3, c: &FrankCoefficients) -> f64 {
    let m = symbol_m_unchecked(zeta, d, c);
    sym_eigs(&((m + m.transpose()) * 0.5)).map(|v| v[0]).unwrap_or(f64::NAN)
}

fn polar(theta: f64, phi: f64) -> Vec3 {
    Vec3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
}

/// Samples the unit sphere for the smallest eigenvalue of the symmetric symbol.
///
/// Passes iff `c_min > CERTIFICATE_MARGIN * max k`. Coefficients failing the
/// positivity assumption are processed the same way (diagnostic mode); a
/// failing certificate carries the most negative sample as witness.
pub fn certify_strong_ellipticity(c: &FrankCoefficients, cfg: &SamplerConfig) -> Result<Certificate> {
    if cfg.grid < 2 {
        return Err(Error::InvalidInput("angular grid needs at least 2 points".into()));
    }
    let e3 = Vec3::z();
    let mut best = Witness { d: e3, zeta: e3, z: 1.0, theta: 0.0, value: f64::INFINITY };
    let consider = |d: Vec3, zeta: Vec3, best: &mut Witness| {
        let v = min_eig_at(&d, &zeta, c);
        if v < best.value || v.is_nan() {
            let z = d.dot(&zeta);
            *best = Witness { d, zeta, z, theta: d.cross(&zeta).norm().atan2(z), value: v };
        }
    };
    let n = cfg.grid;
    for i in 0..n {
        let theta = std::f64::consts::PI * i as f64 / (n - 1) as f64;
        for j in 0..n {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
            consider(e3, polar(theta, phi), &mut best);
        }
    }
    let mut rng = sampling::rng(cfg.seed);
    for _ in 0..cfg.random {
        let d = sampling::unit_vector(&mut rng);
        let zeta = sampling::unit_vector(&mut rng);
        consider(d, zeta, &mut best);
    }
    let mut samples = n * n + cfg.random;
    if cfg.refine && best.value.is_finite() {
        // the symmetric spectrum depends on the polar angle only
        let f = |t: f64| min_eig_at(&e3, &polar(t, 0.0), c);
        let width = std::f64::consts::PI / (n - 1) as f64;
        let (mut a, mut b) = ((best.theta - width).max(0.0), (best.theta + width).min(std::f64::consts::PI));
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut x1, mut x2) = (b - g * (b - a), a + g * (b - a));
        let (mut f1, mut f2) = (f(x1), f(x2));
        for _ in 0..80 {
            if f1 < f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - g * (b - a);
                f1 = f(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + g * (b - a);
                f2 = f(x2);
            }
            samples += 1;
        }
        let t = 0.5 * (a + b);
        let v = f(t);
        if v < best.value {
            let zeta = polar(t, 0.0);
            best = Witness { d: e3, zeta, z: t.cos(), theta: t, value: v };
        }
    }
    let scale = c.k1.abs().max(c.k2.abs()).max(c.k3.abs());
    let passes = best.value > CERTIFICATE_MARGIN * scale;
    Ok(Certificate { c_min: best.value, witness: best, passes, samples })
}

/// A frozen-coefficient point of the coupled symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolPoint {
    pub lambda: C64,
    pub xi: Vec3,
    pub d: Vec3,
    pub frank: FrankCoefficients,
    pub leslie: LeslieCoefficients,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesSymbols {
    pub m_u: CMat3,
    pub m_d: CMat3,
    pub r0: CMat3,
    pub r1: CMat3,
    pub r_mu: CMat3,
    pub r: CMat3,
}

pub(crate) fn complexify(m: &Mat3) -> CMat3 {
    m.map(|x| C64::new(x, 0.0))
}

/// Real parts of the coupling symbols at a real frequency (no `lambda` dependence).
pub(crate) fn coupling_real(xi: &Vec3, d: &Vec3, l: &LeslieCoefficients) -> (Mat3, Mat3, Mat3, Mat3) {
    let p = proj(d);
    let a = p * xi * d.transpose();
    let b = p * xi.dot(d);
    let r0 = a * ((l.mu_d + l.mu_v) / 2.0) + b * ((l.mu_d - l.mu_v) / 2.0);
    let r_mu = a * l.mu_plus() + b * l.mu_minus();
    let r = a + b;
    (r0, r_mu - r0, r_mu, r)
}

/// `M_u - rho lambda I`, the frequency-only part of the velocity symbol.
pub(crate) fn m_u_spatial(xi: &Vec3, d: &Vec3, l: &LeslieCoefficients) -> Mat3 {
    let (_, _, r_mu, r) = coupling_real(xi, d, l);
    let xd = xi.dot(d);
    Mat3::identity() * (l.mu_s * xi.norm_squared())
        + d * d.transpose() * (l.mu_0 * xd * xd)
        + r.transpose() * r * (l.mu_l / 4.0)
        + r_mu.transpose() * r_mu * (1.0 / (4.0 * l.gamma))
        + (r - r.transpose()) * (l.mu_p * l.mu_v / (2.0 * l.gamma) * xd)
}

pub fn stokes_symbols(p: &SymbolPoint) -> Result<StokesSymbols> {
    check_unit(&p.d)?;
    let l = &p.leslie;
    let (r0, r1, r_mu, r) = coupling_real(&p.xi, &p.d, l);
    let id = CMat3::identity();
    let m_u = id * (p.lambda * l.rho) + complexify(&m_u_spatial(&p.xi, &p.d, l));
    let m_d = id * (p.lambda * l.gamma) + complexify(&symbol_m_unchecked(&p.xi, &p.d, &p.frank));
    Ok(StokesSymbols {
        m_u,
        m_d,
        r0: complexify(&r0),
        r1: complexify(&r1),
        r_mu: complexify(&r_mu),
        r: complexify(&r),
    })
}

/// Ratio of extreme singular values.
pub fn condition_number(m: &CMat3) -> f64 {
    let s = m.singular_values();
    let (hi, lo) = (s.max(), s.min());
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

/// `M = M_u - lambda R1^T M_d^{-1} R0`
pub fn schur_complement(p: &SymbolPoint) -> Result<CMat3> {
    let s = stokes_symbols(p)?;
    let cond = condition_number(&s.m_d);
    if !(cond <= COND_LIMIT) {
        return Err(Error::Degenerate(format!("M_d is numerically singular (cond {cond:e})")));
    }
    let inv = s.m_d.try_inverse().ok_or_else(|| Error::Degenerate("M_d is singular".into()))?;
    Ok(s.m_u - s.r1.transpose() * inv * s.r0 * p.lambda)
}

/// `(x | y) = sum x_i conj(y_i)`
pub fn inner(x: &CVec3, y: &CVec3) -> C64 {
    x.iter().zip(y.iter()).map(|(a, b)| a * b.conj()).sum()
}

/// `Re(L0 v | J v) - (rho Re lambda + mu_s |xi|^2) |u|^2` with `J(u, d) = (u, lambda d)`.
pub fn accretivity_form(p: &SymbolPoint, s: &StokesSymbols, u: &CVec3, d: &CVec3) -> f64 {
    let i = C64::new(0.0, 1.0);
    let top = s.m_u * u + s.r1.transpose() * d * (i * p.lambda);
    let bot = s.m_d * d - s.r0 * u * i;
    let full = inner(&top, u) + inner(&bot, &(d * p.lambda));
    full.re - (p.leslie.rho * p.lambda.re + p.leslie.mu_s * p.xi.norm_squared()) * u.norm_squared()
}

/// `Im(lambda) Im(m_d d | d)`: the part of `Re(conj(lambda) (m_d d | d))` beyond
/// `Re(lambda) Re(m_d d | d)`. Nonzero only through the skew part of `m_d`,
/// which vanishes on directors orthogonal to the frozen `d`.
pub fn skew_defect(p: &SymbolPoint, d: &CVec3) -> f64 {
    let m = complexify(&symbol_m_unchecked(&p.xi, &p.d, &p.frank));
    p.lambda.im * inner(&(m * d), d).im
}

/// `Re(M u | u) - (rho Re lambda + mu_s |xi|^2) |u|^2`
pub fn schur_form(p: &SymbolPoint, m: &CMat3, u: &CVec3) -> f64 {
    inner(&(m * u), u).re - (p.leslie.rho * p.lambda.re + p.leslie.mu_s * p.xi.norm_squared()) * u.norm_squared()
}

/// `|R_mu u|^2/(4 gamma) + Re[i lambda (d | R_mu u)] + gamma |lambda|^2 |d|^2`
/// minus the square `(sqrt(gamma)|lambda||d| - |R_mu u|/(2 sqrt(gamma)))^2`.
pub fn completed_square_gap(p: &SymbolPoint, s: &StokesSymbols, u: &CVec3, d: &CVec3) -> f64 {
    let g = p.leslie.gamma;
    let ru = s.r_mu * u;
    let lhs = ru.norm_squared() / (4.0 * g)
        + (C64::new(0.0, 1.0) * p.lambda * inner(d, &ru)).re
        + g * p.lambda.norm_sqr() * d.norm_squared();
    let sq = (g.sqrt() * p.lambda.norm() * d.norm() - ru.norm() / (2.0 * g.sqrt())).powi(2);
    lhs - sq
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AccretivityReport {
    /// Min of the full form over random `v = (u, d)`, relative to the point scale.
    pub min_full: f64,
    /// Same, with the director restricted to the orthogonal complement of `d`.
    pub min_tangential: f64,
    /// Full form with the skew defect removed.
    pub min_full_corrected: f64,
    /// Min of the Schur form over random `u`.
    pub min_schur: f64,
    /// Normalizing scale used for the relative values.
    pub scale: f64,
}

fn random_cvec<R: Rng + ?Sized>(rng: &mut R) -> CVec3 {
    CVec3::from_fn(|_, _| C64::new(sampling::normal(rng), sampling::normal(rng)))
}

/// Evaluates the accretivity forms on `trials` random vectors.
///
/// Every value is divided by `scale * |v|^2`, where `scale` bounds the
/// entries of the block symbol; the estimate holds when all minima are
/// `>= -tol` for a small `tol`.
pub fn accretivity_check<R: Rng + ?Sized>(p: &SymbolPoint, trials: usize, rng: &mut R) -> Result<AccretivityReport> {
    if p.lambda.re < 0.0 {
        return Err(Error::Domain("accretivity needs Re lambda >= 0".into()));
    }
    let s = stokes_symbols(p)?;
    let m = schur_complement(p)?;
    let scale = [s.m_u, s.m_d, s.r0, s.r1].iter().map(|a| a.iter().map(|z| z.norm()).fold(0.0, f64::max)).fold(0.0, f64::max)
        * (1.0 + p.lambda.norm());
    let pd = complexify(&proj(&p.d));
    let mut r = AccretivityReport {
        min_full: f64::INFINITY,
        min_tangential: f64::INFINITY,
        min_full_corrected: f64::INFINITY,
        min_schur: f64::INFINITY,
        scale,
    };
    for _ in 0..trials {
        let u = random_cvec(rng);
        let d = random_cvec(rng);
        let n2 = u.norm_squared() + d.norm_squared();
        let full = accretivity_form(p, &s, &u, &d);
        r.min_full = r.min_full.min(full / (scale * n2));
        r.min_full_corrected = r.min_full_corrected.min((full - skew_defect(p, &d)) / (scale * n2));
        let dt = pd * d;
        let nt = u.norm_squared() + dt.norm_squared();
        r.min_tangential = r.min_tangential.min(accretivity_form(p, &s, &u, &dt) / (scale * nt));
        r.min_schur = r.min_schur.min(schur_form(p, &m, &u) / (scale * u.norm_squared()));
    }
    Ok(r)
}

/// Random admissible point: `Re lambda >= 0`, `|lambda| + |xi|^2 = 1`.
pub fn random_symbol_point<R: Rng + ?Sized>(
    rng: &mut R,
    frank: FrankCoefficients,
    leslie: LeslieCoefficients,
) -> SymbolPoint {
    let t: f64 = rng.gen_range(0.0..1.0);
    let arg = rng.gen_range(-std::f64::consts::FRAC_PI_2..=std::f64::consts::FRAC_PI_2);
    SymbolPoint {
        lambda: C64::from_polar(t, arg),
        xi: sampling::unit_vector(rng) * (1.0 - t).sqrt(),
        d: sampling::unit_vector(rng),
        frank,
        leslie,
    }
}

/// Evenly spaced values `min..=max`; a single value when `n == 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl AxisRange {
    pub fn fixed(v: f64) -> Self {
        Self { min: v, max: v, n: 1 }
    }

    pub fn values(&self) -> Vec<f64> {
        match self.n {
            0 => Vec::new(),
            1 => vec![self.min],
            n => (0..n).map(|i| self.min + (self.max - self.min) * i as f64 / (n - 1) as f64).collect(),
        }
    }
}

/// Parameter grid for [`ellipticity_scan`]; `alpha = alpha_fraction * min(k1, k2, k3)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    pub k1: AxisRange,
    pub k2: AxisRange,
    pub k3: AxisRange,
    pub alpha_fraction: f64,
}

impl Default for ScanSpec {
    fn default() -> Self {
        Self {
            k1: AxisRange { min: 0.5, max: 12.0, n: 116 },
            k2: AxisRange::fixed(1.0),
            k3: AxisRange::fixed(1.0),
            alpha_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub alpha: f64,
    pub c_min: f64,
    pub witness_z: f64,
    pub witness_theta: f64,
    pub pass: bool,
}

/// Strong-ellipticity certificate at every grid point, in `k1`-major order.
pub fn ellipticity_scan(spec: &ScanSpec, sampler: &SamplerConfig) -> Result<Vec<ScanRow>> {
    if !(spec.alpha_fraction > 0.0 && spec.alpha_fraction <= 1.0) {
        return Err(Error::InvalidInput(format!("alpha_fraction must lie in (0, 1], got {}", spec.alpha_fraction)));
    }
    let mut points = Vec::new();
    for k1 in spec.k1.values() {
        for k2 in spec.k2.values() {
            for k3 in spec.k3.values() {
                points.push((k1, k2, k3));
            }
        }
    }
    points
        .into_par_iter()
        .map(|(k1, k2, k3)| {
            let alpha = spec.alpha_fraction * k1.min(k2).min(k3);
            let c = FrankCoefficients::new(k1, k2, k3, alpha)?;
            let cert = certify_strong_ellipticity(&c, sampler)?;
            Ok(ScanRow {
                k1,
                k2,
                k3,
                alpha,
                c_min: cert.c_min,
                witness_z: cert.witness.z,
                witness_theta: cert.witness.theta,
                pass: cert.passes,
            })
        })
        .collect()
}
