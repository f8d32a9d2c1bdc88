//! FFT-based solvers on periodic directions.
//!
//! [`Spectral`] owns the FFT plans for a grid and provides the discrete
//! Helmholtz (Leray) projection and implicit `(I - c Lap) x = b` solves. On
//! slabs the periodic directions are transformed and each tangential mode is
//! solved along the wall normal.
//!
//! # Algorithm
//!
//! The projection is the exact orthogonal projection onto the kernel of the
//! discrete divergence `D` (centered differences, the same stencil as
//! [`crate::fields::vector_divergence`]): `u - D^H (D D^H)^+ D u`. In a
//! periodic box `D` is diagonal in Fourier space with symbol `i sin(k h) / h`.
//! On a slab the wall values stay zero and, per tangential mode, `D D^H` is
//! `|k_t'|^2 I + Dz Dz^T`, diagonalized once through the left singular vectors of
//! `Dz` (so of the pentadiagonal `Dz Dz^T`). Because the centered normal stencil decouples
//! odd and even planes, this matrix is not tridiagonal and may be singular;
//! the pseudo-inverse handles that.
//!
//! Implicit diffusion uses the compact Laplacian. In periodic directions it
//! is diagonal; along a wall normal it is a tridiagonal system per mode,
//! solved with the Thomas algorithm.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SVD};
use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::fields::{tangential_axes, vector_divergence, Grid, ScalarField, Vec3, VectorField};

/// Boundary treatment along the wall normal for implicit solves.
pub enum NormalBc<'a> {
    /// Wall values forced to zero.
    Dirichlet,
    /// Ghost values `x_{-1} = x_1 + lo`, `x_n = x_{n-2} + hi`, per wall node (plane order).
    Ghost { lo: &'a [Vec3], hi: &'a [Vec3] },
}

struct SlabNormal {
    wall: usize,
    q: DMatrix<f64>,
    lam: DVector<f64>,
}

pub struct Spectral {
    grid: Grid,
    fwd: [Arc<dyn Fft<f64>>; 3],
    inv: [Arc<dyn Fft<f64>>; 3],
    slab: Option<SlabNormal>,
    /// Per-axis tables `sin(k h)/h` and `4 sin^2(k h/2)/h^2` by FFT bin.
    kd: [Vec<f64>; 3],
    lap1: [Vec<f64>; 3],
    /// Node holding the wavenumber `-k` (identity along the wall axis).
    neg: Vec<usize>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish_non_exhaustive()
    }
}

/// Integer wavenumber of FFT bin `m` on `n` points.
fn wavenumber(m: usize, n: usize) -> f64 {
    if m <= n / 2 {
        m as f64
    } else {
        m as f64 - n as f64
    }
}

impl Spectral {
    pub fn new(grid: &Grid) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.extents();
        let fwd = [0, 1, 2].map(|a| planner.plan_fft_forward(n[a]));
        let inv = [0, 1, 2].map(|a| planner.plan_fft_inverse(n[a]));
        let slab = grid.wall_axis().map(|w| {
            let m = n[w] - 2;
            let h = grid.spacing()[w];
            let mut dz = DMatrix::<f64>::zeros(m, m);
            for r in 0..m {
                if r + 1 < m {
                    dz[(r, r + 1)] = 0.5 / h;
                }
                if r > 0 {
                    dz[(r, r - 1)] = -0.5 / h;
                }
            }
            // Dz Dz^T = U S^2 U^T; the SVD stays accurate where the symmetric
            // eigensolver loses digits on the exact null mode of odd m
            let svd = SVD::new(dz, true, false);
            let q = svd.u.expect("left vectors requested");
            SlabNormal { wall: w, q, lam: svd.singular_values.map(|x| x * x) }
        });
        let h = grid.spacing();
        let table = |f: &dyn Fn(f64, f64) -> f64| {
            [0, 1, 2].map(|a| {
                (0..n[a])
                    .map(|m| {
                        if Some(a) == grid.wall_axis() {
                            return 0.0;
                        }
                        let k = 2.0 * PI * wavenumber(m, n[a]) / (n[a] as f64 * h[a]);
                        f(k, h[a])
                    })
                    .collect::<Vec<f64>>()
            })
        };
        let kd = table(&|k, h| (k * h).sin() / h);
        let lap1 = table(&|k, h| {
            let s = (0.5 * k * h).sin();
            4.0 * s * s / (h * h)
        });
        let neg = (0..grid.len())
            .map(|idx| {
                let mut c = grid.coords(idx);
                for a in 0..3 {
                    if Some(a) != grid.wall_axis() {
                        c[a] = (n[a] - c[a]) % n[a];
                    }
                }
                grid.index(c[0], c[1], c[2])
            })
            .collect();
        Self { grid: *grid, fwd, inv, slab, kd, lap1, neg }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn periodic_axes(&self) -> Vec<usize> {
        (0..3).filter(|a| Some(*a) != self.grid.wall_axis()).collect()
    }

    /// In-place FFT along every periodic axis. Lines are gathered block by
    /// block into contiguous scratch so each axis is one batched call per block.
    fn transform(&self, data: &mut [C64], inverse: bool) {
        let n = self.grid.extents();
        let mut buf = Vec::new();
        let mut scratch = Vec::new();
        for a in self.periodic_axes() {
            let s = self.grid.stride(a);
            let na = n[a];
            let plan = if inverse { &self.inv[a] } else { &self.fwd[a] };
            scratch.resize(plan.get_inplace_scratch_len(), C64::new(0.0, 0.0));
            let scale = if inverse { 1.0 / na as f64 } else { 1.0 };
            let block = na * s;
            if s == 1 {
                plan.process_with_scratch(data, &mut scratch);
                if inverse {
                    data.iter_mut().for_each(|v| *v *= scale);
                }
                continue;
            }
            buf.resize(block, C64::new(0.0, 0.0));
            for chunk in data.chunks_mut(block) {
                // chunk is an na x s row-major matrix; lines run down columns
                for t in 0..na {
                    for q in 0..s {
                        buf[q * na + t] = chunk[t * s + q];
                    }
                }
                plan.process_with_scratch(&mut buf, &mut scratch);
                for t in 0..na {
                    for q in 0..s {
                        chunk[t * s + q] = buf[q * na + t] * scale;
                    }
                }
            }
        }
    }

    /// Transforms of `(x + i y, z)`. Valid input for operators whose symbol is
    /// real and even in `k`, which then map the packed pair to packed solutions.
    fn to_spectral_packed(&self, f: &VectorField) -> [Vec<C64>; 2] {
        let mut a: Vec<C64> = f.values().iter().map(|v| C64::new(v[0], v[1])).collect();
        let mut b: Vec<C64> = f.values().iter().map(|v| C64::new(v[2], 0.0)).collect();
        self.transform(&mut a, false);
        self.transform(&mut b, false);
        [a, b]
    }

    fn from_spectral_packed(&self, mut bufs: [Vec<C64>; 2]) -> VectorField {
        for b in bufs.iter_mut() {
            self.transform(b, true);
        }
        let data = (0..self.grid.len()).map(|i| Vec3::new(bufs[0][i].re, bufs[0][i].im, bufs[1][i].re)).collect();
        VectorField::from_vec(&self.grid, data).expect("sizes match")
    }

    /// Separate spectra of the three real components.
    fn to_spectral(&self, f: &VectorField) -> [Vec<C64>; 3] {
        let [z, w] = self.to_spectral_packed(f);
        let half = C64::new(0.5, 0.0);
        let mut x = vec![C64::new(0.0, 0.0); z.len()];
        let mut y = vec![C64::new(0.0, 0.0); z.len()];
        for i in 0..z.len() {
            let zc = z[self.neg[i]].conj();
            x[i] = (z[i] + zc) * half;
            y[i] = (z[i] - zc) * C64::new(0.0, -0.5);
        }
        [x, y, w]
    }

    /// Per-node modified wavenumbers `(sin(k h)/h, 4 sin^2(k h/2)/h^2)` in periodic axes.
    fn symbols(&self, idx: usize) -> ([f64; 3], f64) {
        let c = self.grid.coords(idx);
        let kd = [self.kd[0][c[0]], self.kd[1][c[1]], self.kd[2][c[2]]];
        (kd, self.lap1[0][c[0]] + self.lap1[1][c[1]] + self.lap1[2][c[2]])
    }

    /// Returns `(P u, phi)` with `P u = u - grad_h phi` discretely divergence free.
    pub fn project(&self, u: &VectorField) -> Result<(VectorField, ScalarField)> {
        let mut uh = self.to_spectral(u);
        let mut ph = vec![C64::new(0.0, 0.0); self.grid.len()];
        match &self.slab {
            None => {
                let kmax = self.periodic_axes().iter().map(|&a| 1.0 / self.grid.spacing()[a].powi(2)).sum::<f64>();
                for idx in 0..self.grid.len() {
                    let (k, _) = self.symbols(idx);
                    let kk = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
                    if kk <= 1e-13 * kmax {
                        continue;
                    }
                    let kdotu = uh[0][idx] * k[0] + uh[1][idx] * k[1] + uh[2][idx] * k[2];
                    let s = kdotu / kk;
                    for c in 0..3 {
                        uh[c][idx] -= s * k[c];
                    }
                    ph[idx] = C64::new(0.0, -1.0) * s;
                }
            }
            Some(sl) => self.project_slab(sl, &mut uh, &mut ph),
        }
        // real outputs: pack (u0 + i u1) and (u2 + i phi)
        let [u0, u1, u2] = uh;
        let i = C64::new(0.0, 1.0);
        let a: Vec<C64> = u0.iter().zip(&u1).map(|(x, y)| x + i * y).collect();
        let b: Vec<C64> = u2.iter().zip(&ph).map(|(x, y)| x + i * y).collect();
        let (mut a, mut b) = (a, b);
        self.transform(&mut a, true);
        self.transform(&mut b, true);
        let out = VectorField::from_vec(
            &self.grid,
            a.iter().zip(&b).map(|(x, y)| Vec3::new(x.re, x.im, y.re)).collect(),
        )
        .expect("sizes match");
        let phi = ScalarField::from_vec(&self.grid, b.iter().map(|z| z.im).collect()).expect("sizes match");
        let mut out = out;
        if self.slab.is_some() {
            // packing leaves round-off on the no-slip walls
            for side in 0..2 {
                for idx in crate::fields::wall_nodes(&self.grid, side) {
                    out.values_mut()[idx] = Vec3::zeros();
                }
            }
        }
        let scale = u.max_abs().max(out.max_abs()) / self.grid.h_min();
        let div = vector_divergence(&out).max_abs_interior();
        if div > 1e-9 * scale.max(1e-300) {
            return Err(Error::Numerical { what: "Helmholtz projection".into(), residual: div });
        }
        Ok((out, phi))
    }

    fn project_slab(&self, sl: &SlabNormal, uh: &mut [Vec<C64>; 3], ph: &mut [C64]) {
        let w = sl.wall;
        let n = self.grid.extents();
        let h = self.grid.spacing()[w];
        let sw = self.grid.stride(w);
        let m = n[w] - 2;
        let lam_max = sl.lam.amax().max(1.0 / (h * h));
        let (ta, tb) = tangential_axes(w);
        let mut r = DVector::<C64>::zeros(m);
        for base in 0..self.grid.len() {
            if (base / sw) % n[w] != 0 {
                continue;
            }
            let (k, _) = self.symbols(base);
            let kt2 = k[ta] * k[ta] + k[tb] * k[tb];
            let i = C64::new(0.0, 1.0);
            let at = |j: usize| base + j * sw;
            for row in 0..m {
                let j = row + 1;
                r[row] = i * k[ta] * uh[ta][at(j)] + i * k[tb] * uh[tb][at(j)]
                    + (uh[w][at(j + 1)] - uh[w][at(j - 1)]) * (0.5 / h);
            }
            // pi = Q diag(1/(kt2 + lam)) Q^T r
            let mut coef = DVector::<C64>::zeros(m);
            for e in 0..m {
                let den = kt2 + sl.lam[e];
                if den > 1e-9 * lam_max {
                    let mut acc = C64::new(0.0, 0.0);
                    for row in 0..m {
                        acc += r[row] * sl.q[(row, e)];
                    }
                    coef[e] = acc / den;
                }
            }
            let mut pi = vec![C64::new(0.0, 0.0); m + 2];
            for row in 0..m {
                let mut acc = C64::new(0.0, 0.0);
                for e in 0..m {
                    acc += coef[e] * sl.q[(row, e)];
                }
                pi[row + 1] = acc;
            }
            for j in 1..=m {
                uh[ta][at(j)] += i * k[ta] * pi[j];
                uh[tb][at(j)] += i * k[tb] * pi[j];
                uh[w][at(j)] -= (pi[j - 1] - pi[j + 1]) * (0.5 / h);
                ph[at(j)] = -pi[j];
            }
            ph[at(0)] = ph[at(1)];
            ph[at(m + 1)] = ph[at(m)];
        }
    }

    /// Solves `(I - c Lap_h) x = b`, `c >= 0`.
    pub fn solve_helmholtz(&self, b: &VectorField, c: f64, bc: NormalBc<'_>) -> VectorField {
        match &self.slab {
            None => {
                let mut bh = self.to_spectral_packed(b);
                for idx in 0..self.grid.len() {
                    let (_, lap) = self.symbols(idx);
                    let den = 1.0 + c * lap;
                    for buf in bh.iter_mut() {
                        buf[idx] /= den;
                    }
                }
                self.from_spectral_packed(bh)
            }
            Some(sl) => self.solve_helmholtz_slab(sl.wall, b, c, bc),
        }
    }

    fn solve_helmholtz_slab(&self, w: usize, b: &VectorField, c: f64, bc: NormalBc<'_>) -> VectorField {
        let n = self.grid.extents();
        let h = self.grid.spacing()[w];
        let ih2 = 1.0 / (h * h);
        let sw = self.grid.stride(w);
        let nw = n[w];
        let mut rhs = b.clone();
        let dirichlet = matches!(bc, NormalBc::Dirichlet);
        if let NormalBc::Ghost { lo, hi } = bc {
            for (side, g) in [(0usize, lo), (1, hi)] {
                for (p, idx) in crate::fields::wall_nodes(&self.grid, side).into_iter().enumerate() {
                    rhs.values_mut()[idx] += g[p] * (c * ih2);
                }
            }
        }
        let mut bh = self.to_spectral_packed(&rhs);
        let mut sub = vec![C64::new(0.0, 0.0); nw];
        let mut diag = vec![C64::new(0.0, 0.0); nw];
        let mut sup = vec![C64::new(0.0, 0.0); nw];
        let mut col = vec![C64::new(0.0, 0.0); nw];
        for base in 0..self.grid.len() {
            if (base / sw) % nw != 0 {
                continue;
            }
            let (_, lapt) = self.symbols(base);
            let dd = C64::new(1.0 + c * lapt + 2.0 * c * ih2, 0.0);
            let off = C64::new(-c * ih2, 0.0);
            for j in 0..nw {
                sub[j] = off;
                diag[j] = dd;
                sup[j] = off;
            }
            if dirichlet {
                diag[0] = C64::new(1.0, 0.0);
                sup[0] = C64::new(0.0, 0.0);
                diag[nw - 1] = C64::new(1.0, 0.0);
                sub[nw - 1] = C64::new(0.0, 0.0);
            } else {
                sup[0] = off * 2.0;
                sub[nw - 1] = off * 2.0;
            }
            for buf in bh.iter_mut() {
                for j in 0..nw {
                    col[j] = buf[base + j * sw];
                }
                if dirichlet {
                    col[0] = C64::new(0.0, 0.0);
                    col[nw - 1] = C64::new(0.0, 0.0);
                }
                thomas(&sub, &diag, &sup, &mut col);
                for j in 0..nw {
                    buf[base + j * sw] = col[j];
                }
            }
        }
        self.from_spectral_packed(bh)
    }
}

/// Tridiagonal solve in place; `sub[0]` and `sup[n-1]` are ignored.
fn thomas(sub: &[C64], diag: &[C64], sup: &[C64], x: &mut [C64]) {
    let n = x.len();
    let mut cp = vec![C64::new(0.0, 0.0); n];
    let mut beta = diag[0];
    cp[0] = sup[0] / beta;
    x[0] /= beta;
    for j in 1..n {
        beta = diag[j] - sub[j] * cp[j - 1];
        cp[j] = sup[j] / beta;
        x[j] = (x[j] - sub[j] * x[j - 1]) / beta;
    }
    for j in (0..n - 1).rev() {
        let next = x[j + 1];
        x[j] -= cp[j] * next;
    }
}
