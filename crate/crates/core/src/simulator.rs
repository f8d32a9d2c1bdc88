//! Semi-implicit time stepping of the coupled director/velocity system.
//!
//! The director obeys
//! `gamma (d_t + u . grad d) = F_el + mu_V V d + mu_D P_d D d`, with the elastic force
//!
//! ```text
//! F_el = rho [ 2 k3 (Lap d + |grad d|^2 d) + 2 (k1 - k3) P_d grad div d
//!              + 2 (k2 - k3) (d x grad(d . curl d) - 2 (d . curl d) P_d curl d) ]
//! ```
//!
//! which is the projected `L^2` gradient of `rho int psi~` written without
//! projecting the Laplacian. That form matters: it makes `phi = |d|^2 - 1`
//! obey a closed linear equation (see [`phi_residual`]). In the discrete
//! force `|grad d|^2` is the gradient energy of the compact Laplacian
//! stencil, for which the same identity holds exactly on the grid, so the
//! norm drift comes from time stepping alone.
//!
//! The velocity obeys `rho (u_t + u . grad u) + grad pi = mu_s Lap u + div(S_E + S_L)`
//! with `div u = 0`. The Leslie stress uses the director flux `n = -F_el`, which
//! is what the director equation gives exactly.
//!
//! # Scheme
//!
//! Only `2 rho k3 / gamma Lap` (director) and `mu_s / rho Lap` (velocity) are
//! implicit; they are solved with [`Spectral::solve_helmholtz`]. Everything
//! else is explicit, either forward Euler or second-order extrapolation with
//! BDF2 (the default). The first BDF2 step is a Richardson-extrapolated Euler
//! step, which keeps the startup error second order. After the
//! velocity solve the field is projected; the projection potential gives `pi`
//! (zero mean).
//!
//! On a slab the director satisfies the nonlinear natural boundary condition
//! `B(d, grad d) = 0`. For fixed wall values `B` is linear in `grad d`, and its
//! normal part is the symbol `m_d(nu)`, which is invertible. The normal
//! derivative is therefore solved node by node and imposed through ghost
//! values. Explicit terms use the exact condition for `d^n`; the implicit solve
//! uses the wall values of `d^n` and the tangential derivatives of the
//! extrapolated director. The velocity satisfies no-slip.

use serde::{Deserialize, Serialize};

use crate::coefficients::{validate_frank, validate_leslie, FrankCoefficients, LeslieCoefficients};
use crate::energy::total_energy;
use crate::ericksen::{compatibility_check, linearized_boundary_pointwise, COMPATIBILITY_TOL};
use crate::error::{Error, Result};
use crate::fields::{
    grad_div, gradient, laplacian, partial, scalar_gradient, strip_ghosts, tangential_axes, vector_divergence,
    wall_nodes, with_ghosts, DirectorField, Grid, Mat3, ScalarField, TensorField, Vec3, VectorField, VelocityField,
    Topology, DIRECTOR_TOL, PROJECTION_TOL,
};
use crate::fields::curl_of_gradient;
use crate::leslie::{ericksen_stress, kinematics, leslie_parts};
use crate::spectral::{NormalBc, Spectral};

/// Values beyond this are treated as blow-up.
const BLOWUP: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BcMode {
    #[default]
    Periodic,
    SlabNonlinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DirectorEvolution {
    #[default]
    Coupled,
    /// `u = 0` throughout; the director follows the `psi` gradient flow.
    GradientFlowOnly,
}

/// What to do about `|d| != 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormPolicy {
    /// Report the drift, never correct it.
    #[default]
    #[serde(alias = "off")]
    MonitorOnly,
    /// Normalize after every step (exploratory runs only).
    Renormalize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeScheme {
    Euler,
    #[default]
    Bdf2,
}

#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub grid: Grid,
    pub frank: FrankCoefficients,
    pub leslie: LeslieCoefficients,
    pub dt: f64,
    pub t_end: f64,
    pub bc_mode: BcMode,
    pub director_evolution: DirectorEvolution,
    pub norm_policy: NormPolicy,
    pub scheme: TimeScheme,
    /// Diagnostics (including the phi residual) are logged every this many steps.
    pub diagnostic_every: usize,
}

impl SimulationConfig {
    /// Defaults: half the stability bound, `t_end = 0`, boundary mode from the grid.
    pub fn new(grid: Grid, frank: FrankCoefficients, leslie: LeslieCoefficients) -> Self {
        let mut c = Self {
            grid,
            frank,
            leslie,
            dt: 0.0,
            t_end: 0.0,
            bc_mode: if grid.is_periodic() { BcMode::Periodic } else { BcMode::SlabNonlinear },
            director_evolution: DirectorEvolution::default(),
            norm_policy: NormPolicy::default(),
            scheme: TimeScheme::default(),
            diagnostic_every: 1,
        };
        c.dt = 0.5 * c.stability_bound();
        c
    }

    /// Explicit viscosity carried by the Leslie stress.
    fn explicit_viscosity(&self) -> f64 {
        let l = &self.leslie;
        2.0 * l.mu_p.abs() + l.mu_l + l.mu_p * l.mu_p / l.gamma + l.mu_0
    }

    /// Heuristic bound `0.25 h^2 min(gamma / (rho k_max), rho / mu_explicit)`.
    pub fn stability_bound(&self) -> f64 {
        let h2 = self.grid.h_min().powi(2);
        let l = &self.leslie;
        let mut b = 0.25 * h2 * l.gamma / (l.rho * self.frank.scale());
        let nu = self.explicit_viscosity();
        if nu > 0.0 && self.director_evolution == DirectorEvolution::Coupled {
            b = b.min(0.25 * h2 * l.rho / nu);
        }
        b
    }

    pub fn validate(&self) -> Result<()> {
        let f = validate_frank(&self.frank)?;
        if !f.passed() {
            let names: Vec<_> = f.failed_clauses().iter().filter(|c| c.required).map(|c| c.name.clone()).collect();
            return Err(Error::Precondition(format!("Frank constants: {}", names.join(", "))));
        }
        let l = validate_leslie(&self.leslie)?;
        if !l.passed() {
            let names: Vec<_> = l.failed_clauses().iter().map(|c| c.name.clone()).collect();
            return Err(Error::Precondition(format!("viscosities: {}", names.join(", "))));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        let bound = self.stability_bound();
        if self.dt > bound * (1.0 + 1e-12) {
            return Err(Error::Config(format!("dt = {} exceeds the stability bound {bound}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!("t_end must be non-negative, got {}", self.t_end)));
        }
        if self.diagnostic_every == 0 {
            return Err(Error::Config("diagnostic cadence must be at least 1".into()));
        }
        match (self.bc_mode, self.grid.wall_axis()) {
            (BcMode::Periodic, None) | (BcMode::SlabNonlinear, Some(_)) => Ok(()),
            (BcMode::Periodic, Some(_)) => Err(Error::Config("periodic mode needs a fully periodic grid".into())),
            (BcMode::SlabNonlinear, None) => Err(Error::Config("slab mode needs a grid with a wall axis".into())),
        }
    }

    /// Number of steps taken by [`run`]; the run stops at the first `t >= t_end`.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil().max(0.0) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics {
    pub t: f64,
    pub step: usize,
    /// `int psi`
    pub energy: f64,
    /// `1/2 rho int |u|^2`
    pub kinetic: f64,
    /// `max ||d|^2 - 1|`
    pub norm_drift: f64,
    /// Max interior residual of the phi equation; needs two time levels.
    pub phi_residual: Option<f64>,
    pub div_u_max: f64,
}

/// Previous time level, kept for BDF2 and the phi diagnostic.
#[derive(Debug, Clone)]
struct History {
    d: VectorField,
    u: VectorField,
    nd: VectorField,
    nu: VectorField,
    dt: f64,
}

#[derive(Debug, Clone)]
pub struct SimulationState {
    pub u: VelocityField,
    pub d: DirectorField,
    pub pi: ScalarField,
    pub t: f64,
    pub step: usize,
    pub diagnostics: Diagnostics,
    history: Option<History>,
}

impl SimulationState {
    /// Director one step back, if a step has been taken.
    pub fn previous_director(&self) -> Option<&VectorField> {
        self.history.as_ref().map(|h| &h.d)
    }

    /// Time step that produced this state.
    pub fn last_dt(&self) -> Option<f64> {
        self.history.as_ref().map(|h| h.dt)
    }
}

/// Explicit right-hand sides at one time level.
struct Explicit {
    nd: VectorField,
    nu: VectorField,
}

/// Elastic force with its Laplacian part, and the director gradient.
struct ElasticForce {
    f_el: VectorField,
    lap: VectorField,
    grad: TensorField,
}

/// `P_d v` without the unit check.
fn project(d: &Vec3, v: &Vec3) -> Vec3 {
    v - d * d.dot(v)
}

/// `sum_a (|d(x + h e_a) - d|^2 + |d(x - h e_a) - d|^2) / (2 h_a^2)`, the
/// gradient energy matching the compact Laplacian:
/// `Lap_h |d|^2 = 2 d . Lap_h d + 2 e_h` holds exactly.
fn compact_gradient_energy(d: &VectorField) -> Vec<f64> {
    let g = d.grid();
    let n = g.extents();
    let h = g.spacing();
    let topo = g.topology();
    let v = d.values();
    let mut out = vec![0.0; v.len()];
    for a in 0..3 {
        let s = g.stride(a);
        let ih2 = 0.5 / (h[a] * h[a]);
        for (idx, o) in out.iter_mut().enumerate() {
            let c = (idx / s) % n[a];
            let (p, m) = match topo[a] {
                Topology::Periodic => (
                    Some(if c + 1 < n[a] { idx + s } else { idx + s - n[a] * s }),
                    Some(if c > 0 { idx - s } else { idx + (n[a] - 1) * s }),
                ),
                Topology::Wall => ((c + 1 < n[a]).then(|| idx + s), (c > 0).then(|| idx - s)),
            };
            let mut acc = 0.0;
            for nb in [p, m].into_iter().flatten() {
                acc += (v[nb] - v[idx]).norm_squared();
            }
            if p.is_none() || m.is_none() {
                acc *= 2.0;
            }
            *o += acc * ih2;
        }
    }
    out
}

fn elastic_force(d: &VectorField, c: &FrankCoefficients, rho: f64) -> ElasticForce {
    let grad = gradient(d);
    let lap = laplacian(d);
    let gd = grad_div(d);
    let cu = grad.map(|g| curl_of_gradient(&g));
    let gc = gradient(&cu);
    let eh = compact_gradient_energy(d);
    let f_el: Vec<Vec3> = (0..d.values().len())
        .map(|i| {
            let (dv, g, cv) = (d.values()[i], grad.values()[i], cu.values()[i]);
            let dc = dv.dot(&cv);
            let grad_dc = gc.values()[i].transpose() * dv + g.transpose() * cv;
            let harmonic = (lap.values()[i] + dv * eh[i]) * (2.0 * c.k3);
            let splay = project(&dv, &gd.values()[i]) * (2.0 * (c.k1 - c.k3));
            let twist = (dv.cross(&grad_dc) - project(&dv, &cv) * (2.0 * dc)) * (2.0 * (c.k2 - c.k3));
            (harmonic + splay + twist) * rho
        })
        .collect();
    ElasticForce { f_el: VectorField::from_vec(d.grid(), f_el).unwrap(), lap, grad }
}

/// Normal derivative at both walls solving `B_{d_ref}(G_t + a nu^T) = 0`, where
/// `G_t` holds the tangential derivatives of `tan_src`.
fn wall_normal_derivatives(d_ref: &VectorField, tan_src: &VectorField, c: &FrankCoefficients) -> [Vec<Vec3>; 2] {
    let g = *d_ref.grid();
    let w = g.wall_axis().expect("wall axis");
    let (ta, tb) = tangential_axes(w);
    let (pa, pb) = (partial(tan_src, ta), partial(tan_src, tb));
    let mut nu = Vec3::zeros();
    nu[w] = 1.0;
    let solve = |side: usize| -> Vec<Vec3> {
        wall_nodes(&g, side)
            .into_iter()
            .map(|i| {
                let dr = d_ref.values()[i];
                let mut gt = Mat3::zeros();
                gt.set_column(ta, &pa.values()[i]);
                gt.set_column(tb, &pb.values()[i]);
                let rhs = linearized_boundary_pointwise(&dr, &gt, &nu, c);
                let mut m = Mat3::zeros();
                for k in 0..3 {
                    let mut e = Mat3::zeros();
                    e[(k, w)] = 1.0;
                    m.set_column(k, &linearized_boundary_pointwise(&dr, &e, &nu, c));
                }
                // m is the normal symbol m_d(nu), invertible under (F)
                m.lu().solve(&(-rhs)).unwrap_or_else(Vec3::zeros)
            })
            .collect()
    };
    [solve(0), solve(1)]
}

/// Ghost increments for [`NormalBc::Ghost`] realizing the normal derivatives `a`.
fn ghost_increments(a: &[Vec<Vec3>; 2], h: f64) -> [Vec<Vec3>; 2] {
    [a[0].iter().map(|v| v * (-2.0 * h)).collect(), a[1].iter().map(|v| v * (2.0 * h)).collect()]
}

/// Ghost plane values `x_1 + lo` and `x_{n-2} + hi` for [`with_ghosts`].
fn ghost_values(f: &VectorField, inc: &[Vec<Vec3>; 2]) -> [Vec<Vec3>; 2] {
    let g = *f.grid();
    let w = g.wall_axis().expect("wall axis");
    let s = g.stride(w);
    let lo = wall_nodes(&g, 0).into_iter().zip(&inc[0]).map(|(i, v)| f.values()[i + s] + v).collect();
    let hi = wall_nodes(&g, 1).into_iter().zip(&inc[1]).map(|(i, v)| f.values()[i - s] + v).collect();
    [lo, hi]
}

/// Time stepper owning the FFT plans for one configuration.
pub struct Simulator {
    cfg: SimulationConfig,
    spectral: Spectral,
}

impl std::fmt::Debug for Simulator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Simulator").field("cfg", &self.cfg).finish_non_exhaustive()
    }
}

impl Simulator {
    pub fn new(cfg: SimulationConfig) -> Result<Self> {
        cfg.validate()?;
        let spectral = Spectral::new(&cfg.grid);
        Ok(Self { cfg, spectral })
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.cfg
    }

    /// Checks the initial data and builds the state at `t = 0`.
    pub fn initial_state(&self, u0: VectorField, d0: VectorField) -> Result<SimulationState> {
        let g = self.cfg.grid;
        if u0.grid() != &g || d0.grid() != &g {
            return Err(Error::Precondition("initial data live on a different grid".into()));
        }
        let d = DirectorField::new(d0, DIRECTOR_TOL)
            .map_err(|e| Error::Precondition(format!("|d0| = 1: {e}")))?;
        let u = match self.cfg.director_evolution {
            DirectorEvolution::GradientFlowOnly => {
                if u0.max_abs() > 0.0 {
                    return Err(Error::Precondition("u0 = 0 in gradient-flow-only mode".into()));
                }
                VelocityField::zeros(&g)
            }
            DirectorEvolution::Coupled => VelocityField::new(u0, PROJECTION_TOL)
                .map_err(|e| Error::Precondition(format!("div u0 = 0 and u0 = 0 on walls: {e}")))?,
        };
        if self.cfg.bc_mode == BcMode::SlabNonlinear {
            let r = compatibility_check(&d, &self.cfg.frank, COMPATIBILITY_TOL * self.cfg.frank.scale())?;
            if !r.passes {
                return Err(Error::Precondition(format!(
                    "compatibility (B): boundary residual {:e} exceeds {:e}",
                    r.residual, r.tolerance
                )));
            }
        }
        let mut s = SimulationState {
            diagnostics: Diagnostics {
                t: 0.0,
                step: 0,
                energy: 0.0,
                kinetic: 0.0,
                norm_drift: 0.0,
                phi_residual: None,
                div_u_max: 0.0,
            },
            u,
            d,
            pi: ScalarField::zeros(&g),
            t: 0.0,
            step: 0,
            history: None,
        };
        s.diagnostics = self.diagnostics(&s, false);
        Ok(s)
    }

    fn wall_h(&self) -> f64 {
        let g = &self.cfg.grid;
        g.spacing()[g.wall_axis().expect("wall axis")]
    }

    /// Elastic force of `d`, using the exact boundary condition on slabs.
    fn force(&self, d: &VectorField) -> ElasticForce {
        let c = &self.cfg.frank;
        let rho = self.cfg.leslie.rho;
        if self.cfg.bc_mode == BcMode::Periodic {
            return elastic_force(d, c, rho);
        }
        let a = wall_normal_derivatives(d, d, c);
        let gv = ghost_values(d, &ghost_increments(&a, self.wall_h()));
        let padded = with_ghosts(d, &gv[0], &gv[1]);
        let e = elastic_force(&padded, c, rho);
        let g = d.grid();
        ElasticForce { f_el: strip_ghosts(&e.f_el, g), lap: strip_ghosts(&e.lap, g), grad: strip_ghosts(&e.grad, g) }
    }

    fn explicit(&self, d: &VectorField, u: &VectorField) -> Explicit {
        let l = &self.cfg.leslie;
        let c = &self.cfg.frank;
        let e = self.force(d);
        let coupled = self.cfg.director_evolution == DirectorEvolution::Coupled;
        let gu = if coupled { Some(gradient(u)) } else { None };
        let n = d.values().len();
        let mut nd = Vec::with_capacity(n);
        let mut stress = Vec::with_capacity(if coupled { n } else { 0 });
        for i in 0..n {
            let dv = d.values()[i];
            let fe = e.f_el.values()[i];
            let mut rhs = fe - e.lap.values()[i] * (2.0 * l.rho * c.k3);
            if let Some(gu) = &gu {
                let gui = gu.values()[i];
                let dm = (gui + gui.transpose()) * 0.5;
                let v = (gui - gui.transpose()) * 0.5;
                let flux = v * dv * l.mu_v + project(&dv, &(dm * dv)) * l.mu_d;
                let g = e.grad.values()[i];
                rhs += flux - g * u.values()[i] * l.gamma;
                let mdt = (fe + flux) / l.gamma;
                let k = kinematics(&gui, &dv, &mdt);
                let (stretch, diss) = leslie_parts(&k, &dv, &(-fe), l);
                stress.push(ericksen_stress(&dv, &g, c, l.rho) + stretch + diss);
            }
            nd.push(rhs);
        }
        let g = d.grid();
        let nd = VectorField::from_vec(g, nd).unwrap();
        let nu = match &gu {
            Some(gu) => {
                let div_s = crate::fields::divergence(&TensorField::from_vec(g, stress).unwrap());
                div_s.zip_map(&u.zip_map(gu, |uv, guv| guv * uv), |a, b| a - b * l.rho)
            }
            None => VectorField::zeros(g),
        };
        Explicit { nd, nu }
    }

    /// One semi-implicit step.
    pub fn step(&self, state: &SimulationState) -> Result<SimulationState> {
        self.step_with(state, true)
    }

    /// One step; the phi residual (the costliest diagnostic) only when asked.
    ///
    /// BDF2 starts with a Richardson-extrapolated Euler step (two half steps
    /// against one full step), so the start is second order as well.
    pub fn step_with(&self, state: &SimulationState, phi: bool) -> Result<SimulationState> {
        let cfg = &self.cfg;
        let dt = cfg.dt;
        let dn = state.d.field();
        let un = state.u.field();
        let ex = self.explicit(dn, un);
        let history = state.history.as_ref().filter(|h| cfg.scheme == TimeScheme::Bdf2 && h.dt == dt);
        let (mut d_new, u_new, pi) = match history {
            Some(h) => self.substep(dn, un, &ex, Some(h), dt)?,
            None if cfg.scheme == TimeScheme::Bdf2 => {
                let (d1, u1, p1) = self.substep(dn, un, &ex, None, dt)?;
                let (dh, uh, _) = self.substep(dn, un, &ex, None, 0.5 * dt)?;
                let exh = self.explicit(&dh, &uh);
                let (d2, u2, p2) = self.substep(&dh, &uh, &exh, None, 0.5 * dt)?;
                // the half-step pressure carries 1/(dt/2); rescale before combining
                let p2 = p2.map(|p| 0.5 * p);
                (d2.lincomb(2.0, &d1, -1.0), u2.lincomb(2.0, &u1, -1.0), p2.lincomb(2.0, &p1, -1.0))
            }
            None => self.substep(dn, un, &ex, None, dt)?,
        };

        let t = state.t + dt;
        let bad = |f: &VectorField| !f.is_finite() || f.max_abs() > BLOWUP;
        if bad(&d_new) || bad(&u_new) || !pi.is_finite() {
            return Err(Error::Diverged {
                t,
                reason: "non-finite or exploding fields".into(),
                last_good: Box::new(state.clone()),
            });
        }
        if cfg.norm_policy == NormPolicy::Renormalize {
            d_new = d_new.map(|v| {
                let n = v.norm();
                if n > 0.0 {
                    v / n
                } else {
                    v
                }
            });
        }
        let mut s = SimulationState {
            u: VelocityField::unchecked(u_new),
            d: DirectorField::unchecked(d_new),
            pi,
            t,
            step: state.step + 1,
            diagnostics: state.diagnostics,
            history: Some(History { d: dn.clone(), u: un.clone(), nd: ex.nd, nu: ex.nu, dt }),
        };
        s.diagnostics = self.diagnostics(&s, phi);
        Ok(s)
    }

    /// Euler (`hist = None`) or BDF2 update of `(d, u)` over `dt` from the
    /// explicit terms `ex` at the current level; returns `(d, u, pi)`.
    fn substep(
        &self,
        dn: &VectorField,
        un: &VectorField,
        ex: &Explicit,
        hist: Option<&History>,
        dt: f64,
    ) -> Result<(VectorField, VectorField, ScalarField)> {
        let cfg = &self.cfg;
        let l = &cfg.leslie;
        let kappa = 2.0 * l.rho * cfg.frank.k3 / l.gamma;

        // director
        let (d_rhs, d_coef, d_extrap) = match hist {
            Some(h) => {
                let nd = ex.nd.lincomb(2.0, &h.nd, -1.0);
                let rhs = dn.lincomb(4.0 / 3.0, &h.d, -1.0 / 3.0).lincomb(1.0, &nd, 2.0 * dt / (3.0 * l.gamma));
                (rhs, 2.0 * dt * kappa / 3.0, Some(dn.lincomb(2.0, &h.d, -1.0)))
            }
            None => (dn.lincomb(1.0, &ex.nd, dt / l.gamma), dt * kappa, None),
        };
        let d_new = match cfg.bc_mode {
            BcMode::Periodic => self.spectral.solve_helmholtz(&d_rhs, d_coef, NormalBc::Dirichlet),
            BcMode::SlabNonlinear => {
                let a = wall_normal_derivatives(dn, d_extrap.as_ref().unwrap_or(dn), &cfg.frank);
                let inc = ghost_increments(&a, self.wall_h());
                self.spectral.solve_helmholtz(&d_rhs, d_coef, NormalBc::Ghost { lo: &inc[0], hi: &inc[1] })
            }
        };

        // velocity
        let (u_new, pi) = match cfg.director_evolution {
            DirectorEvolution::GradientFlowOnly => (VectorField::zeros(&cfg.grid), ScalarField::zeros(&cfg.grid)),
            DirectorEvolution::Coupled => {
                let nu_s = l.mu_s / l.rho;
                let (rhs, coef, pscale) = match hist {
                    Some(h) => {
                        let f = ex.nu.lincomb(2.0, &h.nu, -1.0);
                        let rhs = un.lincomb(4.0 / 3.0, &h.u, -1.0 / 3.0).lincomb(1.0, &f, 2.0 * dt / (3.0 * l.rho));
                        (rhs, 2.0 * dt * nu_s / 3.0, 3.0 * l.rho / (2.0 * dt))
                    }
                    None => (un.lincomb(1.0, &ex.nu, dt / l.rho), dt * nu_s, l.rho / dt),
                };
                let star = self.spectral.solve_helmholtz(&rhs, coef, NormalBc::Dirichlet);
                let (u, phi) = self.spectral.project(&star)?;
                let mean = phi.values().iter().sum::<f64>() / phi.values().len() as f64;
                (u, phi.map(|p| (p - mean) * pscale))
            }
        };
        Ok((d_new, u_new, pi))
    }

    fn diagnostics(&self, s: &SimulationState, with_phi: bool) -> Diagnostics {
        let g = &self.cfg.grid;
        let rho = self.cfg.leslie.rho;
        let kinetic = 0.5
            * rho
            * s.u.values().iter().enumerate().map(|(i, v)| v.norm_squared() * g.weight(i)).sum::<f64>();
        let phi_residual = if with_phi { phi_diagnostic(s, &self.cfg).map(|p| p.residual) } else { None };
        Diagnostics {
            t: s.t,
            step: s.step,
            energy: total_energy(s.d.field(), &self.cfg.frank),
            kinetic,
            norm_drift: s.d.norm_drift(),
            phi_residual,
            div_u_max: vector_divergence(s.u.field()).max_abs_interior(),
        }
    }

    /// Steps to `t_end`, calling `on_log` with the initial state, every
    /// `diagnostic_every` steps and at the end.
    pub fn run_with(
        &self,
        mut state: SimulationState,
        mut on_log: impl FnMut(&SimulationState) -> Result<()>,
    ) -> Result<SimulationState> {
        let every = self.cfg.diagnostic_every;
        let n = self.cfg.steps();
        on_log(&state)?;
        for k in 1..=n {
            let logged = k % every == 0 || k == n;
            state = self.step_with(&state, logged)?;
            if logged {
                on_log(&state)?;
            }
        }
        Ok(state)
    }
}

/// Final state plus the logged diagnostics.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub state: SimulationState,
    pub log: Vec<Diagnostics>,
}

/// One step with a fresh stepper (convenient, but rebuilds the FFT plans).
pub fn step(state: &SimulationState, cfg: &SimulationConfig) -> Result<SimulationState> {
    Simulator::new(cfg.clone())?.step(state)
}

/// Validates the configuration and the initial data, then steps to `t_end`.
pub fn run(cfg: &SimulationConfig, u0: VectorField, d0: VectorField) -> Result<RunOutput> {
    let sim = Simulator::new(cfg.clone())?;
    let s0 = sim.initial_state(u0, d0)?;
    let mut log = Vec::new();
    let state = sim.run_with(s0, |s| {
        log.push(s.diagnostics);
        Ok(())
    })?;
    Ok(RunOutput { state, log })
}

/// Factors of `G1` in `gamma phi_t = 2 rho k3 Lap phi + G1 phi - gamma u . grad phi`, split by origin.
#[derive(Debug, Clone)]
pub struct G1Terms {
    /// `4 rho k3 |grad d|^2`
    pub harmonic: ScalarField,
    /// `-4 rho (k1 - k3) (grad div d | d)`
    pub splay: ScalarField,
    /// `4 rho (k2 - k3) (d . curl d)^2`
    pub twist: ScalarField,
    /// `2 rho (grad_d psi~ | d)`
    pub psi_d: ScalarField,
    /// `-2 mu_D (D d | d)`
    pub flow: ScalarField,
}

impl G1Terms {
    pub fn total(&self) -> ScalarField {
        let parts = [&self.splay, &self.twist, &self.psi_d, &self.flow];
        parts.iter().fold(self.harmonic.clone(), |acc, p| acc.lincomb(1.0, p, 1.0))
    }
}

#[derive(Debug, Clone)]
pub struct PhiDiagnostic {
    /// `|d|^2 - 1` at the newer level.
    pub phi: ScalarField,
    /// `gamma phi_t - 2 rho k3 Lap phi - G1 phi + gamma u . grad phi`, zero on walls.
    pub residual_field: ScalarField,
    /// Max of `residual_field` over interior nodes.
    pub residual: f64,
    /// Max over wall nodes of `k3 d_nu phi - G0 phi`; zero on periodic grids.
    pub boundary_residual: f64,
    pub g1: G1Terms,
    /// `G0` on wall nodes (zero elsewhere).
    pub g0: ScalarField,
}

/// `G1` factors at director `d` and velocity `u`.
pub fn g1_terms(d: &VectorField, u: &VectorField, c: &FrankCoefficients, l: &LeslieCoefficients) -> G1Terms {
    let g = gradient(d);
    let gd = grad_div(d);
    let gu = gradient(u);
    let rho = l.rho;
    let n = d.values().len();
    let (mut harmonic, mut splay, mut twist, mut psi_d, mut flow) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for i in 0..n {
        let (dv, gv) = (d.values()[i], g.values()[i]);
        let dc = dv.dot(&curl_of_gradient(&gv));
        harmonic[i] = 4.0 * rho * c.k3 * gv.norm_squared();
        splay[i] = -4.0 * rho * (c.k1 - c.k3) * gd.values()[i].dot(&dv);
        twist[i] = 4.0 * rho * (c.k2 - c.k3) * dc * dc;
        // grad_d psi~ = 2 (k2 - k3) (d . curl d) curl d
        psi_d[i] = 2.0 * rho * 2.0 * (c.k2 - c.k3) * dc * dc;
        let gui = gu.values()[i];
        let dm = (gui + gui.transpose()) * 0.5;
        flow[i] = -2.0 * l.mu_d * (dm * dv).dot(&dv);
    }
    let grid = d.grid();
    let f = |v| ScalarField::from_vec(grid, v).unwrap();
    G1Terms { harmonic: f(harmonic), splay: f(splay), twist: f(twist), psi_d: f(psi_d), flow: f(flow) }
}

/// Residual of the phi equation between two director levels `dt` apart,
/// coefficients evaluated at the newer level.
pub fn phi_residual(
    d_prev: &VectorField,
    d: &VectorField,
    u: &VectorField,
    dt: f64,
    c: &FrankCoefficients,
    l: &LeslieCoefficients,
) -> Result<PhiDiagnostic> {
    if d_prev.grid() != d.grid() || u.grid() != d.grid() {
        return Err(Error::InvalidInput("phi residual needs fields on one grid".into()));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    let grid = *d.grid();
    let phi = d.map(|v| v.norm_squared() - 1.0);
    let phi_prev = d_prev.map(|v| v.norm_squared() - 1.0);
    let lap = laplacian(&phi);
    let gphi = scalar_gradient(&phi);
    let g1 = g1_terms(d, u, c, l);
    let g1t = g1.total();
    let mut res = vec![0.0; grid.len()];
    let mut worst = 0.0_f64;
    for i in 0..grid.len() {
        if grid.on_wall(i) {
            continue;
        }
        let p = phi.values()[i];
        let r = l.gamma * (p - phi_prev.values()[i]) / dt - 2.0 * l.rho * c.k3 * lap.values()[i] - g1t.values()[i] * p
            + l.gamma * u.values()[i].dot(&gphi.values()[i]);
        res[i] = r;
        worst = worst.max(r.abs());
    }
    let mut g0 = vec![0.0; grid.len()];
    let mut bworst = 0.0_f64;
    if let Some(w) = grid.wall_axis() {
        let g = gradient(d);
        for side in 0..2 {
            let mut nu = Vec3::zeros();
            nu[w] = if side == 0 { -1.0 } else { 1.0 };
            for i in wall_nodes(&grid, side) {
                let (dv, gv) = (d.values()[i], g.values()[i]);
                let val = 2.0
                    * ((c.k2 + c.k4 - c.k3) * (gv.transpose() * nu).dot(&dv)
                        - (c.k2 + c.k4 - c.k1) * gv.trace() * nu.dot(&dv));
                g0[i] = val;
                let r = c.k3 * gphi.values()[i].dot(&nu) - val * phi.values()[i];
                bworst = bworst.max(r.abs());
            }
        }
    }
    Ok(PhiDiagnostic {
        phi,
        residual_field: ScalarField::from_vec(&grid, res).unwrap(),
        residual: worst,
        boundary_residual: bworst,
        g1,
        g0: ScalarField::from_vec(&grid, g0).unwrap(),
    })
}

/// Phi diagnostic between the state and its predecessor; `None` before the first step.
pub fn phi_diagnostic(state: &SimulationState, cfg: &SimulationConfig) -> Option<PhiDiagnostic> {
    let h = state.history.as_ref()?;
    phi_residual(&h.d, state.d.field(), state.u.field(), h.dt, &cfg.frank, &cfg.leslie).ok()
}

/// `normalize(e3 + eps (sin y, cos z, sin x))`, a smooth periodic perturbation of `e3`.
pub fn perturbed_director(grid: &Grid, eps: f64) -> DirectorField {
    DirectorField::normalized(VectorField::from_fn(grid, |x| {
        Vec3::new(eps * x[1].sin(), eps * x[2].cos(), 1.0 + eps * x[0].sin())
    }))
    .expect("perturbation is small")
}

/// Perturbation of wall-normal anchoring supported away from the walls.
///
/// The director is exactly `nu` on the three node planes next to each wall,
/// so the discrete compatibility condition holds for any constants.
pub fn slab_director(grid: &Grid, eps: f64) -> Result<DirectorField> {
    let w = grid.wall_axis().ok_or_else(|| Error::Domain("slab director needs a wall axis".into()))?;
    let (a, b) = tangential_axes(w);
    let len = grid.length(w);
    let half = 0.5 * len - 2.5 * grid.spacing()[w];
    if half <= 0.0 {
        return Err(Error::Domain("slab too thin for a perturbation".into()));
    }
    DirectorField::normalized(VectorField::from_fn(grid, |x| {
        let r = (x[w] - 0.5 * len) / half;
        let s = if r.abs() < 1.0 { (1.0 - 1.0 / (1.0 - r * r)).exp() } else { 0.0 };
        let mut v = Vec3::zeros();
        v[w] = 1.0;
        v[a] = eps * s * x[b].cos();
        v[b] = eps * s * x[a].sin();
        v
    }))
}

/// Taylor-Green vortex `a (sin x cos y, -cos x sin y, 0)`, discretely divergence free.
pub fn taylor_green(grid: &Grid, a: f64) -> VectorField {
    VectorField::from_fn(grid, |x| Vec3::new(a * x[0].sin() * x[1].cos(), -a * x[0].cos() * x[1].sin(), 0.0))
}
