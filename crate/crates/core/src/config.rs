//! JSON configuration shared by the command-line tool and the examples.
//!
//! Every section and every non-essential key is optional. Omitted keys take
//! defaults when the section is turned into library types, and are not
//! written back, so serializing a parsed file reproduces its keys.
//!
//! ```json
//! {
//!   "coefficients": {
//!     "frank": { "k1": 1.3, "k2": 0.8, "k3": 1.0, "alpha": 0.6 },
//!     "leslie": { "mu_s": 1, "mu_V": 0.3, "mu_D": -0.4, "mu_P": 0.2,
//!                 "mu_L": 0.5, "mu_0": 0.3, "gamma": 1, "rho": 1 }
//!   },
//!   "grid": { "n": [32, 32, 32] },
//!   "time": { "t_end": 1.0, "scheme": "bdf2" },
//!   "bc": { "mode": "periodic" },
//!   "initial": { "director": { "kind": "perturbed", "amplitude": 0.05 } },
//!   "output": { "diagnostic_every": 10, "snapshot_every": 100 }
//! }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coefficients::{FrankCoefficients, LeslieCoefficients};
use crate::error::{Error, Result};
use crate::fields::{DirectorField, Grid, Vec3, VectorField};
use crate::io::{load_director_snapshot, load_snapshot};
use crate::lopatinskii::{LsKind, TestSetSpec};
use crate::sampling::DEFAULT_SEED;
use crate::simulator::{
    perturbed_director, slab_director, taylor_green, BcMode, DirectorEvolution, NormPolicy, SimulationConfig,
    TimeScheme,
};
use crate::symbols::{SamplerConfig, ScanSpec};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolkitConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<CoefficientSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<TimeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bc: Option<BcSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampler: Option<SamplerSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ls: Option<LsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frank: Option<FrankSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leslie: Option<LeslieSection>,
}

/// Either `alpha` or `k4` (or both, if consistent).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrankSection {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k4: Option<f64>,
}

impl FrankSection {
    pub fn build(&self) -> Result<FrankCoefficients> {
        match (self.alpha, self.k4) {
            (Some(a), Some(k4)) => FrankCoefficients::with_k4_checked(self.k1, self.k2, self.k3, k4, a),
            (Some(a), None) => FrankCoefficients::new(self.k1, self.k2, self.k3, a),
            (None, Some(k4)) => FrankCoefficients::from_k4(self.k1, self.k2, self.k3, k4),
            (None, None) => Err(Error::Config("coefficients.frank: give alpha or k4".into())),
        }
    }
}

impl From<&FrankCoefficients> for FrankSection {
    fn from(c: &FrankCoefficients) -> Self {
        Self { k1: c.k1, k2: c.k2, k3: c.k3, alpha: Some(c.alpha), k4: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeslieSection {
    pub mu_s: f64,
    #[serde(rename = "mu_V")]
    pub mu_v: f64,
    #[serde(rename = "mu_D")]
    pub mu_d: f64,
    #[serde(rename = "mu_P")]
    pub mu_p: f64,
    #[serde(rename = "mu_L")]
    pub mu_l: f64,
    pub mu_0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_b: Option<f64>,
    pub gamma: f64,
    pub rho: f64,
}

impl LeslieSection {
    pub fn build(&self) -> Result<LeslieCoefficients> {
        let l = LeslieCoefficients {
            mu_s: self.mu_s,
            mu_v: self.mu_v,
            mu_d: self.mu_d,
            mu_p: self.mu_p,
            mu_l: self.mu_l,
            mu_0: self.mu_0,
            mu_b: self.mu_b.unwrap_or(0.0),
            gamma: self.gamma,
            rho: self.rho,
        };
        l.check_finite()?;
        Ok(l)
    }
}

impl From<&LeslieCoefficients> for LeslieSection {
    fn from(l: &LeslieCoefficients) -> Self {
        Self {
            mu_s: l.mu_s,
            mu_v: l.mu_v,
            mu_d: l.mu_d,
            mu_p: l.mu_p,
            mu_l: l.mu_l,
            mu_0: l.mu_0,
            mu_b: (l.mu_b != 0.0).then_some(l.mu_b),
            gamma: l.gamma,
            rho: l.rho,
        }
    }
}

/// Periodic box, or a slab when `wall_axis` is set. Lengths default to `2 pi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: [usize; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_axis: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    /// Defaults to half the stability bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<TimeScheme>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BcSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<BcMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub director_evolution: Option<DirectorEvolution>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub renormalize: Option<NormPolicy>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DirectorInit {
    Uniform { d: [f64; 3] },
    /// `normalize(e3 + a (sin y, cos z, sin x))`
    Perturbed { amplitude: f64 },
    /// Wall-normal anchoring with an interior bump (slabs).
    Slab { amplitude: f64 },
    Snapshot { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum VelocityInit {
    Zero,
    TaylorGreen { amplitude: f64 },
    Snapshot { path: PathBuf },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub director: Option<DirectorInit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<VelocityInit>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic_every: Option<usize>,
    /// Field snapshots every this many steps; `0` writes only the first and last.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_every: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refine: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LsSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<LsKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_moduli: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_args: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_xi: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axes: Option<Vec<usize>>,
}

impl ToolkitConfig {
    /// Parses JSON; errors name the offending key and position.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            Error::Config(format!("at `{path}` (line {}, column {}): {inner}", inner.line(), inner.column()))
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io_at(path, e))?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    /// Frank constants; isotropic when absent.
    pub fn frank(&self) -> Result<FrankCoefficients> {
        match self.coefficients.as_ref().and_then(|c| c.frank.as_ref()) {
            Some(f) => f.build(),
            None => Ok(FrankCoefficients::isotropic()),
        }
    }

    /// Viscosities; a unit Newtonian fluid when absent.
    pub fn leslie(&self) -> Result<LeslieCoefficients> {
        match self.coefficients.as_ref().and_then(|c| c.leslie.as_ref()) {
            Some(l) => l.build(),
            None => Ok(LeslieCoefficients::newtonian(1.0)),
        }
    }

    pub fn has_grid(&self) -> bool {
        self.grid.is_some()
    }

    /// Grid; `16^3` periodic cube when absent.
    pub fn grid(&self) -> Result<Grid> {
        let l = 2.0 * std::f64::consts::PI;
        match &self.grid {
            None => Grid::periodic_cube(16),
            Some(g) => {
                let len = g.length.unwrap_or([l; 3]);
                match g.wall_axis {
                    None => Grid::periodic(g.n, len),
                    Some(w) if w < 3 => Grid::slab(g.n, len, w),
                    Some(w) => Err(Error::Config(format!("grid.wall_axis must be 0, 1 or 2, got {w}"))),
                }
            }
        }
        .map_err(|e| Error::Config(format!("grid: {e}")))
    }

    pub fn simulation(&self) -> Result<SimulationConfig> {
        let mut c = SimulationConfig::new(self.grid()?, self.frank()?, self.leslie()?);
        let bc = self.bc.clone().unwrap_or_default();
        if let Some(m) = bc.mode {
            c.bc_mode = m;
        }
        if let Some(e) = bc.director_evolution {
            c.director_evolution = e;
            c.dt = 0.5 * c.stability_bound();
        }
        if let Some(p) = bc.renormalize {
            c.norm_policy = p;
        }
        let time = self.time.clone().unwrap_or_default();
        c.t_end = time.t_end.unwrap_or(0.0);
        match time.dt {
            Some(dt) => c.dt = dt,
            // shrink the default step so the run ends exactly at t_end
            None if c.t_end > 0.0 && c.dt > 0.0 => c.dt = c.t_end / (c.t_end / c.dt).ceil(),
            None => {}
        }
        if let Some(s) = time.scheme {
            c.scheme = s;
        }
        if let Some(k) = self.output.as_ref().and_then(|o| o.diagnostic_every) {
            c.diagnostic_every = k;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn output_dir(&self) -> Option<&Path> {
        self.output.as_ref().and_then(|o| o.dir.as_deref())
    }

    pub fn snapshot_every(&self) -> usize {
        self.output.as_ref().and_then(|o| o.snapshot_every).unwrap_or(0)
    }

    pub fn has_initial_director(&self) -> bool {
        self.initial.as_ref().is_some_and(|i| i.director.is_some())
    }

    /// Initial director, default a perturbation of `e3` (periodic) or of the wall normal (slab).
    pub fn initial_director(&self, grid: &Grid) -> Result<VectorField> {
        let init = self.initial.as_ref().and_then(|i| i.director.clone());
        let d = match init {
            Some(DirectorInit::Uniform { d }) => DirectorField::uniform(grid, Vec3::from(d))?.into_field(),
            Some(DirectorInit::Perturbed { amplitude }) => perturbed_director(grid, amplitude).into_field(),
            Some(DirectorInit::Slab { amplitude }) => slab_director(grid, amplitude)?.into_field(),
            Some(DirectorInit::Snapshot { path }) => load_director_snapshot(&path)?.0.into_field(),
            None if grid.is_periodic() => perturbed_director(grid, 0.05).into_field(),
            None => slab_director(grid, 0.05)?.into_field(),
        };
        if d.grid() != grid {
            return Err(Error::Config("initial.director: snapshot grid differs from the configured grid".into()));
        }
        Ok(d)
    }

    pub fn initial_velocity(&self, grid: &Grid) -> Result<VectorField> {
        let init = self.initial.as_ref().and_then(|i| i.velocity.clone()).unwrap_or(VelocityInit::Zero);
        let u = match init {
            VelocityInit::Zero => VectorField::zeros(grid),
            VelocityInit::TaylorGreen { amplitude } => {
                if !grid.is_periodic() {
                    return Err(Error::Config("initial.velocity: taylor-green needs a periodic grid".into()));
                }
                taylor_green(grid, amplitude)
            }
            VelocityInit::Snapshot { path } => load_snapshot(&path)?,
        };
        if u.grid() != grid {
            return Err(Error::Config("initial.velocity: snapshot grid differs from the configured grid".into()));
        }
        Ok(u)
    }

    pub fn scan(&self) -> ScanSpec {
        self.scan.unwrap_or_default()
    }

    pub fn sampler(&self) -> SamplerConfig {
        let d = SamplerConfig::default();
        let s = self.sampler.clone().unwrap_or_default();
        SamplerConfig {
            grid: s.grid.unwrap_or(d.grid),
            random: s.random.unwrap_or(d.random),
            seed: self.seed(),
            refine: s.refine.unwrap_or(d.refine),
        }
    }

    pub fn ls_kind(&self) -> LsKind {
        self.ls.as_ref().and_then(|l| l.kind).unwrap_or(LsKind::Director)
    }

    pub fn test_set(&self) -> Result<TestSetSpec> {
        let d = TestSetSpec::default();
        let l = self.ls.clone().unwrap_or_default();
        let t = TestSetSpec {
            lambda_moduli: l.lambda_moduli.unwrap_or(d.lambda_moduli),
            lambda_args: l.lambda_args.unwrap_or(d.lambda_args),
            n_xi: l.n_xi.unwrap_or(d.n_xi),
            n_d: l.n_d.unwrap_or(d.n_d),
            axes: l.axes.unwrap_or(d.axes),
        };
        t.validate()?;
        Ok(t)
    }
}
