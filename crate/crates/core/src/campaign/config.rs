//! TOML run configuration: schema, defaults, validation and the config hash.

use std::path::{Path, PathBuf};

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::integrators::{Scheme, SobolevIndex, SolverConfig, Truncation};
use crate::io;
use crate::oracles::potential_nonincreasing;
use crate::spectral::{to_physical, SpatialField, SpectralField, TorusGrid};
use crate::transport::TransportOperator;
use crate::truncation::CutoffSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CampaignKind {
    Single,
    Ensemble,
    DtRefine,
    GammaRefine,
    OracleCheck,
    MaxprinCheck,
    Uniqueness,
    PicardCrosscheck,
}

impl CampaignKind {
    pub fn name(self) -> &'static str {
        match self {
            CampaignKind::Single => "single",
            CampaignKind::Ensemble => "ensemble",
            CampaignKind::DtRefine => "dt_refine",
            CampaignKind::GammaRefine => "gamma_refine",
            CampaignKind::OracleCheck => "oracle_check",
            CampaignKind::MaxprinCheck => "maxprin_check",
            CampaignKind::Uniqueness => "uniqueness",
            CampaignKind::PicardCrosscheck => "picard_crosscheck",
        }
    }
}

/// Initial data and potential presets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldPreset {
    Zero {},
    Constant {
        value: f64,
    },
    /// `amplitude · Σ_i sin(mode · x_i)`.
    Sin {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one_i")]
        mode: i64,
    },
    /// Periodized Gaussian `amplitude · exp(-|x - center|²/(2 width²))`, kept to `|ξ_i| ≤ modes`.
    GaussianBump {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "half")]
        width: f64,
        /// Defaults to `π` on every axis.
        #[serde(default)]
        center: Vec<f64>,
        #[serde(default = "sixteen")]
        modes: i64,
    },
    /// Field in the exchange format; relative paths resolve against the config file.
    File {
        path: PathBuf,
    },
}

/// Transport coefficient presets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoisePreset {
    Zero {},
    /// `a_i ≡ -√ν`, `b_i ≡ 0`.
    Gradient {
        nu: f64,
    },
    /// One value per axis, or a single value broadcast to every axis.
    Constant {
        a: Vec<f64>,
        b: Vec<f64>,
    },
    /// `a_i = a0 + amplitude·sin(x_i)`, `b_i ≡ b0`.
    SingleModeSine {
        #[serde(default)]
        a0: f64,
        amplitude: f64,
        #[serde(default)]
        b0: f64,
    },
    File {
        a: Vec<PathBuf>,
        b: Vec<PathBuf>,
    },
}

fn one() -> f64 {
    1.0
}
fn one_i() -> i64 {
    1
}
fn half() -> f64 {
    0.5
}
fn sixteen() -> i64 {
    16
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub dim: usize,
    pub points: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { dim: 1, points: 128 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub mu: f64,
    pub gamma: f64,
    pub k: f64,
    /// Defaults to `2⌊k⌋ + 1`.
    pub k_prime: Option<u32>,
    pub dt: f64,
    pub horizon: f64,
    pub scheme: Scheme,
    pub sample_every: usize,
    pub snapshot_every: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            mu: 0.1,
            gamma: 0.0,
            k: 3.0,
            k_prime: None,
            dt: 1e-4,
            horizon: 0.5,
            scheme: Scheme::ItoExpEm,
            sample_every: 10,
            snapshot_every: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruncationSection {
    pub enabled: bool,
    pub r: f64,
    pub halt_at_stopping: bool,
}

impl Default for TruncationSection {
    fn default() -> Self {
        Self {
            enabled: false,
            r: 10.0,
            halt_at_stopping: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RefineSection {
    pub dts: Vec<f64>,
    pub beta: f64,
}

impl Default for RefineSection {
    fn default() -> Self {
        Self {
            dts: vec![4e-4, 2e-4, 1e-4],
            beta: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GammaSection {
    pub values: Vec<f64>,
    pub beta: f64,
}

impl Default for GammaSection {
    fn default() -> Self {
        Self {
            values: vec![1e-8, 1e-9, 1e-10],
            beta: 2.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    ColeHopf,
    Shift,
    FeynmanKac,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSection {
    pub kind: OracleKind,
    /// `L∞` tolerance for the solver-vs-oracle comparison.
    pub tolerance: f64,
    /// Splitting substep of the Cole–Hopf reference; defaults to `dt/10`.
    pub substep: Option<f64>,
    pub paths: usize,
    pub path_steps: usize,
    /// Grid indices (flat) of the Monte Carlo probe points.
    pub probes: Vec<usize>,
    /// Allowed distance in 95% half-widths.
    pub bands: f64,
}

impl Default for OracleSection {
    fn default() -> Self {
        Self {
            kind: OracleKind::ColeHopf,
            tolerance: 1e-4,
            substep: None,
            paths: 100_000,
            path_steps: 100,
            probes: vec![0, 20, 45, 77, 110],
            bands: 3.0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaxprinSection {
    /// Defaults to `10·dt + N^{-k}`.
    pub tol: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UniquenessSection {
    pub delta: f64,
}

impl Default for UniquenessSection {
    fn default() -> Self {
        Self { delta: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PicardSection {
    pub tol: f64,
    pub max_iter: usize,
    /// Agreement threshold is `gap_factor · dt` in `sup_t L²`.
    pub gap_factor: f64,
}

impl Default for PicardSection {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 100,
            gap_factor: 10.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub campaign: CampaignKind,
    pub seeds: Vec<u64>,
    /// When set, the seeds become `seeds[0] .. seeds[0] + ensemble_size`.
    pub ensemble_size: Option<u64>,
    pub output_dir: PathBuf,
    pub grid: GridSection,
    pub solver: SolverSection,
    pub truncation: TruncationSection,
    pub initial: FieldPreset,
    pub potential: FieldPreset,
    pub noise: NoisePreset,
    pub refine: RefineSection,
    pub gamma_study: GammaSection,
    pub oracle: OracleSection,
    pub maxprin: MaxprinSection,
    pub uniqueness: UniquenessSection,
    pub picard: PicardSection,
    /// Directory that relative field-file paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            campaign: CampaignKind::Single,
            seeds: vec![0],
            ensemble_size: None,
            output_dir: PathBuf::from("runs"),
            grid: GridSection::default(),
            solver: SolverSection::default(),
            truncation: TruncationSection::default(),
            initial: FieldPreset::Sin {
                amplitude: 1.0,
                mode: 1,
            },
            potential: FieldPreset::Zero {},
            noise: NoisePreset::Gradient { nu: 0.04 },
            refine: RefineSection::default(),
            gamma_study: GammaSection::default(),
            oracle: OracleSection::default(),
            maxprin: MaxprinSection::default(),
            uniqueness: UniquenessSection::default(),
            picard: PicardSection::default(),
            base_dir: PathBuf::from("."),
        }
    }
}

impl RunConfig {
    /// Seeds after expanding `ensemble_size`.
    pub fn seed_list(&self) -> Vec<u64> {
        match (self.ensemble_size, self.seeds.first()) {
            (Some(n), Some(&s0)) => (s0..s0 + n).collect(),
            (Some(n), None) => (0..n).collect(),
            _ => self.seeds.clone(),
        }
    }

    /// Replaces the seed list by `[seed]` (or the ensemble starting at `seed`).
    pub fn override_seed(&mut self, seed: u64) {
        self.seeds = vec![seed];
    }

    /// Hex SHA-256 of the canonical JSON of the filled config, output directory excluded.
    pub fn hash(&self) -> String {
        let mut canon = self.clone();
        canon.output_dir = PathBuf::new();
        let json = serde_json::to_string(&canon).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn grid(&self) -> Result<TorusGrid> {
        TorusGrid::new(self.grid.dim, self.grid.points)
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    fn load_field(&self, path: &Path, grid: TorusGrid) -> Result<SpatialField> {
        let f = io::load(&self.resolve(path))?.into_physical();
        if f.grid() != grid {
            return Err(Error::Precondition(format!(
                "{} holds a field on {}, expected {grid}",
                path.display(),
                f.grid()
            )));
        }
        Ok(f)
    }

    pub fn build_field(&self, preset: &FieldPreset, grid: TorusGrid) -> Result<SpatialField> {
        Ok(match preset {
            FieldPreset::Zero {} => SpatialField::zeros(grid),
            FieldPreset::Constant { value } => SpatialField::constant(grid, *value),
            FieldPreset::Sin { amplitude, mode } => {
                let (a, m) = (*amplitude, *mode as f64);
                SpatialField::from_fn(grid, move |x| a * x.iter().map(|xi| (m * xi).sin()).sum::<f64>())
            }
            FieldPreset::GaussianBump {
                amplitude,
                width,
                center,
                modes,
            } => gaussian_bump(grid, *amplitude, *width, center, *modes)?,
            FieldPreset::File { path } => self.load_field(path, grid)?,
        })
    }

    pub fn build_operator(&self, grid: TorusGrid) -> Result<TransportOperator> {
        let n = grid.dim();
        let per_axis = |v: &[f64], name: &str| -> Result<Vec<f64>> {
            match v.len() {
                1 => Ok(vec![v[0]; n]),
                l if l == n => Ok(v.to_vec()),
                l => Err(Error::Config(vec![format!(
                    "noise.{name}: expected 1 or {n} values, got {l}"
                )])),
            }
        };
        match &self.noise {
            NoisePreset::Zero {} => Ok(TransportOperator::zero(grid)),
            NoisePreset::Gradient { nu } => TransportOperator::gradient_noise(grid, *nu),
            NoisePreset::Constant { a, b } => {
                TransportOperator::constant(grid, &per_axis(a, "a")?, &per_axis(b, "b")?)
            }
            NoisePreset::SingleModeSine { a0, amplitude, b0 } => {
                TransportOperator::single_mode_sine(grid, *a0, *amplitude, *b0)
            }
            NoisePreset::File { a, b } => {
                if a.len() != n || b.len() != n {
                    return Err(Error::Config(vec![format!(
                        "noise: file preset needs {n} paths for a and for b"
                    )]));
                }
                let load = |ps: &[PathBuf]| ps.iter().map(|p| self.load_field(p, grid)).collect::<Result<Vec<_>>>();
                TransportOperator::new(load(a)?, load(b)?)
            }
        }
    }

    /// Solver configuration described by this file (seeds and campaign settings aside).
    pub fn solver_config(&self) -> Result<SolverConfig> {
        let grid = self.grid()?;
        let k = SobolevIndex::new(self.solver.k)?;
        let truncation = if self.truncation.enabled {
            Truncation::On {
                cutoff: CutoffSpec::new(self.truncation.r, &grid, k.value())?,
                halt_at_stopping: self.truncation.halt_at_stopping,
            }
        } else {
            Truncation::Off
        };
        Ok(SolverConfig {
            mu: self.solver.mu,
            gamma: self.solver.gamma,
            k,
            k_prime: self.solver.k_prime.unwrap_or_else(|| k.regularizer_power()),
            dt: self.solver.dt,
            horizon: self.solver.horizon,
            scheme: self.solver.scheme,
            truncation,
            operator: self.build_operator(grid)?,
            potential: self.build_field(&self.potential, grid)?,
            initial: self.build_field(&self.initial, grid)?,
            sample_every: self.solver.sample_every,
            snapshot_every: self.solver.snapshot_every,
        })
    }

    /// Collects every violation, prefixed with the offending section.
    pub fn validate(&self) -> Result<SolverConfig> {
        let mut errs = Vec::new();
        if self.seed_list().is_empty() {
            errs.push("seeds: at least one seed is required".to_string());
        }
        let cfg = match self.solver_config() {
            Ok(c) => Some(c),
            Err(Error::Config(v)) => {
                errs.extend(v);
                None
            }
            Err(e) => {
                errs.push(format!("solver: {e}"));
                None
            }
        };
        if let Some(cfg) = &cfg {
            if let Err(e) = cfg.validate() {
                match e {
                    Error::Config(v) => errs.extend(v.into_iter().map(|m| format!("solver: {m}"))),
                    other => errs.push(format!("solver: {other}")),
                }
            }
            self.campaign_checks(cfg, &mut errs);
        }
        if errs.is_empty() {
            Ok(cfg.expect("built when no errors"))
        } else {
            Err(Error::Config(errs))
        }
    }

    fn campaign_checks(&self, cfg: &SolverConfig, errs: &mut Vec<String>) {
        let noiseless = cfg.operator.is_zero();
        let potential_zero = crate::spectral::sup_norm(&cfg.potential) == 0.0;
        match self.campaign {
            CampaignKind::DtRefine => {
                let d = &self.refine.dts;
                if d.len() < 2 || d.windows(2).any(|w| !(w[1] < w[0])) || d.iter().any(|x| !(*x > 0.0)) {
                    errs.push("refine.dts: need at least two positive, strictly descending steps".into());
                } else {
                    let finest = d[d.len() - 1];
                    for &dt in d.iter() {
                        let r = dt / finest;
                        if (r - r.round()).abs() > 1e-9 * r {
                            errs.push(format!("refine.dts: {dt} is not a multiple of the finest step {finest}"));
                        }
                        let mut c = cfg.clone();
                        c.dt = dt;
                        if let Err(Error::Config(v)) = c.validate() {
                            errs.extend(v.into_iter().map(|m| format!("refine.dts[{dt}]: {m}")));
                        }
                    }
                }
            }
            CampaignKind::GammaRefine => {
                let g = &self.gamma_study.values;
                if g.is_empty() || g.iter().any(|x| !(*x > 0.0)) || g.windows(2).any(|w| !(w[1] < w[0])) {
                    errs.push("gamma_study.values: need positive, strictly descending values".into());
                }
                for &gamma in g {
                    let mut c = cfg.clone();
                    c.gamma = gamma;
                    if let Err(Error::Config(v)) = c.validate() {
                        errs.extend(v.into_iter().map(|m| format!("gamma_study.values[{gamma:e}]: {m}")));
                    }
                }
            }
            CampaignKind::OracleCheck => match self.oracle.kind {
                OracleKind::ColeHopf | OracleKind::FeynmanKac if !noiseless => {
                    errs.push("oracle.kind: this oracle needs noise.preset = \"zero\"".into())
                }
                OracleKind::Shift if !matches!(self.noise, NoisePreset::Gradient { .. }) || !potential_zero => {
                    errs.push("oracle.kind: shift oracle needs noise.preset = \"gradient\" and a zero potential".into())
                }
                OracleKind::FeynmanKac => {
                    if self.oracle.probes.iter().any(|&p| p >= cfg.initial.grid().len()) {
                        errs.push("oracle.probes: index outside the grid".into());
                    }
                    if self.oracle.paths < 2 {
                        errs.push("oracle.paths: need at least 2 paths".into());
                    }
                }
                _ => {}
            },
            CampaignKind::MaxprinCheck => {
                if !cfg.operator.detect_special_class().is_special {
                    errs.push("noise: maximum-principle check needs constant coefficients".into());
                }
                if !potential_nonincreasing(&cfg.potential).unwrap_or(false) {
                    errs.push("potential: maximum-principle check needs ∂_i V <= 0".into());
                }
            }
            CampaignKind::Uniqueness => {
                if self.truncation.enabled {
                    errs.push("truncation: uniqueness envelope is for the untruncated equation".into());
                }
                if !(self.uniqueness.delta >= 0.0) {
                    errs.push("uniqueness.delta: must be >= 0".into());
                }
            }
            CampaignKind::PicardCrosscheck => {
                if !(cfg.gamma > 0.0) {
                    errs.push("solver.gamma: the mild solver needs gamma > 0".into());
                }
                if !(self.picard.tol > 0.0) {
                    errs.push("picard.tol: must be > 0".into());
                }
            }
            CampaignKind::Single | CampaignKind::Ensemble => {}
        }
    }
}

fn gaussian_bump(grid: TorusGrid, amplitude: f64, width: f64, center: &[f64], modes: i64) -> Result<SpatialField> {
    let n = grid.dim();
    if !(width > 0.0) || modes < 0 {
        return Err(Error::Config(vec![
            "initial/potential: gaussian_bump needs width > 0 and modes >= 0".into(),
        ]));
    }
    let center: Vec<f64> = if center.is_empty() {
        vec![std::f64::consts::PI; n]
    } else if center.len() == n {
        center.to_vec()
    } else {
        return Err(Error::Config(vec![format!(
            "initial/potential: gaussian_bump center needs {n} coordinates"
        )]));
    };
    if modes >= grid.points() as i64 / 2 {
        return Err(Error::Config(vec![format!(
            "initial/potential: gaussian_bump modes must stay below N/2 = {}",
            grid.points() / 2
        )]));
    }
    // Σ_m exp(-(x - c + 2πm)²/(2w²)) = (w/√(2π)) Σ_ξ exp(-w²ξ²/2) e^{iξ(x - c)}
    let norm = width / (2.0 * std::f64::consts::PI).sqrt();
    let mut hat = SpectralField::zeros(grid);
    let mut idx = vec![0i64; n];
    let side = (2 * modes + 1) as usize;
    for flat in 0..side.pow(n as u32) {
        let mut r = flat;
        for v in idx.iter_mut() {
            *v = (r % side) as i64 - modes;
            r /= side;
        }
        let mut c = Complex64::new(amplitude, 0.0);
        for (a, &xi) in idx.iter().enumerate() {
            let xi_f = xi as f64;
            c *= norm * (-0.5 * width * width * xi_f * xi_f).exp();
            c *= Complex64::from_polar(1.0, -xi_f * center[a]);
        }
        hat.set_mode(&idx, c);
    }
    Ok(to_physical(&hat))
}

/// Reads, fills defaults and validates; every violation is reported.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    let mut cfg = parse_config_str(&text)?;
    cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    cfg.validate()?;
    Ok(cfg)
}

/// Parses without validating the physics (schema errors only).
pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let de = toml::Deserializer::parse(text).map_err(|e| Error::Config(vec![e.to_string().trim().to_string()]))?;
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let msg = e.inner().message().trim().to_string();
        Error::Config(vec![if path == "." { msg } else { format!("{path}: {msg}") }])
    })
}
