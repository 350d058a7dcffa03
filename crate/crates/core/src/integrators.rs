//! Time stepping for `du = Σ 𝓛_i u ∘ dW_i + (V + μΔu + γΔ^{k'}u - ½θ|∇u|²) dt`.
//!
//! Two schemes share one pseudo-spectral right-hand side:
//!
//! * `ItoExpEm` works on the Itô form (drift gains `½ Σ 𝓛_i² u`) and integrates
//!   the stiff part `μΔ + γΔ^{k'}` exactly through the factor `exp(dt·symbol)`:
//!   `û ← E ⊙ (û + dt·drift^ + Σ_i (𝓛_i u)^ ΔW_i)`.
//! * `StratHeun` is the predictor-corrector for the Stratonovich form with the
//!   whole linear part explicit; configurations must satisfy
//!   `dt·max|symbol| ≤ 2` over the resolved modes.
//!
//! The state is dealiased after every stage. Noise enters explicitly in both.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::noise::NoisePath;
use crate::spectral::{
    grad_sup_norm_spectral, linear_symbol, to_physical, to_spectral, SpatialField, SpectralField,
};
use crate::transport::{SmoothnessBudget, TransportOperator};
use crate::truncation::{nonlinearity_spectral, stopping_monitor, CutoffSpec, StoppingEvent};

/// Blow-up is declared when the `H^k` norm exceeds this level.
pub const BLOW_UP_LEVEL: f64 = 1e6;

/// Largest `|dt·symbol|` accepted for the explicit Heun scheme.
pub const HEUN_STABILITY_LIMIT: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    ItoExpEm,
    StratHeun,
}

/// Regularity order `k` of the `H^k` phase space.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct SobolevIndex(f64);

impl SobolevIndex {
    pub fn new(k: f64) -> Result<Self> {
        if !(k >= 0.0) || !k.is_finite() {
            return Err(invalid("k", format!("must be finite and >= 0, got {k}")));
        }
        Ok(Self(k))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `2⌊k⌋ + 1`, the (odd) power of the hyper-viscous regularizer.
    pub fn regularizer_power(self) -> u32 {
        2 * self.0.floor() as u32 + 1
    }

    /// Whether `k > n/2 + 2`, the regularity the solvers are built for.
    pub fn admissible(self, dim: usize) -> bool {
        self.0 > dim as f64 / 2.0 + 2.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Truncation {
    Off,
    On {
        cutoff: CutoffSpec,
        /// Stop integrating at the first step with `‖u‖_{H^k} ≥ r/C`.
        halt_at_stopping: bool,
    },
}

impl Truncation {
    pub fn cutoff(&self) -> Option<&CutoffSpec> {
        match self {
            Truncation::Off => None,
            Truncation::On { cutoff, .. } => Some(cutoff),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub mu: f64,
    pub gamma: f64,
    pub k: SobolevIndex,
    pub k_prime: u32,
    pub dt: f64,
    pub horizon: f64,
    pub scheme: Scheme,
    pub truncation: Truncation,
    pub operator: TransportOperator,
    pub potential: SpatialField,
    pub initial: SpatialField,
    /// Diagnostics are recorded every `sample_every` steps (and at the end).
    pub sample_every: usize,
    /// Snapshots every `snapshot_every` steps; 0 keeps only the initial and final fields.
    pub snapshot_every: usize,
}

/// Quantities recorded when a configuration is accepted.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigAudit {
    pub steps: usize,
    /// `dt · max |symbol|` over the dealiased modes.
    pub stability_budget: f64,
    pub smoothness: SmoothnessBudget,
}

impl SolverConfig {
    /// Desk-scale defaults: `μ = 0.1`, `γ = 0`, `k = 3`, `k' = 7`, `dt = 1e-4`, `T = 0.5`,
    /// Itô exponential Euler–Maruyama, no truncation, diagnostics every step.
    pub fn desk(initial: SpatialField, potential: SpatialField, operator: TransportOperator) -> Self {
        Self {
            mu: 0.1,
            gamma: 0.0,
            k: SobolevIndex(3.0),
            k_prime: 7,
            dt: 1e-4,
            horizon: 0.5,
            scheme: Scheme::ItoExpEm,
            truncation: Truncation::Off,
            operator,
            potential,
            initial,
            sample_every: 1,
            snapshot_every: 0,
        }
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    pub fn symbol(&self) -> Result<Vec<f64>> {
        linear_symbol(&self.initial.grid(), self.mu, self.gamma, self.k_prime)
    }

    /// Checks every constraint and returns all violations at once.
    pub fn validate(&self) -> Result<ConfigAudit> {
        let mut errs = Vec::new();
        let grid = self.initial.grid();
        let n = grid.dim();
        if !self.k.admissible(n) {
            errs.push(format!(
                "k = {} violates k > n/2 + 2 = {}",
                self.k.value(),
                n as f64 / 2.0 + 2.0
            ));
        }
        if self.k_prime.is_multiple_of(2) {
            errs.push(format!(
                "k_prime = {} is even; γΔ^k' would be anti-dissipative",
                self.k_prime
            ));
        }
        if !(self.mu > 0.0) || !self.mu.is_finite() {
            errs.push(format!("mu = {} must be > 0", self.mu));
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            errs.push(format!("gamma = {} must be >= 0", self.gamma));
        }
        if !(self.dt > 0.0) || !(self.horizon > 0.0) {
            errs.push("dt and horizon must be > 0".into());
        } else {
            let steps = self.horizon / self.dt;
            if (steps - steps.round()).abs() > 1e-9 * steps || steps.round() < 1.0 {
                errs.push(format!(
                    "horizon {} is not an integer multiple of dt {}",
                    self.horizon, self.dt
                ));
            }
        }
        if self.sample_every == 0 {
            errs.push("sample_every must be >= 1".into());
        }
        if grid != self.potential.grid() || grid != self.operator.grid() {
            errs.push("initial field, potential and operator must share one grid".into());
        }
        if !self.initial.is_finite() || !self.potential.is_finite() {
            errs.push("initial field and potential must be finite".into());
        }
        let mut budget = 0.0;
        if errs.is_empty() {
            let sym = self.symbol()?;
            let limit = grid.dealias_limit();
            budget = sym
                .iter()
                .enumerate()
                .filter(|(i, _)| (0..n).all(|a| grid.wavenumber(*i, a).abs() <= limit))
                .map(|(_, s)| (self.dt * s).abs())
                .fold(0.0, f64::max);
            if self.scheme == Scheme::StratHeun && budget > HEUN_STABILITY_LIMIT {
                errs.push(format!(
                    "unstable dt for strat_heun: dt·max|symbol| = {budget:e} > {HEUN_STABILITY_LIMIT}"
                ));
            }
        }
        if !errs.is_empty() {
            return Err(Error::Config(errs));
        }
        Ok(ConfigAudit {
            steps: self.steps(),
            stability_budget: budget,
            smoothness: self
                .operator
                .smoothness(self.k.value().floor() as usize + 1)?,
        })
    }
}

/// One diagnostics sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub l2: f64,
    pub hk: f64,
    pub grad_sup: f64,
    pub theta: f64,
    pub mean_mode: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Termination {
    Completed,
    /// Non-finite state or `‖u‖_{H^k} > 1e6`; the trajectory keeps the last finite state.
    BlowUp { time: f64, reason: String },
    /// Truncation-respecting run halted at the first crossing of `r/C`.
    Stopped { time: f64 },
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub scheme: Scheme,
    pub dt: f64,
    pub k: f64,
    pub diagnostics: Vec<DiagnosticsRecord>,
    /// `(t, u(t))`, always including the initial and the last finite state.
    pub snapshots: Vec<(f64, SpatialField)>,
    pub termination: Termination,
    pub stopping: Option<StoppingEvent>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.diagnostics.iter().map(|d| d.t).collect()
    }

    pub fn final_state(&self) -> &SpatialField {
        &self.snapshots.last().expect("initial snapshot").1
    }

    pub fn final_time(&self) -> f64 {
        self.snapshots.last().expect("initial snapshot").0
    }

    pub fn completed(&self) -> bool {
        self.termination == Termination::Completed
    }

    pub fn max_hk(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.hk).fold(0.0, f64::max)
    }
}

/// Precomputed tables for one configuration; owns no state between steps.
pub struct Stepper<'a> {
    cfg: &'a SolverConfig,
    symbol: Vec<f64>,
    exp_factor: Vec<f64>,
    potential: SpectralField,
    dim: usize,
}

impl<'a> Stepper<'a> {
    pub fn new(cfg: &'a SolverConfig) -> Result<Self> {
        let symbol = cfg.symbol()?;
        let exp_factor = symbol.iter().map(|s| (cfg.dt * s).exp()).collect();
        Ok(Self {
            cfg,
            symbol,
            exp_factor,
            potential: to_spectral(&cfg.potential)?,
            dim: cfg.initial.grid().dim(),
        })
    }

    pub fn config(&self) -> &SolverConfig {
        self.cfg
    }

    fn cutoff(&self) -> Option<&CutoffSpec> {
        self.cfg.truncation.cutoff()
    }

    /// Itô drift without the stiff part: `V + ½Σ𝓛_i²u - ½θ|∇u|²`; also returns θ.
    pub fn ito_drift_hat(&self, u: &SpectralField) -> Result<(SpectralField, f64)> {
        let (nl, theta, _) = nonlinearity_spectral(self.cutoff(), u)?;
        let mut d = self.potential.sub(&nl)?;
        if !self.cfg.operator.is_zero() {
            d.axpy(1.0, &self.cfg.operator.strat_correction_spectral(u)?)?;
        }
        Ok((d, theta))
    }

    /// Full Stratonovich drift `V + μΔu + γΔ^{k'}u - ½θ|∇u|²`; also returns θ.
    pub fn strat_drift_hat(&self, u: &SpectralField) -> Result<(SpectralField, f64)> {
        let (nl, theta, _) = nonlinearity_spectral(self.cutoff(), u)?;
        let mut d = u.apply_symbol(&self.symbol);
        d.axpy(1.0, &self.potential)?;
        d.axpy(-1.0, &nl)?;
        Ok((d, theta))
    }

    /// `Σ_i (𝓛_i u)^ ΔW_i`.
    pub fn noise_hat(&self, u: &SpectralField, dw: &[f64]) -> Result<SpectralField> {
        let mut acc = SpectralField::zeros(u.grid());
        if self.cfg.operator.is_zero() {
            return Ok(acc);
        }
        for (i, &w) in dw.iter().enumerate().take(self.dim) {
            acc.axpy(w, &self.cfg.operator.apply_l_spectral(i, u)?)?;
        }
        Ok(acc)
    }

    pub fn step_ito_exp_em(&self, u: &SpectralField, dw: &[f64]) -> Result<SpectralField> {
        let (drift, _) = self.ito_drift_hat(u)?;
        let mut next = u.clone();
        next.axpy(self.cfg.dt, &drift)?;
        next.axpy(1.0, &self.noise_hat(u, dw)?)?;
        Ok(next.apply_symbol(&self.exp_factor).dealias())
    }

    pub fn step_strat_heun(&self, u: &SpectralField, dw: &[f64]) -> Result<SpectralField> {
        let dt = self.cfg.dt;
        let (f0, _) = self.strat_drift_hat(u)?;
        let g0 = self.noise_hat(u, dw)?;
        let mut pred = u.clone();
        pred.axpy(dt, &f0)?;
        pred.axpy(1.0, &g0)?;
        let pred = pred.dealias();
        let (f1, _) = self.strat_drift_hat(&pred)?;
        let g1 = self.noise_hat(&pred, dw)?;
        let mut next = u.clone();
        next.axpy(0.5 * dt, &f0)?;
        next.axpy(0.5 * dt, &f1)?;
        next.axpy(0.5, &g0)?;
        next.axpy(0.5, &g1)?;
        Ok(next.dealias())
    }

    pub fn step(&self, u: &SpectralField, dw: &[f64]) -> Result<SpectralField> {
        match self.cfg.scheme {
            Scheme::ItoExpEm => self.step_ito_exp_em(u, dw),
            Scheme::StratHeun => self.step_strat_heun(u, dw),
        }
    }

    fn record(&self, t: f64, u: &SpectralField) -> DiagnosticsRecord {
        let grad_sup = grad_sup_norm_spectral(u);
        DiagnosticsRecord {
            t,
            l2: u.l2_norm(),
            hk: u.sobolev_norm(self.cfg.k.value()),
            grad_sup,
            theta: self.cutoff().map_or(1.0, |c| c.theta_unchecked(grad_sup)),
            mean_mode: u.coefficients()[0].re,
        }
    }
}

/// `V + ½Σ𝓛_i²u - ½θ|∇u|²` in physical space.
pub fn ito_drift(cfg: &SolverConfig, u: &SpatialField) -> Result<SpatialField> {
    let (d, _) = Stepper::new(cfg)?.ito_drift_hat(&to_spectral(u)?)?;
    Ok(to_physical(&d))
}

fn single_step(cfg: &SolverConfig, expect: Scheme, u: &SpatialField, dw: &[f64]) -> Result<SpatialField> {
    if cfg.scheme != expect {
        return Err(Error::Precondition(format!(
            "configuration selects {:?}, not {expect:?}",
            cfg.scheme
        )));
    }
    if dw.len() != u.grid().dim() {
        return Err(invalid("dw", "one increment per Brownian motion"));
    }
    let stepper = Stepper::new(cfg)?;
    let next = stepper.step(&to_spectral(u)?, dw)?;
    if !next.is_finite() {
        return Err(Error::NonFinite("time step"));
    }
    Ok(to_physical(&next))
}

pub fn step_ito_exp_em(cfg: &SolverConfig, u: &SpatialField, dw: &[f64]) -> Result<SpatialField> {
    single_step(cfg, Scheme::ItoExpEm, u, dw)
}

pub fn step_strat_heun(cfg: &SolverConfig, u: &SpatialField, dw: &[f64]) -> Result<SpatialField> {
    single_step(cfg, Scheme::StratHeun, u, dw)
}

/// Integrates `cfg` along `path` (coarsened to `cfg.dt` when finer).
pub fn integrate(cfg: &SolverConfig, path: &NoisePath) -> Result<Trajectory> {
    let audit = cfg.validate()?;
    let grid = cfg.initial.grid();
    if path.dim() != grid.dim() {
        return Err(Error::Precondition(format!(
            "path carries {} Brownian motions, the operator needs {}",
            path.dim(),
            grid.dim()
        )));
    }
    let path = path.at_step(cfg.dt)?;
    let steps = audit.steps;
    if path.steps() < steps {
        return Err(Error::Precondition(format!(
            "path horizon {} shorter than {}",
            path.horizon(),
            cfg.horizon
        )));
    }
    let stepper = Stepper::new(cfg)?;
    let mut state = to_spectral(&cfg.initial)?.dealias();
    let mut diagnostics = vec![stepper.record(0.0, &state)];
    let mut snapshots = vec![(0.0, to_physical(&state))];
    let mut termination = Termination::Completed;
    let halt_level = match cfg.truncation {
        Truncation::On {
            cutoff,
            halt_at_stopping: true,
        } => Some(cutoff.stopping_level()),
        _ => None,
    };
    let mut last_t = 0.0;
    let mut recorded_last = true;
    let mut snapped_last = true;

    if let Some(level) = halt_level {
        if diagnostics[0].hk >= level {
            termination = Termination::Stopped { time: 0.0 };
        }
    }

    if termination == Termination::Completed {
        for step in 0..steps {
            let next = stepper.step(&state, path.increment(step))?;
            let t = (step + 1) as f64 * cfg.dt;
            let hk = next.sobolev_norm(cfg.k.value());
            if !next.is_finite() || !(hk <= BLOW_UP_LEVEL) {
                let reason = if next.is_finite() {
                    format!("H^k norm {hk:e} exceeds {BLOW_UP_LEVEL:e}")
                } else {
                    "non-finite state".to_string()
                };
                termination = Termination::BlowUp { time: t, reason };
                break;
            }
            state = next;
            last_t = t;
            recorded_last = false;
            snapped_last = false;
            let halt = halt_level.is_some_and(|level| hk >= level);
            if (step + 1) % cfg.sample_every == 0 || step + 1 == steps || halt {
                diagnostics.push(stepper.record(t, &state));
                recorded_last = true;
            }
            if cfg.snapshot_every > 0 && (step + 1) % cfg.snapshot_every == 0 {
                snapshots.push((t, to_physical(&state)));
                snapped_last = true;
            }
            if halt {
                termination = Termination::Stopped { time: t };
                break;
            }
        }
    }
    if !recorded_last {
        diagnostics.push(stepper.record(last_t, &state));
    }
    if !snapped_last {
        snapshots.push((last_t, to_physical(&state)));
    }
    let stopping = cfg.truncation.cutoff().map(|c| {
        let times: Vec<f64> = diagnostics.iter().map(|d| d.t).collect();
        let hk: Vec<f64> = diagnostics.iter().map(|d| d.hk).collect();
        stopping_monitor(&times, &hk, c)
    });
    Ok(Trajectory {
        scheme: cfg.scheme,
        dt: cfg.dt,
        k: cfg.k.value(),
        diagnostics,
        snapshots,
        termination,
        stopping,
    })
}
