//! Campaign orchestration: fan-out over seeds or parameters on a fixed worker pool,
//! single-threaded aggregation, artifact writing.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::{CampaignKind, OracleKind, RunConfig};
use super::output::{ArtifactDir, MANIFEST};
use super::report::render_report;
use crate::error::{Error, Result};
use crate::integrators::{integrate, SolverConfig, Termination, Trajectory};
use crate::mild::{fixed_point_solve, MildProblem};
use crate::noise::{sample_path, NoisePath};
use crate::oracles::{
    cole_hopf_exact, compare, default_max_principle_tol, feynman_kac_mc, gamma_convergence_study,
    max_principle_check, shift_oracle, uniqueness_experiment, FeynmanKacSpec, OracleMetadata,
    OracleReport, Series,
};
use crate::spectral::{sup_norm, to_spectral};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Clone, Debug)]
pub struct CampaignOutcome {
    pub dir: PathBuf,
    pub status: Status,
    pub summary: BTreeMap<String, Value>,
    /// Main report of the campaign, or the manifest when the run errored.
    pub report: PathBuf,
    pub error: Option<String>,
}

impl CampaignOutcome {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

struct Verdict {
    pass: bool,
    summary: BTreeMap<String, Value>,
    report: String,
}

struct Ctx<'a> {
    run: &'a RunConfig,
    solver: SolverConfig,
    seeds: Vec<u64>,
}

impl Ctx<'_> {
    fn path(&self, seed: u64, dt: f64) -> Result<NoisePath> {
        let steps = (self.solver.horizon / dt).round() as usize;
        sample_path(seed, self.solver.initial.grid().dim(), dt, steps)
    }
}

/// Shortest round-trip form, in exponent notation away from unit scale.
fn num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && !(1e-3..1e6).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn summary<const N: usize>(items: [(&str, Value); N]) -> BTreeMap<String, Value> {
    items.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// Runs the campaign named in `cfg` under `<out_root>/<hash>/` on `workers` threads
/// (all cores when `None`).
///
/// Invalid configs, unwritable outputs and foreign artifacts are errors. Module
/// failures during the campaign are recorded in the manifest and returned with
/// [`Status::Error`].
pub fn run_campaign(cfg: &RunConfig, out_root: &Path, workers: Option<usize>) -> Result<CampaignOutcome> {
    let solver = cfg.validate()?;
    let hash = cfg.hash();
    let mut out = ArtifactDir::open(out_root, &hash)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::Precondition(format!("worker pool: {e}")))?;
    let started = SystemTime::now();
    let clock = Instant::now();
    let ctx = Ctx {
        run: cfg,
        solver,
        seeds: cfg.seed_list(),
    };
    let result = pool.install(|| dispatch(&ctx, &mut out));
    let wall = clock.elapsed().as_secs_f64();
    let (status, summary, report, error) = match result {
        Ok(v) => (
            if v.pass { Status::Pass } else { Status::Fail },
            v.summary,
            v.report,
            None,
        ),
        Err(e) => (Status::Error, BTreeMap::new(), MANIFEST.to_string(), Some(e.to_string())),
    };
    let unix = |t: SystemTime| t.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
    let manifest = json!({
        "campaign": cfg.campaign.name(),
        "status": status,
        "seeds": ctx.seeds,
        "version": env!("CARGO_PKG_VERSION"),
        "started_unix": unix(started),
        "finished_unix": unix(SystemTime::now()),
        "wall_time_s": wall,
        "workers": pool.current_num_threads(),
        "summary": summary,
        "report": report,
        "error": error,
        "files": out.files(),
        "config": cfg,
    });
    out.write_manifest(&manifest)?;
    render_report(out.path())?;
    Ok(CampaignOutcome {
        dir: out.path().to_path_buf(),
        report: out.path().join(&report),
        status,
        summary,
        error,
    })
}

fn dispatch(ctx: &Ctx, out: &mut ArtifactDir) -> Result<Verdict> {
    match ctx.run.campaign {
        CampaignKind::Single => single(ctx, out),
        CampaignKind::Ensemble => ensemble(ctx, out),
        CampaignKind::DtRefine => dt_refine(ctx, out),
        CampaignKind::GammaRefine => gamma_refine(ctx, out),
        CampaignKind::OracleCheck => match ctx.run.oracle.kind {
            OracleKind::ColeHopf => cole_hopf_check(ctx, out),
            OracleKind::Shift => shift_check(ctx, out),
            OracleKind::FeynmanKac => feynman_kac_check(ctx, out),
        },
        CampaignKind::MaxprinCheck => maxprin(ctx, out),
        CampaignKind::Uniqueness => uniqueness(ctx, out),
        CampaignKind::PicardCrosscheck => picard(ctx, out),
    }
}

fn trajectories(ctx: &Ctx, cfg: &SolverConfig) -> Result<Vec<Trajectory>> {
    ctx.seeds
        .par_iter()
        .map(|&s| integrate(cfg, &ctx.path(s, cfg.dt)?))
        .collect()
}

const DIAG_HEADER: [&str; 7] = ["t", "L2", "Hk", "grad_sup", "theta", "mean_mode", "event"];

fn diagnostics_rows(traj: &Trajectory) -> Vec<Vec<String>> {
    let stop_time = traj.stopping.and_then(|s| s.time);
    let last = traj.diagnostics.len().saturating_sub(1);
    traj.diagnostics
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let mut events = Vec::new();
            if stop_time.is_some_and(|s| (s - d.t).abs() < 1e-12) {
                events.push("stopping_time");
            }
            if i == last {
                match traj.termination {
                    Termination::BlowUp { .. } => events.push("blow_up"),
                    Termination::Stopped { .. } => events.push("halted"),
                    Termination::Completed => {}
                }
            }
            vec![
                num(d.t),
                num(d.l2),
                num(d.hk),
                num(d.grad_sup),
                num(d.theta),
                num(d.mean_mode),
                events.join(";"),
            ]
        })
        .collect()
}

fn finished(traj: &Trajectory) -> bool {
    !matches!(traj.termination, Termination::BlowUp { .. })
}

fn single(ctx: &Ctx, out: &mut ArtifactDir) -> Result<Verdict> {
    let runs = trajectories(ctx, &ctx.solver)?;
    let mut index = Vec::new();
    for (seed, traj) in ctx.seeds.iter().zip(&runs) {
        out.write_csv(&format!("traj/seed_{seed}.csv"), &DIAG_HEADER, diagnostics_rows(traj))?;
        for (j, (t, u)) in traj.snapshots.iter().enumerate() {
            let name = format!("fields/seed_{seed}_snap_{j:05}.txt");
            out.write_field(&name, u)?;
            index.push(vec![seed.to_string(), j.to_string(), num(*t), name]);
        }
    }
    out.write_csv("snapshots.csv", &["seed", "index", "t", "file"], index)?;
    let rows: Vec<Value> = ctx
        .seeds
        .iter()
        .zip(&runs)
        .map(|(s, r)| {
            json!({
                "seed": s,
                "termination": r.termination,
                "stopping": r.stopping,
                "final_time": r.final_time(),
                "max_hk": r.max_hk(),
                "final_l2": r.final_state().l2_norm(),
            })
        })
        .collect();
    out.write_json("runs.json", &json!({ "runs": rows }))?;
    let blow_ups = runs.iter().filter(|r| !finished(r)).count();
    Ok(Verdict {
        pass: blow_ups == 0,
        summary: summary([
            ("runs", json!(runs.len())),
            ("blow_ups", json!(blow_ups)),
            ("max_hk", json!(runs.iter().map(|r| r.max_hk()).fold(0.0, f64::max))),
        ]),
        report: "runs.json".into(),
    })
}

fn ensemble(ctx: &Ctx, out: &mut ArtifactDir) -> Result<Verdict> {
    let runs = trajectories(ctx, &ctx.solver)?;
    for (seed, traj) in ctx.seeds.iter().zip(&runs) {
        out.write_csv(&format!("traj/seed_{seed}.csv"), &DIAG_HEADER, diagnostics_rows(traj))?;
        out.write_field(&format!("fields/seed_{seed}_final.txt"), traj.final_state())?;
    }
    let samples = runs.iter().map(|r| r.diagnostics.len()).max().unwrap_or(0);
    let mut rows = Vec::with_capacity(samples);
    let mut max_fourth: f64 = 0.0;
    for s in 0..samples {
        let live: Vec<_> = runs.iter().filter_map(|r| r.diagnostics.get(s)).collect();
        let m = live.len() as f64;
        let mean = |f: &dyn Fn(f64) -> f64| live.iter().map(|d| f(d.hk)).sum::<f64>() / m;
        let fourth = mean(&|h| h.powi(4));
        max_fourth = max_fourth.max(fourth);
        rows.push(vec![
            num(live[0].t),
            live.len().to_string(),
            num(live.iter().map(|d| d.l2).sum::<f64>() / m),
            num(mean(&|h| h)),
            num(mean(&|h| h * h)),
            num(fourth),
            num(live.iter().map(|d| d.hk).fold(0.0, f64::max)),
        ]);
    }
    out.write_csv(
        "moments.csv",
        &["t", "members", "mean_L2", "mean_Hk", "mean_Hk2", "mean_Hk4", "max_Hk"],
        rows,
    )?;
    let blow_ups = runs.iter().filter(|r| !finished(r)).count();
    Ok(Verdict {
        pass: blow_ups == 0 && max_fourth.is_finite(),
        summary: summary([
            ("members", json!(runs.len())),
            ("blow_ups", json!(blow_ups)),
            ("max_t_mean_hk4", json!(max_fourth)),
        ]),
        report: "moments.csv".into(),
    })
}

fn dt_refine(ctx: &Ctx, out: &mut ArtifactDir) -> Result<Verdict> {
    let dts = &ctx.run.refine.dts;
    let beta = ctx.run.refine.beta;
    let finest = *dts.last().expect("validated");
    // per seed: errors of every coarser level against the finest run on one path
    let per_seed: Vec<Vec<[f64; 3]>> = ctx
        .seeds
        .par_iter()
        .map(|&seed| {
            let path = ctx.path(seed, finest)?;
            let finals = dts
                .iter()
                .map(|&dt| {
                    let mut c = ctx.solver.clone();
                    c.dt = dt;
                    let traj = integrate(&c, &path)?;
                    if !finished(&traj) {
                        return Err(Error::Precondition(format!(
                            "seed {seed} at dt = {dt:e}: {:?}",
                            traj.termination
                        )));
                    }
                    Ok(traj.final_state().clone())
                })
                .collect::<Result<Vec<_>>>()?;
            let reference = finals.last().expect("finest");
            finals[..finals.len() - 1]
                .iter()
                .map(|u| {
                    let e = u.sub(reference)?;
                    Ok([e.l2_norm(), sup_norm(&e), to_spectral(&e)?.sobolev_norm(beta)])
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let levels = dts.len() - 1;
    let n = ctx.seeds.len() as f64;
    let mean: Vec<[f64; 3]> = (0..levels)
        .map(|j| {
            let mut m = [0.0; 3];
            for errs in &per_seed {
                for c in 0..3 {
                    m[c] += errs[j][c] / n;
                }
            }
            m
        })
        .collect();
    let mut rows = Vec::new();
    let mut orders = Vec::new();
    let mut monotone = true;
    for j in 0..levels {
        let (order, ok) = if j + 1 < levels {
            let p = (mean[j][0] / mean[j + 1][0]).ln() / (dts[j] / dts[j + 1]).ln();
            orders.push(p);
            (num(p), mean[j + 1][0] < mean[j][0])
        } else {
            (String::new(), true)
        };
        monotone &= ok;
        rows.push(vec![
            num(dts[j]),
            num(mean[j][0]),
            num(mean[j][1]),
            num(mean[j][2]),
            order,
            ok.to_string(),
        ]);
    }
    out.write_csv(
        "refine.csv",
        &["dt", "error_L2", "error_Linf", "error_Hbeta", "observed_order", "pass"],
        rows,
    )?;
    let seed_rows = ctx.seeds.iter().zip(&per_seed).flat_map(|(s, errs)| {
        errs.iter().zip(dts).map(move |(e, dt)| {
            vec![s.to_string(), num(*dt), num(e[0]), num(e[1]), num(e[2])]
        })
    });
    out.write_csv(
        "refine_seeds.csv",
        &["seed", "dt", "error_L2", "error_Linf", "error_Hbeta"],
        seed_rows.collect::<Vec<_>>(),
    )?;
    Ok(Verdict {
        pass: monotone,
        summary: summary([
            ("reference_dt", json!(finest)),
            ("seeds", json!(ctx.seeds.len())),
            ("observed_orders", json!(orders)),
            ("monotone", json!(monotone)),
        ]),
        report: "refine.csv".into(),
    })
}

fn gamma_refine(ctx: &Ctx, out: &mut ArtifactDir) -> Result<Verdict> {
    let g = &ctx.run.gamma_study;
    let studies = ctx
        .seeds
        .iter()
        .map(|&seed| gamma_convergence_study(&ctx.solver, &g.values, &ctx.path(seed, ctx.solver.dt)?, g.beta))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for (seed, st) in ctx.seeds.iter().zip(&studies) {
        for r in &st.rows {
            rows.push(vec![
                seed.to_string(),
                num(r.gamma),
                num(r.next_gamma),
                num(r.diff_next),
                num(r.diff_zero),
                st.pass.to_string(),
            ]);
        }
    }
    out.write_csv(
        "gamma.csv",
        &["seed", "gamma", "next_gamma", "error_Hbeta_next", "error_Hbeta_zero", "pass"],
        rows,
    )?;
    let pairs: Vec<Value> = ctx
        .seeds
        .iter()
        .zip(&studies)
        .map(|(s, st)| json!({ "seed": s, "study": st }))
        .collect();
    out.write_json("gamma.json", &json!({ "studies": pairs }))?;
    let passed = studies.iter().filter(|s| s.pass).count();
    Ok(Verdict {
        pass: passed == studies.len(),
        summary: summary([("studies", json!(studies.len())), ("monotone", json!(passed))]),
        report: "gamma.json".into(),
    })
}

fn sampled(traj: &Trajectory) -> Series {
    traj.snapshots.clone()
}

fn with_snapshots(cfg: &SolverConfig) -> SolverConfig {
    let mut c = cfg.clone();
    if c.snapshot_every == 0 {
        c.snapshot_every = c.sample_every.max(1);
    }
    c
}

fn write_oracle(out: &mut ArtifactDir, reports: &[OracleReport]) -> Result<Verdict> {
    let rows = reports.iter().flat_map(|r| {
        r.rows.iter().map(move |e| {
            vec![
                r.metadata.seed.map(|s| s.to_string()).unwrap_or_default(),
                num(e.t),
                num(e.l2),
                num(e.linf),
                num(e.h_beta),
                (e.linf <= r.tolerance).to_string(),
            ]
        })
    });
    out.write_csv(
        "errors.csv",
        &["seed", "t", "error_L2", "error_Linf", "error_Hbeta", "pass"],
        rows.collect::<Vec<_>>(),
    )?;
    let pass = reports.iter().all(|r| r.pass);
    out.write_json("report.json", &json!({ "pass": pass, "reports": reports }))?;
    Ok(Verdict {
        pass,
        summary: summary([
            ("oracle", json!(reports[0].oracle)),
            ("tolerance", json!(reports[0].tolerance)),
            ("max_linf", json!(reports.iter().map(|r| r.max_linf).fold(0.0, f64::max))),
        ]),
        report: "report.json".into(),
    })
}

const ORACLE_BETA: f64 = 2.0;

fn cole_hopf_check(ctx: &Ctx, out: &mut ArtifactDir) -> Result<Verdict> {
    let cfg = with_snapshots(&ctx.solver);
    let traj = integrate(&cfg, &NoisePath::silent(cfg.initial.grid().dim(), cfg.dt, cfg.steps()))?;
    let candidate = sampled(&traj);
    let times: Vec<f64> = candidate.iter().map(|(t, _)| *t).collect();
    let substep = ctx.run.oracle.substep.unwrap_or(cfg.dt / 10.0);
    let exact = cole_hopf_exact(&cfg.initial, cfg.mu, &cfg.potential, cfg.horizon, &times, substep)?;
    let meta = OracleMetadata {
        dt: cfg.dt,
        points: cfg.initial.grid().points(),
        seed: None,
    };
    let report = compare("cole_hopf_exact", &candidate, &exact, ORACLE_BETA, ctx.run.oracle.tolerance, meta)?;
    write_oracle(out, &[report])
}

fn shift_check(ctx: &Ctx, out: &mut ArtifactDir) -> Result<Verdict> {
    let cfg = with_snapshots(&ctx.solver);
    let nu = match ctx.run.noise {
        super::config::NoisePreset::Gradient { nu } => nu,
        _ => unreachable!("validated"),
    };
    let reports = ctx
        .seeds
        .par_iter()
        .map(|&seed| {
            let path = ctx.path(seed, cfg.dt)?;
            let candidate = sampled(&integrate(&cfg, &path)?);
            let times: Vec<f64> = candidate.iter().map(|(t, _)| *t).collect();
            let exact = shift_oracle(&cfg.initial, cfg.mu, nu, &path, cfg.horizon, &times)?;
            let meta = OracleMetadata {
                dt: cfg.dt,
                points: cfg.initial.grid().points(),
                seed: Some(seed),
            };
            compare("shift_oracle", &candidate, &exact, ORACLE_BETA, ctx.run.oracle.tolerance, meta)
        })
        .collect::<Result<Vec<_>>>()?;
    write_oracle(out, &reports)
}

fn feynman_kac_check(ctx: &Ctx, out: &mut ArtifactDir) -> Result<Verdict> {
    let cfg = &ctx.solver;
    let o = &ctx.run.oracle;
    let grid = cfg.initial.grid();
    let traj = integrate(cfg, &NoisePath::silent(grid.dim(), cfg.dt, cfg.steps()))?;
    let xs: Vec<Vec<f64>> = o.probes.iter().map(|&p| grid.coordinates(p)).collect();
    let spec = FeynmanKacSpec {
        paths: o.paths,
        seed: ctx.seeds[0],
        steps: o.path_steps,
        chunk: 1000,
    };
    let est = feynman_kac_mc(&cfg.initial, &cfg.potential, cfg.mu, traj.final_time(), &xs, &spec)?;
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for (e, &p) in est.iter().zip(&o.probes) {
        let solver_u = traj.final_state().values()[p];
        let z = (solver_u - e.u).abs() / e.half_width;
        worst = worst.max(z);
        let mut row = vec![p.to_string()];
        row.extend(e.x.iter().map(|x| num(*x)));
        row.extend([num(solver_u), num(e.u), num(e.half_width), num(z), (z <= o.bands).to_string()]);
        rows.push(row);
    }
    let mut header = vec!["probe".to_string()];
    header.extend((0..grid.dim()).map(|i| format!("x{i}")));
    header.extend(["solver_u", "mc_u", "half_width", "bands", "pass"].map(String::from));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    out.write_csv("fk.csv", &header, rows)?;
    let pass = worst <= o.bands;
    out.write_json(
        "report.json",
        &json!({ "pass": pass, "spec": spec, "estimates": est, "worst_bands": worst, "allowed_bands": o.bands }),
    )?;
    Ok(Verdict {
        pass,
        summary: summary([
            ("paths", json!(o.paths)),
            ("probes", json!(o.probes.len())),
            ("worst_bands", json!(worst)),
        ]),
        report: "report.json".into(),
    })
}

fn maxprin(ctx: &Ctx, out: &mut ArtifactDir) -> Result<Verdict> {
    let cfg = &ctx.solver;
    let tol = ctx
        .run
        .maxprin
        .tol
        .unwrap_or_else(|| default_max_principle_tol(cfg.dt, cfg.initial.grid().points(), cfg.k.value()));
    let reports = ctx
        .seeds
        .par_iter()
        .map(|&seed| max_principle_check(cfg, &integrate(cfg, &ctx.path(seed, cfg.dt)?)?, tol))
        .collect::<Result<Vec<_>>>()?;
    let rows = ctx.seeds.iter().zip(&reports).map(|(s, r)| {
        vec![
            s.to_string(),
            num(r.initial),
            num(r.tol),
            r.samples.to_string(),
            r.violations.to_string(),
            num(r.worst_margin),
            num(r.worst_time),
            r.pass.to_string(),
        ]
    });
    out.write_csv(
        "maxprin.csv",
        &["seed", "initial_grad_sup", "tol", "samples", "violations", "worst_margin", "worst_time", "pass"],
        rows.collect::<Vec<_>>(),
    )?;
    let violations: usize = reports.iter().map(|r| r.violations).sum();
    Ok(Verdict {
        pass: reports.iter().all(|r| r.pass),
        summary: summary([
            ("seeds", json!(reports.len())),
            ("tol", json!(tol)),
            ("violations", json!(violations)),
            ("worst_margin", json!(reports.iter().map(|r| r.worst_margin).fold(f64::NEG_INFINITY, f64::max))),
        ]),
        report: "maxprin.csv".into(),
    })
}

fn uniqueness(ctx: &Ctx, out: &mut ArtifactDir) -> Result<Verdict> {
    let delta = ctx.run.uniqueness.delta;
    let reports = ctx
        .seeds
        .par_iter()
        .map(|&seed| uniqueness_experiment(&ctx.solver, seed, delta))
        .collect::<Result<Vec<_>>>()?;
    for r in &reports {
        let rows = r.samples.iter().map(|s| {
            let ratio = if s.envelope > 0.0 { s.gap_sq / s.envelope } else { 0.0 };
            vec![num(s.t), num(s.gap_sq), num(s.envelope), num(ratio)]
        });
        out.write_csv(
            &format!("envelope/seed_{}.csv", r.seed),
            &["t", "gap_sq", "envelope", "ratio"],
            rows.collect::<Vec<_>>(),
        )?;
    }
    let rows = reports.iter().map(|r| {
        vec![
            r.seed.to_string(),
            num(r.delta),
            r.bit_identical.to_string(),
            num(r.worst_ratio),
            num(r.terminal_gap),
            r.pass.to_string(),
        ]
    });
    out.write_csv(
        "uniqueness.csv",
        &["seed", "delta", "bit_identical", "worst_ratio", "terminal_gap", "pass"],
        rows.collect::<Vec<_>>(),
    )?;
    Ok(Verdict {
        pass: reports.iter().all(|r| r.pass),
        summary: summary([
            ("seeds", json!(reports.len())),
            ("delta", json!(delta)),
            ("held", json!(reports.iter().filter(|r| r.pass).count())),
            ("worst_ratio", json!(reports.iter().map(|r| r.worst_ratio).fold(0.0, f64::max))),
        ]),
        report: "uniqueness.csv".into(),
    })
}

#[derive(Serialize)]
struct PicardRecord {
    seed: u64,
    converged: bool,
    iterations: usize,
    increments: Vec<f64>,
    ratios: Vec<f64>,
    residual: Option<f64>,
    sup_l2_gap: Option<f64>,
    gap_threshold: f64,
    pass: bool,
}

fn picard(ctx: &Ctx, out: &mut ArtifactDir) -> Result<Verdict> {
    let p = &ctx.run.picard;
    let threshold = p.gap_factor * ctx.solver.dt;
    let records = ctx
        .seeds
        .par_iter()
        .map(|&seed| {
            let path = ctx.path(seed, ctx.solver.dt)?;
            let prob = MildProblem::new(ctx.solver.clone(), &path)?;
            let sol = match fixed_point_solve(&prob, p.tol, p.max_iter) {
                Ok(s) => s,
                Err(Error::NonConvergence { iterations, ratios, .. }) => {
                    return Ok(PicardRecord {
                        seed,
                        converged: false,
                        iterations,
                        increments: Vec::new(),
                        ratios,
                        residual: None,
                        sup_l2_gap: None,
                        gap_threshold: threshold,
                        pass: false,
                    })
                }
                Err(e) => return Err(e),
            };
            let mut stepped = ctx.solver.clone();
            stepped.snapshot_every = 1;
            let traj = integrate(&stepped, &path)?;
            let mut gap: f64 = 0.0;
            for (m, (_, u)) in traj.snapshots.iter().enumerate().take(sol.fields.len()) {
                gap = gap.max(u.sub(&sol.field_at(m))?.l2_norm());
            }
            let contracting = sol.ratios.iter().all(|&r| r < 1.0);
            Ok(PicardRecord {
                seed,
                converged: true,
                iterations: sol.iterations,
                pass: contracting && gap <= threshold && finished(&traj),
                increments: sol.increments,
                ratios: sol.ratios,
                residual: Some(sol.residual),
                sup_l2_gap: Some(gap),
                gap_threshold: threshold,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = records.iter().flat_map(|r| {
        r.increments.iter().enumerate().map(move |(j, inc)| {
            let ratio = if j == 0 { String::new() } else { r.ratios.get(j - 1).map(|x| num(*x)).unwrap_or_default() };
            vec![r.seed.to_string(), (j + 1).to_string(), num(*inc), ratio]
        })
    });
    out.write_csv("picard.csv", &["seed", "iteration", "increment", "ratio"], rows.collect::<Vec<_>>())?;
    let pass = records.iter().all(|r| r.pass);
    out.write_json("picard.json", &json!({ "pass": pass, "runs": records }))?;
    Ok(Verdict {
        pass,
        summary: summary([
            ("seeds", json!(records.len())),
            ("converged", json!(records.iter().filter(|r| r.converged).count())),
            ("max_iterations", json!(records.iter().map(|r| r.iterations).max().unwrap_or(0))),
            ("max_gap", json!(records.iter().filter_map(|r| r.sup_l2_gap).fold(0.0, f64::max))),
            ("gap_threshold", json!(threshold)),
        ]),
        report: "picard.json".into(),
    })
}
