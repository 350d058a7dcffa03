//! Desk-scale acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Defaults unless a criterion says otherwise: n = 1, N = 128, k = 3, k' = 7,
//! μ = 0.1, dt = 1e-4.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use transport_hjb::integrators::{integrate, Scheme, SolverConfig, Truncation};
use transport_hjb::mild::{fixed_point_solve, MildProblem};
use transport_hjb::noise::{sample_path, NoisePath};
use transport_hjb::oracles::{
    burgers_companion, cole_hopf_exact, compare, default_max_principle_tol, feynman_kac_mc,
    gamma_convergence_study, max_principle_check, shift_oracle, uniqueness_experiment,
    FeynmanKacSpec, OracleMetadata,
};
use transport_hjb::sampling::random_smooth_field;
use transport_hjb::spectral::{gradient, sup_norm, to_spectral, SpatialField, TorusGrid};
use transport_hjb::transport::TransportOperator;
use transport_hjb::truncation::CutoffSpec;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn grid() -> TorusGrid {
    TorusGrid::new(1, 128).unwrap()
}

fn sin(scale: f64) -> SpatialField {
    SpatialField::from_fn(grid(), move |x| scale * x[0].sin())
}

fn desk(u0: SpatialField, op: TransportOperator) -> SolverConfig {
    let g = u0.grid();
    SolverConfig::desk(u0, SpatialField::zeros(g), op)
}

fn gradient_noise(nu: f64) -> TransportOperator {
    TransportOperator::gradient_noise(grid(), nu).unwrap()
}

fn final_linf(cfg: &SolverConfig, path: &NoisePath, reference: &SpatialField) -> f64 {
    let traj = integrate(cfg, path).unwrap();
    assert!(traj.completed());
    sup_norm(&traj.final_state().sub(reference).unwrap())
}

fn c1_deterministic_oracle() -> Outcome {
    let start = Instant::now();
    let mut cfg = desk(sin(1.0), TransportOperator::zero(grid()));
    cfg.horizon = 0.1;
    let zero = SpatialField::zeros(grid());
    let exact = cole_hopf_exact(&cfg.initial, cfg.mu, &zero, 0.1, &[0.1], 1.0).unwrap();
    let mut errs = Vec::new();
    for dt in [1e-4, 5e-5] {
        cfg.dt = dt;
        let traj = integrate(&cfg, &NoisePath::silent(1, dt, cfg.steps())).unwrap();
        let candidate = [(traj.final_time(), traj.final_state().clone())];
        let meta = OracleMetadata { dt, points: 128, seed: None };
        let report = compare("cole_hopf_exact", &candidate, &exact, 2.0, 1e-4, meta).unwrap();
        errs.push(report.max_linf);
    }
    let ratio = errs[0] / errs[1];
    let secs = start.elapsed().as_secs_f64();
    outcome(
        errs[0] <= 1e-4 && ratio >= 1.8 && secs <= 10.0,
        format!("Linf err {:.3e} at dt=1e-4, halving ratio {ratio:.3}, {secs:.2}s", errs[0]),
    )
}

fn c2_shift_oracle() -> Outcome {
    let start = Instant::now();
    let nu = 0.04;
    let mut cfg = desk(sin(1.0), gradient_noise(nu));
    cfg.scheme = Scheme::StratHeun;
    cfg.horizon = 0.1;
    let fine = sample_path(2024, 1, 5e-5, 2000).unwrap();
    let exact = shift_oracle(&cfg.initial, cfg.mu, nu, &fine, 0.1, &[0.1]).unwrap();
    let mut errs = Vec::new();
    for dt in [1e-4, 5e-5] {
        cfg.dt = dt;
        errs.push(final_linf(&cfg, &fine, &exact[0].1));
    }
    let ratio = errs[0] / errs[1];
    let secs = start.elapsed().as_secs_f64();
    outcome(
        errs[0] <= 5e-3 && ratio >= 1.3 && secs <= 20.0,
        format!("Linf err {:.3e} at dt=1e-4, halving ratio {ratio:.3}, {secs:.2}s", errs[0]),
    )
}

fn c3_maximum_principle() -> Outcome {
    let start = Instant::now();
    let mut cfg = desk(sin(1.0), TransportOperator::constant(grid(), &[-0.2], &[0.0]).unwrap());
    cfg.scheme = Scheme::StratHeun;
    let tol = 1e-3;
    let reports: Vec<_> = (0..16u64)
        .into_par_iter()
        .map(|seed| {
            let path = sample_path(seed, 1, cfg.dt, cfg.steps()).unwrap();
            let traj = integrate(&cfg, &path).unwrap();
            max_principle_check(&cfg, &traj, tol).unwrap()
        })
        .collect();
    let violations: usize = reports.iter().map(|r| r.violations).sum();
    let worst = reports.iter().map(|r| r.worst_margin).fold(f64::NEG_INFINITY, f64::max);
    let secs = start.elapsed().as_secs_f64();
    outcome(
        violations == 0 && secs <= 120.0,
        format!(
            "16 seeds, {violations} violations, worst margin {worst:.3e} (tol {tol:e}, default budget {:.1e}), {secs:.1}s",
            default_max_principle_tol(cfg.dt, 128, 3.0)
        ),
    )
}

fn c4_uniqueness() -> Outcome {
    let op = TransportOperator::constant(grid(), &[-0.2], &[0.05]).unwrap();
    let cfg = desk(sin(1.0), op);
    let twin = uniqueness_experiment(&cfg, 0, 0.0).unwrap();
    let reports: Vec<_> = (0..8u64)
        .into_par_iter()
        .map(|seed| uniqueness_experiment(&cfg, seed, 1e-6).unwrap())
        .collect();
    let held = reports.iter().filter(|r| r.pass).count();
    let worst = reports.iter().map(|r| r.worst_ratio).fold(0.0, f64::max);
    outcome(
        twin.bit_identical && held == 8,
        format!(
            "delta=0 bit-identical: {}; envelope held for {held}/8 seeds, worst gap/envelope {worst:.3e}",
            twin.bit_identical
        ),
    )
}

fn c5_truncation_inactive() -> Outcome {
    let cfg = desk(sin(0.1), gradient_noise(0.04));
    let path = sample_path(5, 1, cfg.dt, cfg.steps()).unwrap();
    let cutoff = CutoffSpec::new(1.0, &grid(), 3.0).unwrap();
    let mut truncated = cfg.clone();
    truncated.truncation = Truncation::On { cutoff, halt_at_stopping: false };
    truncated.snapshot_every = 50;
    let mut plain = cfg.clone();
    plain.snapshot_every = 50;
    let a = integrate(&plain, &path).unwrap();
    let b = integrate(&truncated, &path).unwrap();
    let max_grad = a.diagnostics.iter().map(|d| d.grad_sup).fold(0.0, f64::max);
    let same_fields = a.snapshots == b.snapshots;
    let same_norms = a.diagnostics.iter().zip(&b.diagnostics).all(|(x, y)| x.hk == y.hk && x.l2 == y.l2);
    outcome(
        same_fields && same_norms && max_grad < 1.0,
        format!("max grad {max_grad:.4} < r = 1, bit-identical snapshots: {same_fields}"),
    )
}

fn c6_gamma_convergence() -> Outcome {
    let mut cfg = desk(sin(1.0), gradient_noise(0.04));
    cfg.sample_every = 50;
    let path = sample_path(6, 1, cfg.dt, cfg.steps()).unwrap();
    let study = gamma_convergence_study(&cfg, &[1e-8, 1e-9, 1e-10], &path, 2.0).unwrap();
    let next: Vec<String> = study.rows.iter().map(|r| format!("{:.3e}", r.diff_next)).collect();
    let zero: Vec<String> = study.rows.iter().map(|r| format!("{:.3e}", r.diff_zero)).collect();
    outcome(
        study.pass,
        format!("H2 diffs consecutive [{}], vs gamma=0 [{}]", next.join(", "), zero.join(", ")),
    )
}

fn c7_picard() -> Outcome {
    let mut cfg = desk(sin(1.0), gradient_noise(0.04));
    cfg.gamma = 1e-9;
    cfg.horizon = 0.05;
    let path = sample_path(7, 1, cfg.dt, cfg.steps()).unwrap();
    let prob = MildProblem::new(cfg.clone(), &path).unwrap();
    let sol = match fixed_point_solve(&prob, 1e-10, 100) {
        Ok(s) => s,
        Err(e) => return outcome(false, format!("{e}")),
    };
    let mut stepped = cfg.clone();
    stepped.snapshot_every = 1;
    let traj = integrate(&stepped, &path).unwrap();
    let gap = traj
        .snapshots
        .iter()
        .enumerate()
        .map(|(m, (_, u))| u.sub(&sol.field_at(m)).unwrap().l2_norm())
        .fold(0.0, f64::max);
    let ratios_ok = sol.ratios.iter().all(|&r| r < 1.0);
    outcome(
        ratios_ok && gap <= 10.0 * cfg.dt,
        format!(
            "{} iterations, max ratio {:.3}, sup_t L2 gap {gap:.3e} (<= {:.1e})",
            sol.iterations,
            sol.max_ratio(),
            10.0 * cfg.dt
        ),
    )
}

fn c8_scheme_consistency() -> Outcome {
    // strong error E‖u_heun(T) - u_ito(T)‖_{L²} over a fixed ensemble, every level
    // driven by one bridge-refined path per seed
    let cfg = desk(sin(1.0), gradient_noise(0.04));
    let dts = [4e-4, 2e-4, 1e-4];
    let seeds = 64u64;
    let gaps: Vec<[f64; 3]> = (0..seeds)
        .into_par_iter()
        .map(|seed| {
            let coarse = sample_path(seed, 1, dts[0], (cfg.horizon / dts[0]).round() as usize).unwrap();
            let fine = coarse.refine(seed + 1000).refine(seed + 2000);
            let mut out = [0.0; 3];
            for (slot, &dt) in dts.iter().enumerate() {
                let mut ito = cfg.clone();
                ito.dt = dt;
                let mut heun = ito.clone();
                heun.scheme = Scheme::StratHeun;
                let a = integrate(&ito, &fine).unwrap();
                let b = integrate(&heun, &fine).unwrap();
                out[slot] = a.final_state().sub(b.final_state()).unwrap().l2_norm();
            }
            out
        })
        .collect();
    let n = seeds as f64;
    let mean: Vec<f64> = (0..3).map(|j| gaps.iter().map(|g| g[j]).sum::<f64>() / n).collect();
    let rms: Vec<f64> = (0..3)
        .map(|j| (gaps.iter().map(|g| g[j] * g[j]).sum::<f64>() / n).sqrt())
        .collect();
    let monotone = mean[1] < mean[0] && mean[2] < mean[1];
    let order = (mean[0] / mean[2]).log2() / 2.0;
    let order_rms = (rms[0] / rms[2]).log2() / 2.0;
    outcome(
        monotone && order >= 0.5,
        format!(
            "E gap over {seeds} seeds [{:.3e}, {:.3e}, {:.3e}], strong order {order:.3} (rms-based {order_rms:.3})",
            mean[0], mean[1], mean[2]
        ),
    )
}

fn c9_moments() -> Outcome {
    let cfg = {
        let mut c = desk(sin(0.1), gradient_noise(0.04));
        c.sample_every = 50;
        c
    };
    let runs: Vec<_> = (0..64u64)
        .into_par_iter()
        .map(|seed| integrate(&cfg, &sample_path(seed, 1, cfg.dt, cfg.steps()).unwrap()).unwrap())
        .collect();
    let blowups = runs.iter().filter(|r| !r.completed()).count();
    let samples = runs[0].diagnostics.len();
    let max_moment = (0..samples)
        .map(|s| runs.iter().map(|r| r.diagnostics[s].hk.powi(4)).sum::<f64>() / runs.len() as f64)
        .fold(0.0, f64::max);
    outcome(
        blowups == 0 && max_moment.is_finite(),
        format!("64 seeds, {blowups} blow-ups, max_t E||u||^4_H3 = {max_moment:.4e}"),
    )
}

fn c10_burgers_coupling() -> Outcome {
    let mut cfg = desk(sin(1.0), gradient_noise(0.04));
    cfg.scheme = Scheme::StratHeun;
    cfg.horizon = 0.2;
    cfg.snapshot_every = 20;
    let path = sample_path(10, 1, cfg.dt, cfg.steps()).unwrap();
    let hjb = integrate(&cfg, &path).unwrap();
    let burgers = burgers_companion(&cfg, &path).unwrap();
    let mut gap: f64 = 0.0;
    for ((t, u), (s, v)) in hjb.snapshots.iter().zip(&burgers.snapshots) {
        assert!((t - s).abs() < 1e-12);
        let grad = gradient(&to_spectral(u).unwrap());
        gap = gap.max(grad[0].sub(&v[0]).unwrap().l2_norm());
    }
    outcome(
        gap <= 10.0 * cfg.dt && hjb.snapshots.len() == burgers.snapshots.len(),
        format!("sup_t L2 gap {gap:.3e} over {} samples", hjb.snapshots.len()),
    )
}

fn c11_operator_audit() -> Outcome {
    let g = grid();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for _ in 0..100 {
        let a = random_smooth_field(g, 6, 0.5, &mut rng);
        let b = random_smooth_field(g, 6, 0.5, &mut rng);
        let u = random_smooth_field(g, 12, 1.0, &mut rng);
        let op = TransportOperator::new(vec![a], vec![b]).unwrap();
        let diag = op.operator_bound_diag(&u).unwrap();
        if !diag.holds() {
            failures += 1;
        }
        worst = worst.max(diag.s / diag.bound);
    }
    outcome(failures == 0, format!("100 triples, {failures} violations, max s/bound {worst:.3}"))
}

fn c12_feynman_kac() -> Outcome {
    let start = Instant::now();
    let g = grid();
    let u0 = sin(1.0);
    let zero = SpatialField::zeros(g);
    let mu = 0.1;
    let horizon = 0.1;
    let probes = [0usize, 20, 45, 77, 110];
    let xs: Vec<Vec<f64>> = probes.iter().map(|&j| vec![g.coordinate(j, 0)]).collect();
    let est = feynman_kac_mc(&u0, &zero, mu, horizon, &xs, &FeynmanKacSpec::new(100_000, 12)).unwrap();
    let exact = cole_hopf_exact(&u0, mu, &zero, horizon, &[horizon], 1.0).unwrap();
    let mut worst: f64 = 0.0;
    for (e, &j) in est.iter().zip(&probes) {
        worst = worst.max((e.u - exact[0].1.values()[j]).abs() / e.half_width);
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 3.0 && secs <= 60.0,
        format!("max |MC - exact| / half-width = {worst:.3} at 5 probes, {secs:.2}s"),
    )
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("deterministic Cole-Hopf oracle", c1_deterministic_oracle),
        ("shift oracle", c2_shift_oracle),
        ("gradient maximum principle", c3_maximum_principle),
        ("pathwise uniqueness", c4_uniqueness),
        ("truncation inactivity", c5_truncation_inactive),
        ("gamma convergence", c6_gamma_convergence),
        ("Picard / time-stepper agreement", c7_picard),
        ("scheme consistency", c8_scheme_consistency),
        ("moment boundedness", c9_moments),
        ("Burgers / HJB coupling", c10_burgers_coupling),
        ("operator bound audit", c11_operator_audit),
        ("Feynman-Kac Monte Carlo", c12_feynman_kac),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} [{}] {name}: {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("acceptance: {}/12 passed", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
