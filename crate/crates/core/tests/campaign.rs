use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use transport_hjb::campaign::{
    check_single_hash, file_hash, parse_config, parse_config_str, run_campaign, Status, MANIFEST,
};
use transport_hjb::Error;

const TINY: &str = r#"
campaign = "single"
seeds = [3]
[grid]
points = 32
[solver]
horizon = 0.01
sample_every = 5
snapshot_every = 50
[initial]
preset = "gaussian_bump"
modes = 8
[noise]
preset = "gradient"
nu = 0.04
"#;

fn payloads(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for e in fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else if p.file_name().unwrap() != MANIFEST {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

#[test]
fn rerun_and_worker_count_leave_payloads_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = parse_config_str(TINY).unwrap();
    let first = run_campaign(&cfg, tmp.path(), Some(1)).unwrap();
    assert_eq!(first.status, Status::Pass);
    let before = payloads(&first.dir);
    assert!(before.len() >= 5, "{:?}", before.keys());
    let again = run_campaign(&cfg, tmp.path(), Some(3)).unwrap();
    assert_eq!(again.dir, first.dir);
    assert_eq!(payloads(&again.dir), before);
    let other = tempfile::tempdir().unwrap();
    let elsewhere = run_campaign(&cfg, other.path(), Some(2)).unwrap();
    assert_eq!(payloads(&elsewhere.dir), before);
}

#[test]
fn every_file_carries_the_config_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = parse_config_str(TINY).unwrap();
    let out = run_campaign(&cfg, tmp.path(), None).unwrap();
    let hash = cfg.hash();
    assert_eq!(out.dir.file_name().unwrap().to_str().unwrap(), hash);
    assert_eq!(check_single_hash(&out.dir, Some(&hash)).unwrap().as_deref(), Some(hash.as_str()));
    let diag = fs::read_to_string(out.dir.join("traj/seed_3.csv")).unwrap();
    let mut lines = diag.lines();
    assert_eq!(lines.next().unwrap(), format!("# config_hash={hash}"));
    assert_eq!(lines.next().unwrap(), "t,L2,Hk,grad_sup,theta,mean_mode,event");
    assert_eq!(
        file_hash(&out.dir.join("fields/seed_3_snap_00000.txt")).unwrap().as_deref(),
        Some(hash.as_str())
    );
}

#[test]
fn foreign_artifacts_are_refused() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = parse_config_str(TINY).unwrap();
    let out = run_campaign(&cfg, tmp.path(), None).unwrap();
    fs::write(out.dir.join("intruder.csv"), "# config_hash=0000\nx\n1\n").unwrap();
    assert!(matches!(run_campaign(&cfg, tmp.path(), None), Err(Error::MixedOutput { .. })));
}

#[test]
fn hash_is_stable_and_ignores_output_dir() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a.toml");
    fs::write(&a, TINY).unwrap();
    let b = tmp.path().join("b.toml");
    fs::write(&b, format!("output_dir = \"elsewhere\"\n{TINY}")).unwrap();
    let h = parse_config(&a).unwrap().hash();
    assert_eq!(h, parse_config(&a).unwrap().hash());
    assert_eq!(h, parse_config(&b).unwrap().hash());
    let c = tmp.path().join("c.toml");
    fs::write(&c, TINY.replace("seeds = [3]", "seeds = [4]")).unwrap();
    assert_ne!(h, parse_config(&c).unwrap().hash());
}

#[test]
fn itemized_rejections() {
    let e = match parse_config_str("[solver]\nk = 2.0\nk_prime = 6\n").unwrap().validate() {
        Err(Error::Config(v)) => v,
        other => panic!("{other:?}"),
    };
    assert!(e.iter().any(|m| m.contains("k > n/2 + 2")), "{e:?}");
    assert!(e.iter().any(|m| m.contains("k_prime = 6 is even")), "{e:?}");
    let e = match parse_config_str("[solver]\ndt = 0.05\nscheme = \"strat_heun\"\n").unwrap().validate() {
        Err(Error::Config(v)) => v,
        other => panic!("{other:?}"),
    };
    assert!(e.iter().any(|m| m.contains("unstable dt")), "{e:?}");
    match parse_config_str("[grid]\npoints = 32\nshape = 3\n") {
        Err(Error::Config(v)) => assert!(v[0].starts_with("grid.shape"), "{v:?}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn ensemble_writes_one_trajectory_per_member_and_moments() {
    let tmp = tempfile::tempdir().unwrap();
    let text = TINY
        .replace("campaign = \"single\"", "campaign = \"ensemble\"\nensemble_size = 64")
        .replace("snapshot_every = 50", "snapshot_every = 0");
    let cfg = parse_config_str(&text).unwrap();
    let out = run_campaign(&cfg, tmp.path(), None).unwrap();
    assert_eq!(out.status, Status::Pass);
    assert_eq!(fs::read_dir(out.dir.join("traj")).unwrap().count(), 64);
    let moments = fs::read_to_string(out.dir.join("moments.csv")).unwrap();
    // hash line, header, one row per diagnostics sample (t = 0, 5dt, ..., 100dt)
    assert_eq!(moments.lines().count(), 2 + 21);
    assert!(moments.lines().nth(2).unwrap().starts_with("0,64,"));
}

#[test]
fn dt_refine_reports_an_error_table() {
    let tmp = tempfile::tempdir().unwrap();
    let text = TINY.replace("campaign = \"single\"", "campaign = \"dt_refine\"");
    let cfg = parse_config_str(&text).unwrap();
    let out = run_campaign(&cfg, tmp.path(), None).unwrap();
    let table = fs::read_to_string(out.dir.join("refine.csv")).unwrap();
    let rows: Vec<&str> = table.lines().skip(2).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("4e-4,"));
    let orders = out.summary["observed_orders"].as_array().unwrap();
    assert_eq!(orders.len(), 1);
    assert!(orders[0].as_f64().unwrap().is_finite());
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

#[test]
fn shift_oracle_preset_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = parse_config(&config("shift_oracle.toml")).unwrap();
    let out = run_campaign(&cfg, tmp.path(), None).unwrap();
    assert_eq!(out.status, Status::Pass, "{:?}", out.summary);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["config_hash"], cfg.hash());
}

#[test]
fn sample_configs_all_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.extension().is_some_and(|x| x == "toml") {
            parse_config(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            n += 1;
        }
    }
    assert!(n >= 10);
}

#[test]
fn picard_non_convergence_is_a_check_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let text = TINY
        .replace("campaign = \"single\"", "campaign = \"picard_crosscheck\"")
        .replace("horizon = 0.01", "horizon = 0.01\ngamma = 1e-9")
        + "[picard]\nmax_iter = 2\n";
    let cfg = parse_config_str(&text).unwrap();
    let out = run_campaign(&cfg, tmp.path(), None).unwrap();
    assert_eq!(out.status, Status::Fail);
    assert_eq!(out.summary["converged"], 0);
    assert!(out.report.ends_with("picard.json"));
}
