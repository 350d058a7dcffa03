//! A config-driven campaign written to a hash-named artifact directory.
//!
//! `cargo run --example campaign_from_config -- configs/uniqueness.toml`

use std::path::PathBuf;

use transport_hjb::campaign::{parse_config, parse_config_str, run_campaign};

const DEFAULT: &str = r#"
campaign = "maxprin_check"
seeds = [0, 1, 2, 3]
[solver]
scheme = "strat_heun"
horizon = 0.1
[noise]
preset = "constant"
a = [-0.2]
b = [0.0]
"#;

fn main() -> transport_hjb::Result<()> {
    let cfg = match std::env::args().nth(1) {
        Some(path) => parse_config(&PathBuf::from(path))?,
        None => {
            let cfg = parse_config_str(DEFAULT)?;
            cfg.validate()?;
            cfg
        }
    };
    let root = std::env::temp_dir().join("hjb-campaigns");
    let outcome = run_campaign(&cfg, &root, None)?;
    println!("{} -> {:?}", cfg.campaign.name(), outcome.status);
    for (k, v) in &outcome.summary {
        println!("  {k} = {v}");
    }
    println!("artifacts in {}", outcome.dir.display());
    Ok(())
}
