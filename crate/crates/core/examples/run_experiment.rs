//! Runs an experiment from a JSON config, as `cat-sched simulate` does, and
//! lists the artifacts.
//!
//!     cargo run --example run_experiment -- configs/reference.json /tmp/reference

use std::path::PathBuf;

use cat_sched::cli::cmd_simulate;

fn main() -> cat_sched::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/reference.json"));
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("cat-sched-experiment"));
    for file in cmd_simulate(&config, None, Some(&out), 4)? {
        println!("{}", file.display());
    }
    Ok(())
}
