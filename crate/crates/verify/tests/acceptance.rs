//! Prints one PASS/FAIL line per acceptance criterion and exits non-zero if
//! any criterion fails.

use std::process::ExitCode;
use std::time::Instant;
use wpt::config::RunConfig;
use wpt_verify::criteria::{run, Context, NAMES};

fn main() -> ExitCode {
    let ctx = Context::new(RunConfig::default());
    let mut failed = 0;
    for (i, name) in NAMES.iter().enumerate() {
        let id = i + 1;
        let start = Instant::now();
        let (pass, detail) = match run(id, &ctx) {
            Ok(c) => (c.pass, c.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!pass);
        println!(
            "{} {id:>2} {name}: {detail} [{:.1} s]",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria pass", NAMES.len() - failed, NAMES.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
