//! One line per acceptance criterion; exits nonzero if any fails.

use std::io::Write;
use std::process::ExitCode;

use brentlab::report::{run_acceptance, ReportConfig};

fn main() -> ExitCode {
    let cfg = ReportConfig::default();
    let mut failed = Vec::new();
    let result = run_acceptance(&cfg, |c| {
        let h = c.headline();
        let mark = if c.passed { "PASS" } else { "FAIL" };
        println!(
            "criterion {} [{mark}] {}: {} = {:.3e} ({:?} {:.1e}) in {:.1?}",
            c.id, c.title, h.name, h.value, h.kind, h.bound, c.elapsed
        );
        for k in c.checks.iter().filter(|k| !k.passed) {
            println!("    failed: {} = {:e} ({:?} {:e})", k.name, k.value, k.kind, k.bound);
        }
        if !c.passed {
            failed.push(c.id);
        }
        let _ = std::io::stdout().flush();
    });
    match result {
        Err(e) => {
            println!("acceptance aborted: {e}");
            ExitCode::FAILURE
        }
        Ok(_) if failed.is_empty() => {
            println!("all 9 criteria passed");
            ExitCode::SUCCESS
        }
        Ok(_) => {
            println!("failed criteria: {failed:?}");
            ExitCode::FAILURE
        }
    }
}
