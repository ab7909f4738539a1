//! The whole acceptance suite with a line per criterion as it finishes.

use brentlab::cli::write_report_text;
use brentlab::report::{run_acceptance, ReportConfig};

fn main() -> brentlab::Result<()> {
    let report = run_acceptance(&ReportConfig::default(), |c| {
        eprintln!("criterion {} done in {:.1?}", c.id, c.elapsed);
    })?;
    write_report_text(&mut std::io::stdout(), &report)?;
    std::process::exit(if report.passed() { 0 } else { 3 });
}
